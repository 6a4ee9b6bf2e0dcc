"""Unit tests for core types and enums"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from domain.entities.types import (
    BlerEstimate,
    CandidateList,
    ChannelParams,
    CoefficientMode,
    DecoderType,
    RunManifest,
    SnrPoint,
    SnrType,
    StopRule,
    ebn0_to_esn0_db,
    esn0_to_ebn0_db,
)


class TestEnums:
    """Test core enums"""

    def test_decoder_type_enum(self):
        """Test DecoderType enum values"""
        assert DecoderType.SC == "sc"
        assert DecoderType.SCL == "scl"
        assert DecoderType.ML == "ml"
        assert DecoderType.UNCODED == "uncoded"

    def test_misc_enums(self):
        """Test SnrType and CoefficientMode values"""
        assert SnrType("ebn0") is SnrType.EBN0
        assert CoefficientMode("float") is CoefficientMode.FLOAT


class TestSnr:
    """Test SNR conversions"""

    def test_half_rate_offset(self):
        """Test Es/N0 = Eb/N0 - 3.01 dB at rate 1/2"""
        assert ebn0_to_esn0_db(4.0, 0.5) == pytest.approx(4.0 - 10 * math.log10(2))
        assert esn0_to_ebn0_db(ebn0_to_esn0_db(2.5, 0.75), 0.75) == pytest.approx(2.5)

    def test_snr_point_from_db(self):
        """Test rho is linear Es/N0"""
        point = SnrPoint.from_db(3.0, SnrType.EBN0, rate=0.5)
        assert point.rho == pytest.approx(10 ** ((3.0 - 10 * math.log10(2)) / 10))
        assert point.eb_over_n0_db == pytest.approx(3.0)
        assert SnrPoint.from_db(0.0, SnrType.ESN0, rate=0.5).rho == pytest.approx(1.0)

    def test_channel_params(self):
        """Test noise std and LLR scale"""
        params = ChannelParams.from_esn0_db(0.0)
        assert params.n0 == pytest.approx(1.0)
        assert params.noise_std == pytest.approx(math.sqrt(0.5))
        assert params.llr_scale == pytest.approx(4.0)


class TestBlerEstimate:
    """Test BlerEstimate validation"""

    def test_valid_estimate(self):
        """Test a consistent estimate"""
        est = BlerEstimate(snr_db=1.0, es_over_n0_db=-2.0, trials=100, block_errors=10, ml_lb_events=3,
                           bler=0.1, ml_lb=0.03, ci_low=0.05, ci_high=0.17)
        assert est.ci95 == (0.05, 0.17)

    def test_ml_lb_above_errors_rejected(self):
        """Test ml_lb_events may not exceed block_errors"""
        with pytest.raises(ValidationError):
            BlerEstimate(snr_db=1.0, es_over_n0_db=1.0, trials=10, block_errors=1, ml_lb_events=2,
                         bler=0.1, ml_lb=0.2, ci_low=0.0, ci_high=0.4)

    def test_stop_rule_defaults(self):
        """Test StopRule defaults and bounds"""
        assert StopRule().min_errors == 100
        with pytest.raises(ValidationError):
            StopRule(min_errors=0)


class TestCandidateList:
    """Test CandidateList container"""

    def test_entries_and_best(self):
        """Test rows keep their order"""
        cl = CandidateList(np.array([[1, 0], [0, 1]]), np.array([0.0, 2.5]), capacity=4)
        assert len(cl) == 2
        assert cl.best.tolist() == [1, 0]
        assert cl.entries()[1][1] == 2.5


class TestRunManifest:
    """Test provenance headers"""

    def test_header_lines(self):
        """Test header keys and extras"""
        manifest = RunManifest(command="wef", config_digest="abc", seed=5, tool_version="0.1.0",
                               extra={"n": 32})
        lines = manifest.header_lines()
        assert lines[0] == "# command: wef"
        assert "# seed: 5" in lines
        assert "# n: 32" in lines
        assert all(line.startswith("# ") for line in lines)
