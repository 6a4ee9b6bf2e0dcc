"""Unit tests for SimulationService"""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from domain.entities.exceptions import ValidationException
from domain.entities.outer import CrcSpec
from domain.entities.scenario import Scenario, ScenarioDocument
from domain.entities.types import ChannelParams, DecoderType, SnrType, StopRule
from domain.services.simulation_service import (
    SimulationService,
    execute_batch,
    scenario_from_payload,
    scenario_to_payload,
    trial_generator,
    wilson_interval,
)
from infrastructure.storage.file_repository import FileArtifactRepository


@pytest.fixture
def service():
    return SimulationService()


@pytest.fixture
def scl_scenario(small_spec, seeded_interleavers):
    return Scenario(
        name="scl-16-8",
        code=small_spec,
        interleavers=seeded_interleavers(4),
        decoder=DecoderType.SCL,
        list_size=4,
        snr_db=[1.0, 3.0],
        stop=StopRule(min_errors=10_000, max_trials=120),
        seed=42,
    )


class TestWilsonInterval:
    """Test the Wilson score interval"""

    def test_zero_errors(self):
        """Test 0 of 10 gives the closed-form upper end"""
        low, high = wilson_interval(0, 10)
        assert low == 0.0
        assert high == pytest.approx(1.96 ** 2 / (10 + 1.96 ** 2), rel=1e-6)

    def test_symmetric(self):
        """Test half successes centre on one half"""
        low, high = wilson_interval(5, 10)
        assert (low + high) / 2 == pytest.approx(0.5)
        assert low == pytest.approx(0.2366, abs=1e-4)

    def test_no_trials(self):
        """Test the uninformative interval"""
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_invalid_counts(self):
        """Test k > n"""
        with pytest.raises(ValidationException):
            wilson_interval(11, 10)


class TestRandomness:
    """Test counter-based trial streams and the channel"""

    def test_trial_streams(self):
        """Test streams depend only on (seed, snr index, trial)"""
        a = trial_generator(7, 1, 33).standard_normal(5)
        assert np.array_equal(a, trial_generator(7, 1, 33).standard_normal(5))
        assert not np.array_equal(a, trial_generator(7, 1, 34).standard_normal(5))
        assert not np.array_equal(a, trial_generator(7, 2, 33).standard_normal(5))
        assert not np.array_equal(a, trial_generator(8, 1, 33).standard_normal(5))

    def test_awgn_llr_statistics(self, service):
        """Test LLR mean 4 Es/N0 and variance 8 Es/N0 for the zero word"""
        params = ChannelParams.from_esn0_db(0.0)
        llr = service.awgn_llr(np.zeros(200_000), params, np.random.default_rng(3))
        assert llr.mean() == pytest.approx(4.0, rel=0.02)
        assert llr.var() == pytest.approx(8.0, rel=0.02)


class TestPayload:
    """Test worker payloads"""

    def test_round_trip(self, scl_scenario):
        """Test a scenario survives the JSON payload"""
        payload = json.loads(json.dumps(scenario_to_payload(scl_scenario)))
        assert scenario_from_payload(payload) == scl_scenario
        assert len(payload["digest"]) == 64

    def test_concat_round_trip(self, service, reference_spec):
        """Test concatenated schemes survive the payload"""
        scheme = service.outer_code_service.build_concat_scheme(
            CrcSpec(preset="g8B"), reference_spec, interleaver_seed=2, outer_perm_seed=5,
        )
        scenario = Scenario(concat=scheme, snr_db=[2.0], list_size=2)
        payload = json.loads(json.dumps(scenario_to_payload(scenario)))
        assert scenario_from_payload(payload).concat == scheme

    def test_malformed(self):
        """Test payloads with missing keys"""
        with pytest.raises(ValidationException):
            scenario_from_payload({"name": "x"})

    def test_execute_batch_is_deterministic(self, scl_scenario):
        """Test the same batch gives the same counts"""
        payload = scenario_to_payload(scl_scenario)
        assert execute_batch(payload, 0, 0.0, 0, 30) == execute_batch(payload, 0, 0.0, 0, 30)


class TestRunBler:
    """Test BLER estimation"""

    def test_batching_does_not_change_counts(self, service, scl_scenario):
        """Test batch size and job count leave the counts unchanged"""
        a = service.run_bler(scl_scenario, batch_size=120)
        b = service.run_bler(scl_scenario, batch_size=25)
        c = service.run_bler(scl_scenario, batch_size=25, jobs=2)
        for x, y, z in zip(a, b, c):
            assert x.trials == y.trials == z.trials == 120
            assert x.block_errors == y.block_errors == z.block_errors
            assert x.ml_lb_events == y.ml_lb_events == z.ml_lb_events

    def test_stop_on_errors(self, service, scl_scenario):
        """Test the run stops after the batch reaching min_errors"""
        stop = StopRule(min_errors=1, max_trials=10_000)
        [estimate] = service.run_bler(scl_scenario, snr_db=[-3.0], stop=stop, batch_size=10)
        assert estimate.block_errors >= 1
        assert estimate.trials % 10 == 0
        assert estimate.trials <= 10_000

    def test_error_stop_granularity(self, service, scl_scenario):
        """Test an error-stopped run ends with the batch holding the first error, whatever the job count"""
        stop = StopRule(min_errors=1, max_trials=10_000)
        [single] = service.run_bler(scl_scenario, snr_db=[-3.0], stop=stop, batch_size=1)
        [tens] = service.run_bler(scl_scenario, snr_db=[-3.0], stop=stop, batch_size=10)
        [tens_parallel] = service.run_bler(scl_scenario, snr_db=[-3.0], stop=stop, batch_size=10, jobs=3)
        assert single.block_errors == 1
        assert tens.trials == math.ceil(single.trials / 10) * 10
        assert (tens_parallel.trials, tens_parallel.block_errors) == (tens.trials, tens.block_errors)

    def test_noiseless(self, service, scl_scenario):
        """Test an infinite SNR gives no errors"""
        [estimate] = service.run_bler(scl_scenario, snr_db=[math.inf], batch_size=60)
        assert estimate.block_errors == 0
        assert estimate.bler == 0.0
        assert estimate.ci_low == 0.0

    def test_uncoded(self, service):
        """Test uncoded BPSK against Q(sqrt(2 Es/N0))"""
        scenario = Scenario(decoder=DecoderType.UNCODED, snr_db=[0.0], snr_type=SnrType.ESN0,
                            stop=StopRule(min_errors=10**9, max_trials=40_000), seed=1)
        [estimate] = service.run_bler(scenario, batch_size=10_000)
        expected = 0.5 * math.erfc(1.0)
        assert estimate.bler == pytest.approx(expected, abs=0.006)
        assert estimate.ci_low < estimate.bler < estimate.ci_high

    def test_ml_decoder_counts(self, service, tiny_spec):
        """Test ML events never exceed errors"""
        scenario = Scenario(code=tiny_spec, decoder=DecoderType.ML, snr_db=[0.0],
                            stop=StopRule(min_errors=10**6, max_trials=200), seed=3)
        [estimate] = service.run_bler(scenario)
        assert estimate.ml_lb_events <= estimate.block_errors <= estimate.trials

    def test_full_list_errors_are_ml_events(self, service, tiny_spec):
        """Test a full-list decoder only makes ML-detectable errors"""
        scenario = Scenario(code=tiny_spec, decoder=DecoderType.SCL, list_size=16, snr_db=[-1.0],
                            snr_type=SnrType.ESN0, stop=StopRule(min_errors=10**6, max_trials=300), seed=9)
        [estimate] = service.run_bler(scenario)
        assert estimate.block_errors > 0
        assert estimate.ml_lb_events == estimate.block_errors

    def test_bounds_columns(self, service, scl_scenario):
        """Test bound columns are filled when a WEF is given"""
        wef = service.outer_code_service.wef_service.ensemble_wef(scl_scenario.code)
        estimates = service.run_bler(scl_scenario, wef=wef)
        assert all(e.union_bound is not None and e.simple_bound is not None for e in estimates)
        assert estimates[0].union_bound > estimates[1].union_bound

    def test_concat_scenario(self, service, reference_spec):
        """Test a CRC-aided scenario runs end to end"""
        scheme = service.outer_code_service.build_concat_scheme(CrcSpec(preset="g8A"), reference_spec,
                                                                interleaver_seed=4)
        scenario = Scenario(concat=scheme, decoder=DecoderType.SCL, list_size=4, snr_db=[2.0],
                            stop=StopRule(min_errors=10**6, max_trials=40), seed=2)
        [estimate] = service.run_bler(scenario)
        assert estimate.trials == 40
        assert 0.0 <= estimate.bler <= 1.0

    def test_unknown_backend(self, service, scl_scenario):
        """Test back end validation"""
        with pytest.raises(ValidationException):
            service.run_bler(scl_scenario, backend="threads")


class TestBuildScenario:
    """Test scenario resolution from documents"""

    def test_relative_paths(self, service, tmp_path, small_spec):
        """Test file references resolve next to the scenario file"""
        repo = FileArtifactRepository()
        repo.save_code_spec(small_spec, str(tmp_path / "code.json"))
        document = ScenarioDocument(code_file="code.json", interleaver_seed=3, snr_db=[1.0])
        scenario = service.build_scenario(document, repo, base_path=str(tmp_path / "scenario.json"))
        assert scenario.code == small_spec
        assert scenario.interleavers == service.polar_service.sample_interleavers(4, 3)

    def test_inline_outer(self, service, tmp_path, reference_spec):
        """Test an inline CRC outer code builds a scheme"""
        repo = FileArtifactRepository()
        repo.save_code_spec(reference_spec, str(tmp_path / "code.json"))
        document = ScenarioDocument.model_validate({
            "code_file": "code.json", "outer": {"type": "crc", "preset": "g8A"},
            "interleaver_seed": 1, "snr_db": [2.0],
        })
        scenario = service.build_scenario(document, repo, base_path=str(tmp_path / "s.json"))
        assert scenario.concat.overall_k == 8
        assert scenario.rate == 0.25

    def test_uncoded_needs_no_code(self, service):
        """Test the uncoded reference scenario"""
        document = ScenarioDocument(decoder="uncoded", snr_db=[0.0])
        scenario = service.build_scenario(document, FileArtifactRepository())
        assert scenario.block_len == 1 and scenario.rate == 1.0

    def test_coded_needs_code(self):
        """Test a coded document without a code file"""
        with pytest.raises(ValidationError):
            ScenarioDocument(decoder="scl", snr_db=[0.0])
