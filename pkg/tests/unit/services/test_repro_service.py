"""Unit tests for ReproService"""

from unittest.mock import patch

import pytest

from domain.entities.exceptions import ResourceLimitException
from domain.services.repro_service import (
    ENSEMBLE_WEF_HALF,
    REGULAR_WEF_HALF,
    ReproService,
    mirrored,
)

QUICK_CHECKS = ["reference_design", "table_wef_ensemble", "table_wef_enumeration", "kernel_sanity",
                "ga_conservation", "bec_polarization"]


@pytest.fixture(scope="module")
def quick_report():
    return ReproService().run(only=QUICK_CHECKS, seed=11)


class TestReferenceTables:
    """Test the stored reference spectra"""

    def test_mirrored(self):
        """Test the mirrored half fills the upper weights"""
        full = mirrored({0: 1, 4: 8, 16: 5})
        assert full == {0: 1, 4: 8, 16: 5, 28: 8, 32: 1}

    def test_masses(self):
        """Test the ensemble and regular spectra both count 2^16 words"""
        assert sum(mirrored(REGULAR_WEF_HALF).values()) == 2 ** 16
        assert sum(mirrored(ENSEMBLE_WEF_HALF).values()) == pytest.approx(2 ** 16, abs=0.1)


class TestQuickSuite:
    """Test the fast checks and the report layout"""

    def test_report_structure(self, quick_report):
        """Test suite name, seed and one entry per requested check"""
        assert quick_report["suite"] == "quick"
        assert quick_report["seed"] == 11
        assert [c["name"] for c in quick_report["checks"]] == QUICK_CHECKS
        for entry in quick_report["checks"]:
            assert set(entry) == {"name", "passed", "elapsed_s", "detail"}
            assert "passed" not in entry["detail"]

    def test_quick_checks_pass(self, quick_report):
        """Test every quick check passes"""
        failed = [c["name"] for c in quick_report["checks"] if not c["passed"]]
        assert failed == []
        assert quick_report["passed"]

    def test_reference_design_point(self, quick_report):
        """Test the default design point reproduces the reference set inside its interval"""
        assert quick_report["design_es_over_n0_db"] == -1.3
        detail = quick_report["checks"][0]["detail"]
        low, high = detail["reproducing_range_db"]
        assert low <= -7.0 and high >= 0.5

    def test_full_only_checks_skipped(self):
        """Test long-running checks are left out of the quick suite"""
        report = ReproService().run(only=["dmin_multiplicities", "concat_slope"])
        assert report["checks"] == []
        assert report["passed"]

    def test_errors_fail_the_check(self):
        """Test a domain error is reported instead of raised"""
        service = ReproService()
        with patch.object(service, "check_ga_conservation",
                          side_effect=ResourceLimitException("too large")):
            report = service.run(only=["ga_conservation"])
        [entry] = report["checks"]
        assert not entry["passed"]
        assert entry["detail"]["error"] == "too large"
        assert not report["passed"]
