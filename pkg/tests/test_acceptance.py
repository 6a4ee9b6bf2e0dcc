"""
End-to-end reproduction checks. The long-running ones carry the slow
marker: run them with `pytest -m slow tests/test_acceptance.py`.
"""

import json

import pytest

from app.main import main
from domain.entities.types import CoefficientMode
from domain.services.export_service import ExportService
from domain.services.repro_service import REFERENCE_UNFROZEN, ReproService


@pytest.fixture(scope="module")
def repro():
    service = ReproService()
    service.seed = 2024
    return service


class TestReferenceSpectra:
    """Test the (32,16) weight tables"""

    def test_ensemble_table(self, repro):
        """Test the ensemble WEF rounds to the reference table"""
        assert repro.check_table_wef_ensemble(full=True)["passed"]

    def test_enumerated_table(self, repro):
        """Test the regular code's exact spectrum and its zero weights"""
        detail = repro.check_table_wef_enumeration(full=True)
        assert detail["passed"]
        assert detail["zero_at"] == [10, 14, 18, 22]

    @pytest.mark.slow
    def test_sample_average(self, repro):
        """Test 1000 realizations average to the ensemble within 1%"""
        detail = repro.check_sample_vs_ensemble(full=True)
        assert detail["passed"], detail


class TestStructuralChecks:
    """Test decoder, kernel and design consistency"""

    def test_bec_polarization(self, repro):
        """Test random interleavers keep the erasure profile"""
        assert repro.check_bec_polarization(full=True)["passed"]

    def test_ga_conservation(self, repro):
        """Test GA fixed points and pairwise conservation up to M = 10"""
        assert repro.check_ga_conservation(full=True)["passed"]

    @pytest.mark.slow
    def test_kernel_sanity(self, repro):
        """Test kernel sums, mass and truncation for n up to 64"""
        detail = repro.check_kernel_sanity(full=True)
        assert detail["passed"], detail["bad_kernels"]

    @pytest.mark.slow
    def test_list_decoder_is_ml(self, repro):
        """Test L = 256 on a (16,8) code agrees with ML on 10^4 instances"""
        detail = repro.check_scl_ml_agreement(full=True)
        assert detail["agreements"] == detail["instances"] == 10_000


@pytest.mark.slow
class TestLongBlocks:
    """Test 1024-length spectra and simulated orderings"""

    def test_low_weight_multiplicities(self, repro):
        """Test the weight-16 multiplicities of the (1024,512) ensemble and the RRA-aided scheme"""
        assert repro.design_snr_db == -1.3
        detail = repro.check_dmin_multiplicities(full=True)
        inner = repro.design_service.select_unfrozen_db(10, 512, repro.design_snr_db)
        wef = repro.wef_service.ensemble_wef(inner, d_cap=20, mode=CoefficientMode.FLOAT)
        assert wef.d_min == 16
        assert detail["ipolar_a16"] == pytest.approx(42403.31, rel=5e-3)
        assert detail["rra_aided_a16"] == pytest.approx(166.84, rel=1e-2)
        assert detail["rra_aided_a16"] < 0.01 * detail["ipolar_a16"]
        assert detail["passed"]

    def test_bounds_and_simulation(self, repro):
        """Test simulated SCL BLER sits between the ML lower bound and the simple bound"""
        detail = repro.check_bound_ordering(full=True)
        assert detail["bounds_ordered"]
        assert detail["passed"], detail["simulation"]

    def test_concatenated_slope(self, repro):
        """Test the two-block scheme falls faster than the CRC baseline"""
        detail = repro.check_concat_slope(full=True)
        assert detail["passed"], detail["slopes_decades_per_db"]


class TestCommandPipeline:
    """Test design, enumerators and bounds chained through files"""

    def test_design_wef_bound(self, tmp_path):
        """Test the file outputs of one command feed the next"""
        code, wef, bound = (str(tmp_path / name) for name in ("code.json", "wef.csv", "bound.csv"))
        assert main(["design", "--n", "32", "--k", "16", "--design-snr-db=-1.3", "--out", code]) == 0
        with open(code) as fh:
            assert tuple(json.load(fh)["unfrozen"]) == REFERENCE_UNFROZEN
        assert main(["wef", "--spec", code, "--out", wef]) == 0
        assert main(["bound", "--wef", wef, "--n", "32", "--k", "16", "--grid", "0:6:1", "--out", bound]) == 0
        export = ExportService()
        assert export.read_wef(wef).mass == 2 ** 16
        rows = export.read_csv(bound)
        assert len(rows) == 7
        assert float(rows[-1]["union"]) < float(rows[0]["union"])
