"""Unit tests for BoundService"""

import math

import pytest
from scipy.integrate import quad

from domain.entities.exceptions import ValidationException
from domain.entities.polynomials import WeightPoly
from domain.entities.types import SnrPoint, SnrType
from domain.services.bound_service import BoundService
from domain.services.repro_service import ENSEMBLE_WEF_HALF, mirrored


@pytest.fixture
def service():
    return BoundService()


@pytest.fixture
def ensemble_wef():
    return WeightPoly(mirrored(ENSEMBLE_WEF_HALF), length=32).to_float()


class TestQFunction:
    """Test the Gaussian tail"""

    def test_values(self, service):
        """Test Q(0) = 1/2 and Q(1.96) ~ 0.025"""
        assert service.q_function(0.0) == 0.5
        assert service.q_function(1.959964) == pytest.approx(0.025, rel=1e-4)

    def test_tail_quadrature(self, service):
        """Test Q(3) against adaptive quadrature of the Gaussian density"""
        tail, _ = quad(lambda t: math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi), 3.0, math.inf,
                       epsabs=1e-15, epsrel=1e-13)
        assert service.q_function(3.0) == pytest.approx(tail, abs=1e-12)

    def test_vectorized(self, service):
        """Test array input"""
        values = service.q_function([0.0, 1.0, 2.0])
        assert values.shape == (3,)
        assert values[0] > values[1] > values[2]


class TestUnionBound:
    """Test the union bound"""

    def test_single_term(self, service):
        """Test A_d Q(sqrt(2 d rho)) for a one-term WEF"""
        wef = WeightPoly({0: 1, 4: 3})
        expected = 3 * service.q_function(math.sqrt(2 * 4 * 2.0))
        assert service.union_bound(wef, 2.0) == pytest.approx(expected)

    def test_ignores_zero_weight(self, service):
        """Test A_0 does not contribute"""
        assert service.union_bound(WeightPoly({0: 1}), 1.0) == 0.0

    def test_accepts_snr_point(self, service, ensemble_wef):
        """Test SnrPoint and bare rho give the same value"""
        point = SnrPoint.from_esn0_db(2.0)
        assert service.union_bound(ensemble_wef, point) == service.union_bound(ensemble_wef, point.rho)

    def test_invalid_rho(self, service):
        """Test non-positive rho"""
        with pytest.raises(ValidationException):
            service.union_bound(WeightPoly({1: 1}), 0.0)


class TestSimpleBound:
    """Test the simple bound"""

    def test_never_above_union(self, service, ensemble_wef):
        """Test simple <= union on a grid"""
        for db in (-2.0, 0.0, 2.0, 4.0, 6.0):
            point = SnrPoint.from_esn0_db(db)
            assert service.simple_bound(ensemble_wef, point, 32, 16) <= service.union_bound(ensemble_wef, point) + 1e-12

    def test_tighter_at_low_snr(self, service, ensemble_wef):
        """Test the exponential term wins where the union bound is loose"""
        point = SnrPoint.from_ebn0_db(0.0, 0.5)
        assert service.simple_bound(ensemble_wef, point, 32, 16) < service.union_bound(ensemble_wef, point)

    def test_audit_records(self, service, ensemble_wef):
        """Test audit records cover the summed weights"""
        total, records = service.simple_bound(ensemble_wef, 1.0, 32, 16, audit=True)
        assert [r["d"] for r in records] == [4, 8, 10, 12, 14, 16]
        assert total == pytest.approx(sum(r["term"] for r in records))
        assert all(r["term"] <= r["union_term"] + 1e-15 for r in records)

    def test_exponent_branches(self, service):
        """Test the tight region and the linear fallback"""
        _, branch = service.exponent(rho=0.001, delta=0.3, r=0.2)
        assert branch == "linear"
        value, branch = service.exponent(rho=1.0, delta=0.25, r=0.3)
        assert branch == "tight"
        assert math.isfinite(value)

    def test_invalid_sizes(self, service, ensemble_wef):
        """Test k outside [1, n]"""
        with pytest.raises(ValidationException):
            service.simple_bound(ensemble_wef, 1.0, 32, 40)


class TestBoundCurve:
    """Test bound tabulation"""

    def test_rows(self, service, ensemble_wef):
        """Test rows, rate handling and monotone decrease"""
        rows = service.bound_curve(ensemble_wef, [1.0, 2.0, 3.0], SnrType.EBN0, 32, 16)
        assert [r["snr_db"] for r in rows] == [1.0, 2.0, 3.0]
        assert rows[0]["es_over_n0_db"] == pytest.approx(1.0 - 10 * math.log10(2))
        assert rows[0]["union"] > rows[1]["union"] > rows[2]["union"]
        assert rows[0]["simple"] >= rows[2]["simple"]

    def test_esn0_grid(self, service, ensemble_wef):
        """Test Es/N0 grids pass through unchanged"""
        rows = service.bound_curve(ensemble_wef, [0.0], SnrType.ESN0, 32, 16)
        assert rows[0]["rho"] == pytest.approx(1.0)
