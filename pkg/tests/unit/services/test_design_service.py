"""Unit tests for DesignService"""

import math
from unittest.mock import Mock

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from domain.entities.exceptions import ValidationException
from domain.services.design_service import DesignService
from domain.services.repro_service import REFERENCE_UNFROZEN
from shared.config.settings import settings


class TestJFunction:
    """Test the J function and its inverse"""

    @pytest.fixture
    def service(self):
        return DesignService()

    def test_endpoints(self, service):
        """Test J(0) = 0 and J grows towards 1"""
        assert service.j_function(0.0) == 0.0
        assert service.j_function(100.0) == 1.0
        assert 0.0 < service.j_function(1.0) < service.j_function(2.0) < service.j_function(5.0) < 1.0

    def test_known_value(self, service):
        """Test J(2) against its tabulated value"""
        assert service.j_function(2.0) == pytest.approx(0.486, abs=5e-3)

    @pytest.mark.parametrize("sigma", [0.5, 2.0, 4.0])
    def test_matches_direct_quadrature(self, service, sigma):
        """Test J on table knots against integrating the LLR density directly"""
        mean = sigma * sigma / 2.0

        def integrand(llr):
            return norm.pdf(llr, loc=mean, scale=sigma) * np.logaddexp(0.0, -llr) / math.log(2.0)

        lost, _ = quad(integrand, mean - 40.0 * sigma, mean + 40.0 * sigma,
                       epsabs=1e-14, epsrel=1e-13, limit=500, points=[0.0, mean])
        assert service.j_function(sigma) == pytest.approx(1.0 - lost, abs=1e-9)

    @pytest.mark.parametrize("sigma", [0.3, 1.0, 2.5, 6.0])
    def test_inverse(self, service, sigma):
        """Test J^-1(J(s)) = s"""
        assert service.j_inverse(service.j_function(sigma)) == pytest.approx(sigma, rel=1e-4)

    def test_domain_errors(self, service):
        """Test out-of-domain arguments"""
        with pytest.raises(ValidationException):
            service.j_function(-1.0)
        with pytest.raises(ValidationException):
            service.j_inverse(1.0)


class TestGaEvolution:
    """Test Gaussian-approximation density evolution"""

    @pytest.fixture
    def service(self):
        return DesignService()

    def test_step_conserves_information(self, service):
        """Test the children average to the parent"""
        parents = np.array([0.2, 0.5, 0.8])
        children = service.ga_step(parents)
        assert np.allclose((children[0::2] + children[1::2]) / 2, parents, atol=1e-9)
        assert np.all(children[1::2] >= parents)
        assert np.all(children[0::2] <= parents)

    def test_perfect_and_useless_channels(self, service):
        """Test I = 0 and I = 1 are fixed points"""
        assert service.ga_step(np.array([0.0, 1.0])).tolist() == [0.0, 0.0, 1.0, 1.0]

    def test_profile_levels(self, service):
        """Test level sizes and the mean at every level"""
        levels = service.ga_profile(0.6, 4)
        assert [len(v) for v in levels] == [1, 2, 4, 8, 16]
        for values in levels:
            assert values.mean() == pytest.approx(0.6, abs=1e-9)

    def test_polarization(self, service):
        """Test the best channel improves and the worst degrades"""
        values = service.ga_evolve(0.5, 6)
        assert values[-1] > 0.99
        assert values[0] < 0.01
        assert values[-1] == values.max()


class TestSelection:
    """Test unfrozen-set selection"""

    @pytest.fixture
    def service(self):
        return DesignService()

    def test_classic_length_eight(self, service):
        """Test the (8,4) selection around 0 dB"""
        assert service.select_unfrozen_db(3, 4, 0.0).unfrozen == (3, 5, 6, 7)

    def test_selection_size(self, service):
        """Test the number of selected indices and the best index"""
        spec = service.select_unfrozen_db(6, 20, 1.0)
        assert spec.dimension == 20
        assert 63 in spec.unfrozen
        assert 0 not in spec.unfrozen

    def test_invalid_k(self, service):
        """Test k outside [1, N]"""
        with pytest.raises(ValidationException):
            service.select_unfrozen_db(3, 9, 0.0)

    def test_recover_design_snr(self, service):
        """Test the sweep finds a point reproducing a GA selection"""
        hits = service.recover_design_snr(3, 4, (3, 5, 6, 7), [-1.0, 0.0, 1.0])
        assert 0.0 in hits

    def test_reference_set_at_design_point(self, service):
        """Test GA at the configured reference point gives the (32,16) reference set"""
        spec = service.select_unfrozen_db(5, 16, settings.reference_design_snr_db)
        assert spec.unfrozen == REFERENCE_UNFROZEN

    def test_recover_reference_interval(self, service):
        """Test the whole -7..0.5 dB range reproduces the reference set"""
        grid = [x / 2.0 for x in range(-14, 2)]
        assert service.recover_design_snr(5, 16, REFERENCE_UNFROZEN, grid) == grid

    def test_from_sequence(self, service):
        """Test a most-reliable-first sequence"""
        spec = service.from_sequence([15, 14, 13, 11, 7, 12, 10, 9, 6, 5, 3, 8, 4, 2, 1, 0, 31], 16, 5)
        assert spec.unfrozen == (7, 11, 13, 14, 15)

    def test_from_sequence_duplicates(self, service):
        """Test duplicate indices are rejected"""
        with pytest.raises(ValidationException):
            service.from_sequence([3, 3, 2, 1, 0], 4, 2)

    def test_load_sequence_ascending(self):
        """Test ascending files are reversed before selection"""
        repository = Mock()
        repository.load_sequence.return_value = [0, 1, 2, 4, 3, 5, 6, 7]
        service = DesignService(repository)
        assert service.load_sequence("seq.txt", 8, 3, ascending=True).unfrozen == (5, 6, 7)
        repository.load_sequence.assert_called_once_with("seq.txt")

    def test_load_sequence_without_repository(self, service):
        """Test a missing repository"""
        with pytest.raises(ValidationException):
            service.load_sequence("seq.txt", 8, 3)
