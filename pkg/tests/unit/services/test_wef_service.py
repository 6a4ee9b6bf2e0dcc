"""Unit tests for WefService"""

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from domain.entities.code import InterleaverSet
from domain.entities.exceptions import ResourceLimitException, ValidationException
from domain.entities.outer import RraSpec
from domain.entities.polynomials import IOWeightPoly, WeightPoly
from domain.entities.types import CoefficientMode
from domain.services.outer_code_service import OuterCodeService
from domain.services.polar_service import build_code_spec
from domain.services.repro_service import ENSEMBLE_WEF_HALF, REGULAR_WEF_HALF, mirrored
from domain.services.wef_service import WefService, combine_kernel, combine_kernel_float


class TestKernel:
    """Test the uniform-interleaver merge kernel"""

    @hyp_settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_probabilities_sum_to_one(self, data):
        """Test every kernel is a probability distribution"""
        n = data.draw(st.integers(1, 40))
        d1 = data.draw(st.integers(0, n))
        d2 = data.draw(st.integers(0, n))
        kernel = combine_kernel(n, d1, d2)
        assert sum(p for _, p in kernel) == 1
        assert all(0 <= w <= 2 * n for w, _ in kernel)

    def test_known_kernel(self):
        """Test n=2, d1=d2=1"""
        assert dict(combine_kernel(2, 1, 1)) == {3: Fraction(1, 2), 1: Fraction(1, 2)}

    def test_float_matches_exact(self):
        """Test the log-gamma kernel against the exact one"""
        weights, probs = combine_kernel_float(32, 7, 12)
        exact = dict(combine_kernel(32, 7, 12))
        for w, p in zip(weights.tolist(), probs.tolist()):
            assert p == pytest.approx(float(exact[w]), rel=1e-9)


class TestEnsembleWef:
    """Test the ensemble WEF recursion"""

    @pytest.fixture
    def service(self):
        return WefService()

    def test_reference_table(self, service, reference_spec):
        """Test the (32,16) ensemble spectrum"""
        wef = service.ensemble_wef(reference_spec)
        assert wef.mode is CoefficientMode.RATIONAL
        assert wef.rounded(2) == mirrored(ENSEMBLE_WEF_HALF)

    def test_mass_and_zero_weight(self, service, reference_spec):
        """Test sum A_d = 2^K and A_0 = 1"""
        wef = service.ensemble_wef(reference_spec)
        assert wef.mass == 2 ** 16
        assert wef[0] == 1

    def test_float_mode_agrees(self, service, reference_spec):
        """Test float and rational recursions agree"""
        exact = service.ensemble_wef(reference_spec)
        approx = service.ensemble_wef(reference_spec, mode=CoefficientMode.FLOAT)
        for d, a in exact.items():
            assert approx[d] == pytest.approx(float(a), rel=1e-9)

    def test_d_cap_equals_truncation(self, service, reference_spec):
        """Test capped recursion is the truncated full spectrum"""
        assert service.ensemble_wef(reference_spec, d_cap=12) == service.ensemble_wef(reference_spec).truncate(12)

    def test_rate_one_code(self, service):
        """Test the all-unfrozen ensemble is the full space"""
        wef = service.ensemble_wef(build_code_spec(3, range(8)))
        assert wef.as_dict() == {d: Fraction(math.comb(8, d)) for d in range(9)}

    def test_iowef_marginal(self, service, small_spec):
        """Test A(1, Y) equals the WEF"""
        iowef = service.ensemble_iowef(small_spec)
        assert iowef.marginal() == service.ensemble_wef(small_spec)
        assert iowef.input_length == 8

    def test_iowef_over_every_realization(self, service, polar_service, tiny_spec):
        """Test the (8,4) ensemble IOWEF is the average over all 96 interleaver sets"""
        msgs = ((np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1).astype(np.uint8)
        counts = Counter()
        realizations = 0
        for p10, p11, p20 in itertools.product(
            itertools.permutations(range(2)), itertools.permutations(range(2)), itertools.permutations(range(4))
        ):
            ils = InterleaverSet(m_exp=3, perms={(1, 0): p10, (1, 1): p11, (2, 0): p20})
            codewords = polar_service.ipolar_encode(msgs, tiny_spec, ils)
            counts.update(zip(msgs.sum(axis=1).tolist(), codewords.sum(axis=1).tolist()))
            realizations += 1
        assert realizations == 96
        expected = {key: Fraction(count, realizations) for key, count in counts.items()}
        iowef = service.ensemble_iowef(tiny_spec)
        assert {key: c for key, c in iowef.items() if c} == expected

    def test_budget(self, service, reference_spec, settings_override):
        """Test a tiny term budget triggers the resource limit"""
        settings_override(wef_term_budget=10)
        with pytest.raises(ResourceLimitException):
            service.ensemble_wef(reference_spec)

    def test_budget_counts_capped_terms(self, service, reference_spec, settings_override):
        """Test a capped run is charged only for the weights it keeps"""
        settings_override(wef_term_budget=200)
        with pytest.raises(ResourceLimitException) as exc_info:
            service.ensemble_wef(reference_spec)
        assert "set d_cap" in exc_info.value.message
        capped = service.ensemble_wef(reference_spec, d_cap=4)
        assert capped.as_dict() == {0: 1, 4: 8}
        iowef = service.ensemble_iowef(reference_spec, d_cap=4)
        assert iowef.marginal() == capped

    def test_budget_message_for_capped_runs(self, service, reference_spec, settings_override):
        """Test a capped run that still exceeds the budget asks for a lower cap"""
        settings_override(wef_term_budget=1)
        with pytest.raises(ResourceLimitException) as exc_info:
            service.ensemble_iowef(reference_spec, d_cap=8)
        assert "lower d_cap (now 8)" in exc_info.value.message

    def test_mode_resolution(self, service, settings_override):
        """Test the length threshold for exact arithmetic"""
        settings_override(rational_max_block_len=64)
        assert service.resolve_mode(64, None) is CoefficientMode.RATIONAL
        assert service.resolve_mode(128, None) is CoefficientMode.FLOAT
        assert service.resolve_mode(128, CoefficientMode.RATIONAL) is CoefficientMode.RATIONAL

    def test_combine_degree_check(self, service):
        """Test components heavier than the half length"""
        with pytest.raises(ValidationException):
            service.combine_wef(WeightPoly({0: 1, 5: 1}), WeightPoly({0: 1}), 4)


class TestEnumeration:
    """Test exhaustive enumeration of realizations"""

    @pytest.fixture
    def service(self):
        return WefService()

    def test_regular_reference_code(self, service, reference_spec):
        """Test the regular (32,16) spectrum"""
        wef = service.realization_wef(reference_spec)
        assert wef.as_dict() == {d: Fraction(a) for d, a in mirrored(REGULAR_WEF_HALF).items()}

    def test_reed_muller_length_eight(self, service, tiny_spec):
        """Test the (8,4) code is RM(1,3)"""
        assert service.realization_wef(tiny_spec).as_dict() == {0: 1, 4: 14, 8: 1}

    def test_realization_mass(self, service, reference_spec, seeded_interleavers):
        """Test any realization has 2^K codewords"""
        assert service.realization_wef(reference_spec, seeded_interleavers(5, 3)).mass == 2 ** 16

    def test_iowef_counts(self, service, tiny_spec):
        """Test input weights of the (8,4) code"""
        iowef = service.enumerate_iowef_exhaustive(service.polar_service.encoder_for(tiny_spec), 4)
        assert sum(c for (w, _), c in iowef.items() if w == 1) == 4
        assert iowef[(0, 0)] == 1

    def test_limit(self, service, settings_override):
        """Test the message-count limit"""
        settings_override(exhaustive_max_k=4)
        with pytest.raises(ResourceLimitException):
            service.enumerate_wef_exhaustive(lambda m: m, 5)

    def test_sample_average(self, service, small_spec):
        """Test the sample mean keeps the total mass"""
        mean, stderr, wefs = service.sample_average_wef(small_spec, 20, seed=1)
        assert mean.mass == pytest.approx(2 ** 8)
        assert len(wefs) == 20
        assert set(stderr) == set(mean.support())
        classes = service.classify_realizations(wefs)
        assert sum(count for _, count in classes) == 20
        assert classes[0][1] >= classes[-1][1]

    def test_sample_average_is_close_to_ensemble(self, service, small_spec):
        """Test the sample mean approaches the ensemble average"""
        ensemble = service.ensemble_wef(small_spec)
        mean, stderr, _ = service.sample_average_wef(small_spec, 200, seed=5)
        for d, a in ensemble.items():
            if a >= 1:
                assert abs(mean[d] - float(a)) <= 5 * stderr.get(d, 0.0) + 0.1 * float(a)


class TestConcatAlgebra:
    """Test powers, serial concatenation and outer closed forms"""

    @pytest.fixture
    def service(self):
        return WefService()

    def test_power(self, service):
        """Test (1 + Y)^3"""
        wef = service.power_wef(WeightPoly({0: 1, 1: 1}, length=1), 3)
        assert wef.as_dict() == {0: 1, 1: 3, 2: 3, 3: 1}
        assert wef.length == 3

    def test_power_with_cap(self, service):
        """Test capped powers drop heavy terms"""
        assert service.power_wef(WeightPoly({0: 1, 1: 1}), 4, d_cap=2).as_dict() == {0: 1, 1: 4, 2: 6}

    def test_power_iowef(self, service):
        """Test two copies of a repetition code"""
        rep = IOWeightPoly({(0, 0): 1, (1, 2): 1}, input_length=1, length=2)
        squared = service.power_iowef(rep, 2)
        assert squared.as_dict() == {(0, 0): 1, (1, 2): 2, (2, 4): 1}
        assert squared.input_length == 2 and squared.length == 4

    def test_serial_mass(self, service):
        """Test a full-rank inner code preserves the outer codeword count"""
        outer = service.power_wef(service.hamming_wef(3), 1)
        inner = service.ensemble_iowef(build_code_spec(4, range(9, 16)))
        wef = service.serial_concat_wef(outer, inner)
        assert wef.mass == 16
        assert wef[0] == 1

    def test_serial_length_check(self, service, small_spec):
        """Test outer length and inner input length must agree"""
        with pytest.raises(ValidationException):
            service.serial_concat_wef(service.hamming_wef(3), service.ensemble_iowef(small_spec))

    def test_hamming_closed_form(self, service):
        """Test the (7,4) spectrum and agreement with enumeration"""
        assert service.hamming_wef(3).as_dict() == {0: 1, 3: 7, 4: 7, 7: 1}
        outer = OuterCodeService()
        enumerated = service.enumerate_wef_exhaustive(lambda m: outer.bch_encode(m, 4), 11)
        assert service.hamming_wef(4) == enumerated

    def test_hamming_mass(self, service):
        """Test the (63,57) code has 2^57 words"""
        assert service.hamming_wef(6).mass == 2 ** 57

    def test_rra_mass(self, service):
        """Test the RRA ensemble keeps 2^k words"""
        wef = service.rra_wef(8, 3, 8)
        assert wef.mass == 2 ** 8
        assert wef[0] == 1
        assert wef.length == 16

    @pytest.mark.parametrize("k, dv, m_parity", [(4, 3, 4), (6, 2, 3), (5, 3, 5), (4, 3, 2)])
    def test_rra_matches_every_placement(self, service, k, dv, m_parity):
        """Test the RRA recursion against running the accumulator on every placement of the repeated bits"""
        length = k * dv
        dc = length // m_parity
        expected = {}
        for w in range(k + 1):
            parity_weights = Counter()
            for ones in itertools.combinations(range(length), dv * w):
                bits = np.zeros(length, dtype=np.uint8)
                bits[list(ones)] = 1
                states = np.cumsum(bits) % 2
                parity_weights[int(states[dc - 1::dc].sum())] += 1
            scale = Fraction(math.comb(k, w), math.comb(length, dv * w))
            for p, count in parity_weights.items():
                expected[w + p] = expected.get(w + p, 0) + scale * count
        assert service.rra_wef(k, dv, m_parity).as_dict() == expected

    def test_rra_matches_sample_mean(self, service):
        """Test the closed form against seeded RRA encoders"""
        outer = OuterCodeService()
        closed = service.rra_wef(4, 2, 4)
        counts = np.zeros(9)
        draws = 1000
        for seed in range(draws):
            spec = RraSpec(k=4, dv=2, m_parity=4, perm_seed=seed)
            realized = service.enumerate_wef_exhaustive(lambda m: outer.rra_encode(m, spec), 4)
            for d, a in realized.items():
                counts[d] += float(a)
        mean = counts / draws
        for d, a in closed.items():
            assert mean[d] == pytest.approx(float(a), abs=0.35)
