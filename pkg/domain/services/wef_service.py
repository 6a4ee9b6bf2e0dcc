"""
Weight enumerators: exact ensemble WEF/IOWEF of i-polar codes under the
uniform-interleaver assumption, exhaustive enumeration of realizations,
concatenated-code assembly and outer-code closed forms.
"""

import logging
import math
import time
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from ..entities.code import CodeSpec
from ..entities.exceptions import ResourceLimitException, ValidationException
from ..entities.polynomials import IOWeightPoly, WeightPoly
from ..entities.types import CoefficientMode
from .polar_service import PolarService
from shared.config.settings import settings

logger = logging.getLogger(__name__)

Encoder = Callable[[np.ndarray], np.ndarray]

_ENUM_CHUNK = 1 << 16


def _log_comb(n, k):
    return gammaln(np.asarray(n, dtype=float) + 1) - gammaln(np.asarray(k, dtype=float) + 1) \
        - gammaln(np.asarray(n, dtype=float) - np.asarray(k, dtype=float) + 1)


def _log_coeff(c) -> float:
    """log of a non-negative coefficient without overflowing on huge rationals"""
    if isinstance(c, Fraction):
        if c == 0:
            return -math.inf
        return math.log(c.numerator) - math.log(c.denominator)
    if c <= 0:
        return -math.inf
    return math.log(c)


@lru_cache(maxsize=None)
def combine_kernel(n: int, d1: int, d2: int) -> Tuple[Tuple[int, Fraction], ...]:
    """
    Exact distribution of the merged weight when a uniformly permuted
    weight-d1 word is XORed onto a weight-d2 word of length n.

    Returns (d1 + 2*d2 - 2*k, P[overlap = k]) pairs for the admissible k.
    """
    denom = math.comb(n, d1)
    return tuple(
        (d1 + 2 * d2 - 2 * k, Fraction(math.comb(d2, k) * math.comb(n - d2, d1 - k), denom))
        for k in range(max(0, d1 + d2 - n), min(d1, d2) + 1)
    )


@lru_cache(maxsize=None)
def combine_kernel_float(n: int, d1: int, d2: int) -> Tuple[np.ndarray, np.ndarray]:
    """Log-gamma evaluation of combine_kernel for large n"""
    ks = np.arange(max(0, d1 + d2 - n), min(d1, d2) + 1)
    logp = _log_comb(d2, ks) + _log_comb(n - d2, d1 - ks) - _log_comb(n, d1)
    return d1 + 2 * d2 - 2 * ks, np.exp(logp)


def _kernel_work(cols_a: Iterable[int], cols_b: Iterable[int], d_cap: Optional[int]) -> int:
    """Kernel terms of one merge, counted over the output weights that survive d_cap"""
    a = [d for d in cols_a if d_cap is None or d <= d_cap]
    b = [d for d in cols_b if d_cap is None or d <= d_cap]
    if not a or not b:
        return 0
    return len(a) * len(b) * (min(max(a), max(b)) + 1)


def _check_budget(work: int, what: str, d_cap: Optional[int]) -> None:
    if work <= settings.wef_term_budget:
        return
    hint = "set d_cap to truncate high-weight terms" if d_cap is None else f"lower d_cap (now {d_cap})"
    raise ResourceLimitException(
        f"{what} needs about {work:,} kernel terms (budget {settings.wef_term_budget:,}); "
        f"{hint} or raise IPOLAR_WEF_TERM_BUDGET"
    )


def _out_size(n: int, d_cap: Optional[int]) -> int:
    return (2 * n if d_cap is None else min(2 * n, d_cap)) + 1


# Rational representations: WEF as {d: Fraction}, IOWEF as {d: {w: Fraction}}

def _combine_wef_rational(a: Dict[int, Fraction], b: Dict[int, Fraction], n: int,
                          d_cap: Optional[int]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for d1, c1 in a.items():
        for d2, c2 in b.items():
            if d_cap is not None and max(d1, d2) > d_cap:
                continue
            weight = c1 * c2
            for d_out, p in combine_kernel(n, d1, d2):
                if d_cap is None or d_out <= d_cap:
                    out[d_out] = out.get(d_out, 0) + weight * p
    return out


def _combine_wef_float(a: np.ndarray, b: np.ndarray, n: int, d_cap: Optional[int]) -> np.ndarray:
    out = np.zeros(_out_size(n, d_cap))
    for d1 in np.flatnonzero(a):
        for d2 in np.flatnonzero(b):
            if d_cap is not None and max(d1, d2) > d_cap:
                continue
            d_out, probs = combine_kernel_float(n, int(d1), int(d2))
            keep = d_out < len(out)
            out[d_out[keep]] += a[d1] * b[d2] * probs[keep]
    return out


def _polymul_dict(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return out


def _combine_iowef_rational(a, b, n: int, d_cap: Optional[int]):
    out: Dict[int, Dict[int, Fraction]] = {}
    for d1, col1 in a.items():
        for d2, col2 in b.items():
            if d_cap is not None and max(d1, d2) > d_cap:
                continue
            product = _polymul_dict(col1, col2)
            for d_out, p in combine_kernel(n, d1, d2):
                if d_cap is not None and d_out > d_cap:
                    continue
                target = out.setdefault(d_out, {})
                for w, c in product.items():
                    target[w] = target.get(w, 0) + c * p
    return out


def _combine_iowef_float(a: np.ndarray, b: np.ndarray, n: int, d_cap: Optional[int]) -> np.ndarray:
    """a, b indexed [w, d]"""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, _out_size(n, d_cap)))
    cols_a = [d for d in range(a.shape[1]) if a[:, d].any()]
    cols_b = [d for d in range(b.shape[1]) if b[:, d].any()]
    for d1 in cols_a:
        for d2 in cols_b:
            if d_cap is not None and max(d1, d2) > d_cap:
                continue
            conv = np.convolve(a[:, d1], b[:, d2])
            d_out, probs = combine_kernel_float(n, d1, d2)
            keep = d_out < out.shape[1]
            out[:len(conv), d_out[keep]] += np.outer(conv, probs[keep])
    return out


def _columns(poly) -> List[int]:
    """Output weights present in a dict or dense (1-D WEF, [w, d] IOWEF) enumerator"""
    if isinstance(poly, dict):
        return sorted(poly)
    return np.flatnonzero(poly if poly.ndim == 1 else poly.any(axis=0)).tolist()


class WefService:
    """Ensemble and realization weight enumerators"""

    def __init__(self, polar_service: Optional[PolarService] = None):
        self.polar_service = polar_service or PolarService()

    def resolve_mode(self, block_len: int, mode: Optional[CoefficientMode]) -> CoefficientMode:
        if mode is not None:
            return CoefficientMode(mode)
        if block_len <= settings.rational_max_block_len:
            return CoefficientMode.RATIONAL
        return CoefficientMode.FLOAT

    # Combiners

    def combine_wef(self, upper: WeightPoly, lower: WeightPoly, half_len: int,
                    d_cap: Optional[int] = None) -> WeightPoly:
        """Uniform-interleaver merge of two length-half_len component WEFs"""
        for name, poly in (("upper", upper), ("lower", lower)):
            if poly.max_degree > half_len:
                raise ValidationException(
                    f"{name} WEF has degree {poly.max_degree} > half length {half_len}"
                )
        mode = CoefficientMode.FLOAT if CoefficientMode.FLOAT in (upper.mode, lower.mode) \
            else CoefficientMode.RATIONAL
        _check_budget(_kernel_work(upper.support(), lower.support(), d_cap), "WEF combine", d_cap)
        if mode is CoefficientMode.RATIONAL:
            out = _combine_wef_rational(upper.as_dict(), lower.as_dict(), half_len, d_cap)
            return WeightPoly(out, length=2 * half_len, mode=mode)
        dense = _combine_wef_float(upper.to_float().to_dense(half_len + 1),
                                   lower.to_float().to_dense(half_len + 1), half_len, d_cap)
        return WeightPoly({d: v for d, v in enumerate(dense) if v}, length=2 * half_len, mode=mode)

    def combine_iowef(self, upper: IOWeightPoly, lower: IOWeightPoly, half_len: int,
                      d_cap: Optional[int] = None) -> IOWeightPoly:
        for name, poly in (("upper", upper), ("lower", lower)):
            if poly.output_max > half_len:
                raise ValidationException(
                    f"{name} IOWEF has output degree {poly.output_max} > half length {half_len}"
                )
        mode = CoefficientMode.FLOAT if CoefficientMode.FLOAT in (upper.mode, lower.mode) \
            else CoefficientMode.RATIONAL
        columns = [{d for (_, d), _ in poly.items()} for poly in (upper, lower)]
        _check_budget(_kernel_work(*columns, d_cap), "IOWEF combine", d_cap)
        in_len = None
        if upper.input_length is not None and lower.input_length is not None:
            in_len = upper.input_length + lower.input_length
        if mode is CoefficientMode.RATIONAL:
            out = _combine_iowef_rational(self._iowef_columns(upper), self._iowef_columns(lower),
                                          half_len, d_cap)
            coeffs = {(w, d): c for d, col in out.items() for w, c in col.items()}
            return IOWeightPoly(coeffs, input_length=in_len, length=2 * half_len, mode=mode)
        a = upper.to_float().to_dense((upper.input_max + 1, half_len + 1))
        b = lower.to_float().to_dense((lower.input_max + 1, half_len + 1))
        dense = _combine_iowef_float(a, b, half_len, d_cap)
        return IOWeightPoly.from_dense(dense, input_length=in_len, length=2 * half_len)

    @staticmethod
    def _iowef_columns(poly: IOWeightPoly) -> Dict[int, Dict[int, Fraction]]:
        cols: Dict[int, Dict[int, Fraction]] = {}
        for (w, d), c in poly.items():
            cols.setdefault(d, {})[w] = c
        return cols

    # Ensemble recursion

    def ensemble_wef(self, spec: CodeSpec, d_cap: Optional[int] = None,
                     mode: Optional[CoefficientMode] = None) -> WeightPoly:
        """Average WEF over all interleaver assignments of the i-polar graph"""
        mode = self.resolve_mode(spec.block_len, mode)
        start = time.perf_counter()
        rational = mode is CoefficientMode.RATIONAL
        leaf_one = {0: Fraction(1)} if rational else np.array([1.0, 0.0])
        leaf_open = {0: Fraction(1), 1: Fraction(1)} if rational else np.array([1.0, 1.0])
        memo: Dict[Tuple[int, Tuple[int, ...]], object] = {}

        def build(level: int, local: Tuple[int, ...]):
            key = (level, local)
            if key in memo:
                return memo[key]
            if level == 0:
                result = leaf_open if local else leaf_one
            else:
                half = 1 << (level - 1)
                upper = build(level - 1, tuple(i for i in local if i < half))
                lower = build(level - 1, tuple(i - half for i in local if i >= half))
                _check_budget(_kernel_work(_columns(upper), _columns(lower), d_cap),
                              f"ensemble WEF at level {level}", d_cap)
                if rational:
                    result = _combine_wef_rational(upper, lower, half, d_cap)
                else:
                    result = _combine_wef_float(upper, lower, half, d_cap)
            memo[key] = result
            return result

        raw = build(spec.m_exp, tuple(spec.unfrozen))
        items = raw.items() if rational else ((d, v) for d, v in enumerate(raw) if v)
        wef = WeightPoly(dict(items), length=spec.block_len, mode=mode)
        logger.info(
            "Ensemble WEF computed",
            extra={"n": spec.block_len, "k": spec.dimension, "mode": mode.value,
                   "d_cap": d_cap, "terms": len(wef), "subtrees": len(memo),
                   "elapsed_s": round(time.perf_counter() - start, 3)},
        )
        return wef

    def ensemble_iowef(self, spec: CodeSpec, d_cap: Optional[int] = None,
                       mode: Optional[CoefficientMode] = None) -> IOWeightPoly:
        mode = self.resolve_mode(spec.block_len, mode)
        start = time.perf_counter()
        rational = mode is CoefficientMode.RATIONAL
        memo: Dict[Tuple[int, Tuple[int, ...]], object] = {}

        def leaf(open_: bool):
            if rational:
                return {0: {0: Fraction(1)}, 1: {1: Fraction(1)}} if open_ else {0: {0: Fraction(1)}}
            table = np.zeros((2 if open_ else 1, 2))
            table[0, 0] = 1.0
            if open_:
                table[1, 1] = 1.0
            return table

        def build(level: int, local: Tuple[int, ...]):
            key = (level, local)
            if key in memo:
                return memo[key]
            if level == 0:
                result = leaf(bool(local))
            else:
                half = 1 << (level - 1)
                upper = build(level - 1, tuple(i for i in local if i < half))
                lower = build(level - 1, tuple(i - half for i in local if i >= half))
                _check_budget(_kernel_work(_columns(upper), _columns(lower), d_cap),
                              f"ensemble IOWEF at level {level}", d_cap)
                if rational:
                    result = _combine_iowef_rational(upper, lower, half, d_cap)
                else:
                    result = _combine_iowef_float(upper, lower, half, d_cap)
            memo[key] = result
            return result

        raw = build(spec.m_exp, tuple(spec.unfrozen))
        if rational:
            coeffs = {(w, d): c for d, col in raw.items() for w, c in col.items()}
            iowef = IOWeightPoly(coeffs, input_length=spec.dimension, length=spec.block_len, mode=mode)
        else:
            iowef = IOWeightPoly.from_dense(raw, input_length=spec.dimension, length=spec.block_len)
        logger.info(
            "Ensemble IOWEF computed",
            extra={"n": spec.block_len, "k": spec.dimension, "mode": mode.value,
                   "d_cap": d_cap, "terms": len(iowef), "subtrees": len(memo),
                   "elapsed_s": round(time.perf_counter() - start, 3)},
        )
        return iowef

    # Exhaustive enumeration of one realization

    def _message_chunks(self, k: int):
        total = 1 << k
        shifts = np.arange(k - 1, -1, -1, dtype=np.uint64)
        for start in range(0, total, _ENUM_CHUNK):
            idx = np.arange(start, min(total, start + _ENUM_CHUNK), dtype=np.uint64)
            yield ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)

    def _check_enum_k(self, k: int) -> None:
        if k < 1:
            raise ValidationException(f"k must be >= 1, got {k}")
        if k > settings.exhaustive_max_k:
            raise ResourceLimitException(
                f"exhaustive enumeration of 2^{k} messages exceeds the limit "
                f"k <= {settings.exhaustive_max_k}"
            )

    def enumerate_wef_exhaustive(self, encoder: Encoder, k: int) -> WeightPoly:
        """Exact WEF by encoding every message; encoder must accept a batch"""
        self._check_enum_k(k)
        counts: Counter = Counter()
        length = None
        for msgs in self._message_chunks(k):
            words = np.asarray(encoder(msgs))
            length = words.shape[-1]
            weights = words.sum(axis=-1, dtype=np.int64)
            for d, c in enumerate(np.bincount(weights)):
                if c:
                    counts[d] += int(c)
        return WeightPoly(counts, length=length)

    def enumerate_iowef_exhaustive(self, encoder: Encoder, k: int) -> IOWeightPoly:
        self._check_enum_k(k)
        counts: Counter = Counter()
        length = None
        for msgs in self._message_chunks(k):
            words = np.asarray(encoder(msgs))
            length = words.shape[-1]
            pairs = np.stack([msgs.sum(axis=1, dtype=np.int64), words.sum(axis=-1, dtype=np.int64)], axis=1)
            keys, freq = np.unique(pairs, axis=0, return_counts=True)
            for (w, d), c in zip(keys, freq):
                counts[(int(w), int(d))] += int(c)
        return IOWeightPoly(counts, input_length=k, length=length)

    def realization_wef(self, spec: CodeSpec, ils=None) -> WeightPoly:
        return self.enumerate_wef_exhaustive(self.polar_service.encoder_for(spec, ils), spec.dimension)

    def sample_average_wef(self, spec: CodeSpec, n_realizations: int,
                           seed: int) -> Tuple[WeightPoly, Dict[int, float], List[WeightPoly]]:
        """
        Mean WEF over seeded i-polar realizations, the per-coefficient
        standard error, and the individual realization WEFs.
        """
        if n_realizations < 1:
            raise ValidationException("n_realizations must be >= 1")
        seeds = np.random.default_rng(seed).integers(0, 2 ** 63 - 1, size=n_realizations)
        wefs = []
        for s in seeds:
            ils = self.polar_service.sample_interleavers(spec.m_exp, int(s))
            wefs.append(self.realization_wef(spec, ils))
        degrees = sorted({d for w in wefs for d in w.support()})
        table = np.array([[float(w[d]) for d in degrees] for w in wefs])
        mean = table.mean(axis=0)
        stderr = table.std(axis=0, ddof=1) / math.sqrt(n_realizations) if n_realizations > 1 \
            else np.zeros(len(degrees))
        logger.info("Sample average WEF computed",
                    extra={"n": spec.block_len, "k": spec.dimension, "realizations": n_realizations})
        return (
            WeightPoly(dict(zip(degrees, mean)), length=spec.block_len, mode=CoefficientMode.FLOAT),
            dict(zip(degrees, stderr.tolist())),
            wefs,
        )

    def classify_realizations(self, wefs: List[WeightPoly]) -> List[Tuple[WeightPoly, int]]:
        """Distinct realization WEFs with their counts, most frequent first"""
        counts = Counter(wefs)
        return sorted(counts.items(), key=lambda item: (-item[1], item[0].support()))

    # Algebra for concatenated schemes

    def power_wef(self, a: WeightPoly, p: int, d_cap: Optional[int] = None) -> WeightPoly:
        """a(Y)^p by repeated squaring"""
        if p < 1:
            raise ValidationException(f"power must be >= 1, got {p}")
        length = a.length * p if a.length is not None else None

        def mul(x: WeightPoly, y: WeightPoly) -> WeightPoly:
            out: Dict[int, object] = {}
            for i, cx in x.items():
                for j, cy in y.items():
                    if d_cap is None or i + j <= d_cap:
                        out[i + j] = out.get(i + j, 0) + cx * cy
            return WeightPoly(out, mode=a.mode)

        result, base, e = None, a.truncate(d_cap), p
        while e:
            if e & 1:
                result = base if result is None else mul(result, base)
            e >>= 1
            if e:
                base = mul(base, base)
        return WeightPoly(result.as_dict(), length=length, mode=a.mode)

    def power_iowef(self, a: IOWeightPoly, q: int, d_cap: Optional[int] = None) -> IOWeightPoly:
        """a(X, Y)^q; Q parallel copies of one inner code"""
        if q < 1:
            raise ValidationException(f"power must be >= 1, got {q}")
        in_len = a.input_length * q if a.input_length is not None else None
        length = a.length * q if a.length is not None else None

        def mul(x: IOWeightPoly, y: IOWeightPoly) -> IOWeightPoly:
            if a.mode is CoefficientMode.FLOAT:
                ta, tb = x.to_dense(), y.to_dense()
                rows = ta.shape[0] + tb.shape[0] - 1
                cols = ta.shape[1] + tb.shape[1] - 1
                out = np.zeros((rows, cols))
                for w1, d1 in zip(*np.nonzero(ta)):
                    out[w1:w1 + tb.shape[0], d1:d1 + tb.shape[1]] += ta[w1, d1] * tb
                if d_cap is not None:
                    out = out[:, :d_cap + 1]
                return IOWeightPoly.from_dense(out)
            out: Dict[Tuple[int, int], object] = {}
            for (w1, d1), c1 in x.items():
                for (w2, d2), c2 in y.items():
                    if d_cap is None or d1 + d2 <= d_cap:
                        key = (w1 + w2, d1 + d2)
                        out[key] = out.get(key, 0) + c1 * c2
            return IOWeightPoly(out, mode=a.mode)

        result, base, e = None, a.truncate(d_cap), q
        while e:
            if e & 1:
                result = base if result is None else mul(result, base)
            e >>= 1
            if e:
                base = mul(base, base)
        return IOWeightPoly(result.as_dict(), input_length=in_len, length=length, mode=a.mode)

    def serial_concat_wef(self, outer: WeightPoly, inner: IOWeightPoly,
                          mode: Optional[CoefficientMode] = None) -> WeightPoly:
        """
        A(Y) = sum_{w,d} A^O_w A^I_{w,d} / C(nP, w) Y^d.

        Float mode works in the log domain so huge outer coefficients and
        binomials never overflow.
        """
        n_p = outer.length
        if n_p is None:
            raise ValidationException("outer WEF must carry its codeword length")
        if inner.input_length is not None and inner.input_length != n_p:
            raise ValidationException(
                f"outer length {n_p} does not match inner input size {inner.input_length}"
            )
        if inner.input_max > n_p:
            raise ValidationException(f"inner input weight {inner.input_max} exceeds outer length {n_p}")
        if mode is None:
            mode = CoefficientMode.FLOAT if CoefficientMode.FLOAT in (outer.mode, inner.mode) \
                else CoefficientMode.RATIONAL
        out: Dict[int, object] = {}
        if mode is CoefficientMode.RATIONAL:
            for (w, d), c in inner.items():
                a_w = outer[w]
                if a_w:
                    out[d] = out.get(d, 0) + Fraction(a_w) * Fraction(c) / math.comb(n_p, w)
            return WeightPoly(out, length=inner.length, mode=mode)
        log_outer = {w: _log_coeff(c) for w, c in outer.items()}
        for (w, d), c in inner.items():
            if w not in log_outer:
                continue
            term = math.exp(log_outer[w] + _log_coeff(c) - float(_log_comb(n_p, w)))
            out[d] = out.get(d, 0.0) + term
        return WeightPoly(out, length=inner.length, mode=CoefficientMode.FLOAT)

    def hamming_wef(self, m_param: int) -> WeightPoly:
        """
        Weight distribution of the (2^m - 1, 2^m - m - 1) Hamming code.

        Uses (1+Y)^h (1-Y)^(h+1) = (1-Y^2)^h (1-Y), h = (n-1)/2, in the
        closed form so every coefficient is an O(1) integer expression.
        """
        if not 3 <= m_param <= 16:
            raise ValidationException(f"m_param must lie in [3, 16], got {m_param}")
        n = (1 << m_param) - 1
        h = (n - 1) // 2
        coeffs: Dict[int, int] = {}
        binom_n = 1
        binom_h = 1
        for i in range(n + 1):
            j = i // 2
            if i % 2 == 0:
                if j > 0:
                    binom_h = binom_h * (h - j + 1) // j
                c_i = binom_h if j % 2 == 0 else -binom_h
            else:
                c_i = -binom_h if j % 2 == 0 else binom_h
            total = binom_n + n * c_i
            if total:
                coeffs[i] = total // (n + 1)
            binom_n = binom_n * (n - i) // (i + 1)
        return WeightPoly(coeffs, length=n)

    def rra_wef(self, k: int, dv: int, m_parity: int) -> WeightPoly:
        """
        Ensemble-average WEF of the systematic RRA code.

        A_{w, w+p} = C(k, w) ACC(dv*w, p) / C(k*dv, dv*w); ACC counts
        accumulator inputs by weight and retained parity weight, built block
        by block (each block of dc inputs flips the state by its parity and
        retains the new state).
        """
        if k < 1 or dv < 1 or m_parity < 1:
            raise ValidationException("k, dv and m_parity must be positive")
        length = k * dv
        if length % m_parity:
            raise ValidationException(f"k*dv = {length} is not divisible by m_parity = {m_parity}")
        dc = length // m_parity
        even = np.array([math.comb(dc, j) if j % 2 == 0 else 0 for j in range(dc + 1)], dtype=object)
        odd = np.array([math.comb(dc, j) if j % 2 else 0 for j in range(dc + 1)], dtype=object)

        # state[s][p] is an object array over accumulated input weight
        state = [[None] * (m_parity + 1) for _ in range(2)]
        state[0][0] = np.array([1], dtype=object)
        for _ in range(m_parity):
            nxt = [[None] * (m_parity + 1) for _ in range(2)]
            for s in (0, 1):
                for p, poly in enumerate(state[s]):
                    if poly is None:
                        continue
                    for s_new, block in ((s, even), (1 - s, odd)):
                        p_new = p + s_new
                        contrib = np.convolve(poly, block)
                        prev = nxt[s_new][p_new]
                        if prev is None:
                            nxt[s_new][p_new] = contrib
                        else:
                            size = max(len(prev), len(contrib))
                            merged = np.zeros(size, dtype=object)
                            merged[:len(prev)] += prev
                            merged[:len(contrib)] += contrib
                            nxt[s_new][p_new] = merged
            state = nxt

        acc: Dict[Tuple[int, int], int] = {}
        for s in (0, 1):
            for p, poly in enumerate(state[s]):
                if poly is None:
                    continue
                for a, c in enumerate(poly):
                    if c:
                        acc[(a, p)] = acc.get((a, p), 0) + int(c)

        coeffs: Dict[int, Fraction] = {}
        for w in range(k + 1):
            a = dv * w
            scale = Fraction(math.comb(k, w), math.comb(length, a))
            for p in range(m_parity + 1):
                count = acc.get((a, p))
                if count:
                    coeffs[w + p] = coeffs.get(w + p, 0) + scale * count
        logger.debug("RRA WEF computed", extra={"k": k, "dv": dv, "m_parity": m_parity})
        return WeightPoly(coeffs, length=k + m_parity)
