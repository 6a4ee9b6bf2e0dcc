"""Outer component codes (CRC, Hamming/BCH, RRA) and the concatenated encoder"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..entities.code import CodeSpec, InterleaverSet
from ..entities.exceptions import ValidationException
from ..entities.outer import BchSpec, ConcatScheme, CrcSpec, OuterCodeSpec, RraSpec
from ..entities.polynomials import IOWeightPoly, WeightPoly
from ..entities.types import CoefficientMode
from .polar_service import PolarService
from .wef_service import WefService
from shared.config.settings import settings
from shared.utils.validation import validate_bits

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def _parity_matrix(exponents: Tuple[int, ...], k: int) -> np.ndarray:
    """
    k x m matrix whose row i is D^{m + k-1-i} mod g(D), coefficients from
    D^{m-1} down to D^0. Message bit 0 is the highest-degree coefficient.
    """
    m = max(exponents)
    low = np.zeros(m, dtype=np.uint8)
    for e in exponents:
        if e < m:
            low[m - 1 - e] ^= 1
    rows = np.zeros((k, m), dtype=np.int64)
    rem = low.copy()  # D^m mod g
    for j in range(k):
        rows[k - 1 - j] = rem
        carry = rem[0]
        rem = np.roll(rem, -1)
        rem[-1] = 0
        if carry:
            rem ^= low
    return rows


def _systematic_parity(msg: np.ndarray, exponents: Tuple[int, ...]) -> np.ndarray:
    p_mat = _parity_matrix(exponents, msg.shape[-1])
    return ((msg.astype(np.int64) @ p_mat) & 1).astype(np.uint8)


class OuterCodeService:
    """Encoders and error detectors for the outer component codes"""

    def __init__(self, polar_service: Optional[PolarService] = None,
                 wef_service: Optional[WefService] = None):
        self.polar_service = polar_service or PolarService()
        self.wef_service = wef_service or WefService(self.polar_service)

    # CRC

    def crc_encode(self, msg, spec: CrcSpec) -> np.ndarray:
        """msg || (msg(D) D^m mod g(D)); batches along the first axes"""
        bits = validate_bits(msg, spec.k, field_name="CRC message")
        return np.concatenate([bits, _systematic_parity(bits, spec.exponents)], axis=-1)

    def crc_check(self, word, spec: CrcSpec):
        """True iff word(D) is a multiple of g(D)"""
        bits = validate_bits(word, field_name="CRC word")
        if bits.shape[-1] <= spec.degree:
            raise ValidationException(
                f"CRC word of length {bits.shape[-1]} is not longer than the degree {spec.degree}"
            )
        m = spec.degree
        parity = _systematic_parity(bits[..., :-m], spec.exponents)
        ok = np.all(parity == bits[..., -m:], axis=-1)
        return bool(ok) if np.ndim(ok) == 0 else ok

    # Hamming / primitive BCH

    def bch_encode(self, msg, m_param: int) -> np.ndarray:
        spec = self._bch(m_param)
        bits = validate_bits(msg, spec.k, field_name="BCH message")
        return np.concatenate([bits, _systematic_parity(bits, spec.exponents)], axis=-1)

    def bch_check(self, word, m_param: int):
        spec = self._bch(m_param)
        bits = validate_bits(word, spec.n, field_name="BCH word")
        parity = _systematic_parity(bits[..., :spec.k], spec.exponents)
        ok = np.all(parity == bits[..., spec.k:], axis=-1)
        return bool(ok) if np.ndim(ok) == 0 else ok

    @staticmethod
    def _bch(m_param: int) -> BchSpec:
        try:
            return BchSpec(m_param=m_param)
        except ValidationError:
            raise ValidationException(f"BCH parameter m must lie in [3, 16], got {m_param}")

    # Regular repeat-accumulate

    def rra_encode(self, msg, spec: RraSpec) -> np.ndarray:
        """Repeat dv times, permute (out[i] = in[perm[i]]), accumulate, keep every dc-th"""
        bits = validate_bits(msg, spec.k, field_name="RRA message")
        repeated = np.repeat(bits, spec.dv, axis=-1)
        permuted = repeated[..., spec.perm_array]
        accumulated = np.bitwise_xor.accumulate(permuted, axis=-1)
        parity = accumulated[..., spec.dc - 1::spec.dc]
        return np.concatenate([bits, parity], axis=-1)

    def rra_check(self, word, spec: RraSpec):
        bits = validate_bits(word, spec.n, field_name="RRA word")
        ok = np.all(self.rra_encode(bits[..., :spec.k], spec) == bits, axis=-1)
        return bool(ok) if np.ndim(ok) == 0 else ok

    # Dispatch on the spec type

    def encode(self, msg, spec: OuterCodeSpec) -> np.ndarray:
        if isinstance(spec, CrcSpec):
            return self.crc_encode(msg, spec)
        if isinstance(spec, BchSpec):
            return self.bch_encode(msg, spec.m_param)
        return self.rra_encode(msg, spec)

    def check(self, word, spec: OuterCodeSpec):
        if isinstance(spec, CrcSpec):
            return self.crc_check(word, spec)
        if isinstance(spec, BchSpec):
            return self.bch_check(word, spec.m_param)
        return self.rra_check(word, spec)

    def outer_wef(self, spec: OuterCodeSpec) -> WeightPoly:
        """Exact WEF (ensemble average for RRA) of one outer codeword"""
        if isinstance(spec, BchSpec):
            return self.wef_service.hamming_wef(spec.m_param)
        if isinstance(spec, RraSpec):
            return self.wef_service.rra_wef(spec.k, spec.dv, spec.m_parity)
        if spec.k is None:
            raise ValidationException("CRC spec needs its message length k")
        if spec.k > settings.exhaustive_max_k:
            raise ValidationException(
                f"no WEF is available for a general CRC code with k={spec.k} "
                f"(exhaustive enumeration is limited to k <= {settings.exhaustive_max_k})"
            )
        return self.wef_service.enumerate_wef_exhaustive(lambda m: self.crc_encode(m, spec), spec.k)

    # Concatenated scheme

    def concat_wef(self, scheme: ConcatScheme, d_cap: Optional[int] = None,
                   mode: Optional[CoefficientMode] = None,
                   inner_iowef: Optional[IOWeightPoly] = None) -> WeightPoly:
        """
        Average WEF of the scheme: outer WEF to the P-th power, inner IOWEF
        (ensemble unless given) to the Q-th power, joined through the
        uniform super-codeword interleaver. d_cap bounds output weights only.
        """
        mode = self.wef_service.resolve_mode(scheme.overall_n, mode)
        outer = self.wef_service.power_wef(self.outer_wef(scheme.outer), scheme.p)
        inner = inner_iowef or self.wef_service.ensemble_iowef(scheme.inner, d_cap=d_cap, mode=mode)
        inner = self.wef_service.power_iowef(inner, scheme.q, d_cap=d_cap)
        return self.wef_service.serial_concat_wef(outer, inner, mode=mode)

    def build_concat_scheme(
        self,
        outer: OuterCodeSpec,
        inner: CodeSpec,
        p: int = 1,
        q: int = 1,
        interleaver_seed: Optional[int] = None,
        outer_perm_seed: Optional[int] = None,
        inner_interleavers: Optional[Sequence[InterleaverSet]] = None,
    ) -> ConcatScheme:
        """
        Assemble a scheme. A CRC spec without k gets k = Q*K/P - m. Inner
        block b uses interleaver_seed + b (identity sets when no seed), the
        outer interleaver is identity when outer_perm_seed is None.
        """
        if isinstance(outer, CrcSpec) and outer.k is None:
            total = q * inner.dimension
            if total % p or total // p <= outer.degree:
                raise ValidationException(
                    f"Q*K = {total} cannot be split into {p} CRC words of degree {outer.degree}"
                )
            outer = outer.model_copy(update={"k": total // p - outer.degree})
        if inner_interleavers is None:
            if interleaver_seed is None:
                inner_interleavers = [self.polar_service.identity_interleavers(inner.m_exp)] * q
            else:
                inner_interleavers = [
                    self.polar_service.sample_interleavers(inner.m_exp, interleaver_seed + b)
                    for b in range(q)
                ]
        size = (outer.n or 0) * p
        if outer_perm_seed is None:
            outer_perm = tuple(range(size))
        else:
            outer_perm = tuple(int(i) for i in np.random.default_rng(outer_perm_seed).permutation(size))
        try:
            scheme = ConcatScheme(outer=outer, p=p, q=q, inner=inner,
                                  inner_interleavers=list(inner_interleavers), outer_perm=outer_perm)
        except ValidationError as e:
            raise ValidationException(f"invalid concatenated scheme: {e.errors()[0]['msg']}")
        logger.info(
            "Concatenated scheme built",
            extra={"outer": outer.type, "p": p, "q": q, "n": scheme.overall_n, "k": scheme.overall_k},
        )
        return scheme

    def interleave_outer(self, outer_words: np.ndarray, scheme: ConcatScheme) -> np.ndarray:
        """P outer codewords -> Q inner messages (u = b Pi, u[i] = b[perm[i]])"""
        flat = outer_words.reshape(outer_words.shape[:-2] + (-1,))
        u = flat[..., scheme.outer_perm_array]
        return u.reshape(u.shape[:-1] + (scheme.q, scheme.inner.dimension))

    def deinterleave_outer(self, inner_messages: np.ndarray, scheme: ConcatScheme) -> np.ndarray:
        """Inverse of interleave_outer: Q inner messages -> P outer words"""
        u = inner_messages.reshape(inner_messages.shape[:-2] + (-1,))
        b = np.empty_like(u)
        b[..., scheme.outer_perm_array] = u
        return b.reshape(b.shape[:-1] + (scheme.p, scheme.outer_n))

    def concat_encode(self, messages, scheme: ConcatScheme) -> Tuple[np.ndarray, np.ndarray]:
        """
        P outer messages (shape (..., P, k_outer)) -> (inner messages, inner
        codewords) with shapes (..., Q, K) and (..., Q, N).
        """
        msgs = validate_bits(messages, scheme.outer_k, field_name="outer message")
        if msgs.ndim < 2 or msgs.shape[-2] != scheme.p:
            raise ValidationException(f"expected {scheme.p} outer messages per block")
        outer_words = self.encode(msgs, scheme.outer)
        inner_msgs = self.interleave_outer(outer_words, scheme)
        codewords = np.stack(
            [
                self.polar_service.ipolar_encode(inner_msgs[..., b, :], scheme.inner, scheme.inner_interleavers[b])
                for b in range(scheme.q)
            ],
            axis=-2,
        )
        return inner_msgs, codewords

    def detector(self, scheme: ConcatScheme):
        """Callable: Q inner messages -> True iff all P de-interleaved words check"""
        def passes(inner_messages: np.ndarray) -> bool:
            words = self.deinterleave_outer(np.asarray(inner_messages, dtype=np.uint8), scheme)
            return bool(np.all(self.check(words, scheme.outer)))
        return passes
