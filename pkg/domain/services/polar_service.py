"""Polar / i-polar encoding and interleaver realizations"""

import logging
from typing import Iterable, List, Optional

import numpy as np
from pydantic import ValidationError

from ..entities.code import CodeSpec, InterleaverSet, interleaver_keys
from ..entities.exceptions import ValidationException
from shared.utils.validation import validate_bits

logger = logging.getLogger(__name__)


def build_code_spec(m_exp: int, unfrozen: Iterable[int]) -> CodeSpec:
    """CodeSpec factory that reports bad input as ValidationException"""
    try:
        return CodeSpec(m_exp=m_exp, unfrozen=tuple(unfrozen))
    except ValidationError as e:
        raise ValidationException(f"invalid code spec: {e.errors()[0]['msg']}")


def build_interleaver_set(m_exp: int, perms: dict, seed: Optional[int] = None) -> InterleaverSet:
    try:
        return InterleaverSet(m_exp=m_exp, seed=seed, perms=perms)
    except ValidationError as e:
        raise ValidationException(f"invalid interleaver set: {e.errors()[0]['msg']}")


def row_weight(i: int) -> int:
    """Hamming weight of row i of G2^{(x)M}"""
    return 1 << bin(i).count("1")


def transform(u: np.ndarray, ils: Optional[InterleaverSet] = None) -> np.ndarray:
    """
    Apply the (interleaved) polar transform to full-length inputs u.

    Works level by level on a copy of u; the last axis is the bit axis so a
    2-D array encodes a batch. ils=None means the regular polar code.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    m_exp = n.bit_length() - 1
    gathers = ils.stage_gathers if ils is not None and not ils.is_identity else None
    lead = x.shape[:-1]
    for level in range(1, m_exp + 1):
        if gathers is not None and gathers[level] is not None:
            x = x[..., gathers[level]]
        half = 1 << (level - 1)
        blocks = x.reshape(lead + (n >> level, 2, half))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        x = blocks.reshape(lead + (n,))
    return x


def stage_outputs(u: np.ndarray, ils: InterleaverSet) -> List[tuple]:
    """
    Encoder buffers per level as (before, after, half) where before/after
    bracket the stage permutation and half is the block size it acts on.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    trace = []
    for level in range(1, ils.m_exp + 1):
        before = x.copy()
        gather = ils.stage_gathers[level]
        if gather is not None:
            x = x[..., gather]
        trace.append((before, x.copy(), 1 << (level - 1)))
        blocks = x.reshape(x.shape[:-1] + (n >> level, 2, 1 << (level - 1)))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        x = blocks.reshape(x.shape[:-1] + (n,))
    return trace


class PolarService:
    """Encoders for (i-)polar codes and interleaver bookkeeping"""

    def place_message(self, msg, spec: CodeSpec) -> np.ndarray:
        """Spread message bits over the unfrozen indices (increasing order)"""
        bits = validate_bits(msg, spec.dimension, field_name="message")
        u = np.zeros(bits.shape[:-1] + (spec.block_len,), dtype=np.uint8)
        u[..., spec.unfrozen_array] = bits
        return u

    def polar_encode(self, msg, spec: CodeSpec) -> np.ndarray:
        return transform(self.place_message(msg, spec))

    def ipolar_encode(self, msg, spec: CodeSpec, ils: InterleaverSet) -> np.ndarray:
        if ils.m_exp != spec.m_exp:
            raise ValidationException(
                f"interleaver set is sized for M={ils.m_exp}, code has M={spec.m_exp}"
            )
        return transform(self.place_message(msg, spec), ils)

    def generator_matrix(self, spec: CodeSpec, ils: Optional[InterleaverSet] = None) -> np.ndarray:
        """K x N generator: row r is the codeword of the r-th unit message"""
        eye = np.eye(spec.dimension, dtype=np.uint8)
        if ils is None:
            return self.polar_encode(eye, spec)
        return self.ipolar_encode(eye, spec, ils)

    def sample_interleavers(self, m_exp: int, seed: int) -> InterleaverSet:
        """
        Draw every pi(m, j) independently and uniformly.

        numpy's Generator.permutation is a Fisher-Yates shuffle; keys are
        drawn in (m, j) order so a seed fixes the whole realization.
        """
        if m_exp < 1:
            raise ValidationException(f"m_exp must be >= 1, got {m_exp}")
        rng = np.random.default_rng(seed)
        perms = {
            (m, j): tuple(int(p) for p in rng.permutation(1 << m))
            for m, j in interleaver_keys(m_exp)
        }
        logger.debug("Sampled interleaver set", extra={"m_exp": m_exp, "seed": seed})
        return InterleaverSet(m_exp=m_exp, seed=seed, perms=perms)

    def identity_interleavers(self, m_exp: int) -> InterleaverSet:
        if m_exp < 1:
            raise ValidationException(f"m_exp must be >= 1, got {m_exp}")
        perms = {(m, j): tuple(range(1 << m)) for m, j in interleaver_keys(m_exp)}
        return InterleaverSet(m_exp=m_exp, perms=perms)

    def encoder_for(self, spec: CodeSpec, ils: Optional[InterleaverSet] = None):
        """Single-argument message -> codeword callable"""
        if ils is None:
            return lambda msg: self.polar_encode(msg, spec)
        return lambda msg: self.ipolar_encode(msg, spec, ils)
