"""Outer component codes and the serially concatenated scheme"""

from functools import cached_property
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.config.settings import settings
from shared.utils.validation import validate_permutation

from .code import CodeSpec, InterleaverSet

CRC_PRESETS = {
    "g8A": (8, 7, 6, 5, 4, 3, 0),
    "g8B": (8, 7, 6, 4, 2, 0),
}

# Primitive polynomials (exponent lists) used as Hamming/BCH generators
PRIMITIVE_POLYNOMIALS = {
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 3, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 10, 6, 1, 0),
    15: (15, 1, 0),
    16: (16, 12, 3, 1, 0),
}


def exponents_to_bits(exponents) -> np.ndarray:
    """Coefficient vector, highest degree first"""
    degree = max(exponents)
    bits = np.zeros(degree + 1, dtype=np.uint8)
    for e in exponents:
        bits[degree - e] ^= 1
    return bits


class CrcSpec(BaseModel):
    """
    CRC generator g(D) given as exponents, or by preset name
    (g8A, g8B, crc24c; crc24c comes from configuration).
    """
    model_config = ConfigDict(frozen=True)

    type: Literal["crc"] = "crc"
    preset: Optional[str] = None
    exponents: Tuple[int, ...] = ()
    k: Optional[int] = Field(None, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _resolve_preset(cls, data):
        if not isinstance(data, dict):
            return data
        preset = data.get("preset")
        if preset and not data.get("exponents"):
            if preset in CRC_PRESETS:
                data = {**data, "exponents": CRC_PRESETS[preset]}
            elif preset.lower() == "crc24c":
                if not settings.crc24c_exponents:
                    raise ValueError("crc24c preset requires IPOLAR_CRC24C_EXPONENTS to be configured")
                data = {**data, "exponents": tuple(settings.crc24c_exponents)}
            else:
                raise ValueError(f"unknown CRC preset '{preset}'")
        if "exponents" in data:
            data = {**data, "exponents": tuple(sorted({int(e) for e in data["exponents"]}, reverse=True))}
        return data

    @model_validator(mode="after")
    def _check_generator(self):
        if not self.exponents or self.exponents[0] < 1:
            raise ValueError("CRC generator must have degree >= 1")
        if self.exponents[-1] < 0:
            raise ValueError("CRC exponents must be non-negative")
        return self

    @property
    def degree(self) -> int:
        return self.exponents[0]

    @property
    def generator(self) -> np.ndarray:
        return exponents_to_bits(self.exponents)

    @property
    def n(self) -> Optional[int]:
        return None if self.k is None else self.k + self.degree


class BchSpec(BaseModel):
    """Primitive (2^m - 1, 2^m - m - 1) BCH code, i.e. a Hamming code"""
    model_config = ConfigDict(frozen=True)

    type: Literal["bch"] = "bch"
    m_param: int = Field(..., ge=3, le=16)

    @property
    def n(self) -> int:
        return (1 << self.m_param) - 1

    @property
    def k(self) -> int:
        return self.n - self.m_param

    @property
    def exponents(self) -> Tuple[int, ...]:
        return PRIMITIVE_POLYNOMIALS[self.m_param]

    @property
    def generator(self) -> np.ndarray:
        return exponents_to_bits(self.exponents)


class RraSpec(BaseModel):
    """
    Systematic regular repeat-accumulate code.

    The inner permutation (size k*dv) is either given explicitly or drawn
    once from perm_seed; explicit arrays win.
    """
    model_config = ConfigDict(frozen=True)

    type: Literal["rra"] = "rra"
    k: int = Field(..., ge=1)
    dv: int = Field(..., ge=1)
    m_parity: int = Field(..., ge=1)
    perm_seed: Optional[int] = None
    inner_perm: Optional[Tuple[int, ...]] = None

    @model_validator(mode="before")
    @classmethod
    def _draw_inner_perm(cls, data):
        if isinstance(data, dict) and data.get("inner_perm") is None and data.get("perm_seed") is not None:
            size = int(data["k"]) * int(data["dv"])
            perm = np.random.default_rng(int(data["perm_seed"])).permutation(size)
            data = {**data, "inner_perm": tuple(int(p) for p in perm)}
        return data

    @model_validator(mode="after")
    def _check_params(self):
        if (self.k * self.dv) % self.m_parity:
            raise ValueError(
                f"k*dv = {self.k * self.dv} is not divisible by m_parity = {self.m_parity}"
            )
        if self.inner_perm is None:
            raise ValueError("RRA spec needs inner_perm or perm_seed")
        validate_permutation(self.inner_perm, self.k * self.dv, field_name="inner_perm")
        return self

    @property
    def dc(self) -> int:
        return self.k * self.dv // self.m_parity

    @property
    def n(self) -> int:
        return self.k + self.m_parity

    @property
    def perm_array(self) -> np.ndarray:
        return np.asarray(self.inner_perm, dtype=np.intp)


OuterCodeSpec = Annotated[Union[CrcSpec, BchSpec, RraSpec], Field(discriminator="type")]


class ConcatScheme(BaseModel):
    """
    P identical outer codes -> super-codeword interleaver (size nP) ->
    Q inner i-polar blocks sharing one unfrozen set.
    """
    model_config = ConfigDict(frozen=True)

    outer: OuterCodeSpec
    p: int = Field(1, ge=1)
    q: int = Field(1, ge=1)
    inner: CodeSpec
    inner_interleavers: List[InterleaverSet]
    outer_perm: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_sizes(self):
        outer_n = self.outer_n
        if outer_n is None:
            raise ValueError("CRC outer code needs its message length k")
        if outer_n * self.p != self.q * self.inner.dimension:
            raise ValueError(
                f"outer length {outer_n} x P={self.p} must equal Q={self.q} x inner K={self.inner.dimension}"
            )
        if len(self.inner_interleavers) != self.q:
            raise ValueError(f"expected {self.q} inner interleaver sets, got {len(self.inner_interleavers)}")
        for ils in self.inner_interleavers:
            if ils.m_exp != self.inner.m_exp:
                raise ValueError("inner interleaver set does not match the inner block length")
        validate_permutation(self.outer_perm, outer_n * self.p, field_name="outer_perm")
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConcatScheme):
            return NotImplemented
        return (self.outer == other.outer and self.p == other.p and self.q == other.q
                and self.inner == other.inner and self.inner_interleavers == other.inner_interleavers
                and self.outer_perm == other.outer_perm)

    __hash__ = None

    @property
    def outer_n(self) -> Optional[int]:
        return self.outer.n

    @property
    def outer_k(self) -> int:
        return self.outer.k

    @property
    def overall_k(self) -> int:
        return self.p * self.outer_k

    @property
    def overall_n(self) -> int:
        return self.q * self.inner.block_len

    @property
    def rate(self) -> float:
        return self.overall_k / self.overall_n

    @cached_property
    def outer_perm_array(self) -> np.ndarray:
        return np.asarray(self.outer_perm, dtype=np.intp)
