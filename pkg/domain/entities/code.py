"""Polar / i-polar code domain entities"""

from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared.utils.validation import validate_permutation


class CodeSpec(BaseModel):
    """
    One (N, K, A) code: N = 2^m_exp, message bits on the unfrozen indices A,
    frozen positions always carry 0.
    """
    model_config = ConfigDict(frozen=True)

    m_exp: int = Field(..., ge=1, le=20)
    unfrozen: Tuple[int, ...]

    @field_validator("unfrozen", mode="before")
    @classmethod
    def _sort_unfrozen(cls, v):
        return tuple(sorted(int(i) for i in v))

    @model_validator(mode="after")
    def _check_indices(self):
        n = 1 << self.m_exp
        if not self.unfrozen:
            raise ValueError("unfrozen set must not be empty")
        if len(set(self.unfrozen)) != len(self.unfrozen):
            raise ValueError("unfrozen indices must be distinct")
        if self.unfrozen[0] < 0 or self.unfrozen[-1] >= n:
            raise ValueError(f"unfrozen indices must lie in [0, {n})")
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return self.m_exp == other.m_exp and self.unfrozen == other.unfrozen

    def __hash__(self) -> int:
        return hash((self.m_exp, self.unfrozen))

    @property
    def block_len(self) -> int:
        return 1 << self.m_exp

    @property
    def dimension(self) -> int:
        return len(self.unfrozen)

    @property
    def rate(self) -> float:
        return self.dimension / self.block_len

    @property
    def frozen(self) -> Tuple[int, ...]:
        chosen = set(self.unfrozen)
        return tuple(i for i in range(self.block_len) if i not in chosen)

    @cached_property
    def unfrozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.block_len, dtype=bool)
        mask[list(self.unfrozen)] = True
        return mask

    @cached_property
    def unfrozen_array(self) -> np.ndarray:
        return np.asarray(self.unfrozen, dtype=np.intp)


def interleaver_count(m_exp: int) -> int:
    """Number of non-trivial interleavers in an i-polar graph of length 2^m_exp"""
    return sum(1 << (m_exp - m - 1) for m in range(1, m_exp))


def interleaver_keys(m_exp: int) -> List[Tuple[int, int]]:
    return [(m, j) for m in range(1, m_exp) for j in range(1 << (m_exp - m - 1))]


class InterleaverSet(BaseModel):
    """
    Per-stage permutations pi(m, j) of one i-polar realization.

    pi(m, j) has size 2^m and permutes the output of the upper encoder when
    the blocks of level m+1 are merged; permuted[i] = upper[pi[i]].
    Stage-0 interleavers are trivial and never stored.
    """
    model_config = ConfigDict(frozen=True)

    m_exp: int = Field(..., ge=1, le=20)
    seed: Optional[int] = None
    perms: Dict[Tuple[int, int], Tuple[int, ...]]

    @model_validator(mode="after")
    def _check_perms(self):
        expected = set(interleaver_keys(self.m_exp))
        if set(self.perms) != expected:
            raise ValueError(
                f"interleaver set for M={self.m_exp} needs {len(expected)} entries "
                f"keyed by (m, j), got {len(self.perms)}"
            )
        for (m, j), perm in self.perms.items():
            validate_permutation(perm, 1 << m, field_name=f"pi({m},{j})")
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, InterleaverSet):
            return NotImplemented
        return self.m_exp == other.m_exp and self.perms == other.perms

    __hash__ = None

    def perm(self, m: int, j: int) -> np.ndarray:
        return self.perm_arrays[(m, j)]

    @cached_property
    def perm_arrays(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {key: np.asarray(p, dtype=np.intp) for key, p in self.perms.items()}

    @cached_property
    def inverse_arrays(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {key: np.argsort(p) for key, p in self.perm_arrays.items()}

    @cached_property
    def is_identity(self) -> bool:
        return all(tuple(range(len(p))) == p for p in self.perms.values())

    @cached_property
    def stage_gathers(self) -> List[Optional[np.ndarray]]:
        """
        Length-N gather index per merge level (1..M): applying it permutes
        every upper half by its interleaver and leaves lower halves alone.
        None where the level needs no permutation.
        """
        n = 1 << self.m_exp
        gathers: List[Optional[np.ndarray]] = [None]
        for level in range(1, self.m_exp + 1):
            m = level - 1
            if m == 0:
                gathers.append(None)
                continue
            half = 1 << m
            idx = np.arange(n, dtype=np.intp)
            for j in range(1 << (self.m_exp - level)):
                base = j << level
                idx[base:base + half] = base + self.perm_arrays[(m, j)]
            gathers.append(idx)
        return gathers
