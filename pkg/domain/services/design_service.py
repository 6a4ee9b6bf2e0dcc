"""Unfrozen-set design by Gaussian-approximation density evolution"""

import logging
import math
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import quad_vec
from scipy.interpolate import CubicSpline

from ..entities.code import CodeSpec
from ..entities.exceptions import ValidationException
from ..repositories.artifact_repository import IArtifactRepository
from .polar_service import build_code_spec
from shared.config.settings import settings

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


def _j_integral(sigmas: np.ndarray) -> np.ndarray:
    """
    1 - E[log2(1 + exp(-L))], L ~ N(s^2/2, s^2), evaluated for a vector of s.

    Substituting L = s^2/2 + s t integrates against the standard normal
    density, which keeps the integrand smooth for every s including 0.
    """
    s = np.asarray(sigmas, dtype=float)

    def integrand(t):
        z = s * s / 2.0 + s * t
        return np.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi) * np.logaddexp(0.0, -z) / _LN2

    value, _ = quad_vec(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, norm="max", limit=20000)
    return 1.0 - value


@lru_cache(maxsize=None)
def _j_spline(sigma_max: float, step: float) -> CubicSpline:
    grid = np.arange(0.0, sigma_max + step / 2, step)
    values = _j_integral(grid)
    values[0] = 0.0
    logger.debug("Built J-function table", extra={"points": len(grid), "sigma_max": sigma_max})
    return CubicSpline(grid, values)


def _j_table() -> CubicSpline:
    return _j_spline(float(settings.j_sigma_max), float(settings.j_table_step))


def _j_array(sigma: np.ndarray) -> np.ndarray:
    sigma_max = float(settings.j_sigma_max)
    out = np.ones_like(sigma, dtype=float)
    inside = sigma <= sigma_max
    out[inside] = _j_table()(sigma[inside])
    out[sigma == 0.0] = 0.0
    return np.clip(out, 0.0, 1.0)


def _j_inverse_array(values: np.ndarray, iterations: int = 64) -> np.ndarray:
    """Vectorized bisection on the monotone J table"""
    lo = np.zeros_like(values, dtype=float)
    hi = np.full_like(values, float(settings.j_sigma_max), dtype=float)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = _j_array(mid) < values
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out[values <= 0.0] = 0.0
    return out


class DesignService:
    """GA bit-channel evaluation and unfrozen-set selection"""

    def __init__(self, artifact_repository: Optional[IArtifactRepository] = None):
        self.artifact_repository = artifact_repository

    def j_function(self, sigma: float) -> float:
        """Mutual information of a consistent Gaussian LLR with std sigma"""
        if sigma < 0:
            raise ValidationException(f"sigma must be >= 0, got {sigma}")
        return float(_j_array(np.asarray([sigma], dtype=float))[0])

    def j_inverse(self, i_val: float) -> float:
        if not 0.0 <= i_val < 1.0:
            raise ValidationException(f"J^-1 is defined on [0, 1), got {i_val}")
        return float(_j_inverse_array(np.asarray([i_val], dtype=float))[0])

    def ga_step(self, values: np.ndarray) -> np.ndarray:
        """One polarization level: parent i -> children (2i, 2i+1)"""
        values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
        better = np.ones_like(values)
        open_ = values < 1.0
        better[open_] = _j_array(math.sqrt(2.0) * _j_inverse_array(values[open_]))
        better = np.clip(np.maximum(better, values), 0.0, 1.0)
        worse = np.clip(2.0 * values - better, 0.0, 1.0)
        out = np.empty(2 * len(values))
        out[0::2] = worse
        out[1::2] = better
        return out

    def ga_evolve(self, i0: float, m_exp: int) -> np.ndarray:
        """I_M^{(i)} for i = 0..2^M-1 starting from a channel with I = i0"""
        if not 0.0 <= i0 <= 1.0:
            raise ValidationException(f"i0 must lie in [0, 1], got {i0}")
        values = np.asarray([i0], dtype=float)
        for _ in range(m_exp):
            values = self.ga_step(values)
        return values

    def ga_profile(self, i0: float, m_exp: int) -> List[np.ndarray]:
        """All levels 0..M"""
        levels = [np.asarray([i0], dtype=float)]
        for _ in range(m_exp):
            levels.append(self.ga_step(levels[-1]))
        return levels

    def channel_information(self, es_over_n0: float) -> float:
        """I_0 for BPSK: LLR std sqrt(8 Es/N0)"""
        if es_over_n0 <= 0:
            raise ValidationException(f"Es/N0 must be positive, got {es_over_n0}")
        return self.j_function(math.sqrt(8.0 * es_over_n0))

    def select_unfrozen(self, m_exp: int, k: int, es_over_n0: float) -> CodeSpec:
        """
        The k bit channels with the largest I_M; equal values go to the
        lower index.
        """
        n = 1 << m_exp
        if not 1 <= k <= n:
            raise ValidationException(f"k must lie in [1, {n}], got {k}")
        info = self.ga_evolve(self.channel_information(es_over_n0), m_exp)
        order = np.lexsort((np.arange(n), -info))
        spec = build_code_spec(m_exp, sorted(int(i) for i in order[:k]))
        logger.info(
            "Selected unfrozen set",
            extra={"m_exp": m_exp, "k": k, "es_over_n0": es_over_n0},
        )
        return spec

    def select_unfrozen_db(self, m_exp: int, k: int, es_over_n0_db: float) -> CodeSpec:
        return self.select_unfrozen(m_exp, k, 10.0 ** (es_over_n0_db / 10.0))

    def recover_design_snr(
        self,
        m_exp: int,
        k: int,
        target_unfrozen: Sequence[int],
        grid_db: Sequence[float],
    ) -> List[float]:
        """Es/N0 values (dB) on grid_db whose GA selection equals target_unfrozen"""
        target = tuple(sorted(int(i) for i in target_unfrozen))
        if len(target) != k:
            raise ValidationException(f"target set has {len(target)} indices, expected {k}")
        hits = [
            float(db) for db in grid_db
            if self.select_unfrozen_db(m_exp, k, float(db)).unfrozen == target
        ]
        logger.info("Design SNR sweep finished", extra={"m_exp": m_exp, "k": k, "hits": len(hits)})
        return hits

    def from_sequence(self, sequence: Sequence[int], n: int, k: int) -> CodeSpec:
        """Most-reliable-first index list -> first k indices below n"""
        if n < 2 or n & (n - 1):
            raise ValidationException(f"block length must be a power of two >= 2, got {n}")
        kept = [int(i) for i in sequence if 0 <= int(i) < n]
        if len(set(kept)) != len(kept):
            raise ValidationException("reliability sequence contains duplicates")
        if not 1 <= k <= len(kept):
            raise ValidationException(f"sequence has {len(kept)} usable indices, cannot take k={k}")
        return build_code_spec(n.bit_length() - 1, kept[:k])

    def load_sequence(self, path: str, n: int, k: int, ascending: bool = False) -> CodeSpec:
        """
        Build a spec from a reliability sequence file. ascending=True reads
        files listed least reliable first.
        """
        if self.artifact_repository is None:
            raise ValidationException("no artifact repository configured for sequence files")
        sequence = self.artifact_repository.load_sequence(path)
        if ascending:
            sequence = list(reversed(sequence))
        return self.from_sequence(sequence, n, k)
