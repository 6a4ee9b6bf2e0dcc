"""Union and simple BLER upper bounds over BI-AWGN"""

import logging
import math
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import erfc

from ..entities.exceptions import ValidationException
from ..entities.polynomials import WeightPoly
from ..entities.types import SnrPoint, SnrType

logger = logging.getLogger(__name__)

PointLike = Union[SnrPoint, float]


def _rho(point: PointLike) -> float:
    rho = point.rho if isinstance(point, SnrPoint) else float(point)
    if not rho > 0:
        raise ValidationException(f"rho must be positive, got {rho}")
    return rho


class BoundService:
    """Analytic block-error bounds from a WEF; rho is Es/N0 (linear)"""

    def q_function(self, x):
        """Gaussian tail Q(x) = erfc(x / sqrt(2)) / 2"""
        result = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
        return float(result) if np.ndim(result) == 0 else result

    def union_bound(self, wef: WeightPoly, point: PointLike) -> float:
        """sum_{d>0} A_d Q(sqrt(2 d rho)); may exceed 1"""
        rho = _rho(point)
        total = 0.0
        for d, a_d in wef.items():
            if d > 0:
                total += float(a_d) * self.q_function(math.sqrt(2.0 * d * rho))
        return total

    def exponent(self, rho: float, delta: float, r: float) -> Tuple[float, str]:
        """
        E(rho, delta) of the simple bound and the branch that produced it
        ("tight" inside c0 < rho < (e^{2r}-1)/(2 delta (1-delta)), else "linear").
        """
        c0 = (1.0 - math.exp(-2.0 * r)) * (1.0 - delta) / (2.0 * delta)
        upper = (math.exp(2.0 * r) - 1.0) / (2.0 * delta * (1.0 - delta))
        if c0 > 0 and c0 < rho < upper:
            f = math.sqrt(rho / c0 + 2.0 * rho + rho * rho) - rho - 1.0
            arg = 1.0 - 2.0 * c0 * f
            if arg > 0:
                return 0.5 * math.log(arg) + rho * f / (1.0 + f), "tight"
        return -r + delta * rho, "linear"

    def simple_bound(self, wef: WeightPoly, point: PointLike, n: int, k: int,
                     audit: bool = False):
        """
        sum_{d = d_min}^{n-k+1} min(exp(-n E(rho, d/n)), A_d Q(sqrt(2 d rho))).

        Terms with A_d = 0 are skipped; delta in {0, 1} falls back to the
        union term. With audit=True also returns per-term branch records.
        """
        if not 1 <= k <= n:
            raise ValidationException(f"need 1 <= k <= n, got n={n}, k={k}")
        rho = _rho(point)
        d_min = wef.d_min
        total = 0.0
        records: List[Dict[str, object]] = []
        if d_min is not None:
            for d in range(d_min, n - k + 2):
                a_d = float(wef[d])
                if a_d <= 0:
                    continue
                union_term = a_d * self.q_function(math.sqrt(2.0 * d * rho))
                delta = d / n
                branch = "union-only"
                term = union_term
                if 0.0 < delta < 1.0:
                    r = math.log(a_d) / n
                    e_val, branch = self.exponent(rho, delta, r)
                    exp_term = math.exp(-n * e_val) if math.isfinite(e_val) else math.inf
                    if exp_term < union_term:
                        term = exp_term
                    else:
                        branch = f"{branch}:union"
                total += term
                if audit:
                    records.append({"d": d, "branch": branch, "term": term, "union_term": union_term})
        if audit:
            return total, records
        return total

    def bound_curve(self, wef: WeightPoly, grid_db: Sequence[float], snr_type: SnrType,
                    n: int, k: int, rate: float = None) -> List[Dict[str, float]]:
        """Rows (snr_db, es_over_n0_db, rho, union, simple) over a dB grid"""
        rate = rate if rate is not None else k / n
        rows = []
        for value in grid_db:
            point = SnrPoint.from_db(float(value), SnrType(snr_type), rate)
            rows.append({
                "snr_db": float(value),
                "es_over_n0_db": point.es_over_n0_db,
                "rho": point.rho,
                "union": self.union_bound(wef, point),
                "simple": self.simple_bound(wef, point, n, k),
            })
        logger.info("Bound curve evaluated", extra={"points": len(rows), "n": n, "k": k})
        return rows
