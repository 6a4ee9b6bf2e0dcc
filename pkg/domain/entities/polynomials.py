"""Weight enumerator carriers: WEF A(Y) and IOWEF A(X, Y)"""

from fractions import Fraction
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

import numpy as np

from .exceptions import ValidationException
from .types import CoefficientMode

Coefficient = Union[int, Fraction, float]


def _normalize(value: Coefficient, mode: CoefficientMode) -> Coefficient:
    if mode is CoefficientMode.FLOAT:
        return float(value)
    if isinstance(value, float):
        raise ValidationException("float coefficient passed to a rational-mode polynomial")
    return Fraction(value)


class WeightPoly:
    """
    Sparse WEF: degree d -> A_d.

    Coefficients are exact Fractions in rational mode and doubles in float
    mode. `length` is the block length the weights refer to (None when the
    polynomial is a free-standing algebraic object).
    """

    __slots__ = ("_coeffs", "length", "mode")

    def __init__(
        self,
        coeffs: Mapping[int, Coefficient],
        length: Optional[int] = None,
        mode: CoefficientMode = CoefficientMode.RATIONAL,
    ):
        self.mode = CoefficientMode(mode)
        self.length = length
        cleaned: Dict[int, Coefficient] = {}
        for d, c in coeffs.items():
            d = int(d)
            if d < 0:
                raise ValidationException(f"negative weight {d} in WEF")
            if length is not None and d > length:
                raise ValidationException(f"weight {d} exceeds block length {length}")
            c = _normalize(c, self.mode)
            if c < 0:
                raise ValidationException(f"negative coefficient at weight {d}")
            if c != 0:
                cleaned[d] = c
        self._coeffs = dict(sorted(cleaned.items()))

    @classmethod
    def one(cls, length: Optional[int] = None, mode: CoefficientMode = CoefficientMode.RATIONAL) -> "WeightPoly":
        return cls({0: 1}, length=length, mode=mode)

    def coefficient(self, d: int) -> Coefficient:
        return self._coeffs.get(d, 0.0 if self.mode is CoefficientMode.FLOAT else Fraction(0))

    def __getitem__(self, d: int) -> Coefficient:
        return self.coefficient(d)

    def items(self) -> Iterator[Tuple[int, Coefficient]]:
        return iter(self._coeffs.items())

    def as_dict(self) -> Dict[int, Coefficient]:
        return dict(self._coeffs)

    def support(self) -> Tuple[int, ...]:
        return tuple(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def max_degree(self) -> int:
        return max(self._coeffs) if self._coeffs else 0

    @property
    def mass(self) -> Coefficient:
        return sum(self._coeffs.values(), 0.0 if self.mode is CoefficientMode.FLOAT else Fraction(0))

    @property
    def d_min(self) -> Optional[int]:
        """Smallest nonzero weight with a positive coefficient"""
        for d in self._coeffs:
            if d > 0:
                return d
        return None

    @property
    def a_dmin(self) -> Coefficient:
        d = self.d_min
        return self.coefficient(d) if d is not None else 0

    def truncate(self, d_cap: Optional[int]) -> "WeightPoly":
        if d_cap is None:
            return self
        return WeightPoly({d: c for d, c in self._coeffs.items() if d <= d_cap}, self.length, self.mode)

    def to_float(self) -> "WeightPoly":
        if self.mode is CoefficientMode.FLOAT:
            return self
        return WeightPoly({d: float(c) for d, c in self._coeffs.items()}, self.length, CoefficientMode.FLOAT)

    def rounded(self, places: int = 2) -> Dict[int, float]:
        return {d: round(float(c), places) for d, c in self._coeffs.items()}

    def to_dense(self, size: Optional[int] = None) -> np.ndarray:
        size = size if size is not None else self.max_degree + 1
        out = np.zeros(size, dtype=float if self.mode is CoefficientMode.FLOAT else object)
        if self.mode is not CoefficientMode.FLOAT:
            out[:] = Fraction(0)
        for d, c in self._coeffs.items():
            if d < size:
                out[d] = c
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(tuple(self._coeffs.items()))

    def __repr__(self) -> str:
        terms = ", ".join(f"{d}: {c}" for d, c in self._coeffs.items())
        return f"WeightPoly({{{terms}}}, length={self.length}, mode={self.mode.value})"


class IOWeightPoly:
    """
    Sparse IOWEF: (w, d) -> A_{w,d}; w input weight, d output weight.
    """

    __slots__ = ("_coeffs", "input_length", "length", "mode")

    def __init__(
        self,
        coeffs: Mapping[Tuple[int, int], Coefficient],
        input_length: Optional[int] = None,
        length: Optional[int] = None,
        mode: CoefficientMode = CoefficientMode.RATIONAL,
    ):
        self.mode = CoefficientMode(mode)
        self.input_length = input_length
        self.length = length
        cleaned: Dict[Tuple[int, int], Coefficient] = {}
        for (w, d), c in coeffs.items():
            w, d = int(w), int(d)
            if w < 0 or d < 0:
                raise ValidationException(f"negative weight pair ({w}, {d}) in IOWEF")
            if input_length is not None and w > input_length:
                raise ValidationException(f"input weight {w} exceeds input length {input_length}")
            if length is not None and d > length:
                raise ValidationException(f"output weight {d} exceeds block length {length}")
            c = _normalize(c, self.mode)
            if c < 0:
                raise ValidationException(f"negative coefficient at ({w}, {d})")
            if c != 0:
                cleaned[(w, d)] = c
        self._coeffs = dict(sorted(cleaned.items()))

    @classmethod
    def one(cls, input_length=None, length=None, mode: CoefficientMode = CoefficientMode.RATIONAL) -> "IOWeightPoly":
        return cls({(0, 0): 1}, input_length=input_length, length=length, mode=mode)

    @classmethod
    def from_dense(cls, table: np.ndarray, input_length=None, length=None,
                   mode: CoefficientMode = CoefficientMode.FLOAT) -> "IOWeightPoly":
        ws, ds = np.nonzero(table)
        return cls({(int(w), int(d)): table[w, d] for w, d in zip(ws, ds)}, input_length, length, mode)

    def coefficient(self, w: int, d: int) -> Coefficient:
        return self._coeffs.get((w, d), 0.0 if self.mode is CoefficientMode.FLOAT else Fraction(0))

    def __getitem__(self, key: Tuple[int, int]) -> Coefficient:
        return self.coefficient(*key)

    def items(self) -> Iterator[Tuple[Tuple[int, int], Coefficient]]:
        return iter(self._coeffs.items())

    def as_dict(self) -> Dict[Tuple[int, int], Coefficient]:
        return dict(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def input_max(self) -> int:
        return max((w for w, _ in self._coeffs), default=0)

    @property
    def output_max(self) -> int:
        return max((d for _, d in self._coeffs), default=0)

    @property
    def mass(self) -> Coefficient:
        return sum(self._coeffs.values(), 0.0 if self.mode is CoefficientMode.FLOAT else Fraction(0))

    def marginal(self) -> WeightPoly:
        """A(Y) = A(X=1, Y)"""
        acc: Dict[int, Coefficient] = {}
        for (_, d), c in self._coeffs.items():
            acc[d] = acc.get(d, 0) + c
        return WeightPoly(acc, length=self.length, mode=self.mode)

    def truncate(self, d_cap: Optional[int]) -> "IOWeightPoly":
        if d_cap is None:
            return self
        return IOWeightPoly({k: c for k, c in self._coeffs.items() if k[1] <= d_cap},
                            self.input_length, self.length, self.mode)

    def to_float(self) -> "IOWeightPoly":
        if self.mode is CoefficientMode.FLOAT:
            return self
        return IOWeightPoly({k: float(c) for k, c in self._coeffs.items()},
                            self.input_length, self.length, CoefficientMode.FLOAT)

    def to_dense(self, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
        """Float table indexed [w, d]"""
        shape = shape or (self.input_max + 1, self.output_max + 1)
        out = np.zeros(shape, dtype=float)
        for (w, d), c in self._coeffs.items():
            if w < shape[0] and d < shape[1]:
                out[w, d] = float(c)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, IOWeightPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __repr__(self) -> str:
        return (f"IOWeightPoly({len(self._coeffs)} terms, input_length={self.input_length}, "
                f"length={self.length}, mode={self.mode.value})")
