"""Common types and enums for domain layer"""

import math
from datetime import datetime
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class CoefficientMode(str, Enum):
    RATIONAL = "rational"
    FLOAT = "float"


class DecoderType(str, Enum):
    SC = "sc"
    SCL = "scl"
    ML = "ml"
    UNCODED = "uncoded"


class SnrType(str, Enum):
    EBN0 = "ebn0"
    ESN0 = "esn0"


class SimBackend(str, Enum):
    LOCAL = "local"
    CELERY = "celery"


def ebn0_to_esn0_db(ebn0_db: float, rate: float) -> float:
    """Es/N0 = R * Eb/N0 (dB domain)"""
    return ebn0_db + 10.0 * math.log10(rate)


def esn0_to_ebn0_db(esn0_db: float, rate: float) -> float:
    return esn0_db - 10.0 * math.log10(rate)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


class SnrPoint(BaseModel):
    """
    One SNR grid point.

    rho is the parameter entering Q(sqrt(2 d rho)); it is Es/N0 in linear
    scale (see docs/architecture/conventions.md).
    """
    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., gt=0)
    es_over_n0_db: float
    rate: float = Field(1.0, gt=0, le=1)

    @classmethod
    def from_esn0_db(cls, esn0_db: float, rate: float = 1.0) -> "SnrPoint":
        return cls(rho=db_to_linear(esn0_db), es_over_n0_db=esn0_db, rate=rate)

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, rate: float) -> "SnrPoint":
        return cls.from_esn0_db(ebn0_to_esn0_db(ebn0_db, rate), rate)

    @classmethod
    def from_db(cls, value_db: float, snr_type: SnrType, rate: float) -> "SnrPoint":
        if snr_type is SnrType.EBN0:
            return cls.from_ebn0_db(value_db, rate)
        return cls.from_esn0_db(value_db, rate)

    @property
    def eb_over_n0_db(self) -> float:
        return esn0_to_ebn0_db(self.es_over_n0_db, self.rate)


class ChannelParams(BaseModel):
    """BPSK over AWGN: y = sqrt(Es)(1-2c) + w, E[w^2] = N0/2"""
    model_config = ConfigDict(frozen=True)

    es: float = Field(1.0, gt=0)
    n0: float = Field(..., gt=0)

    @classmethod
    def from_esn0_db(cls, esn0_db: float, es: float = 1.0) -> "ChannelParams":
        return cls(es=es, n0=es / db_to_linear(esn0_db))

    @property
    def noise_std(self) -> float:
        return math.sqrt(self.n0 / 2.0)

    @property
    def llr_scale(self) -> float:
        return 4.0 * math.sqrt(self.es) / self.n0

    @property
    def es_over_n0(self) -> float:
        return self.es / self.n0


class StopRule(BaseModel):
    min_errors: int = Field(100, ge=1)
    max_trials: int = Field(10_000_000, ge=1)


class BlerEstimate(BaseModel):
    """Monte Carlo result for one SNR point"""
    snr_db: float
    es_over_n0_db: float
    trials: int = Field(..., ge=0)
    block_errors: int = Field(..., ge=0)
    ml_lb_events: int = Field(0, ge=0)
    bler: float
    ml_lb: float
    ci_low: float
    ci_high: float
    union_bound: Optional[float] = None
    simple_bound: Optional[float] = None

    @model_validator(mode="after")
    def _check_counts(self):
        if not self.ml_lb_events <= self.block_errors <= self.trials:
            raise ValueError("expected ml_lb_events <= block_errors <= trials")
        if not 0.0 <= self.ci_low <= self.ci_high <= 1.0:
            raise ValueError("confidence interval must lie within [0, 1]")
        return self

    @property
    def ci95(self) -> Tuple[float, float]:
        return (self.ci_low, self.ci_high)


class CandidateList:
    """
    SCL output: messages (rows) in descending reliability, i.e. ascending
    path-metric penalty.
    """

    __slots__ = ("messages", "metrics", "capacity")

    def __init__(self, messages: np.ndarray, metrics: np.ndarray, capacity: int):
        self.messages = np.asarray(messages, dtype=np.uint8).reshape(len(metrics), -1)
        self.metrics = np.asarray(metrics, dtype=float)
        self.capacity = capacity

    def __len__(self) -> int:
        return len(self.metrics)

    @property
    def best(self) -> np.ndarray:
        return self.messages[0]

    def entries(self) -> List[Tuple[np.ndarray, float]]:
        return [(self.messages[i], float(self.metrics[i])) for i in range(len(self))]


class RunManifest(BaseModel):
    """Provenance header written at the top of every output file"""
    command: str
    config_digest: str
    seed: Optional[int] = None
    tool_version: str
    started_at: datetime = Field(default_factory=datetime.utcnow)
    finished_at: Optional[datetime] = None
    extra: dict = Field(default_factory=dict)

    def header_lines(self) -> List[str]:
        lines = [
            f"# command: {self.command}",
            f"# config_digest: {self.config_digest}",
            f"# seed: {self.seed if self.seed is not None else ''}",
            f"# tool_version: {self.tool_version}",
            f"# started_at: {self.started_at.isoformat()}Z",
        ]
        if self.finished_at is not None:
            lines.append(f"# finished_at: {self.finished_at.isoformat()}Z")
        for key in sorted(self.extra):
            lines.append(f"# {key}: {self.extra[key]}")
        return lines
