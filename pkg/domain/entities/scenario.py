"""Simulation scenario documents"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .code import CodeSpec, InterleaverSet
from .outer import ConcatScheme, OuterCodeSpec
from .types import DecoderType, SnrType, StopRule


class ScenarioDocument(BaseModel):
    """
    Scenario file as written by the user. Artifacts are referenced by path
    (relative paths resolve against the scenario file's directory) or
    drawn from seeds.
    """
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    code_file: Optional[str] = None
    interleaver_file: Optional[str] = None
    interleaver_seed: Optional[int] = None
    outer_file: Optional[str] = None
    outer: Optional[OuterCodeSpec] = None
    p: int = Field(1, ge=1)
    q: int = Field(1, ge=1)
    outer_perm_seed: Optional[int] = None
    decoder: DecoderType = DecoderType.SCL
    list_size: int = Field(8, ge=1)
    snr_db: List[float]
    snr_type: SnrType = SnrType.EBN0
    stop: StopRule = Field(default_factory=StopRule)
    seed: int = 0

    @model_validator(mode="after")
    def _check_sources(self):
        if self.outer_file and self.outer is not None:
            raise ValueError("give the outer code inline or by file, not both")
        if self.decoder is not DecoderType.UNCODED and not self.code_file:
            raise ValueError("code_file is required unless decoder is 'uncoded'")
        return self


class Scenario(BaseModel):
    """Resolved scenario: every artifact loaded and validated"""
    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    code: Optional[CodeSpec] = None
    interleavers: Optional[InterleaverSet] = None
    concat: Optional[ConcatScheme] = None
    decoder: DecoderType = DecoderType.SCL
    list_size: int = Field(8, ge=1)
    snr_db: List[float]
    snr_type: SnrType = SnrType.EBN0
    stop: StopRule = Field(default_factory=StopRule)
    seed: int = 0

    @field_validator("snr_db")
    @classmethod
    def _non_empty_grid(cls, v):
        if not v:
            raise ValueError("snr_db grid must not be empty")
        return v

    @model_validator(mode="after")
    def _check_code(self):
        if self.decoder is DecoderType.UNCODED:
            return self
        if self.concat is None and self.code is None:
            raise ValueError("scenario needs a code spec or a concatenated scheme")
        if self.interleavers is not None and self.code is not None \
                and self.interleavers.m_exp != self.code.m_exp:
            raise ValueError("interleaver set does not match the code length")
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.model_dump() == other.model_dump()

    __hash__ = None

    @property
    def rate(self) -> float:
        if self.decoder is DecoderType.UNCODED:
            return 1.0
        if self.concat is not None:
            return self.concat.rate
        return self.code.rate

    @property
    def block_len(self) -> int:
        if self.decoder is DecoderType.UNCODED:
            return 1
        if self.concat is not None:
            return self.concat.overall_n
        return self.code.block_len

    @property
    def message_len(self) -> int:
        if self.decoder is DecoderType.UNCODED:
            return 1
        if self.concat is not None:
            return self.concat.overall_k
        return self.code.dimension
