"""Abstract artifact repository interface"""

from abc import ABC, abstractmethod
from typing import List

from ..entities.code import CodeSpec, InterleaverSet
from ..entities.outer import OuterCodeSpec
from ..entities.scenario import ScenarioDocument


class IArtifactRepository(ABC):
    """Interface for loading and saving workbench artifacts"""

    @abstractmethod
    def load_code_spec(self, path: str) -> CodeSpec:
        """Read a CodeSpec document"""
        pass

    @abstractmethod
    def save_code_spec(self, spec: CodeSpec, path: str, es_over_n0_db: float = None) -> None:
        """Write a CodeSpec document"""
        pass

    @abstractmethod
    def load_interleavers(self, path: str) -> InterleaverSet:
        """Read an interleaver set; explicit arrays win over the seed"""
        pass

    @abstractmethod
    def save_interleavers(self, ils: InterleaverSet, path: str) -> None:
        pass

    @abstractmethod
    def load_outer_spec(self, path: str) -> OuterCodeSpec:
        pass

    @abstractmethod
    def save_outer_spec(self, spec: OuterCodeSpec, path: str) -> None:
        pass

    @abstractmethod
    def load_scenario(self, path: str) -> ScenarioDocument:
        pass

    @abstractmethod
    def load_sequence(self, path: str) -> List[int]:
        """Read a whitespace/comma separated index list, file order kept"""
        pass

    @abstractmethod
    def resolve(self, base_path: str, ref: str) -> str:
        """Resolve a path referenced from another artifact file"""
        pass
