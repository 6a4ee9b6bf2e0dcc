"""JSON file implementation of the artifact repository"""

import json
import logging
import os
import re
import sys
from typing import Any, Dict, List

from pydantic import TypeAdapter, ValidationError

from domain.entities.code import CodeSpec, InterleaverSet
from domain.entities.exceptions import ArtifactIOException, ValidationException
from domain.entities.outer import OuterCodeSpec
from domain.entities.scenario import ScenarioDocument
from domain.repositories.artifact_repository import IArtifactRepository
from domain.services.polar_service import PolarService, build_code_spec, build_interleaver_set

logger = logging.getLogger(__name__)

_outer_adapter = TypeAdapter(OuterCodeSpec)


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    return f"{where}: {err['msg']}" if where else err["msg"]


class FileArtifactRepository(IArtifactRepository):
    """Artifacts stored as JSON documents on the local filesystem"""

    def __init__(self, polar_service: PolarService = None):
        self.polar_service = polar_service or PolarService()

    def _read_json(self, path: str) -> Dict[str, Any]:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ArtifactIOException(f"file not found: {path}")
        except json.JSONDecodeError as e:
            raise ArtifactIOException(f"malformed JSON in {path}: {e.msg} (line {e.lineno})")
        except OSError as e:
            raise ArtifactIOException(f"cannot read {path}: {e}")
        if not isinstance(data, dict):
            raise ArtifactIOException(f"{path} must contain a JSON object")
        return data

    def _write_json(self, data: Dict[str, Any], path: str) -> None:
        if path in (None, "-"):
            sys.stdout.write(json.dumps(data, indent=2) + "\n")
            return
        try:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(data, fh, indent=2)
                fh.write("\n")
        except OSError as e:
            raise ArtifactIOException(f"cannot write {path}: {e}")
        logger.debug("Artifact written", extra={"path": path})

    def load_code_spec(self, path: str) -> CodeSpec:
        data = self._read_json(path)
        if "m_exp" in data:
            m_exp = int(data["m_exp"])
        elif "n" in data:
            n = int(data["n"])
            if n < 2 or n & (n - 1):
                raise ValidationException(f"{path}: n must be a power of two, got {n}")
            m_exp = n.bit_length() - 1
        else:
            raise ValidationException(f"{path}: code spec needs 'm_exp' or 'n'")
        if "unfrozen" not in data:
            raise ValidationException(f"{path}: code spec needs 'unfrozen'")
        spec = build_code_spec(m_exp, data["unfrozen"])
        if "k" in data and int(data["k"]) != spec.dimension:
            raise ValidationException(
                f"{path}: k={data['k']} disagrees with {spec.dimension} unfrozen indices"
            )
        return spec

    def save_code_spec(self, spec: CodeSpec, path: str, es_over_n0_db: float = None) -> None:
        self._write_json(
            {
                "m_exp": spec.m_exp,
                "k": spec.dimension,
                "es_over_n0_db": es_over_n0_db,
                "unfrozen": list(spec.unfrozen),
            },
            path,
        )

    def load_interleavers(self, path: str) -> InterleaverSet:
        data = self._read_json(path)
        if "m_exp" not in data:
            raise ValidationException(f"{path}: interleaver file needs 'm_exp'")
        m_exp = int(data["m_exp"])
        seed = data.get("seed")
        raw = data.get("perms")
        if not raw:
            if seed is None:
                raise ValidationException(f"{path}: interleaver file needs 'perms' or 'seed'")
            return self.polar_service.sample_interleavers(m_exp, int(seed))
        perms = {}
        for key, values in raw.items():
            match = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*", key)
            if not match:
                raise ValidationException(f"{path}: interleaver key '{key}' is not of the form 'm,j'")
            perms[(int(match.group(1)), int(match.group(2)))] = tuple(values)
        return build_interleaver_set(m_exp, perms, seed=seed)

    def save_interleavers(self, ils: InterleaverSet, path: str) -> None:
        self._write_json(
            {
                "m_exp": ils.m_exp,
                "seed": ils.seed,
                "perms": {f"{m},{j}": list(p) for (m, j), p in sorted(ils.perms.items())},
            },
            path,
        )

    def load_outer_spec(self, path: str) -> OuterCodeSpec:
        data = self._read_json(path)
        try:
            return _outer_adapter.validate_python(data)
        except ValidationError as e:
            raise ValidationException(f"{path}: invalid outer code spec ({_first_error(e)})")

    def save_outer_spec(self, spec: OuterCodeSpec, path: str) -> None:
        self._write_json(spec.model_dump(mode="json"), path)

    def load_scenario(self, path: str) -> ScenarioDocument:
        data = self._read_json(path)
        try:
            return ScenarioDocument.model_validate(data)
        except ValidationError as e:
            raise ValidationException(f"{path}: invalid scenario ({_first_error(e)})")

    def load_sequence(self, path: str) -> List[int]:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ArtifactIOException(f"cannot read {path}: {e}")
        tokens = [t for t in re.split(r"[\s,;]+", text) if t]
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise ArtifactIOException(f"{path}: sequence must contain integers only")

    def resolve(self, base_path: str, ref: str) -> str:
        if os.path.isabs(ref):
            return ref
        return os.path.join(os.path.dirname(os.path.abspath(base_path)), ref)
