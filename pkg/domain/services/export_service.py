"""CSV / JSON result files with run-manifest headers"""

import csv
import io
import json
import logging
import os
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

from ..entities.exceptions import ArtifactIOException
from ..entities.polynomials import IOWeightPoly, WeightPoly
from ..entities.types import BlerEstimate, CoefficientMode, RunManifest
from shared.config.settings import settings
from shared.utils.digest import config_digest

logger = logging.getLogger(__name__)

BLER_COLUMNS = [
    "snr_db", "es_over_n0_db", "trials", "errors", "bler", "ml_lb",
    "ci_low", "ci_high", "union_bound", "simple_bound",
]


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ExportService:
    """Service for writing result tables and manifests"""

    def build_manifest(self, command: str, config: Dict[str, Any], seed: Optional[int] = None,
                       **extra: Any) -> RunManifest:
        return RunManifest(
            command=command,
            config_digest=config_digest(config),
            seed=seed,
            tool_version=settings.app_version,
            extra=extra,
        )

    def wef_rows(self, wef: WeightPoly) -> List[Dict[str, Any]]:
        """One row per nonzero coefficient: d, A_d (float) and the exact value"""
        return [
            {"d": d, "coefficient": float(a), "exact": a if isinstance(a, Fraction) else None}
            for d, a in wef.items()
        ]

    def iowef_rows(self, iowef: IOWeightPoly) -> List[Dict[str, Any]]:
        return [
            {"w": w, "d": d, "coefficient": float(a), "exact": a if isinstance(a, Fraction) else None}
            for (w, d), a in iowef.items()
        ]

    def bler_rows(self, estimates: Sequence[BlerEstimate]) -> List[Dict[str, Any]]:
        return [
            {
                "snr_db": e.snr_db,
                "es_over_n0_db": e.es_over_n0_db,
                "trials": e.trials,
                "errors": e.block_errors,
                "bler": e.bler,
                "ml_lb": e.ml_lb,
                "ci_low": e.ci_low,
                "ci_high": e.ci_high,
                "union_bound": e.union_bound,
                "simple_bound": e.simple_bound,
            }
            for e in estimates
        ]

    def render_csv(self, rows: Iterable[Dict[str, Any]], columns: Sequence[str],
                   manifest: Optional[RunManifest] = None) -> str:
        output = io.StringIO()
        if manifest is not None:
            manifest = manifest.model_copy(update={"finished_at": datetime.utcnow()})
            for line in manifest.header_lines():
                output.write(line + "\n")
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([_format_value(row.get(c)) for c in columns])
            count += 1
        logger.debug("CSV rendered", extra={"rows": count, "columns": len(columns)})
        return output.getvalue()

    def write_csv(self, path: Optional[str], rows: Iterable[Dict[str, Any]], columns: Sequence[str],
                  manifest: Optional[RunManifest] = None) -> str:
        """Write to path, or return the text only when path is None or '-'"""
        content = self.render_csv(rows, columns, manifest)
        if path and path != "-":
            self._write_text(path, content)
        return content

    def write_json(self, path: str, data: Dict[str, Any], manifest: Optional[RunManifest] = None) -> None:
        document = dict(data)
        if manifest is not None:
            document["manifest"] = manifest.model_copy(
                update={"finished_at": datetime.utcnow()}
            ).model_dump(mode="json")
        self._write_text(path, json.dumps(document, indent=2, default=str) + "\n")

    def read_csv(self, path: str) -> List[Dict[str, str]]:
        """Rows of a result CSV, manifest lines skipped"""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = [line for line in fh if not line.startswith("#")]
        except OSError as e:
            raise ArtifactIOException(f"cannot read {path}: {e}")
        return list(csv.DictReader(lines))

    def read_wef(self, path: str, length: Optional[int] = None) -> WeightPoly:
        """WEF from a CSV written by wef_rows; exact column preferred"""
        rows = self.read_csv(path)
        if not rows or "d" not in rows[0]:
            raise ArtifactIOException(f"{path} is not a WEF table (needs a 'd' column)")
        exact = all(r.get("exact") for r in rows)
        coeffs: Dict[int, Any] = {}
        try:
            for r in rows:
                d = int(r["d"])
                coeffs[d] = Fraction(r["exact"]) if exact else float(r["coefficient"])
        except (KeyError, ValueError, ZeroDivisionError) as e:
            raise ArtifactIOException(f"{path}: malformed WEF row ({e})")
        mode = CoefficientMode.RATIONAL if exact else CoefficientMode.FLOAT
        return WeightPoly(coeffs, length=length, mode=mode)

    def _write_text(self, path: str, content: str) -> None:
        try:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(content)
        except OSError as e:
            raise ArtifactIOException(f"cannot write {path}: {e}")
        logger.info("Result file written", extra={"path": path})
