"""
Command implementations. Each takes the parsed arguments and the service
container and returns a process exit code; domain errors propagate to the
entry point, which maps them to exit codes.
"""

import json
import logging
import sys
from typing import Any, Dict, List, Optional

from app.dependencies import DependencyContainer
from domain.entities.code import CodeSpec
from domain.entities.exceptions import ValidationException
from domain.entities.outer import ConcatScheme
from domain.entities.polynomials import WeightPoly
from domain.entities.types import CoefficientMode, DecoderType, SnrType, StopRule
from domain.services.export_service import BLER_COLUMNS
from shared.config.settings import settings

logger = logging.getLogger(__name__)


def _m_exp(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise ValidationException(f"--n must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


def _mode(args) -> Optional[CoefficientMode]:
    return CoefficientMode(args.mode) if getattr(args, "mode", None) else None


def _emit_csv(c: DependencyContainer, args, rows, columns: List[str], config: Dict[str, Any],
              seed: Optional[int] = None) -> None:
    manifest = c.export_service.build_manifest(args.command, config, seed=seed)
    text = c.export_service.write_csv(args.out, rows, columns, manifest)
    if not args.out or args.out == "-":
        sys.stdout.write(text)


def cmd_design(args, c: DependencyContainer) -> int:
    m_exp = _m_exp(args.n)
    snr_db = None
    if args.sequence_file:
        spec = c.design_service.load_sequence(args.sequence_file, args.n, args.k, ascending=args.ascending)
    else:
        snr_db = args.design_snr_db if args.design_snr_db is not None else settings.design_snr_db
        if snr_db is None:
            raise ValidationException("give --design-snr-db (or IPOLAR_DESIGN_SNR_DB) or --sequence-file")
        spec = c.design_service.select_unfrozen_db(m_exp, args.k, snr_db)
    c.artifact_repository.save_code_spec(spec, args.out or "-", es_over_n0_db=snr_db)
    return 0


def cmd_interleavers(args, c: DependencyContainer) -> int:
    m_exp = _m_exp(args.n)
    if args.identity:
        ils = c.polar_service.identity_interleavers(m_exp)
    elif args.seed is None:
        raise ValidationException("give --seed or --identity")
    else:
        ils = c.polar_service.sample_interleavers(m_exp, args.seed)
    c.artifact_repository.save_interleavers(ils, args.out or "-")
    return 0


def _load_code(args, c: DependencyContainer):
    spec = c.artifact_repository.load_code_spec(args.spec)
    ils = None
    if getattr(args, "interleavers", None):
        ils = c.artifact_repository.load_interleavers(args.interleavers)
        if ils.m_exp != spec.m_exp:
            raise ValidationException(
                f"interleaver set is sized for M={ils.m_exp}, code has M={spec.m_exp}"
            )
    return spec, ils


def _wef_config(args, spec: CodeSpec, ils) -> Dict[str, Any]:
    return {
        "code": {"m_exp": spec.m_exp, "unfrozen": list(spec.unfrozen)},
        "interleavers": None if ils is None else {f"{m},{j}": list(p) for (m, j), p in sorted(ils.perms.items())},
        "d_cap": getattr(args, "d_cap", None),
        "mode": getattr(args, "mode", None),
    }


def cmd_wef(args, c: DependencyContainer) -> int:
    spec, ils = _load_code(args, c)
    if ils is not None:
        wef = c.wef_service.realization_wef(spec, ils).truncate(args.d_cap)
    else:
        wef = c.wef_service.ensemble_wef(spec, d_cap=args.d_cap, mode=_mode(args))
    _emit_csv(c, args, c.export_service.wef_rows(wef), ["d", "coefficient", "exact"], _wef_config(args, spec, ils))
    return 0


def cmd_iowef(args, c: DependencyContainer) -> int:
    spec, ils = _load_code(args, c)
    if ils is not None:
        iowef = c.wef_service.enumerate_iowef_exhaustive(
            c.polar_service.encoder_for(spec, ils), spec.dimension
        ).truncate(args.d_cap)
    else:
        iowef = c.wef_service.ensemble_iowef(spec, d_cap=args.d_cap, mode=_mode(args))
    _emit_csv(c, args, c.export_service.iowef_rows(iowef), ["w", "d", "coefficient", "exact"],
              _wef_config(args, spec, ils))
    return 0


def cmd_concat_wef(args, c: DependencyContainer) -> int:
    spec, ils = _load_code(args, c)
    outer = c.artifact_repository.load_outer_spec(args.outer)
    scheme = c.outer_code_service.build_concat_scheme(outer, spec, p=args.p, q=args.q)
    inner_iowef = None
    if ils is not None:
        inner_iowef = c.wef_service.enumerate_iowef_exhaustive(
            c.polar_service.encoder_for(spec, ils), spec.dimension
        ).truncate(args.d_cap)
    wef = c.outer_code_service.concat_wef(scheme, d_cap=args.d_cap, mode=_mode(args), inner_iowef=inner_iowef)
    config = _wef_config(args, spec, ils)
    config.update({"outer": scheme.outer.model_dump(mode="json"), "p": args.p, "q": args.q})
    _emit_csv(c, args, c.export_service.wef_rows(wef), ["d", "coefficient", "exact"], config)
    return 0


def cmd_enumerate(args, c: DependencyContainer) -> int:
    spec, ils = _load_code(args, c)
    encoder = c.polar_service.encoder_for(spec, ils)
    config = _wef_config(args, spec, ils)
    config["iowef"] = args.iowef
    if args.iowef:
        iowef = c.wef_service.enumerate_iowef_exhaustive(encoder, spec.dimension)
        _emit_csv(c, args, c.export_service.iowef_rows(iowef), ["w", "d", "coefficient", "exact"], config)
    else:
        wef = c.wef_service.enumerate_wef_exhaustive(encoder, spec.dimension)
        _emit_csv(c, args, c.export_service.wef_rows(wef), ["d", "coefficient", "exact"], config)
    return 0


def cmd_bound(args, c: DependencyContainer) -> int:
    if args.spec:
        spec = c.artifact_repository.load_code_spec(args.spec)
        n = args.n or spec.block_len
        k = args.k or spec.dimension
        wef = c.wef_service.ensemble_wef(spec, d_cap=args.d_cap)
    else:
        if not args.n or not args.k:
            raise ValidationException("--n and --k are required with --wef")
        n, k = args.n, args.k
        wef = c.export_service.read_wef(args.wef, length=n).truncate(args.d_cap)
    rows = c.bound_service.bound_curve(wef, args.grid, SnrType(args.snr_type), n, k, rate=args.rate)
    config = {"wef": {str(d): str(a) for d, a in wef.items()}, "n": n, "k": k,
              "grid": args.grid, "snr_type": args.snr_type, "rate": args.rate}
    _emit_csv(c, args, rows, ["snr_db", "es_over_n0_db", "rho", "union", "simple"], config)
    return 0


def _scenario_wef(scenario, d_cap: Optional[int], c: DependencyContainer) -> Optional[WeightPoly]:
    if scenario.decoder is DecoderType.UNCODED:
        return None
    if isinstance(scenario.concat, ConcatScheme):
        return c.outer_code_service.concat_wef(scenario.concat, d_cap=d_cap)
    return c.wef_service.ensemble_wef(scenario.code, d_cap=d_cap)


def cmd_simulate(args, c: DependencyContainer) -> int:
    repo = c.artifact_repository
    document = repo.load_scenario(args.scenario)
    scenario = c.simulation_service.build_scenario(document, repo, base_path=args.scenario)
    updates: Dict[str, Any] = {}
    if args.min_errors is not None or args.max_trials is not None:
        updates["stop"] = StopRule(
            min_errors=args.min_errors if args.min_errors is not None else scenario.stop.min_errors,
            max_trials=args.max_trials if args.max_trials is not None else scenario.stop.max_trials,
        )
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.snr_db is not None:
        updates["snr_db"] = args.snr_db
    if updates:
        scenario = scenario.model_copy(update=updates)
    wef = _scenario_wef(scenario, args.d_cap, c) if args.with_bounds else None
    estimates = c.simulation_service.run_bler(
        scenario, jobs=args.jobs, backend=args.backend, batch_size=args.batch_size, wef=wef,
    )
    config = {
        "scenario": document.model_dump(mode="json"),
        "overrides": {k: (v.model_dump() if hasattr(v, "model_dump") else v) for k, v in updates.items()},
        "batch_size": args.batch_size or settings.sim_batch_size,
        "with_bounds": args.with_bounds,
        "d_cap": args.d_cap,
    }
    _emit_csv(c, args, c.export_service.bler_rows(estimates), BLER_COLUMNS, config, seed=scenario.seed)
    return 0


def cmd_repro(args, c: DependencyContainer) -> int:
    report = c.repro_service.run(full=args.full, only=args.only, seed=args.seed,
                                 design_snr_db=args.design_snr_db)
    config = {"full": args.full, "only": args.only, "design_snr_db": report["design_es_over_n0_db"]}
    manifest = c.export_service.build_manifest("repro", config, seed=args.seed)
    if args.out and args.out != "-":
        c.export_service.write_json(args.out, report, manifest)
    else:
        report = dict(report, manifest=manifest.model_dump(mode="json"))
        sys.stdout.write(json.dumps(report, indent=2, default=str) + "\n")
    failed = [e["name"] for e in report["checks"] if not e["passed"]]
    if failed:
        logger.warning("Repro checks failed", extra={"failed": failed})
        return 1
    return 0


COMMANDS = {
    "design": cmd_design,
    "interleavers": cmd_interleavers,
    "wef": cmd_wef,
    "iowef": cmd_iowef,
    "concat-wef": cmd_concat_wef,
    "enumerate": cmd_enumerate,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "repro": cmd_repro,
}
