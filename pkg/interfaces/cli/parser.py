"""Argument parser for the workbench command line"""

import argparse
from typing import List

from shared.config.settings import settings


def _grid(text: str) -> List[float]:
    """'4,5,6' or 'start:stop:step' (stop inclusive)"""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError("grid must be start:stop:step with step > 0")
        start, stop, step = parts
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(max(count, 0))]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse SNR grid '{text}'")


def _add_wef_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", required=True, help="code spec JSON file")
    p.add_argument("--interleavers", help="interleaver file: enumerate this realization instead of the ensemble")
    p.add_argument("--d-cap", type=int, default=None, help="drop terms of output weight above this")
    p.add_argument("--mode", choices=["rational", "float"], default=None,
                   help=f"coefficient arithmetic (default rational for N <= {settings.rational_max_block_len})")
    p.add_argument("--out", help="output CSV (stdout when omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipolar",
        description="i-polar code workbench: design, weight enumerators, bounds and BLER simulation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("--log-dir", default=None, help="also write JSON logs to this directory")
    parser.add_argument("--debug", action="store_true", help="debug-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="select the unfrozen set by GA or from a reliability sequence")
    p.add_argument("--n", type=int, required=True, help="block length (power of two)")
    p.add_argument("--k", type=int, required=True, help="number of unfrozen bits")
    p.add_argument("--design-snr-db", type=float, default=None, help="design Es/N0 in dB for GA selection")
    p.add_argument("--sequence-file", help="reliability sequence, most reliable first")
    p.add_argument("--ascending", action="store_true", help="sequence file lists least reliable first")
    p.add_argument("--out", help="code spec JSON (stdout when omitted)")

    p = sub.add_parser("interleavers", help="sample or write an interleaver set")
    p.add_argument("--n", type=int, required=True, help="block length (power of two)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--identity", action="store_true", help="identity set (regular polar code)")
    p.add_argument("--out", help="interleaver JSON (stdout when omitted)")

    p = sub.add_parser("wef", help="ensemble (or realization) weight enumerator")
    _add_wef_options(p)

    p = sub.add_parser("iowef", help="ensemble (or realization) input-output weight enumerator")
    _add_wef_options(p)

    p = sub.add_parser("concat-wef", help="average WEF of a P-outer / Q-inner concatenated scheme")
    _add_wef_options(p)
    p.add_argument("--outer", required=True, help="outer code spec JSON (crc, bch or rra)")
    p.add_argument("--p", type=int, default=1, help="number of outer codewords")
    p.add_argument("--q", type=int, default=1, help="number of inner i-polar blocks")

    p = sub.add_parser("enumerate", help="exact WEF of one realization by encoding every message")
    p.add_argument("--spec", required=True)
    p.add_argument("--interleavers", help="interleaver file (regular polar code when omitted)")
    p.add_argument("--iowef", action="store_true", help="enumerate the IOWEF instead")
    p.add_argument("--out")

    p = sub.add_parser("bound", help="union and simple BLER bounds from a WEF")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--wef", help="WEF CSV written by the wef command")
    src.add_argument("--spec", help="code spec: use its ensemble WEF")
    p.add_argument("--n", type=int, help="block length (defaults to the code's)")
    p.add_argument("--k", type=int, help="dimension (defaults to the code's)")
    p.add_argument("--rate", type=float, default=None, help="rate for Eb/N0 conversion (default k/n)")
    p.add_argument("--grid", type=_grid, required=True, help="SNR grid in dB: 'a,b,c' or 'start:stop:step'")
    p.add_argument("--snr-type", choices=["ebn0", "esn0"], default="ebn0")
    p.add_argument("--d-cap", type=int, default=None)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="Monte Carlo BLER over BI-AWGN")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--snr-db", type=_grid, default=None, help="override the scenario grid")
    p.add_argument("--jobs", type=int, default=None, help=f"parallel workers (default {settings.sim_jobs})")
    p.add_argument("--backend", choices=["local", "celery"], default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--min-errors", type=int, default=None)
    p.add_argument("--max-trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--with-bounds", action="store_true", help="add union/simple bound columns")
    p.add_argument("--d-cap", type=int, default=None, help="d_cap for the bound WEF")
    p.add_argument("--out")

    p = sub.add_parser("repro", help="run the reference reproduction suite")
    p.add_argument("--full", action="store_true", help="include the long-running checks")
    p.add_argument("--only", nargs="*", default=None, help="restrict to named checks")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--design-snr-db", type=float, default=None,
                   help="Es/N0 (dB) for designing the 1024-length codes (default: IPOLAR_REFERENCE_DESIGN_SNR_DB)")
    p.add_argument("--out", help="JSON report (stdout when omitted)")

    return parser
