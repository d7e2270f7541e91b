"""Command-line front end.

One invocation analyzes one system (a file, a built-in corpus entry, or a
projection of one) and emits a tab-delimited summary on stdout, optionally a
JSON report and an SVG rendering.  Exit codes: 0 analysis complete, 1 the
requested property is certified absent, 2 the requested property is
undecided, 3 input or validation error, 4 internal consistency violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import words as wd
from .analysis import AnalysisConfig, report_text, run_analysis, summary_lines, validate_report
from .attractor import IFSystem
from .corpus import CORPUS_NAMES, get_entry, project_system
from .errors import BudgetExceededError, ConsistencyViolationError, IFSValidationError, RenderError
from .geometry import Similitude, rotation_2d

CHECK_TO_FIELD = {
    "irreducible": "irreducible",
    "lsp": "lsp",
    "tiling": "tiling",
    "osc": "osc",
    "sosc": "sosc",
    "wosc": "wosc",
    "overlaps": "finite_overlap",
}

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3
EXIT_CONSISTENCY = 4


def parse_ifs_file(path: str) -> IFSystem:
    """Load and validate a system description from a JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IFSValidationError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IFSValidationError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return ifs_from_json(doc, origin=path)


def ifs_from_json(doc: dict, origin: str = "<input>") -> IFSystem:
    if not isinstance(doc, dict):
        raise IFSValidationError(f"{origin}: top level must be an object")
    try:
        dim = int(doc["dim"])
    except (KeyError, TypeError, ValueError):
        raise IFSValidationError(f"{origin}: missing or bad field 'dim'")
    if dim < 1:
        raise IFSValidationError(f"{origin}: dim must be >= 1, got {dim}")
    raw_maps = doc.get("maps")
    if not isinstance(raw_maps, list) or len(raw_maps) < 2:
        raise IFSValidationError(f"{origin}: 'maps' must be a list of k >= 2 maps")
    maps = []
    for i, m in enumerate(raw_maps, start=1):
        where = f"{origin}: maps[{i}]"
        if not isinstance(m, dict):
            raise IFSValidationError(f"{where}: each map must be an object")
        try:
            scale = float(m["scale"])
        except (KeyError, TypeError, ValueError):
            raise IFSValidationError(f"{where}: missing or bad field 'scale'")
        if not 0.0 < scale < 1.0:
            raise IFSValidationError(f"{where}: scale out of (0,1): {scale}")
        translation = m.get("translation")
        if not isinstance(translation, list) or len(translation) != dim:
            raise IFSValidationError(f"{where}: 'translation' must be a list of {dim} numbers")
        if "matrix" in m:
            mat = np.array(m["matrix"], dtype=float)
            if mat.size != dim * dim:
                raise IFSValidationError(f"{where}: 'matrix' must have {dim * dim} entries (row-major)")
            mat = mat.reshape(dim, dim)
        elif dim == 2:
            mat = rotation_2d(float(m.get("rotation_deg", 0.0)))
        elif dim == 1:
            mat = np.array([[1.0]])
        else:
            raise IFSValidationError(f"{where}: 'matrix' is required for dim = {dim}")
        if m.get("reflect", False):
            mat = mat @ np.diag([1.0] * (dim - 1) + [-1.0]) if dim > 1 else -mat
        err = float(np.max(np.abs(mat.T @ mat - np.eye(dim))))
        if err > 1e-9:
            raise IFSValidationError(f"{where}: matrix is not orthogonal (max |QtQ - I| = {err:.3g})")
        try:
            maps.append(Similitude(scale, mat, np.array(translation, dtype=float)))
        except ValueError as exc:
            raise IFSValidationError(f"{where}: {exc}") from exc
    label = str(doc.get("label", ""))
    try:
        return IFSystem(maps, label)
    except IFSValidationError as exc:
        raise IFSValidationError(f"{origin}: {exc}") from exc


def ifs_to_json(ifs: IFSystem) -> dict:
    """Lossless (bit-exact round-trip) serialization: matrices stored row-major."""
    return {
        "dim": ifs.dim,
        "maps": [
            {
                "scale": f.scale,
                "matrix": [float(v) for v in f.orthogonal.ravel()],
                "translation": [float(v) for v in f.translation],
            }
            for f in ifs.maps
        ],
        "label": ifs.label,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description="Dimension and separation analysis for self-similar sets.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--ifs", metavar="PATH", help="JSON file describing the system")
    src.add_argument(
        "--corpus",
        metavar="NAME",
        help=f"built-in system; one of: {', '.join(CORPUS_NAMES)}",
    )
    parser.add_argument("--levels", type=int, default=5, metavar="N", help="covering levels to examine")
    parser.add_argument("--depth", type=int, default=None, metavar="Q", help="oracle refinement depth")
    parser.add_argument("--eps", type=float, default=None, metavar="X", help="touching tolerance")
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        metavar="B",
        help="max pieces materialized (default 200000; env SELFSIM_BUDGET overrides)",
    )
    parser.add_argument(
        "--check",
        choices=sorted(CHECK_TO_FIELD),
        default=None,
        help="property whose verdict drives the exit code",
    )
    parser.add_argument(
        "--dim",
        choices=["sim", "dim3", "dim4", "box", "all"],
        default="all",
        help="dimension computations to include",
    )
    parser.add_argument(
        "--project",
        type=float,
        default=None,
        metavar="RADIANS",
        help="replace a planar rotation-free system by its projection onto the line at this angle",
    )
    parser.add_argument("--report", metavar="PATH", help="write the JSON report here")
    parser.add_argument("--render", metavar="PATH", help="write an SVG rendering of the deepest level here")
    return parser


def _resolve_budget(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("SELFSIM_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise IFSValidationError(f"SELFSIM_BUDGET is not an integer: {env!r}")
    return wd.DEFAULT_BUDGET


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    corpus_notes: list[str] = []
    try:
        if args.corpus:
            entry = get_entry(args.corpus)
            ifs = entry.ifs
            corpus_notes = [e.note for e in entry.expected if e.note]
        else:
            ifs = parse_ifs_file(args.ifs)
        if args.project is not None:
            ifs = project_system(ifs, args.project)
        budget = _resolve_budget(args.budget)
        if args.levels < 1:
            raise IFSValidationError("--levels must be >= 1")
        config = AnalysisConfig(
            levels=args.levels,
            depth=args.depth,
            eps=args.eps,
            budget=budget,
            dims=(args.dim,),
            checks=(args.check,) if args.check else ("all",),
        )
    except (IFSValidationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        doc = run_analysis(ifs, config)
    except ConsistencyViolationError as exc:
        print(f"internal consistency violation: {exc}", file=sys.stderr)
        json.dump(exc.dump, sys.stderr, indent=2, default=str)
        print(file=sys.stderr)
        return EXIT_CONSISTENCY
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if corpus_notes:
        doc["corpus_notes"] = corpus_notes
    for line in summary_lines(doc):
        print(line)

    if args.report:
        validate_report(doc)
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report_text(doc))
    if args.render:
        from .render import render_levels

        try:
            level = min(args.levels, int(math.floor(math.log(budget) / math.log(ifs.k))))
            render_levels(ifs, max(level, 1), args.render, budget=budget)
        except (RenderError, BudgetExceededError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT_ERROR

    if args.check:
        outcome = doc["separation"][CHECK_TO_FIELD[args.check]]["outcome"]
        if outcome == "fails":
            return EXIT_FAILS
        if outcome == "inconclusive":
            return EXIT_INCONCLUSIVE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
