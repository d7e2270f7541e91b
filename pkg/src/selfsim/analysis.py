"""Analysis orchestration: one deterministic report document per run.

The report is plain JSON with a published schema.  Identical input, config
and budget produce byte-identical output except for the timestamp field;
budget shortfalls are recorded inside the report instead of aborting it.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass, field

from . import words as wd
from .attractor import IFSystem
from .oracle import GeometricOracle
from .separation import SeparationAnalyzer

SCHEMA_VERSION = "1"

VERDICT_SCHEMA = {
    "type": "object",
    "properties": {
        "outcome": {"enum": ["holds", "fails", "inconclusive"]},
        "certificate": {"type": "object"},
        "witness": {"type": "object"},
        "resolution": {"type": "object"},
    },
    "required": ["outcome", "resolution"],
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "generated_at": {"type": "string"},
        "label": {"type": "string"},
        "system": {
            "type": "object",
            "properties": {
                "dimension": {"type": "integer", "minimum": 1},
                "k": {"type": "integer", "minimum": 2},
                "ratios": {"type": "array", "items": {"type": "number"}},
            },
            "required": ["dimension", "k", "ratios"],
        },
        "config": {"type": "object"},
        "diameter": {
            "type": "object",
            "properties": {"lower": {"type": "number"}, "upper": {"type": "number"}},
            "required": ["lower", "upper"],
        },
        "dimensions": {
            "type": "object",
            "properties": {
                "similarity": {
                    "type": "object",
                    "properties": {"alpha": {"type": "number"}, "residual": {"type": "number"}},
                    "required": ["alpha", "residual"],
                },
                "dim3": {"type": "object"},
                "dim4": {
                    "type": "object",
                    "properties": {"lower": {"type": "number"}, "upper": {"type": "number"}},
                    "required": ["lower", "upper"],
                },
                "h4_alpha": {
                    "type": "object",
                    "properties": {"positive": VERDICT_SCHEMA, "upper": {"type": "number"}},
                    "required": ["positive", "upper"],
                },
                "box": {"type": ["object", "null"]},
            },
            "required": ["similarity", "dim3", "dim4", "h4_alpha"],
        },
        "separation": {
            "type": "object",
            "properties": {
                "irreducible": VERDICT_SCHEMA,
                "irreducible_levels": {"type": "object"},
                "lsp1": VERDICT_SCHEMA,
                "lsp2": VERDICT_SCHEMA,
                "lsp": VERDICT_SCHEMA,
                "tiling": VERDICT_SCHEMA,
                "finite_overlap": VERDICT_SCHEMA,
                "osc": VERDICT_SCHEMA,
                "sosc": VERDICT_SCHEMA,
                "wosc": VERDICT_SCHEMA,
                "order_lower_bound": {"type": "object"},
                "consistency": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "implication": {"type": "string"},
                            "status": {"enum": ["consistent", "violated", "vacuous"]},
                        },
                        "required": ["implication", "status"],
                    },
                },
            },
            "required": [
                "irreducible",
                "lsp1",
                "lsp2",
                "lsp",
                "tiling",
                "finite_overlap",
                "osc",
                "sosc",
                "wosc",
                "consistency",
            ],
        },
        "budget": {
            "type": "object",
            "properties": {
                "limit": {"type": "integer"},
                "notes": {"type": "array", "items": {"type": "string"}},
            },
            "required": ["limit", "notes"],
        },
    },
    "required": [
        "schema_version",
        "generated_at",
        "label",
        "system",
        "config",
        "diameter",
        "dimensions",
        "separation",
        "budget",
    ],
}


@dataclass(frozen=True)
class AnalysisConfig:
    levels: int = 5
    lsp_levels: int = 2
    tiling_levels: int = 1
    h4_levels: int = 4
    depth: int | None = None
    eps: float | None = None
    budget: int = wd.DEFAULT_BUDGET
    with_box: bool = True
    checks: tuple[str, ...] = ("all",)
    dims: tuple[str, ...] = ("all",)

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "lsp_levels": self.lsp_levels,
            "tiling_levels": self.tiling_levels,
            "h4_levels": self.h4_levels,
            "depth": self.depth,
            "eps": self.eps,
            "budget": self.budget,
            "with_box": self.with_box,
            "checks": list(self.checks),
            "dims": list(self.dims),
        }


def _clamped_levels(ifs: IFSystem, requested: int, budget: int, notes: list[str], what: str) -> int:
    limit = int(math.floor(math.log(max(budget, ifs.k)) / math.log(ifs.k)))
    if requested > limit:
        notes.append(
            f"{what} clamped from {requested} to {limit}: materializing "
            f"{ifs.k}^{requested} pieces exceeds the budget of {budget}"
        )
        return limit
    return requested


def run_analysis(ifs: IFSystem, config: AnalysisConfig | None = None) -> dict:
    """Run the full suite and assemble the report document."""
    config = config or AnalysisConfig()
    notes: list[str] = []
    levels = _clamped_levels(ifs, config.levels, config.budget, notes, "levels")
    lsp_levels = min(_clamped_levels(ifs, config.lsp_levels, config.budget, notes, "lsp_levels"), levels)
    tiling_levels = min(config.tiling_levels, lsp_levels)
    with_box = config.with_box and (
        "all" in config.dims or "box" in config.dims or "dim4" in config.dims
    )
    oracle = GeometricOracle(ifs, eps=config.eps, depth=config.depth)
    analyzer = SeparationAnalyzer(
        ifs,
        oracle=oracle,
        levels=levels,
        lsp_levels=lsp_levels,
        tiling_levels=tiling_levels,
        h4_levels=config.h4_levels,
        budget=config.budget,
    )
    report = analyzer.full_report(with_box=with_box)
    est = ifs.diameter_bounds
    if not est.converged:
        notes.append("diameter bracket did not close to tolerance within budget")
    box = report.dimensions.box
    if box is not None:
        notes.extend(f"box estimate: {f}" for f in box.flags)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "label": ifs.label,
        "system": {
            "dimension": ifs.dim,
            "k": ifs.k,
            "ratios": [float(c) for c in ifs.ratios],
        },
        "config": config.to_json(),
        "diameter": {"lower": est.lower, "upper": est.upper},
        "dimensions": report.dimensions.to_json(),
        "separation": report.to_json(),
        "budget": {"limit": config.budget, "notes": notes},
    }
    return doc


def report_text(doc: dict) -> str:
    """Canonical serialized form (insertion order is already deterministic)."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def validate_report(doc: dict) -> None:
    import jsonschema

    jsonschema.validate(doc, REPORT_SCHEMA)


def summary_lines(doc: dict) -> list[str]:
    """Tab-delimited summary of the load-bearing results, one per line."""
    sep = doc["separation"]
    dims = doc["dimensions"]
    rows = [
        ("label", doc["label"]),
        ("alpha", f"{dims['similarity']['alpha']:.12g}"),
        ("dim3_verified", str(dims["dim3"]["passed"]).lower()),
        ("dim4_lower", f"{dims['dim4']['lower']:.12g}"),
        ("dim4_upper", f"{dims['dim4']['upper']:.12g}"),
        ("h4_alpha_positive", dims["h4_alpha"]["positive"]["outcome"]),
        ("h4_alpha_upper", f"{dims['h4_alpha']['upper']:.12g}"),
        ("diameter", f"{doc['diameter']['upper']:.12g}"),
    ]
    if dims.get("box"):
        rows.append(("box_slope", f"{dims['box']['slope']:.6g}"))
    for key in ("irreducible", "lsp1", "lsp2", "lsp", "tiling", "finite_overlap", "osc", "sosc", "wosc"):
        rows.append((key, sep[key]["outcome"]))
    order = sep.get("order_lower_bound", {})
    if order:
        rows.append(("order_lower_bound", str(max(order.values()))))
    violated = sum(1 for c in sep["consistency"] if c["status"] == "violated")
    consistent = sum(1 for c in sep["consistency"] if c["status"] == "consistent")
    rows.append(("consistency", f"{consistent} consistent, {violated} violated"))
    return [f"{k}\t{v}" for k, v in rows]
