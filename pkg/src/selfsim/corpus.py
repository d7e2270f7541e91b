"""Built-in reference systems spanning the regimes the analyzer distinguishes.

Each entry pairs an IFS with the values and verdicts it is expected to
produce, every expectation carrying a tolerance and a provenance tag:
"trivial" (immediate from the definition), "derived" (computed by an
independent closed form or brute-force check), or "published" (a reported
value from the literature on these systems).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attractor import IFSystem
from .errors import IFSValidationError
from .geometry import similitude_1d, similitude_2d

LOG2_OVER_LOG3 = math.log(2.0) / math.log(3.0)
LOG3_OVER_LOG2 = math.log(3.0) / math.log(2.0)


@dataclass(frozen=True)
class Expectation:
    """One machine-checkable claim about a report field.

    `path` is a dotted path into the report document.  Exactly one of
    `value` (numeric, checked within `tol`) or `equals` (exact match,
    typically a verdict outcome) is set.
    """

    path: str
    provenance: str
    value: float | None = None
    tol: float = 0.0
    equals: str | None = None
    note: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    ifs: IFSystem
    expected: tuple[Expectation, ...] = field(default_factory=tuple)


def _bisection() -> IFSystem:
    return IFSystem([similitude_1d(0.5, 0.0), similitude_1d(0.5, 0.5)], "bisection")


def _cantor() -> IFSystem:
    return IFSystem([similitude_1d(1.0 / 3.0, 0.0), similitude_1d(1.0 / 3.0, 2.0 / 3.0)], "cantor")


def _duplicate_cantor() -> IFSystem:
    return IFSystem(
        [
            similitude_1d(1.0 / 3.0, 0.0),
            similitude_1d(1.0 / 3.0, 0.0),
            similitude_1d(1.0 / 3.0, 2.0 / 3.0),
        ],
        "duplicate_cantor",
    )


GASKET_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0))

MATTILA_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, 1.0 / (2.0 * math.sqrt(3.0))))


def _corner_system(vertices, ratio: float, label: str) -> IFSystem:
    # f_i(x) = v_i + ratio * (x - v_i): contraction toward each vertex.
    maps = [similitude_2d(ratio, (1.0 - ratio) * np.asarray(v)) for v in vertices]
    return IFSystem(maps, label)


def _gasket() -> IFSystem:
    return _corner_system(GASKET_VERTICES, 0.5, "gasket")


def _mattila() -> IFSystem:
    return _corner_system(MATTILA_VERTICES, 1.0 / 3.0, "mattila")


def _squares() -> IFSystem:
    corners = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
    return _corner_system(corners, 0.5, "squares")


def project_system(ifs: IFSystem, theta: float) -> IFSystem:
    """Orthogonal projection of a rotation-free planar system onto the line at angle theta.

    When every map is x -> c x + t (no rotation or reflection), the projected
    set is itself self-similar with 1-D maps p -> c p + <t, e_theta>.
    """
    if ifs.dim != 2:
        raise IFSValidationError("projection requires a 2-D system")
    e = np.array([math.cos(theta), math.sin(theta)])
    maps = []
    for f in ifs.maps:
        if np.max(np.abs(f.orthogonal - np.eye(2))) > 1e-12:
            raise IFSValidationError("projection requires rotation-free maps")
        maps.append(similitude_1d(f.scale, float(f.translation @ e)))
    return IFSystem(maps, f"{ifs.label}_proj:{theta:g}")


def _alpha_expectation(value: float, provenance: str) -> Expectation:
    return Expectation("dimensions.similarity.alpha", provenance, value=value, tol=1e-9)


def _outcome(path: str, outcome: str, provenance: str, note: str = "") -> Expectation:
    return Expectation(path, provenance, equals=outcome, note=note)


def _build_entries() -> dict[str, CorpusEntry]:
    entries = [
        CorpusEntry(
            "bisection",
            _bisection(),
            (
                _alpha_expectation(1.0, "trivial"),
                Expectation("diameter.upper", "trivial", value=1.0, tol=1e-9),
                Expectation("dimensions.box.slope", "derived", value=1.0, tol=0.05),
                Expectation("dimensions.dim4.lower", "derived", value=1.0, tol=1e-9),
                Expectation("dimensions.dim4.upper", "derived", value=1.0, tol=1e-9),
                _outcome("separation.irreducible.outcome", "holds", "derived"),
                _outcome("separation.osc.outcome", "holds", "trivial"),
                _outcome("separation.sosc.outcome", "holds", "trivial"),
                _outcome("separation.finite_overlap.outcome", "holds", "trivial"),
                _outcome("separation.lsp1.outcome", "holds", "derived"),
                _outcome("separation.lsp2.outcome", "holds", "trivial"),
                _outcome("separation.tiling.outcome", "holds", "derived"),
                _outcome("separation.wosc.outcome", "holds", "derived"),
                _outcome("dimensions.h4_alpha.positive.outcome", "holds", "trivial"),
                Expectation("dimensions.h4_alpha.upper", "trivial", value=1.0, tol=1e-6),
            ),
        ),
        CorpusEntry(
            "cantor",
            _cantor(),
            (
                _alpha_expectation(LOG2_OVER_LOG3, "derived"),
                Expectation("diameter.upper", "derived", value=1.0, tol=1e-9),
                Expectation("dimensions.box.slope", "derived", value=LOG2_OVER_LOG3, tol=0.05),
                Expectation("dimensions.dim4.upper", "derived", value=LOG2_OVER_LOG3, tol=1e-9),
                _outcome("separation.irreducible.outcome", "holds", "derived"),
                _outcome("separation.osc.outcome", "holds", "derived"),
                _outcome("separation.sosc.outcome", "holds", "derived"),
                _outcome("separation.finite_overlap.outcome", "holds", "derived"),
                _outcome("separation.lsp1.outcome", "holds", "derived"),
                _outcome("separation.tiling.outcome", "holds", "derived"),
                _outcome("separation.wosc.outcome", "holds", "derived"),
            ),
        ),
        CorpusEntry(
            "gasket",
            _gasket(),
            (
                _alpha_expectation(LOG3_OVER_LOG2, "derived"),
                Expectation("diameter.upper", "derived", value=1.0, tol=1e-9),
                Expectation("dimensions.box.slope", "derived", value=LOG3_OVER_LOG2, tol=0.05),
                Expectation("dimensions.dim4.lower", "derived", value=LOG3_OVER_LOG2, tol=1e-9),
                _outcome("separation.irreducible.outcome", "holds", "derived"),
                _outcome("separation.osc.outcome", "holds", "derived"),
                _outcome("separation.sosc.outcome", "holds", "derived"),
                _outcome("separation.finite_overlap.outcome", "holds", "derived"),
                _outcome("separation.lsp1.outcome", "holds", "derived"),
                _outcome("separation.tiling.outcome", "holds", "derived"),
                _outcome("separation.wosc.outcome", "holds", "derived"),
                _outcome("dimensions.h4_alpha.positive.outcome", "holds", "derived"),
            ),
        ),
        CorpusEntry(
            "squares",
            _squares(),
            (
                _alpha_expectation(2.0, "trivial"),
                Expectation("diameter.upper", "trivial", value=math.sqrt(2.0), tol=1e-9),
                _outcome("separation.irreducible.outcome", "holds", "derived"),
                _outcome("separation.osc.outcome", "holds", "trivial"),
                _outcome("separation.sosc.outcome", "holds", "trivial"),
                _outcome("separation.wosc.outcome", "holds", "derived"),
            ),
        ),
        CorpusEntry(
            "duplicate_cantor",
            _duplicate_cantor(),
            (
                _alpha_expectation(1.0, "trivial"),
                Expectation("dimensions.dim4.upper", "derived", value=LOG2_OVER_LOG3, tol=1e-9),
                _outcome("separation.irreducible.outcome", "fails", "derived"),
                _outcome("separation.osc.outcome", "fails", "trivial"),
                _outcome("separation.lsp1.outcome", "fails", "derived"),
                _outcome("separation.tiling.outcome", "fails", "derived"),
                _outcome("separation.finite_overlap.outcome", "fails", "derived"),
                _outcome("separation.wosc.outcome", "fails", "derived"),
                _outcome("dimensions.h4_alpha.positive.outcome", "fails", "derived"),
            ),
        ),
        CorpusEntry(
            "mattila",
            _mattila(),
            (
                _alpha_expectation(1.0, "published"),
                Expectation("diameter.upper", "derived", value=1.0, tol=1e-9),
                _outcome("separation.irreducible.outcome", "holds", "derived"),
                _outcome("separation.osc.outcome", "holds", "published"),
                _outcome("separation.sosc.outcome", "holds", "published"),
                _outcome("separation.wosc.outcome", "holds", "derived"),
            ),
        ),
    ]
    return {e.name: e for e in entries}


_ENTRIES = _build_entries()

CORPUS_NAMES = tuple(_ENTRIES) + ("mattila_proj:<theta>",)


def _projection_entry(theta: float) -> CorpusEntry:
    ifs = project_system(_mattila(), theta)
    expected = [
        _alpha_expectation(1.0, "published"),
        _outcome(
            "separation.wosc.outcome",
            "inconclusive",
            "published",
            note=(
                "equality of Hausdorff and similarity dimension holds for almost "
                "every projection angle, so the structure is expected to be "
                "irreducible, but the overlaps admit no certificate at finite "
                "resolution"
            ),
        ),
        _outcome("separation.osc.outcome", "inconclusive", "derived"),
    ]
    if abs(theta - 0.7) < 1e-12:
        expected.append(Expectation("dimensions.box.slope", "published", value=1.0, tol=0.15))
    return CorpusEntry(f"mattila_proj:{theta:g}", ifs, tuple(expected))


def get_entry(name: str) -> CorpusEntry:
    """Look up a corpus entry; projection entries are parameterized by angle."""
    if name in _ENTRIES:
        return _ENTRIES[name]
    if name.startswith("mattila_proj:"):
        try:
            theta = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise KeyError(f"bad projection angle in corpus name {name!r}") from exc
        return _projection_entry(theta)
    raise KeyError(f"unknown corpus entry {name!r}; known: {', '.join(CORPUS_NAMES)}")


def iter_static_entries():
    return iter(_ENTRIES.values())
