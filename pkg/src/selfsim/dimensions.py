"""Dimension machinery: similarity dimension, level-sum exponents, finite-subcover
optimization, and box-counting estimates.

Two exponents are computed for the natural covering structure.  The level-sum
exponent (dimension III) has a closed form: the level-n sum of diam^s is
diam(K)^s (sum_i c_i^s)^n, so its critical point is the similarity dimension.
The finite-subcover exponent (dimension IV) minimizes the same sum over finite
families drawn from any mix of levels; proper subcovers, when they exist, pull
it strictly below the similarity dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import words as wd
from .attractor import IFSystem, build_level, level_points
from .oracle import GeometricOracle, Verdict, fails, holds, inconclusive


def similarity_dimension(ratios, tol: float = 1e-12) -> float:
    """Unique root of sum_i c_i^s = 1 for k >= 2 contraction ratios, by bisection."""
    ratios = [float(c) for c in ratios]
    if len(ratios) < 2:
        raise ValueError("similarity dimension needs k >= 2 ratios")
    for c in ratios:
        if not 0.0 < c < 1.0:
            raise ValueError(f"ratio out of (0,1): {c}")
    return _exponent_root(ratios, tol)


def subcover_exponent(ratios, tol: float = 1e-12) -> float:
    """Root of sum c^t = 1 for an arbitrary nonempty multiset of ratios in (0,1)."""
    ratios = [float(c) for c in ratios]
    if not ratios:
        raise ValueError("empty ratio multiset")
    if len(ratios) == 1:
        return 0.0
    return _exponent_root(ratios, tol)


def _exponent_root(ratios, tol: float) -> float:
    def p(s: float) -> float:
        return math.fsum(c**s for c in ratios) - 1.0

    lo, hi = 0.0, 1.0
    while p(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("no root found; ratios degenerate")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if p(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if abs(p(root)) > tol:
        raise ArithmeticError(f"bisection residual {p(root):.3g} above tolerance {tol:.3g}")
    return root


def h3_level_sum(ifs: IFSystem, s: float, n: int) -> float:
    """Sum of diam(piece)^s over level n, in closed form (exact for these coverings)."""
    if s < 0:
        raise ValueError("exponent must be >= 0")
    base = math.fsum(float(c) ** s for c in ifs.ratios)
    return ifs.diameter_upper**s * base**n


@dataclass(frozen=True)
class Dim3Regime:
    s: float
    geometric_factor: float
    monotone: bool
    factor_at_levels: float
    target_level: int | None
    passed: bool

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "geometric_factor": self.geometric_factor,
            "monotone": self.monotone,
            "factor_at_levels": self.factor_at_levels
            if math.isfinite(self.factor_at_levels)
            else None,
            "target_level": self.target_level,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class Dim3Verification:
    alpha: float
    spread: float
    levels: int
    constancy_max_rel_dev: float
    constancy_passed: bool
    below: Dim3Regime
    above: Dim3Regime

    @property
    def passed(self) -> bool:
        return self.constancy_passed and self.below.passed and self.above.passed

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "spread": self.spread,
            "levels": self.levels,
            "constancy_max_rel_dev": self.constancy_max_rel_dev,
            "constancy_passed": self.constancy_passed,
            "below": self.below.to_json(),
            "above": self.above.to_json(),
            "passed": self.passed,
        }


def verify_dim3(
    ifs: IFSystem,
    alpha: float,
    spread: float = 0.05,
    levels: int = 40,
    factor: float = 10.0,
    horizon: int = 100_000,
) -> Dim3Verification:
    """Confirm the three level-sum regimes around the critical exponent.

    At s = alpha the sums are constant; at s = alpha -/+ spread they grow/shrink
    geometrically.  The divergence factor is certified in closed form: the level
    where the sums pass `factor` times the first value is computed exactly, and
    may exceed `levels` when spread is small (the geometric rate is then close
    to 1, so the factor is reached later; `horizon` caps the search).
    """
    if spread <= 0:
        raise ValueError("spread must be positive")
    base_alpha = math.fsum(float(c) ** alpha for c in ifs.ratios)
    max_dev = max(abs(base_alpha ** (n - 1) - 1.0) for n in range(1, levels + 1))

    def regime(s: float, growing: bool) -> Dim3Regime:
        r = math.fsum(float(c) ** s for c in ifs.ratios)
        monotone = r > 1.0 if growing else r < 1.0
        factor_here = r ** (levels - 1)
        target = factor if growing else 1.0 / factor
        level_needed = None
        if monotone:
            need = math.log(target) / math.log(r)
            if need <= horizon:
                level_needed = int(math.ceil(need)) + 1
        passed = monotone and level_needed is not None
        return Dim3Regime(s, r, monotone, factor_here, level_needed, passed)

    return Dim3Verification(
        alpha=alpha,
        spread=spread,
        levels=levels,
        constancy_max_rel_dev=max_dev,
        constancy_passed=max_dev <= 1e-9,
        below=regime(alpha - spread, growing=True),
        above=regime(alpha + spread, growing=False),
    )


# ----------------------------------------------------------------------
# minimal-weight finite subcovers


@dataclass(frozen=True)
class SubcoverResult:
    weight: float
    cover: tuple[wd.Word, ...]
    s: float
    max_level: int
    ground_level: int
    exact: bool
    proper: bool

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "cover": [list(w) for w in self.cover],
            "s": self.s,
            "max_level": self.max_level,
            "ground_level": self.ground_level,
            "exact": self.exact,
            "proper": self.proper,
        }


def min_subcover_weight(
    ifs: IFSystem,
    s: float,
    max_level: int,
    oracle: GeometricOracle | None = None,
    ground_level: int | None = None,
    budget: int = wd.DEFAULT_BUDGET,
    node_budget: int = 100_000,
) -> SubcoverResult:
    """Minimum of sum diam(piece)^s over certified covers drawn from levels 1..max_level.

    The whole set is represented by the pieces of a fine "ground" level; a
    candidate family certifiably covers when every ground piece is inside some
    single family member (word factorization through the oracle).  Exact
    branch-and-bound over the resulting weighted set cover; the result is an
    upper bound for the true subcover infimum and exact over the restricted
    horizon, since unrecognized coverage can only exclude candidate covers.
    """
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    oracle = oracle if oracle is not None else GeometricOracle(ifs)
    ground = max_level if ground_level is None else ground_level
    leaves = build_level(ifs, ground, budget).pieces
    nl = len(leaves)
    full_mask = (1 << nl) - 1
    leaf_anchors = np.array([p.anchor for p in leaves])

    candidates: list[tuple[wd.Word, float, int]] = []
    for level in range(1, max_level + 1):
        block = ifs.k ** (ground - level)
        for idx, piece in enumerate(build_level(ifs, level, budget).pieces):
            # Symbolic coverage: the leaf block under this word.
            lo = idx * block
            mask = ((1 << block) - 1) << lo
            # Geometric coverage: leaves elsewhere whose sets factor through
            # this piece's map (duplicates and overlaps).
            gaps = (
                np.linalg.norm(leaf_anchors - piece.enclosure.center, axis=1)
                - piece.enclosure.radius
            )
            for li in np.nonzero(gaps <= oracle.margin)[0]:
                li = int(li)
                if lo <= li < lo + block:
                    continue
                if leaves[li].ratio > piece.ratio * (1.0 + 1e-9):
                    continue
                if oracle.subset_word(leaves[li], piece) is not None:
                    mask |= 1 << li
            candidates.append((piece.word, piece.ratio**s, mask))

    # Identical coverage keeps the lightest, shallowest-first representative.
    by_mask: dict[int, tuple[wd.Word, float]] = {}
    for word, weight, mask in candidates:
        kept = by_mask.get(mask)
        if kept is None or weight < kept[1] - 1e-15:
            by_mask[mask] = (word, weight)
    dedup = sorted(((w, wt, m) for m, (w, wt) in by_mask.items()), key=lambda c: (len(c[0]), c[0]))

    best_weight, best_sel, exact = _set_cover_branch_and_bound(dedup, full_mask, nl, node_budget)
    cover = tuple(sorted((dedup[i][0] for i in best_sel), key=lambda w: (len(w), w)))
    diam_factor = ifs.diameter_upper**s
    # A cover equal to one complete level is not a proper subcover.
    proper = not any(
        len(cover) == ifs.k**lvl and all(len(w) == lvl for w in cover)
        for lvl in range(1, max_level + 1)
    )
    return SubcoverResult(
        weight=best_weight * diam_factor,
        cover=cover,
        s=s,
        max_level=max_level,
        ground_level=ground,
        exact=exact,
        proper=proper,
    )


def _set_cover_branch_and_bound(candidates, full_mask: int, n_elements: int, node_budget: int):
    """Exact weighted set cover; deterministic, shallow-first tie-breaking."""
    m = len(candidates)
    masks = [c[2] for c in candidates]
    weights = [c[1] for c in candidates]

    covering: list[list[int]] = [[] for _ in range(n_elements)]
    for j in range(m):
        mask = masks[j]
        while mask:
            low = mask & -mask
            covering[low.bit_length() - 1].append(j)
            mask ^= low

    # Per-element lower-bound rate using full candidate sizes (valid since the
    # true per-node rate can only be larger).
    elem_rate = [
        min((weights[j] / masks[j].bit_count()) for j in covering[e]) if covering[e] else math.inf
        for e in range(n_elements)
    ]

    def lower_bound(uncovered: int) -> float:
        total = 0.0
        mask = uncovered
        while mask:
            low = mask & -mask
            total += elem_rate[low.bit_length() - 1]
            mask ^= low
        return total

    def greedy(uncovered: int) -> tuple[float, list[int]]:
        sel: list[int] = []
        total = 0.0
        while uncovered:
            best_j, best_rate = -1, math.inf
            for j in range(m):
                gain = (masks[j] & uncovered).bit_count()
                if gain == 0:
                    continue
                rate = weights[j] / gain
                if rate < best_rate - 1e-15:
                    best_j, best_rate = j, rate
            if best_j < 0:
                return math.inf, []
            sel.append(best_j)
            total += weights[best_j]
            uncovered &= ~masks[best_j]
        return total, sel

    best_weight, best_sel = greedy(full_mask)
    if math.isinf(best_weight):
        raise RuntimeError("ground level not coverable by its own candidates")
    nodes = 0
    exact = True

    def branch(uncovered: int, weight: float, sel: list[int]):
        nonlocal best_weight, best_sel, nodes, exact
        if not uncovered:
            if weight < best_weight - 1e-15:
                best_weight, best_sel = weight, list(sel)
            return
        nodes += 1
        if nodes > node_budget:
            exact = False
            return
        if weight + lower_bound(uncovered) >= best_weight - 1e-15:
            return
        # Branch on the statically most constrained uncovered element.
        pick, pick_count = -1, math.inf
        mask = uncovered
        while mask:
            low = mask & -mask
            e = low.bit_length() - 1
            if len(covering[e]) < pick_count:
                pick, pick_count = e, len(covering[e])
            mask ^= low
        for j in covering[pick]:
            sel.append(j)
            branch(uncovered & ~masks[j], weight + weights[j], sel)
            sel.pop()

    branch(full_mask, 0.0, [])
    return best_weight, best_sel, exact


# ----------------------------------------------------------------------
# level peeling (proper subcovers of a single level)


@dataclass(frozen=True)
class LevelPeel:
    level: int
    removed: tuple[wd.Word, ...]
    retained: tuple[wd.Word, ...]
    exponent: float | None
    inconclusive: int


def find_level_subcover(
    ifs: IFSystem, oracle: GeometricOracle, n: int, budget: int = wd.DEFAULT_BUDGET
) -> LevelPeel:
    """Greedily remove pieces of one level while the rest still certifiably covers.

    Removal order is reverse-lexicographic so later duplicates drop first.  The
    exponent of the retained family is the root of sum c^t = 1 over it; any
    proper subcover pins the finite-subcover dimension below that root.
    """
    pieces = build_level(ifs, n, budget).pieces
    retained = list(range(len(pieces)))
    removed: list[wd.Word] = []
    inconclusive = 0
    for idx in reversed(range(len(pieces))):
        others = [pieces[j] for j in retained if j != idx]
        if not others:
            continue
        verdict = oracle.covered_by(pieces[idx], others)
        if verdict.is_holds:
            retained.remove(idx)
            removed.append(pieces[idx].word)
        elif verdict.is_inconclusive:
            inconclusive += 1
    exponent = None
    if removed:
        exponent = subcover_exponent([pieces[j].ratio for j in retained])
    return LevelPeel(
        level=n,
        removed=tuple(reversed(removed)),
        retained=tuple(pieces[j].word for j in retained),
        exponent=exponent,
        inconclusive=inconclusive,
    )


# ----------------------------------------------------------------------
# dimension IV bounds and the subcover measure at the critical exponent


@dataclass(frozen=True)
class Dim4Bounds:
    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str
    subcover: dict | None = None

    def to_json(self) -> dict:
        doc = {
            "lower": self.lower,
            "upper": self.upper,
            "lower_provenance": self.lower_provenance,
            "upper_provenance": self.upper_provenance,
        }
        if self.subcover is not None:
            doc["subcover"] = self.subcover
        return doc


def dim4_bounds(
    ifs: IFSystem,
    oracle: GeometricOracle,
    alpha: float,
    irreducibility: dict[int, Verdict],
    box_slope: float | None = None,
    box_residual: float = 0.0,
    budget: int = wd.DEFAULT_BUDGET,
) -> Dim4Bounds:
    """Bracket the finite-subcover dimension.

    Upper: alpha unconditionally (level sums), improved to the exponent of the
    best proper subcover found at any reducible level.  Lower: alpha when every
    examined level carries irreducibility certificates; otherwise the box-count
    slope, clamped and flagged as heuristic.
    """
    upper = alpha
    upper_prov = "level-sum bound: finite-subcover exponent never exceeds the similarity dimension"
    subcover_doc = None
    for n, verdict in sorted(irreducibility.items()):
        if not verdict.is_fails:
            continue
        peel = find_level_subcover(ifs, oracle, n, budget)
        if peel.exponent is not None and peel.exponent < upper:
            upper = peel.exponent
            upper_prov = f"proper subcover exponent at level {n}"
            subcover_doc = {
                "level": n,
                "removed": [list(w) for w in peel.removed],
                "retained": [list(w) for w in peel.retained],
                "exponent": peel.exponent,
            }
    levels = sorted(irreducibility)
    if levels and all(irreducibility[n].is_holds for n in levels):
        scope = "all levels" if _symbolic_all_levels(irreducibility) else f"levels 1..{levels[-1]}"
        lower = alpha
        lower_prov = f"irreducibility certificates ({scope}); equality of the subcover and level-sum exponents"
    elif box_slope is not None:
        lower = min(max(box_slope - box_residual, 0.0), upper)
        lower_prov = "box-count fit lower bound (heuristic, not rigorous)"
    else:
        lower = 0.0
        lower_prov = "no lower evidence"
    if lower > upper:
        lower = upper
    return Dim4Bounds(lower, upper, lower_prov, upper_prov, subcover_doc)


def _symbolic_all_levels(irreducibility: dict[int, Verdict]) -> bool:
    return all(
        v.resolution.get("all_levels", False) for v in irreducibility.values() if v.is_holds
    ) and bool(irreducibility)


@dataclass(frozen=True)
class H4Bounds:
    positive: Verdict
    upper: float
    weights_by_level: dict[int, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "positive": self.positive.to_json(),
            "upper": self.upper,
            "weights_by_level": {str(k): v for k, v in self.weights_by_level.items()},
        }


def h4_alpha_bounds(
    ifs: IFSystem,
    oracle: GeometricOracle,
    alpha: float,
    irreducibility: dict[int, Verdict],
    max_level: int = 4,
    budget: int = wd.DEFAULT_BUDGET,
) -> H4Bounds:
    """Bounds on the finite-subcover measure at the critical exponent.

    A proper subcover with alpha-weight q < 1 (relative to the full level)
    drives the measure to zero: concatenating the subcover with itself keeps
    covering while multiplying the weight by q each time.  Irreducibility
    certificates at every examined level are the positive evidence.
    """
    full = ifs.diameter_upper**alpha
    weights: dict[int, float] = {}
    witness_level = None
    levels = [n for n in range(1, max_level + 1) if ifs.k**n <= min(budget, 4000)]
    results: dict[int, SubcoverResult] = {}
    for n in levels:
        result = min_subcover_weight(ifs, alpha, n, oracle, budget=budget)
        results[n] = result
        weights[n] = result.weight
        if result.weight < full * (1.0 - 1e-9) and witness_level is None:
            witness_level = n
    upper = min(weights.values()) if weights else full
    if witness_level is not None:
        result = results[witness_level]
        positive = fails(
            {
                "kind": "weight_reducing_subcover",
                "level": witness_level,
                "cover": [list(w) for w in result.cover],
                "weight": result.weight,
                "full_level_weight": full,
                "factor": result.weight / full,
            },
            levels=levels,
        )
    elif levels and irreducibility and all(v.is_holds for v in irreducibility.values()):
        positive = holds(
            {
                "kind": "irreducibility_certificates",
                "levels": sorted(irreducibility),
                "all_levels": _symbolic_all_levels(irreducibility),
            },
            levels=levels,
        )
    else:
        positive = inconclusive(levels=levels)
    return H4Bounds(positive=positive, upper=upper, weights_by_level=weights)


# ----------------------------------------------------------------------
# box counting


@dataclass(frozen=True)
class BoxEstimate:
    slope: float
    residual: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    sample_depth: int
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "scales": list(self.scales),
            "counts": list(self.counts),
            "sample_depth": self.sample_depth,
            "flags": list(self.flags),
        }


def box_dimension_estimate(
    ifs: IFSystem,
    scales=None,
    budget: int = wd.DEFAULT_BUDGET,
    resolution_margin: float = 2.0,
) -> BoxEstimate:
    """Least-squares slope of log N(eps) against log(1/eps) over a grid family.

    N(eps) counts grid boxes hit by a deterministic sample fine enough that its
    mesh is below every scale by `resolution_margin`.  Heuristic by design;
    used only as non-rigorous lower evidence.
    """
    diam = ifs.diameter_upper
    if diam <= 0.0:
        raise ValueError("box counting needs a positive-diameter attractor")
    flags: list[str] = []
    if scales is None:
        scales = [diam * 2.0**-e for e in range(3, 11)]
    scales = sorted((float(s) for s in scales), reverse=True)
    if len(scales) < 4:
        raise ValueError("need at least 4 scales")
    if scales[0] / scales[-1] < 100.0:
        flags.append("scales span less than two decades")
    max_depth = int(math.floor(math.log(budget) / math.log(ifs.k)))

    def needed(eps: float) -> int:
        return math.ceil(math.log(eps / (resolution_margin * diam)) / math.log(ifs.max_ratio))

    depth = min(max(needed(scales[-1]), 1), max_depth)
    mesh = ifs.max_ratio**depth * diam
    kept = [s for s in scales if s >= resolution_margin * mesh - 1e-15]
    if len(kept) < len(scales):
        flags.append(f"dropped {len(scales) - len(kept)} scales below sample resolution")
    if len(kept) < 4:
        raise ValueError("budget leaves fewer than 4 usable scales")
    points = level_points(ifs, depth, budget=budget)
    counts = []
    for eps in kept:
        cells = np.floor(points / eps).astype(np.int64)
        counts.append(int(np.unique(cells, axis=0).shape[0]))
    if len(set(counts)) == 1:
        flags.append("degenerate fit: all counts equal")
        return BoxEstimate(0.0, math.inf, tuple(kept), tuple(counts), depth, tuple(flags))
    x = np.log(1.0 / np.array(kept))
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return BoxEstimate(float(slope), residual, tuple(kept), tuple(counts), depth, tuple(flags))


# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionReport:
    alpha: float
    alpha_residual: float
    dim3: Dim3Verification
    dim4: Dim4Bounds
    h4: H4Bounds
    box: BoxEstimate | None

    def to_json(self) -> dict:
        return {
            "similarity": {"alpha": self.alpha, "residual": self.alpha_residual},
            "dim3": self.dim3.to_json(),
            "dim4": self.dim4.to_json(),
            "h4_alpha": self.h4.to_json(),
            "box": self.box.to_json() if self.box is not None else None,
        }


def dim4_equals_alpha_verdict(bounds: Dim4Bounds, alpha: float, tol: float = 1e-9) -> Verdict:
    """Three-valued reading of the bracket against the similarity dimension."""
    if bounds.upper < alpha - tol and bounds.subcover is not None:
        return fails(
            {"kind": "subcover_exponent_below_alpha", **bounds.subcover},
            alpha=alpha,
        )
    if (
        abs(bounds.lower - alpha) <= tol
        and abs(bounds.upper - alpha) <= tol
        and bounds.lower_provenance.startswith("irreducibility")
    ):
        return holds({"kind": "bracket_collapsed_to_alpha", "provenance": bounds.lower_provenance}, alpha=alpha)
    return inconclusive(alpha=alpha, lower=bounds.lower, upper=bounds.upper)
