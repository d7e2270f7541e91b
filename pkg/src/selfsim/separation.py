"""Decision procedures for separation properties, plus the implication harness.

Irreducibility of the covering levels, the level separation property, tiling,
open-set certificates, finite-overlap evidence, and covering order are all
decided three-valued; the weak separation verdict is synthesized from its
proven equivalents.  The harness then replays the known implication chains
over the computed verdicts: a violated implication is never a statement about
the input, it is an internal soundness failure and is escalated as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import words as wd
from .attractor import IFSystem, Level, Piece, build_level, child_piece, level_points
from .dimensions import (
    DimensionReport,
    box_dimension_estimate,
    dim4_bounds,
    dim4_equals_alpha_verdict,
    h4_alpha_bounds,
    similarity_dimension,
    verify_dim3,
)
from .errors import ConsistencyViolationError
from .geometry import approx_equal
from .oracle import (
    GeometricOracle,
    Outcome,
    Verdict,
    fails,
    holds,
    inconclusive,
    point_json,
)

try:
    from scipy.optimize import linprog
    from scipy.spatial import ConvexHull, QhullError, cKDTree
except ImportError:  # pragma: no cover
    linprog = None


@dataclass(frozen=True)
class PairOverlap:
    """Classification of one unordered pair of same-level pieces."""

    kind: str  # disjoint | common_subpiece | finite_evidence | unresolved
    gap: float = 0.0
    subpiece: wd.Word | None = None
    container: wd.Word | None = None
    touching_leaves: int = 0

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "disjoint":
            doc["gap"] = self.gap
        if self.subpiece is not None:
            doc["subpiece"] = list(self.subpiece)
            doc["container"] = list(self.container)
        if self.kind == "finite_evidence":
            doc["touching_leaves"] = self.touching_leaves
        return doc


@dataclass
class SeparationReport:
    irreducible_levels: dict[int, Verdict]
    irreducible: Verdict
    lsp1: Verdict
    lsp2: Verdict
    lsp: Verdict
    tiling: Verdict
    finite_overlap: Verdict
    osc: Verdict
    sosc: Verdict
    order_lower_bound: dict[int, int]
    wosc: Verdict
    wosc_via: list[str]
    consistency: list[dict]
    dimensions: DimensionReport

    def to_json(self) -> dict:
        return {
            "irreducible_levels": {str(n): v.to_json() for n, v in self.irreducible_levels.items()},
            "irreducible": self.irreducible.to_json(),
            "lsp1": self.lsp1.to_json(),
            "lsp2": self.lsp2.to_json(),
            "lsp": self.lsp.to_json(),
            "tiling": self.tiling.to_json(),
            "finite_overlap": self.finite_overlap.to_json(),
            "osc": self.osc.to_json(),
            "sosc": self.sosc.to_json(),
            "order_lower_bound": {str(n): v for n, v in self.order_lower_bound.items()},
            "wosc": self.wosc.to_json(),
            "wosc_via": self.wosc_via,
            "consistency": self.consistency,
        }


class SeparationAnalyzer:
    """Runs the separation suite for one system with shared caches."""

    def __init__(
        self,
        ifs: IFSystem,
        oracle: GeometricOracle | None = None,
        levels: int = 5,
        lsp_levels: int = 2,
        tiling_levels: int = 1,
        tiling_eps: float | None = None,
        overlap_max_touching: int = 8,
        h4_levels: int = 4,
        budget: int = wd.DEFAULT_BUDGET,
    ):
        self.ifs = ifs
        self.oracle = oracle if oracle is not None else GeometricOracle(ifs)
        self.levels = levels
        self.lsp_levels = lsp_levels
        self.tiling_levels = tiling_levels
        self.tiling_eps = tiling_eps if tiling_eps is not None else 1e-3 * ifs.diameter_upper
        self.overlap_max_touching = overlap_max_touching
        self.h4_levels = h4_levels
        self.budget = budget
        self._levels: dict[int, Level] = {}
        self._exposed: dict[tuple[int, wd.Word], tuple | None] = {}
        self._pairs: dict[tuple[int, int, int], PairOverlap] = {}
        self._irreducible: dict[int, Verdict] = {}

    # ------------------------------------------------------------------

    def level(self, n: int) -> Level:
        if n not in self._levels:
            self._levels[n] = build_level(self.ifs, n, self.budget)
        return self._levels[n]

    def _duplicate_generator_pair(self) -> tuple[int, int] | None:
        for i in range(self.ifs.k):
            for j in range(i + 1, self.ifs.k):
                if approx_equal(self.ifs.maps[i], self.ifs.maps[j], 1e-12):
                    return i + 1, j + 1
        return None

    def _exposed_point(self, n: int, idx: int):
        """Cached exposed-point search for piece idx of level n against the rest."""
        pieces = self.level(n).pieces
        key = (n, pieces[idx].word)
        if key not in self._exposed:
            members = pieces[:idx] + pieces[idx + 1 :]
            self._exposed[key] = self.oracle.find_exposed_point(pieces[idx], members)
        return self._exposed[key]

    # ------------------------------------------------------------------
    # irreducibility

    def level_irreducible(self, n: int) -> Verdict:
        """No piece of level n is covered by the others (three-valued)."""
        if n in self._irreducible:
            return self._irreducible[n]
        verdict = self._level_irreducible_raw(n)
        self._irreducible[n] = verdict
        return verdict

    def _level_irreducible_raw(self, n: int) -> Verdict:
        dup = self._duplicate_generator_pair()
        if dup is not None:
            i, j = dup
            witness_word = (j,) + (1,) * (n - 1)
            covering_word = (i,) + (1,) * (n - 1)
            return fails(
                {
                    "kind": "duplicate_maps",
                    "pair": [i, j],
                    "piece": list(witness_word),
                    "covered_by": [list(covering_word)],
                },
                level=n,
                all_levels=True,
            )
        pieces = self.level(n).pieces
        witnesses = []
        pending = []
        for idx in range(len(pieces)):
            found = self._exposed_point(n, idx)
            if found is None:
                pending.append(idx)
            else:
                x, margin = found
                witnesses.append(
                    {"word": list(pieces[idx].word), "point": point_json(x), "margin": float(margin)}
                )
        unresolved = 0
        for idx in pending:
            members = pieces[:idx] + pieces[idx + 1 :]
            verdict = self.oracle.covered_by(pieces[idx], members)
            if verdict.is_holds:
                return fails(
                    {
                        "kind": "reducible",
                        "piece": list(pieces[idx].word),
                        "assignment": verdict.certificate["assignment"],
                    },
                    level=n,
                )
            if verdict.is_fails:
                witnesses.append(
                    {
                        "word": list(pieces[idx].word),
                        "point": verdict.witness["point"],
                        "margin": verdict.witness["distance_lower"],
                    }
                )
            else:
                unresolved += 1
        if unresolved:
            return inconclusive(level=n, unresolved_pieces=unresolved)
        min_margin = min(w["margin"] for w in witnesses)
        return holds(
            {
                "kind": "exposed_points",
                "count": len(witnesses),
                "min_margin": min_margin,
                "witnesses": witnesses[:8],
            },
            level=n,
        )

    def irreducibility(self) -> dict[int, Verdict]:
        return {n: self.level_irreducible(n) for n in range(1, self.levels + 1)}

    @staticmethod
    def aggregate_irreducible(per_level: dict[int, Verdict]) -> Verdict:
        levels = sorted(per_level)
        for n in levels:
            if per_level[n].is_fails:
                return fails(
                    {"kind": "reducible_level", "level": n, "witness": per_level[n].witness},
                    levels=levels,
                )
        if levels and all(per_level[n].is_holds for n in levels):
            all_levels = all(per_level[n].resolution.get("all_levels", False) for n in levels)
            return holds(
                {"kind": "irreducible_levels", "levels": levels, "all_levels": all_levels},
                levels=levels,
            )
        return inconclusive(levels=levels)

    # ------------------------------------------------------------------
    # pairwise overlap classification (shared by LSP1 and finite overlap)

    def _pair_overlap(self, n: int, i: int, j: int, subpiece_depth: int = 6) -> PairOverlap:
        key = (n, i, j)
        if key in self._pairs:
            return self._pairs[key]
        pieces = self.level(n).pieces
        a, b = pieces[i], pieces[j]
        analysis = self.oracle.pair_analysis(a, b, stop_on_touch=False, node_budget=4000)
        if analysis.unresolved == 0 and analysis.touching is None and analysis.gap > self.oracle.margin:
            result = PairOverlap("disjoint", gap=analysis.gap)
        else:
            common = self._common_subpiece(a, b, subpiece_depth)
            if common is None:
                flipped = self._common_subpiece(b, a, subpiece_depth)
                if flipped is not None:
                    common = flipped
            if common is not None:
                result = PairOverlap("common_subpiece", subpiece=common[0], container=common[1])
            elif (
                analysis.complete
                and 0 < analysis.unresolved + (1 if analysis.touching else 0)
                and analysis.unresolved <= self.overlap_max_touching
            ):
                result = PairOverlap("finite_evidence", touching_leaves=max(analysis.unresolved, 1))
            else:
                result = PairOverlap("unresolved")
        self._pairs[key] = result
        return result

    def _common_subpiece(self, a: Piece, b: Piece, depth: int):
        """A proper descendant of `a` whose set factors into `b`, if one exists."""
        from collections import deque

        queue = deque(child_piece(self.ifs, a, s) for s in range(1, self.ifs.k + 1))
        nodes = 0
        while queue and nodes < 2000:
            c = queue.popleft()
            nodes += 1
            if c.enclosure.gap_to(b.enclosure) > self.oracle.margin:
                continue
            word = self.oracle.subset_word(c, b)
            if word is not None:
                return c.word, b.word
            if len(c.word) - len(a.word) < depth:
                for s in range(1, self.ifs.k + 1):
                    queue.append(child_piece(self.ifs, c, s))
        return None

    # ------------------------------------------------------------------
    # level separation property

    def lsp1_check(self, n: int, depth: int = 6) -> Verdict:
        """Pairwise disjoint interiors at level n: no common sub-piece anywhere."""
        pieces = self.level(n).pieces
        summaries = {}
        unresolved = 0
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                overlap = self._pair_overlap(n, i, j, subpiece_depth=depth)
                if overlap.kind == "common_subpiece":
                    return fails(
                        {
                            "kind": "common_subpiece",
                            "piece_a": list(pieces[i].word),
                            "piece_b": list(pieces[j].word),
                            "subpiece": list(overlap.subpiece),
                            "container": list(overlap.container),
                        },
                        level=n,
                    )
                if overlap.kind == "unresolved":
                    unresolved += 1
                else:
                    key = f"{wd.word_str(pieces[i].word)}|{wd.word_str(pieces[j].word)}"
                    summaries[key] = overlap.to_json()
        if unresolved:
            return inconclusive(level=n, unresolved_pairs=unresolved)
        return holds({"kind": "pairwise_thin_overlaps", "pairs": summaries}, level=n)

    def lsp2_check(self, n: int) -> Verdict:
        """Nonempty interiors at level n, via exposed-point certificates.

        The certificate is sufficient, not necessary, so this check never
        returns Fails.
        """
        pieces = self.level(n).pieces
        certs = []
        missing = 0
        for idx in range(len(pieces)):
            found = self._exposed_point(n, idx)
            if found is None:
                missing += 1
            else:
                x, margin = found
                certs.append(
                    {"word": list(pieces[idx].word), "point": point_json(x), "margin": float(margin)}
                )
        if missing:
            return inconclusive(level=n, missing=missing)
        return holds(
            {
                "kind": "interior_points",
                "count": len(certs),
                "min_margin": min(c["margin"] for c in certs),
                "witnesses": certs[:8],
            },
            level=n,
        )

    def _aggregate_levels(self, results: dict[int, Verdict], kind: str) -> Verdict:
        levels = sorted(results)
        for n in levels:
            if results[n].is_fails:
                return fails(
                    {"kind": kind, "level": n, "witness": results[n].witness}, levels=levels
                )
        if levels and all(results[n].is_holds for n in levels):
            return holds({"kind": kind, "levels": levels}, levels=levels)
        return inconclusive(levels=levels)

    # ------------------------------------------------------------------
    # tiling

    def tiling_check(self, n: int, eps: float | None = None, lsp1: Verdict | None = None) -> Verdict:
        """Regular closedness evidence: certified interior points are eps-dense."""
        eps = self.tiling_eps if eps is None else eps
        lsp1 = self.lsp1_check(n) if lsp1 is None else lsp1
        if lsp1.is_fails:
            return fails({"kind": "via_lsp1", "witness": lsp1.witness}, level=n, eps=eps)
        pieces = self.level(n).pieces
        for idx, piece in enumerate(pieces):
            members = pieces[:idx] + pieces[idx + 1 :]
            ok = self._interior_dense(piece, members, eps)
            if not ok:
                return inconclusive(level=n, eps=eps, piece=list(piece.word))
        if not lsp1.is_holds:
            return inconclusive(level=n, eps=eps, note="interiors dense but lsp1 undecided")
        return holds({"kind": "interior_dense", "eps": eps, "level": n}, level=n, eps=eps)

    def _interior_dense(self, piece: Piece, members: list[Piece], eps: float) -> bool:
        """Every sample point of the piece has a certified interior point within eps."""
        ifs = self.ifs
        if ifs.diameter_upper <= 0.0:
            return False
        # Leaves no larger than eps/2 so a same-leaf certificate is within eps.
        ratio_leaf = eps / (2.0 * piece.ratio * ifs.diameter_upper)
        m = max(1, int(math.ceil(math.log(ratio_leaf) / math.log(ifs.max_ratio))))
        if ifs.k**m > min(self.budget, 65536):
            return False
        samples = piece.map.apply_many(level_points(ifs, m))
        if not members:
            return True
        sub_centers, sub_radii = self._member_subballs(members, cap=4096)
        sub_tree = cKDTree(sub_centers)
        radius_bound = float(sub_radii.max())
        certified = []
        candidate_arrays = []
        for base in self.oracle._base_points:
            candidate_arrays.append(piece.map.apply_many(level_points(ifs, m, base=base)))
        for arr in candidate_arrays:
            # Conservative: nearest enclosure center minus the largest radius.
            dist, _ = sub_tree.query(arr, k=1)
            mask = dist - radius_bound > self.oracle.margin
            if mask.any():
                certified.append(arr[mask])
        uncovered = samples
        if certified:
            tree = cKDTree(np.vstack(certified))
            dist, _ = tree.query(samples, k=1)
            uncovered = samples[dist > eps]
        if uncovered.shape[0] == 0:
            return True
        if uncovered.shape[0] > 512:
            return False
        # Boundary stragglers: certify individually against every member.
        for point in uncovered:
            if not self._certify_near(piece, point, members, eps):
                return False
        return True

    def _member_subballs(self, members: list[Piece], cap: int):
        ifs = self.ifs
        depth = 0
        while len(members) * ifs.k ** (depth + 1) <= cap:
            depth += 1
        centers = []
        radii = []
        for m in members:
            c, r = _descendant_balls(ifs, m, depth)
            centers.append(c)
            radii.append(r)
        return np.vstack(centers), np.concatenate(radii)

    def _certify_near(self, piece: Piece, sample: np.ndarray, members: list[Piece], eps: float) -> bool:
        """Find any certified interior point within eps of the sample point."""
        for extra in (6, 10):
            # Walk the subdivision toward the sample, then try each base image.
            current = piece
            for _ in range(extra):
                best = None
                for j in range(1, self.ifs.k + 1):
                    child = child_piece(self.ifs, current, j)
                    d = float(np.linalg.norm(child.anchor - sample))
                    if best is None or d < best[0]:
                        best = (d, child)
                current = best[1]
            for base in self.oracle._base_points:
                y = current.map.apply(base)
                if float(np.linalg.norm(y - sample)) > eps:
                    continue
                ok = True
                for m in members:
                    quick = m.enclosure.distance_lower(y)
                    if quick > self.oracle.margin:
                        continue
                    bracket = self.oracle.point_piece_distance(y, m, node_budget=2000)
                    if bracket.lower <= self.oracle.margin:
                        ok = False
                        break
                if ok:
                    return True
        return False

    # ------------------------------------------------------------------
    # open set condition

    def osc_certificate_search(self, candidates=None) -> Verdict:
        """Search convex feasible open sets: images nested and pairwise interior-disjoint."""
        dup = self._duplicate_generator_pair()
        if dup is not None:
            return fails(
                {
                    "kind": "identical_images",
                    "pair": list(dup),
                    "note": "two maps coincide, so their images of every open set coincide",
                },
            )
        named = self._builtin_candidates() if candidates is None else list(candidates)
        tried = []
        for name, verts in named:
            ok, detail = self._check_feasible_polytope(verts)
            tried.append(name)
            if ok:
                return holds(
                    {
                        "kind": "feasible_open_set",
                        "candidate": name,
                        "vertices": [point_json(v) for v in verts],
                        "separations": detail,
                    },
                    candidates=tried,
                )
        return inconclusive(candidates=tried)

    def _builtin_candidates(self):
        ifs = self.ifs
        out = []
        hull = ifs.hull_vertices
        lo, hi = hull.min(axis=0), hull.max(axis=0)
        if ifs.dim == 1:
            box = np.array([[lo[0]], [hi[0]]])
        else:
            box = np.array(np.meshgrid(*zip(lo, hi))).T.reshape(-1, ifs.dim)
        out.append(("bounding_box", box))
        for q in (1, 2):
            pts = _composite_fixed_points(ifs, q)
            verts = _hull_vertices_of(pts)
            if verts is not None and len(verts) > ifs.dim:
                out.append((f"fixed_point_hull_{q}", verts))
        return out

    def _check_feasible_polytope(self, verts: np.ndarray):
        ifs = self.ifs
        verts = np.asarray(verts, dtype=float)
        images = [f.apply_many(verts) for f in ifs.maps]
        tol = 1e-12 * max(1.0, float(np.max(np.abs(verts))))
        if ifs.dim == 1:
            lo, hi = float(verts.min()), float(verts.max())
            for img in images:
                if img.min() < lo - tol or img.max() > hi + tol:
                    return False, None
            spans = [(float(img.min()), float(img.max())) for img in images]
            seps = []
            for i in range(len(spans)):
                for j in range(i + 1, len(spans)):
                    overlap = min(spans[i][1], spans[j][1]) - max(spans[i][0], spans[j][0])
                    if overlap > tol:
                        return False, None
                    seps.append({"pair": [i + 1, j + 1], "overlap": overlap})
            return True, seps
        try:
            hull = ConvexHull(verts)
        except QhullError:
            return False, None
        eqs = hull.equations
        for img in images:
            if np.max(img @ eqs[:, :-1].T + eqs[:, -1]) > tol:
                return False, None
        seps = []
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                plane = _separating_hyperplane(images[i], images[j])
                if plane is None:
                    return False, None
                seps.append({"pair": [i + 1, j + 1], "normal": point_json(plane[0]), "offset": plane[1]})
        return True, seps

    def sosc_check(self, osc: Verdict) -> Verdict:
        """A point of the attractor strictly inside the feasible open set."""
        if not osc.is_holds:
            return inconclusive(note="no feasible open set certificate available")
        verts = np.array(osc.certificate["vertices"], dtype=float)
        margin_needed = 1e-9 * max(1.0, self.ifs.diameter_upper)
        if self.ifs.dim == 1:
            lo, hi = float(verts.min()), float(verts.max())
            for m in range(1, 7):
                for base in self.oracle._base_points:
                    for x in level_points(self.ifs, m, base=base):
                        margin = min(float(x[0]) - lo, hi - float(x[0]))
                        if margin >= margin_needed:
                            return holds(
                                {"kind": "strict_interior_point", "point": point_json(x), "margin": margin}
                            )
            return inconclusive(note="no strictly interior attractor point found")
        try:
            hull = ConvexHull(verts)
        except QhullError:
            return inconclusive(note="degenerate certificate polytope")
        eqs = hull.equations
        for m in range(1, 7):
            for base in self.oracle._base_points:
                pts = level_points(self.ifs, m, base=base)
                margins = -(pts @ eqs[:, :-1].T + eqs[:, -1]).max(axis=1)
                best = int(np.argmax(margins))
                if margins[best] >= margin_needed:
                    return holds(
                        {
                            "kind": "strict_interior_point",
                            "point": point_json(pts[best]),
                            "margin": float(margins[best]),
                        }
                    )
        return inconclusive(note="no strictly interior attractor point found")

    # ------------------------------------------------------------------
    # finite overlaps and order

    def finite_overlap_check(self, n: int, depth: int = 6) -> Verdict:
        """Evidence that all pairwise intersections at level n are finite sets."""
        pieces = self.level(n).pieces
        pair_docs = {}
        unresolved = 0
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                overlap = self._pair_overlap(n, i, j, subpiece_depth=depth)
                if overlap.kind == "common_subpiece":
                    return fails(
                        {
                            "kind": "common_subpiece",
                            "piece_a": list(pieces[i].word),
                            "piece_b": list(pieces[j].word),
                            "subpiece": list(overlap.subpiece),
                            "container": list(overlap.container),
                            "note": "the shared sub-piece is a scaled copy of the whole set, an infinite intersection",
                        },
                        level=n,
                    )
                if overlap.kind == "unresolved":
                    unresolved += 1
                else:
                    key = f"{wd.word_str(pieces[i].word)}|{wd.word_str(pieces[j].word)}"
                    pair_docs[key] = overlap.to_json()
        if unresolved:
            return inconclusive(level=n, unresolved_pairs=unresolved)
        return holds(
            {
                "kind": "bounded_touching",
                "max_touching_leaves": self.overlap_max_touching,
                "pairs": pair_docs,
            },
            level=n,
        )

    def order_lower_bound(self, n: int, sample_depth: int = 6) -> int:
        """Max over exact sampled points of (number of level-n pieces hit) - 1."""
        ifs = self.ifs
        pieces = self.level(n).pieces
        while len(pieces) * len(self.oracle._base_points) * ifs.k**sample_depth > 200_000:
            sample_depth -= 1
            if sample_depth == 0:
                break
        membership: dict[bytes, set[int]] = {}
        for idx, piece in enumerate(pieces):
            for base in self.oracle._base_points:
                pts = piece.map.apply_many(level_points(ifs, sample_depth, base=base))
                for row in pts:
                    key = row.tobytes()
                    membership.setdefault(key, set()).add(idx)
        return max(len(s) for s in membership.values()) - 1

    # ------------------------------------------------------------------
    # synthesis

    def full_report(self, with_box: bool = True) -> SeparationReport:
        ifs = self.ifs
        alpha = similarity_dimension([f.scale for f in ifs.maps])
        per_level = self.irreducibility()
        irreducible = self.aggregate_irreducible(per_level)

        lsp1_levels = {n: self.lsp1_check(n) for n in range(1, self.lsp_levels + 1)}
        lsp2_levels = {n: self.lsp2_check(n) for n in range(1, self.lsp_levels + 1)}
        lsp1 = self._aggregate_levels(lsp1_levels, "lsp1")
        lsp2 = self._aggregate_levels(lsp2_levels, "lsp2")
        lsp = _conjoin(lsp1, lsp2, "lsp")
        tiling_levels = {
            n: self.tiling_check(n, lsp1=lsp1_levels.get(n)) for n in range(1, self.tiling_levels + 1)
        }
        tiling = self._aggregate_levels(tiling_levels, "tiling")
        overlap_levels = {n: self.finite_overlap_check(n) for n in range(1, self.lsp_levels + 1)}
        finite_overlap = self._aggregate_levels(overlap_levels, "finite_overlap")
        osc = self.osc_certificate_search()
        sosc = self.sosc_check(osc)
        order = {n: self.order_lower_bound(n) for n in range(1, min(self.lsp_levels, 2) + 1)}

        box = None
        if with_box:
            try:
                box = box_dimension_estimate(ifs, budget=self.budget)
            except ValueError:
                box = None
        dim4 = dim4_bounds(
            ifs,
            self.oracle,
            alpha,
            per_level,
            box_slope=box.slope if box else None,
            box_residual=box.residual if box else 0.0,
            budget=self.budget,
        )
        h4 = h4_alpha_bounds(ifs, self.oracle, alpha, per_level, max_level=self.h4_levels, budget=self.budget)
        dim4_eq = dim4_equals_alpha_verdict(dim4, alpha)
        dim3 = verify_dim3(ifs, alpha)
        dims = DimensionReport(
            alpha=alpha,
            alpha_residual=abs(math.fsum(float(c) ** alpha for c in ifs.ratios) - 1.0),
            dim3=dim3,
            dim4=dim4,
            h4=h4,
            box=box,
        )

        wosc, via = synthesize_wosc(
            {
                "irreducible": irreducible,
                "lsp": lsp,
                "tiling": tiling,
                "dim4_eq_alpha": dim4_eq,
                "h4_positive": h4.positive,
            }
        )
        # Equivalences compare evidence gathered over matching level horizons:
        # irreducibility examined to a deeper level than lsp or tiling must not
        # be played against their shallower certificates.
        def irr_at(horizon: int) -> Verdict:
            return self.aggregate_irreducible(
                {n: v for n, v in per_level.items() if n <= horizon}
            )

        outcomes = {
            "osc": osc,
            "sosc": sosc,
            "irreducible": irreducible,
            "irreducible_lsp_horizon": irr_at(self.lsp_levels),
            "irreducible_tiling_horizon": irr_at(self.tiling_levels),
            "lsp1": lsp1,
            "lsp2": lsp2,
            "lsp": lsp,
            "tiling": tiling,
            "finite_overlap": finite_overlap,
            "dim4_eq_alpha": dim4_eq,
            "h4_positive": h4.positive,
            "wosc": wosc,
        }
        consistency = evaluate_implications({k: v.outcome for k, v in outcomes.items()})
        violations = [c for c in consistency if c["status"] == "violated"]
        if violations:
            raise ConsistencyViolationError(
                f"{len(violations)} implication(s) violated: "
                + ", ".join(c["implication"] for c in violations),
                dump={
                    "violations": violations,
                    "verdicts": {k: v.to_json() for k, v in outcomes.items()},
                    "label": ifs.label,
                },
            )
        return SeparationReport(
            irreducible_levels=per_level,
            irreducible=irreducible,
            lsp1=lsp1,
            lsp2=lsp2,
            lsp=lsp,
            tiling=tiling,
            finite_overlap=finite_overlap,
            osc=osc,
            sosc=sosc,
            order_lower_bound=order,
            wosc=wosc,
            wosc_via=via,
            consistency=consistency,
            dimensions=dims,
        )


# ----------------------------------------------------------------------
# wosc synthesis and the implication harness

WOSC_EQUIVALENTS = ("irreducible", "lsp", "tiling", "dim4_eq_alpha", "h4_positive")

# (name, antecedent, consequent): antecedent Holds forces consequent not-Fails.
IMPLICATIONS = (
    ("osc => irreducible", "osc", "irreducible"),
    ("osc => order finite", "osc", "order_finite"),
    ("order finite => irreducible", "order_finite", "irreducible"),
    ("osc => wosc", "osc", "wosc"),
    ("sosc => wosc", "sosc", "wosc"),
    ("finite overlaps => lsp1", "finite_overlap", "lsp1"),
    ("finite overlaps => lsp2", "finite_overlap", "lsp2"),
    ("finite overlaps => wosc", "finite_overlap", "wosc"),
    ("positive Hausdorff measure => sosc", "hausdorff_positive", "sosc"),
    ("sosc => Hausdorff dimension attains similarity dimension", "sosc", "hausdorff_eq_alpha"),
    ("Hausdorff dimension attains similarity dimension => wosc", "hausdorff_eq_alpha", "wosc"),
)

EQUIVALENCES = (
    ("irreducible <=> lsp", "irreducible_lsp_horizon", "lsp"),
    ("irreducible <=> tiling", "irreducible_tiling_horizon", "tiling"),
    ("irreducible <=> finite-subcover dimension attains similarity dimension", "irreducible", "dim4_eq_alpha"),
    ("irreducible <=> positive finite-subcover measure", "irreducible", "h4_positive"),
    ("wosc <=> positive finite-subcover measure", "wosc", "h4_positive"),
    ("wosc <=> finite-subcover dimension attains similarity dimension", "wosc", "dim4_eq_alpha"),
)


def synthesize_wosc(equivalents: dict[str, Verdict]) -> tuple[Verdict, list[str]]:
    """Combine the proven-equivalent conditions into one weak-separation verdict."""
    holding = [k for k, v in equivalents.items() if v.is_holds]
    failing = [k for k, v in equivalents.items() if v.is_fails]
    if holding and failing:
        raise ConsistencyViolationError(
            "equivalent separation conditions disagree: "
            f"holds via {holding}, fails via {failing}",
            dump={k: v.to_json() for k, v in equivalents.items()},
        )
    if failing:
        first = failing[0]
        return (
            fails({"kind": "equivalent_fails", "via": first, "witness": equivalents[first].witness}),
            failing,
        )
    if holding:
        first = holding[0]
        return (
            holds(
                {"kind": "equivalent_holds", "via": first, "certificate": equivalents[first].certificate}
            ),
            holding,
        )
    return inconclusive(note="no equivalent condition decided"), []


def evaluate_implications(outcomes: dict[str, Outcome]) -> list[dict]:
    """Status of every known implication over the computed outcomes.

    Undecidable sides (Hausdorff measure and dimension, covering order
    finiteness) are absent from `outcomes` and make their implications
    vacuous.  `violated` marks a soundness failure, not a property of the
    input.
    """
    results = []

    def status_implication(p: Outcome | None, q: Outcome | None) -> str:
        if p is None or q is None:
            return "vacuous"
        if p is Outcome.HOLDS and q is Outcome.FAILS:
            return "violated"
        if p is Outcome.HOLDS and q is Outcome.HOLDS:
            return "consistent"
        return "vacuous"

    def status_equivalence(p: Outcome | None, q: Outcome | None) -> str:
        if p is None or q is None:
            return "vacuous"
        if p is Outcome.INCONCLUSIVE or q is Outcome.INCONCLUSIVE:
            return "vacuous"
        return "consistent" if p is q else "violated"

    for name, ante, cons in IMPLICATIONS:
        results.append(
            {
                "implication": name,
                "status": status_implication(outcomes.get(ante), outcomes.get(cons)),
            }
        )
    for name, left, right in EQUIVALENCES:
        results.append(
            {
                "implication": name,
                "status": status_equivalence(outcomes.get(left), outcomes.get(right)),
            }
        )
    return results


def _conjoin(a: Verdict, b: Verdict, kind: str) -> Verdict:
    if a.is_fails:
        return fails({"kind": kind, "via": "first", "witness": a.witness})
    if b.is_fails:
        return fails({"kind": kind, "via": "second", "witness": b.witness})
    if a.is_holds and b.is_holds:
        return holds({"kind": kind, "both": True})
    return inconclusive(note=f"{kind}: components undecided")


# ----------------------------------------------------------------------
# helpers


def _descendant_balls(ifs: IFSystem, piece: Piece, depth: int):
    """Centers and radii of the piece's depth-level descendant enclosures."""
    from .attractor import level_map_arrays

    scales, qs, ts = level_map_arrays(ifs, depth)
    ball = ifs.root_ball
    centers_root = scales[:, None] * (qs @ ball.center) + ts
    centers = piece.map.apply_many(centers_root)
    radii = piece.map.scale * scales * ball.radius
    return centers, radii


def _composite_fixed_points(ifs: IFSystem, depth: int) -> np.ndarray:
    from .attractor import level_map_arrays

    scales, qs, ts = level_map_arrays(ifs, depth)
    d = ifs.dim
    mats = np.eye(d) - scales[:, None, None] * qs
    return np.linalg.solve(mats, ts[:, :, None])[:, :, 0]


def _hull_vertices_of(points: np.ndarray) -> np.ndarray | None:
    points = np.unique(points.round(decimals=14), axis=0)
    if points.shape[1] == 1:
        return np.array([[points.min()], [points.max()]])
    try:
        hull = ConvexHull(points)
        return points[hull.vertices]
    except QhullError:
        return None


def _separating_hyperplane(p: np.ndarray, q: np.ndarray):
    """A hyperplane with p on one side and q on the other (touching allowed)."""
    cp, cq = p.mean(axis=0), q.mean(axis=0)
    w = cq - cp
    norm = np.linalg.norm(w)
    if norm < 1e-15:
        return None
    d = p.shape[1]
    # Variables (a, b): a.x <= b on p, a.x >= b on q, normalized by a.w = 1.
    n_p, n_q = p.shape[0], q.shape[0]
    a_ub = np.zeros((n_p + n_q, d + 1))
    a_ub[:n_p, :d] = p
    a_ub[:n_p, d] = -1.0
    a_ub[n_p:, :d] = -q
    a_ub[n_p:, d] = 1.0
    b_ub = np.zeros(n_p + n_q)
    a_eq = np.zeros((1, d + 1))
    a_eq[0, :d] = w
    b_eq = np.array([1.0])
    res = linprog(
        c=np.zeros(d + 1),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    if not res.success:
        return None
    a, b = res.x[:d], float(res.x[d])
    tol = 1e-9 * max(1.0, float(np.max(np.abs(np.vstack([p, q])))))
    if np.max(p @ a - b) > tol or np.max(b - q @ a) > tol:
        return None
    return a, b


# ----------------------------------------------------------------------
# module-level convenience wrappers (one analyzer per call)


def level_irreducible(ifs: IFSystem, n: int, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).level_irreducible(n)


def lsp1_check(ifs: IFSystem, n: int, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).lsp1_check(n)


def lsp2_check(ifs: IFSystem, n: int, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).lsp2_check(n)


def tiling_check(ifs: IFSystem, n: int, eps: float | None = None, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).tiling_check(n, eps=eps)


def osc_certificate_search(ifs: IFSystem, candidates=None, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).osc_certificate_search(candidates)


def sosc_check(ifs: IFSystem, osc: Verdict, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).sosc_check(osc)


def finite_overlap_check(ifs: IFSystem, n: int, **kwargs) -> Verdict:
    return SeparationAnalyzer(ifs, **kwargs).finite_overlap_check(n)


def order_lower_bound(ifs: IFSystem, n: int, sample_depth: int = 6, **kwargs) -> int:
    return SeparationAnalyzer(ifs, **kwargs).order_lower_bound(n, sample_depth)


def wosc_report(ifs: IFSystem, **kwargs) -> SeparationReport:
    return SeparationAnalyzer(ifs, **kwargs).full_report()


def consistency_harness(ifs: IFSystem, **kwargs) -> list[dict]:
    return SeparationAnalyzer(ifs, **kwargs).full_report().consistency
