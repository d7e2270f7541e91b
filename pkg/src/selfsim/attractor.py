"""Iterated function systems, their attractors' metric data, and covering levels.

An `IFSystem` is k >= 2 contracting similitudes on R^d.  Its attractor K is the
unique compact set equal to the union of its own images under the maps.  The
module materializes the level-n coverings {K_w : w a word of length n}, each
piece carrying a rigorous ball enclosure, and brackets diam(K) from below (by
exact attractor points) and from above (by an invariant convex body).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import words as wd
from .errors import IFSValidationError
from .geometry import Similitude, identity

try:
    from scipy.spatial import ConvexHull, QhullError
except ImportError:  # pragma: no cover - scipy always present in practice
    ConvexHull = None
    QhullError = Exception

_HULL_ITERS = 200
_HULL_VERTEX_CAP = 4096


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball; used as a rigorous outer enclosure of a piece."""

    center: np.ndarray
    radius: float

    def distance_lower(self, x: np.ndarray) -> float:
        """Certified lower bound on the distance from x to anything inside."""
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def gap_to(self, other: "Ball") -> float:
        """Certified lower bound on the distance between the two enclosed sets."""
        return float(np.linalg.norm(self.center - other.center)) - self.radius - other.radius


@dataclass(frozen=True, eq=False)
class Piece:
    """One piece K_w = f_w(K) of a covering level.

    `anchor` is an exact attractor point inside the piece (the image of the
    system's sample base), usable as a witness without further justification.
    """

    word: wd.Word
    map: Similitude
    ratio: float
    diameter: float
    enclosure: Ball
    anchor: np.ndarray


@dataclass(frozen=True, eq=False)
class Level:
    """Level n: all k^n pieces in lexicographic word order, duplicates retained."""

    n: int
    pieces: list[Piece]

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)


@dataclass(frozen=True)
class DiameterEstimate:
    lower: float
    upper: float
    levels_used: int
    converged: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


class IFSystem:
    """A finite family of contracting similitudes sharing one ambient dimension.

    Geometric root data (sample base point, invariant enclosing ball, invariant
    convex hull, diameter bracket) is computed lazily and cached; everything
    downstream treats the system as immutable.
    """

    def __init__(self, maps, label: str = ""):
        maps = list(maps)
        if len(maps) < 2:
            raise IFSValidationError(f"an IFS needs k >= 2 maps, got {len(maps)}")
        d = maps[0].dim
        for i, f in enumerate(maps):
            if f.dim != d:
                raise IFSValidationError(f"map {i + 1} has dimension {f.dim}, expected {d}")
            if not 0.0 < f.scale < 1.0:
                raise IFSValidationError(f"map {i + 1} scale out of (0,1): {f.scale}")
        self.maps: tuple[Similitude, ...] = tuple(maps)
        self.label = label

    @property
    def k(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @cached_property
    def ratios(self) -> np.ndarray:
        return np.array([f.scale for f in self.maps])

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())

    @cached_property
    def sample_base(self) -> np.ndarray:
        """Fixed point of the first map; the seed for all deterministic samples."""
        return self.maps[0].fixed_point()

    @cached_property
    def fixed_points(self) -> np.ndarray:
        """Fixed points of the k maps (rows); all lie in the attractor."""
        return np.array([f.fixed_point() for f in self.maps])

    @cached_property
    def root_ball(self) -> Ball:
        """A ball containing K that every map sends into itself.

        The center is iterated to the fixed point of z -> mean_i f_i(z); the
        radius is then the smallest R with c_i R + |f_i(z) - z| <= R for all i,
        which makes every child enclosure nest inside its parent.
        """
        z = self.sample_base.copy()
        for _ in range(200):
            z_next = np.mean([f.apply(z) for f in self.maps], axis=0)
            if np.max(np.abs(z_next - z)) < 1e-16:
                z = z_next
                break
            z = z_next
        radius = max(
            float(np.linalg.norm(f.apply(z) - z)) / (1.0 - f.scale) for f in self.maps
        )
        return Ball(z, radius)

    @cached_property
    def hull_vertices(self) -> np.ndarray:
        """Vertices of a convex body containing K, iterated until its shape stabilizes.

        Starting from the bounding box of the root ball, the body
        P -> hull(union_i f_i(P)) still contains K at every step and converges
        geometrically to the convex hull of K, so its diameter converges to
        diam(K) from above.
        """
        ball = self.root_ball
        if self.dim == 1:
            lo = ball.center[0] - ball.radius
            hi = ball.center[0] + ball.radius
            for _ in range(_HULL_ITERS):
                images = [(f.apply([lo])[0], f.apply([hi])[0]) for f in self.maps]
                nlo = min(min(p) for p in images)
                nhi = max(max(p) for p in images)
                if nlo == lo and nhi == hi:
                    break
                lo, hi = nlo, nhi
            return np.array([[lo], [hi]])

        corners = np.array(
            np.meshgrid(*[[c - ball.radius, c + ball.radius] for c in ball.center])
        ).T.reshape(-1, self.dim)
        verts = corners
        prev_diam = np.inf
        for _ in range(_HULL_ITERS):
            candidates = np.vstack([f.apply_many(verts) for f in self.maps])
            try:
                hull = ConvexHull(candidates)
                new_verts = candidates[hull.vertices]
            except QhullError:
                # Degenerate (flat) configuration: keep all points; correctness
                # is preserved, only pruning is lost.
                new_verts = np.unique(candidates, axis=0)
                if new_verts.shape[0] > _HULL_VERTEX_CAP:
                    return verts
            verts = new_verts
            diam = _point_set_diameter(verts)
            if abs(prev_diam - diam) < 1e-15 * max(1.0, diam):
                break
            prev_diam = diam
        return verts

    @cached_property
    def diameter_bounds(self) -> DiameterEstimate:
        return estimate_diameter(self)

    @property
    def diameter_upper(self) -> float:
        return self.diameter_bounds.upper

    @property
    def diameter_lower(self) -> float:
        return self.diameter_bounds.lower

    def __repr__(self):
        return f"IFSystem(k={self.k}, d={self.dim}, label={self.label!r})"


def _point_set_diameter(points: np.ndarray) -> float:
    """Exact diameter of a finite point set (hull-pruned pairwise search)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    m = points.shape[0]
    if m < 2:
        return 0.0
    if points.shape[1] == 1:
        return float(points.max() - points.min())
    if m > 64 and ConvexHull is not None:
        try:
            points = points[ConvexHull(points).vertices]
            m = points.shape[0]
        except QhullError:
            pass
    best = 0.0
    for i in range(m - 1):
        d = np.linalg.norm(points[i + 1 :] - points[i], axis=1).max()
        best = max(best, float(d))
    return best


def level_map_arrays(ifs: IFSystem, n: int, budget: int = wd.DEFAULT_BUDGET):
    """Batched composite maps of level n in lexicographic word order.

    Returns (scales (m,), orthogonals (m,d,d), translations (m,d)) with
    m = k^n; the word at row position p is enumerate_level(k, n)[p].
    """
    wd.level_size(ifs.k, n, budget)
    d = ifs.dim
    scales = np.array([1.0])
    qs = np.eye(d).reshape(1, d, d)
    ts = np.zeros((1, d))
    for _ in range(n):
        scales = np.concatenate([f.scale * scales for f in ifs.maps])
        qs = np.concatenate([np.einsum("ij,njk->nik", f.orthogonal, qs) for f in ifs.maps])
        ts = np.concatenate([f.scale * (ts @ f.orthogonal.T) + f.translation for f in ifs.maps])
    return scales, qs, ts


def level_points(ifs: IFSystem, n: int, base: np.ndarray | None = None, budget: int = wd.DEFAULT_BUDGET) -> np.ndarray:
    """The k^n exact attractor points f_w(base), lexicographic in w."""
    wd.level_size(ifs.k, n, budget)
    if base is None:
        base = ifs.sample_base
    pts = np.asarray(base, dtype=float).reshape(1, -1)
    for _ in range(n):
        pts = np.vstack([f.apply_many(pts) for f in ifs.maps])
    return pts


def estimate_diameter(
    ifs: IFSystem, depth: int = 8, tol: float = 1e-9, budget: int = wd.DEFAULT_BUDGET
) -> DiameterEstimate:
    """Bracket diam(K): exact point distances from below, enclosures from above.

    The lower bound is the largest pairwise distance among fixed points of
    depth-n composite maps (all genuine attractor points); the upper bound is
    the smaller of the invariant-hull diameter and the diameter bound of the
    union of level-n ball enclosures.  Deepens n until the bracket closes to
    tol or the level no longer fits the budget.
    """
    # Tiny relative inflation keeps the upper bound honest against the float
    # rounding accumulated while iterating the hull.
    slack = 1.0 + 1e-13
    hull_diam = _point_set_diameter(ifs.hull_vertices) * slack
    ball = ifs.root_ball
    lower = 0.0
    upper = min(hull_diam, 2.0 * ball.radius * slack)
    levels_used = 0
    for n in range(1, depth + 1):
        if ifs.k**n > budget:
            break
        scales, qs, ts = level_map_arrays(ifs, n, budget)
        d = ifs.dim
        mats = np.eye(d) - scales[:, None, None] * qs
        fixed = np.linalg.solve(mats, ts[:, :, None])[:, :, 0]
        lower = max(lower, _point_set_diameter(fixed))
        centers = scales[:, None] * (qs @ ball.center) + ts
        level_upper = (_point_set_diameter(centers) + 2.0 * float(scales.max()) * ball.radius) * slack
        upper = min(upper, level_upper)
        levels_used = n
        if upper - lower <= tol:
            return DiameterEstimate(lower, upper, levels_used, True)
    return DiameterEstimate(lower, upper, levels_used, upper - lower <= tol)


def make_piece(ifs: IFSystem, word: wd.Word) -> Piece:
    """The piece for one word: composite map, ratio, diameter, enclosure, anchor."""
    f = identity(ifs.dim)
    for s in word:
        f = f.compose(ifs.maps[s - 1])
    return _piece_from_map(ifs, word, f)


def _piece_from_map(ifs: IFSystem, word: wd.Word, f: Similitude) -> Piece:
    ball = ifs.root_ball
    return Piece(
        word=word,
        map=f,
        ratio=f.scale,
        diameter=f.scale * ifs.diameter_upper,
        enclosure=Ball(f.apply(ball.center), f.scale * ball.radius),
        anchor=f.apply(ifs.sample_base),
    )


def child_piece(ifs: IFSystem, piece: Piece, j: int) -> Piece:
    """Child piece for symbol j appended to the word: f_{w.j} = f_w o f_j."""
    return _piece_from_map(ifs, piece.word + (j,), piece.map.compose(ifs.maps[j - 1]))


def root_piece(ifs: IFSystem) -> Piece:
    return make_piece(ifs, wd.EMPTY)


def build_level(ifs: IFSystem, n: int, budget: int = wd.DEFAULT_BUDGET) -> Level:
    """All k^n pieces of level n, lexicographic by word, duplicates retained."""
    wd.level_size(ifs.k, n, budget)
    frontier = [root_piece(ifs)]
    for _ in range(n):
        frontier = [child_piece(ifs, p, j) for p in frontier for j in range(1, ifs.k + 1)]
    return Level(n, frontier)


def sample_points(ifs: IFSystem, piece: Piece, refinement: int, budget: int = wd.DEFAULT_BUDGET) -> np.ndarray:
    """k^refinement exact points of the piece: images under f_w o f_v of the base.

    Every point of the piece lies within ratio * max_ratio^refinement * diam(K)
    of some returned point, and every returned point lies in the piece exactly.
    """
    pts = level_points(ifs, refinement, budget=budget)
    return piece.map.apply_many(pts)


def refinement_check(ifs: IFSystem, n: int, budget: int = wd.DEFAULT_BUDGET) -> bool:
    """Structural self-test: level n+1 refines level n word-by-word."""
    level_n = wd.enumerate_level(ifs.k, n, budget)
    level_next = wd.enumerate_level(ifs.k, n + 1, budget)
    parents = set(level_n)
    if any(w[:n] not in parents for w in level_next):
        return False
    rebuilt = [c for u in level_n for c in wd.children(u, ifs.k, budget)]
    return rebuilt == level_next
