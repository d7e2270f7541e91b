"""Euclidean similitudes x -> scale * Q x + t with orthogonal Q.

The algebra here (application, composition, relative inversion) is what turns
symbolic words into concrete pieces: the piece named by a word carries the
composite of the word's maps.  All comparisons are tolerance-based; rigor
downstream comes from certified inequalities with margins, not from exact
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Similitude:
    """A map x -> scale * Q x + t; scales all distances by exactly `scale`."""

    scale: float
    orthogonal: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.orthogonal, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(-1)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"orthogonal part must be square, got shape {q.shape}")
        if q.shape[0] != t.shape[0]:
            raise ValueError(f"dimension mismatch: Q is {q.shape}, t is {t.shape}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        err = np.max(np.abs(q.T @ q - np.eye(q.shape[0])))
        if err > ORTHO_TOL:
            raise ValueError(f"matrix is not orthogonal (max |QtQ - I| = {err:.3g})")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "orthogonal", q)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    def apply(self, x) -> np.ndarray:
        """Image of a single point."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise ValueError(f"point has dimension {x.shape[0]}, map has {self.dim}")
        return self.scale * (self.orthogonal @ x) + self.translation

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        """Image of an (m, d) array of points."""
        points = np.asarray(points, dtype=float)
        return self.scale * (points @ self.orthogonal.T) + self.translation

    def compose(self, other: "Similitude") -> "Similitude":
        """self after other: (self o other)(x) = self(other(x))."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in composition")
        return Similitude(
            self.scale * other.scale,
            self.orthogonal @ other.orthogonal,
            self.apply(other.translation),
        )

    def __matmul__(self, other: "Similitude") -> "Similitude":
        return self.compose(other)

    def inverse(self) -> "Similitude":
        qt = self.orthogonal.T
        return Similitude(1.0 / self.scale, qt, -(qt @ self.translation) / self.scale)

    def relative_to(self, base: "Similitude") -> "Similitude":
        """The map h with base o h = self, i.e. base^{-1} o self.

        Its scale may exceed 1; it is a similitude but not necessarily a
        contraction.
        """
        if self.dim != base.dim:
            raise ValueError("dimension mismatch")
        qt = base.orthogonal.T
        return Similitude(
            self.scale / base.scale,
            qt @ self.orthogonal,
            (qt @ (self.translation - base.translation)) / base.scale,
        )

    def fixed_point(self) -> np.ndarray:
        """Solve (I - scale Q) x = t; well-conditioned whenever scale < 1."""
        d = self.dim
        return np.linalg.solve(np.eye(d) - self.scale * self.orthogonal, self.translation)


def identity(dim: int) -> Similitude:
    return Similitude(1.0, np.eye(dim), np.zeros(dim))


def approx_equal(f: Similitude, g: Similitude, tol: float) -> bool:
    """Componentwise closeness: scale, orthogonal part and translation within tol."""
    if f.dim != g.dim:
        return False
    return (
        abs(f.scale - g.scale) <= tol
        and np.max(np.abs(f.orthogonal - g.orthogonal)) <= tol
        and np.max(np.abs(f.translation - g.translation)) <= tol
    )


def similitude_1d(scale: float, translation: float, reflect: bool = False) -> Similitude:
    q = np.array([[-1.0 if reflect else 1.0]])
    return Similitude(scale, q, np.array([float(translation)]))


def rotation_2d(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


def similitude_2d(scale: float, translation, rotation_deg: float = 0.0, reflect: bool = False) -> Similitude:
    """2-D authoring form: rotation angle plus optional reflection across the x-axis."""
    q = rotation_2d(rotation_deg)
    if reflect:
        q = q @ np.diag([1.0, -1.0])
    return Similitude(scale, q, np.asarray(translation, dtype=float))
