"""Points of the probability simplex S^{m-1}."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.errors import SimplexError

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector of length m.

    Build instances through ``from_coords`` so that the simplex invariants are
    checked; the stored array is read-only.
    """

    coords: FloatArray

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=float)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_coords(cls, values: ArrayLike, tolerances: Tolerances | None = None) -> SimplexPoint:
        """Validate a vector as a simplex point.

        Negative coordinates within ``tolerances.simplex`` are clamped to zero.

        Raises:
            SimplexError: If a coordinate is too negative, not finite, or the sum is off.
        """
        tol = get_tolerances(tolerances).simplex
        coords = np.array(values, dtype=float).reshape(-1)
        if coords.size < 1:
            raise SimplexError("a simplex point needs at least one coordinate")
        if not np.all(np.isfinite(coords)):
            raise SimplexError(f"coordinates must be finite: {coords.tolist()}")
        worst = int(np.argmin(coords))
        if coords[worst] < -tol:
            raise SimplexError(
                f"coordinate {worst + 1} is {coords[worst]:.3e}, below -{tol:.0e}"
            )
        total = float(coords.sum())
        if abs(total - 1.0) > tol:
            raise SimplexError(f"coordinates sum to {total!r}, not 1")
        return cls(clamp(coords, tol))

    @classmethod
    def vertex(cls, m: int, i: int) -> SimplexPoint:
        """The vertex e^(i+1) of S^{m-1} (``i`` is 0-based)."""
        if not 0 <= i < m:
            raise SimplexError(f"vertex index {i + 1} outside 1..{m}")
        coords = np.zeros(m)
        coords[i] = 1.0
        return cls(coords)

    @classmethod
    def uniform(cls, m: int) -> SimplexPoint:
        """The barycenter (1/m, ..., 1/m)."""
        return cls(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        """Number of coordinates."""
        return int(self.coords.size)

    def is_interior(self, tolerances: Tolerances | None = None) -> bool:
        """True if every coordinate is above the zero threshold."""
        return bool(np.all(self.coords > get_tolerances(tolerances).zero))

    def support(self, tolerances: Tolerances | None = None) -> frozenset[int]:
        """Indices of the coordinates above the zero threshold."""
        tol = get_tolerances(tolerances).zero
        return frozenset(int(i) for i in np.flatnonzero(self.coords > tol))

    def distance(self, other: PointLike) -> float:
        """Max-norm distance to another point."""
        return float(np.max(np.abs(self.coords - as_coords(other))))

    def tolist(self) -> list[float]:
        return self.coords.tolist()

    def __repr__(self) -> str:
        return f"SimplexPoint({self.coords.tolist()!r})"


PointLike = Union[SimplexPoint, ArrayLike]


def as_coords(x: PointLike) -> FloatArray:
    """Return the coordinate array of a point or array-like."""
    if isinstance(x, SimplexPoint):
        return x.coords
    return np.asarray(x, dtype=float)


def clamp(x: FloatArray, tol: float) -> FloatArray:
    """Set coordinates in [-tol, 0) to exactly zero."""
    out = np.array(x, dtype=float)
    out[(out < 0.0) & (out >= -tol)] = 0.0
    return out


def renormalize(x: FloatArray, tol: float) -> FloatArray:
    """Clamp, then rescale to unit sum if the sum drifted by more than ``tol``.

    Works on a single point or on rows of a 2-d array.
    """
    out = clamp(x, tol)
    total = out.sum(axis=-1, keepdims=True)
    drift = np.abs(total - 1.0) > tol
    if np.any(drift):
        out = np.where(drift, out / np.where(total == 0.0, 1.0, total), out)
    return out


def random_interior_point(m: int, rng: np.random.Generator) -> SimplexPoint:
    """Uniform sample from the simplex (normalized exponential draws)."""
    draws = rng.exponential(size=m)
    return SimplexPoint(draws / draws.sum())
