"""Heredity tensors and the quadratic stochastic operator they define."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.simplex import (
    FloatArray,
    PointLike,
    SimplexPoint,
    as_coords,
    clamp,
    renormalize,
)
from lvolterra.errors import TensorShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HeredityTensor:
    """The cubic array P[i, j, k] of heredity coefficients.

    Symmetry in (i, j) is structural: construction keeps the i <= j half of the
    input and mirrors it, so ``entries[i, j, k] == entries[j, i, k]`` always.
    """

    entries: FloatArray

    def __post_init__(self) -> None:
        array = np.array(self.entries, dtype=float)
        if array.ndim != 3 or not (array.shape[0] == array.shape[1] == array.shape[2]):
            raise TensorShapeError(f"expected an m x m x m array, got shape {array.shape}")
        upper = np.triu(np.ones(array.shape[:2], dtype=bool))
        if not np.array_equal(array, np.swapaxes(array, 0, 1)):
            logger.debug("Mirroring the i <= j half of a non-symmetric heredity array")
        sym = np.where(upper[:, :, None], array, np.swapaxes(array, 0, 1))
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @classmethod
    def from_array(cls, array: ArrayLike, m: int | None = None) -> HeredityTensor:
        """Build a tensor from a dense array, checking the declared dimension.

        Raises:
            TensorShapeError: If the array extents disagree with ``m``.
        """
        arr = np.asarray(array, dtype=float)
        if m is not None and arr.shape != (m, m, m):
            raise TensorShapeError(f"declared m={m} but array has shape {arr.shape}")
        return cls(arr)

    @classmethod
    def from_entries(
        cls, m: int, entries: Iterable[tuple[int, int, int, float]]
    ) -> HeredityTensor:
        """Build a tensor from sparse (i, j, k, value) entries with 0-based indices.

        Unlisted entries are zero; (i, j) and (j, i) name the same coefficient.
        """
        if m < 1:
            raise TensorShapeError(f"dimension must be positive, got {m}")
        array = np.zeros((m, m, m))
        for i, j, k, value in entries:
            if not (0 <= i < m and 0 <= j < m and 0 <= k < m):
                raise TensorShapeError(f"entry ({i + 1},{j + 1},{k + 1}) outside 1..{m}")
            array[i, j, k] = value
            array[j, i, k] = value
        return cls(array)

    @property
    def m(self) -> int:
        """Number of species (coordinates)."""
        return int(self.entries.shape[0])

    def pair_rows(self) -> Iterator[tuple[int, int, FloatArray]]:
        """Yield (i, j, P[i, j, :]) for every unordered pair i <= j."""
        for i in range(self.m):
            for j in range(i, self.m):
                yield i, j, self.entries[i, j]

    def nonzero_entries(self) -> list[tuple[int, int, int, float]]:
        """Sparse (i, j, k, value) entries with i <= j, sorted, 0-based."""
        result = []
        for i, j, row in self.pair_rows():
            for k in np.flatnonzero(row):
                result.append((i, j, int(k), float(row[k])))
        return result

    def __repr__(self) -> str:
        return f"<HeredityTensor(m={self.m})>"


@dataclass(frozen=True)
class Violation:
    """One violated stochasticity constraint; indices are 1-based for display."""

    kind: str  # "negative" | "symmetry" | "row-sum"
    indices: tuple[int, ...]
    magnitude: float

    def describe(self) -> str:
        where = ",".join(str(i) for i in self.indices)
        if self.kind == "row-sum":
            return f"row-sum at pair ({where}): deficit {self.magnitude:.6g}"
        if self.kind == "negative":
            return f"negative entry P[{where}] = {self.magnitude:.6g}"
        return f"asymmetric entries at ({where}): difference {self.magnitude:.6g}"


@dataclass
class ValidationReport:
    """Result of validating a heredity tensor; empty means valid."""

    m: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "valid": self.is_valid,
            "violations": [
                {"kind": v.kind, "indices": list(v.indices), "magnitude": v.magnitude}
                for v in self.violations
            ],
        }


TensorLike = Union[HeredityTensor, ArrayLike]


def validate_tensor(
    P: TensorLike, m: int | None = None, tolerances: Tolerances | None = None
) -> ValidationReport:
    """Check non-negativity, symmetry and unit row sums.

    Args:
        P: A tensor or a raw m x m x m array (raw arrays are checked for symmetry).
        m: Declared dimension; compared against the array extents.
        tolerances: Row-sum tolerance source.

    Raises:
        TensorShapeError: If the extents disagree with ``m`` or m < 2.
    """
    tol = get_tolerances(tolerances)
    array = P.entries if isinstance(P, HeredityTensor) else np.asarray(P, dtype=float)
    if array.ndim != 3 or not (array.shape[0] == array.shape[1] == array.shape[2]):
        raise TensorShapeError(f"expected an m x m x m array, got shape {array.shape}")
    if m is not None and array.shape[0] != m:
        raise TensorShapeError(f"declared m={m} but array has shape {array.shape}")
    size = array.shape[0]
    if size < 2:
        raise TensorShapeError(f"dimension must be at least 2, got {size}")

    report = ValidationReport(m=size)
    for i, j, k in zip(*np.nonzero(array < 0.0)):
        if i <= j:
            report.violations.append(
                Violation("negative", (int(i) + 1, int(j) + 1, int(k) + 1), float(array[i, j, k]))
            )
    diff = np.abs(array - np.swapaxes(array, 0, 1))
    for i, j in zip(*np.nonzero(diff.max(axis=2) > 0.0)):
        if i < j:
            report.violations.append(
                Violation("symmetry", (int(i) + 1, int(j) + 1), float(diff[i, j].max()))
            )
    sums = array.sum(axis=2)
    for i in range(size):
        for j in range(i, size):
            deficit = 1.0 - float(sums[i, j])
            if abs(deficit) > tol.row:
                report.violations.append(Violation("row-sum", (i + 1, j + 1), deficit))
    return report


def evolve(P: HeredityTensor, x: FloatArray) -> FloatArray:
    """Raw evolution x'_k = sum_ij P[i,j,k] x_i x_j, no clamping."""
    return np.einsum("ijk,i,j->k", P.entries, x, x)


def evolve_batch(P: HeredityTensor, X: FloatArray) -> FloatArray:
    """Raw evolution applied to every row of ``X``."""
    return np.einsum("ijk,ni,nj->nk", P.entries, X, X)


def apply_direct(
    P: HeredityTensor, x: PointLike, tolerances: Tolerances | None = None
) -> SimplexPoint:
    """Evaluate V(x) from the heredity coefficients, clamping tiny negatives."""
    tol = get_tolerances(tolerances)
    return SimplexPoint(clamp(evolve(P, as_coords(x)), tol.simplex))


def step(P: HeredityTensor, x: FloatArray, tol: float) -> FloatArray:
    """One orbit step under the clamp-then-renormalize policy."""
    return renormalize(evolve(P, x), tol)
