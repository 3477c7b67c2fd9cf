"""Canonical form x'_k = x_k (1 + (Ax)_k) [+ residual] of an ℓ-Volterra operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.classify import OperatorKind, classify, volterra_flags
from lvolterra.core.simplex import FloatArray, PointLike, SimplexPoint, as_coords, clamp
from lvolterra.core.tensor import HeredityTensor
from lvolterra.errors import ClassificationError


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Interaction matrix A = (a_ki) plus the non-Volterra residual coefficients.

    ``residual_tensor[:, :, k]`` holds P[i,j,k] for i, j != k when k >= ell
    (0-based) and is zero for Volterra coordinates.
    """

    m: int
    ell: int
    A: FloatArray
    residual_tensor: FloatArray

    def __post_init__(self) -> None:
        for name in ("A", "residual_tensor"):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def residual(self) -> dict[int, tuple[tuple[int, int, float], ...]]:
        """For each k >= ell, the entries (i, j, P[i,j,k]) with i <= j, both != k."""
        result = {}
        for k in range(self.ell, self.m):
            block = np.triu(self.residual_tensor[:, :, k])
            result[k] = tuple(
                (int(i), int(j), float(block[i, j])) for i, j in zip(*np.nonzero(block > 0.0))
            )
        return result

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "ell": self.ell,
            "A": self.A.tolist(),
            "residual": {
                str(k + 1): [[i + 1, j + 1, v] for i, j, v in entries]
                for k, entries in self.residual.items()
            },
        }


def derive_canonical(
    P: HeredityTensor, ell: int, tolerances: Tolerances | None = None
) -> CanonicalForm:
    """Derive the canonical form of an operator classified with the given ℓ.

    a_ki = 2 P[i,k,k] - 1 for i != k and a_kk = P[k,k,k] - 1.

    Raises:
        ClassificationError: With the first coordinate contradicting ℓ.
    """
    m = P.m
    if not 0 <= ell <= m:
        raise ClassificationError(0, f"ℓ={ell} outside 0..{m}")
    flags, _ = volterra_flags(P, tolerances)
    for k in range(m):
        if k < ell and not flags[k]:
            raise ClassificationError(
                k, "a Volterra coordinate has P[i,j,k] > 0 with k not in {i,j}"
            )
        if k >= ell and flags[k]:
            raise ClassificationError(k, "a non-Volterra coordinate has no witness pair")

    entries = P.entries
    idx = np.arange(m)
    # A[k, i] = 2 P[i, k, k] - 1
    A = 2.0 * entries[:, idx, idx].T - 1.0
    A[idx, idx] = entries[idx, idx, idx] - 1.0

    residual = np.zeros_like(entries)
    for k in range(ell, m):
        block = entries[:, :, k].copy()
        block[k, :] = 0.0
        block[:, k] = 0.0
        residual[:, :, k] = block
    return CanonicalForm(m=m, ell=ell, A=A, residual_tensor=residual)


def canonical_of(P: HeredityTensor, tolerances: Tolerances | None = None) -> CanonicalForm:
    """Classify ``P`` and derive its canonical form.

    Raises:
        ClassificationError: If ``P`` is not ℓ-Volterra for any ℓ.
    """
    op_class = classify(P, tolerances)
    if op_class.kind is OperatorKind.NOT_ELL_VOLTERRA:
        k = op_class.volterra_flags.index(False)
        raise ClassificationError(k, "Volterra coordinates are not a prefix")
    return derive_canonical(P, op_class.ell, tolerances)


def growth_factors(C: CanonicalForm, x: FloatArray) -> FloatArray:
    """1 + (Ax)_k for every k."""
    return 1.0 + C.A @ x


def apply_canonical(
    C: CanonicalForm, x: PointLike, tolerances: Tolerances | None = None
) -> SimplexPoint:
    """Evaluate the two-branch canonical form: growth term plus residual for k >= ℓ."""
    tol = get_tolerances(tolerances)
    coords = as_coords(x)
    image = coords * growth_factors(C, coords)
    image = image + np.einsum("ijk,i,j->k", C.residual_tensor, coords, coords)
    return SimplexPoint(clamp(image, tol.simplex))


def interaction_violations(A: FloatArray, tol: float = 0.0) -> list[tuple[str, int, int, float]]:
    """Audit the interaction-matrix constraints, returning 0-based (constraint, k, i, value).

    Constraints: a_kk in [-1, 0], |a_ki| <= 1, a_ki + a_ik <= 0.
    """
    m = A.shape[0]
    found = []
    for k in range(m):
        if not -1.0 - tol <= A[k, k] <= tol:
            found.append(("diagonal", k, k, float(A[k, k])))
        for i in range(m):
            if abs(A[k, i]) > 1.0 + tol:
                found.append(("bound", k, i, float(A[k, i])))
            if i > k and A[k, i] + A[i, k] > tol:
                found.append(("skew", k, i, float(A[k, i] + A[i, k])))
    return found


def is_volterra_skew(A: FloatArray, tol: float = 0.0) -> bool:
    """True if A is skew-symmetric with zero diagonal, the shape of a plain Volterra operator."""
    return bool(np.all(np.abs(A + A.T) <= tol) and np.all(np.abs(np.diag(A)) <= tol))
