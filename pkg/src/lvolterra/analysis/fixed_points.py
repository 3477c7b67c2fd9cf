"""Fixed points: vertices, interior points of 2-faces, the sets X_j, numeric search."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.canonical import CanonicalForm, canonical_of
from lvolterra.core.simplex import FloatArray, PointLike, SimplexPoint, as_coords, renormalize
from lvolterra.core.tensor import HeredityTensor, evolve, evolve_batch
from lvolterra.errors import DomainError, InconsistencyError

logger = logging.getLogger(__name__)

# Faces of every dimension are seeded up to this m; beyond it only faces of dimension <= 2
MAX_M_ALL_FACES = 12


class FixedPointKind(str, Enum):
    """How a fixed point was found."""

    VERTEX = "vertex"
    FACE_INTERIOR = "face-interior"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class FaceCertificate:
    """Determinants of the fixed-point system on the face spanned by e^p, e^q, e^r."""

    delta: float
    delta1: float
    delta2: float
    delta3: float  # delta - delta1 - delta2

    @property
    def signs_agree(self) -> bool:
        signs = {float(np.sign(v)) for v in (self.delta, self.delta1, self.delta2, self.delta3)}
        return len(signs) == 1 and 0.0 not in signs


@dataclass(frozen=True)
class FixedPointRecord:
    """A certified fixed point; ``residual`` is max |V(x) - x|."""

    point: SimplexPoint
    kind: FixedPointKind
    residual: float
    vertex: int | None = None
    face: tuple[int, int, int] | None = None
    certificate: FaceCertificate | None = None

    def sort_key(self) -> tuple:
        order = list(FixedPointKind).index(self.kind)
        return (order, tuple(self.point.tolist()))

    def to_dict(self) -> dict:
        data: dict = {
            "kind": self.kind.value,
            "point": self.point.tolist(),
            "residual": self.residual,
        }
        if self.vertex is not None:
            data["vertex"] = self.vertex + 1
        if self.face is not None:
            data["face"] = [i + 1 for i in self.face]
        if self.certificate is not None:
            data["certificate"] = {
                "delta": self.certificate.delta,
                "delta1": self.certificate.delta1,
                "delta2": self.certificate.delta2,
                "delta3": self.certificate.delta3,
            }
        return data


@dataclass(frozen=True)
class FaceOutcome:
    """Result of the 2-face test; ``failed_condition`` is "condition (a)", "(b)" or "(c)"."""

    face: tuple[int, int, int]
    record: FixedPointRecord | None
    failed_condition: str | None = None
    detail: str = ""


def residual_of(P: HeredityTensor, x: PointLike) -> float:
    """max_k |V(x)_k - x_k| by direct evaluation."""
    coords = as_coords(x)
    return float(np.max(np.abs(evolve(P, coords) - coords)))


def vertex_fixed_points(
    P: HeredityTensor, tolerances: Tolerances | None = None
) -> list[FixedPointRecord]:
    """Vertices e^(i) with P[i,i,i] = 1."""
    tol = get_tolerances(tolerances)
    records = []
    for i in range(P.m):
        if abs(P.entries[i, i, i] - 1.0) <= tol.zero:
            point = SimplexPoint.vertex(P.m, i)
            records.append(
                FixedPointRecord(point, FixedPointKind.VERTEX, residual_of(P, point), vertex=i)
            )
    return records


def face_deltas(A: FloatArray, p: int, q: int, r: int) -> FaceCertificate:
    """Delta, Delta_1, Delta_2 and Delta - Delta_1 - Delta_2 for the face (p, q, r)."""
    delta = (A[p, r] - A[p, p]) * (A[q, r] - A[q, q]) - (A[p, r] - A[p, q]) * (A[q, r] - A[q, p])
    delta1 = A[q, r] * A[p, q] - A[p, r] * A[q, q]
    delta2 = A[p, r] * A[q, p] - A[q, r] * A[p, p]
    return FaceCertificate(
        float(delta), float(delta1), float(delta2), float(delta - delta1 - delta2)
    )


def face_interior_fixed_point(
    P: HeredityTensor,
    p: int,
    q: int,
    r: int,
    tolerances: Tolerances | None = None,
    canonical: CanonicalForm | None = None,
) -> FaceOutcome:
    """Test the three conditions for a unique interior fixed point of a 2-face.

    (a) at most one of p, q, r is a non-Volterra coordinate, and it is r;
    (b) the face is invariant: P[i,j,k] = 0 for i, j in the face and every
        non-Volterra k outside it;
    (c) Delta != 0 and Delta, Delta_1, Delta_2, Delta - Delta_1 - Delta_2 share a sign.

    Raises:
        DomainError: If the indices are not distinct coordinates.
        InconsistencyError: If the closed-form point fails direct certification.
    """
    tol = get_tolerances(tolerances)
    C = canonical or canonical_of(P, tol)
    m, ell = C.m, C.ell
    face = (p, q, r)
    if len(set(face)) != 3 or not all(0 <= i < m for i in face):
        raise DomainError(f"face indices must be distinct coordinates in 1..{m}")

    outside = [i for i in face if i >= ell]
    if len(outside) > 1:
        return FaceOutcome(face, None, "condition (a)", "more than one non-Volterra coordinate")
    if outside and outside[0] != r:
        return FaceOutcome(face, None, "condition (a)", "the non-Volterra coordinate must be r")

    excluded = [k for k in range(ell, m) if k not in face]
    if excluded:
        leak = P.entries[np.ix_(face, face, excluded)]
        if leak.max() > tol.zero:
            return FaceOutcome(face, None, "condition (b)", "the face is not invariant")

    cert = face_deltas(C.A, p, q, r)
    if not cert.signs_agree:
        return FaceOutcome(face, None, "condition (c)", "Delta signs disagree or Delta = 0")

    coords = np.zeros(m)
    coords[p] = cert.delta1 / cert.delta
    coords[q] = cert.delta2 / cert.delta
    coords[r] = cert.delta3 / cert.delta
    point = SimplexPoint(coords)
    residual = residual_of(P, point)
    if residual > tol.fixed:
        raise InconsistencyError(
            f"face ({p + 1},{q + 1},{r + 1}) point {coords.tolist()} has residual {residual:.3e}"
        )
    record = FixedPointRecord(
        point, FixedPointKind.FACE_INTERIOR, residual, face=face, certificate=cert
    )
    return FaceOutcome(face, record)


def assign_face(triple: tuple[int, int, int], ell: int) -> tuple[int, int, int] | None:
    """Order a triple as (p, q, r) with the non-Volterra coordinate (or the largest) as r.

    Returns None when two or more coordinates are non-Volterra.
    """
    outside = [i for i in triple if i >= ell]
    if len(outside) > 1:
        return None
    r = outside[0] if outside else max(triple)
    p, q = sorted(i for i in triple if i != r)
    return p, q, r


def enumerate_face_fixed_points(
    P: HeredityTensor, tolerances: Tolerances | None = None
) -> list[FixedPointRecord]:
    """Run the 2-face test on every triple of coordinates."""
    tol = get_tolerances(tolerances)
    C = canonical_of(P, tol)
    records = []
    for triple in combinations(range(P.m), 3):
        face = assign_face(triple, C.ell)
        if face is None:
            continue
        outcome = face_interior_fixed_point(P, *face, tolerances=tol, canonical=C)
        if outcome.record is not None:
            records.append(outcome.record)
        else:
            logger.debug(
                "Face %s: %s (%s)",
                tuple(i + 1 for i in face), outcome.failed_condition, outcome.detail,
            )
    return sorted(records, key=FixedPointRecord.sort_key)


@dataclass(frozen=True)
class FaceScan:
    """Grid points of a 2-face whose residual is below the scan tolerance."""

    interior: FloatArray
    boundary: FloatArray


def scan_face(
    P: HeredityTensor,
    face: tuple[int, int, int],
    step: float = 0.005,
    tol: float | None = None,
    tolerances: Tolerances | None = None,
) -> FaceScan:
    """Brute-force residual scan over a regular grid of the face.

    ``tol`` defaults to ten times tol_fixed.
    """
    tols = get_tolerances(tolerances)
    threshold = 10.0 * tols.fixed if tol is None else tol
    n = int(round(1.0 / step))
    a, b = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = a + b <= n
    a, b = a[keep], b[keep]
    c = n - a - b
    X = np.zeros((a.size, P.m))
    X[:, face[0]] = a / n
    X[:, face[1]] = b / n
    X[:, face[2]] = c / n
    residuals = np.abs(evolve_batch(P, X) - X).max(axis=1)
    hits = residuals <= threshold
    inside = (a > 0) & (b > 0) & (c > 0)
    return FaceScan(interior=X[hits & inside], boundary=X[hits & ~inside])


def in_X_j(
    P: HeredityTensor, x: PointLike, j: int, tol: float | None = None,
    tolerances: Tolerances | None = None,
) -> bool:
    """True iff the first ``j`` coordinates are fixed: |V(x)_k - x_k| <= tol for k < j.

    ``tol`` defaults to tol_fixed.
    """
    if not 1 <= j <= P.m:
        raise DomainError(f"j must lie in 1..{P.m}, got {j}")
    threshold = get_tolerances(tolerances).fixed if tol is None else tol
    coords = as_coords(x)
    return bool(np.all(np.abs(evolve(P, coords)[:j] - coords[:j]) <= threshold))


def in_X_ell_canonical(
    A: FloatArray, ell: int, x: PointLike, tol: float | None = None,
    tolerances: Tolerances | None = None,
) -> bool:
    """Membership in X_ell through x_k (Ax)_k = 0 for every k < ell."""
    threshold = get_tolerances(tolerances).fixed if tol is None else tol
    coords = as_coords(x)
    return bool(np.all(np.abs(coords[:ell] * (A[:ell] @ coords)) <= threshold))


def supp_ell(v: PointLike, ell: int, tolerances: Tolerances | None = None) -> frozenset[int]:
    """Indices k < ell with |v_k| above tol_zero."""
    tol = get_tolerances(tolerances).zero
    coords = as_coords(v)[:ell]
    return frozenset(int(i) for i in np.flatnonzero(np.abs(coords) > tol))


def supp_condition(
    A: FloatArray, ell: int, x: PointLike, tolerances: Tolerances | None = None
) -> bool:
    """True iff supp_ell(x) and supp_ell(Ax) are disjoint."""
    coords = as_coords(x)
    return not (supp_ell(coords, ell, tolerances) & supp_ell(A @ coords, ell, tolerances))


@dataclass(frozen=True)
class BlendResult:
    point: SimplexPoint
    member: bool


def blend_in_X_ell(
    P: HeredityTensor,
    x: PointLike,
    y: PointLike,
    lam: float,
    tol: float | None = None,
    tolerances: Tolerances | None = None,
) -> BlendResult:
    """Convex combination of two X_ell points with equal ℓ-support, checked to stay in X_ell.

    Raises:
        DomainError: If lam is outside [0, 1], a point is not in X_ell, or the supports differ.
        InconsistencyError: If the combination leaves X_ell.
    """
    tols = get_tolerances(tolerances)
    ell = canonical_of(P, tols).ell
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    xc, yc = as_coords(x), as_coords(y)
    if ell == 0:
        return BlendResult(SimplexPoint(lam * xc + (1.0 - lam) * yc), True)
    for name, v in (("x", xc), ("y", yc)):
        if not in_X_j(P, v, ell, tol, tols):
            raise DomainError(f"{name} is not in X_{ell}")
    if supp_ell(xc, ell, tols) != supp_ell(yc, ell, tols):
        raise DomainError("x and y have different supports among the Volterra coordinates")
    point = SimplexPoint(lam * xc + (1.0 - lam) * yc)
    if not in_X_j(P, point, ell, tol, tols):
        raise InconsistencyError(f"blend at lambda={lam} left X_{ell}")
    return BlendResult(point, True)


def _seed_points(m: int, seed_count: int, seed: int) -> FloatArray:
    """Quasi-random interior points plus the barycenter of every face."""
    seeds = []
    if seed_count > 0:
        u = qmc.Halton(d=m, scramble=True, seed=seed).random(seed_count)
        draws = -np.log(np.clip(u, 1e-12, 1.0 - 1e-12))
        seeds.append(draws / draws.sum(axis=1, keepdims=True))
    max_size = m if m <= MAX_M_ALL_FACES else 3
    for size in range(1, max_size + 1):
        for subset in combinations(range(m), size):
            point = np.zeros((1, m))
            point[0, list(subset)] = 1.0 / size
            seeds.append(point)
    return np.vstack(seeds)


def _newton_refine(P: HeredityTensor, x: FloatArray, tol: Tolerances) -> FloatArray | None:
    """Solve V(x) = x on the affine hull of the simplex from a starting point."""

    def residual(y: FloatArray) -> FloatArray:
        full = np.append(y, 1.0 - y.sum())
        return evolve(P, full)[:-1] - y

    solution = optimize.root(residual, x[:-1], method="hybr")
    if not solution.success:
        return None
    full = np.append(solution.x, 1.0 - solution.x.sum())
    if full.min() < -tol.simplex:
        return None
    return renormalize(full, tol.simplex)


def numeric_fixed_points(
    P: HeredityTensor,
    seed_count: int = 64,
    tol_fixed: float | None = None,
    max_iter: int = 10_000,
    beta: float = 0.5,
    seed: int = 0,
    newton: bool = False,
    merge_tol: float = 1e-8,
    tolerances: Tolerances | None = None,
) -> list[FixedPointRecord]:
    """Damped iteration x <- (1 - beta) x + beta V(x) from many seeds.

    Seeds are ``seed_count`` Halton points mapped into the interior plus every
    face barycenter. Converged points are re-certified by direct evaluation and
    merged when closer than ``merge_tol``, the lowest residual standing for
    the cluster. With ``newton`` set, seeds that did not converge are handed
    to a root finder.
    """
    tols = get_tolerances(tolerances)
    threshold = tols.fixed if tol_fixed is None else tol_fixed
    X = _seed_points(P.m, seed_count, seed)
    active = np.ones(X.shape[0], dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        current = X[idx]
        image = evolve_batch(P, current)
        done = np.abs(image - current).max(axis=1) <= threshold
        active[idx[done]] = False
        moving = idx[~done]
        X[moving] = renormalize(
            (1.0 - beta) * current[~done] + beta * image[~done], tols.simplex
        )

    candidates = [X[i] for i in np.flatnonzero(~active)]
    if newton:
        for i in np.flatnonzero(active):
            refined = _newton_refine(P, X[i], tols)
            if refined is not None:
                candidates.append(refined)
    logger.debug("%d of %d seeds converged", len(candidates), X.shape[0])

    scored = [(residual_of(P, c), tuple(c.tolist()), c) for c in candidates]
    records: list[FixedPointRecord] = []
    # lowest residual first
    for residual, _, coords in sorted(scored, key=lambda s: s[:2]):
        if residual > threshold:
            continue
        if any(np.max(np.abs(r.point.coords - coords)) <= merge_tol for r in records):
            continue
        records.append(FixedPointRecord(SimplexPoint(coords), FixedPointKind.NUMERIC, residual))
    return sorted(records, key=FixedPointRecord.sort_key)
