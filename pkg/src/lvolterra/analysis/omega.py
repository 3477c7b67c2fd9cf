"""Certified upper bounds for ω-limit sets and their numerical verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from lvolterra.analysis.fixed_points import residual_of
from lvolterra.analysis.lyapunov import (
    BlockDecayHypothesis,
    DominantRowHypothesis,
    PDeltaWitness,
    RatioPair,
    alpha_for,
    check_thm2,
    check_thm4,
    check_thm5,
    eval_linear_phi,
    eval_phi,
    p_delta_witness,
)
from lvolterra.analysis.trajectory import Trajectory
from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.canonical import canonical_of
from lvolterra.core.simplex import PointLike, SimplexPoint, as_coords
from lvolterra.core.tensor import HeredityTensor, step
from lvolterra.errors import DomainError

logger = logging.getLogger(__name__)

PRODUCT_THRESHOLD = 1e-8
PARTIAL_SUM_SLACK = 1e-6


@dataclass(frozen=True)
class OmegaEstimate:
    """A closed set containing ω(x⁰) for every interior, non-fixed x⁰.

    ``zero_coordinates`` are 0-based. ``product_zero`` means the product of the
    Volterra coordinates vanishes on ω(x⁰); ``on_boundary`` that ω(x⁰) lies in
    the boundary of the simplex. ``face_boundary`` that, for a Volterra
    operator with a negative block, ω(x⁰) lies in the boundary of the face
    spanned by the coordinates left after the block decays.
    """

    m: int
    ell: int
    zero_coordinates: frozenset[int] = frozenset()
    product_zero: bool = False
    on_boundary: bool = False
    face_boundary: bool = False
    dominant_row: DominantRowHypothesis | None = None
    block_decay: BlockDecayHypothesis | None = None
    strict_pairs: tuple[RatioPair, ...] = ()
    justification: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not (
            self.zero_coordinates or self.product_zero or self.on_boundary or self.face_boundary
        )

    def to_dict(self) -> dict:
        data: dict = {
            "zero_coordinates": sorted(k + 1 for k in self.zero_coordinates),
            "product_zero": self.product_zero,
            "on_boundary": self.on_boundary,
            "face_boundary": self.face_boundary,
            "justification": list(self.justification),
        }
        if self.dominant_row is not None:
            data["dominant_row"] = {
                "k0": self.dominant_row.k0 + 1,
                "delta": self.dominant_row.delta,
            }
        if self.block_decay is not None:
            data["block_decay"] = {"r": self.block_decay.r, "alpha": self.block_decay.alpha}
        if self.strict_pairs:
            data["strict_pairs"] = [[p.p + 1, p.q + 1] for p in self.strict_pairs]
        return data


def _face_boundary(A: np.ndarray, block: BlockDecayHypothesis | None, tol_zero: float) -> bool:
    """Whether the face left by a decaying block has every off-diagonal a_ij nonzero."""
    if block is None or A.shape[0] - block.r < 2:
        return False
    face = A[block.r:, block.r:]
    off = face[~np.eye(face.shape[0], dtype=bool)]
    return bool(np.all(np.abs(off) > tol_zero))


def omega_upper_bound(P: HeredityTensor, tolerances: Tolerances | None = None) -> OmegaEstimate:
    """Collect every bound the interaction matrix certifies.

    A dominant Volterra row (a_{k0,i} <= -delta < 0) forces the product of the
    Volterra coordinates to zero. A negative block a_ki, k < r <= i, forces
    x_1..x_r to zero geometrically fast. A strict ratio pair (p, q) forces x_p
    to zero. For ℓ = m with every off-diagonal a_ij nonzero, ω(x⁰) lies in
    the boundary, and with a negative block of size r and nonzero off-diagonal
    entries among the remaining coordinates it lies in the boundary of their
    face. For ℓ < m boundary refinement is never claimed.
    """
    tols = get_tolerances(tolerances)
    C = canonical_of(P, tols)
    A, ell, m = C.A, C.ell, C.m
    zeros: set[int] = set()
    notes: list[str] = []

    dominant = check_thm5(A, ell, tols)
    if dominant is not None:
        notes.append(
            f"row {dominant.k0 + 1} has a_ki <= -{dominant.delta:.6g} for every i: "
            f"product of x_1..x_{ell} tends to 0"
        )

    block = check_thm2(A, ell, tols)
    if block is not None:
        zeros.update(range(block.r))
        notes.append(
            f"a_ki < 0 for k <= {block.r} < i (alpha={block.alpha:.6g}): "
            f"x_1..x_{block.r} tend to 0 geometrically"
        )

    strict = tuple(pair for pair in check_thm4(A, ell, tols) if pair.strict)
    for pair in strict:
        zeros.add(pair.p)
        notes.append(f"a_{pair.p + 1}i < a_{pair.q + 1}i for every i: x_{pair.p + 1} tends to 0")

    on_boundary = bool(zeros) or dominant is not None
    face_boundary = False
    if ell == m:
        off = A[~np.eye(m, dtype=bool)]
        if np.all(np.abs(off) > tols.zero):
            on_boundary = True
            notes.append("Volterra operator with no zero off-diagonal a_ij: boundary limit set")
        face_boundary = _face_boundary(A, block, tols.zero)
        if face_boundary:
            notes.append(
                f"Volterra operator, a_ij != 0 among x_{block.r + 1}..x_{m}: "
                f"product of x_{block.r + 1}..x_{m} tends to 0"
            )

    return OmegaEstimate(
        m=m,
        ell=ell,
        zero_coordinates=frozenset(zeros),
        product_zero=dominant is not None,
        on_boundary=on_boundary,
        face_boundary=face_boundary,
        dominant_row=dominant,
        block_decay=block,
        strict_pairs=strict,
        justification=tuple(notes),
    )


@dataclass(frozen=True)
class BoundFailure:
    """A violated bound; ``coordinate`` is 0-based or None for aggregate checks."""

    check: str
    step: int
    value: float
    bound: float
    coordinate: int | None = None

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "step": self.step,
            "coordinate": None if self.coordinate is None else self.coordinate + 1,
            "value": self.value,
            "bound": self.bound,
        }


@dataclass
class OmegaVerification:
    """Observed behaviour of one orbit against a certified estimate."""

    steps: int
    failures: list[BoundFailure] = field(default_factory=list)
    decay_rate: float | None = None
    fitted_constant: float | None = None
    witness: PDeltaWitness | None = None
    product_final: float | None = None
    product_below_step: int | None = None
    final_point: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        data: dict = {
            "passed": self.passed,
            "steps": self.steps,
            "failures": [f.to_dict() for f in self.failures],
            "final_point": self.final_point,
        }
        if self.decay_rate is not None:
            data["decay_rate"] = self.decay_rate
            data["fitted_constant"] = self.fitted_constant
        if self.witness is not None:
            data["witness_p"] = self.witness.p.tolist()
            data["product_final"] = self.product_final
            data["product_below_step"] = self.product_below_step
        return data


def verify_omega_bound(
    P: HeredityTensor,
    estimate: OmegaEstimate,
    x0: PointLike,
    n_steps: int = 1000,
    tol: float = 1e-10,
    tolerances: Tolerances | None = None,
) -> OmegaVerification:
    """Simulate from ``x0`` and check every bound in ``estimate``.

    Raises:
        DomainError: If ``x0`` is not interior or is a fixed point.
    """
    tols = get_tolerances(tolerances)
    x = SimplexPoint.from_coords(as_coords(x0), tols)
    if not x.is_interior(tols):
        raise DomainError("the starting point must lie in the interior of the simplex")
    if residual_of(P, x) <= tols.fixed:
        raise DomainError("the starting point is a fixed point")

    orbit = [x.coords]
    for _ in range(n_steps):
        orbit.append(step(P, orbit[-1], tols.simplex))
    report = OmegaVerification(steps=n_steps, final_point=orbit[-1].tolist())

    block = estimate.block_decay
    if block is not None:
        phi = np.array([eval_linear_phi(block.r, v) for v in orbit])
        rho = 1.0 - block.alpha + block.alpha * phi[0]
        report.decay_rate = float(rho)
        envelope = phi[0] * rho ** np.arange(len(orbit))
        for n in np.flatnonzero(phi > envelope + tol):
            report.failures.append(
                BoundFailure("geometric-decay", int(n), float(phi[n]), float(envelope[n] + tol))
            )
        positive = phi > 0.0
        if np.any(positive):
            logs = np.log(phi[positive]) - np.flatnonzero(positive) * np.log(rho)
            report.fitted_constant = float(np.exp(logs.max()))

    dominant = estimate.dominant_row
    if dominant is not None:
        A = canonical_of(P, tols).A
        witness = p_delta_witness(A, estimate.ell, dominant.k0, -dominant.delta, tols)
        report.witness = witness
        weights = witness.p.coords
        values = np.array([eval_phi(weights, v) for v in orbit])
        envelope = values[0] * (1.0 - dominant.delta) ** np.arange(len(orbit))
        for n in np.flatnonzero(values > envelope + tol):
            report.failures.append(
                BoundFailure("product-decay", int(n), float(values[n]), float(envelope[n] + tol))
            )
        products = np.array([np.prod(v[: estimate.ell]) for v in orbit])
        report.product_final = float(products[-1])
        below = np.flatnonzero(products < PRODUCT_THRESHOLD)
        report.product_below_step = int(below[0]) if below.size else None

    final = orbit[-1]
    for k in sorted(estimate.zero_coordinates):
        if final[k] > tol:
            report.failures.append(
                BoundFailure("zero-coordinate", n_steps, float(final[k]), tol, coordinate=k)
            )

    if report.failures:
        logger.warning("%d bound violations along the orbit", len(report.failures))
    return report


@dataclass(frozen=True)
class PartialSumReport:
    total: float
    envelope: float
    r: int
    alpha: float

    @property
    def passed(self) -> bool:
        return self.total <= self.envelope

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "alpha": self.alpha,
            "partial_sum": self.total,
            # unbounded when the orbit starts on the face x_1 + ... + x_r = 1
            "envelope": self.envelope if np.isfinite(self.envelope) else None,
            "passed": self.passed,
        }


def partial_sum_check(
    P: HeredityTensor, traj: Trajectory, r: int, tolerances: Tolerances | None = None
) -> PartialSumReport:
    """Sum x_1 + ... + x_r over a recorded orbit and compare with the geometric envelope.

    The envelope is phi0 / (alpha (1 - phi0)) plus a small slack.

    Raises:
        HypothesisError: If the negative-block hypothesis fails for ``r``.
        DomainError: If the trajectory was recorded with a stride.
    """
    tols = get_tolerances(tolerances)
    alpha = alpha_for(canonical_of(P, tols).A, r, tols)
    if traj.stride != 1:
        raise DomainError("partial sums need every iterate (stride 1)")
    phi = traj.points[:, :r].sum(axis=1)
    phi0 = float(phi[0])
    if phi0 >= 1.0:
        envelope = float("inf")
    else:
        envelope = phi0 / (alpha * (1.0 - phi0)) + PARTIAL_SUM_SLACK
    return PartialSumReport(total=float(phi.sum()), envelope=envelope, r=r, alpha=alpha)
