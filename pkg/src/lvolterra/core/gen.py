"""Random and named ℓ-Volterra operators."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.tensor import HeredityTensor

logger = logging.getLogger(__name__)

# Mass moved onto a missing non-Volterra witness coefficient
REPAIR_MASS = 0.05


@dataclass(frozen=True)
class GenSpec:
    """Parameters of ``random_operator``."""

    m: int
    ell: int
    seed: int
    sparsity: float = 0.0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"m must be at least 2, got {self.m}")
        if not 0 <= self.ell <= self.m:
            raise ValueError(f"ell must lie in 0..{self.m}, got {self.ell}")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValueError(f"sparsity must lie in [0, 1), got {self.sparsity}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def allowed_outcomes(i: int, j: int, m: int, ell: int) -> list[int]:
    """K(i,j): parents, plus every non-Volterra coordinate (0-based, k >= ell)."""
    return [k for k in range(m) if k in (i, j) or k >= ell]


def random_operator(spec: GenSpec, tolerances: Tolerances | None = None) -> HeredityTensor:
    """Sample an operator that classifies as ℓ-Volterra with ℓ = ``spec.ell``.

    Each pair-row is a uniform point of the simplex over its allowed outcomes,
    optionally thinned; non-Volterra coordinates without a witness pair then get
    ``REPAIR_MASS`` moved onto a random off-parent coefficient.
    """
    tol = get_tolerances(tolerances)
    m, ell = spec.m, spec.ell
    rng = np.random.default_rng(spec.seed)
    array = np.zeros((m, m, m))

    for i in range(m):
        for j in range(i, m):
            outcomes = allowed_outcomes(i, j, m, ell)
            draws = rng.exponential(size=len(outcomes))
            if spec.sparsity > 0.0:
                keep = rng.random(len(outcomes)) >= spec.sparsity
                if not keep.any():
                    keep[rng.integers(len(outcomes))] = True
                draws = np.where(keep, draws, 0.0)
            array[i, j, outcomes] = draws / draws.sum()
            array[j, i] = array[i, j]

    for k in range(ell, m):
        block = array[:, :, k].copy()
        block[k, :] = 0.0
        block[:, k] = 0.0
        if block.max() > tol.zero:
            continue
        others = [n for n in range(m) if n != k]
        i, j = sorted(rng.choice(others, size=2, replace=True).tolist())
        row = array[i, j] * (1.0 - REPAIR_MASS)
        row[k] += REPAIR_MASS
        array[i, j] = row
        array[j, i] = row
        logger.debug(
            "Added a non-Volterra witness for k=%d with pair (%d,%d)", k + 1, i + 1, j + 1
        )

    return HeredityTensor(array)


def _from_one_based(m: int, table: dict[tuple[int, int, int], float]) -> HeredityTensor:
    return HeredityTensor.from_entries(
        m, [(i - 1, j - 1, k - 1, value) for (i, j, k), value in table.items()]
    )


_IDENTITY = {
    (1, 1, 1): 1.0, (2, 2, 2): 1.0, (3, 3, 3): 1.0,
    (1, 2, 1): 0.5, (1, 2, 2): 0.5,
    (1, 3, 1): 0.5, (1, 3, 3): 0.5,
    (2, 3, 2): 0.5, (2, 3, 3): 0.5,
}

_W1 = {
    (1, 1, 1): 0.8, (1, 1, 3): 0.2,
    (1, 2, 1): 0.7, (1, 2, 2): 0.3,
    (1, 3, 1): 0.3, (1, 3, 3): 0.7,
    (2, 2, 2): 1.0,
    (2, 3, 2): 0.6, (2, 3, 3): 0.4,
    (3, 3, 3): 1.0,
}

_T2 = {**_W1, (1, 2, 1): 0.2, (1, 2, 2): 0.8}

_T5 = {**_T2, (1, 1, 1): 0.5, (1, 1, 3): 0.5}

_C1 = {
    (1, 1, 1): 1.0,
    (2, 2, 3): 1.0,
    (3, 3, 2): 1.0,
    (1, 2, 1): 0.5, (1, 2, 2): 0.5,
    (1, 3, 1): 0.5, (1, 3, 3): 0.5,
    (2, 3, 2): 0.5, (2, 3, 3): 0.5,
}


@dataclass(frozen=True)
class NamedOperator:
    """A documented example operator."""

    name: str
    ell: int
    description: str
    table: dict[tuple[int, int, int], float]

    def tensor(self) -> HeredityTensor:
        return _from_one_based(3, self.table)


NAMED_OPERATORS: dict[str, NamedOperator] = {
    op.name: op
    for op in (
        NamedOperator(
            "identity", 3, "Volterra operator with zero interaction matrix; V is the identity.",
            _IDENTITY,
        ),
        NamedOperator(
            "W1", 2, "2-Volterra operator with the interior fixed point (2/11, 5/11, 4/11).", _W1
        ),
        NamedOperator(
            "T2", 2, "2-Volterra operator with a_12=-0.6 and a_13=-0.4 (r=1, alpha=0.4).", _T2
        ),
        NamedOperator(
            "T5", 2, "2-Volterra operator whose first row satisfies a_1i <= -0.4.", _T5
        ),
        NamedOperator(
            "C1", 1, "1-Volterra operator with the period-2 vertex cycle e2 <-> e3.", _C1
        ),
    )
}


def named_operator(name: str) -> HeredityTensor:
    """Return one of the documented example operators.

    Raises:
        KeyError: If ``name`` is unknown.
    """
    try:
        return NAMED_OPERATORS[name].tensor()
    except KeyError:
        known = ", ".join(NAMED_OPERATORS)
        raise KeyError(f"unknown operator {name!r} (known: {known})") from None
