"""Classification of operators by their number of Volterra coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.tensor import HeredityTensor


class OperatorKind(str, Enum):
    """Class of a quadratic stochastic operator."""

    VOLTERRA = "volterra"
    ELL_VOLTERRA = "ell-volterra"
    NOT_ELL_VOLTERRA = "not-ell-volterra"


@dataclass(frozen=True)
class Witness:
    """A coefficient P[i,j,k] > 0 with k outside {i, j} (0-based)."""

    k: int
    i: int
    j: int
    value: float


@dataclass(frozen=True)
class OperatorClass:
    """Outcome of ``classify``.

    ``volterra_flags[k]`` is True iff P[i,j,k] vanishes whenever k is not a
    parent; ``witnesses`` holds one offending coefficient per False flag.
    """

    kind: OperatorKind
    ell: int | None
    volterra_flags: tuple[bool, ...]
    witnesses: tuple[Witness, ...] = ()

    @property
    def m(self) -> int:
        return len(self.volterra_flags)

    def witness_for(self, k: int) -> Witness | None:
        return next((w for w in self.witnesses if w.k == k), None)

    def __str__(self) -> str:
        if self.kind is OperatorKind.VOLTERRA:
            return f"Volterra (ℓ={self.ell})"
        if self.kind is OperatorKind.ELL_VOLTERRA:
            return f"ℓ-Volterra (ℓ={self.ell})"
        return "not ℓ-Volterra"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "ell": self.ell,
            "label": str(self),
            "volterra_flags": list(self.volterra_flags),
            "witnesses": [
                {"k": w.k + 1, "i": w.i + 1, "j": w.j + 1, "value": w.value}
                for w in self.witnesses
            ],
        }


def _off_parent(P: HeredityTensor, k: int) -> np.ndarray:
    """P[:, :, k] restricted to pairs with i != k and j != k, upper half only."""
    block = np.triu(P.entries[:, :, k]).copy()
    block[k, :] = 0.0
    block[:, k] = 0.0
    return block


def volterra_flags(
    P: HeredityTensor, tolerances: Tolerances | None = None
) -> tuple[tuple[bool, ...], tuple[Witness, ...]]:
    """Evaluate the Volterra condition coordinate by coordinate.

    Returns:
        The flags and, for each False flag, the largest off-parent coefficient.
    """
    tol = get_tolerances(tolerances).zero
    flags = []
    witnesses = []
    for k in range(P.m):
        block = _off_parent(P, k)
        i, j = np.unravel_index(int(np.argmax(block)), block.shape)
        value = float(block[i, j])
        flag = value <= tol
        flags.append(flag)
        if not flag:
            witnesses.append(Witness(k=k, i=int(i), j=int(j), value=value))
    return tuple(flags), tuple(witnesses)


def classify(P: HeredityTensor, tolerances: Tolerances | None = None) -> OperatorClass:
    """Classify a valid tensor as Volterra, ℓ-Volterra or neither.

    The flags must be a prefix of Volterra coordinates; operators whose Volterra
    coordinates are not listed first are NOT_ELL_VOLTERRA (see
    ``volterra_permutation``). ℓ = 0 (no Volterra coordinate) is accepted.
    """
    flags, witnesses = volterra_flags(P, tolerances)
    if all(flags):
        return OperatorClass(OperatorKind.VOLTERRA, P.m, flags, witnesses)
    ell = flags.index(False)
    if not any(flags[ell:]):
        return OperatorClass(OperatorKind.ELL_VOLTERRA, ell, flags, witnesses)
    return OperatorClass(OperatorKind.NOT_ELL_VOLTERRA, None, flags, witnesses)


def volterra_permutation(
    P: HeredityTensor, tolerances: Tolerances | None = None
) -> tuple[tuple[int, ...], HeredityTensor, OperatorClass]:
    """Reorder coordinates so that Volterra ones come first.

    Returns:
        ``perm`` (new coordinate n is old coordinate ``perm[n]``), the permuted
        tensor, and its classification, which is never NOT_ELL_VOLTERRA.
    """
    flags, _ = volterra_flags(P, tolerances)
    perm = tuple([k for k in range(P.m) if flags[k]] + [k for k in range(P.m) if not flags[k]])
    index = np.array(perm)
    permuted = HeredityTensor(P.entries[np.ix_(index, index, index)])
    return perm, permuted, classify(permuted, tolerances)
