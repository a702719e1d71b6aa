"""Postselected single-qubit measurement elements.

The weak measurement keeps only its null ("no click") branch,
``diag(1, sqrt(1-p))``, which nudges the qubit toward ``|0>``. The reversal
``diag(sqrt(1-q), 1)`` is the same element conjugated by a bit flip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import _check_qubit
from .states import DensityMatrix

POSTSELECTION_FLOOR = 1e-15


def _check_strength(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


@dataclass(frozen=True, eq=False)
class PostselectedOp:
    operator: np.ndarray
    label: str

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError(f"postselected operator must be 2x2, got {op.shape}")
        if np.any(np.abs(op.imag) > 0) or np.any(op.real < 0) or np.any(op.real > 1):
            raise ValueError("postselected operator entries must be real and within [0, 1]")
        object.__setattr__(self, "operator", op)


def weak_meas(p: float) -> PostselectedOp:
    p = _check_strength(p, "weak measurement strength")
    return PostselectedOp(np.diag([1.0, np.sqrt(1.0 - p)]), f"weak({p:g})")


def weak_click(p: float) -> PostselectedOp:
    """The complementary click element ``diag(0, sqrt(p))`` of :func:`weak_meas`."""
    p = _check_strength(p, "weak measurement strength")
    return PostselectedOp(np.diag([0.0, np.sqrt(p)]), f"click({p:g})")


def reversal_meas(q: float) -> PostselectedOp:
    q = _check_strength(q, "reversal strength")
    return PostselectedOp(np.diag([np.sqrt(1.0 - q), 1.0]), f"reversal({q:g})")


def projector(outcome: int) -> PostselectedOp:
    if outcome not in (0, 1):
        raise ValueError(f"projector outcome must be 0 or 1, got {outcome!r}")
    diag = [1.0, 0.0] if outcome == 0 else [0.0, 1.0]
    return PostselectedOp(np.diag(diag), f"project{outcome}")


def weak_diagonals(p) -> np.ndarray:
    """Diagonals of :func:`weak_meas` for an array of strengths, shape ``p.shape + (2,)``."""
    p = np.asarray(p, dtype=float)
    return np.stack([np.ones_like(p), np.sqrt(1.0 - p)], axis=-1)


def reversal_diagonals(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.stack([np.sqrt(1.0 - q), np.ones_like(q)], axis=-1)


def postselection_impossible(prob: float) -> bool:
    return prob < POSTSELECTION_FLOOR


def apply_postselected(op: PostselectedOp, rho: DensityMatrix, qubit: int) -> tuple[DensityMatrix, float]:
    """Apply a postselected element to one qubit.

    Returns the unnormalized conditional state ``M rho M^dagger`` (its
    weight is the input weight times the success probability) and the
    conditional success probability ``tr(M rho M^dagger) / tr(rho)``.
    Callers should treat a probability below ``POSTSELECTION_FLOOR`` as an
    impossible postselection; see :func:`postselection_impossible`.
    """
    n = rho.n_qubits
    _check_qubit(qubit, n)
    tr_in = rho.trace
    if rho.weight <= 0.0 or tr_in <= 0.0:
        raise ValueError("cannot postselect on a state with zero weight")
    out = _kernels.congruence_batch(rho.matrix[None], op.operator, qubit, n)[0]
    prob = max(float(np.trace(out).real) / tr_in, 0.0)
    return DensityMatrix(out, rho.weight * prob), prob
