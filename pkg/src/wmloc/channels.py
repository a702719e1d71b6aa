"""Single-qubit noise channels in Kraus form.

Amplitude damping (``ad``) models excitation loss with decay probability
``D``; depolarizing (``dp``) maps ``rho -> (1 - D) rho + D I/2``; phase
damping (``pd``) shrinks coherences by ``sqrt(1 - D)``. Channels act on one
qubit of a register through the Kraus sum, so the environment never has to
be represented explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, _check_qubit, dagger
from .states import DensityMatrix

COMPLETENESS_TOL = 1e-12
NOISE_KINDS = ("none", "ad", "dp", "pd")


def _check_strength(d: float) -> float:
    d = float(d)
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"channel strength must lie in [0, 1], got {d!r}")
    return d


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kind: str
    strength: float
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        object.__setattr__(self, "operators", ops)
        resid = completeness_residual(ops)
        if resid > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (residual {resid:.3e})")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a single-qubit density matrix."""
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ dagger(k) for k in self.operators)


def completeness_residual(operators) -> float:
    total = sum(dagger(k) @ k for k in operators)
    return float(np.max(np.abs(total - IDENTITY_2)))


def _ad_ops(d):
    d = np.asarray(d, dtype=float)
    ops = np.zeros(d.shape + (2, 2, 2), dtype=complex)
    ops[..., 0, 0, 0] = 1.0
    ops[..., 0, 1, 1] = np.sqrt(1.0 - d)
    ops[..., 1, 0, 1] = np.sqrt(d)
    return ops


def _dp_ops(d):
    d = np.asarray(d, dtype=float)
    paulis = np.stack([IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z])
    weights = np.stack([np.sqrt(1.0 - 0.75 * d)] + [np.sqrt(0.25 * d)] * 3, axis=-1)
    return weights[..., None, None] * paulis


def _pd_ops(d):
    d = np.asarray(d, dtype=float)
    ops = np.zeros(d.shape + (2, 2, 2), dtype=complex)
    ops[..., 0, 0, 0] = 1.0
    ops[..., 0, 1, 1] = np.sqrt(1.0 - d)
    ops[..., 1, 1, 1] = np.sqrt(d)
    return ops


_BUILDERS = {"ad": _ad_ops, "dp": _dp_ops, "pd": _pd_ops}


def kraus_stack(kind: str, d) -> np.ndarray:
    """Kraus operators for an array of strengths, shape ``d.shape + (K, 2, 2)``."""
    try:
        build = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; choose from {', '.join(NOISE_KINDS)}") from None
    d = np.asarray(d, dtype=float)
    if np.any((d < 0.0) | (d > 1.0)) or not np.all(np.isfinite(d)):
        raise ValueError("channel strengths must lie in [0, 1]")
    return build(d)


def amplitude_damping(d: float) -> KrausChannel:
    """``K0 = diag(1, sqrt(1-D))``, ``K1 = sqrt(D) |0><1|``."""
    d = _check_strength(d)
    return KrausChannel("ad", d, tuple(_ad_ops(d)))


def depolarizing(d: float) -> KrausChannel:
    d = _check_strength(d)
    return KrausChannel("dp", d, tuple(_dp_ops(d)))


def phase_damping(d: float) -> KrausChannel:
    d = _check_strength(d)
    return KrausChannel("pd", d, tuple(_pd_ops(d)))


def make_channel(kind: str, d: float) -> KrausChannel:
    if kind == "none":
        return KrausChannel("none", 0.0, (IDENTITY_2,))
    factories = {"ad": amplitude_damping, "dp": depolarizing, "pd": phase_damping}
    try:
        return factories[kind](d)
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; choose from {', '.join(NOISE_KINDS)}") from None


def apply_kraus_batch(rho: np.ndarray, ops: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Kraus sum on ``qubit`` for a stack of states; ``ops`` has shape (B, K, 2, 2)."""
    return _kernels.kraus_batch(rho, ops, qubit, n_qubits)


def apply_on_qubit(channel: KrausChannel, rho: DensityMatrix, qubit: int) -> DensityMatrix:
    """Apply ``channel`` to one qubit of ``rho``; the weight is unchanged."""
    n = rho.n_qubits
    _check_qubit(qubit, n)
    ops = np.stack(channel.operators)[None]
    out = apply_kraus_batch(rho.matrix[None], ops, qubit, n)[0]
    return DensityMatrix(out, rho.weight)
