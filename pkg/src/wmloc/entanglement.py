"""Two-qubit concurrence and tripartite concurrence of assistance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import SIGMA_Y, dagger, partial_trace, psd_sqrt_batch
from .states import DensityMatrix

YY = np.kron(SIGMA_Y, SIGMA_Y)
CLIP_TOL = 1e-10


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: tuple[float, float, float, float]

    def __float__(self) -> float:
        return self.value


def _as_two_qubit(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"two-qubit density matrix (4x4) required, got shape {m.shape}")
    return m


def spin_flip(rho) -> np.ndarray:
    """Wootters spin flip ``(sy x sy) rho* (sy x sy)``; works on stacks too."""
    m = _as_two_qubit(rho)
    return YY @ np.conj(m) @ YY


def concurrence_lambdas(rhos) -> np.ndarray:
    """Decreasing square-rooted eigenvalues of ``rho rho~`` for a stack of states.

    Each state is normalized by its trace. The values are the singular
    values of ``sqrt(rho) sqrt(rho~)``, whose squares are the eigenvalues of
    the Hermitian ``sqrt(rho) rho~ sqrt(rho)``. Taking singular values
    directly keeps vanishing lambdas at round-off level instead of at the
    square root of round-off.
    """
    m = _as_two_qubit(rhos)
    single = m.ndim == 2
    if single:
        m = m[None]
    tr = np.trace(m, axis1=1, axis2=2).real
    if np.any(tr <= 0.0):
        raise ValueError("concurrence of a zero-trace state is undefined")
    m = m / tr[:, None, None]
    root = psd_sqrt_batch(m)
    root_flip = YY @ np.conj(root) @ YY
    lam = _kernels.svdvals_batch(root @ root_flip)
    return lam[0] if single else lam


def concurrence_values(rhos) -> np.ndarray:
    lam = concurrence_lambdas(rhos)
    return np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])


def concurrence(rho) -> ConcurrenceResult:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)`` of a two-qubit state."""
    lam = concurrence_lambdas(_as_two_qubit(rho))
    value = max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))
    return ConcurrenceResult(min(value, 1.0), tuple(float(x) for x in lam))


def concurrence_shortcut(rho) -> np.ndarray | float:
    """``2 |rho_{10,01}| / tr(rho)``.

    Exact only when the ``|11>`` population vanishes, as it does for every
    single-excitation state passed through the protocols here.
    """
    m = _as_two_qubit(rho)
    tr = np.trace(m, axis1=-2, axis2=-1).real
    val = 2.0 * np.abs(m[..., 2, 1]) / tr
    return float(val) if np.ndim(val) == 0 else val


def concurrence_pure(phi) -> float:
    """``2|ad - bc| / <phi|phi>`` for a (possibly unnormalized) two-qubit vector."""
    a, b, c, d = np.asarray(phi, dtype=complex).reshape(4)
    norm = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    if norm == 0.0:
        return 0.0
    return 2.0 * abs(a * d - b * c) / norm


def _pure_vector(psi) -> np.ndarray:
    v = psi.matrix if isinstance(psi, DensityMatrix) else np.asarray(psi, dtype=complex)
    if v.ndim == 2:
        m = psi.normalized() if isinstance(psi, DensityMatrix) else v / np.trace(v)
        purity = float(np.trace(m @ m).real)
        if abs(purity - 1.0) > 1e-10:
            raise ValueError("concurrence of assistance is only defined here for pure states")
        w, vecs = np.linalg.eigh(m)
        v = vecs[:, -1]
    v = v.reshape(-1)
    if v.shape != (8,):
        raise ValueError(f"three-qubit state vector required, got {v.shape[0]} amplitudes")
    norm = float(np.vdot(v, v).real)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state vector is not normalized (norm^2 = {norm!r})")
    return v


def _check_pair(pair) -> tuple[int, int]:
    i, j = sorted(int(x) for x in pair)
    if i == j or not {i, j} <= {1, 2, 3}:
        raise ValueError(f"pair must name two distinct qubits out of 1..3, got {pair!r}")
    return i, j


def reduced_pair(rho3: np.ndarray, pair=(1, 2)) -> np.ndarray:
    i, j = _check_pair(pair)
    (other,) = {1, 2, 3} - {i, j}
    return partial_trace(rho3, 3, [other])


def concurrence_of_assistance(psi, pair=(1, 2)) -> float:
    """Concurrence of assistance of a pure three-qubit state for ``pair``.

    Equal to ``l1 + l2 + l3 + l4`` of the reduced two-qubit state.
    """
    v = _pure_vector(psi)
    rho = reduced_pair(np.outer(v, np.conj(v)), pair)
    return float(np.sum(concurrence_lambdas(rho)))


def _basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([c, e * s]), np.array([s, -e * c])


def assisted_average(psi, theta: float, phi: float, assistant: int = 3) -> float:
    """Average pair concurrence after measuring ``assistant`` in a rotated basis.

    The basis is ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`` and its
    orthogonal complement; ``theta = 0`` is the computational basis.
    """
    v = _pure_vector(psi).reshape(2, 2, 2)
    if assistant not in (1, 2, 3):
        raise ValueError(f"assistant qubit must be 1, 2 or 3, got {assistant!r}")
    total = 0.0
    for b in _basis(theta, phi):
        cond = np.tensordot(np.conj(b), v, axes=([0], [assistant - 1])).reshape(4)
        a, bb, c, d = cond
        total += 2.0 * abs(a * d - bb * c)
    return total


def coa_search(psi, pair=(1, 2), n_theta: int = 181, n_phi: int = 360, refine: bool = True) -> tuple[float, float, float]:
    """Maximize :func:`assisted_average` over the assistant's measurement basis.

    Scans an ``n_theta x n_phi`` grid, then (optionally) a grid one cell wide
    around the best point. Returns ``(value, theta, phi)``.
    """
    i, j = _check_pair(pair)
    (assistant,) = {1, 2, 3} - {i, j}
    v = _pure_vector(psi)

    w = np.moveaxis(v.reshape(2, 2, 2), assistant - 1, 0).reshape(2, 4)

    def averages(t, f):
        c, s, e = np.cos(t / 2), np.sin(t / 2), np.exp(-1j * f)
        total = 0.0
        for b0, b1 in ((c, e * s), (s, -e * c)):  # conjugated basis amplitudes
            a, bb, cc, d = np.moveaxis(b0[..., None] * w[0] + b1[..., None] * w[1], -1, 0)
            total = total + 2.0 * np.abs(a * d - bb * cc)
        return total

    def scan(thetas, phis):
        t, f = np.meshgrid(thetas, phis, indexing="ij")
        vals = averages(t, f)
        k = np.unravel_index(np.argmax(vals), vals.shape)
        return float(vals[k]), float(t[k]), float(f[k])

    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    best = scan(thetas, phis)
    if refine:
        dt = thetas[1] - thetas[0]
        dp = phis[1] - phis[0]
        fine = scan(
            np.clip(np.linspace(best[1] - dt, best[1] + dt, 21), 0.0, np.pi),
            np.linspace(best[2] - dp, best[2] + dp, 21),
        )
        best = max(best, fine)
    return best


def transformable_to(psi, target, pair=(1, 2), tol: float = 1e-12) -> bool:
    """Whether the assistance bound allows ``psi`` to yield the two-qubit ``target``.

    Checks ``COA(psi) >= C(target)`` for a pure two-qubit ``target``. This
    is the inequality only; no transformation protocol is constructed.
    """
    target = np.asarray(target, dtype=complex).reshape(-1)
    if target.shape != (4,):
        raise ValueError(f"two-qubit target vector required, got {target.shape[0]} amplitudes")
    return concurrence_of_assistance(psi, pair) >= concurrence_pure(target) - tol
