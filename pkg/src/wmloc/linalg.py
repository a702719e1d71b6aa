"""Small dense complex linear algebra for registers of up to a few qubits.

Matrices are plain ``numpy`` complex arrays. Qubits are labelled from 1,
and qubit 1 is the most significant bit of a computational-basis index,
so ``|q1 q2 q3>`` maps to index ``4*q1 + 2*q2 + q3``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from . import _kernels

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def dagger(a) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product with the first factor as the most significant index."""
    return np.kron(as_matrix(a), as_matrix(b))


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def lift(op, qubit: int, n_qubits: int) -> np.ndarray:
    """Embed a single-qubit operator on ``qubit`` of an ``n_qubits`` register."""
    _check_qubit(qubit, n_qubits)
    left = np.eye(2 ** (qubit - 1), dtype=complex)
    right = np.eye(2 ** (n_qubits - qubit), dtype=complex)
    return np.kron(np.kron(left, as_matrix(op)), right)


def _check_qubit(qubit: int, n_qubits: int) -> None:
    if not 1 <= int(qubit) <= n_qubits:
        raise ValueError(f"qubit index {qubit} out of range 1..{n_qubits}")


def partial_trace(rho, n_qubits: int, traced: Iterable[int]) -> np.ndarray:
    """Trace out the qubits in ``traced`` (1-based); remaining order is kept.

    Accepts a single ``(2**n, 2**n)`` matrix or a stack ``(B, 2**n, 2**n)``.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = 2**n_qubits
    if rho.shape[-2:] != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} matrices for {n_qubits} qubits, got {rho.shape}")
    traced = sorted(set(int(q) for q in traced))
    for q in traced:
        _check_qubit(q, n_qubits)
    keep = [q for q in range(1, n_qubits + 1) if q not in traced]
    batch = rho.shape[:-2]
    t = rho.reshape(batch + (2,) * (2 * n_qubits))
    nb = len(batch)
    letters = "abcdefghijklmnopqrstuvw"
    row = list(letters[:n_qubits])
    col = list(letters[n_qubits : 2 * n_qubits])
    for q in traced:
        col[q - 1] = row[q - 1]
    prefix = "XYZ"[:nb]
    out = prefix + "".join(row[q - 1] for q in keep) + "".join(col[q - 1] for q in keep)
    reduced = np.einsum(f"{prefix}{''.join(row)}{''.join(col)}->{out}", t)
    k = 2 ** len(keep)
    return reduced.reshape(batch + (k, k))


def hermiticity_residual(h) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def hermitian_eigs(h, tol: float = HERMITIAN_TOL):
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    Uses cyclic Jacobi rotations. The columns of the returned matrix are the
    eigenvectors, so ``h == V @ diag(w) @ V^dagger``.

    Raises
    ------
    ValueError
        If ``h`` deviates from Hermitian by more than ``tol``.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"square matrix required, got {h.shape}")
    res = hermiticity_residual(h)
    if res > tol:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")
    h = 0.5 * (h + dagger(h))
    w, v = _kernels.eigh_batch(h[None])
    return w[0], v[0]


def psd_sqrt(h, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian positive-semidefinite square root.

    Eigenvalues in ``[-tol, 0)`` are treated as zero; anything more negative
    is rejected.
    """
    w, v = hermitian_eigs(h)
    if w[-1] < -tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ dagger(v)


def psd_sqrt_batch(h) -> np.ndarray:
    """Stacked variant of :func:`psd_sqrt` without validation; negatives are clipped."""
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + dagger(h))
    w, v = _kernels.eigh_batch(h)
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root[:, None, :]) @ dagger(v)
