"""Independent reference implementations used by the tests.

Everything here is written against plain numpy with explicit Kronecker
products and ``numpy.linalg``; none of it imports the package under test.
"""

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def on_qubit(op, qubit, n=3):
    """Full-register operator acting as ``op`` on ``qubit`` (1-based, MSB first)."""
    return reduce(np.kron, [op if k == qubit else I2 for k in range(1, n + 1)])


def ptrace(rho, n, keep):
    """Partial trace by explicit index loops; ``keep`` is a sorted list of 1-based qubits."""
    dim_k = 2 ** len(keep)
    out = np.zeros((dim_k, dim_k), dtype=complex)
    for i in range(2**n):
        for j in range(2**n):
            bi = [(i >> (n - k)) & 1 for k in range(1, n + 1)]
            bj = [(j >> (n - k)) & 1 for k in range(1, n + 1)]
            if any(bi[k - 1] != bj[k - 1] for k in range(1, n + 1) if k not in keep):
                continue
            r = int("".join(str(bi[k - 1]) for k in keep), 2)
            c = int("".join(str(bj[k - 1]) for k in keep), 2)
            out[r, c] += rho[i, j]
    return out


def wootters(rho):
    """Textbook concurrence from the eigenvalues of ``rho @ rho_tilde``."""
    rho = rho / np.trace(rho)
    yy = np.kron(SY, SY)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r))))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def w_vector(a1, a2, a3):
    psi = np.zeros(8, dtype=complex)
    psi[4], psi[2], psi[1] = a1, a2, a3
    return psi


def kraus_ops(kind, d):
    if kind == "ad":
        return [np.array([[1, 0], [0, np.sqrt(1 - d)]]), np.array([[0, np.sqrt(d)], [0, 0]])]
    if kind == "dp":
        return [np.sqrt(1 - 3 * d / 4) * I2] + [np.sqrt(d / 4) * s for s in (X, SY, Z)]
    if kind == "pd":
        return [np.array([[1, 0], [0, np.sqrt(1 - d)]]), np.array([[0, 0], [0, np.sqrt(d)]])]
    raise ValueError(kind)


def apply_op(rho, op, qubit):
    m = on_qubit(op, qubit)
    return m @ rho @ m.conj().T


def apply_channel(rho, kind, d, qubit):
    return sum(apply_op(rho, k, qubit) for k in kraus_ops(kind, d))


def weak(p):
    return np.diag([1.0, np.sqrt(1 - p)])


def reversal(q):
    return np.diag([np.sqrt(1 - q), 1.0])


def pipeline(strategy, rho, p=(0, 0, 0), q=(0, 0, 0), noise="none", d=(0, 0)):
    """Reference protocol run; returns (unnormalized final state, pair concurrence)."""
    rho = np.array(rho, dtype=complex)
    sites = (1, 2) if strategy == "distributed" else (3,)
    for s in sites:
        rho = apply_op(rho, weak(p[s - 1]), s)
    if noise != "none":
        rho = apply_channel(rho, noise, d[0], 1)
        rho = apply_channel(rho, noise, d[1], 2)
    for s in sites:
        rho = apply_op(rho, reversal(q[s - 1]), s)
    return rho, wootters(ptrace(rho, 3, [1, 2]))


def default_rho():
    psi = w_vector(0.5, 0.5, 1 / np.sqrt(2))
    return np.outer(psi, psi.conj())
