"""Batched numeric kernels: cyclic Jacobi eigensolver, one-sided Jacobi
singular values, and single-qubit operator congruence.

Every kernel exists twice. The loop form is compiled with ``numba.njit``
when numba is importable; the numpy form vectorizes the same algorithm
across the batch axis and is used when numba is missing or when the
environment sets ``WMLOC_DISABLE_NUMBA=1``. Both forms take stacked
arrays with a leading batch axis.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("WMLOC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError("numba disabled by WMLOC_DISABLE_NUMBA")
    import numba

    _njit = numba.njit(cache=True, nogil=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag in a subprocess test
    numba = None
    HAVE_NUMBA = False

    def _njit(fn):
        return fn


BACKEND = "numba" if HAVE_NUMBA else "numpy"

EIGH_TOL = 1e-13
SVD_TOL = 1e-15
MAX_SWEEPS = 100
# off-diagonal magnitudes below this are left alone: dividing by them can
# overflow, and they are far below anything a unit-trace state resolves
TINY = 1e-280


def _resolve(backend):
    if backend is None:
        return BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    return backend


# ---------------------------------------------------------------------------
# loop kernels (compiled by numba when available)
# ---------------------------------------------------------------------------


@_njit
def _rotation(app, aqq, mag):
    # NR-style Jacobi angle for [[app, mag], [mag, aqq]]; returns t, c, s
    theta = (aqq - app) / (2.0 * mag)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    return t, c, t * c


@_njit
def _eigh_loop(h, tol, max_sweeps):
    nb, n, _ = h.shape
    w = np.empty((nb, n))
    vecs = np.empty((nb, n, n), dtype=np.complex128)
    for k in range(nb):
        a = h[k].copy()
        v = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            v[i, i] = 1.0
        norm = 0.0
        for i in range(n):
            for j in range(n):
                norm += a[i, j].real ** 2 + a[i, j].imag ** 2
        norm = np.sqrt(norm)
        for _sweep in range(max_sweeps):
            off = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
            if np.sqrt(2.0 * off) <= tol * norm:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    b = a[p, q]
                    mag = abs(b)
                    if mag <= TINY:
                        continue
                    ph = np.conj(b / mag)
                    app = a[p, p].real
                    aqq = a[q, q].real
                    t, c, s = _rotation(app, aqq, mag)
                    uqp = -s * ph
                    uqq = c * ph
                    for r in range(n):
                        x = a[r, p]
                        y = a[r, q]
                        a[r, p] = x * c + y * uqp
                        a[r, q] = x * s + y * uqq
                    for r in range(n):
                        x = a[p, r]
                        y = a[q, r]
                        a[p, r] = c * x + np.conj(uqp) * y
                        a[q, r] = s * x + np.conj(uqq) * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = app - t * mag
                    a[q, q] = aqq + t * mag
                    for r in range(n):
                        x = v[r, p]
                        y = v[r, q]
                        v[r, p] = x * c + y * uqp
                        v[r, q] = x * s + y * uqq
        d = np.empty(n)
        for i in range(n):
            d[i] = a[i, i].real
        order = np.argsort(-d)
        for i in range(n):
            w[k, i] = d[order[i]]
            for r in range(n):
                vecs[k, r, i] = v[r, order[i]]
    return w, vecs


@_njit
def _svdvals_loop(m, tol, max_sweeps):
    nb, rows, n = m.shape
    out = np.empty((nb, n))
    for k in range(nb):
        u = m[k].copy()
        for _sweep in range(max_sweeps):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gamma = 0.0 + 0.0j
                    for r in range(rows):
                        alpha += u[r, p].real ** 2 + u[r, p].imag ** 2
                        beta += u[r, q].real ** 2 + u[r, q].imag ** 2
                        gamma += np.conj(u[r, p]) * u[r, q]
                    mag = abs(gamma)
                    if mag <= TINY or mag <= tol * np.sqrt(alpha * beta):
                        continue
                    rotated = True
                    ph = np.conj(gamma / mag)
                    _t, c, s = _rotation(alpha, beta, mag)
                    uqp = -s * ph
                    uqq = c * ph
                    for r in range(rows):
                        x = u[r, p]
                        y = u[r, q]
                        u[r, p] = x * c + y * uqp
                        u[r, q] = x * s + y * uqq
            if not rotated:
                break
        norms = np.empty(n)
        for j in range(n):
            acc = 0.0
            for r in range(rows):
                acc += u[r, j].real ** 2 + u[r, j].imag ** 2
            norms[j] = np.sqrt(acc)
        order = np.argsort(-norms)
        for j in range(n):
            out[k, j] = norms[order[j]]
    return out


@_njit
def _congruence_loop(rho, ops, shift):
    nb, d, _ = rho.shape
    bit = 1 << shift
    out = np.empty_like(rho)
    tmp = np.empty((d, d), dtype=np.complex128)
    for k in range(nb):
        op = ops[k]
        for i in range(d):
            bi = (i >> shift) & 1
            i0 = i & ~bit
            i1 = i | bit
            for j in range(d):
                tmp[i, j] = op[bi, 0] * rho[k, i0, j] + op[bi, 1] * rho[k, i1, j]
        for i in range(d):
            for j in range(d):
                bj = (j >> shift) & 1
                j0 = j & ~bit
                j1 = j | bit
                out[k, i, j] = tmp[i, j0] * np.conj(op[bj, 0]) + tmp[i, j1] * np.conj(op[bj, 1])
    return out


@_njit
def _kraus_loop(rho, ops, shift):
    # fold the Kraus set into its 4x4 superoperator first, so each output
    # entry costs four products however many operators there are
    nb, d, _ = rho.shape
    nk = ops.shape[1]
    bit = 1 << shift
    out = np.empty_like(rho)
    sup = np.empty((2, 2, 2, 2), dtype=np.complex128)
    for k in range(nb):
        for a in range(2):
            for c in range(2):
                for a2 in range(2):
                    for c2 in range(2):
                        acc = 0j
                        for m in range(nk):
                            acc += ops[k, m, a, a2] * np.conj(ops[k, m, c, c2])
                        sup[a, c, a2, c2] = acc
        for i in range(d):
            a = (i >> shift) & 1
            i0 = i & ~bit
            i1 = i | bit
            for j in range(d):
                c = (j >> shift) & 1
                j0 = j & ~bit
                j1 = j | bit
                out[k, i, j] = (
                    sup[a, c, 0, 0] * rho[k, i0, j0]
                    + sup[a, c, 0, 1] * rho[k, i0, j1]
                    + sup[a, c, 1, 0] * rho[k, i1, j0]
                    + sup[a, c, 1, 1] * rho[k, i1, j1]
                )
    return out


@_njit
def _diag_loop(rho, diags, shift):
    nb, d, _ = rho.shape
    out = np.empty_like(rho)
    for k in range(nb):
        for i in range(d):
            si = diags[k, (i >> shift) & 1]
            for j in range(d):
                out[k, i, j] = rho[k, i, j] * (si * diags[k, (j >> shift) & 1])
    return out


@_njit
def _diag_loop_complex(rho, diags, shift):
    nb, d, _ = rho.shape
    out = np.empty_like(rho)
    for k in range(nb):
        for i in range(d):
            si = diags[k, (i >> shift) & 1]
            for j in range(d):
                out[k, i, j] = rho[k, i, j] * (si * np.conj(diags[k, (j >> shift) & 1]))
    return out


# ---------------------------------------------------------------------------
# numpy kernels (same algorithms, vectorized over the batch axis)
# ---------------------------------------------------------------------------


def _rotation_np(app, aqq, mag):
    active = mag > TINY
    safe = np.where(active, mag, 1.0)
    theta = (aqq - app) / (2.0 * safe)
    big = np.abs(theta) > 1e150
    theta_c = np.where(big, 1.0, theta)
    t = 1.0 / (np.abs(theta_c) + np.sqrt(theta_c * theta_c + 1.0))
    t = np.where(theta_c < 0.0, -t, t)
    t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    return t, c, t * c, active, safe


def _eigh_numpy(h, tol, max_sweeps):
    a = np.array(h, dtype=np.complex128, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    iu = np.triu_indices(n, 1)
    for _sweep in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off <= tol * norm):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[:, p, q]
                mag = np.abs(b)
                app = a[:, p, p].real.copy()
                aqq = a[:, q, q].real.copy()
                t, c, s, active, safe = _rotation_np(app, aqq, mag)
                ph = np.where(active, np.conj(b / safe), 1.0)
                uqp = -s * ph
                uqq = c * ph
                x = a[:, :, p].copy()
                y = a[:, :, q]
                a[:, :, p] = x * c[:, None] + y * uqp[:, None]
                a[:, :, q] = x * s[:, None] + y * uqq[:, None]
                x = a[:, p, :].copy()
                y = a[:, q, :]
                a[:, p, :] = c[:, None] * x + np.conj(uqp)[:, None] * y
                a[:, q, :] = s[:, None] * x + np.conj(uqq)[:, None] * y
                a[active, p, q] = 0.0
                a[active, q, p] = 0.0
                a[:, p, p] = np.where(active, app - t * mag, a[:, p, p])
                a[:, q, q] = np.where(active, aqq + t * mag, a[:, q, q])
                x = v[:, :, p].copy()
                y = v[:, :, q]
                v[:, :, p] = x * c[:, None] + y * uqp[:, None]
                v[:, :, q] = x * s[:, None] + y * uqq[:, None]
    d = np.diagonal(a, axis1=1, axis2=2).real
    order = np.argsort(-d, axis=1, kind="stable")
    w = np.take_along_axis(d, order, axis=1)
    vecs = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, vecs


def _svdvals_numpy(m, tol, max_sweeps):
    u = np.array(m, dtype=np.complex128, copy=True)
    n = u.shape[2]
    for _sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                up = u[:, :, p]
                uq = u[:, :, q]
                alpha = np.sum(np.abs(up) ** 2, axis=1)
                beta = np.sum(np.abs(uq) ** 2, axis=1)
                gamma = np.sum(np.conj(up) * uq, axis=1)
                mag = np.abs(gamma)
                need = (mag > TINY) & (mag > tol * np.sqrt(alpha * beta))
                if not np.any(need):
                    continue
                rotated = True
                mag = np.where(need, mag, 0.0)
                _t, c, s, active, safe = _rotation_np(alpha, beta, mag)
                ph = np.where(active, np.conj(gamma / safe), 1.0)
                uqp = -s * ph
                uqq = c * ph
                x = up.copy()
                y = uq.copy()
                u[:, :, p] = x * c[:, None] + y * uqp[:, None]
                u[:, :, q] = x * s[:, None] + y * uqq[:, None]
        if not rotated:
            break
    norms = np.sqrt(np.sum(np.abs(u) ** 2, axis=1))
    return -np.sort(-norms, axis=1)


def _congruence_numpy(rho, ops, shift, n_qubits):
    nb, d, _ = rho.shape
    left = 1 << (n_qubits - 1 - shift)
    right = 1 << shift
    r = rho.reshape(nb, left, 2, right, d)
    tmp = np.einsum("bij,bljrc->blirc", ops, r).reshape(nb, d, left, 2, right)
    out = np.einsum("bxljr,bij->bxlir", tmp, np.conj(ops))
    return out.reshape(nb, d, d)


def _kraus_numpy(rho, ops, shift, n_qubits):
    nb, d, _ = rho.shape
    left = 1 << (n_qubits - 1 - shift)
    right = 1 << shift
    r = rho.reshape(nb, left, 2, right, d)
    tmp = np.einsum("bkij,bljrc->bklirc", ops, r).reshape(nb, ops.shape[1], d, left, 2, right)
    out = np.einsum("bkxljr,bkij->bxlir", tmp, np.conj(ops))
    return out.reshape(nb, d, d)


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------


def eigh_batch(h, tol=EIGH_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Eigen-decompose a stack of Hermitian matrices by cyclic Jacobi.

    Returns eigenvalues sorted descending, shape (B, n), and the matching
    eigenvectors as columns, shape (B, n, n).
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if _resolve(backend) == "numba":
        return _eigh_loop(h, tol, max_sweeps)
    return _eigh_numpy(h, tol, max_sweeps)


def svdvals_batch(m, tol=SVD_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Singular values (descending) of a stack of matrices by one-sided Jacobi."""
    m = np.ascontiguousarray(m, dtype=np.complex128)
    if _resolve(backend) == "numba":
        return _svdvals_loop(m, tol, max_sweeps)
    return _svdvals_numpy(m, tol, max_sweeps)


def congruence_batch(rho, ops, qubit, n_qubits, backend=None):
    """Compute ``L rho L^dagger`` where ``L`` is ``ops[b]`` acting on ``qubit``.

    ``qubit`` is 1-based with qubit 1 as the most significant bit.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    if ops.ndim == 2:
        ops = np.broadcast_to(ops, (rho.shape[0], 2, 2)).copy()
    shift = n_qubits - qubit
    if _resolve(backend) == "numba":
        return _congruence_loop(rho, ops, shift)
    return _congruence_numpy(rho, ops, shift, n_qubits)


def kraus_batch(rho, ops, qubit, n_qubits, backend=None):
    """Kraus sum ``sum_k L_k rho L_k^dagger`` on ``qubit``; ``ops`` is (B, K, 2, 2)."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    if ops.ndim == 3:
        ops = np.broadcast_to(ops, (rho.shape[0],) + ops.shape).copy()
    shift = n_qubits - qubit
    if _resolve(backend) == "numba":
        return _kraus_loop(rho, ops, shift)
    return _kraus_numpy(rho, ops, shift, n_qubits)


def diag_congruence_batch(rho, diags, qubit, n_qubits, backend=None):
    """``L rho L^dagger`` for diagonal single-qubit ``L = diag(diags[b])``.

    A diagonal element only rescales entries, so both forms are elementwise.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    diags = np.asarray(diags)
    if np.iscomplexobj(diags) and not np.any(diags.imag):
        diags = diags.real  # real scale factors halve the multiply cost
    if diags.ndim == 1:
        diags = np.broadcast_to(diags, (rho.shape[0], 2))
    shift = n_qubits - qubit
    if _resolve(backend) == "numba":
        if np.iscomplexobj(diags):
            return _diag_loop_complex(rho, np.ascontiguousarray(diags, dtype=np.complex128), shift)
        return _diag_loop(rho, np.ascontiguousarray(diags, dtype=np.float64), shift)
    bits = (np.arange(rho.shape[-1]) >> shift) & 1
    full = diags[:, bits]
    return rho * (full[:, :, None] * np.conj(full)[:, None, :])
