"""Initial states: the single-excitation W-like family, the noisy GW mixture,
and density-matrix bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import dagger, hermiticity_residual, hermitian_eigs, n_qubits_of

NORM_TOL = 1e-9
VALID_TOL = 1e-10

DEFAULT_COEFFS = (0.5, 0.5, 1 / math.sqrt(2))
EQUAL_W = (1 / math.sqrt(3),) * 3
GW_COEFFS = (0.4, 0.4, math.sqrt(17) / 5)
GW_NOISE = 0.1


@dataclass(frozen=True)
class WLikeCoefficients:
    """Real amplitudes of ``a1|100> + a2|010> + a3|001>``."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        coeffs = (self.a1, self.a2, self.a3)
        if any(not math.isfinite(a) or a < 0 for a in coeffs):
            raise ValueError(f"W-like coefficients must be finite and non-negative, got {coeffs}")
        norm = sum(a * a for a in coeffs)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"W-like coefficients are not normalized (sum of squares {norm!r})")

    @classmethod
    def normalized(cls, a1: float, a2: float, a3: float) -> tuple["WLikeCoefficients", float]:
        """Rescale arbitrary non-negative amplitudes; returns the coefficients and the factor applied."""
        norm = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
        if norm == 0.0:
            raise ValueError("all W-like coefficients are zero")
        factor = 1.0 / norm
        return cls(a1 * factor, a2 * factor, a3 * factor), factor

    def astuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A density matrix whose trace equals ``weight``.

    Postselection leaves states unnormalized; ``weight`` carries the
    accumulated success probability so the trace is never renormalized
    behind the caller's back.
    """

    matrix: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        n_qubits_of(m.shape[0])
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.matrix.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> np.ndarray:
        tr = self.trace
        if tr <= 0.0:
            raise ValueError("cannot normalize a zero-trace state")
        return self.matrix / tr

    def purity(self) -> float:
        rho = self.normalized()
        return float(np.trace(rho @ rho).real)


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_residual: float
    min_eigenvalue: float
    trace_deviation: float
    tol: float = VALID_TOL

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity_residual <= self.tol
            and self.min_eigenvalue >= -self.tol
            and self.trace_deviation <= self.tol
        )


def w_like(coeffs: WLikeCoefficients | tuple[float, float, float]) -> np.ndarray:
    """Three-qubit state vector ``a1|100> + a2|010> + a3|001>``."""
    if not isinstance(coeffs, WLikeCoefficients):
        coeffs = WLikeCoefficients(*coeffs)
    psi = np.zeros(8, dtype=complex)
    psi[0b100] = coeffs.a1
    psi[0b010] = coeffs.a2
    psi[0b001] = coeffs.a3
    return psi


def pure_to_density(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state vector is not normalized (norm^2 = {norm!r})")
    return DensityMatrix(np.outer(psi, np.conj(psi)), 1.0)


def gw_mixed() -> DensityMatrix:
    """White-noise mixture ``0.1/8 I + 0.9 |GW><GW|``."""
    gw = w_like(GW_COEFFS)
    rho = (GW_NOISE / 8) * np.eye(8) + (1 - GW_NOISE) * np.outer(gw, np.conj(gw))
    return DensityMatrix(rho, 1.0)


def validate(rho: DensityMatrix | np.ndarray, tol: float = VALID_TOL) -> ValidationReport:
    """Report Hermiticity residual, smallest eigenvalue and trace-vs-weight gap."""
    if isinstance(rho, DensityMatrix):
        m, weight = rho.matrix, rho.weight
    else:
        m = np.asarray(rho, dtype=complex)
        weight = 1.0
    herm = hermiticity_residual(m)
    w, _ = hermitian_eigs(0.5 * (m + dagger(m)), tol=np.inf)
    return ValidationReport(
        hermiticity_residual=herm,
        min_eigenvalue=float(w[-1]),
        trace_deviation=abs(float(np.trace(m).real) - weight),
        tol=tol,
    )


PRESETS = ("paper-default", "equal-w", "gw-mixed", "w:a1,a2,a3")


@dataclass(frozen=True)
class InitialState:
    name: str
    rho: DensityMatrix
    coefficients: WLikeCoefficients | None
    normalization: float = 1.0

    @property
    def is_default_state(self) -> bool:
        if self.coefficients is None:
            return False
        return all(abs(a - b) <= 1e-12 for a, b in zip(self.coefficients.astuple(), DEFAULT_COEFFS))

    @property
    def psi(self) -> np.ndarray | None:
        return None if self.coefficients is None else w_like(self.coefficients)


def resolve_initial(name: str) -> InitialState:
    """Look up an initial-state preset.

    ``w:a1,a2,a3`` takes arbitrary non-negative amplitudes and normalizes
    them; the factor applied is kept in ``normalization``.
    """
    key = name.strip().lower()
    if key == "paper-default":
        c = WLikeCoefficients(*DEFAULT_COEFFS)
        return InitialState(key, pure_to_density(w_like(c)), c)
    if key == "equal-w":
        c = WLikeCoefficients(*EQUAL_W)
        return InitialState(key, pure_to_density(w_like(c)), c)
    if key == "gw-mixed":
        return InitialState(key, gw_mixed(), None)
    if key.startswith("w:") or key.startswith("w-"):
        parts = key[2:].replace(";", ",").split(",")
        try:
            values = [float(x) for x in parts]
        except ValueError:
            raise ValueError(f"bad W-like coefficients in {name!r}") from None
        if len(values) != 3:
            raise ValueError(f"expected three coefficients in {name!r}")
        c, factor = WLikeCoefficients.normalized(*values)
        return InitialState(key, pure_to_density(w_like(c)), c, factor)
    raise ValueError(f"unknown initial state {name!r}; choose from {', '.join(PRESETS)}")
