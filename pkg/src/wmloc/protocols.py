"""Localization pipelines and their closed-form counterparts.

Three strategies run on the three-qubit register:

``distributed``
    null weak measurements on qubits 1 and 2, optional noise on 1 and 2,
    reversals on 1 and 2.
``fully_local``
    null weak measurement on qubit 3, optional noise on 1 and 2, reversal
    on qubit 3.
``projective_baseline``
    projection of qubit 3 onto ``|0>``.

Every pipeline works on density matrices and tracks the joint success
probability as the trace of the final unnormalized state. The same code
path evaluates a single parameter point or a whole stack of them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping

import numpy as np

from . import _kernels
from .channels import NOISE_KINDS, apply_kraus_batch, kraus_stack
from .entanglement import concurrence_lambdas, concurrence_shortcut
from .linalg import partial_trace
from .measurements import POSTSELECTION_FLOOR, reversal_diagonals, weak_diagonals
from .states import InitialState, resolve_initial

STRATEGIES = ("distributed", "fully_local", "projective_baseline")
STRATEGY_ALIASES = {
    "distributed": "distributed",
    "local": "fully_local",
    "fully_local": "fully_local",
    "fully-local": "fully_local",
    "projective": "projective_baseline",
    "projective_baseline": "projective_baseline",
    "baseline": "projective_baseline",
}
STRENGTHS = ("p1", "p2", "p3", "q1", "q2", "q3", "d1", "d2")
CHUNK = 4096


def canonical_strategy(name: str) -> str:
    try:
        return STRATEGY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from distributed, local, projective") from None


@dataclass(frozen=True)
class ProtocolParams:
    strategy: str = "distributed"
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    noise: str = "none"
    d1: float = 0.0
    d2: float = 0.0
    initial: str = "paper-default"

    def __post_init__(self):
        object.__setattr__(self, "strategy", canonical_strategy(self.strategy))
        noise = self.noise.strip().lower()
        if noise not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}; choose from {', '.join(NOISE_KINDS)}")
        object.__setattr__(self, "noise", noise)
        for name in STRENGTHS:
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)
        resolve_initial(self.initial)

    def with_(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ProtocolOutcome:
    params: ProtocolParams
    rho12: np.ndarray | None
    success_prob: float
    concurrence: float | None
    closed_form_concurrence: float | None = None
    closed_form_success: float | None = None
    split_success: float | None = None
    shortcut_concurrence: float | None = None
    c13: float | None = None
    c23: float | None = None
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def postselection_failed(self) -> bool:
        return self.success_prob < POSTSELECTION_FLOOR


# ---------------------------------------------------------------------------
# closed forms for the default W-like state (a1 = a2 = 1/2, a3 = 1/sqrt 2)
# ---------------------------------------------------------------------------


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def weak_success(p1, p2):
    """Probability that both null weak measurements succeed."""
    return 1 - np.asarray(p1) / 4 - np.asarray(p2) / 4


def reversal_success(p1, p2, q1, q2):
    """Conditional probability of both reversals given the weak step succeeded."""
    num = (1 - q1) * (2 - p2 - q2) + (1 - q2) * (2 - p1 - q1)
    return _ratio(num, 4 * weak_success(p1, p2))


def distributed_concurrence(p1, p2, q1, q2):
    x = 0.5 * np.sqrt((1 - p1) * (1 - p2) * (1 - q1) * (1 - q2))
    y = 0.25 * (1 - p1) * (1 - q2) + (1 - q1) * (0.5 * (1 - q2) + 0.25 * (1 - p2))
    return _ratio(x, y)


def damped_concurrence(d1, d2):
    """Pair concurrence after amplitude damping alone."""
    return 0.5 * np.sqrt((1 - np.asarray(d1)) * (1 - np.asarray(d2)))


def distributed_ad_concurrence(p1, p2, q1, q2, d1, d2):
    x = np.sqrt((1 - d1) * (1 - d2) * (1 - p1) * (1 - p2) * (1 - q1) * (1 - q2))
    y = 0.5 * (1 - p1) * (1 - d1 * q1) * (1 - q2) + (1 - q1) * ((1 - q2) + 0.5 * (1 - p2) * (1 - d2 * q2))
    return _ratio(x, y)


def distributed_ad_success(p1, p2, q1, q2, d1, d2):
    return (
        (1 - q1) * (1 - p2) * (1 - q2 * d2) / 4
        + (1 - q2) * (1 - p1) * (1 - q1 * d1) / 4
        + (1 - q1) * (1 - q2) / 2
    )


def local_concurrence(p3, q3):
    return _ratio(1 - np.asarray(q3), (1 - np.asarray(p3)) + (1 - np.asarray(q3)))


def local_ad_concurrence(p3, q3, d1, d2):
    x = np.sqrt((1 - np.asarray(d1)) * (1 - np.asarray(d2))) * (1 - np.asarray(q3))
    return _ratio(x, (1 - np.asarray(p3)) + (1 - np.asarray(q3)))


def local_success(p3, q3):
    """Joint probability of the weak measurement and reversal on qubit 3."""
    return 1 - (np.asarray(p3) + np.asarray(q3)) / 2


def local_weak_success(p3):
    return 1 - np.asarray(p3) / 2


def local_split_product(p3, q3):
    """Weak-step probability times the joint weak-plus-reversal probability.

    Kept for comparison only: the trace of the simulated state equals
    :func:`local_success`, so this product double counts the weak step.
    """
    return local_weak_success(p3) * local_success(p3, q3)


def _closed_form_arrays(strategy, noise, covered, v):
    """Closed-form (concurrence, success, split_success) arrays or ``None``."""
    if not covered:
        return None, None, None
    if strategy == "distributed":
        if noise == "none":
            conc = distributed_concurrence(v["p1"], v["p2"], v["q1"], v["q2"])
            succ = weak_success(v["p1"], v["p2"]) * reversal_success(v["p1"], v["p2"], v["q1"], v["q2"])
            return conc, succ, None
        if noise == "ad":
            args = (v["p1"], v["p2"], v["q1"], v["q2"], v["d1"], v["d2"])
            return distributed_ad_concurrence(*args), distributed_ad_success(*args), None
        return None, None, None
    if strategy == "fully_local":
        succ = local_success(v["p3"], v["q3"])
        if noise == "none":
            return local_concurrence(v["p3"], v["q3"]), succ, local_split_product(v["p3"], v["q3"])
        if noise == "ad":
            return local_ad_concurrence(v["p3"], v["q3"], v["d1"], v["d2"]), succ, None
        return None, None, None
    shape = np.shape(v["p1"])
    return np.ones(shape), np.full(shape, 0.5), None


def _optional(x) -> float | None:
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def closed_form_concurrence(params: ProtocolParams) -> float | None:
    """Closed-form pair concurrence, or ``None`` when no formula covers ``params``."""
    v = {k: np.float64(getattr(params, k)) for k in STRENGTHS}
    covered = resolve_initial(params.initial).is_default_state
    return _optional(_closed_form_arrays(params.strategy, params.noise, covered, v)[0])


def closed_form_success(params: ProtocolParams) -> float | None:
    v = {k: np.float64(getattr(params, k)) for k in STRENGTHS}
    covered = resolve_initial(params.initial).is_default_state
    return _optional(_closed_form_arrays(params.strategy, params.noise, covered, v)[1])


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _noise(rho, noise, d1, d2):
    if noise == "none":
        return rho
    rho = apply_kraus_batch(rho, kraus_stack(noise, d1), 1, 3)
    return apply_kraus_batch(rho, kraus_stack(noise, d2), 2, 3)


def simulate_batch(strategy: str, noise: str, rho0: np.ndarray, v: Mapping[str, np.ndarray]) -> np.ndarray:
    """Run one pipeline on a stack of parameter points.

    ``v`` maps every strength name to an array of shape ``(B,)``. Returns
    the final unnormalized three-qubit states, shape ``(B, 8, 8)``.
    """
    n = len(v["p1"])
    rho = np.broadcast_to(np.asarray(rho0, dtype=complex), (n, 8, 8)).copy()
    cong = _kernels.diag_congruence_batch
    if strategy == "distributed":
        rho = cong(rho, weak_diagonals(v["p1"]), 1, 3)
        rho = cong(rho, weak_diagonals(v["p2"]), 2, 3)
        rho = _noise(rho, noise, v["d1"], v["d2"])
        rho = cong(rho, reversal_diagonals(v["q1"]), 1, 3)
        rho = cong(rho, reversal_diagonals(v["q2"]), 2, 3)
    elif strategy == "fully_local":
        rho = cong(rho, weak_diagonals(v["p3"]), 3, 3)
        rho = _noise(rho, noise, v["d1"], v["d2"])
        rho = cong(rho, reversal_diagonals(v["q3"]), 3, 3)
    elif strategy == "projective_baseline":
        rho = cong(rho, np.array([1.0, 0.0]), 3, 3)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return rho


def _pair_concurrence(final, traced, ok):
    out = np.full(len(final), np.nan)
    if np.any(ok):
        rho = partial_trace(final[ok], 3, [traced])
        lam = concurrence_lambdas(rho)
        out[ok] = np.maximum(0.0, lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3])
    return out


@dataclass(eq=False)
class BatchOutcome:
    """Column arrays for a stack of parameter points (NaN marks undefined values)."""

    values: dict[str, np.ndarray]
    concurrence: np.ndarray
    success_prob: np.ndarray
    shortcut_concurrence: np.ndarray
    closed_form_concurrence: np.ndarray | None
    closed_form_success: np.ndarray | None
    split_success: np.ndarray | None
    c13: np.ndarray | None = None
    c23: np.ndarray | None = None


def _broadcast_values(base: ProtocolParams, overrides: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    unknown = set(overrides) - set(STRENGTHS)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)}; choose from {', '.join(STRENGTHS)}")
    arrays = {k: np.atleast_1d(np.asarray(overrides[k], dtype=float)) for k in overrides}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else (1,)
    v = {}
    for k in STRENGTHS:
        a = arrays.get(k, np.float64(getattr(base, k)))
        a = np.broadcast_to(a, shape).reshape(-1).astype(float)
        if np.any((a < 0) | (a > 1)) or not np.all(np.isfinite(a)):
            raise ValueError(f"{k} must lie in [0, 1]")
        v[k] = a
    return v


def evaluate_batch(
    base: ProtocolParams,
    overrides: Mapping[str, np.ndarray] | None = None,
    pairs: bool = False,
    chunk: int = CHUNK,
) -> BatchOutcome:
    """Evaluate ``base`` with some strengths replaced by arrays of values."""
    v = _broadcast_values(base, overrides or {})
    init = resolve_initial(base.initial)
    total = len(v["p1"])
    conc = np.full(total, np.nan)
    short = np.full(total, np.nan)
    succ = np.empty(total)
    c13 = np.full(total, np.nan) if pairs else None
    c23 = np.full(total, np.nan) if pairs else None
    for start in range(0, total, chunk):
        sl = slice(start, min(start + chunk, total))
        part = {k: a[sl] for k, a in v.items()}
        final = simulate_batch(base.strategy, base.noise, init.rho.matrix, part)
        weight = np.trace(final, axis1=1, axis2=2).real
        succ[sl] = weight
        ok = weight >= POSTSELECTION_FLOOR
        idx = np.arange(sl.start, sl.stop)[ok]
        if np.any(ok):
            rho12 = partial_trace(final[ok], 3, [3])
            lam = concurrence_lambdas(rho12)
            conc[idx] = np.minimum(1.0, np.maximum(0.0, lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3]))
            short[idx] = concurrence_shortcut(rho12)
        if pairs:
            c13[sl] = _pair_concurrence(final, 2, ok)
            c23[sl] = _pair_concurrence(final, 1, ok)
    cf_c, cf_s, split = _closed_form_arrays(base.strategy, base.noise, init.is_default_state, v)
    as_arr = lambda x: None if x is None else np.broadcast_to(np.asarray(x, dtype=float), (total,)).copy()
    return BatchOutcome(v, conc, succ, short, as_arr(cf_c), as_arr(cf_s), as_arr(split), c13, c23)


def run(params: ProtocolParams) -> ProtocolOutcome:
    """Simulate one parameter point with whichever strategy ``params`` names."""
    v = _broadcast_values(params, {})
    init = resolve_initial(params.initial)
    final = simulate_batch(params.strategy, params.noise, init.rho.matrix, v)[0]
    weight = float(np.trace(final).real)
    cf_c, cf_s, split = _closed_form_arrays(params.strategy, params.noise, init.is_default_state, v)
    common = dict(
        params=params,
        success_prob=max(weight, 0.0),
        closed_form_concurrence=None if cf_c is None else _optional(cf_c[0]),
        closed_form_success=None if cf_s is None else _optional(cf_s[0]),
        split_success=None if split is None else _optional(split[0]),
        final_state=final,
    )
    if weight < POSTSELECTION_FLOOR:
        return ProtocolOutcome(rho12=None, concurrence=None, **common)
    rho12 = partial_trace(final, 3, [3]) / weight
    lam = concurrence_lambdas(rho12)
    pair = lambda traced: float(max(0.0, _pair_concurrence(final[None], traced, np.array([True]))[0]))
    return ProtocolOutcome(
        rho12=rho12,
        concurrence=float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))),
        shortcut_concurrence=concurrence_shortcut(rho12),
        c13=pair(2),
        c23=pair(1),
        **common,
    )


def _require(params: ProtocolParams, strategy: str) -> None:
    if params.strategy != strategy:
        raise ValueError(f"expected strategy {strategy!r}, got {params.strategy!r}")


def run_distributed(params: ProtocolParams) -> ProtocolOutcome:
    _require(params, "distributed")
    return run(params)


def run_fully_local(params: ProtocolParams) -> ProtocolOutcome:
    _require(params, "fully_local")
    return run(params)


def run_projective_baseline(params: ProtocolParams) -> ProtocolOutcome:
    _require(params, "projective_baseline")
    return run(params)


# ---------------------------------------------------------------------------
# cross-validation of closed forms against simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyRow:
    name: str
    free: tuple[str, ...]
    points: int
    max_deviation: float
    tol: float
    informational: bool = False

    @property
    def passed(self) -> bool:
        return self.informational or self.max_deviation <= self.tol


@dataclass(frozen=True)
class VerifyReport:
    rows: tuple[VerifyRow, ...]
    grid: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _grid(names, n, hi):
    axis = np.linspace(0.0, hi, n)
    mesh = np.meshgrid(*([axis] * len(names)), indexing="ij")
    return {name: m.reshape(-1) for name, m in zip(names, mesh)}


def _max_dev(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    if np.any(np.isnan(d)):
        return math.inf
    return float(np.max(d)) if d.size else 0.0


def verify_closed_forms(grid: int = 9, hi: float = 0.99, tol: float = 1e-9) -> VerifyReport:
    """Compare every closed form with the simulated pipeline on a uniform grid.

    Each free strength takes ``grid`` values in ``[0, hi]``. A row fails when
    its largest absolute deviation exceeds ``tol``; rows marked
    informational are reported but never fail.
    """
    rows = []
    shortcut_dev = 0.0

    def check(prefix, base, names, conc_tol=tol, succ_name=None, split_name=None, expected=None):
        nonlocal shortcut_dev
        g = _grid(names, grid, hi)
        out = evaluate_batch(base, g)
        n = len(out.concurrence)
        ref = out.closed_form_concurrence if expected is None else expected(*(g[k] for k in names))
        rows.append(VerifyRow(f"{prefix}_concurrence", names, n, _max_dev(out.concurrence, ref), conc_tol))
        if succ_name:
            rows.append(VerifyRow(succ_name, names, n, _max_dev(out.success_prob, out.closed_form_success), tol))
        if split_name and out.split_success is not None:
            rows.append(VerifyRow(split_name, names, n, _max_dev(out.success_prob, out.split_success), tol, True))
        shortcut_dev = max(shortcut_dev, _max_dev(out.concurrence, out.shortcut_concurrence))

    check(
        "damped",
        ProtocolParams("distributed", noise="ad"),
        ("d1", "d2"),
        conc_tol=min(tol, 1e-12),
        expected=damped_concurrence,
    )
    check("distributed", ProtocolParams("distributed"), ("p1", "p2", "q1", "q2"), succ_name="distributed_success")
    check(
        "distributed_ad",
        ProtocolParams("distributed", noise="ad"),
        ("p1", "p2", "q1", "q2", "d1", "d2"),
        succ_name="distributed_ad_success",
    )
    check(
        "local",
        ProtocolParams("fully_local"),
        ("p3", "q3"),
        succ_name="local_success",
        split_name="local_success_vs_split_product",
    )
    check("local_ad", ProtocolParams("fully_local", noise="ad"), ("p3", "q3", "d1", "d2"), succ_name="local_ad_success")
    checked = sum(r.points for r in rows if r.name.endswith("_concurrence"))
    rows.append(VerifyRow("eigen_vs_shortcut_concurrence", ("all",), checked, shortcut_dev, 1e-10))
    return VerifyReport(tuple(rows), grid)
