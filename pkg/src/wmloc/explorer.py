"""Parameter sweeps, reversal-strength optimization and Pareto frontiers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .protocols import STRENGTHS, ProtocolParams, evaluate_batch

Q_MAX = 0.999
OUTPUTS = (
    "concurrence",
    "success_prob",
    "closed_form_concurrence",
    "closed_form_success",
    "deviation",
    "c13",
    "c23",
)
DEFAULT_OUTPUTS = ("concurrence", "success_prob", "closed_form_concurrence", "deviation")
OPTIMIZABLE = ("p1", "p2", "p3", "q1", "q2", "q3")
GOLDEN = (math.sqrt(5) - 1) / 2


def expand_param(name: str, strategy: str = "distributed") -> tuple[str, ...]:
    """Resolve a parameter spelling to the strengths it sets.

    ``p1=p2`` ties several strengths to one value; ``p``, ``q`` and ``d``
    are shorthands for the strategy's measurement pair or both channels.
    """
    name = name.strip().lower()
    if name in ("p", "q"):
        return (f"{name}3",) if strategy == "fully_local" else (f"{name}1", f"{name}2")
    if name == "d":
        return ("d1", "d2")
    parts = tuple(p.strip() for p in name.split("="))
    for p in parts:
        if p not in STRENGTHS:
            raise ValueError(f"unknown parameter {p!r}; choose from {', '.join(STRENGTHS)}")
    return parts


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 steps")
        if not (0.0 <= self.lo <= 1.0 and 0.0 <= self.hi <= 1.0):
            raise ValueError(f"axis {self.name!r} range must lie in [0, 1]")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    """A grid over one or two axes of :class:`ProtocolParams`.

    ``optimize`` names measurement strengths re-optimized for concurrence at
    every grid point; ``initials`` repeats the grid for several initial
    states (outermost loop).
    """

    base: ProtocolParams
    axes: tuple[Axis, ...]
    outputs: tuple[str, ...] = DEFAULT_OUTPUTS
    optimize: tuple[str, ...] = ()
    initials: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep takes one or two axes")
        for ax in self.axes:
            expand_param(ax.name, self.base.strategy)
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ValueError(f"unknown output column(s) {sorted(bad)}; choose from {', '.join(OUTPUTS)}")
        for q in self.optimize:
            if q not in OPTIMIZABLE:
                raise ValueError(f"only measurement strengths ({', '.join(OPTIMIZABLE)}) can be optimized, got {q!r}")


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    note: str = ""

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([np.nan if r[i] is None else r[i] for r in self.rows], dtype=float)


def _grid_points(spec: SweepSpec) -> tuple[list[str], dict[str, np.ndarray]]:
    strategy = spec.base.strategy
    values = [ax.values() for ax in spec.axes]
    mesh = np.meshgrid(*values, indexing="ij")
    cols: list[str] = []
    points: dict[str, np.ndarray] = {}
    for ax, m in zip(spec.axes, mesh):
        for p in expand_param(ax.name, strategy):
            cols.append(p)
            points[p] = m.reshape(-1)
    return cols, points


def _nan_to_none(x):
    x = float(x)
    return None if math.isnan(x) else x


def sweep(spec: SweepSpec) -> Table:
    """Evaluate ``spec`` row-major (first axis outermost)."""
    cols, points = _grid_points(spec)
    initials = spec.initials or (None,)
    header = (["initial"] if spec.initials else []) + cols + list(spec.optimize) + list(spec.outputs)
    table = Table(header, note=spec.note)
    want_pairs = bool({"c13", "c23"} & set(spec.outputs))
    for init in initials:
        base = spec.base if init is None else replace(spec.base, initial=init)
        pts = dict(points)
        if spec.optimize:
            best = optimize_batch(base, spec.optimize, pts)
            pts.update(best.strengths)
        out = evaluate_batch(base, pts, pairs=want_pairs)
        n = len(out.concurrence)
        columns = {
            "concurrence": out.concurrence,
            "success_prob": out.success_prob,
            "closed_form_concurrence": out.closed_form_concurrence,
            "closed_form_success": out.closed_form_success,
            "c13": out.c13,
            "c23": out.c23,
        }
        if out.closed_form_concurrence is not None:
            columns["deviation"] = np.abs(out.concurrence - out.closed_form_concurrence)
        for i in range(n):
            row = [init] if spec.initials else []
            row += [float(pts[c][i]) for c in cols]
            row += [float(pts[q][i]) for q in spec.optimize]
            for name in spec.outputs:
                arr = columns.get(name)
                row.append(None if arr is None else _nan_to_none(arr[i]))
            table.rows.append(row)
    return table


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizeResult:
    params: ProtocolParams
    strengths: dict[str, float]
    value: float | None
    success_prob: float | None
    feasible: bool
    objective: str
    min_success: float | None = None


@dataclass
class BatchOptimum:
    strengths: dict[str, np.ndarray]
    value: np.ndarray
    success_prob: np.ndarray
    feasible: np.ndarray


def _score(conc, succ, min_success):
    """Penalized objective: feasible points score their concurrence, others below -1."""
    conc = np.where(np.isnan(conc), -1.0, conc)
    if min_success is None:
        return conc
    shortfall = min_success - succ
    return np.where(shortfall <= 0.0, conc, -1.0 - shortfall)


def _seed_steps(k: int) -> int:
    return {1: 51, 2: 11}.get(k, 7)


def optimize_batch(
    base: ProtocolParams,
    which: Sequence[str],
    points: Mapping[str, np.ndarray] | None = None,
    min_success: float | None = None,
    seed_steps: int | None = None,
    passes: int = 2,
    xtol: float = 1e-7,
) -> BatchOptimum:
    """Maximize concurrence over the measurement strengths in ``which``.

    Works on a stack of base points at once. Each point starts from the
    best node of a coarse grid over ``[0, Q_MAX]``; then ``passes``
    rounds of coordinate-wise golden-section search refine each free
    strength inside a bracket that halves every round. The result is
    never worse than the seed.
    """
    which = tuple(dict.fromkeys(which))
    for q in which:
        if q not in OPTIMIZABLE:
            raise ValueError(f"only measurement strengths ({', '.join(OPTIMIZABLE)}) can be optimized, got {q!r}")
    fixed = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in (points or {}).items() if k not in which}
    n = max((len(v) for v in fixed.values()), default=1)
    fixed = {k: np.broadcast_to(v, (n,)) for k, v in fixed.items()}

    def evaluate(x: dict[str, np.ndarray]):
        out = evaluate_batch(base, {**fixed, **x})
        return _score(out.concurrence, out.success_prob, min_success), out.concurrence, out.success_prob

    if not which:
        score, conc, succ = evaluate({})
        return BatchOptimum({}, conc, succ, score > -1.0 if min_success is not None else np.ones(n, bool))

    k = len(which)
    steps = seed_steps or _seed_steps(k)
    axis = np.linspace(0.0, Q_MAX, steps)
    mesh = [m.reshape(-1) for m in np.meshgrid(*([axis] * k), indexing="ij")]
    m = len(mesh[0])
    tiled = {q: np.tile(mesh[j], n) for j, q in enumerate(which)}
    rep_fixed = {kk: np.repeat(v, m) for kk, v in fixed.items()}
    out = evaluate_batch(base, {**rep_fixed, **tiled})
    score = _score(out.concurrence, out.success_prob, min_success).reshape(n, m)
    idx = np.argmax(score, axis=1)
    x = {q: mesh[j][idx].copy() for j, q in enumerate(which)}
    best = score[np.arange(n), idx]

    h = axis[1] - axis[0]
    for _ in range(passes):
        for q in which:
            lo = np.clip(x[q] - h, 0.0, Q_MAX)
            hi = np.clip(x[q] + h, 0.0, Q_MAX)
            cand = _golden_max(lambda t: evaluate({**x, q: t})[0], lo, hi, xtol)
            trial = {**x, q: cand}
            s = evaluate(trial)[0]
            better = s > best
            x[q] = np.where(better, cand, x[q])
            best = np.where(better, s, best)
        h /= 2

    _, conc, succ = evaluate(x)
    feasible = np.ones(n, bool) if min_success is None else best > -1.0
    return BatchOptimum(x, conc, succ, feasible)


def _golden_max(f, lo, hi, xtol):
    """Vectorized golden-section search for the maximum of ``f`` on ``[lo, hi]``."""
    a, b = lo.astype(float).copy(), hi.astype(float).copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while np.max(b - a) > xtol:
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - GOLDEN * (b - a)
        new_d = a + GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        probe = np.where(left, c_next, d_next)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_next, d_next
    return np.where(fc >= fd, c, d)


def optimize_reversal(
    base: ProtocolParams,
    which: Iterable[str],
    min_success: float | None = None,
    seed_steps: int | None = None,
) -> OptimizeResult:
    """Best measurement strengths for one parameter point.

    With ``min_success`` set, concurrence is maximized subject to the joint
    success probability being at least that value; an unreachable bound
    yields ``feasible=False``.
    """
    which = tuple(which)
    if min_success is not None and not 0.0 < min_success <= 1.0:
        raise ValueError("min_success must lie in (0, 1]")
    if seed_steps is None:
        seed_steps = {1: 1001, 2: 101}.get(len(which), 11)
    opt = optimize_batch(base, which, None, min_success, seed_steps)
    strengths = {q: float(v[0]) for q, v in opt.strengths.items()}
    objective = "concurrence" if min_success is None else "concurrence_at_min_success"
    feasible = bool(opt.feasible[0])
    params = replace(base, **strengths)
    return OptimizeResult(
        params=params,
        strengths=strengths,
        value=_nan_to_none(opt.value[0]) if feasible else None,
        success_prob=_nan_to_none(opt.success_prob[0]),
        feasible=feasible,
        objective=objective,
        min_success=min_success,
    )


# ---------------------------------------------------------------------------
# Pareto frontier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParetoPoint:
    params: ProtocolParams
    concurrence: float
    success_prob: float


def non_dominated(conc: np.ndarray, succ: np.ndarray, keys: Sequence[tuple]) -> list[int]:
    """Indices of the non-dominated points, ordered by success probability descending.

    Exact duplicates keep the lexicographically smallest key.
    """
    order = sorted(range(len(conc)), key=lambda i: (-succ[i], -conc[i], keys[i]))
    kept: list[int] = []
    best = -math.inf
    for i in order:
        if conc[i] > best:
            kept.append(i)
            best = conc[i]
    return kept


def pareto_frontier(base: ProtocolParams, free: Sequence[str], grid_density: int = 64, hi: float = Q_MAX) -> list[ParetoPoint]:
    """Concurrence-vs-success trade-off over a grid of the ``free`` parameters."""
    if grid_density < 8:
        raise ValueError("grid_density must be at least 8")
    groups = [expand_param(f, base.strategy) for f in free]
    if not groups:
        raise ValueError("at least one free parameter is required")
    axis = np.linspace(0.0, hi, grid_density)
    mesh = [m.reshape(-1) for m in np.meshgrid(*([axis] * len(groups)), indexing="ij")]
    points = {p: mesh[j] for j, g in enumerate(groups) for p in g}
    out = evaluate_batch(base, points)
    ok = ~np.isnan(out.concurrence)
    idx = np.flatnonzero(ok)
    names = [p for g in groups for p in g]
    keys = [tuple(points[p][i] for p in names) for i in idx]
    kept = non_dominated(out.concurrence[idx], out.success_prob[idx], keys)
    frontier = []
    for j in kept:
        i = idx[j]
        params = replace(base, **{p: float(points[p][i]) for p in names})
        frontier.append(ParetoPoint(params, float(out.concurrence[i]), float(out.success_prob[i])))
    return frontier


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

FIG4_STATES = (
    "equal-w",
    "w:0.5,0.7071067811865476,0.7071067811865476",
    "w:0.6123724356957945,0.3535533905932738,0.7071067811865476",
    "gw-mixed",
)


def figure_presets(density: int = 32, hi: float = 0.99) -> dict[str, SweepSpec]:
    P = ProtocolParams

    def ax(name):
        return Axis(name, 0.0, hi, density)

    return {
        "fig1a": SweepSpec(P("distributed", q1=0.99, q2=0.99), (ax("p1"), ax("p2"))),
        "fig1b": SweepSpec(P("fully_local"), (ax("p3"), ax("q3"))),
        "fig2a": SweepSpec(P("distributed", noise="ad"), (ax("d1"), ax("d2"))),
        "fig2b": SweepSpec(
            P("distributed", noise="ad", d1=0.6, d2=0.6, q1=0.99, q2=0.99), (ax("p1"), ax("p2"))
        ),
        "fig2c": SweepSpec(P("fully_local", noise="ad", q3=0.99), (ax("p3"), ax("d1=d2"))),
        "fig3a": SweepSpec(P("distributed", noise="dp"), (ax("d1"), ax("d2")), ("concurrence", "success_prob")),
        "fig3b": SweepSpec(
            P("distributed", noise="dp", d1=0.2, d2=0.2),
            (ax("p1"), ax("p2")),
            ("concurrence", "success_prob"),
            optimize=("q1", "q2"),
            note="fig3b: depolarizing noise D1=D2=0.2, q1 and q2 optimized for concurrence at each point",
        ),
        "fig3c": SweepSpec(
            P("fully_local", noise="dp"),
            (ax("p3"), ax("d1=d2")),
            ("concurrence", "success_prob"),
            optimize=("q3",),
            note="fig3c: depolarizing noise D1=D2 on the second axis, q3 optimized for concurrence at each point",
        ),
        "fig4a": SweepSpec(
            P("distributed", noise="ad"),
            (ax("d1=d2"),),
            ("concurrence", "success_prob"),
            initials=FIG4_STATES,
        ),
        "fig4b": SweepSpec(
            P("distributed", noise="ad", d1=0.6, d2=0.6, q1=0.99, q2=0.99),
            (ax("p1=p2"),),
            ("concurrence", "success_prob"),
            initials=FIG4_STATES,
        ),
    }


FIGURES = tuple(figure_presets())
