import numpy as np
import pytest
from hypothesis import given, strategies as st

from wmloc.explorer import (
    FIGURES,
    Q_MAX,
    Axis,
    SweepSpec,
    expand_param,
    figure_presets,
    non_dominated,
    optimize_batch,
    optimize_reversal,
    pareto_frontier,
    sweep,
)
from wmloc.protocols import ProtocolParams, evaluate_batch


def test_expand_param():
    assert expand_param("q") == ("q1", "q2")
    assert expand_param("q", "fully_local") == ("q3",)
    assert expand_param("d") == ("d1", "d2")
    assert expand_param("d1=d2") == ("d1", "d2")
    with pytest.raises(ValueError, match="unknown parameter"):
        expand_param("x1")


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis("p1", 0, 1, 1)
    with pytest.raises(ValueError):
        Axis("p1", -0.1, 1, 4)


def test_spec_validation():
    base = ProtocolParams()
    with pytest.raises(ValueError, match="one or two"):
        SweepSpec(base, ())
    with pytest.raises(ValueError, match="output"):
        SweepSpec(base, (Axis("p1", 0, 1, 3),), ("entropy",))
    with pytest.raises(ValueError, match="optimized"):
        SweepSpec(base, (Axis("p1", 0, 1, 3),), optimize=("d1",))


def test_sweep_is_row_major_with_first_axis_outermost():
    spec = SweepSpec(ProtocolParams(q1=0.5, q2=0.5), (Axis("p1", 0, 0.5, 2), Axis("p2", 0, 0.9, 3)))
    t = sweep(spec)
    assert t.columns == ["p1", "p2", "concurrence", "success_prob", "closed_form_concurrence", "deviation"]
    assert [r[:2] for r in t.rows] == [[0, 0], [0, 0.45], [0, 0.9], [0.5, 0], [0.5, 0.45], [0.5, 0.9]]
    assert np.all(t.column("deviation") <= 1e-9)


def test_sweep_without_closed_form_leaves_cells_empty():
    spec = SweepSpec(ProtocolParams(noise="dp"), (Axis("d1", 0, 0.5, 3),))
    t = sweep(spec)
    i = t.columns.index("closed_form_concurrence")
    assert all(r[i] is None for r in t.rows)


def test_figure_presets_shapes():
    presets = figure_presets(density=8)
    assert set(presets) == set(FIGURES)
    t = sweep(presets["fig2a"])
    assert len(t.rows) == 64
    assert t.rows[0][:3] == [0, 0, pytest.approx(0.5, abs=1e-12)]
    t4 = sweep(presets["fig4a"])
    assert t4.columns[0] == "initial" and len(t4.rows) == 4 * 8


def test_fig1b_peaks_at_strongest_weak_measurement():
    t = sweep(figure_presets(density=16)["fig1b"])
    conc = t.column("concurrence")
    p3 = t.column("p3")
    assert p3[np.nanargmax(conc)] == pytest.approx(0.99)


def brute_force(base, which, min_success=None, steps=201):
    grid = np.linspace(0, Q_MAX, steps)
    mesh = np.meshgrid(*([grid] * len(which)), indexing="ij")
    out = evaluate_batch(base, {q: m.reshape(-1) for q, m in zip(which, mesh)})
    conc = np.where(np.isnan(out.concurrence), -1, out.concurrence)
    if min_success is not None:
        conc = np.where(out.success_prob >= min_success, conc, -1)
    return conc.max()


@pytest.mark.parametrize(
    "base, which, floor",
    [
        (ProtocolParams(noise="dp", d1=0.2, d2=0.2), ("q1", "q2"), None),
        (ProtocolParams(p1=0.5, p2=0.5), ("q1", "q2"), 0.3),
        (ProtocolParams(noise="ad", d1=0.6, d2=0.6, p1=0.1, p2=0.1), ("q1", "q2"), 0.25),
        (ProtocolParams("local", noise="dp", d1=0.2, d2=0.2, p3=0.9), ("q3",), None),
    ],
)
def test_optimizer_matches_grid_oracle(base, which, floor):
    res = optimize_reversal(base, which, floor)
    oracle = brute_force(base, which, floor)
    assert res.feasible
    assert res.value >= oracle - 1e-3
    if floor is not None:
        assert res.success_prob >= floor


def test_optimizer_over_weak_and_reversal_strengths():
    base = ProtocolParams("local", noise="dp", d1=0.2, d2=0.2)
    res = optimize_reversal(base, ("p3", "q3"))
    assert res.value >= brute_force(base, ("p3", "q3"), steps=101) - 1e-3


def test_infeasible_floor_is_reported():
    res = optimize_reversal(ProtocolParams(p1=0.5, p2=0.5), ("q1", "q2"), 0.99)
    assert not res.feasible and res.value is None
    with pytest.raises(ValueError):
        optimize_reversal(ProtocolParams(), ("q1",), 0.0)
    with pytest.raises(ValueError, match="measurement strengths"):
        optimize_batch(ProtocolParams(), ("d1",))


def test_optimize_batch_is_never_worse_than_its_seed():
    base = ProtocolParams(noise="dp", d1=0.3, d2=0.1)
    pts = {"p1": np.array([0.0, 0.5, 0.9]), "p2": np.array([0.2, 0.2, 0.8])}
    best = optimize_batch(base, ("q1", "q2"), pts)
    start = evaluate_batch(base, pts).concurrence
    assert np.all(best.value >= start - 1e-12)


def dominated(c, s, i):
    return any((c[j] >= c[i] and s[j] >= s[i]) and (c[j] > c[i] or s[j] > s[i]) for j in range(len(c)))


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_non_dominated_matches_quadratic_oracle(points):
    c = np.array([p[0] for p in points])
    s = np.array([p[1] for p in points])
    keys = [(i,) for i in range(len(points))]
    kept = non_dominated(c, s, keys)
    expected = {(c[i], s[i]) for i in range(len(c)) if not dominated(c, s, i)}
    assert {(c[i], s[i]) for i in kept} == expected
    assert len(kept) == len(expected)
    assert all(s[a] >= s[b] for a, b in zip(kept, kept[1:]))


def test_pareto_endpoints_for_distributed_reversal():
    front = pareto_frontier(ProtocolParams(), ["q"], 64)
    assert front[0].params.q1 == 0 and front[0].success_prob == pytest.approx(1)
    assert front[-1].params.q1 == pytest.approx(Q_MAX)
    conc = [pt.concurrence for pt in front]
    assert all(b > a for a, b in zip(conc, conc[1:]))
    with pytest.raises(ValueError):
        pareto_frontier(ProtocolParams(), ["q"], 4)


def test_reversal_helps_every_fig4_state_under_damping():
    t = sweep(figure_presets(density=12)["fig4b"])
    for init in dict.fromkeys(r[0] for r in t.rows):
        rows = [r for r in t.rows if r[0] == init]
        conc = np.array([r[3] for r in rows], dtype=float)
        bare = evaluate_batch(ProtocolParams(noise="ad", d1=0.6, d2=0.6, initial=init)).concurrence[0]
        if init == "gw-mixed":
            # white noise leaves no pair entanglement to start from; only the best point improves
            assert bare == 0.0 and conc.max() > bare
        else:
            assert np.all(conc > bare)
