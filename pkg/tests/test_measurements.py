import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle
from wmloc.measurements import (
    PostselectedOp,
    apply_postselected,
    postselection_impossible,
    projector,
    reversal_diagonals,
    reversal_meas,
    weak_click,
    weak_diagonals,
    weak_meas,
)
from wmloc.states import DensityMatrix, resolve_initial

unit = st.floats(0, 1, allow_nan=False)


def test_operator_entries():
    assert np.allclose(weak_meas(0.36).operator, np.diag([1, 0.8]))
    assert np.allclose(reversal_meas(0.36).operator, np.diag([0.8, 1]))
    assert np.allclose(projector(1).operator, np.diag([0, 1]))


@pytest.mark.parametrize("bad", [-0.01, 1.01])
def test_strength_validation(bad):
    with pytest.raises(ValueError):
        weak_meas(bad)
    with pytest.raises(ValueError):
        reversal_meas(bad)


def test_projector_outcome_validation():
    with pytest.raises(ValueError):
        projector(2)


def test_non_contraction_rejected():
    with pytest.raises(ValueError):
        PostselectedOp(np.diag([1.0, 1.5]), "bad")


@given(unit, st.integers(1, 3))
def test_null_and_click_probabilities_sum_to_one(p, qubit):
    rho = resolve_initial("gw-mixed").rho
    _, p_null = apply_postselected(weak_meas(p), rho, qubit)
    _, p_click = apply_postselected(weak_click(p), rho, qubit)
    assert p_null + p_click == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("qubit", [1, 2, 3])
def test_projector_outcomes_sum_to_one(qubit):
    rho = resolve_initial("paper-default").rho
    total = sum(apply_postselected(projector(k), rho, qubit)[1] for k in (0, 1))
    assert total == pytest.approx(1, abs=1e-12)


@given(unit, unit)
def test_state_and_probability_match_oracle(p, q):
    rho = resolve_initial("paper-default").rho
    out, prob = apply_postselected(weak_meas(p), rho, 1)
    ref = oracle.apply_op(rho.matrix, oracle.weak(p), 1)
    assert np.allclose(out.matrix, ref, atol=1e-15)
    assert prob == pytest.approx(1 - p / 4)
    out2, prob2 = apply_postselected(reversal_meas(q), out, 1)
    assert out2.weight == pytest.approx(out2.trace, abs=1e-15)
    assert out2.weight == pytest.approx(prob * prob2, abs=1e-15)


def test_impossible_postselection():
    rho = DensityMatrix(np.diag([0.0, 1.0]))
    out, prob = apply_postselected(weak_meas(1.0), rho, 1)
    assert prob == 0.0 and postselection_impossible(prob)
    with pytest.raises(ValueError, match="zero weight"):
        apply_postselected(weak_meas(0.5), out, 1)


def test_diagonal_helpers_match_operators():
    p = np.array([0.0, 0.5, 1.0])
    assert np.allclose(weak_diagonals(p)[1], np.diag(weak_meas(0.5).operator).real)
    assert np.allclose(reversal_diagonals(p)[2], np.diag(reversal_meas(1.0).operator).real)
