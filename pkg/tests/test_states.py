import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracle import w_vector
from wmloc.states import (
    EQUAL_W,
    DEFAULT_COEFFS,
    DensityMatrix,
    WLikeCoefficients,
    gw_mixed,
    pure_to_density,
    resolve_initial,
    validate,
    w_like,
)


def test_default_state_amplitudes():
    psi = w_like(DEFAULT_COEFFS)
    assert np.allclose(psi, w_vector(0.5, 0.5, 1 / math.sqrt(2)))
    assert abs(np.vdot(psi, psi) - 1) < 1e-15


@pytest.mark.parametrize("coeffs", [(0.5, 0.5, 0.5), (1.0, 1.0, 0.0), (-0.5, 0.5, 1 / math.sqrt(2))])
def test_bad_coefficients_rejected(coeffs):
    with pytest.raises(ValueError):
        WLikeCoefficients(*coeffs)


@given(st.tuples(*[st.floats(0, 10, allow_nan=False)] * 3).filter(lambda t: sum(x * x for x in t) > 1e-6))
def test_normalized_coefficients_have_unit_norm(raw):
    c, factor = WLikeCoefficients.normalized(*raw)
    assert abs(sum(a * a for a in c.astuple()) - 1) < 1e-12
    assert np.allclose(np.array(c.astuple()) / factor, raw)


def test_density_matrix_is_immutable_and_tracks_weight():
    rho = DensityMatrix(np.eye(4) / 8, weight=0.5)
    assert rho.n_qubits == 2 and rho.trace == pytest.approx(0.5)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1
    assert np.allclose(rho.normalized(), np.eye(4) / 4)


def test_density_matrix_rejects_bad_shapes():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3))
    with pytest.raises(ValueError):
        DensityMatrix(np.ones(4))


def test_pure_to_density_requires_normalization():
    with pytest.raises(ValueError, match="normalized"):
        pure_to_density([1.0, 1.0])


def test_gw_mixed_is_valid_and_mixed():
    rho = gw_mixed()
    report = validate(rho)
    assert report.ok
    assert rho.purity() < 1
    assert report.min_eigenvalue == pytest.approx(0.1 / 8, abs=1e-12)


def test_validate_flags_non_physical_matrix():
    bad = np.diag([1.2, -0.2, 0.0, 0.0])
    assert not validate(bad).ok


@pytest.mark.parametrize("name", ["paper-default", "equal-w", "gw-mixed", "w:1,1,1", "w-0.5,0.5,0.7071067811865476"])
def test_presets_resolve_to_valid_states(name):
    init = resolve_initial(name)
    assert validate(init.rho).ok


def test_equal_w_and_custom_default():
    assert np.allclose(resolve_initial("equal-w").coefficients.astuple(), EQUAL_W)
    assert resolve_initial("w:0.5,0.5,0.7071067811865476").is_default_state
    assert not resolve_initial("equal-w").is_default_state


def test_custom_coefficients_record_normalization():
    init = resolve_initial("w:0.5,0.7071067811865476,0.7071067811865476")
    assert init.normalization == pytest.approx(1 / math.sqrt(1.25))
    assert sum(a * a for a in init.coefficients.astuple()) == pytest.approx(1)


@pytest.mark.parametrize("name", ["ghz", "w:1,2", "w:a,b,c", "w:0,0,0"])
def test_unknown_or_malformed_preset(name):
    with pytest.raises(ValueError):
        resolve_initial(name)
