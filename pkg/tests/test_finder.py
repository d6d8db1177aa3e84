"""Float search layer: instability scalars, Newton behavior, sweeps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steadycert.finder import (
    FloatSeqPair,
    amplitude_of,
    gamma_prime_values,
    gamma_values,
    instability_test,
    newton_refine,
    seed_mode,
    sweep_diagram,
)
from steadycert.nonlinear import ExpFraction, Rational
from steadycert.seqspace import Geometry
from steadycert.system import Params

GEOM = Geometry(0.0, 3.0 * math.pi, 1.0001)
HILL9 = Rational((1,), (1, 0, 0, 0, 0, 0, 0, 0, 0, 1))


def _params(sigma, geom=GEOM, gamma=HILL9):
    return Params(geom, sigma, 1.0, gamma)


def _flat(geom, degree):
    u = np.zeros(degree + 1)
    u[0] = 1.0
    return FloatSeqPair(geom, u, u.copy())


# -- pointwise sensitivity values ---------------------------------------------


def test_gamma_values_match_direct_evaluation():
    x = np.linspace(0.0, 2.5, 23)
    assert gamma_values(HILL9, x) == pytest.approx(1.0 / (1.0 + x**9), rel=1e-14)
    log = ExpFraction(9.0, 1.0)
    assert gamma_values(log, x) == pytest.approx(
        1.0 / (1.0 + np.exp(9.0 * (x - 1.0))), rel=1e-14
    )


def test_gamma_prime_matches_finite_differences():
    x = np.linspace(0.1, 2.0, 11)
    h = 1e-6
    for gam in (HILL9, ExpFraction(9.0, 1.0), Rational((1, 2), (1, 1))):
        num = (gamma_values(gam, x + h) - gamma_values(gam, x - h)) / (2 * h)
        # central differences themselves carry O(h^2 f''') ~ 1e-10 error
        assert gamma_prime_values(gam, x) == pytest.approx(num, rel=1e-4, abs=1e-8)


# -- instability of the homogeneous state --------------------------------------


def test_instability_scalars_at_reference_parameters():
    # c1 = sigma*d + gamma(1) + gamma'(1) = 0.053 + 1/2 - 9/4
    unstable, (c1, disc) = instability_test(_params(0.053))
    assert unstable
    assert c1 == pytest.approx(-1.697, abs=1e-12)
    assert disc == pytest.approx(2.773809, abs=1e-12)


def test_constant_sensitivity_is_stable():
    p = _params(0.4, gamma=Rational((1,), (1,)))
    unstable, (c1, _) = instability_test(p)
    assert not unstable
    assert c1 > 0.0


def test_nonnegative_slope_sum_is_stable():
    # gamma(1) + gamma'(1) = 1/2 - 1/4 >= 0 keeps c1 positive for all sigma
    p = _params(0.7, gamma=Rational((1,), (1, 1)))
    assert not instability_test(p)[0]


def test_logistic_instability_window():
    p = Params(Geometry(0.0, 4.0 * math.pi, 1.0001), 0.6, 1.0, ExpFraction(9.0, 1.0))
    unstable, (c1, disc) = instability_test(p)
    assert unstable
    assert c1 == pytest.approx(-1.15, abs=1e-12)
    assert disc == pytest.approx(0.1225, abs=1e-12)


# -- Newton refinement ----------------------------------------------------------


def test_flat_state_is_an_exact_fixed_point():
    res = newton_refine(_flat(GEOM, 30), _params(0.053))
    assert res.converged
    assert res.residual == 0.0
    assert np.all(res.state.u == _flat(GEOM, 30).u)


def test_pattern_state_at_reference_parameters():
    res = newton_refine(seed_mode(GEOM, 40, 2, 0.3), _params(0.053), 1e-12, 200)
    assert res.converged
    assert res.residual < 1e-12
    assert amplitude_of(res.state) == pytest.approx(0.8860276, abs=1e-4)
    # mass conservation is not imposed, so the mean shifts away from 1
    assert res.state.u[0] != 1.0


def test_quadratic_convergence_on_the_last_steps():
    res = newton_refine(seed_mode(GEOM, 40, 2, 0.3), _params(0.053), 1e-12, 200)
    h = res.history
    assert len(h) >= 3
    for a, b in zip(h[-3:-1], h[-2:]):
        assert b <= 100.0 * a * a


def test_even_mode_seed_preserves_parity():
    # products of even-mode sequences stay even-mode, so odd rows decouple
    res = newton_refine(seed_mode(GEOM, 40, 2, 0.3), _params(0.053), 1e-12, 200)
    odd_u = np.abs(res.state.u[1::2]).max()
    odd_v = np.abs(res.state.v[1::2]).max()
    assert odd_u < 1e-11
    assert odd_v < 1e-11


def test_divergent_start_is_flagged_not_raised():
    bad = FloatSeqPair(GEOM, np.full(21, 50.0), np.full(21, -50.0))
    res = newton_refine(bad, _params(0.053), 1e-12, 8)
    assert not res.converged


def test_newton_rejects_bad_controls():
    with pytest.raises(ValueError):
        newton_refine(_flat(GEOM, 10), _params(0.1), tol=0.0)
    with pytest.raises(ValueError):
        newton_refine(_flat(GEOM, 10), _params(0.1), maxit=0)


# -- seeds and states -----------------------------------------------------------


def test_seed_mode_shape():
    s = seed_mode(GEOM, 12, 3, 0.2)
    assert s.degree == 12
    assert s.u[0] == 1.0
    assert s.u[3] == pytest.approx(0.1)
    assert np.all(s.u == s.v)
    with pytest.raises(ValueError):
        seed_mode(GEOM, 12, 0, 0.2)
    with pytest.raises(ValueError):
        seed_mode(GEOM, 12, 13, 0.2)


def test_floatseqpair_validation():
    with pytest.raises(ValueError):
        FloatSeqPair(GEOM, np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        FloatSeqPair(GEOM, np.array([np.nan, 0.0]), np.zeros(2))
    with pytest.raises(ValueError):
        FloatSeqPair(GEOM, np.zeros((2, 2)), np.zeros((2, 2)))


def test_floatseqpair_roundtrip_through_rigorous_pair():
    rng = np.random.default_rng(7)
    u = rng.normal(size=9)
    v = rng.normal(size=9)
    fp = FloatSeqPair(GEOM, u, v)
    back = FloatSeqPair.from_pair(fp.as_pair())
    assert np.all(back.u == fp.u)
    assert np.all(back.v == fp.v)


def test_amplitude_of_flat_state_is_zero():
    assert amplitude_of(_flat(GEOM, 25)) == 0.0


@given(
    st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=6),
    st.floats(-3.0, 3.0),
)
@settings(max_examples=60, deadline=None)
def test_amplitude_ignores_the_mean_mode(coeffs, shift):
    u = np.array(coeffs)
    pair = FloatSeqPair(GEOM, u, u.copy())
    shifted = u.copy()
    shifted[0] += shift
    moved = FloatSeqPair(GEOM, shifted, shifted.copy())
    assert amplitude_of(moved) == pytest.approx(amplitude_of(pair), abs=1e-12)


# -- sweeps ----------------------------------------------------------------------


def test_sweep_large_sigma_keeps_only_the_trivial_branch():
    pts = sweep_diagram(_params(3.0), [3.0, 3.5], 20)
    assert pts
    for pt in pts:
        assert pt.converged
        assert pt.amplitude < 1e-8


def test_sweep_finds_the_nontrivial_branch_at_reference_sigma():
    pts = sweep_diagram(_params(0.053), [0.053], 40)
    amps = [pt.amplitude for pt in pts if pt.converged]
    assert any(a < 1e-8 for a in amps)
    assert any(abs(a - 0.886) < 5e-3 for a in amps)


def test_sweep_deduplicates_coinciding_states():
    pts = sweep_diagram(_params(3.0), [3.0], 16)
    flats = [pt for pt in pts if pt.converged and pt.amplitude < 1e-8]
    assert len(flats) == 1


def test_sweep_flags_non_converged_points():
    pts = sweep_diagram(_params(0.053), [0.053], 40, maxit=3)
    assert any(not pt.converged for pt in pts)
    for pt in pts:
        if not pt.converged:
            assert pt.residual > 1e-12
