"""Tests for the rigorous function-composition calculus.

The master property: for every v within delta_v of the input head, the
exact pointwise value of gamma(v), gamma'(v), gamma''(v) must lie inside
the returned head evaluated at the point, widened by the returned delta.
Exact values come from mpmath at high precision.
"""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from steadycert.enclosure import Enclosure
from steadycert.nonlinear import (
    Approx,
    CriterionError,
    ExpFraction,
    Rational,
    approx_inverse,
    approx_product,
    candidate_inverse,
    exp_apply,
    gamma_derivatives,
    norm_bound,
    poly_apply,
    polynomial_gamma,
)
from steadycert.seqspace import Geometry, GeoSeq, conv, eval_at, eval_grid, norm_nu

G = Geometry(0.0, 3 * math.pi, 1.0001)
GAMMA_RAT = Rational((1,), (1, 0, 0, 0, 0, 0, 0, 0, 0, 1))  # 1 / (1 + x^9)
GAMMA_EF = ExpFraction(9.0, 1.0)

mp = mpmath.mp


def _series_mp(coeffs, x, geom):
    width = mpmath.mpf(geom.b) - mpmath.mpf(geom.a)
    out = mpmath.mpf(float(coeffs[0]))
    for n in range(1, len(coeffs)):
        t = n * mp.pi * (mpmath.mpf(x) - mpmath.mpf(geom.a)) / width
        out += 2 * mpmath.mpf(float(coeffs[n])) * mpmath.cos(t)
    return out


def _poly_mp(fracs, x):
    out = mpmath.mpf(0)
    for c in reversed(fracs):
        out = out * x + mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
    return out


def _gamma_mp(gamma, x):
    if isinstance(gamma, Rational):
        from steadycert.nonlinear import _pderiv

        P, Q = gamma.num, gamma.den
        P1, Q1 = _pderiv(P), _pderiv(Q)
        P2, Q2 = _pderiv(P1), _pderiv(Q1)
        p, q = _poly_mp(P, x), _poly_mp(Q, x)
        p1, q1 = _poly_mp(P1, x), _poly_mp(Q1, x)
        p2, q2 = _poly_mp(P2, x), _poly_mp(Q2, x)
        g0 = p / q
        g1 = (p1 * q - p * q1) / q**2
        g2 = (p2 * q**2 - p * q2 * q - 2 * p1 * q1 * q + 2 * p * q1**2) / q**3
        return g0, g1, g2
    a = mpmath.mpf(gamma.alpha)
    E = mpmath.exp(a * (x - mpmath.mpf(gamma.shift)))
    g = 1 / (1 + E)
    g1 = -a * E * g**2
    g2 = -(a**2) * E * g**2 + 2 * a**2 * E**2 * g**3
    return g, g1, g2


def _assert_point_covered(approx: Approx, x: float, exact, fuzz=mpmath.mpf("1e-24")):
    e = eval_at(approx.head, x)
    lo = mpmath.mpf(e.lo) - mpmath.mpf(approx.delta.hi) - fuzz
    hi = mpmath.mpf(e.hi) + mpmath.mpf(approx.delta.hi) + fuzz
    assert lo <= exact <= hi


# -- candidate reciprocal ----------------------------------------------------


def test_candidate_inverse_quality():
    coeffs = np.array([2.0, 0.3, -0.1, 0.02])
    a = candidate_inverse(coeffs, 40)
    u = GeoSeq.from_floats(G, coeffs)
    inv = approx_inverse(Approx(u, Enclosure(0.0, 0.0)), 40)
    assert inv.delta.hi < 1e-12
    xs, fv = eval_grid(u, 128)
    _, av = eval_grid(inv.head, 128)
    assert np.max(np.abs(fv * av - 1.0)) < 1e-12
    assert len(a) == 41


def test_candidate_inverse_rejects_sign_change():
    with pytest.raises(CriterionError) as exc:
        candidate_inverse(np.array([0.1, 1.0]), 20)
    assert exc.value.stage == "inverse-candidate"


def test_approx_inverse_rejects_large_uncertainty():
    u = GeoSeq.from_floats(G, [2.0, 0.3])
    with pytest.raises(CriterionError) as exc:
        approx_inverse(Approx(u, Enclosure(0.0, 1.9)), 20)
    assert exc.value.stage == "inverse-neumann"


def test_approx_inverse_contains_reciprocal():
    rng = np.random.default_rng(3)
    for _ in range(15):
        c = np.concatenate([[2.5 + rng.random()], rng.standard_normal(3) * 0.2])
        u = GeoSeq.from_floats(G, c)
        inv = approx_inverse(Approx(u, Enclosure(0.0, 0.0)), 50)
        with mp.workprec(200):
            for x in rng.uniform(G.a, G.b, 4):
                fx = _series_mp(c, x, G)
                _assert_point_covered(inv, float(x), 1 / fx)


# -- product and polynomial pairs ---------------------------------------------


def test_approx_product_covers_true_products():
    rng = np.random.default_rng(5)
    for _ in range(40):
        a = rng.standard_normal(4)
        b = rng.standard_normal(4)
        da, db = rng.random() * 0.01, rng.random() * 0.01
        x = Approx(GeoSeq.from_floats(G, a), Enclosure(0.0, da))
        y = Approx(GeoSeq.from_floats(G, b), Enclosure(0.0, db))
        prod = approx_product(x, y, 6)
        # perturb each input by a coefficient bump of norm <= delta
        for _ in range(3):
            ka, kb = rng.integers(0, 4, 2)
            pa = a.copy()
            pa[ka] += da * rng.uniform(-1, 1) / (2.0 * G.nu**ka if ka else 1.0)
            pb = b.copy()
            pb[kb] += db * rng.uniform(-1, 1) / (2.0 * G.nu**kb if kb else 1.0)
            xs = rng.uniform(G.a, G.b, 3)
            with mp.workprec(160):
                for t in xs:
                    exact = _series_mp(pa, t, G) * _series_mp(pb, t, G)
                    _assert_point_covered(prod, float(t), exact)


def test_poly_apply_identity_is_exact():
    v = GeoSeq.from_floats(G, [1.0, 0.25, -0.125])
    out = poly_apply([Enclosure(0.0, 0.0), Enclosure(1.0, 1.0)], Approx(v, Enclosure(0.0, 0.0)), 10)
    assert (out.head.lo[:3] == v.lo).all()
    assert (out.head.hi[:3] == v.hi).all()
    assert out.delta == Enclosure(0.0, 0.0)


def test_poly_apply_mean_value_term():
    # P(x) = x^2, delta_v = d: delta >= 2(||v||) d approximately
    v = GeoSeq.constant(G, 3.0)
    d = 1e-4
    out = poly_apply(
        [Enclosure(0.0, 0.0), Enclosure(0.0, 0.0), Enclosure(1.0, 1.0)],
        Approx(v, Enclosure(0.0, d)),
        10,
    )
    assert out.delta.hi >= 2 * 3.0 * d
    assert out.delta.hi < 2 * (3.0 + d) * d * (1 + 1e-10)


def test_poly_apply_truncation_is_covered():
    rng = np.random.default_rng(9)
    coeffs = [Enclosure.point(c) for c in (0.5, -1.0, 0.25, 0.0, 0.125)]
    fr = [Fraction(0.5), Fraction(-1.0), Fraction(0.25), Fraction(0), Fraction(0.125)]
    c = rng.standard_normal(4) * 0.5
    v = GeoSeq.from_floats(G, c)
    out = poly_apply(coeffs, Approx(v, Enclosure(0.0, 0.0)), 5)  # forces truncation
    assert out.head.degree == 5
    assert out.delta.hi > 0
    with mp.workprec(160):
        for x in rng.uniform(G.a, G.b, 6):
            vx = _series_mp(c, x, G)
            exact = _poly_mp(fr, vx)
            _assert_point_covered(out, float(x), exact)


# -- exponential ---------------------------------------------------------------


def test_exp_apply_matches_mpmath():
    rng = np.random.default_rng(11)
    for alpha in (-3.0, 0.5, 9.0):
        c = np.concatenate([[rng.uniform(-2, 2)], rng.standard_normal(3) * 0.15])
        w = GeoSeq.from_floats(G, c)
        out = exp_apply(alpha, Approx(w, Enclosure(0.0, 0.0)), 40)
        with mp.workprec(200):
            for x in rng.uniform(G.a, G.b, 5):
                wx = _series_mp(c, x, G)
                _assert_point_covered(out, float(x), mpmath.exp(alpha * wx))


def test_exp_apply_splits_large_constant_mode():
    # constant 5 with alpha 2: naive Taylor needs a big order, split keeps it tame
    w = GeoSeq.from_floats(G, [5.0, 0.01])
    out = exp_apply(2.0, Approx(w, Enclosure(0.0, 0.0)), 30)
    with mp.workprec(200):
        wx = _series_mp([5.0, 0.01], 1.0, G)
        _assert_point_covered(out, 1.0, mpmath.exp(2 * wx))
    assert out.delta.hi < 1e-8 * math.exp(10)


def test_exp_apply_zero_alpha():
    w = GeoSeq.from_floats(G, [1.0, 2.0])
    out = exp_apply(0.0, Approx(w, Enclosure(0.0, 0.0)), 10)
    assert out.head[0].contains(1.0)
    assert norm_nu(out.head - GeoSeq.constant(G, 1.0)).hi < 1e-14


def test_taylor_order_exhaustion():
    w = GeoSeq.from_floats(G, [0.0, 30.0])  # oscillating norm 60 nu
    with pytest.raises(CriterionError) as exc:
        exp_apply(50.0, Approx(w, Enclosure(0.0, 0.0)), 10)
    assert exc.value.stage == "taylor-order"


# -- gamma families: closed-form anchor values ----------------------------------


def test_rational_derivatives_at_unit_constant():
    v = GeoSeq.constant(G, 1.0)
    g0, g1, g2 = gamma_derivatives(GAMMA_RAT, v, 0.0, 40)
    assert g0.head[0].contains(0.5) and g0.delta.hi < 1e-12
    assert g1.head[0].contains(-2.25) and g1.delta.hi < 1e-11
    assert g2.head[0].contains(2.25) and g2.delta.hi < 1e-11
    assert g1.head[0].width < 1e-12


def test_expfraction_derivatives_at_unit_constant():
    v = GeoSeq.constant(G, 1.0)
    g0, g1, g2 = gamma_derivatives(GAMMA_EF, v, 0.0, 40)
    assert g0.head[0].contains(0.5)
    assert g1.head[0].contains(-2.25)
    # second derivative vanishes at the logistic midpoint
    assert abs(g2.head[0].mid) < 1e-10
    assert g2.delta.hi < 1e-10


def test_polynomial_family_derivatives():
    pg = polynomial_gamma((1.0, -1.0, 0.0, 0.25))  # 1 - x + x^3/4
    v = GeoSeq.constant(G, 2.0)
    g0, g1, g2 = gamma_derivatives(pg, v, 0.0, 20)
    assert g0.head[0].contains(1.0)  # 1 - 2 + 2
    assert g1.head[0].contains(2.0)  # -1 + 3
    assert g2.head[0].contains(3.0)  # 6 * 2 / 4
    assert g0.delta == Enclosure(0.0, 0.0)


# -- gamma families: master containment -----------------------------------------


def _random_profile(rng, base=1.0, ripple=0.12, modes=4):
    c = np.zeros(modes + 1)
    c[0] = base + rng.uniform(-0.05, 0.05)
    c[1:] = rng.standard_normal(modes) * ripple / modes
    return c


@pytest.mark.parametrize("family", [GAMMA_RAT, GAMMA_EF], ids=["rational", "logistic"])
def test_master_containment_exact_input(family):
    rng = np.random.default_rng(13)
    for _ in range(12):
        c = _random_profile(rng)
        v = GeoSeq.from_floats(G, c)
        outs = gamma_derivatives(family, v, 0.0, 50)
        with mp.workprec(200):
            for x in rng.uniform(G.a, G.b, 5):
                vx = _series_mp(c, x, G)
                for out, exact in zip(outs, _gamma_mp(family, vx)):
                    _assert_point_covered(out, float(x), exact)


@pytest.mark.parametrize("family", [GAMMA_RAT, GAMMA_EF], ids=["rational", "logistic"])
def test_master_containment_uncertain_input(family):
    # the deltas must cover gamma of any v within delta_v of the head
    rng = np.random.default_rng(17)
    dv = 1e-5
    for _ in range(8):
        c = _random_profile(rng)
        v = GeoSeq.from_floats(G, c)
        outs = gamma_derivatives(family, v, dv, 50)
        for _ in range(3):
            k = int(rng.integers(0, len(c)))
            bump = dv * rng.uniform(-1, 1) / (2.0 * G.nu**k if k else 1.0)
            cp = c.copy()
            cp[k] += bump
            pert = GeoSeq.from_floats(G, cp)
            assert norm_nu(pert - v).hi <= dv * (1 + 1e-12)
            with mp.workprec(200):
                for x in rng.uniform(G.a, G.b, 3):
                    vx = _series_mp(cp, x, G)
                    for out, exact in zip(outs, _gamma_mp(family, vx)):
                        _assert_point_covered(out, float(x), exact)


def test_deltas_monotone_in_input_uncertainty():
    rng = np.random.default_rng(19)
    c = _random_profile(rng)
    v = GeoSeq.from_floats(G, c)
    for family in (GAMMA_RAT, GAMMA_EF):
        prev = (0.0, 0.0, 0.0)
        for dv in (0.0, 1e-10, 1e-7, 1e-5):
            outs = gamma_derivatives(family, v, dv, 40)
            cur = tuple(o.delta.hi for o in outs)
            assert all(a <= b * (1 + 1e-12) + 1e-300 for a, b in zip(prev, cur))
            prev = cur


def test_retry_trigger_on_large_ball():
    # a fat uncertainty ball defeats the Neumann criterion; callers halve and retry
    v = GeoSeq.constant(G, 1.0)
    with pytest.raises(CriterionError):
        gamma_derivatives(GAMMA_RAT, v, 0.5, 40)


# -- float sampling helpers ------------------------------------------------------


def test_rational_sampling_matches_formula():
    xs = np.linspace(0.2, 2.0, 11)
    vals = GAMMA_RAT.sample(xs)
    assert np.allclose(vals, 1.0 / (1.0 + xs**9), rtol=1e-14)
    d1 = GAMMA_RAT.sample_d1(xs)
    assert np.allclose(d1, -9 * xs**8 / (1.0 + xs**9) ** 2, rtol=1e-12)


def test_expfraction_sampling_stable_for_extreme_arguments():
    xs = np.array([-1e3, -10.0, 0.0, 1.0, 10.0, 1e3])
    with np.errstate(all="raise"):
        vals = GAMMA_EF.sample(xs)
        d1 = GAMMA_EF.sample_d1(xs)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert vals[0] == pytest.approx(1.0)
    assert vals[-1] == pytest.approx(0.0, abs=1e-300)
    assert np.all(d1 <= 0.0)
    assert d1[3] == pytest.approx(-2.25, rel=1e-12)


def test_norm_bound_combines_head_and_delta():
    v = GeoSeq.constant(G, 2.0)
    x = Approx(v, Enclosure(0.0, 0.5))
    nb = norm_bound(x)
    assert nb.contains(2.5)


def test_rational_rejects_zero_denominator():
    with pytest.raises(ValueError):
        Rational((1,), (0,))
