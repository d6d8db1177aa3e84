"""Rigorous composition of sensitivity functions with coefficient series.

A function value g(v) is represented as a pair (head, delta): a finite
interval coefficient sequence together with a norm bound on everything
the head leaves out.  The calculus below propagates such pairs through
sums, products, reciprocals (via a numeric candidate plus a Neumann
series bound), polynomials (mean value bound with absolute-coefficient
derivative majorants) and the exponential (truncated Taylor series with
an explicit remainder).  Inputs may themselves be uncertain: an input
pair (v_head, delta_v) is mapped to an output pair whose delta covers
every v within delta_v of the head.

Three sensitivity families are supported: polynomials, rational
functions P/Q with exact rational coefficients, and logistic-type
fractions 1/(1 + exp(alpha (x - shift))).  Each family also offers plain
float sampling for the non-rigorous search code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from steadycert.enclosure import Enclosure, sup_abs
from steadycert.seqspace import GeoSeq, conv, norm_nu, truncate

__all__ = [
    "Approx",
    "CriterionError",
    "Rational",
    "ExpFraction",
    "polynomial_gamma",
    "candidate_inverse",
    "approx_add",
    "approx_sub",
    "approx_scale",
    "approx_product",
    "approx_inverse",
    "poly_apply",
    "exp_apply",
    "gamma_derivatives",
    "norm_bound",
]

_TAYLOR_MAX_ORDER = 60
_TAYLOR_TOL = 1e-14


class CriterionError(ArithmeticError):
    """A verification inequality failed; carries the stage that failed."""

    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        super().__init__(f"{stage}: {detail}" if detail else stage)


@dataclass(frozen=True, slots=True)
class Approx:
    """Finite head plus a norm bound for the discarded remainder."""

    head: GeoSeq
    delta: Enclosure

    def __post_init__(self):
        if self.delta.hi < 0:
            raise ValueError("negative remainder bound")


def norm_bound(x: Approx) -> Enclosure:
    """Upper enclosure of the norm of the represented element."""
    return norm_nu(x.head) + x.delta


_ZERO = Enclosure(0.0, 0.0)


def _as_delta(d: Union[Enclosure, float, int]) -> Enclosure:
    if isinstance(d, Enclosure):
        return d
    return Enclosure(0.0, float(d))


# -- sensitivity families ----------------------------------------------------


def _to_fracs(coeffs) -> tuple[Fraction, ...]:
    out = []
    for c in coeffs:
        if isinstance(c, float):
            out.append(Fraction(c))  # exact binary value
        else:
            out.append(Fraction(c))
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def _pderiv(c: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    if len(c) == 1:
        return (Fraction(0),)
    return tuple(k * c[k] for k in range(1, len(c)))


def _peval(c: tuple[Fraction, ...], x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for ck in reversed(c):
        out = out * x + float(ck)
    return out


@dataclass(frozen=True)
class Rational:
    """Sensitivity gamma(x) = P(x) / Q(x) with exact coefficients.

    Coefficients are ascending; ints, Fractions and exact binary floats
    are all kept exactly.
    """

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]

    def __init__(self, num, den=(1,)):
        object.__setattr__(self, "num", _to_fracs(num))
        object.__setattr__(self, "den", _to_fracs(den))
        if all(c == 0 for c in self.den):
            raise ValueError("zero denominator polynomial")

    def sample(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return _peval(self.num, xs) / _peval(self.den, xs)

    def sample_d1(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        p, q = _peval(self.num, xs), _peval(self.den, xs)
        p1, q1 = _peval(_pderiv(self.num), xs), _peval(_pderiv(self.den), xs)
        return (p1 * q - p * q1) / (q * q)

    @property
    def is_polynomial(self) -> bool:
        return self.den == (Fraction(1),)


def polynomial_gamma(coeffs) -> Rational:
    return Rational(coeffs, (1,))


@dataclass(frozen=True)
class ExpFraction:
    """Sensitivity gamma(x) = 1 / (1 + exp(alpha (x - shift)))."""

    alpha: float
    shift: float

    def sample(self, xs: np.ndarray) -> np.ndarray:
        s = self.alpha * (np.asarray(xs, dtype=float) - self.shift)
        out = np.empty_like(s)
        pos = s >= 0
        with np.errstate(under="ignore"):
            t = np.exp(-np.abs(s))
        out[pos] = t[pos] / (1.0 + t[pos])
        out[~pos] = 1.0 / (1.0 + t[~pos])
        return out

    def sample_d1(self, xs: np.ndarray) -> np.ndarray:
        s = self.alpha * (np.asarray(xs, dtype=float) - self.shift)
        with np.errstate(under="ignore"):
            t = np.exp(-np.abs(s))
            return -self.alpha * t / (1.0 + t) ** 2


GammaFamily = Union[Rational, ExpFraction]


# -- candidate construction ---------------------------------------------------


def candidate_inverse(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Float coefficients approximating the reciprocal series.

    Samples the cosine series on a dense midpoint grid, inverts the
    samples and transforms back.  Purely numeric; rigor is added later
    by the Neumann bound in approx_inverse.
    """
    from scipy.fft import dct

    coeffs = np.asarray(coeffs, dtype=float)
    m = 64
    while m < 4 * max(len(coeffs), degree + 1):
        m *= 2
    padded = np.zeros(m)
    padded[: len(coeffs)] = coeffs
    vals = dct(padded, type=3)
    vlo, vhi = float(np.min(vals)), float(np.max(vals))
    amax = float(np.max(np.abs(vals)))
    amin = float(np.min(np.abs(vals)))
    if (
        not np.isfinite(vlo)
        or not np.isfinite(vhi)
        or vlo <= 0.0 <= vhi
        or amax / amin > 1e12
    ):
        raise CriterionError(
            "inverse-candidate", f"sampled values span [{vlo:.3e}, {vhi:.3e}]"
        )
    recip = 1.0 / vals
    back = dct(recip, type=2) / (2.0 * m)
    return back[: degree + 1].copy()


# -- pair calculus -------------------------------------------------------------


def approx_add(x: Approx, y: Approx) -> Approx:
    return Approx(x.head + y.head, x.delta + y.delta)


def approx_sub(x: Approx, y: Approx) -> Approx:
    return Approx(x.head - y.head, x.delta + y.delta)


def approx_scale(x: Approx, c: Union[Enclosure, float]) -> Approx:
    if not isinstance(c, Enclosure):
        c = Enclosure.point(c)
    return Approx(x.head.scale(c), x.delta * Enclosure(0.0, sup_abs(c)))


def approx_product(x: Approx, y: Approx, level: int) -> Approx:
    """Pair for the algebra product, head truncated to the given degree."""
    full = conv(x.head, y.head)
    head, tail = truncate(full, level)
    nx, ny = norm_nu(x.head), norm_nu(y.head)
    delta = nx * y.delta + ny * x.delta + x.delta * y.delta + tail
    return Approx(head, delta)


def approx_inverse(z: Approx, level: int) -> Approx:
    """Pair for 1/z from a numeric candidate and a Neumann series bound.

    With candidate a, r = ||a z - 1|| must come out below one; then
    ||1/z - a|| <= ||a|| r / (1 - r).
    """
    geom = z.head.geom
    a = GeoSeq.from_floats(geom, candidate_inverse(z.head.mid(), level))
    one = GeoSeq.constant(geom, 1.0)
    defect = norm_nu(conv(a, z.head) - one)
    na = norm_nu(a)
    r = defect + na * z.delta
    if not r.hi < 1.0:
        raise CriterionError("inverse-neumann", f"defect bound {r.hi:.6g} >= 1")
    delta = na * r / (Enclosure(1.0, 1.0) - r)
    return Approx(a, delta)


def _abs_coeff(c: Enclosure) -> Enclosure:
    return Enclosure(0.0, sup_abs(c))


def poly_apply(
    coeffs: Sequence[Enclosure],
    v: Approx,
    level: int,
) -> Approx:
    """Pair for P(v) where P has enclosed coefficients.

    The head is the polynomial evaluated on the input head with powers
    truncated at the working degree; the delta covers the truncation
    tails plus a mean value term |P'|(||v|| + delta_v) * delta_v built
    from absolute coefficients.
    """
    geom = v.head.geom
    R = norm_nu(v.head)
    S = GeoSeq.constant(geom, 1.0).scale(coeffs[0])
    p = GeoSeq.constant(geom, 1.0)
    tau = _ZERO
    dtrunc = _ZERO
    for k in range(1, len(coeffs)):
        full = conv(p, v.head)
        p, tail = truncate(full, level)
        tau = tau * R + tail
        ck = coeffs[k]
        if not (ck.lo == 0.0 and ck.hi == 0.0):
            S = S + p.scale(ck)
            dtrunc = dtrunc + _abs_coeff(ck) * tau
    # |P'| evaluated at ||v_head|| + delta_v, Horner with absolute coefficients
    radius = Enclosure(0.0, R.hi) + Enclosure(0.0, v.delta.hi)
    dP = _ZERO
    for k in range(len(coeffs) - 1, 0, -1):
        dP = dP * radius + _abs_coeff(coeffs[k]) * Enclosure.point(float(k))
    delta = dtrunc + dP * Enclosure(0.0, v.delta.hi)
    return Approx(S, delta)


def _taylor_order(x: Enclosure, scale_hint: float) -> tuple[int, Enclosure]:
    """Smallest order whose exp-series tail bound meets the tolerance.

    Returns (K, bound on sum_{k>=K} x^k / k!) for x >= 0.
    """
    ex = x.exp()
    term = Enclosure(1.0, 1.0)
    for k in range(1, _TAYLOR_MAX_ORDER + 1):
        term = term * x / Enclosure.point(float(k))
        rem = term * ex
        if rem.hi <= _TAYLOR_TOL * (1.0 + scale_hint):
            return k, rem
    raise CriterionError(
        "taylor-order",
        f"no order up to {_TAYLOR_MAX_ORDER} meets the tolerance for |x| = {x.hi:.3g}",
    )


def exp_apply(alpha: float, w: Approx, level: int) -> Approx:
    """Pair for exp(alpha w).

    The constant mode is split off and handled by scalar interval exp;
    the oscillating part goes through a truncated Taylor series.  The
    input uncertainty delta_w enters through a mean value bound using
    the smaller of the crude majorant |alpha| e^{|alpha|(||w'|| + d)}
    and the computed-head majorant ||exp head|| e^{|alpha| d}.
    """
    geom = w.head.geom
    al = Enclosure.point(alpha)
    aa = Enclosure(0.0, abs(alpha))
    m0 = float(w.head.mid()[0])
    base = GeoSeq.constant(geom, m0)
    wp = w.head - base  # small constant mode
    A = (al * Enclosure.point(m0)).exp()
    R = norm_nu(wp)
    aR = aa * Enclosure(0.0, R.hi)
    K, rem = _taylor_order(aR, scale_hint=1.0)
    # Taylor head sum_{k<K} (alpha^k / k!) wp^k with truncated powers
    S = GeoSeq.constant(geom, 1.0)
    p = GeoSeq.constant(geom, 1.0)
    ck = Enclosure(1.0, 1.0)
    tau = _ZERO
    dtrunc = _ZERO
    for k in range(1, K):
        full = conv(p, wp)
        p, tail = truncate(full, level)
        tau = tau * R + tail
        ck = ck * al / Enclosure.point(float(k))
        S = S + p.scale(ck)
        dtrunc = dtrunc + _abs_coeff(ck) * tau
    head = S.scale(A)
    absA = Enclosure(0.0, sup_abs(A))
    dv = Enclosure(0.0, w.delta.hi)
    # mean value factor over the uncertainty ball
    crude = aa * absA * ((aa * (Enclosure(0.0, R.hi) + dv)).exp()) * dv
    head_norm = norm_nu(head) + absA * (rem + dtrunc)
    sharp = aa * head_norm * ((aa * dv).exp()) * dv
    deriv_term = Enclosure(0.0, min(crude.hi, sharp.hi))
    delta = absA * (rem + dtrunc) + deriv_term
    return Approx(head, delta)


# -- gamma and its first two derivatives --------------------------------------


def _frac_to_enc(q: Fraction) -> Enclosure:
    f = float(q)
    if not math.isfinite(f):
        raise ValueError("coefficient out of float range")
    qf = Fraction(f)
    if qf == q:
        return Enclosure.point(f)
    if qf < q:
        return Enclosure(f, math.nextafter(f, math.inf))
    return Enclosure(math.nextafter(f, -math.inf), f)


def _enc_coeffs(c: tuple[Fraction, ...]) -> list[Enclosure]:
    return [_frac_to_enc(q) for q in c]


def _rational_derivatives(
    g: Rational, v: Approx, level: int
) -> tuple[Approx, Approx, Approx]:
    P, Q = g.num, g.den
    P1, Q1 = _pderiv(P), _pderiv(Q)
    P2, Q2 = _pderiv(P1), _pderiv(Q1)
    pv = poly_apply(_enc_coeffs(P), v, level)
    p1v = poly_apply(_enc_coeffs(P1), v, level)
    p2v = poly_apply(_enc_coeffs(P2), v, level)
    if g.is_polynomial:
        return pv, p1v, p2v
    qv = poly_apply(_enc_coeffs(Q), v, level)
    q1v = poly_apply(_enc_coeffs(Q1), v, level)
    q2v = poly_apply(_enc_coeffs(Q2), v, level)
    inv = approx_inverse(qv, level)
    prod = lambda a, b: approx_product(a, b, level)  # noqa: E731
    g0 = prod(pv, inv)
    inv2 = prod(inv, inv)
    n1 = approx_sub(prod(p1v, qv), prod(pv, q1v))
    g1 = prod(n1, inv2)
    inv3 = prod(inv2, inv)
    qq = prod(qv, qv)
    t1 = prod(p2v, qq)
    t2 = prod(pv, prod(q2v, qv))
    t3 = prod(p1v, prod(q1v, qv))
    t4 = prod(pv, prod(q1v, q1v))
    n2 = approx_add(
        approx_sub(t1, t2),
        approx_sub(approx_scale(t4, 2.0), approx_scale(t3, 2.0)),
    )
    g2 = prod(n2, inv3)
    return g0, g1, g2


def _expfraction_derivatives(
    g: ExpFraction, v: Approx, level: int
) -> tuple[Approx, Approx, Approx]:
    geom = v.head.geom
    shifted = Approx(v.head - GeoSeq.constant(geom, g.shift), v.delta)
    E = exp_apply(g.alpha, shifted, level)
    one = Approx(GeoSeq.constant(geom, 1.0), _ZERO)
    denom = approx_add(one, E)
    inv = approx_inverse(denom, level)  # gamma itself
    prod = lambda a, b: approx_product(a, b, level)  # noqa: E731
    inv2 = prod(inv, inv)
    Ei2 = prod(E, inv2)
    g1 = approx_scale(Ei2, -g.alpha)
    a2 = Enclosure.point(g.alpha) * Enclosure.point(g.alpha)
    inv3 = prod(inv2, inv)
    E2 = prod(E, E)
    g2 = approx_scale(
        approx_sub(approx_scale(prod(E2, inv3), 2.0), Ei2), a2
    )
    return inv, g1, g2


def gamma_derivatives(
    gamma: Union[Rational, ExpFraction],
    v_head: GeoSeq,
    delta_v: Union[Enclosure, float],
    level: int,
) -> tuple[Approx, Approx, Approx]:
    """Pairs for gamma(v), gamma'(v), gamma''(v).

    delta_v widens the input: the returned deltas are valid for every v
    within delta_v of v_head in norm, which is how a-posteriori balls
    around a candidate enter the bounds.
    """
    v = Approx(v_head, _as_delta(delta_v))
    if isinstance(gamma, Rational):
        return _rational_derivatives(gamma, v, level)
    if isinstance(gamma, ExpFraction):
        return _expfraction_derivatives(gamma, v, level)
    raise TypeError(f"unsupported sensitivity family: {type(gamma).__name__}")
