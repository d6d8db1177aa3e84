"""Certified existence bounds and the contraction verdict.

Given a finite cosine candidate, this module builds an approximate inverse
of the linearized steady-state operator (dense head blocks plus
multiplication-operator tails), evaluates rigorous norm bounds Y, Z1, Z2,
and checks the Newton-Kantorovich radius condition.  Every returned number
is an enclosure of the corresponding real quantity; a ``Proved``
certificate is a machine-checkable existence proof for a true steady
state within the reported radius of the candidate.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

import numpy as np

from .enclosure import Enclosure
from .nonlinear import (
    Approx,
    CriterionError,
    ExpFraction,
    Rational,
    candidate_inverse,
    gamma_derivatives,
)
from .seqspace import (
    FiniteOperator,
    GeoSeq,
    Geometry,
    SeqPair,
    _inv_mu_table,
    _mu_table,
    conv,
    conv_floats,
    mult_matrix,
    norm_nu,
    opnorm_block,
    opnorm_finite,
    tail_inv_factor,
)
from .system import Params, jacobian_blocks, residual_head

__all__ = [
    "AOpNorms",
    "BlockTailOperator",
    "Certificate",
    "Status",
    "bound_Y",
    "bound_Z1",
    "bound_Z2",
    "build_A",
    "certificate_from_json",
    "certificate_to_json",
    "certify_candidate",
    "file_digest",
    "nk_check",
    "opnorms_A",
]

GammaFamily = Union[Rational, ExpFraction]


class Status(enum.Enum):
    """Outcome of the radius check, ordered by where it first fails."""

    PROVED = "Proved"
    FAILED_Z1 = "FailedZ1"
    FAILED_DISC = "FailedDisc"
    FAILED_RADIUS = "FailedRadius"


@dataclass(frozen=True)
class BlockTailOperator:
    """Approximate inverse acting blockwise in mode space.

    On modes below ``2n`` the four dense head blocks apply; on modes at
    and above ``2n`` the action is multiplication by ``w`` composed with
    the inverse Laplacian.  ``w21`` is identically zero and ``w22``
    encloses (1/d) times the unit mode, so the second row of the tail is
    the exact inverse of its diagonal part.
    """

    head11: FiniteOperator
    head12: FiniteOperator
    head21: FiniteOperator
    head22: FiniteOperator
    w11: GeoSeq
    w12: GeoSeq
    w21: GeoSeq
    w22: GeoSeq
    n: int

    @property
    def geom(self) -> Geometry:
        return self.w11.geom

    @property
    def cut(self) -> int:
        """First mode handled by the tail part."""
        return 2 * self.n


@dataclass(frozen=True)
class AOpNorms:
    """Certified operator norms consumed by the Y, Z1, Z2 bounds.

    ``a11_lap`` bounds the first head row composed with the Laplacian,
    ``a11_u`` the composition with multiplication by the candidate u,
    and ``w_block`` the 2x2 multiplication tail as a block operator.
    """

    a11_lap: Enclosure
    a21_lap: Enclosure
    a11: Enclosure
    a21: Enclosure
    a11_u: Enclosure
    a21_u: Enclosure
    w_block: Enclosure


def build_A(
    pair: SeqPair,
    params: Params,
    gammas: tuple[Approx, Approx, Approx],
    gp_u: GeoSeq | None = None,
) -> BlockTailOperator:
    """Assemble the approximate inverse for a candidate.

    The head blocks come from a float-level dense inversion of the
    derivative truncated to 4n modes, cut back to 2n; the proof never
    relies on their quality, only on the residual norms computed later.
    The tail sequences are float candidates promoted to enclosures: any
    fixed choice yields a valid (if possibly useless) operator.
    """
    n = pair.degree
    if n < 1:
        raise ValueError("candidate must carry at least one nonconstant mode")
    geom = pair.geom
    g0, g1, _ = gammas
    if gp_u is None:
        gp_u = conv(g1.head, pair.u)
    big = 4 * n
    l11, l12, l21, l22 = jacobian_blocks(params, pair, g0.head, gp_u, big, big)
    dense = np.block(
        [
            [0.5 * (l11.lo + l11.hi), 0.5 * (l12.lo + l12.hi)],
            [0.5 * (l21.lo + l21.hi), 0.5 * (l22.lo + l22.hi)],
        ]
    )
    try:
        inv = np.linalg.inv(dense)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(
            "truncated derivative is numerically singular; the candidate "
            "sits too close to a bifurcation point to certify"
        ) from exc
    cut = 2 * n
    head11 = FiniteOperator.from_floats(geom, inv[:cut, :cut])
    head12 = FiniteOperator.from_floats(geom, inv[:cut, big : big + cut])
    head21 = FiniteOperator.from_floats(geom, inv[big : big + cut, :cut])
    head22 = FiniteOperator.from_floats(geom, inv[big : big + cut, big : big + cut])

    w11_arr = candidate_inverse(g0.head.mid(), cut)
    w12_arr = (-1.0 / params.d) * conv_floats(w11_arr, gp_u.mid())[: cut + 1]
    w11 = GeoSeq.from_floats(geom, w11_arr)
    w12 = GeoSeq.from_floats(geom, w12_arr)
    w21 = GeoSeq.zeros(geom, cut)
    inv_d = Enclosure.point(1.0) / Enclosure.point(params.d)
    w22 = GeoSeq.from_enclosures(
        geom, [inv_d] + [Enclosure.point(0.0)] * cut
    )
    return BlockTailOperator(
        head11, head12, head21, head22, w11, w12, w21, w22, n
    )


def _a_slice(
    a: BlockTailOperator, head: FiniteOperator, w: GeoSeq, rows: int, cols: int
) -> FiniteOperator:
    """Dense rows x cols slice of one block of the approximate inverse.

    The block is the multiplication matrix of w scaled by minus the
    inverse Laplacian (zero on the constant mode), with the top-left
    square overwritten by the dense head.  The band must be kept on both
    sides of the head square: its lower-left part supplies the response
    that cancels derivative entries spilling below the head range, and
    its upper-right part cancels the head response to columns past the
    cut.  Restricting the band to a corner reintroduces one-sided
    convolution sums of order ``norm(w)`` in the defect.
    """
    cut = a.cut
    if rows < cut or cols < cut:
        raise ValueError("slice must cover the head block")
    geom = a.geom
    iv_lo, iv_hi = _inv_mu_table(geom.a, geom.b, cols)
    f_lo = -iv_hi
    f_hi = -iv_lo
    band = mult_matrix(w, rows, cols).col_scale(f_lo, f_hi)
    lo = band.lo.copy()
    hi = band.hi.copy()
    lo[:cut, :cut] = head.lo
    hi[:cut, :cut] = head.hi
    return FiniteOperator(geom, lo, hi)


def opnorms_A(a: BlockTailOperator, u_bar: GeoSeq) -> AOpNorms:
    """Certified norms of the operator blocks entering the bounds.

    Columns up to 4n are evaluated exactly on a slice wide enough for
    the full band response; columns past the slice admit closed-form
    caps because there the composition with the Laplacian collapses to
    plain multiplication by w, the bare block decays like the inverse
    eigenvalues, and a product with the candidate multiplier stays
    supported past the head.
    """
    geom = a.geom
    n = a.n
    cut = a.cut
    if u_bar.degree > n:
        raise ValueError("candidate component longer than the operator head")
    mu_lo, mu_hi = _mu_table(geom.a, geom.b, 4 * n)
    iv_cut = tail_inv_factor(geom, cut)
    iv_far = tail_inv_factor(geom, 4 * n)
    u_norm = norm_nu(u_bar)
    mu_op = mult_matrix(u_bar, 4 * n, 3 * n)

    def one_row(head: FiniteOperator, w: GeoSeq):
        w_norm = norm_nu(w)
        sl = _a_slice(a, head, w, 6 * n, 4 * n)
        lap = opnorm_finite(sl.col_scale(mu_lo, mu_hi)).max_with(w_norm)
        plain = opnorm_finite(sl).max_with(iv_far * w_norm)
        prod = sl.matmul(mu_op)
        comp = opnorm_finite(prod).max_with(w_norm * iv_cut * u_norm)
        return lap, plain, comp

    lap1, plain1, comp1 = one_row(a.head11, a.w11)
    lap2, plain2, comp2 = one_row(a.head21, a.w21)
    w_block = (norm_nu(a.w11) + norm_nu(a.w21)).max_with(
        norm_nu(a.w12) + norm_nu(a.w22)
    )
    return AOpNorms(lap1, lap2, plain1, plain2, comp1, comp2, w_block)


def bound_Y(
    a: BlockTailOperator,
    res: SeqPair,
    norms: AOpNorms,
    delta_gamma0: Enclosure,
    u_norm: Enclosure,
) -> Enclosure:
    """Residual bound: norm of A applied to the computed residual.

    The residual head has degree exactly twice the candidate degree, so
    a slice of A covering the band response to those modes applies it
    exactly.  The defect of the truncated sensitivity enters through the
    Laplacian-composed norms.
    """
    cut = a.cut
    if res.degree != cut:
        raise ValueError(f"residual degree {res.degree}, expected {cut}")
    rows = 2 * cut + 1
    cols = cut + 1
    a11 = _a_slice(a, a.head11, a.w11, rows, cols)
    a12 = _a_slice(a, a.head12, a.w12, rows, cols)
    a21 = _a_slice(a, a.head21, a.w21, rows, cols)
    a22 = _a_slice(a, a.head22, a.w22, rows, cols)
    y1 = a11.apply(res.u) + a12.apply(res.v)
    y2 = a21.apply(res.u) + a22.apply(res.v)
    exact = norm_nu(y1) + norm_nu(y2)
    drift = (norms.a11_lap + norms.a21_lap) * u_norm * delta_gamma0
    return exact + drift


def bound_Z1(
    a: BlockTailOperator,
    pair: SeqPair,
    params: Params,
    gammas: tuple[Approx, Approx, Approx],
    gp_u: GeoSeq,
    norms: AOpNorms,
    k: int,
) -> Enclosure:
    """Defect of the approximate inverse against the derivative.

    Columns up to k are evaluated exactly on slices wide enough to hold
    every nonzero entry; columns past k are bounded through the tail
    identity, whose leading term measures how far the w sequences are
    from inverting the diffusion part.  The tail identity is airtight
    once k >= 4n-1: from there on a derivative column has no mass on the
    modes the head blocks act on.  Smaller k (down to 2n-1) is accepted
    and uses the same formula, which then neglects the head response to
    the overlap columns; the pipeline default is the airtight value.
    """
    n = a.n
    cut = a.cut
    if pair.degree != n:
        raise ValueError("candidate degree does not match the operator")
    if k < 2 * n - 1:
        raise ValueError(f"split index {k} below {2 * n - 1}")
    geom = a.geom
    g0, g1, _ = gammas

    rd = k + cut + 1
    cd = k + 1
    ra = k + 2 * cut + 1
    d11, d12, d21, d22 = jacobian_blocks(params, pair, g0.head, gp_u, rd, cd)
    a11 = _a_slice(a, a.head11, a.w11, ra, rd)
    a12 = _a_slice(a, a.head12, a.w12, ra, rd)
    a21 = _a_slice(a, a.head21, a.w21, ra, rd)
    a22 = _a_slice(a, a.head22, a.w22, ra, rd)
    eye = FiniteOperator.from_floats(geom, np.eye(ra, cd))
    b11 = eye - (a11.matmul(d11) + a12.matmul(d21))
    b12 = (a11.matmul(d12) + a12.matmul(d22)).scale(-1.0)
    b21 = (a21.matmul(d11) + a22.matmul(d21)).scale(-1.0)
    b22 = eye - (a21.matmul(d12) + a22.matmul(d22))
    z1_finite = opnorm_block(b11, b12, b21, b22)

    e0 = GeoSeq.basis(geom, 0)
    t11 = e0 - conv(a.w11, g0.head)
    t12 = conv(a.w11, gp_u) + a.w12.scale(params.d)
    t22 = e0 - a.w22.scale(params.d)
    mismatch = norm_nu(t11).max_with(norm_nu(t12) + norm_nu(t22))
    one_minus = e0 - pair.u.scale(2.0)
    sigma = Enclosure.point(params.sigma)
    forcing = sigma * norm_nu(one_minus) + Enclosure.point(1.0)
    z1_tail = mismatch + tail_inv_factor(geom, k - n + 1) * norms.w_block * forcing

    drift = (norms.a11_lap + norms.a21_lap) * (
        g0.delta + norm_nu(pair.u) * g1.delta
    )
    return z1_finite + z1_tail + drift


def bound_Z2(
    norms: AOpNorms,
    params: Params,
    gammas_star: tuple[Approx, Approx, Approx],
    rstar: float,
    u_bar: GeoSeq,
) -> Enclosure:
    """Second-derivative bound over the ball of radius rstar.

    The sensitivity derivatives must have been evaluated with input
    uncertainty rstar so their deltas cover every state in the ball.
    """
    _, g1s, g2s = gammas_star
    s = norms.a11_lap + norms.a21_lap
    rs = Enclosure.point(rstar)
    z2a = s * (norm_nu(g1s.head) + g1s.delta)
    gpp_u = conv(g2s.head, u_bar)
    u_norm = norm_nu(u_bar)
    z2b = s * (
        norm_nu(gpp_u) + norm_nu(g2s.head) * rs + (u_norm + rs) * g2s.delta
    )
    z2c = (norms.a11_u + norms.a21_u + (norms.a11 + norms.a21) * rs) * (
        Enclosure.point(2.0) * Enclosure.point(params.sigma)
    )
    return z2a.max_with(z2b).max_with(z2c)


@dataclass(frozen=True)
class Certificate:
    """Outcome of one certification run.

    On success the true steady state lies within every radius r with
    upper(r_min) <= r <= lower(r_max) of the candidate in the weighted
    sequence norm, and is unique in that ball.
    """

    status: Status
    y: Enclosure
    z1: Enclosure
    z2: Enclosure
    rstar: float
    r_min: Optional[Enclosure]
    r_max: Optional[Enclosure]
    params: Optional[Params] = None
    nu: Optional[float] = None
    n: int = 0
    k: int = 0
    provenance: Mapping[str, str] = field(default_factory=dict)

    @property
    def proved(self) -> bool:
        return self.status is Status.PROVED


def nk_check(
    y: Enclosure,
    z1: Enclosure,
    z2: Enclosure,
    rstar: float,
    *,
    params: Optional[Params] = None,
    n: int = 0,
    k: int = 0,
    provenance: Optional[Mapping[str, str]] = None,
) -> Certificate:
    """Radius window from the three bounds.

    Checks, in interval arithmetic on the upper endpoints, that the
    defect is a contraction and that the discriminant is positive, then
    encloses the smallest certified radius via the conjugate form
    2Y / (1 - Z1 + sqrt((1 - Z1)^2 - 2 Y Z2)), which stays stable as
    Z2 approaches zero where it degenerates to Y / (1 - Z1).
    """
    rstar = float(rstar)
    one = Enclosure.point(1.0)
    prov = dict(provenance or {})
    nu = params.geom.nu if params is not None else None

    def done(status, r_min=None, r_max=None):
        return Certificate(
            status, y, z1, z2, rstar, r_min, r_max, params, nu, n, k, prov
        )

    if not z1.hi < 1.0:
        return done(Status.FAILED_Z1)
    om_hi = one - Enclosure.point(z1.hi)
    lhs = Enclosure.point(2.0) * Enclosure.point(y.hi) * Enclosure.point(z2.hi)
    if not lhs.hi < (om_hi * om_hi).lo:
        return done(Status.FAILED_DISC)

    om = one - z1
    two_y = Enclosure.point(2.0) * y
    disc = om * om - two_y * z2
    # the strict corner check above keeps the true discriminant positive
    disc = Enclosure(max(disc.lo, 0.0), disc.hi)
    r_min = two_y / (om + disc.sqrt())
    if z2.lo > 0.0:
        r_max = (om / z2).min_with(Enclosure.point(rstar))
    else:
        r_max = Enclosure.point(rstar)
    if r_min.hi < r_max.lo:
        return done(Status.PROVED, r_min, r_max)
    return done(Status.FAILED_RADIUS, r_min, r_max)


def certify_candidate(
    pair: SeqPair,
    params: Params,
    rstar: float,
    *,
    k: Optional[int] = None,
    provenance: Optional[Mapping[str, str]] = None,
) -> Certificate:
    """Run the full certification pipeline on one candidate.

    When a sensitivity-stage criterion fails at input uncertainty rstar
    (the ball is too wide for the series bounds to close), the radius is
    halved and the stage retried, at most six times.  The certificate
    reports the radius actually used.
    """
    if not (math.isfinite(rstar) and rstar > 0.0):
        raise ValueError(f"need a positive finite radius, got {rstar}")
    n = pair.degree
    kk = 4 * n - 1 if k is None else int(k)
    gammas = gamma_derivatives(params.gamma, pair.v, 0.0, n)
    g0, g1, _ = gammas
    gp_u = conv(g1.head, pair.u)
    a = build_A(pair, params, gammas, gp_u)
    norms = opnorms_A(a, pair.u)
    res = residual_head(params, pair, g0.head)
    u_norm = norm_nu(pair.u)
    y = bound_Y(a, res, norms, g0.delta, u_norm)
    z1 = bound_Z1(a, pair, params, gammas, gp_u, norms, kk)
    rs = float(rstar)
    star = None
    for attempt in range(7):
        try:
            star = gamma_derivatives(params.gamma, pair.v, rs, n)
            break
        except CriterionError:
            if attempt == 6:
                raise
            rs /= 2.0
    z2 = bound_Z2(norms, params, star, rs, pair.u)
    return nk_check(
        y, z1, z2, rs, params=params, n=n, k=kk, provenance=provenance
    )


# -- persistence -------------------------------------------------------------


def file_digest(path) -> str:
    """Hex sha256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _enc_json(e: Optional[Enclosure]):
    if e is None:
        return None
    return {"lo": e.lo.hex(), "hi": e.hi.hex(), "dec": [e.lo, e.hi]}


def _enc_parse(obj) -> Optional[Enclosure]:
    if obj is None:
        return None
    return Enclosure(float.fromhex(obj["lo"]), float.fromhex(obj["hi"]))


def _gamma_json(gamma: GammaFamily):
    if isinstance(gamma, Rational):
        return {
            "family": "rational",
            "num": [str(c) for c in gamma.num],
            "den": [str(c) for c in gamma.den],
        }
    return {
        "family": "expfraction",
        "alpha": float(gamma.alpha).hex(),
        "shift": float(gamma.shift).hex(),
    }


def _gamma_parse(obj) -> GammaFamily:
    if obj["family"] == "rational":
        return Rational(
            tuple(Fraction(c) for c in obj["num"]),
            tuple(Fraction(c) for c in obj["den"]),
        )
    if obj["family"] == "expfraction":
        return ExpFraction(
            float.fromhex(obj["alpha"]), float.fromhex(obj["shift"])
        )
    raise ValueError(f"unknown sensitivity family {obj['family']!r}")


def certificate_to_json(cert: Certificate) -> str:
    doc = {
        "format": "steadycert-certificate-v1",
        "status": cert.status.value,
        "Y": _enc_json(cert.y),
        "Z1": _enc_json(cert.z1),
        "Z2": _enc_json(cert.z2),
        "rstar": cert.rstar.hex(),
        "r_min": _enc_json(cert.r_min),
        "r_max": _enc_json(cert.r_max),
        "nu": None if cert.nu is None else float(cert.nu).hex(),
        "N": cert.n,
        "K": cert.k,
        "provenance": dict(cert.provenance),
    }
    if cert.params is not None:
        p = cert.params
        doc["params"] = {
            "a": p.geom.a.hex(),
            "b": p.geom.b.hex(),
            "nu": p.geom.nu.hex(),
            "sigma": p.sigma.hex(),
            "d": p.d.hex(),
            "gamma": _gamma_json(p.gamma),
        }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def certificate_from_json(text: str) -> Certificate:
    doc = json.loads(text)
    if doc.get("format") != "steadycert-certificate-v1":
        raise ValueError("not a certificate document")
    params = None
    if "params" in doc:
        p = doc["params"]
        geom = Geometry(
            float.fromhex(p["a"]), float.fromhex(p["b"]), float.fromhex(p["nu"])
        )
        params = Params(
            geom,
            float.fromhex(p["sigma"]),
            float.fromhex(p["d"]),
            _gamma_parse(p["gamma"]),
        )
    nu = doc.get("nu")
    return Certificate(
        Status(doc["status"]),
        _enc_parse(doc["Y"]),
        _enc_parse(doc["Z1"]),
        _enc_parse(doc["Z2"]),
        float.fromhex(doc["rstar"]),
        _enc_parse(doc["r_min"]),
        _enc_parse(doc["r_max"]),
        params,
        None if nu is None else float.fromhex(nu),
        int(doc["N"]),
        int(doc["K"]),
        dict(doc["provenance"]),
    )
