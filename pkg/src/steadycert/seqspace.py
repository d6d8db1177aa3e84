"""Weighted sequence space of Fourier cosine coefficients.

A finite coefficient vector u represents the even periodic function

    u(x) = u_0 + 2 * sum_{n>=1} u_n cos(n pi (x - a) / (b - a))

on the interval (a, b).  The norm is the geometrically weighted l^1 norm
``|u_0| + 2 sum |u_n| nu^n`` with weight nu >= 1; under the reflected
discrete convolution the space is a unital Banach algebra, and the norm
dominates the C^0 norm of the represented function.  All rigorous
operations act on interval coefficients (GeoSeq) and return enclosures.

Operator norms use the weighted column-sum formula: for an operator L
acting columnwise, ||L|| = sup_n ||L e_n|| / xi_n with xi_0 = 1 and
xi_n = 2 nu^n.  Upper-rounded xi powers are used inside norms and
lower-rounded ones as column divisors, so every reported norm is an
upper enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from steadycert import _ivk
from steadycert.enclosure import Enclosure, enclose_sum, fsum_down, fsum_up

__all__ = [
    "Geometry",
    "GeoSeq",
    "SeqPair",
    "FiniteOperator",
    "GeometryMismatch",
    "xi",
    "norm_nu",
    "conv",
    "conv_floats",
    "laplacian",
    "inv_laplacian",
    "truncate",
    "eval_at",
    "eval_grid",
    "eval_sup",
    "mult_matrix",
    "opnorm_finite",
    "opnorm_block",
    "save_pair",
    "load_pair",
]


class GeometryMismatch(ValueError):
    """Operands live on different intervals or carry different weights."""


@dataclass(frozen=True, slots=True)
class Geometry:
    """Domain endpoints and the norm weight."""

    a: float
    b: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "nu", float(self.nu))
        if not (self.b > self.a):
            raise ValueError(f"need b > a, got ({self.a}, {self.b})")
        if not (self.nu >= 1.0) or not math.isfinite(self.nu):
            raise ValueError(f"need nu >= 1, got {self.nu}")

    @property
    def length(self) -> Enclosure:
        return Enclosure.point(self.b) - Enclosure.point(self.a)


def _check_geom(x, y):
    if x.geom != y.geom:
        raise GeometryMismatch(f"{x.geom} vs {y.geom}")


# -- weight and multiplier tables ----------------------------------------


@lru_cache(maxsize=128)
def _xi_table(nu: float, count: int):
    """Interval enclosures of xi_n = 1 (n=0) or 2 nu^n, as lo/hi arrays."""
    lo = np.empty(count)
    hi = np.empty(count)
    lo[0] = hi[0] = 1.0
    pw = Enclosure(1.0, 1.0)
    nu_e = Enclosure.point(nu)
    two = Enclosure.point(2.0)
    for n in range(1, count):
        pw = pw * nu_e
        x = two * pw
        lo[n], hi[n] = x.lo, x.hi
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def xi(n: int, nu: float) -> float:
    """Upper-rounded weight xi_n(nu)."""
    if n == 0:
        return 1.0
    return _xi_table(nu, n + 1)[1][n]


_PI_LO = math.pi  # the nearest double to pi lies below it
_PI_HI = math.nextafter(math.pi, math.inf)


@lru_cache(maxsize=64)
def _mu_table(a: float, b: float, count: int):
    """Enclosures of mu_n = (n pi / (b-a))^2 (Laplacian magnitudes)."""
    n = np.arange(count, dtype=float)
    L = Enclosure.point(b) - Enclosure.point(a)
    num_lo, num_hi = _ivk.mul(n, n, _PI_LO, _PI_HI)
    q_lo = np.where(n == 0.0, 0.0, _ivk.nudge_down(num_lo / L.hi))
    q_hi = np.where(n == 0.0, 0.0, _ivk.nudge_up(num_hi / L.lo))
    sq_lo, sq_hi = _ivk.mul(q_lo, q_hi, q_lo, q_hi)
    sq_lo = np.maximum(sq_lo, 0.0)
    sq_lo.setflags(write=False)
    sq_hi.setflags(write=False)
    return sq_lo, sq_hi


@lru_cache(maxsize=64)
def _inv_mu_table(a: float, b: float, count: int):
    """Enclosures of ((b-a) / (n pi))^2 for n >= 1; index 0 is zero."""
    n = np.arange(count, dtype=float)
    L = Enclosure.point(b) - Enclosure.point(a)
    den_lo, den_hi = _ivk.mul(n, n, _PI_LO, _PI_HI)
    with np.errstate(divide="ignore"):
        q_lo = np.where(n == 0.0, 0.0, _ivk.nudge_down(L.lo / den_hi))
        q_hi = np.where(n == 0.0, 0.0, _ivk.nudge_up(L.hi / den_lo))
    sq_lo, sq_hi = _ivk.mul(q_lo, q_hi, q_lo, q_hi)
    sq_lo = np.maximum(sq_lo, 0.0)
    sq_lo.setflags(write=False)
    sq_hi.setflags(write=False)
    return sq_lo, sq_hi


def tail_inv_factor(geom: Geometry, start: int) -> Enclosure:
    """Upper bound of ((b-a)/(n pi))^2 over all n >= start."""
    if start < 1:
        raise ValueError("start must be >= 1")
    L = geom.length
    den = Enclosure.point(float(start)) * Enclosure(_PI_LO, _PI_HI)
    q = L / den
    return q * q


# -- sequences ------------------------------------------------------------


class GeoSeq:
    """Finite cosine-coefficient sequence with interval entries."""

    __slots__ = ("geom", "lo", "hi")

    def __init__(self, geom: Geometry, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise ValueError("coefficient arrays must be equal-length 1-d")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise ValueError("NaN coefficient")
        if (lo > hi).any():
            raise ValueError("empty coefficient interval")
        self.geom = geom
        self.lo = lo
        self.hi = hi
        lo.setflags(write=False)
        hi.setflags(write=False)

    # constructors
    @classmethod
    def zeros(cls, geom: Geometry, degree: int = 0) -> "GeoSeq":
        z = np.zeros(degree + 1)
        return cls(geom, z, z.copy())

    @classmethod
    def basis(cls, geom: Geometry, n: int, value: float = 1.0) -> "GeoSeq":
        z = np.zeros(n + 1)
        z[n] = value
        return cls(geom, z, z.copy())

    @classmethod
    def constant(cls, geom: Geometry, value: float) -> "GeoSeq":
        return cls(geom, [value], [value])

    @classmethod
    def from_floats(cls, geom: Geometry, values) -> "GeoSeq":
        v = np.asarray(values, dtype=float)
        return cls(geom, v, v.copy())

    @classmethod
    def from_enclosures(cls, geom: Geometry, encs: Iterable[Enclosure]) -> "GeoSeq":
        encs = list(encs)
        return cls(geom, [e.lo for e in encs], [e.hi for e in encs])

    # inspection
    @property
    def degree(self) -> int:
        return len(self.lo) - 1

    def __len__(self) -> int:
        return len(self.lo)

    def __getitem__(self, n: int) -> Enclosure:
        return Enclosure(self.lo[n], self.hi[n])

    def mid(self) -> np.ndarray:
        m, _ = _ivk.to_midrad(self.lo, self.hi)
        return m

    @property
    def is_thin(self) -> bool:
        return bool((self.lo == self.hi).all())

    def __repr__(self):
        return f"GeoSeq(degree={self.degree}, geom={self.geom})"

    def __eq__(self, other):
        if not isinstance(other, GeoSeq):
            return NotImplemented
        return (
            self.geom == other.geom
            and self.lo.shape == other.lo.shape
            and (self.lo == other.lo).all()
            and (self.hi == other.hi).all()
        )

    # arithmetic
    def pad(self, degree: int) -> "GeoSeq":
        if degree < self.degree:
            raise ValueError("pad cannot shrink; use truncate")
        if degree == self.degree:
            return self
        extra = degree - self.degree
        return GeoSeq(
            self.geom,
            np.concatenate([self.lo, np.zeros(extra)]),
            np.concatenate([self.hi, np.zeros(extra)]),
        )

    def _aligned(self, other: "GeoSeq"):
        _check_geom(self, other)
        d = max(self.degree, other.degree)
        return self.pad(d), other.pad(d)

    def __add__(self, other: "GeoSeq") -> "GeoSeq":
        x, y = self._aligned(other)
        lo, hi = _ivk.add(x.lo, x.hi, y.lo, y.hi)
        return GeoSeq(self.geom, lo, hi)

    def __sub__(self, other: "GeoSeq") -> "GeoSeq":
        x, y = self._aligned(other)
        lo, hi = _ivk.sub(x.lo, x.hi, y.lo, y.hi)
        return GeoSeq(self.geom, lo, hi)

    def __neg__(self) -> "GeoSeq":
        return GeoSeq(self.geom, -self.hi, -self.lo)

    def scale(self, c: Union[Enclosure, float, int]) -> "GeoSeq":
        if not isinstance(c, Enclosure):
            c = Enclosure.point(c)
        if c.is_point:
            if c.lo == 1.0:
                return self
            if c.lo == 0.0:
                return GeoSeq.zeros(self.geom, self.degree)
            if c.lo == -1.0:
                return -self
        lo, hi = _ivk.mul(self.lo, self.hi, c.lo, c.hi)
        return GeoSeq(self.geom, lo, hi)


@dataclass(frozen=True, slots=True)
class SeqPair:
    """Pair of sequences (cell density component, chemical component)."""

    u: GeoSeq
    v: GeoSeq

    def __post_init__(self):
        _check_geom(self.u, self.v)

    @property
    def geom(self) -> Geometry:
        return self.u.geom

    @property
    def degree(self) -> int:
        return max(self.u.degree, self.v.degree)

    def pad(self, degree: int) -> "SeqPair":
        return SeqPair(self.u.pad(degree), self.v.pad(degree))

    def norm(self) -> Enclosure:
        return norm_nu(self.u) + norm_nu(self.v)


# -- core operations -------------------------------------------------------


def norm_nu(u: Union[GeoSeq, SeqPair]) -> Enclosure:
    """Enclosure of the weighted l^1 norm."""
    if isinstance(u, SeqPair):
        return norm_nu(u.u) + norm_nu(u.v)
    ab_lo, ab_hi = _ivk.abs_(u.lo, u.hi)
    xlo, xhi = _xi_table(u.geom.nu, len(u))
    t_lo, t_hi = _ivk.mul(ab_lo, ab_hi, xlo, xhi)
    return Enclosure(fsum_down(t_lo), fsum_up(t_hi))


def _sym(arr: np.ndarray) -> np.ndarray:
    # symmetric extension u_{|k|}, k = -P..P
    if len(arr) == 1:
        return arr
    return np.concatenate([arr[:0:-1], arr])


def conv(u: GeoSeq, v: GeoSeq) -> GeoSeq:
    """Reflected discrete convolution (the algebra product).

    (u*v)_n = sum_{k in Z} u_{|k|} v_{|n-k|}, computed as an O(N^2)
    midpoint-radius convolution of the symmetric extensions.
    """
    _check_geom(u, v)
    if u.degree == 0:
        return v.scale(u[0])
    if v.degree == 0:
        return u.scale(v[0])
    P, Q = u.degree, v.degree
    um, ur = _ivk.to_midrad(u.lo, u.hi)
    vm, vr = _ivk.to_midrad(v.lo, v.hi)
    cm, cr = _ivk.conv_midrad(_sym(um), _sym(ur), _sym(vm), _sym(vr))
    lo, hi = _ivk.from_midrad(cm[P + Q :], cr[P + Q :])
    return GeoSeq(u.geom, lo, hi)


def conv_floats(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain float reflected convolution (non-rigorous helper)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    P, Q = len(a) - 1, len(b) - 1
    full = np.convolve(_sym(a), _sym(b))
    return full[P + Q :]


def laplacian(u: GeoSeq) -> GeoSeq:
    """Second derivative: multiplies mode n by -(n pi / (b-a))^2."""
    mu_lo, mu_hi = _mu_table(u.geom.a, u.geom.b, len(u))
    lo, hi = _ivk.mul(u.lo, u.hi, -mu_hi, -mu_lo)
    return GeoSeq(u.geom, lo, hi)


def inv_laplacian(u: GeoSeq) -> GeoSeq:
    """Zero-mean antiderivative: mode 0 to 0, mode n by -((b-a)/(n pi))^2."""
    im_lo, im_hi = _inv_mu_table(u.geom.a, u.geom.b, len(u))
    lo, hi = _ivk.mul(u.lo, u.hi, -im_hi, -im_lo)
    return GeoSeq(u.geom, lo, hi)


def truncate(u: GeoSeq, level: int) -> tuple[GeoSeq, Enclosure]:
    """Split u into (head of degree level, norm bound of the dropped tail)."""
    if level < 0:
        raise ValueError("level must be >= 0")
    if level >= u.degree:
        return u.pad(level), Enclosure(0.0, 0.0)
    head = GeoSeq(u.geom, u.lo[: level + 1].copy(), u.hi[: level + 1].copy())
    t_lo = np.zeros(len(u))
    t_hi = np.zeros(len(u))
    t_lo[level + 1 :] = u.lo[level + 1 :]
    t_hi[level + 1 :] = u.hi[level + 1 :]
    tail = GeoSeq(u.geom, t_lo, t_hi)
    return head, norm_nu(tail)


def eval_at(u: GeoSeq, x: float) -> Enclosure:
    """Enclosure of the represented function at a point.

    Cosines are nearest-rounded and padded outward to cover libm and
    argument rounding error; suits plotting and cross-checks, not the
    proof path.
    """
    geom = u.geom
    terms = [u[0]]
    width = geom.b - geom.a
    for n in range(1, len(u)):
        t = n * math.pi * (x - geom.a) / width
        if t == 0.0:
            c = Enclosure(1.0, 1.0)
        else:
            cv = math.cos(t)
            slack = 4e-16 * (1.0 + abs(t))
            c = Enclosure(max(-1.0, cv - slack), min(1.0, cv + slack))
        terms.append(Enclosure.point(2.0) * u[n] * c)
    return enclose_sum(terms)


def eval_grid(u: GeoSeq, samples: int = 2048):
    """Float samples of the midpoint series on a uniform interior grid."""
    from scipy.fft import dct

    geom = u.geom
    m = u.mid()
    if samples < len(m):
        raise ValueError("need at least as many samples as coefficients")
    padded = np.zeros(samples)
    padded[: len(m)] = m
    vals = dct(padded, type=3)  # x_0 + 2 sum x_n cos(pi n (2j+1) / (2M))
    xs = geom.a + (geom.b - geom.a) * (np.arange(samples) + 0.5) / samples
    return xs, vals


def eval_sup(u: GeoSeq, samples: int = 2048) -> float:
    """Non-rigorous estimate of sup |u| by dense sampling."""
    _, vals = eval_grid(u, samples)
    return float(np.max(np.abs(vals)))


# -- finite operators -------------------------------------------------------


class FiniteOperator:
    """Dense interval matrix acting on leading coefficients.

    Columns beyond ``cols-1`` are treated as zero, so the weighted
    column-sup over the stored columns is the exact operator norm of the
    represented (finite-rank) operator.
    """

    __slots__ = ("geom", "lo", "hi")

    def __init__(self, geom: Geometry, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.ndim != 2 or lo.shape != hi.shape:
            raise ValueError("need equal-shape 2-d arrays")
        if (lo > hi).any():
            raise ValueError("empty entry interval")
        self.geom = geom
        self.lo = lo
        self.hi = hi
        lo.setflags(write=False)
        hi.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.lo.shape[0]

    @property
    def cols(self) -> int:
        return self.lo.shape[1]

    @classmethod
    def identity(cls, geom: Geometry, n: int) -> "FiniteOperator":
        e = np.eye(n)
        return cls(geom, e, e.copy())

    @classmethod
    def from_floats(cls, geom: Geometry, m) -> "FiniteOperator":
        m = np.asarray(m, dtype=float)
        return cls(geom, m, m.copy())

    @classmethod
    def zeros(cls, geom: Geometry, rows: int, cols: int) -> "FiniteOperator":
        z = np.zeros((rows, cols))
        return cls(geom, z, z.copy())

    def entry(self, i: int, j: int) -> Enclosure:
        return Enclosure(self.lo[i, j], self.hi[i, j])

    def apply(self, u: GeoSeq) -> GeoSeq:
        if u.geom != self.geom:
            raise GeometryMismatch(f"{u.geom} vs {self.geom}")
        x = u.pad(self.cols - 1) if u.degree < self.cols - 1 else u
        if x.degree != self.cols - 1:
            raise ValueError("sequence longer than operator domain")
        lo, hi = _ivk.matmul(
            self.lo, self.hi, x.lo.reshape(-1, 1), x.hi.reshape(-1, 1)
        )
        return GeoSeq(self.geom, lo.ravel(), hi.ravel())

    def __add__(self, other: "FiniteOperator") -> "FiniteOperator":
        if self.lo.shape != other.lo.shape:
            raise ValueError("shape mismatch")
        lo, hi = _ivk.add(self.lo, self.hi, other.lo, other.hi)
        return FiniteOperator(self.geom, lo, hi)

    def __sub__(self, other: "FiniteOperator") -> "FiniteOperator":
        if self.lo.shape != other.lo.shape:
            raise ValueError("shape mismatch")
        lo, hi = _ivk.sub(self.lo, self.hi, other.lo, other.hi)
        return FiniteOperator(self.geom, lo, hi)

    def matmul(self, other: "FiniteOperator") -> "FiniteOperator":
        lo, hi = _ivk.matmul(self.lo, self.hi, other.lo, other.hi)
        return FiniteOperator(self.geom, lo, hi)

    def scale(self, c: Union[Enclosure, float, int]) -> "FiniteOperator":
        if not isinstance(c, Enclosure):
            c = Enclosure.point(c)
        lo, hi = _ivk.mul(self.lo, self.hi, c.lo, c.hi)
        return FiniteOperator(self.geom, lo, hi)

    def row_scale(self, f_lo: np.ndarray, f_hi: np.ndarray) -> "FiniteOperator":
        """Multiply row p by the interval factor f_p (e.g. Laplacian)."""
        lo, hi = _ivk.mul(self.lo, self.hi, f_lo[:, None], f_hi[:, None])
        return FiniteOperator(self.geom, lo, hi)

    def col_scale(self, f_lo: np.ndarray, f_hi: np.ndarray) -> "FiniteOperator":
        lo, hi = _ivk.mul(self.lo, self.hi, f_lo[None, :], f_hi[None, :])
        return FiniteOperator(self.geom, lo, hi)


def mult_matrix(u: GeoSeq, rows: int, cols: int) -> FiniteOperator:
    """Dense slice of the multiplication operator M(u).

    M(u)_{p,0} = u_p and M(u)_{p,q} = u_{|p-q|} + u_{p+q} for q >= 1,
    with out-of-range coefficients read as zero.
    """
    need = rows + cols
    pad_lo = np.zeros(need)
    pad_hi = np.zeros(need)
    m = min(len(u), need)
    pad_lo[:m] = u.lo[:m]
    pad_hi[:m] = u.hi[:m]
    p = np.arange(rows)[:, None]
    q = np.arange(cols)[None, :]
    i1 = np.abs(p - q)
    i2 = p + q
    a_lo, a_hi = pad_lo[i1], pad_hi[i1]
    b_lo, b_hi = pad_lo[i2], pad_hi[i2]
    lo, hi = _ivk.add(a_lo, a_hi, b_lo, b_hi)
    if cols > 0:
        lo[:, 0] = pad_lo[:rows]
        hi[:, 0] = pad_hi[:rows]
    return FiniteOperator(u.geom, lo, hi)


def _weighted_colsums(L: FiniteOperator):
    ab_lo, ab_hi = _ivk.abs_(L.lo, L.hi)
    xlo, xhi = _xi_table(L.geom.nu, L.rows)
    w_lo, w_hi = _ivk.mul(ab_lo, ab_hi, xlo[:, None], xhi[:, None])
    lo = np.array([fsum_down(w_lo[:, k]) for k in range(L.cols)])
    hi = np.array([fsum_up(w_hi[:, k]) for k in range(L.cols)])
    return lo, hi


def _col_ratio_max(sum_los, sum_his, geom: Geometry, cols: int) -> Enclosure:
    xlo, xhi = _xi_table(geom.nu, cols)
    best = Enclosure(0.0, 0.0)
    for k in range(cols):
        r = Enclosure(sum_los[k], sum_his[k]) / Enclosure(xlo[k], xhi[k])
        best = best.max_with(r)
    return best


def opnorm_finite(L: FiniteOperator) -> Enclosure:
    """Operator norm of the finite-rank operator represented by L."""
    lo, hi = _weighted_colsums(L)
    return _col_ratio_max(lo, hi, L.geom, L.cols)


def opnorm_block(
    L11: FiniteOperator,
    L12: FiniteOperator,
    L21: FiniteOperator,
    L22: FiniteOperator,
) -> Enclosure:
    """Norm of a 2x2 block operator on the product space (sum norm)."""
    blocks = (L11, L12, L21, L22)
    shape = blocks[0].lo.shape
    if any(b.lo.shape != shape for b in blocks):
        raise ValueError("blocks must share one shape")
    s11 = _weighted_colsums(L11)
    s12 = _weighted_colsums(L12)
    s21 = _weighted_colsums(L21)
    s22 = _weighted_colsums(L22)
    cols = blocks[0].cols
    geom = blocks[0].geom
    xlo, xhi = _xi_table(geom.nu, cols)
    best = Enclosure(0.0, 0.0)
    for k in range(cols):
        c1 = Enclosure(s11[0][k], s11[1][k]) + Enclosure(s21[0][k], s21[1][k])
        c2 = Enclosure(s12[0][k], s12[1][k]) + Enclosure(s22[0][k], s22[1][k])
        r = c1.max_with(c2) / Enclosure(xlo[k], xhi[k])
        best = best.max_with(r)
    return best


# -- serialization ----------------------------------------------------------

_MAGIC = "geoseq-v1"


def save_pair(path, pair: SeqPair) -> None:
    """Write a coefficient pair in the bit-exact hex text format."""
    geom = pair.geom
    n = pair.degree
    p = pair.pad(n)
    lines = [
        f"{_MAGIC} a={geom.a.hex()} b={geom.b.hex()} nu={geom.nu.hex()} N={n}"
    ]
    for k in range(n + 1):
        ue, ve = p.u[k], p.v[k]
        lines.append(
            f"{k} {ue.lo.hex()} {ue.hi.hex()} {ve.lo.hex()} {ve.hi.hex()}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_pair(path) -> SeqPair:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty coefficient file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != _MAGIC:
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    fields = {}
    for tok in head[1:]:
        key, _, val = tok.partition("=")
        fields[key] = val
    try:
        geom = Geometry(
            float.fromhex(fields["a"]),
            float.fromhex(fields["b"]),
            float.fromhex(fields["nu"]),
        )
        n = int(fields["N"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: bad header fields: {exc}") from None
    if len(lines) != n + 2:
        raise ValueError(f"{path}: expected {n + 1} coefficient lines")
    ulo = np.empty(n + 1)
    uhi = np.empty(n + 1)
    vlo = np.empty(n + 1)
    vhi = np.empty(n + 1)
    for k, ln in enumerate(lines[1:]):
        toks = ln.split()
        if len(toks) != 5 or int(toks[0]) != k:
            raise ValueError(f"{path}: bad coefficient line {ln!r}")
        ulo[k], uhi[k] = float.fromhex(toks[1]), float.fromhex(toks[2])
        vlo[k], vhi[k] = float.fromhex(toks[3]), float.fromhex(toks[4])
    return SeqPair(GeoSeq(geom, ulo, uhi), GeoSeq(geom, vlo, vhi))
