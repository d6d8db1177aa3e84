"""Float-level search for certification candidates.

Newton iteration in truncated cosine space, instability scalars for
eigenmode seeding, and natural continuation in sigma producing discrete
branch diagrams.  Nothing in this module carries rigor: candidates go
to the certification pipeline, which trusts none of these numbers.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.fft import dct

from steadycert.nonlinear import GammaFamily, Rational
from steadycert.seqspace import GeoSeq, Geometry, SeqPair
from steadycert.system import Params

__all__ = [
    "BranchPoint",
    "FloatSeqPair",
    "NewtonResult",
    "amplitude_of",
    "gamma_prime_values",
    "gamma_values",
    "instability_test",
    "newton_refine",
    "seed_mode",
    "sweep_diagram",
]


@dataclass(frozen=True)
class FloatSeqPair:
    """Float cosine coefficients of a candidate pair on one geometry."""

    geom: Geometry
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float).copy()
        v = np.asarray(self.v, dtype=float).copy()
        if u.ndim != 1 or u.shape != v.shape or u.size == 0:
            raise ValueError("u and v must be equal-length coefficient vectors")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("coefficients must be finite")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def degree(self) -> int:
        return self.u.size - 1

    def as_pair(self) -> SeqPair:
        """Promote to point-interval coefficients for certification."""
        return SeqPair(
            GeoSeq.from_floats(self.geom, self.u),
            GeoSeq.from_floats(self.geom, self.v),
        )

    @classmethod
    def from_pair(cls, pair: SeqPair) -> "FloatSeqPair":
        return cls(pair.geom, pair.u.mid(), pair.v.mid())


@dataclass(frozen=True)
class NewtonResult:
    """Outcome of one Newton run; history holds the residual norms."""

    state: FloatSeqPair
    residual: float
    converged: bool
    history: tuple[float, ...]


@dataclass(frozen=True)
class BranchPoint:
    """One diagram point: a state at one sigma with its peak-to-peak size."""

    sigma: float
    state: FloatSeqPair
    amplitude: float
    converged: bool
    residual: float


# -- pointwise nonlinearity values ---------------------------------------------


def _poly_vals(coeffs: Sequence, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + float(c)
    return out


def _poly_deriv(coeffs: Sequence) -> tuple:
    out = tuple(k * c for k, c in enumerate(coeffs))[1:]
    return out or (0,)


def gamma_values(gamma: GammaFamily, x) -> np.ndarray:
    """Pointwise motility values, float precision."""
    x = np.asarray(x, dtype=float)
    if isinstance(gamma, Rational):
        return _poly_vals(gamma.num, x) / _poly_vals(gamma.den, x)
    return 1.0 / (1.0 + np.exp(gamma.alpha * (x - gamma.shift)))


def gamma_prime_values(gamma: GammaFamily, x) -> np.ndarray:
    """Pointwise motility derivative, float precision."""
    x = np.asarray(x, dtype=float)
    if isinstance(gamma, Rational):
        p = _poly_vals(gamma.num, x)
        q = _poly_vals(gamma.den, x)
        dp = _poly_vals(_poly_deriv(gamma.num), x)
        dq = _poly_vals(_poly_deriv(gamma.den), x)
        return (dp * q - p * dq) / (q * q)
    e = np.exp(gamma.alpha * (x - gamma.shift))
    g = 1.0 / (1.0 + e)
    return -gamma.alpha * e * g * g


def instability_test(p: Params) -> tuple[bool, tuple[float, float]]:
    """Witness scalars for linear instability of the homogeneous state.

    Returns (unstable, (c1, disc)); instability requires both c1 < 0 and
    disc > 0, where c1 = sigma d + gamma(1) + gamma'(1) and
    disc = c1^2 - 4 sigma d gamma(1).  When gamma(1) + gamma'(1) >= 0 the
    first condition fails for every nonnegative sigma d.
    """
    g1 = float(gamma_values(p.gamma, 1.0))
    gp1 = float(gamma_prime_values(p.gamma, 1.0))
    sd = p.sigma * p.d
    c1 = sd + g1 + gp1
    disc = c1 * c1 - 4.0 * sd * g1
    return (c1 < 0.0 and disc > 0.0), (c1, disc)


# -- float spectral engine -----------------------------------------------------


def _grid_size(degree: int) -> int:
    m = 64
    while m < 4 * (degree + 1):
        m *= 2
    return m


def _synth(c: np.ndarray, m: int) -> np.ndarray:
    # values of c_0 + 2 sum c_k cos(k theta) on the half-shifted grid
    pad = np.zeros(m)
    pad[: c.size] = c
    return dct(pad, type=3)


def _analyze(vals: np.ndarray) -> np.ndarray:
    return dct(vals, type=2) / (2.0 * vals.size)


def _mu_vec(geom: Geometry, count: int) -> np.ndarray:
    return (np.arange(count) * math.pi / (geom.b - geom.a)) ** 2


def _mult_dense(c: np.ndarray, size: int) -> np.ndarray:
    pad = np.zeros(2 * size)
    take = min(c.size, pad.size)
    pad[:take] = c[:take]
    p = np.arange(size)[:, None]
    q = np.arange(size)[None, :]
    m = pad[np.abs(p - q)] + pad[p + q]
    m[:, 0] = pad[:size]
    return m


def _norm(geom: Geometry, x: np.ndarray) -> float:
    w = 2.0 * geom.nu ** np.arange(x.size)
    w[0] = 1.0
    return float(np.sum(w * np.abs(x)))


def _residual_vec(state: FloatSeqPair, p: Params) -> tuple[np.ndarray, np.ndarray]:
    n = state.degree
    m = _grid_size(n)
    mu = _mu_vec(state.geom, n + 1)
    vu = _synth(state.u, m)
    vv = _synth(state.v, m)
    gu = _analyze(gamma_values(p.gamma, vv) * vu)[: n + 1]
    uu = _analyze(vu * vu)[: n + 1]
    f1 = -mu * gu + p.sigma * (state.u - uu)
    f2 = -p.d * mu * state.v + state.u - state.v
    return f1, f2


def _jacobian_dense(state: FloatSeqPair, p: Params) -> np.ndarray:
    n = state.degree
    size = n + 1
    m = _grid_size(n)
    mu = _mu_vec(state.geom, size)
    vu = _synth(state.u, m)
    vv = _synth(state.v, m)
    g_hat = _analyze(gamma_values(p.gamma, vv))
    gpu_hat = _analyze(gamma_prime_values(p.gamma, vv) * vu)
    l11 = -mu[:, None] * _mult_dense(g_hat, size)
    l11 += p.sigma * (np.eye(size) - 2.0 * _mult_dense(state.u, size))
    l12 = -mu[:, None] * _mult_dense(gpu_hat, size)
    l21 = np.eye(size)
    l22 = np.diag(-p.d * mu - 1.0)
    return np.block([[l11, l12], [l21, l22]])


def newton_refine(
    start: FloatSeqPair, p: Params, tol: float = 1e-12, maxit: int = 50
) -> NewtonResult:
    """Newton iteration on the degree-truncated residual.

    Stops once the weighted residual norm falls below tol.  Divergence
    (non-finite or exploding residual) and singular truncated
    derivatives are reported through the converged flag rather than
    raised, so sweeps can skip bad seeds.
    """
    if tol <= 0.0 or maxit < 1:
        raise ValueError("tol must be positive and maxit at least 1")
    geom = start.geom
    size = start.degree + 1
    state = start
    hist: list[float] = []
    for _ in range(maxit):
        f1, f2 = _residual_vec(state, p)
        r = _norm(geom, f1) + _norm(geom, f2)
        hist.append(r)
        if not math.isfinite(r) or r > 1e8:
            return NewtonResult(state, r, False, tuple(hist))
        if r < tol:
            return NewtonResult(state, r, True, tuple(hist))
        try:
            step = np.linalg.solve(_jacobian_dense(state, p), np.concatenate([f1, f2]))
        except np.linalg.LinAlgError:
            return NewtonResult(state, r, False, tuple(hist))
        if not np.all(np.isfinite(step)):
            return NewtonResult(state, r, False, tuple(hist))
        # backtrack on the residual norm: full steps near a root, damped
        # ones when the motility nonlinearity makes the first guess overshoot
        lam = 1.0
        while True:
            cand = FloatSeqPair(
                geom, state.u - lam * step[:size], state.v - lam * step[size:]
            )
            g1, g2 = _residual_vec(cand, p)
            rc = _norm(geom, g1) + _norm(geom, g2)
            if math.isfinite(rc) and rc < r:
                state = cand
                break
            lam *= 0.5
            if lam < 1e-12:
                return NewtonResult(state, r, False, tuple(hist))
    f1, f2 = _residual_vec(state, p)
    r = _norm(geom, f1) + _norm(geom, f2)
    hist.append(r)
    return NewtonResult(state, r, r < tol, tuple(hist))


# -- seeding and sweeps --------------------------------------------------------


def seed_mode(geom: Geometry, degree: int, mode: int, amp: float) -> FloatSeqPair:
    """Homogeneous state plus one cosine mode of size amp in both fields.

    Perturbing v together with u reaches the pattern basins far more
    reliably than perturbing u alone: the cross-diffusion term needs a
    v gradient before it can amplify anything.
    """
    if not 1 <= mode <= degree:
        raise ValueError("mode must lie between 1 and the seed degree")
    u = np.zeros(degree + 1)
    u[0] = 1.0
    u[mode] = 0.5 * amp
    return FloatSeqPair(geom, u, u.copy())


def _flat_seed(geom: Geometry, degree: int) -> FloatSeqPair:
    u = np.zeros(degree + 1)
    u[0] = 1.0
    return FloatSeqPair(geom, u, u.copy())


def _distance(x: FloatSeqPair, y: FloatSeqPair) -> float:
    geom = x.geom
    return _norm(geom, x.u - y.u) + _norm(geom, y.v - x.v)


def amplitude_of(state: FloatSeqPair) -> float:
    """Peak-to-peak size of u by sampled evaluation (diagram y-value)."""
    vals = _synth(state.u, max(512, _grid_size(state.degree)))
    return float(np.max(vals) - np.min(vals))


def sweep_diagram(
    p: Params,
    sigma_grid: Iterable[float],
    degree: int,
    *,
    modes: Sequence[int] = (1, 2, 3, 4, 5, 6),
    amps: Sequence[float] = (0.1, 0.3),
    tol: float = 1e-12,
    maxit: int = 50,
) -> list[BranchPoint]:
    """Discrete branch diagram over a sigma grid.

    At each sigma every branch tracked from the previous grid point is
    re-refined (natural continuation) alongside fresh single-mode seeds
    of the homogeneous state.  Converged states closer than 1e-6 in
    weighted coefficient norm are merged; failures are kept but flagged.
    """
    geom = p.geom
    out: list[BranchPoint] = []
    tracked: list[FloatSeqPair] = []
    for sigma in sigma_grid:
        ps = dataclasses.replace(p, sigma=float(sigma))
        seeds = list(tracked)
        seeds.append(_flat_seed(geom, degree))
        for mode in modes:
            for amp in amps:
                seeds.append(seed_mode(geom, degree, mode, amp))
        converged: list[NewtonResult] = []
        failed: list[NewtonResult] = []
        for seed in seeds:
            res = newton_refine(seed, ps, tol, maxit)
            if not res.converged:
                failed.append(res)
                continue
            if all(_distance(res.state, c.state) >= 1e-6 for c in converged):
                converged.append(res)
        tracked = [res.state for res in converged]
        at_sigma = [
            BranchPoint(
                ps.sigma, res.state, amplitude_of(res.state), True, res.residual
            )
            for res in converged
        ]
        at_sigma.extend(
            BranchPoint(
                ps.sigma, res.state, amplitude_of(res.state), False, res.residual
            )
            for res in failed
        )
        at_sigma.sort(key=lambda bp: (not bp.converged, bp.amplitude))
        out.extend(at_sigma)
    return out
