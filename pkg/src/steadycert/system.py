"""Steady-state equations of the cross-diffusion chemotaxis model.

Stationary profiles (u, v) on (a, b) with no-flux boundary conditions
solve

    (gamma(v) u)'' + sigma u (1 - u) = 0
    d v'' + u - v = 0

where gamma is the density-suppressed motility and sigma the logistic
rate.  In cosine coefficients the map F(U) acts mode-by-mode through the
diagonal Laplacian and the convolution algebra; this module assembles
the residual of a finite candidate and dense slices of the derivative
blocks, both with interval coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from steadycert import _ivk
from steadycert.enclosure import Enclosure
from steadycert.nonlinear import ExpFraction, Rational
from steadycert.seqspace import (
    FiniteOperator,
    Geometry,
    GeoSeq,
    SeqPair,
    conv,
    laplacian,
    mult_matrix,
)
from steadycert.seqspace import _mu_table

__all__ = ["Params", "residual_head", "jacobian_blocks"]


@dataclass(frozen=True)
class Params:
    """Model constants: domain, logistic rate, diffusivity, sensitivity."""

    geom: Geometry
    sigma: float
    d: float
    gamma: Union[Rational, ExpFraction]

    def __post_init__(self):
        if not (self.sigma > 0.0) or not np.isfinite(self.sigma):
            raise ValueError(f"need sigma > 0, got {self.sigma}")
        if not (self.d > 0.0) or not np.isfinite(self.d):
            raise ValueError(f"need d > 0, got {self.d}")


def residual_head(
    params: Params, pair: SeqPair, gamma0_head: GeoSeq, level: int | None = None
) -> SeqPair:
    """Computed modes of F at the candidate.

    The output degree is 2N by default (N the candidate degree), which
    captures every mode the quadratic term produces; gamma0_head must
    then have degree at most N.  gamma0_head is a finite stand-in for
    gamma(v); its approximation defect is not visible here and must be
    accounted for by the caller (it enters through the bounded
    composition with the inverse Laplacian, never bare).
    """
    n = pair.degree
    target = 2 * n if level is None else level
    if gamma0_head.degree > target - n:
        raise ValueError(
            f"sensitivity head degree {gamma0_head.degree} exceeds "
            f"{target - n} for output degree {target}"
        )
    u = pair.u.pad(n)
    v = pair.v.pad(n)
    gu = conv(gamma0_head, u).pad(target)
    f1 = laplacian(gu) + (u - conv(u, u)).pad(target).scale(params.sigma)
    f2 = (laplacian(v).scale(params.d) + u - v).pad(target)
    return SeqPair(f1, f2)


def _neg_mu(geom: Geometry, rows: int):
    mu_lo, mu_hi = _mu_table(geom.a, geom.b, rows)
    return -mu_hi, -mu_lo


def jacobian_blocks(
    params: Params,
    pair: SeqPair,
    gamma0_head: GeoSeq,
    gp_u: GeoSeq,
    rows: int,
    cols: int,
):
    """Dense rows x cols slices of the four derivative blocks.

    gp_u must enclose (a truncation of) gamma'(v) * u; its multiplication
    operator forms the cross block.  Returned in row-major block order
    (L11, L12, L21, L22) where

        L11 = Lap M(gamma(v)) + sigma (I - 2 M(u))
        L12 = Lap M(gp_u)
        L21 = I
        L22 = d Lap - I
    """
    geom = params.geom
    nm_lo, nm_hi = _neg_mu(geom, rows)
    eye = FiniteOperator.from_floats(geom, np.eye(rows, cols))
    m_gamma = mult_matrix(gamma0_head, rows, cols).row_scale(nm_lo, nm_hi)
    m_u = mult_matrix(pair.u, rows, cols)
    l11 = m_gamma + (eye - m_u.scale(2.0)).scale(params.sigma)
    l12 = mult_matrix(gp_u, rows, cols).row_scale(nm_lo, nm_hi)
    l21 = eye
    d_lo, d_hi = _ivk.mul(nm_lo, nm_hi, params.d, params.d)
    l22 = eye.row_scale(d_lo, d_hi) - eye
    return l11, l12, l21, l22
