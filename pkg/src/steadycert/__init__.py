"""Certified steady states of a cross-diffusion chemotaxis model.

The package finds approximate steady states as truncated Fourier cosine
series (:mod:`steadycert.finder`) and then proves, with directed-rounding
interval arithmetic throughout, that a true steady state lies within an
explicit coefficient-space radius of the candidate
(:mod:`steadycert.certify`).
"""

from steadycert.enclosure import Enclosure, EnclosureError, hull, sup_abs
from steadycert.seqspace import FiniteOperator, GeoSeq, Geometry, SeqPair
from steadycert.nonlinear import CriterionError, ExpFraction, Rational
from steadycert.system import Params
from steadycert.certify import (
    Certificate,
    Status,
    certificate_from_json,
    certificate_to_json,
    certify_candidate,
    nk_check,
)
from steadycert.finder import (
    BranchPoint,
    FloatSeqPair,
    NewtonResult,
    amplitude_of,
    instability_test,
    newton_refine,
    seed_mode,
    sweep_diagram,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPoint",
    "Certificate",
    "CriterionError",
    "Enclosure",
    "EnclosureError",
    "ExpFraction",
    "FiniteOperator",
    "FloatSeqPair",
    "GeoSeq",
    "Geometry",
    "NewtonResult",
    "Params",
    "Rational",
    "SeqPair",
    "Status",
    "amplitude_of",
    "certificate_from_json",
    "certificate_to_json",
    "certify_candidate",
    "hull",
    "instability_test",
    "newton_refine",
    "nk_check",
    "seed_mode",
    "sweep_diagram",
    "sup_abs",
    "__version__",
]
