"""Outage statistics of RAKE finger replacement in soft handover.

Closed forms for partial sums of ordered i.n.d. exponential path SNRs, the
outage CDF they assemble into, and a Monte-Carlo simulator of the same
system to check them against.
"""

__version__ = "0.1.0"

from .closed_form import (
    BranchProfile,
    GscSpec,
    JointDensity,
    best_ns_sum_cdf,
    gsc_cdf,
    gsc_pdf,
    helper_I,
    helper_I_prime,
    joint_pdf_y_w1,
)
from .combinatorics import coefficient_C, f_prime, ordered_chains, permutations_of, product_to_sum
from .errors import CapacityError, ConfigError, QuadratureError, ShoRakeError, SingularityError
from .monte_carlo import McEstimate, estimate_outage_curve
from .outage import OutageModel, OutagePoint, ShoConfig, outage_cdf, outage_curve
from .pdp import PdpSpec, apply_distinctness_jitter, calibrate_gamma_bar, exponential_mip
from .quadrature import QuadratureSettings, Region, quadrature_2d
