"""Aligned precoded compute-and-forward with dirty paper coding for the
two-user network-coded cognitive interference channel."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    FieldElement,
    GaussianInteger,
    MessageVector,
    field_add,
    field_inv,
    field_mul,
    g_inverse,
    g_map,
    precoding_coefficient,
    residue_of,
)
from .lattice import NestedLatticeCode  # noqa: E402
from .rate_engine import (  # noqa: E402
    ChannelInstance,
    RateResult,
    SchemeChoice,
    SearchConfig,
    aligned_beta,
    aligned_choice,
    converse_bounds,
    gdof_estimate,
    optimize_scheme,
    theorem1_rates,
)
from .transceiver import TrialConfig, TrialOutcome, run_trials  # noqa: E402
