"""Two-photon polarization tomography and entanglement verification."""

from .qstate import (
    BASIS_2Q,
    DensityMatrix,
    PureState,
    bell_state,
    fidelity_pure,
    linear_entropy,
    maximally_mixed,
    partial_trace,
    partial_transpose,
    tensor,
    validate_density_matrix,
    werner_state,
)
from .tomo import MeasurementSet, MLConfig, ProbabilityRecord, linear_inversion, max_likelihood
from .metrics import concurrence, degree_of_polarization, metrics_report, tangle
from .io import load_rho3d, load_table1

__version__ = "0.1.0"
