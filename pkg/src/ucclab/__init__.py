"""Workbench for quantum channel code discovery and simulated optical recovery.

Core layers:

* :mod:`ucclab.linalg` - dense complex matrix helpers
* :mod:`ucclab.channels` - Kraus channels and density matrices
* :mod:`ucclab.codes` - commutant decomposition, passive and unitarily
  correctable code discovery, recovery construction and verification
* :mod:`ucclab.experiment` - simulated photon-pair bench and counting
* :mod:`ucclab.tomography` - linear inversion, maximum-likelihood
  reconstruction, state metrics
* :mod:`ucclab.workbench` - the four top-level operations
* :mod:`ucclab.service` / :mod:`ucclab.cli` - HTTP surface and thin client
"""

__version__ = "0.1.0"

from .channels import DensityMatrix, KrausChannel, anticorrelated_phase_flip
from .codes import (
    CodeReport,
    find_noiseless_subsystems,
    find_unitarily_correctable_codes,
    verify_correction,
)
from .experiment import AcquisitionConfig, PrepParams, prep_code_state, simulate_counts
from .tomography import fidelity, linear_entropy, mle_reconstruct, tangle

__all__ = [
    "AcquisitionConfig",
    "CodeReport",
    "DensityMatrix",
    "KrausChannel",
    "PrepParams",
    "__version__",
    "anticorrelated_phase_flip",
    "fidelity",
    "find_noiseless_subsystems",
    "find_unitarily_correctable_codes",
    "linear_entropy",
    "mle_reconstruct",
    "prep_code_state",
    "simulate_counts",
    "tangle",
    "verify_correction",
]
