"""Maximally entangled authority/participant states on the symmetric subspace.

Submodules: ``symspace`` (Dicke basis, irrep, Haar sampling), ``mes`` (joint
states), ``mps`` (matrix product form and sequential circuit), ``designs``
(finite weighted unitary sets), ``protocols`` (transformation and
teleportation), ``symcheck`` (symmetry-checking channel), ``cloning`` and
``cli``.
"""

from ._backend import BACKEND, HAVE_NUMBA
from .designs import WeightedUnitarySet, find_channel_design, find_state_design, verify_design
from .mes import JointState, build_phi, build_psi_singlet
from .mps import mps_contract, mps_tensors, simulate_sequential
from .protocols import projective_residual, run_teleportation, run_transformation
from .symcheck import PairMapSpec, gap_scan, spectral_gap
from .symspace import SymSpace, dicke_embedding, haar_unitary2, irrep

__version__ = "0.1.0"
