"""Nonlocal Musielak-Orlicz problems with fractional Neumann conditions:
families, meshes, modular spaces, nonlocal operators and a variational solver."""
from .config import RunConfig, parse_config
from .errors import InternalConsistencyError, InvalidInputError, ValidationError
from .fields import PairField, ScalarField
from .mesh import DomainSpec, Mesh, PairQuadrature, build_mesh, pair_quadrature
from .musielak import (
    BoundFamily,
    ConditionReport,
    MusielakFamily,
    SobolevDiagnostics,
    check_conditions,
    conjugate_Phi,
    estimate_phi_bounds,
    eval_Phi,
    eval_phi,
    sobolev_conjugate_diag,
)
from .operators import apply_fractional_laplacian, apply_neumann, form_A_s, identity_residuals
from .problem import DiscreteFunction, ProblemSpec
from .reaction import ReactionFamily, eval_reaction
from .solver import (
    Ball,
    Global,
    MultiStart,
    SolveResult,
    energy_J,
    estimate_constants,
    gradient_J,
    landscape_probes,
    minimize,
    sweep_lambda,
)
from .spaces import luxemburg_norm, modular_norm, modular_rho_s, norms, relation_suite

__version__ = "0.1.0"
