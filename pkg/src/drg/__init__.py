"""Energy-preserving discrete Riemannian gradient (DRG) integrators for
ODEs with a first integral on finite-dimensional Riemannian manifolds."""

from .errors import (AntipodalError, CriticalPointError, DomainError,
                     NonConvergence)
from .geometry import Euclidean, Manifold, SphereProduct, center
from .gradients import (DiscreteGradient, drg_avf, drg_itoh_abe,
                        drg_midpoint, drg_mmp_spin_chain,
                        drg_symmetrized_ia, make_drg, omega_bar,
                        omega_from_field, pullback_omega, riemannian_gradient,
                        secant_residual)
from .integrators import (METHOD_IDS, CollocationMethod, CompositionMethod,
                          DRGMethod, ImplicitMidpoint, OneStepMethod,
                          RunRecord, StepConfig, adjoint_of,
                          collocation_step, compose, drg_step, gauss_nodes,
                          implicit_midpoint_step, integrate,
                          lagrange_weights, make_method)
from .harness import (ExperimentSpec, build_problem, drift_study, fit_slope,
                      level_curve_study, order_study, parse_config, read_csv,
                      run)
from .problems import (ExactChainSolution, Oscillator, SpinChain,
                       SpinningTop, benchmark_initial_conditions)

__all__ = [
    "AntipodalError", "CriticalPointError", "DomainError", "NonConvergence",
    "Euclidean", "Manifold", "SphereProduct", "center",
    "DiscreteGradient", "drg_avf", "drg_itoh_abe", "drg_midpoint",
    "drg_mmp_spin_chain", "drg_symmetrized_ia", "make_drg", "omega_bar",
    "omega_from_field", "pullback_omega", "riemannian_gradient",
    "secant_residual",
    "METHOD_IDS", "CollocationMethod", "CompositionMethod", "DRGMethod",
    "ImplicitMidpoint", "OneStepMethod", "RunRecord", "StepConfig",
    "adjoint_of", "collocation_step", "compose", "drg_step", "gauss_nodes",
    "implicit_midpoint_step", "integrate", "lagrange_weights", "make_method",
    "ExperimentSpec", "build_problem", "drift_study", "fit_slope",
    "level_curve_study", "order_study", "parse_config", "read_csv", "run",
    "ExactChainSolution", "Oscillator", "SpinChain", "SpinningTop",
    "benchmark_initial_conditions",
]

__version__ = "0.1.0"
