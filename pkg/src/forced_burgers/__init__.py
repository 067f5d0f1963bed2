"""Entropy solutions of the time-periodically forced inviscid Burgers equation on the circle.

The solution operator is computed through the Lax-Oleinik semigroup of the
associated Hamilton-Jacobi equation; the asymptotic machinery measures the
effective Hamiltonian, rotation numbers and periodic limit states.
"""
from .asymptotics import (AsymptoticsReport, corollary_check, detect_asymptotic_period,
                          estimate_alpha, estimate_rho, rational_period, rho_from_alpha)
from .entropy import (entropy_evolve, entropy_iterates, entropy_step, godunov_evolve,
                      reversed_spec)
from .errors import (BlowUp, CflViolation, ConfigError, ForcedBurgersError, NoConvergence,
                     NoPeriodDetected, SizeMismatch, WindowExceeded, WindowSaturated)
from .graphs import GraphCurve, extract_graph, graph_inclusion_check, hausdorff_distance
from .grid import GridFunction, l1_distance, mean, primitive, staggered_derivative, sup_distance
from .hamiltonian import HamiltonianSpec, Kind, PhasePoint, integrate_flow, time_one_map
from .lax_oleinik import (LaxOleinikConfig, ValueChain, backtrack_minimizer, lax_oleinik_chain,
                          lax_oleinik_period, lax_oleinik_step)

__version__ = "0.1.0"
