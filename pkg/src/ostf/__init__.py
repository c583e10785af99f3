"""Ensemble statistics for periodic incompressible flow fields.

The library realizes probability measures on velocity fields as weighted
finite ensembles of periodic grid snapshots, and verifies the machinery of
the associated correlation hierarchy numerically: two-point structure
functions and their diagonal-continuity ladders, the mollified cubic-flux
dissipation functional with its five-term regularized energy balance, weak
hierarchy residuals, and the Onsager 1/3-criterion indicator.  A bit-exact
binary container and a batch CLI make runs reproducible end to end.
"""

__version__ = "0.1.0"

from .axioms import AxiomReport, check_axioms
from .container import read_container, read_meta, write_container
from .dissipation import (DissipationReport, dissipation_eps,
                          dissipation_report, proof_bound, structure_flux)
from .energy import (BalanceBreakdown, MollifierPairing, SeparableTwoPoint,
                     divfree_residual, five_term_balance, global_energy,
                     local_energy_residual, weak_residual_k1,
                     weak_residual_k2)
from .ensemble import Ensemble, make_ensemble, moment, time_weights
from .fields import (GridField, attach_pressure, divergence_residual,
                     downsample_half, leray_project, random_besov_field,
                     shear_flow, solve_pressure, taylor_green,
                     truncate_to_half_resolution)
from .grid import (Grid, ball_offsets, default_eps_ladder, geometric_ladder,
                   make_grid)
from .mollifier import Mollifier, make_mollifier, mollify
from .regularity import OnsagerIndicator, fit_exponent, onsager_indicator
from .structure import (MixedDCCurves, StructureFunctionCurve,
                        member_structure_function, minkowski_bound, mixed_dc,
                        structure_function, structure_functions)
from .testfn import TestFunction, centered_support, constant_mode

__all__ = [
    "__version__",
    "AxiomReport", "check_axioms",
    "read_container", "read_meta", "write_container",
    "DissipationReport", "dissipation_eps", "dissipation_report",
    "proof_bound", "structure_flux",
    "BalanceBreakdown", "MollifierPairing", "SeparableTwoPoint",
    "divfree_residual", "five_term_balance", "global_energy",
    "local_energy_residual", "weak_residual_k1", "weak_residual_k2",
    "Ensemble", "make_ensemble", "moment", "time_weights",
    "GridField", "attach_pressure", "divergence_residual", "downsample_half",
    "leray_project", "random_besov_field", "shear_flow", "solve_pressure",
    "taylor_green", "truncate_to_half_resolution",
    "Grid", "ball_offsets", "default_eps_ladder", "geometric_ladder",
    "make_grid",
    "Mollifier", "make_mollifier", "mollify",
    "OnsagerIndicator", "fit_exponent", "onsager_indicator",
    "MixedDCCurves", "StructureFunctionCurve", "member_structure_function",
    "minkowski_bound", "mixed_dc", "structure_function",
    "structure_functions",
    "TestFunction", "centered_support", "constant_mode",
]
