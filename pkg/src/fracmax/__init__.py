"""Fractional maximal operators and variable weights on finite homogeneous-type spaces."""

from .spaces import (Ball, QuasiMetricSpace, ValidationError, ball, build_space,
                     doubling_constant, enumerate_balls, lower_mass_bound_report)
from .exponents import (Exponent, EtaRelationError, LHReport, check_eta_relation,
                        conjugate, lh_constants, range_on)
from .norms import luxemburg_norm, modular, weak_norm, weighted_norm
from .grids import (DyadicCube, DyadicGrid, build_grid, build_grid_family, cube_at,
                    verify_grid)
from .maximal import (MaximalResult, TestFunction, dyadic_fractional_maximal,
                      fractional_maximal, operator_norm_estimate, superlevel_set,
                      weighted_dyadic_maximal)
from .weights import (AInftyReport, ApqResult, WeightRecord, a_infty_diagnostics,
                      apq_constant, apq_dyadic_constant, derived_measures,
                      dual_constants, extremal_test_functions, specialized_constants)
from .czd import CZDecomposition, cz_constant, cz_decompose, cz_stack, cz_verify

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
