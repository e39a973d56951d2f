"""Exact genus-0 intersection numbers for concavex bundle data on products
of projective spaces and smooth complete toric manifolds.

The computation builds hypergeometric series coefficients in exact rational
arithmetic, normalizes them with the mirror transformation, and reads off
the intersection numbers K_d together with their generating function; every
algebraic identity along the way can be verified explicitly.
"""

from .geometry import (Balloon, CohClass, FixedPoint, Geometry, GeometryError,
                       GeometrySpec, ProductGeometry, ToricGeometry,
                       build_geometry, projective_product, projective_space,
                       toric_p1xp1, toric_p2)
from .series import (AlphaValue, NovikovSeries, RationalFunctionAlpha, XPoly,
                     residue_at)
from .euler import (BundleSpec, CheckReport, EngineError, EulerSeries,
                    FactoredForm, LinForm, assemble_B, coeff_O_toric,
                    coeff_one_product, euler_data_check, euler_series_check,
                    hyper_factor, omega_form, one_series, o_series,
                    residue_closed_form, residue_direct)
from .mirror import (InvariantTable, MirrorData, MirrorError,
                     TransformedSeries, asymptotics, asymptotics_equivariant,
                     extract_invariants, extract_invariants_pipeline,
                     mirror_fg, omega_class, transform_apply,
                     transform_apply_restricted)
from .reconstruct import (LinkValue, LinkingValueTable, SolveError,
                          SolveResult, extract_from_solution, graph_sum_degree,
                          linking_values_from_resolution,
                          linking_values_from_splitting, oracle_line_count,
                          solve_linear_model)

__version__ = "0.1.0"
