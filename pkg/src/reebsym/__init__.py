"""Symmetrization of scalar fields on triangulated spheres through measured contour trees."""

__version__ = "0.1.0"

from .analysis import (GrowthClassification, banach_indicatrix_sum, classify, growth_lower_bound,
                       holder_bound, period_profile, profile_hofer_bound, sikorav_estimate)
from .contour import (ContourTree, CriticalPoint, build_contour_tree, contour_tree, critical_points,
                      level_component_count, sublevel_area, symmetrize_field)
from .errors import *  # noqa: F401,F403
from .flatten import FlatteningMap, apply_flattening, check_flattening_bound, make_admissible_flattening
from .mesh import (BUILTIN_FIELDS, ScalarField, SphereMesh, builtin_field, load_mesh, make_icosphere,
                   normalize_mean_zero, normalize_total_area)
from .oracle import OracleReport, analytic_height_symmetrization, dense_grid_symmetrize, mc_sublevel_area
from .profile import (EvenProfile, LinkSpec, link_average, norm_k, norms_up_to, reconstruct_via_links)
from .tree import (Edge, ElementaryFunction, MeasuredTree, TreeFunction, count_reeb_edges,
                   elementary_decompose, random_tree, subtree_measure, symmetrize_elementary,
                   symmetrize_tree)
