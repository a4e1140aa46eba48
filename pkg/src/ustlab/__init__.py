"""Simulation and measurement of two-dimensional uniform spanning trees."""

__version__ = "0.1.0"

from .constants import D_F, D_S, D_W, KAPPA
from .lattice import FREE, WIRED, Graph, GridBox, RandomSource, path_graph, rect_graph
from .tree import (IntegrityError, SnapshotParseError, SpanningTree, TruncationError,
                   load_snapshot, parse_snapshot, save_snapshot, format_snapshot)
from .wilson import (count_spanning_trees, lerw_lengths, lerw_to_radius, loop_erase, sample_ust,
                     wilson)
from .metrics import (ball_inclusion_stats, covering_number, intrinsic_ball, intrinsic_distance,
                      schramm_distance, tree_path, uniform_volume_check)
from .walk import (effective_resistance, exit_time_from_ball, heat_kernel_iterate, srw_on_tree,
                   walk_range_profile)
from .spatial import (Correspondence, MeasuredSpatialTree, delta_c_surrogate, delta_distance,
                      from_spanning_tree, load_mst, prohorov, restrict, save_mst)
from .estimators import ExponentFit, chi_square_uniform, loglog_fit, split_sample_check
