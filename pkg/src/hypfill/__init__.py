"""hypfill: hyperbolic fillings, exponential uniformization d_eps, and
Gehring-Hayman / uniformity diagnostics on finite metric graphs."""

__version__ = "0.1.0"

from .errors import FormatError, HypfillError, NumericGuardError, ValidationError
from .metric import (Curve, FiniteMetricSpace, MetricGraph, curve_length,
                     graph_distance, scale_metric, shortest_path_curve,
                     validate_metric)
from .filling import (Filling, FillingParams, build_filling, build_nets,
                      level_sphere_diameter, normalize_space)
from .hyperbolicity import (DeltaEstimate, StarlikenessReport, delta_exact,
                            delta_sampled, estimate_starlikeness,
                            gromov_product, gromov_sequence_defect)
from .uniformize import (ConformalGraph, QuasiHyperbolicGraph,
                         UniformizationParams, boundary_distances,
                         conformal_edge_length, harnack_check,
                         quasihyperbolic_distance, quasihyperbolize,
                         uniformize_graph, uniformized_curve_length,
                         uniformized_distance)
from .gehring_hayman import (CriticalExponentEstimate, FillingFamily, GHReport,
                             ModelFamily, ScalingCheckParams,
                             UniformityCertificate, certify_uniform_curve,
                             collapse_slope, estimate_critical_exponent,
                             gh_ratio, gh_sweep, scaling_check)
from .model_spaces import (ModelSpaceParams, PolarPoint, circle_length,
                           d_eps_ray_upper, hyperbolic_distance,
                           ray_separation_bound)
from .boundary import (BoundaryPartition, RayFamily, compare_partitions,
                       gromov_equivalence_partition, metric_limit_partition,
                       probe_boundary, sample_rays)
from .corpus import (SpaceCorpusEntry, cantor_space, circle_space,
                     corpus_generate, random_tree_graph, segment_space,
                     tree_space)
