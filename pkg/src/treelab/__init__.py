"""Height-biased random plane trees: exact counts, asymptotics, samplers."""

from .tree_core import PlaneTree, TreeStats, stats, enumerate_trees, to_contour, from_contour
from .lattice_paths import LatticePath, cycle_map, cut_bijection, path_width
from .counting import CountTable, build_counts, catalan, trig_count, asymptotic_count, LogReal
from .partition import partition_function, height_law, root_degree_law
from .sampler import make_rng, sample_biased_tree, sample_uniform_tree, sample_walk_stats

__version__ = "0.1.0"
