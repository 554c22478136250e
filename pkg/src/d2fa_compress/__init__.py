"""Compress DFAs into delayed DFAs (D2FAs) with default transitions."""

from .automata import Dfa, bfs_depths, generate_clustered_dfa, read_dfa, write_dfa
from .d2fa import (CompressionReport, D2fa, build_from_forest, longest_delay, match_string,
                   read_d2fa, resolve, similarity, verify_equivalent, write_d2fa)
from .forest import (Forest, central_node, cut_to_diameter, kruskal_bounded_diameter,
                     kruskal_mst, prim_penalized, root_and_direct)
from .graphs import LshParams, WeightedGraph, build_srg, build_ssrg, lsh_signature
from .pipelines import ALGORITHMS, AlgoSpec, compress
from .regex import compile_regex_set

__version__ = "0.1.0"
