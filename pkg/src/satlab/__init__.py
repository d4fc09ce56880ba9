"""Exact saturation of hypothesis classes and graphs under weighted majority votes."""

from .core import (
    Graph, GraphSaturationTrace, HalfGraph, HypothesisClass, SatlabError, SaturationTrace, Signature, SpecialTree,
    WeightedSet, class_from_graph, dual, format_rational, make_class, make_graph, parse_rational,
)
from .dims import find_mistake_tree, halfgraph_to_tree, ldim, monochromatic_subtree, thr_dim, tree_to_halfgraph, vc_dim
from .satclass import representable, representable_functions, saturate, saturation_step
from .satgraph import graph_saturate, graph_saturation_step

__all__ = [
    "Graph", "GraphSaturationTrace", "HalfGraph", "HypothesisClass", "SatlabError", "SaturationTrace", "Signature",
    "SpecialTree", "WeightedSet", "class_from_graph", "dual", "format_rational", "make_class", "make_graph",
    "parse_rational", "find_mistake_tree", "halfgraph_to_tree", "ldim", "monochromatic_subtree", "thr_dim",
    "tree_to_halfgraph", "vc_dim", "representable", "representable_functions", "saturate", "saturation_step",
    "graph_saturate", "graph_saturation_step",
]

__version__ = "0.1.0"
