"""Community structure of SAT instances: VIG/CVIG graphs, modularity,
Louvain and label propagation, and learnt-clause evolution with a small
CDCL probe."""

from .cdcl import SolveConfig, SolveOutcome, Status, solve
from .cnf import (DimacsError, Formula, LearntTrace, VariableOverflowError, augment,
                  parse_dimacs, read_dimacs, read_learnt_trace, write_dimacs,
                  write_learnt_trace)
from .generators import GeneratorConfig, gen_planted, gen_random
from .graphs import (BipartiteGraph, CommunityGraph, WeightedGraph, build_community_graph,
                     build_cvig, build_vig, connected_components, export_dot)
from .louvain import (fold, fold_bipartite, label_propagation, louvain, louvain_bipartite,
                      one_level)
from .modularity import (DeltaRecord, ModularityReport, brute_force_optimal, delta_trace,
                         modularity, modularity_bipartite, modularity_fixed)
from .partition import Partition

__version__ = "0.1.0"
