from .constants import Model, Subcommand
from .exceptions import BpltError, ConvergenceError, EnumerationGuardError, TreeSizeError, ValidationError
from .hypergraph import Multihypergraph, build, degree_stats, read_hypergraph, write_hypergraph
from .gibbs import ModelParams, lower_tail_exact, partition_function, summarize, verify_identities
from .weitz import build_tsaw, build_weitz, tree_marginal, tree_ratio, verify_weitz_equality
from .bp import BPParams, bethe_free_energy, bp_fixed_point, rate_lower_tail_bp, solve_zeta, x_star_regular
from .rates import rate_gnm, rate_gnp
from .subgraphs import named_graph, rate_H, subgraph_profile
from .kap import alpha_k, build_kap_hypergraph, kap_rate, kap_rate_bethe, phi_fixed_point
