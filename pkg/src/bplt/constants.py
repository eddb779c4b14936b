from pathlib import Path
from enum import StrEnum

RESULTS_DIR = Path(__file__).parent.parent.parent.absolute() / "results"

THREADS_ENV = "BPLT_THREADS"


class Subcommand(StrEnum):
    rate_gnp = "rate-gnp"
    rate_gnm = "rate-gnm"
    rate_subgraph = "rate-subgraph"
    rate_kap = "rate-kap"
    kap_profile = "kap-profile"
    bp_solve = "bp-solve"
    exact_check = "exact-check"
    mc_estimate = "mc-estimate"
    weitz_verify = "weitz-verify"


class Model(StrEnum):
    gnp = "gnp"
    gnm = "gnm"


# exact oracle: 2^N subsets
ENUMERATION_GUARD = 26
# raised guards behind --unsafe-size
ENUMERATION_GUARD_UNSAFE = 40
# subsets handled per vectorised block
ENUMERATION_BLOCK_BITS = 20

TREE_NODE_CAP = 10**6
TREE_NODE_CAP_UNSAFE = 10**8

BP_TOL = 1e-12
BP_MAX_ITER = 10**5
ZETA_MAX_ITER = 200
ZETA_TOL = 1e-10

# k-AP grid and outer quadrature
KAP_GRID = 2000
KAP_TOL = 1e-10
GAUSS_NODES = 64
SMALL_T_FRACTION = 1e-6

KAP_EXACT_LIMIT = 24
SUBGRAPH_MAX_VERTICES = 10
SUBGRAPH_COPY_CAP = 10**6

FLOAT_DIGITS = 17
