"""Randomised check that the Weitz hypertree reproduces exact marginals.
Usage: `uv run weitz_suite.py [instances]`; BPLT_THREADS sets the pool size.
"""

import sys, time
from datetime import timedelta

import numpy as np
from colorama import Fore, Style

from bplt.gibbs import ModelParams
from bplt.hypergraph import build
from bplt.utils import parallel_map, thread_count
from bplt.weitz import verify_weitz_equality

TOLERANCE = 1e-10


def check_instance(seed: int) -> tuple[int, int, int, float]:
    rng = np.random.default_rng(seed)
    num_vertices = int(rng.integers(1, 10))
    edges = []
    for _ in range(int(rng.integers(0, 9))):
        size = int(rng.integers(1, min(3, num_vertices) + 1))
        edges.append(rng.choice(num_vertices, size, replace=False).tolist())
    G = build(num_vertices, edges)
    params = ModelParams(float(rng.uniform(0.05, 3.0)), float(rng.uniform(0.0, 1.0)))
    v = int(rng.integers(num_vertices))
    residual = verify_weitz_equality(
        G,
        v,
        params,
        vertex_order=rng.permutation(num_vertices).tolist(),
        edge_order=rng.permutation(G.num_edges).tolist(),
    )
    return seed, num_vertices, G.num_edges, residual


def main():
    start = time.perf_counter()
    instances = int(sys.argv[1]) if len(sys.argv) > 1 else 100

    results = parallel_map(check_instance, range(instances))
    failures = [r for r in results if r[3] >= TOLERANCE]
    worst = max(results, key=lambda r: r[3])
    for seed, n, m, residual in failures:
        print(f"{Fore.RED}seed {seed}: N={n} M={m} residual {residual:.3e}{Style.RESET_ALL}")
    colour = Fore.GREEN if not failures else Fore.RED
    print(
        f"{colour}{instances - len(failures)}/{instances} instances below {TOLERANCE:g}, "
        f"worst {worst[3]:.3e} (seed {worst[0]}){Style.RESET_ALL}"
    )

    end = time.perf_counter()
    print(f"Weitz suite time taken on {thread_count()} workers - {timedelta(seconds=end - start)}")


if __name__ == "__main__":
    main()
