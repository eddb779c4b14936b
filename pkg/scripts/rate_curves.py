"""Rate curves for G(n,p) and G(n,m) at several eta, and the H-free rate of a named
graph against its r-partite lower bound. Figures go to results/.
"""

import sys, time
from datetime import timedelta

import numpy as np
from matplotlib import pyplot as plt

from bplt.bp import thresholds
from bplt.constants import Model, RESULTS_DIR
from bplt.plots import plot_rate_curve, plot_subgraph_rates
from bplt.rates import rate_gnm, rate_gnp
from bplt.subgraphs import named_graph, subgraph_profile


def main():
    start = time.perf_counter()
    k = 3
    etas = (0.0, 0.25, 0.5, 0.75)
    name = sys.argv[1] if len(sys.argv) > 1 else "K4"
    H = named_graph(name)
    RESULTS_DIR.mkdir(exist_ok=True)

    fig, (ax_p, ax_m) = plt.subplots(1, 2, figsize=(14, 6))
    for eta in etas:
        cs = np.linspace(0.01, thresholds(k, eta).c_bar, 200, endpoint=False)
        plot_rate_curve(cs, [rate_gnp(k, c, eta) for c in cs], "c", f"eta={eta}", ax=ax_p)
        b_max = (1 / ((k - 1) * (1 - eta))) ** (1 / (k - 1))
        bs = np.linspace(0.01, b_max, 200, endpoint=False)
        plot_rate_curve(bs, [rate_gnm(k, b, eta) for b in bs], "b", f"eta={eta}", ax=ax_m)
    ax_p.set_title(f"G(n,p), k={k}")
    ax_m.set_title(f"G(n,m), k={k}")
    fig.savefig(RESULTS_DIR / f"rate_curves_k{k}.png", dpi=150)

    k_H = H.k
    scale = (subgraph_profile(H).aut / (2 * k_H)) ** (1 / (k_H - 1))
    fig, (ax_p, ax_m) = plt.subplots(1, 2, figsize=(14, 6))
    c_max = scale * thresholds(k_H, 0.0).c_small
    plot_subgraph_rates(H, np.linspace(0.01, c_max, 100, endpoint=False), Model.gnp, ax=ax_p)
    b_max = scale * (1 / (k_H - 1)) ** (1 / (k_H - 1)) / 2
    plot_subgraph_rates(H, np.linspace(0.01, b_max, 100, endpoint=False), Model.gnm, ax=ax_m)
    fig.savefig(RESULTS_DIR / f"subgraph_rates_{name}.png", dpi=150)

    end = time.perf_counter()
    print(f"Rate curves time taken - {timedelta(seconds=end - start)}")
    plt.show()


if __name__ == "__main__":
    main()
