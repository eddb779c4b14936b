"""Compute the k-AP profile x*_{k,c} on the grid, write it to results/ as CSV and PNG.
Usage: `uv run kap_profile.py [k] [c] [M]`, defaulting to k=3, c=1.
"""

import sys, time
from datetime import timedelta

from matplotlib import pyplot as plt

from bplt.constants import KAP_GRID, RESULTS_DIR
from bplt.kap import kap_rate_bethe, phi_fixed_point
from bplt.plots import plot_kap_profile
from bplt.utils import write_csv


def main():
    start = time.perf_counter()
    argv = sys.argv
    k = int(argv[1]) if len(argv) > 1 else 3
    c = float(argv[2]) if len(argv) > 2 else 1.0
    M = int(argv[3]) if len(argv) > 3 else KAP_GRID

    profile = phi_fixed_point(k, c, M=M)
    RESULTS_DIR.mkdir(exist_ok=True)
    stem = RESULTS_DIR / f"kap_profile_k{k}_c{c:g}"
    write_csv(
        ["t", "x_star"],
        zip(profile.t, profile.values),
        stem.with_suffix(".csv"),
        comments=[f"k={k} c={c} M={M}"],
    )

    fig, ax = plot_kap_profile(profile, label=f"k={k}, c={c:g}")
    ax.set_title(f"x*_{{{k},{c:g}}}, rate {kap_rate_bethe(k, c, M):.6f}")
    fig.savefig(stem.with_suffix(".png"), dpi=150)

    end = time.perf_counter()
    print(f"Profile time taken - {timedelta(seconds=end - start)}")
    plt.show()


if __name__ == "__main__":
    main()
