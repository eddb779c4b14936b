from pathlib import Path

import numpy as np
from matplotlib import pyplot as plt

from .constants import Model
from .kap import GridFunction
from .subgraphs import SimpleGraph, partite_lower_bounds, rate_H_n_scaling

__all__ = ["plot_kap_profile", "plot_rate_curve", "plot_subgraph_rates", "plot_csv"]


def _axes(ax: plt.Axes | None, figsize=(10, 6)) -> tuple[plt.Figure, plt.Axes]:
    if ax is None:
        return plt.subplots(figsize=figsize)
    return plt.gcf(), ax


def plot_kap_profile(
    profile: GridFunction,
    label: str | None = None,
    ax: plt.Axes = None,
) -> tuple[plt.Figure, plt.Axes]:
    fig, ax = _axes(ax)
    ax.plot(profile.t, profile.values, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("x*(t)")
    ax.set_xlim(0, 1)
    if label is not None:
        ax.legend()
    return fig, ax


def plot_rate_curve(
    params: np.ndarray,
    rates: np.ndarray,
    xlabel: str = "c",
    label: str | None = None,
    ax: plt.Axes = None,
) -> tuple[plt.Figure, plt.Axes]:
    fig, ax = _axes(ax)
    ax.plot(params, rates, label=label)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rate")
    if label is not None:
        ax.legend()
    return fig, ax


def plot_subgraph_rates(
    H: SimpleGraph,
    values: np.ndarray,
    model: Model | str = Model.gnp,
    ax: plt.Axes = None,
) -> tuple[plt.Figure, plt.Axes]:
    """H-free rate in the n-normalization with the r-partite lower bound, r = χ(H) − 1."""
    model = Model(model)
    fig, ax = _axes(ax)
    rates = [rate_H_n_scaling(H, value, model) for value in values]
    name = "c" if model is Model.gnp else "b"
    bounds = [partite_lower_bounds(H, **{name: value})[model] for value in values]
    ax.plot(values, rates, label="BP rate")
    ax.plot(values, bounds, "--", color="k", label="partite bound")
    ax.set_xlabel(name)
    ax.set_ylabel("rate")
    ax.set_title(f"{model.value}, H with {H.num_vertices} vertices and {H.k} edges")
    ax.legend()
    return fig, ax


def plot_csv(path: Path | str, ax: plt.Axes = None) -> tuple[plt.Figure, plt.Axes]:
    """Second column against the first for a CSV written by the command line tool."""
    # genfromtxt would take field names from a leading comment line
    lines = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    data = np.genfromtxt(lines, delimiter=",", names=True)
    x_name, y_name = data.dtype.names[:2]
    fig, ax = _axes(ax)
    ax.plot(data[x_name], data[y_name], marker=".")
    ax.set_xlabel(x_name)
    ax.set_ylabel(y_name)
    ax.set_title(Path(path).stem)
    return fig, ax
