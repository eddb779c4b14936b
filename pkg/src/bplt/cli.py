"""`bplt` command line front end.

Every subcommand reads its parameters from flags, optionally merged over a JSON config
file (`--config`, flags win), writes CSV artefacts and prints a scalar summary block.
Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass, field
from math import floor
from pathlib import Path

from colorama import Fore, Style

from .bp import BPParams, bethe_free_energy, bp_fixed_point, bp_marginals, rate_lower_tail_bp, solve_zeta
from .bp import solve_zeta_regular, x_star_regular
from .constants import (
    BP_TOL,
    ENUMERATION_GUARD,
    ENUMERATION_GUARD_UNSAFE,
    GAUSS_NODES,
    KAP_GRID,
    KAP_TOL,
    TREE_NODE_CAP,
    TREE_NODE_CAP_UNSAFE,
    Model,
    Subcommand,
)
from .exceptions import BpltError, ConvergenceError, ValidationError
from .gibbs import (
    ModelParams,
    glauber_marginals,
    log_z_integral,
    lower_tail_exact,
    mc_lower_tail,
    summarize,
    verify_identities,
)
from .hypergraph import Multihypergraph, read_hypergraph
from .kap import kap_rate, phi_fixed_point
from .rates import rate_gnm, rate_gnp
from .subgraphs import SimpleGraph, named_graph, rate_H, rate_H_n_scaling, read_graph
from .utils import ScalarTable, format_float, parse_sweep, write_csv
from .weitz import build_weitz, tree_marginal, write_tree

__all__ = ["RunConfig", "Report", "run", "main", "build_parser"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3

FILE_SUBCOMMANDS = {
    Subcommand.bp_solve,
    Subcommand.exact_check,
    Subcommand.mc_estimate,
    Subcommand.weitz_verify,
}

REQUIRED = {
    Subcommand.rate_gnp: ("k", "c"),
    Subcommand.rate_gnm: ("k", "b"),
    Subcommand.rate_subgraph: (),
    Subcommand.rate_kap: ("k", "c"),
    Subcommand.kap_profile: ("k", "c"),
    Subcommand.bp_solve: ("c",),
    Subcommand.exact_check: ("lam",),
    Subcommand.mc_estimate: ("p",),
    Subcommand.weitz_verify: ("lam",),
}

DEFAULTS = {
    Subcommand.rate_gnp: {"eta": 0.0},
    Subcommand.rate_gnm: {"eta": 0.0},
    Subcommand.rate_subgraph: {"eta": 0.0, "model": Model.gnp.value, "n_scaling": False},
    Subcommand.rate_kap: {"nodes": GAUSS_NODES, "grid": KAP_GRID, "tol": KAP_TOL},
    Subcommand.kap_profile: {"grid": KAP_GRID, "tol": KAP_TOL, "route": "scaling"},
    Subcommand.bp_solve: {"tol": BP_TOL, "regular": False},
    Subcommand.exact_check: {"zeta": 1.0},
    Subcommand.mc_estimate: {"eta": 0.0, "zeta": 1.0, "samples": 10**5, "sweeps": 0, "burn_in": 100},
    Subcommand.weitz_verify: {"zeta": 1.0},
}

FORMULAS = {
    Subcommand.rate_gnp: (
        "G(n,p) lower-tail rate x* + (x*)^k zeta (1-1/k) - log(1-zeta) eta c^k/k - c (Theorems 1.2/1.6)"
    ),
    Subcommand.rate_gnm: "G(n,m) lower-tail rate -b^k (1 - eta + eta log eta)/k (Theorem 1.7)",
    Subcommand.rate_subgraph: (
        "Delta_H^(1/(k-1)) C(n,2)^-1 log P(X_H <= eta E X_H) -> rate-gnp (c) or rate-gnm (b) "
        "at k = |E(H)| on the hypergraph of copies of H (Theorems 1.2/1.3)"
    ),
    Subcommand.rate_kap: "k-AP-free rate int_0^1 int_0^c x*_{k,t}(s)/t dt ds - c (Theorem 1.4)",
    Subcommand.kap_profile: (
        "fixed point x*_{k,c} of Phi_c x(t) = c exp(-sum_l int prod x(t+is) ds) (Theorem 1.4)"
    ),
    Subcommand.bp_solve: (
        "BP fixed point F(x)_v = c exp(-(zeta/Delta) sum_{e ∋ v} prod_{u ∈ e-v} x_u) (Theorem 5.1(iv))"
    ),
    Subcommand.exact_check: (
        "exact enumeration of Z_G(lambda, zeta) = sum_S lambda^|S| (1-zeta)^|E(S)| (Observation 2.1)"
    ),
    Subcommand.mc_estimate: "Monte Carlo estimate of P(X <= eta E X) (Theorems 1.6/1.13)",
    Subcommand.weitz_verify: "Weitz hypertree root marginal against exact enumeration (Lemma 3.1)",
}

CONFIG_KEYS = {"subcommand", "params", "input_path", "output_path", "seed", "sweep"}

PLOT_SCRIPT = """\
from matplotlib import pyplot as plt

from bplt.plots import plot_csv

fig, ax = plot_csv({path!r})
plt.show()
"""


@dataclass
class RunConfig:
    subcommand: Subcommand
    params: dict = field(default_factory=dict)
    input_path: Path | None = None
    output_path: Path | None = None
    seed: int = 0
    sweep: str | None = None
    as_json: bool = False
    unsafe_size: bool = False
    plot_script: Path | None = None

    @property
    def guard(self) -> int:
        return ENUMERATION_GUARD_UNSAFE if self.unsafe_size else ENUMERATION_GUARD

    @property
    def node_cap(self) -> int:
        if self.params.get("node_cap") is not None:
            return int(self.params["node_cap"])
        return TREE_NODE_CAP_UNSAFE if self.unsafe_size else TREE_NODE_CAP

    def require(self, *keys: str) -> None:
        missing = [key for key in keys if self.params.get(key) is None]
        if missing:
            flags = ", ".join("--" + key.replace("_", "-") for key in missing)
            raise ValidationError(f"{self.subcommand} needs {flags}")

    def validate(self) -> None:
        swept = _swept_key(self) if self.sweep is not None else None
        self.require(*(key for key in REQUIRED[self.subcommand] if key != swept))
        if self.subcommand in FILE_SUBCOMMANDS and self.input_path is None:
            raise ValidationError(f"{self.subcommand} needs --file")
        if self.subcommand is Subcommand.rate_subgraph:
            if self.params.get("H") is None and self.params.get("graph_file") is None:
                raise ValidationError("rate-subgraph needs --H or --graph-file")
            if swept is None:
                self.require(_subgraph_value_key(self))
        if self.plot_script is not None and self.output_path is None:
            raise ValidationError("--plot-script needs --output for the CSV it plots")


@dataclass
class Report:
    scalars: ScalarTable
    header: list[str] | None = None
    rows: list[list] | None = None


def _model(config: RunConfig) -> Model:
    try:
        return Model(config.params["model"])
    except ValueError as err:
        raise ValidationError(f"model must be gnp or gnm, got {config.params['model']!r}") from err


def _subgraph_value_key(config: RunConfig) -> str:
    return "c" if _model(config) is Model.gnp else "b"


def _swept_key(config: RunConfig) -> str:
    match config.subcommand:
        case Subcommand.rate_gnp | Subcommand.rate_kap:
            return "c"
        case Subcommand.rate_gnm:
            return "b"
        case Subcommand.rate_subgraph:
            return _subgraph_value_key(config)
    raise ValidationError(f"{config.subcommand} does not support --sweep")


def _load_graph(config: RunConfig) -> Multihypergraph:
    try:
        return read_hypergraph(config.input_path)
    except OSError as err:
        raise ValidationError(f"could not read {config.input_path}: {err}") from err


def _subgraph(params: dict) -> SimpleGraph:
    if params.get("graph_file") is not None:
        return read_graph(params["graph_file"])
    return named_graph(params["H"])


# rate subcommands, one scalar per parameter point


def _rate_gnp(params: dict) -> float:
    return rate_gnp(int(params["k"]), params["c"], params["eta"])


def _rate_gnm(params: dict) -> float:
    return rate_gnm(int(params["k"]), params["b"], params["eta"])


def _rate_subgraph(params: dict) -> float:
    H = _subgraph(params)
    model = Model(params["model"])
    value = params["c"] if model is Model.gnp else params["b"]
    if params["n_scaling"]:
        if params["eta"] != 0:
            raise ValidationError("--n-scaling covers the H-free event only (eta = 0)")
        return rate_H_n_scaling(H, value, model)
    return rate_H(H, value, params["eta"], model).value


def _rate_kap(params: dict) -> float:
    return kap_rate(int(params["k"]), params["c"], int(params["nodes"]), int(params["grid"]), params["tol"])


RATES: dict[Subcommand, Callable[[dict], float]] = {
    Subcommand.rate_gnp: _rate_gnp,
    Subcommand.rate_gnm: _rate_gnm,
    Subcommand.rate_subgraph: _rate_subgraph,
    Subcommand.rate_kap: _rate_kap,
}


def _sweep(config: RunConfig) -> Report:
    key = _swept_key(config)
    rate = RATES[config.subcommand]
    rows = []
    first_error = None
    for value in parse_sweep(config.sweep):
        try:
            rows.append([float(value), rate({**config.params, key: float(value)}), False])
        except ValidationError as err:
            logger.debug("%s = %s outside the domain: %s", key, value, err)
            first_error = first_error or err
            rows.append([float(value), None, True])
    inside = sum(1 for row in rows if not row[2])
    if inside == 0:
        raise ValidationError(f"no sweep point lies inside the admissible range: {first_error}")
    scalars = ScalarTable(points=len(rows), in_domain=inside)
    return Report(scalars, [key, "rate", "out_of_domain"], rows)


def _scalar_rate(config: RunConfig) -> Report:
    params = config.params
    scalars = ScalarTable(rate=RATES[config.subcommand](params))
    if config.subcommand is Subcommand.rate_gnp:
        zeta = solve_zeta_regular(int(params["k"]), params["c"], params["eta"]).zeta
        scalars["zeta"] = zeta
        scalars["x_star"] = x_star_regular(int(params["k"]), params["c"], zeta)
    elif config.subcommand is Subcommand.rate_subgraph and not params["n_scaling"]:
        result = rate_H(_subgraph(params), params[_subgraph_value_key(config)], params["eta"], _model(config))
        scalars.update(
            k=result.k,
            m2=str(result.m2),
            aut=result.aut,
            delta_H=result.delta_exponent,
            parameterization=result.parameterization,
        )
    return Report(scalars)


def _kap_profile(config: RunConfig) -> Report:
    params = config.params
    profile = phi_fixed_point(
        int(params["k"]), params["c"], params["tol"], int(params["grid"]), route=params["route"]
    )
    rows = [[t, x] for t, x in zip(profile.t, profile.values)]
    scalars = ScalarTable(
        x_at_0=profile.values[0],
        x_at_half=float(profile(0.5)),
        x_min=profile.values.min(),
        x_max=profile.values.max(),
    )
    return Report(scalars, ["t", "x_star"], rows)


def _bp_solve(config: RunConfig) -> Report:
    G = _load_graph(config)
    params = config.params
    if params.get("k") is not None:
        k = int(params["k"])
    else:
        sizes = {len(edge) for edge in G.edges}
        if len(sizes) != 1:
            raise ValidationError("--k is needed unless every edge has the same size")
        k = sizes.pop()
    if params.get("eta") is not None and params.get("zeta") is not None:
        raise ValidationError("give either --zeta or --eta, not both")

    scalars = ScalarTable()
    if params.get("eta") is not None:
        zeta, x = solve_zeta(G, k, params["c"], params["eta"], regular=params["regular"], bp_tol=params["tol"])
        bp_params = BPParams.for_hypergraph(G, k, params["c"], zeta)
    else:
        zeta = 1.0 if params.get("zeta") is None else params["zeta"]
        bp_params = BPParams.for_hypergraph(G, k, params["c"], zeta)
        x = bp_fixed_point(G, bp_params, params["tol"])

    bethe = bethe_free_energy(G, bp_params, x)
    scalars.update(
        B=bethe,
        log_z_bp=bp_params.delta ** (-1 / (k - 1)) * bethe,
        zeta=zeta,
        delta=bp_params.delta,
        delta_contraction=1 - bp_params.contraction_factor,
    )
    if params.get("eta") is not None:
        scalars["rate"] = rate_lower_tail_bp(G, k, params["c"], params["eta"], params["regular"], params["tol"])
    marginals = bp_marginals(G, bp_params, x)
    rows = [[v, x[v], marginals[v]] for v in range(G.num_vertices)]
    return Report(scalars, ["vertex", "x_star", "marginal"], rows)


def _exact_check(config: RunConfig) -> Report:
    G = _load_graph(config)
    params = ModelParams(config.params["lam"], config.params["zeta"])
    summary = summarize(G, params, config.guard)
    scalars = ScalarTable(
        log_z=summary.log_z,
        log_z_integral=log_z_integral(G, params, guard=config.guard),
        mean_size=summary.mean_size,
        var_size=summary.var_size,
        mean_edges=summary.mean_edges,
        var_edges=summary.var_edges,
    )
    worst = dict.fromkeys(("contract_in", "delete_out", "edge_deletion", "conditional"), 0.0)
    if G.num_edges:
        for v in range(G.num_vertices):
            residuals = verify_identities(G, params, v, v % G.num_edges, config.guard)
            for key in worst:
                worst[key] = max(worst[key], getattr(residuals, key))
    scalars.update({f"residual_{key}": value for key, value in worst.items()})
    rows = [[v, m] for v, m in enumerate(summary.marginals)]
    return Report(scalars, ["vertex", "marginal"], rows)


def _mc_estimate(config: RunConfig) -> Report:
    G = _load_graph(config)
    params = config.params
    p, eta = params["p"], params["eta"]
    estimate, error = mc_lower_tail(G, p, eta, int(params["samples"]), seed=config.seed)
    scalars = ScalarTable(estimate=estimate, std_error=error)
    if G.num_vertices <= config.guard:
        expected = sum(p ** len(edge) for edge in G.edges)
        exact = lower_tail_exact(G, p, floor(eta * expected), config.guard)
        scalars["exact"] = exact
        scalars["z_score"] = (estimate - exact) / error if error > 0 else 0.0

    if int(params["sweeps"]) <= 0:
        return Report(scalars)
    model_params = ModelParams.from_p(p, params["zeta"])
    frequencies, errors = glauber_marginals(
        G, model_params, int(params["sweeps"]), int(params["burn_in"]), seed=config.seed
    )
    rows = [[v, frequencies[v], errors[v]] for v in range(G.num_vertices)]
    return Report(scalars, ["vertex", "marginal", "std_error"], rows)


def _weitz_verify(config: RunConfig) -> Report:
    G = _load_graph(config)
    params = ModelParams(config.params["lam"], config.params["zeta"])
    vertex = config.params.get("vertex")
    if config.params.get("dump") is not None and vertex is None:
        raise ValidationError("--dump needs --vertex")
    vertices = range(G.num_vertices) if vertex is None else [int(vertex)]
    exact = summarize(G, params, config.guard).marginals
    rows = []
    for v in vertices:
        T = build_weitz(G, v, node_cap=config.node_cap)
        tree = tree_marginal(T, params)
        rows.append([v, exact[v], tree, abs(exact[v] - tree), len(T.nodes)])
        if config.params.get("dump") is not None:
            write_tree(T, config.params["dump"])
    scalars = ScalarTable(vertices=len(rows), max_residual=max((row[3] for row in rows), default=0.0))
    return Report(scalars, ["vertex", "exact", "tree", "residual", "tree_nodes"], rows)


HANDLERS: dict[Subcommand, Callable[[RunConfig], Report]] = {
    Subcommand.rate_gnp: _scalar_rate,
    Subcommand.rate_gnm: _scalar_rate,
    Subcommand.rate_subgraph: _scalar_rate,
    Subcommand.rate_kap: _scalar_rate,
    Subcommand.kap_profile: _kap_profile,
    Subcommand.bp_solve: _bp_solve,
    Subcommand.exact_check: _exact_check,
    Subcommand.mc_estimate: _mc_estimate,
    Subcommand.weitz_verify: _weitz_verify,
}


def _header_comments(config: RunConfig) -> list[str]:
    echo = " ".join(
        f"{key}={value if isinstance(value, (str, Path)) else format_float(value)}"
        for key, value in sorted(config.params.items())
        if value is not None
    )
    comments = [f"formula: {FORMULAS[config.subcommand]}", f"params: {echo} seed={config.seed}"]
    if config.input_path is not None:
        comments.append(f"input: {config.input_path}")
    if config.sweep is not None:
        comments.append(f"sweep: {config.sweep}")
    return comments


def _emit(config: RunConfig, report: Report) -> None:
    if report.header is not None and config.as_json and config.output_path is None:
        # stdout carries a single JSON object, table included
        table = ScalarTable(report.scalars)
        table.update(comments=_header_comments(config), columns=report.header, rows=report.rows)
        print(table.as_json())
        return
    if report.header is not None:
        out = sys.stdout if config.output_path is None else config.output_path
        write_csv(report.header, report.rows, out, _header_comments(config))
        if config.plot_script is not None:
            with open(config.plot_script, "wt") as f:
                f.write(PLOT_SCRIPT.format(path=str(config.output_path)))
    print(report.scalars.as_json() if config.as_json else report.scalars)


def run(config: RunConfig) -> int:
    """Validate, dispatch and emit; returns the process exit code."""
    try:
        config.validate()
        if config.sweep is not None:
            report = _sweep(config)
        else:
            report = HANDLERS[config.subcommand](config)
        _emit(config, report)
    except ValidationError as err:
        print(f"{Fore.RED}error:{Style.RESET_ALL} {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as err:
        print(f"{Fore.RED}did not converge:{Style.RESET_ALL} {err}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except BpltError as err:
        print(f"{Fore.RED}error:{Style.RESET_ALL} {err}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"{Fore.GREEN}{config.subcommand} ok{Style.RESET_ALL}", file=sys.stderr)
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config; flags override its values")
    common.add_argument("--output", type=Path, dest="output_path", help="CSV output path (default stdout)")
    common.add_argument("--json", action="store_true", dest="as_json", help="print the summary block as JSON")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--sweep", default=None, metavar="LO:HI:STEPS")
    common.add_argument("--unsafe-size", action="store_true", help="raise enumeration and tree-size guards")
    common.add_argument("--plot-script", type=Path, default=None, help="write a script plotting the CSV")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def _add(parser: argparse.ArgumentParser, *names: str) -> None:
    """Attach parameter flags by name; every one defaults to None so the config can fill it."""
    specs = {
        "k": dict(type=int),
        "c": dict(type=float),
        "b": dict(type=float),
        "p": dict(type=float),
        "eta": dict(type=float),
        "zeta": dict(type=float),
        "lam": dict(type=float, flags=("--lambda",)),
        "tol": dict(type=float),
        "nodes": dict(type=int, help="Gauss-Legendre nodes"),
        "grid": dict(type=int, help="grid size M"),
        "route": dict(choices=["scaling", "direct"]),
        "model": dict(choices=[m.value for m in Model]),
        "H": dict(flags=("--H",), help="named graph: K<r>, C<l>, P<l>, K4-e, triangle+pendant"),
        "graph_file": dict(type=Path),
        "n_scaling": dict(action="store_const", const=True),
        "samples": dict(type=int),
        "sweeps": dict(type=int, help="Glauber sweeps (0 skips the marginals)"),
        "burn_in": dict(type=int),
        "vertex": dict(type=int),
        "node_cap": dict(type=int),
        "dump": dict(type=Path, help="write the Weitz tree of --vertex here"),
        "regular": dict(action="store_const", const=True),
    }
    for name in names:
        spec = dict(specs[name])
        flags = spec.pop("flags", ("--" + name.replace("_", "-"),))
        parser.add_argument(*flags, dest=name, default=None, **spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bplt", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    common = _common_parser()
    arguments = {
        Subcommand.rate_gnp: ("k", "c", "eta"),
        Subcommand.rate_gnm: ("k", "b", "eta"),
        Subcommand.rate_subgraph: ("H", "graph_file", "model", "c", "b", "eta", "n_scaling"),
        Subcommand.rate_kap: ("k", "c", "nodes", "grid", "tol"),
        Subcommand.kap_profile: ("k", "c", "grid", "tol", "route"),
        Subcommand.bp_solve: ("k", "c", "zeta", "eta", "tol", "regular"),
        Subcommand.exact_check: ("lam", "zeta"),
        Subcommand.mc_estimate: ("p", "eta", "zeta", "samples", "sweeps", "burn_in"),
        Subcommand.weitz_verify: ("lam", "zeta", "vertex", "node_cap", "dump"),
    }
    for subcommand, names in arguments.items():
        sub = subparsers.add_parser(subcommand.value, parents=[common], help=FORMULAS[subcommand])
        if subcommand in FILE_SUBCOMMANDS:
            sub.add_argument("--file", type=Path, dest="input_path", default=None, help="hypergraph file")
        _add(sub, *names)
    return parser


def _read_config_file(path: Path) -> dict:
    try:
        with open(path, "rt") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        raise ValidationError(f"could not read config {path}: {err}") from err
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    params = data.get("params", {})
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    data["params"] = params
    return data


def config_from_args(args: argparse.Namespace) -> RunConfig:
    subcommand = Subcommand(args.subcommand)
    file_config = _read_config_file(args.config) if args.config is not None else {"params": {}}
    if file_config.get("subcommand", subcommand) != subcommand:
        raise ValidationError(
            f"config is for {file_config['subcommand']}, not {subcommand}"
        )
    reserved = {
        "subcommand", "config", "output_path", "as_json", "seed", "sweep",
        "unsafe_size", "plot_script", "verbose", "input_path",
    }
    flags = {key: value for key, value in vars(args).items() if key not in reserved and value is not None}
    params = {**DEFAULTS[subcommand], **file_config["params"], **flags}

    def pick(flag, key, convert=lambda x: x):
        if flag is not None:
            return flag
        value = file_config.get(key)
        return None if value is None else convert(value)

    return RunConfig(
        subcommand=subcommand,
        params=params,
        input_path=pick(getattr(args, "input_path", None), "input_path", Path),
        output_path=pick(args.output_path, "output_path", Path),
        seed=pick(args.seed, "seed", int) or 0,
        sweep=pick(args.sweep, "sweep"),
        as_json=args.as_json,
        unsafe_size=args.unsafe_size,
        plot_script=args.plot_script,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
    except ValidationError as err:
        print(f"{Fore.RED}error:{Style.RESET_ALL} {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
