"""tempoca command line: simulate, discover, pwgc, evaluate and bench.

Every run writes manifest.json next to its outputs; `tempoca
--from-manifest path/to/manifest.json` replays it.
"""

import argparse
import dataclasses
import json
import logging
import pathlib
import sys

from . import __version__
from .core import (
    DEFAULT_A, DEFAULT_ESTIMATOR, DEFAULT_HORIZON, DEFAULT_INDEP_THRESHOLD,
    DEFAULT_K_FRACTION, DEFAULT_SEED, DEFAULT_TAU_MAX, ESTIMATORS,
    DiscoveryParams, load_panel, read_graph, write_graph)
from .errors import (
    DomainError, InvalidParams, InvalidSpec, ManifestError, TempocaError,
    UsageError)
from .evaluation import METHODS, BenchmarkGrid, f1_score, run_benchmark
from .granger import DEFAULT_ALPHA, pwgc
from .logger import set_logger_level
from .pc_pmime import discover, write_audit
from .simulate import (
    COUPLINGS, DEFAULT_BURN_IN, DEFAULT_CROSS_COEF, DEFAULT_N, DEFAULT_NOISE_SD,
    DEFAULT_SELF_COEF, STRUCTURES, StructureSpec, generate, write_dataset)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_KEYS = {"command", "version", "args"}
# Parsed values that describe the invocation rather than the run.
NOT_IN_MANIFEST = {"command", "loglevel", "from_manifest", "replay_out"}

DEFAULT_BENCH_STRUCTURES = ["fork", "v_structure", "mediator", "diamond"]
DEFAULT_BENCH_N_VALUES = [125, 250, 500, 1000, 2000, 4000]
DEFAULT_BENCH_SEEDS = 10
DEFAULT_BENCH_METHODS = ["pc_pmime", "pwgc"]


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_discovery_arguments(parser):
    parser.add_argument(
        "--tau-max", type=int, default=DEFAULT_TAU_MAX,
        help="maximal lag of the embedding candidates")
    parser.add_argument(
        "--k-fraction", type=float, default=DEFAULT_K_FRACTION,
        help="nearest neighbors as a fraction of the effective sample count")
    parser.add_argument(
        "--A", type=float, default=DEFAULT_A,
        help="stopping criterion of the embedding cycles")
    parser.add_argument(
        "--threshold", type=float, default=DEFAULT_INDEP_THRESHOLD,
        help="R below this value means independence")
    parser.add_argument(
        "--horizon", type=int, default=DEFAULT_HORIZON,
        help="number of future steps of the target")
    parser.add_argument(
        "--seed", type=int, default=DEFAULT_SEED,
        help="seed of the tie-breaking jitter")
    parser.add_argument(
        "--estimator", choices=ESTIMATORS, default=DEFAULT_ESTIMATOR,
        help="neighbor counts of the information estimates: per-group boxes "
             "or the joint ball")


def _discovery_params(args) -> DiscoveryParams:
    return DiscoveryParams(
        tau_max=args.tau_max, k_fraction=args.k_fraction, A=args.A,
        indep_threshold=args.threshold, horizon_T=args.horizon, seed=args.seed,
        estimator=args.estimator)


def create_parser():
    # Destinations equal the flag names so manifests map back to flags.
    parser = ArgumentParser(
        prog="tempoca",
        description="Causal discovery for multivariate time series.")
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--loglevel", default=None, type=int, choices=range(7),
        help="set log level 0=trace, 1=debug, 2=info, 3=warn, 4=error, 5=critical, 6=off")
    parser.add_argument(
        "--from-manifest", metavar="path/to/manifest.json", type=pathlib.Path,
        default=None, help="replay the run recorded in a manifest")
    parser.add_argument(
        "--out", dest="replay_out", metavar="path/to/output", type=pathlib.Path,
        default=None, help="with --from-manifest, write to this directory instead")
    subparsers = parser.add_subparsers(dest="command")

    simulate = subparsers.add_parser(
        "simulate", help="generate a benchmark panel and its ground truth")
    simulate.add_argument("--kind", required=True, choices=sorted(STRUCTURES))
    simulate.add_argument("--n", type=int, default=DEFAULT_N)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--self-coef", type=float, default=DEFAULT_SELF_COEF)
    simulate.add_argument("--cross-coef", type=float, default=DEFAULT_CROSS_COEF)
    simulate.add_argument("--noise-sd", type=float, default=DEFAULT_NOISE_SD)
    simulate.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    simulate.add_argument("--coupling", choices=COUPLINGS, default="quadratic")
    simulate.add_argument(
        "--out", metavar="path/to/output", type=pathlib.Path, required=True)

    discover_parser = subparsers.add_parser(
        "discover", help="run PC-PMIME on a panel CSV")
    discover_parser.add_argument(
        "--in", metavar="path/to/panel.csv", type=pathlib.Path, required=True)
    discover_parser.add_argument(
        "--out", metavar="path/to/output", type=pathlib.Path, required=True)
    _add_discovery_arguments(discover_parser)
    discover_parser.add_argument("--jobs", type=int, default=1)
    discover_parser.add_argument("--format", choices=("json", "dot"), default="json")

    pwgc_parser = subparsers.add_parser(
        "pwgc", help="run pairwise Granger causality on a panel CSV")
    pwgc_parser.add_argument(
        "--in", metavar="path/to/panel.csv", type=pathlib.Path, required=True)
    pwgc_parser.add_argument(
        "--out", metavar="path/to/output", type=pathlib.Path, required=True)
    pwgc_parser.add_argument("--tau-max", type=int, default=DEFAULT_TAU_MAX)
    pwgc_parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    pwgc_parser.add_argument("--format", choices=("json", "dot"), default="json")

    evaluate = subparsers.add_parser(
        "evaluate", help="score an estimated graph against the truth")
    evaluate.add_argument(
        "--in", metavar="path/to/graph.json", type=pathlib.Path, required=True)
    evaluate.add_argument(
        "--truth", metavar="path/to/truth.json", type=pathlib.Path, required=True)
    evaluate.add_argument("--adjacency-only", action="store_true", default=False)
    evaluate.add_argument(
        "--out", metavar="path/to/output", type=pathlib.Path, default=None)

    bench = subparsers.add_parser(
        "bench", help="F1 of each method over structures, lengths and seeds")
    bench.add_argument(
        "--grid", metavar="path/to/grid.json", type=pathlib.Path, default=None,
        help="grid file; replaces --kind, --n, --seeds and --methods, and is "
             "copied into the manifest")
    bench.add_argument(
        "--kind", nargs="+", choices=sorted(STRUCTURES),
        default=DEFAULT_BENCH_STRUCTURES)
    bench.add_argument("--n", nargs="+", type=int, default=DEFAULT_BENCH_N_VALUES)
    bench.add_argument(
        "--seeds", type=int, default=DEFAULT_BENCH_SEEDS,
        help="number of replications (seeds 0..N-1)")
    bench.add_argument(
        "--seed-list", nargs="+", type=int, default=None,
        help="replication seeds; replaces --seeds")
    bench.add_argument(
        "--methods", nargs="+", choices=METHODS, default=DEFAULT_BENCH_METHODS)
    _add_discovery_arguments(bench)
    bench.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--adjacency-only", action="store_true", default=False)
    bench.add_argument(
        "--record-timing", action="store_true", default=False,
        help="fill wall_time_ms (results then differ between runs)")
    bench.add_argument(
        "--out", metavar="path/to/output", type=pathlib.Path, required=True)
    return parser


################################################################################
# Manifests
################################################################################

def _jsonable(value):
    if isinstance(value, pathlib.Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def manifest_of(args) -> dict:
    return {
        "command": args.command,
        "version": __version__,
        "args": {key: _jsonable(value) for key, value in sorted(vars(args).items())
                 if key not in NOT_IN_MANIFEST},
    }


def write_manifest(args, out_dir) -> pathlib.Path:
    path = pathlib.Path(out_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(manifest_of(args), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_manifest(path) -> dict:
    try:
        with open(path) as f:
            manifest = json.load(f)
    except FileNotFoundError:
        raise ManifestError(f"{path}: no such manifest") from None
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path} is not valid JSON: {e}") from None
    if not isinstance(manifest, dict) or set(manifest) != MANIFEST_KEYS:
        raise ManifestError(
            f"{path} must hold exactly the keys {sorted(MANIFEST_KEYS)}")
    if manifest["version"] != __version__:
        logger.warning(f"{path} was written by tempoca {manifest['version']}, "
                       f"replaying with {__version__}")
    return manifest


def manifest_argv(manifest: dict) -> list:
    """Command line equivalent to a manifest."""
    argv = [str(manifest["command"])]
    for key, value in manifest["args"].items():
        flag = "--" + key.replace("_", "-")
        if value is None or value is False:
            continue
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv += [flag] + [str(v) for v in value]
        else:
            argv += [flag, str(value)]
    return argv


def parse_arguments(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.from_manifest is not None:
        if args.command is not None:
            raise UsageError("--from-manifest cannot be combined with a subcommand")
        manifest = load_manifest(args.from_manifest)
        try:
            replayed = parser.parse_args(manifest_argv(manifest))
        except UsageError as e:
            raise ManifestError(f"{args.from_manifest}: {e}") from None
        replayed.loglevel = args.loglevel
        if args.replay_out is not None:
            replayed.out = args.replay_out
        return replayed
    if args.command is None:
        raise UsageError("a subcommand is required (see tempoca --help)")
    if args.replay_out is not None:
        raise UsageError("--out before the subcommand requires --from-manifest")
    return args


################################################################################
# Subcommands
################################################################################

def _graph_path(out_dir, fmt):
    return pathlib.Path(out_dir) / f"graph.{fmt}"


def run_simulate(args):
    spec = StructureSpec(
        args.kind, n=args.n, seed=args.seed, self_coef=args.self_coef,
        cross_coef=args.cross_coef, noise_sd=args.noise_sd,
        burn_in=args.burn_in, coupling=args.coupling)
    panel, truth = generate(spec)
    csv_path, truth_path = write_dataset(panel, truth, args.out, spec)
    print(f"Panel written to {csv_path}, ground truth to {truth_path}")


def run_discover(args):
    params = _discovery_params(args)
    panel = load_panel(getattr(args, "in"))
    graph = discover(panel, params, n_jobs=args.jobs)
    write_graph(graph, _graph_path(args.out, args.format))
    write_audit(graph.audit, pathlib.Path(args.out) / "audit.csv")
    print(f"{graph!r} written to {args.out}")


def run_pwgc(args):
    panel = load_panel(getattr(args, "in"))
    graph = pwgc(panel, args.tau_max, args.alpha)
    write_graph(graph, _graph_path(args.out, args.format))
    print(f"{graph!r} written to {args.out}")


def run_evaluate(args):
    score = f1_score(read_graph(getattr(args, "in")), read_graph(args.truth),
                     args.adjacency_only)
    text = json.dumps(dataclasses.asdict(score), indent=2)
    print(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "score.json").write_text(text + "\n")


def inline_grid(args):
    """Replace --grid by the cells it names, so that the manifest records
    the grid itself rather than the path to a file that may change."""
    grid = BenchmarkGrid.from_json(args.grid)
    for key in ("structures", "n_values", "seeds", "methods"):
        if not getattr(grid, key):
            raise InvalidParams(f"{args.grid}: {key} must not be empty")
    args.kind = list(grid.structures)
    args.n = list(grid.n_values)
    args.methods = list(grid.methods)
    if list(grid.seeds) == list(range(len(grid.seeds))):
        args.seeds, args.seed_list = len(grid.seeds), None
    else:
        args.seeds, args.seed_list = None, list(grid.seeds)
    args.grid = None


def run_bench(args):
    params = _discovery_params(args)
    if args.grid is not None:
        inline_grid(args)
    if args.seed_list is not None:
        args.seeds = None
        seeds = args.seed_list
    else:
        seeds = range(args.seeds)
    grid = BenchmarkGrid(args.kind, args.n, seeds, args.methods)
    result = run_benchmark(
        grid, params, out_dir=args.out, alpha=args.alpha, n_jobs=args.jobs,
        adjacency_only=args.adjacency_only, record_timing=args.record_timing)
    print(f"{len(result.rows)} results written to {args.out}")


COMMANDS = {
    "simulate": run_simulate,
    "discover": run_discover,
    "pwgc": run_pwgc,
    "evaluate": run_evaluate,
    "bench": run_bench,
}


def run_cli(argv=None) -> int:
    """Run one command; 0 on success, 1 on a usage error, 2 on a data error."""
    try:
        args = parse_arguments(argv)
        if args.loglevel is not None:
            set_logger_level(args.loglevel)
        COMMANDS[args.command](args)
        if args.out is not None:
            write_manifest(args, args.out)
    except (UsageError, InvalidParams, InvalidSpec, ManifestError,
            DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e.filename}: no such file", file=sys.stderr)
        return 2
    except (TempocaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
