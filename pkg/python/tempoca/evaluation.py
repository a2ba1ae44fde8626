"""Scoring of estimated summary graphs and the F1-versus-length sweep."""

import dataclasses
import json
import logging
import pathlib
import time
from typing import Iterable, List, Sequence

import joblib
import pandas
from tqdm import tqdm

from .core import CSV_FLOAT_FORMAT, DiscoveryParams, SummaryCausalGraph
from .errors import InvalidParams, InvalidSpec, NodeMismatch, ResumeMismatch
from .granger import DEFAULT_ALPHA, pwgc
from .pc_pmime import discover
from .pmime import pmime_network
from .simulate import STRUCTURES, StructureSpec, generate

logger = logging.getLogger(__name__)

METHODS = ("pc_pmime", "pmime", "pwgc")
RESULT_COLUMNS = ["structure", "n", "seed", "method", "precision", "recall",
                  "f1", "wall_time_ms", "error"]
CELL_KEY = ["structure", "n", "seed", "method"]
AGGREGATE_COLUMNS = ["structure", "n", "method", "mean_f1", "std_f1", "count"]
RUN_CONFIG_NAME = "run_config.json"


@dataclasses.dataclass(frozen=True)
class ScoreReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def _edge_items(graph: SummaryCausalGraph, adjacency_only: bool) -> set:
    if adjacency_only:
        return graph.adjacencies()
    return ({("directed", i, j) for i, j in graph.directed_edges()}
            | {("bidirected", i, j) for i, j in graph.bidirected_edges()})


def f1_score(estimated: SummaryCausalGraph, truth: SummaryCausalGraph,
             adjacency_only: bool = False) -> ScoreReport:
    """Precision, recall and F1 over cross edges.

    A directed edge matches only the same directed edge and a bidirected
    edge only a bidirected truth edge. With `adjacency_only` marks and
    directions are ignored.
    """
    if estimated.g != truth.g:
        raise NodeMismatch(
            f"estimate has {estimated.g} nodes but the truth has {truth.g}")
    found = _edge_items(estimated, adjacency_only)
    expected = _edge_items(truth, adjacency_only)
    tp = len(found & expected)
    fp = len(found - expected)
    fn = len(expected - found)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ScoreReport(tp, fp, fn, precision, recall, f1)


################################################################################
# Benchmark sweep
################################################################################

@dataclasses.dataclass(frozen=True)
class BenchmarkGrid:
    structures: Sequence[str]
    n_values: Sequence[int]
    seeds: Sequence[int]
    methods: Sequence[str] = ("pc_pmime", "pwgc")

    def __post_init__(self):
        for kind in self.structures:
            if kind not in STRUCTURES:
                raise InvalidSpec(f"unknown structure {kind!r}")
        for method in self.methods:
            if method not in METHODS:
                raise InvalidParams(
                    f"unknown method {method!r}; choose from {list(METHODS)}")
        object.__setattr__(self, "structures", tuple(self.structures))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "methods", tuple(self.methods))

    def cells(self) -> List[tuple]:
        return [(kind, n, seed, method) for kind in self.structures
                for n in self.n_values for seed in self.seeds
                for method in self.methods]

    @classmethod
    def from_json(cls, path) -> "BenchmarkGrid":
        """Grid file keys: structures, n_values, seeds (list or count),
        methods (optional)."""
        with open(path) as f:
            grid = json.load(f)
        unknown = set(grid) - {"structures", "n_values", "seeds", "methods"}
        if unknown:
            raise InvalidParams(f"unknown grid keys {sorted(unknown)} in {path}")
        if isinstance(grid.get("seeds"), int):
            grid["seeds"] = list(range(grid["seeds"]))
        try:
            return cls(**grid)
        except TypeError as e:
            raise InvalidParams(f"incomplete grid in {path}: {e}") from None


@dataclasses.dataclass
class BenchmarkResult:
    rows: pandas.DataFrame
    aggregates: pandas.DataFrame


def run_method(method: str, panel, params: DiscoveryParams,
               alpha: float = DEFAULT_ALPHA) -> SummaryCausalGraph:
    if method == "pc_pmime":
        return discover(panel, params)
    if method == "pmime":
        return pmime_network(panel, params)
    if method == "pwgc":
        return pwgc(panel, params.tau_max, alpha)
    raise InvalidParams(f"unknown method {method!r}")


def run_cell(kind: str, n: int, seed: int, method: str, params: DiscoveryParams,
             alpha: float = DEFAULT_ALPHA, adjacency_only: bool = False,
             record_timing: bool = False) -> dict:
    row = {"structure": kind, "n": n, "seed": seed, "method": method,
           "precision": None, "recall": None, "f1": None,
           "wall_time_ms": None, "error": None}
    try:
        panel, truth = generate(StructureSpec(kind, n=n, seed=seed))
        start = time.perf_counter()
        estimate = run_method(method, panel, params, alpha)
        elapsed = time.perf_counter() - start
        score = f1_score(estimate, truth, adjacency_only)
    except Exception as e:
        logger.warning(f"{kind} n={n} seed={seed} {method} failed: {e!r}")
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(precision=score.precision, recall=score.recall, f1=score.f1)
    if record_timing:
        row["wall_time_ms"] = 1000 * elapsed
    return row


def _write_rows(rows: pandas.DataFrame, path: pathlib.Path):
    rows.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT,
                lineterminator="\n")


def _frame(records: Iterable[dict]) -> pandas.DataFrame:
    rows = pandas.DataFrame.from_records(list(records), columns=RESULT_COLUMNS)
    for column in ("precision", "recall", "f1", "wall_time_ms"):
        rows[column] = pandas.to_numeric(rows[column]).astype(float)
    rows["n"] = rows["n"].astype(int)
    rows["seed"] = rows["seed"].astype(int)
    return rows


def _read_records(path: pathlib.Path) -> List[dict]:
    rows = pandas.read_csv(path, dtype={"error": str})
    missing = set(RESULT_COLUMNS) - set(rows.columns)
    if missing:
        raise InvalidParams(f"{path} is not a results file (missing {sorted(missing)})")
    return rows[RESULT_COLUMNS].to_dict("records")


def sort_rows(rows: pandas.DataFrame) -> pandas.DataFrame:
    return rows.sort_values(CELL_KEY, kind="mergesort").reset_index(drop=True)


def aggregate(rows: pandas.DataFrame) -> pandas.DataFrame:
    """Mean and population standard deviation of F1 per (structure, n,
    method) over the successful cells."""
    ok = rows[rows["f1"].notna()]
    if ok.empty:
        return pandas.DataFrame(columns=AGGREGATE_COLUMNS)
    grouped = ok.groupby(["structure", "n", "method"], sort=True)["f1"]
    result = grouped.agg(
        mean_f1="mean", std_f1=lambda f1: f1.std(ddof=0), count="size")
    return result.reset_index()[AGGREGATE_COLUMNS]


def write_plot_data(aggregates: pandas.DataFrame, out_dir) -> List[pathlib.Path]:
    """One n,mean_f1,std_f1 file per (structure, method)."""
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for (kind, method), group in aggregates.groupby(["structure", "method"], sort=True):
        path = out_dir / f"{kind}_{method}.csv"
        group.sort_values("n")[["n", "mean_f1", "std_f1"]].to_csv(
            path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        paths.append(path)
    return paths


def run_config(params: DiscoveryParams, alpha: float,
               adjacency_only: bool) -> dict:
    return {"params": params.to_dict(), "alpha": alpha,
            "adjacency_only": adjacency_only}


def write_run_config(out_dir, config: dict) -> pathlib.Path:
    path = pathlib.Path(out_dir) / RUN_CONFIG_NAME
    with open(path, "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _flatten(config: dict) -> dict:
    flat = {}
    for key, value in config.items():
        if isinstance(value, dict):
            flat.update({f"{key}.{k}": v for k, v in value.items()})
        else:
            flat[key] = value
    return flat


def check_run_config(out_dir, config: dict) -> None:
    path = pathlib.Path(out_dir) / RUN_CONFIG_NAME
    try:
        with open(path) as f:
            stored = json.load(f)
    except FileNotFoundError:
        raise ResumeMismatch(
            f"{out_dir} holds results.csv but no {RUN_CONFIG_NAME}; "
            "choose a new output directory") from None
    # Compare after a JSON round trip so tuples and lists agree.
    expected = json.loads(json.dumps(config))
    if stored != expected:
        stored, expected = _flatten(stored), _flatten(expected)
        changed = sorted(
            key for key in set(stored) | set(expected)
            if stored.get(key) != expected.get(key))
        raise ResumeMismatch(
            f"results in {out_dir} were computed with other settings "
            f"({', '.join(changed)} differ); choose a new output directory "
            f"or remove {out_dir / 'results.csv'}")


def run_benchmark(grid: BenchmarkGrid, params: DiscoveryParams = DiscoveryParams(),
                  out_dir=None, alpha: float = DEFAULT_ALPHA, n_jobs: int = 1,
                  adjacency_only: bool = False, record_timing: bool = False,
                  progress: bool = True) -> BenchmarkResult:
    """Run every cell of the grid and score it against the ground truth.

    With `out_dir`, rows go to results.csv as cells finish and cells already
    in that file are skipped; aggregate.csv and plot_data/ are written at
    the end. The settings the rows depend on are kept in run_config.json and
    a resume with other settings raises ResumeMismatch.
    """
    results_path = None
    records = []
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        results_path = out_dir / "results.csv"
        config = run_config(params, alpha, adjacency_only)
        if results_path.exists():
            check_run_config(out_dir, config)
            records = _read_records(results_path)
            logger.info(f"resuming: {len(records)} rows found in {results_path}")
        write_run_config(out_dir, config)

    done = {tuple(record[key] for key in CELL_KEY) for record in records}
    cells = [cell for cell in grid.cells() if cell not in done]
    logger.info(f"{len(cells)} of {len(grid.cells())} cells to run")

    outputs = joblib.Parallel(n_jobs=n_jobs, return_as="generator")(
        joblib.delayed(run_cell)(*cell, params, alpha, adjacency_only, record_timing)
        for cell in cells)
    for record in tqdm(outputs, total=len(cells), disable=not progress):
        records.append(record)
        if results_path is not None:
            _write_rows(_frame(records), results_path)

    rows = sort_rows(_frame(records))
    aggregates = aggregate(rows)
    if results_path is not None:
        _write_rows(rows, results_path)
        aggregates.to_csv(out_dir / "aggregate.csv", index=False,
                          float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        write_plot_data(aggregates, out_dir / "plot_data")
        logger.info(f"results written to {results_path}")
    return BenchmarkResult(rows, aggregates)
