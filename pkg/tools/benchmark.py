"""Run the benchmark grids under fixtures/benchmarks and collect the mean F1
of every method in one CSV."""

import sys
import json
import pathlib
import argparse
import subprocess
import re
import platform

import pandas

from datetime import datetime

import tempoca
from tempoca.core import DEFAULT_ESTIMATOR, ESTIMATORS, DiscoveryParams
from tempoca.evaluation import BenchmarkGrid, run_benchmark


def get_time_stamp():
    return datetime.now().strftime("%Y-%b-%d-%H-%M-%S")


def get_machine_info():
    if platform.system() == "Darwin":
        core_count = int(subprocess.run(
            ["sysctl", "-n", "machdep.cpu.core_count"],
            capture_output=True, text=True).stdout.strip())
        brand_string = subprocess.run(
            ["sysctl", "-n", "machdep.cpu.brand_string"],
            capture_output=True, text=True).stdout.strip()
        return f"{core_count:d}-core {brand_string}"
    if platform.system() == "Linux":
        lscpu = subprocess.run(
            ["lscpu"], capture_output=True, text=True).stdout
        model_name = re.search(r"Model name:\s*(.+)", lscpu)
        cpus = re.search(r"^CPU\(s\):\s*(\d+)", lscpu, re.MULTILINE)
        if model_name is None or cpus is None:
            return platform.processor()
        return f"{cpus.group(1)}-cpu {model_name.group(1)}"
    return platform.processor()


def fixture_dir():
    return pathlib.Path(__file__).parents[1] / "fixtures" / "benchmarks"


def get_git_hash():
    return subprocess.run(
        "git rev-parse HEAD".split(), capture_output=True,
        cwd=pathlib.Path(__file__).parent, text=True).stdout.strip()


def create_parser():
    parser = argparse.ArgumentParser(
        description="Run benchmark grids and save a CSV of the mean F1 scores.")
    parser.add_argument(
        "-i", "--input", metavar="path/to/grid.json", type=pathlib.Path,
        dest="input", default=None, help="grid file(s) or directories", nargs="+")
    parser.add_argument(
        "-o", "--output", metavar="path/to/output", type=pathlib.Path,
        dest="output", default=pathlib.Path("benchmark"),
        help="directory of the per-grid results and the summary CSV")
    parser.add_argument(
        "--jobs", type=int, default=1, help="benchmark cells run in parallel")
    parser.add_argument(
        "--estimator", choices=ESTIMATORS, default=DEFAULT_ESTIMATOR,
        help="neighbor counts of the information estimates")
    parser.add_argument(
        "--check", action="store_true", default=False,
        help="compare the scores with fixtures/benchmarks/expectations.json")
    parser.add_argument(
        "--loglevel", default=3, type=int, choices=range(7),
        help="set log level 0=trace, 1=debug, 2=info, 3=warn, 4=error, 5=critical, 6=off")
    return parser


def parse_arguments():
    parser = create_parser()
    args = parser.parse_args()
    if args.input is None:
        args.input = [fixture_dir() / "quick.json"]
    grids = []
    for input_file in args.input:
        if input_file.is_file() and input_file.suffix == ".json":
            grids.append(input_file.resolve())
        elif input_file.is_dir():
            grids.extend(sorted(p for p in input_file.glob("*.json")
                                if p.name != "expectations.json"))
        else:
            parser.exit(1, f"{input_file}: no such grid\n")
    args.input = grids
    return args


def check_expectations(summary):
    """Print one PASS/FAIL line per expectation; True when all pass."""
    with open(fixture_dir() / "expectations.json") as f:
        expectations = json.load(f)
    scores = summary.set_index(["grid", "structure", "n", "method"])["mean_f1"]
    passed = True
    for expected in expectations:
        key = (expected["grid"], expected["structure"], expected["n"])
        if key + (expected["method"],) not in scores.index:
            continue
        score = scores[key + (expected["method"],)]
        ok = score >= expected.get("min_mean_f1", 0.0)
        ok &= score <= expected.get("max_mean_f1", 1.0)
        if "above" in expected and key + (expected["above"],) in scores.index:
            margin = score - scores[key + (expected["above"],)]
            if "min_margin" in expected:
                ok &= margin >= expected["min_margin"]
            else:
                ok &= margin > 0
        if "at_most_n" in expected:
            larger = (expected["grid"], expected["structure"],
                      expected["at_most_n"], expected["method"])
            if larger in scores.index:
                ok &= score <= scores[larger]
        print(f"{'PASS' if ok else 'FAIL'} {'/'.join(map(str, key))} "
              f"{expected['method']}: mean F1 {score:.3f}")
        passed &= bool(ok)
    return passed


def main():
    args = parse_arguments()
    tempoca.set_logger_level(args.loglevel)
    machine_info = get_machine_info()
    git_hash = get_git_hash()
    args.output.mkdir(parents=True, exist_ok=True)
    summary_path = args.output / f"summary-{get_time_stamp()}.csv"

    df = pandas.DataFrame()
    for grid_path in args.input:
        print(f"Running {grid_path.stem}")
        grid = BenchmarkGrid.from_json(grid_path)
        result = run_benchmark(
            grid, DiscoveryParams(estimator=args.estimator),
            out_dir=args.output / f"{grid_path.stem}-{args.estimator}",
            n_jobs=args.jobs)
        rows = result.aggregates.assign(
            grid=grid_path.stem, estimator=args.estimator,
            machine=machine_info, git_hash=git_hash)
        df = pandas.concat([df, rows], ignore_index=True)
        df.to_csv(summary_path, index=False)
    print(f"Results written to {summary_path}")

    if args.check and not df.empty and not check_expectations(df):
        sys.exit(1)


if __name__ == "__main__":
    main()
