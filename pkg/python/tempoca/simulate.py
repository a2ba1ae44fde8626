"""Benchmark structures: autoregressive series coupled through lagged
(by default quadratic) links, with their ground-truth summary graphs."""

import dataclasses
import logging
import pathlib
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy
import pandas

from .core import SummaryCausalGraph, TimeSeriesPanel, write_graph, write_panel
from .errors import InvalidSpec, TooShort

logger = logging.getLogger(__name__)

DEFAULT_N = 4000
DEFAULT_SELF_COEF = 0.5
DEFAULT_CROSS_COEF = 0.8
DEFAULT_NOISE_SD = 0.4
DEFAULT_BURN_IN = 1000
MAX_LAG = 3

COUPLINGS = ("quadratic", "linear")

STATIONARITY_MIN_LENGTH = 400
DEFAULT_SHIFT_THRESHOLD = 0.5


class Structure(NamedTuple):
    """Observed series count plus lagged edges over observed and hidden
    series. Hidden series are numbered after the observed ones."""
    g: int
    edges: Dict[Tuple[int, int], int]
    hidden: int = 0


STRUCTURES = {
    "fork": Structure(3, {(0, 1): 1, (0, 2): 2}),
    "v_structure": Structure(3, {(0, 1): 1, (2, 1): 2}),
    "mediator": Structure(3, {(0, 1): 1, (0, 2): 2, (1, 2): 1}),
    "diamond": Structure(4, {(0, 1): 1, (0, 2): 2, (1, 3): 1, (2, 3): 1}),
    "seven_two_hidden": Structure(7, {
        (0, 1): 1, (0, 2): 2, (1, 3): 1, (4, 5): 1, (5, 6): 2,
        (7, 2): 1, (7, 4): 2,  # first hidden driver
        (8, 3): 2, (8, 6): 1,  # second hidden driver
    }, hidden=2),
}


def _parse_edge_key(key) -> Tuple[int, int]:
    if isinstance(key, str):
        parts = key.replace("->", ",").split(",")
        if len(parts) != 2:
            raise InvalidSpec(f"cannot read edge {key!r}; use 'i->j'")
        return int(parts[0]), int(parts[1])
    return int(key[0]), int(key[1])


@dataclasses.dataclass(frozen=True)
class StructureSpec:
    kind: str
    n: int = DEFAULT_N
    seed: int = 0
    self_coef: float = DEFAULT_SELF_COEF
    cross_coef: float = DEFAULT_CROSS_COEF
    noise_sd: float = DEFAULT_NOISE_SD
    lags: Optional[Dict] = None
    burn_in: int = DEFAULT_BURN_IN
    coupling: str = "quadratic"

    def __post_init__(self):
        if self.kind not in STRUCTURES:
            raise InvalidSpec(
                f"unknown structure {self.kind!r}; choose from {sorted(STRUCTURES)}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"n must be a positive integer, got {self.n}")
        if not abs(self.self_coef) < 1:
            raise InvalidSpec(
                f"self_coef must satisfy |self_coef| < 1, got {self.self_coef}")
        if not self.noise_sd > 0:
            raise InvalidSpec(f"noise_sd must be > 0, got {self.noise_sd}")
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            raise InvalidSpec(f"burn_in must be a non-negative integer, got {self.burn_in}")
        if self.coupling not in COUPLINGS:
            raise InvalidSpec(
                f"unknown coupling {self.coupling!r}; choose from {list(COUPLINGS)}")
        self.edge_lags()

    @property
    def structure(self) -> Structure:
        return STRUCTURES[self.kind]

    def edge_lags(self) -> Dict[Tuple[int, int], int]:
        """Default lags of the structure with the `lags` overrides applied."""
        lags = dict(self.structure.edges)
        for key, lag in (self.lags or {}).items():
            edge = _parse_edge_key(key)
            if edge not in lags:
                raise InvalidSpec(f"{self.kind} has no edge {edge[0]}->{edge[1]}")
            lags[edge] = lag
        for (i, j), lag in lags.items():
            if int(lag) != lag or not 1 <= lag <= MAX_LAG:
                raise InvalidSpec(f"lag of {i}->{j} must be in [1, {MAX_LAG}], got {lag}")
        return lags

    @property
    def stem(self) -> str:
        return f"{self.kind}_n{self.n}_s{self.seed}"


def ground_truth(kind: str) -> SummaryCausalGraph:
    """Summary graph of the observed series; observed children sharing a
    hidden driver are marked bidirected."""
    structure = STRUCTURES[kind]
    g = structure.g
    directed = [(i, j) for i, j in structure.edges if i < g and j < g]
    bidirected = []
    for h in range(g, g + structure.hidden):
        children = sorted(j for i, j in structure.edges if i == h)
        bidirected.extend((a, b) for a_i, a in enumerate(children)
                          for b in children[a_i + 1:])
    return SummaryCausalGraph(
        series_names(g), directed=directed, bidirected=bidirected)


def series_names(g: int) -> List[str]:
    return [f"X{i}" for i in range(g)]


def generate(spec: StructureSpec) -> Tuple[TimeSeriesPanel, SummaryCausalGraph]:
    """X^i_t = self_coef X^i_{t-1} + sum cross_coef f(X^p_{t-lag}) + noise_sd e_t"""
    structure = spec.structure
    g_total = structure.g + structure.hidden
    lags = spec.edge_lags()
    parents = numpy.array([i for i, _ in lags], dtype=int)
    children = numpy.array([j for _, j in lags], dtype=int)
    edge_lags = numpy.array(list(lags.values()), dtype=int)
    coupling = numpy.square if spec.coupling == "quadratic" else (lambda u: u)

    rng = numpy.random.default_rng(spec.seed)
    total = spec.burn_in + spec.n + MAX_LAG
    noise = spec.noise_sd * rng.standard_normal((total, g_total))
    X = numpy.zeros((total, g_total))
    for t in range(MAX_LAG, total):
        X[t] = spec.self_coef * X[t - 1] + noise[t]
        numpy.add.at(
            X[t], children, spec.cross_coef * coupling(X[t - edge_lags, parents]))

    panel = TimeSeriesPanel(
        series_names(structure.g), X[total - spec.n:, :structure.g])
    logger.debug(f"generated {spec.stem}")
    return panel, ground_truth(spec.kind)


def write_dataset(panel: TimeSeriesPanel, truth: SummaryCausalGraph, out_dir,
                  spec: StructureSpec) -> Tuple[pathlib.Path, pathlib.Path]:
    out_dir = pathlib.Path(out_dir)
    csv_path = out_dir / f"{spec.stem}.csv"
    truth_path = out_dir / f"{spec.stem}.truth.json"
    write_panel(panel, csv_path)
    write_graph(truth, truth_path)
    return csv_path, truth_path


@dataclasses.dataclass(frozen=True)
class SeriesDrift:
    name: str
    mean_first: float
    mean_second: float
    var_first: float
    var_second: float
    mean_shift: float  # in pooled standard deviations
    flagged: bool


@dataclasses.dataclass(frozen=True)
class StationarityReport:
    series: Tuple[SeriesDrift, ...]
    shift_threshold: float

    @property
    def flagged(self) -> List[str]:
        return [s.name for s in self.series if s.flagged]

    def to_frame(self) -> pandas.DataFrame:
        return pandas.DataFrame([dataclasses.asdict(s) for s in self.series])


def empirical_stationarity_check(
        panel: TimeSeriesPanel,
        shift_threshold: float = DEFAULT_SHIFT_THRESHOLD) -> StationarityReport:
    """Compare the first and second half of every series."""
    if panel.n < STATIONARITY_MIN_LENGTH:
        raise TooShort(f"stationarity check needs at least "
                       f"{STATIONARITY_MIN_LENGTH} observations, got {panel.n}")
    half = panel.n // 2
    first, second = panel.data[:half], panel.data[half:]
    mean_first, mean_second = first.mean(axis=0), second.mean(axis=0)
    var_first, var_second = first.var(axis=0, ddof=1), second.var(axis=0, ddof=1)
    pooled_sd = numpy.sqrt((var_first + var_second) / 2)

    series = []
    for i, name in enumerate(panel.names):
        if var_first[i] > 0 and var_second[i] > 0:
            shift = abs(mean_second[i] - mean_first[i]) / pooled_sd[i]
            flagged = bool(shift > shift_threshold)
        else:
            shift, flagged = float("nan"), True
        series.append(SeriesDrift(
            name, float(mean_first[i]), float(mean_second[i]),
            float(var_first[i]), float(var_second[i]), float(shift), flagged))
    report = StationarityReport(tuple(series), shift_threshold)
    if report.flagged:
        logger.warning(f"possibly non-stationary series: {report.flagged}")
    return report

