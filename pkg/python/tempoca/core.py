"""Domain types shared by every module: panels, summary graphs, parameters
and the lagged components an embedding is built from."""

import dataclasses
import enum
import errno
import json
import logging
import pathlib
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy
import pandas

from .errors import (
    ConstantSeries, InvalidGraph, InvalidParams, MissingValue, ShapeError)

logger = logging.getLogger(__name__)

DEFAULT_TAU_MAX = 3
DEFAULT_K_FRACTION = 0.01
DEFAULT_A = 0.03
DEFAULT_INDEP_THRESHOLD = 1e-10
DEFAULT_HORIZON = 1
DEFAULT_SEED = 0
DEFAULT_ESTIMATOR = "box"
ESTIMATORS = ("box", "ball")

CSV_FLOAT_FORMAT = "%.17g"


################################################################################
# Panel
################################################################################

@dataclasses.dataclass(frozen=True, eq=False)
class TimeSeriesPanel:
    """n observations (rows) of g series (columns) with one label each."""
    names: Tuple[str, ...]
    data: numpy.ndarray

    def __post_init__(self):
        names = tuple(str(name) for name in self.names)
        data = numpy.array(self.data, dtype=numpy.float64, copy=True)
        if data.ndim != 2:
            raise ShapeError(f"panel data must be 2D, got shape {data.shape}")
        if data.shape[1] != len(names):
            raise ShapeError(
                f"panel has {data.shape[1]} columns but {len(names)} names")
        if len(set(names)) != len(names):
            raise ShapeError(f"duplicate series names in {list(names)}")
        if not numpy.isfinite(data).all():
            row, col = numpy.argwhere(~numpy.isfinite(data))[0]
            raise MissingValue(
                f"non-finite value in series {names[col]!r} at row {row}")
        data.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def g(self) -> int:
        return self.data.shape[1]

    def column(self, i: int) -> numpy.ndarray:
        return self.data[:, i]

    def permute(self, order: Sequence[int]) -> "TimeSeriesPanel":
        """New panel whose column p is this panel's column order[p]."""
        order = list(order)
        if sorted(order) != list(range(self.g)):
            raise ShapeError(f"{order} is not a permutation of {self.g} columns")
        return TimeSeriesPanel(
            tuple(self.names[i] for i in order), self.data[:, order])

    def to_frame(self) -> pandas.DataFrame:
        return pandas.DataFrame(self.data, columns=list(self.names))

    @classmethod
    def from_frame(cls, frame: pandas.DataFrame) -> "TimeSeriesPanel":
        return cls(tuple(frame.columns), frame.to_numpy(dtype=numpy.float64))


def _parse_column(cells: numpy.ndarray, name: str) -> numpy.ndarray:
    try:
        values = numpy.asarray(cells, dtype=numpy.float64)
    except ValueError:
        for row, cell in enumerate(cells):
            try:
                float(cell)
            except ValueError:
                raise MissingValue(
                    f"non-numeric cell {cell!r} in series {name!r} at row "
                    f"{row}") from None
        raise
    bad = numpy.flatnonzero(~numpy.isfinite(values))
    if bad.size:
        raise MissingValue(
            f"non-finite cell {cells[bad[0]]!r} in series {name!r} at row "
            f"{bad[0]}")
    return values


def load_panel(path) -> TimeSeriesPanel:
    """Read a panel CSV: one header row of names, then numeric rows in time
    order."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    try:
        raw = pandas.read_csv(
            path, header=None, dtype=str, keep_default_na=False,
            skip_blank_lines=True, encoding="utf-8")
    except pandas.errors.EmptyDataError:
        raise ShapeError(f"{path} is empty") from None
    except pandas.errors.ParserError as e:
        raise ShapeError(f"ragged rows in {path}: {e}") from None

    if raw.shape[0] < 2:
        raise ShapeError(f"{path} has a header but no data rows")
    names = [str(name).strip() for name in raw.iloc[0]]
    cells = raw.iloc[1:].to_numpy(dtype=object)

    short = [i for i, row in enumerate(cells)
             if any(not isinstance(cell, str) for cell in row)]
    if short:
        raise ShapeError(
            f"ragged row {short[0]} in {path}: expected {len(names)} cells")

    columns = [_parse_column(cells[:, j], names[j]) for j in range(len(names))]
    panel = TimeSeriesPanel(tuple(names), numpy.column_stack(columns))
    logger.debug(f"loaded {path}: n={panel.n}, g={panel.g}")
    return panel


def write_panel(panel: TimeSeriesPanel, path) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    panel.to_frame().to_csv(
        path, index=False, float_format=CSV_FLOAT_FORMAT,
        lineterminator="\n")


def standardize(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Z-score every column (sample mean 0, sample standard deviation 1)."""
    mean = panel.data.mean(axis=0)
    sd = panel.data.std(axis=0, ddof=1) if panel.n > 1 else numpy.zeros(panel.g)
    constant = numpy.flatnonzero(~(sd > 0))
    if constant.size:
        raise ConstantSeries(
            f"series {panel.names[constant[0]]!r} has zero variance")
    return TimeSeriesPanel(panel.names, (panel.data - mean) / sd)


################################################################################
# Parameters
################################################################################

@dataclasses.dataclass(frozen=True)
class DiscoveryParams:
    tau_max: int = DEFAULT_TAU_MAX
    k_fraction: float = DEFAULT_K_FRACTION
    A: float = DEFAULT_A
    indep_threshold: float = DEFAULT_INDEP_THRESHOLD
    horizon_T: int = DEFAULT_HORIZON
    seed: int = DEFAULT_SEED
    estimator: str = DEFAULT_ESTIMATOR

    def __post_init__(self):
        if int(self.tau_max) != self.tau_max or self.tau_max < 1:
            raise InvalidParams(f"tau_max must be an integer >= 1, got {self.tau_max}")
        if not 0 < self.k_fraction < 1:
            raise InvalidParams(f"k_fraction must be in (0, 1), got {self.k_fraction}")
        if not 0 < self.A < 1:
            raise InvalidParams(f"A must be in (0, 1), got {self.A}")
        if not self.indep_threshold > 0:
            raise InvalidParams(
                f"indep_threshold must be > 0, got {self.indep_threshold}")
        if int(self.horizon_T) != self.horizon_T or self.horizon_T < 1:
            raise InvalidParams(f"horizon_T must be an integer >= 1, got {self.horizon_T}")
        if self.estimator not in ESTIMATORS:
            raise InvalidParams(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")

    def k_for(self, m: int) -> int:
        """Neighbor count for m effective samples."""
        return max(1, int(round(self.k_fraction * m)))

    def effective_samples(self, n: int) -> int:
        return n - self.tau_max - self.horizon_T + 1

    def min_length(self) -> int:
        return 2 * (self.tau_max + 1)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


################################################################################
# Embedding components
################################################################################

class LaggedComponent(NamedTuple):
    """Series `var` observed `lag` steps before the target time."""
    var: int
    lag: int


@dataclasses.dataclass(frozen=True)
class EmbeddingVector:
    components: Tuple[LaggedComponent, ...] = ()
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        components = tuple(LaggedComponent(*c) for c in self.components)
        if len(set(components)) != len(components):
            raise InvalidParams(f"duplicate components in {components}")
        if any(c.lag < 1 for c in components):
            raise InvalidParams(f"lags must be >= 1 in {components}")
        if len(self.labels) != len(components):
            raise InvalidParams("one partition label is needed per component")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def partition(cls, components: Iterable[LaggedComponent], target: int,
                  driver: Optional[int] = None) -> "EmbeddingVector":
        components = tuple(components)
        labels = tuple(
            "x" if c.var == driver else "y" if c.var == target else "z"
            for c in components)
        return cls(components, labels)

    def relabel(self, target: int, driver: Optional[int]) -> "EmbeddingVector":
        return EmbeddingVector.partition(self.components, target, driver)

    def _select(self, label: str) -> Tuple[LaggedComponent, ...]:
        return tuple(c for c, l in zip(self.components, self.labels) if l == label)

    @property
    def w_x(self):
        return self._select("x")

    @property
    def w_y(self):
        return self._select("y")

    @property
    def w_z(self):
        return self._select("z")

    def __len__(self):
        return len(self.components)


################################################################################
# Summary causal graph
################################################################################

class Mark(enum.Enum):
    absent = "absent"
    directed = "directed"
    bidirected = "bidirected"


class SummaryCausalGraph:
    """One node per series; Directed(i, j) reads i causes j at some lag,
    Bidirected(i, j) mutual dependence or a possible hidden confounder.

    The mark table never holds Directed(i, j) together with Directed(j, i):
    such a pair is stored as Bidirected.
    """

    def __init__(self, names: Sequence[str],
                 directed: Iterable[Tuple[int, int]] = (),
                 bidirected: Iterable[Tuple[int, int]] = (),
                 weights: Optional[Dict[Tuple[int, int], float]] = None,
                 method: Optional[str] = None):
        self._names = tuple(str(name) for name in names)
        self.method = method
        self.audit = None
        g = len(self._names)

        def check(i, j):
            i, j = int(i), int(j)
            if not (0 <= i < g and 0 <= j < g):
                raise InvalidGraph(f"edge ({i}, {j}) outside {g} nodes")
            if i == j:
                raise InvalidGraph(f"self-loop on node {i} is not representable")
            return i, j

        directed = {check(i, j) for i, j in directed}
        marks = {}
        for i, j in bidirected:
            i, j = check(i, j)
            marks[i, j] = marks[j, i] = Mark.bidirected
        for i, j in directed:
            if (j, i) in directed or marks.get((i, j)) is Mark.bidirected:
                marks[i, j] = marks[j, i] = Mark.bidirected
            else:
                marks[i, j] = Mark.directed
        self._marks = marks

        self._weights = {}
        for (i, j), r in (weights or {}).items():
            if (i, j) in marks:
                self._weights[int(i), int(j)] = float(r)

    @property
    def names(self) -> Tuple[str, ...]:
        return self._names

    @property
    def g(self) -> int:
        return len(self._names)

    def mark(self, i: int, j: int) -> Mark:
        return self._marks.get((i, j), Mark.absent)

    def weight(self, i: int, j: int) -> Optional[float]:
        return self._weights.get((i, j))

    @property
    def weights(self) -> Dict[Tuple[int, int], float]:
        return dict(self._weights)

    def directed_edges(self) -> List[Tuple[int, int]]:
        return sorted(e for e, m in self._marks.items() if m is Mark.directed)

    def bidirected_edges(self) -> List[Tuple[int, int]]:
        """Bidirected pairs, each listed once as (i, j) with i < j."""
        return sorted((i, j) for (i, j), m in self._marks.items()
                      if m is Mark.bidirected and i < j)

    def adjacencies(self) -> set:
        return {frozenset(e) for e in self._marks}

    def num_edges(self) -> int:
        return len(self.directed_edges()) + len(self.bidirected_edges())

    def permute(self, order: Sequence[int]) -> "SummaryCausalGraph":
        """Relabel like TimeSeriesPanel.permute: new node p is old node
        order[p]."""
        order = list(order)
        new_index = {old: new for new, old in enumerate(order)}
        return SummaryCausalGraph(
            [self._names[i] for i in order],
            [(new_index[i], new_index[j]) for i, j in self.directed_edges()],
            [(new_index[i], new_index[j]) for i, j in self.bidirected_edges()],
            {(new_index[i], new_index[j]): r
             for (i, j), r in self._weights.items()},
            self.method)

    def same_edges(self, other: "SummaryCausalGraph") -> bool:
        return (self.names == other.names
                and self.directed_edges() == other.directed_edges()
                and self.bidirected_edges() == other.bidirected_edges())

    def __eq__(self, other):
        if not isinstance(other, SummaryCausalGraph):
            return NotImplemented
        return self.same_edges(other) and self._weights == other._weights

    def __repr__(self):
        edges = [f"{i}->{j}" for i, j in self.directed_edges()]
        edges += [f"{i}<->{j}" for i, j in self.bidirected_edges()]
        return f"SummaryCausalGraph(g={self.g}, edges=[{', '.join(edges)}])"

    def to_json(self) -> dict:
        edges = []
        for i, j in self.directed_edges():
            edges.append({"from": i, "to": j, "mark": "directed",
                          "r": self._weights.get((i, j))})
        for i, j in self.bidirected_edges():
            edge = {"from": i, "to": j, "mark": "bidirected",
                    "r": self._weights.get((i, j))}
            if (j, i) in self._weights:
                edge["r_reverse"] = self._weights[j, i]
            edges.append(edge)
        graph = {"nodes": list(self._names), "edges": edges}
        if self.method is not None:
            graph["method"] = self.method
        return graph

    @classmethod
    def from_json(cls, graph: dict) -> "SummaryCausalGraph":
        try:
            directed, bidirected, weights = [], [], {}
            for edge in graph["edges"]:
                i, j = int(edge["from"]), int(edge["to"])
                if edge["mark"] == "directed":
                    directed.append((i, j))
                elif edge["mark"] == "bidirected":
                    bidirected.append((i, j))
                    if edge.get("r_reverse") is not None:
                        weights[j, i] = edge["r_reverse"]
                else:
                    raise InvalidGraph(f"unknown edge mark {edge['mark']!r}")
                if edge.get("r") is not None:
                    weights[i, j] = edge["r"]
            return cls(graph["nodes"], directed, bidirected, weights,
                       graph.get("method"))
        except KeyError as e:
            raise InvalidGraph(f"graph JSON is missing key {e}") from None

    def to_dot(self) -> str:
        lines = ["digraph {"]
        for i, name in enumerate(self._names):
            lines.append(f'  {i} [label="{_dot_escape(name)}"];')
        for i, j in self.directed_edges():
            r = self._weights.get((i, j))
            label = f' [label="{r:.3g}"]' if r is not None else ""
            lines.append(f"  {i} -> {j}{label};")
        for i, j in self.bidirected_edges():
            lines.append(f"  {i} -> {j} [dir=both];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def write_graph(graph: SummaryCausalGraph, path) -> None:
    """Write JSON, or DOT when the suffix is .dot."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".dot":
        path.write_text(graph.to_dot())
    else:
        with open(path, "w") as f:
            json.dump(graph.to_json(), f, indent=2)
            f.write("\n")


def read_graph(path) -> SummaryCausalGraph:
    with open(path) as f:
        return SummaryCausalGraph.from_json(json.load(f))
