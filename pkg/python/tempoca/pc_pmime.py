"""PC-stable skeleton search with PMIME as the independence test, followed by
orientation from the asymmetry of the measure."""

import dataclasses
import itertools
import logging
import pathlib
from typing import Dict, List, Sequence, Set, Tuple

import joblib
import pandas

from .core import (
    CSV_FLOAT_FORMAT, DiscoveryParams, SummaryCausalGraph, TimeSeriesPanel)
from .errors import TooShort
from .pmime import EmbeddingCache, pmime_r, prepare_panel

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclasses.dataclass(frozen=True)
class EdgeTestRecord:
    """One PMIME test of source -> target given cond_set."""
    source: int
    target: int
    cond_set: Tuple[int, ...]
    r: float
    removed: bool
    level: int


@dataclasses.dataclass
class Skeleton:
    """Surviving directed pairs of the skeleton search. Marks are not yet
    decided: a pair surviving in both directions is still two entries."""
    names: Tuple[str, ...]
    edges: Set[Edge]

    @property
    def g(self) -> int:
        return len(self.names)

    def in_neighbors(self, i: int) -> List[int]:
        return sorted(j for j, t in self.edges if t == i)


def _test_edge(panel, params, source, target, cond_sets, level, cache):
    records = []
    for cond in cond_sets:
        r = pmime_r(panel, source, target, cond, params, cache).r
        removed = r < params.indep_threshold
        records.append(EdgeTestRecord(
            source, target, tuple(cond), r, removed, level))
        logger.debug(f"R({source} -> {target} | {list(cond)}) = {r:.6g}")
        if removed:
            break
    return records


def skeleton_phase(panel: TimeSeriesPanel, params: DiscoveryParams,
                   n_jobs: int = 1) -> Tuple[Skeleton, List[EdgeTestRecord]]:
    """Level-wise edge removal on a prepared (standardized, jittered) panel.

    Within a level every test reads the same snapshot of the graph; edges
    found independent are removed only once the level is complete.
    """
    g = panel.g
    skeleton = Skeleton(panel.names, {(j, i) for j in range(g)
                                      for i in range(g) if i != j})
    records: List[EdgeTestRecord] = []
    cache = EmbeddingCache()
    level = 0
    while True:
        jobs = []
        for j, i in sorted(skeleton.edges):
            adj = [p for p in skeleton.in_neighbors(i) if p != j]
            if len(adj) >= level:
                jobs.append((j, i, list(itertools.combinations(adj, level))))
        if not jobs:
            break

        # cKDTree queries release the GIL, so threads share the cache.
        results = joblib.Parallel(n_jobs=n_jobs, prefer="threads")(
            joblib.delayed(_test_edge)(panel, params, j, i, cond_sets, level, cache)
            for j, i, cond_sets in jobs)

        removed = []
        for edge_records in results:
            records.extend(edge_records)
            last = edge_records[-1]
            if last.removed:
                removed.append((last.source, last.target))
        skeleton.edges.difference_update(removed)
        logger.info(f"level {level}: {len(jobs)} edges tested, "
                    f"{len(removed)} removed, {len(skeleton.edges)} remain")
        level += 1
    return skeleton, records


def orient_edges(skeleton: Skeleton,
                 records: Sequence[EdgeTestRecord]) -> SummaryCausalGraph:
    """Directed where one direction survived, bidirected where both did.

    The weight of a surviving direction is the smallest R among its tests.
    """
    weights: Dict[Edge, float] = {}
    for record in records:
        edge = (record.source, record.target)
        if edge in skeleton.edges:
            weights[edge] = min(weights.get(edge, record.r), record.r)
    return SummaryCausalGraph(skeleton.names, directed=skeleton.edges,
                              weights=weights, method="pc_pmime")


def discover(panel: TimeSeriesPanel, params: DiscoveryParams = DiscoveryParams(),
             n_jobs: int = 1) -> SummaryCausalGraph:
    """Summary causal graph of the panel; the test log is kept in
    `graph.audit`."""
    if panel.n < params.min_length():
        raise TooShort(f"{panel.n} observations, discovery needs at least "
                       f"{params.min_length()} for tau_max={params.tau_max}")
    prepared = prepare_panel(panel, params)
    skeleton, records = skeleton_phase(prepared, params, n_jobs)
    graph = orient_edges(skeleton, records)
    graph.audit = records
    logger.info(f"discovered {graph!r}")
    return graph


def audit_frame(records: Sequence[EdgeTestRecord]) -> pandas.DataFrame:
    return pandas.DataFrame({
        "from": [r.source for r in records],
        "to": [r.target for r in records],
        "level": [r.level for r in records],
        "cond_set": [";".join(str(v) for v in r.cond_set) for r in records],
        "r": [r.r for r in records],
        "removed": [r.removed for r in records],
    }, columns=["from", "to", "level", "cond_set", "r", "removed"])


def write_audit(records: Sequence[EdgeTestRecord], path) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    audit_frame(records).to_csv(
        path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
