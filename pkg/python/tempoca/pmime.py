"""Partial mutual information from mixed embedding (PMIME).

For a target series Y the mixed embedding w is grown one lagged component at
a time from the past of every series in scope, each cycle taking the
component with the largest conditional information about the future of Y.
The causal strength of a driver X is the share of the information of w
about Y's future that only X's components carry:

    R = I(Y^T; w^x | w^y, w^Z) / I(Y^T; w)
"""

import dataclasses
import logging
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy

from . import knn_info
from .core import (
    DiscoveryParams, EmbeddingVector, LaggedComponent, SummaryCausalGraph,
    TimeSeriesPanel, standardize)
from .errors import InvalidParams, SelfTest, TooShort
from .logger import TRACE

logger = logging.getLogger(__name__)

MAX_EMBEDDING_COMPONENTS = 20
MIN_SAMPLES_PER_NEIGHBOR = 5


@dataclasses.dataclass(frozen=True)
class PmimeResult:
    """R of one driver -> target test with the estimates it was built from.

    r is 0 whenever the embedding holds no driver component. It can also be
    0 with `driver_selected` true: the numerator estimate is clamped at 0
    before the division, so a driver component that was accepted while
    growing the embedding may still carry no information once the target
    and conditioning components are given. The unclamped `numerator`
    tells the two cases apart.
    """
    r: float
    embedding: EmbeddingVector
    numerator: float
    denominator: float
    cycles: int

    @property
    def driver_selected(self) -> bool:
        return len(self.embedding.w_x) > 0


def prepare_panel(panel: TimeSeriesPanel, params: DiscoveryParams) -> TimeSeriesPanel:
    """Standardize and add the seeded tie-breaking jitter; every estimate in
    this module expects a prepared panel."""
    return knn_info.jitter_panel(standardize(panel), params.seed)


def build_candidates(scope: Union[int, Iterable[int]],
                     tau_max: int) -> List[LaggedComponent]:
    """All (var, lag) pairs with lag in [1, tau_max] for the series in scope
    (an int g means series 0..g-1), ordered by (var, lag)."""
    if tau_max < 1:
        raise InvalidParams(f"tau_max must be >= 1, got {tau_max}")
    series = range(scope) if isinstance(scope, int) else sorted(set(scope))
    return [LaggedComponent(var, lag)
            for var in series for lag in range(1, tau_max + 1)]


class LaggedSamples:
    """Aligned samples of a target's future and of lagged components.

    Sample t runs over tau_max .. n - T; the future of Y is
    (Y_t, ..., Y_{t+T-1}) and component (v, l) is X^v_{t-l}.
    """

    def __init__(self, panel: TimeSeriesPanel, target: int,
                 params: DiscoveryParams):
        self.panel = panel
        self.tau_max = params.tau_max
        self.m = params.effective_samples(panel.n)
        self.k = params.k_for(max(self.m, 1))
        self.estimator = params.estimator
        if panel.n < params.min_length() or self.m < MIN_SAMPLES_PER_NEIGHBOR * self.k:
            raise TooShort(
                f"{panel.n} observations leave {self.m} effective samples, "
                f"need at least {MIN_SAMPLES_PER_NEIGHBOR * self.k} for k={self.k} "
                f"(tau_max={params.tau_max}, horizon_T={params.horizon_T})")
        self.future = numpy.column_stack([
            panel.data[self.tau_max + h:self.tau_max + h + self.m, target]
            for h in range(params.horizon_T)])

    def column(self, component: LaggedComponent) -> numpy.ndarray:
        start = self.tau_max - component.lag
        return self.panel.data[start:start + self.m, component.var]

    def columns(self, components) -> Optional[numpy.ndarray]:
        if not components:
            return None
        return numpy.column_stack([self.column(c) for c in components])


def _grow_embedding(samples: LaggedSamples, candidates: List[LaggedComponent],
                    A: float) -> Tuple[Tuple[LaggedComponent, ...], int]:
    selected: List[LaggedComponent] = []
    remaining = list(candidates)
    cycles = 0
    while remaining and len(selected) < MAX_EMBEDDING_COMPONENTS:
        cycles += 1
        w = samples.columns(selected)
        gains = [knn_info.estimate_cmi(samples.future, samples.column(c), w,
                                       samples.k, samples.estimator)
                 for c in remaining]
        best = int(numpy.argmax(gains))  # first maximum, lowest (var, lag)
        candidate = remaining[best]
        gain = max(gains[best], 0.0)
        if gain <= 0:
            logger.log(TRACE, f"cycle {cycles}: best {candidate} brings no information")
            break
        if selected:
            total = max(knn_info.estimate_mi(
                samples.future, samples.columns(selected + [candidate]),
                samples.k, samples.estimator), 0.0)
            ratio = gain / total if total > 0 else 0.0
        else:
            ratio = 1.0
        if not ratio > A:
            logger.log(TRACE, f"cycle {cycles}: rejected {candidate} (ratio={ratio:.4g})")
            break
        logger.log(TRACE, f"cycle {cycles}: accepted {candidate} (ratio={ratio:.4g})")
        selected.append(candidate)
        del remaining[best]
    return tuple(selected), cycles


def build_mixed_embedding(panel: TimeSeriesPanel, target: int,
                          scope: Iterable[int],
                          params: DiscoveryParams) -> EmbeddingVector:
    """Greedy forward selection of lagged components explaining the future of
    `target`; the components are labelled y (target) or z (others)."""
    embedding, _ = _mixed_embedding(panel, target, scope, params)
    return embedding


def _mixed_embedding(panel, target, scope, params):
    scope = sorted(set(scope) | {target})
    samples = LaggedSamples(panel, target, params)
    components, cycles = _grow_embedding(
        samples, build_candidates(scope, params.tau_max), params.A)
    return EmbeddingVector.partition(components, target), cycles


class EmbeddingCache:
    """Embeddings keyed by (target, scope); an embedding does not depend on
    which series of the scope is the driver."""

    def __init__(self):
        self._embeddings: Dict[Tuple[int, Tuple[int, ...]], tuple] = {}

    def get(self, panel, target, scope, params):
        key = (target, tuple(sorted(scope)))
        if key not in self._embeddings:
            self._embeddings[key] = _mixed_embedding(panel, target, scope, params)
        return self._embeddings[key]

    def __len__(self):
        return len(self._embeddings)


def pmime_r(panel: TimeSeriesPanel, driver: int, target: int,
            cond: Iterable[int], params: DiscoveryParams,
            cache: Optional[EmbeddingCache] = None) -> PmimeResult:
    """PMIME of driver -> target given the series in `cond`."""
    if driver == target:
        raise SelfTest(f"driver and target are both series {driver}")
    cond = sorted(set(cond))
    if driver in cond or target in cond:
        raise InvalidParams(
            f"conditioning set {cond} must exclude driver {driver} and target {target}")
    scope = [driver, target] + cond
    if cache is None:
        embedding, cycles = _mixed_embedding(panel, target, scope, params)
    else:
        embedding, cycles = cache.get(panel, target, scope, params)
    embedding = embedding.relabel(target, driver)

    if not embedding.w_x:
        return PmimeResult(0.0, embedding, 0.0, 0.0, cycles)

    samples = LaggedSamples(panel, target, params)
    numerator = knn_info.estimate_cmi(
        samples.future, samples.columns(embedding.w_x),
        samples.columns(embedding.w_y + embedding.w_z), samples.k,
        samples.estimator)
    denominator = knn_info.estimate_mi(
        samples.future, samples.columns(embedding.components), samples.k,
        samples.estimator)
    if denominator > 0:
        r = min(max(numerator, 0.0) / denominator, 1.0)
    else:
        r = 0.0
    return PmimeResult(r, embedding, numerator, denominator, cycles)


def pmime_matrix(panel: TimeSeriesPanel, params: DiscoveryParams) -> numpy.ndarray:
    """R[j, i] = PMIME of j -> i conditioned on every other series.

    One embedding per target serves all of its drivers. The diagonal is 0.
    """
    panel = prepare_panel(panel, params)
    R = numpy.zeros((panel.g, panel.g))
    cache = EmbeddingCache()
    for i in range(panel.g):
        for j in range(panel.g):
            if i == j:
                continue
            cond = [v for v in range(panel.g) if v not in (i, j)]
            R[j, i] = pmime_r(panel, j, i, cond, params, cache).r
    return R


def pmime_network(panel: TimeSeriesPanel,
                  params: DiscoveryParams) -> SummaryCausalGraph:
    """Causal network of the plain PMIME measure (full conditioning, no
    skeleton search): j -> i whenever R[j, i] reaches the threshold."""
    R = pmime_matrix(panel, params)
    edges = [(j, i) for j in range(panel.g) for i in range(panel.g)
             if j != i and R[j, i] >= params.indep_threshold]
    return SummaryCausalGraph(
        panel.names, directed=edges, weights={e: R[e] for e in edges},
        method="pmime")
