"""Pairwise Granger causality: nested least-squares autoregressions compared
with an F-test."""

import dataclasses
import logging
import math
from typing import NamedTuple, Sequence

import numpy
import scipy.special

from .core import DEFAULT_TAU_MAX, LaggedComponent, SummaryCausalGraph, TimeSeriesPanel
from .errors import DomainError, RankDeficient, SelfTest, TooShort

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.03


class OlsFit(NamedTuple):
    coefficients: numpy.ndarray  # intercept first, then one per regressor
    rss: float
    m: int


def ols_autoregression(panel: TimeSeriesPanel, target: int,
                       regressors: Sequence[LaggedComponent],
                       tau_max: int) -> OlsFit:
    """Least-squares fit of target_t on an intercept and the lagged
    regressors, over t = tau_max .. n-1 whatever the regressor lags."""
    m = panel.n - tau_max
    p = len(regressors) + 1
    if m <= p:
        raise TooShort(f"{m} samples cannot fit {p} coefficients")
    columns = [numpy.ones(m)]
    for var, lag in regressors:
        if not 1 <= lag <= tau_max:
            raise DomainError(f"lag {lag} of series {var} outside [1, {tau_max}]")
        columns.append(panel.data[tau_max - lag:panel.n - lag, var])
    design = numpy.column_stack(columns)
    if numpy.linalg.matrix_rank(design) < p:
        raise RankDeficient(
            f"design matrix for target {target} with regressors "
            f"{list(regressors)} is rank deficient")
    y = panel.data[tau_max:, target]
    coefficients, _, _, _ = numpy.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coefficients
    return OlsFit(coefficients, float(residuals @ residuals), m)


def f_cdf_complement(f: float, d1: float, d2: float) -> float:
    """P(F > f) for an F(d1, d2) variable."""
    if math.isnan(f) or f < 0:
        raise DomainError(f"F statistic must be >= 0, got {f}")
    if not (d1 >= 1 and d2 >= 1):
        raise DomainError(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    if f == 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    p = scipy.special.betainc(d2 / 2, d1 / 2, d2 / (d2 + d1 * f))
    return float(min(max(p, 0.0), 1.0))


@dataclasses.dataclass(frozen=True)
class GrangerTest:
    driver: int
    target: int
    tau_max: int
    rss_full: float
    rss_reduced: float
    f_stat: float
    p_value: float


def granger_test(panel: TimeSeriesPanel, driver: int, target: int,
                 tau_max: int) -> GrangerTest:
    if driver == target:
        raise SelfTest(f"driver and target are both series {driver}")
    own = [LaggedComponent(target, lag) for lag in range(1, tau_max + 1)]
    other = [LaggedComponent(driver, lag) for lag in range(1, tau_max + 1)]
    reduced = ols_autoregression(panel, target, own, tau_max)
    full = ols_autoregression(panel, target, own + other, tau_max)

    d2 = full.m - 2 * tau_max - 1
    if d2 < 1:
        raise TooShort(f"{full.m} samples leave no residual degrees of freedom")
    # Nested fits: any negative gain is rounding.
    gain = max(reduced.rss - full.rss, 0.0)
    if full.rss > 0:
        f_stat = (gain / tau_max) / (full.rss / d2)
    else:
        f_stat = math.inf if gain > 0 else 0.0
    p_value = f_cdf_complement(f_stat, tau_max, d2)
    return GrangerTest(driver, target, tau_max, full.rss, reduced.rss,
                       f_stat, p_value)


def pwgc(panel: TimeSeriesPanel, tau_max: int = DEFAULT_TAU_MAX,
         alpha: float = DEFAULT_ALPHA) -> SummaryCausalGraph:
    """Edge j -> i whenever j Granger-causes i at level alpha; mutual
    detection gives a bidirected edge."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    edges = []
    for j in range(panel.g):
        for i in range(panel.g):
            if i == j:
                continue
            test = granger_test(panel, j, i, tau_max)
            logger.debug(f"F({j} -> {i}) = {test.f_stat:.6g}, p = {test.p_value:.3g}")
            if test.p_value < alpha:
                edges.append((j, i))
    return SummaryCausalGraph(panel.names, directed=edges, method="pwgc")
