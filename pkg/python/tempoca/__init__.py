"""Causal discovery for multivariate time series: PC-stable search with the
PMIME measure as its independence test, benchmark simulators, a pairwise
Granger baseline and F1 scoring."""

__version__ = "0.1.0"

from .logger import LoggerLevel, set_logger_level
from .errors import *  # noqa: F401,F403
from .core import (
    DiscoveryParams, EmbeddingVector, LaggedComponent, Mark,
    SummaryCausalGraph, TimeSeriesPanel, load_panel, read_graph, standardize,
    write_graph, write_panel)
from .knn_info import (
    digamma, estimate_cmi, estimate_entropy, estimate_mi, knn_radius,
    count_within, SamplePointCloud)
from .pmime import (
    PmimeResult, build_candidates, build_mixed_embedding, pmime_matrix,
    pmime_network, pmime_r, prepare_panel)
from .pc_pmime import (
    EdgeTestRecord, discover, orient_edges, skeleton_phase, write_audit)
from .simulate import (
    StructureSpec, empirical_stationarity_check, generate, ground_truth,
    write_dataset)
from .granger import GrangerTest, f_cdf_complement, granger_test, ols_autoregression, pwgc
from .evaluation import (
    BenchmarkGrid, BenchmarkResult, ScoreReport, aggregate, f1_score,
    run_benchmark, write_plot_data)
