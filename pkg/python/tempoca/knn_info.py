"""Nearest-neighbor estimators of entropy, mutual information and conditional
mutual information (max-norm, digamma corrected, results in nats)."""

import functools
import logging
import zlib
from typing import List, Optional, Union

import numpy
import scipy.spatial
import scipy.special

from .core import DEFAULT_ESTIMATOR, ESTIMATORS, TimeSeriesPanel
from .errors import DomainError, KTooLarge, ShapeMismatch

logger = logging.getLogger(__name__)

JITTER_AMPLITUDE = 1e-10


def digamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"digamma is evaluated for x > 0 only, got {x}")
    return float(scipy.special.digamma(x))


class SamplePointCloud:
    """m joint samples in d dimensions with a lazily built max-norm kd-tree.

    Read-only once built, so one cloud may serve parallel queries.
    """

    def __init__(self, points):
        points = numpy.array(points, dtype=numpy.float64)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2:
            raise ShapeMismatch(f"point cloud must be 2D, got shape {points.shape}")
        if not numpy.isfinite(points).all():
            raise DomainError("point cloud contains non-finite entries")
        points.setflags(write=False)
        self.points = points

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @functools.cached_property
    def tree(self) -> scipy.spatial.cKDTree:
        return scipy.spatial.cKDTree(self.points)


CloudLike = Union[SamplePointCloud, numpy.ndarray]


def as_cloud(points: CloudLike) -> SamplePointCloud:
    return points if isinstance(points, SamplePointCloud) else SamplePointCloud(points)


def _check_k(cloud: SamplePointCloud, k: int):
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k >= cloud.m:
        raise KTooLarge(f"k={k} needs more than {cloud.m} points")


def knn_radius(cloud: CloudLike, index: int, k: int) -> float:
    """Max-norm distance from point `index` to its k-th nearest neighbor,
    the point itself excluded."""
    cloud = as_cloud(cloud)
    _check_k(cloud, k)
    distances, _ = cloud.tree.query(cloud.points[index], k=[k + 1], p=numpy.inf)
    return float(distances[0])


def knn_radii(cloud: CloudLike, k: int) -> numpy.ndarray:
    cloud = as_cloud(cloud)
    _check_k(cloud, k)
    distances, _ = cloud.tree.query(cloud.points, k=[k + 1], p=numpy.inf)
    return distances[:, 0]


def count_within(cloud: CloudLike, index: int, radius: float,
                 strict: bool = True) -> int:
    """Number of other points closer than `radius` (or within it when not
    strict)."""
    cloud = as_cloud(cloud)
    counts = count_within_radii(
        SamplePointCloud(cloud.points[index:index + 1]), numpy.array([radius]),
        strict, reference=cloud)
    return int(counts[0])


def count_within_radii(cloud: CloudLike, radii: numpy.ndarray,
                       strict: bool = True,
                       reference: Optional[SamplePointCloud] = None) -> numpy.ndarray:
    """Per-point neighbor counts at per-point radii.

    Queries are the points of `cloud`; they are counted against `reference`
    (default `cloud` itself) and the query point itself is not counted.
    """
    cloud = as_cloud(cloud)
    reference = cloud if reference is None else reference
    radii = numpy.asarray(radii, dtype=numpy.float64)
    if (radii < 0).any():
        raise DomainError("radii must be >= 0")
    # Ball queries are inclusive; step just below the radius for "<".
    query_radii = numpy.nextafter(radii, 0) if strict else radii
    counts = reference.tree.query_ball_point(
        cloud.points, query_radii, p=numpy.inf, return_length=True)
    counts = numpy.asarray(counts, dtype=numpy.int64) - 1
    if strict:
        counts[radii <= 0] = 0
    return counts


def knn_radii_brute(points: numpy.ndarray, k: int) -> numpy.ndarray:
    """O(m^2) reference for knn_radii."""
    cloud = as_cloud(points)
    _check_k(cloud, k)
    distances = _pairwise_max_norm(cloud.points)
    return numpy.sort(distances, axis=1)[:, k]


def count_within_radii_brute(points: numpy.ndarray, radii: numpy.ndarray,
                             strict: bool = True) -> numpy.ndarray:
    """O(m^2) reference for count_within_radii."""
    distances = _pairwise_max_norm(as_cloud(points).points)
    numpy.fill_diagonal(distances, numpy.inf)
    radii = numpy.asarray(radii, dtype=numpy.float64).reshape(-1, 1)
    inside = distances < radii if strict else distances <= radii
    return inside.sum(axis=1)


def _pairwise_max_norm(points: numpy.ndarray) -> numpy.ndarray:
    return numpy.abs(points[:, None, :] - points[None, :, :]).max(axis=2)


def _as_columns(values, m: Optional[int] = None) -> numpy.ndarray:
    if values is None:
        return numpy.empty((m or 0, 0))
    if isinstance(values, SamplePointCloud):
        return values.points
    values = numpy.asarray(values, dtype=numpy.float64)
    return values.reshape(-1, 1) if values.ndim == 1 else values


def count_within_boxes(groups, half_widths) -> numpy.ndarray:
    """Per-point counts of other points inside a box made of one max-norm
    ball per column group: point j is counted for i when, for every group g,
    |g_i - g_j| <= half_widths[g][i]. Ends are included."""
    groups = [_as_columns(group) for group in groups]
    half_widths = [numpy.asarray(h, dtype=numpy.float64) for h in half_widths]
    if len(groups) != len(half_widths):
        raise ShapeMismatch(
            f"{len(groups)} column groups but {len(half_widths)} half-widths")
    if any((h < 0).any() for h in half_widths):
        raise DomainError("half-widths must be >= 0")
    if len(groups) == 1:
        return count_within_radii(groups[0], half_widths[0], strict=False)

    cloud = SamplePointCloud(numpy.hstack(groups))
    reach = numpy.max(half_widths, axis=0)
    hits = cloud.tree.query_ball_point(cloud.points, reach, p=numpy.inf)
    lengths = numpy.array([len(h) for h in hits], dtype=numpy.int64)
    rows = numpy.repeat(numpy.arange(cloud.m), lengths)
    cols = numpy.concatenate([numpy.asarray(h, dtype=numpy.int64) for h in hits])
    inside = numpy.ones(rows.size, dtype=bool)
    for group, h in zip(groups, half_widths):
        inside &= numpy.abs(group[rows] - group[cols]).max(axis=1) <= h[rows]
    # Every point is inside its own box.
    return numpy.bincount(rows[inside], minlength=cloud.m) - 1


def count_within_boxes_brute(groups, half_widths) -> numpy.ndarray:
    """O(m^2) reference for count_within_boxes."""
    inside = None
    for group, h in zip(groups, half_widths):
        distances = _pairwise_max_norm(_as_columns(group))
        within = distances <= numpy.asarray(h, dtype=numpy.float64).reshape(-1, 1)
        inside = within if inside is None else inside & within
    numpy.fill_diagonal(inside, False)
    return inside.sum(axis=1)


def marginal_radii(joint: CloudLike, k: int, groups) -> List[numpy.ndarray]:
    """Per-point spread of the k nearest joint neighbors along each column
    group: the max-norm distance, within the group's columns, to the
    farthest of them."""
    joint = as_cloud(joint)
    _check_k(joint, k)
    # The k + 1 nearest points hold the query itself or a duplicate of it.
    _, neighbors = joint.tree.query(joint.points, k=k + 1, p=numpy.inf)
    radii = []
    for columns in groups:
        values = joint.points[:, columns]
        spread = numpy.abs(values[neighbors] - values[:, None, :])
        radii.append(spread.max(axis=(1, 2)))
    return radii


def _split_columns(x, y, z):
    x = _as_columns(x)
    y = _as_columns(y)
    z = _as_columns(z, x.shape[0])
    if y.shape[0] != x.shape[0] or z.shape[0] != x.shape[0]:
        raise ShapeMismatch(
            f"sample counts differ: x={x.shape[0]}, y={y.shape[0]}, z={z.shape[0]}")
    if x.shape[1] == 0 or y.shape[1] == 0:
        raise ShapeMismatch("x and y need at least one column each")
    return x, y, z


def estimate_cmi(x_cols: CloudLike, y_cols: CloudLike,
                 z_cols: Optional[CloudLike], k: int,
                 estimator: str = DEFAULT_ESTIMATOR) -> float:
    """Nearest-neighbor estimate of I(X; Y | Z) in nats.

    With no Z this is the mutual information estimator. The value is not
    clamped and may be slightly negative.

    estimator="box" counts, with ends included, the points inside the box
    spanned by the k nearest joint neighbors along each of the x, y and z
    groups. estimator="ball" counts, strictly, the points inside the joint
    k-th neighbor radius in every marginal space.
    """
    x, y, z = _split_columns(x_cols, y_cols, z_cols)
    if estimator == "box":
        return _cmi_box(x, y, z, k)
    if estimator == "ball":
        return _cmi_ball(x, y, z, k)
    raise DomainError(f"unknown estimator {estimator!r}, expected one of {ESTIMATORS}")


def _cmi_ball(x, y, z, k):
    m = x.shape[0]
    joint = SamplePointCloud(numpy.hstack([x, y, z]))
    radii = knn_radii(joint, k)

    n_xz = count_within_radii(numpy.hstack([x, z]), radii)
    n_yz = count_within_radii(numpy.hstack([y, z]), radii)
    if z.shape[1]:
        n_z = count_within_radii(z, radii)
    else:
        n_z = numpy.full(m, m - 1)

    psi = scipy.special.digamma
    terms = psi(n_z + 1.0) - (psi(n_xz + 1.0) + psi(n_yz + 1.0))
    return float(psi(k) + numpy.mean(terms))


def _cmi_box(x, y, z, k):
    m = x.shape[0]
    dx, dy = x.shape[1], y.shape[1]
    joint = SamplePointCloud(numpy.hstack([x, y, z]))
    column_groups = [range(dx), range(dx, dx + dy)]
    if z.shape[1]:
        column_groups.append(range(dx + dy, joint.d))
    radii = marginal_radii(joint, k, [list(c) for c in column_groups])

    if z.shape[1]:
        eps_x, eps_y, eps_z = radii
        n_xz = count_within_boxes([x, z], [eps_x, eps_z])
        n_yz = count_within_boxes([y, z], [eps_y, eps_z])
        n_z = count_within_boxes([z], [eps_z])
    else:
        eps_x, eps_y = radii
        n_xz = count_within_boxes([x], [eps_x])
        n_yz = count_within_boxes([y], [eps_y])
        n_z = numpy.full(m, m)

    # The joint box has one side per group; xz and yz boxes have one fewer.
    sides = len(column_groups)
    psi = scipy.special.digamma

    def marginal(n):
        return psi(n) - (sides - 2) / n

    terms = psi(n_z) - (marginal(n_xz) + marginal(n_yz))
    return float(psi(k) - (sides - 1) / k + numpy.mean(terms))


def estimate_mi(x_cols: CloudLike, y_cols: CloudLike, k: int,
                estimator: str = DEFAULT_ESTIMATOR) -> float:
    return estimate_cmi(x_cols, y_cols, None, k, estimator)


def estimate_entropy(x_cols: CloudLike, k: int) -> float:
    """Kozachenko-Leonenko entropy estimate in nats (max-norm balls)."""
    cloud = as_cloud(_as_columns(x_cols))
    radii = knn_radii(cloud, k)
    if (radii <= 0).any():
        raise DomainError("duplicate points give zero neighbor radii; add jitter")
    return float(digamma(cloud.m) - digamma(k)
                 + cloud.d * numpy.mean(numpy.log(2 * radii)))


def series_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def jitter_panel(panel: TimeSeriesPanel, seed: int,
                 amplitude: float = JITTER_AMPLITUDE) -> TimeSeriesPanel:
    """Add uniform noise of `amplitude` times each column's standard
    deviation to break distance ties.

    Each column draws from a generator seeded by (seed, series name), so the
    noise follows the series when columns are reordered.
    """
    data = numpy.array(panel.data)
    sd = data.std(axis=0, ddof=1) if panel.n > 1 else numpy.ones(panel.g)
    for j, name in enumerate(panel.names):
        rng = numpy.random.default_rng([int(seed) & 0xFFFFFFFF, series_key(name)])
        data[:, j] += amplitude * sd[j] * rng.random(panel.n)
    return TimeSeriesPanel(panel.names, data)
