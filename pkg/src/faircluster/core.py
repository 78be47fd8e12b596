"""Colored metric point sets, clustering objectives, and exact balance arithmetic.

A dataset is a finite metric space whose points each carry one of two colors.
Balance of a point set is the min of the two color-count ratios, kept as an
exact rational so comparisons against fairness thresholds never go through
floating point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

# Exact rational type used for balances and thresholds.
Rational = Fraction

# Absolute tolerance for distance comparisons where ties matter.
DIST_TOL = 1e-9


class Color(enum.Enum):
    RED = "RED"
    BLUE = "BLUE"


class MetricKind(enum.Enum):
    EUCLIDEAN = "EUCLIDEAN"
    EXPLICIT = "EXPLICIT"


class Objective(enum.Enum):
    CENTER = "CENTER"
    MEDIAN = "MEDIAN"


@dataclass(frozen=True)
class ColoredDataset:
    """A two-colored point set with a metric.

    Points are identified by their index 0..n-1. The metric is either the
    Euclidean distance over `coords` (an (n, d) array) or an explicit
    symmetric distance matrix. Instances are immutable after construction
    and safe to share across workers.
    """

    colors: np.ndarray                      # (n,) array of uint8, 1 = BLUE, 0 = RED
    metric_kind: MetricKind
    coords: np.ndarray | None = None        # (n, d) float64, EUCLIDEAN only
    matrix: np.ndarray | None = None        # (n, n) float64, EXPLICIT only
    _pairwise_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        colors = np.ascontiguousarray(self.colors, dtype=np.uint8)
        object.__setattr__(self, "colors", colors)
        n = colors.shape[0]
        if n < 1:
            raise ValueError("dataset must contain at least one point")
        if not np.all((colors == 0) | (colors == 1)):
            raise ValueError("colors must be 0 (RED) or 1 (BLUE)")
        if self.metric_kind is MetricKind.EUCLIDEAN:
            if self.coords is None:
                raise ValueError("EUCLIDEAN dataset requires coordinates")
            coords = np.ascontiguousarray(self.coords, dtype=np.float64)
            if coords.ndim == 1:
                coords = coords.reshape(-1, 1)
            if coords.shape[0] != n:
                raise ValueError("coordinate count does not match color count")
            object.__setattr__(self, "coords", coords)
        else:
            if self.matrix is None:
                raise ValueError("EXPLICIT dataset requires a distance matrix")
            mat = np.ascontiguousarray(self.matrix, dtype=np.float64)
            _validate_explicit_matrix(mat, n)
            object.__setattr__(self, "matrix", mat)
        for arr in (self.colors, self.coords, self.matrix):
            if arr is not None:
                arr.setflags(write=False)

    @classmethod
    def from_points(cls, coords, colors) -> "ColoredDataset":
        return cls(colors=np.asarray(colors), metric_kind=MetricKind.EUCLIDEAN,
                   coords=np.asarray(coords, dtype=np.float64))

    @classmethod
    def from_distance_matrix(cls, matrix, colors) -> "ColoredDataset":
        return cls(colors=np.asarray(colors), metric_kind=MetricKind.EXPLICIT,
                   matrix=np.asarray(matrix, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.colors.shape[0]

    @property
    def blue_ids(self) -> np.ndarray:
        return np.flatnonzero(self.colors == 1)

    @property
    def red_ids(self) -> np.ndarray:
        return np.flatnonzero(self.colors == 0)

    def color_of(self, i: int) -> Color:
        return Color.BLUE if self.colors[i] == 1 else Color.RED

    def pairwise(self) -> np.ndarray:
        """Full (n, n) distance matrix, computed once and cached."""
        if not self._pairwise_cache:
            if self.metric_kind is MetricKind.EXPLICIT:
                d = self.matrix
            else:
                sq = np.sum(self.coords ** 2, axis=1)
                d2 = sq[:, None] + sq[None, :] - 2.0 * (self.coords @ self.coords.T)
                np.maximum(d2, 0.0, out=d2)
                d = np.sqrt(d2)
                np.fill_diagonal(d, 0.0)
                d.setflags(write=False)
            self._pairwise_cache.append(d)
        return self._pairwise_cache[0]


def _validate_explicit_matrix(mat: np.ndarray, n: int) -> None:
    if mat.shape != (n, n):
        raise ValueError("distance matrix shape must be (n, n)")
    if np.any(mat < 0):
        raise ValueError("distances must be nonnegative")
    if np.any(np.abs(np.diag(mat)) > DIST_TOL):
        raise ValueError("distance matrix diagonal must be zero")
    if np.any(np.abs(mat - mat.T) > DIST_TOL):
        raise ValueError("distance matrix must be symmetric")
    # Triangle inequality, checked one intermediate point at a time.
    for k in range(n):
        if np.any(mat > mat[:, k:k + 1] + mat[k:k + 1, :] + DIST_TOL):
            raise ValueError("distance matrix violates the triangle inequality")


@dataclass(frozen=True)
class Clustering:
    """A k-clustering of a set of point ids via an explicit assignment.

    `ids` is the domain of the clustering (all dataset ids, or a subset for
    clusterings built over e.g. decomposition centers). `labels[i]` is the
    cluster index of `ids[i]`. `centers`, when present, lists one designated
    center id per cluster index.
    """

    k: int
    ids: np.ndarray                 # (m,) int64 point ids, strictly increasing
    labels: np.ndarray              # (m,) int64 cluster indices in [0, k)
    centers: tuple[int, ...] | None = None

    def __post_init__(self):
        ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", labels)
        if self.k < 1:
            raise ValueError("k must be positive")
        if ids.shape != labels.shape:
            raise ValueError("ids and labels must have the same length")
        if ids.size and np.any(np.diff(ids) <= 0):
            raise ValueError("ids must be unique and sorted")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError("labels must lie in [0, k)")
        if self.centers is not None and len(self.centers) != self.k:
            raise ValueError("centers must list one id per cluster")
        for arr in (ids, labels):
            arr.setflags(write=False)

    def members(self, cluster: int) -> np.ndarray:
        return self.ids[self.labels == cluster]

    def nonempty_clusters(self) -> list[int]:
        return sorted(set(self.labels.tolist()))


def distance(ds: ColoredDataset, i: int, j: int) -> float:
    """Metric distance between points i and j."""
    n = ds.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"point id out of range: ({i}, {j})")
    if ds.metric_kind is MetricKind.EXPLICIT:
        return float(ds.matrix[i, j])
    return float(np.linalg.norm(ds.coords[i] - ds.coords[j]))


def balance_of_subset(ds: ColoredDataset, subset) -> Rational:
    """min(#red/#blue, #blue/#red) of a subset, exactly; 0 if monochromatic."""
    subset = list(subset)
    if not subset:
        raise ValueError("balance of an empty subset is undefined")
    blue = int(np.sum(ds.colors[subset] == 1))
    red = len(subset) - blue
    return _balance_from_counts(red, blue)


def _balance_from_counts(red: int, blue: int) -> Rational:
    if red == 0 or blue == 0:
        return Rational(0)
    return min(Rational(red, blue), Rational(blue, red))


def balance_of_dataset(ds: ColoredDataset) -> Rational:
    return _balance_from_counts(len(ds.red_ids), len(ds.blue_ids))


def balance_of_clustering(ds: ColoredDataset, c: Clustering) -> Rational:
    """Minimum subset balance over nonempty clusters (empty clusters ignored)."""
    present = c.nonempty_clusters()
    if not present:
        raise ValueError("clustering has no nonempty cluster")
    best = Rational(1)
    for lbl in present:
        ids = c.members(lbl)
        blue = int(np.sum(ds.colors[ids] == 1))
        b = _balance_from_counts(len(ids) - blue, blue)
        if b < best:
            best = b
    return best


def _clustering_cost(ds: ColoredDataset, c: Clustering, reduce_cluster, reduce_total) -> float:
    total = []
    d = ds.pairwise()
    for lbl in c.nonempty_clusters():
        ids = c.members(lbl)
        if c.centers is not None:
            total.append(reduce_cluster(d[ids, c.centers[lbl]]))
        else:
            # Definitional form: best member center for this cluster.
            sub = d[np.ix_(ids, ids)]
            total.append(min(reduce_cluster(sub[:, j]) for j in range(len(ids))))
    return float(reduce_total(total))


def kcenter_cost(ds: ColoredDataset, c: Clustering) -> float:
    """Max distance from any assigned point to its cluster center."""
    return _clustering_cost(ds, c, lambda v: float(np.max(v)), max)


def kmedian_cost(ds: ColoredDataset, c: Clustering) -> float:
    """Sum of distances from assigned points to their cluster centers."""
    return _clustering_cost(ds, c, lambda v: float(np.sum(v)), sum)
