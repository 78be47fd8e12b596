"""Classical clustering baselines and the fairlet reduction pipeline.

The pipeline clusters fairlet centers with a classical algorithm (greedy
furthest-point for the max-radius objective, weighted single-swap local
search for the sum objective) and lifts the result back to the points, so
every output cluster is a union of fairlets and inherits their balance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import fairlets as fl
from ._kernels import local_search_core
from .core import (Clustering, ColoredDataset, Objective, Rational,
                   balance_of_dataset, kcenter_cost, kmedian_cost)

_BRUTE_MAX_POINTS = 10
_BRUTE_MAX_K = 3
_LOCAL_SEARCH_RESTARTS = 3
_LOCAL_SEARCH_REL_TOL = 1e-9


@dataclass(frozen=True)
class WeightedPointSet:
    """Point ids with positive integer multiplicities."""

    ids: np.ndarray       # (m,) int64, strictly increasing
    weights: np.ndarray   # (m,) int64, >= 1

    def __post_init__(self):
        ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        weights = np.ascontiguousarray(self.weights, dtype=np.int64)
        if ids.shape != weights.shape:
            raise ValueError("ids and weights must have equal length")
        if ids.size and np.any(np.diff(ids) <= 0):
            raise ValueError("ids must be unique and sorted")
        if np.any(weights < 1):
            raise ValueError("weights must be at least 1")
        for name, arr in (("ids", ids), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_entries(cls, entries) -> "WeightedPointSet":
        entries = sorted(entries)
        return cls(ids=np.array([e[0] for e in entries], dtype=np.int64),
                   weights=np.array([e[1] for e in entries], dtype=np.int64))

    @classmethod
    def uniform(cls, ids) -> "WeightedPointSet":
        ids = np.sort(np.asarray(ids, dtype=np.int64))
        return cls(ids=ids, weights=np.ones(ids.shape[0], dtype=np.int64))


def objective_cost(ds: ColoredDataset, c: Clustering, objective: Objective) -> float:
    if objective is Objective.CENTER:
        return kcenter_cost(ds, c)
    return kmedian_cost(ds, c)


def gonzalez_kcenter(ds: ColoredDataset, ids, k: int) -> Clustering:
    """Greedy furthest-point k-center over a subset of points.

    First center is the lowest id; each step adds the point farthest from
    the chosen centers (ties toward the lower id). Assignment is nearest
    center, ties toward the lower center index.
    """
    ids = np.unique(np.asarray(ids, dtype=np.int64))
    if not 1 <= k <= ids.shape[0]:
        raise ValueError(f"k={k} out of range for {ids.shape[0]} points")
    d = ds.pairwise()
    centers = [int(ids[0])]
    mind = d[ids, centers[0]].copy()
    while len(centers) < k:
        nxt = int(ids[int(np.argmax(mind))])
        centers.append(nxt)
        np.minimum(mind, d[ids, nxt], out=mind)
    labels = np.argmin(d[np.ix_(ids, centers)], axis=1).astype(np.int64)
    return Clustering(k=k, ids=ids, labels=labels, centers=tuple(centers))


def local_search_kmedian(ds: ColoredDataset, wps: WeightedPointSet, k: int,
                         seed: int) -> Clustering:
    """Weighted k-median by best-improvement single swaps from random medoids.

    Runs a few seeded restarts and keeps the cheapest local optimum; a swap
    is applied only while it improves the objective by more than a 1e-9
    relative margin.
    """
    m = wps.ids.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k={k} out of range for {m} points")
    d = ds.pairwise()[np.ix_(wps.ids, wps.ids)]
    w = wps.weights.astype(np.float64)
    rng = np.random.default_rng(seed)

    best_cost = math.inf
    best_centers = None
    for _ in range(_LOCAL_SEARCH_RESTARTS):
        init = np.sort(rng.choice(m, size=k, replace=False)).astype(np.int64)
        centers = local_search_core(np.ascontiguousarray(d), w, init,
                                    _LOCAL_SEARCH_REL_TOL)
        cost = float(w @ d[:, centers].min(axis=1))
        if cost < best_cost:
            best_cost = cost
            best_centers = centers
    labels = np.argmin(d[:, best_centers], axis=1).astype(np.int64)
    return Clustering(k=k, ids=wps.ids, labels=labels,
                      centers=tuple(int(wps.ids[c]) for c in best_centers))


# ---------------------------------------------------------------------------
# Fairlet pipeline.


def decompose_for_objective(ds: ColoredDataset, t_prime: int,
                            objective: Objective) -> fl.FairletDecomposition:
    if t_prime == 1:
        if objective is Objective.CENTER:
            return fl.decompose_11_center(ds)
        return fl.decompose_11_median(ds)
    if objective is Objective.CENTER:
        return fl.decompose_1t_center(ds, t_prime)
    return fl.decompose_1t_median(ds, t_prime)


def cluster_fairlets(ds: ColoredDataset, dec: fl.FairletDecomposition, k: int,
                     objective: Objective, seed: int) -> Clustering:
    """Cluster the fairlet centers and lift the labels back to all points."""
    if k > dec.size:
        raise ValueError(f"k={k} exceeds the {dec.size} available fairlets")
    center_ids = dec.center_ids()
    if objective is Objective.CENTER:
        sub = gonzalez_kcenter(ds, center_ids, k)
    else:
        order = np.argsort(center_ids)
        wps = WeightedPointSet(ids=center_ids[order],
                               weights=dec.fairlet_sizes()[order])
        sub = local_search_kmedian(ds, wps, k, seed)
    label_of_center = dict(zip(sub.ids.tolist(), sub.labels.tolist()))
    labels = np.empty(ds.n, dtype=np.int64)
    for point in range(ds.n):
        hub = dec.fairlets[dec.beta[point]].center
        labels[point] = label_of_center[hub]
    return Clustering(k=k, ids=np.arange(ds.n, dtype=np.int64), labels=labels,
                      centers=sub.centers)


def fair_cluster(ds: ColoredDataset, k: int, t_prime: int, objective: Objective,
                 seed: int) -> tuple[Clustering, fl.FairletDecomposition]:
    """Balance-guaranteed clustering: decompose into fairlets, then cluster.

    Every cluster of the result is a union of fairlets, so its balance is at
    least 1/t'.
    """
    if t_prime < 1:
        raise ValueError("t_prime must be positive")
    if balance_of_dataset(ds) < Fraction(1, t_prime):
        raise fl.InfeasibleBalanceError(
            f"dataset balance {balance_of_dataset(ds)} is below 1/{t_prime}")
    dec = decompose_for_objective(ds, t_prime, objective)
    return cluster_fairlets(ds, dec, k, objective, seed), dec


def cost_composition(ds: ColoredDataset, c: Clustering,
                     dec: fl.FairletDecomposition,
                     objective: Objective) -> tuple[float, float, float]:
    """(pipeline cost, decomposition cost, weighted center-clustering cost).

    The first is bounded by the sum of the other two via the triangle
    inequality; tests assert this on every pipeline run.
    """
    lhs = objective_cost(ds, c, objective)
    dec_term = fl.decomposition_cost(ds, dec, objective)
    d = ds.pairwise()
    label_of = dict(zip(c.ids.tolist(), c.labels.tolist()))
    hub_dists = []
    sizes = []
    for f in dec.fairlets:
        hub_dists.append(d[f.center, c.centers[label_of[f.center]]])
        sizes.append(f.size)
    if objective is Objective.CENTER:
        centers_term = float(max(hub_dists))
    else:
        centers_term = float(np.dot(hub_dists, sizes))
    return lhs, dec_term, centers_term


# ---------------------------------------------------------------------------
# Exhaustive (t, k)-fair clustering oracle for tiny instances.


def brute_force_fair_clustering(ds: ColoredDataset, k: int, t,
                                objective: Objective) -> tuple[Clustering, float]:
    """Best clustering into exactly k nonempty clusters of balance >= t.

    Enumerates every assignment of the n points to k labels and evaluates
    each feasible one with the best member center per cluster.
    """
    n = ds.n
    if n > _BRUTE_MAX_POINTS or k > _BRUTE_MAX_K:
        raise ValueError("instance too large for the exhaustive oracle")
    if not 1 <= k <= n:
        raise ValueError("k out of range")
    t = Fraction(t)
    d = ds.pairwise()
    is_blue = (ds.colors == 1).astype(np.int64)
    is_red = 1 - is_blue

    labels_all = np.array(list(itertools.product(range(k), repeat=n)),
                          dtype=np.int64)
    m_rows = labels_all.shape[0]
    feasible = np.ones(m_rows, dtype=bool)
    cost = np.zeros(m_rows)

    for c in range(k):
        mask = labels_all == c
        feasible &= mask.any(axis=1)
        nb = mask @ is_blue
        nr = mask @ is_red
        if t > 0:
            feasible &= (np.minimum(nb, nr) * t.denominator
                         >= t.numerator * np.maximum(nb, nr))
        if objective is Objective.CENTER:
            cand = np.where(mask[:, :, None], d[None, :, :], -np.inf).max(axis=1)
            cluster_cost = np.where(mask, cand, np.inf).min(axis=1)
            cost = np.maximum(cost, cluster_cost)
        else:
            cand = (mask[:, :, None] * d[None, :, :]).sum(axis=1)
            cluster_cost = np.where(mask, cand, np.inf).min(axis=1)
            cost = cost + cluster_cost

    cost = np.where(feasible, cost, np.inf)
    best = int(np.argmin(cost))
    if not np.isfinite(cost[best]):
        raise ValueError("no feasible assignment meets the balance threshold")
    labels = labels_all[best]
    centers = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        sub = d[np.ix_(members, members)]
        per_center = sub.max(axis=0) if objective is Objective.CENTER else sub.sum(axis=0)
        centers.append(int(members[int(np.argmin(per_center))]))
    clustering = Clustering(k=k, ids=np.arange(n, dtype=np.int64),
                            labels=labels, centers=tuple(centers))
    return clustering, float(cost[best])
