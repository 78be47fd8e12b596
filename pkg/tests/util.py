"""Shared test helpers: dataset generators and independent brute-force oracles."""

import itertools
import math

import numpy as np

from faircluster.core import ColoredDataset, Objective


def rand_ds(rng, n_blue, n_red, dim=2, scale=1.0):
    n = n_blue + n_red
    coords = rng.uniform(0.0, scale, size=(n, dim))
    colors = np.array([1] * n_blue + [0] * n_red, dtype=np.uint8)
    perm = rng.permutation(n)
    return ColoredDataset.from_points(coords[perm], colors[perm])


def rand_feasible_counts(rng, t_prime, n_max=8, n_min=2):
    """Color counts with both colors present and balance >= 1/t'."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        nb = int(rng.integers(1, n))
        nr = n - nb
        if nr == 0:
            continue
        if t_prime == 1 and nb != nr:
            continue
        if min(nb, nr) * t_prime >= max(nb, nr):
            return nb, nr


# --- matching oracles (exhaustive over permutations, n <= 7) ---------------


def brute_bottleneck(w):
    n = w.shape[0]
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, max(w[i, perm[i]] for i in range(n)))
    return best


def brute_min_cost_matching(w):
    n = w.shape[0]
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(w[i, perm[i]] for i in range(n)))
    return best


def all_optimal_matchings(w, tol=1e-9):
    """All permutations achieving the minimum total cost."""
    n = w.shape[0]
    best = brute_min_cost_matching(w)
    out = []
    for perm in itertools.permutations(range(n)):
        if sum(w[i, perm[i]] for i in range(n)) <= best + tol:
            out.append(perm)
    return out


# --- flow oracle (exhaustive over integral flows, unit capacities) ---------


def brute_min_cost_flow(net):
    """Minimum cost over all integral flows, or None if infeasible.

    Only practical for a handful of edges with small capacities.
    """
    m = net.edge_count
    ranges = [range(int(c) + 1) for c in net.capacity]
    finite = np.isfinite(net.cost)
    best = None
    for combo in itertools.product(*ranges):
        flow = np.array(combo, dtype=np.int64)
        if np.any((flow > 0) & ~finite):
            continue
        net_out = np.zeros(net.node_count, dtype=np.int64)
        np.add.at(net_out, net.efrom, flow)
        np.subtract.at(net_out, net.eto, flow)
        if np.any(net_out != net.supply):
            continue
        cost = float(np.dot(flow[finite].astype(float), net.cost[finite]))
        if best is None or cost < best:
            best = cost
    return best


# --- classical clustering oracles (center-subset enumeration) --------------


def brute_classical_optimum(ds, k, objective):
    """Optimal unconstrained k-clustering cost with nearest-center assignment."""
    d = ds.pairwise()
    n = ds.n
    best = math.inf
    for centers in itertools.combinations(range(n), k):
        sub = d[:, list(centers)]
        per_point = sub.min(axis=1)
        cost = per_point.max() if objective is Objective.CENTER else per_point.sum()
        best = min(best, float(cost))
    return best
