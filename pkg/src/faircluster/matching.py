"""Bipartite matching over the blue/red bichromatic graph.

Three primitives: maximum matching restricted to edges below a threshold,
bottleneck perfect matching (minimize the maximum edge, found by binary
search over the distinct edge weights), and minimum-cost perfect matching
(shortest-augmenting-path assignment with dual potentials).

Determinism: left nodes and right candidates are always scanned in ascending
id order. Among equal-cost perfect matchings the lexicographically smallest
pair list is returned, computed exactly on instances up to _LEX_REFINE_MAX
points per side; larger instances fall back to the solver's own (still
deterministic) tie-breaking, where exact ties are vanishingly rare.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import assignment_dual, kuhn_threshold_match
from .core import DIST_TOL, ColoredDataset

_LEX_REFINE_MAX = 64


@dataclass(frozen=True)
class BipartiteGraph:
    """Complete bipartite graph: left side blue, right side red.

    Ids on each side are strictly increasing; weights[i, j] is the distance
    between left_ids[i] and right_ids[j].
    """

    left_ids: np.ndarray
    right_ids: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        left = np.ascontiguousarray(self.left_ids, dtype=np.int64)
        right = np.ascontiguousarray(self.right_ids, dtype=np.int64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.shape != (left.shape[0], right.shape[0]):
            raise ValueError("weight matrix shape must be (|left|, |right|)")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        for ids in (left, right):
            if ids.size and np.any(np.diff(ids) <= 0):
                raise ValueError("side ids must be strictly increasing")
        if np.intersect1d(left, right).size:
            raise ValueError("sides must be disjoint")
        for name, arr in (("left_ids", left), ("right_ids", right), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dataset(cls, ds: ColoredDataset) -> "BipartiteGraph":
        blue = ds.blue_ids
        red = ds.red_ids
        w = ds.pairwise()[np.ix_(blue, red)]
        return cls(left_ids=blue, right_ids=red, weights=w)

    @property
    def nl(self) -> int:
        return self.left_ids.shape[0]

    @property
    def nr(self) -> int:
        return self.right_ids.shape[0]


@dataclass(frozen=True)
class Matching:
    """Pairs of (left id, right id); each id appears at most once."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        lefts = [p[0] for p in self.pairs]
        rights = [p[1] for p in self.pairs]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise ValueError("an id appears in more than one pair")

    def is_perfect_for(self, g: BipartiteGraph) -> bool:
        return len(self.pairs) == g.nl == g.nr

    def max_weight(self, g: BipartiteGraph) -> float:
        return max(g.weights[_pos(g.left_ids, l), _pos(g.right_ids, r)]
                   for l, r in self.pairs)

    def total_weight(self, g: BipartiteGraph) -> float:
        return float(sum(g.weights[_pos(g.left_ids, l), _pos(g.right_ids, r)]
                         for l, r in self.pairs))


def _pos(ids: np.ndarray, value: int) -> int:
    i = int(np.searchsorted(ids, value))
    if i >= ids.shape[0] or ids[i] != value:
        raise KeyError(f"id {value} not on this side")
    return i


def _pairs_from_match(g: BipartiteGraph, match_l: np.ndarray) -> Matching:
    pairs = tuple((int(g.left_ids[i]), int(g.right_ids[match_l[i]]))
                  for i in range(g.nl) if match_l[i] >= 0)
    return Matching(pairs=pairs)


def max_matching_under_threshold(g: BipartiteGraph, tau: float) -> Matching:
    """Maximum-cardinality matching using only edges of weight <= tau."""
    match_l, _ = kuhn_threshold_match(g.weights, float(tau))
    return _pairs_from_match(g, match_l)


def _require_balanced(g: BipartiteGraph) -> int:
    if g.nl != g.nr:
        raise ValueError(f"sides are unbalanced: {g.nl} left vs {g.nr} right")
    if g.nl == 0:
        raise ValueError("perfect matching needs at least one point per side")
    return g.nl


def bottleneck_perfect_matching(g: BipartiteGraph) -> tuple[Matching, float]:
    """Perfect matching minimizing the maximum edge weight.

    Binary search over the sorted distinct weights; the bottleneck value is
    always one of them.
    """
    n = _require_balanced(g)
    values = np.unique(g.weights)
    lo, hi = 0, values.shape[0] - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        match_l, _ = kuhn_threshold_match(g.weights, float(values[mid]))
        if int(np.sum(match_l >= 0)) == n:
            best = (mid, match_l)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:  # complete graph: the largest weight always works
        raise RuntimeError("no perfect matching under any threshold")
    idx, match_l = best
    tau = float(values[idx])
    if n <= _LEX_REFINE_MAX:
        refined = _lex_min_perfect_matching(g.weights <= tau)
        if refined is not None:
            match_l = refined
    matching = _pairs_from_match(g, match_l)
    return matching, float(matching.max_weight(g))


def min_cost_perfect_matching(g: BipartiteGraph) -> tuple[Matching, float]:
    """Perfect matching minimizing the total edge weight."""
    n = _require_balanced(g)
    row_to_col, u, v = assignment_dual(g.weights)
    opt_cost = float(np.sum(g.weights[np.arange(n), row_to_col]))
    if n <= _LEX_REFINE_MAX:
        # Every optimal matching lives in the zero-reduced-cost subgraph.
        admissible = (g.weights - u[:, None] - v[None, :]) <= DIST_TOL
        refined = _lex_min_perfect_matching(admissible)
        if refined is not None:
            cost = float(np.sum(g.weights[np.arange(n), refined]))
            if cost <= opt_cost + DIST_TOL * (n + 1):
                return _pairs_from_match(g, refined), cost
    return _pairs_from_match(g, row_to_col), opt_cost


def _lex_min_perfect_matching(adm: np.ndarray) -> np.ndarray | None:
    """Lexicographically smallest perfect matching of a boolean bipartite graph.

    Smallest by (left position, right position) pair list. Returns the
    left->right position array, or None when no perfect matching exists.
    Greedy fixing with warm-started augmenting paths: O(n * degree * E).
    """
    nl, nr = adm.shape
    if nl != nr:
        return None
    match_l, match_r = kuhn_threshold_match(np.where(adm, 0.0, 1.0), 0.5)
    if np.any(match_l < 0):
        return None

    def augment(row: int, fixed_upto: int, seen: np.ndarray) -> bool:
        for c in np.flatnonzero(adm[row]):
            c = int(c)
            if seen[c]:
                continue
            owner = match_r[c]
            if 0 <= owner <= fixed_upto:
                continue  # column already claimed by a fixed row
            seen[c] = True
            if owner == -1 or augment(owner, fixed_upto, seen):
                match_l[row] = c
                match_r[c] = row
                return True
        return False

    for l in range(nl):
        cur = int(match_l[l])
        for r in np.flatnonzero(adm[l]):
            r = int(r)
            if r >= cur:
                break
            owner = int(match_r[r])
            if owner <= l:
                continue  # taken by a fixed row (owner < l cannot be == l here)
            # Tentatively hand r to l, displacing `owner`; column `cur` frees up.
            match_l[l] = r
            match_r[r] = l
            match_l[owner] = -1
            match_r[cur] = -1
            seen = np.zeros(nr, dtype=bool)
            seen[r] = True
            if augment(owner, l, seen):
                break
            match_l[l] = cur
            match_r[cur] = l
            match_l[owner] = r
            match_r[r] = owner
    return match_l
