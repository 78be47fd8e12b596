"""Fairlet decompositions: minimal balanced clusters and their costs.

A (b, r)-fairlet decomposition partitions the dataset into clusters of at
most b + r points, each with balance at least b/r. Perfectly balanced inputs
decompose via perfect matchings; balance 1/t' inputs go through a min-cost
flow network whose integral solutions encode star-shaped fairlets (one hub,
up to t' leaves of the opposite color). A brute-force oracle covers tiny
instances for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matching as mt
from . import mcf
from .core import ColoredDataset, Objective, Rational, balance_of_dataset

_ORACLE_MAX_POINTS = 10


class InfeasibleBalanceError(ValueError):
    """Requested fairness threshold exceeds what the dataset can support."""


@dataclass(frozen=True)
class Fairlet:
    members: tuple[int, ...]
    center: int

    def __post_init__(self):
        members = tuple(sorted(int(m) for m in self.members))
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("fairlet must be nonempty")
        if members[0] < 0:
            raise ValueError("member ids must be nonnegative")
        if len(set(members)) != len(members):
            raise ValueError("duplicate member ids")
        if self.center not in members:
            raise ValueError("center must be a member")

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class FairletDecomposition:
    """A partition of all point ids into fairlets, with target ratio b/r."""

    fairlets: tuple[Fairlet, ...]
    beta: np.ndarray            # (n,) fairlet index per point id
    b: int
    r: int

    def __post_init__(self):
        beta = np.ascontiguousarray(self.beta, dtype=np.int64)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if self.b < 1 or self.r < 1:
            raise ValueError("b and r must be positive")
        seen = np.zeros(beta.shape[0], dtype=bool)
        for idx, f in enumerate(self.fairlets):
            for m in f.members:
                if m >= beta.shape[0] or seen[m] or beta[m] != idx:
                    raise ValueError("beta inconsistent with fairlet membership")
                seen[m] = True
        if not seen.all():
            raise ValueError("fairlets must cover every point id")

    @property
    def size(self) -> int:
        return len(self.fairlets)

    def center_ids(self) -> np.ndarray:
        return np.array([f.center for f in self.fairlets], dtype=np.int64)

    def fairlet_sizes(self) -> np.ndarray:
        return np.array([f.size for f in self.fairlets], dtype=np.int64)


def _make_decomposition(ds: ColoredDataset, member_lists, centers, b: int,
                        r: int) -> FairletDecomposition:
    """Assemble and validate a decomposition (size and balance conditions)."""
    beta = np.full(ds.n, -1, dtype=np.int64)
    fairlets = []
    ratio = Fraction(b, r)
    for idx, (members, center) in enumerate(zip(member_lists, centers)):
        f = Fairlet(members=tuple(members), center=int(center))
        if f.size > b + r:
            raise ValueError(f"fairlet of size {f.size} exceeds b + r = {b + r}")
        if fairlet_balance(ds, f) < ratio:
            raise ValueError("fairlet balance below b/r")
        for m in f.members:
            beta[m] = idx
        fairlets.append(f)
    return FairletDecomposition(fairlets=tuple(fairlets), beta=beta, b=b, r=r)


def fairlet_balance(ds: ColoredDataset, f: Fairlet) -> Rational:
    blue = int(np.sum(ds.colors[list(f.members)] == 1))
    red = f.size - blue
    if blue == 0 or red == 0:
        return Rational(0)
    return min(Rational(red, blue), Rational(blue, red))


def decomposition_balance(ds: ColoredDataset, dec: FairletDecomposition) -> Rational:
    return min(fairlet_balance(ds, f) for f in dec.fairlets)


def decomposition_cost(ds: ColoredDataset, dec: FairletDecomposition,
                       objective: Objective) -> float:
    """MEDIAN: sum of member-to-center distances; CENTER: their maximum."""
    d = ds.pairwise()
    per_fairlet = [d[list(f.members), f.center] for f in dec.fairlets]
    if objective is Objective.CENTER:
        return float(max(np.max(p) for p in per_fairlet))
    return float(sum(np.sum(p) for p in per_fairlet))


# ---------------------------------------------------------------------------
# Perfectly balanced inputs: fairlets are matched pairs.


def _pairs_to_decomposition(ds: ColoredDataset, pairs) -> FairletDecomposition:
    members = [sorted(p) for p in pairs]
    centers = [m[0] for m in members]  # lower id, for determinism
    return _make_decomposition(ds, members, centers, b=1, r=1)


def _equal_color_graph(ds: ColoredDataset) -> mt.BipartiteGraph:
    if len(ds.blue_ids) != len(ds.red_ids) or len(ds.blue_ids) == 0:
        raise ValueError("pairing requires equally many red and blue points")
    return mt.BipartiteGraph.from_dataset(ds)


def decompose_11_center(ds: ColoredDataset) -> FairletDecomposition:
    """Pair decomposition minimizing the maximum pair distance."""
    g = _equal_color_graph(ds)
    matching, _ = mt.bottleneck_perfect_matching(g)
    return _pairs_to_decomposition(ds, matching.pairs)


def decompose_11_median(ds: ColoredDataset) -> FairletDecomposition:
    """Pair decomposition minimizing the total pair distance."""
    g = _equal_color_graph(ds)
    matching, _ = mt.min_cost_perfect_matching(g)
    return _pairs_to_decomposition(ds, matching.pairs)


# ---------------------------------------------------------------------------
# Balance 1/t' via min-cost flow. Node layout (nb = #blue, nr = #red):
#   0: source hub, 1: sink hub
#   2 .. 2+nb-1: blue points (ascending id)
#   2+nb .. 2+nb+nr-1: red points (ascending id)
#   then nb*t' blue copies (point-major), then nr*t' red copies.
# Edge layout:
#   [0]                 source hub -> sink hub, capacity min(nb, nr)
#   [1 .. nb]           source hub -> blue_i, capacity t'-1
#   [.. +nr]            red_j -> sink hub, capacity t'-1
#   [.. +nb*t']         blue_i -> blue copy, capacity 1
#   [.. +nr*t']         red copy -> red_j, capacity 1
#   [.. +nb*nr*t'*t']   blue copy -> red copy, capacity 1, the only
#                       cost-bearing edges (i-major, then j, then both copies)


def _layout_counts(nb: int, nr: int, t_prime: int):
    n_nodes = 2 + nb + nr + (nb + nr) * t_prime
    n_plumbing = 1 + nb + nr + (nb + nr) * t_prime
    n_cross = nb * nr * t_prime * t_prime
    return n_nodes, n_plumbing, n_cross


def build_fairlet_network(ds: ColoredDataset, t_prime: int,
                          objective: Objective,
                          tau: float | None = None) -> mcf.FlowNetwork:
    """The flow network whose integral solutions encode (1, t')-fairlets.

    CENTER requires the threshold `tau`: cross edges cost 1 when the pair
    distance is <= tau and INFINITE otherwise. MEDIAN cross edges cost the
    pair distance itself.
    """
    if t_prime < 2:
        raise ValueError("t_prime must be at least 2")
    blue = ds.blue_ids
    red = ds.red_ids
    nb, nr = len(blue), len(red)
    if nb == 0 or nr == 0:
        raise ValueError("both colors must be present")
    if objective is Objective.CENTER:
        if tau is None:
            raise ValueError("CENTER network needs a threshold tau")
    elif tau is not None:
        raise ValueError("MEDIAN network has no threshold")

    t = t_prime
    n_nodes, n_plumbing, n_cross = _layout_counts(nb, nr, t)
    blue_node = 2 + np.arange(nb)
    red_node = 2 + nb + np.arange(nr)
    bcopy0 = 2 + nb + nr
    rcopy0 = bcopy0 + nb * t

    efrom = np.empty(n_plumbing + n_cross, dtype=np.int64)
    eto = np.empty_like(efrom)
    cap = np.empty_like(efrom)
    cost = np.zeros(n_plumbing + n_cross, dtype=np.float64)

    efrom[0], eto[0], cap[0] = 0, 1, min(nb, nr)
    pos = 1
    efrom[pos:pos + nb] = 0
    eto[pos:pos + nb] = blue_node
    cap[pos:pos + nb] = t - 1
    pos += nb
    efrom[pos:pos + nr] = red_node
    eto[pos:pos + nr] = 1
    cap[pos:pos + nr] = t - 1
    pos += nr
    for i in range(nb):
        for c in range(t):
            efrom[pos] = blue_node[i]
            eto[pos] = bcopy0 + i * t + c
            cap[pos] = 1
            pos += 1
    for j in range(nr):
        for c in range(t):
            efrom[pos] = rcopy0 + j * t + c
            eto[pos] = red_node[j]
            cap[pos] = 1
            pos += 1

    cross_d = ds.pairwise()[np.ix_(blue, red)]
    cross = np.repeat(np.repeat(cross_d, t, axis=0), t, axis=1).ravel()
    bc = (bcopy0 + np.arange(nb * t))
    rc = (rcopy0 + np.arange(nr * t))
    efrom[pos:] = np.repeat(bc, nr * t)
    eto[pos:] = np.tile(rc, nb * t)
    cap[pos:] = 1
    if objective is Objective.CENTER:
        cost[pos:] = np.where(cross <= tau, 1.0, mcf.INFINITE)
    else:
        cost[pos:] = cross

    supply = np.zeros(n_nodes, dtype=np.int64)
    supply[0] = nr
    supply[1] = -nb
    supply[blue_node] = 1
    supply[red_node] = -1
    return mcf.FlowNetwork(node_count=n_nodes, efrom=efrom, eto=eto,
                           capacity=cap, cost=cost, supply=supply)


def _cross_tiebreak(net: mcf.FlowNetwork, nb: int, nr: int, t: int) -> np.ndarray:
    tie = np.zeros(net.edge_count)
    _, n_plumbing, _ = _layout_counts(nb, nr, t)
    tie[n_plumbing:] = 1.0
    return tie


def extract_stars(ds: ColoredDataset, net: mcf.FlowNetwork,
                  sol: mcf.FlowSolution) -> FairletDecomposition:
    """Read fairlets off the positive-flow blue/red copy edges.

    The connected components of those pairs must be stars with 1..t' leaves;
    anything else (or an unused point) indicates a solver bug. The star hub
    becomes the fairlet center; a 2-point component takes the lower id.
    """
    if not sol.feasible:
        raise ValueError("cannot extract fairlets from an infeasible solution")
    blue = ds.blue_ids
    red = ds.red_ids
    nb, nr = len(blue), len(red)
    t, rem = divmod(net.node_count - 2 - nb - nr, nb + nr)
    n_nodes, n_plumbing, n_cross = _layout_counts(nb, nr, t)
    if rem or t < 1 or net.edge_count != n_plumbing + n_cross:
        raise ValueError("network shape does not match this dataset")

    pair_flow = sol.flow[n_plumbing:].reshape(nb, t, nr, t).sum(axis=(1, 3))
    adj = pair_flow > 0
    blue_deg = adj.sum(axis=1)
    red_deg = adj.sum(axis=0)
    if np.any(blue_deg == 0) or np.any(red_deg == 0):
        raise RuntimeError("solver bug: isolated point in the pair graph")

    member_lists, centers = [], []
    seen_b = np.zeros(nb, dtype=bool)
    seen_r = np.zeros(nr, dtype=bool)
    for i0 in range(nb):
        if seen_b[i0]:
            continue
        comp_b, comp_r = [], []
        stack = [(0, i0)]
        seen_b[i0] = True
        while stack:
            side, v = stack.pop()
            if side == 0:
                comp_b.append(v)
                for j in np.flatnonzero(adj[v]):
                    if not seen_r[j]:
                        seen_r[j] = True
                        stack.append((1, int(j)))
            else:
                comp_r.append(v)
                for i in np.flatnonzero(adj[:, v]):
                    if not seen_b[i]:
                        seen_b[i] = True
                        stack.append((0, int(i)))
        cb, cr = len(comp_b), len(comp_r)
        if min(cb, cr) != 1 or max(cb, cr) > t:
            raise RuntimeError(
                f"solver bug: component with {cb} blue / {cr} red points "
                "is not a star with 1..t' leaves")
        blue_ids = [int(blue[i]) for i in comp_b]
        red_ids = [int(red[j]) for j in comp_r]
        if cb == 1 and cr == 1:
            hub = min(blue_ids[0], red_ids[0])
        elif cb == 1:
            hub = blue_ids[0]
        else:
            hub = red_ids[0]
        member_lists.append(blue_ids + red_ids)
        centers.append(hub)
    return _make_decomposition(ds, member_lists, centers, b=1, r=t)


def _check_1t_preconditions(ds: ColoredDataset, t_prime: int) -> None:
    if t_prime < 2:
        raise ValueError("t_prime must be at least 2")
    if balance_of_dataset(ds) < Fraction(1, t_prime):
        raise InfeasibleBalanceError(
            f"dataset balance {balance_of_dataset(ds)} is below 1/{t_prime}")


def decompose_1t_center(ds: ColoredDataset, t_prime: int) -> FairletDecomposition:
    """(1, t')-fairlets minimizing the max member-to-hub distance, within 2x.

    Binary search for the smallest threshold at which the flow network is
    feasible; thresholds are the distinct bichromatic distances plus zero.
    """
    _check_1t_preconditions(ds, t_prime)
    cross = ds.pairwise()[np.ix_(ds.blue_ids, ds.red_ids)]
    values = np.unique(np.concatenate([[0.0], cross.ravel()]))
    lo, hi = 0, values.shape[0] - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        net = build_fairlet_network(ds, t_prime, Objective.CENTER,
                                    tau=float(values[mid]))
        sol = mcf.solve(net)
        if sol.feasible:
            best = (net, sol)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        raise InfeasibleBalanceError("no threshold admits a feasible flow")
    return extract_stars(ds, *best)


def decompose_1t_median(ds: ColoredDataset, t_prime: int) -> FairletDecomposition:
    """(1, t')-fairlets from one min-cost flow solve with distance costs.

    Exact cost ties are broken toward fewer cross edges so that the pair
    graph is always a union of stars, even with coincident points.
    """
    _check_1t_preconditions(ds, t_prime)
    net = build_fairlet_network(ds, t_prime, Objective.MEDIAN)
    tie = _cross_tiebreak(net, len(ds.blue_ids), len(ds.red_ids), t_prime)
    sol = mcf.solve(net, tiebreak=tie)
    if not sol.feasible:
        raise InfeasibleBalanceError("fairlet network is infeasible")
    return extract_stars(ds, net, sol)


# ---------------------------------------------------------------------------
# Cost-oblivious construction from the existence proof: repeatedly strip a
# maximal balanced group, then pair off the one-to-one remainder.


def balanced_partition(ds: ColoredDataset, b: int, r: int) -> FairletDecomposition:
    """Partition a dataset of balance exactly b/r into (b, r)-fairlets.

    Greedy removal (lowest ids first): while the majority excess is at least
    r - b, strip r majority + b minority points; otherwise strip a final
    smaller group; pair up any one-to-one remainder. Distances are ignored.
    """
    if not (1 <= b <= r):
        raise ValueError("need 1 <= b <= r")
    if math.gcd(b, r) != 1:
        raise ValueError("b and r must be coprime")
    if balance_of_dataset(ds) != Fraction(b, r):
        raise ValueError(
            f"dataset balance {balance_of_dataset(ds)} is not exactly {Fraction(b, r)}")
    blue, red = ds.blue_ids, ds.red_ids
    if len(blue) <= len(red):
        minority, majority = list(blue), list(red)
    else:
        minority, majority = list(red), list(blue)

    member_lists = []
    mi = ma = 0
    while True:
        n_min = len(minority) - mi
        n_maj = len(majority) - ma
        if n_min == 0 and n_maj == 0:
            break
        if n_min == n_maj:
            for i in range(n_min):
                member_lists.append([minority[mi + i], majority[ma + i]])
            break
        if (n_maj - n_min) >= (r - b):
            take_maj, take_min = r, b
        else:
            take_maj, take_min = (n_maj - n_min) + b, b
        member_lists.append(minority[mi:mi + take_min] + majority[ma:ma + take_maj])
        mi += take_min
        ma += take_maj
    centers = [min(m) for m in member_lists]
    return _make_decomposition(ds, member_lists, centers, b=b, r=r)


# ---------------------------------------------------------------------------
# Exhaustive oracle for tiny instances: enumerate every partition into
# bichromatic stars (one point of one color, 1..t' of the other), choosing
# the best center inside each fairlet.


def brute_force_optimal_decomposition(
        ds: ColoredDataset, t_prime: int,
        objective: Objective) -> tuple[FairletDecomposition, float]:
    n = ds.n
    if n > _ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {_ORACLE_MAX_POINTS} points")
    if t_prime < 1:
        raise ValueError("t_prime must be positive")
    if len(ds.blue_ids) == 0 or len(ds.red_ids) == 0:
        raise ValueError("infeasible color counts: a color is missing")

    d = ds.pairwise()
    is_blue = ds.colors == 1

    def block_cost(members: list[int]) -> tuple[float, int]:
        sub = d[np.ix_(members, members)]
        if objective is Objective.CENTER:
            per_center = sub.max(axis=0)
        else:
            per_center = sub.sum(axis=0)
        ci = int(np.argmin(per_center))
        return float(per_center[ci]), members[ci]

    best: list = [math.inf, None, None]  # cost, member lists, centers
    blocks: list[list[int]] = []
    counts: list[list[int]] = []  # [n_blue, n_red] per block

    def evaluate():
        total = 0.0
        centers = []
        for blk in blocks:
            c, ctr = block_cost(blk)
            centers.append(ctr)
            total = max(total, c) if objective is Objective.CENTER else total + c
            if total >= best[0]:
                return
        if total < best[0]:
            best[0] = total
            best[1] = [list(blk) for blk in blocks]
            best[2] = centers

    def rec(i: int):
        if i == n:
            if all(min(c) == 1 for c in counts):
                evaluate()
            return
        color = 0 if is_blue[i] else 1
        for blk, cnt in zip(blocks, counts):
            cnt[color] += 1
            if max(cnt) <= t_prime and min(cnt) <= 1:
                blk.append(i)
                rec(i + 1)
                blk.pop()
            cnt[color] -= 1
        blocks.append([i])
        counts.append([1, 0] if color == 0 else [0, 1])
        rec(i + 1)
        blocks.pop()
        counts.pop()

    rec(0)
    if best[1] is None:
        raise ValueError("no feasible fairlet partition for these color counts")
    dec = _make_decomposition(ds, best[1], best[2], b=1, r=t_prime)
    return dec, best[0]
