"""Generic integral min-cost flow on small directed networks.

Supplies are balanced per node (positive = source, negative = demand) and
reduced internally to a single source/sink pair. The solver runs successive
shortest augmenting paths with node potentials, so edge costs must be
nonnegative; capacities and supplies are integers and the returned flow is
integral. Edges may carry INFINITE cost: they are kept in the model (callers
use them to forbid pairings) but treated as absent during the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import mcf_solve_arrays

INFINITE = math.inf


@dataclass(frozen=True)
class FlowNetwork:
    """Directed network with integer capacities, costs, and node supplies."""

    node_count: int
    efrom: np.ndarray    # (m,) int64
    eto: np.ndarray      # (m,) int64
    capacity: np.ndarray  # (m,) int64, >= 0
    cost: np.ndarray     # (m,) float64, >= 0 or INFINITE
    supply: np.ndarray   # (node_count,) int64, sums to zero

    def __post_init__(self):
        efrom = np.ascontiguousarray(self.efrom, dtype=np.int64)
        eto = np.ascontiguousarray(self.eto, dtype=np.int64)
        cap = np.ascontiguousarray(self.capacity, dtype=np.int64)
        cost = np.ascontiguousarray(self.cost, dtype=np.float64)
        supply = np.ascontiguousarray(self.supply, dtype=np.int64)
        if self.node_count < 1:
            raise ValueError("network needs at least one node")
        m = efrom.shape[0]
        if not (eto.shape[0] == cap.shape[0] == cost.shape[0] == m):
            raise ValueError("edge arrays must have equal length")
        if supply.shape[0] != self.node_count:
            raise ValueError("supply must list every node")
        if m and (efrom.min() < 0 or efrom.max() >= self.node_count
                  or eto.min() < 0 or eto.max() >= self.node_count):
            raise ValueError("edge endpoint out of range")
        if np.any(efrom == eto):
            raise ValueError("self-loops are not allowed")
        if np.any(cap < 0):
            raise ValueError("negative capacity")
        if np.any(cost < 0):
            raise ValueError("negative costs are not supported")
        if int(supply.sum()) != 0:
            raise ValueError("supplies must sum to zero")
        for name, arr in (("efrom", efrom), ("eto", eto), ("capacity", cap),
                          ("cost", cost), ("supply", supply)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_edges(cls, node_count, edges, supply) -> "FlowNetwork":
        """Build from (from, to, capacity, cost) tuples and a node->supply map."""
        sup = np.zeros(node_count, dtype=np.int64)
        if isinstance(supply, dict):
            for node, s in supply.items():
                sup[node] = s
        else:
            sup = np.asarray(supply, dtype=np.int64)
        if edges:
            ef, et, cap, cost = zip(*edges)
        else:
            ef = et = cap = cost = ()
        return cls(node_count=node_count,
                   efrom=np.array(ef, dtype=np.int64),
                   eto=np.array(et, dtype=np.int64),
                   capacity=np.array(cap, dtype=np.int64),
                   cost=np.array(cost, dtype=np.float64),
                   supply=sup)

    @property
    def edge_count(self) -> int:
        return self.efrom.shape[0]


@dataclass(frozen=True)
class FlowSolution:
    """Integral per-edge flow; total_cost is None when the network is infeasible."""

    flow: np.ndarray              # (m,) int64
    total_cost: float | None

    @property
    def feasible(self) -> bool:
        return self.total_cost is not None


def _finite_cost_total(cost: np.ndarray, flow: np.ndarray) -> float:
    # Sum only where flow > 0 so that 0 * INFINITE never produces a NaN.
    used = flow > 0
    return float(np.dot(flow[used].astype(np.float64), cost[used]))


def solve(net: FlowNetwork, tiebreak: np.ndarray | None = None) -> FlowSolution:
    """Minimum-cost feasible integral flow, or an infeasible solution.

    `tiebreak` optionally assigns each edge a secondary cost; among flows of
    minimum (primary) cost the solver returns one minimizing the secondary
    total. INFINITE-cost edges never carry flow.
    """
    finite = np.isfinite(net.cost)
    tie = np.zeros(net.edge_count) if tiebreak is None else \
        np.asarray(tiebreak, dtype=np.float64)
    if tie.shape[0] != net.edge_count:
        raise ValueError("tiebreak must give one value per edge")
    if np.any(tie[finite] < 0):
        raise ValueError("negative tiebreak costs are not supported")

    routed, total, sub_flow = mcf_solve_arrays(
        net.node_count,
        net.efrom[finite],
        net.eto[finite],
        net.capacity[finite],
        net.cost[finite],
        tie[finite],
        net.supply,
    )
    flow = np.zeros(net.edge_count, dtype=np.int64)
    flow[finite] = sub_flow
    flow.setflags(write=False)
    if routed < total:
        return FlowSolution(flow=np.zeros(net.edge_count, dtype=np.int64),
                            total_cost=None)
    return FlowSolution(flow=flow, total_cost=_finite_cost_total(net.cost, flow))


def validate(net: FlowNetwork, sol: FlowSolution) -> bool:
    """True iff capacity bounds, flow conservation, and the cost total hold."""
    flow = np.asarray(sol.flow)
    if flow.shape[0] != net.edge_count:
        raise ValueError("flow length does not match the network")
    if not sol.feasible:
        return False
    if np.any(flow < 0) or np.any(flow > net.capacity):
        return False
    if np.any((flow > 0) & ~np.isfinite(net.cost)):
        return False
    net_out = np.zeros(net.node_count, dtype=np.int64)
    np.add.at(net_out, net.efrom, flow)
    np.subtract.at(net_out, net.eto, flow)
    if np.any(net_out != net.supply):
        return False
    return _finite_cost_total(net.cost, flow) == sol.total_cost
