"""Finite scenario trees, adapted random vectors, and vector measures.

The tree is a finite filtered probability space: nodes at time t are the atoms
of the time-t information set, every branch probability is a strictly positive
rational, and leaves all live at the horizon.  All expectation machinery here
is exact rational arithmetic.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple


class ScenarioTree:
    """Rooted tree with strictly positive rational branch probabilities.

    ``nodes`` is an iterable of ``(node_id, parent_id, time, branch_prob)``
    tuples; the root has ``parent_id None`` and no branch probability.  Node
    order is preserved and used for every canonical coordinate layout.
    """

    def __init__(self, nodes: Iterable[Tuple], d: int):
        if d < 1:
            raise ValueError("number of assets d must be >= 1")
        self.d = d
        self._parent: Dict[str, Optional[str]] = {}
        self._time: Dict[str, int] = {}
        self._branch_prob: Dict[str, Fraction] = {}
        self._children: Dict[str, List[str]] = {}
        self._order: List[str] = []
        root = None
        for entry in nodes:
            node_id, parent, time, prob = entry
            node_id = str(node_id)
            if node_id in self._time:
                raise ValueError(f"duplicate node id {node_id!r}")
            if parent is None:
                if root is not None:
                    raise ValueError("multiple roots")
                if time != 0:
                    raise ValueError(f"root {node_id!r} must be at time 0")
                root = node_id
            else:
                parent = str(parent)
                if parent not in self._time:
                    raise ValueError(f"node {node_id!r}: unknown parent {parent!r}")
                if time != self._time[parent] + 1:
                    raise ValueError(
                        f"node {node_id!r}: time must increase by exactly 1 along edges"
                    )
                p = Fraction(prob)
                if p <= 0:
                    raise ValueError(f"node {node_id!r}: branch probability must be > 0")
                self._branch_prob[node_id] = p
                self._children[parent].append(node_id)
            self._parent[node_id] = parent
            self._time[node_id] = int(time)
            self._children[node_id] = []
            self._order.append(node_id)
        if root is None:
            raise ValueError("tree has no root")
        self.root = root
        self.horizon = max(self._time.values())
        for node_id in self._order:
            kids = self._children[node_id]
            if kids:
                total = sum(self._branch_prob[k] for k in kids)
                if total != 1:
                    raise ValueError(
                        f"node {node_id!r}: children probabilities sum to {total}, not 1"
                    )
            elif self._time[node_id] != self.horizon:
                raise ValueError(
                    f"leaf {node_id!r} at time {self._time[node_id]} before horizon "
                    f"{self.horizon}"
                )
        self._prob: Dict[str, Fraction] = {}
        for node_id in self._order:
            parent = self._parent[node_id]
            if parent is None:
                self._prob[node_id] = Fraction(1)
            else:
                self._prob[node_id] = self._prob[parent] * self._branch_prob[node_id]
        self.leaves: Tuple[str, ...] = tuple(
            n for n in self._order if self._time[n] == self.horizon
        )
        self._leaf_pos = {leaf: i for i, leaf in enumerate(self.leaves)}

    # -- structure ---------------------------------------------------------

    @property
    def node_ids(self) -> Tuple[str, ...]:
        return tuple(self._order)

    def time(self, node: str) -> int:
        return self._time[node]

    def parent(self, node: str) -> Optional[str]:
        return self._parent[node]

    def children(self, node: str) -> Tuple[str, ...]:
        return tuple(self._children[node])

    def branch_prob(self, node: str) -> Fraction:
        return self._branch_prob[node]

    def prob(self, node: str) -> Fraction:
        """Unconditional probability of passing through the node."""
        return self._prob[node]

    def nodes_at(self, t: int) -> Tuple[str, ...]:
        if not 0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        return tuple(n for n in self._order if self._time[n] == t)

    def ancestor(self, node: str, t: int) -> str:
        if t > self._time[node]:
            raise ValueError("ancestor time after node time")
        while self._time[node] > t:
            node = self._parent[node]
        return node

    def descendants_at(self, node: str, t: int) -> Tuple[str, ...]:
        if t < self._time[node]:
            raise ValueError("descendant time before node time")
        current = [node]
        for _ in range(t - self._time[node]):
            current = [kid for n in current for kid in self._children[n]]
        return tuple(current)

    def leaves_under(self, node: str) -> Tuple[str, ...]:
        return self.descendants_at(node, self.horizon)

    def cond_prob(self, descendant: str, node: str) -> Fraction:
        return self._prob[descendant] / self._prob[node]

    # -- payoff coordinate layout -------------------------------------------

    @property
    def payoff_dim(self) -> int:
        return len(self.leaves) * self.d

    def payoff_index(self, leaf: str, component: int) -> int:
        return self._leaf_pos[leaf] * self.d + component

    def block_indices(self, node: str) -> List[int]:
        """Payoff coordinates supported on the subtree under ``node``."""
        return [
            self.payoff_index(leaf, i)
            for leaf in self.leaves_under(node)
            for i in range(self.d)
        ]


class AdaptedVector:
    """A d-vector per node at a fixed time (physical units of assets)."""

    __slots__ = ("tree", "time", "values")

    def __init__(self, tree: ScenarioTree, time: int, values: Dict[str, Sequence]):
        nodes = tree.nodes_at(time)
        vals: Dict[str, Tuple[Fraction, ...]] = {}
        for node in nodes:
            if node not in values:
                raise ValueError(f"missing value at node {node!r}")
            vec = tuple(Fraction(x) for x in values[node])
            if len(vec) != tree.d:
                raise ValueError(
                    f"node {node!r}: value has dimension {len(vec)}, expected {tree.d}"
                )
            vals[node] = vec
        if len(values) != len(nodes):
            extra = set(values) - set(nodes)
            raise ValueError(f"values given at non-time-{time} nodes: {sorted(extra)}")
        self.tree = tree
        self.time = time
        self.values = vals

    @classmethod
    def constant(cls, tree: ScenarioTree, time: int, vector: Sequence) -> "AdaptedVector":
        vec = tuple(Fraction(x) for x in vector)
        return cls(tree, time, {n: vec for n in tree.nodes_at(time)})

    @classmethod
    def zero(cls, tree: ScenarioTree, time: int) -> "AdaptedVector":
        return cls.constant(tree, time, (0,) * tree.d)

    def __getitem__(self, node: str) -> Tuple[Fraction, ...]:
        return self.values[node]

    def _zip(self, other: "AdaptedVector", op) -> "AdaptedVector":
        if other.tree is not self.tree or other.time != self.time:
            raise ValueError("adapted vectors live on different trees or times")
        return AdaptedVector(
            self.tree,
            self.time,
            {
                n: tuple(op(a, b) for a, b in zip(self.values[n], other.values[n]))
                for n in self.values
            },
        )

    def __add__(self, other: "AdaptedVector") -> "AdaptedVector":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "AdaptedVector") -> "AdaptedVector":
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self) -> "AdaptedVector":
        return self.scale(-1)

    def scale(self, factor) -> "AdaptedVector":
        f = Fraction(factor)
        return AdaptedVector(
            self.tree, self.time, {n: tuple(f * x for x in v) for n, v in self.values.items()}
        )

    def scale_nodewise(self, factors: Dict[str, object]) -> "AdaptedVector":
        return AdaptedVector(
            self.tree,
            self.time,
            {n: tuple(Fraction(factors[n]) * x for x in v) for n, v in self.values.items()},
        )

    def dominates(self, other: "AdaptedVector") -> bool:
        """Componentwise >= at every node."""
        if other.tree is not self.tree or other.time != self.time:
            raise ValueError("adapted vectors live on different trees or times")
        return all(
            a >= b for n in self.values for a, b in zip(self.values[n], other.values[n])
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdaptedVector):
            return NotImplemented
        return (
            self.tree is other.tree
            and self.time == other.time
            and self.values == other.values
        )

    def __hash__(self):
        return hash((id(self.tree), self.time, tuple(sorted(self.values.items()))))

    def as_payoff_vector(self) -> Tuple[Fraction, ...]:
        """Flatten a horizon-time vector into payoff coordinates."""
        tree = self.tree
        if self.time != tree.horizon:
            raise ValueError("only horizon-time vectors flatten to payoff coordinates")
        out = [Fraction(0)] * tree.payoff_dim
        for leaf in tree.leaves:
            for i, x in enumerate(self.values[leaf]):
                out[tree.payoff_index(leaf, i)] = x
        return tuple(out)

    def lift_to_horizon(self) -> "AdaptedVector":
        """Extend constantly along subtrees to a horizon-time vector."""
        tree = self.tree
        values = {}
        for node, vec in self.values.items():
            for leaf in tree.leaves_under(node):
                values[leaf] = vec
        return AdaptedVector(tree, tree.horizon, values)


class VectorMeasure:
    """d component measures absolutely continuous w.r.t. P, one density per leaf."""

    __slots__ = ("tree", "densities", "_agg", "_agg_lock")

    def __init__(self, tree: ScenarioTree, densities: Dict[str, Sequence]):
        vals: Dict[str, Tuple[Fraction, ...]] = {}
        for leaf in tree.leaves:
            if leaf not in densities:
                raise ValueError(f"missing density at leaf {leaf!r}")
            vec = tuple(Fraction(x) for x in densities[leaf])
            if len(vec) != tree.d:
                raise ValueError(f"leaf {leaf!r}: density dimension {len(vec)} != {tree.d}")
            if any(x < 0 for x in vec):
                raise ValueError(f"leaf {leaf!r}: negative density")
            vals[leaf] = vec
        for i in range(tree.d):
            total = sum(tree.prob(leaf) * vals[leaf][i] for leaf in tree.leaves)
            if total != 1:
                raise ValueError(f"component {i}: density integrates to {total}, not 1")
        self.tree = tree
        self.densities = vals
        self._agg: Dict[int, Dict[str, Tuple[Fraction, ...]]] = {}
        self._agg_lock = threading.Lock()

    @classmethod
    def physical(cls, tree: ScenarioTree) -> "VectorMeasure":
        one = (Fraction(1),) * tree.d
        return cls(tree, {leaf: one for leaf in tree.leaves})

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorMeasure):
            return NotImplemented
        return self.tree is other.tree and self.densities == other.densities

    def __hash__(self):
        return hash((id(self.tree), tuple(sorted(self.densities.items()))))

    def conditional_aggregate(self, t: int) -> Dict[str, Tuple[Fraction, ...]]:
        """E[dQ_i/dP | time-t node] for every time-t node, cached."""
        with self._agg_lock:
            if t not in self._agg:
                tree = self.tree
                agg = {}
                for node in tree.nodes_at(t):
                    leaves = tree.leaves_under(node)
                    agg[node] = tuple(
                        sum(tree.cond_prob(leaf, node) * self.densities[leaf][i] for leaf in leaves)
                        for i in range(tree.d)
                    )
                self._agg[t] = agg
            return self._agg[t]

    def xi(self, t: int, s: int) -> AdaptedVector:
        """Density-process slice between times t <= s, with the unit convention
        on nodes whose time-t conditional density aggregate vanishes."""
        if not 0 <= t <= s <= self.tree.horizon:
            raise ValueError("need 0 <= t <= s <= horizon")
        agg_t = self.conditional_aggregate(t)
        agg_s = self.conditional_aggregate(s)
        values = {}
        for node in self.tree.nodes_at(s):
            anc = self.tree.ancestor(node, t)
            values[node] = tuple(
                agg_s[node][i] / agg_t[anc][i] if agg_t[anc][i] > 0 else Fraction(1)
                for i in range(self.tree.d)
            )
        return AdaptedVector(self.tree, s, values)


class DensityProcess:
    """Cached view of all density-process slices of one measure."""

    def __init__(self, measure: VectorMeasure):
        self.measure = measure
        self._cache: Dict[Tuple[int, int], AdaptedVector] = {}
        self._lock = threading.Lock()

    def xi(self, t: int, s: int) -> AdaptedVector:
        key = (t, s)
        with self._lock:
            if key not in self._cache:
                self._cache[key] = self.measure.xi(t, s)
            return self._cache[key]


class EligibleSubspace:
    """The first m of d assets may be used to compensate risk."""

    __slots__ = ("m",)

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("eligible asset count m must be >= 1")
        self.m = m

    def validate_for(self, tree: ScenarioTree) -> None:
        if self.m > tree.d:
            raise ValueError(f"m={self.m} exceeds number of assets d={tree.d}")

    def coords(self, tree: ScenarioTree, t: int) -> List[Tuple[str, int]]:
        """Canonical (node, component) layout of M_t coordinates."""
        return [(node, i) for node in tree.nodes_at(t) for i in range(self.m)]


def conditional_expectation(X: AdaptedVector, Q: VectorMeasure, t: int) -> AdaptedVector:
    """Q-conditional expectation of a time-s vector back to time t <= s."""
    tree = X.tree
    if Q.tree is not tree:
        raise ValueError("measure lives on a different tree")
    s = X.time
    if t > s:
        raise ValueError(f"conditioning time {t} after vector time {s}")
    xi_ts = Q.xi(t, s)
    values = {}
    for node in tree.nodes_at(t):
        acc = [Fraction(0)] * tree.d
        for desc in tree.descendants_at(node, s):
            weight = tree.cond_prob(desc, node)
            for i in range(tree.d):
                acc[i] += weight * xi_ts[desc][i] * X[desc][i]
        values[node] = tuple(acc)
    return AdaptedVector(tree, t, values)


def expectation(X: AdaptedVector, weights: AdaptedVector) -> Fraction:
    """E[weights^T X] for two vectors at the same time."""
    if weights.tree is not X.tree or weights.time != X.time:
        raise ValueError("mismatched vectors")
    tree = X.tree
    return sum(
        tree.prob(n) * sum(a * b for a, b in zip(X[n], weights[n]))
        for n in tree.nodes_at(X.time)
    )


def paste(Q: VectorMeasure, R: VectorMeasure, s: int) -> VectorMeasure:
    """The measure following Q up to time s and R afterwards."""
    tree = Q.tree
    if R.tree is not tree:
        raise ValueError("measures live on different trees")
    xi_q = Q.xi(0, s)
    xi_r = R.xi(s, tree.horizon)
    densities = {}
    for leaf in tree.leaves:
        anc = tree.ancestor(leaf, s)
        densities[leaf] = tuple(
            xi_q[anc][i] * xi_r[leaf][i] for i in range(tree.d)
        )
    return VectorMeasure(tree, densities)


def modify_after(Q: VectorMeasure, s: int) -> VectorMeasure:
    """Replace leaf densities by the (s, horizon) density-process slice."""
    xi_r = Q.xi(s, Q.tree.horizon)
    return VectorMeasure(Q.tree, {leaf: xi_r[leaf] for leaf in Q.tree.leaves})


def restrict_equals_P(Q: VectorMeasure, t: int) -> bool:
    """Whether every component of Q agrees with P on all time-t events."""
    agg = Q.conditional_aggregate(t)
    return all(all(x == 1 for x in agg[node]) for node in Q.tree.nodes_at(t))
