"""Concrete set-valued risk measures on finite scenario trees.

All measures except the entropic one are polyhedral and exact: a measure is
backed by an acceptance polyhedron in payoff coordinates, and its value at a
time-t node is the set of eligible deposits moving the payoff into acceptance,
extracted as an exact polyhedral preimage.  The entropic measure lives on a
tagged floating-point path (log/exp have no rational closed form).
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .polyhedra import Polyhedron, project_halfspaces
from .rationals import ExtRat
from .tree import AdaptedVector, ScenarioTree, VectorMeasure


class ModelInconsistencyError(RuntimeError):
    """Raised when a recursion produces an empty value set, which cannot
    happen in an arbitrage-free conical market."""


class NotPolyhedralError(TypeError):
    """Raised when a polyhedral quantity is requested from an analytic
    (floating-point) risk measure."""


def thread_count() -> int:
    try:
        n = int(os.environ.get("SETRISK_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def parallel_map(fn: Callable, items: Sequence) -> List:
    """Order-preserving map, threaded when SETRISK_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- coordinate plumbing -------------------------------------------------------


def _scope_leaves(tree: ScenarioTree, node: Optional[str]) -> Tuple[str, ...]:
    return tree.leaves if node is None else tree.leaves_under(node)


def _block_index(tree: ScenarioTree, leaves: Sequence[str]):
    pos = {leaf: k for k, leaf in enumerate(leaves)}
    return lambda leaf, i: pos[leaf] * tree.d + i


def block_vector(X: AdaptedVector, node: Optional[str]) -> Tuple[Fraction, ...]:
    """Flatten a horizon payoff onto the coordinate block of a subtree."""
    tree = X.tree
    if X.time != tree.horizon:
        raise ValueError("payoffs must be horizon-time vectors")
    leaves = _scope_leaves(tree, node)
    return tuple(X[leaf][i] for leaf in leaves for i in range(tree.d))


def eligible_embedding_rows(
    tree: ScenarioTree, node: Optional[str], m: int
) -> List[Tuple[int, ...]]:
    """Matrix rows mapping a deposit u in R^m to the block payoff it funds."""
    leaves = _scope_leaves(tree, node)
    rows = []
    for _ in leaves:
        for i in range(tree.d):
            rows.append(tuple(int(i == j) for j in range(m)))
    return rows


def measurability_rows(
    tree: ScenarioTree, s: int, node: Optional[str]
) -> List[Tuple[Tuple[int, ...], int]]:
    """Equality constraints (as inequality pairs) pinning a block payoff to be
    known at time s: coordinates agree across each time-s subtree."""
    leaves = _scope_leaves(tree, node)
    idx = _block_index(tree, leaves)
    dim = len(leaves) * tree.d
    anchor = tree.root if node is None else node
    rows: List[Tuple[Tuple[int, ...], int]] = []
    for nu in tree.descendants_at(anchor, s):
        sub = tree.leaves_under(nu)
        rep = sub[0]
        for leaf in sub[1:]:
            for i in range(tree.d):
                row = [0] * dim
                row[idx(leaf, i)] = 1
                row[idx(rep, i)] = -1
                rows.append((tuple(row), 0))
                rows.append((tuple(-x for x in row), 0))
    return rows


def _sum_embedded(
    pieces: Sequence[Tuple[Sequence[int], Polyhedron]], dim: int
) -> Polyhedron:
    """Minkowski sum of polyhedra embedded on disjoint coordinate blocks."""
    verts: List[Tuple[Fraction, ...]] = [(Fraction(0),) * dim]
    rays: List[Tuple[int, ...]] = []
    for positions, poly in pieces:
        if poly.is_empty:
            return Polyhedron.empty(dim)
        new_verts = []
        for base in verts:
            for v in poly.vertices:
                vec = list(base)
                for p, x in zip(positions, v):
                    vec[p] += x
                new_verts.append(tuple(vec))
        verts = new_verts
        for r in poly.rays:
            vec = [0] * dim
            for p, x in zip(positions, r):
                vec[p] = x
            rays.append(tuple(vec))
    return Polyhedron.from_generators(verts, rays, dim=dim)


# -- solvency processes --------------------------------------------------------


def validate_solvency_cones(tree: ScenarioTree, cones: Dict[str, Polyhedron]) -> None:
    """Per-node closed convex cones with R^d_+ <= K < R^d."""
    orthant = Polyhedron.nonnegative_orthant(tree.d)
    for node in tree.node_ids:
        if node not in cones:
            raise ValueError(f"missing solvency cone at node {node!r}")
        K = cones[node]
        if K.dim != tree.d:
            raise ValueError(f"node {node!r}: cone dimension {K.dim} != d={tree.d}")
        if not K.is_cone():
            raise ValueError(f"node {node!r}: solvency set is not a cone")
        if not K.contains_set(orthant):
            raise ValueError(f"node {node!r}: cone does not contain the orthant")
        if not K.halfspaces:
            raise ValueError(f"node {node!r}: cone is the whole space")


def validate_solvency_regions(tree: ScenarioTree, regions: Dict[str, Polyhedron]) -> None:
    """Per-node closed convex sets with R^d_+ <= K < R^d (cones not required)."""
    orthant = Polyhedron.nonnegative_orthant(tree.d)
    for node in tree.node_ids:
        if node not in regions:
            raise ValueError(f"missing solvency region at node {node!r}")
        K = regions[node]
        if K.dim != tree.d:
            raise ValueError(f"node {node!r}: region dimension {K.dim} != d={tree.d}")
        if not K.contains_set(orthant):
            raise ValueError(f"node {node!r}: region does not contain the orthant")
        if not K.halfspaces:
            raise ValueError(f"node {node!r}: region is the whole space")


# -- superhedging --------------------------------------------------------------


def _backward_value(
    tree: ScenarioTree, solvency: Dict[str, Polyhedron], X: AdaptedVector, t: int
) -> Dict[str, Polyhedron]:
    """Backward recursion for the sets of superhedging portfolios:
    value(leaf) = X + K at the horizon, then solvency + intersection of
    children up the tree.  Independent sibling subtrees evaluate in parallel.
    """
    if X.time != tree.horizon:
        raise ValueError("payoffs must be horizon-time vectors")
    level = {
        leaf: solvency[leaf].translate(X[leaf]) for leaf in tree.leaves
    }
    for s in range(tree.horizon - 1, t - 1, -1):
        nodes = tree.nodes_at(s)

        def eval_node(node: str) -> Polyhedron:
            kids = tree.children(node)
            inter = level[kids[0]]
            for kid in kids[1:]:
                inter = inter.intersect(level[kid])
            if inter.is_empty:
                raise ModelInconsistencyError(
                    f"no portfolio superhedges from node {node!r}: "
                    "empty intersection of successor values (arbitrage in the model?)"
                )
            return solvency[node].minkowski_sum(inter)

        level = dict(zip(nodes, parallel_map(eval_node, nodes)))
    return {n: level[n] for n in tree.nodes_at(t)}


def shp_value(
    tree: ScenarioTree, cones: Dict[str, Polyhedron], X: AdaptedVector, t: int
) -> Dict[str, Polyhedron]:
    """Superhedging portfolios for X under proportional transaction costs,
    per time-t node, via the backward recursion.  The associated risk measure
    evaluates this at -X."""
    validate_solvency_cones(tree, cones)
    return _backward_value(tree, cones, X, t)


def convex_shp_value(
    tree: ScenarioTree, regions: Dict[str, Polyhedron], X: AdaptedVector, t: int
) -> Dict[str, Polyhedron]:
    """Superhedging portfolios under convex transaction costs (solvency
    regions instead of cones); same recursion, non-conical per-node sets."""
    validate_solvency_regions(tree, regions)
    return _backward_value(tree, regions, X, t)


def selector_polyhedron(
    tree: ScenarioTree, solvency: Dict[str, Polyhedron], s: int, node: Optional[str]
) -> Polyhedron:
    """The time-s selector set: payoffs measurable at s whose per-node value
    lies in the node's solvency set, embedded in block payoff coordinates."""
    leaves = _scope_leaves(tree, node)
    idx = _block_index(tree, leaves)
    dim = len(leaves) * tree.d
    anchor = tree.root if node is None else node
    pieces = []
    for nu in tree.descendants_at(anchor, s):
        positions = [idx(leaf, i) for leaf in tree.leaves_under(nu) for i in range(tree.d)]
        # constant extension along the subtree: one copy of K per leaf slot
        lift = [[0] * tree.d for _ in range(len(positions))]
        for k in range(len(positions)):
            lift[k][k % tree.d] = 1
        K = solvency[nu]
        verts = [
            tuple(sum(row[j] * v[j] for j in range(tree.d)) for row in lift)
            for v in K.vertices
        ]
        rays = [
            tuple(sum(row[j] * r[j] for j in range(tree.d)) for row in lift)
            for r in K.rays
        ]
        pieces.append((positions, Polyhedron.from_generators(verts, rays, dim=len(positions))))
    return _sum_embedded(pieces, dim)


def shp_acceptance(
    tree: ScenarioTree,
    solvency: Dict[str, Polyhedron],
    t: int,
    node: Optional[str] = None,
) -> Polyhedron:
    """Acceptance set of the superhedging measure: the Minkowski sum of the
    per-time selector sets from t to the horizon (block payoff coordinates)."""
    out = selector_polyhedron(tree, solvency, t, node)
    for s in range(t + 1, tree.horizon + 1):
        out = out.minkowski_sum(selector_polyhedron(tree, solvency, s, node))
    return out


# -- average value at risk ------------------------------------------------------


class AvarParams:
    """Per-time, per-node, per-component risk levels with 0 < lambda < 1."""

    def __init__(self, tree: ScenarioTree, levels: Dict[int, Dict[str, Sequence]]):
        self.tree = tree
        self._levels: Dict[int, Dict[str, Tuple[Fraction, ...]]] = {}
        for t in range(tree.horizon + 1):
            if t not in levels:
                raise ValueError(f"missing risk levels for time {t}")
            per_node = {}
            for node in tree.nodes_at(t):
                if node not in levels[t]:
                    raise ValueError(f"missing risk level at node {node!r}")
                vec = tuple(Fraction(x) for x in levels[t][node])
                if len(vec) != tree.d:
                    raise ValueError(f"node {node!r}: level dimension != d")
                if any(not (0 < x < 1) for x in vec):
                    raise ValueError(
                        f"node {node!r}: risk levels must satisfy 0 < lambda < 1"
                    )
                per_node[node] = vec
            self._levels[t] = per_node

    @classmethod
    def constant(cls, tree: ScenarioTree, level) -> "AvarParams":
        vec = (
            tuple(Fraction(x) for x in level)
            if isinstance(level, (tuple, list))
            else (Fraction(level),) * tree.d
        )
        return cls(
            tree,
            {
                t: {n: vec for n in tree.nodes_at(t)}
                for t in range(tree.horizon + 1)
            },
        )

    def at(self, t: int, node: str) -> Tuple[Fraction, ...]:
        return self._levels[t][node]


def avar_acceptance(
    tree: ScenarioTree, lam: AvarParams, t: int, node: Optional[str] = None
) -> Polyhedron:
    """Acceptance set of time-t AV@R: payoffs X for which some nonnegative Z
    has X + Z >= E_t[Z] / lambda componentwise; Z is projected out exactly."""
    leaves = _scope_leaves(tree, node)
    idx = _block_index(tree, leaves)
    nx = len(leaves) * tree.d
    zpos = {(leaf, i): nx + k * tree.d + i for k, leaf in enumerate(leaves) for i in range(tree.d)}
    dim = 2 * nx
    rows = []
    for leaf in leaves:
        anc = tree.ancestor(leaf, t)
        lam_t = lam.at(t, anc)
        siblings = tree.leaves_under(anc)
        for i in range(tree.d):
            row = [Fraction(0)] * dim
            row[idx(leaf, i)] = Fraction(1)
            row[zpos[(leaf, i)]] += Fraction(1)
            for other in siblings:
                row[zpos[(other, i)]] -= tree.cond_prob(other, anc) / lam_t[i]
            rows.append((tuple(row), 0))
    for key, col in zpos.items():
        row = [0] * dim
        row[col] = 1
        rows.append((tuple(row), 0))
    return project_halfspaces(rows, dim, range(nx))


def avar_stepped_acceptance(
    tree: ScenarioTree, lam: AvarParams, t: int, s: int, node: Optional[str] = None
) -> Polyhedron:
    """Stepped AV@R acceptance: time-s-measurable payoffs with a time-s
    measurable nonnegative Z certifying X + Z >= E_t[Z]/lambda^t."""
    if not t < s <= tree.horizon:
        raise ValueError("need t < s <= horizon")
    leaves = _scope_leaves(tree, node)
    idx = _block_index(tree, leaves)
    nx = len(leaves) * tree.d
    anchor = tree.root if node is None else node
    snodes = tree.descendants_at(anchor, s)
    zpos = {(nu, i): nx + k * tree.d + i for k, nu in enumerate(snodes) for i in range(tree.d)}
    dim = nx + len(snodes) * tree.d
    rows = [(row + (0,) * (len(snodes) * tree.d), b) for row, b in measurability_rows(tree, s, node)]
    for nu in snodes:
        anc = tree.ancestor(nu, t)
        lam_t = lam.at(t, anc)
        rep = tree.leaves_under(nu)[0]
        for i in range(tree.d):
            row = [Fraction(0)] * dim
            row[idx(rep, i)] = Fraction(1)
            row[zpos[(nu, i)]] += Fraction(1)
            for other in tree.descendants_at(anc, s):
                row[zpos[(other, i)]] -= tree.cond_prob(other, anc) / lam_t[i]
            rows.append((tuple(row), 0))
    for key, col in zpos.items():
        row = [0] * dim
        row[col] = 1
        rows.append((tuple(row), 0))
    return project_halfspaces(rows, dim, range(nx))


def composed_avar_dual_support(
    tree: ScenarioTree,
    lam: AvarParams,
    X: AdaptedVector,
    t: int,
    node: str,
    gamma: Sequence,
) -> ExtRat:
    """Best lower bound on gamma^T u over the composed AV@R value at a node,
    taken over the composed dual constraint system: nonnegative weight
    processes started at gamma whose one-step growth never exceeds 1/lambda.
    Equals the primal support value in facet-normal directions."""
    gamma = tuple(Fraction(x) for x in gamma)
    if len(gamma) != tree.d:
        raise ValueError("direction must have d components")
    times = range(t, tree.horizon + 1)
    var = {}
    for s in times:
        for nu in tree.descendants_at(node, s):
            for i in range(tree.d):
                var[(nu, i)] = len(var)
    dim = len(var)
    rows = []
    for i in range(tree.d):
        row = [0] * dim
        row[var[(node, i)]] = 1
        rows.append((tuple(row), gamma[i]))
        rows.append((tuple(-x for x in row), -gamma[i]))
    for (nu, i), col in var.items():
        row = [0] * dim
        row[col] = 1
        rows.append((tuple(row), 0))
    for s in times[:-1]:
        for nu in tree.descendants_at(node, s):
            lam_s = lam.at(s, nu)
            for i in range(tree.d):
                row = [Fraction(0)] * dim
                row[var[(nu, i)]] = Fraction(1)
                for kid in tree.children(nu):
                    row[var[(kid, i)]] = -tree.branch_prob(kid)
                rows.append((tuple(row), 0))
                rows.append((tuple(-x for x in row), 0))
                for kid in tree.children(nu):
                    cap = [Fraction(0)] * dim
                    cap[var[(nu, i)]] = 1 / lam_s[i]
                    cap[var[(kid, i)]] -= Fraction(1)
                    rows.append((tuple(cap), 0))
    feasible = Polyhedron.from_halfspaces(rows, dim)
    objective = [Fraction(0)] * dim
    for leaf in tree.descendants_at(node, tree.horizon):
        p = tree.cond_prob(leaf, node)
        for i in range(tree.d):
            objective[var[(leaf, i)]] = p * X[leaf][i]
    # sup E[y^T(-X)] over the bounded system = -inf E[y^T X]
    return -feasible.support_value(objective)


# -- entropic -------------------------------------------------------------------


class EntropicParams:
    """Constant risk-aversion vector, strictly positive, floating point."""

    def __init__(self, lam: Sequence[float]):
        self.lam = tuple(float(x) for x in lam)
        if not self.lam or any(x <= 0 for x in self.lam):
            raise ValueError("risk aversion must be strictly positive")


@dataclass(frozen=True)
class EntropicValue:
    """Analytic point-plus-cone value: rho(node) + nonnegative orthant.

    Tagged floating-point result; never a rational Polyhedron.
    """

    t: int
    rho: Dict[str, Tuple[float, ...]]
    cone: str = "nonnegative_orthant"


def entropic_value(params: EntropicParams, X: AdaptedVector, t: int) -> EntropicValue:
    """Componentwise entropic risk: log E_t[exp(-lambda X)] / lambda, plus the
    orthant of acceptable over-deposits."""
    tree = X.tree
    if len(params.lam) != tree.d:
        raise ValueError("risk aversion dimension != d")
    if t > X.time:
        raise ValueError("evaluation time after payoff time")
    rho = {}
    for n in tree.nodes_at(t):
        vals = []
        for i in range(tree.d):
            lam = params.lam[i]
            acc = 0.0
            for nu in tree.descendants_at(n, X.time):
                acc += float(tree.cond_prob(nu, n)) * math.exp(-lam * float(X[nu][i]))
            vals.append(math.log(acc) / lam)
        rho[n] = tuple(vals)
    return EntropicValue(t, rho)


def relative_entropy(Q: VectorMeasure, t: int, s: int) -> Dict[str, Tuple[float, ...]]:
    """Conditional relative entropy of the (t, s) density slice per time-t
    node and component, with the 0 log 0 = 0 convention."""
    tree = Q.tree
    xi = Q.xi(t, s)
    out = {}
    for n in tree.nodes_at(t):
        vals = []
        for i in range(tree.d):
            acc = 0.0
            for nu in tree.descendants_at(n, s):
                x = xi[nu][i]
                if x > 0:
                    acc += float(tree.cond_prob(nu, n)) * float(x) * math.log(float(x))
            vals.append(acc)
        out[n] = tuple(vals)
    return out


def entropic_penalty(
    params: EntropicParams, Q: VectorMeasure, t: int, s: int
) -> Dict[str, Tuple[float, ...]]:
    """Stepped entropic penalty offsets: -H_{t,s}(Q|P) / lambda per node."""
    ent = relative_entropy(Q, t, s)
    return {
        n: tuple(-h / lam for h, lam in zip(ent[n], params.lam)) for n in ent
    }


def q_expectation_float(
    Q: VectorMeasure, t: int, values: Dict[str, Tuple[float, ...]], s: int
) -> Dict[str, Tuple[float, ...]]:
    """Q-conditional expectation (back to time t) of per-time-s-node floats."""
    tree = Q.tree
    xi = Q.xi(t, s)
    out = {}
    for n in tree.nodes_at(t):
        vals = []
        for i in range(tree.d):
            acc = 0.0
            for nu in tree.descendants_at(n, s):
                acc += float(tree.cond_prob(nu, n)) * float(xi[nu][i]) * values[nu][i]
            vals.append(acc)
        out[n] = tuple(vals)
    return out


# -- risk measure interface ------------------------------------------------------


class ConditionalRiskMeasure:
    """A dynamic risk measure bound to one evaluation time."""

    def __init__(self, parent: "DynamicRiskMeasure", t: int):
        self.parent = parent
        self.t = t
        self.m = parent.m

    def value(self, X: AdaptedVector):
        return self.parent.value(X, self.t)

    def acceptance_set(self) -> Polyhedron:
        return self.parent.acceptance_set(self.t)

    def stepped_acceptance_set(self, s: int) -> Polyhedron:
        return self.parent.stepped_acceptance_set(self.t, s)


class DynamicRiskMeasure:
    """Base class: a family of conditional risk measures, one per time."""

    def __init__(self, tree: ScenarioTree, m: int):
        if not 1 <= m <= tree.d:
            raise ValueError(f"eligible asset count m={m} must satisfy 1 <= m <= d={tree.d}")
        self.tree = tree
        self.m = m

    def at(self, t: int) -> ConditionalRiskMeasure:
        return ConditionalRiskMeasure(self, t)

    def value(self, X: AdaptedVector, t: int):
        raise NotImplementedError

    def acceptance_set(self, t: int, node: Optional[str] = None) -> Polyhedron:
        raise NotImplementedError

    def stepped_acceptance_set(self, t: int, s: int, node: Optional[str] = None) -> Polyhedron:
        raise NotImplementedError

    @property
    def is_polyhedral(self) -> bool:
        return True


class PolyhedralRiskMeasure(DynamicRiskMeasure):
    """Risk measure backed by per-subtree acceptance polyhedra.

    Subclasses provide ``_build_acceptance(t, node)``; values, stepped sets
    and caching are shared.  The per-node value is the exact preimage of the
    acceptance set under the eligible-deposit embedding.
    """

    def __init__(self, tree: ScenarioTree, m: int):
        super().__init__(tree, m)
        self._cache: Dict = {}
        self._lock = threading.Lock()

    def _cached(self, key, build: Callable[[], Polyhedron]) -> Polyhedron:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        result = build()
        with self._lock:
            return self._cache.setdefault(key, result)

    def _build_acceptance(self, t: int, node: Optional[str]) -> Polyhedron:
        raise NotImplementedError

    def acceptance_set(self, t: int, node: Optional[str] = None) -> Polyhedron:
        if node is not None and self.tree.time(node) != t:
            raise ValueError("scope node must live at the evaluation time")
        return self._cached(("acc", t, node), lambda: self._build_acceptance(t, node))

    def stepped_acceptance_set(self, t: int, s: int, node: Optional[str] = None) -> Polyhedron:
        if not t < s <= self.tree.horizon:
            raise ValueError("need t < s <= horizon")

        def build() -> Polyhedron:
            A = self.acceptance_set(t, node)
            rows = list(A.halfspaces) + measurability_rows(self.tree, s, node)
            return Polyhedron.from_halfspaces(rows, A.dim)

        return self._cached(("stepped", t, s, node), build)

    def value(self, X: AdaptedVector, t: int) -> Dict[str, Polyhedron]:
        tree = self.tree
        nodes = tree.nodes_at(t)

        def eval_node(node: str) -> Polyhedron:
            A = self.acceptance_set(t, node)
            E = eligible_embedding_rows(tree, node, self.m)
            return A.linear_preimage(E, block_vector(X, node))

        return dict(zip(nodes, parallel_map(eval_node, nodes)))


class SuperhedgingMeasure(PolyhedralRiskMeasure):
    """Risk measure of superhedging under proportional transaction costs.

    Requires the full eligible space (m = d); the value at X is the set of
    portfolios superhedging -X.
    """

    def __init__(self, tree: ScenarioTree, cones: Dict[str, Polyhedron], m: Optional[int] = None):
        m = tree.d if m is None else m
        if m != tree.d:
            raise ValueError("superhedging requires all assets eligible (m = d)")
        validate_solvency_cones(tree, cones)
        super().__init__(tree, m)
        self.cones = dict(cones)

    def _build_acceptance(self, t: int, node: Optional[str]) -> Polyhedron:
        return shp_acceptance(self.tree, self.cones, t, node)

    def shp(self, X: AdaptedVector, t: int) -> Dict[str, Polyhedron]:
        """Superhedging sets for X (the value of the measure at -X)."""
        return self.value(-X, t)


class ConvexSuperhedgingMeasure(PolyhedralRiskMeasure):
    """Superhedging under convex transaction costs (solvency regions)."""

    def __init__(self, tree: ScenarioTree, regions: Dict[str, Polyhedron], m: Optional[int] = None):
        m = tree.d if m is None else m
        if m != tree.d:
            raise ValueError("superhedging requires all assets eligible (m = d)")
        validate_solvency_regions(tree, regions)
        super().__init__(tree, m)
        self.regions = dict(regions)

    def _build_acceptance(self, t: int, node: Optional[str]) -> Polyhedron:
        return shp_acceptance(self.tree, self.regions, t, node)


class AvarMeasure(PolyhedralRiskMeasure):
    """Set-valued average value at risk with adapted risk levels."""

    def __init__(self, tree: ScenarioTree, params: AvarParams, m: Optional[int] = None):
        super().__init__(tree, tree.d if m is None else m)
        self.params = params

    def _build_acceptance(self, t: int, node: Optional[str]) -> Polyhedron:
        return avar_acceptance(self.tree, self.params, t, node)


class ComposedMeasure(PolyhedralRiskMeasure):
    """Backward composition of one-step stepped acceptance sets.

    ``stepped_builder(t, node)`` must return the one-step set from t to t+1 on
    the node's block; ``terminal_builder(leaf)`` the horizon acceptance set on
    a leaf block.  The acceptance set at (t, node) is the backward Minkowski
    sum over the subtree.
    """

    def __init__(
        self,
        tree: ScenarioTree,
        m: int,
        stepped_builder: Callable[[int, Optional[str]], Polyhedron],
        terminal_builder: Callable[[str], Polyhedron],
    ):
        super().__init__(tree, m)
        self._stepped_builder = stepped_builder
        self._terminal_builder = terminal_builder

    def _build_acceptance(self, t: int, node: Optional[str]) -> Polyhedron:
        tree = self.tree
        if node is None:
            leaves = tree.leaves
            idx = _block_index(tree, leaves)
            pieces = []
            for n in tree.nodes_at(t):
                positions = [idx(leaf, i) for leaf in tree.leaves_under(n) for i in range(tree.d)]
                pieces.append((positions, self.acceptance_set(t, n)))
            return _sum_embedded(pieces, len(leaves) * tree.d)
        if t == tree.horizon:
            return self._terminal_builder(node)
        leaves = tree.leaves_under(node)
        idx = _block_index(tree, leaves)
        dim = len(leaves) * tree.d
        pieces = []
        for kid in tree.children(node):
            positions = [idx(leaf, i) for leaf in tree.leaves_under(kid) for i in range(tree.d)]
            pieces.append((positions, self.acceptance_set(t + 1, kid)))
        tail = _sum_embedded(pieces, dim)
        return self._stepped_builder(t, node).minkowski_sum(tail)


def composed_avar_measure(
    tree: ScenarioTree, lam: AvarParams, m: Optional[int] = None
) -> ComposedMeasure:
    """The composed (recursively stitched) AV@R family, built from the
    one-step stepped AV@R acceptance sets."""
    orthant_block = Polyhedron.nonnegative_orthant(tree.d)
    return ComposedMeasure(
        tree,
        tree.d if m is None else m,
        stepped_builder=lambda t, node: avar_stepped_acceptance(tree, lam, t, t + 1, node),
        terminal_builder=lambda leaf: orthant_block,
    )


def avar_value(
    tree: ScenarioTree, lam: AvarParams, X: AdaptedVector, t: int, m: Optional[int] = None
) -> Dict[str, Polyhedron]:
    """Per-node AV@R value via the exact primal (auxiliary-variable) route."""
    return AvarMeasure(tree, lam, m).value(X, t)


def composed_avar_value(
    tree: ScenarioTree, lam: AvarParams, X: AdaptedVector, t: int, m: Optional[int] = None
) -> Dict[str, Polyhedron]:
    """Per-node value of the composed AV@R family."""
    return composed_avar_measure(tree, lam, m).value(X, t)


class EntropicMeasure(DynamicRiskMeasure):
    """Entropic risk measure with constant risk aversion and the orthant as
    the acceptability threshold set.  Analytic float path; not polyhedral."""

    def __init__(self, tree: ScenarioTree, params: EntropicParams):
        super().__init__(tree, tree.d)
        if len(params.lam) != tree.d:
            raise ValueError("risk aversion dimension != d")
        self.params = params

    @property
    def is_polyhedral(self) -> bool:
        return False

    def value(self, X: AdaptedVector, t: int) -> EntropicValue:
        return entropic_value(self.params, X, t)

    def acceptance_set(self, t: int, node: Optional[str] = None) -> Polyhedron:
        raise NotPolyhedralError("the entropic risk measure has no polyhedral acceptance set")

    def stepped_acceptance_set(self, t: int, s: int, node: Optional[str] = None) -> Polyhedron:
        raise NotPolyhedralError("the entropic risk measure has no polyhedral acceptance set")
