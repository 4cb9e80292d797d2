"""Dual pairs (Q, w), weight processes, half-space functionals, penalty values.

A dual pair couples a vector probability measure with a time-t weight vector.
Its weight process transports the pair to later times; pairing a weight
process against an acceptance polyhedron via a support value yields the scalar
offset that encodes the minimal penalty half-space.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .polyhedra import Polyhedron
from .rationals import ExtRat
from .tree import (
    AdaptedVector,
    ScenarioTree,
    VectorMeasure,
    conditional_expectation,
    modify_after,
    restrict_equals_P,
)


class DualVariableError(ValueError):
    """Raised for structurally invalid dual variables (e.g. w orthogonal to
    every eligible portfolio)."""


@dataclass(frozen=True)
class DualPair:
    """A vector measure together with a weight vector at its base time."""

    Q: VectorMeasure
    t: int
    w: AdaptedVector

    def __post_init__(self):
        if self.w.tree is not self.Q.tree:
            raise ValueError("measure and weight live on different trees")
        if self.w.time != self.t:
            raise ValueError(f"weight vector is at time {self.w.time}, expected {self.t}")

    @property
    def tree(self) -> ScenarioTree:
        return self.Q.tree


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of a dual-variable membership test, with named violations."""

    ok: bool
    violations: Tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def weight_process(pair: DualPair, s: int) -> AdaptedVector:
    """The time-s weight vector diag(w) xi_{t,s}(Q) of a time-t dual pair."""
    tree = pair.tree
    if s < pair.t:
        raise ValueError("weight process only runs forward in time")
    xi = pair.Q.xi(pair.t, s)
    values = {}
    for node in tree.nodes_at(s):
        anc = tree.ancestor(node, pair.t)
        values[node] = tuple(
            pair.w[anc][i] * xi[node][i] for i in range(tree.d)
        )
    return AdaptedVector(tree, s, values)


def project_pair(pair: DualPair, s: int) -> DualPair:
    """The time-s pair obtained by forgetting the measure before s and
    transporting the weight."""
    return DualPair(modify_after(pair.Q, s), s, weight_process(pair, s))


def functional_from_weights(weights: AdaptedVector) -> Tuple[Fraction, ...]:
    """Flatten a time-s weight vector into the payoff-coordinate functional
    X -> E[w^T X] (extending constantly below time s)."""
    tree = weights.tree
    out = [Fraction(0)] * tree.payoff_dim
    for leaf in tree.leaves:
        anc = tree.ancestor(leaf, weights.time)
        p = tree.prob(leaf)
        for i in range(tree.d):
            out[tree.payoff_index(leaf, i)] = p * weights[anc][i]
    return tuple(out)


def pair_functional(pair: DualPair) -> Tuple[Fraction, ...]:
    """Payoff-coordinate functional of the pair's horizon weight process."""
    return functional_from_weights(weight_process(pair, pair.tree.horizon))


def _eligible_nonneg(w: AdaptedVector, m: int) -> bool:
    return all(all(x >= 0 for x in w[n][:m]) for n in w.values)


def _in_m_perp(w: AdaptedVector, m: int) -> bool:
    return all(all(x == 0 for x in w[n][:m]) for n in w.values)


def in_W(
    pair: DualPair,
    m: int,
    *,
    stepped_to: Optional[int] = None,
    acceptance: Optional[Polyhedron] = None,
) -> MembershipResult:
    """Membership of a pair in the dual-variable sets.

    Without keywords this tests the base time-t set; ``stepped_to=s`` tests
    the stepped set (weight process need only be eligible-nonnegative at s);
    ``acceptance`` additionally tests the maximal set, i.e. that the weight
    process lies in the positive dual cone of the given acceptance polyhedron.
    """
    tree = pair.tree
    violations: List[str] = []
    if not _eligible_nonneg(pair.w, m):
        violations.append("w outside positive dual cone of M_{t,+}")
    if _in_m_perp(pair.w, m):
        violations.append("w in M_t^perp")
    if not restrict_equals_P(pair.Q, pair.t):
        violations.append("Q differs from P on time-t events")
    if stepped_to is not None:
        if stepped_to <= pair.t:
            raise ValueError("stepped target time must exceed the base time")
        ws = weight_process(pair, stepped_to)
        if not _eligible_nonneg(ws, m):
            violations.append("stepped weight process outside positive dual cone of M_{s,+}")
    else:
        wT = weight_process(pair, tree.horizon)
        if not all(all(x >= 0 for x in wT[leaf]) for leaf in tree.leaves):
            violations.append("horizon weight process has a negative component")
    if acceptance is not None:
        if acceptance.is_empty:
            raise ValueError("empty acceptance set")
        direction = pair_functional(pair)
        if acceptance.support_value(direction) < 0:
            violations.append("weight process outside positive dual cone of acceptance set")
    return MembershipResult(not violations, tuple(violations))


@dataclass(frozen=True)
class PenaltyValue:
    """Scalar offset c encoding the half-space {u in M_t : c <= E[w^T u]}.

    c = -inf means the penalty half-space degenerates to all of M_t.
    """

    scalar: ExtRat
    pair: DualPair

    def to_polyhedron(self, m: int) -> Polyhedron:
        return _penalty_halfspace(self.pair, m, self.scalar)


@dataclass(frozen=True)
class ConditionalPenaltyValue:
    """Per-time-t-node scalar offsets for the conditional penalty."""

    scalars: Dict[str, ExtRat]
    pair: DualPair

    def to_polyhedra(self, m: int) -> Dict[str, Polyhedron]:
        out = {}
        for node, c in self.scalars.items():
            w = self.pair.w[node][:m]
            if c.is_neg_inf or not any(w):
                out[node] = Polyhedron.full_space(m)
            else:
                out[node] = Polyhedron.from_halfspaces([(w, c.value)], m)
        return out


def penalty_value(acceptance: Polyhedron, pair: DualPair) -> PenaltyValue:
    """Scalar minimal-penalty offset: the support value of the acceptance
    polyhedron against the pair's flattened horizon weight process."""
    if acceptance.is_empty:
        raise ValueError("penalty value of an empty acceptance set")
    if acceptance.dim != pair.tree.payoff_dim:
        raise ValueError("acceptance set must live in payoff coordinates")
    return PenaltyValue(acceptance.support_value(pair_functional(pair)), pair)


def conditional_penalty_value(
    acceptance: Polyhedron, pair: DualPair
) -> ConditionalPenaltyValue:
    """Nodewise penalty offsets: one support value per time-t node, against
    the functional restricted to that node's subtree (conditional weighting)."""
    if acceptance.is_empty:
        raise ValueError("penalty value of an empty acceptance set")
    tree = pair.tree
    full = pair_functional(pair)
    scalars: Dict[str, ExtRat] = {}
    for node in tree.nodes_at(pair.t):
        direction = [Fraction(0)] * tree.payoff_dim
        for idx in tree.block_indices(node):
            direction[idx] = full[idx] / tree.prob(node)
        scalars[node] = acceptance.support_value(direction)
    return ConditionalPenaltyValue(scalars, pair)


def _penalty_halfspace(pair: DualPair, m: int, c: ExtRat) -> Polyhedron:
    tree = pair.tree
    nodes = tree.nodes_at(pair.t)
    dim = len(nodes) * m
    if c.is_neg_inf:
        return Polyhedron.full_space(dim)
    coeffs = tuple(
        tree.prob(n) * pair.w[n][i] for n in nodes for i in range(m)
    )
    if not any(coeffs):
        raise DualVariableError("weight vector is orthogonal to all eligible portfolios")
    return Polyhedron.from_halfspaces([(coeffs, c.value)], dim)


def halfspace_G(w: AdaptedVector, m: int) -> Polyhedron:
    """The global half-space {u in M_t : E[w^T u] >= 0} in eligible coordinates."""
    tree = w.tree
    nodes = tree.nodes_at(w.time)
    coeffs = tuple(tree.prob(n) * w[n][i] for n in nodes for i in range(m))
    if not any(coeffs):
        raise DualVariableError("weight vector is orthogonal to all eligible portfolios")
    return Polyhedron.from_halfspaces([(coeffs, 0)], len(nodes) * m)


def halfspace_Gamma(w: AdaptedVector, m: int) -> Dict[str, Polyhedron]:
    """Nodewise half-spaces {u in R^m : w(n)^T u >= 0}."""
    if _in_m_perp(w, m):
        raise DualVariableError("weight vector is orthogonal to all eligible portfolios")
    out = {}
    for node in w.tree.nodes_at(w.time):
        coeffs = w[node][:m]
        if any(coeffs):
            out[node] = Polyhedron.from_halfspaces([(coeffs, 0)], m)
        else:
            out[node] = Polyhedron.full_space(m)
    return out


def evaluate_dual_representation(
    penalties: Sequence[PenaltyValue], X: AdaptedVector, m: int
) -> Polyhedron:
    """Intersection of the penalty-shifted dual half-spaces at the pairs' base
    time, evaluated on a horizon payoff; a polyhedron in M_t coordinates."""
    if not penalties:
        raise ValueError("empty family of dual pairs")
    t = penalties[0].pair.t
    tree = penalties[0].pair.tree
    if any(p.pair.t != t or p.pair.tree is not tree for p in penalties):
        raise ValueError("dual pairs must share a base time and tree")
    nodes = tree.nodes_at(t)
    dim = len(nodes) * m
    rows = []
    neg_X = -X
    for pen in penalties:
        if pen.scalar.is_neg_inf:
            continue  # the penalty half-space is all of M_t: vacuous constraint
        pair = pen.pair
        ex = conditional_expectation(neg_X, pair.Q, t)
        offset = pen.scalar.value + sum(
            tree.prob(n) * sum(pair.w[n][i] * ex[n][i] for i in range(tree.d))
            for n in nodes
        )
        coeffs = tuple(tree.prob(n) * pair.w[n][i] for n in nodes for i in range(m))
        if not any(coeffs):
            raise DualVariableError("weight vector is orthogonal to all eligible portfolios")
        rows.append((coeffs, offset))
    return Polyhedron.from_halfspaces(rows, dim)


def H_operator(
    D: Callable[[DualPair], bool], s: int, m: int
) -> Callable[[DualPair], bool]:
    """Pull a predicate over time-s pairs back to time-t pairs through the
    weight-process/measure-modification projection."""

    def predicate(pair: DualPair) -> bool:
        if s <= pair.t:
            raise ValueError("H operator needs a strictly later target time")
        if not in_W(pair, m):
            return False
        return D(project_pair(pair, s))

    return predicate


def pair_from_functional(
    tree: ScenarioTree, direction: Sequence, t: int, m: int
) -> DualPair:
    """Lift a nonnegative payoff-coordinate functional to a time-t dual pair
    whose horizon weight process reproduces exactly that functional.

    The direction is read as a . X >= b constraint normal in raw payoff
    coordinates; probabilities are divided out, the weight is the conditional
    aggregate at time t, and the measure carries the remaining density ratios
    (with unit fill-in below nodes where the aggregate vanishes).
    """
    direction = [Fraction(x) for x in direction]
    if len(direction) != tree.payoff_dim:
        raise ValueError("direction must be in payoff coordinates")
    if any(x < 0 for x in direction):
        raise DualVariableError("only nonnegative functionals lift to dual pairs")
    Y = {
        leaf: tuple(
            direction[tree.payoff_index(leaf, i)] / tree.prob(leaf) for i in range(tree.d)
        )
        for leaf in tree.leaves
    }
    w_values = {}
    for node in tree.nodes_at(t):
        w_values[node] = tuple(
            sum(tree.cond_prob(leaf, node) * Y[leaf][i] for leaf in tree.leaves_under(node))
            for i in range(tree.d)
        )
    w = AdaptedVector(tree, t, w_values)
    if _in_m_perp(w, m):
        raise DualVariableError("functional is orthogonal to all eligible portfolios")
    densities = {}
    for leaf in tree.leaves:
        anc = tree.ancestor(leaf, t)
        densities[leaf] = tuple(
            Y[leaf][i] / w_values[anc][i] if w_values[anc][i] > 0 else Fraction(1)
            for i in range(tree.d)
        )
    return DualPair(VectorMeasure(tree, densities), t, w)
