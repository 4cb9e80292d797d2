"""Machine checks of the time-consistency equivalences.

Each check computes both sides of one equivalence exactly and reports a
verdict; failures carry a witness that re-verifies independently of the check
that produced it.  For polyhedral acceptance sets the dual-pair sweeps run
over the facet-derived family, which is a provably sufficient finite family:
two polyhedra agree if and only if their support values agree on the facet
normals of both.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .duality import (
    DualPair,
    DualVariableError,
    in_W,
    pair_from_functional,
    penalty_value,
    conditional_penalty_value,
    project_pair,
    weight_process,
)
from .measures import (
    AdaptedVector,
    ComposedMeasure,
    DynamicRiskMeasure,
    EntropicMeasure,
    ModelInconsistencyError,
    NotPolyhedralError,
    q_expectation_float,
    relative_entropy,
)
from .polyhedra import Polyhedron, project_halfspaces
from .rationals import ExtRat
from .tree import ScenarioTree, VectorMeasure, paste

CLOSEDNESS_NOTE = (
    "closedness of A_{t,s} + A_s: automatic, Minkowski sums of polyhedra are closed"
)
CONDITIONAL_DUAL_NOTE = (
    "conditional dual representation over equivalent measures: assumed, not verified"
)


@dataclass
class Witness:
    """Concrete object demonstrating a failed check; ``reverify()`` re-runs the
    specific membership or equality on the witness alone."""

    kind: str
    data: Dict[str, object]
    _reverify: Callable[[], bool] = field(repr=False, default=lambda: True)

    def reverify(self) -> bool:
        return self._reverify()


@dataclass
class ConsistencyReport:
    check: str
    verdict: str  # "pass" | "fail" | "inapplicable"
    t: int
    s: Optional[int] = None
    hypotheses_discharged: Tuple[str, ...] = ()
    assumptions: Tuple[str, ...] = ()
    witness: Optional[Witness] = None
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


# -- helpers ---------------------------------------------------------------------


def _point_in_difference(
    big: Polyhedron, small: Polyhedron
) -> Optional[Tuple[Fraction, ...]]:
    """A point of ``big`` outside ``small`` (None if big is contained)."""
    from .dd import dot

    for a, b in small.halfspaces:
        for v in big.vertices:
            if dot(a, v) < b:
                return v
        for r in big.rays:
            ar = dot(a, r)
            if ar < 0:
                v0 = big.vertices[0]
                scale = (Fraction(dot(a, v0)) - b) / (-ar) + 1
                return tuple(x + scale * y for x, y in zip(v0, r))
    return None


def _set_difference_witness(
    lhs_name: str, lhs: Polyhedron, rhs_name: str, rhs: Polyhedron
) -> Witness:
    point = _point_in_difference(lhs, rhs)
    if point is not None:
        inside, outside, member = lhs_name, rhs_name, point
        separating = rhs.separating_direction(point)
        target = rhs
    else:
        point = _point_in_difference(rhs, lhs)
        inside, outside, member = rhs_name, lhs_name, point
        separating = lhs.separating_direction(point)
        target = lhs

    def reverify() -> bool:
        a, b = separating
        from .dd import dot

        return dot(a, member) < b and target.support_value(a) >= b

    return Witness(
        "set-difference",
        {
            "point": member,
            "member_of": inside,
            "not_member_of": outside,
            "separating_direction": separating,
            "lhs": lhs,
            "rhs": rhs,
        },
        reverify,
    )


def facet_dual_pairs(
    tree: ScenarioTree, polys: Sequence[Polyhedron], t: int, m: int
) -> List[DualPair]:
    """Dual pairs lifted from the nonnegative facet normals of the given
    payoff-coordinate polyhedra (deduplicated, deterministic order)."""
    seen = {}
    for poly in polys:
        for a, b in poly.halfspaces:
            if a in seen or any(x < 0 for x in a):
                continue
            try:
                seen[a] = pair_from_functional(tree, a, t, m)
            except DualVariableError:
                continue
    return list(seen.values())


def random_positive_measures(
    tree: ScenarioTree, t: int, count: int, seed: int = 0
) -> List[VectorMeasure]:
    """Strictly positive measures equal to P on time-t events, from a seeded
    deterministic generator (used for the entropic sweeps)."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        raw = {
            leaf: [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(tree.d)]
            for leaf in tree.leaves
        }
        densities = {}
        for node in tree.nodes_at(t):
            leaves = tree.leaves_under(node)
            for i in range(tree.d):
                total = sum(tree.cond_prob(leaf, node) * raw[leaf][i] for leaf in leaves)
                for leaf in leaves:
                    densities.setdefault(leaf, [Fraction(0)] * tree.d)
                    densities[leaf][i] = raw[leaf][i] / total
        out.append(VectorMeasure(tree, densities))
    return out


# -- acceptance-set decomposition and recursion -----------------------------------


def check_mptc_acceptance(measure: DynamicRiskMeasure, t: int, s: int) -> ConsistencyReport:
    """Exact test of the acceptance-set decomposition A_t = A_{t,s} + A_s."""
    if not measure.is_polyhedral:
        return ConsistencyReport(
            "mptc-acceptance",
            "inapplicable",
            t,
            s,
            details={"reason": "non-polyhedral measure; use the cocycle check"},
        )
    if not t < s <= measure.tree.horizon:
        raise ValueError("need t < s <= horizon")
    A_t = measure.acceptance_set(t)
    A_ts = measure.stepped_acceptance_set(t, s)
    A_s = measure.acceptance_set(s)
    total = A_ts.minkowski_sum(A_s)
    if A_t.set_equal(total):
        return ConsistencyReport(
            "mptc-acceptance", "pass", t, s, hypotheses_discharged=(CLOSEDNESS_NOTE,)
        )
    witness = _set_difference_witness("A_t", A_t, "A_{t,s}+A_s", total)
    return ConsistencyReport(
        "mptc-acceptance",
        "fail",
        t,
        s,
        hypotheses_discharged=(CLOSEDNESS_NOTE,),
        witness=witness,
    )


def find_inconsistency_witness(
    measure: DynamicRiskMeasure,
    t: int,
    s: int,
    values: Sequence = (0, 1, -1, Fraction(1, 2), Fraction(-1, 2), 2, -2),
):
    """Deterministic sweep for a payoff separating A_t from A_{t,s} + A_s.

    Sweeps the rational grid values**payoff_dim in lexicographic order (the
    documented ordering), then falls back to the canonical generators of the
    two sets.  Returns (payoff, member_of, separating_direction).
    """
    tree = measure.tree
    A_t = measure.acceptance_set(t)
    total = measure.stepped_acceptance_set(t, s).minkowski_sum(measure.acceptance_set(s))
    for cand in iter_product(*[values] * tree.payoff_dim):
        point = tuple(Fraction(x) for x in cand)
        in_lhs = A_t.contains_point(point)
        in_rhs = total.contains_point(point)
        if in_lhs != in_rhs:
            inside, outside = ("A_t", total) if in_lhs else ("A_{t,s}+A_s", A_t)
            return point, inside, outside.separating_direction(point)
    point = _point_in_difference(A_t, total)
    if point is not None:
        return point, "A_t", total.separating_direction(point)
    point = _point_in_difference(total, A_t)
    if point is not None:
        return point, "A_{t,s}+A_s", A_t.separating_direction(point)
    return None


def check_recursion(
    measure: DynamicRiskMeasure, X: AdaptedVector, t: int, s: int
) -> ConsistencyReport:
    """Exact test of the recursion: the time-t value of X equals the time-t
    value of the (negated) time-s value, computed as a lifted projection."""
    if not measure.is_polyhedral:
        return ConsistencyReport(
            "recursion",
            "inapplicable",
            t,
            s,
            details={"reason": "non-polyhedral measure; use the cocycle check"},
        )
    tree, m = measure.tree, measure.m
    if not t < s <= tree.horizon:
        raise ValueError("need t < s <= horizon")
    nodes_t, nodes_s = tree.nodes_at(t), tree.nodes_at(s)
    dim_u, dim_z = len(nodes_t) * m, len(nodes_s) * m

    vals_t = measure.value(X, t)
    rows = []
    for k, n in enumerate(nodes_t):
        for a, b in vals_t[n].halfspaces:
            row = [0] * dim_u
            row[k * m : (k + 1) * m] = list(a)
            rows.append((tuple(row), b))
    left = Polyhedron.from_halfspaces(rows, dim_u)

    vals_s = measure.value(X, s)
    rows = []
    for k, n in enumerate(nodes_s):
        for a, b in vals_s[n].halfspaces:
            row = [0] * (dim_u + dim_z)
            row[dim_u + k * m : dim_u + (k + 1) * m] = list(a)
            rows.append((tuple(row), b))
    A_t = measure.acceptance_set(t)
    pos_t = {n: k for k, n in enumerate(nodes_t)}
    pos_s = {n: k for k, n in enumerate(nodes_s)}
    for a, b in A_t.halfspaces:
        row = [Fraction(0)] * (dim_u + dim_z)
        for leaf in tree.leaves:
            for i in range(m):
                coeff = a[tree.payoff_index(leaf, i)]
                if coeff:
                    row[pos_t[tree.ancestor(leaf, t)] * m + i] += coeff
                    row[dim_u + pos_s[tree.ancestor(leaf, s)] * m + i] -= coeff
        rows.append((tuple(row), b))
    right = project_halfspaces(rows, dim_u + dim_z, range(dim_u))

    if left.set_equal(right):
        return ConsistencyReport("recursion", "pass", t, s)
    direction = (
        "value(X) strictly contains the recursed value"
        if left.contains_set(right)
        else "recursed value strictly contains value(X)"
        if right.contains_set(left)
        else "values are incomparable"
    )
    witness = _set_difference_witness("R_t(X)", left, "R_t(-R_s(X))", right)
    return ConsistencyReport(
        "recursion", "fail", t, s, witness=witness, details={"direction": direction}
    )


# -- cocycle ----------------------------------------------------------------------


def _scalar_cocycle(
    measure: DynamicRiskMeasure, pair: DualPair, t: int, s: int
) -> Tuple[ExtRat, ExtRat, ExtRat]:
    b_t = penalty_value(measure.acceptance_set(t), pair).scalar
    b_ts = penalty_value(measure.stepped_acceptance_set(t, s), pair).scalar
    b_s = penalty_value(measure.acceptance_set(s), project_pair(pair, s)).scalar
    return b_t, b_ts, b_s


def check_cocycle(
    measure: DynamicRiskMeasure,
    t: int,
    s: int,
    pair: Optional[DualPair] = None,
    tol: float = 1e-10,
    measures: Optional[Sequence[VectorMeasure]] = None,
) -> ConsistencyReport:
    """Additivity of minimal-penalty offsets across the time split (t, s).

    Polyhedral measures: exact rational scalar equality, swept over the
    facet-derived dual family when no pair is given, plus the nodewise
    conditional variant.  Entropic measure: relative-entropy chain rule per
    node and component within ``tol``, over the given measures (or a seeded
    deterministic family).
    """
    tree = measure.tree
    if not t < s <= tree.horizon:
        raise ValueError("need t < s <= horizon")
    if not measure.is_polyhedral:
        return _check_cocycle_entropic(measure, t, s, pair, tol, measures)

    if pair is not None:
        membership = in_W(pair, measure.m)
        if not membership:
            raise DualVariableError(
                "pair outside the dual-variable set: " + "; ".join(membership.violations)
            )
        pairs = [pair]
        family = "caller-supplied pair"
    else:
        A_ts = measure.stepped_acceptance_set(t, s)
        total = A_ts.minkowski_sum(measure.acceptance_set(s))
        pairs = facet_dual_pairs(
            tree, [measure.acceptance_set(t), A_ts, total], t, measure.m
        )
        family = f"facet-derived family ({len(pairs)} pairs)"
    strictly_positive = True
    for p in pairs:
        b_t, b_ts, b_s = _scalar_cocycle(measure, p, t, s)
        if b_t != b_ts + b_s:
            witness = Witness(
                "cocycle-scalar",
                {"pair": p, "b_t": b_t, "b_ts": b_ts, "b_s": b_s},
                lambda p=p: _scalar_cocycle(measure, p, t, s)[0]
                != _scalar_cocycle(measure, p, t, s)[1] + _scalar_cocycle(measure, p, t, s)[2],
            )
            return ConsistencyReport(
                "cocycle",
                "fail",
                t,
                s,
                hypotheses_discharged=(CLOSEDNESS_NOTE,),
                witness=witness,
                details={"family": family},
            )
        c_t = conditional_penalty_value(measure.acceptance_set(t), p).scalars
        c_ts = conditional_penalty_value(measure.stepped_acceptance_set(t, s), p).scalars
        c_s = conditional_penalty_value(measure.acceptance_set(s), p).scalars
        for node in tree.nodes_at(t):
            if c_t[node] != c_ts[node] + c_s[node]:
                witness = Witness(
                    "cocycle-conditional",
                    {"pair": p, "node": node, "c_t": c_t[node], "c_ts": c_ts[node], "c_s": c_s[node]},
                    lambda: c_t[node] != c_ts[node] + c_s[node],
                )
                return ConsistencyReport(
                    "cocycle",
                    "fail",
                    t,
                    s,
                    hypotheses_discharged=(CLOSEDNESS_NOTE,),
                    witness=witness,
                    details={"family": family, "variant": "conditional"},
                )
        if any(x == 0 for leaf in tree.leaves for x in p.Q.densities[leaf]):
            strictly_positive = False
    assumptions = () if strictly_positive else (CONDITIONAL_DUAL_NOTE,)
    return ConsistencyReport(
        "cocycle",
        "pass",
        t,
        s,
        hypotheses_discharged=(CLOSEDNESS_NOTE,),
        assumptions=assumptions,
        details={"family": family},
    )


def _check_cocycle_entropic(
    measure: EntropicMeasure,
    t: int,
    s: int,
    pair: Optional[DualPair],
    tol: float,
    measures: Optional[Sequence[VectorMeasure]],
) -> ConsistencyReport:
    tree = measure.tree
    if pair is not None:
        membership = in_W(pair, measure.m)
        if not membership:
            raise DualVariableError(
                "pair outside the dual-variable set: " + "; ".join(membership.violations)
            )
        qs = [pair.Q]
    elif measures is not None:
        qs = list(measures)
    else:
        qs = random_positive_measures(tree, t, count=20, seed=20240101)
    worst = 0.0
    for Q in qs:
        h_tT = relative_entropy(Q, t, tree.horizon)
        h_ts = relative_entropy(Q, t, s)
        h_sT = relative_entropy(Q, s, tree.horizon)
        pushed = q_expectation_float(Q, t, h_sT, s)
        for node in tree.nodes_at(t):
            for i in range(tree.d):
                residual = abs(h_tT[node][i] - (h_ts[node][i] + pushed[node][i]))
                worst = max(worst, residual)
                if residual > tol:
                    witness = Witness(
                        "entropic-cocycle",
                        {"measure": Q, "node": node, "component": i, "residual": residual},
                        lambda r=residual: r > tol,
                    )
                    return ConsistencyReport(
                        "cocycle", "fail", t, s, witness=witness, details={"tol": tol}
                    )
    return ConsistencyReport(
        "cocycle",
        "pass",
        t,
        s,
        details={"tol": tol, "max_residual": worst, "measures": len(qs)},
    )


# -- stability and maximal dual sets ------------------------------------------------


def _require_coherent(measure: DynamicRiskMeasure, t: int, s: int) -> None:
    if not measure.is_polyhedral:
        raise NotPolyhedralError("stability checks require a polyhedral coherent measure")
    for poly in (
        measure.acceptance_set(t),
        measure.stepped_acceptance_set(t, s),
        measure.acceptance_set(s),
    ):
        if not poly.is_cone():
            raise ValueError("stability checks require a coherent (conical) measure")


def default_dual_family(
    measure: DynamicRiskMeasure, t: int, s: int
) -> Tuple[List[DualPair], List[VectorMeasure]]:
    """Facet-derived time-t pairs plus pasting candidates at time s."""
    tree, m = measure.tree, measure.m
    pairs = facet_dual_pairs(
        tree,
        [measure.acceptance_set(t), measure.stepped_acceptance_set(t, s)],
        t,
        m,
    )
    ones = AdaptedVector.constant(tree, t, (1,) * tree.d)
    pairs.append(DualPair(VectorMeasure.physical(tree), t, ones))
    s_pairs = facet_dual_pairs(tree, [measure.acceptance_set(s)], s, m)
    measures = [VectorMeasure.physical(tree)]
    measures += [p.Q for p in s_pairs]
    seen = set()
    unique = []
    for q in measures:
        key = tuple(sorted((leaf, q.densities[leaf]) for leaf in tree.leaves))
        if key not in seen:
            seen.add(key)
            unique.append(q)
    return pairs, unique


def check_stability(
    measure: DynamicRiskMeasure,
    t: int,
    s: int,
    pairs: Optional[Sequence[DualPair]] = None,
    paste_measures: Optional[Sequence[VectorMeasure]] = None,
) -> ConsistencyReport:
    """Stability of the maximal dual set under projection and pasting,
    tested over the supplied (or facet-derived) family."""
    tree, m = measure.tree, measure.m
    if not t < s <= tree.horizon:
        raise ValueError("need t < s <= horizon")
    _require_coherent(measure, t, s)
    if pairs is None or paste_measures is None:
        dpairs, dmeasures = default_dual_family(measure, t, s)
        pairs = dpairs if pairs is None else list(pairs)
        paste_measures = dmeasures if paste_measures is None else list(paste_measures)
    A_t = measure.acceptance_set(t)
    A_ts = measure.stepped_acceptance_set(t, s)
    A_s = measure.acceptance_set(s)

    checked = 0
    for pair in pairs:
        if in_W(pair, m, acceptance=A_t):
            checked += 1
            projected = project_pair(pair, s)
            if not in_W(projected, m, acceptance=A_s):
                witness = Witness(
                    "stability-projection",
                    {"pair": pair, "projected": projected},
                    lambda pr=projected: not in_W(pr, m, acceptance=A_s).ok,
                )
                return ConsistencyReport(
                    "stability", "fail", t, s, witness=witness,
                    details={"part": "projection"},
                )
    for pair in pairs:
        if not in_W(pair, m, stepped_to=s, acceptance=A_ts):
            continue
        wts = weight_process(pair, s)
        candidates = list(paste_measures) + [project_pair(pair, s).Q]
        for R in candidates:
            try:
                cand = DualPair(R, s, wts)
            except ValueError:
                continue
            if not in_W(cand, m, acceptance=A_s):
                continue
            checked += 1
            pasted = DualPair(paste(pair.Q, R, s), t, pair.w)
            if not in_W(pasted, m, acceptance=A_t):
                witness = Witness(
                    "stability-pasting",
                    {"pair": pair, "pasting_measure": R, "pasted": pasted},
                    lambda pp=pasted: not in_W(pp, m, acceptance=A_t).ok,
                )
                return ConsistencyReport(
                    "stability", "fail", t, s, witness=witness,
                    details={"part": "pasting"},
                )
    return ConsistencyReport(
        "stability", "pass", t, s,
        details={"pairs": len(pairs), "paste_measures": len(paste_measures),
                 "memberships_checked": checked},
    )


def check_Wmax_decomposition(
    measure: DynamicRiskMeasure,
    t: int,
    s: int,
    pairs: Optional[Sequence[DualPair]] = None,
) -> ConsistencyReport:
    """Membership equivalence: a pair is maximal at t iff it is stepped-maximal
    for (t, s) and its projection is maximal at s; tested pairwise."""
    tree, m = measure.tree, measure.m
    if not t < s <= tree.horizon:
        raise ValueError("need t < s <= horizon")
    _require_coherent(measure, t, s)
    if pairs is None:
        dpairs, dmeasures = default_dual_family(measure, t, s)
        pairs = list(dpairs)
        # pasted combinations probe the decomposition away from the facets
        for pair in dpairs:
            for R in dmeasures:
                if in_W(pair, m, stepped_to=s):
                    pairs.append(DualPair(paste(pair.Q, R, s), t, pair.w))
    A_t = measure.acceptance_set(t)
    A_ts = measure.stepped_acceptance_set(t, s)
    A_s = measure.acceptance_set(s)
    for pair in pairs:
        if not in_W(pair, m):
            continue
        lhs = bool(in_W(pair, m, acceptance=A_t))
        rhs = bool(in_W(pair, m, stepped_to=s, acceptance=A_ts)) and bool(
            in_W(project_pair(pair, s), m, acceptance=A_s)
        )
        if lhs != rhs:
            witness = Witness(
                "wmax-decomposition",
                {"pair": pair, "in_W_t_max": lhs, "in_decomposed": rhs},
                lambda p=pair, l=lhs: bool(in_W(p, m, acceptance=A_t)) is l,
            )
            return ConsistencyReport(
                "wmax-decomposition", "fail", t, s, witness=witness
            )
    return ConsistencyReport(
        "wmax-decomposition", "pass", t, s, details={"pairs": len(pairs)}
    )


# -- composition --------------------------------------------------------------------


def compose(measure: DynamicRiskMeasure, assert_consistent: bool = True) -> ComposedMeasure:
    """Backward composition of the one-step family of a measure.

    The composed family is multiportfolio time consistent by construction;
    this is asserted on every one-step split.  Finiteness at zero is checked,
    not assumed: an empty composed value raises ModelInconsistencyError.
    """
    if not measure.is_polyhedral:
        raise NotPolyhedralError("composition requires polyhedral one-step acceptance sets")
    tree, m = measure.tree, measure.m
    composed = ComposedMeasure(
        tree,
        m,
        stepped_builder=lambda t, node: measure.stepped_acceptance_set(t, t + 1, node),
        terminal_builder=lambda leaf: measure.acceptance_set(tree.horizon, leaf),
    )
    zero = AdaptedVector.zero(tree, tree.horizon)
    for t in range(tree.horizon + 1):
        for node, poly in composed.value(zero, t).items():
            if poly.is_empty:
                raise ModelInconsistencyError(
                    f"composed family is not finite at zero: empty value at node {node!r}"
                )
            if not poly.halfspaces:
                raise ModelInconsistencyError(
                    f"composed family is not finite at zero: value at node {node!r} "
                    "is the whole eligible space"
                )
    if assert_consistent:
        for t in range(tree.horizon):
            report = check_mptc_acceptance(composed, t, t + 1)
            if not report.passed:
                raise AssertionError(
                    f"composed family failed the acceptance decomposition at ({t}, {t + 1})"
                )
    return composed
