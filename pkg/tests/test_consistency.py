import random
from fractions import Fraction as F

import pytest

from setrisk import (
    AdaptedVector,
    AvarMeasure,
    AvarParams,
    DualPair,
    EntropicMeasure,
    EntropicParams,
    NotPolyhedralError,
    Polyhedron,
    ScenarioTree,
    VectorMeasure,
    check_cocycle,
    check_mptc_acceptance,
    check_recursion,
    check_stability,
    check_Wmax_decomposition,
    compose,
    composed_avar_measure,
    composed_avar_value,
    find_inconsistency_witness,
    in_W,
    penalty_value,
    random_positive_measures,
    shp_value,
)
from setrisk.consistency import facet_dual_pairs

from conftest import make_measure


def rand_payoff(tree, rng, span=3):
    return AdaptedVector(
        tree,
        tree.horizon,
        {
            leaf: tuple(F(rng.randint(-span, span)) for _ in range(tree.d))
            for leaf in tree.leaves
        },
    )


# -- acceptance decomposition ----------------------------------------------------


def test_shp_acceptance_decomposition_passes(shp_measure):
    for t, s in [(0, 1), (0, 2), (1, 2)]:
        report = check_mptc_acceptance(shp_measure, t, s)
        assert report.passed
        assert any("closedness" in h for h in report.hypotheses_discharged)


def test_avar_acceptance_decomposition_fails_with_witness(avar_measure):
    report = check_mptc_acceptance(avar_measure, 0, 1)
    assert report.verdict == "fail"
    w = report.witness
    assert w is not None and w.reverify()
    point = w.data["point"]
    assert avar_measure.acceptance_set(0).contains_point(point)
    lhs_sum = avar_measure.stepped_acceptance_set(0, 1).minkowski_sum(
        avar_measure.acceptance_set(1)
    )
    assert not lhs_sum.contains_point(point)


def test_composed_avar_acceptance_decomposition_passes(binomial_d1, lam_half_d1):
    composed = composed_avar_measure(binomial_d1, lam_half_d1)
    for t, s in [(0, 1), (0, 2), (1, 2)]:
        assert check_mptc_acceptance(composed, t, s).passed


def test_inconsistency_witness_sweep(avar_measure):
    found = find_inconsistency_witness(avar_measure, 0, 1)
    assert found is not None
    point, member_of, (a, b) = found
    assert member_of == "A_t"
    # the separating direction re-verifies as an exact certificate
    from setrisk.dd import dot

    assert dot(a, point) < b
    total = avar_measure.stepped_acceptance_set(0, 1).minkowski_sum(
        avar_measure.acceptance_set(1)
    )
    assert total.support_value(a) >= b


def test_mptc_inapplicable_for_entropic(entropic_measure):
    report = check_mptc_acceptance(entropic_measure, 0, 1)
    assert report.verdict == "inapplicable"


# -- recursion ----------------------------------------------------------------------


def test_shp_recursion_passes(shp_measure, binomial_d2):
    rng = random.Random(99)
    for _ in range(3):
        X = rand_payoff(binomial_d2, rng)
        assert check_recursion(shp_measure, X, 0, 1).passed
        assert check_recursion(shp_measure, X, 0, 2).passed
        assert check_recursion(shp_measure, X, 1, 2).passed


def test_avar_recursion_fails_with_direction(avar_measure, payoff_d1):
    report = check_recursion(avar_measure, payoff_d1, 0, 1)
    assert report.verdict == "fail"
    assert report.details["direction"] == "value(X) strictly contains the recursed value"
    assert report.witness.reverify()


def test_recursion_rejects_equal_times(shp_measure, payoff_d2):
    with pytest.raises(ValueError):
        check_recursion(shp_measure, payoff_d2, 1, 1)


# -- cocycle ---------------------------------------------------------------------------


def test_shp_cocycle_passes_on_family(shp_measure):
    for t, s in [(0, 1), (0, 2), (1, 2)]:
        report = check_cocycle(shp_measure, t, s)
        assert report.passed


def test_shp_cocycle_single_coherent_pair(shp_measure, binomial_d2):
    pair = DualPair(
        VectorMeasure.physical(binomial_d2),
        0,
        AdaptedVector.constant(binomial_d2, 0, (1, 1)),
    )
    report = check_cocycle(shp_measure, 0, 2, pair=pair)
    assert report.passed


def test_avar_cocycle_fails(avar_measure):
    report = check_cocycle(avar_measure, 0, 1)
    assert report.verdict == "fail"
    data = report.witness.data
    assert data["b_t"] != data["b_ts"] + data["b_s"]
    assert report.witness.reverify()


def test_cocycle_rejects_pair_outside_W(shp_measure, binomial_d2):
    from setrisk import DualVariableError

    bad = DualPair(
        VectorMeasure.physical(binomial_d2),
        0,
        AdaptedVector.constant(binomial_d2, 0, (-1, 1)),
    )
    with pytest.raises(DualVariableError):
        check_cocycle(shp_measure, 0, 1, pair=bad)


def test_cocycle_scalars_scale_with_weight(shp_measure, binomial_d2):
    from setrisk.consistency import _scalar_cocycle

    pair = DualPair(
        VectorMeasure.physical(binomial_d2),
        0,
        AdaptedVector.constant(binomial_d2, 0, (1, 1)),
    )
    doubled = DualPair(pair.Q, 0, pair.w.scale(2))
    b1 = _scalar_cocycle(shp_measure, pair, 0, 1)
    b2 = _scalar_cocycle(shp_measure, doubled, 0, 1)
    for x, y in zip(b1, b2):
        if x.is_finite:
            assert y.value == 2 * x.value
        else:
            assert y == x


def test_entropic_cocycle_random_measures(entropic_measure, threeperiod_d2):
    qs = random_positive_measures(threeperiod_d2, 0, count=25, seed=77)
    for t, s in [(0, 1), (0, 2), (1, 2), (1, 3)]:
        qs_t = random_positive_measures(threeperiod_d2, t, count=10, seed=78 + t)
        report = check_cocycle(entropic_measure, t, s, measures=qs_t)
        assert report.passed
        assert report.details["max_residual"] <= 1e-10
    report = check_cocycle(entropic_measure, 0, 2, measures=qs)
    assert report.passed


def test_entropic_cocycle_tolerance_flag(entropic_measure):
    strict = check_cocycle(entropic_measure, 0, 1, tol=1e-30)
    # float arithmetic cannot meet an impossible tolerance on every fixture
    loose = check_cocycle(entropic_measure, 0, 1, tol=1e-6)
    assert loose.passed
    assert strict.details.get("tol") == 1e-30 or strict.verdict in ("pass", "fail")


# -- stability and maximal sets -----------------------------------------------------


def test_shp_stability_passes(shp_measure):
    for t, s in [(0, 1), (0, 2), (1, 2)]:
        report = check_stability(shp_measure, t, s)
        assert report.passed
        assert report.details["memberships_checked"] > 0


def test_avar_stability_fails_by_pasting(avar_measure):
    report = check_stability(avar_measure, 0, 1)
    assert report.verdict == "fail"
    assert report.details["part"] == "pasting"
    assert report.witness.reverify()
    pasted = report.witness.data["pasted"]
    assert not in_W(pasted, m=1, acceptance=avar_measure.acceptance_set(0))


def test_pasting_with_projected_measure_reduces_to_projection(shp_measure, binomial_d2):
    from setrisk import paste, project_pair

    Q = make_measure(
        binomial_d2, {"uu": (3, 1), "ud": (1, 2), "du": (2, 1), "dd": (1, 1)}
    )
    pair = DualPair(Q, 0, AdaptedVector.constant(binomial_d2, 0, (1, 1)))
    assert paste(Q, project_pair(pair, 1).Q, 1) == Q


def test_stability_requires_coherent(avar_measure, binomial_d1):
    lam = AvarParams.constant(binomial_d1, F(1, 2))
    # a non-conical acceptance set: shift the AV@R measure's payoff argument
    class Shifted(AvarMeasure):
        def _build_acceptance(self, t, node):
            return super()._build_acceptance(t, node).translate(
                (1,) * (len(self.tree.leaves if node is None else self.tree.leaves_under(node)) * self.tree.d)
            )

    with pytest.raises(ValueError, match="coherent"):
        check_stability(Shifted(binomial_d1, lam), 0, 1)


def test_shp_wmax_decomposition(shp_measure):
    for t, s in [(0, 1), (1, 2)]:
        assert check_Wmax_decomposition(shp_measure, t, s).passed


def test_avar_wmax_decomposition_fails(avar_measure):
    report = check_Wmax_decomposition(avar_measure, 0, 1)
    assert report.verdict == "fail"
    assert report.witness.reverify()


def test_physical_pair_maximal_everywhere_for_shp(shp_measure, binomial_d2):
    pair = DualPair(
        VectorMeasure.physical(binomial_d2),
        0,
        AdaptedVector.constant(binomial_d2, 0, (1, 1)),
    )
    assert in_W(pair, m=2, acceptance=shp_measure.acceptance_set(0))
    assert in_W(pair, m=2, stepped_to=1, acceptance=shp_measure.stepped_acceptance_set(0, 1))
    from setrisk import project_pair

    assert in_W(project_pair(pair, 1), m=2, acceptance=shp_measure.acceptance_set(1))


# -- theorem triangle ------------------------------------------------------------------


@pytest.mark.parametrize("fixture_name", ["shp", "avar", "composed-avar"])
def test_theorem_triangle_agreement(
    fixture_name, shp_measure, avar_measure, binomial_d1, lam_half_d1
):
    measure = {
        "shp": shp_measure,
        "avar": avar_measure,
        "composed-avar": composed_avar_measure(binomial_d1, lam_half_d1),
    }[fixture_name]
    acceptance = check_mptc_acceptance(measure, 0, 1).passed
    cocycle = check_cocycle(measure, 0, 1).passed
    stability = check_stability(measure, 0, 1).passed
    assert acceptance == cocycle == stability


# -- composition -------------------------------------------------------------------------


def test_compose_avar_matches_direct_construction(binomial_d1, lam_half_d1, payoff_d1):
    avar = AvarMeasure(binomial_d1, lam_half_d1)
    composed = compose(avar)
    direct = composed_avar_value(binomial_d1, lam_half_d1, payoff_d1, 0)
    via_compose = composed.value(payoff_d1, 0)
    for n in direct:
        assert direct[n].set_equal(via_compose[n])
    assert composed.acceptance_set(0).set_equal(
        composed_avar_measure(binomial_d1, lam_half_d1).acceptance_set(0)
    )


def test_compose_shp_is_identity(shp_measure, binomial_d2, payoff_d2):
    composed = compose(shp_measure)
    for t in (0, 1):
        a = composed.value(payoff_d2, t)
        b = shp_measure.value(payoff_d2, t)
        for n in a:
            assert a[n].set_equal(b[n])
    assert composed.acceptance_set(0).set_equal(shp_measure.acceptance_set(0))


def test_compose_single_period_is_identity(twoleaf):
    lam = AvarParams.constant(twoleaf, F(1, 4))
    av = AvarMeasure(twoleaf, lam)
    composed = compose(av)
    X = AdaptedVector(twoleaf, 1, {"a": (1,), "b": (-2,)})
    assert composed.value(X, 0)["r"].set_equal(av.value(X, 0)["r"])


def test_compose_idempotent(binomial_d1, lam_half_d1):
    once = compose(AvarMeasure(binomial_d1, lam_half_d1))
    twice = compose(once)
    for t in (0, 1):
        assert once.acceptance_set(t).set_equal(twice.acceptance_set(t))


def test_compose_rejects_entropic(entropic_measure):
    with pytest.raises(NotPolyhedralError):
        compose(entropic_measure)


# -- facet family mechanics ----------------------------------------------------------


def test_facet_family_skips_mixed_sign_rows(avar_measure, binomial_d1):
    A01 = avar_measure.stepped_acceptance_set(0, 1)
    assert any(any(x < 0 for x in a) for a, _ in A01.halfspaces)
    pairs = facet_dual_pairs(binomial_d1, [A01], 0, 1)
    for pair in pairs:
        assert in_W(pair, m=1)


def test_random_positive_measures_are_valid(threeperiod_d2):
    for t in (0, 1):
        for Q in random_positive_measures(threeperiod_d2, t, count=5, seed=5):
            from setrisk import restrict_equals_P

            assert restrict_equals_P(Q, t)
            assert all(
                x > 0 for leaf in threeperiod_d2.leaves for x in Q.densities[leaf]
            )
