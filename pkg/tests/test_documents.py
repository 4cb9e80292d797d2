import json
from fractions import Fraction as F

import pytest

from setrisk import Polyhedron
from setrisk.documents import (
    DocumentError,
    Workspace,
    avar_params_from_doc,
    avar_params_to_doc,
    dual_pair_from_doc,
    dual_pair_to_doc,
    dumps,
    measure_from_doc,
    measure_to_doc,
    payoff_from_doc,
    payoff_to_doc,
    plot_data_csv,
    polyhedron_from_doc,
    polyhedron_to_doc,
    tree_from_doc,
    tree_to_doc,
)

from conftest import FIXTURES, make_measure


def test_tree_round_trip(threeperiod_d2):
    doc = tree_to_doc(threeperiod_d2)
    tree2 = tree_from_doc(doc)
    assert tree_to_doc(tree2) == doc
    assert tree2.leaves == threeperiod_d2.leaves
    assert tree2.prob("abb") == threeperiod_d2.prob("abb")


def test_payoff_round_trip(binomial_d2, payoff_d2):
    doc = payoff_to_doc(payoff_d2)
    again = payoff_from_doc(binomial_d2, doc, "payoffs.X")
    assert again == payoff_d2
    assert payoff_to_doc(again) == doc


def test_measure_round_trip(binomial_d2):
    Q = make_measure(binomial_d2, {"uu": (3, 1), "ud": (1, 2), "du": (2, 1), "dd": (1, 1)})
    doc = measure_to_doc(Q)
    assert measure_from_doc(binomial_d2, doc, "measures.Q") == Q


def test_polyhedron_round_trip(bidask_cone):
    doc = polyhedron_to_doc(bidask_cone)
    again = polyhedron_from_doc(doc)
    assert again == bidask_cone
    assert polyhedron_to_doc(again) == doc


def test_polyhedron_doc_detects_rep_mismatch(bidask_cone):
    doc = polyhedron_to_doc(bidask_cone)
    doc["vrep"]["rays"] = doc["vrep"]["rays"][:-1]
    with pytest.raises(DocumentError, match="different sets"):
        polyhedron_from_doc(doc)


def test_polyhedron_doc_single_rep(bidask_cone):
    doc = polyhedron_to_doc(bidask_cone)
    del doc["vrep"]
    assert polyhedron_from_doc(doc) == bidask_cone
    doc2 = polyhedron_to_doc(bidask_cone)
    del doc2["hrep"]
    assert polyhedron_from_doc(doc2) == bidask_cone


def test_avar_params_round_trip(binomial_d1, lam_half_d1):
    doc = avar_params_to_doc(lam_half_d1)
    again = avar_params_from_doc(binomial_d1, doc, "avar_params.half")
    assert avar_params_to_doc(again) == doc


def test_dual_pair_round_trip(binomial_d2):
    Q = make_measure(binomial_d2, {"uu": (3, 1), "ud": (1, 2), "du": (2, 1), "dd": (1, 1)})
    pair_doc = {
        "t": 1,
        "w": {"u": ["1/1", "0/1"], "d": ["2/1", "1/3"]},
        "Q": measure_to_doc(Q)["densities"],
    }
    pair = dual_pair_from_doc(binomial_d2, pair_doc, "dual_pairs.p")
    assert dual_pair_to_doc(pair) == pair_doc


def test_workspace_round_trip():
    ws = Workspace.load(str(FIXTURES / "binomial_d2.json"))
    doc = ws.to_doc()
    ws2 = Workspace.from_doc(json.loads(dumps(doc)))
    assert ws2.to_doc() == doc
    assert dumps(ws2.to_doc()) == dumps(doc)


def test_path_precise_errors(binomial_d2):
    with pytest.raises(DocumentError, match=r"payoffs\.X"):
        payoff_from_doc(binomial_d2, {"time": 2, "values": {}}, "payoffs.X")
    with pytest.raises(DocumentError, match=r"tree\.nodes\[1\]"):
        tree_from_doc(
            {"d": 1, "nodes": [{"id": "r", "parent": None, "time": 0}, {"id": "x"}]}
        )
    with pytest.raises(DocumentError, match=r"measures\.Q\.densities\[uu\]"):
        measure_from_doc(
            binomial_d2,
            {"densities": {"uu": ["nope", "1/1"], "ud": ["1/1", "1/1"],
                           "du": ["1/1", "1/1"], "dd": ["1/1", "1/1"]}},
            "measures.Q",
        )


def test_dumps_is_canonical():
    doc_a = {"b": 1, "a": [F(1, 2).denominator]}
    doc_b = {"a": [2], "b": 1}
    assert dumps(doc_a) == dumps(doc_b)
    assert dumps(doc_a).endswith("\n")


def test_plot_data_csv_half_line():
    p = Polyhedron.from_generators([(1, F(1, 3))], [(1, 0)], dim=2)
    csv = plot_data_csv(polyhedron_to_doc(p), [0, 1])
    lines = csv.strip().split("\n")
    assert lines[0] == "kind,c0,c1"
    assert lines[1] == "vertex,1,0.333333333333"
    assert lines[2] == "ray,1,0"


def test_plot_data_csv_empty_polyhedron():
    p = Polyhedron.empty(2)
    csv = plot_data_csv(polyhedron_to_doc(p), [0, 1])
    assert csv == "kind,c0,c1\n"


def test_plot_data_rejects_bad_coords(bidask_cone):
    doc = polyhedron_to_doc(bidask_cone)
    with pytest.raises(ValueError):
        plot_data_csv(doc, [0])
    with pytest.raises(ValueError):
        plot_data_csv(doc, [0, 5])
