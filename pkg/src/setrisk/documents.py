"""JSON document formats and the single-file workspace.

Rationals travel as ``"p/q"`` strings, bit-exact both ways.  Floats appear
only inside entropic result documents and are tagged as such.  Dumps are
canonical (sorted keys, fixed indentation, trailing newline) so identical
inputs produce byte-identical documents.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .consistency import ConsistencyReport, Witness
from .duality import DualPair
from .measures import AvarParams, EntropicParams, EntropicValue
from .polyhedra import Polyhedron
from .rationals import ExtRat, format_rational, parse_rational
from .tree import AdaptedVector, ScenarioTree, VectorMeasure


class DocumentError(ValueError):
    """Validation failure, with a path-precise message."""

    def __init__(self, path: str, message: str):
        super().__init__(f"at {path}: {message}")
        self.path = path


def _vec_to_doc(vec: Sequence) -> List[str]:
    return [format_rational(x) for x in vec]


def _vec_from_doc(doc, path: str) -> List[Fraction]:
    if not isinstance(doc, list):
        raise DocumentError(path, "expected a list of rationals")
    try:
        return [parse_rational(x) for x in doc]
    except (ValueError, TypeError) as exc:
        raise DocumentError(path, str(exc)) from None


# -- trees, payoffs, measures ----------------------------------------------------


def tree_to_doc(tree: ScenarioTree) -> dict:
    nodes = []
    for node in tree.node_ids:
        entry = {"id": node, "parent": tree.parent(node), "time": tree.time(node)}
        if tree.parent(node) is not None:
            entry["prob"] = format_rational(tree.branch_prob(node))
        nodes.append(entry)
    return {"d": tree.d, "nodes": nodes}


def tree_from_doc(doc: dict, path: str = "tree") -> ScenarioTree:
    if not isinstance(doc, dict):
        raise DocumentError(path, "expected an object")
    for key in ("d", "nodes"):
        if key not in doc:
            raise DocumentError(path, f"missing field {key!r}")
    rows = []
    for k, entry in enumerate(doc["nodes"]):
        epath = f"{path}.nodes[{k}]"
        if not isinstance(entry, dict) or "id" not in entry or "time" not in entry:
            raise DocumentError(epath, "expected an object with id, parent, time")
        parent = entry.get("parent")
        prob = None
        if parent is not None:
            if "prob" not in entry:
                raise DocumentError(epath, "non-root node needs a branch probability")
            prob = parse_rational(entry["prob"])
        rows.append((entry["id"], parent, entry["time"], prob))
    try:
        return ScenarioTree(rows, d=doc["d"])
    except ValueError as exc:
        raise DocumentError(path, str(exc)) from None


def payoff_to_doc(X: AdaptedVector) -> dict:
    return {
        "time": X.time,
        "values": {n: _vec_to_doc(X[n]) for n in X.tree.nodes_at(X.time)},
    }


def payoff_from_doc(tree: ScenarioTree, doc: dict, path: str) -> AdaptedVector:
    if not isinstance(doc, dict) or "time" not in doc or "values" not in doc:
        raise DocumentError(path, "expected an object with time and values")
    values = {
        node: _vec_from_doc(vec, f"{path}.values[{node}]")
        for node, vec in doc["values"].items()
    }
    try:
        return AdaptedVector(tree, doc["time"], values)
    except ValueError as exc:
        raise DocumentError(path, str(exc)) from None


def measure_to_doc(Q: VectorMeasure) -> dict:
    return {"densities": {leaf: _vec_to_doc(Q.densities[leaf]) for leaf in Q.tree.leaves}}


def measure_from_doc(tree: ScenarioTree, doc: dict, path: str) -> VectorMeasure:
    if not isinstance(doc, dict) or "densities" not in doc:
        raise DocumentError(path, "expected an object with densities")
    densities = {
        leaf: _vec_from_doc(vec, f"{path}.densities[{leaf}]")
        for leaf, vec in doc["densities"].items()
    }
    try:
        return VectorMeasure(tree, densities)
    except ValueError as exc:
        raise DocumentError(path, str(exc)) from None


# -- polyhedra --------------------------------------------------------------------


def polyhedron_to_doc(P: Polyhedron) -> dict:
    return {
        "dim": P.dim,
        "hrep": [{"a": _vec_to_doc(a), "b": format_rational(b)} for a, b in P.halfspaces],
        "vrep": {
            "vertices": [_vec_to_doc(v) for v in P.vertices],
            "rays": [_vec_to_doc(r) for r in P.rays],
        },
    }


def polyhedron_from_doc(doc: dict, path: str = "polyhedron") -> Polyhedron:
    if not isinstance(doc, dict) or "dim" not in doc:
        raise DocumentError(path, "expected an object with dim")
    dim = doc["dim"]
    hrep = doc.get("hrep")
    vrep = doc.get("vrep")
    if hrep is not None:
        rows = []
        for k, row in enumerate(hrep):
            rows.append(
                (
                    _vec_from_doc(row["a"], f"{path}.hrep[{k}].a"),
                    parse_rational(row["b"]),
                )
            )
        poly = Polyhedron.from_halfspaces(rows, dim)
    elif vrep is not None:
        poly = Polyhedron.from_generators(
            [_vec_from_doc(v, f"{path}.vrep.vertices[{k}]") for k, v in enumerate(vrep.get("vertices", []))],
            [_vec_from_doc(r, f"{path}.vrep.rays[{k}]") for k, r in enumerate(vrep.get("rays", []))],
            dim=dim,
        )
    else:
        raise DocumentError(path, "need hrep or vrep")
    if hrep is not None and vrep is not None:
        stored = {
            "vertices": [_vec_to_doc(v) for v in poly.vertices],
            "rays": [_vec_to_doc(r) for r in poly.rays],
        }
        if stored != vrep:
            raise DocumentError(path, "hrep and vrep describe different sets")
    return poly


def solvency_to_doc(process: Dict[str, Polyhedron]) -> dict:
    return {"nodes": {node: polyhedron_to_doc(P) for node, P in process.items()}}


def solvency_from_doc(tree: ScenarioTree, doc: dict, path: str) -> Dict[str, Polyhedron]:
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise DocumentError(path, "expected an object with per-node polyhedra")
    out = {}
    for node in tree.node_ids:
        if node not in doc["nodes"]:
            raise DocumentError(f"{path}.nodes", f"missing node {node!r}")
        out[node] = polyhedron_from_doc(doc["nodes"][node], f"{path}.nodes[{node}]")
    return out


# -- parameters -------------------------------------------------------------------


def avar_params_to_doc(params: AvarParams) -> dict:
    tree = params.tree
    return {
        str(t): {n: _vec_to_doc(params.at(t, n)) for n in tree.nodes_at(t)}
        for t in range(tree.horizon + 1)
    }


def avar_params_from_doc(tree: ScenarioTree, doc: dict, path: str) -> AvarParams:
    if not isinstance(doc, dict):
        raise DocumentError(path, "expected an object keyed by time")
    levels = {}
    for key, per_node in doc.items():
        try:
            t = int(key)
        except ValueError:
            raise DocumentError(f"{path}.{key}", "time keys must be integers") from None
        levels[t] = {
            node: _vec_from_doc(vec, f"{path}.{key}[{node}]") for node, vec in per_node.items()
        }
    try:
        return AvarParams(tree, levels)
    except ValueError as exc:
        raise DocumentError(path, str(exc)) from None


def entropic_params_to_doc(params: EntropicParams) -> dict:
    return {"lambda": list(params.lam)}


def entropic_params_from_doc(doc: dict, path: str) -> EntropicParams:
    if not isinstance(doc, dict) or "lambda" not in doc:
        raise DocumentError(path, "expected an object with a lambda vector")
    try:
        return EntropicParams(doc["lambda"])
    except (ValueError, TypeError) as exc:
        raise DocumentError(path, str(exc)) from None


# -- dual pairs -------------------------------------------------------------------


def dual_pair_to_doc(pair: DualPair) -> dict:
    tree = pair.tree
    return {
        "t": pair.t,
        "w": {n: _vec_to_doc(pair.w[n]) for n in tree.nodes_at(pair.t)},
        "Q": {leaf: _vec_to_doc(pair.Q.densities[leaf]) for leaf in tree.leaves},
    }


def dual_pair_from_doc(tree: ScenarioTree, doc: dict, path: str) -> DualPair:
    for key in ("t", "w", "Q"):
        if key not in doc:
            raise DocumentError(path, f"missing field {key!r}")
    t = doc["t"]
    w_values = {n: _vec_from_doc(vec, f"{path}.w[{n}]") for n, vec in doc["w"].items()}
    densities = {
        leaf: _vec_from_doc(vec, f"{path}.Q[{leaf}]") for leaf, vec in doc["Q"].items()
    }
    try:
        return DualPair(VectorMeasure(tree, densities), t, AdaptedVector(tree, t, w_values))
    except ValueError as exc:
        raise DocumentError(path, str(exc)) from None


# -- workspace --------------------------------------------------------------------


class Workspace:
    """Tree plus named payoffs, measures, solvency processes, parameter sets,
    and dual pairs, loaded from one document."""

    def __init__(
        self,
        tree: ScenarioTree,
        payoffs: Optional[Dict[str, AdaptedVector]] = None,
        measures: Optional[Dict[str, VectorMeasure]] = None,
        solvency: Optional[Dict[str, Dict[str, Polyhedron]]] = None,
        avar_params: Optional[Dict[str, AvarParams]] = None,
        entropic_params: Optional[Dict[str, EntropicParams]] = None,
        dual_pairs: Optional[Dict[str, DualPair]] = None,
    ):
        self.tree = tree
        self.payoffs = payoffs or {}
        self.measures = measures or {}
        self.solvency = solvency or {}
        self.avar_params = avar_params or {}
        self.entropic_params = entropic_params or {}
        self.dual_pairs = dual_pairs or {}

    @classmethod
    def from_doc(cls, doc: dict) -> "Workspace":
        if not isinstance(doc, dict) or "tree" not in doc:
            raise DocumentError("workspace", "missing tree")
        tree = tree_from_doc(doc["tree"])
        ws = cls(tree)
        for name, sub in doc.get("payoffs", {}).items():
            ws.payoffs[name] = payoff_from_doc(tree, sub, f"payoffs.{name}")
        for name, sub in doc.get("measures", {}).items():
            ws.measures[name] = measure_from_doc(tree, sub, f"measures.{name}")
        for name, sub in doc.get("cones", {}).items():
            ws.solvency[name] = solvency_from_doc(tree, sub, f"cones.{name}")
        for name, sub in doc.get("avar_params", {}).items():
            ws.avar_params[name] = avar_params_from_doc(tree, sub, f"avar_params.{name}")
        for name, sub in doc.get("entropic_params", {}).items():
            ws.entropic_params[name] = entropic_params_from_doc(sub, f"entropic_params.{name}")
        for name, sub in doc.get("dual_pairs", {}).items():
            ws.dual_pairs[name] = dual_pair_from_doc(tree, sub, f"dual_pairs.{name}")
        return ws

    def to_doc(self) -> dict:
        doc: dict = {"tree": tree_to_doc(self.tree)}
        if self.payoffs:
            doc["payoffs"] = {n: payoff_to_doc(x) for n, x in self.payoffs.items()}
        if self.measures:
            doc["measures"] = {n: measure_to_doc(q) for n, q in self.measures.items()}
        if self.solvency:
            doc["cones"] = {n: solvency_to_doc(p) for n, p in self.solvency.items()}
        if self.avar_params:
            doc["avar_params"] = {n: avar_params_to_doc(p) for n, p in self.avar_params.items()}
        if self.entropic_params:
            doc["entropic_params"] = {
                n: entropic_params_to_doc(p) for n, p in self.entropic_params.items()
            }
        if self.dual_pairs:
            doc["dual_pairs"] = {n: dual_pair_to_doc(p) for n, p in self.dual_pairs.items()}
        return doc

    @classmethod
    def load(cls, path: str) -> "Workspace":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_doc(json.load(fh))


# -- results and reports ------------------------------------------------------------


def eval_result_to_doc(
    measure_spec: dict,
    payoff_name: str,
    t: int,
    values,
    directions: Optional[Sequence[Sequence[Fraction]]] = None,
) -> dict:
    if isinstance(values, EntropicValue):
        return {
            "kind": "eval",
            "type": "point_plus_cone",
            "measure": measure_spec,
            "payoff": payoff_name,
            "t": t,
            "values": {
                node: {"rho": list(values.rho[node]), "cone": values.cone}
                for node in values.rho
            },
        }
    doc = {
        "kind": "eval",
        "type": "polyhedral",
        "measure": measure_spec,
        "payoff": payoff_name,
        "t": t,
        "values": {node: polyhedron_to_doc(P) for node, P in values.items()},
        "summary": {},
    }
    for node, P in values.items():
        entry = {
            "empty": P.is_empty,
            "vertex_count": len(P.vertices),
            "ray_count": len(P.rays),
        }
        if directions:
            support = {}
            for direction in directions:
                key = ",".join(format_rational(x) for x in direction)
                if P.is_empty:
                    support[key] = "empty"
                else:
                    support[key] = P.support_value(direction).to_document()
            entry["support_values"] = support
        doc["summary"][node] = entry
    return doc


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, ExtRat):
        return obj.to_document()
    if isinstance(obj, Polyhedron):
        return polyhedron_to_doc(obj)
    if isinstance(obj, DualPair):
        return dual_pair_to_doc(obj)
    if isinstance(obj, VectorMeasure):
        return measure_to_doc(obj)
    if isinstance(obj, AdaptedVector):
        return payoff_to_doc(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (str, bool, float)) or obj is None:
        return obj
    if isinstance(obj, int):
        return obj
    return repr(obj)


def witness_to_doc(witness: Witness) -> dict:
    return {"kind": witness.kind, "data": _jsonable(witness.data)}


def report_to_doc(report: ConsistencyReport) -> dict:
    return {
        "kind": "check",
        "check": report.check,
        "verdict": report.verdict,
        "t": report.t,
        "s": report.s,
        "hypotheses_discharged": list(report.hypotheses_discharged),
        "assumptions": list(report.assumptions),
        "witness": witness_to_doc(report.witness) if report.witness else None,
        "details": _jsonable(report.details),
    }


def dumps(doc: dict) -> str:
    """Canonical JSON serialization (byte-stable across runs)."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -- plot data ---------------------------------------------------------------------


def plot_data_csv(P_doc: dict, coords: Sequence[int], digits: int = 12) -> str:
    """CSV of projected vertices and rays, 12 significant digits by default."""
    dim = P_doc["dim"]
    coords = list(coords)
    if len(coords) not in (2, 3) or any(c < 0 or c >= dim for c in coords):
        raise ValueError("projection must pick 2 or 3 valid coordinates")
    header = ["kind"] + [f"c{c}" for c in coords]
    lines = [",".join(header)]
    vrep = P_doc.get("vrep", {"vertices": [], "rays": []})

    def fmt(value: str) -> str:
        return format(float(Fraction(value)), f".{digits}g")

    for v in vrep.get("vertices", []):
        lines.append(",".join(["vertex"] + [fmt(v[c]) for c in coords]))
    for r in vrep.get("rays", []):
        lines.append(",".join(["ray"] + [fmt(r[c]) for c in coords]))
    return "\n".join(lines) + "\n"
