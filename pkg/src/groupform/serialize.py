"""Instance files, random instances, DAG input, and DOT/CSV exports."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from typing import Any, Optional, TextIO

import numpy as np
from jsonschema import Draft202012Validator

from .dynamics import DynamicsTrace
from .errors import InstanceFormatError, ModelError
from .geometry import CoverageKind
from .model import (NEW_GROUP, AffineTradeoff, GForm, Instance, NoPenalty, Partition,
                    PowerScaled, Ratio, ResourceScaled, UtilitySpec, game_for)
from .realize import DagInput
from .structure import EncroachmentGraph, RelationKind

_POS = {"type": "number", "exclusiveMinimum": 0}

INSTANCE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["dimension", "agents"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "agents": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["id", "x", "r"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "x": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "r": _POS,
                },
                "additionalProperties": False,
            },
        },
        "utility": {
            "type": "object",
            "properties": {
                "coverage": {"enum": [k.value for k in CoverageKind]},
                "power": {
                    "oneOf": [
                        {"type": "object", "required": ["kind"],
                         "properties": {"kind": {"const": "ratio"},
                                        "g": {"enum": [g.value for g in GForm]},
                                        "alpha": _POS},
                         "additionalProperties": False},
                        {"type": "object", "required": ["kind", "a", "b"],
                         "properties": {"kind": {"const": "affine"}, "a": _POS, "b": _POS},
                         "additionalProperties": False},
                    ]
                },
                "penalty": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {"kind": {"enum": ["none", "resource_scaled", "power_scaled"]},
                                   "beta": {"type": "number", "minimum": 0}},
                    "additionalProperties": False,
                },
                "epsilon": _POS,
            },
            "additionalProperties": False,
        },
        "partition": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        },
    },
    "additionalProperties": False,
}

_VALIDATOR = Draft202012Validator(INSTANCE_SCHEMA)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _schema_error(doc: Any) -> Optional[InstanceFormatError]:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return None
    err = errors[0]
    pointer = _pointer(err.absolute_path)
    if err.validator == "exclusiveMinimum" and err.absolute_path and err.absolute_path[-1] == "r":
        return InstanceFormatError(pointer, f"resource must be positive (r_i > 0), got {err.instance}")
    return InstanceFormatError(pointer, err.message)


# --- utility spec <-> dict ----------------------------------------------------------

def spec_to_dict(spec: UtilitySpec) -> dict:
    if isinstance(spec.power, Ratio):
        power: dict = {"kind": "ratio", "g": spec.power.g.value}
        if spec.power.g is GForm.POWER:
            power["alpha"] = spec.power.alpha
    else:
        power = {"kind": "affine", "a": spec.power.a, "b": spec.power.b}
    if isinstance(spec.penalty, ResourceScaled):
        penalty: dict = {"kind": "resource_scaled", "beta": spec.penalty.beta}
    elif isinstance(spec.penalty, PowerScaled):
        penalty = {"kind": "power_scaled", "beta": spec.penalty.beta}
    else:
        penalty = {"kind": "none"}
    return {"coverage": spec.coverage.value, "power": power, "penalty": penalty, "epsilon": spec.epsilon}


def spec_from_dict(d: dict) -> UtilitySpec:
    p = d.get("power", {"kind": "ratio"})
    if p["kind"] == "ratio":
        power = Ratio(GForm(p.get("g", "linear")), float(p.get("alpha", 1.0)))
    else:
        power = AffineTradeoff(float(p["a"]), float(p["b"]))
    q = d.get("penalty", {"kind": "none"})
    if q["kind"] == "resource_scaled":
        penalty = ResourceScaled(float(q.get("beta", 0.0)))
    elif q["kind"] == "power_scaled":
        penalty = PowerScaled(float(q.get("beta", 0.0)))
    else:
        penalty = NoPenalty()
    return UtilitySpec(CoverageKind(d.get("coverage", "diameter")), power, penalty,
                       float(d.get("epsilon", 1e-9)))


# --- instance documents ----------------------------------------------------------------

def instance_to_dict(instance: Instance, spec: UtilitySpec,
                     partition: Optional[Partition] = None) -> dict:
    doc = {
        "dimension": instance.dimension,
        "agents": [{"id": i, "x": list(instance.locations[i]), "r": instance.resources[i]}
                   for i in instance.agents],
        "utility": spec_to_dict(spec),
    }
    if partition is not None:
        doc["partition"] = [list(g) for g in partition.key()]
    return doc


def instance_from_dict(doc: Any) -> tuple[Instance, UtilitySpec, Optional[Partition]]:
    err = _schema_error(doc)
    if err is not None:
        raise err
    d = doc["dimension"]
    agents = doc["agents"]
    ids = [a["id"] for a in agents]
    if sorted(ids) != list(range(len(agents))):
        raise InstanceFormatError("/agents", f"agent ids must be exactly 0..{len(agents) - 1}")
    for k, a in enumerate(agents):
        if len(a["x"]) != d:
            raise InstanceFormatError(f"/agents/{k}/x", f"expected {d} coordinates, got {len(a['x'])}")
    by_id = sorted(agents, key=lambda a: a["id"])
    try:
        instance = Instance(tuple(tuple(a["x"]) for a in by_id), tuple(a["r"] for a in by_id))
        spec = spec_from_dict(doc.get("utility", {}))
    except ModelError as exc:
        raise InstanceFormatError("/utility" if "utility" in str(exc) else "", str(exc)) from exc
    partition = None
    if "partition" in doc:
        try:
            partition = game_for(instance, spec).canonical(doc["partition"])
        except ModelError as exc:
            raise InstanceFormatError("/partition", str(exc)) from exc
    return instance, spec, partition


def dumps_instance(instance: Instance, spec: UtilitySpec, partition: Optional[Partition] = None) -> str:
    """Canonical text form: stable key order, agents by id, exact float repr."""
    return json.dumps(instance_to_dict(instance, spec, partition), indent=2) + "\n"


def save_instance(path, instance: Instance, spec: UtilitySpec,
                  partition: Optional[Partition] = None) -> None:
    Path(path).write_text(dumps_instance(instance, spec, partition))


def load_instance(path) -> tuple[Instance, UtilitySpec, Optional[Partition]]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("", f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)


# --- random instances -------------------------------------------------------------------

def gen_random(n: int, d: int = 2, seed: int = 0, box: tuple[float, float] = (0.0, 1.0),
               r_min: float = 0.5, r_max: float = 5.0) -> Instance:
    """Uniform locations in ``box``^d, log-uniform resources in [r_min, r_max]."""
    if n < 2:
        raise ModelError("need at least 2 agents")
    if not 0 < r_min <= r_max:
        raise ModelError("need 0 < r_min <= r_max")
    rng = np.random.default_rng(seed)
    locs = rng.uniform(box[0], box[1], size=(n, d))
    res = np.exp(rng.uniform(math.log(r_min), math.log(r_max), size=n))
    return Instance(tuple(map(tuple, locs.tolist())), tuple(res.tolist()))


# --- DAG input ------------------------------------------------------------------------------

_DOT_ATTRS = re.compile(r"\[[^\]]*\]")


def parse_dag(text: str) -> DagInput:
    """Edge list ("u v" per line, lone "u" declares a node, '#' comments) or a DOT digraph subset."""
    if "digraph" in text or "->" in text:
        return _parse_dot(text)
    nodes: set[int] = set()
    edges = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            ids = [int(p) for p in parts]
        except ValueError:
            raise ModelError(f"line {lineno}: expected integer node ids, got {line!r}") from None
        if len(ids) == 1:
            nodes.add(ids[0])
        elif len(ids) == 2:
            edges.add((ids[0], ids[1]))
            nodes.update(ids)
        else:
            raise ModelError(f"line {lineno}: expected 'u v' or 'u'")
    if not nodes:
        raise ModelError("empty DAG")
    return DagInput(max(nodes) + 1, frozenset(edges))


def _parse_dot(text: str) -> DagInput:
    text = re.sub(r"//[^\n]*|#[^\n]*", "", text)
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end < start:
        raise ModelError("DOT input needs a digraph body in braces")
    body = _DOT_ATTRS.sub("", text[start + 1:end])
    nodes: set[int] = set()
    edges = set()
    for stmt in re.split(r"[;\n]", body):
        stmt = stmt.strip()
        if not stmt or "=" in stmt:
            continue
        try:
            chain = [int(tok.strip().strip('"')) for tok in stmt.split("->")]
        except ValueError:
            raise ModelError(f"unsupported DOT statement {stmt!r}") from None
        nodes.update(chain)
        edges.update(zip(chain, chain[1:]))
    if not nodes:
        raise ModelError("empty DAG")
    return DagInput(max(nodes) + 1, frozenset(edges))


def dag_to_text(dag: DagInput) -> str:
    lines = [str(v) for v in range(dag.node_count)]
    lines += [f"{u} {v}" for u, v in sorted(dag.edges)]
    return "\n".join(lines) + "\n"


# --- exports ---------------------------------------------------------------------------------

def graph_to_dot(instance: Instance, partition: Partition, spec: UtilitySpec,
                 graph: EncroachmentGraph) -> str:
    """DOT digraph; nested pairs get bold edges, plain encroachment solid ones."""
    game = game_for(instance, spec)
    utils = game.utilities(partition.groups)
    nested = {(rel.source, rel.target) for rel in graph.labels.values() if rel.kind is RelationKind.NESTED}
    out = ["digraph encroachment {"]
    for k, g in enumerate(partition.groups):
        label = f"G{k}\\n|G|={len(g)}\\nR={game.resources_of(g):.6g}\\nU={utils[k]:.6g}"
        out.append(f'  {k} [label="{label}"];')
    for u, v in sorted(graph.edges):
        style = "bold" if (u, v) in nested else "solid"
        out.append(f"  {u} -> {v} [style={style}];")
    out.append("}")
    return "\n".join(out) + "\n"


def trace_header(n: int) -> list[str]:
    return ["step", "movers", "from", "to", "u_before", "u_after"] + [f"psi_{i}" for i in range(n)]


def write_trace(fh: TextIO, trace: DynamicsTrace, n: int) -> None:
    """One row per state; row 0 is the initial state with no movers."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(trace_header(n))
    w.writerow([0, "", "", "", "", ""] + [repr(x) for x in trace.initial_potential])
    for t, step in enumerate(trace.steps, 1):
        dev = step.deviation
        to = "new" if dev.to_group is NEW_GROUP else dev.to_group
        w.writerow([t, " ".join(map(str, sorted(dev.movers))), dev.from_group, to,
                    repr(dev.utility_before), repr(dev.utility_after)]
                   + [repr(x) for x in step.potential])


def trace_to_csv(trace: DynamicsTrace, n: int) -> str:
    buf = io.StringIO()
    write_trace(buf, trace, n)
    return buf.getvalue()


def read_trace_potentials(text: str) -> list[list[float]]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        return []
    n = sum(1 for k in rows[0] if k.startswith("psi_"))
    return [[float(r[f"psi_{i}"]) for i in range(n)] for r in rows]
