"""File formats: network JSON, evidence JSON Lines, straw documents, reports.

Network documents carry ``variables`` and ``nodes`` (plus an optional
``rebuttals`` list); unknown keys are rejected rather than ignored so typos
fail loudly. Report serialization prints numbers with 12 significant
digits and is byte-deterministic for identical inputs; network documents
round-trip probabilities at full precision.
"""

from __future__ import annotations

import json
import math
from typing import Any, Sequence

import numpy as np

from .errors import SchemaError
from .network import BayesNet, NodeModel, Variable, build_network
from .rebuttal import RebuttalSpec
from .straw import StrawModel, explicit_straw

NETWORK_KEYS = {"variables", "nodes"}
NETWORK_OPTIONAL_KEYS = {"rebuttals"}
VARIABLE_KEYS = {"name", "outcomes"}
NODE_KEYS = {"variable", "parents", "cpt"}
REBUTTAL_KEYS = {"node", "straw", "prior_true"}
STRAW_KEYS = {"scope", "table"}
EVIDENCE_KEYS = {"variable", "outcome"}


def _require_keys(obj: Any, required: set[str], optional: set[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be a JSON object, got {type(obj).__name__}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{what} is missing keys: {sorted(missing)}")
    unknown = set(obj) - required - optional
    if unknown:
        raise SchemaError(f"{what} has unknown keys: {sorted(unknown)}")


def _string_list(value: Any, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
        raise SchemaError(f"{what} must be a list of strings")
    return value


def _number_rows(value: Any, what: str) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise SchemaError(f"{what} must be a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in row
        ):
            raise SchemaError(f"{what} row {i} must be a list of numbers")
        rows.append([float(x) for x in row])
    return rows


def parse_network(doc: Any) -> tuple[BayesNet, tuple[RebuttalSpec, ...]]:
    """Build a validated net (plus rebuttal annotations) from a parsed document."""
    _require_keys(doc, NETWORK_KEYS, NETWORK_OPTIONAL_KEYS, "network document")
    if not isinstance(doc["variables"], list) or not isinstance(doc["nodes"], list):
        raise SchemaError("'variables' and 'nodes' must be lists")
    variables = []
    for v in doc["variables"]:
        _require_keys(v, VARIABLE_KEYS, set(), "variable entry")
        if not isinstance(v["name"], str):
            raise SchemaError("variable name must be a string")
        variables.append(Variable(v["name"], tuple(_string_list(v["outcomes"], "outcomes"))))
    nodes = []
    for n in doc["nodes"]:
        _require_keys(n, NODE_KEYS, set(), "node entry")
        if not isinstance(n["variable"], str):
            raise SchemaError("node variable must be a string")
        nodes.append(
            NodeModel(
                variable=n["variable"],
                parents=tuple(_string_list(n["parents"], "parents")),
                cpt=np.array(_number_rows(n["cpt"], f"cpt of {n['variable']!r}")),
            )
        )
    net = build_network(variables, nodes)
    rebuttals = []
    for r in doc.get("rebuttals", []):
        _require_keys(r, REBUTTAL_KEYS, set(), "rebuttal entry")
        if not isinstance(r["node"], str):
            raise SchemaError("rebuttal node must be a string")
        straw = r["straw"]
        if not isinstance(straw, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in straw
        ):
            raise SchemaError("rebuttal straw must be a list of numbers")
        if not isinstance(r["prior_true"], (int, float)) or isinstance(r["prior_true"], bool):
            raise SchemaError("rebuttal prior_true must be a number")
        net.variable(r["node"])
        spec = RebuttalSpec(
            node=r["node"],
            straw_distribution=np.array([float(x) for x in straw]),
            prior_true=float(r["prior_true"]),
        )
        if spec.straw_distribution.size != net.variable(spec.node).cardinality:
            raise SchemaError(
                f"rebuttal straw for {spec.node!r} has {spec.straw_distribution.size} "
                f"entries, variable has {net.variable(spec.node).cardinality} outcomes"
            )
        rebuttals.append(spec)
    return net, tuple(rebuttals)


def load_network(path: str) -> tuple[BayesNet, tuple[RebuttalSpec, ...]]:
    return parse_network(_read_json(path))


def network_to_doc(net: BayesNet, rebuttals: Sequence[RebuttalSpec] = ()) -> dict:
    """Full-precision document; parsing it back reproduces the probabilities."""
    doc: dict[str, Any] = {
        "variables": [
            {"name": v.name, "outcomes": list(v.outcomes)} for v in net.variables
        ],
        "nodes": [
            {
                "variable": n.variable,
                "parents": list(n.parents),
                "cpt": n.cpt.tolist(),
            }
            for n in net.nodes
        ],
    }
    if rebuttals:
        doc["rebuttals"] = [
            {
                "node": r.node,
                "straw": r.straw_distribution.tolist(),
                "prior_true": r.prior_true,
            }
            for r in rebuttals
        ]
    return doc


def save_network(
    net: BayesNet, path: str, rebuttals: Sequence[RebuttalSpec] = ()
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_doc(net, rebuttals), fh, indent=2)
        fh.write("\n")


def load_evidence(path: str) -> list[tuple[str, str]]:
    """Evidence stream: one {"variable", "outcome"} object per line, in order."""
    items = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from None
        _require_keys(obj, EVIDENCE_KEYS, set(), f"{path}:{lineno}: evidence item")
        if not isinstance(obj["variable"], str) or not isinstance(obj["outcome"], str):
            raise SchemaError(f"{path}:{lineno}: variable and outcome must be strings")
        items.append((obj["variable"], obj["outcome"]))
    return items


def parse_straw(doc: Any, net: BayesNet) -> StrawModel:
    """Explicit straw document: a joint table over an evidence scope.

    ``table`` rows follow the CPT convention: one row per configuration of
    the leading scope variables (last of them varying fastest), each row
    running over the final scope variable's outcomes.
    """
    _require_keys(doc, STRAW_KEYS, set(), "straw document")
    scope = tuple(_string_list(doc["scope"], "straw scope"))
    if not scope:
        raise SchemaError("straw scope must not be empty")
    rows = np.array(_number_rows(doc["table"], "straw table"))
    cards = [net.variable(v).cardinality for v in scope]
    expected = (int(np.prod(cards[:-1], dtype=np.int64)), cards[-1])
    if rows.shape != expected:
        raise SchemaError(
            f"straw table must be {expected[0]} rows of {expected[1]}, "
            f"got {rows.shape[0]} rows of {rows.shape[1]}"
        )
    return explicit_straw(net, scope, rows.reshape(cards))


def load_straw(path: str, net: BayesNet) -> StrawModel:
    return parse_straw(_read_json(path), net)


def _read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.readlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None


# -- report rendering ---------------------------------------------------------


def json_ready(obj: Any) -> Any:
    """Convert a report structure for serialization.

    Floats are rounded to 12 significant digits; non-finite values become
    the strings "inf", "-inf", and "nan" (JSON has no literals for them).
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    return obj


def render_json(obj: Any) -> str:
    return json.dumps(json_ready(obj), indent=2, allow_nan=False)


def format_number(x: float, precision: int = 4) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{precision}f}"


def format_table(
    title: str,
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    values: np.ndarray,
    precision: int = 4,
) -> str:
    """A labeled text table with fixed decimal precision (default 4)."""
    cells = [[format_number(float(v), precision) for v in row] for row in np.asarray(values)]
    width = max(
        [len(s) for row in cells for s in row]
        + [len(c) for c in col_labels]
        + [len(r) for r in row_labels]
    )
    lines = [title]
    lines.append(" ".join([" " * width] + [c.rjust(width) for c in col_labels]))
    for label, row in zip(row_labels, cells):
        lines.append(" ".join([label.rjust(width)] + [s.rjust(width) for s in row]))
    return "\n".join(lines)
