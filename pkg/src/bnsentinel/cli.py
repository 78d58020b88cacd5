"""Command-line front end for batch analysis and streaming evidence monitoring.

Subcommands: ``validate``, ``infer``, ``monitor``, ``diagnose``,
``verify-theorem1``, and ``reproduce-figure1``. Exit codes: 0 success,
1 validation error (bad files, schema violations, unknown flags), 2
impossible evidence, 3 threshold alert (``monitor --fail-on-alert``).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from . import __version__
from .diagnostics import explain_conflict, suggest_discriminator, surprise_tail
from .errors import (
    BnsentinelError,
    ConflictingEvidenceError,
    ImpossibleEvidenceError,
)
from .fileformats import (
    format_number,
    format_table,
    load_evidence,
    load_network,
    load_straw,
    render_json,
)
from .inference import eliminate, new_session
from .rebuttal import monitor_rebuttals
from .straw import LN2, conflict_cj, independence_straw
from .worked_example import worked_example_network, worked_example_tables

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IMPOSSIBLE_EVIDENCE = 2
EXIT_ALERT = 3

DEFAULT_CONFLICT_BITS = 3.0
DEFAULT_REBUTTAL_ODDS = 1.0


@dataclass(frozen=True)
class Thresholds:
    conflict_bits: float
    rebuttal_odds: float

    def __post_init__(self) -> None:
        for name, value in (("conflict_bits", self.conflict_bits), ("rebuttal_odds", self.rebuttal_odds)):
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"threshold {name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class RunConfig:
    network_path: str
    evidence_path: str | None
    straw_path: str | None
    thresholds: Thresholds
    seed: int
    output_format: str


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1, not 2."""

    def error(self, message: str):  # noqa: D102 - argparse contract
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("BNSENTINEL_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bnsentinel",
        description="Bayesian-network inference with conflict, surprise, and rebuttal diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"bnsentinel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, evidence: bool = False) -> None:
        p.add_argument("network", help="network JSON file")
        if evidence:
            p.add_argument("--evidence", help="evidence stream (JSON Lines), absorbed in file order")
        p.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help="seed for sampling-based operations (env BNSENTINEL_SEED overrides the default 0)")

    p = sub.add_parser("validate", help="validate a network file")
    common(p)

    p = sub.add_parser("infer", help="absorb evidence and print posteriors")
    common(p, evidence=True)
    p.add_argument("--query", help="comma-separated variables (default: all)")

    p = sub.add_parser("monitor", help="stream evidence; trace conflict and rebuttal odds")
    common(p, evidence=True)
    p.add_argument("--conflict-threshold", type=float, default=DEFAULT_CONFLICT_BITS,
                   help=f"alert when running conflict exceeds this many bits (default {DEFAULT_CONFLICT_BITS:g})")
    p.add_argument("--rebuttal-odds-threshold", type=float, default=DEFAULT_REBUTTAL_ODDS,
                   help=f"alert when any rebuttal's posterior odds exceed this (default {DEFAULT_REBUTTAL_ODDS:g})")
    p.add_argument("--fail-on-alert", action="store_true",
                   help="exit with code 3 if any alert fires")

    p = sub.add_parser("diagnose", help="rank rare explanations and discriminating observables")
    common(p, evidence=True)
    p.add_argument("--candidates", required=True,
                   help="comma-separated unobserved variables to consider as explanations")

    p = sub.add_parser("verify-theorem1", help="exact surprise tail probabilities vs the 2^-K bound")
    common(p)
    p.add_argument("--straw", help="explicit straw document (default: independence straw over all variables)")
    p.add_argument("--K", required=True, help="comma-separated thresholds in bits, e.g. 1,2,3")

    p = sub.add_parser("reproduce-figure1", help="print the built-in worked example's three tables")
    p.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
    p.add_argument("--seed", type=int, default=_default_seed(), help=argparse.SUPPRESS)
    return parser


def _split_csv(raw: str, what: str) -> list[str]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise BnsentinelError(f"{what} must name at least one item")
    return items


def _build_session(net, evidence_path):
    session = new_session(net)
    if evidence_path:
        for variable, outcome in load_evidence(evidence_path):
            session = session.absorb(variable, outcome)
    return session


def _posterior_payload(session, variables):
    out = []
    for v in variables:
        table = session.posterior(v)
        out.append(
            {
                "variable": v,
                "outcomes": list(table.outcomes),
                "distribution": table.distribution,
            }
        )
    return out


def _cmd_validate(args) -> int:
    net, rebuttals = load_network(args.network)
    payload = {
        "ok": True,
        "variables": len(net.variables),
        "nodes": len(net.nodes),
        "rebuttals": len(rebuttals),
    }
    if args.output_format == "json":
        print(render_json(payload))
    else:
        print(
            f"ok: {payload['variables']} variables, {payload['nodes']} nodes, "
            f"{payload['rebuttals']} rebuttals"
        )
    return EXIT_OK


def _cmd_infer(args) -> int:
    net, _ = load_network(args.network)
    session = _build_session(net, args.evidence)
    query = _split_csv(args.query, "--query") if args.query else list(net.names)
    for v in query:
        net.variable(v)
    payload = {
        "evidence": [{"variable": v, "outcome": o} for v, o in session.log],
        "evidence_probability": session.evidence_probability,
        "posteriors": _posterior_payload(session, query),
    }
    if session.log:
        payload["conflict_bits"] = conflict_cj(session)
    if args.output_format == "json":
        print(render_json(payload))
    else:
        if session.log:
            print(f"evidence probability = {format_number(session.evidence_probability, 6)}")
            print(f"conflict c_J = {format_number(payload['conflict_bits'], 4)} bits")
        for entry in payload["posteriors"]:
            cells = "  ".join(
                f"{o}={format_number(p, 4)}"
                for o, p in zip(entry["outcomes"], entry["distribution"])
            )
            print(f"P({entry['variable']} | evidence): {cells}")
    return EXIT_OK


def _cmd_monitor(args) -> int:
    thresholds = Thresholds(args.conflict_threshold, args.rebuttal_odds_threshold)
    net, rebuttals = load_network(args.network)
    items = load_evidence(args.evidence) if args.evidence else []
    session = new_session(net)
    records = []
    alerted = False
    cum_prior_bits = 0.0
    for index, (variable, outcome) in enumerate(items, 1):
        session = session.absorb(variable, outcome)
        prior = eliminate(net, (variable,), {}).normalize().value({variable: outcome})
        cum_prior_bits += math.log2(prior)
        running = cum_prior_bits - session.log_evidence_probability / LN2
        assessments = monitor_rebuttals(session, rebuttals)
        alerts = []
        if running > thresholds.conflict_bits:
            alerts.append(
                f"conflict {format_number(running, 4)} bits > {thresholds.conflict_bits:g}"
            )
        for a in assessments:
            if a.posterior_odds > thresholds.rebuttal_odds:
                alerts.append(
                    f"rebuttal {a.node} odds {format_number(a.posterior_odds, 6)} "
                    f"> {thresholds.rebuttal_odds:g}"
                )
        alerted = alerted or bool(alerts)
        records.append(
            {
                "index": index,
                "variable": variable,
                "outcome": outcome,
                "conditional": session.per_item_conditionals[-1],
                "conflict_bits": running,
                "rebuttals": [
                    {
                        "node": a.node,
                        "likelihood_ratio": a.likelihood_ratio,
                        "posterior_odds": a.posterior_odds,
                        "posterior_probability": a.posterior_probability,
                        "infinite_ratio": a.infinite_ratio,
                        "approximate": a.approximate,
                    }
                    for a in assessments
                ],
                "alerts": alerts,
            }
        )
    payload = {
        "items": records,
        "evidence_probability": session.evidence_probability,
        "final_conflict_bits": records[-1]["conflict_bits"] if records else 0.0,
        "alerted": alerted,
    }
    if args.output_format == "json":
        print(render_json(payload))
    else:
        for r in records:
            line = (
                f"[{r['index']:>3}] {r['variable']}={r['outcome']}  "
                f"P(item|prev) = {format_number(r['conditional'], 6)}  "
                f"c_J = {format_number(r['conflict_bits'], 4)} bits"
            )
            for a in r["rebuttals"]:
                line += f"  odds({a['node']}) = {format_number(a['posterior_odds'], 6)}"
            print(line)
            for alert in r["alerts"]:
                print(f"      ALERT: {alert}")
        print(f"evidence probability = {format_number(session.evidence_probability, 6)}")
        print(f"final c_J = {format_number(payload['final_conflict_bits'], 4)} bits")
    if alerted and args.fail_on_alert:
        return EXIT_ALERT
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    net, _ = load_network(args.network)
    session = _build_session(net, args.evidence)
    candidates = _split_csv(args.candidates, "--candidates")
    ranking = explain_conflict(session, candidates)
    payload = {
        "evidence_probability": session.evidence_probability,
        "conflict_bits": conflict_cj(session) if session.log else 0.0,
        "explanations": [
            {
                "variable": e.variable,
                "outcome": e.outcome,
                "lift_bits": e.lift_bits,
                "prior": e.prior,
                "posterior": e.posterior,
            }
            for e in ranking
        ],
    }
    evid = session.evidence()
    top = ranking[0] if ranking else None
    if top is not None:
        observables = [v for v in net.names if v not in evid and v != top.variable]
        payload["hypothesis"] = {"variable": top.variable, "outcome": top.outcome}
        try:
            payload["discriminators"] = [
                {"variable": v, "score_bits": score}
                for v, score in suggest_discriminator(
                    session, (top.variable, top.outcome), observables
                )
            ]
        except ImpossibleEvidenceError as exc:
            payload["discriminators"] = []
            payload["discriminator_note"] = str(exc)
    if args.output_format == "json":
        print(render_json(payload))
    else:
        print(f"conflict c_J = {format_number(payload['conflict_bits'], 4)} bits")
        print("explanations (lift in bits):")
        for e in payload["explanations"]:
            print(
                f"  {e['variable']}={e['outcome']}: lift = {format_number(e['lift_bits'], 4)}  "
                f"prior = {format_number(e['prior'], 6)}  posterior = {format_number(e['posterior'], 6)}"
            )
        for d in payload.get("discriminators", []):
            print(f"  observe {d['variable']}: score = {format_number(d['score_bits'], 4)} bits")
        if "discriminator_note" in payload:
            print(f"  (no discriminator: {payload['discriminator_note']})")
    return EXIT_OK


def _cmd_verify_theorem1(args) -> int:
    net, _ = load_network(args.network)
    if args.straw:
        straw = load_straw(args.straw, net)
    else:
        straw = independence_straw(net, net.names)
    try:
        thresholds = [float(s) for s in _split_csv(args.K, "--K")]
    except ValueError:
        raise BnsentinelError("--K must be a comma-separated list of numbers") from None
    reports = [
        surprise_tail(net, straw, straw.evidence_scope, K) for K in thresholds
    ]
    payload = {
        "straw": args.straw or "independence-of-priors",
        "scope": list(straw.evidence_scope),
        "reports": [
            {"K": r.K, "pi_K": r.pi_K, "bound": r.bound, "satisfied": r.satisfied}
            for r in reports
        ],
    }
    if args.output_format == "json":
        print(render_json(payload))
    else:
        for r in reports:
            print(
                f"K = {r.K:g}: pi_K = {format_number(r.pi_K, 6)}  "
                f"bound 2^-K = {format_number(r.bound, 6)}  "
                f"{'satisfied' if r.satisfied else 'VIOLATED'}"
            )
    return EXIT_OK


def _cmd_reproduce_figure1(args) -> int:
    tables = worked_example_tables()
    if args.output_format == "json":
        payload = {
            "x_outcomes": tables["x_outcomes"],
            "y_outcomes": tables["y_outcomes"],
            "joint": tables["joint"],
            "marginal_product": tables["marginal_product"],
            "conflict_bits": tables["conflict_bits"],
            "p_conflict_positive": tables["p_conflict_positive"],
            "note": tables["note"],
        }
        print(render_json(payload))
    else:
        rows, cols = tables["x_outcomes"], tables["y_outcomes"]
        print(format_table("P(x,y)", rows, cols, tables["joint"]))
        print()
        print(format_table("P(x)P(y)", rows, cols, tables["marginal_product"]))
        print()
        print(format_table("c_J given (x,y)", rows, cols, tables["conflict_bits"]))
        print()
        print(f"P(c_J > 0) = {tables['p_conflict_positive']:.12g}")
        print(tables["note"])
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "infer": _cmd_infer,
    "monitor": _cmd_monitor,
    "diagnose": _cmd_diagnose,
    "verify-theorem1": _cmd_verify_theorem1,
    "reproduce-figure1": _cmd_reproduce_figure1,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ImpossibleEvidenceError as exc:
        print(f"bnsentinel: impossible evidence: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE_EVIDENCE
    except ConflictingEvidenceError as exc:
        print(f"bnsentinel: conflicting evidence: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BnsentinelError, ValueError) as exc:
        print(f"bnsentinel: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
