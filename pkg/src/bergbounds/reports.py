"""Structured inequality-check records and their CSV/JSON serialization.

A report stores both computed sides, the margin, and the tolerance that
decided pass/fail, so a record is auditable on its own.  Floats serialize
with 17 significant digits (exact double round trip).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CSV_HEADER = "statement_id,domain,inputs,lhs,rhs,margin,pass,err"


@dataclass
class VerificationReport:
    statement_id: str
    domain: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    passed: bool
    est_numerical_error: float


def make_report(statement_id: str, domain: str, inputs: dict, lhs: float,
                rhs: float, margin: float, tolerance: float,
                est_numerical_error: float = 0.0) -> VerificationReport:
    """Build a report whose pass flag is derived from margin and tolerance.

    The tolerance is recorded inside ``inputs`` under "tol" so the decision
    is reproducible from the serialized record alone.
    """
    inputs = dict(inputs)
    inputs["tol"] = float(tolerance)
    return VerificationReport(statement_id, domain, inputs, float(lhs),
                              float(rhs), float(margin),
                              bool(margin >= -tolerance),
                              float(est_numerical_error))


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv_row(r: VerificationReport) -> str:
    inputs = "|".join(f"{k}={_fmt(v)}" for k, v in sorted(r.inputs.items()))
    cols = [r.statement_id, r.domain, inputs, _fmt(r.lhs), _fmt(r.rhs),
            _fmt(r.margin), _fmt(r.passed), _fmt(r.est_numerical_error)]
    return ",".join(cols)


def to_json_obj(r: VerificationReport) -> dict:
    return {
        "statement_id": r.statement_id,
        "domain": r.domain,
        "inputs": r.inputs,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "margin": r.margin,
        "pass": r.passed,
        "err": r.est_numerical_error,
    }


def to_json(r: VerificationReport) -> str:
    return json.dumps(to_json_obj(r))


def from_json(s: str) -> VerificationReport:
    o = json.loads(s)
    return VerificationReport(o["statement_id"], o["domain"], dict(o["inputs"]),
                              float(o["lhs"]), float(o["rhs"]), float(o["margin"]),
                              bool(o["pass"]), float(o["err"]))


def write_reports(reports, fmt: str, sink) -> None:
    """Emit reports to a text sink; CSV gets exactly one header per stream."""
    if fmt == "csv":
        sink.write(CSV_HEADER + "\n")
        for r in reports:
            sink.write(to_csv_row(r) + "\n")
    elif fmt == "json":
        sink.write(json.dumps([to_json_obj(r) for r in reports], indent=1) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
