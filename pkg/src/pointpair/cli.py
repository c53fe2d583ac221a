"""Command-line entry point with deterministic, machine-readable output.

Every command writes exactly one summary record, a single-line JSON object
with the keys "command", "inputs", "result" and "diagnostics", to stdout
or to --out.  Identical configurations (seed included) produce
byte-identical summaries.  Detail records (per probe, per restart, per
margin sample) go to --records as CSV; disk traces go to --out as CSV or
SVG when that format is selected.

Exit codes: 0 success, 2 validation error, 3 internal numerical failure.
`violate` reports via the "found" field and exits 0 either way.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, oracles, viz
from .analysis import (
    ThresholdReport,
    Triple,
    alpha_threshold,
    ball_constant_lower_bound,
    estimate_quasi_constant,
    find_violation,
    sharpness_witness,
    triangle_ratio,
)
from .errors import NumericalError, ParameterError, ValidationError
from .geometry import (
    Domain,
    ExteriorBall,
    PuncturedAxis3D,
    PuncturedBall,
    UnitBall,
    parse_domain,
)
from .metrics import MetricSpec, parse_metric

_CONJECTURES = ("exterior-threshold", "psi-threshold", "axis3d-metric", "ball-constant")
_ORACLES = ("interval", "quartic", "sinh", "normsum", "axisquad")


@dataclass
class RunConfig:
    """Validated flag set for one CLI invocation."""

    command: str
    domain: str | None = None
    metric: str = "ppf"
    seed: int = 0
    budget: int = 100000
    tol: float = 1e-6
    out: str | None = None
    format: str = "json"
    x: str | None = None
    y: str | None = None
    z0: str | None = None
    r: float | None = None
    direction: str | None = None
    center: str | None = None
    level: float | None = None
    rays: int = 360
    lo: float | None = None
    hi: float | None = None
    family: str = "ppf"
    which: str | None = None
    samples: int = 1000000
    grid: int = 100000
    alpha: float | None = None
    records: str | None = None


def _parse_point(text: str) -> np.ndarray:
    cleaned = text.strip().replace("−", "-")
    try:
        return np.array([float(c) for c in cleaned.split(",")])
    except ValueError as exc:
        raise ParameterError(f"cannot parse point {text!r}: {exc}") from exc


def _jsonify(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def _triple_payload(t: Triple) -> dict:
    return {"x": t.x.tolist(), "y": t.y.tolist(), "z": t.z.tolist()}


def _threshold_payload(report: ThresholdReport) -> dict:
    return {
        "alpha_low": report.alpha_low,
        "alpha_high": report.alpha_high,
        "bracket": [report.bracket_low, report.bracket_high],
        "width": report.bracket_high - report.bracket_low,
        "probes": [
            {
                "alpha": p.alpha,
                "certainty": p.certainty,
                "ratio": p.ratio,
                "violation": _triple_payload(p.violation) if p.violation is not None else None,
            }
            for p in report.probes
        ],
    }


def _write_records(path: str | None, header: str, rows) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.9g}" if isinstance(v, float) else str(v) for v in row) + "\n")


def _require(config: RunConfig, *fields: str) -> None:
    for name in fields:
        if getattr(config, name) is None:
            raise ParameterError(f"command {config.command!r} requires --{name.replace('_', '-')}")


def _domain(config: RunConfig) -> Domain:
    _require(config, "domain")
    return parse_domain(config.domain)


# --- command implementations --------------------------------------------------


def _cmd_eval(config: RunConfig) -> dict:
    _require(config, "x", "y")
    domain = _domain(config)
    metric = parse_metric(config.metric)
    value = metric.value(domain, _parse_point(config.x), _parse_point(config.y))
    return {"result": {"value": value}, "diagnostics": {}}


def _cmd_dist(config: RunConfig) -> dict:
    _require(config, "x")
    domain = _domain(config)
    return {
        "result": {"distance": domain.boundary_distance(_parse_point(config.x))},
        "diagnostics": {},
    }


def _cmd_quasi(config: RunConfig) -> dict:
    domain = _domain(config)
    metric = parse_metric(config.metric)
    est = estimate_quasi_constant(metric, domain, config.budget, config.seed)
    _write_records(
        config.records,
        "restart,ratio",
        [(i, float(r)) for i, r in enumerate(est.restart_ratios)],
    )
    return {
        "result": {
            "c_hat": est.c_hat,
            "witness": _triple_payload(est.witness),
            "converged": est.converged,
        },
        "diagnostics": {"evaluations": est.evaluations, "restarts": est.restarts},
    }


def _cmd_violate(config: RunConfig) -> dict:
    domain = _domain(config)
    metric = parse_metric(config.metric)
    found = find_violation(metric, domain, config.budget, config.seed)
    if found is None:
        result = {"found": False, "witness": None, "ratio": None}
    else:
        triple, ratio = found
        result = {"found": True, "witness": _triple_payload(triple), "ratio": ratio}
    return {"result": result, "diagnostics": {"budget": config.budget}}


def _threshold_family(name: str):
    if name == "ppf":
        return MetricSpec.generalized
    if name == "psi":
        return MetricSpec.inversion
    raise ParameterError(f"unknown threshold family {name!r} (use ppf or psi)")


def _cmd_threshold(config: RunConfig) -> dict:
    _require(config, "lo", "hi")
    domain = _domain(config)
    report = alpha_threshold(
        domain,
        config.lo,
        config.hi,
        config.tol,
        config.budget,
        config.seed,
        family=_threshold_family(config.family),
    )
    _write_records(
        config.records,
        "alpha,certainty,ratio",
        [(p.alpha, p.certainty, float(p.ratio) if p.ratio is not None else "") for p in report.probes],
    )
    payload = _threshold_payload(report)
    return {"result": payload, "diagnostics": {"probes": len(report.probes)}}


def _cmd_witness(config: RunConfig) -> dict:
    _require(config, "z0", "r", "direction")
    domain = _domain(config)
    direction = _parse_point(config.direction)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise ParameterError("direction must be nonzero")
    triple = sharpness_witness(_parse_point(config.z0), config.r, direction / norm)
    ratio = triangle_ratio(parse_metric(config.metric), domain, triple)
    return {
        "result": {"witness": _triple_payload(triple), "ratio": ratio},
        "diagnostics": {},
    }


def _cmd_oracle(config: RunConfig) -> dict:
    _require(config, "which")
    which = config.which
    n_records = 1000 if config.records else 0
    if which == "interval":
        summary, recs = oracles.sweep_interval_split(config.samples, config.seed, n_records)
    elif which == "quartic":
        summary, recs = oracles.sweep_split_certificate(config.grid, n_records)
    elif which == "sinh":
        summary, recs = oracles.sweep_sinh_triangle(config.samples, config.seed, records=n_records)
    elif which == "normsum":
        summary, recs = oracles.sweep_normalized_sum(config.samples, config.seed, n_records)
    elif which == "axisquad":
        _require(config, "alpha")
        summary, recs = oracles.sweep_axis_quadratic(
            config.alpha, points=config.grid, records=n_records
        )
    else:
        raise ParameterError(f"unknown oracle {which!r} (choose from {', '.join(_ORACLES)})")
    _write_records(
        config.records,
        "inputs,margin",
        [(";".join(f"{v:.9g}" for v in r.inputs), r.margin) for r in recs],
    )
    result = {
        "samples": summary.samples,
        "min_margin": summary.min_margin,
        "argmin": list(summary.argmin),
    }
    if summary.refined_margin is not None:
        result["refined_margin"] = summary.refined_margin
        result["refined_argmin"] = list(summary.refined_argmin)
    return {"result": result, "diagnostics": {}}


def _cmd_disk(config: RunConfig) -> dict:
    _require(config, "center", "level")
    domain = _domain(config)
    metric = parse_metric(config.metric)
    trace = viz.trace_disk(metric, domain, _parse_point(config.center), config.level, config.rays)
    if config.format in ("csv", "svg"):
        if config.out is None:
            raise ParameterError(f"--out is required for format {config.format}")
        with open(config.out, "wb") as fh:
            fh.write(viz.emit_trace(trace, config.format))
    result = {
        "rays": trace.rays,
        "level": trace.level,
        "center": trace.center.tolist(),
        "flagged_rays": int(sum(trace.multiplicity_flags)),
    }
    if config.format == "json":
        result["polyline"] = [
            {"angle": angle, "point": pt.tolist()} for angle, pt in trace.polyline
        ]
    return {"result": result, "diagnostics": {}}


def conjecture_report(which: str, budget: int, seed: int) -> dict:
    """Numerical evidence for the open questions; never a proof.

    exterior-threshold and psi-threshold bisect the metricity threshold on
    the ball exterior and the punctured ball; axis3d-metric searches for a
    triangle violation of the point pair function off the punctured axis;
    ball-constant compares the searched quasi-metric constant on the unit
    ball against the diametral-triple lower bound.
    """
    if which == "exterior-threshold":
        details = []
        for n in (2, 3):
            report = alpha_threshold(ExteriorBall(n), 1.0, 50.0, 0.1, budget, seed)
            mid = 0.5 * (report.bracket_low + report.bracket_high)
            details.append(
                {
                    "dimension": n,
                    "bracket": [report.bracket_low, report.bracket_high],
                    "bracket_mid": mid,
                    "distance_from_12": abs(mid - 12.0),
                }
            )
        return {"certainty": "evidence", "which": which, "details": details}
    if which == "psi-threshold":
        report = alpha_threshold(
            PuncturedBall(2), 1.0, 50.0, 0.1, budget, seed, family=MetricSpec.inversion
        )
        mid = 0.5 * (report.bracket_low + report.bracket_high)
        return {
            "certainty": "evidence",
            "which": which,
            "details": {
                "bracket": [report.bracket_low, report.bracket_high],
                "bracket_mid": mid,
                "distance_from_12": abs(mid - 12.0),
            },
        }
    if which == "axis3d-metric":
        found = find_violation(MetricSpec.point_pair(), PuncturedAxis3D(), budget, seed)
        details = {"found": found is not None, "budget": budget}
        if found is not None:
            triple, ratio = found
            details["witness"] = _triple_payload(triple)
            details["ratio"] = ratio
        return {"certainty": "evidence", "which": which, "details": details}
    if which == "ball-constant":
        details = []
        for alpha in (1.0, 4.0, 12.0):
            est = estimate_quasi_constant(
                MetricSpec.generalized(alpha), UnitBall(2), budget, seed
            )
            bound = ball_constant_lower_bound(alpha)
            details.append(
                {
                    "alpha": alpha,
                    "estimate": est.c_hat,
                    "lower_bound": bound,
                    "difference": est.c_hat - bound,
                }
            )
        return {"certainty": "evidence", "which": which, "details": details}
    raise ParameterError(f"unknown conjecture {which!r} (choose from {', '.join(_CONJECTURES)})")


def _cmd_conjecture(config: RunConfig) -> dict:
    _require(config, "which")
    report = conjecture_report(config.which, config.budget, config.seed)
    return {"result": report, "diagnostics": {"budget": config.budget, "seed": config.seed}}


_COMMANDS = {
    "eval": _cmd_eval,
    "dist": _cmd_dist,
    "quasi": _cmd_quasi,
    "violate": _cmd_violate,
    "threshold": _cmd_threshold,
    "witness": _cmd_witness,
    "oracle": _cmd_oracle,
    "disk": _cmd_disk,
    "conjecture": _cmd_conjecture,
}


def _inputs_payload(config: RunConfig) -> dict:
    skip = {"command", "out", "records"}
    defaults = RunConfig(command=config.command)
    payload = {}
    for name, value in vars(config).items():
        if name in skip or value is None:
            continue
        if name != "seed" and value == getattr(defaults, name) and name not in ("domain",):
            # keep the summary focused on what the caller actually set
            if name in ("budget", "metric", "tol", "format", "family", "rays", "samples", "grid"):
                payload[name] = value
            continue
        payload[name] = value
    return payload


def run_config(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        handler = _COMMANDS[config.command]
    except KeyError:
        print(f"error: unknown command {config.command!r}", file=sys.stderr)
        return 2
    try:
        body = handler(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    summary = {
        "command": config.command,
        "inputs": _jsonify(_inputs_payload(config)),
        "result": _jsonify(body["result"]),
        "diagnostics": _jsonify(body["diagnostics"]),
    }
    text = json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n"
    if config.out is not None and config.format == "json":
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointpair",
        description="Point pair function metrics: evaluation, quasi-metric search, "
        "threshold bisection, inequality sweeps and disk tracing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, domain=True, metric=True, search=False):
        if domain:
            p.add_argument("--domain", required=True, help="domain text form, e.g. ball:2")
        if metric:
            p.add_argument("--metric", default="ppf", help="metric text form, e.g. ppf:alpha=3.5")
        if search:
            p.add_argument("--budget", type=int, default=100000)
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write the summary (or trace) here")

    p = sub.add_parser("eval", help="evaluate a metric at a pair of points")
    common(p)
    p.add_argument("--x", required=True, help="comma-separated coordinates")
    p.add_argument("--y", required=True)

    p = sub.add_parser("dist", help="distance from a point to the domain boundary")
    common(p, metric=False)
    p.add_argument("--x", required=True)

    p = sub.add_parser("quasi", help="estimate the quasi-metric constant")
    common(p, search=True)
    p.add_argument("--records", default=None, help="write per-restart CSV records here")

    p = sub.add_parser("violate", help="search for a triangle inequality violation")
    common(p, search=True)

    p = sub.add_parser("threshold", help="bisect the metricity threshold in alpha")
    common(p, metric=False, search=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--family", default="ppf", choices=("ppf", "psi"))
    p.add_argument("--records", default=None, help="write per-probe CSV records here")

    p = sub.add_parser("witness", help="sharpness triple for the sqrt(5)/2 constant")
    common(p)
    p.add_argument("--z0", required=True, help="ball center, comma-separated")
    p.add_argument("--r", type=float, required=True, help="ball radius")
    p.add_argument("--direction", required=True, help="diameter direction")

    p = sub.add_parser("oracle", help="margin sweep of a certified inequality")
    common(p, domain=False, metric=False)
    p.add_argument("--which", required=True, choices=_ORACLES)
    p.add_argument("--samples", type=int, default=1000000)
    p.add_argument("--grid", type=int, default=100000)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--records", default=None, help="write margin CSV records here")

    p = sub.add_parser("disk", help="trace a metric disk boundary")
    common(p)
    p.add_argument("--center", required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--rays", type=int, default=360)
    p.add_argument("--format", default="json", choices=("json", "csv", "svg"))

    p = sub.add_parser("conjecture", help="numerical evidence for the open questions")
    common(p, domain=False, metric=False, search=True)
    p.add_argument("--which", required=True, choices=_CONJECTURES)

    return parser


def run(argv: list[str]) -> int:
    """Parse argv and execute; returns the exit code without exiting."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return code
    config = RunConfig(command=args.command)
    for name, value in vars(args).items():
        if hasattr(config, name) and value is not None:
            setattr(config, name, value)
    return run_config(config)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
