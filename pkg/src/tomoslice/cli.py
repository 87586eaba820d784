"""Command line front end.

Subcommands: profile, moments, algfit, detect, asymptote, quadric-check.
Exit codes: 0 on success, 2 when a check ran cleanly but reached a negative
verdict (reject, or no workable power), 1 on errors such as malformed body
JSON.  Output is byte deterministic for a fixed configuration and seed: JSON
is dumped with sorted keys and CSV floats are written via repr, and every
report embeds the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import algfit, detect, radon, sections
from .bodies import (
    Direction,
    InfiniteSupportError,
    QuadricDomain,
    body_to_dict,
    chord_interval,
    load_body,
)

__all__ = ["ExperimentConfig", "quadric_check", "run", "main"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

QUADRIC_TOL = 1e-8
QUADRIC_MAX_DEGREE = 8


@dataclass
class ExperimentConfig:
    """Fully resolved run configuration, embedded into every report."""

    command: str
    body: dict
    xi: list | None
    grid: int
    margin: float
    m_max: int
    tol: float
    quad_order: int
    directions: int
    seed: int
    format: str
    threads: int
    window: list | None = None


def _threads_from_env():
    raw = os.environ.get("TOMOSLICE_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TOMOSLICE_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"TOMOSLICE_THREADS must be a positive integer, got {raw!r}")
    return value


def _parse_xi(text, n):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise ValueError(f"--xi must be comma-separated floats, got {text!r}")
    if len(parts) != n:
        raise ValueError(f"--xi has dimension {len(parts)} but the body has dimension {n}")
    return Direction.from_vector(parts)


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_report(config, payload):
    return json.dumps({"config": asdict(config), **payload}, sort_keys=True, indent=2) + "\n"


def _csv_report(config, header, rows):
    lines = ["# config " + json.dumps(asdict(config), sort_keys=True), header]
    for row in rows:
        lines.append(",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def quadric_check(body, xi, window=None, num_points=64, tol=QUADRIC_TOL, max_degree=QUADRIC_MAX_DEGREE):
    """Fit powers of a quadric-domain section profile over a bounded window.

    For m in {1, 2} the degree is grown from 0 until the relative residual
    drops below ``tol`` (or ``max_degree`` is reached); the minimal sufficient
    degree per power is reported.  The m = 2 row is the structural claim under
    test; m = 1 is included because along special directions it already
    suffices (axis profile of a paraboloid is linear in t).

    The default window starts half a unit above the entry offset -h(-xi) and
    spans 3.5 units, which for the axis direction of a paraboloid reduces to
    offsets in [0.5, 4].
    """
    if not isinstance(body, QuadricDomain):
        raise TypeError("quadric_check expects a quadric domain body")
    if window is None:
        entry = -body.support(-np.asarray(xi.components))
        if not math.isfinite(entry):
            raise InfiniteSupportError(
                "no finite entry offset along this direction; pass an explicit window"
            )
        window = (entry + 0.5, entry + 4.0)
    prof = sections.profile(body, xi, num_points=num_points, margin=0.0, window=window)
    if np.all(prof.values == 0.0):
        raise ValueError("window misses the body: all section values vanish")
    results = []
    for m in (1, 2):
        found = None
        last = None
        for degree in range(0, max_degree + 1):
            rep = algfit.fit_power_polynomial(prof, m, degree)
            last = rep.relative_residual
            if rep.relative_residual < tol:
                found = (degree, rep.relative_residual)
                break
        results.append(
            {
                "m": m,
                "min_degree": None if found is None else found[0],
                "relative_residual": last if found is None else found[1],
                "sufficient": found is not None,
            }
        )
    verdict = "conforms" if results[1]["sufficient"] else "deviates"
    return {"window": [float(window[0]), float(window[1])], "results": results, "verdict": verdict}


def _cmd_profile(body, xi, config):
    prof = sections.profile(
        body,
        xi,
        num_points=config.grid,
        margin=config.margin,
        window=None if config.window is None else tuple(config.window),
    )
    if config.format == "json":
        return _json_report(config, {"profile": prof.to_dict()}), EXIT_OK
    rows = [(float(t), float(a)) for t, a in zip(prof.grid, prof.values)]
    return _csv_report(config, "t,A", rows), EXIT_OK


def _cmd_moments(body, xi, config):
    reports = [
        radon.range_test(body, k, config.directions, seed=config.seed, quad_order=config.quad_order)
        for k in (0, 1, 2)
    ]
    if config.format == "json":
        return _json_report(config, {"reports": [r.to_dict() for r in reports]}), EXIT_OK
    rows = []
    for rep in reports:
        for d, mval in zip(rep.directions, rep.moments):
            rows.append((rep.k, *[float(x) for x in d], float(mval)))
    n = body.n
    header = "k," + ",".join(f"xi_{i + 1}" for i in range(n)) + ",moment"
    return _csv_report(config, header, rows), EXIT_OK


def _cmd_algfit(body, xi, config):
    prof = sections.profile(body, xi, num_points=config.grid, margin=config.margin)
    sweep = []
    winner = None
    for m in range(1, config.m_max + 1):
        rep = algfit.fit_power_polynomial(prof, m, m * (prof.n - 1))
        sweep.append({"m": m, "degree": rep.degree, "relative_residual": rep.relative_residual})
        if winner is None and rep.relative_residual < config.tol:
            winner = rep
    if winner is not None and (winner.m * (prof.n - 1)) % 2 == 0:
        lo, hi = chord_interval(body, xi)
        algfit.root_structure(winner, hi, -lo)
    payload = {
        "sweep": sweep,
        "verdict": "none" if winner is None else f"m={winner.m}",
        "winner": None if winner is None else winner.to_dict(),
    }
    code = EXIT_NEGATIVE if winner is None else EXIT_OK
    if config.format == "json":
        return _json_report(config, payload), code
    rows = [(s["m"], s["degree"], float(s["relative_residual"])) for s in sweep]
    return _csv_report(config, "m,D,residual", rows), code


def _cmd_detect(body, xi, config):
    report = detect.is_ellipsoid(
        body,
        tol_linear=config.tol,
        tol_quadratic=config.tol,
        num_directions=config.directions,
        seed=config.seed,
    )
    code = EXIT_OK if report.accepted else EXIT_NEGATIVE
    if config.format == "json":
        return _json_report(config, {"report": report.to_dict()}), code
    rows = [
        ("verdict", report.verdict),
        ("linear_residual", float(report.linear_residual)),
        ("quadratic_residual", float(report.quadratic_residual)),
    ]
    return _csv_report(config, "key,value", rows), code


def _cmd_asymptote(body, xi, config):
    report = algfit.exponent_estimate(body, xi, window=(1e-4, 1e-3), num_points=16)
    predicted = algfit.predicted_boundary_constant(body, xi)
    payload = report.to_dict()
    payload["predicted_constant"] = predicted
    payload["constant_ratio"] = report.estimated_constant / predicted
    if config.format == "json":
        return _json_report(config, {"report": payload}), EXIT_OK
    rows = [(float(d), float(v)) for d, v in zip(report.depths, report.values)]
    return _csv_report(config, "depth,A", rows), EXIT_OK


def _cmd_quadric_check(body, xi, config):
    window = None if config.window is None else tuple(config.window)
    report = quadric_check(body, xi, window=window, num_points=config.grid, tol=config.tol)
    code = EXIT_OK if report["verdict"] == "conforms" else EXIT_NEGATIVE
    if config.format == "json":
        return _json_report(config, {"report": report}), code
    rows = [
        (r["m"], -1 if r["min_degree"] is None else r["min_degree"], float(r["relative_residual"]))
        for r in report["results"]
    ]
    return _csv_report(config, "m,min_degree,residual", rows), code


_COMMANDS = {
    "profile": (_cmd_profile, True),
    "moments": (_cmd_moments, False),
    "algfit": (_cmd_algfit, True),
    "detect": (_cmd_detect, False),
    "asymptote": (_cmd_asymptote, True),
    "quadric-check": (_cmd_quadric_check, True),
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="tomoslice",
        description="Section volume profiles of convex bodies and their algebraic structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--body", required=True, help="path to a body JSON file")
        p.add_argument("--xi", default=None, help="direction as comma-separated floats (normalized)")
        p.add_argument("--grid", type=int, default=64, help="profile grid size")
        p.add_argument("--margin", type=float, default=0.02, help="relative margin trimmed per chord end")
        p.add_argument("--m-max", type=int, default=4, dest="m_max", help="largest power to try")
        p.add_argument("--tol", type=float, default=None, help="acceptance tolerance")
        p.add_argument("--quad-order", type=int, default=64, dest="quad_order")
        p.add_argument("--directions", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--window", default=None, help="explicit t window LO,HI (quadric bodies)")
    return parser


_DEFAULT_TOL = {
    "profile": 1e-6,
    "moments": 1e-6,
    "algfit": algfit.DEFAULT_ACCEPT_TOL,
    "detect": detect.DEFAULT_TOL_EXACT,
    "asymptote": 1e-6,
    "quadric-check": QUADRIC_TOL,
}


def run(argv=None):
    args = _build_parser().parse_args(argv)
    threads = _threads_from_env()
    body = load_body(args.body)
    handler, needs_xi = _COMMANDS[args.command]
    xi = None
    if args.xi is not None:
        xi = _parse_xi(args.xi, body.n)
    elif needs_xi:
        raise ValueError(f"the {args.command} command requires --xi")
    window = None
    if args.window is not None:
        parts = args.window.split(",")
        if len(parts) != 2:
            raise ValueError("--window must be LO,HI")
        window = [float(parts[0]), float(parts[1])]
    tol = args.tol if args.tol is not None else _DEFAULT_TOL[args.command]
    config = ExperimentConfig(
        command=args.command,
        body=body_to_dict(body),
        xi=None if xi is None else xi.components.tolist(),
        grid=args.grid,
        margin=args.margin,
        m_max=args.m_max,
        tol=tol,
        quad_order=args.quad_order,
        directions=args.directions,
        seed=args.seed,
        format=args.format,
        threads=threads,
        window=window,
    )
    text, code = handler(body, xi, config)
    _emit(text, args.out)
    return code


def main(argv=None):
    try:
        return run(argv)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
