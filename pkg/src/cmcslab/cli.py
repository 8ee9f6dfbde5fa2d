"""Command-line dispatcher.

Thin wrapper over the library: every number printed or written is the
untouched library result, rendered deterministically (sorted JSON keys,
17-significant-digit floats).  Exit codes: 0 success, 1 usage/validation,
2 numerical failure or I/O, 3 empty shooting bracket.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._serialize import canonical_csv, canonical_json
from .errors import (
    AxisCrossingError,
    DegenerateOrbitError,
    GeometryDomainError,
    NoSolutionError,
    SolverFailure,
    StiffnessError,
)
from .operators import BoundaryCondition, merge_modes
from .profile import RotationalSurface, cylinder_surface, shoot_profiles
from .stability import (
    CapillaryBoundary,
    capillary_q,
    cylinder_stable,
    decide_surface,
    nonexistence_width,
    rosenberg_bound,
    tube_threshold_numeric,
    tube_verdict,
)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on usage errors."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def emit_report(obj, fmt: str = "json", out: str | None = None) -> str:
    """Render a result deterministically and optionally write it to a file."""
    if fmt == "json":
        text = canonical_json(obj) + "\n"
    elif fmt == "csv":
        text = canonical_csv(obj["header"], obj["rows"])
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if out is not None:
        Path(out).write_text(text)
    return text


def _load_surface(path: str) -> RotationalSurface:
    return RotationalSurface.from_json(Path(path).read_text())


def _add_common(p, *names):
    if "kappa" in names:
        p.add_argument("--kappa", type=int, required=False, choices=(-1, 0, 1))
    if "n" in names:
        p.add_argument("--n", type=int, required=False)
    if "grid" in names:
        p.add_argument("--grid", type=int, default=400)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="cmcslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tube", parents=[], help="closed-form and numerical tube verdicts")
    _add_common(p, "kappa", "n", "grid")
    p.add_argument("--rho", type=float)
    p.add_argument("--l", type=float)

    p = sub.add_parser("cylinder", help="cylinder criterion from a base eigenvalue")
    _add_common(p)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--base", type=str, default="Stable")

    p = sub.add_parser("profile", help="shoot a rotational CMC profile")
    _add_common(p, "kappa", "n")
    p.add_argument("--H", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--theta0", type=float, default=math.pi / 2)
    p.add_argument("--theta1", type=float, default=math.pi / 2)
    p.add_argument("--bracket", type=float, nargs=2)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--which", type=int, default=0)

    p = sub.add_parser("spectrum", help="mode spectrum of a stored surface")
    _add_common(p, "grid")
    p.add_argument("--surface", type=str)
    p.add_argument("--bc", type=str, default="neumann")
    p.add_argument("--modes", type=int, default=64)
    p.add_argument("--count", type=int, default=12)

    p = sub.add_parser("decide", help="stability verdict of a stored surface")
    _add_common(p, "grid")
    p.add_argument("--surface", type=str)
    p.add_argument("--bc", type=str, default="neumann")
    p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("scan", help="numeric vs closed-form tube thresholds")
    _add_common(p, "kappa", "n")
    p.add_argument("--rho-range", type=float, nargs=2, dest="rho_range")
    p.add_argument("--samples", type=int, default=25)

    p = sub.add_parser("bounds", help="nonexistence width and distance/diameter bounds")
    _add_common(p)
    p.add_argument("--kappa", type=float)

    p = sub.add_parser("q", help="capillary Robin coefficient")
    _add_common(p)
    p.add_argument("--theta", type=float)
    p.add_argument("--II", type=float, dest="II")
    p.add_argument("--sigma", type=float)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--fast", action="store_true")
    return parser


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise GeometryDomainError(f"missing required parameter(s): {', '.join(missing)}")


def cmd_tube(args) -> int:
    _require(args, "kappa", "n", "rho", "l")
    closed = tube_verdict(args.kappa, args.n, args.rho, args.l)
    surface = cylinder_surface(args.kappa, args.n, args.rho, args.l)
    numerical = decide_surface(surface, m=args.grid)
    print(emit_report(
        {"closed_form": closed.as_dict(), "numerical": numerical.as_dict()},
        out=args.out,
    ), end="")
    return 0


def cmd_cylinder(args) -> int:
    _require(args, "lambda1", "l")
    verdict = cylinder_stable(args.lambda1, args.base, args.l)
    print(emit_report(verdict.as_dict(), out=args.out), end="")
    return 0


def cmd_profile(args) -> int:
    _require(args, "kappa", "n", "H", "l", "bracket", "out")
    surfaces = shoot_profiles(
        args.kappa, args.n, args.H, args.l, tuple(args.bracket),
        theta0=args.theta0, theta1=args.theta1,
        tol=args.tol, samples=args.samples,
    )
    if not 0 <= args.which < len(surfaces):
        raise NoSolutionError(
            f"root index {args.which} out of range; {len(surfaces)} solution(s) found"
        )
    Path(args.out).write_text(surfaces[args.which].to_json())
    print(canonical_json({"roots_found": len(surfaces), "written": args.out}))
    return 0


def cmd_spectrum(args) -> int:
    _require(args, "surface", "out")
    surface = _load_surface(args.surface)
    bc = BoundaryCondition.parse(args.bc)
    spectrum = merge_modes(
        surface, bc, bc, args.grid, count=args.count, j_max=args.modes
    ).truncated(args.count)
    Path(args.out).write_text(spectrum.to_csv())
    print(canonical_json({"entries": len(spectrum.entries), "written": args.out}))
    return 0


def cmd_decide(args) -> int:
    _require(args, "surface")
    surface = _load_surface(args.surface)
    bc = BoundaryCondition.parse(args.bc)
    verdict = decide_surface(surface, bc=(bc, bc), m=args.grid, eps=args.eps)
    print(emit_report(verdict.as_dict(), out=args.out), end="")
    return 0


def cmd_scan(args) -> int:
    _require(args, "kappa", "n", "rho_range")
    lo, hi = args.rho_range
    rhos = np.linspace(lo, hi, args.samples)
    rows = []
    for rho in rhos:
        l_num = tube_threshold_numeric(args.kappa, args.n, float(rho))
        l_closed = tube_verdict(args.kappa, args.n, float(rho), 1.0).provenance["threshold_l"]
        rows.append((float(rho), l_num, l_closed, abs(l_num - l_closed) / abs(l_closed)))
    text = emit_report(
        {"header": ("rho", "l_star_numeric", "l_star_closed", "abs_rel_err"), "rows": rows},
        fmt="csv", out=args.out,
    )
    if args.out is None:
        print(text, end="")
    return 0


def cmd_bounds(args) -> int:
    _require(args, "kappa")
    dist, diam = rosenberg_bound(args.kappa)
    obj = {
        "nonexistence_width": nonexistence_width(args.kappa),
        "distance_bound": dist,
        "diameter_bound": diam,
    }
    print(emit_report(obj, out=args.out), end="")
    return 0


def cmd_q(args) -> int:
    _require(args, "theta", "II", "sigma")
    value = capillary_q(CapillaryBoundary(args.theta, args.II, args.sigma))
    print(format(value, ".17g"))
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(fast=args.fast)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    return 0 if all(r.passed for r in results) else 2


_HANDLERS = {
    "tube": cmd_tube,
    "cylinder": cmd_cylinder,
    "profile": cmd_profile,
    "spectrum": cmd_spectrum,
    "decide": cmd_decide,
    "scan": cmd_scan,
    "bounds": cmd_bounds,
    "q": cmd_q,
    "verify": cmd_verify,
}


def _apply_config(args) -> None:
    """Fill parameters that are still None from a JSON config file."""
    if getattr(args, "config", None) is None:
        return
    doc = json.loads(Path(args.config).read_text())
    if not isinstance(doc, dict):
        raise GeometryDomainError("config file must hold a JSON object")
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args)
        return _HANDLERS[args.command](args)
    except (GeometryDomainError, DegenerateOrbitError, ValueError, KeyError) as exc:
        print(f"cmcslab: validation error: {exc}", file=sys.stderr)
        return 1
    except NoSolutionError as exc:
        print(f"cmcslab: no solution: {exc}", file=sys.stderr)
        return 3
    except (SolverFailure, StiffnessError, AxisCrossingError, RuntimeError, OSError) as exc:
        print(f"cmcslab: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
