"""Command-line front end.

Subcommands: ``demo``, ``localize``, ``sweep``, ``verify``, ``optimize``
and ``pareto``. Exit status is 0 on success, 1 when ``verify`` finds a
deviation beyond tolerance, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .entanglement import assisted_average, coa_search, concurrence, concurrence_of_assistance
from .explorer import (
    FIGURES,
    Axis,
    OUTPUTS,
    SweepSpec,
    DEFAULT_OUTPUTS,
    expand_param,
    figure_presets,
    optimize_reversal,
    pareto_frontier,
    sweep,
)
from .linalg import partial_trace
from .protocols import STRENGTHS, ProtocolParams, run, verify_closed_forms
from .report import format_number, to_csv, to_json
from .states import resolve_initial

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
STRATEGY_CHOICES = ("distributed", "local", "projective")
NOISE_CHOICES = ("none", "ad", "dp", "pd")
DEFAULTS = {k: 0.0 for k in STRENGTHS} | {"strategy": "distributed", "noise": "none", "initial": "paper-default"}


class UsageError(Exception):
    pass


def unit_interval(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{x!r} is outside [0, 1]")
    return x


def initial_state(text: str) -> str:
    try:
        resolve_initial(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    # defaults stay None so a --params file can fill the gaps
    p.add_argument("--params", type=Path, help="key=value file with the same names as the flags")
    p.add_argument("--strategy", choices=STRATEGY_CHOICES)
    for name in ("p1", "p2", "p3", "q1", "q2", "q3"):
        p.add_argument(f"--{name}", type=unit_interval)
    p.add_argument("--noise", choices=NOISE_CHOICES)
    p.add_argument("--d1", type=unit_interval)
    p.add_argument("--d2", type=unit_interval)
    p.add_argument("--initial", type=initial_state, help="paper-default | equal-w | gw-mixed | w:a1,a2,a3")


def _add_output_flags(p: argparse.ArgumentParser, fmt: str = "json") -> None:
    p.add_argument("--out", type=Path, help="write here instead of standard output")
    p.add_argument("--format", choices=("json", "csv"), default=fmt)


def read_params_file(path: Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown parameter {key!r}")
        values[key] = value
    return values


def merged_params(args: argparse.Namespace) -> tuple[ProtocolParams, set[str]]:
    """Combine defaults, the ``--params`` file and flags (flags win).

    Also returns the names that were set explicitly by either source.
    """
    merged: dict = dict(DEFAULTS)
    explicit: set[str] = set()
    if getattr(args, "params", None):
        for key, value in read_params_file(args.params).items():
            try:
                if key in STRENGTHS:
                    value = unit_interval(value)
                elif key == "strategy" and value not in STRATEGY_CHOICES:
                    raise argparse.ArgumentTypeError(f"invalid choice {value!r}")
                elif key == "noise" and value not in NOISE_CHOICES:
                    raise argparse.ArgumentTypeError(f"invalid choice {value!r}")
                elif key == "initial":
                    value = initial_state(value)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"--{key} (from {args.params}): {exc}") from None
            merged[key] = value
            explicit.add(key)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
            explicit.add(key)
    return ProtocolParams(**merged), explicit


def protocol_params(args: argparse.Namespace) -> ProtocolParams:
    return merged_params(args)[0]


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _params_dict(params: ProtocolParams) -> dict:
    d = params.as_dict()
    d["strategy"] = {"fully_local": "local", "projective_baseline": "projective"}.get(d["strategy"], d["strategy"])
    return d


def _deviation(a, b):
    return None if a is None or b is None else abs(a - b)


def run_report(params: ProtocolParams) -> dict:
    out = run(params)
    init = resolve_initial(params.initial)
    report: dict = {"params": _params_dict(params)}
    if init.normalization != 1.0:
        report["initial_normalization"] = init.normalization
    report["simulated"] = {
        "concurrence": out.concurrence,
        "success_prob": out.success_prob,
        "c13": out.c13,
        "c23": out.c23,
    }
    if out.closed_form_concurrence is not None or out.closed_form_success is not None:
        report["closed_form"] = {"concurrence": out.closed_form_concurrence, "success": out.closed_form_success}
        report["deviation"] = {
            "concurrence": _deviation(out.concurrence, out.closed_form_concurrence),
            "success": _deviation(out.success_prob, out.closed_form_success),
        }
    else:
        report["closed_form"] = None
        report["deviation"] = None
    if out.split_success is not None:
        report["split_success_product"] = {
            "value": out.split_success,
            "difference": out.success_prob - out.split_success,
        }
    if out.postselection_failed:
        report["warning"] = "postselection impossible: success probability below 1e-15, concurrence undefined"
    return report


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_demo(args) -> int:
    init = resolve_initial(args.initial or "paper-default")
    rho12 = partial_trace(init.rho.matrix, 3, [3])
    c12 = concurrence(rho12).value
    base = ProtocolParams("projective", initial=init.name)
    proj = run(base)
    result = {
        "state": init.name,
        "concurrence": c12,
        "projective_success": proj.success_prob,
        "projective_concurrence": proj.concurrence,
    }
    if init.psi is not None:
        result["coa"] = concurrence_of_assistance(init.psi)
        result["computational_basis_average"] = assisted_average(init.psi, 0.0, 0.0)
        value, theta, phi = coa_search(init.psi, n_theta=args.coa_grid, n_phi=2 * args.coa_grid, refine=True)
        result["coa_search"] = value
    if args.format == "json":
        _emit(to_json(result), args.out)
    else:
        lines = [f"{k}={v if isinstance(v, str) else format_number(v)}" for k, v in result.items()]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_localize(args) -> int:
    params = protocol_params(args)
    t0 = time.perf_counter()
    report = run_report(params)
    if args.timing:
        report["timing_s"] = time.perf_counter() - t0
    if args.format == "csv":
        sim, cf, dev = report["simulated"], report["closed_form"] or {}, report["deviation"] or {}
        cols = list(STRENGTHS) + ["concurrence", "success_prob", "closed_form_concurrence", "closed_form_success", "deviation"]
        row = [getattr(params, k) for k in STRENGTHS] + [
            sim["concurrence"],
            sim["success_prob"],
            cf.get("concurrence"),
            cf.get("success"),
            dev.get("concurrence"),
        ]
        _emit(to_csv(cols, [row]), args.out)
    else:
        _emit(to_json(report), args.out)
    return EXIT_OK


def _parse_axis(text: str, density: int) -> Axis:
    parts = text.split(":")
    if len(parts) not in (1, 3, 4):
        raise UsageError(f"--axis {text!r}: expected NAME[:LO:HI[:STEPS]]")
    name = parts[0]
    lo, hi = (float(parts[1]), float(parts[2])) if len(parts) >= 3 else (0.0, 0.99)
    steps = int(parts[3]) if len(parts) == 4 else density
    return Axis(name, lo, hi, steps)


def cmd_sweep(args) -> int:
    if args.figure:
        presets = figure_presets(args.density)
        if args.figure not in presets:
            raise UsageError(f"unknown figure preset {args.figure!r}; valid presets: {', '.join(FIGURES)}")
        spec = presets[args.figure]
    else:
        if not args.axis:
            raise UsageError("sweep needs --figure or at least one --axis")
        base = protocol_params(args)
        outputs = tuple(args.outputs.split(",")) if args.outputs else DEFAULT_OUTPUTS
        optimize = tuple(args.optimize.split(",")) if args.optimize else ()
        axes = tuple(_parse_axis(a, args.density) for a in args.axis)
        try:
            spec = SweepSpec(base, axes, outputs, optimize)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    table = sweep(spec)
    if args.format == "json":
        rows = [dict(zip(table.columns, r)) for r in table.rows]
        _emit(to_json({"note": table.note, "columns": table.columns, "rows": rows}), args.out)
    else:
        _emit(to_csv(table.columns, table.rows, table.note), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_closed_forms(grid=args.grid)
    rows = [
        {
            "check": r.name,
            "free": ",".join(r.free),
            "points": r.points,
            "max_deviation": r.max_deviation,
            "tolerance": None if r.informational else r.tol,
            "status": "info" if r.informational else ("pass" if r.passed else "FAIL"),
        }
        for r in report.rows
    ]
    if args.format == "json":
        _emit(to_json({"grid": report.grid, "passed": report.passed, "checks": rows}), args.out)
    elif args.format == "csv":
        _emit(to_csv(list(rows[0]), [list(r.values()) for r in rows]), args.out)
    else:
        width = max(len(r["check"]) for r in rows)
        lines = [f"{'check':<{width}}  {'points':>7}  {'max_deviation':>20}  status"]
        for r in rows:
            lines.append(
                f"{r['check']:<{width}}  {r['points']:>7}  {format_number(r['max_deviation']):>20}  {r['status']}"
            )
        lines.append(f"overall: {'pass' if report.passed else 'FAIL'} (grid {report.grid} per axis)")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _default_which(strategy: str, explicit: set[str]) -> tuple[str, ...]:
    # every measurement strength of the strategy that the caller left open
    names = ("p3", "q3") if strategy == "fully_local" else ("p1", "p2", "q1", "q2")
    return tuple(n for n in names if n not in explicit)


def _optimum_dict(res) -> dict:
    return {
        "strategy": _params_dict(res.params)["strategy"],
        "strengths": res.strengths,
        "concurrence": res.value,
        "success_prob": res.success_prob,
        "feasible": res.feasible,
    }


def cmd_optimize(args) -> int:
    params, explicit = merged_params(args)
    if params.strategy == "projective_baseline":
        raise UsageError("--strategy projective has no measurement strengths to optimize")
    which = tuple(args.which.split(",")) if args.which else _default_which(params.strategy, explicit)
    if not which:
        raise UsageError("nothing to optimize: every measurement strength is fixed; pass --which")
    try:
        res = optimize_reversal(params, which, args.min_success)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = {"params": _params_dict(params), "objective": res.objective, "min_success": res.min_success}
    result.update(_optimum_dict(res))
    if not res.feasible:
        result["infeasible"] = True
    if args.compare:
        other = "distributed" if params.strategy == "fully_local" else "fully_local"
        alt = optimize_reversal(replace(params, strategy=other), _default_which(other, explicit), args.min_success)
        result["counterpart"] = _optimum_dict(alt)
        if not alt.feasible:
            result["counterpart"]["infeasible"] = True
    _emit(to_json(result), args.out)
    return EXIT_OK


def cmd_pareto(args) -> int:
    params = protocol_params(args)
    free = [f for item in args.free for f in item.split(",")]
    try:
        for f in free:
            expand_param(f, params.strategy)
        frontier = pareto_frontier(params, free, args.density)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = [p for f in free for p in expand_param(f, params.strategy)]
    names = list(dict.fromkeys(names))
    if args.format == "csv":
        rows = [[getattr(pt.params, n) for n in names] + [pt.concurrence, pt.success_prob] for pt in frontier]
        _emit(to_csv(names + ["concurrence", "success_prob"], rows), args.out)
    else:
        points = [
            {"params": {n: getattr(pt.params, n) for n in names}, "concurrence": pt.concurrence, "success_prob": pt.success_prob}
            for pt in frontier
        ]
        _emit(to_json({"params": _params_dict(params), "free": names, "frontier": points}), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmloc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="baseline concurrence, assistance and projective localization")
    p.add_argument("--initial", type=initial_state)
    p.add_argument("--coa-grid", type=int, default=91, help="theta steps of the assistance search (phi uses twice as many)")
    _add_output_flags(p, fmt="text")
    p.set_defaults(func=cmd_demo)
    p._option_string_actions["--format"].choices = ("text", "json")

    p = sub.add_parser("localize", help="simulate one protocol run")
    _add_protocol_flags(p)
    _add_output_flags(p)
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("sweep", help="figure presets or custom grids as CSV")
    _add_protocol_flags(p)
    _add_output_flags(p, fmt="csv")
    p.add_argument("--figure", help=f"one of: {', '.join(FIGURES)}")
    p.add_argument("--axis", action="append", help="NAME[:LO:HI[:STEPS]], e.g. p1:0:0.99:32 or d1=d2")
    p.add_argument("--density", type=int, default=32, help="grid steps per axis (default 32)")
    p.add_argument("--outputs", help=f"comma list from: {', '.join(OUTPUTS)}")
    p.add_argument("--optimize", help="reversal strengths to re-optimize at every point, e.g. q1,q2")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="cross-check closed forms against simulation")
    p.add_argument("--grid", type=int, default=9, help="points per free parameter (default 9)")
    _add_output_flags(p, fmt="text")
    p._option_string_actions["--format"].choices = ("text", "json", "csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", help="best reversal strengths, optionally with a success floor")
    _add_protocol_flags(p)
    _add_output_flags(p)
    p.add_argument(
        "--which",
        help="comma list from p1,p2,p3,q1,q2,q3 (default: the strategy's measurement strengths not set explicitly)",
    )
    p.add_argument("--min-success", type=unit_interval)
    p.add_argument(
        "--compare",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="also optimize the other strategy (default on)",
    )
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("pareto", help="concurrence vs success-probability frontier")
    _add_protocol_flags(p)
    _add_output_flags(p)
    p.add_argument("--free", action="append", required=True, help="free parameter(s), e.g. q or q1,q2 or p3")
    p.add_argument("--density", type=int, default=64)
    p.set_defaults(func=cmd_pareto)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream reader closed early, e.g. piping into head
        sys.stderr.close()
        return EXIT_OK
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    except ValueError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
