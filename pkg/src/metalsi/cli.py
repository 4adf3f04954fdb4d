"""Command-line interface: ``metalsi {alpha,verify,sweep}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
3 inconclusive because the truncation could not be trusted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .channels import ChannelFamily
from .fock import random_state
from .lsi_ou import alpha_p, multimode_alpha2_bound, ou_upsilon_params, phi, thermal_ratio
from .meta_lsi import eta_th, upsilon_thermal
from .verify import CLASSES, SUITES, Check, SuiteConfig, _family, run_suite

SCHEMA = "metalsi.report/1"
OUT_ENV = "METALSI_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

ALPHA_COLUMNS = ("p", "beta", "alpha_p", "m", "alpha2_multimode_bound")
SWEEP_COLUMNS = {
    "eta": ("p", "beta", "x", "upsilon_thermal", "eta_th", "x_star"),
    "ratio": ("p", "beta", "y", "thermal_ratio", "alpha_p", "excess"),
    "phi": ("p", "x", "y", "phi"),
    "trajectory": ("class", "t", "s_rho", "s_tau", "margin", "edge_mass"),
}

EPILOG = f"""\
outputs:
  alpha       CSV columns {",".join(ALPHA_COLUMNS)}
  sweep eta        {",".join(SWEEP_COLUMNS["eta"])}
  sweep ratio      {",".join(SWEEP_COLUMNS["ratio"])}
  sweep phi        {",".join(SWEEP_COLUMNS["phi"])}
  sweep trajectory {",".join(SWEEP_COLUMNS["trajectory"])}
  verify      JSON report (schema {SCHEMA}) or CSV columns name,value,target,tolerance,relation,passed,inconclusive,note

config files hold one "key = value" per line ("#" starts a comment); keys are
flag names without the leading dashes.  Flags given on the command line win.
Without --out, results go to ${OUT_ENV}/<command>.<format> when that variable
is set and to stdout otherwise.

exit codes: 0 pass, 1 check failure, 2 usage error, 3 inconclusive (truncation)
"""


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list[float]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key=value file with defaults for the flags")
    p.add_argument("--out", type=Path, help="output file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds in the JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metalsi",
        description="Truncated Fock-space checks of log-Sobolev and entropy inequalities for Gaussian semigroups.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"metalsi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("alpha", help="table of alpha_p and the multimode 2-LSI bound", epilog=EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    pa.add_argument("--p", type=_floats, default=[1.0, 1.25, 1.5, 2.0])
    pa.add_argument("--beta", type=_floats, default=[0.5, 1.0, 2.0])
    pa.add_argument("--m", type=_ints, default=[1, 2])
    pa.add_argument("--format", choices=("csv", "json"), default="csv")
    _common(pa)

    pv = sub.add_parser("verify", help="run a verification suite", epilog=EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    pv.add_argument("suite", choices=SUITES + ("all",))
    pv.add_argument("--beta", type=float, default=1.0)
    pv.add_argument("--p", type=_floats, default=None)
    pv.add_argument("--dim", type=_ints, default=None, help="one value, or two for a convergence pair")
    pv.add_argument("--samples", type=int, default=None)
    pv.add_argument("--t-max", type=float, default=None)
    pv.add_argument("--steps", type=int, default=20)
    pv.add_argument("--class", dest="cls", choices=CLASSES, default=None)
    pv.add_argument("--c", type=float, default=None, help="channel strength c")
    pv.add_argument("--format", choices=("json", "csv"), default="json")
    _common(pv)

    ps = sub.add_parser("sweep", help="CSV tables for plotting", epilog=EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ps.add_argument("kind", choices=tuple(SWEEP_COLUMNS))
    ps.add_argument("--beta", type=float, default=1.0)
    ps.add_argument("--p", type=_floats, default=[2.0])
    ps.add_argument("--points", type=int, default=200)
    ps.add_argument("--dim", type=int, default=40)
    ps.add_argument("--rank", type=int, default=4)
    ps.add_argument("--t-max", type=float, default=2.0)
    ps.add_argument("--steps", type=int, default=40)
    ps.add_argument("--class", dest="cls", choices=CLASSES, default="attenuator")
    ps.add_argument("--c", type=float, default=None)
    ps.add_argument("--format", choices=("csv", "json"), default="csv")
    _common(ps)
    return parser


def read_config(path: Path) -> list[str]:
    """Turn ``key = value`` lines into flag tokens."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag in ("--config", "--suite", "--kind", "--command"):
            raise UsageError(f"{path}:{lineno}: {key!r} cannot be set from a config file")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, value]
    return tokens


def parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    # file tokens go right after the command word so later command-line flags win
    head = list(argv).index(args.command) + 1
    merged = list(argv[:head]) + read_config(args.config) + list(argv[head:])
    return parser.parse_args(merged)


# ---------------------------------------------------------------------------
# reports


def _clean(v: Any) -> Any:
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def config_echo(args: argparse.Namespace) -> dict:
    skip = {"out", "config", "timing"}
    return {k: _clean(v) for k, v in sorted(vars(args).items()) if k not in skip}


def summarize(checks: Sequence[Check]) -> dict:
    failed = [c.name for c in checks if not c.passed and not c.inconclusive]
    inconc = [c.name for c in checks if c.inconclusive]
    status = "fail" if failed else ("inconclusive" if inconc else "pass")
    return {
        "checks": len(checks),
        "passed": sum(c.passed for c in checks),
        "failed": failed,
        "inconclusive": inconc,
        "status": status,
    }


def exit_code(summary: dict) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[summary["status"]]


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def render_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(text: str, args: argparse.Namespace, stem: str) -> None:
    target = args.out
    if target is None and os.environ.get(OUT_ENV):
        target = Path(os.environ[OUT_ENV]) / f"{stem}.{args.format}"
    if target is None:
        sys.stdout.write(text)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    print(f"wrote {target}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def cmd_alpha(args: argparse.Namespace) -> int:
    if not args.p or not args.beta or not args.m:
        raise UsageError("empty grid: --p, --beta and --m need at least one value each")
    if min(args.p) < 1:
        raise UsageError("p must be at least 1")
    if min(args.beta) <= 0:
        raise UsageError("beta must be positive")
    if min(args.m) < 1:
        raise UsageError("m must be a positive integer")
    rows = [
        (p, b, alpha_p(p, b), m, multimode_alpha2_bound(m, b))
        for p in args.p
        for b in args.beta
        for m in args.m
    ]
    if args.format == "csv":
        emit(render_csv(ALPHA_COLUMNS, rows), args, "alpha")
    else:
        report = {"schema": SCHEMA, "command": "alpha", "config": config_echo(args), "seed": args.seed,
                  "columns": list(ALPHA_COLUMNS), "rows": [list(map(_clean, r)) for r in rows]}
        emit(render_json(report), args, "alpha")
    return EXIT_OK


def _suite_config(args: argparse.Namespace) -> SuiteConfig:
    dims = args.dim
    if dims is not None and not 1 <= len(dims) <= 2:
        raise UsageError("--dim takes one or two values")
    if dims is not None and min(dims) < 4:
        raise UsageError("--dim must be at least 4")
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be positive")
    if args.t_max is not None and args.t_max <= 0:
        raise UsageError("--t-max must be positive")
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    if args.beta <= 0:
        raise UsageError("--beta must be positive")
    if args.c is not None and args.c <= 0:
        raise UsageError("--c must be positive")
    if args.p is not None and (not args.p or min(args.p) < 1 or max(args.p) > 2):
        raise UsageError("--p values must lie in [1, 2]")
    return SuiteConfig(
        beta=args.beta,
        p=args.p,
        dim=None if dims is None else dims[-1],
        dim_pair=tuple(sorted(dims)) if dims is not None and len(dims) == 2 else None,
        samples=args.samples,
        seed=args.seed,
        t_max=args.t_max,
        steps=args.steps,
        cls=args.cls,
        c=args.c,
    )


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _suite_config(args)
    start = time.perf_counter()
    checks = run_suite(args.suite, cfg)
    elapsed = time.perf_counter() - start
    summary = summarize(checks)
    stem = f"verify-{args.suite}"
    if args.format == "json":
        report = {
            "schema": SCHEMA,
            "command": "verify",
            "suite": args.suite,
            "config": config_echo(args),
            "seed": args.seed,
            "checks": [c.to_dict() for c in checks],
            "summary": summary,
        }
        if args.timing:
            report["wall_clock_s"] = round(elapsed, 3)
        emit(render_json(report), args, stem)
    else:
        cols = ("name", "value", "target", "tolerance", "relation", "passed", "inconclusive", "note")
        rows = [(c.name, c.value, c.target, c.tolerance, c.relation, c.passed, c.inconclusive, c.note) for c in checks]
        emit(render_csv(cols, rows), args, stem)
    for c in checks:
        if not c.passed:
            tag = "INCONCLUSIVE" if c.inconclusive else "FAIL"
            print(f"{tag} {c.name}: value={c.value:.6g} target={c.target:.6g} {c.note}".rstrip(), file=sys.stderr)
    print(f"{summary['status']}: {summary['passed']}/{summary['checks']} checks passed in {elapsed:.1f}s", file=sys.stderr)
    return exit_code(summary)


def _sweep_rows(args: argparse.Namespace) -> tuple[list[tuple], list[Check]]:
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if not args.p:
        raise UsageError("empty grid: --p needs at least one value")
    beta = args.beta
    rows: list[tuple] = []
    checks: list[Check] = []
    if args.kind == "eta":
        if min(args.p) <= 1 or max(args.p) > 2:
            raise UsageError("sweep eta needs 1 < p <= 2")
        xs = np.linspace(0.0, 1.0, args.points + 2)[1:-1]
        for p in args.p:
            prm = ou_upsilon_params(p, beta)
            eta = eta_th(prm)
            for x, u in zip(xs, upsilon_thermal(xs, prm)):
                rows.append((p, beta, x, u, eta.value, eta.x_star))
    elif args.kind == "ratio":
        ys = np.linspace(0.01, 0.999, args.points)
        for p in args.p:
            a = alpha_p(p, beta)
            r = thermal_ratio(ys, p, beta)
            keep = np.isfinite(r)
            rows += [(p, beta, y, v, a, v - a) for y, v in zip(ys[keep], r[keep])]
            steps = np.diff(r[keep])
            checks.append(Check(f"sweep[ratio,p={p:g}].nonincreasing", float(steps.max()), 0.0, 1e-12, "<=",
                                bool(steps.max() <= 1e-12)))
            checks.append(Check(f"sweep[ratio,p={p:g}].above_alpha", float((r[keep] - a).min()), 0.0, 1e-12, ">=",
                                bool((r[keep] - a).min() >= -1e-12)))
    elif args.kind == "phi":
        grid = np.linspace(0.005, 0.995, args.points)
        for p in args.p:
            vals = phi(grid[:, None], grid[None, :], p)
            rows += [(p, x, y, vals[i, j]) for i, x in enumerate(grid) for j, y in enumerate(grid)]
            checks.append(Check(f"sweep[phi,p={p:g}].min", float(vals.min()), 0.0, 1e-12, ">=",
                                bool(vals.min() >= -1e-12)))
    else:
        from .cmoe import cmoe_verify

        fam: ChannelFamily = _family(args.cls, beta, args.c)
        st = random_state(args.dim, rank=args.rank, seed=args.seed, support=min(10, args.dim))
        tr = cmoe_verify(st, fam, args.t_max, args.steps)
        rows = [(args.cls, t, a, b, a - b, e) for t, a, b, e in zip(tr.times, tr.s_rho, tr.s_tau, tr.edge_mass)]
        checks.append(Check("trajectory.min_margin", tr.min_margin, 0.0, 1e-6, ">=", bool(tr.min_margin >= -1e-6)))
        if tr.flagged:
            checks.append(Check("trajectory.tail_guard", float(len(rows)), float(args.steps + 1), 0.0, ">=",
                                False, inconclusive=True, note=tr.note))
    nan_free = all(math.isfinite(v) for r in rows for v in r if isinstance(v, (float, np.floating)))
    checks.append(Check(f"sweep[{args.kind}].nan_free", float(nan_free), 1.0, 0.0, "==", nan_free))
    return rows, checks


def cmd_sweep(args: argparse.Namespace) -> int:
    rows, checks = _sweep_rows(args)
    cols = SWEEP_COLUMNS[args.kind]
    stem = f"sweep-{args.kind}"
    if args.format == "csv":
        emit(render_csv(cols, rows), args, stem)
    else:
        report = {"schema": SCHEMA, "command": "sweep", "kind": args.kind, "config": config_echo(args),
                  "seed": args.seed, "columns": list(cols), "rows": [list(map(_clean, r)) for r in rows],
                  "checks": [c.to_dict() for c in checks], "summary": summarize(checks)}
        emit(render_json(report), args, stem)
    for c in checks:
        if not c.passed:
            print(f"{'INCONCLUSIVE' if c.inconclusive else 'FAIL'} {c.name} {c.note}".rstrip(), file=sys.stderr)
    return exit_code(summarize(checks))


COMMANDS = {"alpha": cmd_alpha, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except SystemExit as exc:  # argparse: --help exits 0, errors exit 2
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"metalsi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"metalsi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
