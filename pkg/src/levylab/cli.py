"""levylab command line: sample, renorm-report, converge, ut-certify, sde-stability.

Exit codes: 0 success, 1 a hard assertion failed (the failing row is printed
to stderr), 2 usage or parameter error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import diagnostics, models, renormalization, sde
from .errors import CertificateFailure, DomainError, LevyError, NumericalError, UnsupportedFamilyError
from .samplers import PathGrid, RngStream, sample_family

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "LEVYLAB_SEED"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_list(text: str) -> list[float]:
    """'a,b,c' or 'start:stop:count' (inclusive, evenly spaced)."""
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:count, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("range count must be >= 1")
        return [float(x) for x in np.round(np.linspace(lo, hi, n), 12)]
    return [float(x) for x in text.split(",") if x.strip()]


def read_config(path: str) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment, keys may use '-' or '_'."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _family(args) -> models.ProcessFamily:
    return models.family(args.family, args.alpha)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _rng(command: str, seed: int) -> RngStream:
    return RngStream(seed).child("cli", command)


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows, failure message or None)


def cmd_sample(args, rng):
    f = _family(args)
    kw = {}
    if args.eps_cut is not None:
        kw["eps_cut"] = args.eps_cut
    path = sample_family(f, PathGrid(args.n_steps), rng, args.n_paths, **kw)
    t = path.grid.times
    rows = [(i, repr(float(t[k])), repr(float(path.values[i, k])))
            for i in range(path.n_paths) for k in range(t.size)]
    return ("path_id", "t", "value"), rows, None


def cmd_renorm_report(args, rng):
    schedule = parse_list(args.eps) if args.eps is not None else list(renormalization.DEFAULT_SCHEDULE)
    if not schedule:
        raise UsageError("eps schedule is empty")
    rep = renormalization.build_renorm_report(_family(args), schedule)
    rows = [[repr(getattr(r, c)) for c in renormalization.REPORT_COLUMNS] for r in rep.schedule]
    failure = None
    bad = [r for r in rep.schedule if r.error]
    if bad:
        failure = f"eps={bad[0].eps!r}: {bad[0].error}"
    else:
        try:
            rep.check()
        except CertificateFailure as exc:
            failure = str(exc)
    return renormalization.REPORT_COLUMNS, rows, failure


def _report_rows(rep: diagnostics.DiagnosticsReport):
    return [[repr(r.param), r.statistic, repr(r.value), "" if r.stderr is None else repr(r.stderr),
             r.n, "" if r.seed is None else r.seed] for r in rep.rows]


def cmd_converge(args, rng):
    kind = diagnostics.ConvergenceKind(args.kind)
    if kind in (diagnostics.ConvergenceKind.TSS_TO_GAMMA, diagnostics.ConvergenceKind.MTS_TO_NIG):
        if not args.alphas:
            raise UsageError("--alphas is required for this kind")
        schedule = parse_list(args.alphas)
    else:
        schedule = parse_list(args.eps) if args.eps else list(renormalization.DEFAULT_SCHEDULE[:3])
    fam = _family(args) if args.family else None
    rep = diagnostics.convergence_curve(kind, schedule, args.n, rng, PathGrid(args.n_steps), family=fam)
    failure = None
    for r in rep.rows:
        if r.statistic == "max_jump_over_bound" and r.value > 1.0 + 1e-12:
            failure = f"param={r.param!r} max_jump_over_bound={r.value!r}"
            break
    return diagnostics.DIAGNOSTIC_COLUMNS, _report_rows(rep), failure


def cmd_ut_certify(args, rng):
    grid = parse_list(args.alpha_grid)
    if args.family == "tss":
        rep = diagnostics.ut_certificate_tss(grid)
    elif args.family == "mts":
        rep = diagnostics.ut_certificate_mts(grid)
    else:
        raise UsageError("ut-certify supports --family tss or mts")
    return diagnostics.DIAGNOSTIC_COLUMNS, _report_rows(rep), None


COEFFICIENTS = {
    "sine": None,
    "identity": lambda: sde.CoefficientFamily.fixed(sde.constant(1.0), sde.constant(0.0)),
    "time": lambda: sde.CoefficientFamily.fixed(sde.constant(0.0), sde.constant(1.0)),
    "renormalized": sde.renormalized_family,
    "sqrt": sde.sqrt_demo_family,
}


def cmd_sde_stability(args, rng):
    grid = PathGrid(args.n_steps)
    exp = args.experiment
    if exp == "renormalized":
        cf = COEFFICIENTS[args.coefficients or "renormalized"]
        cf = cf() if cf else sde.sine_family(0.0)
        eps = parse_list(args.eps) if args.eps else [1e-2, 3e-3, 1e-3]
        rep = sde.stability_experiment_renormalized(
            cf, models.family(args.tilde_family), models.family(args.sub_family, args.sub_alpha),
            eps, grid, rng, args.n_paths)
    elif exp in ("tss", "mts"):
        if not args.alphas:
            raise UsageError("--alphas is required for this experiment")
        limit_point = 0.0 if exp == "tss" else 0.5
        cf = COEFFICIENTS[args.coefficients or "sine"]
        cf = cf() if cf else sde.sine_family(limit_point)
        run = sde.stability_experiment_tss if exp == "tss" else sde.stability_experiment_mts
        rep = run(cf, parse_list(args.alphas), grid, rng, args.n_paths)
    else:
        raise UsageError(f"unknown experiment {exp!r}")
    return diagnostics.DIAGNOSTIC_COLUMNS, _report_rows(rep), None


COMMANDS = {
    "sample": cmd_sample,
    "renorm-report": cmd_renorm_report,
    "converge": cmd_converge,
    "ut-certify": cmd_ut_certify,
    "sde-stability": cmd_sde_stability,
}


# ---------------------------------------------------------------------------
# parser and output


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags given on the command line win")
    common.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="levylab", description="Lévy-driven path simulation and diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="simulate paths")
    s.add_argument("--family", required=True)
    s.add_argument("--alpha", type=float)
    s.add_argument("--n-steps", type=int, default=256)
    s.add_argument("--n-paths", type=int, default=1)
    s.add_argument("--eps-cut", type=float)

    r = sub.add_parser("renorm-report", parents=[common], help="mu/sigma/b along an eps schedule")
    r.add_argument("--family", required=True)
    r.add_argument("--alpha", type=float)
    r.add_argument("--eps", help="comma list or start:stop:count")

    c = sub.add_parser("converge", parents=[common], help="convergence curves")
    c.add_argument("--kind", required=True, choices=[k.value for k in diagnostics.ConvergenceKind])
    c.add_argument("--alphas")
    c.add_argument("--eps")
    c.add_argument("--family")
    c.add_argument("--alpha", type=float)
    c.add_argument("--n", type=int, default=10000)
    c.add_argument("--n-steps", type=int, default=16)

    u = sub.add_parser("ut-certify", parents=[common], help="uniform tightness certificates")
    u.add_argument("--family", required=True, choices=("tss", "mts"))
    u.add_argument("--alpha-grid", default="0.05:0.45:9")

    e = sub.add_parser("sde-stability", parents=[common], help="SDE stability experiments")
    e.add_argument("--experiment", required=True, choices=("tss", "mts", "renormalized"))
    e.add_argument("--alphas")
    e.add_argument("--eps")
    e.add_argument("--coefficients", choices=sorted(COEFFICIENTS))
    e.add_argument("--tilde-family", default="nig")
    e.add_argument("--sub-family", default="stable-sub")
    e.add_argument("--sub-alpha", type=float, default=0.5)
    e.add_argument("--n-paths", type=int, default=10000)
    e.add_argument("--n-steps", type=int, default=64)
    return p


_ECHO_SKIP = {"config", "output", "format"}


def _config_items(args, seed):
    items = {k: v for k, v in vars(args).items() if k not in _ECHO_SKIP and v is not None}
    items["seed"] = seed
    return dict(sorted(items.items()))


def render(fmt, command, config, columns, rows) -> str:
    if fmt == "json":
        doc = {"command": command, "config": config,
               "rows": [dict(zip(columns, _json_cells(row))) for row in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# levylab {command}\n")
    for k, v in config.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _json_cells(row):
    out = []
    for cell in row:
        if isinstance(cell, str):
            try:
                out.append(float(cell) if cell else None)
                continue
            except ValueError:
                pass
        out.append(cell)
    return out


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".levylab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        conf = read_config(known.config)
        command = next((a for a in (argv if argv is not None else sys.argv[1:]) if a in COMMANDS), None)
        if command is None:
            raise UsageError("a subcommand is required")
        sub = parser._subparsers._group_actions[0].choices[command]
        dests = {a.dest: a for a in sub._actions}
        unknown = sorted(set(conf) - set(dests))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in conf.items():
            action = dests[key]
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config {key}={value!r} not in {sorted(action.choices)}")
            # argparse runs string defaults through the flag's type
            action.default = value
            action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        seed = _resolve_seed(args)
        rng = _rng(args.command, seed)
        columns, rows, failure = COMMANDS[args.command](args, rng)
        text = render(args.format, args.command, _config_items(args, seed), columns, rows)
        if args.output:
            write_atomic(args.output, text)
        else:
            sys.stdout.write(text)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, DomainError, UnsupportedFamilyError, ValueError) as exc:
        print(f"levylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"levylab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CertificateFailure, NumericalError) as exc:
        print(f"FAIL\t{exc}", file=sys.stderr)
        return EXIT_ASSERT
    except LevyError as exc:
        print(f"levylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if failure:
        print(f"FAIL\t{failure}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
