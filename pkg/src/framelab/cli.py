"""``framelab`` command line.

Exit codes: 0 success, 1 usage or parse error, 2 numerical precondition
violated, 3 acceptance failure under ``--strict``.

Seed precedence: ``--seed``, then a seed in the experiment config
(``converge`` only), then the ``FRAMELAB_SEED`` environment variable,
then 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .designs import design_check
from .errors import FormatError, FrameLabError, NumericalError
from .frame_core import (
    SINGULAR_RTOL,
    canonical_dual,
    frame_bounds,
    frame_potential,
    is_tight,
    to_parseval,
    waldron_ratio,
)
from .montecarlo import ConvergenceExperiment, fourier_row_experiment, run_experiment
from .potential_min import DescentConfig, certify_minimizer, minimize_fp
from .rng import SeededRng

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_STRICT = 0, 1, 2, 3
DEFAULT_SEED = 0
SE_BAND = 5.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FormatError(f"{self.prog}: {message}")


def _seed(args, config_seed=None) -> int:
    if args.seed is not None:
        return args.seed
    if config_seed is not None:
        return config_seed
    env = os.environ.get("FRAMELAB_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"FRAMELAB_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _emit(text: str, out) -> None:
    if out:
        fio.ensure_parent(out)
        fio.write_text(out, text)
    else:
        sys.stdout.write(text)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _sibling(path, suffix: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    frame = fio.read_frame_csv(args.input)
    bounds = frame_bounds(frame)
    tight, a = is_tight(frame, args.tol)
    spanning = bounds.lower > SINGULAR_RTOL * bounds.upper
    warnings = []
    if not spanning:
        warnings.append("vectors do not span R^d; lower frame bound is 0")
        _warn(warnings[-1])
    report = {
        "n": frame.n,
        "d": frame.d,
        "lower_bound": bounds.lower,
        "upper_bound": bounds.upper,
        "tight": tight,
        "tight_bound": a,
        "frame_potential": frame_potential(frame),
        "waldron_ratio": waldron_ratio(frame),
        "spanning": spanning,
        "warnings": warnings,
    }
    if args.dual or args.parseval:
        if not spanning:
            raise NumericalError("dual and Parseval frames need a spanning frame")
        if args.dual:
            fio.write_frame_csv(args.dual, canonical_dual(frame).vectors)
        if args.parseval:
            fio.write_frame_csv(args.parseval, to_parseval(frame).vectors)
    _emit(fio.format_json(report), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = fio.read_spec(args.spec)
    if args.n is None or args.n < 1:
        raise FormatError("sample needs --n >= 1")
    gen = SeededRng(_seed(args), 0).generator
    y = spec.sample_many(args.n, gen)
    _emit(fio.format_frame_csv(y), args.out)
    return EXIT_OK


def _grid(args, default: int) -> list:
    if args.n_grid:
        try:
            grid = [int(x) for x in args.n_grid.split(",") if x.strip()]
        except ValueError:
            raise FormatError(f"--n-grid must be comma-separated integers, got {args.n_grid!r}") from None
    elif args.n is not None:
        grid = [args.n]
    else:
        grid = [default]
    if not grid or min(grid) < 1:
        raise FormatError("sample sizes must be >= 1")
    return grid


def cmd_converge(args) -> int:
    cfg = fio.read_config(args.spec or args.input)
    seed = _seed(args, cfg.seed)
    trials = args.trials if args.trials is not None else cfg.trials
    target = args.target or cfg.target
    results = []
    for n in _grid(args, 1 if cfg.specs is None else len(cfg.specs)):
        if cfg.specs is None:
            res = fourier_row_experiment(cfg.dft_d, n, trials, seed, args.workers)
        else:
            exp = ConvergenceExperiment(cfg.specs_for(n), trials, target, seed,
                                        args.workers, cfg.mc_budget)
            res = run_experiment(exp)
        results.append(res)
    rows = [[r.n, r.d, r.trials, r.empirical_mse, r.standard_error, r.closed_form] for r in results]
    cols = ["n", "d", "trials", "empirical_mse", "standard_error", "closed_form"]
    _emit(fio.format_table_csv(cols, rows), args.out)
    report = {
        "seed": seed,
        "target": "dft_rows" if cfg.specs is None else target,
        "results": [dict(r.to_dict(), within_5se=r.within(SE_BAND)) for r in results],
    }
    report_path = args.report or (_sibling(args.out, ".json") if args.out else None)
    if report_path:
        fio.write_json(report_path, report)
    failed = [r.n for r in results if not r.within(SE_BAND)]
    if failed:
        _warn(f"empirical error outside 5 SE of the closed form for n={failed}")
        if args.strict:
            return EXIT_STRICT
    return EXIT_OK


def cmd_minimize(args) -> int:
    if args.n is None or args.d is None:
        raise FormatError("minimize needs --n and --d")
    cfg = DescentConfig(args.n, args.d, max_iters=args.max_iters, seed=_seed(args))
    trace = minimize_fp(cfg)
    cert = certify_minimizer(trace.frame, args.tol)
    frame_text = fio.format_frame_csv(trace.frame.vectors)
    rows = [[k, fp, g] for k, (fp, g) in enumerate(zip(trace.fp_values, trace.grad_norms))]
    trace_text = fio.format_table_csv(["iter", "fp", "grad_norm"], rows)
    info = dict(cert.to_dict(), n=args.n, d=args.d, seed=cfg.seed, iterations=trace.iterations,
                converged=trace.converged, stalled=trace.stalled, reseeds=trace.reseeds,
                grad_norm=trace.grad_norm)
    if args.out:
        fio.ensure_parent(args.out)
        fio.write_text(args.out, frame_text)
        fio.write_text(args.trace or _sibling(args.out, "_trace.csv"), trace_text)
        fio.write_json(args.report or _sibling(args.out, "_cert.json"), info)
    else:
        sys.stdout.write(frame_text)
        if args.trace:
            fio.write_text(args.trace, trace_text)
        if args.report:
            fio.write_json(args.report, info)
    if trace.stalled:
        _warn(f"descent stalled {cert.fp_gap:.3g} above the minimum")
    if not cert.passed:
        _warn("certification failed")
        if args.strict:
            return EXIT_STRICT
    return EXIT_OK


def cmd_design_check(args) -> int:
    if bool(args.input) == bool(args.spec):
        raise FormatError("design-check needs exactly one of --input and --spec")
    if args.input:
        source = fio.read_frame_csv(args.input)
    else:
        source = fio.read_spec(args.spec)
    rng = SeededRng(_seed(args), 0)
    report = design_check(source, tol=args.tol, mc_budget=args.mc_budget, rng=rng)
    _emit(fio.format_json(report.to_dict()), args.out)
    if not report.verdict and args.strict:
        return EXIT_STRICT
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="framelab", description="Finite and probabilistic frame tools.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def common(sp, tol=1e-10):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $FRAMELAB_SEED or 0)")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--strict", action="store_true", help="exit 3 when a check fails")

    a = sub.add_parser("analyze", help="frame bounds, tightness and potentials of a frame CSV")
    a.add_argument("--input", required=True)
    a.add_argument("--dual", help="write the canonical dual frame here")
    a.add_argument("--parseval", help="write the canonical Parseval frame here")
    common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sample", help="draw samples from a measure spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, required=True)
    common(s)
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("converge", help="Monte-Carlo error against the closed form")
    c.add_argument("--spec", help="experiment config JSON")
    c.add_argument("--input", help="alias for --spec")
    c.add_argument("--n", type=int)
    c.add_argument("--n-grid", help="comma-separated sample sizes")
    c.add_argument("--trials", type=int)
    c.add_argument("--target", choices=["scaled_identity", "mixed_operator"])
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--report", help="JSON report path (default: next to --out)")
    common(c)
    c.set_defaults(func=cmd_converge)

    m = sub.add_parser("minimize", help="frame-potential descent on the sphere")
    m.add_argument("--n", type=int)
    m.add_argument("--d", type=int)
    m.add_argument("--max-iters", type=int, default=20_000)
    m.add_argument("--trace", help="trace CSV path (default: <out>_trace.csv)")
    m.add_argument("--report", help="certificate JSON path (default: <out>_cert.json)")
    common(m, tol=1e-8)
    m.set_defaults(func=cmd_minimize)

    g = sub.add_parser("design-check", help="spherical 2-design test")
    g.add_argument("--input", help="frame CSV (counting measure)")
    g.add_argument("--spec", help="measure spec JSON")
    g.add_argument("--mc-budget", type=int, default=100_000)
    common(g)
    g.set_defaults(func=cmd_design_check)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "command", None) == "converge" and not (args.spec or args.input):
            raise FormatError("converge needs --spec")
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FrameLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
