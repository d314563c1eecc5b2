"""Batch front end: evaluate configs, run sweeps, and emit CSV + PNG artifacts.

Exit codes: 0 success, 1 usage/config error, 2 self-check failure.
All randomness flows from the single master seed in the config (or the
--seed override), so a rerun with the same inputs reproduces every CSV byte
for byte; --threads only parallelizes Monte-Carlo trials and does not change
any value.
"""

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import asymptotics, closed_form, exact, figures, selfcheck
from .config import (LinkParams, ParseError, SystemConfig, db_to_linear,
                     draw_los_angles, load_config, validate, with_overrides)

CSV_HEADER = ("M", "N", "evaluator", "pair", "R1", "R2", "R", "sum_SE", "seed", "trials")

# Desk-scale sweep grids: Monte-Carlo-bearing commands stop at 512 antennas,
# closed-form-only commands extend to 4096 where the limits are visibly flat.
MC_M_GRID = (32, 64, 128, 256, 512)
CF_M_GRID = (64, 128, 256, 512, 1024, 2048, 4096)

SWEEP_VARIABLES = ("M", "K_dB", "alpha", "epsilon", "gamma", "N")
EVALUATORS = ("exact", "approx", "limit")


class InvalidCommandError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors map to exit code 1, not 2."""

    def error(self, message):
        raise InvalidCommandError(message)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.10g}"


def emit_csv(rows, path) -> None:
    """Write rows under the fixed schema; deterministic for identical rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_fmt(row[key]) for key in CSV_HEADER])


def report_rows(m, n, evaluator, rep, seed, trials):
    """Pair rows (ascending) plus a 'sum' row for one evaluated grid point."""
    rows = []
    for i in range(n):
        rows.append({"M": m, "N": n, "evaluator": evaluator, "pair": i + 1,
                     "R1": rep.r1[i], "R2": rep.r2[i], "R": rep.r[i],
                     "sum_SE": None, "seed": seed, "trials": trials})
    rows.append({"M": m, "N": n, "evaluator": evaluator, "pair": "sum",
                 "R1": float(np.sum(rep.r1)), "R2": float(np.sum(rep.r2)),
                 "R": rep.sum_se, "sum_SE": rep.sum_se,
                 "seed": seed, "trials": trials})
    return rows


def limit_rows(m, n, lim, seed):
    rows = []
    for i in range(n):
        rows.append({"M": m, "N": n, "evaluator": "limit", "pair": i + 1,
                     "R1": None if lim.r1 is None else lim.r1[i],
                     "R2": None if lim.r2 is None else lim.r2[i],
                     "R": lim.r[i], "sum_SE": None, "seed": seed, "trials": 0})
    rows.append({"M": m, "N": n, "evaluator": "limit", "pair": "sum",
                 "R1": None if lim.r1 is None else float(np.sum(lim.r1)),
                 "R2": None if lim.r2 is None else float(np.sum(lim.r2)),
                 "R": lim.sum_se, "sum_SE": lim.sum_se, "seed": seed, "trials": 0})
    return rows


def _evaluate(config, params, evaluators, law=None, threads=1, x=None, group=None,
              rows=None, points=None):
    """Evaluate one grid point, appending CSV rows and plot points."""
    for evaluator in evaluators:
        if evaluator == "exact":
            rep = exact.se_report(config, params, threads=threads)
            new = report_rows(config.m, config.n, "exact", rep, config.seed, config.trials)
            total = rep.sum_se
        elif evaluator == "approx":
            rep = closed_form.approx_report(config, params)
            new = report_rows(config.m, config.n, "approx", rep, config.seed, 0)
            total = rep.sum_se
        elif evaluator == "limit":
            lim = asymptotics.limit_se(config, params, law)
            new = limit_rows(config.m, config.n, lim, config.seed)
            total = lim.sum_se
        else:
            raise InvalidCommandError(f"unknown evaluator {evaluator!r}")
        if rows is not None:
            rows += new
        if points is not None and x is not None:
            points.append({"x": x, "y": total, "evaluator": evaluator, "group": group})


def _uniform_value(arr, name):
    unique = np.unique(np.asarray(arr, dtype=float))
    if unique.size != 1:
        raise ParseError(f"{name} must be a single broadcastable value for this command")
    return float(unique[0])


def _rebroadcast(params: LinkParams, n: int, seed: int, k_db=None) -> LinkParams:
    """Link params at a new pair count, keeping the (scalar) large-scale values."""
    beta = _uniform_value(np.concatenate([params.beta_ar, params.beta_br]), "beta")
    if k_db is None:
        k = _uniform_value(np.concatenate([params.k_ar, params.k_br]), "K")
    else:
        k = float(db_to_linear(k_db))
    theta_ar, theta_br = draw_los_angles(n, seed)
    full = lambda v: np.full(n, v, dtype=float)
    return LinkParams(beta_ar=full(beta), beta_br=full(beta),
                      k_ar=full(k), k_br=full(k),
                      theta_ar=theta_ar, theta_br=theta_br)


def _resize(config: SystemConfig, n: int) -> SystemConfig:
    """Config at a new pair count; tau follows 2N unless it was pinned."""
    tau = 2 * n if config.tau == 2 * config.n else config.tau
    p_u = _uniform_value(np.concatenate([config.p_a, config.p_b]), "p_u")
    return replace(config, n=n, tau=tau, p_a=np.full(n, p_u), p_b=np.full(n, p_u))


def _print_summary(rows, out_path):
    for r in rows:
        if r["pair"] == "sum":
            print(f"  M={r['M']:<5} N={r['N']:<2} {r['evaluator']:<7} "
                  f"sum SE = {float(r['sum_SE']):.4f} bits/s/Hz")
    print(f"wrote {out_path}")


def _write_artifacts(rows, points, out_dir, stem, plot, x_label, title=None, logx=True):
    csv_path = Path(out_dir) / f"{stem}.csv"
    emit_csv(rows, csv_path)
    if plot and points:
        figures.render_sweep(points, Path(out_dir) / f"{stem}.png",
                             x_label=x_label, title=title, logx=logx)
    return csv_path


def cmd_report(args, config, params, law):
    rows = []
    _evaluate(config, params, ("exact", "approx"), threads=args.threads, rows=rows)
    csv_path = Path(args.out) / "report.csv"
    emit_csv(rows, csv_path)
    if not args.no_plot:
        per_pair = {ev: [float(r["R"]) for r in rows
                         if r["evaluator"] == ev and r["pair"] != "sum"]
                    for ev in ("exact", "approx")}
        figures.render_report(per_pair, Path(args.out) / "report.png",
                              title=f"M={config.m}, N={config.n}")
    exact_sum = next(r["sum_SE"] for r in rows
                     if r["pair"] == "sum" and r["evaluator"] == "exact")
    approx_sum = next(r["sum_SE"] for r in rows
                      if r["pair"] == "sum" and r["evaluator"] == "approx")
    gap = abs(exact_sum - approx_sum) / exact_sum if exact_sum else 0.0
    _print_summary(rows, csv_path)
    print(f"  closed form within {gap:.2%} of simulation")
    return 0


def _parse_grid(raw, variable):
    try:
        if variable in ("M", "N"):
            grid = [int(v) for v in raw.split(",") if v.strip()]
        else:
            grid = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"cannot parse grid {raw!r}: {exc}") from None
    if not grid:
        raise ParseError("sweep grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParseError("sweep grid must be strictly increasing")
    return grid


def cmd_sweep(args, config, params, law):
    variable = args.variable
    if variable not in SWEEP_VARIABLES:
        raise InvalidCommandError(f"unknown sweep variable {variable!r}")
    grid = _parse_grid(args.grid, variable)
    evaluators = tuple(e.strip() for e in args.evaluators.split(",") if e.strip())
    if not evaluators:
        raise ParseError("at least one evaluator is required")
    for e in evaluators:
        if e not in EVALUATORS:
            raise InvalidCommandError(f"unknown evaluator {e!r}")

    scaled = law.alpha > 0 or law.epsilon > 0 or law.gamma > 0
    rows, points = [], []
    for value in grid:
        cfg, prm, lw = config, params, law
        if variable == "M":
            cfg = asymptotics.scaled_config(config, law, value) if scaled \
                else replace(config, m=int(value))
        elif variable == "K_dB":
            prm = _rebroadcast(params, config.n, config.seed, k_db=value)
        elif variable in ("alpha", "epsilon", "gamma"):
            lw = replace(law, **{variable: float(value)})
            cfg = asymptotics.scaled_config(config, lw, config.m)
        elif variable == "N":
            cfg = _resize(config, int(value))
            prm = _rebroadcast(params, int(value), config.seed)
        _evaluate(cfg, prm, evaluators, law=lw, threads=args.threads,
                  x=value, rows=rows, points=points)
    csv_path = _write_artifacts(rows, points, args.out, "sweep", not args.no_plot,
                                x_label=variable, title=f"sweep over {variable}",
                                logx=variable == "M")
    _print_summary(rows, csv_path)
    return 0


def cmd_fig1(args, config, params, law):
    """Sum SE vs M with fixed uplink/relay powers and pilot power E_p/M^gamma."""
    fixed = replace(law, alpha=0.0, epsilon=0.0)
    rows, points = [], []
    for n in (2, 5):
        cfg_n = _resize(config, n)
        prm_n = _rebroadcast(params, n, config.seed)
        for m in MC_M_GRID:
            cfg = asymptotics.scaled_config(cfg_n, fixed, m)
            _evaluate(cfg, prm_n, ("exact", "approx"), threads=args.threads,
                      x=m, group=f"N={n}", rows=rows, points=points)
    csv_path = _write_artifacts(rows, points, args.out, "fig1", not args.no_plot,
                                x_label="number of relay antennas M",
                                title=f"fixed powers, pilot scaled by gamma={law.gamma:g}")
    _print_summary(rows, csv_path)
    return 0


def cmd_fig2(args, config, params, law):
    """Finite-limit scaling cases with their large-M limit lines."""
    cases = (("case_i", 1.0, 1.0), ("case_ii", 1.0, 0.2), ("case_iii", 0.5, 1.0))
    for name, alpha, epsilon in cases:
        lw = replace(law, alpha=alpha, epsilon=epsilon, gamma=1.0)
        rows, points = [], []
        for m in CF_M_GRID:
            cfg = asymptotics.scaled_config(config, lw, m)
            _evaluate(cfg, params, ("approx", "limit"), law=lw,
                      x=m, rows=rows, points=points)
        csv_path = _write_artifacts(rows, points, args.out, f"fig2_{name}",
                                    not args.no_plot,
                                    x_label="number of relay antennas M",
                                    title=f"alpha={alpha:g}, epsilon={epsilon:g}")
        _print_summary(rows, csv_path)
    return 0


def cmd_fig3(args, config, params, law):
    """Decay regimes: over-aggressive scaling drives the sum SE to zero."""
    for alpha, epsilon in ((1.2, 1.0), (1.0, 1.2), (1.2, 1.2)):
        lw = replace(law, alpha=alpha, epsilon=epsilon, gamma=1.0)
        rows, points = [], []
        for m in CF_M_GRID:
            cfg = asymptotics.scaled_config(config, lw, m)
            _evaluate(cfg, params, ("approx",), x=m, rows=rows, points=points)
        stem = f"fig3_alpha{alpha:g}_epsilon{epsilon:g}"
        csv_path = _write_artifacts(rows, points, args.out, stem, not args.no_plot,
                                    x_label="number of relay antennas M",
                                    title=f"alpha={alpha:g}, epsilon={epsilon:g}")
        _print_summary(rows, csv_path)
    return 0


def cmd_fig4(args, config, params, law):
    """Sum SE vs M for several Rician factors, all powers scaled as E/M."""
    lw = replace(law, alpha=1.0, epsilon=1.0, gamma=1.0)
    cfg_n = _resize(config, 5)
    for k_db in (3.0, 5.0, 10.0):
        prm = _rebroadcast(params, 5, config.seed, k_db=k_db)
        rows, points = [], []
        for m in MC_M_GRID:
            cfg = asymptotics.scaled_config(cfg_n, lw, m)
            _evaluate(cfg, prm, ("exact", "approx"), threads=args.threads,
                      x=m, rows=rows, points=points)
        csv_path = _write_artifacts(rows, points, args.out, f"fig4_k{k_db:g}db",
                                    not args.no_plot,
                                    x_label="number of relay antennas M",
                                    title=f"K = {k_db:g} dB, N = 5")
        _print_summary(rows, csv_path)
    return 0


def cmd_selfcheck(args, config, params, law):
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    elif config is not None:
        kwargs["seed"] = config.seed
    if args.trials is not None:
        kwargs["trials"] = args.trials
    results = selfcheck.run_self_check(**kwargs)
    failed = 0
    for res in results:
        status = "ok  " if res.ok else "FAIL"
        print(f"{status} {res.name:<18} {res.detail}")
        failed += 0 if res.ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 2 if failed else 0


COMMANDS = {
    "report": cmd_report,
    "sweep": cmd_sweep,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "selfcheck": cmd_selfcheck,
}


def build_parser():
    parser = _Parser(
        prog="mmrelay",
        description="Spectral-efficiency experiments for a multi-pair two-way "
                    "decode-and-forward relay with a large antenna array.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="what to run")
    parser.add_argument("--config", help="path to a key=value config file")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--trials", type=int, default=None,
                        help="override the Monte-Carlo trial count")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for Monte-Carlo trials")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip PNG rendering, write CSV only")
    parser.add_argument("--variable", default="M",
                        help=f"sweep variable ({', '.join(SWEEP_VARIABLES)})")
    parser.add_argument("--grid", default="", help="comma-separated sweep grid")
    parser.add_argument("--evaluators", default="exact,approx",
                        help="comma-separated subset of exact,approx,limit")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "selfcheck" and not args.config:
            config = params = law = None
        else:
            if not args.config:
                raise ParseError(f"--config is required for {args.command!r}")
            config, params, law = load_config(args.config)
            config = with_overrides(config, seed=args.seed, trials=args.trials)
            if args.seed is not None:
                # Angles were drawn from the file seed; redraw from the override.
                theta_ar, theta_br = draw_los_angles(config.n, config.seed)
                params = replace(params, theta_ar=theta_ar, theta_br=theta_br)
            validate(config, params)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, config, params, law)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, InvalidCommandError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
