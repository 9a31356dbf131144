"""Command-line front end.

Every subcommand that produces a CSV also writes ``<out>.manifest.json``
recording the command, its inputs, the effective master seed, and library
versions; re-running with the same manifest inputs reproduces the CSV byte
for byte regardless of ``--threads``.  The ``POOLED_ANNUITY_SEED``
environment variable, when set, overrides ``--seed`` everywhere.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys

import numpy as np

from . import __version__
from .approx import ApproxInputs, approx_k_u, approx_k_u_two_sided
from .estimator import (
    death_time_spread,
    estimate_k_c,
    estimate_k_u,
    likely_time,
    relative_difference,
    time_difference,
)
from .fund import FundParams, StabilityCriterion, simulate_income_path, write_trace_csv
from .lifetable import load_life_table, make_gompertz_table

# Table-layout constants for the `table1` subcommand: pool sizes in rows,
# (eps, beta, mode) combinations in columns.
_TABLE1_SIZES = (100, 200, 500, 1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000)
_TABLE1_EPS = (0.1, 0.05)
_TABLE1_BETAS = (0.9, 0.99)


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def _fmt(value) -> str:
    # repr of a float is its shortest round-trip form, which keeps CSV
    # output byte-stable across runs and platforms.
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _effective_seed(args) -> int:
    env = os.environ.get("POOLED_ANNUITY_SEED")
    return int(env) if env is not None else args.seed


def _write_manifest(out_path: str, args, seed: int) -> None:
    skip = {"func", "command", "out", "threads", "seed"}
    inputs = {k: v for k, v in vars(args).items() if k not in skip}
    payload = {
        "command": args.command,
        "inputs": inputs,
        "seed": seed,
        "versions": {
            "pooled_annuity": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")


def _criterion(args) -> StabilityCriterion:
    return StabilityCriterion(args.eps, args.eps_upper, args.beta)


def _fund_params(args, n: int) -> FundParams:
    rate = (1.0 + args.annual_rate) ** (1.0 / args.ppy) - 1.0
    return FundParams(
        n_members=n,
        entry_age=args.age,
        initial_wealth=args.wealth,
        rate_per_period=rate,
        periods_per_year=args.ppy,
    )


def _cmd_ku(args) -> int:
    seed = _effective_seed(args)
    report, dist = estimate_k_u(args.n, _criterion(args), args.paths, seed, args.threads)
    print(report.to_json())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            dist.to_csv(fh)
        _write_manifest(args.out, args, seed)
    return 0


def _cmd_kc(args) -> int:
    seed = _effective_seed(args)
    table = load_life_table(args.table)
    params = _fund_params(args, args.n)
    report, dist = estimate_k_c(params, table, _criterion(args), args.paths, seed, args.threads)
    print(report.to_json())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            dist.to_csv(fh)
        _write_manifest(args.out, args, seed)
    return 0


def _cmd_compare(args) -> int:
    seed = _effective_seed(args)
    table = load_life_table(args.table)
    crit = _criterion(args)
    rows = []
    for i, n in enumerate(args.n_grid):
        ku_rep, _ = estimate_k_u(n, crit, args.paths, seed + 2 * i, args.threads)
        kc_rep, _ = estimate_k_c(
            _fund_params(args, n), table, crit, args.paths, seed + 2 * i + 1, args.threads
        )
        k_u, k_c = ku_rep.k_value, kc_rep.k_value
        rows.append(
            (
                n,
                k_u,
                k_c,
                relative_difference(k_c, k_u),
                time_difference(table, args.age, n, k_c, k_u),
            )
        )
    _write_csv(args.out, "n,k_u,k_c,rel_diff,time_diff_months", rows)
    _write_manifest(args.out, args, seed)
    return 0


def _cmd_likely_time(args) -> int:
    seed = _effective_seed(args)
    table = load_life_table(args.table)
    crit = _criterion(args)
    rows = []
    for i, n in enumerate(args.n_grid):
        report, _ = estimate_k_u(n, crit, args.paths, seed + i, args.threads)
        rows.append((n, likely_time(table, args.age, n, report.k_value)))
    _write_csv(args.out, "n,likely_time_years", rows)
    _write_manifest(args.out, args, seed)
    return 0


def _cmd_spread(args) -> int:
    table = load_life_table(args.table)
    rows = [(d, death_time_spread(table, args.age, args.n, args.k, d)) for d in args.d_grid]
    _write_csv(args.out, "d,probability", rows)
    _write_manifest(args.out, args, _effective_seed(args))
    return 0


def _cmd_approx(args) -> int:
    seed = _effective_seed(args)
    rows = []
    for n in args.n_grid:
        inputs = ApproxInputs(n, args.eps, args.eps_upper, args.beta)
        if args.two_sided:
            k = approx_k_u_two_sided(inputs, args.paths, args.steps, seed, args.threads)
        else:
            k = approx_k_u(inputs)
        rows.append((n, k))
    _write_csv(args.out, "n,k_approx", rows)
    _write_manifest(args.out, args, seed)
    return 0


def _cmd_table1(args) -> int:
    seed = _effective_seed(args)
    rows = []
    cell = 0
    for n in _TABLE1_SIZES:
        row = [n]
        for eps in _TABLE1_EPS:
            for beta in _TABLE1_BETAS:
                for upper in (None, eps):
                    crit = StabilityCriterion(eps, upper, beta)
                    report, _ = estimate_k_u(n, crit, args.paths, seed + cell, args.threads)
                    row.append(report.k_value)
                    cell += 1
        rows.append(tuple(row))
    header = "n," + ",".join(
        f"{mode}_e{int(eps * 100)}_b{int(beta * 100)}"
        for eps in _TABLE1_EPS
        for beta in _TABLE1_BETAS
        for mode in ("above", "both")
    )
    _write_csv(args.out, header, rows)
    _write_manifest(args.out, args, seed)
    return 0


def _cmd_gen_table(args) -> int:
    if args.law != "gompertz":
        raise ValueError(f"unknown mortality law {args.law!r}")
    table = make_gompertz_table(args.b, args.c, args.first_age, args.max_age)
    rows = list(zip(range(table.first_age, table.terminal_age + 1), table.qx))
    _write_csv(args.out, "age,qx", rows)
    _write_manifest(args.out, args, _effective_seed(args))
    return 0


def _cmd_trace(args) -> int:
    seed = _effective_seed(args)
    table = load_life_table(args.table)
    params = _fund_params(args, args.n)
    rng = np.random.Generator(np.random.PCG64(seed))
    path = simulate_income_path(params, table, rng)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_trace_csv(path, fh)
    _write_manifest(args.out, args, seed)
    return 0


def _add_common(p, *, seed=True, threads=True) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (env POOLED_ANNUITY_SEED overrides)")
    if threads:
        p.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")


def _add_criterion(p) -> None:
    p.add_argument("--eps", type=float, required=True, help="lower income threshold")
    p.add_argument("--eps-upper", type=float, default=None, help="upper income threshold (omit for lower-only)")
    p.add_argument("--beta", type=float, default=0.9, help="required pathwise probability")


def _add_fund(p) -> None:
    p.add_argument("--table", required=True, help="age,qx CSV life table")
    p.add_argument("--age", type=int, default=70, help="common entry age")
    p.add_argument("--annual-rate", type=float, default=0.05, help="annual investment return")
    p.add_argument("--wealth", type=float, default=100000.0, help="initial wealth per member")
    p.add_argument("--ppy", type=int, default=12, help="periods per year")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pooled-annuity",
        description="Income stability vs. membership size in a closed pooled annuity fund.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ku", help="distribution-free stable-member count k_U")
    p.add_argument("--n", type=int, required=True)
    _add_criterion(p)
    p.add_argument("--paths", type=int, default=100000)
    _add_common(p)
    p.add_argument("--out", default=None, help="write the k histogram CSV here")
    p.set_defaults(func=_cmd_ku)

    p = sub.add_parser("kc", help="direct-simulation stable-member count k_C")
    p.add_argument("--n", type=int, required=True)
    _add_fund(p)
    _add_criterion(p)
    p.add_argument("--paths", type=int, default=100000)
    _add_common(p)
    p.add_argument("--out", default=None, help="write the k histogram CSV here")
    p.set_defaults(func=_cmd_kc)

    p = sub.add_parser("compare", help="k_U vs k_C with relative and time differences over an N grid")
    p.add_argument("--n-grid", type=_int_list, required=True)
    _add_fund(p)
    _add_criterion(p)
    p.add_argument("--paths", type=int, default=100000)
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("likely-time", help="likely time of the k_U-th death over an N grid")
    p.add_argument("--n-grid", type=_int_list, required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--age", type=int, default=70)
    _add_criterion(p)
    p.add_argument("--paths", type=int, default=100000)
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_likely_time)

    p = sub.add_parser("spread", help="probability the k-th death precedes its likely time by d")
    p.add_argument("--table", required=True)
    p.add_argument("--age", type=int, default=70)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d-grid", type=_float_list, required=True, help="lead times in years")
    _add_common(p, threads=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_spread)

    p = sub.add_parser("approx", help="closed-form / Brownian approximations over an N grid")
    p.add_argument("--n-grid", type=_int_list, required=True)
    _add_criterion(p)
    p.add_argument("--two-sided", action="store_true", help="invert the Brownian band probability")
    p.add_argument("--paths", type=int, default=100000)
    p.add_argument("--steps", type=int, default=None)
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("table1", help="full k_U grid over pool sizes and band parameters")
    p.add_argument("--paths", type=int, default=100000)
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("gen-table", help="synthetic life-table CSV")
    p.add_argument("--law", default="gompertz", choices=("gompertz",))
    p.add_argument("--b", type=float, default=3e-5, help="hazard scale")
    p.add_argument("--c", type=float, default=1.1, help="hazard growth per year")
    p.add_argument("--first-age", type=int, default=0)
    p.add_argument("--max-age", type=int, default=120)
    _add_common(p, threads=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_table)

    p = sub.add_parser("trace", help="one simulated income path as period,survivors,income")
    p.add_argument("--n", type=int, required=True)
    _add_fund(p)
    _add_common(p, threads=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_trace)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse handles --help (0) and bad flags (2)
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except ValueError as exc:  # includes LifeTableError and domain validation
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
