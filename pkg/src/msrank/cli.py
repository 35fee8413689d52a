"""Command-line interface.

Exit codes: 0 when the command ran (the test decision is in the report),
1 for usage errors, 2 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .calibration import ConfigError, TestConfig, exact_null_distribution, run_test
from .gaussian import GaussianScanConfig, gaussian_test
from .kernels import KernelError, parse_kernel
from .ranks import DataError, Dataset
from .report import dumps, emit_report
from .simharness import (
    DesignDensity,
    NoiseSpec,
    SignalSpec,
    default_signal,
    run_level_experiment,
    run_power_experiment,
    run_robustness_comparison,
)
from .statistic import WindowPolicy, build_coefficients
from .svg import render_svg
from .theory import parse_law, rate_rho, theory_constants

__all__ = ["main", "load_csv", "CsvError"]


class CsvError(DataError):
    pass


class UsageError(Exception):
    pass


def load_csv(path, header: bool = False) -> Dataset:
    """Read two numeric columns ``x,y``; rows are sorted by ``x``."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if header and not rows and lineno == 1:
                continue
            if len(row) != 2:
                raise CsvError(f"{path}: row {lineno}: expected 2 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise CsvError(f"{path}: row {lineno}: non-numeric value in {row!r}") from None
    if len(rows) < 2:
        raise CsvError(f"{path}: need at least 2 data rows, got {len(rows)}")
    arr = np.array(rows)
    arr = arr[np.argsort(arr[:, 0], kind="stable")]
    dup = np.flatnonzero(np.diff(arr[:, 0]) == 0)
    if dup.size:
        raise CsvError(f"{path}: duplicate x value {float(arr[dup[0], 0])!r}; design points must be distinct")
    return Dataset(arr[:, 0], arr[:, 1])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_default() -> int:
    env = os.environ.get("MSRANK_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"MSRANK_SEED must be an integer, got {env!r}") from None


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _add_test_flags(p, mc_default=999):
    p.add_argument("--kernel", default="epa", help="rect | epa | holder:<beta> (default: epa)")
    p.add_argument("--policy", choices=["exhaustive", "dyadic"], default=None,
                   help="window enumeration (default: exhaustive for n <= 500, else dyadic)")
    p.add_argument("--min-window", type=int, default=2, help="smallest window size (default: 2)")
    p.add_argument("--alpha", type=float, default=0.1, help="significance level (default: 0.1)")
    p.add_argument("--mc", type=int, default=mc_default, help=f"Monte Carlo replicates (default: {mc_default})")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                   help="unsigned 64-bit seed (default: $MSRANK_SEED or 0)")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores); output does not depend on it")


def _add_io_flags(p):
    p.add_argument("file", help="CSV file with columns x,y")
    p.add_argument("--header", action="store_true", help="skip the first row")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--svg", help="also render data and minimal intervals to this SVG file")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in the report")


def _add_sim_flags(p, law="normal:1"):
    p.add_argument("--config", help="JSON file whose keys set defaults for these flags")
    p.add_argument("--M", type=int, default=200, help="number of datasets")
    p.add_argument("--n", type=int, default=100, help="sample size")
    p.add_argument("--law", default=law, help=f"error law: normal:s | laplace:l | logistic:s | t:nu (default: {law})")
    p.add_argument("--hetero", default="const", help="noise scale profile: const | linear:a,b")
    p.add_argument("--design", default="uniform", help="design density: uniform | linear:c")
    p.add_argument("--csv", help="write a CSV table of the results here")
    p.add_argument("--out", help="write JSON results here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msrank", description="Multiscale signed-rank goodness-of-fit test for l = 0.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="run the conditional signed-rank test on a CSV file")
    _add_io_flags(p)
    _add_test_flags(p)
    p.add_argument("--one-sided", action="store_true", help="report only positive deviations in the detection set")

    p = sub.add_parser("gauss-test", help="run the Gaussian-calibrated reference test")
    _add_io_flags(p)
    _add_test_flags(p)
    p.add_argument("--sigma", default="estimate", help="noise standard deviation or 'estimate'")

    p = sub.add_parser("constants", help="print detection constants for an error law")
    p.add_argument("--law", default="normal:1")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100)

    p = sub.add_parser("level-sim", help="empirical size on null datasets")
    _add_sim_flags(p)
    _add_test_flags(p, mc_default=199)

    p = sub.add_parser("power-sim", help="rejection rate against a scaled signal")
    _add_sim_flags(p)
    _add_test_flags(p, mc_default=199)
    p.add_argument("--signal", default="const", help="const | bump:x0,w,beta | default (two opposite bumps)")
    p.add_argument("--amplitudes", default="0,1,2,4,8", help="comma-separated amplitudes")
    p.add_argument("--rho-units", action="store_true", help="amplitudes are multiples of rho_n")
    p.add_argument("--beta", type=float, default=1.0, help="smoothness used for rho_n (default: 1)")
    p.add_argument("--couple-density", action="store_true", help="divide the signal by sqrt(h(x))")

    p = sub.add_parser("compare-sim", help="signed-rank vs Gaussian reference on null datasets")
    _add_sim_flags(p, law="t:3")
    _add_test_flags(p)
    p.add_argument("--sigma", default=None, help="reference-test sigma (default: the law's standard deviation)")

    p = sub.add_parser("oracle", help="exact null distribution of T_n by enumeration (n <= 12)")
    p.add_argument("file")
    p.add_argument("--header", action="store_true")
    p.add_argument("--kernel", default="epa")
    p.add_argument("--min-window", type=int, default=2)
    p.add_argument("--n-limit", type=int, default=12)
    p.add_argument("--out")
    return parser


def _policy(args, n):
    return WindowPolicy(args.policy or WindowPolicy.default_for(n).name, args.min_window)


def _seed(args) -> int:
    return _seed_default() if args.seed is None else args.seed


def _write(text: str | bytes, out: str | None) -> None:
    data = text.encode() if isinstance(text, str) else text
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _design(text: str) -> DesignDensity:
    name, _, arg = text.partition(":")
    if name == "uniform":
        return DesignDensity()
    if name == "linear":
        return DesignDensity("linear", float(arg or 1.0))
    raise UsageError(f"unknown design {text!r}")


def _noise(args) -> NoiseSpec:
    law = parse_law(args.law)
    name, _, arg = args.hetero.partition(":")
    if name in ("const", "constant"):
        return NoiseSpec(law)
    if name == "linear":
        vals = _floats(arg)
        if len(vals) != 2:
            raise UsageError("--hetero linear:a,b needs two numbers")
        return NoiseSpec(law, "linear", vals[0], vals[1])
    raise UsageError(f"unknown scale profile {args.hetero!r}")


def _signal(args) -> SignalSpec:
    name, _, arg = args.signal.partition(":")
    if name in ("const", "constant"):
        sig = SignalSpec("constant", 1.0)
    elif name == "bump":
        vals = _floats(arg) if arg else [0.5, 0.1, 1.0]
        if len(vals) != 3:
            raise UsageError("--signal bump:x0,w,beta needs three numbers")
        sig = SignalSpec("bump", 1.0, vals[0], vals[1], vals[2])
    elif name == "default":
        sig = default_signal(1.0)
    else:
        raise UsageError(f"unknown signal {args.signal!r}")
    if args.couple_density:
        from dataclasses import replace

        sig = replace(sig, couple_density=True)
    return sig


def _test_config(args, n) -> TestConfig:
    return TestConfig(
        alpha=args.alpha,
        replicates=args.mc,
        seed=_seed(args),
        kernel=parse_kernel(args.kernel),
        policy=_policy(args, n),
        one_sided=getattr(args, "one_sided", False),
    )


def _emit_sim(result, args) -> None:
    from dataclasses import asdict

    rows = result.to_rows()
    _write(dumps({"result": asdict(result), "rows": rows}), args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for row in rows:
                w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in row.items()})


def _cmd_test(args) -> None:
    d = load_csv(args.file, args.header)
    cfg = _test_config(args, d.n)
    if args.command == "test":
        rep = run_test(d, cfg, threads=args.threads, timing=args.timing)
    else:
        sigma = args.sigma if args.sigma == "estimate" else float(args.sigma)
        gcfg = GaussianScanConfig(sigma, cfg.alpha, cfg.replicates, cfg.seed, cfg.kernel, cfg.policy)
        rep = gaussian_test(d, gcfg, threads=args.threads, timing=args.timing)
    _write(emit_report(rep, args.format), args.out)
    if args.svg:
        render_svg(d, rep, args.svg)


def _cmd_constants(args) -> None:
    from dataclasses import asdict

    c = theory_constants(parse_law(args.law), args.beta, args.L, args.n)
    _write(dumps(asdict(c)), None)


def _cmd_oracle(args) -> None:
    d = load_csv(args.file, args.header)
    table = build_coefficients(d, parse_kernel(args.kernel), WindowPolicy("exhaustive", args.min_window))
    zero = d.y == 0
    ex = exact_null_distribution(table, args.n_limit, zero if zero.any() else None)
    atoms = [{"t_n": float(v), "count": int(c), "probability": f"{c}/{ex.total}"} for v, c in zip(ex.values, ex.counts)]
    _write(dumps({"n": d.n, "kernel": parse_kernel(args.kernel).label(), "total": ex.total, "atoms": atoms}), args.out)


def _cmd_sim(args) -> None:
    cfg = _test_config(args, args.n)
    dd = _design(args.design)
    ns = _noise(args)
    seed = _seed(args)
    if args.command == "level-sim":
        res = run_level_experiment(args.M, args.n, dd, ns, cfg, seed=seed, threads=args.threads)
    elif args.command == "power-sim":
        amps = _floats(args.amplitudes)
        if args.rho_units:
            amps = [a * rate_rho(args.n, args.beta) for a in amps]
        res = run_power_experiment(args.M, args.n, amps, _signal(args), dd, ns, cfg, seed=seed,
                                   beta=args.beta, threads=args.threads)
    else:
        sigma = ns.law.std() if args.sigma is None else (args.sigma if args.sigma == "estimate" else float(args.sigma))
        gcfg = GaussianScanConfig(sigma, cfg.alpha, cfg.replicates, cfg.seed, cfg.kernel, cfg.policy)
        res = run_robustness_comparison(args.M, args.n, cfg, gcfg, ns, dd, seed=seed, threads=args.threads)
    _emit_sim(res, args)


def _parse(parser, argv):
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            conf = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        conf = {k.replace("-", "_"): v for k, v in conf.items()}
        unknown = set(conf) - {a.dest for a in sub._actions}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        if args.command in ("test", "gauss-test"):
            _cmd_test(args)
        elif args.command == "constants":
            _cmd_constants(args)
        elif args.command == "oracle":
            _cmd_oracle(args)
        else:
            _cmd_sim(args)
    except (UsageError, ConfigError, KernelError) as exc:
        print(f"msrank: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"msrank: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"msrank: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
