"""Command-line front end: rate, GDoF, bound and simulation sweeps as CSV.

Usage::

    nccic rates --snr-db 20,40,60 --rho 0.5,1 --ensemble 10 --seed 1
    nccic gdof --snr-db 80 --rho 0.25,0.5,1,1.5,2 --out gdof.csv
    nccic simulate --snr-db 20 --p 3 --n 1 --trials 100000 --json-summary s.json
    nccic bounds --h11 1,0 --h12 0.5,0.5 --h21 1,0 --h22 1,0 --snr-db 30

Every CSV starts with one ``#`` metadata line (schema version, seed and a
hash of the resolved options) followed by the header row.  The exit code is
0 only if every row-level check passes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .algebra import InvalidModulus, check_modulus
from .lattice import NestedLatticeCode
from .rate_engine import (
    DEFAULT_RATE_MODULUS,
    ChannelInstance,
    DegenerateAlignment,
    SearchConfig,
    aligned_beta,
    aligned_choice,
    converse_bounds,
    optimize_scheme,
    random_unit_channel,
)
from .transceiver import TrialConfig, effective_noise_theory, run_trials

log = logging.getLogger("nccic")

CSV_SCHEMA = "nccic-csv/1"
SIM_MODULUS = 3

RATES_COLUMNS = [
    "channel", "snr_db", "rho", "r1", "r2", "sum", "a1_re", "a1_im", "a2_re", "a2_im",
    "beta_re", "beta_im", "gamma", "sum_upper",
]
GDOF_COLUMNS = ["channel", "rho", "snr_db", "d1_hat", "d2_hat", "dsum_hat", "dsum_theory"]
BOUNDS_COLUMNS = [
    "channel", "snr_db", "rho", "r_sym_upper", "r_max_upper", "sum_upper",
    "sum_upper_gdof", "gdof_limit",
]
SIMULATE_COLUMNS = [
    "channel", "rho", "snr_db", "trials", "gamma", "rx1_err_rate", "rx2_err_rate",
    "eff_noise_power_measured", "eff_noise_power_theory",
]


class UsageError(Exception):
    pass


# -- parsing -------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from e
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"need one or more finite values, got {text!r}")
    return vals


def _complex_pair(text: str) -> complex:
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _modulus(text: str) -> int:
    try:
        return check_modulus(int(text))
    except (ValueError, InvalidModulus) as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nccic",
        description="Aligned PCoF + DPC rates, bounds, GDoF and simulation for the "
        "network-coded cognitive interference channel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file mirroring the flags (flags win)")
    common.add_argument("--snr-db", type=_float_list, default="60", help="comma-separated SNR grid in dB")
    common.add_argument("--rho", type=_float_list, default="1.0", help="comma-separated INR exponents")
    for name in ("h11", "h12", "h21", "h22"):
        common.add_argument(f"--{name}", type=_complex_pair, default=None, help="explicit gain 're,im'")
    common.add_argument("--ensemble", type=_positive_int, default=1,
                        help="number of random unit-magnitude channels (ignored with explicit gains)")
    common.add_argument("--p", type=_modulus, default=None, help="prime p = 3 mod 4 (q = p^2)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="CSV path (default stdout)")
    common.add_argument("--json-summary", default=None, help="write a JSON run summary here")

    sub.add_parser("rates", parents=[common], help="achievable rate pairs and the sum bound")
    g = sub.add_parser("gdof", parents=[common], help="finite-SNR GDoF estimates")
    g.add_argument("--overlay", default=None,
                   help="CSV with a 'rho' column and reference curves to interpolate alongside")
    sub.add_parser("bounds", parents=[common], help="converse bounds")
    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo transceiver simulation")
    s.add_argument("--n", type=_positive_int, default=1, help="block length")
    s.add_argument("--r", type=int, default=None, help="code dimension (default n)")
    s.add_argument("--trials", type=_positive_int, default=1000)
    s.add_argument("--noiseless", type=_bool, nargs="?", const=True, default=False)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as e:
            parser.error(f"cannot read config: {e}")
        except UsageError as e:
            parser.error(str(e))
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if args.command == "simulate":
        if args.r is None:
            args.r = args.n
        if not 1 <= args.r <= args.n:
            parser.error(f"--r must lie in [1, n], got {args.r}")
    return args


# -- helpers -------------------------------------------------------------


def channel_list(args) -> list[tuple[complex, complex, complex, complex]]:
    explicit = [getattr(args, k) for k in ("h11", "h12", "h21", "h22")]
    if any(v is not None for v in explicit):
        h = tuple(complex(1.0) if v is None else v for v in explicit)
        if h[0] == 0 or h[2] == 0:
            raise UsageError("h11 and h21 must be nonzero")
        return [h]
    rng = np.random.default_rng(args.seed)
    return [random_unit_channel(rng) for _ in range(args.ensemble)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def spec_hash(args) -> str:
    skip = {"out", "json_summary", "config"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    text = json.dumps(payload, sort_keys=True, default=lambda v: [v.real, v.imag] if isinstance(v, complex) else str(v))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def render_csv(args, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA} tool=nccic-{__version__} command={args.command} "
              f"seed={args.seed} spec={spec_hash(args)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _sorted(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=lambda r: (r["rho"], r["snr_db"], r["channel"]))


# -- commands ------------------------------------------------------------


def cmd_rates(args) -> tuple[list[str], list[dict], dict]:
    p = args.p or DEFAULT_RATE_MODULUS
    search = SearchConfig(p=p)
    rows, violations = [], 0
    for k, h in enumerate(channel_list(args)):
        for rho in args.rho:
            for snr_db in args.snr_db:
                ch = ChannelInstance.from_rho(h, 10 ** (snr_db / 10), rho)
                choice, res = optimize_scheme(ch, search)
                try:
                    gamma = aligned_beta(ch, p)[1]
                except DegenerateAlignment:
                    gamma = None
                ok = res.sum <= res.bounds[2]
                violations += not ok
                rows.append({
                    "channel": k, "snr_db": snr_db, "rho": rho, "r1": res.r1, "r2": res.r2,
                    "sum": res.sum, "a1_re": choice.a1.re, "a1_im": choice.a1.im,
                    "a2_re": choice.a2.re, "a2_im": choice.a2.im,
                    "beta_re": choice.beta.real, "beta_im": choice.beta.imag,
                    "gamma": gamma, "sum_upper": res.bounds[2],
                })
    return RATES_COLUMNS, _sorted(rows), {"converse_violations": violations, "passed": violations == 0}


def _read_overlay(path: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        data = list(reader)
    if not data or "rho" not in data[0]:
        raise UsageError(f"overlay {path} needs a 'rho' column")
    rho = np.array([float(r["rho"]) for r in data])
    order = np.argsort(rho)
    curves = {}
    for name in data[0]:
        if name == "rho":
            continue
        vals = np.array([float(r[name]) for r in data])
        curves[f"overlay_{name}"] = (rho[order], vals[order])
    return curves


def cmd_gdof(args) -> tuple[list[str], list[dict], dict]:
    if any(s <= 0 for s in args.snr_db):
        raise UsageError("GDoF normalization needs snr_db > 0")
    search = SearchConfig(p=args.p or DEFAULT_RATE_MODULUS)
    overlay = _read_overlay(args.overlay) if getattr(args, "overlay", None) else {}
    rows, violations = [], 0
    for k, h in enumerate(channel_list(args)):
        for rho in args.rho:
            for snr_db in args.snr_db:
                ch = ChannelInstance.from_rho(h, 10 ** (snr_db / 10), rho)
                _, res = optimize_scheme(ch, search)
                d1, d2, ds = res.gdof
                ok = res.sum <= res.bounds[2]
                violations += not ok
                row = {"channel": k, "rho": rho, "snr_db": snr_db, "d1_hat": d1,
                       "d2_hat": d2, "dsum_hat": ds, "dsum_theory": 1.0 + rho}
                for name, (xs, ys) in overlay.items():
                    row[name] = float(np.interp(rho, xs, ys))
                rows.append(row)
    return GDOF_COLUMNS + list(overlay), _sorted(rows), {
        "converse_violations": violations, "passed": violations == 0}


def cmd_bounds(args) -> tuple[list[str], list[dict], dict]:
    rows = []
    for k, h in enumerate(channel_list(args)):
        for rho in args.rho:
            for snr_db in args.snr_db:
                snr = 10 ** (snr_db / 10)
                ch = ChannelInstance.from_rho(h, snr, rho)
                r_sym, r_max, total = converse_bounds(ch)
                rows.append({
                    "channel": k, "snr_db": snr_db, "rho": rho, "r_sym_upper": r_sym,
                    "r_max_upper": r_max, "sum_upper": total,
                    "sum_upper_gdof": total / math.log2(snr) if snr > 1 else None,
                    "gdof_limit": min(1.0, rho) + max(1.0, rho),
                })
    return BOUNDS_COLUMNS, _sorted(rows), {"passed": True}


def cmd_simulate(args) -> tuple[list[str], list[dict], dict]:
    p = args.p or SIM_MODULUS
    rows = []
    errors = [0, 0]
    lambda_ok = True
    for k, h in enumerate(channel_list(args)):
        for rho in args.rho:
            for snr_db in args.snr_db:
                snr = 10 ** (snr_db / 10)
                ch = ChannelInstance.from_rho(h, snr, rho)
                try:
                    choice = aligned_choice(ch, p)
                except DegenerateAlignment as e:
                    raise UsageError(f"channel {k} at rho={rho}, {snr_db} dB: {e}") from e
                if args.r == args.n:
                    code = NestedLatticeCode.for_snr(p, args.n, snr)
                else:
                    code = NestedLatticeCode.random_systematic(
                        p, args.n, args.r, math.sqrt(6 * snr), np.random.default_rng([args.seed, k]))
                cfg = TrialConfig(code, ch, choice, not args.noiseless, args.trials, args.seed)
                out = run_trials(cfg, check_lambda=True)
                log.info("channel %d rho=%g snr=%gdB: %s", k, rho, snr_db, out)
                errors[0] += out.rx1_message_errors
                errors[1] += out.rx2_message_errors
                lambda_ok &= bool(out.lambda_check_passed)
                rows.append({
                    "channel": k, "rho": rho, "snr_db": snr_db, "trials": out.trials,
                    "gamma": choice.gamma, "rx1_err_rate": out.rx1_error_rate,
                    "rx2_err_rate": out.rx2_error_rate,
                    "eff_noise_power_measured": out.empirical_effective_noise_power_rx2,
                    "eff_noise_power_theory": effective_noise_theory(ch, choice),
                })
    exact = {
        "checked": bool(args.noiseless),
        "passed": (errors == [0, 0]) if args.noiseless else None,
        "rx1_errors": errors[0],
        "rx2_errors": errors[1],
    }
    passed = lambda_ok and (exact["passed"] is not False)
    return SIMULATE_COLUMNS, _sorted(rows), {
        "noiseless": bool(args.noiseless), "exact_cancellation": exact,
        "lambda_check_passed": lambda_ok, "passed": passed}


COMMANDS = {"rates": cmd_rates, "gdof": cmd_gdof, "bounds": cmd_bounds, "simulate": cmd_simulate}


def _configure_logging() -> None:
    level = os.environ.get("NCCIC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    args = parse_args(argv)
    try:
        columns, rows, summary = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"nccic: error: {e}", file=sys.stderr)
        return 2
    text = render_csv(args, columns, rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.json_summary:
        summary = {"command": args.command, "version": __version__, "seed": args.seed,
                   "spec": spec_hash(args), "rows": len(rows), **summary}
        with open(args.json_summary, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if not summary["passed"]:
        log.error("row-level checks failed: %s", summary)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
