"""``gls`` command-line front end.

    gls verify-thm21 --psi power_root:m=2 --trials 10000 --seed 42 --out runs/t21
    gls norm --function f.txt --a 1 --b inf --psi power_root:m=2
    gls sweep-subgaussian --eps-grid 0.5:1.5:3 --trials 2000 --out runs/sg

Exit status: 0 on success, 1 when an asserting command finds violations,
2 on configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .campaign import COMMANDS, CampaignConfig, fmt, run_campaign


def _real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if np.isnan(value):
        raise argparse.ArgumentTypeError("nan is not allowed")
    return value


def _grid(text: str) -> list[float]:
    """``lo:hi:n`` -> n evenly spaced points; a bare number is a one-point grid."""
    parts = text.split(":")
    if len(parts) == 1:
        return [_real(parts[0])]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    lo, hi = _real(parts[0]), _real(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid size must be an integer in {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid size must be >= 1")
    return np.linspace(lo, hi, n).tolist()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gls", description="Grand Lebesgue Space norms and convexity checks")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--a", type=_real, help="left end of the exponent interval")
    ap.add_argument("--b", type=_real, help="right end of the exponent interval (inf allowed)")
    ap.add_argument("--psi", help="generating function, e.g. power_root:m=2 or const:c=1")
    pg = ap.add_mutually_exclusive_group()
    pg.add_argument("--p", type=_real, action="append", help="exponent (repeatable)")
    pg.add_argument("--p-grid", type=_grid, help="exponent grid lo:hi:n")
    eg = ap.add_mutually_exclusive_group()
    eg.add_argument("--eps", type=_real, action="append", help="distance (repeatable)")
    eg.add_argument("--eps-grid", type=_grid, help="distance grid lo:hi:n")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--atoms-min", type=int, default=2)
    ap.add_argument("--atoms-max", type=int, default=64)
    ap.add_argument("--d", type=_real, help="upper bound on psi for verify-examples")
    ap.add_argument("--degenerate", action="store_true", help="force y = x in sampled pairs")
    ap.add_argument("--function", help="function file for the norm command")
    ap.add_argument("--p-max", type=_real, default=2.0**16, help="exponent cap when b = inf")
    ap.add_argument("--grid-size", type=int, default=512)
    ap.add_argument("--iterations", type=int, default=60)
    ap.add_argument("--out", help="directory for trials.csv, summary.csv and pairs/")
    return ap


def config_from_args(args) -> CampaignConfig:
    return CampaignConfig(
        command=args.command, trials=args.trials, seed=args.seed,
        atoms_min=args.atoms_min, atoms_max=args.atoms_max, a=args.a, b=args.b,
        psi=args.psi, p=args.p or args.p_grid, eps=args.eps or args.eps_grid,
        d=args.d, degenerate=args.degenerate, function=args.function,
        grid_size=args.grid_size, iterations=args.iterations, p_max=args.p_max,
        out=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run_campaign(config_from_args(args))
    except (ValueError, OSError) as exc:
        print(f"gls: error: {exc}", file=sys.stderr)
        return 2
    for key, value in report.summary.items():
        print(f"{key}: {fmt(value)}")
    print(f"wall_time_s: {fmt(report.wall_time)}")
    if report.config.out:
        print(f"report: {report.config.out}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
