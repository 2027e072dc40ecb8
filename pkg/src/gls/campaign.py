"""Verification campaigns, sweeps and their flat-file reports.

A campaign turns a :class:`CampaignConfig` into a :class:`VerificationReport`:
one row per trial (or per grid cell for sweeps), a summary, and the pairs
worth keeping as reproducible witnesses.  Reports are written as two CSV
files with a ``#`` header echoing the configuration:

    <out>/trials.csv     per-trial rows; byte-identical for a repeated config
    <out>/summary.csv    aggregate metrics plus wall time
    <out>/pairs/*.txt    witness pairs in the function file format
"""
from __future__ import annotations

import csv
import io
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import convexity as cv
from .measure import SimpleFunction, ess_sup, format_function, read_function
from .norms import GLSpace, batch_gls_norm, gls_norm, kappa, theta
from .psi import parse_psi
from .sampling import sample_ball_pairs

COMMANDS = (
    "norm", "moc", "verify-thm21", "verify-thm31", "verify-triangle",
    "verify-examples", "sweep-moc", "sweep-subgaussian",
)
ASSERTING = ("verify-thm21", "verify-thm31", "verify-triangle", "verify-examples")
MAX_SAVED_VIOLATIONS = 20

DEFAULT_INTERVALS = {
    "verify-thm21": (1.2, 2.0),
    "verify-thm31": (2.5, 8.0),
    "sweep-subgaussian": (1.0, math.inf),
    "norm": (1.2, 2.0),
}
EXAMPLE_INTERVALS = {1: (1.5, 2.0), 2: (2.5, 4.0)}


def fmt(value) -> str:
    """Numbers with 17 significant digits; booleans as 0/1."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


@dataclass
class CampaignConfig:
    command: str
    trials: int = 1000
    seed: int = 0
    atoms_min: int = 2
    atoms_max: int = 64
    a: float | None = None
    b: float | None = None
    psi: str | None = None
    p: list[float] | None = None
    eps: list[float] | None = None
    d: float | None = None
    degenerate: bool = False
    function: str | None = None
    grid_size: int = 512
    iterations: int = 60
    p_max: float = 2.0**16
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 1 <= self.atoms_min <= self.atoms_max:
            raise ValueError("need 1 <= atoms_min <= atoms_max")
        if self.a is not None and self.b is not None and not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        for name in ("p", "eps"):
            grid = getattr(self, name)
            if grid is not None and len(grid) == 0:
                raise ValueError(f"{name} grid is empty")

    def interval(self, default: tuple[float, float]) -> tuple[float, float]:
        a = default[0] if self.a is None else self.a
        b = default[1] if self.b is None else self.b
        if not a < b:
            raise ValueError(f"need a < b, got a={a}, b={b}")
        return a, b

    def space(self, default_interval, default_psi="const:c=1") -> GLSpace:
        a, b = self.interval(default_interval)
        psi = parse_psi(self.psi or default_psi, a, b)
        return GLSpace(psi, self.grid_size, self.iterations, self.p_max)

    def echo(self) -> list[tuple[str, str]]:
        items = []
        for key, value in asdict(self).items():
            if key == "out":
                continue
            if isinstance(value, list):
                value = " ".join(fmt(float(v)) for v in value)
            items.append((key, "" if value is None else fmt(value)))
        return items


@dataclass
class VerificationReport:
    config: CampaignConfig
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    violations: int = 0
    wall_time: float = 0.0

    @property
    def asserting(self) -> bool:
        return self.config.command in ASSERTING

    @property
    def exit_code(self) -> int:
        return 1 if self.asserting and self.violations > 0 else 0

    def _header(self) -> str:
        lines = [f"# gls {self.config.command}"]
        lines += [f"# {k}: {v}" for k, v in self.config.echo()]
        return "\n".join(lines) + "\n"

    def trials_text(self) -> str:
        buf = io.StringIO()
        buf.write(self._header())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def summary_text(self) -> str:
        buf = io.StringIO()
        buf.write(self._header())
        buf.write(f"# wall_time_s: {fmt(self.wall_time)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        for k, v in self.summary.items():
            w.writerow([k, fmt(v)])
        return buf.getvalue()

    def write(self, out) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trials.csv").write_text(self.trials_text(), encoding="utf-8")
        (out / "summary.csv").write_text(self.summary_text(), encoding="utf-8")
        if self.witnesses:
            pairs_dir = out / "pairs"
            pairs_dir.mkdir(exist_ok=True)
            for name, (x, y, note) in self.witnesses.items():
                (pairs_dir / f"{name}_x.txt").write_text(format_function(x, note), encoding="utf-8")
                (pairs_dir / f"{name}_y.txt").write_text(format_function(y, note), encoding="utf-8")
        return out


def _slack_summary(slack: np.ndarray) -> dict:
    viol = slack < cv.VIOLATION_TOL
    worst = int(np.argmin(slack))
    return {
        "violations": int(viol.sum()),
        "min_slack": float(slack.min()),
        "mean_slack": float(slack.mean()),
        "worst_trial": worst,
    }


def _keep_pairs(report, pairs, slack, label="slack"):
    worst = int(np.argmin(slack))
    x, y = pairs.pair(worst)
    report.witnesses["worst"] = (x, y, f"trial {worst}, {label} {fmt(slack[worst])}")
    for i in np.flatnonzero(slack < cv.VIOLATION_TOL)[:MAX_SAVED_VIOLATIONS]:
        x, y = pairs.pair(int(i))
        report.witnesses[f"violation_{int(i)}"] = (x, y, f"trial {int(i)}, {label} {fmt(slack[i])}")


def _verify_triangle(cfg: CampaignConfig) -> VerificationReport:
    p = cfg.p[0] if cfg.p else 2.0
    if len(cfg.p or []) > 1:
        raise ValueError("verify-triangle takes a single --p")
    space = cv.LpSpace(p)
    pairs = sample_ball_pairs(cfg.trials, cfg.seed, cv.space_norm(space), cfg.atoms_min,
                              cfg.atoms_max, degenerate=cfg.degenerate)
    rec = cv.batch_refined_triangle(pairs, p)
    cols = ["trial", "atoms", "norm_x", "norm_y", "dist", "sum_norm", "delta", "slack", "violation"]
    rep = VerificationReport(cfg, cols)
    atoms = pairs.atoms()
    for i in range(len(pairs)):
        rep.rows.append([i, atoms[i], rec.norm_x[i], rec.norm_y[i], rec.dist[i], rec.sum_norm[i],
                         rec.delta[i], rec.slack[i], rec.slack[i] < cv.VIOLATION_TOL])
    rep.summary = {"trials": len(pairs), **_slack_summary(rec.slack)}
    rep.violations = rep.summary["violations"]
    _keep_pairs(rep, pairs, rec.slack)
    return rep


def _verify_wcoc(cfg: CampaignConfig) -> VerificationReport:
    thm21 = cfg.command == "verify-thm21"
    space = cfg.space(DEFAULT_INTERVALS[cfg.command])
    pairs = sample_ball_pairs(cfg.trials, cfg.seed, cv.space_norm(space), cfg.atoms_min,
                              cfg.atoms_max, degenerate=cfg.degenerate)
    check = cv.batch_wcoc_thm21 if thm21 else cv.batch_wcoc_thm31
    rec = check(pairs, space, check_ball=False)
    functional = "kappa" if thm21 else "theta"
    cols = ["trial", "atoms", "norm_x", "norm_y", "dist", functional, "arg_p", "bound",
            "lhs", "slack", "stated_slack", "chain_bound", "chain_slack", "vacuous",
            "converged", "violation"]
    rep = VerificationReport(cfg, cols)
    atoms = pairs.atoms()
    for i in range(len(rec)):
        rep.rows.append([
            i, atoms[i], rec.norm_x[i], rec.norm_y[i], rec.dist[i], rec.functional[i],
            rec.arg_p[i], rec.bound[i], rec.lhs[i], rec.slack[i], rec.stated_slack[i],
            rec.chain_bound[i], rec.chain_slack[i], rec.vacuous[i], rec.converged[i],
            rec.slack[i] < cv.VIOLATION_TOL,
        ])
    rep.summary = {
        "trials": len(rec),
        **_slack_summary(rec.slack),
        "vacuous_bound": int(rec.vacuous.sum()),
        "stated_form_violations": int((rec.stated_slack < cv.VIOLATION_TOL).sum()),
        "chain_violations": int((rec.chain_slack < cv.VIOLATION_TOL).sum()),
        "not_converged": int((~rec.converged).sum()),
        "psi": space.psi.spec_string(),
    }
    rep.violations = rep.summary["violations"]
    _keep_pairs(rep, pairs, rec.slack)
    return rep


def _verify_examples(cfg: CampaignConfig) -> VerificationReport:
    if cfg.a is not None or cfg.b is not None:
        a, b = cfg.interval(EXAMPLE_INTERVALS[1])
        if b <= 2:
            which = {1: (a, b)}
        elif a >= 2:
            which = {2: (a, b)}
        else:
            raise ValueError(f"interval ({a}, {b}) fits neither example (b <= 2 or a >= 2)")
    else:
        which = EXAMPLE_INTERVALS
    cols = ["trial", "example", "atoms", "dist_a", "bound", "lhs", "slack", "violation"]
    rep = VerificationReport(cfg, cols)
    for ex, (a, b) in which.items():
        psi = parse_psi(cfg.psi or "const:c=1", a, b)
        space = GLSpace(psi, cfg.grid_size, cfg.iterations, cfg.p_max)
        pairs = sample_ball_pairs(cfg.trials, cfg.seed, cv.space_norm(space), cfg.atoms_min,
                                  cfg.atoms_max, degenerate=cfg.degenerate)
        check = cv.batch_example1 if ex == 1 else cv.batch_example2
        rec = check(pairs, space, cfg.d, check_ball=False)
        atoms = pairs.atoms()
        for i in range(len(rec)):
            rep.rows.append([i, ex, atoms[i], rec.dist_a[i], rec.bound[i], rec.lhs[i],
                             rec.slack[i], rec.slack[i] < cv.VIOLATION_TOL])
        summ = _slack_summary(rec.slack)
        rep.summary.update({f"example{ex}_{k}": v for k, v in summ.items()})
        rep.summary[f"example{ex}_d"] = rec.d
        rep.summary[f"example{ex}_interval"] = f"{fmt(a)}:{fmt(b)}"
        if ex == 1:
            rep.violations = summ["violations"]
        worst = summ["worst_trial"]
        x, y = pairs.pair(worst)
        rep.witnesses[f"example{ex}_worst"] = (x, y, f"example {ex}, trial {worst}, slack {fmt(rec.slack[worst])}")
    rep.summary["asserted_violations"] = rep.violations
    return rep


def _eps_grid(cfg, default):
    return list(cfg.eps) if cfg.eps else default


def _moc(cfg: CampaignConfig) -> VerificationReport:
    cols = ["p", "eps", "delta", "method", "iterations", "residual", "lower_bound",
            "bound_slack", "two_atom", "two_atom_family", "two_atom_gap"]
    rep = VerificationReport(cfg, cols)
    ps = list(cfg.p) if cfg.p else [2.0]
    worst = math.inf
    for p in ps:
        for eps in _eps_grid(cfg, [1.0]):
            ex = cv.delta_lp_exact(p, eps)
            lb = cv.delta_lp_lower_bound(p, eps)
            two = cv.empirical_moc(cv.LpSpace(p), eps, "two_atom_directed")
            worst = min(worst, ex.delta - lb)
            rep.rows.append([p, eps, ex.delta, ex.method, ex.iterations, ex.residual, lb,
                             ex.delta - lb, two.delta, two.diagnostics["family"],
                             two.diagnostics["gap"]])
    rep.summary = {"cells": len(rep.rows), "min_bound_slack": worst}
    return rep


def _sweep_moc(cfg: CampaignConfig) -> VerificationReport:
    cols = ["p", "eps", "delta", "lower_bound", "two_atom", "two_atom_gap",
            "empirical_random", "empirical_gap", "feasible", "rejections"]
    rep = VerificationReport(cfg, cols)
    ps = list(cfg.p) if cfg.p else [1.25, 1.5, 2.0, 3.0, 6.0]
    eps_grid = _eps_grid(cfg, [0.25 * k for k in range(9)])
    min_gap = math.inf
    for p in ps:
        for eps in eps_grid:
            ex = cv.delta_lp_exact(p, eps).delta
            two = cv.empirical_moc(cv.LpSpace(p), eps, "two_atom_directed")
            rnd = cv.empirical_moc(cv.LpSpace(p), eps, "random", cfg.trials, cfg.seed,
                                   cfg.atoms_min, cfg.atoms_max)
            min_gap = min(min_gap, rnd.delta - ex, two.delta - ex)
            rep.rows.append([p, eps, ex, cv.delta_lp_lower_bound(p, eps), two.delta,
                             two.delta - ex, rnd.delta, rnd.delta - ex,
                             rnd.diagnostics["feasible"], rnd.diagnostics["rejections"]])
    rep.summary = {"cells": len(rep.rows), "min_empirical_gap": min_gap}
    return rep


def atom_caps(atoms_min: int, atoms_max: int) -> list[int]:
    """Doubling atom-count caps from max(atoms_min, 2) up to atoms_max."""
    caps, k = [], max(atoms_min, 2)
    while k < atoms_max:
        caps.append(k)
        k *= 2
    caps.append(atoms_max)
    return caps


def sweep_subgaussian(eps_grid, trials: int, seed: int, p_max: float = 2.0**16,
                      atoms_min: int = 2, atoms_max: int = 64, psi: str = "power_root:m=2",
                      a: float = 1.0, b: float = math.inf, grid_size: int = 512,
                      iterations: int = 60):
    """Empirical convexity-modulus upper estimates for psi(p) = sqrt(p) on (1, inf).

    Returns ``(rows, witnesses)``; one row per (atom cap, eps) with the best
    observed ``1 - ||x+y||/2`` over feasible sampled pairs.
    """
    space = GLSpace(parse_psi(psi, a, b), grid_size, iterations, p_max)
    rows, witnesses = [], {}
    for cap in atom_caps(atoms_min, atoms_max):
        lo = min(atoms_min, cap)
        for j, eps in enumerate(eps_grid):
            res = cv.empirical_moc(space, eps, "random", trials, seed, lo, cap)
            name = f"subgaussian_k{cap}_e{j}"
            x, y = res.witness
            witnesses[name] = (x, y, f"atoms<={cap}, eps {fmt(eps)}, estimate {fmt(res.delta)}")
            d = res.diagnostics
            rows.append([cap, eps, res.delta, d["feasible"], d["rejections"], d["infeasible"],
                         d["best_trial"], name])
    return rows, witnesses


def _sweep_subgaussian(cfg: CampaignConfig) -> VerificationReport:
    a, b = cfg.interval(DEFAULT_INTERVALS["sweep-subgaussian"])
    eps_grid = _eps_grid(cfg, [0.5, 1.0, 1.5])
    rows, witnesses = sweep_subgaussian(eps_grid, cfg.trials, cfg.seed, cfg.p_max,
                                        cfg.atoms_min, cfg.atoms_max,
                                        cfg.psi or "power_root:m=2", a, b,
                                        cfg.grid_size, cfg.iterations)
    cols = ["atoms_cap", "eps", "estimate", "feasible", "rejections", "infeasible",
            "best_trial", "pair"]
    rep = VerificationReport(cfg, cols, rows, witnesses=witnesses)
    rep.summary = {"cells": len(rows), "min_estimate": min(r[2] for r in rows)}
    return rep


def _norm(cfg: CampaignConfig) -> VerificationReport:
    if not cfg.function:
        raise ValueError("norm needs --function PATH")
    f = read_function(cfg.function)
    space = cfg.space(DEFAULT_INTERVALS["norm"])
    rep = VerificationReport(cfg, ["quantity", "value", "arg_p", "converged"])
    r = gls_norm(f, space)
    rep.rows.append(["gls_norm", r.value, r.arg_p, r.converged])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        k = kappa(f, space)
        t = theta(f, space)
    rep.rows.append(["kappa", k.value, k.arg_p, k.converged])
    rep.rows.append(["theta", t.value, t.arg_p, t.converged])
    rep.rows.append(["ess_sup", ess_sup(f), math.inf, True])
    rep.summary = {"gls_norm": r.value, "arg_p": r.arg_p, "tail_dominated": r.tail_dominated,
                   "kappa": k.value, "theta": t.value}
    return rep


_DISPATCH = {
    "norm": _norm,
    "moc": _moc,
    "verify-triangle": _verify_triangle,
    "verify-thm21": _verify_wcoc,
    "verify-thm31": _verify_wcoc,
    "verify-examples": _verify_examples,
    "sweep-moc": _sweep_moc,
    "sweep-subgaussian": _sweep_subgaussian,
}


def run_campaign(config: CampaignConfig) -> VerificationReport:
    start = time.perf_counter()
    report = _DISPATCH[config.command](config)
    report.wall_time = time.perf_counter() - start
    if config.out:
        report.write(config.out)
    return report


def reevaluate_witness(x: SimpleFunction, y: SimpleFunction, space: GLSpace) -> float:
    """``1 - ||x+y||/2`` for a stored pair, for checking serialized witnesses."""
    return 1.0 - batch_gls_norm(x + y, space).value[0] / 2.0
