"""Moduli of convexity of L_p and convexity bounds for Grand Lebesgue Spaces.

For L_p with 1 < p <= 2 the modulus delta_p(eps) is the root in [0, 1] of

    (1 - d + eps/2)^p + |1 - d - eps/2|^p = 2,

and for p > 2 it is ``1 - (1 - (eps/2)^p)^(1/p)``.  The GLS checks compare
``||x + y||`` against ``2 - (a-1)/4 kappa(x-y)`` on intervals inside (1, 2]
and against ``2 - theta(x-y)`` on intervals inside (2, inf).

Functions named ``batch_*`` work on a :class:`~gls.sampling.PairBatch`; the
single-pair versions wrap them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .measure import FunctionBatch, MeasurePartition, SimpleFunction, lp_norm
from .norms import GLSpace, batch_gls_norm, batch_kappa, batch_theta
from .optimize import batch_extremize, scalar_extremize
from .psi import POSITIVITY_PROBES
from .sampling import PairBatch, sample_ball_pairs

# slack below which a checked inequality counts as violated
VIOLATION_TOL = -1e-9
# ball membership tolerance on ||x||, ||y||
BALL_TOL = 1e-12
BISECTION_CAP = 200
# probe grid for the inf over p inside the proof-chain diagnostic
CHAIN_GRID = 48


class PreconditionError(ValueError):
    """Inputs fall outside the hypotheses of the requested check."""


@dataclass(frozen=True, eq=False)
class MocResult:
    epsilon: float
    p: float
    delta: float
    method: str
    iterations: int = 0
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    witness: tuple[SimpleFunction, SimpleFunction] | None = None


@dataclass(frozen=True)
class LpSpace:
    p: float

    def __post_init__(self):
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError(f"L_p needs finite p >= 1, got {self.p}")


def _validate(p, eps):
    p, eps = float(p), float(eps)
    if not p > 1:
        raise ValueError(f"the modulus of convexity needs p > 1, got {p}")
    if not 0 <= eps <= 2:
        raise ValueError(f"eps must lie in [0, 2], got {eps}")
    return p, eps


def _closed_form(p, eps):
    with np.errstate(divide="ignore"):
        return -np.expm1(np.log1p(-((eps / 2.0) ** p)) / p)


def _residual(p, d, s, t):
    """``(s+t)^p + |s-t|^p - 2`` with ``s = 1 - d``, as two ``expm1`` terms.

    Both bases sit near 1 for small d or for eps near 2, where the naive sum
    cancels; the offsets from 1 are formed from ``d``, ``s`` and ``1 - t``.
    """
    # of d and s = 1 - d, the one <= 0.5 carries full relative precision
    up = np.where(d <= 0.5, t - d, s - (1.0 - t))
    down = np.where(s >= t, -(d + t), -((1.0 - t) + s))
    with np.errstate(divide="ignore"):
        return np.expm1(p * np.log1p(up)) + np.expm1(p * np.log1p(down))


def _implicit_residual(p, eps, d):
    return _residual(p, d, 1.0 - d, eps / 2.0)


def _implicit_root(p, eps):
    """Vectorised bisection on d in [0, 1]; the residual decreases in d."""
    p, eps = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(eps, dtype=float))
    lo = np.zeros(p.shape)
    hi = np.ones(p.shape)
    hi[eps == 0] = 0.0
    lo[eps == 2] = 1.0
    it = 0
    while it < BISECTION_CAP:
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi) & (hi - lo > 2.0**-64)
        if not np.any(active):
            break
        above = _implicit_residual(p, eps, mid) > 0
        lo = np.where(active & above, mid, lo)
        hi = np.where(active & ~above, mid, hi)
        it += 1
    r_lo = np.abs(_implicit_residual(p, eps, lo))
    r_hi = np.abs(_implicit_residual(p, eps, hi))
    d = np.where(r_lo <= r_hi, lo, hi)
    return d, it, np.minimum(r_lo, r_hi)


def _implicit_root_newton(p, eps):
    """Newton on s = 1 - d from s = 1.

    The residual is convex and increasing in s, so the iterates decrease
    monotonically onto the root without overshooting.
    """
    t = eps / 2.0
    s = np.ones(p.shape)
    for _ in range(BISECTION_CAP):
        h = _residual(p, 1.0 - s, s, t)
        dh = p * ((s + t) ** (p - 1) + np.sign(s - t) * np.abs(s - t) ** (p - 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where((h > 0) & (dh > 0), h / dh, 0.0)
        s_new = np.maximum(s - step, 0.0)
        if not np.any(s_new < s):
            break
        s = s_new
    # eps = 2 is a double root at s = 0 where the residual is too flat to resolve
    return np.where(eps == 0, 0.0, np.where(eps == 2, 1.0, 1.0 - s))


def delta_lp(p, eps) -> np.ndarray:
    """Vectorised exact modulus of L_p; broadcasts ``p`` against ``eps``."""
    p, eps = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(eps, dtype=float))
    out = np.empty(p.shape)
    big = p > 2
    out[big] = _closed_form(p[big], eps[big])
    if np.any(~big):
        out[~big] = _implicit_root_newton(p[~big], eps[~big])
    return out


def delta_closed_form(p: float, eps: float) -> MocResult:
    p, eps = _validate(p, eps)
    return MocResult(eps, p, float(_closed_form(p, eps)), "closed_form")


def delta_implicit_root(p: float, eps: float) -> MocResult:
    p, eps = _validate(p, eps)
    d, it, res = _implicit_root(p, eps)
    return MocResult(eps, p, float(d), "implicit_root", it, float(res))


def delta_lp_exact(p: float, eps: float) -> MocResult:
    """Modulus of convexity of L_p at ``eps``: closed form for p > 2, root otherwise.

    >>> round(delta_lp_exact(2, 1).delta, 7)
    0.1339746
    """
    p, eps = _validate(p, eps)
    return delta_closed_form(p, eps) if p > 2 else delta_implicit_root(p, eps)


def delta_lp_lower_bound(p: float, eps: float) -> float:
    p, eps = _validate(p, eps)
    if p <= 2:
        return (p - 1.0) / 8.0 * eps * eps
    return eps**p / (p * 2.0**p)


# --------------------------------------------------------------------------
# refined triangle inequality in L_p


def _lp(batch: FunctionBatch, p: float) -> np.ndarray:
    return np.exp(batch.log_lp(np.array([float(p)]))[:, 0])


@dataclass(frozen=True)
class TriangleRecords:
    norm_x: np.ndarray
    norm_y: np.ndarray
    dist: np.ndarray
    sum_norm: np.ndarray
    delta: np.ndarray
    slack: np.ndarray


def batch_refined_triangle(pairs: PairBatch, p: float, check_ball: bool = True) -> TriangleRecords:
    p = float(p)
    if not p > 1:
        raise ValueError(f"refined triangle check needs p > 1, got {p}")
    nx, ny = _lp(pairs.fx, p), _lp(pairs.fy, p)
    if check_ball:
        _check_ball(nx, ny)
    dist = np.clip(_lp(pairs.fdiff, p), 0.0, 2.0)
    s = _lp(pairs.fsum, p)
    d = delta_lp(p, dist)
    return TriangleRecords(nx, ny, dist, s, d, 2.0 - 2.0 * d - s)


def refined_triangle_check(x: SimpleFunction, y: SimpleFunction, p: float) -> float:
    """Slack of ``||x+y||_p <= 2 - 2 delta_p(||x-y||_p)`` for x, y in the unit ball."""
    return float(batch_refined_triangle(PairBatch.from_pairs([(x, y)]), p).slack[0])


def _check_ball(nx, ny):
    bad = np.flatnonzero((nx > 1 + BALL_TOL) | (ny > 1 + BALL_TOL))
    if bad.size:
        i = bad[0]
        raise PreconditionError(
            f"pair {i} is outside the unit ball: ||x||={nx[i]!r}, ||y||={ny[i]!r}")


# --------------------------------------------------------------------------
# weak characteristic of convexity bounds


@dataclass(frozen=True)
class WcocBound:
    """Right-hand side of a GLS convexity bound.

    ``bound_value`` is the checked bound ``2 - c * functional``.
    ``delta_component`` is the Delta for which ``bound_value = 2 - 2 Delta``;
    ``stated_delta`` is the larger lower bound on Delta that is usually
    quoted with each bound, twice ``delta_component`` in both cases.
    """

    kind: str
    bound_value: float
    delta_component: float
    stated_delta: float
    functional_value: float
    arg_p: float


@dataclass(frozen=True)
class WcocCheck:
    bound: WcocBound
    lhs: float
    slack: float
    stated_slack: float
    chain_bound: float
    chain_slack: float
    vacuous: bool
    converged: bool


@dataclass(frozen=True)
class WcocRecords:
    kind: str
    norm_x: np.ndarray
    norm_y: np.ndarray
    dist: np.ndarray
    functional: np.ndarray
    arg_p: np.ndarray
    bound: np.ndarray
    delta_component: np.ndarray
    stated_delta: np.ndarray
    lhs: np.ndarray
    slack: np.ndarray
    stated_slack: np.ndarray
    chain_bound: np.ndarray
    chain_slack: np.ndarray
    vacuous: np.ndarray
    converged: np.ndarray

    def __len__(self):
        return self.slack.size

    def check(self, i: int) -> WcocCheck:
        bound = WcocBound(self.kind, float(self.bound[i]), float(self.delta_component[i]),
                          float(self.stated_delta[i]), float(self.functional[i]),
                          float(self.arg_p[i]))
        return WcocCheck(bound, float(self.lhs[i]), float(self.slack[i]),
                         float(self.stated_slack[i]), float(self.chain_bound[i]),
                         float(self.chain_slack[i]), bool(self.vacuous[i]),
                         bool(self.converged[i]))


def proof_chain_bound(diff: FunctionBatch, space: GLSpace) -> np.ndarray:
    """``2 - 2 inf_p delta_p(||x-y||_p / psi(p))`` for each difference."""
    if space.psi.is_extremal:
        return np.full(len(diff), 2.0)
    psi = space.psi

    def objective(p):
        with np.errstate(invalid="ignore", over="ignore"):
            r = np.exp(diff.log_lp(p) - psi.log_psi(p))
        r = np.clip(np.nan_to_num(r, nan=0.0), 0.0, 2.0)
        return delta_lp(np.broadcast_to(p, r.shape), r)

    res = batch_extremize(objective, len(diff), psi.interval, "inf",
                          min(space.grid_size, CHAIN_GRID), space.iterations, space.p_max,
                          tail=0.0)
    return 2.0 - 2.0 * res.value


def _ball_norms(pairs: PairBatch, space: GLSpace, check_ball: bool):
    if pairs.norm_x is not None and pairs.norm_y is not None and not check_ball:
        return pairs.norm_x, pairs.norm_y
    nx = batch_gls_norm(pairs.fx, space).value
    ny = batch_gls_norm(pairs.fy, space).value
    if check_ball:
        _check_ball(nx, ny)
    return nx, ny


def _wcoc(pairs: PairBatch, space: GLSpace, kind: str, check_ball: bool) -> WcocRecords:
    nx, ny = _ball_norms(pairs, space, check_ball)
    lhs = batch_gls_norm(pairs.fsum, space)
    dist = batch_gls_norm(pairs.fdiff, space).value
    if kind == "thm21":
        fn = batch_kappa(pairs.fdiff, space)
        coef = (space.a - 1.0) / 4.0
        bound = 2.0 - coef * fn.value
        stated = coef * fn.value
    else:
        fn = batch_theta(pairs.fdiff, space)
        bound = 2.0 - fn.value
        stated = fn.value
    chain = proof_chain_bound(pairs.fdiff, space)
    vacuous = (fn.value == 0) & ~pairs.fdiff.is_zero
    return WcocRecords(
        kind=kind, norm_x=nx, norm_y=ny, dist=dist, functional=fn.value, arg_p=fn.arg_p,
        bound=bound, delta_component=(2.0 - bound) / 2.0, stated_delta=stated,
        lhs=lhs.value, slack=bound - lhs.value, stated_slack=2.0 - 2.0 * stated - lhs.value,
        chain_bound=chain, chain_slack=chain - lhs.value, vacuous=vacuous,
        converged=lhs.converged & fn.converged,
    )


def batch_wcoc_thm21(pairs: PairBatch, space: GLSpace, check_ball: bool = True) -> WcocRecords:
    if not (1 < space.a < space.b <= 2):
        raise ValueError(f"the kappa bound needs 1 < a < b <= 2, got ({space.a}, {space.b})")
    return _wcoc(pairs, space, "thm21", check_ball)


def batch_wcoc_thm31(pairs: PairBatch, space: GLSpace, check_ball: bool = True) -> WcocRecords:
    if not (2 < space.a < space.b < math.inf):
        raise ValueError(f"the theta bound needs 2 < a < b < inf, got ({space.a}, {space.b})")
    return _wcoc(pairs, space, "thm31", check_ball)


def wcoc_bound_thm21(x: SimpleFunction, y: SimpleFunction, space: GLSpace) -> WcocCheck:
    """Check ``||x+y|| <= 2 - (a-1)/4 kappa(x-y)`` for x, y in the GLS unit ball."""
    return batch_wcoc_thm21(PairBatch.from_pairs([(x, y)]), space).check(0)


def wcoc_bound_thm31(x: SimpleFunction, y: SimpleFunction, space: GLSpace) -> WcocCheck:
    """Check ``||x+y|| <= 2 - theta(x-y)`` for x, y in the GLS unit ball."""
    return batch_wcoc_thm31(PairBatch.from_pairs([(x, y)]), space).check(0)


# --------------------------------------------------------------------------
# examples with a bounded generating function on a probability space


@dataclass(frozen=True)
class ExampleRecords:
    example: int
    d: float
    dist_a: np.ndarray
    bound: np.ndarray
    lhs: np.ndarray
    slack: np.ndarray

    def __len__(self):
        return self.slack.size


def psi_upper_bound(space: GLSpace) -> float:
    """max of psi over a closed probe grid; inf if psi blows up."""
    if math.isinf(space.b):
        return math.inf
    probes = np.linspace(space.a, space.b, POSITIVITY_PROBES)
    return float(np.exp(space.psi.log_psi(probes).max()))


def _example(pairs: PairBatch, space: GLSpace, d: float | None, example: int,
             check_ball: bool) -> ExampleRecords:
    a, b = space.a, space.b
    if example == 1 and not (1 < a < b <= 2):
        raise PreconditionError(f"example 1 needs 1 < a < b <= 2, got ({a}, {b})")
    if example == 2 and not (2 <= a < b < math.inf):
        raise PreconditionError(f"example 2 needs 2 <= a < b < inf, got ({a}, {b})")
    masses = np.array([math.fsum(w.tolist()) for w in pairs.weights])
    if np.any(np.abs(masses - 1.0) > 1e-9):
        raise PreconditionError("the examples need a unit-mass measure")
    if space.psi.is_extremal:
        raise PreconditionError("extremal psi is not bounded above")
    top = psi_upper_bound(space)
    if d is None:
        d = top
    if not math.isfinite(d) or top > d * (1 + 1e-12):
        raise PreconditionError(f"psi is not bounded by d={d!r} (max on probes {top!r})")
    _ball_norms(pairs, space, check_ball)
    lhs = batch_gls_norm(pairs.fsum, space).value
    dist_a = _lp(pairs.fdiff, a)
    if example == 1:
        bound = 2.0 - (a - 1.0) / 4.0 * dist_a**2 / d**2
    else:
        bound = 2.0 - dist_a**a / (b * 2.0**b * d**b)
    return ExampleRecords(example, float(d), dist_a, bound, lhs, bound - lhs)


def batch_example1(pairs, space, d=None, check_ball=True) -> ExampleRecords:
    return _example(pairs, space, d, 1, check_ball)


def batch_example2(pairs, space, d=None, check_ball=True) -> ExampleRecords:
    return _example(pairs, space, d, 2, check_ball)


def example1_check(x, y, space: GLSpace, d: float | None = None) -> float:
    """Slack of ``||x+y|| <= 2 - (a-1)/4 ||x-y||_a^2 / d^2``."""
    return float(batch_example1(PairBatch.from_pairs([(x, y)]), space, d).slack[0])


def example2_check(x, y, space: GLSpace, d: float | None = None) -> float:
    """Slack of ``||x+y|| <= 2 - ||x-y||_a^a / (b 2^b d^b)``, exactly as printed."""
    return float(batch_example2(PairBatch.from_pairs([(x, y)]), space, d).slack[0])


# --------------------------------------------------------------------------
# empirical modulus of convexity


def space_norm(space):
    """Batch norm function for an :class:`LpSpace` or :class:`GLSpace`."""
    if isinstance(space, LpSpace):
        return lambda batch: _lp(batch, space.p)
    if isinstance(space, GLSpace):
        return lambda batch: batch_gls_norm(batch, space).value
    raise TypeError(f"unsupported space {space!r}")


def _space_p(space) -> float:
    return space.p if isinstance(space, LpSpace) else math.nan


def empirical_moc(space, eps: float, strategy: str = "random", n_trials: int = 1000,
                  seed: int = 0, atoms_min: int = 2, atoms_max: int = 64,
                  max_rounds: int = 8) -> MocResult:
    """Upper estimate of the modulus of convexity at ``eps`` from explicit pairs.

    ``random`` samples pairs on the unit sphere; infeasible pairs are first
    reflected (y -> -y), then redrawn up to ``max_rounds`` times.
    ``two_atom_directed`` (L_p only) optimises over two-atom configurations.
    """
    eps = float(eps)
    if not 0 <= eps <= 2:
        raise ValueError(f"eps must lie in [0, 2], got {eps}")
    if strategy == "random":
        return _moc_random(space, eps, n_trials, seed, atoms_min, atoms_max, max_rounds)
    if strategy == "two_atom_directed":
        if not isinstance(space, LpSpace):
            raise ValueError("two_atom_directed is only defined for L_p")
        return _moc_two_atom(space.p, eps)
    raise ValueError(f"unknown strategy {strategy!r}")


def _moc_random(space, eps, n_trials, seed, atoms_min, atoms_max, max_rounds):
    norm = space_norm(space)
    feas_tol = 1e-12
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    # x and -x are a feasible pair for every eps <= 2 with value 1
    first = sample_ball_pairs([0], seed, norm, atoms_min, atoms_max, sphere=True)
    x0, _ = first.pair(0)
    if eps == 0:
        return MocResult(eps, _space_p(space), 0.0, "empirical_random",
                         diagnostics={"trials": n_trials, "feasible": 1, "rejections": 0,
                                      "infeasible": 0, "best_trial": 0},
                         witness=(x0, x0))
    best, witness, best_trial = 1.0, (x0, -x0), -1
    pending = np.arange(n_trials)
    feasible = rejections = 0
    for attempt in range(max_rounds):
        if pending.size == 0:
            break
        pairs = sample_ball_pairs(pending, seed, norm, atoms_min, atoms_max, sphere=True,
                                  attempt=attempt)
        dist, s = norm(pairs.fdiff), norm(pairs.fsum)
        direct = np.where(dist >= eps - feas_tol, 1.0 - s / 2.0, np.inf)
        reflected = np.where(s >= eps - feas_tol, 1.0 - dist / 2.0, np.inf)
        value = np.minimum(direct, reflected)
        ok = np.isfinite(value)
        feasible += int(ok.sum())
        rejections += int((~ok).sum())
        if np.any(ok):
            i = int(np.argmin(value))
            if value[i] < best:
                best = float(value[i])
                best_trial = int(pending[i])
                x, y = pairs.pair(i)
                witness = (x, y) if direct[i] <= reflected[i] else (x, -y)
        pending = pending[~ok]
    return MocResult(eps, _space_p(space), best, "empirical_random",
                     diagnostics={"trials": n_trials, "feasible": feasible,
                                  "rejections": rejections, "infeasible": int(pending.size),
                                  "best_trial": best_trial},
                     witness=witness)


def _split_pair(p, eps, w):
    """x = (alpha, beta), y = (alpha, -beta): x - y lives on the second atom."""
    part = MeasurePartition([w, 1.0 - w])
    h = (eps / 2.0) ** p
    beta = (eps / 2.0) / (1.0 - w) ** (1.0 / p)
    alpha = ((1.0 - h) / w) ** (1.0 / p)
    return SimpleFunction(part, [alpha, beta]), SimpleFunction(part, [alpha, -beta])


def _swap_pair(p, eps, w):
    """x = (s+t, s-t), y = (s-t, s+t) with the largest s keeping both in the ball."""
    part = MeasurePartition([w, 1.0 - w])
    t = eps / 2.0
    big, small = max(w, 1.0 - w), min(w, 1.0 - w)

    def worst_norm_p(s):
        return big * (s + t) ** p + small * abs(s - t) ** p

    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if worst_norm_p(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    s = lo
    return SimpleFunction(part, [s + t, s - t]), SimpleFunction(part, [s - t, s + t])


def _pair_value(x, y, p):
    return 1.0 - lp_norm(x + y, p) / 2.0


def _moc_two_atom(p, eps):
    p, eps = _validate(p, eps)
    exact = delta_lp_exact(p, eps).delta
    if eps == 0:
        part = MeasurePartition([1.0])
        one = SimpleFunction(part, [1.0])
        return MocResult(eps, p, 0.0, "empirical_two_atom",
                         diagnostics={"family": "equal", "weight": 1.0, "gap": -exact},
                         witness=(one, one))
    families = {"split": _split_pair, "swap": _swap_pair}
    best = None
    per_family = {}
    for name, build in families.items():
        def objective(ws, build=build):
            return np.array([_pair_value(*build(p, eps, w), p) for w in np.ravel(ws)])

        res = scalar_extremize(objective, (0.01, 0.99), "inf", grid_size=33)
        x, y = build(p, eps, res.arg_p)
        ok = (lp_norm(x, p) <= 1 + BALL_TOL and lp_norm(y, p) <= 1 + BALL_TOL
              and lp_norm(x - y, p) >= eps - 1e-12)
        value = _pair_value(x, y, p)
        per_family[name] = value
        if ok and (best is None or value < best[0]):
            best = (value, name, res.arg_p, (x, y), res.probes)
    if best is None:
        raise RuntimeError(f"no feasible two-atom pair for p={p}, eps={eps}")
    value, name, w, witness, probes = best
    return MocResult(eps, p, float(value), "empirical_two_atom", iterations=probes,
                     diagnostics={"family": name, "weight": w, "gap": value - exact,
                                  "exact": exact, **{f"value_{k}": v for k, v in per_family.items()}},
                     witness=witness)


def records_to_columns(records) -> dict[str, np.ndarray]:
    """Array fields of a records dataclass, in declaration order."""
    return {f.name: getattr(records, f.name) for f in fields(records)
            if isinstance(getattr(records, f.name), np.ndarray)}
