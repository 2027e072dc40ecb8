"""Independent reference computations used by the tests.

Nothing here calls the package's optimiser or batch kernels: L_p norms come
from a log-sum-exp over atoms, psi from direct formulas, extrema from dense
grids, and the convexity modulus from high-precision bisection.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import logsumexp

from gls.measure import SimpleFunction
from gls.psi import Constant, EndpointSingular, Extremal, Natural, PowerRoot, PsiSpec, Tabulated

BRUTE_POINTS = 100_000


def log_lp_grid(w, v, ps) -> np.ndarray:
    """log ||f||_p for each p in ``ps`` by log-sum-exp; -inf for f = 0."""
    w = np.asarray(w, dtype=float)
    a = np.abs(np.asarray(v, dtype=float))
    ps = np.asarray(ps, dtype=float)
    nz = a > 0
    if not np.any(nz):
        return np.full(ps.shape, -np.inf)
    terms = np.log(w[nz])[None, :] + ps[:, None] * np.log(a[nz])[None, :]
    return logsumexp(terms, axis=1) / ps


def log_psi_direct(kind, a, b, ps) -> np.ndarray:
    ps = np.asarray(ps, dtype=float)
    if isinstance(kind, PowerRoot):
        return np.log(ps) / kind.m
    if isinstance(kind, Constant):
        return np.full(ps.shape, math.log(kind.c))
    if isinstance(kind, EndpointSingular):
        with np.errstate(divide="ignore"):
            out = np.zeros(ps.shape)
            if kind.beta1:
                out -= kind.beta1 * np.log(ps - a)
            if kind.beta2:
                out -= kind.beta2 * np.log(b - ps)
        return out
    if isinstance(kind, Natural):
        return log_lp_grid(kind.f.weights, kind.f.values, ps)
    if isinstance(kind, Tabulated):
        return np.interp(ps, kind.ps, np.log(kind.values))
    raise TypeError(kind)


def brute_grid(a, b, n=BRUTE_POINTS, p_max=2.0**16):
    if math.isinf(b):
        return np.geomspace(a, p_max, n)
    return np.linspace(a, b, n)


def brute_functional(name, w, v, spec, n=BRUTE_POINTS, p_max=2.0**16) -> float:
    """Dense-grid value of the norm / kappa / theta, plus any table knots."""
    a, b = spec.a, spec.b
    if isinstance(spec.kind, Extremal):
        r = spec.kind.r
        return float(np.exp(log_lp_grid(w, v, [r])[0])) if name == "norm" else 0.0
    ps = brute_grid(a, b, n, p_max)
    if isinstance(spec.kind, Tabulated):
        # log psi has kinks at the knots; extrema can sit exactly on one
        ps = np.union1d(ps, spec.kind.ps[(spec.kind.ps >= a) & (spec.kind.ps <= b)])
    with np.errstate(invalid="ignore"):
        lr = log_lp_grid(w, v, ps) - log_psi_direct(spec.kind, a, b, ps)
    lr = np.where(np.isnan(lr), -np.inf, lr)
    if name == "norm":
        return float(np.exp(lr.max()))
    if name == "kappa":
        return float(np.exp(2 * lr.min()))
    if name == "theta":
        obj = ps * (lr - math.log(2.0)) - np.log(ps)
        return float(np.exp(obj.min()))
    raise ValueError(name)


def delta_root_oracle(p: float, eps: float) -> float:
    """Modulus of L_p at eps by 60-digit bisection on the defining equation."""
    if eps == 0:
        return 0.0
    with mpmath.workdps(60):
        pm, t = mpmath.mpf(p), mpmath.mpf(eps) / 2
        if p > 2:
            return float(1 - (1 - t**pm) ** (1 / pm))

        def h(d):
            return (1 - d + t) ** pm + abs(1 - d - t) ** pm - 2

        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        for _ in range(200):
            mid = (lo + hi) / 2
            if h(mid) > 0:
                lo = mid
            else:
                hi = mid
        return float(lo)


def random_atoms(rng, kmin=1, kmax=16):
    k = int(rng.integers(kmin, kmax + 1))
    w = rng.exponential(size=k)
    w /= w.sum()
    v = rng.standard_t(3.0, size=k)
    return w, v


FAMILIES = ("constant", "power_root", "endpoint", "natural", "tabulated", "extremal")


def random_interval(rng, functional):
    if functional == "kappa":
        a = rng.uniform(1.05, 1.6)
        return a, rng.uniform(a + 0.1, 2.0)
    if functional == "theta":
        a = rng.uniform(2.1, 4.0)
        return a, a + rng.uniform(0.5, 6.0)
    a = rng.uniform(1.0, 3.0)
    return a, a + rng.uniform(0.3, 4.0)


def random_psi(rng, family, functional="norm"):
    """A PsiSpec of the given family on an interval suited to ``functional``."""
    a, b = random_interval(rng, functional)
    if family == "constant":
        kind = Constant(float(np.exp(rng.uniform(-1, 1))))
    elif family == "power_root":
        kind = PowerRoot(float(rng.uniform(0.5, 4.0)))
    elif family == "endpoint":
        kind = EndpointSingular(float(rng.uniform(0, 1.5)), float(rng.uniform(0, 1.5)))
    elif family == "natural":
        w, v = random_atoms(rng, 1, 8)
        if not np.any(v):
            v[0] = 1.0
        kind = Natural(SimpleFunction.from_pairs(zip(w, v)))
    elif family == "tabulated":
        ps = np.linspace(a, b, 6)
        kind = Tabulated(ps, np.exp(rng.normal(0, 0.5, 6)))
    elif family == "extremal":
        kind = Extremal(float(rng.uniform(a, b)))
    else:
        raise ValueError(family)
    return PsiSpec(a, b, kind)
