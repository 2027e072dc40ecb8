"""Grand Lebesgue Space norm and the kappa / theta functionals.

All three are extrema over p of expressions in ``||u||_p`` and ``psi(p)``:

* GLS norm   ``sup_p ||f||_p / psi(p)``
* kappa      ``inf_p (||u||_p / psi(p))^2``
* theta      ``inf_p ||u||_p^p / (p 2^p psi(p)^p)``

They are evaluated in log space by the shared optimiser.  The ``batch_*``
functions take a :class:`~gls.measure.FunctionBatch`; the plain versions
wrap them for a single :class:`~gls.measure.SimpleFunction`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .measure import FunctionBatch, SimpleFunction
from .optimize import BatchOptResult, ScalarOptResult, batch_extremize
from .psi import PsiSpec

LOG2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class GLSpace:
    """The space G psi[a, b] plus the optimiser settings used to evaluate it."""

    psi: PsiSpec
    grid_size: int = 512
    iterations: int = 60
    p_max: float = 2.0**16

    def __post_init__(self):
        if self.grid_size < 3 or self.iterations < 1:
            raise ValueError("grid_size must be >= 3 and iterations >= 1")
        if math.isinf(self.psi.b) and not self.p_max > self.psi.a:
            raise ValueError("p_max must exceed a for an unbounded interval")

    @property
    def a(self) -> float:
        return self.psi.a

    @property
    def b(self) -> float:
        return self.psi.b

    def _extremize(self, objective, n, mode, tail=None):
        return batch_extremize(objective, n, self.psi.interval, mode, self.grid_size,
                               self.iterations, self.p_max, tail)


def _as_batch(u) -> FunctionBatch:
    if isinstance(u, FunctionBatch):
        return u
    if isinstance(u, SimpleFunction):
        return FunctionBatch.from_functions([u])
    return FunctionBatch.from_functions(u)


def _log_ratio(batch: FunctionBatch, space: GLSpace):
    psi = space.psi

    def objective(p):
        with np.errstate(invalid="ignore"):
            return batch.log_lp(p) - psi.log_psi(p)

    return objective


def _log_ratio_tail(batch: FunctionBatch, space: GLSpace):
    if not math.isinf(space.b):
        return None
    with np.errstate(invalid="ignore"):
        return batch.log_sup - space.psi.log_tail()


def _extremal(batch: FunctionBatch, space: GLSpace, value: np.ndarray, arg: float):
    n = len(batch)
    return BatchOptResult(value, np.full(n, arg), np.ones(n, dtype=bool), 1,
                          np.zeros(n, dtype=bool))


def batch_gls_norm(u, space: GLSpace) -> BatchOptResult:
    batch = _as_batch(u)
    if space.psi.is_extremal:
        r = space.psi.kind.r
        return _extremal(batch, space, np.exp(batch.log_lp(np.array([r]))[:, 0]), r)
    res = space._extremize(_log_ratio(batch, space), len(batch), "sup",
                           _log_ratio_tail(batch, space))
    return res.map_values(np.exp)


def batch_kappa(u, space: GLSpace) -> BatchOptResult:
    batch = _as_batch(u)
    if not (1 < space.a < space.b <= 2):
        warnings.warn(f"kappa is intended for 1 < a < b <= 2, got ({space.a}, {space.b})",
                      stacklevel=2)
    if space.psi.is_extremal:
        # psi = inf away from r, so the ratio vanishes there
        return _extremal(batch, space, np.zeros(len(batch)), space.a)
    ratio = _log_ratio(batch, space)
    tail = _log_ratio_tail(batch, space)
    res = space._extremize(lambda p: 2.0 * ratio(p), len(batch), "inf",
                           None if tail is None else 2.0 * tail)
    return res.map_values(np.exp)


def batch_theta(u, space: GLSpace) -> BatchOptResult:
    batch = _as_batch(u)
    if not (2 < space.a < space.b < math.inf):
        warnings.warn(f"theta is intended for 2 < a < b < inf, got ({space.a}, {space.b})",
                      stacklevel=2)
    if space.psi.is_extremal:
        return _extremal(batch, space, np.zeros(len(batch)), space.a)
    ratio = _log_ratio(batch, space)

    def objective(p):
        with np.errstate(invalid="ignore"):
            return p * (ratio(p) - LOG2) - np.log(p)

    tail = _log_ratio_tail(batch, space)
    if tail is not None:
        # (r/2)^p / p -> 0 unless r > 2, where it diverges
        tail = np.where(tail - LOG2 > 0, np.inf, -np.inf)
    res = space._extremize(objective, len(batch), "inf", tail)
    return res.map_values(np.exp)


def gls_norm(f: SimpleFunction, space: GLSpace) -> ScalarOptResult:
    """``sup_{p in (a,b)} ||f||_p / psi(p)`` with its maximising p."""
    return batch_gls_norm(f, space)[0]


def kappa(u: SimpleFunction, space: GLSpace) -> ScalarOptResult:
    return batch_kappa(u, space)[0]


def theta(u: SimpleFunction, space: GLSpace) -> ScalarOptResult:
    return batch_theta(u, space)[0]
