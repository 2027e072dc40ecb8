"""Seeded random simple functions and unit-ball pairs.

Trial ``i`` of a campaign with seed ``s`` draws from its own generator keyed
on ``(s, i)``, so any trial can be regenerated alone and results do not
depend on how trials are grouped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .measure import FunctionBatch, MeasurePartition, SimpleFunction

# degrees of freedom of the Student-t law used for atom values
VALUE_DF = 2.0


def trial_rng(seed: int, trial: int, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(trial, attempt)))


def draw_atoms(rng: np.random.Generator, atoms_min: int, atoms_max: int, count: int = 2):
    """Unit-mass weights plus ``count`` heavy-tailed value vectors."""
    if not 1 <= atoms_min <= atoms_max:
        raise ValueError(f"need 1 <= atoms_min <= atoms_max, got {atoms_min}, {atoms_max}")
    k = int(rng.integers(atoms_min, atoms_max + 1))
    w = rng.exponential(size=k)
    w /= w.sum()
    values = rng.standard_t(VALUE_DF, size=(count, k))
    return w, values


def random_function(seed: int, trial: int, atoms_min: int = 2, atoms_max: int = 64) -> SimpleFunction:
    w, values = draw_atoms(trial_rng(seed, trial), atoms_min, atoms_max, 1)
    return SimpleFunction(MeasurePartition(w), values[0])


@dataclass
class PairBatch:
    """Pairs (x_i, y_i) sharing a partition per trial."""

    weights: list[np.ndarray]
    x: list[np.ndarray]
    y: list[np.ndarray]
    norm_x: np.ndarray = field(default=None)
    norm_y: np.ndarray = field(default=None)

    def __len__(self) -> int:
        return len(self.weights)

    @cached_property
    def fx(self) -> FunctionBatch:
        return FunctionBatch(self.weights, self.x)

    @cached_property
    def fy(self) -> FunctionBatch:
        return FunctionBatch(self.weights, self.y)

    @cached_property
    def fsum(self) -> FunctionBatch:
        return FunctionBatch(self.weights, [a + b for a, b in zip(self.x, self.y)])

    @cached_property
    def fdiff(self) -> FunctionBatch:
        return FunctionBatch(self.weights, [a - b for a, b in zip(self.x, self.y)])

    def pair(self, i: int) -> tuple[SimpleFunction, SimpleFunction]:
        part = MeasurePartition(self.weights[i])
        return SimpleFunction(part, self.x[i]), SimpleFunction(part, self.y[i])

    def atoms(self) -> np.ndarray:
        return np.array([w.size for w in self.weights])

    @classmethod
    def from_pairs(cls, pairs) -> PairBatch:
        pairs = list(pairs)
        for x, y in pairs:
            x._check_compatible(y)
        return cls([x.weights for x, _ in pairs], [x.values for x, _ in pairs],
                   [y.values for _, y in pairs])


def sample_ball_pairs(
    trials,
    seed: int,
    norm: Callable[[FunctionBatch], np.ndarray],
    atoms_min: int = 2,
    atoms_max: int = 64,
    sphere: bool = False,
    degenerate: bool = False,
    attempt: int = 0,
) -> PairBatch:
    """Random pairs in the unit ball of the norm computed by ``norm``.

    ``trials`` is a count or an explicit sequence of trial indices.  Each raw
    function is rescaled to ``rho / norm(f)`` with ``rho`` uniform on [0, 1],
    or ``rho = 1`` when ``sphere`` is set.  ``degenerate`` forces ``y = x``.
    """
    if isinstance(trials, (int, np.integer)):
        trials = range(int(trials))
    weights, xs, ys, rhos = [], [], [], []
    for i in trials:
        rng = trial_rng(seed, int(i), attempt)
        w, values = draw_atoms(rng, atoms_min, atoms_max, 2)
        rho = np.ones(2) if sphere else rng.uniform(size=2)
        weights.append(w)
        xs.append(values[0])
        ys.append(values[0].copy() if degenerate else values[1])
        rhos.append(rho)
    if not weights:
        raise ValueError("no trials requested")
    rhos = np.array(rhos)
    if degenerate:
        rhos[:, 1] = rhos[:, 0]
    nx = norm(FunctionBatch(weights, xs))
    ny = nx if degenerate else norm(FunctionBatch(weights, ys))
    sx = np.where(nx > 0, rhos[:, 0] / np.where(nx > 0, nx, 1.0), 0.0)
    sy = np.where(ny > 0, rhos[:, 1] / np.where(ny > 0, ny, 1.0), 0.0)
    xs = [v * s for v, s in zip(xs, sx)]
    ys = [v * s for v, s in zip(ys, sy)]
    return PairBatch(weights, xs, ys, np.where(nx > 0, rhos[:, 0], 0.0),
                     np.where(ny > 0, rhos[:, 1], 0.0))
