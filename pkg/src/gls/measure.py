"""Simple functions on finite weighted partitions and their L_p quantities.

A :class:`SimpleFunction` is a step function on a partition of a measure
space into finitely many atoms Z_1..Z_k with masses w_i = mu(Z_i).  Every
L_p norm of such a function is the finite sum ``(sum_i w_i |v_i|^p)^(1/p)``.

:class:`FunctionBatch` packs many simple functions into flat arrays so the
p-optimizers can evaluate log-norms for thousands of functions at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

# atom-by-probe elements per chunk in FunctionBatch.log_lp
_CHUNK_ELEMS = 1 << 20


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must contain at least one atom")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeasurePartition:
    """Finite partition with positive atom masses."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights, "weights")
        if np.any(w <= 0):
            raise ValueError("all atom weights must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_total", math.fsum(w.tolist()))

    @property
    def total_mass(self) -> float:
        return self._total

    def __len__(self) -> int:
        return self.weights.size

    def same_as(self, other: MeasurePartition) -> bool:
        return self is other or np.array_equal(self.weights, other.weights)

    @classmethod
    def uniform(cls, n: int, total_mass: float = 1.0) -> MeasurePartition:
        return cls(np.full(n, total_mass / n))


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """Real step function taking ``values[i]`` on atom ``i`` of ``partition``."""

    partition: MeasurePartition
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values, "values")
        if v.size != len(self.partition):
            raise ValueError(
                f"got {v.size} values for a partition with {len(self.partition)} atoms"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> SimpleFunction:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("a simple function needs at least one atom")
        w, v = zip(*pairs)
        return cls(MeasurePartition(w), v)

    @property
    def weights(self) -> np.ndarray:
        return self.partition.weights

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.weights.tolist(), self.values.tolist()))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def _check_compatible(self, other: SimpleFunction) -> None:
        if not self.partition.same_as(other.partition):
            raise ValueError("simple functions live on different partitions")

    def __add__(self, other: SimpleFunction) -> SimpleFunction:
        self._check_compatible(other)
        return SimpleFunction(self.partition, self.values + other.values)

    def __sub__(self, other: SimpleFunction) -> SimpleFunction:
        self._check_compatible(other)
        return SimpleFunction(self.partition, self.values - other.values)

    def __neg__(self) -> SimpleFunction:
        return SimpleFunction(self.partition, -self.values)

    def __mul__(self, c: float) -> SimpleFunction:
        return SimpleFunction(self.partition, float(c) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> SimpleFunction:
        return SimpleFunction(self.partition, self.values / float(c))

    def __repr__(self) -> str:
        return f"SimpleFunction(atoms={len(self.partition)}, mass={self.partition.total_mass:g})"


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise ValueError(f"p must be a finite real >= 1, got {p}")
    return p


def lp_norm(f: SimpleFunction, p: float) -> float:
    """``(sum_i w_i |v_i|^p)^(1/p)``, scaled by max|v| and summed with fsum."""
    p = _check_p(p)
    a = np.abs(f.values)
    top = float(a.max())
    if top == 0.0:
        return 0.0
    r = a / top
    powers = np.zeros_like(r)
    nz = r > 0
    powers[nz] = np.exp(p * np.log(r[nz]))
    s = math.fsum((f.weights * powers).tolist())
    return top * s ** (1.0 / p)


def ess_sup(f: SimpleFunction) -> float:
    return float(np.abs(f.values).max())


class LyapunovCheck(NamedTuple):
    holds: bool
    first_violation: tuple[float, float] | None


def lyapunov_monotone(
    f: SimpleFunction, p_grid: Sequence[float], slack: float = 1e-12
) -> LyapunovCheck:
    """Check that ``p -> ||f||_p`` is nondecreasing along ``p_grid``.

    Only meaningful on a probability measure; any other total mass raises.
    """
    if abs(f.partition.total_mass - 1.0) > 1e-9:
        raise ValueError(
            f"Lyapunov monotonicity needs unit total mass, got {f.partition.total_mass!r}"
        )
    grid = sorted(float(p) for p in p_grid)
    if not grid:
        raise ValueError("p_grid is empty")
    norms = [lp_norm(f, p) for p in grid]
    for (p0, n0), (p1, n1) in zip(zip(grid, norms), zip(grid[1:], norms[1:])):
        if n1 < n0 - slack:
            return LyapunovCheck(False, (p0, p1))
    return LyapunovCheck(True, None)


# --------------------------------------------------------------------------
# function file format: one "<weight> <value>" per line, '#' starts a comment


def parse_function(text: str) -> SimpleFunction:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<weight> <value>', got {raw!r}")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: not a decimal number: {raw!r}") from None
    return SimpleFunction.from_pairs(pairs)


def read_function(path) -> SimpleFunction:
    return parse_function(Path(path).read_text(encoding="utf-8"))


def format_function(f: SimpleFunction, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(f"{w!r} {v!r}" for w, v in f.pairs())
    return "\n".join(lines) + "\n"


def write_function(f: SimpleFunction, path, comment: str | None = None) -> None:
    Path(path).write_text(format_function(f, comment), encoding="utf-8")


# --------------------------------------------------------------------------


class FunctionBatch:
    """Many simple functions in flat arrays, for vectorised log-norms.

    Atoms of function ``i`` occupy ``offsets[i]:offsets[i+1]``.  Values are
    kept as ``log|v| - log max|v|`` so ``exp`` never overflows, whatever p.
    Per-function sums ``sum_i w_i exp(p log|v_i|)`` are a sparse product with
    the (functions x atoms) weight matrix.
    """

    def __init__(self, weights: Sequence[np.ndarray], values: Sequence[np.ndarray]):
        if len(weights) != len(values):
            raise ValueError("weights and values must have the same length")
        if not weights:
            raise ValueError("empty batch")
        sizes = np.array([len(w) for w in weights])
        if np.any(sizes == 0) or any(len(w) != len(v) for w, v in zip(weights, values)):
            raise ValueError("every function needs matching, nonempty weights and values")
        w = np.concatenate([np.asarray(x, dtype=float) for x in weights])
        v = np.abs(np.concatenate([np.asarray(x, dtype=float) for x in values]))
        if np.any(w <= 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(v)):
            raise ValueError("weights must be positive and values finite")
        self.n = len(sizes)
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.seg = np.repeat(np.arange(self.n), sizes)
        self.weights = w
        top = np.maximum.reduceat(v, self.offsets[:-1])
        self.is_zero = top == 0
        with np.errstate(divide="ignore"):
            self.log_sup = np.log(top)
            safe_top = np.where(self.is_zero, 1.0, top)
            self.logv_rel = np.log(v / safe_top[self.seg])
        self.logv_rel[self.is_zero[self.seg]] = 0.0
        self._w = sparse.csr_matrix((w, np.arange(w.size), self.offsets),
                                    shape=(self.n, w.size))

    @classmethod
    def from_functions(cls, functions: Iterable[SimpleFunction]) -> FunctionBatch:
        fs = list(functions)
        return cls([f.weights for f in fs], [f.values for f in fs])

    def __len__(self) -> int:
        return self.n

    def log_lp(self, p: np.ndarray) -> np.ndarray:
        """``log ||f_i||_p`` for every function.

        ``p`` is either a 1-d grid shared by all functions, giving shape
        ``(n, m)``, or an ``(n, m)`` array of per-function exponents.
        """
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            sums = self._shared_sums(p)
            pc = p[None, :]
        else:
            e = self.logv_rel[:, None] * p[self.seg]
            np.exp(e, out=e)
            sums = self._w @ e
            pc = p
        with np.errstate(divide="ignore"):
            out = np.log(sums) / pc
        out += self.log_sup[:, None]
        out[self.is_zero] = -np.inf
        return out

    def _shared_sums(self, p: np.ndarray) -> np.ndarray:
        m = p.size
        out = np.empty((self.n, m))
        target = max(1, _CHUNK_ELEMS // max(m, 1))
        i0 = 0
        while i0 < self.n:
            i1 = int(np.searchsorted(self.offsets, self.offsets[i0] + target, side="right")) - 1
            i1 = min(max(i1, i0 + 1), self.n)
            a0, a1 = self.offsets[i0], self.offsets[i1]
            e = np.multiply(self.logv_rel[a0:a1, None], p[None, :])
            np.exp(e, out=e)
            w = sparse.csr_matrix((self.weights[a0:a1], np.arange(a1 - a0),
                                   self.offsets[i0:i1 + 1] - a0), shape=(i1 - i0, a1 - a0))
            out[i0:i1] = w @ e
            i0 = i1
        return out
