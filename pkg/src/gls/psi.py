"""Generating functions psi(p) on an exponent interval (a, b).

A :class:`PsiSpec` pairs an interval ``1 <= a < b <= inf`` with one of the
families below.  Evaluation happens in log space on the *closure* of the
interval: at an endpoint where psi blows up the log value is ``+inf``, which
turns the ratio ``||f||_p / psi(p)`` into its one-sided limit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .measure import FunctionBatch, SimpleFunction, read_function
from .optimize import ScalarOptResult, scalar_extremize

# probe points used to validate strict positivity of psi
POSITIVITY_PROBES = 1000
# upper end of the positivity probe grid when b = inf
PROBE_P_MAX = 2.0**16


@dataclass(frozen=True)
class PowerRoot:
    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"power_root needs m > 0, got {self.m}")

    def log_psi(self, p, a, b):
        return np.log(p) / self.m

    def log_tail(self):
        return math.inf

    def spec_string(self):
        return f"power_root:m={self.m!r}"


@dataclass(frozen=True)
class EndpointSingular:
    """``(p - a)^-beta1 * (b - p)^-beta2``."""

    beta1: float
    beta2: float

    def __post_init__(self):
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("endpoint family needs beta1, beta2 >= 0")

    def log_psi(self, p, a, b):
        out = np.zeros_like(p)
        with np.errstate(divide="ignore"):
            if self.beta1 > 0:
                out = out - self.beta1 * np.log(np.maximum(p - a, 0.0))
            if self.beta2 > 0:
                out = out - self.beta2 * np.log(np.maximum(b - p, 0.0))
        return out

    def log_tail(self):
        raise ValueError("endpoint family is defined for finite b only")

    def spec_string(self):
        return f"endpoint:beta1={self.beta1!r},beta2={self.beta2!r}"


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"const needs a finite c > 0, got {self.c}")

    def log_psi(self, p, a, b):
        return np.full_like(p, math.log(self.c))

    def log_tail(self):
        return math.log(self.c)

    def spec_string(self):
        return f"const:c={self.c!r}"


@dataclass(frozen=True)
class Extremal:
    """psi = 1 at p = r and +inf elsewhere; the GLS is then L_r itself."""

    r: float

    def __post_init__(self):
        if not (1 <= self.r < math.inf):
            raise ValueError(f"extremal needs finite r >= 1, got {self.r}")

    def log_psi(self, p, a, b):
        return np.where(p == self.r, 0.0, np.inf)

    def log_tail(self):
        return math.inf

    def spec_string(self):
        return f"extremal:r={self.r!r}"


@dataclass(frozen=True, eq=False)
class Natural:
    """psi(p) = ||f||_p, under which f has GLS norm exactly 1."""

    f: SimpleFunction
    source: str | None = None

    def __post_init__(self):
        if self.f.is_zero():
            raise ValueError("natural psi of the zero function is not strictly positive")
        object.__setattr__(self, "_batch", FunctionBatch.from_functions([self.f]))

    def log_psi(self, p, a, b):
        flat = np.asarray(p, dtype=float).reshape(-1)
        return self._batch.log_lp(flat)[0].reshape(np.shape(p))

    def log_tail(self):
        return float(self._batch.log_sup[0])

    def spec_string(self):
        return f"natural:file={self.source}" if self.source else "natural:<inline>"


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear interpolation of log psi; flat beyond the last point."""

    ps: np.ndarray
    values: np.ndarray
    source: str | None = None

    def __post_init__(self):
        ps = np.asarray(self.ps, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if ps.ndim != 1 or ps.size < 2 or ps.size != vals.size:
            raise ValueError("a psi table needs at least two (p, psi) rows")
        if np.any(np.diff(ps) <= 0):
            raise ValueError("psi table p column must be strictly increasing")
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise ValueError("psi table values must be finite and positive")
        object.__setattr__(self, "ps", ps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_logv", np.log(vals))

    def log_psi(self, p, a, b):
        return np.interp(p, self.ps, self._logv)

    def log_tail(self):
        return float(self._logv[-1])

    def spec_string(self):
        return f"table:file={self.source}" if self.source else "table:<inline>"


PsiKind = Union[PowerRoot, EndpointSingular, Constant, Extremal, Natural, Tabulated]


@dataclass(frozen=True, eq=False)
class PsiSpec:
    a: float
    b: float
    kind: PsiKind

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (1 <= a < b) or math.isnan(b):
            raise ValueError(f"need 1 <= a < b <= inf, got a={a}, b={b}")
        kind = self.kind
        if isinstance(kind, EndpointSingular) and math.isinf(b):
            raise ValueError("endpoint family needs a finite b")
        if isinstance(kind, Extremal) and not (a <= kind.r <= b):
            raise ValueError(f"extremal r={kind.r} lies outside [{a}, {b}]")
        if isinstance(kind, Tabulated):
            if a < kind.ps[0] or (math.isfinite(b) and b > kind.ps[-1]):
                raise ValueError("psi table does not cover the interval")
        if not isinstance(kind, Extremal):
            self._check_positive()

    @property
    def interval(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def is_extremal(self) -> bool:
        return isinstance(self.kind, Extremal)

    def _check_positive(self):
        # heuristic: strict positivity on a dense interior probe grid
        if math.isinf(self.b):
            probes = np.geomspace(self.a, PROBE_P_MAX, POSITIVITY_PROBES + 2)[1:]
        else:
            probes = np.linspace(self.a, self.b, POSITIVITY_PROBES + 2)[1:-1]
        lv = self.log_psi(probes)
        if not np.all(np.isfinite(lv)):
            raise ValueError(f"psi is not finite and positive on the interior of "
                             f"({self.a}, {self.b}): {self.spec_string()}")

    def log_psi(self, p) -> np.ndarray:
        """log psi on the closed interval, +inf where psi diverges."""
        p = np.asarray(p, dtype=float)
        return self.kind.log_psi(p, self.a, self.b)

    def log_tail(self) -> float:
        """log of lim psi(p) as p -> inf."""
        return self.kind.log_tail()

    def spec_string(self) -> str:
        return self.kind.spec_string()

    def with_interval(self, a: float, b: float) -> PsiSpec:
        return PsiSpec(a, b, self.kind)


def psi_eval(spec: PsiSpec, p: float) -> float:
    """psi(p) for p strictly inside (a, b); ``inf`` only for the extremal kind."""
    p = float(p)
    if not spec.a < p < spec.b:
        raise ValueError(f"p={p} is outside the open interval ({spec.a}, {spec.b})")
    return float(np.exp(spec.log_psi(np.array([p]))[0]))


def natural_psi(f: SimpleFunction, a: float, b: float) -> PsiSpec:
    return PsiSpec(a, b, Natural(f))


# --------------------------------------------------------------------------
# CLI grammar:  power_root:m=2  endpoint:beta1=1,beta2=0.5  const:c=1
#               extremal:r=3  natural:file=<path>  table:file=<path>


def read_psi_table(path) -> Tabulated:
    rows = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<p> <psi>', got {raw!r}")
        rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError(f"{path}: empty psi table")
    ps, vals = zip(*rows)
    return Tabulated(np.array(ps), np.array(vals), source=str(path))


def _parse_params(text: str) -> dict[str, str]:
    params = {}
    if not text:
        return params
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"malformed psi parameter {item!r}")
        params[key.strip()] = val.strip()
    return params


def parse_psi_kind(text: str) -> PsiKind:
    name, _, rest = text.strip().partition(":")
    params = _parse_params(rest)

    def num(key, default=None):
        if key not in params:
            if default is None:
                raise ValueError(f"psi spec {text!r} is missing '{key}='")
            return default
        return float(params.pop(key))

    if name == "power_root":
        kind = PowerRoot(num("m"))
    elif name == "endpoint":
        kind = EndpointSingular(num("beta1", 0.0), num("beta2", 0.0))
    elif name == "const":
        kind = Constant(num("c", 1.0))
    elif name == "extremal":
        kind = Extremal(num("r"))
    elif name == "natural":
        path = params.pop("file", None)
        if path is None:
            raise ValueError("natural psi needs file=<path>")
        kind = Natural(read_function(path), source=path)
    elif name == "table":
        path = params.pop("file", None)
        if path is None:
            raise ValueError("table psi needs file=<path>")
        kind = read_psi_table(path)
    else:
        raise ValueError(f"unknown psi family {name!r}")
    if params:
        raise ValueError(f"unexpected psi parameters {sorted(params)} in {text!r}")
    return kind


def parse_psi(text: str, a: float, b: float) -> PsiSpec:
    return PsiSpec(a, b, parse_psi_kind(text))


# --------------------------------------------------------------------------


def btheta_norm(f: SimpleFunction, b: float, theta: float,
                grid_size: int = 512, iterations: int = 60) -> ScalarOptResult:
    """``sup_{0 < e <= b-1} e^(theta/(b-e)) ||f||_{b-e}``.

    The optimiser runs over e with a grid clustered near 0, where the sup
    usually sits; ``arg_p`` of the result is the maximising e.
    """
    b, theta = float(b), float(theta)
    if not (b > 1 and math.isfinite(b)):
        raise ValueError(f"btheta norm needs finite b > 1, got {b}")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if f.is_zero():
        return ScalarOptResult(0.0, b - 1.0, True, 0)
    batch = FunctionBatch.from_functions([f])

    def log_obj(eps):
        p = b - eps
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = np.where(eps > 0, theta / p * np.log(eps), 0.0 if theta == 0 else -np.inf)
        return batch.log_lp(p)[0] + weight

    res = scalar_extremize(log_obj, (0.0, b - 1.0), "sup", grid_size, iterations,
                           spacing="log")
    return ScalarOptResult(math.exp(res.value), res.arg_p, res.converged, res.probes)


def btheta_matched_psi(b: float, theta: float) -> PsiSpec:
    """Endpoint generating function on (1, b) paired with ``btheta_norm``."""
    return PsiSpec(1.0, b, EndpointSingular(0.0, theta / b))
