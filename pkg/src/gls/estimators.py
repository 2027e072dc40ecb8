"""scikit-learn facade: rows of atom values in, GLS functionals out.

Each row of ``X`` is a simple function on one shared partition whose atom
masses are ``weights`` (uniform when omitted), so a pipeline can use GLS
norms as features::

    >>> import numpy as np
    >>> t = GLSNormTransformer(psi="const:c=1", a=1.0, b=2.0)
    >>> t.fit_transform(np.array([[2.0, 0.0]])).round(6)
    array([[1.414214]])
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .measure import FunctionBatch
from .norms import GLSpace, batch_gls_norm, batch_kappa, batch_theta
from .psi import parse_psi

_FUNCTIONALS = {"norm": batch_gls_norm, "kappa": batch_kappa, "theta": batch_theta}


class GLSNormTransformer(TransformerMixin, BaseEstimator):
    """Map each row to ``gls_norm``, ``kappa`` and/or ``theta`` of that row.

    ``functionals`` is a name or a sequence of names; the output has one
    column per name.  ``fit`` only validates and freezes the space.
    """

    def __init__(self, psi="const:c=1", a=1.0, b=2.0, weights=None, functionals="norm",
                 grid_size=512, iterations=60, p_max=2.0**16):
        self.psi = psi
        self.a = a
        self.b = b
        self.weights = weights
        self.functionals = functionals
        self.grid_size = grid_size
        self.iterations = iterations
        self.p_max = p_max

    def _names(self):
        names = [self.functionals] if isinstance(self.functionals, str) else list(self.functionals)
        bad = [n for n in names if n not in _FUNCTIONALS]
        if bad or not names:
            raise ValueError(f"functionals must be drawn from {sorted(_FUNCTIONALS)}, got {self.functionals!r}")
        return names

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=float)
        n_atoms = X.shape[1]
        if self.weights is None:
            w = np.full(n_atoms, 1.0 / n_atoms)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (n_atoms,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ValueError(f"weights must be {n_atoms} positive finite masses")
        self.functionals_ = self._names()
        self.space_ = GLSpace(parse_psi(self.psi, float(self.a), float(self.b)),
                              self.grid_size, self.iterations, self.p_max)
        self.weights_ = w
        return self

    def transform(self, X):
        check_is_fitted(self, "space_")
        X = validate_data(self, X, dtype=float, reset=False)
        batch = FunctionBatch([self.weights_] * X.shape[0], list(X))
        cols = [_FUNCTIONALS[name](batch, self.space_).value for name in self.functionals_]
        return np.column_stack(cols)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "space_")
        b = "inf" if math.isinf(self.space_.b) else f"{self.space_.b:g}"
        return np.array([f"{n}[{self.space_.a:g},{b}]" for n in self.functionals_], dtype=object)
