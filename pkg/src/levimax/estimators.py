"""scikit-learn style wrappers.

Inputs are arrays of complex points, one row per point, so the usual
``check_array`` (which rejects complex dtypes) is replaced by a small
validator here.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .conditions import TAU_SIGN, VerdictKind, necessary_min_A
from .expr import DefiningFunction, eval_jet2, parse_defining_function
from .levi import project_to_boundary, spectrum_at


def check_points(X, n: int | None = None) -> np.ndarray:
    """2-D finite complex array; ``n`` pins the number of columns."""
    z = np.asarray(X)
    if z.dtype == object:
        raise ValueError("points must be numeric")
    z = z.astype(complex)
    if z.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {z.shape}")
    if z.shape[0] == 0:
        raise ValueError("need at least one point")
    if n is not None and z.shape[1] != n:
        raise ValueError(f"points have {z.shape[1]} coordinates, expected {n}")
    if not np.all(np.isfinite(z)):
        raise ValueError("points must be finite")
    return z


def _function(source: str | DefiningFunction, params) -> DefiningFunction:
    f = source if isinstance(source, DefiningFunction) else parse_defining_function(source)
    return f.with_params(**params) if params else f


class LeviSpectrumTransformer(TransformerMixin, BaseEstimator):
    """Map points to the Levi eigenvalues at their boundary projections.

    Stateless apart from the parsed defining function; ``fit`` only records
    the dimension.
    """

    def __init__(self, source: str = "", params: dict | None = None, project: bool = True):
        self.source = source
        self.params = params
        self.project = project

    def fit(self, X, y=None):
        self.function_ = _function(self.source, self.params)
        check_points(X, self.function_.n)
        self.n_features_in_ = self.function_.n
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "function_"):
            raise NotFittedError("call fit before transform")
        z = check_points(X, self.n_features_in_)
        out = np.empty((z.shape[0], self.n_features_in_ - 1))
        for i, p in enumerate(z):
            bp = project_to_boundary(self.function_, p) if self.project else None
            jet = bp.jet if bp is not None else eval_jet2(self.function_, p)
            out[i] = spectrum_at(jet)[2].eigenvalues
        return out


class NecessaryConstantEstimator(BaseEstimator):
    """Estimate the smallest admissible A over a sample of Levi spectra.

    ``fit`` takes an array of sorted spectra (one row per boundary point) and
    stores the sample supremum of the pointwise minimal A. Points where the
    condition cannot hold for any A make the estimate infinite.
    """

    def __init__(self, q: int = 1, tau_sign: float = TAU_SIGN):
        self.q = q
        self.tau_sign = tau_sign

    def _pointwise(self, lam: np.ndarray) -> np.ndarray:
        out = np.empty(lam.shape[0])
        for i, row in enumerate(lam):
            v = necessary_min_A(row, self.q, self.tau_sign)
            if v.kind is VerdictKind.HOLDS:
                out[i] = v.value
            elif v.kind is VerdictKind.TRIVIAL:
                out[i] = 1.0  # no constraint at a vanishing Levi form
            else:
                out[i] = np.inf
        return out

    def fit(self, X, y=None):
        lam = np.asarray(X, dtype=float)
        if lam.ndim != 2 or lam.shape[0] == 0:
            raise ValueError("expected a non-empty 2-D array of spectra")
        if not 1 <= self.q <= lam.shape[1]:
            raise ValueError(f"q must lie in [1, {lam.shape[1]}]")
        self.n_features_in_ = lam.shape[1]
        a = self._pointwise(lam)
        self.pointwise_ = a
        self.A_min_ = float(np.max(a))
        return self

    def predict(self, X) -> np.ndarray:
        """Pointwise minimal A for each spectrum."""
        if not hasattr(self, "A_min_"):
            raise NotFittedError("call fit before predict")
        lam = np.asarray(X, dtype=float)
        if lam.ndim != 2 or lam.shape[1] != self.n_features_in_:
            raise ValueError(f"expected spectra with {self.n_features_in_} entries")
        return self._pointwise(lam)

    def score(self, X, y=None) -> float:
        """Fraction of spectra whose minimal A is within the fitted estimate."""
        return float(np.mean(self.predict(X) <= self.A_min_ * (1.0 + 1e-12)))
