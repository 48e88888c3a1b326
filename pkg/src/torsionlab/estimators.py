"""scikit-learn style wrappers around the functional torsion API.

``fit`` takes the instance as its ``X`` argument and stores the results in
trailing-underscore attributes, so the objects work with ``get_params``,
``set_params`` and ``clone`` like any other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .complex import cohomology_basis, require_valid, spectral_window
from .linalg import DEFAULT_CLUSTER_TOL
from .torsion import cappell_miller_torsion, torsion


class SymmetricBilinearTorsion(BaseEstimator):
    """Symmetric bilinear torsion at a fixed spectral threshold.

    Parameters
    ----------
    threshold : float
        Spectral cut ``a``; the window holds root subspaces with ``|lambda| <= a``.
    cluster_tol : float
        Relative radius for merging eigenvalues into one root subspace.
    validate : bool
        Run :func:`require_valid` on the input before computing.

    Attributes
    ----------
    log_value_, value_ : complex
    components_ : dict
        Window factor and the two det' logs.
    window_dims_ : tuple
    basis_ : tuple
        Cohomology representatives the value refers to.
    """

    def __init__(self, threshold=0.0, cluster_tol=DEFAULT_CLUSTER_TOL, validate=True):
        self.threshold = threshold
        self.cluster_tol = cluster_tol
        self.validate = validate

    def fit(self, X, y=None, basis=None):
        K, b = X
        if self.validate:
            require_valid(K, b)
        basis = cohomology_basis(K) if basis is None else basis
        W = spectral_window(K, b, self.threshold, self.cluster_tol)
        tv = torsion(K, b, self.threshold, basis, self.cluster_tol, window=W)
        self.log_value_ = tv.log_value
        self.value_ = tv.value
        self.components_ = dict(tv.components)
        self.window_dims_ = W.window_dims()
        self.basis_ = tv.basis
        self.boundary_ambiguous_ = tv.boundary_ambiguous
        return self

    def transform_basis(self, G_even, G_odd):
        """Value for the basis ``basis_ G``: the form value scales by ``det(G_ev)^2 det(G_odd)^-2``."""
        self._check_fitted()
        return self.value_ * (np.linalg.det(G_even) / np.linalg.det(G_odd)) ** 2

    def _check_fitted(self):
        if not hasattr(self, "log_value_"):
            raise AttributeError(f"{type(self).__name__} is not fitted yet; call fit first")


class CappellMillerTorsion(BaseEstimator):
    """Cappell-Miller coefficient at a fixed threshold of the flat Laplacian.

    ``fit`` expects ``X = (K, Gamma)``.
    """

    def __init__(self, threshold=0.0, cluster_tol=DEFAULT_CLUSTER_TOL):
        self.threshold = threshold
        self.cluster_tol = cluster_tol

    def fit(self, X, y=None, basis=None):
        K, Gamma = X
        basis = cohomology_basis(K) if basis is None else basis
        cv = cappell_miller_torsion(K, Gamma, self.threshold, basis, self.cluster_tol)
        self.log_value_ = cv.log_value
        self.value_ = cv.value
        self.components_ = dict(cv.components)
        self.basis_ = cv.basis
        self.boundary_ambiguous_ = cv.boundary_ambiguous
        return self

    def transform_basis(self, G_even, G_odd):
        """Coefficient for the basis ``basis_ G``: scales by ``det(G_ev)^-2 det(G_odd)^2``."""
        if not hasattr(self, "log_value_"):
            raise AttributeError("CappellMillerTorsion is not fitted yet; call fit first")
        return self.value_ * (np.linalg.det(G_odd) / np.linalg.det(G_even)) ** 2
