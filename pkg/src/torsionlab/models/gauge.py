"""Gauge transformations ``epsilon_B = exp(beta)`` and their action on torsion.

``beta`` is a parity-preserving operator (the finite stand-in for ``B ^ .``
with ``B`` even). The gauged complex is the conjugate ``eps d eps^-1`` with the
same bilinear form, and the determinant line is transported by the map that
``eps`` induces on cohomology.

With the form held fixed, ``tau(eps d eps^-1, eps h) = tau(d, h) exp(2 str beta)``
in finite dimensions, so exact gauge invariance needs ``str beta = 0``. Wedge
with a form of positive degree is nilpotent and traceless on each parity; the
simplicial vertex-mean generator and the constant torus generators are
supertrace-free as well. A generator with nonzero supertrace is rejected unless
``allow_anomaly`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..complex import GradedComplex, cohomology_basis
from ..exceptions import GaugeError, InvalidBasisError
from ..linalg import as_cmatrix, log_determinant, numerical_rank, relative_log_error
from ..torsion import CheckReport, ChiralityData, cappell_miller_torsion, torsion
from .torus import EVEN_FORMS, TorusModel, wedge_matrix


@dataclass(frozen=True, eq=False)
class FluxGauge:
    beta_even: np.ndarray
    beta_odd: np.ndarray
    allow_anomaly: bool = False
    tol: float = 1e-10

    def __post_init__(self):
        be = as_cmatrix(self.beta_even, "beta_even", square=True)
        bo = as_cmatrix(self.beta_odd, "beta_odd", square=True)
        object.__setattr__(self, "beta_even", be)
        object.__setattr__(self, "beta_odd", bo)
        ref = max(1.0, float(np.abs(be).max(initial=0)), float(np.abs(bo).max(initial=0)))
        if not self.allow_anomaly and abs(self.supertrace()) > self.tol * ref * max(1, be.shape[0] + bo.shape[0]):
            raise GaugeError(
                f"generator has supertrace {self.supertrace():.3e}; the fixed form would pick up exp(2 str beta)"
            )

    @classmethod
    def zero(cls, n_even, n_odd):
        return cls(np.zeros((n_even, n_even)), np.zeros((n_odd, n_odd)))

    def supertrace(self):
        return complex(np.trace(self.beta_even) - np.trace(self.beta_odd))

    def epsilon(self, v=1.0):
        """``(exp(v beta_even), exp(v beta_odd))``."""
        return scipy.linalg.expm(v * self.beta_even), scipy.linalg.expm(v * self.beta_odd)

    def epsilon_inverse(self, v=1.0):
        return self.epsilon(-v)

    def nilpotency_degree(self):
        """Smallest ``m`` with ``beta^m = 0`` on both parities, or ``None`` if not nilpotent."""
        n = max(self.beta_even.shape[0], self.beta_odd.shape[0])
        Pe, Po = np.eye(self.beta_even.shape[0]), np.eye(self.beta_odd.shape[0])
        for m in range(1, n + 2):
            Pe, Po = Pe @ self.beta_even, Po @ self.beta_odd
            if numerical_rank(Pe, 1e-12, 1.0) == 0 and numerical_rank(Po, 1e-12, 1.0) == 0:
                return m
        return None

    def scaled(self, v):
        return FluxGauge(v * self.beta_even, v * self.beta_odd, self.allow_anomaly, self.tol)


def intertwining_residual(K, K_target, gauge, v=1.0):
    """Relative size of ``eps d - d' eps`` in both parities."""
    Ee, Eo = gauge.epsilon(v)
    r1 = np.abs(Eo @ K.d_even - K_target.d_even @ Ee).max(initial=0)
    r2 = np.abs(Ee @ K.d_odd - K_target.d_odd @ Eo).max(initial=0)
    return float(max(r1, r2) / K.scale())


def induced_cohomology_map(K_target, eps, basis, basis_target):
    """Matrices ``M`` with ``[eps h] = [h'] M`` on both parities, modulo target coboundaries."""
    Ee, Eo = eps
    return (
        _class_coordinates(Ee @ basis[0], basis_target[0], K_target.d_odd),
        _class_coordinates(Eo @ basis[1], basis_target[1], K_target.d_even),
    )


def _class_coordinates(X, reps, coboundary_map):
    if reps.shape[1] == 0:
        return np.zeros((0, X.shape[1]), dtype=complex)
    cols = [reps] + ([coboundary_map] if coboundary_map is not None and coboundary_map.size else [])
    M = np.hstack(cols)
    C, *_ = np.linalg.lstsq(M, X, rcond=None)
    res = np.abs(M @ C - X).max(initial=0)
    if res > 1e-8 * max(1.0, np.abs(X).max(initial=0)):
        raise InvalidBasisError(f"transported classes are not spanned by the target basis (residual {res:.3e})")
    return C[: reps.shape[1]]


@dataclass(frozen=True, eq=False)
class GaugeResult:
    complex: GradedComplex
    transport_log: complex
    M_even: np.ndarray
    M_odd: np.ndarray
    basis_source: tuple
    basis_target: tuple
    intertwining_residual: float

    @property
    def transport(self):
        return complex(np.exp(self.transport_log))


def gauge_transform(K, b, gauge, K_target=None, basis=None, basis_target=None, tol=1e-12):
    """Transport ``K`` along ``eps``; returns the gauged complex and ``det eps`` on ``det H``.

    Without ``K_target`` the gauged complex is the conjugate ``eps d eps^-1``.
    A supplied target must be intertwined by ``eps`` to relative ``tol``.

    Raises
    ------
    GaugeError
        If ``eps`` does not intertwine the differentials.
    """
    Ee, Eo = gauge.epsilon()
    if Ee.shape[0] != K.n_even or Eo.shape[0] != K.n_odd:
        raise GaugeError(f"gauge of size {(Ee.shape[0], Eo.shape[0])} does not match complex {K.dims()}")
    if K_target is None:
        K_target = K.conjugate_by(Ee, Eo)
    res = intertwining_residual(K, K_target, gauge)
    if res > tol:
        raise GaugeError(f"eps_B does not intertwine the differentials (residual {res:.3e})")
    basis = cohomology_basis(K) if basis is None else basis
    basis_target = cohomology_basis(K_target) if basis_target is None else basis_target
    if basis[0].shape[1] != basis_target[0].shape[1] or basis[1].shape[1] != basis_target[1].shape[1]:
        raise GaugeError("source and target cohomology dimensions differ")
    Me, Mo = induced_cohomology_map(K_target, (Ee, Eo), basis, basis_target)
    tlog = log_determinant(Me) - log_determinant(Mo)
    return GaugeResult(K_target, tlog, Me, Mo, tuple(basis), tuple(basis_target), res)


def gauge_invariance_check(K, b, gauge, a=0.0, basis=None, tol=1e-9, cluster_tol=1e-8):
    """``tau(K', h') * transport^2 = tau(K, h) * exp(2 str beta)`` (the last factor is 1 for admissible gauges)."""
    g = gauge_transform(K, b, gauge, basis=basis)
    before = torsion(K, b, a, g.basis_source, cluster_tol)
    after = torsion(g.complex, b, a, g.basis_target, cluster_tol)
    anomaly = 2 * gauge.supertrace()
    err = relative_log_error(after.log_value + 2 * g.transport_log, before.log_value + anomaly)
    return CheckReport(
        "gauge_invariance",
        bool(err < tol),
        float(err),
        tol,
        {
            "tau": before.log_value,
            "tau_gauged": after.log_value,
            "transport_log": g.transport_log,
            "anomaly_log": anomaly,
            "intertwining_residual": g.intertwining_residual,
            "threshold": float(a),
        },
    )


def cm_gauge_check(K, Gamma, gauge, a=0.0, basis=None, tol=1e-9, cluster_tol=1e-8):
    """Flux law for the Cappell-Miller element: ``rho'(h') = rho(h) * transport^2``.

    The chirality operator is carried along, ``Gamma' = eps Gamma eps^-1``, so the
    pair stays an isomorphic copy and no supertrace condition is needed.
    """
    Ee, Eo = gauge.epsilon()
    Ei_e, Ei_o = gauge.epsilon_inverse()
    Gamma2 = ChiralityData(Eo @ Gamma.Gamma_even_to_odd @ Ei_e, Ee @ Gamma.Gamma_odd_to_even @ Ei_o)
    g = gauge_transform(K, None, gauge, basis=basis)
    before = cappell_miller_torsion(K, Gamma, a, g.basis_source, cluster_tol)
    after = cappell_miller_torsion(g.complex, Gamma2, a, g.basis_target, cluster_tol)
    err = relative_log_error(after.log_value - 2 * g.transport_log, before.log_value)
    return CheckReport(
        "cm_gauge",
        bool(err < tol),
        float(err),
        tol,
        {"rho": before.log_value, "rho_gauged": after.log_value, "transport_log": g.transport_log},
    )


def torus_constant_gauge(model: TorusModel, two_form=(0.0, 0.0, 0.0), scalar=0.0, pairs=None):
    """Generator ``scalar + B ^ .`` for a constant ``B = sum B_ij dx^ij``, on every pair block.

    ``two_form`` holds the coefficients of ``dx^12, dx^13, dx^23``. Constant even
    forms are closed and commute with the twisted differential, so the gauged
    complex coincides with the original.
    """
    r = model.rank
    W = scalar * np.eye(8) + sum(c * wedge_matrix(J) for c, J in zip(two_form, EVEN_FORMS[1:]))
    W = np.kron(W, np.eye(r))
    ne = 4 * r
    we, wo = W[:ne, :ne], W[ne:, ne:]
    if np.abs(W[ne:, :ne]).max() or np.abs(W[:ne, ne:]).max():
        raise GaugeError("generator does not preserve parity")
    out = []
    for p in pairs if pairs is not None else model.pairs():
        m = len(p)
        out.append(FluxGauge(np.kron(np.eye(m), we), np.kron(np.eye(m), wo)))
    return out


def simplicial_gauge(model, vertex_values):
    """Gauge generated by a 0-cochain acting by vertex-mean multiplication."""
    from .simplicial import vertex_mean_operator

    be, bo = vertex_mean_operator(model, vertex_values)
    return FluxGauge(be, bo)


def random_nilpotent_gauge(rng, K, spread=0.5):
    from .random import random_nilpotent

    return FluxGauge(random_nilpotent(rng, K.n_even, spread), random_nilpotent(rng, K.n_odd, spread))
