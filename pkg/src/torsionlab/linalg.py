"""Dense complex-matrix primitives.

Determinants (also in log form, so products over hundreds of eigenvalues do
not overflow), numerical kernels and images, root-subspace decompositions of
non-normal matrices, and a characteristic-polynomial route to the product of
the nonzero spectrum that never looks at an eigenvector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .exceptions import AmbiguousZeroWarning, ConvergenceError, DimensionError

DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_ZERO_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-10


def as_cmatrix(M, name="matrix", square=False):
    """Return ``M`` as a finite 2-D complex128 array.

    Raises
    ------
    DimensionError
        If ``M`` is not 2-D, or not square when ``square`` is set.
    ValueError
        If ``M`` holds NaN or Inf entries.
    """
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def determinant(M):
    """Determinant by LU with partial pivoting; the empty matrix has determinant 1."""
    A = as_cmatrix(M, square=True)
    if A.shape[0] == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(A))


def log_determinant(M):
    """Complex logarithm ``log|det M| + i arg det M`` (``-inf`` for singular M)."""
    A = as_cmatrix(M, square=True)
    if A.shape[0] == 0:
        return 0j
    sign, logabs = np.linalg.slogdet(A)
    if sign == 0:
        return complex(-np.inf, 0.0)
    return complex(logabs, np.angle(sign))


def relative_log_error(log_x, log_y):
    """``|x/y - 1|`` computed from logarithms; 2*pi ambiguities cancel in exp."""
    return abs(np.expm1(complex(log_x) - complex(log_y)))


def _svd_scale(s, scale=None):
    if scale is not None:
        return scale
    return s[0] if s.size and s[0] > 0 else 1.0


def kernel_basis(M, tol=DEFAULT_RANK_TOL, scale=None):
    """Orthonormal basis of the numerical null space of ``M``.

    A right singular vector belongs to the kernel when its singular value is at
    most ``tol`` times ``scale`` (the largest singular value by default). The
    zero matrix has the whole space as kernel.
    """
    A = as_cmatrix(M)
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if m == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    if s[0] == 0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > tol * _svd_scale(s, scale)))
    return vh[rank:].conj().T


def image_basis(M, tol=DEFAULT_RANK_TOL, scale=None):
    """Orthonormal basis of the numerical column space of ``M``."""
    A = as_cmatrix(M)
    m, n = A.shape
    if m == 0 or n == 0:
        return np.zeros((m, 0), dtype=complex)
    u, s, _ = np.linalg.svd(A)
    if s[0] == 0:
        return np.zeros((m, 0), dtype=complex)
    rank = int(np.sum(s > tol * _svd_scale(s, scale)))
    return u[:, :rank]


def coimage_basis(M, tol=DEFAULT_RANK_TOL, scale=None):
    """Orthonormal complement of the kernel: columns ``x`` with ``M x`` a basis of im M."""
    A = as_cmatrix(M)
    m, n = A.shape
    if m == 0 or n == 0:
        return np.zeros((n, 0), dtype=complex)
    _, s, vh = np.linalg.svd(A)
    if s[0] == 0:
        return np.zeros((n, 0), dtype=complex)
    rank = int(np.sum(s > tol * _svd_scale(s, scale)))
    return vh[:rank].conj().T


def numerical_rank(M, tol=DEFAULT_RANK_TOL, scale=None):
    A = as_cmatrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * _svd_scale(s, scale)))


@dataclass(frozen=True)
class EigenCluster:
    """One root subspace: ``(A - eigenvalue)^nilpotency_order`` kills ``basis``."""

    eigenvalue: complex
    basis: np.ndarray
    algebraic_multiplicity: int
    nilpotency_order: int
    geometric_multiplicity: int
    members: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Direct-sum splitting of the ambient space into root subspaces."""

    dim: int
    clusters: tuple
    scale: float
    cluster_tol: float

    @property
    def eigenvalues(self):
        return np.array([c.eigenvalue for c in self.clusters], dtype=complex)

    @property
    def multiplicities(self):
        return np.array([c.algebraic_multiplicity for c in self.clusters], dtype=int)

    def stacked_basis(self):
        if not self.clusters:
            return np.zeros((self.dim, 0), dtype=complex)
        return np.hstack([c.basis for c in self.clusters])

    def condition(self):
        """Condition number of the stacked cluster bases."""
        V = self.stacked_basis()
        if V.size == 0:
            return 1.0
        return float(np.linalg.cond(V))

    def projector(self, selected):
        """Spectral projector onto the clusters whose indices are in ``selected``.

        The complementary clusters span its kernel, so the result is the
        projection along the remaining root subspaces, not an orthogonal one.
        """
        selected = set(int(i) for i in selected)
        n = self.dim
        if n == 0:
            return np.zeros((0, 0), dtype=complex)
        if not selected:
            return np.zeros((n, n), dtype=complex)
        if len(selected) == len(self.clusters):
            return np.eye(n, dtype=complex)
        V = self.stacked_basis()
        mask = np.concatenate(
            [np.full(c.algebraic_multiplicity, i in selected) for i, c in enumerate(self.clusters)]
        )
        Vinv = np.linalg.inv(V)
        return V[:, mask] @ Vinv[mask, :]

    def basis_of(self, selected):
        selected = sorted(int(i) for i in selected)
        if not selected:
            return np.zeros((self.dim, 0), dtype=complex)
        return np.hstack([self.clusters[i].basis for i in selected])


def _single_linkage(values, radius):
    """Connected components of ``|x - y| <= radius``; returns a label per value."""
    n = len(values)
    labels = np.arange(n)

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    if n:
        close = np.abs(values[:, None] - values[None, :]) <= radius
        for i, j in zip(*np.nonzero(np.triu(close, 1))):
            ri, rj = find(i), find(j)
            if ri != rj:
                labels[max(ri, rj)] = min(ri, rj)
    return np.array([find(i) for i in range(n)])


def spectral_scale(eigenvalues):
    mags = np.abs(np.asarray(eigenvalues))
    if mags.size == 0 or mags.max() == 0:
        return 1.0
    return float(mags.max())


def generalized_eigenspaces(A, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Split the space into root subspaces of ``A``.

    Eigenvalues closer than ``cluster_tol`` times the spectral radius are merged
    by single linkage. Each cluster is moved to the top of a complex Schur form
    by ``ztrsen``, so its basis is orthonormal and spans the invariant subspace
    even when ``A`` is far from normal. The cluster eigenvalue is the mean of its
    members (the trace of the reordered block), which is well conditioned even
    when the individual members are not.

    The nilpotency order is the first power at which the rank of
    ``(T11 - eigenvalue)^p`` drops to zero at relative threshold ``cluster_tol``.

    Raises
    ------
    ConvergenceError
        If the Schur iteration or a reordering fails.
    """
    A = as_cmatrix(A, name="A", square=True)
    n = A.shape[0]
    if n == 0:
        return SpectralDecomposition(0, (), 1.0, cluster_tol)
    try:
        T, Z = scipy.linalg.schur(A, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"Schur iteration failed on {n}x{n} matrix: {exc}") from exc
    evals = np.diag(T).copy()
    scale = spectral_scale(evals)
    labels = _single_linkage(evals, cluster_tol * scale)

    clusters = []
    for lab in sorted(set(labels), key=lambda l: (abs(evals[labels == l].mean()), np.angle(evals[labels == l].mean()))):
        members = np.nonzero(labels == lab)[0]
        m = len(members)
        if m == n:
            Ts, Qs = T, Z
        else:
            select = np.zeros(n, dtype=np.int32)
            select[members] = 1
            Ts, Qs, _, msel, _, _, info = lapack.ztrsen(select, T, Z, job="N")
            if info != 0 or msel != m:
                raise ConvergenceError(
                    f"reordering failed for cluster near {evals[members].mean():.6g} "
                    f"(info={info}, selected {msel} of {m})"
                )
        T11 = Ts[:m, :m]
        lam = complex(np.trace(T11) / m)
        N = T11 - lam * np.eye(m)
        ranks = []
        P = np.eye(m, dtype=complex)
        order = m
        for p in range(1, m + 1):
            P = P @ N
            s = np.linalg.svd(P, compute_uv=False)
            r = int(np.sum(s > cluster_tol * scale**p))
            ranks.append(r)
            if r == 0:
                order = p
                break
        geom = m - ranks[0]
        clusters.append(
            EigenCluster(
                eigenvalue=lam,
                basis=np.ascontiguousarray(Qs[:, :m]),
                algebraic_multiplicity=m,
                nilpotency_order=order,
                geometric_multiplicity=geom,
                members=evals[members],
            )
        )
    return SpectralDecomposition(n, tuple(clusters), scale, cluster_tol)


def charpoly(A):
    """Characteristic polynomial ``det(x I - A)``, coefficients in ascending order.

    Reduces to upper Hessenberg form by an orthogonal similarity and then runs
    La Budde's recurrence over the leading principal submatrices, so no
    eigenvalue is ever computed.
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if n == 0:
        return np.ones(1, dtype=complex)
    H = scipy.linalg.hessenberg(A)
    polys = [np.ones(1, dtype=complex)]
    for i in range(1, n + 1):
        prev = polys[i - 1]
        p = np.zeros(i + 1, dtype=complex)
        p[1:] += prev
        p[:-1] -= H[i - 1, i - 1] * prev
        sub = 1.0 + 0j
        for m in range(1, i):
            sub *= H[i - m, i - m - 1]
            if sub == 0:
                break
            q = polys[i - m - 1]
            p[: len(q)] -= H[i - m - 1, i - 1] * sub * q
        polys.append(p)
    return polys[n]


def newton_root_moduli(coeffs):
    """Approximate root moduli from the Newton polygon of ascending coefficients.

    Returns ``(n_exact_zero, moduli)`` where ``moduli`` lists one estimate per
    remaining root, smallest first.
    """
    c = np.abs(np.asarray(coeffs))
    n = len(c) - 1
    nz = np.nonzero(c > 0)[0]
    if nz.size == 0:
        return n, np.zeros(0)
    j0 = int(nz[0])
    pts = [(int(j), np.log(c[j])) for j in nz]
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless the chain turns downward (upper hull)
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    moduli = []
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        slope = (y2 - y1) / (x2 - x1)
        moduli.extend([np.exp(-slope)] * (x2 - x1))
    return j0, np.array(moduli)


@dataclass(frozen=True)
class SpectrumProduct:
    """Product of the nonzero spectrum, counted with algebraic multiplicity."""

    value: complex
    log_value: complex
    zero_count: int
    ambiguous: bool


def nonzero_spectrum_product(A, zero_tol=DEFAULT_ZERO_TOL, scale=None):
    """Product of eigenvalues with ``|lambda| > zero_tol * scale``.

    ``scale`` defaults to the largest eigenvalue modulus. Give it explicitly
    when ``A`` is a compression of a larger operator whose retained spectrum
    may be empty, so that roundoff is not promoted to a nonzero eigenvalue.

    Computed from the characteristic polynomial alone: the number ``m`` of
    negligible roots is read off the Newton polygon, and the product of the
    other roots is ``(-1)^(n-m)`` times the coefficient of ``x^m``. This route is
    independent of :func:`generalized_eigenspaces` and serves as its oracle.

    When some root modulus estimate falls within a factor 10 of the zero
    threshold, ``ambiguous`` is set and an :class:`AmbiguousZeroWarning` issued.
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if n == 0:
        return SpectrumProduct(1.0 + 0j, 0j, 0, False)
    s = float(np.linalg.norm(A, 2))
    if s == 0:
        return SpectrumProduct(1.0 + 0j, 0j, n, False)
    c = charpoly(A / s)
    j0, moduli = newton_root_moduli(c)
    rmax = moduli.max() if moduli.size else 0.0
    thresh = zero_tol * (rmax if scale is None else scale / s)
    m = j0 + int(np.sum(moduli <= thresh))
    ambiguous = bool(np.any((moduli > thresh / 10) & (moduli < thresh * 10)))
    if ambiguous:
        warnings.warn(
            "eigenvalue modulus within a factor 10 of the zero tolerance", AmbiguousZeroWarning, stacklevel=2
        )
    coeff = c[m] * (-1) ** (n - m)
    log_value = complex(np.log(abs(coeff)) + (n - m) * np.log(s), np.angle(coeff))
    return SpectrumProduct(complex(np.exp(log_value)), log_value, m, ambiguous)
