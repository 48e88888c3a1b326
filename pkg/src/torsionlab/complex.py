"""Z2-graded cochain complexes with complex symmetric bilinear forms.

A complex is a pair of spaces ``C_even``, ``C_odd`` with differentials
``d_even: C_even -> C_odd`` and ``d_odd: C_odd -> C_even`` whose composites in
both orders vanish. The bilinear structure is a pair of complex *symmetric*
(not Hermitian) Gram matrices, so the adjoint of the differential and the
resulting Laplacians are in general not normal, and their spectra are complex.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, NonDegeneracyError, ValidationError, WindowBoundaryWarning
from .linalg import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_RANK_TOL,
    SpectralDecomposition,
    as_cmatrix,
    generalized_eigenspaces,
    image_basis,
    kernel_basis,
)

MAX_FORM_CONDITION = 1e12
PARITIES = ("even", "odd")


def _readonly(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GradedComplex:
    """``d_even`` is ``n_odd x n_even``, ``d_odd`` is ``n_even x n_odd``."""

    d_even: np.ndarray
    d_odd: np.ndarray

    def __post_init__(self):
        de = as_cmatrix(self.d_even, "d_even")
        do = as_cmatrix(self.d_odd, "d_odd")
        if de.shape != (do.shape[1], do.shape[0]):
            raise DimensionError(
                f"d_even has shape {de.shape} but d_odd has shape {do.shape}; "
                "expected (n_odd, n_even) and (n_even, n_odd)"
            )
        object.__setattr__(self, "d_even", _readonly(de))
        object.__setattr__(self, "d_odd", _readonly(do))

    @classmethod
    def zero(cls, n_even, n_odd):
        return cls(np.zeros((n_odd, n_even)), np.zeros((n_even, n_odd)))

    @property
    def n_even(self):
        return self.d_even.shape[1]

    @property
    def n_odd(self):
        return self.d_even.shape[0]

    def dims(self):
        return self.n_even, self.n_odd

    def d(self, parity):
        """Differential leaving the given parity."""
        return self.d_even if parity == "even" else self.d_odd

    def scale(self):
        return max(1.0, float(np.abs(self.d_even).max(initial=0)), float(np.abs(self.d_odd).max(initial=0)))

    def direct_sum(self, other):
        from scipy.linalg import block_diag

        return GradedComplex(block_diag(self.d_even, other.d_even), block_diag(self.d_odd, other.d_odd))

    def conjugate_by(self, g_even, g_odd):
        """Complex with differentials ``g d g^-1`` (transport along an isomorphism)."""
        return GradedComplex(
            g_odd @ self.d_even @ np.linalg.inv(g_even),
            g_even @ self.d_odd @ np.linalg.inv(g_odd),
        )


@dataclass(frozen=True, eq=False)
class BilinearStructure:
    """Symmetric non-degenerate Gram matrices on both parities."""

    B_even: np.ndarray
    B_odd: np.ndarray

    def __post_init__(self):
        be = as_cmatrix(self.B_even, "B_even", square=True)
        bo = as_cmatrix(self.B_odd, "B_odd", square=True)
        for name, B in (("B_even", be), ("B_odd", bo)):
            if not np.array_equal(B, B.T):
                raise ValidationError(f"{name} is not symmetric")
        object.__setattr__(self, "B_even", _readonly(be))
        object.__setattr__(self, "B_odd", _readonly(bo))

    @classmethod
    def identity(cls, n_even, n_odd):
        return cls(np.eye(n_even), np.eye(n_odd))

    def B(self, parity):
        return self.B_even if parity == "even" else self.B_odd

    def condition(self):
        return tuple(float(np.linalg.cond(B)) if B.size else 1.0 for B in (self.B_even, self.B_odd))

    def direct_sum(self, other):
        from scipy.linalg import block_diag

        return BilinearStructure(block_diag(self.B_even, other.B_even), block_diag(self.B_odd, other.B_odd))

    def pullback(self, g_even, g_odd):
        """Form ``(x, y) -> b(g x, g y)``."""
        return BilinearStructure(
            symmetrize(g_even.T @ self.B_even @ g_even), symmetrize(g_odd.T @ self.B_odd @ g_odd)
        )


def symmetrize(B):
    """Exactly symmetric copy of ``B`` (``(B + B^T) / 2``)."""
    B = np.asarray(B, dtype=complex)
    return (B + B.T) / 2


@dataclass(frozen=True)
class Diagnostics:
    passed: bool
    d_squared_residual: float
    symmetry_residual: float
    condition_even: float
    condition_odd: float
    messages: tuple = ()

    def as_dict(self):
        return {
            "passed": self.passed,
            "d_squared_residual": self.d_squared_residual,
            "symmetry_residual": self.symmetry_residual,
            "condition_even": self.condition_even,
            "condition_odd": self.condition_odd,
            "messages": list(self.messages),
        }


def validate(K, b=None, tol=1e-10):
    """Check 2-periodicity, symmetry and conditioning; never raises on a failed check.

    Raises
    ------
    DimensionError
        If the forms do not match the complex.
    """
    messages = []
    if b is None:
        b = BilinearStructure.identity(K.n_even, K.n_odd)
    if b.B_even.shape[0] != K.n_even or b.B_odd.shape[0] != K.n_odd:
        raise DimensionError(
            f"forms of size ({b.B_even.shape[0]}, {b.B_odd.shape[0]}) do not match complex {K.dims()}"
        )
    r1 = float(np.abs(K.d_odd @ K.d_even).max(initial=0))
    r2 = float(np.abs(K.d_even @ K.d_odd).max(initial=0))
    d2 = max(r1, r2)
    sym = max(
        float(np.abs(b.B_even - b.B_even.T).max(initial=0)),
        float(np.abs(b.B_odd - b.B_odd.T).max(initial=0)),
    )
    ce, co = b.condition()
    if d2 > tol * K.scale() ** 2:
        messages.append(f"d^2 residual {d2:.3e} exceeds tolerance")
    if sym > tol:
        messages.append(f"symmetry residual {sym:.3e} exceeds tolerance")
    for name, c in (("B_even", ce), ("B_odd", co)):
        if not np.isfinite(c) or c > MAX_FORM_CONDITION:
            messages.append(f"{name} condition number {c:.3e} exceeds {MAX_FORM_CONDITION:.0e}")
    return Diagnostics(not messages, d2, sym, ce, co, tuple(messages))


def require_valid(K, b=None, tol=1e-10):
    diag = validate(K, b, tol)
    if not diag.passed:
        raise ValidationError("; ".join(diag.messages))
    return diag


@dataclass(frozen=True, eq=False)
class BLaplacianSystem:
    """b-adjoints of the differentials and the two Laplacians.

    ``d_sharp_even`` maps ``C_odd -> C_even`` and is the adjoint of ``d_even``;
    ``d_sharp_odd`` maps ``C_even -> C_odd``.
    """

    d_sharp_even: np.ndarray
    d_sharp_odd: np.ndarray
    delta_even: np.ndarray
    delta_odd: np.ndarray

    def d_sharp(self, parity):
        return self.d_sharp_even if parity == "even" else self.d_sharp_odd

    def delta(self, parity):
        return self.delta_even if parity == "even" else self.delta_odd


def _check_form(B, name):
    if B.size == 0:
        return
    c = np.linalg.cond(B)
    if not np.isfinite(c) or c > MAX_FORM_CONDITION:
        raise NonDegeneracyError(f"{name} is singular or badly conditioned (cond={c:.3e})")


def b_adjoint(K, b):
    """b-adjoints ``d# = B^-1 d^T B`` and Laplacians ``d#d + d d#``.

    Raises
    ------
    NonDegeneracyError
        If either Gram matrix has condition number above 1e12.
    """
    _check_form(b.B_even, "B_even")
    _check_form(b.B_odd, "B_odd")
    Be, Bo = b.B_even, b.B_odd
    ds_even = np.linalg.solve(Be, K.d_even.T @ Bo) if K.n_even else np.zeros((0, K.n_odd), complex)
    ds_odd = np.linalg.solve(Bo, K.d_odd.T @ Be) if K.n_odd else np.zeros((0, K.n_even), complex)
    delta_even = ds_even @ K.d_even + K.d_odd @ ds_odd
    delta_odd = ds_odd @ K.d_odd + K.d_even @ ds_even
    return BLaplacianSystem(
        _readonly(ds_even), _readonly(ds_odd), _readonly(delta_even), _readonly(delta_odd)
    )


@dataclass(frozen=True, eq=False)
class SpectralWindow:
    """Root subspaces of the Laplacians with ``|lambda| <= a``, per parity."""

    threshold: float
    decomposition_even: SpectralDecomposition
    decomposition_odd: SpectralDecomposition
    window_even: tuple
    window_odd: tuple
    Q_even: np.ndarray
    Q_odd: np.ndarray
    Pi_even: np.ndarray
    Pi_odd: np.ndarray
    boundary_ambiguous: bool
    commutation_residual: float

    def Q(self, parity):
        return self.Q_even if parity == "even" else self.Q_odd

    def Pi(self, parity):
        return self.Pi_even if parity == "even" else self.Pi_odd

    def decomposition(self, parity):
        return self.decomposition_even if parity == "even" else self.decomposition_odd

    def window_indices(self, parity):
        return self.window_even if parity == "even" else self.window_odd

    def basis(self, parity, part="window"):
        dec = self.decomposition(parity)
        inside = set(self.window_indices(parity))
        if part == "window":
            idx = sorted(inside)
        elif part == "complement":
            idx = [i for i in range(len(dec.clusters)) if i not in inside]
        else:
            raise ValueError(f"part must be 'window' or 'complement', got {part!r}")
        return dec.basis_of(idx)

    def window_dims(self):
        return self.basis("even").shape[1], self.basis("odd").shape[1]

    def eigenvalue_moduli(self):
        return np.concatenate(
            [np.abs(self.decomposition_even.eigenvalues), np.abs(self.decomposition_odd.eigenvalues)]
        )


def boundary_margin(moduli, a, scale, tol):
    """True when no modulus lies within ``10 * tol * scale`` of the threshold ``a``."""
    moduli = np.asarray(moduli, dtype=float)
    if moduli.size == 0:
        return True
    return bool(np.all(np.abs(moduli - a) > 10 * tol * scale))


def in_window(eigenvalue, a, scale, tol):
    """Window membership ``|lambda| <= a``; numerically zero eigenvalues belong at ``a = 0``."""
    return abs(eigenvalue) <= a + tol * scale


def spectral_window(K, b, a, cluster_tol=DEFAULT_CLUSTER_TOL, laplacians=None):
    """Decompose both Laplacians and build the window projectors at threshold ``a``.

    The two Laplacians are decomposed independently; the window must then be a
    subcomplex, which is checked (``commutation_residual``) rather than assumed.
    A threshold within ``10 * cluster_tol * scale`` of an eigenvalue modulus
    issues a :class:`WindowBoundaryWarning` and sets ``boundary_ambiguous``.
    """
    if a < 0:
        raise ValueError(f"threshold must be non-negative, got {a}")
    L = laplacians if laplacians is not None else b_adjoint(K, b)
    dec_e = generalized_eigenspaces(L.delta_even, cluster_tol)
    dec_o = generalized_eigenspaces(L.delta_odd, cluster_tol)
    scale = max(dec_e.scale, dec_o.scale)
    win_e = tuple(i for i, c in enumerate(dec_e.clusters) if in_window(c.eigenvalue, a, scale, cluster_tol))
    win_o = tuple(i for i, c in enumerate(dec_o.clusters) if in_window(c.eigenvalue, a, scale, cluster_tol))
    ambiguous = False
    if a > 0:
        moduli = np.concatenate([np.abs(dec_e.eigenvalues), np.abs(dec_o.eigenvalues)])
        ambiguous = not boundary_margin(moduli, a, scale, cluster_tol)
        if ambiguous:
            warnings.warn(
                f"threshold {a} lies within tolerance of an eigenvalue modulus", WindowBoundaryWarning, stacklevel=2
            )
    Qe = dec_e.projector(win_e)
    Qo = dec_o.projector(win_o)
    ne, no = K.n_even, K.n_odd
    resid = 0.0
    if ne and no:
        resid = max(
            float(np.abs(K.d_even @ Qe - Qo @ K.d_even).max()),
            float(np.abs(K.d_odd @ Qo - Qe @ K.d_odd).max()),
        )
    return SpectralWindow(
        threshold=float(a),
        decomposition_even=dec_e,
        decomposition_odd=dec_o,
        window_even=win_e,
        window_odd=win_o,
        Q_even=_readonly(Qe),
        Q_odd=_readonly(Qo),
        Pi_even=_readonly(np.eye(ne) - Qe),
        Pi_odd=_readonly(np.eye(no) - Qo),
        boundary_ambiguous=ambiguous,
        commutation_residual=resid,
    )


def admissible_thresholds(W, count=3, tol=DEFAULT_CLUSTER_TOL):
    """Thresholds splitting the spectrum cleanly: 0, widest gap midpoints, above the top.

    ``W`` is any window of the complex; only its decompositions are used.
    """
    moduli = np.sort(W.eigenvalue_moduli())
    scale = max(W.decomposition_even.scale, W.decomposition_odd.scale)
    top = float(moduli[-1]) if moduli.size else 0.0
    pos = np.unique(moduli[moduli > 10 * tol * scale])
    mids = []
    if pos.size > 1:
        gaps = np.diff(pos) / pos[1:]
        for i in np.argsort(-gaps):
            mid = float((pos[i] + pos[i + 1]) / 2)
            if boundary_margin(moduli, mid, scale, tol):
                mids.append(mid)
    # fallbacks when the spectrum has fewer gaps than requested
    for extra in ([pos[0] / 2] if pos.size else []) + [top / 2 + 0.5, top + 0.5]:
        if len(mids) >= count - 2:
            break
        if extra > 0 and boundary_margin(moduli, extra, scale, tol) and extra not in mids:
            mids.append(float(extra))
    inner = sorted(mids[: max(count - 2, 0)])
    return [0.0] + inner + [2.0 * top + 1.0]


def cohomology_basis(K, tol=DEFAULT_RANK_TOL, scale=None):
    """Cocycle representatives whose classes form bases of ``H_even`` and ``H_odd``.

    Representatives are chosen orthogonally (in the Hermitian sense) to the
    coboundaries inside the cocycles, so they depend only on the differentials.
    Pass ``scale`` when ``K`` is a subcomplex, so that roundoff-sized
    differentials are judged against the parent and not against themselves.
    """
    return (
        _cohomology_reps(K.d_even, K.d_odd, tol, scale),
        _cohomology_reps(K.d_odd, K.d_even, tol, scale),
    )


def _cohomology_reps(d_out, d_in, tol, scale=None):
    """Complement of ``im d_in`` inside ``ker d_out``."""
    n = d_out.shape[1]
    Z = kernel_basis(d_out, tol, scale) if d_out.shape[0] else np.eye(n, dtype=complex)
    if Z.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    Bd = image_basis(d_in, tol, scale) if d_in.size else np.zeros((n, 0), dtype=complex)
    if Bd.shape[1] == 0:
        return Z
    coords = Z.conj().T @ Bd
    comp = kernel_basis(coords.conj().T, tol) if coords.shape[1] else np.eye(Z.shape[1], dtype=complex)
    return Z @ comp


def cohomology_dims(K, tol=DEFAULT_RANK_TOL, scale=None):
    he, ho = cohomology_basis(K, tol, scale)
    return he.shape[1], ho.shape[1]


def restrict(K, b, V_even, V_odd):
    """Complex and form in the coordinates of invariant subspaces spanned by ``V``.

    Raises
    ------
    ValidationError
        If the subspaces are not invariant under the differentials.
    NonDegeneracyError
        If the restricted Gram matrices are singular.
    """
    De = _coords(V_odd, K.d_even @ V_even, "d_even")
    Do = _coords(V_even, K.d_odd @ V_odd, "d_odd")
    Bres = BilinearStructure(
        symmetrize(V_even.T @ b.B_even @ V_even), symmetrize(V_odd.T @ b.B_odd @ V_odd)
    ) if b is not None else None
    if Bres is not None:
        _check_form(Bres.B_even, "restricted B_even")
        _check_form(Bres.B_odd, "restricted B_odd")
    return GradedComplex(De, Do), Bres


def _coords(V, X, name):
    if V.shape[1] == 0:
        if X.size and np.abs(X).max() > 1e-8 * max(1.0, np.abs(X).max()):
            raise ValidationError(f"{name} leaves the subspace")
        return np.zeros((0, X.shape[1]), dtype=complex)
    C, *_ = np.linalg.lstsq(V, X, rcond=None)
    resid = np.abs(V @ C - X).max(initial=0)
    if resid > 1e-7 * max(1.0, np.abs(X).max(initial=0)):
        raise ValidationError(f"subspace not invariant under {name} (residual {resid:.3e})")
    return C


def restrict_to_window(K, b, W, part="window"):
    """Subcomplex on the window (or its complement) with ``b`` restricted.

    Distinct root subspaces are b-orthogonal, so the restricted form stays
    non-degenerate; failure here signals an internal inconsistency.
    """
    return restrict(K, b, W.basis("even", part), W.basis("odd", part))


def coordinates_in(V, X):
    """Least-squares coordinates of the columns of ``X`` in the basis ``V``."""
    if V.shape[1] == 0:
        return np.zeros((0, X.shape[1]), dtype=complex)
    C, *_ = np.linalg.lstsq(V, X, rcond=None)
    return C
