"""Determinant-line torsions of Z2-graded complexes.

Two scalars are computed relative to a recorded cohomology basis
``h = (wedge reps_even) (x) (wedge reps_odd)^-1``:

* the symmetric bilinear torsion ``tau(h, h)``, a bilinear form on ``det H``;
* the Cappell-Miller element, written as ``c * (h (x) h)`` in ``(det H)^2``.

Because one is a form and the other a vector, they transform oppositely under
a change of cohomology basis ``reps -> reps @ G``: the torsion picks up
``det(G_even)^2 det(G_odd)^-2`` and the Cappell-Miller coefficient
``det(G_even)^-2 det(G_odd)^2``.

All values are carried as complex logarithms so products over many
eigenvalues neither overflow nor underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complex import (
    BilinearStructure,
    GradedComplex,
    b_adjoint,
    boundary_margin,
    cohomology_basis,
    coordinates_in,
    in_window,
    require_valid,
    restrict,
    restrict_to_window,
    spectral_window,
)
from .exceptions import ChiralityError, DimensionError, InvalidBasisError, PairingError
from .linalg import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_RANK_TOL,
    as_cmatrix,
    coimage_basis,
    generalized_eigenspaces,
    image_basis,
    kernel_basis,
    log_determinant,
    nonzero_spectrum_product,
    relative_log_error,
)


@dataclass(frozen=True, eq=False)
class TorsionValue:
    basis: tuple
    log_value: complex
    threshold: float | None = None
    components: dict = field(default_factory=dict)
    boundary_ambiguous: bool = False

    @property
    def value(self):
        return complex(np.exp(self.log_value))

    def as_dict(self):
        return {
            "value": [self.value.real, self.value.imag],
            "log_value": [self.log_value.real, self.log_value.imag],
            "threshold": self.threshold,
            "components": {k: [complex(v).real, complex(v).imag] for k, v in self.components.items()},
            "cohomology_dims": [self.basis[0].shape[1], self.basis[1].shape[1]],
        }


@dataclass(frozen=True, eq=False)
class CMTorsionValue(TorsionValue):
    """Coefficient of the Cappell-Miller element with respect to ``h (x) h``."""


@dataclass(frozen=True, eq=False)
class ChiralityData:
    """Involution exchanging the parities: ``Gamma_even_to_odd`` is ``n_odd x n_even``."""

    Gamma_even_to_odd: np.ndarray
    Gamma_odd_to_even: np.ndarray

    def __post_init__(self):
        ge = as_cmatrix(self.Gamma_even_to_odd, "Gamma_even_to_odd")
        go = as_cmatrix(self.Gamma_odd_to_even, "Gamma_odd_to_even")
        if ge.shape[0] != ge.shape[1] or go.shape != ge.shape:
            raise ChiralityError(f"chirality blocks must be square and equal-sized, got {ge.shape}, {go.shape}")
        object.__setattr__(self, "Gamma_even_to_odd", ge)
        object.__setattr__(self, "Gamma_odd_to_even", go)

    def involution_residual(self):
        n = self.Gamma_even_to_odd.shape[0]
        eye = np.eye(n)
        return max(
            float(np.abs(self.Gamma_odd_to_even @ self.Gamma_even_to_odd - eye).max(initial=0)),
            float(np.abs(self.Gamma_even_to_odd @ self.Gamma_odd_to_even - eye).max(initial=0)),
        )

    def check(self, tol=1e-10):
        r = self.involution_residual()
        if r > tol:
            raise ChiralityError(f"Gamma^2 differs from the identity by {r:.3e}")
        return r

    def full(self):
        """Gamma on ``C_even (+) C_odd`` as one matrix."""
        n = self.Gamma_even_to_odd.shape[0]
        G = np.zeros((2 * n, 2 * n), dtype=complex)
        G[n:, :n] = self.Gamma_even_to_odd
        G[:n, n:] = self.Gamma_odd_to_even
        return G

    def conjugate_by(self, g_even, g_odd):
        return ChiralityData(
            g_odd @ self.Gamma_even_to_odd @ np.linalg.inv(g_even),
            g_even @ self.Gamma_odd_to_even @ np.linalg.inv(g_odd),
        )


def change_basis(basis, G_even, G_odd):
    """New representatives ``reps @ G``."""
    return basis[0] @ G_even, basis[1] @ G_odd


def _check_basis(K, basis, tol):
    reps_e, reps_o = (as_cmatrix(r) for r in basis)
    if reps_e.shape[0] != K.n_even or reps_o.shape[0] != K.n_odd:
        raise InvalidBasisError(f"representatives have {reps_e.shape[0]}, {reps_o.shape[0]} rows; complex is {K.dims()}")
    scale = K.scale()
    for name, d, r in (("even", K.d_even, reps_e), ("odd", K.d_odd, reps_o)):
        if r.size and d.size:
            res = np.abs(d @ r).max() / max(1.0, np.abs(r).max())
            if res > 1e-8 * scale:
                raise InvalidBasisError(f"{name} representatives are not closed (residual {res:.3e})")
    return reps_e, reps_o


def phi_frames(K, basis, rng=None, tol=DEFAULT_RANK_TOL, scale=None):
    """Frames ``U_even = [d_odd y, reps_even, x]`` and ``U_odd = [d_even x, reps_odd, y]``.

    ``x`` lifts a basis of ``im d_even`` and ``y`` one of ``im d_odd``. With
    ``rng`` the lifts are scrambled by random invertible mixing and random
    cocycle shifts; the resulting torsion must not change.

    Singular values at most ``tol * scale`` count as zero. ``scale`` defaults
    to ``K.scale()``; pass the parent's scale for a restricted subcomplex so
    that a roundoff-sized block is not mistaken for a nonzero differential.

    Raises
    ------
    InvalidBasisError
        If the frames are not square and invertible, which means the
        representatives are not a basis of the cohomology.
    """
    scale = K.scale() if scale is None else scale
    reps_e, reps_o = _check_basis(K, basis, tol)
    x = coimage_basis(K.d_even, tol, scale) if K.d_even.size else np.zeros((K.n_even, 0), complex)
    y = coimage_basis(K.d_odd, tol, scale) if K.d_odd.size else np.zeros((K.n_odd, 0), complex)
    if rng is not None:
        x = _scramble(x, kernel_basis(K.d_even, tol, scale) if K.d_even.size else np.eye(K.n_even), rng)
        y = _scramble(y, kernel_basis(K.d_odd, tol, scale) if K.d_odd.size else np.eye(K.n_odd), rng)
    U_e = np.hstack([K.d_odd @ y, reps_e, x])
    U_o = np.hstack([K.d_even @ x, reps_o, y])
    for name, U, n in (("even", U_e, K.n_even), ("odd", U_o, K.n_odd)):
        if U.shape[1] != n:
            raise InvalidBasisError(
                f"{name} frame has {U.shape[1]} columns for a {n}-dimensional space; "
                "representatives do not match the cohomology dimension"
            )
        if n and np.linalg.cond(U) > 1e12:
            raise InvalidBasisError(f"{name} representatives are not independent in cohomology")
    return U_e, U_o


def _scramble(lift, kernel, rng):
    k = lift.shape[1]
    if k == 0:
        return lift
    mix = np.eye(k) + 0.5 * (rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))) / np.sqrt(k)
    shift = kernel @ (rng.normal(size=(kernel.shape[1], k)) + 1j * rng.normal(size=(kernel.shape[1], k)))
    return lift @ mix + 0.5 * shift


def det_line_torsion_direct(K, b, basis=None, rng=None, scale=None):
    """Bilinear form induced on ``det H`` through the canonical isomorphism, evaluated at ``h``.

    The pulled-back element of ``det C`` is ``(wedge U_even) (x) (wedge U_odd)^-1``
    and its value is the ratio of Gram determinants
    ``det(U_even^T B_even U_even) / det(U_odd^T B_odd U_odd)``. Any other choice
    of lifts changes both frames by the same determinant, which cancels.
    """
    if basis is None:
        basis = cohomology_basis(K)
    U_e, U_o = phi_frames(K, basis, rng, scale=scale)
    log_e = log_determinant(U_e.T @ b.B_even @ U_e)
    log_o = log_determinant(U_o.T @ b.B_odd @ U_o)
    return TorsionValue(basis=tuple(basis), log_value=log_e - log_o, components={"gram_even": log_e, "gram_odd": log_o})


def _restricted_det(op, image):
    """``det`` of ``op`` on the invariant subspace with orthonormal basis ``image``."""
    if image.shape[1] == 0:
        return 0j
    M = image.conj().T @ op @ image
    return log_determinant(M)


def complement_det_primes(K, b, W, laplacians=None):
    """Logs of ``det(d#_k d_k)`` on ``im d#_k`` inside the complement of the window."""
    Kc, bc = restrict_to_window(K, b, W, part="complement")
    Lc = b_adjoint(Kc, bc)
    Lfull = laplacians if laplacians is not None else b_adjoint(K, b)
    out = {}
    for parity in ("even", "odd"):
        ds = Lc.d_sharp(parity)
        op = ds @ Kc.d(parity)
        scale = max(1.0, float(np.abs(Lfull.d_sharp(parity)).max(initial=0)))
        img = image_basis(ds, scale=scale) if ds.size else np.zeros((op.shape[0], 0), complex)
        out[parity] = _restricted_det(op, img)
    return out


def det_prime(K, b, W, parity):
    """Product of the nonzero eigenvalues of ``d#d`` on ``im d#`` beyond the window (log)."""
    return complement_det_primes(K, b, W)[parity]


def det_prime_oracle(K, b, W, parity, zero_tol=1e-8):
    """Independent route to ``det_prime``: char-polynomial product for ``d# d Pi``."""
    L = b_adjoint(K, b)
    full = L.d_sharp(parity) @ K.d(parity)
    scale = max(1.0, float(np.linalg.norm(full, 2))) if full.size else 1.0
    return nonzero_spectrum_product(full @ W.Pi(parity), zero_tol, scale=scale)


def _transport_reps(V, Q, reps, name):
    target = Q @ reps
    C = coordinates_in(V, target)
    if target.size:
        res = np.abs(V @ C - target).max()
        if res > 1e-7 * max(1.0, np.abs(target).max()):
            raise InvalidBasisError(f"{name} representatives do not project into the window (residual {res:.3e})")
    return C


def torsion(K, b, a=0.0, basis=None, cluster_tol=DEFAULT_CLUSTER_TOL, window=None):
    """Symmetric bilinear torsion at spectral threshold ``a``.

    Window part: the induced form on ``det H`` of the window subcomplex, with
    the representatives moved into the window by the spectral projector.
    Complement part: ``det'(even)^-1 * det'(odd)``.
    """
    if basis is None:
        basis = cohomology_basis(K)
    W = window if window is not None else spectral_window(K, b, a, cluster_tol)
    Kw, bw = restrict_to_window(K, b, W, "window")
    reps_w = (
        _transport_reps(W.basis("even"), W.Q_even, basis[0], "even"),
        _transport_reps(W.basis("odd"), W.Q_odd, basis[1], "odd"),
    )
    win = det_line_torsion_direct(Kw, bw, reps_w, scale=K.scale()).log_value
    dp = complement_det_primes(K, b, W)
    total = win - dp["even"] + dp["odd"]
    return TorsionValue(
        basis=tuple(basis),
        log_value=total,
        threshold=W.threshold,
        components={"window": win, "det_prime_even": dp["even"], "det_prime_odd": dp["odd"]},
        boundary_ambiguous=W.boundary_ambiguous,
    )


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    discrepancy: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(float(obj.real)), _jsonable(float(obj.imag))]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def factorization_check(K, b, basis=None, tol=1e-8, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Direct torsion of the whole complex against the factorization at ``a = 0``."""
    if basis is None:
        basis = cohomology_basis(K)
    direct = det_line_torsion_direct(K, b, basis)
    split = torsion(K, b, 0.0, basis, cluster_tol)
    err = relative_log_error(direct.log_value, split.log_value)
    return CheckReport(
        "factorization",
        bool(err < tol),
        float(err),
        tol,
        {"direct": direct.log_value, "factorized": split.log_value, "components": split.components},
    )


def window_independence_check(K, b, thresholds, basis=None, tol=1e-9, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Torsion at several thresholds; thresholds too close to an eigenvalue modulus are rejected."""
    if basis is None:
        basis = cohomology_basis(K)
    L = b_adjoint(K, b)
    probe = spectral_window(K, b, 0.0, cluster_tol, laplacians=L)
    moduli = probe.eigenvalue_moduli()
    scale = max(probe.decomposition_even.scale, probe.decomposition_odd.scale)
    values, rejected = {}, []
    for a in thresholds:
        if a > 0 and not boundary_margin(moduli, a, scale, cluster_tol):
            rejected.append(float(a))
            continue
        values[float(a)] = torsion(K, b, a, basis, cluster_tol)
    logs = [v.log_value for v in values.values()]
    err = max((relative_log_error(x, y) for x in logs for y in logs), default=0.0)
    splits = {a: v.components for a, v in values.items()}
    return CheckReport(
        "window_independence",
        bool(err < tol and len(values) > 0),
        float(err),
        tol,
        {"values": {a: v.log_value for a, v in values.items()}, "rejected": rejected, "components": splits},
    )


def flat_adjoint(K, Gamma):
    """``d_flat = Gamma d Gamma``: ``(C_odd -> C_even, C_even -> C_odd)``."""
    Ge, Go = Gamma.Gamma_even_to_odd, Gamma.Gamma_odd_to_even
    return Go @ K.d_even @ Go, Ge @ K.d_odd @ Ge


def flat_laplacians(K, Gamma):
    """``(d + d_flat)^2`` restricted to each parity."""
    fe, fo = flat_adjoint(K, Gamma)
    return fe @ K.d_even + K.d_odd @ fo, fo @ K.d_odd + K.d_even @ fe


def _rho_squared_log(K, Gamma_eo, basis, scale=None):
    """Log of the coefficient of ``phi(c (x) (Gamma c)^-1)^2`` against ``h (x) h``."""
    U_e, U_o = phi_frames(K, basis, scale=scale)
    return 2 * (log_determinant(U_o) - log_determinant(U_e) - log_determinant(Gamma_eo))


def cm_torsion_direct(K, Gamma, basis=None):
    """Cappell-Miller coefficient of the whole complex, with no spectral splitting."""
    if basis is None:
        basis = cohomology_basis(K)
    Gamma.check()
    if K.n_even != K.n_odd:
        raise PairingError("a chirality operator needs equal even and odd dimensions")
    return CMTorsionValue(basis=tuple(basis), log_value=_rho_squared_log(K, Gamma.Gamma_even_to_odd, basis))


def cappell_miller_torsion(K, Gamma, a=0.0, basis=None, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Cappell-Miller coefficient at threshold ``a`` built from ``Delta_flat = (d + Gamma d Gamma)^2``.

    The window element is ``phi(c (x) (Gamma c)^-1)`` squared, computed in the
    window subcomplex (Gamma commutes with ``d + d_flat`` and so preserves the
    window); the complement contributes ``det'(d_flat d)`` with exponent +1 on
    the even side and -1 on the odd side.

    Raises
    ------
    PairingError
        If Gamma does not restrict to an isomorphism between the window parities.
    """
    if basis is None:
        basis = cohomology_basis(K)
    Gamma.check()
    if K.n_even != K.n_odd:
        raise PairingError("a chirality operator needs equal even and odd dimensions")
    Le, Lo = flat_laplacians(K, Gamma)
    dec_e = generalized_eigenspaces(Le, cluster_tol)
    dec_o = generalized_eigenspaces(Lo, cluster_tol)
    scale = max(dec_e.scale, dec_o.scale)
    ambiguous = False
    if a > 0:
        moduli = np.concatenate([np.abs(dec_e.eigenvalues), np.abs(dec_o.eigenvalues)])
        ambiguous = not boundary_margin(moduli, a, scale, cluster_tol)
    win_e = [i for i, c in enumerate(dec_e.clusters) if in_window(c.eigenvalue, a, scale, cluster_tol)]
    win_o = [i for i, c in enumerate(dec_o.clusters) if in_window(c.eigenvalue, a, scale, cluster_tol)]
    out_e = [i for i in range(len(dec_e.clusters)) if i not in win_e]
    out_o = [i for i in range(len(dec_o.clusters)) if i not in win_o]
    Vw_e, Vw_o = dec_e.basis_of(win_e), dec_o.basis_of(win_o)
    Vc_e, Vc_o = dec_e.basis_of(out_e), dec_o.basis_of(out_o)

    Kw, _ = restrict(K, None, Vw_e, Vw_o)
    if Vw_e.shape[1] != Vw_o.shape[1]:
        raise PairingError(f"window dimensions differ ({Vw_e.shape[1]} even, {Vw_o.shape[1]} odd)")
    Gw = coordinates_in(Vw_o, Gamma.Gamma_even_to_odd @ Vw_e)
    if Gw.size and np.linalg.cond(Gw) > 1e12:
        raise PairingError("Gamma is degenerate on the window")
    reps_w = (
        _transport_reps(Vw_e, dec_e.projector(win_e), basis[0], "even"),
        _transport_reps(Vw_o, dec_o.projector(win_o), basis[1], "odd"),
    )
    win = _rho_squared_log(Kw, Gw, reps_w, scale=K.scale())

    Kc, _ = restrict(K, None, Vc_e, Vc_o)
    fe, fo = flat_adjoint(K, Gamma)
    flat_c = {"even": coordinates_in(Vc_e, fe @ Vc_o), "odd": coordinates_in(Vc_o, fo @ Vc_e)}
    dp = {}
    for parity in ("even", "odd"):
        f = flat_c[parity]
        op = f @ Kc.d(parity)
        fscale = max(1.0, float(np.abs(fe if parity == "even" else fo).max(initial=0)))
        img = image_basis(f, scale=fscale) if f.size else np.zeros((op.shape[0], 0), complex)
        dp[parity] = _restricted_det(op, img)
    total = win + dp["even"] - dp["odd"]
    return CMTorsionValue(
        basis=tuple(basis),
        log_value=total,
        threshold=float(a),
        components={"window": win, "det_prime_even": dp["even"], "det_prime_odd": dp["odd"]},
        boundary_ambiguous=ambiguous,
    )


def dual_complex(K, b, Gamma):
    """Complex ``Gamma d# Gamma``: the dual differential forced by the chirality identities."""
    L = b_adjoint(K, b)
    Ge, Go = Gamma.Gamma_even_to_odd, Gamma.Gamma_odd_to_even
    return GradedComplex(Ge @ L.d_sharp_even @ Ge, Go @ L.d_sharp_odd @ Go)


def odd_signature_operator(K, Gamma):
    """``Gamma d + d Gamma`` on ``C_even (+) C_odd``."""
    n = K.n_even
    D = np.zeros((2 * n, 2 * n), dtype=complex)
    D[n:, :n] = K.d_even
    D[:n, n:] = K.d_odd
    G = Gamma.full()
    return G @ D + D @ G


def _full_adjoint(K, b):
    L = b_adjoint(K, b)
    n_e = K.n_even
    n = n_e + K.n_odd
    S = np.zeros((n, n), dtype=complex)
    S[:n_e, n_e:] = L.d_sharp_even
    S[n_e:, :n_e] = L.d_sharp_odd
    return S


def _rel(x, ref):
    return float(np.abs(x).max(initial=0) / max(1.0, np.abs(ref).max(initial=0)))


def chirality_residuals(K, b, Gamma, K_dual):
    """Residuals of ``d# = Gamma d' Gamma``, ``d'# = Gamma d Gamma``, ``B# = B'`` and ``Delta' = Gamma Delta Gamma``."""
    L = b_adjoint(K, b)
    Ld = b_adjoint(K_dual, b)
    Ge, Go = Gamma.Gamma_even_to_odd, Gamma.Gamma_odd_to_even
    r_primal = max(
        _rel(L.d_sharp_even - Go @ K_dual.d_even @ Go, L.d_sharp_even),
        _rel(L.d_sharp_odd - Ge @ K_dual.d_odd @ Ge, L.d_sharp_odd),
    )
    r_dual = max(
        _rel(Ld.d_sharp_even - Go @ K.d_even @ Go, Ld.d_sharp_even),
        _rel(Ld.d_sharp_odd - Ge @ K.d_odd @ Ge, Ld.d_sharp_odd),
    )
    Bsig = odd_signature_operator(K, Gamma)
    Bsig_dual = odd_signature_operator(K_dual, Gamma)
    n_e = K.n_even
    Gram = np.zeros((2 * n_e, 2 * n_e), dtype=complex)
    Gram[:n_e, :n_e] = b.B_even
    Gram[n_e:, n_e:] = b.B_odd
    Bsig_sharp = np.linalg.solve(Gram, Bsig.T @ Gram)
    r_sig = _rel(Bsig_sharp - Bsig_dual, Bsig_sharp)
    r_lap = max(
        _rel(Ld.delta_even - Go @ L.delta_odd @ Ge, Ld.delta_even),
        _rel(Ld.delta_odd - Ge @ L.delta_even @ Go, Ld.delta_odd),
    )
    return {
        "gamma_squared": Gamma.involution_residual(),
        "adjoint_primal": r_primal,
        "adjoint_dual": r_dual,
        "signature": r_sig,
        "laplacian": r_lap,
    }


def complement_torsion(K, b, a, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Log of ``det'(even)^-1 det'(odd)`` beyond the window at ``a``."""
    W = spectral_window(K, b, a, cluster_tol)
    dp = complement_det_primes(K, b, W)
    return -dp["even"] + dp["odd"]


def dual_torsion_check(K, b, Gamma, a=0.0, K_dual=None, tol_identity=1e-10, tol=1e-9, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Chirality identities plus equality of the complement factors of the primal and dual complexes.

    When ``K_dual`` is omitted it is built as ``Gamma d# Gamma``, in which case
    the first identity holds by construction and only the others are tested.
    """
    Gamma.check()
    if K_dual is None:
        K_dual = dual_complex(K, b, Gamma)
    res = chirality_residuals(K, b, Gamma, K_dual)
    primal = complement_torsion(K, b, a, cluster_tol)
    dual = complement_torsion(K_dual, b, a, cluster_tol)
    err = relative_log_error(primal, dual)
    worst = max(res.values())
    return CheckReport(
        "duality",
        bool(worst < tol_identity and err < tol),
        float(max(err, worst)),
        tol,
        {"residuals": res, "primal": primal, "dual": dual, "product_discrepancy": float(err)},
    )


def cm_window_independence_check(K, Gamma, thresholds, basis=None, tol=1e-9, cluster_tol=DEFAULT_CLUSTER_TOL):
    if basis is None:
        basis = cohomology_basis(K)
    values = {}
    rejected = []
    for a in thresholds:
        v = cappell_miller_torsion(K, Gamma, a, basis, cluster_tol)
        if v.boundary_ambiguous:
            rejected.append(float(a))
            continue
        values[float(a)] = v.log_value
    logs = list(values.values())
    err = max((relative_log_error(x, y) for x in logs for y in logs), default=0.0)
    return CheckReport("cm_window_independence", bool(err < tol and values), float(err), tol,
                       {"values": values, "rejected": rejected})


def flat_thresholds(K, Gamma, count=3, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Admissible thresholds for the spectrum of ``Delta_flat``."""
    Le, Lo = flat_laplacians(K, Gamma)
    ev = np.concatenate([np.linalg.eigvals(Le), np.linalg.eigvals(Lo)]) if Le.size else np.zeros(0)
    moduli = np.sort(np.abs(ev))
    scale = max(1.0, float(moduli.max(initial=0)))
    top = float(moduli.max(initial=0))
    pos = np.unique(moduli[moduli > 10 * cluster_tol * scale])
    mids = []
    if pos.size > 1:
        gaps = np.diff(pos) / pos[1:]
        for i in np.argsort(-gaps):
            mid = float((pos[i] + pos[i + 1]) / 2)
            if boundary_margin(moduli, mid, scale, 1e-6):
                mids.append(mid)
    return [0.0] + sorted(mids[: max(count - 2, 0)]) + [2.0 * top + 1.0]


def validate_pair(K, b):
    if not isinstance(K, GradedComplex) or not isinstance(b, BilinearStructure):
        raise DimensionError("expected a GradedComplex and a BilinearStructure")
    return require_valid(K, b)
