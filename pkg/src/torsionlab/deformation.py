"""One-parameter deformations and finite-difference checks of the variation formulas.

Along a path ``b_u`` of forms on a fixed complex, with ``alpha = B_u^-1 dB_u/du``
and a fixed cohomology basis,

    d/du log(window factor)  =  sum_k (-1)^k Tr(alpha Q_k)
    d/du log(det'_ev^-1 det'_odd)  =  sum_k (-1)^k Tr(alpha Pi_k)

where ``Q_k`` projects onto the window and ``Pi_k = 1 - Q_k``. The sum is the
supertrace of ``alpha``, which vanishes per Fourier mode on the torus.

A flux path ``d_v = eps_v d eps_v^-1`` with ``eps_v = exp(v beta)``, fixed form
and transported basis ``eps_v h`` is equivalent to the form path
``eps_v^T b eps_v``, whose ``alpha`` is ``beta + beta#``. Because ``Q`` and
``Pi`` are b-self-adjoint, both traces pick up a factor 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .complex import BilinearStructure, cohomology_basis, require_valid, spectral_window, symmetrize
from .exceptions import EigenvalueCrossingError, ValidationError
from .linalg import DEFAULT_CLUSTER_TOL
from .parallel import parallel_map
from .torsion import CheckReport, _jsonable, cappell_miller_torsion, torsion

NOISE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class DeformationPath:
    """A family ``u -> (K_u, b_u)`` with its generator and a transported cohomology basis.

    ``alpha(u)`` is set for metric and bilinear paths; ``beta`` for flux paths.
    """

    kind: str
    family: Callable
    basis: Callable
    alpha: Callable = None
    beta: tuple = None
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("metric", "bilinear", "flux"):
            raise ValueError(f"unknown path kind {self.kind!r}")

    def at(self, u):
        return self.family(u)


def _check_self_adjoint(B, S, name):
    BS = B @ S
    res = np.abs(BS - BS.T).max(initial=0)
    if res > 1e-10 * max(1.0, np.abs(BS).max(initial=0)):
        raise ValidationError(f"{name} generator is not b-self-adjoint (B S not symmetric, residual {res:.3e})")


def bilinear_path(K, b, S_even, S_odd, basis=None):
    """``b_u = b exp(u S)``; ``S`` must be b-self-adjoint so that ``b_u`` stays symmetric."""
    S_even = np.asarray(S_even, dtype=complex)
    S_odd = np.asarray(S_odd, dtype=complex)
    _check_self_adjoint(b.B_even, S_even, "even")
    _check_self_adjoint(b.B_odd, S_odd, "odd")
    h = cohomology_basis(K) if basis is None else basis

    def family(u):
        return K, BilinearStructure(
            symmetrize(b.B_even @ scipy.linalg.expm(u * S_even)), symmetrize(b.B_odd @ scipy.linalg.expm(u * S_odd))
        )

    return DeformationPath("bilinear", family, lambda u: h, lambda u: (S_even, S_odd))


def random_bilinear_generator(rng, b, spread=0.3):
    """``S = B^-1 T`` with ``T`` random complex symmetric, hence b-self-adjoint."""
    out = []
    for B in (b.B_even, b.B_odd):
        n = B.shape[0]
        T = spread * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / max(1.0, np.sqrt(n))
        out.append(np.linalg.solve(B, (T + T.T) / 2))
    return tuple(out)


def flux_path(K, b, gauge, basis=None):
    """``d_v = eps_v d eps_v^-1`` with the form fixed and the basis carried by ``eps_v``."""
    h = cohomology_basis(K) if basis is None else basis

    def family(v):
        Ee, Eo = gauge.epsilon(v)
        return K.conjugate_by(Ee, Eo), b

    def transported(v):
        Ee, Eo = gauge.epsilon(v)
        return Ee @ h[0], Eo @ h[1]

    return DeformationPath("flux", family, transported, beta=(gauge.beta_even, gauge.beta_odd))


def torus_metric_alpha(model, rates, n_modes):
    """Diagonal ``alpha`` of ``s_i(u) = s_i exp(u g_i)`` on one block of ``n_modes`` modes."""
    from .models.torus import EVEN_FORMS, ODD_FORMS

    g = np.asarray(rates, dtype=float)
    r = model.rank

    def coeff(forms):
        vals = [g.sum() - 2 * sum(g[i] for i in I) for I in forms]
        return np.kron(np.eye(n_modes), np.kron(np.diag(vals), np.eye(r)))

    return coeff(EVEN_FORMS).astype(complex), coeff(ODD_FORMS).astype(complex)


def torus_metric_path(model, rates, pair=None):
    """Metric path ``s_i(u) = s_i exp(u g_i)`` on one pair block (default: the zero mode)."""
    from .models.torus import build_block

    pair = pair if pair is not None else ((0, 0, 0),)
    g = np.asarray(rates, dtype=float)
    base = np.asarray(model.scales)
    K0 = build_block(model, pair).complex
    h = cohomology_basis(K0)
    alpha = torus_metric_alpha(model, g, len(pair))

    def family(u):
        blk = build_block(model.replace(scales=tuple(base * np.exp(u * g))), pair)
        return blk.complex, blk.form

    return DeformationPath(
        "metric", family, lambda u: h, lambda u: alpha, description={"pair": pair, "rates": list(g)}
    )


def torus_bilinear_path(model, S, pair=None):
    """``b_E(u) = b_E exp(u S)`` on one pair block; ``b_E S`` must be symmetric."""
    from .models.torus import build_block

    S = np.asarray(S, dtype=complex)
    _check_self_adjoint(model.b_E, S, "fibre")
    pair = pair if pair is not None else ((0, 0, 0),)
    K0 = build_block(model, pair).complex
    h = cohomology_basis(K0)
    a = np.kron(np.eye(4 * len(pair)), S)

    def family(u):
        bE = symmetrize(model.b_E @ scipy.linalg.expm(u * S))
        blk = build_block(model.replace(b_E=bE), pair)
        return blk.complex, blk.form

    return DeformationPath("bilinear", family, lambda u: h, lambda u: (a, a), description={"pair": pair})


def alpha_operator(path, u=0.0):
    """``alpha = Gram_u^-1 dGram_u/du`` per parity (metric and bilinear paths)."""
    if path.alpha is None:
        raise ValueError("alpha is defined for metric and bilinear paths only")
    return path.alpha(u)


def gram_alpha_fd(path, u=0.0, h=1e-5):
    """Central-difference estimate of ``Gram_u^-1 dGram_u/du``; an oracle for :func:`alpha_operator`."""
    _, bp = path.at(u + h)
    _, bm = path.at(u - h)
    _, b0 = path.at(u)
    return tuple(
        np.linalg.solve(b0.B(p), (bp.B(p) - bm.B(p)) / (2 * h)) for p in ("even", "odd")
    )


def supertrace(pair):
    return complex(np.trace(pair[0]) - np.trace(pair[1]))


def _wrap(z):
    """Log difference with the imaginary part brought into ``(-pi, pi]``."""
    z = complex(z)
    return complex(z.real, math.remainder(z.imag, 2 * math.pi))


def _components(tv):
    c = tv.components
    return {
        "window": c["window"],
        "det_prime": -c["det_prime_even"] + c["det_prime_odd"],
        "total": tv.log_value,
    }


def evaluate(path, u, a, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Torsion at ``u`` with the path's basis, plus the window used."""
    K, b = path.at(u)
    require_valid(K, b)
    W = spectral_window(K, b, a, cluster_tol)
    return torsion(K, b, a, path.basis(u), cluster_tol, window=W), W


def check_no_crossing(path, a, us, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Raise if an eigenvalue modulus reaches ``a`` at one of the samples ``us``.

    The window dimensions are tracked from sample to sample; a change, or a
    sample whose threshold is ambiguous, means some modulus crossed ``a``.
    """
    if a <= 0:
        return
    ref = None
    for u in us:
        K, b = path.at(u)
        W = spectral_window(K, b, a, cluster_tol)
        if W.boundary_ambiguous:
            raise EigenvalueCrossingError(f"an eigenvalue modulus sits at the threshold {a} near u = {u}", u)
        dims = W.window_dims()
        if ref is not None and dims != ref:
            raise EigenvalueCrossingError(f"window dimensions change from {ref} to {dims} near u = {u}", u)
        ref = dims


def predicted_derivatives(path, W, u):
    """Trace-formula predictions for the window and det' factors."""
    if path.kind == "flux":
        ops, factor = path.beta, 2.0
    else:
        ops, factor = path.alpha(u), 1.0
    win = factor * (np.trace(ops[0] @ W.Q_even) - np.trace(ops[1] @ W.Q_odd))
    dp = factor * (np.trace(ops[0] @ W.Pi_even) - np.trace(ops[1] @ W.Pi_odd))
    return {"window": complex(win), "det_prime": complex(dp), "total": complex(win + dp)}


@dataclass(frozen=True)
class VariationReport:
    """Finite-difference derivative of one log-component against its trace prediction."""

    component: str
    kind: str
    u: float
    threshold: float
    steps: tuple
    observed: tuple
    predicted: complex
    discrepancies: tuple
    tolerances: tuple
    second_order: bool
    passed: bool

    def as_dict(self):
        return _jsonable(
            {
                "component": self.component,
                "kind": self.kind,
                "u": self.u,
                "threshold": self.threshold,
                "steps": list(self.steps),
                "observed": list(self.observed),
                "predicted": self.predicted,
                "discrepancies": list(self.discrepancies),
                "tolerances": list(self.tolerances),
                "second_order": self.second_order,
                "passed": self.passed,
            }
        )


def _second_order(discs, steps, noise=NOISE_FLOOR):
    """Each tenfold step reduction cuts the discrepancy 50-fold, unless it is already at the noise floor."""
    ok = True
    for (d1, h1), (d2, h2) in zip(zip(discs, steps), zip(discs[1:], steps[1:])):
        ratio = (h1 / h2) ** 2 / 2
        if d2 > noise and d2 > d1 / ratio:
            ok = False
    return ok


def _finite_differences(path, u, a, steps, cluster_tol):
    out = []
    for h in steps:
        plus, _ = evaluate(path, u + h, a, cluster_tol)
        minus, _ = evaluate(path, u - h, a, cluster_tol)
        cp, cm = _components(plus), _components(minus)
        out.append({k: _wrap(cp[k] - cm[k]) / (2 * h) for k in cp})
    return out


def variation_reports(path, u=0.0, a=0.0, steps=(1e-3, 1e-4), tolerances=(1e-5, 1e-7), cluster_tol=DEFAULT_CLUSTER_TOL):
    """Reports for the window, det' and total components at ``u``."""
    hmax = max(steps)
    check_no_crossing(path, a, [u - hmax, u - hmax / 2, u, u + hmax / 2, u + hmax], cluster_tol)
    _, W = evaluate(path, u, a, cluster_tol)
    pred = predicted_derivatives(path, W, u)
    fds = _finite_differences(path, u, a, steps, cluster_tol)
    reports = {}
    for comp in ("window", "det_prime", "total"):
        obs = tuple(fd[comp] for fd in fds)
        discs = tuple(float(abs(o - pred[comp])) for o in obs)
        order = _second_order(discs, steps)
        ok = all(d < t for d, t in zip(discs, tolerances)) and order
        reports[comp] = VariationReport(comp, path.kind, float(u), float(a), tuple(steps), obs, pred[comp], discs,
                                        tuple(tolerances), order, ok)
    return reports


def window_variation_check(path, u=0.0, a=0.0, steps=(1e-3, 1e-4), tolerances=(1e-5, 1e-7), cluster_tol=DEFAULT_CLUSTER_TOL):
    """Window factor derivative against ``sum (-1)^k Tr(alpha Q_k)`` (``2 Tr(beta Q)`` for flux).

    Raises
    ------
    EigenvalueCrossingError
        If an eigenvalue modulus crosses ``a`` within the sampled stencil.
    """
    return variation_reports(path, u, a, steps, tolerances, cluster_tol)["window"]


def detprime_variation_check(path, u=0.0, a=0.0, steps=(1e-3, 1e-4), tolerances=(1e-5, 1e-7), cluster_tol=DEFAULT_CLUSTER_TOL):
    """Derivative of ``log(det'_ev^-1 det'_odd)`` against ``sum (-1)^k Tr(alpha Pi_k)``."""
    return variation_reports(path, u, a, steps, tolerances, cluster_tol)["det_prime"]


def sum_rule_check(path, u=0.0, a=0.0, h=1e-4, tol=1e-6, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Window and det' derivatives add up to the derivative of ``log tau``."""
    fd = _finite_differences(path, u, a, (h,), cluster_tol)[0]
    err = abs(fd["window"] + fd["det_prime"] - fd["total"])
    return CheckReport("sum_rule", bool(err < tol), float(err), tol, {"u": u, "threshold": a, **fd})


def path_scan(path, samples, a=0.0, h=1e-4, cluster_tol=DEFAULT_CLUSTER_TOL, workers=None):
    """Rows ``(u, tau, predicted d log tau, observed d log tau)`` for plotting."""

    def row(u):
        tv, W = evaluate(path, u, a, cluster_tol)
        pred = predicted_derivatives(path, W, u)["total"]
        obs = _finite_differences(path, u, a, (h,), cluster_tol)[0]["total"]
        return {"u": float(u), "tau": tv.value, "log_tau": tv.log_value, "predicted": pred, "observed": obs}

    return parallel_map(row, list(samples), workers)


def total_invariance_scan(model, kind, generator, samples=None, a=0.0, tol=1e-8, str_tol=1e-12,
                          cluster_tol=DEFAULT_CLUSTER_TOL, include_cm=True, workers=None):
    """Torsion of a torus model along a metric or bilinear path, block by block.

    ``generator`` is the triple of log-scale rates (metric) or the fibre matrix
    ``S`` (bilinear). The cohomology basis depends only on the differentials,
    which do not move, so the same basis is used at every sample.
    """
    from .models.torus import block_cohomology_bases, torus_blocks

    samples = list(np.linspace(0.0, 1.0, 5) if samples is None else samples)
    blocks = torus_blocks(model)
    bases = block_cohomology_bases(model, blocks)
    if kind == "metric":
        rates = np.asarray(generator, dtype=float)
        base = np.asarray(model.scales)
        moved = lambda u: model.replace(scales=tuple(base * np.exp(u * rates)))  # noqa: E731
        alphas = [torus_metric_alpha(model, rates, len(B.modes)) for B in blocks]
    elif kind == "bilinear":
        S = np.asarray(generator, dtype=complex)
        _check_self_adjoint(model.b_E, S, "fibre")
        moved = lambda u: model.replace(b_E=symmetrize(model.b_E @ scipy.linalg.expm(u * S)))  # noqa: E731
        alphas = [(np.kron(np.eye(4 * len(B.modes)), S),) * 2 for B in blocks]
    else:
        raise ValueError("kind must be 'metric' or 'bilinear'")
    str_res = max(abs(supertrace(al)) for al in alphas)
    mode_str = max(
        abs(supertrace((al[0][i * n:(i + 1) * n, i * n:(i + 1) * n], al[1][i * n:(i + 1) * n, i * n:(i + 1) * n])))
        for al, B in zip(alphas, blocks)
        for n in [4 * model.rank]
        for i in range(len(B.modes))
    )

    def sample(u):
        from .models.torus import torus_blocks as tb

        total, cm_total = 0j, 0j
        for blk, h in zip(tb(moved(u)), bases):
            require_valid(blk.complex, blk.form)
            total += torsion(blk.complex, blk.form, a, h, cluster_tol).log_value
            if include_cm:
                cm_total += cappell_miller_torsion(blk.complex, blk.chirality, a, h, cluster_tol).log_value
        return total, cm_total

    vals = parallel_map(sample, samples, workers)
    logs = [v[0] for v in vals]
    cms = [v[1] for v in vals]
    dev = max(abs(np.expm1(_wrap(x - logs[0]))) for x in logs)
    cm_dev = max(abs(np.expm1(_wrap(x - cms[0]))) for x in cms) if include_cm else 0.0
    passed = bool(dev < tol and cm_dev < tol and max(str_res, mode_str) < str_tol)
    return CheckReport(
        "total_invariance",
        passed,
        float(max(dev, cm_dev)),
        tol,
        {
            "kind": kind,
            "samples": [float(u) for u in samples],
            "log_tau": logs,
            "log_cm": cms if include_cm else None,
            "tau_deviation": float(dev),
            "cm_deviation": float(cm_dev),
            "supertrace_per_mode": float(mode_str),
            "supertrace_per_block": float(str_res),
        },
    )


def flux_variation_check(path, u=0.0, a=0.0, steps=(1e-3, 1e-4), tolerances=(1e-5, 1e-7), cluster_tol=DEFAULT_CLUSTER_TOL):
    """Window and det' derivatives along a flux path, plus the factor-2 comparison.

    ``factor`` is the observed window derivative divided by the single trace
    ``sum (-1)^k Tr(beta Q_k)``; it is reported only when that trace is not
    negligible.
    """
    if path.kind != "flux":
        raise ValueError("flux_variation_check needs a flux path")
    reps = variation_reports(path, u, a, steps, tolerances, cluster_tol)
    _, W = evaluate(path, u, a, cluster_tol)
    be, bo = path.beta
    single = complex(np.trace(be @ W.Q_even) - np.trace(bo @ W.Q_odd))
    factor = complex(reps["window"].observed[-1] / single) if abs(single) > 1e-6 else None
    passed = reps["window"].passed and reps["det_prime"].passed and (
        factor is None or abs(factor - 2) < 1e-4
    )
    return CheckReport(
        "flux_variation",
        bool(passed),
        float(max(reps["window"].discrepancies[0], reps["det_prime"].discrepancies[0])),
        tolerances[0],
        {"window": reps["window"].as_dict(), "det_prime": reps["det_prime"].as_dict(),
         "single_trace": single, "factor": factor},
    )


def flux_endpoint_check(K, b, gauge, a=0.0, nodes=8, tol=1e-6, cluster_tol=DEFAULT_CLUSTER_TOL):
    """Integrate the predicted derivatives over ``v in [0, 1]`` by Gauss-Legendre.

    The window integral is compared with the change of the window factor along
    the path, and the total integral (which is ``2 str beta``) with the exact
    gauge identity ``log tau(K_1, h_1) + 2 log T - log tau(K_0, h_0)``, where
    ``T`` is the transport determinant of ``eps_B`` on cohomology.
    """
    from .models.gauge import gauge_transform

    path = flux_path(K, b, gauge)
    check_no_crossing(path, a, np.linspace(0, 1, 4 * nodes + 1), cluster_tol)
    x, w = np.polynomial.legendre.leggauss(nodes)
    v = (x + 1) / 2
    w = w / 2
    win_int, tot_int = 0j, 0j
    for vi, wi in zip(v, w):
        _, W = evaluate(path, vi, a, cluster_tol)
        p = predicted_derivatives(path, W, vi)
        win_int += wi * p["window"]
        tot_int += wi * p["total"]
    start, _ = evaluate(path, 0.0, a, cluster_tol)
    end, _ = evaluate(path, 1.0, a, cluster_tol)
    win_change = _wrap(end.components["window"] - start.components["window"])
    g = gauge_transform(K, b, gauge, basis=path.basis(0.0))
    tau1 = torsion(g.complex, b, a, g.basis_target, cluster_tol)
    exact = _wrap(tau1.log_value + 2 * g.transport_log - start.log_value)
    err = max(abs(win_int - win_change), abs(tot_int - exact))
    return CheckReport(
        "flux_endpoint",
        bool(err < tol),
        float(err),
        tol,
        {"window_integral": win_int, "window_change": win_change, "total_integral": tot_int,
         "gauge_identity_log": exact, "transport_log": g.transport_log},
    )
