import warnings

import numpy as np
import pytest

from conftest import jordan_matrix
from torsionlab.complex import (
    BilinearStructure,
    GradedComplex,
    admissible_thresholds,
    b_adjoint,
    cohomology_basis,
    cohomology_dims,
    require_valid,
    restrict_to_window,
    spectral_window,
    validate,
)
from torsionlab.exceptions import DimensionError, NonDegeneracyError, ValidationError, WindowBoundaryWarning
from torsionlab.models.random import random_complex, random_form


def test_zero_complex_with_identity_forms_is_valid():
    K = GradedComplex.zero(3, 2)
    assert validate(K, BilinearStructure.identity(3, 2)).passed


def test_non_periodic_differential_fails_with_residual_one():
    K = GradedComplex([[1.0]], [[1.0]])
    diag = validate(K)
    assert not diag.passed
    assert diag.d_squared_residual == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        require_valid(K)


def test_shape_mismatch_is_dimension_error():
    with pytest.raises(DimensionError):
        GradedComplex(np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        validate(GradedComplex.zero(2, 2), BilinearStructure.identity(3, 2))


def test_asymmetric_form_rejected():
    with pytest.raises(ValidationError):
        BilinearStructure(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(1))


def test_badly_conditioned_form_fails_validation():
    b = BilinearStructure(np.diag([1.0, 1e-14]), np.eye(1))
    assert not validate(GradedComplex.zero(2, 1), b).passed


def test_arrays_are_read_only():
    K = GradedComplex.zero(2, 2)
    with pytest.raises(ValueError):
        K.d_even[0, 0] = 1


def test_adjoint_for_identity_form_is_transpose(rng):
    K = random_complex(rng, dims=(4, 3))
    L = b_adjoint(K, BilinearStructure.identity(4, 3))
    assert np.allclose(L.d_sharp_even, K.d_even.T)
    assert np.allclose(L.d_sharp_odd, K.d_odd.T)


def test_scaling_odd_form_scales_even_adjoint(rng):
    K = random_complex(rng, dims=(4, 3))
    b = random_form(rng, K)
    b2 = BilinearStructure(b.B_even, 3.0 * b.B_odd)
    assert np.allclose(b_adjoint(K, b2).d_sharp_even, 3.0 * b_adjoint(K, b).d_sharp_even)


def test_adjoint_defining_identity(rng):
    K = random_complex(rng, dims=(4, 3))
    b = random_form(rng, K)
    L = b_adjoint(K, b)
    for _ in range(20):
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        y = rng.normal(size=3) + 1j * rng.normal(size=3)
        lhs = (K.d_even @ x) @ b.B_odd @ y
        rhs = x @ b.B_even @ (L.d_sharp_even @ y)
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(lhs))


def test_laplacian_commutes_with_d(instances):
    for K, b in instances:
        L = b_adjoint(K, b)
        scale = max(1.0, np.abs(L.delta_even).max(initial=0))
        assert np.abs(K.d_even @ L.delta_even - L.delta_odd @ K.d_even).max(initial=0) < 1e-10 * scale


def test_singular_form_raises_in_adjoint():
    K = GradedComplex.zero(2, 1)
    with pytest.raises(NonDegeneracyError):
        b_adjoint(K, BilinearStructure(np.zeros((2, 2)), np.eye(1)))


def _diag_laplacian_complex():
    # d_even = [[2, 0]] gives delta_even = diag(4, 0)
    K = GradedComplex(np.array([[2.0, 0.0]]), np.zeros((2, 1)))
    return K, BilinearStructure.identity(2, 1)


def test_window_at_zero_projects_on_kernel_eigenspace():
    K, b = _diag_laplacian_complex()
    W = spectral_window(K, b, 0.0)
    assert np.allclose(W.Q_even, np.diag([0.0, 1.0]))
    assert np.allclose(W.Pi_even, np.diag([1.0, 0.0]))


def test_window_above_spectrum_is_everything():
    K, b = _diag_laplacian_complex()
    W = spectral_window(K, b, 5.0)
    assert np.allclose(W.Q_even, np.eye(2))
    assert np.allclose(W.Pi_even, 0)


def test_window_projector_identities(instances):
    for K, b in instances[:15]:
        a = admissible_thresholds(spectral_window(K, b, 0.0))[1]
        W = spectral_window(K, b, a)
        L = b_adjoint(K, b)
        for p in ("even", "odd"):
            Q = W.Q(p)
            assert np.abs(Q @ Q - Q).max(initial=0) < 1e-9
            assert np.abs(Q @ W.Pi(p)).max(initial=0) < 1e-9
            D = L.delta(p)
            assert np.abs(Q @ D - D @ Q).max(initial=0) < 1e-8 * max(1, np.abs(D).max(initial=0))
        assert W.commutation_residual < 1e-8 * K.scale()


def test_window_and_complement_are_b_orthogonal(instances):
    for K, b in instances[:15]:
        a = admissible_thresholds(spectral_window(K, b, 0.0))[1]
        W = spectral_window(K, b, a)
        for p in ("even", "odd"):
            X, Y = W.basis(p, "window"), W.basis(p, "complement")
            if X.size and Y.size:
                assert np.abs(X.T @ b.B(p) @ Y).max() < 1e-9 * np.abs(b.B(p)).max()


def test_jordan_laplacian_window_rank_is_algebraic_multiplicity(rng):
    # a Laplacian with a nilpotent Jordan block at 0: form pulled back so the
    # decomposition sees a non-diagonalizable operator
    J = jordan_matrix(rng, [(0.0, 2), (3.0, 1)])
    from torsionlab.linalg import generalized_eigenspaces

    dec = generalized_eigenspaces(J, cluster_tol=1e-6)
    zero = [i for i, c in enumerate(dec.clusters) if abs(c.eigenvalue) < 1e-6]
    P = dec.projector(zero)
    assert np.linalg.matrix_rank(P, tol=1e-8) == 2
    assert dec.clusters[zero[0]].geometric_multiplicity == 1


def test_threshold_on_eigenvalue_warns():
    K, b = _diag_laplacian_complex()
    with pytest.warns(WindowBoundaryWarning):
        W = spectral_window(K, b, 4.0)
    assert W.boundary_ambiguous


def test_negative_threshold_rejected():
    K, b = _diag_laplacian_complex()
    with pytest.raises(ValueError):
        spectral_window(K, b, -1.0)


def test_admissible_thresholds_avoid_spectrum(instances):
    for K, b in instances:
        W = spectral_window(K, b, 0.0)
        th = admissible_thresholds(W)
        assert len(th) == 3 and th[0] == 0
        with warnings.catch_warnings():
            warnings.simplefilter("error", WindowBoundaryWarning)
            for a in th:
                spectral_window(K, b, a)


def test_cohomology_of_zero_complex_is_everything():
    assert cohomology_dims(GradedComplex.zero(3, 2)) == (3, 2)


def test_acyclic_complex_has_no_cohomology():
    K = GradedComplex(np.array([[2.0, 1.0], [0.0, 1.0]]), np.zeros((2, 2)))
    assert cohomology_dims(K) == (0, 0)


def test_euler_characteristic(instances):
    for K, _ in instances:
        he, ho = cohomology_dims(K)
        assert K.n_even - K.n_odd == he - ho


def test_cohomology_representatives_are_cocycles(instances):
    for K, _ in instances:
        he, ho = cohomology_basis(K)
        assert np.abs(K.d_even @ he).max(initial=0) < 1e-10 * K.scale()
        assert np.abs(K.d_odd @ ho).max(initial=0) < 1e-10 * K.scale()


def test_restriction_of_full_window_is_whole_complex(instances):
    K, b = instances[0]
    top = admissible_thresholds(spectral_window(K, b, 0.0))[-1]
    Kw, _ = restrict_to_window(K, b, spectral_window(K, b, top), "window")
    assert Kw.dims() == K.dims()
    assert cohomology_dims(Kw) == cohomology_dims(K)


def test_zero_window_of_acyclic_complex_is_empty():
    K = GradedComplex(np.array([[2.0]]), np.zeros((1, 1)))
    b = BilinearStructure.identity(1, 1)
    Kw, _ = restrict_to_window(K, b, spectral_window(K, b, 0.0), "window")
    assert Kw.dims() == (0, 0)


def test_window_carries_the_cohomology_and_complement_is_acyclic(instances):
    for K, b in instances:
        W = spectral_window(K, b, 0.0)
        Kw, _ = restrict_to_window(K, b, W, "window")
        Kc, _ = restrict_to_window(K, b, W, "complement")
        # subcomplex ranks are judged against the parent scale
        assert cohomology_dims(Kw, scale=K.scale()) == cohomology_dims(K)
        assert cohomology_dims(Kc, scale=K.scale()) == (0, 0)
        h = cohomology_basis(K)
        for p, reps in zip(("even", "odd"), h):
            # the window projection of a basis of H stays independent
            moved = W.Q(p) @ reps
            assert np.linalg.matrix_rank(moved, tol=1e-8) == reps.shape[1]
