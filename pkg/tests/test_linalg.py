import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import jordan_matrix
from torsionlab.exceptions import DimensionError
from torsionlab.linalg import (
    charpoly,
    coimage_basis,
    determinant,
    generalized_eigenspaces,
    image_basis,
    kernel_basis,
    log_determinant,
    newton_root_moduli,
    nonzero_spectrum_product,
    numerical_rank,
    relative_log_error,
)


def test_empty_determinant_is_one():
    assert determinant(np.zeros((0, 0))) == 1
    assert log_determinant(np.zeros((0, 0))) == 0


def test_log_determinant_matches_det(rng):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert relative_log_error(log_determinant(A), np.log(np.linalg.det(A))) < 1e-12


def test_log_determinant_of_large_diagonal_does_not_overflow():
    A = np.diag(np.full(400, 1e3))
    assert log_determinant(A).real == pytest.approx(400 * np.log(1e3))


def test_singular_log_determinant():
    assert log_determinant(np.zeros((2, 2))).real == -np.inf


def test_rejects_non_square_and_nan():
    with pytest.raises(DimensionError):
        determinant(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        determinant(np.array([[np.nan]]))


def test_kernel_image_coimage(rng):
    A = (rng.normal(size=(5, 2)) @ rng.normal(size=(2, 7))).astype(complex)
    Z = kernel_basis(A)
    assert Z.shape == (7, 5)
    assert np.abs(A @ Z).max() < 1e-12
    assert image_basis(A).shape == (5, 2)
    X = coimage_basis(A)
    assert numerical_rank(A @ X) == 2
    assert numerical_rank(A) == 2


def test_absolute_scale_treats_roundoff_block_as_zero():
    tiny = np.full((1, 4), 1e-16)
    assert numerical_rank(tiny) == 1
    assert numerical_rank(tiny, scale=1.0) == 0
    assert kernel_basis(tiny, scale=1.0).shape == (4, 4)


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_charpoly_matches_numpy(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    ours = charpoly(A)[::-1]
    assert np.abs(ours - np.poly(A)).max() < 1e-10 * np.abs(np.poly(A)).max()


def test_newton_polygon_counts_exact_zeros():
    # x^2 (x - 2)(x - 3) in ascending order
    c = np.array([0, 0, 6, -5, 1], dtype=complex)
    j0, moduli = newton_root_moduli(c)
    assert j0 == 2
    assert len(moduli) == 2


def test_nonzero_product_examples():
    assert nonzero_spectrum_product(np.diag([0.0, 2.0, 3.0])).value == pytest.approx(6)
    N = np.diag(np.ones(3), 1)
    r = nonzero_spectrum_product(N)
    assert r.value == pytest.approx(1) and r.zero_count == 4
    assert nonzero_spectrum_product(np.zeros((3, 3))).value == 1


def test_nonzero_product_equals_det_when_invertible(rng):
    A = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7)) + 3 * np.eye(7)
    r = nonzero_spectrum_product(A)
    assert r.zero_count == 0
    assert relative_log_error(r.log_value, log_determinant(A)) < 1e-10


def test_nonzero_product_with_external_scale_drops_roundoff():
    A = np.full((2, 2), 1e-17)
    assert nonzero_spectrum_product(A).zero_count < 2
    assert nonzero_spectrum_product(A, scale=1.0).zero_count == 2


def test_generalized_eigenspaces_of_jordan_block(rng):
    A = jordan_matrix(rng, [(2.0, 3), (-1.0 + 1j, 2)])
    dec = generalized_eigenspaces(A, cluster_tol=1e-3)
    assert sorted(dec.multiplicities.tolist()) == [2, 3]
    for c in dec.clusters:
        N = np.linalg.matrix_power(A - c.eigenvalue * np.eye(5), c.nilpotency_order)
        assert np.abs(N @ c.basis).max() < 1e-6
        assert c.geometric_multiplicity == 1
    assert np.abs(dec.projector(range(len(dec.clusters))) - np.eye(5)).max() == 0


def test_projectors_are_complementary_idempotents(rng):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    dec = generalized_eigenspaces(A)
    P = dec.projector([0, 1])
    assert np.abs(P @ P - P).max() < 1e-10
    assert np.abs(P @ A - A @ P).max() < 1e-10
    Q = dec.projector(range(2, len(dec.clusters)))
    assert np.abs(P + Q - np.eye(6)).max() < 1e-10


def _companion_multiplicities(A, radius):
    c = charpoly(A)[::-1]
    roots = np.linalg.eigvals(scipy.linalg.companion(c)) if len(c) > 1 else np.zeros(0)
    from torsionlab.linalg import _single_linkage

    labels = _single_linkage(roots, radius)
    return sorted(np.bincount(np.unique(labels, return_inverse=True)[1]).tolist())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_multiplicities_match_companion_roots(seed):
    g = np.random.default_rng(seed)
    n_eigs = int(g.integers(1, 5))
    values = (g.permutation(6)[:n_eigs] + 1.0) * np.exp(1j * g.uniform(0, 2 * np.pi, n_eigs))
    spec = []
    for lam in values:
        for _ in range(int(g.integers(1, 3))):
            spec.append((lam, int(g.integers(1, 3))))
    n = sum(m for _, m in spec)
    if n > 10:
        spec = spec[:3]
    A = jordan_matrix(g, spec)
    dec = generalized_eigenspaces(A, cluster_tol=1e-3)
    ref = _companion_multiplicities(A, 1e-3 * dec.scale)
    assert sorted(dec.multiplicities.tolist()) == ref
