"""Seeded random complexes, forms, chiralities and gauges for property checks."""

import numpy as np

from ..complex import BilinearStructure, GradedComplex
from ..torsion import ChiralityData


def _cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def near_identity(rng, n, spread=0.5):
    """Random complex matrix ``I + spread * G / sqrt(n)``; well conditioned for spread < 1."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.eye(n) + spread * _cplx(rng, n, n) / np.sqrt(2 * n)


def random_symmetric_form(rng, n, spread=0.4):
    """Complex symmetric ``R R^T`` with ``R`` near the identity."""
    R = near_identity(rng, n, spread)
    B = R @ R.T
    return (B + B.T) / 2


def random_complex(rng, max_dim=16, dims=None, ranks=None, spread=0.5):
    """Random Z2-graded complex of total dimension at most ``max_dim``.

    Built in adapted coordinates (coboundaries, harmonic part, lifts) and then
    conjugated by random near-identity changes of basis, so ``d^2 = 0`` holds to
    rounding.
    """
    if dims is None:
        n_even = int(rng.integers(1, max_dim))
        n_odd = int(rng.integers(1, max_dim - n_even + 1))
    else:
        n_even, n_odd = dims
    if ranks is None:
        r0 = int(rng.integers(0, min(n_even, n_odd) + 1))
        r1 = int(rng.integers(0, min(n_even - r0, n_odd - r0) + 1))
    else:
        r0, r1 = ranks
    D0 = np.zeros((n_odd, n_even), dtype=complex)
    D1 = np.zeros((n_even, n_odd), dtype=complex)
    # even coords: [im d_odd (r1) | harmonic | lift of im d_even (r0)]
    # odd coords:  [im d_even (r0) | harmonic | lift of im d_odd (r1)]
    if r0:
        D0[:r0, n_even - r0:] = 2.0 * near_identity(rng, r0, spread)
    if r1:
        D1[:r1, n_odd - r1:] = 2.0 * near_identity(rng, r1, spread)
    Se, So = near_identity(rng, n_even, spread), near_identity(rng, n_odd, spread)
    d_even = So @ D0 @ np.linalg.inv(Se)
    d_odd = Se @ D1 @ np.linalg.inv(So)
    return GradedComplex(d_even, d_odd)


def random_form(rng, K, spread=0.4):
    return BilinearStructure(random_symmetric_form(rng, K.n_even, spread), random_symmetric_form(rng, K.n_odd, spread))


def random_instance(rng, max_dim=16):
    K = random_complex(rng, max_dim)
    return K, random_form(rng, K)


def random_chirality(rng, n, spread=0.5):
    G = near_identity(rng, n, spread)
    return ChiralityData(G, np.linalg.inv(G))


def random_basis_change(rng, k):
    return near_identity(rng, k, 0.8)


def random_nilpotent(rng, n, spread=0.5):
    """``P N P^-1`` with ``N`` strictly upper triangular."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    N = np.triu(_cplx(rng, n, n), 1) * spread
    P = near_identity(rng, n, 0.5)
    return P @ N @ np.linalg.inv(P)


def random_compatible_pair(rng, n, spread=0.4):
    """Form and chirality with ``Gamma`` an isometry: ``B_odd = G_oe^T B_even G_oe``.

    The chirality identities between a complex and its dual only hold for such
    pairs; an arbitrary involution breaks them.
    """
    Gamma = random_chirality(rng, n, spread)
    Be = random_symmetric_form(rng, n, spread)
    Go = Gamma.Gamma_odd_to_even
    Bo = Go.T @ Be @ Go
    return BilinearStructure(Be, (Bo + Bo.T) / 2), Gamma
