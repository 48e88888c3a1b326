import numpy as np
import pytest
from sklearn.base import clone

from torsionlab.complex import BilinearStructure, GradedComplex, cohomology_basis
from torsionlab.estimators import CappellMillerTorsion, SymmetricBilinearTorsion
from torsionlab.models.random import random_basis_change, random_chirality, random_complex
from torsionlab.torsion import cappell_miller_torsion, change_basis, torsion


def test_params_and_clone():
    est = SymmetricBilinearTorsion(threshold=0.5, validate=False)
    assert est.get_params() == {"threshold": 0.5, "cluster_tol": est.cluster_tol, "validate": False}
    c = clone(est.set_params(threshold=1.0))
    assert c.threshold == 1.0 and not hasattr(c, "log_value_")


def test_fit_matches_functional_api(instances):
    K, b = instances[3]
    est = SymmetricBilinearTorsion().fit((K, b))
    assert est.log_value_ == pytest.approx(torsion(K, b).log_value)
    assert set(est.components_) == {"window", "det_prime_even", "det_prime_odd"}


def test_one_plus_one():
    est = SymmetricBilinearTorsion().fit((GradedComplex([[2.0]], [[0.0]]), BilinearStructure.identity(1, 1)))
    assert est.value_ == pytest.approx(0.25)
    assert est.window_dims_ == (0, 0)


def test_transform_basis_matches_refit(rng, instances):
    K, b = instances[5]
    h = cohomology_basis(K)
    Ge, Go = random_basis_change(rng, h[0].shape[1]), random_basis_change(rng, h[1].shape[1])
    est = SymmetricBilinearTorsion().fit((K, b), basis=h)
    refit = SymmetricBilinearTorsion().fit((K, b), basis=change_basis(h, Ge, Go))
    assert est.transform_basis(Ge, Go) == pytest.approx(refit.value_, rel=1e-9)


def test_unfitted_raises():
    with pytest.raises(AttributeError):
        SymmetricBilinearTorsion().transform_basis(np.eye(1), np.eye(1))
    with pytest.raises(AttributeError):
        CappellMillerTorsion().transform_basis(np.eye(1), np.eye(1))


def test_cm_estimator(rng):
    K = random_complex(rng, dims=(4, 4))
    G = random_chirality(rng, 4)
    est = CappellMillerTorsion().fit((K, G))
    assert est.log_value_ == pytest.approx(cappell_miller_torsion(K, G).log_value)
    h = est.basis_
    Ge, Go = random_basis_change(rng, h[0].shape[1]), random_basis_change(rng, h[1].shape[1])
    refit = CappellMillerTorsion().fit((K, G), basis=change_basis(h, Ge, Go))
    assert est.transform_basis(Ge, Go) == pytest.approx(refit.value_, rel=1e-9)
