import numpy as np
import pytest

from supergauss import (CompactMap, EigenSequence, GrowthFunction, Seminorm,
                        SpectralModel)


def scalar_model(lam=0.7, eps=2.0, alpha=1.0):
    """One-dimensional model with |.| seminorms and f(x) = x^(2+eps)."""
    return SpectralModel(lam=EigenSequence(np.array([lam])),
                         K=CompactMap.identity(),
                         p=Seminorm.l2(1), q=Seminorm.l2(1),
                         f=GrowthFunction.power(eps), alpha=alpha)


def gaussian_model(lams, alpha, k=None):
    """Growth term disabled; q is the plain l2 norm."""
    lam = EigenSequence(np.asarray(lams, dtype=float))
    if k is None:
        k = CompactMap.identity()
    return SpectralModel(lam=lam, K=k, p=None, q=Seminorm.l2(len(lam)),
                         f=None, alpha=alpha)


def zero_seminorm_model(dim=2, alpha=1.0):
    """p and q are zero matrices: the integrand is identically 1."""
    zero = Seminorm.from_matrix(np.zeros((dim, dim)))
    return SpectralModel(lam=EigenSequence(np.full(dim, 0.5)),
                         K=CompactMap.identity(), p=zero, q=zero,
                         f=GrowthFunction.power(2.0), alpha=alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
