import numpy as np
import pytest

from supergauss import (GrowthFunction, Seminorm, check_seminorm_axioms,
                        check_submultiplicative, check_superquadratic,
                        kernel_compatibility)
from supergauss.seminorms import compatibility_verdict


class TestEval:
    def test_lattice_power_quartic(self):
        p = Seminorm.lattice(4.0, 1.0)
        assert p(np.ones(4)) == pytest.approx(4.0 ** 0.25, abs=1e-12)

    def test_matrix_identity_is_l2(self, rng):
        p = Seminorm.l2(5)
        for _ in range(8):
            v = rng.standard_normal(5)
            assert p(v) == pytest.approx(np.linalg.norm(v), rel=1e-12)

    def test_zero_vector(self):
        for p in (Seminorm.l2(3), Seminorm.lattice(2.0, 0.5),
                  Seminorm.from_matrix([[1.0, 2.0], [0.0, 1.0]])):
            d = p.dim or 3
            assert p(np.zeros(d)) == 0.0

    def test_lattice_weight_scales(self):
        p = Seminorm.lattice(2.0, 4.0)
        assert p(np.array([1.0, 1.0])) == pytest.approx(np.sqrt(8.0))

    def test_dimension_mismatch(self):
        p = Seminorm.from_matrix([[1.0, 0.0]])
        with pytest.raises(Exception):
            p(np.ones(3))

    def test_matrix_lipschitz_bound(self, rng):
        a = rng.standard_normal((3, 4))
        p = Seminorm.from_matrix(a)
        for _ in range(32):
            v = rng.standard_normal(4)
            assert p(v) <= p.lipschitz * np.linalg.norm(v) * (1 + 1e-12)


class TestAxioms:
    def test_l2_passes(self):
        assert check_seminorm_axioms(Seminorm.l2(4), 4).passed

    def test_lattice_passes(self):
        assert check_seminorm_axioms(Seminorm.lattice(4.0, 2.0), 6).passed

    def test_squared_norm_fails_homogeneity_with_witness_2(self):
        bad = Seminorm.custom(lambda v: float(np.dot(v, v)))
        rep = check_seminorm_axioms(bad, 3)
        assert not rep.passed
        t, _ = rep.witness
        assert t == 2.0
        assert "homogeneity" in rep.detail

    def test_constructor_rejects_non_seminorms(self):
        with pytest.raises(ValueError):
            Seminorm.lattice(0.5, 1.0)
        with pytest.raises(ValueError):
            Seminorm.lattice(2.0, 0.0)
        with pytest.raises(ValueError):
            Seminorm.lattice(2.0, -1.0)


class TestSubmultiplicative:
    def test_cubic_passes(self):
        assert check_submultiplicative(GrowthFunction.power(1.0)).passed

    def test_x2_log_passes(self):
        f = GrowthFunction.log_power(np.e)
        assert check_submultiplicative(f).passed

    def test_exponential_fails_and_example_witness_violates(self):
        f = GrowthFunction.custom(lambda x: np.exp(x))
        rep = check_submultiplicative(f)
        assert not rep.passed
        x, y = rep.witness
        assert f(x * y) > f(x) * f(y)
        # the canonical witness pair from the docs violates directly
        assert np.exp(9.0) > np.exp(3.0) * np.exp(3.0)


class TestSuperquadratic:
    def test_power_2_5_passes(self):
        assert check_superquadratic(GrowthFunction.power(0.5)).passed

    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.0, 2.0])
    def test_power_family_passes(self, eps):
        assert check_superquadratic(GrowthFunction.power(eps)).passed

    def test_x_squared_fails(self):
        f = GrowthFunction.custom(lambda x: np.asarray(x) ** 2)
        assert not check_superquadratic(f).passed

    def test_x2_log_fails_despite_submultiplicativity(self):
        # f = x^2 ln(e+x): submultiplicative, but the ratio f(x)/x^2 -> 1,
        # not 0 -- the validator must reject it.
        f = GrowthFunction.log_power(np.e)
        assert check_submultiplicative(f).passed
        assert not check_superquadratic(f).passed

    def test_growth_constructors_validate(self):
        with pytest.raises(ValueError):
            GrowthFunction.power(0.0)
        with pytest.raises(ValueError):
            GrowthFunction.log_power(1.0)


class TestKernelCompatibility:
    def test_strict_inclusion_fails(self):
        p = Seminorm.from_matrix([[1.0, 0.0]])
        q = Seminorm.from_matrix([[1.0, 1.0]])
        rep = kernel_compatibility(p, q)
        assert compatibility_verdict(rep) == "incompatible"
        w = rep.witness
        assert p(w) <= 1e-8 and q(w) > 1e-8

    def test_trivial_kernel_compatible_with_anything(self):
        p = Seminorm.l2(2)
        q = Seminorm.from_matrix([[3.0, -1.0]])
        assert compatibility_verdict(kernel_compatibility(p, q)) == "compatible"

    def test_identical_kernels_compatible(self):
        p = Seminorm.from_matrix([[1.0, 1.0]])
        q = Seminorm.from_matrix([[2.0, 2.0]])
        assert compatibility_verdict(kernel_compatibility(p, q)) == "compatible"

    def test_reflexive(self, rng):
        for _ in range(5):
            a = rng.standard_normal((2, 4))
            p = Seminorm.from_matrix(a)
            assert compatibility_verdict(kernel_compatibility(p, p)) == "compatible"

    def test_row_appending_to_p_preserves_compatibility(self, rng):
        # enlarging ker-constraints of p only shrinks ker(p)
        for _ in range(10):
            a = rng.standard_normal((2, 5))
            q = Seminorm.from_matrix(rng.standard_normal((2, 5)))
            base = compatibility_verdict(kernel_compatibility(Seminorm.from_matrix(a), q))
            if base != "compatible":
                continue
            grown = np.vstack([a, rng.standard_normal(5)])
            assert compatibility_verdict(
                kernel_compatibility(Seminorm.from_matrix(grown), q)) == "compatible"

    def test_custom_is_undecidable(self):
        p = Seminorm.custom(lambda v: float(np.abs(v).max()))
        q = Seminorm.l2(3)
        assert compatibility_verdict(kernel_compatibility(p, q)) == "undecidable"
        p2 = Seminorm.from_matrix([[1.0, 0.0]])
        assert compatibility_verdict(kernel_compatibility(p2, p)) == "undecidable"

    def test_lattice_q_detects_kernel_vector(self):
        p = Seminorm.from_matrix([[1.0, 0.0]])
        q = Seminorm.lattice(2.0, 1.0)
        assert compatibility_verdict(kernel_compatibility(p, q)) == "incompatible"
