import numpy as np
import pytest

from supergauss import (CompactMap, DecayFamily, EigenSequence, GrowthFunction,
                        Seminorm, SpectralModel, embed, embed_batch, hs_sum,
                        log_weighted_sum, rescale_half_cap, sample_standard,
                        validate_model)
from supergauss.errors import DimensionMismatchError
from supergauss.spectral import gaussian_chunk


def well_formed_model():
    return SpectralModel(lam=EigenSequence(np.array([0.5, 0.25]),
                                           decay=DecayFamily.power(1.0, 1.0)),
                         K=CompactMap.identity(),
                         p=Seminorm.l2(2), q=Seminorm.l2(2),
                         f=GrowthFunction.power(2.0), alpha=1.0)


class TestEigenSequence:
    def test_zeros_dropped(self):
        lam = EigenSequence(np.array([0.5, 0.0, 0.25, 0.0]))
        assert list(lam.values) == [0.5, 0.25]

    def test_descending_flag(self):
        assert EigenSequence(np.array([0.7, 0.3])).is_descending
        assert not EigenSequence(np.array([0.3, 0.7])).is_descending
        # magnitude, not signed order
        assert EigenSequence(np.array([-0.7, 0.3])).is_descending


class TestSums:
    def test_hs_examples(self):
        assert hs_sum(EigenSequence(np.array([0.5, 0.5]))).total == pytest.approx(0.5)
        assert hs_sum(EigenSequence(np.array([]))).total == 0.0
        lam = EigenSequence(np.array([1.0, 0.5]))  # lambda_n = 1/n, N = 2
        assert hs_sum(lam).total == pytest.approx(1.25)

    def test_log_weighted_examples(self):
        lam = EigenSequence(np.array([1.0, 0.5]))
        assert log_weighted_sum(lam).total == pytest.approx(0.967800252727, abs=1e-5)
        assert log_weighted_sum(EigenSequence(np.array([]))).total == 0.0
        lam1 = EigenSequence(np.array([0.5]))
        assert log_weighted_sum(lam1).total == pytest.approx(0.173286795140, abs=1e-5)

    def test_power_tail_finite_and_dominates_partial_sums(self):
        lam = EigenSequence(np.array([1.0, 0.5]), decay=DecayFamily.power(1.0, 1.0))
        hs = hs_sum(lam)
        assert hs.finite and hs.tail > 0
        n = np.arange(3, 2_000_000, dtype=float)
        partial = float(np.sum(n ** (-2.0)))
        assert hs.tail >= partial
        logw = log_weighted_sum(lam)
        partial_log = float(np.sum(n ** (-2.0) * np.log(n + 1.0)))
        assert logw.finite and logw.tail >= partial_log

    def test_slow_power_decay_diverges(self):
        lam = EigenSequence(np.array([0.5]), decay=DecayFamily.power(1.0, 0.4))
        assert not hs_sum(lam).finite
        assert not log_weighted_sum(lam).finite
        assert log_weighted_sum(lam).total == np.inf

    def test_exponential_tail(self):
        lam = EigenSequence(np.array([0.5]), decay=DecayFamily.exponential(1.0, 0.5))
        hs = hs_sum(lam)
        # exact geometric tail: sum_{n>=2} 0.25^n = 0.25^2/(1-0.25)
        assert hs.tail == pytest.approx(0.25 ** 2 / 0.75, rel=1e-12)
        logw = log_weighted_sum(lam)
        n = np.arange(2, 200, dtype=float)
        assert logw.tail >= float(np.sum(0.25 ** n * np.log(n + 1.0)))
        bad = EigenSequence(np.array([0.5]), decay=DecayFamily.exponential(1.0, 1.0))
        assert not hs_sum(bad).finite


class TestRescale:
    def test_per_coordinate_example(self, rng):
        lam, k = rescale_half_cap(EigenSequence(np.array([0.9, 0.3])),
                                  CompactMap.identity())
        assert lam.values == pytest.approx([0.7, 0.3])
        assert k.matrix == pytest.approx(np.diag([9.0 / 7.0, 1.0]))
        for _ in range(8):
            x = rng.standard_normal(2)
            before = np.array([0.9, 0.3]) * x
            after = k.apply(lam.values * x)
            assert np.linalg.norm(after - before) <= 1e-12 * np.linalg.norm(before)

    def test_identity_when_capped(self):
        lam0 = EigenSequence(np.array([0.5]))
        k0 = CompactMap.identity()
        lam, k = rescale_half_cap(lam0, k0)
        assert lam is lam0 and k is k0

    def test_boundary_inclusive_dense(self, rng):
        m = rng.standard_normal((2, 2))
        lam0 = EigenSequence(np.array([0.7, 0.7]))
        k0 = CompactMap.from_matrix(m)
        lam, k = rescale_half_cap(lam0, k0)
        assert lam is lam0 and k is k0

    def test_uniform_mode(self):
        lam, k = rescale_half_cap(EigenSequence(np.array([1.0, 0.4])),
                                  CompactMap.identity(), mode="uniform")
        assert lam.values == pytest.approx([0.7, 0.28])
        assert k.matrix == pytest.approx(np.eye(2) / 0.7)

    def test_sums_non_increasing(self):
        raw = EigenSequence(np.array([0.9, 0.8, 0.3]))
        capped, _ = rescale_half_cap(raw, CompactMap.identity())
        assert hs_sum(capped).total <= hs_sum(raw).total
        assert log_weighted_sum(capped).total <= log_weighted_sum(raw).total

    def test_dense_map_invariance(self, rng):
        m = rng.standard_normal((3, 3))
        raw = EigenSequence(np.array([1.2, 0.9, 0.1]))
        capped, k = rescale_half_cap(raw, CompactMap.from_matrix(m))
        assert capped.max_abs ** 2 <= 0.49 + 1e-15
        for _ in range(8):
            x = rng.standard_normal(3)
            before = m @ (raw.values * x)
            after = k.apply(capped.values * x)
            assert np.linalg.norm(after - before) <= 1e-12 * max(1.0, np.linalg.norm(before))


class TestEmbed:
    def test_scalar(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.7])), K=CompactMap.identity(),
                          p=None, q=Seminorm.l2(1), f=None, alpha=1.0)
        assert embed(m, [2.0]) == pytest.approx([1.4])

    def test_zero_is_zero(self):
        m = well_formed_model()
        assert embed(m, np.zeros(2)) == pytest.approx([0.0, 0.0])

    def test_matrix_example(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.5, 0.25])),
                          K=CompactMap.from_matrix([[1.0, 1.0], [0.0, 1.0]]),
                          p=None, q=Seminorm.l2(2), f=None, alpha=1.0)
        assert embed(m, [1.0, 2.0]) == pytest.approx([1.0, 0.5])

    def test_linearity(self, rng):
        m = SpectralModel(lam=EigenSequence(np.array([0.5, 0.25, 0.1])),
                          K=CompactMap.from_matrix(rng.standard_normal((4, 3))),
                          p=None, q=Seminorm.l2(4), f=None, alpha=1.0)
        for _ in range(8):
            x, y = rng.standard_normal((2, 3))
            lhs = embed(m, x + y)
            rhs = embed(m, x) + embed(m, y)
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))

    def test_projection_pads(self):
        m = well_formed_model()
        v = embed(m, [2.0])
        assert v == pytest.approx([1.0, 0.0])

    def test_dimension_error(self):
        m = well_formed_model()
        with pytest.raises(DimensionMismatchError):
            embed(m, np.ones(3))

    def test_batch_matches_single(self, rng):
        m = well_formed_model()
        xs = rng.standard_normal((5, 2))
        vs = embed_batch(m, xs)
        for x, v in zip(xs, vs):
            assert embed(m, x) == pytest.approx(list(v))


class TestSampling:
    def test_fixed_key_reproducible(self):
        a = sample_standard(16, (42, 3))
        b = sample_standard(16, (42, 3))
        assert np.array_equal(a, b)

    def test_empty(self):
        assert sample_standard(0, (0, 0)).shape == (0,)

    def test_distinct_chunks_differ_and_decorrelate(self):
        m = 1_000_000
        a = gaussian_chunk((7, 0), (m,))
        b = gaussian_chunk((7, 1), (m,))
        tol = 4.0 / np.sqrt(m)
        assert abs(np.mean(a)) < tol and abs(np.mean(b)) < tol
        assert abs(np.mean(a * b)) < tol

    def test_moments(self):
        xs = gaussian_chunk((123, 0), (1_000_000,))
        assert abs(np.mean(xs)) < 4e-3
        assert abs(np.var(xs) - 1.0) < 5e-3


class TestValidation:
    def test_well_formed_all_pass(self):
        assert validate_model(well_formed_model()).passed

    def test_unsorted_fails_descending(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.3, 0.7])),
                          K=CompactMap.identity(), p=Seminorm.l2(2),
                          q=Seminorm.l2(2), f=GrowthFunction.power(2.0), alpha=1.0)
        rep = validate_model(m)
        assert not rep["descending_order"].passed

    def test_slow_decay_fails_log_weighted(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.5]),
                                            decay=DecayFamily.power(1.0, 0.4)),
                          K=CompactMap.identity(), p=Seminorm.l2(1),
                          q=Seminorm.l2(1), f=GrowthFunction.power(2.0), alpha=1.0)
        rep = validate_model(m)
        assert not rep["log_weighted_summable"].passed
        assert not rep["hs_summable"].passed

    def test_uncapped_flagged_not_thrown(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.9])),
                          K=CompactMap.identity(), p=Seminorm.l2(1),
                          q=Seminorm.l2(1), f=GrowthFunction.power(2.0), alpha=1.0)
        rep = validate_model(m)
        assert not rep["half_cap"].passed

    def test_dimension_mismatch_raises(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.5, 0.25])),
                          K=CompactMap.from_matrix([[1.0, 0.0], [0.0, 1.0]]),
                          p=Seminorm.from_matrix([[1.0, 0.0, 0.0]]),
                          q=Seminorm.l2(2), f=GrowthFunction.power(2.0), alpha=1.0)
        with pytest.raises(DimensionMismatchError):
            validate_model(m)

    def test_gap_failure_recorded(self):
        m = SpectralModel(lam=EigenSequence(np.array([0.5])),
                          K=CompactMap.identity(), p=Seminorm.l2(1),
                          q=Seminorm.l2(1), f=GrowthFunction.log_power(np.e),
                          alpha=1.0)
        rep = validate_model(m)
        assert not rep["superquadratic_gap"].passed
        assert rep["submultiplicative"].passed


class TestFourier:
    def test_synthesis_matrix_orthogonal(self):
        for n in (2, 3, 4, 7, 8):
            f = CompactMap.fourier(n).matrix
            assert f.shape == (n, n)
            assert f.T @ f == pytest.approx(np.eye(n), abs=1e-12)
