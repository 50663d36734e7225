import math

import numpy as np
import pytest

from supergauss import (CompactMap, DecayFamily, EigenSequence, GrowthFunction,
                        Seminorm, SpectralModel, build_certificate,
                        convergence_run, default_schedule, gaussian_closed_form,
                        gaussian_divergence_margin, i1_closed_form,
                        integrate_projected, quadrature_oracle, tail_mass_mc)
from supergauss.errors import GaussianDivergenceError

from conftest import gaussian_model, scalar_model, zero_seminorm_model


class TestIntegrateProjected:
    def test_constant_integrand(self):
        rec = integrate_projected(zero_seminorm_model(), 2, 50_000, key=0)
        assert rec.mean == 1.0
        assert rec.variance == 0.0
        assert rec.stderr == 0.0

    def test_capped_scalar_matches_oracle(self):
        # lambda = 1.0 pre-cap; capping preserves the embedded point exactly
        from supergauss import rescale_half_cap

        lam, k = rescale_half_cap(EigenSequence(np.array([1.0])),
                                  CompactMap.identity())
        model = SpectralModel(lam=lam, K=k, p=Seminorm.l2(1), q=Seminorm.l2(1),
                              f=GrowthFunction.power(2.0), alpha=0.0)
        oracle = quadrature_oracle(model, 1)
        rec = integrate_projected(model, 1, 200_000, key=5)
        assert abs(rec.mean - oracle) <= 3.0 * rec.stderr

    def test_pure_gaussian_closed_form(self):
        model = gaussian_model([0.5, 0.3], alpha=1.0, k=CompactMap.fourier(2))
        exact = gaussian_closed_form(model)
        expected = ((1 - 2 * 0.25) * (1 - 2 * 0.09)) ** -0.5
        assert exact == pytest.approx(expected, rel=1e-12)
        rec = integrate_projected(model, 2, 400_000, key=9)
        assert abs(rec.mean - exact) <= 3.0 * rec.stderr

    def test_record_invariants(self):
        rec = integrate_projected(scalar_model(), 1, 12_345, key=1)
        assert rec.samples == 12_345
        assert rec.stderr == pytest.approx(math.sqrt(rec.variance / rec.samples))
        assert math.isfinite(rec.mean)
        assert rec.seed == 1

    def test_thread_count_does_not_change_bits(self):
        model = scalar_model()
        a = integrate_projected(model, 1, 150_000, key=3, threads=1)
        b = integrate_projected(model, 1, 150_000, key=3, threads=4)
        c = integrate_projected(model, 1, 150_000, key=3, threads=16)
        assert a.mean == b.mean == c.mean
        assert a.variance == b.variance == c.variance

    def test_unbiased_over_keys(self):
        # mean of means over independent keys vs the quadrature oracle
        model = scalar_model(lam=0.6, alpha=1.0)
        oracle = quadrature_oracle(model, 1)
        recs = [integrate_projected(model, 1, 20_000, key=k) for k in range(50)]
        grand = float(np.mean([r.mean for r in recs]))
        pooled = math.sqrt(sum(r.stderr ** 2 for r in recs)) / len(recs)
        assert abs(grand - oracle) <= 4.0 * pooled

    def test_overflow_flagged_not_raised(self):
        # enormous positive quadratic term forces exp-argument clamping
        model = gaussian_model([0.7], alpha=4000.0)
        rec = integrate_projected(model, 1, 10_000, key=2)
        assert rec.overflow_count > 0
        assert "overflow" in rec.flags
        assert math.isfinite(rec.mean)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            integrate_projected(scalar_model(), 1, 0, key=0)
        with pytest.raises(ValueError):
            integrate_projected(scalar_model(), 2, 100, key=0)


class TestTailMassMC:
    def test_indicator_all_ones(self):
        lam = EigenSequence(np.array([0.5]))
        rec = tail_mass_mc(lam, 1, 0.0, 10_000, key=0)
        assert rec.mean == pytest.approx(1.15470053838, abs=1e-8)
        assert rec.variance == 0.0

    def test_matches_closed_form(self):
        lam = EigenSequence(np.array([0.5]))
        rec = tail_mass_mc(lam, 1, 1.0, 100_000, key=1)
        assert abs(rec.mean - i1_closed_form(0.5, 1.0)) <= 3.0 * rec.stderr

    def test_deterministic_across_threads(self):
        lam = EigenSequence(0.7 / np.arange(1, 8))
        a = tail_mass_mc(lam, 7, 2.0, 100_000, key=4, threads=1)
        b = tail_mass_mc(lam, 7, 2.0, 100_000, key=4, threads=8)
        assert a.mean == b.mean and a.stderr == b.stderr

    def test_preconditions(self):
        lam = EigenSequence(np.array([0.5]))
        with pytest.raises(ValueError):
            tail_mass_mc(lam, 2, 1.0, 100, key=0)
        with pytest.raises(ValueError):
            tail_mass_mc(EigenSequence(np.array([1.0])), 1, 1.0, 100, key=0)


class TestQuadratureOracle:
    def test_constant_integrand(self):
        assert quadrature_oracle(zero_seminorm_model(), 2) == pytest.approx(1.0,
                                                                            abs=1e-14)

    def test_gaussian_value(self):
        model = gaussian_model([0.5], alpha=1.0)
        assert quadrature_oracle(model, 1) == pytest.approx(math.sqrt(2.0), abs=1e-9)

    def test_cost_guard(self):
        model = gaussian_model([0.5, 0.4, 0.3, 0.2], alpha=0.1)
        with pytest.raises(ValueError):
            quadrature_oracle(model, 4)

    def test_three_dim_factorizes(self):
        # orthogonal K and l2 q: the integral factorizes exactly
        model = gaussian_model([0.5, 0.4, 0.3], alpha=0.8, k=CompactMap.fourier(3))
        expected = np.prod([(1 - 2 * 0.8 * l * l) ** -0.5 for l in (0.5, 0.4, 0.3)])
        assert quadrature_oracle(model, 3) == pytest.approx(expected, rel=1e-9)


class TestGaussianClosedForm:
    def test_divergence_raises(self):
        with pytest.raises(GaussianDivergenceError):
            gaussian_closed_form(gaussian_model([0.7], alpha=1.2))

    def test_margin(self):
        m = gaussian_model([0.7, 0.1], alpha=1.0)
        assert gaussian_divergence_margin(m) == pytest.approx(2 * 0.49, rel=1e-12)

    def test_growth_term_rejected(self):
        with pytest.raises(ValueError):
            gaussian_closed_form(scalar_model())


class TestConvergenceRun:
    def test_zero_model_converges_at_first_point(self):
        rep = convergence_run(zero_seminorm_model(), samples=20_000, key=0)
        assert rep.verdict == "converged"
        assert rep.plateau == (1, 1.0)
        assert all(r.mean == 1.0 for r in rep.records)

    def test_default_schedule(self):
        assert default_schedule(8) == (1, 2, 4, 8)
        assert default_schedule(5) == (1, 2, 4, 5)
        assert default_schedule(1) == (1,)

    def test_hypothesis_failure_annotation(self):
        lam = EigenSequence(np.array([0.5]), decay=DecayFamily.power(1.0, 0.4))
        model = SpectralModel(lam=lam, K=CompactMap.identity(), p=Seminorm.l2(1),
                              q=Seminorm.l2(1), f=GrowthFunction.power(2.0),
                              alpha=1.0)
        rep = convergence_run(model, samples=5_000, key=0)
        assert rep.verdict == "budget_exhausted"
        assert "hypothesis_failure" in rep.flags

    def test_gaussian_divergence_flagged(self):
        rep = convergence_run(gaussian_model([0.7], alpha=1.2), samples=5_000, key=0)
        assert "divergent" in rep.flags
        assert rep.verdict == "budget_exhausted"

    def test_unsorted_model_rejected(self):
        model = SpectralModel(lam=EigenSequence(np.array([0.3, 0.7])),
                              K=CompactMap.identity(), p=Seminorm.l2(2),
                              q=Seminorm.l2(2), f=GrowthFunction.power(2.0),
                              alpha=1.0)
        with pytest.raises(ValueError):
            convergence_run(model, samples=1_000, key=0)

    def test_records_respect_global_bound(self):
        model = scalar_model()
        rep = convergence_run(model, samples=100_000, key=8)
        assert rep.verdict != "bound_violated"
        for rec in rep.records:
            assert rec.mean <= rep.bound + 3.0 * rec.stderr

    def test_liminf_full_integral_below_every_estimate(self):
        # In the growth-dominated regime the projected values approach the
        # full integral from above, so the full value never exceeds any
        # schedule estimate beyond noise.  (In the pure-Gaussian regime the
        # approach is from below and no such pointwise comparison holds.)
        from supergauss import LatticeConfig, build_phi4_model

        model = build_phi4_model(LatticeConfig(sites=3, mass=1.0,
                                               alpha_grid=(0.3,)), 0.3)
        oracle = quadrature_oracle(model, 3)
        rep = convergence_run(model, schedule=(1, 2, 3), samples=200_000, key=12)
        assert oracle <= min(r.mean + 3.0 * r.stderr for r in rep.records)

    def test_deterministic_report(self):
        model = scalar_model()
        a = convergence_run(model, samples=30_000, key=6, threads=1)
        b = convergence_run(model, samples=30_000, key=6, threads=4)
        assert [r.mean for r in a.records] == [r.mean for r in b.records]
        assert a.verdict == b.verdict and a.plateau == b.plateau
