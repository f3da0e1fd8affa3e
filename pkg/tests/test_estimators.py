import math

import numpy as np
import pytest

from conftest import mean_and_se, two_sample_z
from microstate_lab.errors import FeasibilityError, InvalidInputError
from microstate_lab.estimators import (
    BaseTupleStrategy,
    VolumeEstimate,
    best_base_search,
    derive_truncation_parameters,
    diagonal_base,
    frobenius_ball_log_volume,
    fubini_check,
    lebesgue_volume_estimate,
    orbital_hit_probability,
    sample_uniform_microstates,
    truncation_check,
    _sample_orbital_hits,
)
from microstate_lab.laws import (
    Letter,
    empirical_law,
    free_product_law,
    quantile_from_spec,
    two_point_law,
)
from microstate_lab.linalg import HermitianMatrix, HermitianTuple
from microstate_lab.microstates import MicrostateParams, microstate_membership
from microstate_lab.randmat import RandomSeed

X = Letter.x
SYM3 = two_point_law(1.0, -1.0, 0.5, 3)
Q_SYM = quantile_from_spec("two_point(1,-1,0.5)")


def sym_base(n):
    return HermitianTuple([diagonal_base(Q_SYM, n)])


class TestVolumeEstimate:
    def test_count_arithmetic(self):
        est = VolumeEstimate.from_counts(25, 100, N=4)
        assert est.p_hat == 0.25
        assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
        assert est.log_measure == pytest.approx(math.log(0.25))
        assert est.log_measure_per_N2 == pytest.approx(math.log(0.25) / 16)

    def test_rule_of_three_at_zero(self):
        est = VolumeEstimate.from_counts(0, 600, N=2)
        assert est.p_hat == 0.0
        assert math.isinf(est.log_measure) and est.log_measure < 0
        assert est.p_upper95 == pytest.approx(3 / 600)

    def test_reference_measure_enters_log(self):
        est = VolumeEstimate.from_counts(50, 100, N=1, log_reference=math.log(2.0))
        assert est.log_measure == pytest.approx(math.log(0.5 * 2.0))

    def test_json_cleans_nonfinite(self):
        est = VolumeEstimate.from_counts(0, 10, N=2)
        assert est.to_json()["log_measure"] is None


class TestOrbitalHitProbability:
    def test_single_group_probability_one(self):
        for samples in (10, 200):
            est = orbital_hit_probability(
                [sym_base(4)], SYM3, MicrostateParams(4, 3, 0.2, 1.5), samples, RandomSeed(3)
            )
            assert est.hits == samples and est.p_hat == 1.0
            assert est.log_measure == 0.0

    def test_failing_base_forces_exact_zero(self):
        bad = [HermitianTuple([HermitianMatrix(np.eye(4))])]
        est = orbital_hit_probability(
            bad, SYM3, MicrostateParams(4, 3, 0.2, 1.5), 100, RandomSeed(4)
        )
        assert est.hits == 0 and est.p_hat == 0.0
        assert est.p_upper95 == 0.0
        assert "fail their marginal" in est.note

    def test_norm_violation_also_forces_zero(self):
        big = [HermitianTuple([HermitianMatrix(np.diag([1.6, -1.6, 1.6, -1.6]))])]
        est = orbital_hit_probability(
            big, two_point_law(1.6, -1.6, 0.5, 3), MicrostateParams(4, 3, 0.2, 1.5),
            50, RandomSeed(5),
        )
        assert est.p_hat == 0.0 and est.p_upper95 == 0.0

    def test_hits_monotone_in_delta_on_same_stream(self):
        joint = free_product_law([SYM3, SYM3], 3)
        base = [sym_base(6).arrays(), sym_base(6).arrays()]
        seed = RandomSeed(8)
        _, tight, _ = _sample_orbital_hits(base, joint, MicrostateParams(6, 3, 0.15), 300, seed)
        _, loose, _ = _sample_orbital_hits(base, joint, MicrostateParams(6, 3, 0.3), 300, seed)
        assert np.all(loose[tight])  # every tight hit is a loose hit

    def test_su_scalar_sampler_agrees(self):
        joint = free_product_law([SYM3, SYM3], 3)
        base = [sym_base(8), sym_base(8)]
        params = MicrostateParams(8, 3, 0.25)
        a = orbital_hit_probability(base, joint, params, 800, RandomSeed(9), sampler="haar")
        b = orbital_hit_probability(base, joint, params, 800, RandomSeed(10), sampler="su_scalar")
        assert abs(two_sample_z(a.p_hat, a.stderr, b.p_hat, b.stderr)) <= 3

    def test_unknown_sampler(self):
        with pytest.raises(InvalidInputError):
            orbital_hit_probability(
                [sym_base(4)], SYM3, MicrostateParams(4, 3, 0.2), 10, RandomSeed(1),
                sampler="heat_kernel",
            )


class TestBestBaseSearch:
    def test_single_group_sup_is_zero(self):
        strategy = BaseTupleStrategy.diagonalized([Q_SYM])
        res = best_base_search(strategy, SYM3, MicrostateParams(4, 3, 0.2, 1.5), 50, RandomSeed(11))
        assert res.estimate.log_measure_per_N2 == 0.0

    def test_best_of_one_equals_single_run(self):
        # Rejection sampling of microstates is only practical at small N:
        # the operator-norm ball occupies a vanishing fraction of the
        # enclosing Frobenius ball as N grows.
        joint = free_product_law([SYM3, SYM3], 3)
        params = MicrostateParams(3, 3, 0.35, 1.5)
        seed = RandomSeed(12)
        res1 = best_base_search(BaseTupleStrategy.best_of_random(1), joint, params, 100, seed)
        marginals = [joint.restrict_groups([1]), joint.restrict_groups([2])]
        base = tuple(sample_uniform_microstates(marginals, params, seed.split(0, 0)))
        single = orbital_hit_probability(base, joint, params, 100, seed.split(0, 1))
        assert res1.estimate.hits == single.hits

    def test_monotone_in_candidate_count(self):
        joint = free_product_law([SYM3, SYM3], 3)
        params = MicrostateParams(3, 3, 0.35, 1.5)
        seed = RandomSeed(13)
        r1 = best_base_search(BaseTupleStrategy.best_of_random(1), joint, params, 80, seed)
        r4 = best_base_search(BaseTupleStrategy.best_of_random(4), joint, params, 80, seed)
        assert r4.estimate.hits >= r1.estimate.hits
        assert r4.candidate_estimates[0].hits == r1.candidate_estimates[0].hits

    def test_infeasible_raises(self):
        # odd N makes the symmetric two-point diagonal unreachable within delta
        strategy = BaseTupleStrategy.diagonalized([Q_SYM])
        with pytest.raises(FeasibilityError):
            best_base_search(
                strategy, two_point_law(1, -1, 0.5, 1), MicrostateParams(5, 1, 0.1, 1.5),
                20, RandomSeed(14),
            )

    def test_diagonalized_needs_single_variable_groups(self):
        t = HermitianTuple([diagonal_base(Q_SYM, 4), diagonal_base(Q_SYM, 4)])
        law = empirical_law([t], max_degree=2)
        with pytest.raises(InvalidInputError):
            best_base_search(
                BaseTupleStrategy.diagonalized([Q_SYM]), law,
                MicrostateParams(4, 2, 0.5), 10, RandomSeed(15),
            )


class TestLebesgueVolume:
    def test_interval_point_mass(self):
        # N = 1, target moment 0, m = 1: the set is (-delta, delta).
        law = two_point_law(0.0, 0.0, 0.5, 1)
        params = MicrostateParams(1, 1, 0.3, 1.0)
        est = lebesgue_volume_estimate(law, params, 20000, RandomSeed(16))
        assert abs(est.p_hat - 0.3) <= 3 * est.stderr
        assert est.log_measure == pytest.approx(math.log(0.6), abs=3 * est.stderr / est.p_hat)

    def test_vacuous_delta_gives_interval_length(self):
        law = two_point_law(0.0, 0.0, 0.5, 1)
        params = MicrostateParams(1, 1, 1e6, 2.0)
        est = lebesgue_volume_estimate(law, params, 500, RandomSeed(17))
        assert est.p_hat == 1.0
        assert est.log_measure == pytest.approx(math.log(4.0))
        assert est.chi_proxy == pytest.approx(math.log(4.0))  # N = 1: no correction

    def test_matches_eigenvalue_grid_oracle_n2(self):
        # Membership depends on the spectrum only, so a 2-d eigenvalue grid
        # with the Vandermonde-squared weight gives an independent estimate.
        delta, radius = 0.2, 1.0
        grid = np.linspace(-radius, radius, 1201)
        xx, yy = np.meshgrid(grid, grid)
        w = (xx - yy) ** 2
        ok = (np.abs((xx + yy) / 2) < delta) & (np.abs((xx**2 + yy**2) / 2 - 1) < delta)
        cell = (grid[1] - grid[0]) ** 2
        c2 = (2 * math.pi) / (1 * 2)  # (2 pi)^(N(N-1)/2) / prod j!
        oracle = math.log(c2 * float((w * ok).sum()) * cell)

        law = two_point_law(1.0, -1.0, 0.5, 2)
        params = MicrostateParams(2, 2, delta, radius)
        est = lebesgue_volume_estimate(law, params, 60000, RandomSeed(18))
        rel = est.stderr / est.p_hat
        assert abs(est.log_measure - oracle) <= 3 * rel

    def test_chi_proxy_correction(self):
        law = two_point_law(1.0, -1.0, 0.5, 1)
        params = MicrostateParams(2, 1, 1e6, 1.0)
        est = lebesgue_volume_estimate(law, params, 2000, RandomSeed(19))
        assert est.chi_proxy == pytest.approx(
            est.log_measure_per_N2 + 0.5 * math.log(2)
        )

    def test_zero_hits_warns(self):
        law = two_point_law(1.0, -1.0, 0.5, 1)
        params = MicrostateParams(3, 1, 1e-9, 1.0)
        est = lebesgue_volume_estimate(law, params, 50, RandomSeed(20))
        assert est.hits == 0
        assert math.isinf(est.log_measure)
        assert "zero hits" in est.note
        assert est.p_upper95 == pytest.approx(3 / 50)

    def test_requires_finite_cutoff(self):
        with pytest.raises(InvalidInputError):
            lebesgue_volume_estimate(SYM3, MicrostateParams(2, 2, 0.1), 10, RandomSeed(1))


class TestUniformMicrostates:
    def test_members_by_construction(self):
        marginals = [SYM3.restrict_degree(2), two_point_law(1.0, 0.0, 0.5, 2)]
        params = MicrostateParams(4, 2, 0.35, 1.2)
        tuples = sample_uniform_microstates(marginals, params, RandomSeed(21))
        for t, marginal in zip(tuples, marginals):
            rep = microstate_membership([t], marginal, params)
            assert rep.member

    def test_vacuous_constraint_matches_ball_sampler(self):
        from microstate_lab.randmat import _uniform_opnorm_ball

        law = two_point_law(0.0, 0.0, 0.5, 1)
        params = MicrostateParams(3, 1, 1e6, 1.0)
        seed = RandomSeed(22)
        nu_vals = []
        for k in range(1500):
            (t,) = sample_uniform_microstates([law], params, seed.split(k))
            nu_vals.append(abs(t[0].mat[0, 1]) ** 2)
        rng = RandomSeed(23).generator()
        ball_vals = [
            abs(_uniform_opnorm_ball(3, 1.0, rng, 10_000)[0][0, 1]) ** 2 for _ in range(1500)
        ]
        ma, sa = mean_and_se(nu_vals)
        mb, sb = mean_and_se(ball_vals)
        assert abs(two_sample_z(ma, sa, mb, sb)) <= 3

    def test_interval_variance(self):
        law = two_point_law(0.0, 0.0, 0.5, 1)
        params = MicrostateParams(1, 1, 0.1, 1.0)
        seed = RandomSeed(24)
        xs = np.array(
            [sample_uniform_microstates([law], params, seed.split(k))[0][0].mat[0, 0].real
             for k in range(2000)]
        )
        assert np.all(np.abs(xs) < 0.1)
        m2, se2 = mean_and_se(xs**2)
        assert abs(m2 - 0.1**2 / 3) <= 3 * se2

    def test_budget_error_carries_stats(self):
        law = two_point_law(0.0, 0.0, 0.5, 1)
        params = MicrostateParams(1, 1, 1e-4, 1.0)
        with pytest.raises(FeasibilityError) as err:
            sample_uniform_microstates([law], params, RandomSeed(25), max_attempts=200)
        assert err.value.stats["group_1_attempts"] == 200
        assert err.value.stats["failed_group"] == 1


class TestFubini:
    def test_single_group_sides_agree(self):
        marginal = SYM3.restrict_degree(2)
        report = fubini_check([marginal], marginal, MicrostateParams(3, 2, 0.4, 1.2),
                              2000, 50, RandomSeed(26))
        # orbital probability is 1 for every feasible base, so both sides
        # estimate the same ball fraction
        assert report.mean_inner == 1.0
        assert abs(report.z) <= 3

    def test_vacuous_delta_is_exact(self):
        marginals = [two_point_law(0.0, 0.0, 0.5, 1)] * 2
        joint = free_product_law(marginals, 1)
        report = fubini_check(marginals, joint, MicrostateParams(2, 1, 1e6, 1.0),
                              300, 20, RandomSeed(27))
        assert report.lhs.p_hat == 1.0 and report.rhs == 1.0
        assert report.z == 0.0

    def test_two_group_identity_within_noise(self):
        marginals = [SYM3.restrict_degree(2)] * 2
        joint = free_product_law(marginals, 2)
        report = fubini_check(marginals, joint, MicrostateParams(2, 2, 0.35, 1.2),
                              3000, 150, RandomSeed(28))
        assert report.base_count >= 8
        assert abs(report.z) <= 3

    def test_marginals_must_match_joint(self):
        marginals = [SYM3, two_point_law(1.0, 0.0, 0.5, 3)]
        joint = free_product_law([SYM3, SYM3], 3)
        with pytest.raises(InvalidInputError):
            fubini_check(marginals, joint, MicrostateParams(2, 3, 0.3, 1.2), 10, 10, RandomSeed(29))

    def test_regression_grid(self):
        # The identity is exact, so z stays within noise on every config.
        grid = [(2, 1, 0.5), (2, 2, 0.4), (3, 2, 0.5)]
        for k, (n, m, delta) in enumerate(grid):
            marginals = [SYM3.restrict_degree(m)] * 2
            joint = free_product_law(marginals, m)
            report = fubini_check(marginals, joint, MicrostateParams(n, m, delta, 1.2),
                                  1200, 80, RandomSeed(777).split(k))
            assert abs(report.z) <= 3, (n, m, delta, report.z)


class TestTruncation:
    def test_parameter_derivation(self):
        params = MicrostateParams(64, 1, 1.0, 1.25)
        derived = derive_truncation_parameters(1.0, params)
        assert derived.m_prime % 2 == 0
        assert derived.m_prime >= params.m
        assert derived.L == pytest.approx(max(math.sqrt(2.0), 1.25))
        tail = params.R * (
            (derived.rho / params.R) ** derived.m_prime
            + derived.delta_prime / params.R**derived.m_prime
        ) ** (1 / params.m)
        assert tail < derived.bound

    def test_cutoff_must_exceed_rho(self):
        with pytest.raises(InvalidInputError):
            derive_truncation_parameters(1.0, MicrostateParams(8, 1, 1.0, 0.9))

    def test_probe_runs_clean(self):
        marginal = two_point_law(1.0, -1.0, 0.5, 12)
        params = MicrostateParams(64, 1, 1.0, 1.25)
        report = truncation_check(marginal, params, 40, RandomSeed(31), Q_SYM)
        assert report.members == 40
        assert report.perturbed > 0
        assert report.gap_violations == 0
        assert report.chain_violations == 0
        assert report.implication_violations == 0
        assert report.max_gap < report.parameters.bound


def test_frobenius_ball_log_volume():
    # dimension 1: interval of length 2r; dimension 4: pi^2/2 r^4
    assert frobenius_ball_log_volume(1, 3.0) == pytest.approx(math.log(6.0))
    assert frobenius_ball_log_volume(2, 1.0) == pytest.approx(math.log(math.pi**2 / 2))
