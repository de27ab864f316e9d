"""Finite-N optimizer: closed form against the independent iterative oracle."""

import math

import numpy as np
import pytest

from npvmax.allocation import (
    feasibility_residuals,
    h_stats,
    max_npv_per_project,
    oracle_allocation,
    portfolio_objective,
    solve_allocation,
)
from npvmax.discounting import MarketSpec, unit_terminal_payoff
from npvmax.npv import CashFlowMatrix, ProjectEnsemble
from npvmax.sampling import ParamDistributions, sample_ensemble, sample_noise


def two_pass_stats(values):
    """Independent oracle: textbook two-pass mean and population variance."""
    n = len(values)
    mean = sum(float(x) for x in values) / n
    var = sum((float(x) - mean) ** 2 for x in values) / n
    return mean, var


def assert_kkt(h, alloc, tol=1e-8):
    residual = np.max(np.abs(h - alloc.theta * alloc.w + alloc.k))
    assert residual < tol, f"KKT stationarity residual {residual}"


class TestHStats:
    def test_constant_vector(self):
        stats = h_stats([1.0, 1.0, 1.0])
        assert stats.mean == 1.0
        assert stats.var == 0.0

    def test_two_point_vector(self):
        stats = h_stats([0.0, 2.0])
        assert stats.mean == 1.0
        assert stats.var == 1.0

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(30)
        h = rng.normal(0.5, 2.0, 1000)
        stats = h_stats(h)
        mean, var = two_pass_stats(h)
        assert stats.mean == pytest.approx(mean, rel=1e-12)
        assert stats.var == pytest.approx(var, rel=1e-12)

    def test_variance_identity(self):
        # Population variance equals mean of squares minus squared mean.
        rng = np.random.default_rng(31)
        h = rng.normal(1.0, 0.7, 500)
        stats = h_stats(h)
        identity = math.fsum(h * h) / h.size - stats.mean**2
        assert stats.var == pytest.approx(identity, rel=1e-12)
        assert stats.var >= 0.0

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(ValueError):
            h_stats([])
        with pytest.raises(ValueError):
            h_stats([1.0, float("nan")])


class TestSolveAllocation:
    def test_point_feasible_set(self):
        # tau = m**2: the ball has radius zero around the uniform point.
        market = MarketSpec(r=0.1, T=5, m=1.5, tau=2.25)
        stats = h_stats([0.3, -0.1, 0.8])
        alloc = solve_allocation(stats, market)
        assert np.all(alloc.w == 1.5)
        assert alloc.binding is True
        assert alloc.theta == 0.0
        assert portfolio_objective(alloc.w, stats.h) == pytest.approx(
            1.5 * stats.mean, rel=1e-12
        )

    def test_constant_returns(self):
        # Objective is constant on the feasible set; minimum-norm tie-break.
        market = MarketSpec(r=0.1, T=5, m=2.0, tau=9.0)
        stats = h_stats([0.7, 0.7, 0.7, 0.7])
        alloc = solve_allocation(stats, market)
        assert np.all(alloc.w == 2.0)
        assert alloc.theta == 0.0
        assert alloc.binding is False

    def test_small_instance_matches_oracle(self):
        market = MarketSpec(r=0.1, T=5, m=1.0, tau=3.0)
        h = np.array([-0.1, 0.0, 0.4])
        alloc = solve_allocation(h_stats(h), market)
        reference = oracle_allocation(h, market)
        gap = abs(portfolio_objective(alloc.w, h) - portfolio_objective(reference.w, h))
        assert gap < 1e-8
        assert np.max(np.abs(alloc.w - reference.w)) < 1e-6

    def test_objective_formula(self):
        market = MarketSpec(r=0.2, T=3, m=1.0, tau=2.5)
        rng = np.random.default_rng(32)
        h = rng.normal(0.2, 1.0, 50)
        stats = h_stats(h)
        alloc = solve_allocation(stats, market)
        expected = market.m * stats.mean + math.sqrt(market.tau - 1.0) * math.sqrt(stats.var)
        assert portfolio_objective(alloc.w, h) == pytest.approx(expected, rel=1e-12)

    def test_kkt_form_of_weights(self):
        # w_i = (k + h_i) / theta reproduces the direct expression.
        market = MarketSpec(r=0.2, T=3, m=1.0, tau=4.0)
        rng = np.random.default_rng(33)
        h = rng.normal(0.0, 1.5, 20)
        alloc = solve_allocation(h_stats(h), market)
        assert np.allclose(alloc.w, (alloc.k + h) / alloc.theta, rtol=1e-12, atol=1e-12)

    def test_single_project(self):
        market = MarketSpec(r=0.1, T=2, m=1.0, tau=2.0)
        alloc = solve_allocation(h_stats([0.4]), market)
        assert alloc.w == pytest.approx([1.0])
        assert alloc.binding is False


class TestOracleAllocation:
    def test_two_projects_hand_solution(self):
        # Maximize w2 on w1 + w2 = 2, w1^2 + w2^2 <= 4: w = (0, 2).
        market = MarketSpec(r=0.1, T=1, m=1.0, tau=2.0)
        alloc = oracle_allocation(np.array([0.0, 1.0]), market)
        assert alloc.w == pytest.approx([0.0, 2.0], abs=1e-8)
        assert alloc.binding is True

    def test_constant_returns(self):
        market = MarketSpec(r=0.1, T=1, m=1.3, tau=4.0)
        alloc = oracle_allocation(np.full(5, 0.9), market)
        assert np.all(alloc.w == 1.3)
        assert alloc.binding is False

    def test_point_feasible_set(self):
        market = MarketSpec(r=0.1, T=1, m=1.0, tau=1.0)
        alloc = oracle_allocation(np.array([0.1, 0.9]), market)
        assert np.all(alloc.w == 1.0)
        assert alloc.binding is True

    def test_equivalence_on_random_instances(self):
        rng = np.random.default_rng(34)
        for _ in range(60):
            n = int(rng.integers(2, 101))
            m = float(rng.uniform(0.3, 2.0))
            tau = m * m * float(rng.uniform(1.1, 5.0))
            market = MarketSpec(r=0.1, T=3, m=m, tau=tau)
            h = rng.normal(0.0, float(rng.uniform(0.1, 3.0)), n)
            closed = solve_allocation(h_stats(h), market)
            reference = oracle_allocation(h, market)
            gap = abs(
                portfolio_objective(closed.w, h) - portfolio_objective(reference.w, h)
            )
            assert gap < 1e-8
            assert_kkt(h, closed)
            assert_kkt(h, reference)

    def test_multipliers_match_closed_form(self):
        market = MarketSpec(r=0.1, T=3, m=1.0, tau=3.0)
        rng = np.random.default_rng(35)
        h = rng.normal(0.5, 1.2, 40)
        closed = solve_allocation(h_stats(h), market)
        reference = oracle_allocation(h, market)
        assert reference.theta == pytest.approx(closed.theta, rel=1e-9)
        assert reference.k == pytest.approx(closed.k, rel=1e-9, abs=1e-9)


class TestInvariants:
    def test_feasibility_residuals_on_solver_outputs(self):
        rng = np.random.default_rng(36)
        for _ in range(50):
            n = int(rng.integers(1, 60))
            market = MarketSpec(r=0.2, T=4, m=1.0, tau=float(rng.uniform(1.0, 6.0)))
            h = rng.normal(0.0, 1.0, n)
            for alloc in (solve_allocation(h_stats(h), market), oracle_allocation(h, market)):
                budget, concentration = feasibility_residuals(alloc.w, market)
                assert budget < 1e-9
                assert concentration < 1e-9
                assert alloc.theta >= 0.0

    def test_budget_scaling_binary_factors_exact(self):
        rng = np.random.default_rng(37)
        h = rng.normal(0.3, 1.1, 25)
        base_market = MarketSpec(r=0.15, T=6, m=1.0, tau=3.0)
        base = solve_allocation(h_stats(h), base_market)
        base_obj = portfolio_objective(base.w, h)
        for a in (0.5, 2.0):
            market = MarketSpec(r=0.15, T=6, m=a * 1.0, tau=a * a * 3.0)
            scaled = solve_allocation(h_stats(h), market)
            assert np.all(scaled.w == a * base.w)
            assert portfolio_objective(scaled.w, h) == a * base_obj

    def test_budget_scaling_arbitrary_factor(self):
        rng = np.random.default_rng(38)
        h = rng.normal(0.3, 1.1, 25)
        base = solve_allocation(h_stats(h), MarketSpec(r=0.15, T=6, m=1.0, tau=3.0))
        scaled = solve_allocation(h_stats(h), MarketSpec(r=0.15, T=6, m=10.0, tau=300.0))
        assert np.allclose(scaled.w, 10.0 * base.w, rtol=1e-14)

    def test_objective_nondecreasing_in_tau(self):
        rng = np.random.default_rng(39)
        h = rng.normal(0.0, 1.0, 30)
        stats = h_stats(h)
        objectives = []
        for tau in (1.0, 1.5, 2.0, 3.0, 5.0, 10.0):
            market = MarketSpec(r=0.1, T=2, m=1.0, tau=tau)
            objectives.append(portfolio_objective(solve_allocation(stats, market).w, h))
        assert all(x <= y + 1e-15 for x, y in zip(objectives, objectives[1:]))


class TestExtremeScales:
    # Both solvers must keep the feasibility invariants and agree even when
    # the unit returns sit far from unit scale.
    @pytest.mark.parametrize(
        "name, h",
        [
            ("tiny-deviation", np.concatenate([np.full(49, 0.7), [0.7 + 1e-300]])),
            ("huge-offset", 1e8 + np.random.default_rng(0).normal(0.0, 1e-4, 50)),
            ("huge-spread", np.random.default_rng(1).normal(0.0, 1e6, 50)),
            ("tiny-scale", np.random.default_rng(2).normal(0.0, 1e-8, 30)),
            ("mixed", 1e6 + np.random.default_rng(3).normal(0.0, 1.0, 40)),
        ],
    )
    def test_solvers_agree_and_stay_feasible(self, name, h):
        market = MarketSpec(r=0.1, T=3, m=1.0, tau=3.0)
        closed = solve_allocation(h_stats(h), market)
        reference = oracle_allocation(h, market)
        budget, concentration = feasibility_residuals(closed.w, market)
        assert budget < 1e-9
        assert concentration < 1e-9
        obj_closed = portfolio_objective(closed.w, h)
        obj_oracle = portfolio_objective(reference.w, h)
        assert obj_closed == pytest.approx(obj_oracle, rel=1e-10, abs=1e-12)


class TestMaxNpvPerProject:
    def test_identical_projects_zero_noise(self):
        n, T = 8, 5
        market = MarketSpec(r=0.07, T=T, m=1.2, tau=3.0)
        ensemble = ProjectEnsemble(
            c=np.full(n, 0.4), lam=np.full(n, 0.8), v=np.zeros(n)
        )
        X = CashFlowMatrix.zeros(n, T)
        value = max_npv_per_project(ensemble, X, market)
        expected = 1.2 * (-1.0 + unit_terminal_payoff(0.4, 0.8, 0.07, T))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_small_instance_matches_oracle_end_to_end(self):
        from npvmax.npv import total_npv, unit_returns

        market = MarketSpec(r=0.12, T=2, m=1.0, tau=2.0)
        dist = ParamDistributions(alpha=2.0, beta=5.0, gamma=0.9, v=1.0)
        ensemble = sample_ensemble(dist, 5, seed=21)
        X = sample_noise(ensemble, 2, "gaussian", seed=21)
        value = max_npv_per_project(ensemble, X, market)
        reference = oracle_allocation(unit_returns(ensemble, X, market), market)
        assert value == pytest.approx(
            total_npv(reference.w, ensemble, X, market) / 5, rel=1e-9
        )
