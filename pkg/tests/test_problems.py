import math

import numpy as np
import pytest

from extracd.data import CscMatrix, gen_correlated_gaussian
from extracd.errors import ArgumentError
from extracd.problems import (ElasticNet, GroupLasso, Lasso, LogRegL1,
                              LogRegL2, Quadratic, coordinate_lipschitz,
                              datafit_gradient, datafit_value, duality_gap,
                              groups_from_size, lambda_max, objective_value,
                              penalty_value, prox_coordinate, prox_group,
                              ridge_quadratic, stopping_measure,
                              tikhonov_for_condition)
from extracd.solvers import SolverConfig, solve


def make_instances(n=25, p=12, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, p))
    A = CscMatrix.from_dense(M)
    y = rng.standard_normal(n)
    yb = np.where(rng.random(n) > 0.5, 1.0, -1.0)
    groups = groups_from_size(p, 4)
    return {
        "lasso": Lasso(A, y, 0.7),
        "enet": ElasticNet(A, y, 0.4, 0.2),
        "logreg_l1": LogRegL1(A, yb, 0.3),
        "logreg_l2": LogRegL2(A, yb, 0.5),
        "group": GroupLasso(A, y, 0.6, groups),
    }, M, y, yb


class TestObjectives:
    def test_hand_formulas(self):
        probs, M, y, yb = make_instances()
        rng = np.random.default_rng(1)
        x = rng.standard_normal(12)
        Ax = M @ x
        r = y - Ax
        n = 25

        assert math.isclose(objective_value(probs["lasso"], x),
                            0.5 * r @ r + 0.7 * np.abs(x).sum(),
                            rel_tol=1e-12)
        assert math.isclose(
            objective_value(probs["enet"], x),
            r @ r / (2 * n) + 0.4 * np.abs(x).sum() + 0.1 * x @ x,
            rel_tol=1e-12)
        assert math.isclose(
            objective_value(probs["logreg_l1"], x),
            np.log1p(np.exp(-yb * Ax)).sum() + 0.3 * np.abs(x).sum(),
            rel_tol=1e-12)
        assert math.isclose(
            objective_value(probs["logreg_l2"], x),
            np.log1p(np.exp(-yb * Ax)).sum() + 0.25 * x @ x,
            rel_tol=1e-12)
        gnorm = sum(np.linalg.norm(x[g]) for g in probs["group"].groups)
        assert math.isclose(objective_value(probs["group"], x),
                            0.5 * r @ r + 0.6 * gnorm, rel_tol=1e-12)

    def test_quadratic_objective(self):
        H = np.array([[2.0, 0.3], [0.3, 1.0]])
        quad = Quadratic(H, np.array([1.0, -1.0]))
        x = np.array([0.5, 2.0])
        expected = 0.5 * x @ H @ x + x @ [1.0, -1.0]
        assert math.isclose(objective_value(quad, x), expected)
        assert penalty_value(quad, x) == 0.0

    def test_precomputed_ax_consistent(self):
        probs, M, _, _ = make_instances(seed=2)
        x = np.random.default_rng(3).standard_normal(12)
        for prob in probs.values():
            assert math.isclose(objective_value(prob, x),
                                objective_value(prob, x, Ax=M @ x),
                                rel_tol=1e-12)

    def test_logistic_overflow_safe(self):
        probs, M, _, _ = make_instances(seed=4)
        x = np.full(12, 50.0)
        v = objective_value(probs["logreg_l1"], x)
        assert np.isfinite(v)


class TestGradients:
    def test_finite_differences_in_prediction_space(self):
        probs, M, y, yb = make_instances(seed=5)
        rng = np.random.default_rng(6)
        x = rng.standard_normal(12) * 0.3
        Ax = M @ x
        h = 1e-6
        for name, prob in probs.items():
            g = datafit_gradient(prob, Ax)
            for i in (0, 7, 24):
                e = np.zeros(25)
                e[i] = h
                fd = (datafit_value(prob, x, Ax + e)
                      - datafit_value(prob, x, Ax - e)) / (2 * h)
                assert math.isclose(g[i], fd, rel_tol=1e-5, abs_tol=1e-7), \
                    name

    def test_quadratic_gradient_fd(self):
        quad = ridge_quadratic(
            gen_correlated_gaussian(15, 8, seed=7)[0], kappa=50.0)
        x = np.random.default_rng(8).standard_normal(8)
        g = quad.gradient(x)
        h = 1e-6
        for i in range(8):
            e = np.zeros(8)
            e[i] = h
            fd = (quad.value(x + e) - quad.value(x - e)) / (2 * h)
            assert math.isclose(g[i], fd, rel_tol=1e-5, abs_tol=1e-8)

    def test_quadratic_has_no_prediction_gradient(self):
        quad = Quadratic(np.eye(2), np.zeros(2))
        with pytest.raises(ArgumentError):
            datafit_gradient(quad, np.zeros(2))


class TestLipschitz:
    def test_values(self):
        probs, M, _, _ = make_instances(seed=9)
        col = (M * M).sum(axis=0)
        np.testing.assert_allclose(coordinate_lipschitz(probs["lasso"]), col)
        np.testing.assert_allclose(coordinate_lipschitz(probs["enet"]),
                                   col / 25 + 0.2)
        np.testing.assert_allclose(coordinate_lipschitz(probs["logreg_l1"]),
                                   col / 4.0)
        np.testing.assert_allclose(coordinate_lipschitz(probs["logreg_l2"]),
                                   col / 4.0)
        expect_g = [np.linalg.norm(M[:, g], 2) ** 2
                    for g in probs["group"].groups]
        np.testing.assert_allclose(coordinate_lipschitz(probs["group"]),
                                   expect_g)

    def test_quadratic_diagonal(self):
        H = np.diag([3.0, 5.0]) + 0.1
        quad = Quadratic(H, np.zeros(2))
        np.testing.assert_allclose(coordinate_lipschitz(quad), np.diag(H))


def prox_oracle_1d(v, pen_grad_left, pen_grad_right, lo, hi, iters=200):
    """Bisection on the subgradient sign of u -> 0.5(u-v)^2 + pen(u)."""
    def slope_sign(u):
        lo_s = u - v + pen_grad_left(u)
        hi_s = u - v + pen_grad_right(u)
        if hi_s < 0:
            return -1
        if lo_s > 0:
            return 1
        return 0

    a, b = lo, hi
    for _ in range(iters):
        mid = 0.5 * (a + b)
        s = slope_sign(mid)
        if s == 0:
            return mid
        if s < 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


class TestProx:
    @pytest.mark.parametrize("name", ["lasso", "enet", "logreg_l1",
                                      "logreg_l2"])
    def test_coordinate_prox_against_bisection(self, name):
        probs, _, _, _ = make_instances(seed=10)
        prob = probs[name]
        rng = np.random.default_rng(11)
        for _ in range(100):
            v = float(rng.uniform(-4, 4))
            step = float(rng.uniform(0.01, 3.0))
            got = prox_coordinate(prob, 0, v, step)
            if name in ("lasso", "logreg_l1"):
                pl = lambda u: step * (np.sign(u) if u else -1.0)
                ph = lambda u: step * (np.sign(u) if u else 1.0)
            elif name == "enet":
                rho_eff = step * prob.rho / prob.lam
                pl = lambda u: step * (np.sign(u) if u else -1.0) \
                    + rho_eff * u
                ph = lambda u: step * (np.sign(u) if u else 1.0) \
                    + rho_eff * u
            else:
                pl = ph = lambda u: step * u
            ref = prox_oracle_1d(v, pl, ph, -10.0, 10.0)
            assert abs(got - ref) < 1e-8

    def test_quadratic_prox_is_identity(self):
        quad = Quadratic(np.eye(2), np.zeros(2))
        assert prox_coordinate(quad, 1, 1.23, 0.5) == 1.23

    def test_group_prox_radial_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            v = rng.standard_normal(4) * rng.uniform(0.1, 3.0)
            thr = float(rng.uniform(0.0, 3.0))
            got = prox_group(v, thr)
            nv = np.linalg.norm(v)
            # radial reduction: scale s minimizes 0.5(s - |v|)^2 + thr*s
            s = prox_oracle_1d(nv, lambda u: thr, lambda u: thr, 0.0, 10.0)
            s = max(s, 0.0)
            ref = v * (s / nv) if nv > 0 else np.zeros_like(v)
            np.testing.assert_allclose(got, ref, atol=1e-8)

    def test_group_prox_zeroes_small_blocks(self):
        v = np.array([0.3, -0.4])  # norm 0.5
        np.testing.assert_array_equal(prox_group(v, 0.5), np.zeros(2))
        np.testing.assert_array_equal(prox_group(v, 0.6), np.zeros(2))

    def test_validation(self):
        probs, _, _, _ = make_instances(seed=13)
        with pytest.raises(ArgumentError):
            prox_coordinate(probs["lasso"], 0, 1.0, -0.1)
        with pytest.raises(ArgumentError):
            prox_coordinate(probs["group"], 0, 1.0, 0.1)
        with pytest.raises(ArgumentError):
            prox_group(np.ones(2), -1.0)


class TestLambdaMax:
    def test_closed_forms(self):
        probs, M, y, yb = make_instances(seed=14)
        assert math.isclose(lambda_max(probs["lasso"]),
                            np.abs(M.T @ y).max(), rel_tol=1e-12)
        assert math.isclose(lambda_max(probs["enet"]),
                            np.abs(M.T @ y).max() / 25, rel_tol=1e-12)
        assert math.isclose(lambda_max(probs["logreg_l1"]),
                            np.abs(M.T @ yb).max() / 2, rel_tol=1e-12)
        expect = max(np.linalg.norm((M.T @ y)[g])
                     for g in probs["group"].groups)
        assert math.isclose(lambda_max(probs["group"]), expect,
                            rel_tol=1e-12)

    def test_zero_optimal_at_lambda_max(self):
        # at lam >= lambda_max the zero vector is a minimizer
        probs, M, y, yb = make_instances(seed=15)
        for name in ("lasso", "enet", "logreg_l1", "group"):
            base = probs[name]
            lmax = lambda_max(base)
            if name == "lasso":
                prob = Lasso(base.A, y, lmax)
            elif name == "enet":
                prob = ElasticNet(base.A, y, lmax, base.rho)
            elif name == "logreg_l1":
                prob = LogRegL1(base.A, yb, lmax)
            else:
                prob = GroupLasso(base.A, y, lmax, base.groups)
            assert stopping_measure(prob, np.zeros(12)) < 1e-10, name

    def test_refused_for_smooth_penalties(self):
        probs, _, _, _ = make_instances(seed=16)
        with pytest.raises(ArgumentError):
            lambda_max(probs["logreg_l2"])
        with pytest.raises(ArgumentError):
            lambda_max(Quadratic(np.eye(2), np.zeros(2)))


class TestDualityGap:
    def test_weak_duality_random_points(self):
        probs, _, _, _ = make_instances(seed=17)
        rng = np.random.default_rng(18)
        for name in ("lasso", "enet", "logreg_l1"):
            prob = probs[name]
            for _ in range(10):
                x = rng.standard_normal(12) * rng.uniform(0.1, 2.0)
                rep = duality_gap(prob, x)
                assert rep.gap >= 0.0
                assert rep.primal - rep.dual <= rep.gap + 1e-12
                assert math.isclose(rep.primal, objective_value(prob, x),
                                    rel_tol=1e-12)

    def test_gap_vanishes_at_optimum(self):
        probs, _, _, _ = make_instances(seed=19)
        for name in ("lasso", "enet", "logreg_l1"):
            cfg = SolverConfig(algorithm="pcd_anderson", max_epochs=3000,
                               tol=1e-12)
            trace = solve(probs[name], cfg)
            rep = duality_gap(probs[name], trace.x)
            assert rep.gap <= 1e-10, name

    def test_none_for_problems_without_dual(self):
        probs, _, _, _ = make_instances(seed=20)
        assert duality_gap(probs["logreg_l2"], np.zeros(12)) is None
        assert duality_gap(probs["group"], np.zeros(12)) is None
        assert duality_gap(Quadratic(np.eye(2), np.zeros(2)),
                           np.zeros(2)) is None

    def test_stationarity_measures_vanish_at_optimum(self):
        probs, _, _, _ = make_instances(seed=21)
        for name in ("logreg_l2", "group"):
            cfg = SolverConfig(algorithm="pcd_anderson", max_epochs=5000,
                               tol=1e-11)
            trace = solve(probs[name], cfg)
            assert stopping_measure(probs[name], trace.x) < 1e-8, name

    def test_quadratic_stationarity_is_gradient_norm(self):
        quad = Quadratic(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
        x = np.array([0.5, -0.5])
        expect = np.abs(quad.gradient(x)).max()
        assert math.isclose(stopping_measure(quad, x), expect)
        assert stopping_measure(quad, quad.solve()) < 1e-12


class TestGroupsAndRidge:
    def test_groups_from_size(self):
        groups = groups_from_size(10, 4)
        assert [g.tolist() for g in groups] == [[0, 1, 2, 3], [4, 5, 6, 7],
                                                [8, 9]]
        with pytest.raises(ArgumentError):
            groups_from_size(10, 0)

    def test_group_partition_validated(self):
        A = CscMatrix.from_dense(np.eye(4))
        y = np.zeros(4)
        with pytest.raises(ArgumentError):
            GroupLasso(A, y, 1.0, (np.array([0, 1]),))
        with pytest.raises(ArgumentError):
            GroupLasso(A, y, 1.0, (np.array([0, 1]), np.array([1, 2, 3])))

    def test_tikhonov_for_condition(self):
        eigs = np.array([0.0, 0.5, 4.0])
        shift = tikhonov_for_condition(eigs, 100.0)
        w = eigs + shift
        assert math.isclose(w.max() / w.min(), 100.0, rel_tol=1e-9)
        # already better conditioned than requested: no shift
        assert tikhonov_for_condition(np.array([1.0, 2.0]), 100.0) == 0.0
        with pytest.raises(ArgumentError):
            tikhonov_for_condition(eigs, 1.0)

    def test_ridge_quadratic_structure(self):
        ds, _ = gen_correlated_gaussian(10, 6, seed=22)
        M = ds.A.toarray()
        quad = ridge_quadratic(ds, kappa=30.0)
        w = np.linalg.eigvalsh(quad.H)
        assert math.isclose(w[-1] / w[0], 30.0, rel_tol=1e-6)
        np.testing.assert_allclose(quad.b, -M.T @ ds.y, atol=1e-12)
        shift = quad.H[0, 0] - (M.T @ M)[0, 0]
        np.testing.assert_allclose(quad.H, M.T @ M + shift * np.eye(6),
                                   atol=1e-10)

    def test_label_validation(self):
        A = CscMatrix.from_dense(np.eye(3))
        with pytest.raises(ArgumentError):
            LogRegL1(A, np.array([0.0, 1.0, 2.0]), 0.5)
        with pytest.raises(ArgumentError):
            Lasso(A, np.zeros(3), -1.0)
