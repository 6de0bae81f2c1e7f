import math

import numpy as np
import pytest

import invqre


def test_collision_equilibrium_is_beeline():
    game, target = invqre.collision_scenario()
    assert target == [2, 2, 2, 2]
    out = invqre.solve_equilibrium(game)
    assert out.converged and out.certified
    assert out.residual_sq <= 1e-10
    beeline = 1.0 / (1.0 + 2.0 * math.exp(-(math.pi - 2.0) / 0.1))
    np.testing.assert_allclose(out.x[::3], beeline, rtol=1e-12)
    assert invqre.stationarity_residual(game, out.x) <= 1e-12


def test_game_json_round_trip():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 5))
    game = invqre.Game([2, 3], 0.7, rng.normal(size=5), a.T @ a)
    back = invqre.Game.from_json(game.to_json())
    assert back.dims == [2, 3]
    assert back.lambda_ == game.lambda_
    assert np.array_equal(back.b, game.b)
    assert np.array_equal(back.C, game.C)


def test_errors_carry_the_kind():
    with pytest.raises(invqre.InvqreError, match="NonPositiveLambda"):
        invqre.Game([2], -1.0, np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(ValueError, match="DimensionMismatch"):
        invqre.Game([2], 1.0, np.zeros(3), np.zeros((2, 2)))
    with pytest.raises(invqre.InvqreError, match="ParseError"):
        invqre.Game.from_json("{")


def test_gumbel_matches_logit():
    cost = np.array([2.0, math.pi, math.pi])
    freq = invqre.simulate_gumbel_choice(cost, 0.1, 200_000, seed=3)
    p = np.exp(-cost / 0.1)
    p /= p.sum()
    assert 0.5 * np.abs(freq - p).sum() <= 0.01


def _conic_min_norm(game, target, eps):
    """Min ||C||_F^2 over the margin constraints and the cone, by a conic solver."""
    cp = pytest.importorskip("cvxpy")
    dims = game.dims
    m = sum(dims)
    offsets = np.cumsum([0] + dims)
    C = cp.Variable((m, m))
    S = cp.Variable((m, m), symmetric=True)
    cons = [S == (C + C.T) / 2, S >> 0]
    for i in range(len(dims)):
        blk = C[offsets[i]:offsets[i + 1], offsets[i]:offsets[i + 1]]
        cons.append(blk == blk.T)
    for normal, beta in invqre.margin_constraints(game, target, eps):
        cons.append(cp.sum(cp.multiply(normal, C)) <= beta)
    problem = cp.Problem(cp.Minimize(cp.sum_squares(C)), cons)
    problem.solve(solver=cp.CLARABEL)
    assert problem.status == cp.OPTIMAL
    return C.value


@pytest.mark.parametrize("eps", [0.5, 3.0])
def test_min_norm_design_matches_conic_solver(eps):
    game, target = invqre.collision_scenario()
    res = invqre.solve_min_norm_design(game, target, epsilon=eps)
    assert res.status == "Converged"
    ref = _conic_min_norm(game, target, eps)
    assert res.c_norm == pytest.approx(np.linalg.norm(ref), rel=1e-5)
    assert np.abs(res.C - ref).max() <= 1e-3 * np.abs(ref).max()


def test_bilevel_potential_delay_spreads_service():
    game = invqre.fair_game()
    res = invqre.run_projected_gradient(game, "potential_delay", rho=10.0, alpha=1e-3)
    assert res.converged
    totals = res.x.reshape(3, 9).sum(axis=0)
    assert np.all(np.abs(totals * 3 - 1) <= 0.1)
    assert res.objective_value == pytest.approx(27.0, rel=1e-6)


def test_implicit_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    a = rng.normal(scale=0.5, size=(6, 6))
    C = a.T @ a
    game = invqre.Game([3, 3], 0.8, rng.normal(size=6), C)
    value, grad = invqre.objective("kl", [3, 3], target=[0, 2])
    x = invqre.solve_equilibrium(game, residual_tol=1e-26).x
    analytic = invqre.implicit_gradient(game, x, grad(x))
    h = 1e-5
    fd = np.zeros_like(C)
    for p in range(6):
        for q in range(6):
            hi, lo = C.copy(), C.copy()
            hi[p, q] += h
            lo[p, q] -= h
            xs = [invqre.solve_equilibrium(invqre.Game([3, 3], 0.8, game.b, M), residual_tol=1e-26).x
                  for M in (hi, lo)]
            fd[p, q] = (value(xs[0]) - value(xs[1])) / (2 * h)
    assert np.abs(analytic - fd).max() / np.abs(fd).max() <= 1e-4


def test_projection_membership():
    rng = np.random.default_rng(2)
    c = rng.normal(size=(5, 5)) * 3
    p = invqre.project_feasible(c, [2, 3], 1.5)
    assert np.linalg.norm(p) <= 1.5 + 1e-9
    assert np.linalg.eigvalsh(p + p.T).min() >= -1e-9
    np.testing.assert_allclose(invqre.project_feasible(p, [2, 3], 1.5), p, atol=1e-10)


def test_epsilon_sweep_csv():
    csv = invqre.sweep_epsilon_csv([0.5, 1.0])
    lines = csv.strip().split("\n")
    assert lines[0].startswith("sweep_param,psi_value")
    assert len(lines) == 3
