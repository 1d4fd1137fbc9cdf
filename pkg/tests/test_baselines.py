import numpy as np
import pytest

from fpihf.baselines import (
    CondatVuConfig,
    condat_vu_autoconfig,
    condat_vu_solve,
    fpif_operators,
    fpif_solve,
    fpif_step_bound,
)
from fpihf.exceptions import ConfigurationError
from fpihf.opcore import discrete_gradient_matrix
from fpihf.problems import ProblemInstance, generate_instance
from fpihf.solvers import lstv_solve


def test_autoconfig_with_explicit_tau():
    cfg = condat_vu_autoconfig(5.0, 1.0, 2.0, tau=0.2)
    assert cfg.sigma == pytest.approx(0.625, rel=1e-15)
    assert cfg.delta(5.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert cfg.rho == pytest.approx(0.99, rel=1e-15)
    cfg.validate(5.0, 1.0)


def test_autoconfig_sigma_shrinks_with_norm_at_fixed_tau():
    small = condat_vu_autoconfig(5.0, 1.0, tau=0.002)
    large = condat_vu_autoconfig(5.0, 10.0, tau=0.002)
    assert large.sigma < small.sigma


def test_autoconfig_tau_shrinks_with_norm():
    assert condat_vu_autoconfig(5.0, 10.0).tau < condat_vu_autoconfig(5.0, 1.0).tau


def test_autoconfig_without_smooth_term():
    cfg = condat_vu_autoconfig(5.0, 0.0, 2.0, tau=0.2)
    assert cfg.sigma * 4.0 == pytest.approx(1 / 0.2)
    assert cfg.delta(5.0, 0.0) == 2.0
    assert cfg.rho == pytest.approx(1.98)


@pytest.mark.parametrize("norm_A", [0.1, 1.0, 3.0, 30.0])
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9])
def test_autoconfig_is_always_admissible(norm_A, frac):
    cfg = condat_vu_autoconfig(5.0, norm_A, tau_fraction=frac)
    cfg.validate(5.0, norm_A)
    assert cfg.delta(5.0, norm_A) == pytest.approx(1.0)


def test_validate_names_violations():
    with pytest.raises(ConfigurationError, match=r"sigma \|\|L\|\|\^2 <= 1/tau"):
        CondatVuConfig(0.2, 1.0, 0.5).validate(5.0, 1.0)
    with pytest.raises(ConfigurationError, match="rho in"):
        CondatVuConfig(0.2, 0.625, 1.5).validate(5.0, 1.0)
    with pytest.raises(ConfigurationError, match="positive"):
        CondatVuConfig(-0.2, 0.625, 0.5).validate(5.0, 1.0)
    with pytest.raises(ConfigurationError, match=r"1/tau > alpha1"):
        condat_vu_autoconfig(5.0, 1.0, tau=1.0)


def test_condat_vu_trivial_zero_solution():
    N = 5
    inst = ProblemInstance(np.eye(N), np.zeros(N), np.full(N, -1e6), np.full(N, 1e6), 5.0, 0.0)
    rep = condat_vu_solve(inst, tol=1e-12)
    assert rep.converged
    np.testing.assert_allclose(rep.x, 0.0, atol=1e-12)


def test_condat_vu_rejects_bad_config():
    inst = generate_instance(10, 5, 1 / 5)
    with pytest.raises(ConfigurationError):
        condat_vu_solve(inst, CondatVuConfig(10.0, 10.0, 0.5))


def test_condat_vu_one_iteration_by_hand():
    inst = generate_instance(8, 4, 1 / 5, seed=7)
    cfg = condat_vu_autoconfig(inst.alpha1, inst.norm_A)
    rep = condat_vu_solve(inst, cfg, max_iter=1)
    D = discrete_gradient_matrix(8)
    x, u = np.zeros(8), np.zeros(7)
    p = np.clip(x - cfg.tau * (5 * inst.A.T @ (inst.A @ x - inst.z) + D.T @ u),
                inst.lower, inst.upper)
    # dual prox of (0.5 ||.||_1)^* is the clip onto [-0.5, 0.5]
    q = np.clip(u + cfg.sigma * D @ (2 * p - x), -0.5, 0.5)
    np.testing.assert_allclose(rep.x, x + cfg.rho * (p - x), atol=1e-14)
    np.testing.assert_allclose(rep.u, u + cfg.rho * (q - u), atol=1e-14)


def test_fpif_step_window():
    assert fpif_step_bound(5.0) == 0.2
    assert fpif_step_bound(1.0) == 0.5
    inst = generate_instance(10, 5, 1 / 5)
    with pytest.raises(ConfigurationError, match=r"gamma < 1/max\(\|\|D\|\|, alpha1\)"):
        fpif_solve(inst, gamma=0.2)
    rep = fpif_solve(inst, gamma=0.25, override_stepsize=True, max_iter=3)
    assert rep.iterations == 3


def test_fpif_matches_stacked_engine():
    inst = generate_instance(20, 10, 1 / 5, seed=11)
    N, K = inst.N, inst.K
    D = discrete_gradient_matrix(N)
    n = N + K + N - 1
    # independently assembled skew-plus-gradient operator on (x, w, u)
    M = np.zeros((n, n))
    M[:N, N + K:] = D.T
    M[N:N + K, N:N + K] = inst.alpha1 * np.eye(K)
    M[N + K:, :N] = -D
    shift = np.concatenate([np.zeros(N), -inst.alpha1 * inst.z, np.zeros(N - 1)])
    T = np.hstack([inst.A, -np.eye(K)])
    PV = np.eye(N + K) - T.T @ np.linalg.solve(T @ T.T, T)
    P = np.eye(n)
    P[:N + K, :N + K] = PV

    def J(v, g):
        out = v.copy()
        out[:N] = np.clip(v[:N], inst.lower, inst.upper)
        out[N + K:] = np.clip(v[N + K:], -inst.alpha2, inst.alpha2)
        return out

    gamma = 0.19
    x = np.zeros(n)
    y = np.zeros(n)
    ref = []
    for _ in range(60):
        Bx = M @ x + shift
        p = J(x + gamma * y - gamma * P @ Bx, gamma)
        r = P @ p
        x = r + gamma * P @ (Bx - (M @ r + shift))
        y = y - (p - r) / gamma
        ref.append(x.copy())

    seen = []
    fpif_solve(inst, gamma=gamma, tol=0, max_iter=60,
               callback=lambda k, res, obj, st: seen.append(st["x"].copy()))
    assert np.max(np.abs(np.array(seen) - np.array(ref))) <= 1e-12


def test_fpif_operators_lipschitz_bound():
    inst = generate_instance(15, 8, 1 / 5)
    _, B, _ = fpif_operators(inst)
    assert B.lipschitz_constant == 5.0
    rng = np.random.default_rng(0)
    n = 15 + 8 + 14
    for _ in range(20):
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        assert np.linalg.norm(B(a) - B(b)) <= 5.0 * np.linalg.norm(a - b) + 1e-12
        # monotone
        assert (B(a) - B(b)) @ (a - b) >= -1e-12


@pytest.mark.parametrize("kappa", [1 / 30, 1 / 5])
def test_baselines_agree_with_lstv(kappa):
    inst = generate_instance(60, 30, kappa, seed=0)
    ref = lstv_solve(inst, tol=1e-8, max_iter=200000)
    cv = condat_vu_solve(inst, tol=1e-8, max_iter=200000)
    ff = fpif_solve(inst, tol=1e-8, max_iter=200000)
    assert ref.converged and cv.converged and ff.converged
    assert cv.objective == pytest.approx(ref.objective, rel=1e-5)
    assert ff.objective == pytest.approx(ref.objective, rel=1e-5)


def test_fpif_dual_prox_is_clip():
    # conjugate prox used by the FPIF resolvent equals the clip onto [-alpha2, alpha2]
    inst = generate_instance(6, 3, 1 / 5)
    J, _, _ = fpif_operators(inst)
    v = np.linspace(-2, 2, 6 + 3 + 5)
    out = J(v, 0.1)
    np.testing.assert_allclose(out[9:], np.clip(v[9:], -0.5, 0.5), atol=1e-15)
