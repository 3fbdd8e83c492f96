import numpy as np
import pytest

from lie_cubics import algebra as al
from lie_cubics import diagnostics as dg
from lie_cubics.errors import TooShort
from lie_cubics.integrators import HOHPState, StepParams, flow

FIG2 = HOHPState.make(np.eye(3), (-6, 1, 0), (0, 36, 0), (0, 0, 6))


def random_state(rng, scale=1.0):
    return HOHPState.make(al.cay(rng.normal(size=3)), *(scale * rng.normal(size=(3, 3))))


def test_hamiltonian_of_figure_data():
    assert dg.hamiltonian(FIG2) == 54.0


def test_momentum_map_identity_group():
    s = HOHPState.make(np.eye(3), mu=(1, 2, 3))
    assert np.array_equal(dg.momentum_map(s), [1, 2, 3])


def test_omega_matrix_matches_symplectic_form():
    rng = np.random.default_rng(0)
    s = random_state(rng)
    W = dg.omega_matrix(s.mu)
    assert np.allclose(W, -W.T)
    for _ in range(5):
        a, b = rng.normal(size=(2, 12))
        v1, v2 = dg.TangentVariation.from_array(a), dg.TangentVariation.from_array(b)
        assert np.isclose(dg.symplectic_form(s, v1, v2), a @ W @ b)
        assert np.array_equal(v1.as_array(), a)


@pytest.mark.parametrize("scheme", ["euler", "sv"])
def test_zero_momentum_step_is_symplectic(scheme):
    s = HOHPState.make(np.eye(3), (0.4, -0.2, 0.7))
    assert dg.check_symplectic(scheme, s, StepParams(0.1), 1e-5) <= 1e-8


def test_non_symplectic_map_is_detected():
    def bad(s, p):
        return HOHPState(s.g, s.xi + p.h * s.nu, 1.1 * s.mu, s.nu)

    s = random_state(np.random.default_rng(1))
    assert dg.check_symplectic(bad, s, StepParams(0.1), 1e-5) > 1e-2


def test_check_symplectic_rejects_bad_eps():
    with pytest.raises(ValueError):
        dg.check_symplectic("sv", FIG2, StepParams(0.1), 0.0)


def test_step_jacobian_of_zero_map_structure():
    J, _ = dg.step_jacobian("euler", HOHPState.make(np.eye(3)), StepParams(0.1), 1e-6)
    # with mu = nu = xi = 0 the step is linear: xi' = xi + h nu
    assert np.allclose(J[3:6, 9:12], 0.1 * np.eye(3), atol=1e-12)


def test_fit_slope_exact_power_law():
    hs = np.array([0.1, 0.05, 0.025])
    assert dg.fit_slope(hs, 3 * hs ** 2) == pytest.approx(2.0, abs=1e-12)


def test_convergence_report_validation():
    with pytest.raises(ValueError):
        dg.ConvergenceReport([0.1, 0.2, 0.3], [1, 1, 1], 0.0)
    rep = dg.ConvergenceReport([0.2, 0.1, 0.05], [1e-2, 5e-3, 2.5e-3], 1.0, "euler", 1.0)
    assert rep.to_dict()["errors"][1] == 5e-3


def test_convergence_order_zero_momentum():
    # velocities and momenta are exact; the group error comes from cay
    s0 = HOHPState.make(np.eye(3), (0.5, 0.2, -0.3))
    hs = [0.1, 0.05, 0.025]
    T = 1.0
    ref_n = 320
    ref = flow(s0, StepParams(T / ref_n), ref_n, "euler")[-1]
    for h in hs:
        n = round(T / h)
        out = flow(s0, StepParams(T / n), n, "euler")[-1]
        assert np.allclose(out.xi, ref.xi, atol=0, rtol=0)
        assert np.array_equal(out.mu, ref.mu) and np.array_equal(out.nu, ref.nu)
    rep = dg.convergence_order("euler", s0, T, hs)
    assert rep.slope == pytest.approx(2.0, abs=0.1)


def test_convergence_order_rejects_bad_steps():
    with pytest.raises(ValueError):
        dg.convergence_order("sv", FIG2, 1.0, [0.1, 0.05])
    with pytest.raises(ValueError):
        dg.convergence_order("sv", FIG2, 1.0, [0.3, 0.1, 0.05])


def test_nhp_residual_too_short():
    with pytest.raises(TooShort):
        dg.nhp_residual(np.zeros((6, 3)), 0.1)


def test_nhp_residual_of_constant_velocity():
    # constant xi solves the equation; only stencil round-off remains
    xi = np.tile([0.3, 0.1, -0.2], (20, 1))
    assert max(dg.nhp_residual(xi, 0.01)) < 1e-9
    assert len(dg.nhp_residual(xi, 0.01)) == 14


def test_sv_energy_stays_bounded():
    # the Hamiltonian oscillates with an O(h^4) amplitude on this orbit and
    # shows no secular growth over many periods
    h = 2 * np.pi / 400
    traj = flow(FIG2, StepParams(h), 4000, "sv")
    dH = np.abs(dg.energy_history(traj) - 54.0)
    first = dH[:400].max()
    assert dH.max() <= 1.1 * first
    traj2 = flow(FIG2, StepParams(h / 2), 800, "sv")
    ratio = first / np.abs(dg.energy_history(traj2) - 54.0).max()
    assert 12 < ratio < 20


def test_continuous_solution_is_periodic_and_conserves_energy():
    out = dg.continuous_solution(FIG2, 2 * np.pi)
    assert dg.state_distance(out, FIG2) < 1e-9
    assert abs(dg.hamiltonian(out) - 54.0) < 1e-9


def test_momentum_drift_and_state_distance():
    s = random_state(np.random.default_rng(2))
    traj = flow(s, StepParams(0.05), 100, "euler")
    assert dg.momentum_drift(traj) < 1e-12
    assert dg.state_distance(s, s) == 0.0
