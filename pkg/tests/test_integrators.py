import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lie_cubics import algebra as al
from lie_cubics import diagnostics as dg
from lie_cubics.errors import InvariantError, NonConvergence
from lie_cubics.integrators import (HOHPState, StepParams, euler_step, flow, get_step, sv_step,
                                    sv_residual, trajectory_arrays)

import oracles

FIG2 = HOHPState.make(np.eye(3), (-6, 1, 0), (0, 36, 0), (0, 0, 6))


def random_state(rng, scale=1.0):
    return HOHPState.make(al.cay(rng.normal(size=3)), *(scale * rng.normal(size=(3, 3))))


def assert_matches_oracle(out, ref, tol):
    g1, xi1, mu1, nu1 = (np.array(oracles.to_float(m)) for m in ref)
    assert np.max(np.abs(out.g - g1)) <= tol
    for a, b in ((out.xi, xi1), (out.mu, mu1), (out.nu, nu1)):
        assert np.max(np.abs(a - b)) <= tol * max(1.0, np.abs(b).max())


def test_state_roundtrip_and_validation():
    s = random_state(np.random.default_rng(0))
    t = HOHPState.from_array(s.as_array())
    assert np.array_equal(t.g, s.g) and np.array_equal(t.mu, s.mu)
    with pytest.raises(InvariantError):
        HOHPState.make(np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(InvariantError):
        StepParams(0.0)
    with pytest.raises(InvariantError):
        StepParams(0.1, fp_max_iter=0)


def test_euler_matches_oracle_random_state():
    s = random_state(np.random.default_rng(3))
    h = 1e-2
    assert_matches_oracle(euler_step(s, StepParams(h)),
                          oracles.euler_step(s.g, s.xi, s.mu, s.nu, h), 1e-13)


def test_sv_matches_oracle_on_figure_data():
    h = 2 * np.pi / 1000
    out = sv_step(FIG2, StepParams(h, fp_tol=1e-14))
    assert_matches_oracle(out, oracles.sv_step(FIG2.g, FIG2.xi, FIG2.mu, FIG2.nu, h), 1e-12)


def test_sv_matches_oracle_random_state():
    s = random_state(np.random.default_rng(4), 2.0)
    h = 0.05
    out = sv_step(s, StepParams(h, fp_tol=1e-14))
    assert_matches_oracle(out, oracles.sv_step(s.g, s.xi, s.mu, s.nu, h), 1e-12)


@pytest.mark.parametrize("step", [euler_step, sv_step])
def test_zero_momentum_is_uniform_rotation(step):
    s = HOHPState.make(np.eye(3), (0.3, -0.1, 0.2))
    out = step(s, StepParams(0.1))
    assert np.array_equal(out.xi, s.xi)
    assert np.array_equal(out.mu, np.zeros(3)) and np.array_equal(out.nu, np.zeros(3))
    assert np.allclose(out.g, al.cay(0.1 * s.xi), atol=1e-15)


def test_sv_residual_small_after_step():
    s = random_state(np.random.default_rng(5))
    p = StepParams(0.1)
    out = sv_step(s, p)
    assert np.linalg.norm(sv_residual(out.xi, s, p.h)) <= p.fp_tol


def test_sv_nonconvergence_for_huge_step():
    s = HOHPState.make(np.eye(3), (1, 2, 3), (50, -80, 30), (1, 1, 1))
    with pytest.raises(NonConvergence) as exc:
        flow(s, StepParams(2.0, fp_max_iter=20), 3, "sv")
    assert exc.value.step == 0
    assert exc.value.iterations == 20


def test_schemes_agree_on_nu_update():
    # both schemes update nu with the same multiplier that drives mu
    s = random_state(np.random.default_rng(6))
    for step in (euler_step, sv_step):
        out = step(s, StepParams(0.05))
        mc = (s.nu - out.nu) / 0.05
        Xi = out.xi if step is euler_step else 0.5 * (s.xi + out.xi)
        assert np.allclose(al.dcay_inv_star(-0.05 * Xi, mc), out.mu, atol=1e-13)


def test_get_step():
    assert get_step("sv") is sv_step and get_step(euler_step) is euler_step
    with pytest.raises(ValueError):
        get_step("rk4")


def test_flow_basic_properties():
    s = random_state(np.random.default_rng(7))
    p = StepParams(0.01)
    assert flow(s, p, 0, "sv") == [s]
    full = flow(s, p, 10, "sv")
    assert len(full) == 11
    tail = flow(full[4], p, 6, "sv")
    assert dg.state_distance(tail[-1], full[-1]) == 0.0
    g, xi, mu, nu = trajectory_arrays(full)
    assert g.shape == (11, 3, 3) and nu.shape == (11, 3)
    with pytest.raises(ValueError):
        flow(s, p, -1)


@pytest.mark.parametrize("scheme", ["euler", "sv"])
def test_left_invariance(scheme):
    rng = np.random.default_rng(8)
    s = random_state(rng)
    R = al.cay(rng.normal(size=3))
    step = get_step(scheme)
    a = step(s.left_translate(R), StepParams(0.05))
    b = step(s, StepParams(0.05)).left_translate(R)
    assert dg.state_distance(a, b) < 1e-13


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 9, elements=st.floats(-2, 2)), st.sampled_from(["euler", "sv"]))
def test_momentum_map_conserved_per_step(v, scheme):
    s = HOHPState.make(al.cay(v[:3]), v[3:6], v[6:9], -v[:3])
    out = get_step(scheme)(s, StepParams(0.05))
    J0, J1 = dg.momentum_map(s), dg.momentum_map(out)
    assert np.linalg.norm(J1 - J0) <= 1e-13 * (1 + np.linalg.norm(s.mu))


def test_group_element_stays_orthogonal():
    traj = flow(FIG2, StepParams(2 * np.pi / 500), 500, "sv")
    g = traj[-1].g
    assert np.linalg.norm(g.T @ g - np.eye(3)) < 1e-12
