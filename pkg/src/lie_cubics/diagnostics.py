"""
Certification tools for the HOHP integrators: momentum map, Hamiltonian,
canonical symplectic form, a finite-difference symplecticity check, a
self-convergence harness and the residual of the NHP equation
``xi''' = xi'' × xi``.
"""
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import algebra as al
from .errors import TooShort
from .integrators import HOHPState, StepParams, flow, get_step


@dataclass(frozen=True)
class TangentVariation:
    """Tangent vector at a state in trivialised form ``eta = g^{-1} dg``."""

    eta: np.ndarray
    dxi: np.ndarray
    dmu: np.ndarray
    dnu: np.ndarray

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[0:3], v[3:6], v[6:9], v[9:12])

    def as_array(self):
        return np.concatenate([self.eta, self.dxi, self.dmu, self.dnu])


@dataclass
class ConvergenceReport:
    step_sizes: list
    errors: list
    slope: float
    scheme: str = ""
    T: float = 0.0

    def __post_init__(self):
        hs = np.asarray(self.step_sizes)
        if np.any(np.diff(hs) >= 0):
            raise ValueError("step sizes must be strictly decreasing")

    def to_dict(self):
        d = asdict(self)
        d["step_sizes"] = [float(x) for x in self.step_sizes]
        d["errors"] = [float(x) for x in self.errors]
        d["slope"] = float(self.slope)
        return d


def momentum_map(s):
    """Noether momentum of the left action, ``Ad*_{g^{-1}} mu``."""
    return al.Ad_star_inv(s.g, s.mu)


def hamiltonian(s):
    """``|nu|^2 / 2 + <mu, xi>`` (independent of g)."""
    nu = al.sharp(s.nu)
    return 0.5 * float(nu @ nu) + al.pairing(s.mu, s.xi)


def symplectic_form(s, v1, v2):
    """Canonical symplectic form on T*(TG) in left-trivialised variables."""
    return (-al.pairing(v1.dmu, v2.eta) - al.pairing(v1.dnu, v2.dxi)
            + al.pairing(v2.dmu, v1.eta) + al.pairing(v2.dnu, v1.dxi)
            + al.pairing(s.mu, al.ad(v1.eta, v2.eta)))


def omega_matrix(mu):
    """12x12 matrix ``W`` with ``symplectic_form(s, v1, v2) = v1 @ W @ v2``.

    Coordinates are ordered (eta, dxi, dmu, dnu).
    """
    W = np.zeros((12, 12), dtype=np.result_type(mu, float))
    I = np.eye(3)
    W[0:3, 0:3] = -al.hat(mu)
    W[0:3, 6:9] = I
    W[6:9, 0:3] = -I
    W[3:6, 9:12] = I
    W[9:12, 3:6] = -I
    return W


def _perturb(s, v, eps):
    return HOHPState(s.g @ al.cay(eps * v[0:3]), s.xi + eps * v[3:6],
                     s.mu + eps * v[6:9], s.nu + eps * v[9:12])


def step_jacobian(scheme, s, p, fd_eps, dtype=np.longdouble):
    """Central-difference Jacobian of one step in trivialised coordinates.

    The group factor is perturbed as ``g cay(eps eta)``; the output group
    perturbation is read back with the inverse Cayley map relative to the
    unperturbed output.  Steps are evaluated in ``dtype``; the default
    extended precision keeps round-off below the ``O(eps^2)`` stencil error
    down to ``eps ~ 1e-6``.  The implicit solve tolerance is tightened to the
    working precision, otherwise the fixed-point error leaks into the
    differences.
    """
    step = get_step(scheme)
    p = replace(p, fp_tol=min(p.fp_tol, 100 * float(np.finfo(dtype).eps)))
    s = HOHPState(*(np.asarray(a, dtype=dtype) for a in (s.g, s.xi, s.mu, s.nu)))
    fd_eps = dtype(fd_eps)
    base = step(s, p)
    gT = base.g.T
    J = np.empty((12, 12), dtype=dtype)
    for j in range(12):
        e = np.zeros(12, dtype=dtype)
        e[j] = 1.0
        plus = step(_perturb(s, e, fd_eps), p)
        minus = step(_perturb(s, e, -fd_eps), p)
        d_eta = al.cay_inv(gT @ plus.g) - al.cay_inv(gT @ minus.g)
        col = np.concatenate([d_eta, plus.xi - minus.xi, plus.mu - minus.mu,
                              plus.nu - minus.nu])
        J[:, j] = col / (2.0 * fd_eps)
    return J, base


def check_symplectic(scheme, s, p, fd_eps, dtype=np.longdouble):
    """Return ``||J^T W(s') J - W(s)||_F`` for the step Jacobian ``J``.

    For a symplectic step the exact value is zero; with central differences
    it is ``O(fd_eps^2)``.
    """
    if not fd_eps > 0:
        raise ValueError("fd_eps must be positive")
    J, out = step_jacobian(scheme, s, p, fd_eps, dtype=dtype)
    D = J.T @ omega_matrix(out.mu) @ J - omega_matrix(np.asarray(s.mu, dtype=dtype))
    return float(np.sqrt(np.sum(D * D)))


def state_distance(a, b):
    """Product metric: Frobenius on g plus Euclidean on xi, mu, nu."""
    return float(np.linalg.norm(a.g - b.g) + np.linalg.norm(a.xi - b.xi)
                 + np.linalg.norm(a.mu - b.mu) + np.linalg.norm(a.nu - b.nu))


def fit_slope(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def convergence_order(scheme, s0, T, h_list, h_ref=None, fp_tol=1e-13):
    """Self-convergence study of ``scheme`` at final time ``T``.

    The reference is computed with ``h_ref`` (default: the smallest entry of
    ``h_list`` divided by 8).  Errors are measured at time ``T`` with
    :func:`state_distance`.
    """
    hs = sorted((float(h) for h in h_list), reverse=True)
    if len(hs) < 3:
        raise ValueError("need at least three step sizes")
    if h_ref is None:
        h_ref = hs[-1] / 8
    steps = [_steps_for(T, h) for h in hs]
    n_ref = _steps_for(T, h_ref)
    ref = flow(s0, StepParams(T / n_ref, fp_tol=fp_tol), n_ref, scheme)[-1]
    errors = [state_distance(flow(s0, StepParams(T / n, fp_tol=fp_tol), n, scheme)[-1], ref)
              for n in steps]
    name = scheme if isinstance(scheme, str) else getattr(scheme, "__name__", "")
    slope = fit_slope(hs, errors) if min(errors) > 0 else float("nan")
    return ConvergenceReport(hs, errors, slope, scheme=name, T=float(T))


def _steps_for(T, h):
    n = int(round(T / h))
    if n < 1 or abs(n * h - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"step size {h} does not divide T = {T}")
    return n


# fourth-order central stencils on offsets -3..3
_D2 = np.array([0.0, -1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12, 0.0])
_D3 = np.array([1 / 8, -1.0, 13 / 8, 0.0, -13 / 8, 1.0, -1 / 8])


def nhp_residual(traj, h):
    """``|D3 xi_k - (D2 xi_k) × xi_k|`` at the interior indices ``3..n-4``.

    ``traj`` is a list of states or an ``(n, 3)`` array of velocities.
    """
    xi = np.asarray([s.xi for s in traj] if not isinstance(traj, np.ndarray) else traj,
                    dtype=float)
    n = len(xi)
    if n < 7:
        raise TooShort(f"need at least 7 states for the NHP stencils, got {n}")
    out = []
    for k in range(3, n - 3):
        window = xi[k - 3:k + 4]
        d2 = _D2 @ window / h ** 2
        d3 = _D3 @ window / h ** 3
        out.append(float(np.linalg.norm(d3 - al.cross(d2, xi[k]))))
    return out


def energy_history(traj):
    return np.array([hamiltonian(s) for s in traj])


def momentum_drift(traj):
    """Largest deviation of the momentum map from its initial value."""
    J0 = momentum_map(traj[0])
    return max(float(np.linalg.norm(momentum_map(s) - J0)) for s in traj)


def continuous_rhs(t, y):
    """Right-hand side of the continuous cubic equations on flattened states.

    ``g' = g hat(xi)``, ``xi' = nu``, ``mu' = mu × xi``, ``nu' = -mu``.
    """
    g = y[:9].reshape(3, 3)
    xi, mu, nu = y[9:12], y[12:15], y[15:18]
    return np.concatenate([(g @ al.hat(xi)).ravel(), nu, al.ad_star(xi, mu), -mu])


def continuous_solution(s0, T, rtol=1e-13, atol=1e-13):
    """High-accuracy solution of the continuous equations at time ``T``."""
    from scipy.integrate import solve_ivp

    sol = solve_ivp(continuous_rhs, (0.0, T), s0.as_array(), method="DOP853",
                    rtol=rtol, atol=atol)
    return HOHPState.from_array(sol.y[:, -1])
