"""
Trajectory planning on the sphere by shooting.

A curve ``g_k`` in SO(3) moves a template point ``T0`` as ``g_k^{-1} T0``; the
discrete cost

    J(mu0, nu0) = h sum_{k<N} |nu_k|^2 / 2
                  + 1/(2 sigma^2) sum_i |g_{N_i}^{-1} T0 - I_i|^2

is minimised over the initial Ostrogradsky momenta with ``g_0 = e`` and
``xi_0`` prescribed.  Trajectories follow the Euler-type HOHP scheme with
momentum kicks at the node indices; the gradient comes from a discrete
adjoint sweep.

Forward step ``k -> k+1`` (``Phi_k`` is zero away from the nodes)::

    xi_{k+1}      = xi_k + h nu_k
    mu_check_{k+1} = dcay*_{h xi_{k+1}} (mu_k + Phi_k(g_k))
    mu_{k+1}      = (dcay^{-1}_{-h xi_{k+1}})* mu_check_{k+1}
    nu_{k+1}      = nu_k - h mu_check_{k+1}
    g_{k+1}       = g_k cay(h xi_{k+1})

Backward sweep, with adjoint variables ``P0, P1`` (covectors) and ``V0, V1``
(algebra elements) and ``D+-`` the derivatives of ``(dcay^{-1}_{+-h xi})*``
in ``xi``::

    P0_N = -(dcay_{-h xi_N})* Phi_N(g_N),   P1_N = 0,  V0_N = 0,  V1_N = 0
    V0_k = V0_{k+1} + h (P1_{k+1} + h P0_{k+1} - nu_k)
    V1_k = dcay_{h xi_k}(dcay^{-1}_{-h xi_k} V1_{k+1} - h V0_k)
    P0_k = (dcay_{-h xi_k})* ((dcay^{-1}_{h xi_{k+1}})* P0_{k+1} - A_k)
    P1_k = h P0_{k+1} + P1_{k+1} + D-_k V1_{k+1} - D+_k V1_k

where ``A_k = Phi_k(g_k) - (dPhi_k(g_k))* V1_{k+1}``.  The gradient is
``grad_nu0 = -V0_0`` and ``grad_mu0 = -V1_1``: the initial momentum enters
only through the first kick-free coadjoint update, so the extra ``V1_0``
step is not applied.  The auxiliary multiplier P2 of the averaged-velocity
constraint is eliminated by substituting ``Xi_{k+1} = xi_{k+1}``, which is
where the ``h P0_{k+1}`` terms above come from.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from . import _kernels
from . import algebra as al
from .errors import DimensionMismatch, InvariantError, LineSearchFailure
from .integrators import HOHPState

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlanningProblem:
    """Interpolation problem: pass ``g^{-1} T0`` near ``targets`` at node indices.

    ``targets`` is a sequence of ``(node_index, point)`` pairs with strictly
    increasing indices, the last one equal to ``N``.  ``sigma = inf`` switches
    the penalty off.
    """

    T0: np.ndarray
    targets: tuple
    sigma: float
    xi0: np.ndarray
    h: float
    N: int

    def __post_init__(self):
        object.__setattr__(self, "T0", al.as_vector(self.T0, "T0"))
        object.__setattr__(self, "xi0", al.as_vector(self.xi0, "xi0"))
        tg = tuple((int(n), al.as_vector(p, "target")) for n, p in self.targets)
        object.__setattr__(self, "targets", tg)
        if not self.sigma > 0:
            raise InvariantError(f"sigma must be positive, got {self.sigma}")
        if not (self.h > 0 and np.isfinite(self.h)):
            raise InvariantError(f"h must be positive, got {self.h}")
        nodes = [n for n, _ in tg]
        if not nodes:
            raise InvariantError("at least one target is required")
        if nodes[0] <= 0 or any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise InvariantError(f"node indices must be strictly increasing and positive: {nodes}")
        if nodes[-1] != self.N:
            raise InvariantError(f"last node index {nodes[-1]} must equal N = {self.N}")

    @property
    def weight(self):
        """Penalty weight ``1 / sigma^2`` (zero for infinite sigma)."""
        return 0.0 if np.isinf(self.sigma) else 1.0 / self.sigma ** 2

    @property
    def node_map(self):
        return {n: p for n, p in self.targets}

    def rotated(self, R):
        """The conjugated problem with template and targets rotated by ``R``."""
        R = al.check_rotation(R)
        return PlanningProblem(R @ self.T0, tuple((n, R @ p) for n, p in self.targets),
                               self.sigma, R @ self.xi0, self.h, self.N)


@dataclass(frozen=True)
class AdjointState:
    """Adjoint variables at one index.  ``P2`` is eliminated analytically."""

    P0: np.ndarray
    P1: np.ndarray
    V0: np.ndarray
    V1: np.ndarray
    P2: np.ndarray = None


@dataclass(frozen=True)
class DescentOptions:
    max_iters: int = 5000
    step0: float = 1.0
    armijo_c: float = 1e-4
    shrink: float = 0.5
    grad_tol: float = 1e-6
    max_halvings: int = 60
    adaptive_step: bool = True
    direction: str = "gradient"

    def __post_init__(self):
        if self.direction not in ("gradient", "bfgs"):
            raise InvariantError(f"direction must be 'gradient' or 'bfgs', got {self.direction!r}")
        if self.max_iters < 1 or not self.step0 > 0 or not self.grad_tol > 0:
            raise InvariantError("max_iters, step0 and grad_tol must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.shrink < 1):
            raise InvariantError("armijo_c and shrink must lie in (0, 1)")


@dataclass
class ShootingTrajectory:
    """Arrays along a shooting trajectory, indices ``0..N``.

    ``kick[k]`` is ``Phi_k(g_k)`` (zero away from the nodes; ``kick[N]`` is the
    terminal value entering the optimality condition).  ``mu_check[0]`` is not
    part of the scheme and is left as NaN.
    """

    g: np.ndarray
    xi: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    mu_check: np.ndarray
    kick: np.ndarray
    h: float
    energy: float = 0.0
    penalty: float = 0.0

    def __len__(self):
        return len(self.xi)

    @property
    def cost(self):
        return self.energy + self.penalty

    @property
    def states(self):
        return [HOHPState(self.g[k], self.xi[k], self.mu[k], self.nu[k])
                for k in range(len(self))]

    def momentum(self):
        """Momentum map ``J_k = g_k mu_k`` at every index."""
        return np.einsum("kij,kj->ki", self.g, self.mu)


def kick(g, T0, target, sigma):
    """``-(1/sigma^2) (g^{-1} T0) ⋄ (g^{-1} T0 - target)``."""
    w = 0.0 if np.isinf(sigma) else 1.0 / sigma ** 2
    b = g.T @ T0
    return -w * al.diamond(b, al.flat(b - target))


def kick_derivative_star(g, T0, target, sigma, V):
    """Gradient in ``eta`` of ``<kick(g cay(eta)), V>`` at ``eta = 0``."""
    w = 0.0 if np.isinf(sigma) else 1.0 / sigma ** 2
    b = g.T @ T0
    # kick = w b × target and d(b) = b × eta
    return -w * al.cross(b, al.cross(target, V))


def d_maps(sign, xi, mu, a, h):
    """``D^{+-}_{xi,mu}(a)``: derivative in ``xi`` of ``<(dcay^{-1}_{+-h xi})* mu, a>``.

    ``sign`` is ``+1``/``-1`` (or ``'+'``/``'-'``).
    """
    sgn = _sign(sign)
    return sgn * h * al.dcay_inv_derivative_star(sgn * h * np.asarray(xi), mu, a)


def _sign(sign):
    if sign in ("+", 1, 1.0):
        return 1.0
    if sign in ("-", -1, -1.0):
        return -1.0
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def _use_kernels(compiled):
    return _kernels.HAVE_NUMBA if compiled is None else bool(compiled)


def _node_arrays(prob):
    node_target = np.full(prob.N + 1, -1, dtype=np.int64)
    for i, (n, _) in enumerate(prob.targets):
        node_target[n] = i
    return node_target, np.array([p for _, p in prob.targets])


def forward_shoot(prob, mu0, nu0, compiled=None):
    """Integrate the kicked Euler scheme from ``(e, xi0, mu0, nu0)``.

    Returns ``(trajectory, cost)``.  ``compiled=None`` uses the numba kernel
    when numba is importable; ``False`` forces the plain numpy loop below.
    """
    N, h = prob.N, prob.h
    if _use_kernels(compiled):
        node_target, tg = _node_arrays(prob)
        g = np.empty((N + 1, 3, 3))
        xi, mu, nu, mu_check, kicks = (np.empty((N + 1, 3)) for _ in range(5))
        energy, penalty = _kernels.shoot(
            prob.T0, node_target, tg, prob.weight, prob.xi0, al.as_vector(mu0, "mu0"),
            al.as_vector(nu0, "nu0"), h, N, g, xi, mu, nu, mu_check, kicks)
        traj = ShootingTrajectory(g, xi, mu, nu, mu_check, kicks, h, energy, penalty)
        return traj, energy + penalty
    nodes = prob.node_map
    g = np.empty((N + 1, 3, 3))
    xi = np.empty((N + 1, 3))
    mu = np.empty((N + 1, 3))
    nu = np.empty((N + 1, 3))
    mu_check = np.full((N + 1, 3), np.nan)
    kicks = np.zeros((N + 1, 3))
    g[0] = np.eye(3)
    xi[0] = prob.xi0
    mu[0] = al.as_vector(mu0, "mu0")
    nu[0] = al.as_vector(nu0, "nu0")
    energy = 0.0
    penalty = 0.0
    for k in range(N + 1):
        if k in nodes:
            kicks[k] = kick(g[k], prob.T0, nodes[k], prob.sigma)
            r = g[k].T @ prob.T0 - nodes[k]
            penalty += 0.5 * prob.weight * float(r @ r)
        if k == N:
            break
        energy += 0.5 * h * float(nu[k] @ nu[k])
        x = xi[k] + h * nu[k]
        xi[k + 1] = x
        mc = al.dcay_star(h * x, mu[k] + kicks[k])
        mu_check[k + 1] = mc
        mu[k + 1] = al.dcay_inv_star(-h * x, mc)
        nu[k + 1] = nu[k] - h * mc
        g[k + 1] = g[k] @ al.cay(h * x)
    traj = ShootingTrajectory(g, xi, mu, nu, mu_check, kicks, h, energy, penalty)
    return traj, energy + penalty


def cost(prob, mu0, nu0, compiled=None):
    if _use_kernels(compiled):
        node_target, tg = _node_arrays(prob)
        return _kernels.shoot_cost(prob.T0, node_target, tg, prob.weight, prob.xi0,
                                   al.as_vector(mu0, "mu0"), al.as_vector(nu0, "nu0"),
                                   prob.h, prob.N)
    return forward_shoot(prob, mu0, nu0, compiled=False)[1]


def backward_adjoint(prob, traj, return_states=False, compiled=None):
    """Exact gradient of the discrete cost with respect to ``(mu0, nu0)``.

    Returns ``(grad_mu0, grad_nu0)``; with ``return_states=True`` also the
    list of :class:`AdjointState` for indices ``0..N`` (index 0 holds
    ``V0_0`` and ``V1_1``).
    """
    N, h = prob.N, prob.h
    if len(traj) != N + 1:
        raise DimensionMismatch(f"trajectory has {len(traj)} states, expected {N + 1}")
    if _use_kernels(compiled) and not return_states:
        node_target, tg = _node_arrays(prob)
        return _kernels.adjoint(prob.T0, node_target, tg, prob.weight, h, N, traj.g,
                                traj.xi, traj.nu, traj.mu_check, traj.kick)
    nodes = prob.node_map
    xi, nu, g, mc = traj.xi, traj.nu, traj.g, traj.mu_check
    zero = np.zeros(3)

    P0 = al.dcay_star(-h * xi[N], -traj.kick[N])
    P1 = zero
    V0 = zero
    V1 = zero
    states = [AdjointState(P0, P1, V0, V1)] if return_states else None
    for k in range(N - 1, 0, -1):
        V0_k = V0 + h * (P1 + h * P0 - nu[k])
        V1_k = al.dcay(h * xi[k], al.dcay_inv(-h * xi[k], V1) - h * V0_k)
        A = traj.kick[k]
        if k in nodes:
            A = A - kick_derivative_star(g[k], prob.T0, nodes[k], prob.sigma, V1)
        P0_k = al.dcay_star(-h * xi[k], al.dcay_inv_star(h * xi[k + 1], P0) - A)
        P1_k = (h * P0 + P1 + d_maps(-1, xi[k], mc[k], V1, h)
                - d_maps(+1, xi[k], mc[k], V1_k, h))
        P0, P1, V0, V1 = P0_k, P1_k, V0_k, V1_k
        if return_states:
            states.append(AdjointState(P0, P1, V0, V1))
    V0_0 = V0 + h * (P1 + h * P0 - nu[0])
    grad_mu0 = -V1
    grad_nu0 = -V0_0
    if return_states:
        states.append(AdjointState(zero, zero, V0_0, V1))
        return grad_mu0, grad_nu0, states[::-1]
    return grad_mu0, grad_nu0


def gradient(prob, mu0, nu0, compiled=None):
    """Cost and stacked gradient ``(d/dmu0, d/dnu0)`` as a length-6 array."""
    traj, c = forward_shoot(prob, mu0, nu0, compiled=compiled)
    gm, gn = backward_adjoint(prob, traj, compiled=compiled)
    return c, np.concatenate([gm, gn]), traj


def fd_gradient(prob, mu0, nu0, eps=1e-6, compiled=False):
    """Central finite-difference gradient of the cost (test oracle).

    Uses the numpy reference loop by default so the oracle shares no code
    with the compiled path.
    """
    x = np.concatenate([mu0, nu0]).astype(float)
    out = np.empty(6)
    for i in range(6):
        e = np.zeros(6)
        e[i] = eps
        cp = cost(prob, (x + e)[:3], (x + e)[3:], compiled=compiled)
        cm = cost(prob, (x - e)[:3], (x - e)[3:], compiled=compiled)
        out[i] = (cp - cm) / (2 * eps)
    return out


@dataclass
class PlanningSolution:
    mu0: np.ndarray
    nu0: np.ndarray
    trajectory: ShootingTrajectory
    cost_history: list
    grad_norm_history: list
    iterations: int
    reason: str

    @property
    def cost(self):
        return self.cost_history[-1]


def descend(prob, mu0=None, nu0=None, opts=None, callback=None):
    """Armijo line-search descent on ``(mu0, nu0)``.

    With ``opts.direction == "gradient"`` the search direction is the
    negative gradient and each line search starts from ``opts.step0`` or,
    with ``opts.adaptive_step``, from twice the previously accepted step.
    ``"bfgs"`` preconditions the gradient with an inverse-Hessian estimate
    built from successive gradients (always starting at step 1); the line
    search and hence the monotone cost history are the same.  Terminates
    when the gradient norm drops below ``opts.grad_tol`` or after
    ``opts.max_iters`` iterations.
    """
    opts = opts or DescentOptions()
    bfgs = opts.direction == "bfgs"
    x = np.concatenate([np.zeros(3) if mu0 is None else mu0,
                        np.zeros(3) if nu0 is None else nu0]).astype(float)
    c, grad, traj = gradient(prob, x[:3], x[3:])
    costs = [c]
    gnorms = [float(np.linalg.norm(grad))]
    H = None
    step = opts.step0
    reason = "max_iters"
    it = 0
    for it in range(1, opts.max_iters + 1):
        if gnorms[-1] <= opts.grad_tol:
            reason = "grad_tol"
            it -= 1
            break
        d = -grad if H is None else -H @ grad
        t = 1.0 if H is not None else step
        trial, t = _armijo(prob, x, c, grad, d, t, opts)
        if trial is None and H is not None:
            # stale curvature estimate: retry once along the gradient
            H = None
            d = -grad
            trial, t = _armijo(prob, x, c, grad, d, step, opts)
        if trial is None:
            raise LineSearchFailure(
                f"Armijo backtracking failed after {opts.max_halvings} halvings "
                f"at iteration {it}", iteration=it)
        c_new, g_new, traj = gradient(prob, trial[:3], trial[3:])
        if bfgs:
            H = _bfgs_update(H, trial - x, g_new - grad)
        x, c, grad = trial, c_new, g_new
        costs.append(c)
        gnorms.append(float(np.linalg.norm(grad)))
        step = 2.0 * t if opts.adaptive_step else opts.step0
        if callback is not None:
            callback(it, x, c, grad)
    else:
        it = opts.max_iters
        if gnorms[-1] <= opts.grad_tol:
            reason = "grad_tol"
    log.info("descent stopped after %d iterations (%s), cost %.6g, |grad| %.3g",
             it, reason, costs[-1], gnorms[-1])
    return PlanningSolution(x[:3].copy(), x[3:].copy(), traj, costs, gnorms, it, reason)


def _armijo(prob, x, c, grad, d, t, opts):
    slope = float(grad @ d)
    for _ in range(opts.max_halvings):
        trial = x + t * d
        if cost(prob, trial[:3], trial[3:]) <= c + opts.armijo_c * t * slope:
            return trial, t
        t *= opts.shrink
    return None, t


def _bfgs_update(H, s, y):
    sy = float(s @ y)
    if not sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
        return H  # no usable curvature information in this step
    if H is None:
        H = np.eye(len(s)) * (sy / float(y @ y))
    r = 1.0 / sy
    A = np.eye(len(s)) - r * np.outer(s, y)
    return A @ H @ A.T + r * np.outer(s, s)


# targets of the interpolation experiment on S^2
SPHERE_TARGETS = (
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    tuple(np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)),
    tuple(np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)),
    tuple(np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)),
)


def sphere_problem(N=500, sigma=0.025):
    """The five-target interpolation problem on S^2 over ``[0, 1]``.

    ``T0 = (1, 0, 0)``, ``xi0 = (5 pi / 2) e_z``, nodes at ``t_i = i/5``.
    ``N`` must be a multiple of 5.
    """
    if N % 5:
        raise ValueError("N must be a multiple of 5 so that t_i = i/5 are grid points")
    targets = tuple((i * N // 5, np.array(p)) for i, p in enumerate(SPHERE_TARGETS, start=1))
    return PlanningProblem(np.array([1.0, 0.0, 0.0]), targets, sigma,
                           2.5 * np.pi * np.array([0.0, 0.0, 1.0]), 1.0 / N, N)


def node_mismatches(prob, traj):
    """``|g_{N_i}^{-1} T0 - I_i|`` for every target."""
    return [float(np.linalg.norm(traj.g[n].T @ prob.T0 - p)) for n, p in prob.targets]
