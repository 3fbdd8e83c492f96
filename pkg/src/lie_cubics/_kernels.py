"""
Compiled forward/adjoint sweeps for the shooting planner.

These mirror :func:`lie_cubics.planner.forward_shoot` and
:func:`lie_cubics.planner.backward_adjoint` line by line, written out in
scalar form so numba can compile them.  The numpy versions in ``planner``
remain the reference; the test-suite checks the two agree.
"""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

HAVE_NUMBA = njit.__module__.startswith("numba")


@njit(cache=True)
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True)
def _cay(x):
    q = 1.0 + 0.25 * _dot(x, x)
    X = np.zeros((3, 3))
    X[0, 1] = -x[2]
    X[0, 2] = x[1]
    X[1, 0] = x[2]
    X[1, 2] = -x[0]
    X[2, 0] = -x[1]
    X[2, 1] = x[0]
    R = np.eye(3) + (X + 0.5 * (X @ X)) / q
    return R


@njit(cache=True)
def _dcay(x, y):
    return (y + 0.5 * _cross(x, y)) / (1.0 + 0.25 * _dot(x, x))


@njit(cache=True)
def _dcay_inv(x, y):
    return y - 0.5 * _cross(x, y) + 0.25 * _dot(x, y) * x


@njit(cache=True)
def _dcay_star(x, m):
    return (m - 0.5 * _cross(x, m)) / (1.0 + 0.25 * _dot(x, x))


@njit(cache=True)
def _dcay_inv_star(x, m):
    return m + 0.5 * _cross(x, m) + 0.25 * _dot(x, m) * x


@njit(cache=True)
def _dinv_deriv_star(x, mu, a):
    return -0.5 * _cross(a, mu) + 0.25 * _dot(x, mu) * a + 0.25 * _dot(x, a) * mu


@njit(cache=True)
def shoot(T0, node_target, targets, w, xi0, mu0, nu0, h, N,
          g, xi, mu, nu, mu_check, kicks):
    """Fill the trajectory arrays in place; return ``(energy, penalty)``.

    ``node_target[k]`` is the row of ``targets`` for node ``k`` or -1.
    """
    g[0] = np.eye(3)
    xi[0] = xi0
    mu[0] = mu0
    nu[0] = nu0
    for i in range(3):
        mu_check[0, i] = np.nan
    energy = 0.0
    penalty = 0.0
    for k in range(N + 1):
        j = node_target[k]
        if j >= 0:
            b = g[k].T @ T0
            r = b - targets[j]
            kicks[k] = -w * _cross(b, r)
            penalty += 0.5 * w * _dot(r, r)
        else:
            kicks[k] = 0.0
        if k == N:
            break
        energy += 0.5 * h * _dot(nu[k], nu[k])
        x = xi[k] + h * nu[k]
        xi[k + 1] = x
        mc = _dcay_star(h * x, mu[k] + kicks[k])
        mu_check[k + 1] = mc
        mu[k + 1] = _dcay_inv_star(-h * x, mc)
        nu[k + 1] = nu[k] - h * mc
        g[k + 1] = g[k] @ _cay(h * x)
    return energy, penalty


@njit(cache=True)
def shoot_cost(T0, node_target, targets, w, xi0, mu0, nu0, h, N):
    """Cost only, without storing the trajectory."""
    G = np.eye(3)
    x = xi0.copy()
    m = mu0.copy()
    n = nu0.copy()
    energy = 0.0
    penalty = 0.0
    for k in range(N + 1):
        j = node_target[k]
        kk = np.zeros(3)
        if j >= 0:
            b = G.T @ T0
            r = b - targets[j]
            kk = -w * _cross(b, r)
            penalty += 0.5 * w * _dot(r, r)
        if k == N:
            break
        energy += 0.5 * h * _dot(n, n)
        x = x + h * n
        mc = _dcay_star(h * x, m + kk)
        m = _dcay_inv_star(-h * x, mc)
        n = n - h * mc
        G = G @ _cay(h * x)
    return energy + penalty


@njit(cache=True)
def adjoint(T0, node_target, targets, w, h, N, g, xi, nu, mu_check, kicks):
    """Backward sweep; returns ``(grad_mu0, grad_nu0)``."""
    P0 = _dcay_star(-h * xi[N], -kicks[N])
    P1 = np.zeros(3)
    V0 = np.zeros(3)
    V1 = np.zeros(3)
    for k in range(N - 1, 0, -1):
        V0k = V0 + h * (P1 + h * P0 - nu[k])
        V1k = _dcay(h * xi[k], _dcay_inv(-h * xi[k], V1) - h * V0k)
        A = kicks[k].copy()
        j = node_target[k]
        if j >= 0:
            b = g[k].T @ T0
            A = A + w * _cross(b, _cross(targets[j], V1))
        P0k = _dcay_star(-h * xi[k], _dcay_inv_star(h * xi[k + 1], P0) - A)
        Dm = -h * _dinv_deriv_star(-h * xi[k], mu_check[k], V1)
        Dp = h * _dinv_deriv_star(h * xi[k], mu_check[k], V1k)
        P1k = h * P0 + P1 + Dm - Dp
        P0 = P0k
        P1 = P1k
        V0 = V0k
        V1 = V1k
    V00 = V0 + h * (P1 + h * P0 - nu[0])
    return -V1, -V00
