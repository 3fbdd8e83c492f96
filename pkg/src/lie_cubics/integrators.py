"""
Discrete higher-order Hamilton-Pontryagin integrators for Riemannian cubics
on SO(3) with the bi-invariant Lagrangian ``l(xi, u) = |u|^2 / 2``.

The state is ``(g, xi, mu, nu)``: configuration, left-trivialised velocity
and the two Ostrogradsky momenta.  Both one-step maps are obtained from the
general s-stage discrete equations by eliminating the internal stages by
hand:

implicit Euler (tableau ``1 | 1``), with ``Xi_{k+1} = xi_{k+1}``::

    xi_{k+1}  = xi_k + h nu_k
    mu_check  = dcay*_{h xi_{k+1}} mu_k
    mu_{k+1}  = (dcay^{-1}_{-h xi_{k+1}})* mu_check
    nu_{k+1}  = nu_k - h mu_check
    g_{k+1}   = g_k cay(h xi_{k+1})

Stormer-Verlet (tableau ``0 | 0 0 ; 1 | 1/2 1/2``), with
``Xi_{k+1} = (xi_k + xi_{k+1}) / 2``::

    xi_{k+1}  = xi_k + h (nu_k - (h/2) dcay*_{h Xi_{k+1}} mu_k)     (implicit)
    mu_check  = dcay*_{h Xi_{k+1}} mu_k
    mu_{k+1}  = (dcay^{-1}_{-h Xi_{k+1}})* mu_check
    nu_{k+1}  = nu_k - h mu_check
    g_{k+1}   = g_k cay(h Xi_{k+1})

In both cases the internal multipliers ``mu^i`` vanish, the stage momenta
``nu^i`` are ``h b_i mu_check`` and ``mu_check`` is the multiplier of the
group reconstruction constraint, so that ``(dcay_{-h Xi})* mu_{k+1}`` and
``(dcay_{h Xi})* mu_k`` are the same covector.  Evaluation order inside a step
is xi, mu, nu, g.
"""
from dataclasses import dataclass, field

import numpy as np

from . import algebra as al
from .errors import InvariantError, NonConvergence


@dataclass(frozen=True)
class HOHPState:
    """A point ``(g, xi, mu, nu)`` of T*(T SO(3))."""

    g: np.ndarray
    xi: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    @classmethod
    def make(cls, g=None, xi=(0, 0, 0), mu=(0, 0, 0), nu=(0, 0, 0)):
        """Build a validated state; ``g`` defaults to the identity."""
        g = np.eye(3) if g is None else al.check_rotation(g)
        return cls(np.array(g, dtype=float), al.as_vector(xi, "xi"),
                   al.as_vector(mu, "mu"), al.as_vector(nu, "nu"))

    def as_array(self):
        """Flatten to 18 numbers: g (row-major), xi, mu, nu."""
        return np.concatenate([self.g.ravel(), self.xi, self.mu, self.nu])

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[:9].reshape(3, 3), a[9:12], a[12:15], a[15:18])

    def left_translate(self, r):
        return HOHPState(r @ self.g, self.xi, self.mu, self.nu)


@dataclass(frozen=True)
class StepParams:
    h: float
    fp_tol: float = 1e-12
    fp_max_iter: int = 100

    def __post_init__(self):
        if not (self.h > 0 and np.isfinite(self.h)):
            raise InvariantError(f"step size must be positive, got {self.h}")
        if not self.fp_tol > 0:
            raise InvariantError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise InvariantError(f"fp_max_iter must be >= 1, got {self.fp_max_iter}")


def _finish(s, h, Xi, xi_next, mu_check):
    """Shared tail of both schemes once the averaged velocity is known."""
    x = h * Xi
    mu_next = al.dcay_inv_star(-x, mu_check)
    nu_next = s.nu - h * mu_check
    g_next = s.g @ al.cay(x)
    return HOHPState(g_next, xi_next, mu_next, nu_next)


def euler_step(s, p):
    """One step of the explicit Euler-type HOHP scheme."""
    h = p.h
    xi_next = s.xi + h * al.sharp(s.nu)
    mu_check = al.dcay_star(h * xi_next, s.mu)
    return _finish(s, h, xi_next, xi_next, mu_check)


def sv_residual(xi, s, h):
    """Fixed-point residual of the Stormer-Verlet velocity update."""
    Xi = 0.5 * (xi + s.xi)
    return xi - s.xi - h * (s.nu - 0.5 * h * al.dcay_star(h * Xi, s.mu))


def sv_step(s, p):
    """One step of the implicit Stormer-Verlet-type HOHP scheme.

    ``xi_{k+1}`` is found by Picard iteration seeded with ``xi_k``; raises
    NonConvergence when the residual is still above ``p.fp_tol`` after
    ``p.fp_max_iter`` iterations.
    """
    h = p.h
    xi = s.xi.copy()
    res = np.inf
    for it in range(1, p.fp_max_iter + 1):
        Xi = 0.5 * (xi + s.xi)
        xi = s.xi + h * (s.nu - 0.5 * h * al.dcay_star(h * Xi, s.mu))
        r = sv_residual(xi, s, h)
        res = np.sqrt(r @ r)
        if res <= p.fp_tol:
            break
    else:
        raise NonConvergence(
            f"Stormer-Verlet fixed point did not converge in {p.fp_max_iter} "
            f"iterations (residual {res:.3e}); reduce h",
            residual=res, iterations=p.fp_max_iter)
    Xi = 0.5 * (xi + s.xi)
    mu_check = al.dcay_star(h * Xi, s.mu)
    return _finish(s, h, Xi, xi, mu_check)


SCHEMES = {"euler": euler_step, "sv": sv_step}


def get_step(scheme):
    """Resolve a scheme name (``'euler'`` or ``'sv'``) or pass a callable through."""
    if callable(scheme):
        return scheme
    try:
        return SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}") from None


def flow(s0, p, n, scheme="sv"):
    """Iterate a one-step map ``n`` times and return all ``n + 1`` states."""
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    step = get_step(scheme)
    traj = [s0]
    s = s0
    for k in range(n):
        try:
            s = step(s, p)
        except NonConvergence as exc:
            exc.step = k
            raise
        traj.append(s)
    return traj


def trajectory_arrays(traj):
    """Stack a trajectory into arrays ``g (n,3,3), xi, mu, nu (n,3)``."""
    g = np.array([s.g for s in traj])
    xi = np.array([s.xi for s in traj])
    mu = np.array([s.mu for s in traj])
    nu = np.array([s.nu for s in traj])
    return g, xi, mu, nu
