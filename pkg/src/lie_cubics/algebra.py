"""
SO(3) / so(3) kernel.

Algebra elements (velocities, accelerations, adjoint variables) and their
duals (momenta) are both stored as length-3 float arrays; group elements are
3x3 rotation matrices.  The inner product on so(3) is the dot product of the
vee-coordinates, so ``flat`` and ``sharp`` are the identity and the pairing
between so(3)* and so(3) is again the dot product.

The retraction used throughout is the Cayley map

    cay(x) = (I - hat(x)/2)^{-1} (I + hat(x)/2)

together with its right-trivialised differential ``dcay``, the inverse
``dcay_inv`` and the dual maps of both.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError

ROTATION_TOL = 1e-10

_I3 = np.eye(3)


def as_vector(v, name="vector"):
    """Return ``v`` as a finite float array of shape (3,)."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise InvariantError(f"{name} must have shape (3,), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name} has non-finite components")
    return a


def check_rotation(g, tol=ROTATION_TOL):
    """Validate a group element and return it as a float array.

    Raises InvariantError unless ``g`` is 3x3 with ``g.T @ g == I`` and
    ``det g == 1`` to within ``tol``.
    """
    r = np.asarray(g, dtype=float)
    if r.shape != (3, 3):
        raise InvariantError(f"group element must be 3x3, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InvariantError("group element has non-finite entries")
    if np.linalg.norm(r.T @ r - _I3) > tol:
        raise InvariantError("group element is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise InvariantError("group element does not have determinant +1")
    return r


def cross(a, b):
    # np.cross carries a lot of overhead for single 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def hat(v):
    """Map a 3-vector to the corresponding skew-symmetric matrix."""
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def vee(X):
    """Inverse of :func:`hat`; reads the 3-vector off a skew matrix."""
    return np.array([X[2, 1], X[0, 2], X[1, 0]])


def ad(x, y):
    """Lie bracket on so(3), i.e. ``x × y``."""
    return cross(x, y)


def ad_star(x, m):
    """Coadjoint action of the algebra: ``<ad_star(x, m), y> = <m, ad(x, y)>``."""
    return cross(m, x)


def Ad(g, x):
    """Adjoint action ``g x g^{-1}`` in vector form (equals ``g @ x``)."""
    return g @ x


def Ad_star(g, m):
    """Dual of ``Ad_g``: ``<Ad_star(g, m), x> = <m, Ad(g, x)>``."""
    return g.T @ m


def Ad_star_inv(g, m):
    """``Ad*_{g^{-1}} m``, i.e. ``g @ m``.  Rejects non-rotations."""
    return check_rotation(g) @ np.asarray(m, dtype=float)


def flat(v):
    return np.array(v)


def sharp(m):
    return np.array(m)


def pairing(m, x):
    """Pairing between a covector and an algebra element."""
    return float(m[0] * x[0] + m[1] * x[1] + m[2] * x[2])


def diamond(I, w):
    """Cotangent-lift momentum map of the rotation action on R^3."""
    return cross(I, w)


# ---------------------------------------------------------------- Cayley map

def cay(x):
    """Cayley map so(3) -> SO(3), closed form.

    Uses ``I + (hat(x) + hat(x)^2 / 2) / (1 + |x|^2 / 4)``, which equals the
    rational definition exactly.
    """
    X = hat(x)
    return _I3 + (X + 0.5 * (X @ X)) / (1.0 + 0.25 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]))


def cay_matrix(x):
    """Cayley map evaluated from its definition by a 3x3 linear solve."""
    X = hat(x)
    return np.linalg.solve(_I3 - 0.5 * X, _I3 + 0.5 * X)


def cay_inv(R):
    """Inverse Cayley map, ``vee(2 (R - I)(R + I)^{-1})``.

    Only defined for rotations by less than pi.  Evaluated through the
    equivalent closed form ``2 vee(R - R^T) / (1 + tr R)`` so that extended
    precision inputs stay in extended precision.
    """
    R = np.asarray(R)
    return 2.0 * vee(R - R.T) / (1.0 + np.trace(R))


def dcay_matrix(x):
    """Matrix of ``y -> dcay(x, y)``: ``(I + hat(x)/2) / (1 + |x|^2/4)``."""
    return (_I3 + 0.5 * hat(x)) / (1.0 + 0.25 * (x @ x))


def dcay_inv_matrix(x):
    """Matrix of ``y -> dcay_inv(x, y)``: ``I - hat(x)/2 + x x^T / 4``."""
    return _I3 - 0.5 * hat(x) + 0.25 * np.outer(x, x)


def dcay(x, y):
    """Right-trivialised differential of cay at ``x`` applied to ``y``.

    Equals ``vee((I - X/2)^{-1} Y (I + X/2)^{-1})``.
    """
    return (y + 0.5 * cross(x, y)) / (1.0 + 0.25 * (x @ x))


def dcay_inv(x, y):
    """Inverse of ``dcay(x, .)``: ``y - (x × y)/2 + (x·y) x / 4``."""
    return y - 0.5 * cross(x, y) + 0.25 * (x @ y) * x


def dcay_via_definition(x, y):
    """``dcay`` computed literally from the matrix expression (slow path)."""
    X = hat(x)
    left = np.linalg.inv(_I3 - 0.5 * X)
    right = np.linalg.inv(_I3 + 0.5 * X)
    return vee(left @ hat(y) @ right)


def dcay_star(x, m):
    """Dual map ``(dcay_x)^*``."""
    return dcay_matrix(x).T @ m


def dcay_inv_star(x, m):
    """Dual map ``(dcay_x^{-1})^*``."""
    return dcay_inv_matrix(x).T @ m


def dcay_inv_derivative_star(x, mu, a):
    """Gradient in ``x`` of ``<mu, dcay_inv(x, a)>``.

    This is the covector ``r`` with ``d/de <mu, dcay_inv(x + e rho, a)> = <r, rho>``.
    """
    return -0.5 * cross(a, mu) + 0.25 * (x @ mu) * a + 0.25 * (x @ a) * mu


# ------------------------------------------------------------ Butcher tableaus

@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = len(b)
        if a.shape != (s, s) or c.shape != (s,):
            raise InvariantError(f"tableau {self.name!r} has inconsistent shapes")
        if np.max(np.abs(a.sum(axis=1) - c)) > 1e-14:
            raise InvariantError(f"tableau {self.name!r}: c_i != sum_j a_ij")
        if abs(b.sum() - 1.0) > 1e-14:
            raise InvariantError(f"tableau {self.name!r}: weights do not sum to one")

    @property
    def stages(self):
        return len(self.b)


IMPLICIT_EULER = ButcherTableau("implicit_euler", a=((1.0,),), b=(1.0,), c=(1.0,))
STORMER_VERLET = ButcherTableau(
    "stormer_verlet", a=((0.0, 0.0), (0.5, 0.5)), b=(0.5, 0.5), c=(0.0, 1.0)
)

TABLEAUS = {"euler": IMPLICIT_EULER, "sv": STORMER_VERLET}
