"""Wightman functions for the spacetime catalogue and the two field states."""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ChartError, ConsistencyError, DomainError, SingularityError
from .numerics import (QuadratureSpec, Regulator, gamma, hankel2_1, hyp2f1,
                       integrate_radial)

INV_8PI2 = 1.0 / (8.0 * math.pi ** 2)


# ------------------------------------------------------------- models

@dataclass(frozen=True)
class MinkowskiInertial:
    m: float = 0.0
    chart = "inertial-minkowski"
    name = "minkowski"

    def __post_init__(self):
        if not self.m >= 0:
            raise DomainError("mass must be non-negative")


@dataclass(frozen=True)
class MinkowskiRindler:
    a: float = 1.0
    chart = "rindler"
    name = "rindler"

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("Rindler acceleration scale must be positive")


@dataclass(frozen=True)
class RWHyperbolicStatic:
    """Static open Robertson-Walker universe, conformal time chart.

    ``mu`` is the effective dimensionless mass, ``mu^2 = a^2 (m^2 + (xi - 1/6) R)``.
    """

    a: float = 1.0
    mu: float = 1.0
    chart = "rw-hyperbolic"
    name = "rw-hyperbolic"

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("scale factor must be positive")
        if not self.mu >= 0:
            raise DomainError("mu must be non-negative")


@dataclass(frozen=True)
class DeSitterConformal:
    ell: float = 1.0
    nu: float = 2.25
    chart = "desitter-conformal"
    name = "desitter"

    def __post_init__(self):
        if not self.ell > 0:
            raise DomainError("curvature radius must be positive")
        if (self.nu - 0.5) == math.floor(self.nu - 0.5):
            raise DomainError("nu must not be a half-integer (sec(pi nu) diverges)")


@dataclass(frozen=True)
class HalfMinkowskiDirichlet:
    chart = "half-minkowski"
    name = "dirichlet"


MODELS = {
    "minkowski": MinkowskiInertial,
    "rindler": MinkowskiRindler,
    "rw-hyperbolic": RWHyperbolicStatic,
    "desitter": DeSitterConformal,
    "dirichlet": HalfMinkowskiDirichlet,
}


# ------------------------------------------------------------- states

@dataclass(frozen=True)
class Vacuum:
    name = "vacuum"


@dataclass(frozen=True)
class OneParticleGaussian:
    """One-particle wavepacket with an isotropic Gaussian momentum profile.

    ``f(k) = A exp(-k^2 / (2 sigma_k^2))`` with ``A`` fixed numerically by
    ``int d^3k |f|^2 = 1``.
    """

    sigma_k: float = 1.0
    amplitude: float = field(init=False, repr=False, compare=False)
    name = "one-particle"

    def __post_init__(self):
        if not self.sigma_k > 0:
            raise DomainError("sigma_k must be positive")
        s = self.sigma_k
        norm = integrate_radial(lambda k: 4 * math.pi * k * k * np.exp(-k * k / (s * s)),
                                QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13),
                                scale=s)
        object.__setattr__(self, "amplitude", 1.0 / math.sqrt(norm.real))

    def profile(self, k):
        return self.amplitude * np.exp(-k * k / (2 * self.sigma_k ** 2))


STATES = {"vacuum": Vacuum, "one-particle": OneParticleGaussian}


# ------------------------------------------------------ Wightman pieces

def _delta(x, xp):
    return [a - b for a, b in zip(x.coords, xp.coords)]


def _massless_flat(d, eps):
    """Massless Minkowski W for separation ``d`` (any D >= 3)."""
    tau = d[0] - 1j * eps
    sigma = 0.5 * (-tau * tau + sum(v * v for v in d[1:]))
    D = len(d)
    if D == 4:
        return INV_8PI2 / sigma
    pref = gamma(D / 2 - 1) / (2 * (2 * math.pi) ** (D / 2))
    return pref * sigma ** (-(D - 2) / 2)


def _hankel_kernel(mass, tau, dist):
    """``i m H1(m s) / (8 pi s)`` with ``s = -i sqrt(dist^2 - tau^2)``.

    This branch of ``s`` is analytic off the timelike cut; it reproduces
    ``m K1(m r) / (4 pi^2 r)`` at spacelike separation.
    """
    s = -1j * cmath.sqrt(dist * dist - tau * tau)
    if mass == 0:
        return -1.0 / (4 * math.pi ** 2 * s * s)
    return 1j * mass * hankel2_1(mass * s) / (8 * math.pi * s)


def _massive_flat(m, d, eps):
    r = math.sqrt(sum(v * v for v in d[1:]))
    return _hankel_kernel(m, d[0] - 1j * eps, r)


def _rindler(model, x, xp, eps):
    cx = (x.coords[0] - 1j * eps,) + x.coords[1:]
    p = geo.rindler_to_minkowski(cx, model.a)
    q = geo.rindler_to_minkowski(xp.coords, model.a)
    dt = p[0] - q[0]
    sigma = 0.5 * (-dt * dt + sum((u - v) ** 2 for u, v in zip(p[1:], q[1:])))
    return INV_8PI2 / sigma


def _rw(model, x, xp, eps):
    c, cp = x.coords, xp.coords
    dist = geo.hyperbolic_distance(c[1], c[2], c[3], cp[1], cp[2], cp[3])
    ratio = dist / math.sinh(dist) if dist > 0 else 1.0
    return ratio * _hankel_kernel(model.mu, (c[0] - cp[0]) - 1j * eps, dist) / model.a ** 2


def _desitter(model, x, xp, eps):
    eta, etap = x.coords[0], xp.coords[0]
    if eta * etap < 0:
        raise DomainError("de Sitter events must share the sign of eta")
    tau = (eta - etap) - 1j * eps
    r2 = sum((u - v) ** 2 for u, v in zip(x.coords[1:], xp.coords[1:]))
    z = 1.0 + (tau * tau - r2) / (4.0 * eta * etap)
    nu = model.nu
    pref = (0.25 - nu * nu) / (math.cos(math.pi * nu) * 16 * math.pi * model.ell ** 2)
    return pref * hyp2f1(1.5 + nu, 1.5 - nu, 2.0, z)


def _dirichlet(d, z, zp, eps):
    if z == 0 or zp == 0:
        return 0j
    tau = d[0] - 1j * eps
    base = -tau * tau + d[1] * d[1] + d[2] * d[2]
    sigma = 0.5 * (base + (z - zp) ** 2)
    sigma_img = 0.5 * (base + (z + zp) ** 2)
    # 1/sigma - 1/sigma_img written without cancellation
    return INV_8PI2 * 2.0 * z * zp / (sigma * sigma_img)


def one_particle_F(sigma_k, x, spec=None, state=None):
    """Positive-frequency wavepacket amplitude F(x) of the one-particle state.

    The angular integral is done analytically, leaving
    ``(2 pi)^(-3/2) 4 pi int dk k^2 sinc(k r) f(k) exp(-i k t) / sqrt(2k)``.
    """
    if x.chart != "inertial-minkowski" or x.dim != 4:
        raise ChartError("one_particle_F lives on the 4D inertial chart")
    st = state if state is not None else OneParticleGaussian(sigma_k)
    if st.sigma_k != sigma_k:
        raise ConsistencyError("state and sigma_k disagree")
    t = x.coords[0]
    r = math.sqrt(sum(v * v for v in x.coords[1:]))
    spec = spec or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11)

    def integrand(k):
        return (k * k * np.sinc(k * r / math.pi) * st.profile(k)
                * np.exp(-1j * k * t) / np.sqrt(2 * k + 1e-300))

    val = integrate_radial(integrand, spec, scale=math.sqrt(2) * sigma_k)
    return val * 4 * math.pi / (2 * math.pi) ** 1.5


def wightman(model, state, x, xp, reg=None):
    """Regulated Wightman function ``W(x, x')`` with ``dt -> dt - i eps``.

    Parameters
    ----------
    model : one of the catalogue models
    state : Vacuum or OneParticleGaussian
    x, xp : Event
    reg : Regulator, optional
    """
    reg = reg or Regulator()
    if x.chart != model.chart or xp.chart != model.chart:
        raise ChartError(f"events must lie on the {model.chart} chart")
    if x.dim != xp.dim:
        raise ChartError("events of different dimension")
    d = _delta(x, xp)
    eps = reg.epsilon(d)  # raises on coincident events
    if not isinstance(state, Vacuum) and not (
            isinstance(model, MinkowskiInertial) and model.m == 0 and x.dim == 4):
        raise DomainError("the one-particle state is defined for massless 4D Minkowski only")

    if isinstance(model, MinkowskiInertial):
        if model.m == 0:
            w = _massless_flat(d, eps)
        else:
            if x.dim != 4:
                raise DomainError("massive field implemented in D = 4 only")
            w = _massive_flat(model.m, d, eps)
    elif isinstance(model, MinkowskiRindler):
        w = _rindler(model, x, xp, eps)
    elif isinstance(model, RWHyperbolicStatic):
        w = _rw(model, x, xp, eps)
    elif isinstance(model, DeSitterConformal):
        w = _desitter(model, x, xp, eps)
    elif isinstance(model, HalfMinkowskiDirichlet):
        w = _dirichlet(d, x.coords[3], xp.coords[3], eps)
    else:
        raise DomainError(f"unknown model {model!r}")

    if isinstance(state, OneParticleGaussian):
        fx = one_particle_F(state.sigma_k, x, state=state)
        fxp = one_particle_F(state.sigma_k, xp, state=state)
        w = w + fx * fxp.conjugate() + fxp * fx.conjugate()
    return complex(w)


def wightman_massive_mode_integral(m, x, xp, eps, spec=None):
    """Massive Minkowski W straight from the radial mode integral.

    ``(1 / (4 pi^2 r)) int dk k sin(k r) exp(-i w (dt - i eps)) / w``.
    Only practical for moderate ``eps``; used to cross-check the Hankel form.
    """
    d = _delta(x, xp)
    r = math.sqrt(sum(v * v for v in d[1:]))
    if r == 0:
        raise DomainError("mode integral written for r > 0")
    dt = d[0]

    def integrand(k):
        w = np.sqrt(k * k + m * m)
        return k * np.sin(k * r) * np.exp(-1j * w * (dt - 1j * eps)) / w

    # the envelope is exp(-eps k); pick the range where it falls below 1e-16
    val = integrate_radial(integrand, spec or QuadratureSpec(1e-12, 1e-10, 20000),
                           scale=37.0 / (8.5 * eps))
    return val / (4 * math.pi ** 2 * r)


def feynman_from_wightman(w_xy, w_yx, t_order, tol=1e-10):
    """Time-ordered propagator from the two Wightman orderings.

    ``t_order`` is the sign of ``t - t'``. Equal times give the real part.
    """
    w_xy, w_yx = complex(w_xy), complex(w_yx)
    if abs(w_yx - w_xy.conjugate()) > tol * max(1.0, abs(w_xy)):
        raise ConsistencyError("w_yx is not the conjugate of w_xy")
    if t_order > 0:
        return w_xy
    if t_order < 0:
        return w_yx
    return complex(w_xy.real, 0.0)


def hadamard_check(model, x, direction, s, state=None, reg=None):
    """``Re(sigma * W * 8 pi^2)`` at ``x' = x + s * direction``.

    ``sigma`` is the leading interval ``g_mn(x) dx^m dx^n / 2``; the
    result tends to 1 as ``s -> 0`` for a Hadamard state.
    """
    state = state or Vacuum()
    if isinstance(direction, int):
        v = [0.0] * x.dim
        v[direction] = 1.0
        direction = v
    direction = np.asarray(direction, dtype=float)
    dx = s * direction
    xp = geo.Event(x.chart, tuple(np.add(x.coords, dx)))
    g = geo.exact_metric(model, x)
    sigma = 0.5 * float(dx @ g @ dx)
    if not sigma > 0:
        raise DomainError("hadamard_check needs a spacelike direction")
    return (sigma * wightman(model, state, x, xp, reg) * 8 * math.pi ** 2).real
