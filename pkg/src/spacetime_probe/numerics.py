"""Special functions, radial quadrature and the regulator convention.

Gamma comes from :mod:`math`. The Hankel function and the Gauss
hypergeometric function are evaluated here from power series, integral
representations and the usual linear transformations; the inner series
loops live in a compiled extension when one is available.
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (AccuracyError, AmbiguityError, ConvergenceError,
                     DomainError, SingularityError)

try:
    from . import _kernels as _k
    KERNEL_BACKEND = "compiled"
except ImportError:  # no compiler at install time
    from . import _kernels_py as _k
    KERNEL_BACKEND = "python"

__all__ = [
    "Regulator", "QuadratureSpec", "KERNEL_BACKEND", "gamma", "rgamma",
    "digamma", "hankel2_1", "bessel_j1", "bessel_y1", "hyp2f1",
    "integrate_radial",
]

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class Regulator:
    """The i-epsilon prescription.

    Time differences are shifted to ``dt - 1j*eps`` with
    ``eps = epsilon_rel * (smallest nonzero coordinate separation)``.
    The separation is taken per pair unless ``scale`` fixes it for a whole
    evaluation, as the metric estimator does with its stencil step.
    """

    epsilon_rel: float = 1e-6
    scale: float = None

    def __post_init__(self):
        if not (self.epsilon_rel > 0 and math.isfinite(self.epsilon_rel)):
            raise DomainError("epsilon_rel must be positive and finite")
        if self.scale is not None and not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError("regulator scale must be positive and finite")

    def epsilon(self, delta):
        """Absolute regulator for a coordinate separation vector."""
        nz = [abs(d) for d in delta if d != 0]
        if not nz:
            raise SingularityError("coincident events have no regulator scale")
        return self.epsilon_rel * (self.scale if self.scale is not None else min(nz))


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


# ---------------------------------------------------------------- gamma

def gamma(x):
    """Euler gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"gamma requires x > 0, got {x!r}")
    return math.gamma(x)


def rgamma(x):
    """Reciprocal gamma on the whole real line (zero at the poles)."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    try:
        return 1.0 / math.gamma(x)
    except OverflowError:
        return 0.0


_PSI_ASYM = (1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132,
             -691.0 / 32760, 1.0 / 12)


def digamma(x):
    """psi(x) for real x, not a non-positive integer."""
    x = float(x)
    if x <= 0:
        if x == math.floor(x):
            raise SingularityError(f"digamma pole at {x}")
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _PSI_ASYM:
        series += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


# -------------------------------------------------------------- Hankel

_HERM_T, _HERM_W = np.polynomial.hermite.hermgauss(120)
_HERM_T2 = _HERM_T * _HERM_T
_HERM_WT2 = _HERM_W * _HERM_T2


def _hankel_series(z):
    j, s, _ = _k.bessel1_series(z)
    y = (2.0 / math.pi) * j * cmath.log(0.5 * z) - 2.0 / (math.pi * z) - s / math.pi
    return j - 1j * y


def _laplace_integral(z, sign):
    # u = t^2 in the Laplace-type representation of H^(1,2)_1 (sign +1, -1);
    # the square-root branch point sits at t^2 = 2*sign*iz.
    root = np.sqrt(1.0 + sign * 1j * _HERM_T2 / (2.0 * z))
    integral = complex(np.dot(_HERM_WT2, root))
    pref = cmath.sqrt(2.0 / (math.pi * z)) * cmath.exp(sign * 1j * (z - 0.75 * math.pi))
    return pref * integral * (2.0 / math.sqrt(math.pi))


def hankel2_1(z):
    """Hankel function of the second kind, order one, ``J1(z) - i Y1(z)``.

    Principal branch, ``|arg z| <= pi``.

    Parameters
    ----------
    z : complex
        Nonzero argument.
    """
    z = complex(z)
    if z == 0:
        raise SingularityError("hankel2_1 is singular at z = 0")
    # the power series loses about |z| - Im z nats to cancellation
    if abs(z) - z.imag <= 6.0 or abs(z) < 1.5:
        return _hankel_series(z)
    if z.real < 0 and z.imag >= 0:
        # outside the Laplace representation; continue from zeta = z e^{-i pi}
        zeta = -z
        return -2.0 * _laplace_integral(zeta, -1) - _laplace_integral(zeta, 1)
    return _laplace_integral(z, -1)


def bessel_j1(x):
    """J1 for real x (via the Hankel evaluation)."""
    return hankel2_1(complex(x)).real if x != 0 else 0.0


def bessel_y1(x):
    """Y1 for real x > 0."""
    if not x > 0:
        raise DomainError("bessel_y1 needs x > 0")
    return -hankel2_1(complex(x)).imag


# ------------------------------------------------------------ hyp2f1

def _is_nonpos_int(x):
    return x <= 0 and x == math.floor(x)


def _nearest_int(x, tol=1e-13):
    n = round(x)
    return int(n) if abs(x - n) <= tol * max(1.0, abs(x)) else None


def _series(a, b, c, z):
    val, n = _k.hyp2f1_series(a, b, c, z)
    if n < 0:
        raise ConvergenceError(
            f"hyp2f1 series did not converge (a={a}, b={b}, c={c}, z={z})")
    return val


def _poch(x, n):
    p = 1.0
    for i in range(n):
        p *= x + i
    return p


def _one_minus_z(a, b, c, z):
    w = 1.0 - z
    s = c - a - b
    m = _nearest_int(s)
    if m is None:
        t1 = (math.gamma(c) * math.gamma(s) * rgamma(c - a) * rgamma(c - b)
              * _series(a, b, 1.0 - s, w))
        t2 = (w ** s * math.gamma(c) * math.gamma(-s) * rgamma(a) * rgamma(b)
              * _series(c - a, c - b, 1.0 + s, w))
        return t1 + t2
    if m > 0:
        # Euler: F(a,b;c;z) = (1-z)^m F(c-a, c-b; c; z), now with c-a'-b' = -m
        return w ** m * _degenerate(c - a, c - b, m, w)
    return _degenerate(a, b, -m, w)


def _degenerate(a, b, m, w):
    """F(a, b; a+b-m; 1-w) for integer m >= 0."""
    c = a + b - m
    gc = math.gamma(c)
    head = 0.0
    if m > 0:
        fin = 0.0
        term = 1.0
        for n in range(m):
            if n:
                term *= (a - m + n - 1) * (b - m + n - 1) / (n * (1 - m + n - 1))
            fin += term * w ** n
        head = math.gamma(m) * gc * rgamma(a) * rgamma(b) * w ** (-m) * fin
    coef = gc * rgamma(a - m) * rgamma(b - m)
    if coef == 0.0:
        return head
    tail, n = _k.hyp2f1_log_series(
        a, b, m, w, cmath.log(w), digamma(a), digamma(b), digamma(1.0),
        digamma(m + 1.0))
    if n < 0:
        raise ConvergenceError("hyp2f1 logarithmic series did not converge")
    return head - (-1) ** m * coef * tail


def _inverse_z(a, b, c, z):
    g = math.gamma(c)
    mz = -z
    t1 = (g * math.gamma(b - a) * rgamma(b) * rgamma(c - a) * mz ** (-a)
          * _series(a, 1.0 - c + a, 1.0 - b + a, 1.0 / z))
    t2 = (g * math.gamma(a - b) * rgamma(a) * rgamma(c - b) * mz ** (-b)
          * _series(b, 1.0 - c + b, 1.0 - a + b, 1.0 / z))
    return t1 + t2


def _inverse_z_degenerate(a, m, c, z, tol=1e-17, max_terms=5000):
    """F(a, a+m; c; z) for integer m >= 0 and |z| > 1, logarithmic case."""
    b = a + m
    g = math.gamma(c)
    mz = -z
    head = 0j
    if m > 0:
        term = 1.0
        for k in range(m):
            if k:
                term *= (a + k - 1) / k
            head += term * math.factorial(m - k - 1) * rgamma(c - a - k) * z ** (-k)
        head *= g * rgamma(b) * mz ** (-a)
    ra = rgamma(a)
    if ra == 0.0:
        return head
    # p = A_k / Gamma(x), q = A_k psi(x) / Gamma(x) at x = c - b - k; carried
    # as products because 1/Gamma(x) grows like k! while A_k decays like it
    x = c - b
    n = _nearest_int(x)
    if n is not None and n <= 0:
        rg, rp = 0.0, (-1.0) ** (1 - n) * math.factorial(-n)
    else:
        rg, rp = rgamma(x), rgamma(x) * digamma(x)
    p, q = rg / math.factorial(m), rp / math.factorial(m)
    lg = cmath.log(mz)
    psi_m = digamma(m + 1.0)
    psi_k = digamma(1.0)
    psi_b = digamma(b)
    w = 1.0 / z
    zk = w ** m
    tot = 0j
    for k in range(max_terms):
        t = zk * ((lg + psi_m + psi_k - psi_b) * p - q)
        tot += t
        if abs(t) <= tol * abs(tot) and k > 2:
            return head + g * ra * mz ** (-a) * tot
        r = -(b + k) / ((k + 1) * (k + m + 1))
        p, q = r * (x - 1) * p, r * ((x - 1) * q - p)
        x -= 1
        zk *= w
        psi_m += 1.0 / (k + m + 1)
        psi_k += 1.0 / (k + 1)
        psi_b += 1.0 / (b + k)
    raise ConvergenceError("hyp2f1 logarithmic 1/z series did not converge")


def _taylor_step(a, b, c, z0, f, fp, h, tol=1e-17, max_terms=400):
    """Advance (F, F') of the hypergeometric ODE from ``z0`` to ``z0 + h``."""
    p0 = z0 * (1.0 - z0)
    p1 = 1.0 - 2.0 * z0
    q0 = c - (a + b + 1.0) * z0
    q1 = -(a + b + 1.0)
    ab = a * b
    c0, c1 = f, fp
    val, der = c0 + c1 * h, c1
    hn = h  # h^(n+1) for the coefficient c_{n+1}
    for n in range(max_terms):
        c2 = -((p1 * n * (n + 1) + q0 * (n + 1)) * c1
               + (-n * (n - 1) + q1 * n - ab) * c0) / (p0 * (n + 2) * (n + 1))
        dd = (n + 2) * c2 * hn
        hn *= h
        dv = c2 * hn
        val += dv
        der += dd
        if abs(dv) <= tol * abs(val) and abs(dd) <= tol * abs(der) and n > 2:
            return val, der
        c0, c1 = c1, c2
    raise ConvergenceError("hyp2f1 Taylor continuation did not converge")


def _continuation(a, b, c, z):
    """Integrate the ODE from ``|z0| = 1/2`` along a path clear of the cut."""
    side = math.copysign(1.0, z.imag)
    path = [z]
    # detour around z = 1 when the ray from 0 passes close to it
    t = max(0.0, min(1.0, z.real / abs(z) ** 2))
    if abs(t * z - 1.0) < 0.3:
        path.insert(0, complex(1.0, 0.6 * side))
    z0 = 0.5 * path[0] / abs(path[0])
    f = _series(a, b, c, z0)
    fp = a * b / c * _series(a + 1.0, b + 1.0, c + 1.0, z0)
    for target in path:
        for _ in range(10000):
            gap = target - z0
            if gap == 0:
                break
            radius = min(abs(z0), abs(1.0 - z0))
            h = gap if abs(gap) <= 0.5 * radius else gap * (0.5 * radius / abs(gap))
            f, fp = _taylor_step(a, b, c, z0, f, fp, h)
            z0 = target if h == gap else z0 + h
        else:
            raise ConvergenceError("hyp2f1 continuation path too long")
    return f


def hyp2f1(a, b, c, z, side=None):
    """Gauss hypergeometric function 2F1(a, b; c; z), principal branch.

    The cut runs along ``[1, inf)``. A real ``z > 1`` needs ``side``
    (``+1`` for the limit from above, ``-1`` from below).

    Regions: direct series for ``|z| < 0.5``; otherwise whichever of the
    direct, ``1 - z``, ``z/(z-1)`` and ``1/z`` forms has the smallest
    series variable. Integer ``c - a - b`` uses the logarithmic connection
    formula, as does integer ``a - b`` under ``1/z``. Near ``exp(+-i pi/3)``,
    where every transformed series is slow, the ODE is continued by Taylor
    steps from ``|z| = 1/2``.
    """
    a, b, c = float(a), float(b), float(c)
    z = complex(z)
    if _is_nonpos_int(c):
        raise DomainError(f"hyp2f1 undefined for c = {c}")
    if z == 0:
        return 1.0 + 0j
    if z.imag == 0 and z.real > 1:
        if side is None:
            raise AmbiguityError(f"z = {z.real} lies on the branch cut; pass side=+1 or -1")
        z = complex(z.real, 0.0 if side > 0 else -0.0)
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _series(a, b, c, z)  # polynomial
    r0 = abs(z)
    if r0 < 0.5:
        return _series(a, b, c, z)
    cands = [(r0, "z")] if r0 < 1 else []
    cands.append((abs(1.0 - z), "1-z"))
    if z != 1:
        cands.append((abs(z / (z - 1.0)), "pfaff"))
    # a - b close to (but not at) an integer makes the two 1/z terms cancel
    near = _nearest_int(a - b) is None and abs(a - b - round(a - b)) < 1e-2
    cands.append((1.0 / r0 + (0.2 if near else 0.0), "1/z"))
    rate, kind = min(cands)
    if z == 1:
        s = c - a - b
        if s <= 0:
            raise SingularityError("hyp2f1 diverges at z = 1 when c - a - b <= 0")
        return complex(math.gamma(c) * math.gamma(s) * rgamma(c - a) * rgamma(c - b))
    if rate > 0.7:
        return _continuation(a, b, c, z)
    if kind == "z":
        return _series(a, b, c, z)
    if kind == "1-z":
        return _one_minus_z(a, b, c, z)
    if kind == "pfaff":
        return (1.0 - z) ** (-a) * _series(a, c - b, c, z / (z - 1.0))
    m = _nearest_int(b - a)
    if m is None:
        return _inverse_z(a, b, c, z)
    return _inverse_z_degenerate(a, m, c, z) if m >= 0 else _inverse_z_degenerate(b, -m, c, z)


# ------------------------------------------------------- quadrature

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    """Vectorised Gauss-Kronrod 7/15 over intervals ``[a_i, b_i]``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    k = (fx @ _WK) * half
    g = (fx @ _WG15) * half
    return k, np.abs(k - g)


def integrate_radial(f, spec=None, scale=1.0, return_error=False):
    """Integrate ``f`` over ``[0, inf)``.

    Parameters
    ----------
    f : callable
        Vectorised integrand, real ``k`` array in, complex array out.
        Must decay at least like a Gaussian beyond ``scale``.
    spec : QuadratureSpec, optional
    scale : float
        Width of the Gaussian envelope; the integration range is cut where
        that envelope is below 1e-30.
    return_error : bool
        Also return the error estimate.
    """
    spec = spec or QuadratureSpec()
    if not scale > 0:
        raise DomainError("scale must be positive")
    kmax = 8.5 * scale  # exp(-72) ~ 5e-32
    n0 = 16
    edges = np.linspace(0.0, kmax, n0 + 1)
    a, b = edges[:-1], edges[1:]
    val, err = _gk15(f, a, b)
    n_sub = 0
    while True:
        total = val.sum()
        tot_err = err.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if tot_err <= tol:
            break
        if n_sub >= spec.max_subdivisions:
            raise AccuracyError(
                f"integrate_radial: error {tot_err:.3g} above tolerance {tol:.3g}",
                best=complex(total), error=float(tot_err))
        # bisect every interval carrying more than its share of the budget
        bad = err > tol / len(err)
        if not bad.any():
            bad = err >= err.max()
        idx = np.nonzero(bad)[0]
        room = spec.max_subdivisions - n_sub
        if len(idx) > room:
            idx = idx[np.argsort(err[idx])[::-1][:room]]
        mids = 0.5 * (a[idx] + b[idx])
        na = np.concatenate([a[idx], mids])
        nb = np.concatenate([mids, b[idx]])
        nv, ne = _gk15(f, na, nb)
        keep = np.ones(len(a), dtype=bool)
        keep[idx] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        n_sub += len(idx)
    order = np.argsort(a, kind="stable")  # fixed summation order
    total = complex(val[order].sum())
    if return_error:
        return total, float(err.sum())
    return total
