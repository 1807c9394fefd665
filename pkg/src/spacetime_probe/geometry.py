"""Events, charts, exact metrics and the flat-space world function."""
import cmath
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ChartError, DomainError

CHARTS = ("inertial-minkowski", "rindler", "rw-hyperbolic",
          "desitter-conformal", "half-minkowski")

# charts on which the inertial Minkowski interval is the flat metric
FLAT_CHARTS = ("inertial-minkowski", "half-minkowski")


@dataclass(frozen=True)
class Event:
    """A point of a labelled chart.

    Coordinates are ``(t, x, y, z)`` for the Minkowski charts,
    ``(T, X, y, z)`` for Rindler, ``(eta, chi, theta, phi)`` for the
    hyperbolic RW chart and ``(eta, x, y, z)`` for conformal de Sitter.
    """

    chart: str
    coords: tuple

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ChartError(f"unknown chart {self.chart!r}")
        c = tuple(float(v) for v in self.coords)
        object.__setattr__(self, "coords", c)
        if len(c) < 3:
            raise DomainError("events need at least 3 coordinates")
        if not all(math.isfinite(v) for v in c):
            raise DomainError(f"non-finite coordinate in {c}")
        if self.chart != "inertial-minkowski" and len(c) != 4:
            raise DomainError(f"chart {self.chart} is four-dimensional")
        if self.chart == "rindler" and not c[1] > 0:
            raise DomainError(f"Rindler chart needs X > 0, got X = {c[1]}")
        if self.chart == "half-minkowski" and c[3] < 0:
            raise DomainError(f"half space needs z >= 0, got z = {c[3]}")
        if self.chart == "desitter-conformal" and c[0] == 0:
            raise DomainError("conformal de Sitter chart excludes eta = 0")
        if self.chart == "rw-hyperbolic" and c[1] < 0:
            raise DomainError(f"RW chart needs chi >= 0, got chi = {c[1]}")

    @property
    def dim(self):
        return len(self.coords)

    def shifted(self, axis, step):
        c = list(self.coords)
        c[axis] += step
        return Event(self.chart, tuple(c))


def _check_same(x, xp):
    if x.chart != xp.chart:
        raise ChartError(f"events on different charts: {x.chart} vs {xp.chart}")
    if x.dim != xp.dim:
        raise ChartError("events of different dimension")


def minkowski_eta(D=4):
    return np.diag([-1.0] + [1.0] * (D - 1))


def synge_minkowski(x, xp):
    """Half the squared interval, signature (-, +, ..., +)."""
    _check_same(x, xp)
    if x.chart not in FLAT_CHARTS:
        raise ChartError(f"synge_minkowski needs an inertial chart, got {x.chart}")
    d = [a - b for a, b in zip(x.coords, xp.coords)]
    return 0.5 * (-d[0] * d[0] + sum(v * v for v in d[1:]))


def exact_metric(model, x):
    """Analytic metric components of ``model`` at ``x`` in chart order.

    ``model`` only needs a ``chart`` attribute and its parameters
    (``a`` for Rindler and RW, ``ell`` for de Sitter).
    """
    if x.chart != model.chart:
        raise ChartError(f"event on {x.chart}, model on {model.chart}")
    c = x.coords
    if model.chart in FLAT_CHARTS:
        return minkowski_eta(x.dim)
    if model.chart == "rindler":
        return np.diag([-(model.a * c[1]) ** 2, 1.0, 1.0, 1.0])
    if model.chart == "rw-hyperbolic":
        sh2 = math.sinh(c[1]) ** 2
        return model.a ** 2 * np.diag([-1.0, 1.0, sh2, sh2 * math.sin(c[2]) ** 2])
    if model.chart == "desitter-conformal":
        return (model.ell / c[0]) ** 2 * np.diag([-1.0, 1.0, 1.0, 1.0])
    raise ChartError(f"no metric for chart {model.chart}")


def rindler_to_minkowski(coords, a):
    """Map Rindler ``(T, X, y, z)`` to inertial ``(t, x, y, z)``.

    Works for complex ``T`` (used by the regulator).
    """
    T, X, y, z = coords
    if isinstance(T, complex):
        return (X * cmath.sinh(a * T), X * cmath.cosh(a * T), y, z)
    return (X * math.sinh(a * T), X * math.cosh(a * T), y, z)


def rindler_jacobian(coords, a):
    """d(t, x, y, z) / d(T, X, y, z)."""
    T, X = coords[0], coords[1]
    J = np.eye(4)
    J[0, 0] = a * X * math.cosh(a * T)
    J[0, 1] = math.sinh(a * T)
    J[1, 0] = a * X * math.sinh(a * T)
    J[1, 1] = math.cosh(a * T)
    return J


def hyperbolic_distance(chi1, th1, ph1, chi2, th2, ph2):
    """Geodesic distance on the unit hyperbolic 3-space.

    Written as ``acosh(1 + u)`` with ``u`` in haversine form so that small
    separations keep full relative precision.
    """
    hav = (math.sin(0.5 * (th1 - th2)) ** 2
           + math.sin(th1) * math.sin(th2) * math.sin(0.5 * (ph1 - ph2)) ** 2)
    u = 2.0 * (math.sinh(0.5 * (chi1 - chi2)) ** 2 + math.sinh(chi1) * math.sinh(chi2) * hav)
    return math.log1p(u + math.sqrt(u * (u + 2.0)))


def coincidence_identity_check(order, L, D=4):
    """Largest deviation of finite differences of sigma from its coincidence limits.

    ``order`` 1 checks ``[sigma_a] = 0``, 2 checks ``[sigma_ab] = eta`` and
    ``[sigma_ab'] = -eta``, 4 checks that fourth derivatives vanish.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    if order not in (1, 2, 4):
        raise DomainError("order must be 1, 2 or 4")
    base = Event("inertial-minkowski", (0.3, -0.2, 0.1, 0.7)[:D] + (0.0,) * max(0, D - 4))
    eta = minkowski_eta(D)
    h = L

    def sig(dx, dxp):
        x = Event(base.chart, tuple(b + d for b, d in zip(base.coords, dx)))
        xp = Event(base.chart, tuple(b + d for b, d in zip(base.coords, dxp)))
        return synge_minkowski(x, xp)

    def e(i, s=1.0):
        v = [0.0] * D
        v[i] = s * h
        return v

    zero = [0.0] * D
    worst = 0.0
    if order == 1:
        for a in range(D):
            d = (sig(e(a), zero) - sig(e(a, -1), zero)) / (2 * h)
            worst = max(worst, abs(d))
    elif order == 2:
        for a, b in product(range(D), repeat=2):
            # unprimed-unprimed
            if a == b:
                d = (sig(e(a), zero) - 2 * sig(zero, zero) + sig(e(a, -1), zero)) / h ** 2
            else:
                pp = [x + y for x, y in zip(e(a), e(b))]
                pm = [x + y for x, y in zip(e(a), e(b, -1))]
                mp = [x + y for x, y in zip(e(a, -1), e(b))]
                mm = [x + y for x, y in zip(e(a, -1), e(b, -1))]
                d = (sig(pp, zero) - sig(pm, zero) - sig(mp, zero) + sig(mm, zero)) / (4 * h * h)
            worst = max(worst, abs(d - eta[a, b]))
            # unprimed-primed
            d = (sig(e(a), e(b)) - sig(e(a), e(b, -1)) - sig(e(a, -1), e(b))
                 + sig(e(a, -1), e(b, -1))) / (4 * h * h)
            worst = max(worst, abs(d + eta[a, b]))
    else:
        # fourth difference along each axis pair, all on the first slot
        for a, b in product(range(D), repeat=2):
            tot = 0.0
            for i, j in product((-1, 1), repeat=2):
                for k, l in product((-1, 1), repeat=2):
                    dx = [0.0] * D
                    dx[a] += (i + k) * h
                    dx[b] += (j + l) * h
                    tot += i * j * k * l * sig(dx, zero)
            worst = max(worst, abs(tot / (16 * h ** 4)))
    return worst
