"""Metric components from finite differences of W^(2/(2-D)).

For a Hadamard state ``W^(2/(2-D))`` is proportional to the world function
near coincidence, so its mixed derivative ``d_mu d_nu'`` at coincidence
returns ``-g_mu_nu`` up to the constant ``c_D``.
"""
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import detectors as dt
from . import fields as fl
from .errors import DomainError, ProbeError, SingularityError
from .geometry import Event, exact_metric
from .numerics import Regulator, gamma

CHANNELS = ("exact-field", "detector-protocol")
ORDERINGS = ("earlier-first", "literal")


class _Coincident:
    def __repr__(self):
        return "COINCIDENT"


COINCIDENT = _Coincident()


def c_D(D):
    """``-(1/2) (Gamma(D/2 - 1) / (4 pi^(D/2)))^(2/(D-2))``; ``-1/(8 pi^2)`` for D = 4."""
    if D < 3:
        raise DomainError("D must be at least 3")
    return -0.5 * (gamma(D / 2 - 1) / (4 * math.pi ** (D / 2))) ** (2 / (D - 2))


def w_power(w, D):
    """Principal ``w^(2/(2-D))``; the coincident marker maps to 0."""
    if w is COINCIDENT:
        return 0j
    if D < 3:
        raise DomainError("D must be at least 3")
    w = complex(w)
    if w == 0:
        raise SingularityError("W vanishes at a non-coincident pair")
    if D == 4:
        return 1 / w
    return w ** (2 / (2 - D))


def discrete_mixed_derivative(values, L):
    """``(v[j+nu, l+mu] - v[j, l+mu] - v[j+nu, l] + v[j, l]) / L^2``.

    ``values`` are given in that order.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    a, b, c, d = values
    return (a - b - c + d) / (L * L)


@dataclass(frozen=True)
class LatticeSpec:
    """Cubic lattice of ``extent`` points per axis starting at ``base``."""

    base: Event
    L: float
    extent: int = 2

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("L must be positive")
        if self.extent < 2:
            raise DomainError("extent must be at least 2")
        # validates every site against the chart domain
        object.__setattr__(self, "_sites", tuple(self.events()))

    def site(self, index):
        c = tuple(b + self.L * i for b, i in zip(self.base.coords, index))
        return Event(self.base.chart, c)

    def events(self):
        for idx in product(range(self.extent), repeat=self.base.dim):
            yield self.site(idx)


@dataclass
class MetricEstimate:
    at: Event
    L: float
    components: np.ndarray
    exact: np.ndarray
    divergent: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.divergent is None:
            self.divergent = np.zeros(self.exact.shape, dtype=bool)

    @property
    def abs_err(self):
        return np.abs(self.components.real - self.exact)


class _PairSource:
    """Wightman values for stencil pairs, cached per estimate."""

    def __init__(self, model, state, channel, reg, detector, ordering):
        self.model, self.state, self.reg = model, state, reg
        self.channel, self.detector, self.ordering = channel, detector, ordering
        self._cache = {}

    def _raw(self, x, xp):
        if self.channel == "exact-field":
            return fl.wightman(self.model, self.state, x, xp, self.reg)
        det = self.detector
        if isinstance(det.smearing, dt.GaussianBall):
            if self.state.name != "vacuum":
                raise DomainError("smeared detectors are implemented for the vacuum")
            return dt.measure_smeared(self.model, x, xp, det.omega, det.smearing.sigma_s)
        return dt.measure_wightman(self.model, self.state, x, xp, det.omega,
                                   det.lam, self.reg)

    def __call__(self, x, xp):
        smeared = (self.channel == "detector-protocol"
                   and isinstance(self.detector.smearing, dt.GaussianBall))
        if x == xp and not smeared:
            return COINCIDENT
        key = (x.coords, xp.coords)
        if key not in self._cache:
            flip = self.ordering == "earlier-first" and xp.coords[0] < x.coords[0]
            self._cache[key] = self._raw(xp, x) if flip else self._raw(x, xp)
        return self._cache[key]


def estimate_metric(model, state, x, L, channel="exact-field", reg=None,
                    detector=None, central=False, ordering="earlier-first",
                    prefactor_scale=1.0):
    """Estimate ``g_mu_nu(x)`` from stencil samples of W at spacing ``L``.

    Parameters
    ----------
    channel : {"exact-field", "detector-protocol"}
        Use the closed-form Wightman function or simulated detector data.
    reg : Regulator, optional
        Supplies ``epsilon_rel``; the scale is always the stencil step.
    detector : DetectorSpec, optional
        Gap, coupling and smearing template for the detector channel; the
        position is ignored. Defaults to a pointlike detector with gap 1.
    central : bool
        Use the centred stencil ``x +- L/2`` instead of the forward one.
    ordering : {"earlier-first", "literal"}
        Which argument order feeds W when the stencil pair is not
        time-ordered.
    prefactor_scale : float
        Multiplies ``c_D``; only for mutation checks.
    """
    if channel not in CHANNELS:
        raise DomainError(f"unknown channel {channel!r}")
    if ordering not in ORDERINGS:
        raise DomainError(f"unknown ordering {ordering!r}")
    if not L > 0:
        raise DomainError("L must be positive")
    if x.chart != model.chart:
        raise DomainError(f"event on {x.chart}, model on {model.chart}")
    reg = reg or Regulator()
    # one eps for the whole stencil keeps the i-eps shift linear in dt, so
    # the mixed difference of a quadratic world function stays exact
    reg = Regulator(reg.epsilon_rel, L / 2 if central else L)
    if channel == "detector-protocol" and detector is None:
        detector = dt.DetectorSpec(1.0, x.chart, x.coords[1:])
    D = x.dim
    src = _PairSource(model, state, channel, reg, detector, ordering)

    if central:
        def shift(axis, s):
            return x.shifted(axis, s * L / 2)
        lo, hi = -1, 1
    else:
        def shift(axis, s):
            return x.shifted(axis, s * L) if s else x
        lo, hi = 0, 1

    comps = np.zeros((D, D), dtype=complex)
    flags = np.zeros((D, D), dtype=bool)
    cd = c_D(D) * prefactor_scale
    for mu, nu in product(range(D), repeat=2):
        pairs = [(shift(nu, hi), shift(mu, hi)), (shift(nu, lo), shift(mu, hi)),
                 (shift(nu, hi), shift(mu, lo)), (shift(nu, lo), shift(mu, lo))]
        try:
            vals = [w_power(src(a, b), D) for a, b in pairs]
        except SingularityError:
            comps[mu, nu] = complex(math.nan, math.nan)
            flags[mu, nu] = True
            continue
        comps[mu, nu] = cd * discrete_mixed_derivative(vals, L)
    return MetricEstimate(x, L, comps, exact_metric(model, x), flags)


@dataclass
class SweepRow:
    L: float
    estimate: MetricEstimate = None
    error: str = None


@dataclass
class SweepResult:
    rows: list
    orders: np.ndarray


def fit_order(Ls, errs, floor=1e-12, exact_tol=1e-8):
    """Least-squares slope of log err vs log L.

    Returns ``"exact"`` when every error is at most ``exact_tol`` and None
    when fewer than two points lie above ``floor``.
    """
    errs = np.asarray(errs, dtype=float)
    Ls = np.asarray(Ls, dtype=float)
    ok = np.isfinite(errs)
    if ok.any() and np.all(errs[ok] <= exact_tol) and ok.all():
        return "exact"
    use = ok & (errs > floor)
    if use.sum() < 2:
        return None
    return float(np.polyfit(np.log(Ls[use]), np.log(errs[use]), 1)[0])


def sweep(model, state, x, L_values, channel="exact-field", **kwargs):
    """``estimate_metric`` at each spacing plus a fitted order per component.

    Failures at a single spacing are recorded in that row.
    """
    L_values = [float(v) for v in L_values]
    if not L_values or any(not v > 0 for v in L_values):
        raise DomainError("L values must be positive")
    if any(b >= a for a, b in zip(L_values, L_values[1:])):
        raise DomainError("L values must be strictly decreasing")
    rows = []
    for L in L_values:
        try:
            rows.append(SweepRow(L, estimate_metric(model, state, x, L, channel, **kwargs)))
        except (ProbeError, ArithmeticError) as exc:
            rows.append(SweepRow(L, error=f"{type(exc).__name__}: {exc}"))
    D = x.dim
    orders = np.empty((D, D), dtype=object)
    good = [r for r in rows if r.estimate is not None]
    for mu, nu in product(range(D), repeat=2):
        errs = [r.estimate.abs_err[mu, nu] for r in good]
        orders[mu, nu] = fit_order([r.L for r in good], errs) if good else None
    return SweepResult(rows, orders)
