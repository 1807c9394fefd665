"""Second-order Unruh-DeWitt detector pairs.

Pointlike (delta) couplings give closed forms in terms of the Wightman
function; Gaussian spacetime smearings in inertial Minkowski reduce to one
radial momentum integral per pair of interaction centres.
"""
import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fields as fl
from .errors import (ConsistencyError, DomainError, GeometryError,
                     ProtocolError)
from .geometry import Event
from .numerics import QuadratureSpec, Regulator, integrate_radial

# basis order |g g>, |g e>, |e g>, |e e>; first label is detector i
GG, GE, EG, EE = 0, 1, 2, 3

SIGMA_X2 = np.kron(np.array([[0, 1], [1, 0]], dtype=complex),
                   np.array([[0, 1], [1, 0]], dtype=complex))


class _Divergent:
    """Marker for the pointlike local excitation probability."""

    def __repr__(self):
        return "DIVERGENT"

    def __bool__(self):
        return False


DIVERGENT = _Divergent()


@dataclass(frozen=True)
class PointlikeDelta:
    name = "pointlike"


@dataclass(frozen=True)
class GaussianBall:
    sigma_s: float

    name = "gaussian"

    def __post_init__(self):
        if not self.sigma_s > 0:
            raise DomainError("sigma_s must be positive")


@dataclass(frozen=True)
class DetectorSpec:
    """A comoving detector: gap, coupling, smearing and spatial position."""

    omega: float
    chart: str
    position: tuple
    lam: float = 0.01
    smearing: object = field(default_factory=PointlikeDelta)

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))

    def on_worldline(self, event):
        return event.chart == self.chart and event.coords[1:] == self.position


@dataclass(frozen=True)
class InteractionEvent:
    detector: int
    event: Event
    proper_time: float


def proper_time(model, event):
    """Proper time of the comoving observer through ``event``.

    Rindler ``a X T``; static RW ``a eta``; de Sitter ``ell log(eta / ell)``
    (for eta > 0); coordinate time otherwise.
    """
    c = event.coords
    if isinstance(model, fl.MinkowskiRindler):
        return model.a * c[1] * c[0]
    if isinstance(model, fl.RWHyperbolicStatic):
        return model.a * c[0]
    if isinstance(model, fl.DeSitterConformal):
        return math.copysign(model.ell * math.log(abs(c[0]) / model.ell), c[0])
    return c[0]


def interaction(model, detector_index, event):
    return InteractionEvent(detector_index, event, proper_time(model, event))


@dataclass(frozen=True)
class CorrelatorSet:
    l_ii: complex
    l_kk: complex
    l_ik: complex
    m_ik: complex


@dataclass(frozen=True)
class PairState:
    """Joint detector state, basis ``|gg>, |ge>, |eg>, |ee>``."""

    rho: np.ndarray

    def __post_init__(self):
        r = self.rho
        if r.shape != (4, 4):
            raise ConsistencyError("pair state must be 4x4")
        if np.max(np.abs(r - r.conj().T)) > 1e-12:
            raise ConsistencyError("pair state is not Hermitian")
        if abs(np.trace(r) - 1) > 1e-12:
            raise ConsistencyError("pair state trace differs from 1")

    def expect(self, op):
        return complex(np.trace(self.rho @ op))


# --------------------------------------------------- delta couplings

def _check_gap(det_i, det_k):
    if det_i.omega != det_k.omega:
        raise ProtocolError("detectors must share the energy gap")
    return det_i.omega


def lii_delta_correlation(det, e1, e2, model, state, reg=None):
    """Correlation part of the two-interaction excitation probability.

    ``cos(W dt) Re W(x1, x2) + sin(W dt) Im W(x1, x2)`` with
    ``dt = tau2 - tau1``; the local terms are divergent for delta couplings
    and are left out.
    """
    if not isinstance(det.smearing, PointlikeDelta):
        raise ProtocolError("lii_delta_correlation needs pointlike coupling")
    if not (det.on_worldline(e1.event) and det.on_worldline(e2.event)):
        raise GeometryError("both interactions must lie on the detector worldline")
    if e1.event == e2.event:
        raise GeometryError("the two interactions coincide")
    w = fl.wightman(model, state, e1.event, e2.event, reg)
    ph = det.omega * (e2.proper_time - e1.proper_time)
    return complex(math.cos(ph) * w.real + math.sin(ph) * w.imag)


def local_probability(det, center, model=None):
    """Single-interaction excitation probability per lambda^2.

    Divergent for delta couplings; finite for a Gaussian ball in inertial
    Minkowski.
    """
    if isinstance(det.smearing, PointlikeDelta):
        return DIVERGENT
    return lik_smeared(det, det, [center], [center], model).real


def lik_delta(det_i, det_k, e_i, e_k, model, state, reg=None):
    """``L_ik = exp(-i W (tau_i - tau_k)) W(x_i, x_k)`` for delta couplings."""
    om = _check_gap(det_i, det_k)
    w = fl.wightman(model, state, e_i.event, e_k.event, reg)
    return cmath.exp(-1j * om * (e_i.proper_time - e_k.proper_time)) * w


def mik_delta_equal_time(det_i, det_k, e_i, e_k, model, state, reg=None):
    """``M_ik = exp(i W (tau_i + tau_k)) W(x_i, x_k)`` for simultaneous deltas.

    The step function at equal times is replaced by 1/2; the halves from
    ``N_ik`` and ``N_ki`` then add up.
    """
    om = _check_gap(det_i, det_k)
    if e_i.event.coords[0] != e_k.event.coords[0]:
        raise ProtocolError("M_ik closed form needs simultaneous interactions")
    w = fl.wightman(model, state, e_i.event, e_k.event, reg)
    return cmath.exp(1j * om * (e_i.proper_time + e_k.proper_time)) * w


# -------------------------------------------------- Gaussian smearing

def lik_smeared(det_i, det_k, centers_i, centers_k, model, spec=None):
    """``L_ik`` for Euclidean spacetime Gaussians in inertial Minkowski.

    Each centre contributes ``exp(-s^2 (k^2 + (w + W)^2) / 2)`` and a phase;
    the angular integral is done analytically, leaving one radial integral.
    """
    if not isinstance(model, fl.MinkowskiInertial):
        raise DomainError("smeared detectors are implemented in inertial Minkowski")
    for d in (det_i, det_k):
        if not isinstance(d.smearing, GaussianBall):
            raise ProtocolError("lik_smeared needs Gaussian smearing")
    om = _check_gap(det_i, det_k)
    m = model.m
    s2 = 0.5 * (det_i.smearing.sigma_s ** 2 + det_k.smearing.sigma_s ** 2)
    dts, rs = [], []
    for ca in centers_i:
        for cb in centers_k:
            d = np.subtract(ca.event.coords, cb.event.coords)
            dts.append(d[0])
            rs.append(math.sqrt(float(d[1:] @ d[1:])))
    dts = np.array(dts)[:, None]
    rs = np.array(rs)[:, None]

    def integrand(k):
        w = np.sqrt(k * k + m * m)
        env = np.exp(-s2 * (k * k + (w + om) ** 2)) * k * k / (2 * w)
        terms = np.sinc(k * rs / math.pi) * np.exp(-1j * (w + om) * dts)
        return env * terms.sum(axis=0)

    spec = spec or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=20000)
    val = integrate_radial(integrand, spec, scale=1.0 / math.sqrt(s2))
    return val / (2 * math.pi ** 2)


# ------------------------------------------------------- pair state

def pair_state(cs, tau_i0, tau_k0, lam, omega=0.0, warn=True):
    """Second-order joint state at the measurement proper times.

    Interaction-picture entries: populations ``lam^2 Re L_ii`` (i excited)
    and ``lam^2 Re L_kk`` (k excited), ``<ge|rho|eg> = lam^2 L_ik`` and
    ``<gg|rho|ee> = -lam^2 M_ik``. Free evolution to ``tau_i0, tau_k0``
    multiplies coherences by ``exp(-i omega (E_a - E_b))``.
    """
    l2 = lam * lam
    vals = (cs.l_ii, cs.l_kk, cs.l_ik, cs.m_ik)
    if any(v is DIVERGENT for v in vals):
        raise ProtocolError("pair_state needs finite local terms")
    if warn and l2 * max(abs(complex(v)) for v in vals) > 0.1:
        warnings.warn("lambda^2 * correlator above 0.1; second order is unreliable",
                      RuntimeWarning, stacklevel=2)
    rho = np.zeros((4, 4), dtype=complex)
    rho[EG, EG] = l2 * complex(cs.l_ii).real
    rho[GE, GE] = l2 * complex(cs.l_kk).real
    rho[GG, GG] = 1.0 - rho[EG, EG].real - rho[GE, GE].real
    rho[GE, EG] = l2 * cs.l_ik
    rho[EG, GE] = np.conj(rho[GE, EG])
    rho[GG, EE] = -l2 * cs.m_ik
    rho[EE, GG] = np.conj(rho[GG, EE])
    energy = np.array([0.0, tau_k0, tau_i0, tau_i0 + tau_k0]) * omega
    phase = np.exp(-1j * (energy[:, None] - energy[None, :]))
    return PairState(rho * phase)


def correlation_C(cs, tau_i0, tau_k0, omega, lam):
    """``2 lam^2 Re(e^{iW(ti0 - tk0)} L_ik - e^{iW(ti0 + tk0)} M_ik)``."""
    val = (cmath.exp(1j * omega * (tau_i0 - tau_k0)) * cs.l_ik
           - cmath.exp(1j * omega * (tau_i0 + tau_k0)) * cs.m_ik)
    return 2 * lam * lam * val.real


def correlation_from_state(ps):
    """Monopole correlation read directly off the state (Schrodinger picture)."""
    return ps.expect(SIGMA_X2).real


def _half_integer_index(x, tol=1e-9):
    n = round(x - 0.5)
    return n if abs(x - 0.5 - n) <= tol else None


def spacelike_extract(C, lam, omega, t0):
    """Wightman estimate ``C / (4 lam^2)`` at a measurement time with
    ``omega t0 = (n + 1/2) pi``."""
    x = omega * t0 / math.pi
    if _half_integer_index(x) is None:
        n = max(0, math.floor(x))
        raise ProtocolError(
            f"omega*t0/pi = {x:.6g} is not a half-integer; nearest valid "
            f"t0 = {(n + 0.5) * math.pi / omega!r}")
    return C / (4 * lam * lam)


def timelike_extract(l_ii_measurements, delta_t, tol=1e-9):
    """Recover ``W(x1, x2)`` from correlation parts measured at several gaps.

    Parameters
    ----------
    l_ii_measurements : mapping
        gap -> value of ``lii_delta_correlation``.
    delta_t : float
        Proper time between the two interactions.
    """
    re = im = None
    for om, val in sorted(l_ii_measurements.items()):
        x = om * delta_t / math.pi
        n = round(x)
        if abs(x - n) <= tol and re is None:
            re = (-1) ** (n % 2) * complex(val).real
            continue
        h = _half_integer_index(x, tol)
        if h is not None and im is None:
            im = (-1) ** (h % 2) * complex(val).real
    if re is None or im is None:
        raise ProtocolError("need gaps with omega*dt = n pi and (n + 1/2) pi")
    return complex(re, im)


# ------------------------------------------ protocol-level measurement

def measure_wightman(model, state, x, xp, omega=1.0, lam=0.01, reg=None):
    """``W(x, x')`` as read off simulated pointlike detector data.

    Same worldline: two-gap timelike protocol. Equal chart time: spacelike
    protocol with interactions at proper time 0 and readout at
    ``t0 = pi / (2 omega)``. Otherwise ``L_ik`` from the pair state with
    its known phase unwound.
    """
    if x == xp:
        raise DomainError("coincident events")
    tau, taup = proper_time(model, x), proper_time(model, xp)
    if x.coords[1:] == xp.coords[1:]:
        early, late = (x, xp) if tau < taup else (xp, x)
        e1, e2 = interaction(model, 0, early), interaction(model, 0, late)
        dtau = e2.proper_time - e1.proper_time
        data = {}
        for om in (math.pi / dtau, 0.5 * math.pi / dtau):
            det = DetectorSpec(om, x.chart, x.coords[1:], lam)
            data[om] = lii_delta_correlation(det, e1, e2, model, state, reg)
        w = timelike_extract(data, dtau)
        return w if early is x else w.conjugate()
    det_i = DetectorSpec(omega, x.chart, x.coords[1:], lam)
    det_k = DetectorSpec(omega, xp.chart, xp.coords[1:], lam)
    if x.coords[0] == xp.coords[0]:
        ei = InteractionEvent(0, x, 0.0)
        ek = InteractionEvent(1, xp, 0.0)
        cs = CorrelatorSet(0j, 0j, lik_delta(det_i, det_k, ei, ek, model, state, reg),
                           mik_delta_equal_time(det_i, det_k, ei, ek, model, state, reg))
        t0 = 0.5 * math.pi / omega
        C = correlation_C(cs, t0, t0, omega, lam)
        return complex(spacelike_extract(C, lam, omega, t0))
    ei = InteractionEvent(0, x, tau)
    ek = InteractionEvent(1, xp, taup)
    cs = CorrelatorSet(0j, 0j, lik_delta(det_i, det_k, ei, ek, model, state, reg), 0j)
    # near-null pairs have huge L_ik; the w_power convention absorbs them
    ps = pair_state(cs, 0.0, 0.0, lam, warn=False)
    l_ik = ps.rho[GE, EG] / (lam * lam)
    return complex(cmath.exp(1j * omega * (tau - taup)) * l_ik)


def measure_smeared(model, x, xp, omega, sigma_s, spec=None):
    """Wightman estimate from Gaussian-smeared detectors centred at ``x, x'``.

    The phase of ``L_ik`` is unwound; equal-time pairs keep only the real
    part.
    """
    det_i = DetectorSpec(omega, x.chart, x.coords[1:], smearing=GaussianBall(sigma_s))
    det_k = DetectorSpec(omega, xp.chart, xp.coords[1:], smearing=GaussianBall(sigma_s))
    ei, ek = InteractionEvent(0, x, x.coords[0]), InteractionEvent(1, xp, xp.coords[0])
    l_ik = lik_smeared(det_i, det_k, [ei], [ek], model, spec)
    w = cmath.exp(1j * omega * (x.coords[0] - xp.coords[0])) * l_ik
    if x.coords[0] == xp.coords[0]:
        return complex(w.real, 0.0)
    return w
