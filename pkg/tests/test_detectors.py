import cmath
import math

import numpy as np
import pytest

from spacetime_probe import detectors as dt
from spacetime_probe import fields as fl
from spacetime_probe.errors import (ConsistencyError, DomainError, GeometryError,
                                    ProtocolError)
from spacetime_probe.geometry import Event
from spacetime_probe.numerics import Regulator

M = "inertial-minkowski"
INV4PI2 = 1 / (4 * math.pi ** 2)
MINK = fl.MinkowskiInertial()
V = fl.Vacuum()


def mk(*c, chart=M):
    return Event(chart, c)


def det(omega=1.0, pos=(0.0, 0.0, 0.0), chart=M, **kw):
    return dt.DetectorSpec(omega, chart, pos, **kw)


def ie(i, e, tau=None):
    return dt.InteractionEvent(i, e, e.coords[0] if tau is None else tau)


# ------------------------------------------------------------ types

def test_detector_spec_validation():
    with pytest.raises(DomainError):
        det(0.0)
    with pytest.raises(DomainError):
        dt.GaussianBall(0.0)
    d = det(pos=(1, 2, 3))
    assert d.on_worldline(mk(5, 1, 2, 3)) and not d.on_worldline(mk(5, 1, 2, 4))


def test_pair_state_validation():
    with pytest.raises(ConsistencyError):
        dt.PairState(np.eye(4, dtype=complex))
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[0, 1] = 1, 0.1
    with pytest.raises(ConsistencyError):
        dt.PairState(rho)


def test_proper_times():
    assert dt.proper_time(fl.MinkowskiRindler(2.0), Event("rindler", (0.5, 1.5, 0, 0))) == 1.5
    assert dt.proper_time(fl.RWHyperbolicStatic(3.0), Event("rw-hyperbolic", (0.5, 1, 0, 0))) == 1.5
    ds = fl.DeSitterConformal(2.0)
    assert dt.proper_time(ds, Event("desitter-conformal", (2 * math.e, 0, 0, 0))) == pytest.approx(2.0)
    assert dt.proper_time(MINK, mk(0.7, 0, 0, 0)) == 0.7


# ------------------------------------------------- timelike protocol

def test_lii_phase_pi():
    d = det(math.pi)
    v = dt.lii_delta_correlation(d, ie(0, mk(0, 0, 0, 0)), ie(0, mk(1, 0, 0, 0)), MINK, V)
    assert v.real == pytest.approx(INV4PI2, rel=1e-10)


def test_lii_phase_half_pi_picks_imaginary_part():
    d = det(math.pi / 2)
    v = dt.lii_delta_correlation(d, ie(0, mk(0, 0, 0, 0)), ie(0, mk(1, 0, 0, 0)), MINK, V)
    assert abs(v) < 1e-7


def test_lii_zero_gap_is_real_part():
    d = dt.DetectorSpec(1e-300, M, (0, 0, 0))
    e1, e2 = ie(0, mk(0, 0, 0, 0)), ie(0, mk(0.7, 0, 0, 0))
    w = fl.wightman(fl.MinkowskiInertial(1.0), V, e1.event, e2.event)
    v = dt.lii_delta_correlation(d, e1, e2, fl.MinkowskiInertial(1.0), V)
    assert v.real == pytest.approx(w.real, rel=1e-14)


def test_lii_geometry_checks():
    d = det()
    with pytest.raises(GeometryError):
        dt.lii_delta_correlation(d, ie(0, mk(0, 0, 0, 0)), ie(0, mk(1, 1, 0, 0)), MINK, V)
    with pytest.raises(GeometryError):
        dt.lii_delta_correlation(d, ie(0, mk(0, 0, 0, 0)), ie(0, mk(0, 0, 0, 0)), MINK, V)
    with pytest.raises(ProtocolError):
        dt.lii_delta_correlation(det(smearing=dt.GaussianBall(0.1)), ie(0, mk(0, 0, 0, 0)),
                                 ie(0, mk(1, 0, 0, 0)), MINK, V)


def test_timelike_extract_sign_bookkeeping():
    w = dt.timelike_extract({math.pi: -0.3, math.pi / 2: 0.2}, 1.0)
    assert w == complex(0.3, 0.2)
    assert dt.timelike_extract({math.pi: 0.0, math.pi / 2: 0.0}, 1.0) == 0
    with pytest.raises(ProtocolError):
        dt.timelike_extract({math.pi: 1.0}, 1.0)


def test_timelike_round_trip():
    e1, e2 = ie(0, mk(0, 0, 0, 0)), ie(0, mk(1, 0, 0, 0))
    data = {om: dt.lii_delta_correlation(det(om), e1, e2, MINK, V) for om in (math.pi, math.pi / 2)}
    w = dt.timelike_extract(data, 1.0)
    assert w.real == pytest.approx(-INV4PI2, rel=1e-10)
    assert abs(w.imag) < 1e-7


def test_timelike_round_trip_massive_complex_w():
    m = fl.MinkowskiInertial(1.0)
    e1, e2 = ie(0, mk(0.1, 0, 0, 0)), ie(0, mk(0.9, 0, 0, 0))
    dtau = 0.8
    data = {om: dt.lii_delta_correlation(det(om), e1, e2, m, V)
            for om in (3 * math.pi / dtau, 2.5 * math.pi / dtau)}
    w = fl.wightman(m, V, e1.event, e2.event)
    assert abs(dt.timelike_extract(data, dtau) - w) < 1e-12 * abs(w)


# ------------------------------------------------------- cross terms

def test_lik_phases():
    di, dk = det(pos=(0, 0, 0)), det(pos=(1, 0, 0))
    ei, ek = ie(0, mk(0, 0, 0, 0)), ie(1, mk(0, 1, 0, 0))
    w = fl.wightman(MINK, V, ei.event, ek.event)
    assert dt.lik_delta(di, dk, ei, ek, MINK, V) == w
    assert w.real == pytest.approx(INV4PI2, rel=1e-12)
    ei2 = ie(0, ei.event, math.pi / 2)
    assert abs(dt.lik_delta(di, dk, ei2, ek, MINK, V) - (-1j * w)) < 1e-15


def test_gap_mismatch_rejected():
    with pytest.raises(ProtocolError):
        dt.lik_delta(det(1.0), det(2.0), ie(0, mk(0, 0, 0, 0)), ie(1, mk(0, 1, 0, 0)), MINK, V)


def test_mik_phases_and_precondition():
    di, dk = det(pos=(0, 0, 0)), det(pos=(1, 0, 0))
    ei, ek = ie(0, mk(0, 0, 0, 0)), ie(1, mk(0, 1, 0, 0))
    w = fl.wightman(MINK, V, ei.event, ek.event)
    assert dt.mik_delta_equal_time(di, dk, ei, ek, MINK, V) == w
    ei2, ek2 = ie(0, ei.event, math.pi / 2), ie(1, ek.event, math.pi / 2)
    assert abs(dt.mik_delta_equal_time(di, dk, ei2, ek2, MINK, V) + w) < 1e-15
    with pytest.raises(ProtocolError):
        dt.mik_delta_equal_time(di, dk, ei, ie(1, mk(0.5, 1, 0, 0)), MINK, V)


def test_sin_sin_form():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = complex(*rng.normal(size=2))
        om, ti, tk = rng.uniform(0.1, 3, 3)
        cs = dt.CorrelatorSet(0, 0, w, w)
        c = dt.correlation_C(cs, ti, tk, om, 1.0)
        # Re(e^{i om (ti - tk)} - e^{i om (ti + tk)}) W  = 2 Re(e^{i om ti} sin(om tk) (-i)... )
        expected = 2 * (2 * math.sin(om * ti) * math.sin(om * tk) * w.real)
        expected_im = 2 * (-(math.cos(om * (ti - tk)) - math.cos(om * (ti + tk))) * 0
                           - (math.sin(om * (ti - tk)) - math.sin(om * (ti + tk))) * w.imag)
        assert c == pytest.approx(expected + expected_im, abs=1e-12)


def test_microcausality_surrogate():
    for model, chart in [(MINK, M), (fl.HalfMinkowskiDirichlet(), "half-minkowski")]:
        for eps in (1e-6, 1e-8):
            di, dk = det(chart=chart, pos=(0, 0, 0.5)), det(chart=chart, pos=(1, 0.3, 0.9))
            ei = ie(0, Event(chart, (0.0, 0, 0, 0.5)), 0.0)
            ek = ie(1, Event(chart, (0.2, 1, 0.3, 0.9)), 0.0)
            l = dt.lik_delta(di, dk, ei, ek, model, V, Regulator(eps))
            assert abs(l.imag) <= 10 * eps


# ---------------------------------------------------------- states

def test_pair_state_vacuum_and_placement():
    ps = dt.pair_state(dt.CorrelatorSet(0, 0, 0, 0), 0, 0, 0.01)
    target = np.zeros((4, 4))
    target[0, 0] = 1
    assert np.array_equal(ps.rho, target)
    c = 0.3 - 0.2j
    ps = dt.pair_state(dt.CorrelatorSet(0, 0, c, 0), 0, 0, 0.01)
    assert ps.rho[dt.GE, dt.EG] == pytest.approx(1e-4 * c)
    assert ps.rho[dt.EG, dt.GE] == pytest.approx(1e-4 * c.conjugate())


def test_pair_state_populations():
    ps = dt.pair_state(dt.CorrelatorSet(2.0, 3.0, 0, 0), 0, 0, 0.1)
    assert ps.rho[dt.EG, dt.EG] == pytest.approx(0.02)
    assert ps.rho[dt.GE, dt.GE] == pytest.approx(0.03)
    assert ps.rho[dt.GG, dt.GG] == pytest.approx(0.95)


def test_pair_state_warns_outside_perturbative_regime():
    with pytest.warns(RuntimeWarning):
        dt.pair_state(dt.CorrelatorSet(0, 0, 2000.0, 0), 0, 0, 0.01)


def test_pair_state_rejects_divergent_locals():
    with pytest.raises(ProtocolError):
        dt.pair_state(dt.CorrelatorSet(dt.DIVERGENT, 0, 0, 0), 0, 0, 0.01)


def _random_set(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return dt.CorrelatorSet(abs(v[0].real) + 0j, abs(v[1].real) + 0j, v[2], v[3])


def test_state_invariants_and_two_path_consistency():
    rng = np.random.default_rng(42)
    for _ in range(100):
        cs = _random_set(rng)
        ti, tk, om = rng.uniform(0, 5, 3)
        ps = dt.pair_state(cs, ti, tk, 0.01, om)
        assert np.max(np.abs(ps.rho - ps.rho.conj().T)) <= 1e-12
        assert abs(np.trace(ps.rho) - 1) <= 1e-12
        assert abs(dt.correlation_C(cs, ti, tk, om, 0.01) - dt.correlation_from_state(ps)) <= 1e-12


def test_correlation_C_examples():
    assert dt.correlation_C(dt.CorrelatorSet(0, 0, 0, 0), 1, 2, 1, 0.1) == 0
    w, lam, om = 0.07, 0.01, 1.3
    for t0 in (0.3, 1.1, math.pi / om):
        cs = dt.CorrelatorSet(0, 0, w, w)
        c = dt.correlation_C(cs, t0, t0, om, lam)
        assert c == pytest.approx(4 * lam ** 2 * math.sin(om * t0) ** 2 * w, abs=1e-18)


def test_spacelike_extract():
    lam, om = 0.01, 2.0
    t0 = 1.5 * math.pi / om
    assert dt.spacelike_extract(4 * lam ** 2 * 0.3, lam, om, t0) == pytest.approx(0.3)
    assert dt.spacelike_extract(0.0, lam, om, t0) == 0.0
    with pytest.raises(ProtocolError, match="nearest valid t0"):
        dt.spacelike_extract(1.0, lam, om, 1.0)


def test_spacelike_round_trip():
    lam, om = 0.01, 1.0
    di, dk = det(om), det(om, pos=(1, 0, 0))
    ei, ek = ie(0, mk(0, 0, 0, 0), 0.0), ie(1, mk(0, 1, 0, 0), 0.0)
    w = fl.wightman(MINK, V, ei.event, ek.event)
    cs = dt.CorrelatorSet(0, 0, dt.lik_delta(di, dk, ei, ek, MINK, V),
                          dt.mik_delta_equal_time(di, dk, ei, ek, MINK, V))
    t0 = 0.5 * math.pi / om
    got = dt.spacelike_extract(dt.correlation_C(cs, t0, t0, om, lam), lam, om, t0)
    assert abs(got - w.real) <= 1e-12 * abs(w)


@pytest.mark.parametrize("model, chart, x, xp", [
    (fl.MinkowskiInertial(1.0), M, (0.1, 0.2, 0, 0), (0.9, 0.2, 0, 0)),
    (fl.MinkowskiInertial(1.0), M, (0.1, 0.2, 0, 0), (0.1, 0.9, 0.3, 0)),
    (fl.MinkowskiInertial(1.0), M, (0.1, 0.2, 0, 0), (0.6, 0.9, 0.3, 0)),
    (fl.MinkowskiRindler(1.0), "rindler", (0.1, 1.0, 0, 0), (0.3, 1.0, 0, 0)),
    (fl.MinkowskiRindler(1.0), "rindler", (0.1, 1.0, 0, 0), (0.3, 1.2, 0, 0)),
    (fl.DeSitterConformal(), "desitter-conformal", (1.0, 0, 0, 0), (1.0, 0.2, 0, 0)),
    (fl.DeSitterConformal(), "desitter-conformal", (1.2, 0, 0, 0), (1.0, 0, 0, 0)),
    (fl.RWHyperbolicStatic(), "rw-hyperbolic", (0.0, 1.0, 1.0, 0), (0.3, 1.1, 1.0, 0)),
])
def test_measure_wightman_closure(model, chart, x, xp):
    a, b = Event(chart, x), Event(chart, xp)
    w = fl.wightman(model, V, a, b)
    assert abs(dt.measure_wightman(model, V, a, b) - w) <= 1e-12 * abs(w)


def test_measure_wightman_coincident():
    with pytest.raises(DomainError):
        dt.measure_wightman(MINK, V, mk(0, 0, 0, 0), mk(0, 0, 0, 0))


# --------------------------------------------------------- smearing

def _smeared_vs_delta(sig, m=1.0):
    model = fl.MinkowskiInertial(m)
    di = det(1.0, smearing=dt.GaussianBall(sig))
    dk = det(1.0, pos=(1, 0, 0), smearing=dt.GaussianBall(sig))
    ei, ek = ie(0, mk(0, 0, 0, 0)), ie(1, mk(0, 1, 0, 0))
    ls = dt.lik_smeared(di, dk, [ei], [ek], model)
    ld = dt.lik_delta(det(1.0), det(1.0, pos=(1, 0, 0)), ei, ek, model, V)
    return abs(ls - ld) / abs(ld)


def test_pointlike_limit_monotone():
    errs = [_smeared_vs_delta(s) for s in (1e-1, 1e-2, 1e-3)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_smeared_self_term_real_positive():
    d = det(1.0, smearing=dt.GaussianBall(0.05))
    e = ie(0, mk(0, 0, 0, 0))
    v = dt.lik_smeared(d, d, [e], [e], fl.MinkowskiInertial(1.0))
    assert v.real > 0 and abs(v.imag) < 1e-15 * v.real
    assert dt.local_probability(d, e, fl.MinkowskiInertial(1.0)) == pytest.approx(v.real)
    assert dt.local_probability(det(), e) is dt.DIVERGENT


def test_smeared_vs_dense_grid():
    sig, om, m = 0.01, 1.0, 1.0
    r = 7 * sig
    di = det(om, smearing=dt.GaussianBall(sig))
    dk = det(om, pos=(r, 0, 0), smearing=dt.GaussianBall(sig))
    val = dt.lik_smeared(di, dk, [ie(0, mk(0, 0, 0, 0))], [ie(1, mk(0, r, 0, 0))],
                         fl.MinkowskiInertial(m))
    n = 400000
    k = np.linspace(0, 8.5 / sig, n + 1)
    w = np.sqrt(k * k + m * m)
    f = np.exp(-sig ** 2 * (k * k + (w + om) ** 2)) * k * k / (2 * w) * np.sinc(k * r / np.pi)
    wt = np.ones(n + 1)
    wt[1:-1:2], wt[2:-1:2] = 4, 2
    oracle = (k[1] / 3) * np.dot(wt, f) / (2 * math.pi ** 2)
    assert abs(val - oracle) <= 1e-8


def test_smeared_needs_minkowski_and_gaussian():
    g = det(smearing=dt.GaussianBall(0.1))
    e = ie(0, mk(0, 0, 0, 0))
    with pytest.raises(ProtocolError):
        dt.lik_smeared(det(), g, [e], [e], MINK)
    r = Event("rindler", (0, 1, 0, 0))
    with pytest.raises(DomainError):
        dt.lik_smeared(g, g, [ie(0, r)], [ie(0, r)], fl.MinkowskiRindler())


def test_measure_smeared_equal_time_is_real():
    w = dt.measure_smeared(fl.MinkowskiInertial(1.0), mk(0, 0, 0, 0), mk(0, 0.1, 0, 0), 1.0, 0.01)
    assert w.imag == 0 and w.real > 0
