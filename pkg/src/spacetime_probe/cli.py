"""Command-line runner: config files, figure presets, CSV output, self-check.

Config files are flat ``key = value`` lines; ``#`` starts a comment and
list values are comma separated. Command-line flags override file values,
which override the preset.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
1 failed ``verify`` property.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import detectors as dt
from . import estimator as es
from . import fields as fl
from . import geometry as geo
from . import numerics as nm
from .errors import ConfigError, ProbeError

CSV_COLUMNS = ("model", "state", "channel", "L", "base", "mu", "nu",
               "re_g_est", "im_g_est", "g_exact", "abs_err", "flag")

DEFAULT_COORDS = {
    "minkowski": (0.0, 0.0, 0.0, 0.0),
    "rindler": (0.0, 1.0, 0.0, 0.0),
    "rw-hyperbolic": (0.0, 1.0, math.pi / 2, 0.0),
    "desitter": (1.0, 0.0, 0.0, 0.0),
    "dirichlet": (0.0, 0.0, 0.0, 1.0),
}

MODEL_PARAMS = {
    "minkowski": ("m",),
    "rindler": ("a",),
    "rw-hyperbolic": ("a", "mu"),
    "desitter": ("ell", "nu"),
    "dirichlet": (),
}

_E75 = math.exp(-7.5)

PRESETS = {
    "figure-2": dict(model="minkowski", m="1", state="vacuum",
                     sweep="0.5,0.2,0.1,0.05,0.02,0.01"),
    "figure-3": dict(model="rindler", a="1", state="vacuum", sweep="1,0.1",
                     scan_axis="1", scan_values="0.5,1,1.5,2,2.5,3"),
    "figure-4": dict(model="desitter", ell="1", nu="2.25", state="vacuum",
                     sweep=f"{_E75!r},{_E75 / 2!r}",
                     scan_axis="0", scan_values="1,2,3,4,5"),
    "figure-5": dict(model="dirichlet", state="vacuum", L="0.1",
                     scan_axis="3", scan_relative="true",
                     scan_values="0,1,2,3,4,5,6,7,8,9,10"),
    "figure-6": dict(model="minkowski", m="0", state="one-particle", sigma_k="1",
                     sweep="0.5,0.2,0.1,0.05,0.02,0.01"),
    "figure-7": dict(model="minkowski", m="1", state="vacuum",
                     channel="detector-protocol", omega="1", smearing="gaussian",
                     sigma_s="0.01", sweep="0.2,0.15,0.1,0.07,0.05,0.02"),
    "figure-8": dict(model="minkowski", m="1", state="vacuum",
                     channel="detector-protocol", omega="1", smearing="gaussian",
                     sigma_s="0.01",
                     sweep="0.1,0.08,0.06,0.05,0.04,0.03,0.02,0.015,0.01"),
    "rw-hyperbolic": dict(model="rw-hyperbolic", a="1", mu="1", state="vacuum",
                          sweep="0.5,0.2,0.1,0.05,0.02,0.01"),
}

KNOWN_KEYS = {
    "model", "state", "channel", "coords", "L", "sweep", "omega", "lambda",
    "smearing", "sigma_s", "epsilon_rel", "out", "central", "ordering",
    "scan_axis", "scan_values", "scan_relative", "sigma_k",
    "m", "a", "mu", "ell", "nu",
}


def fmt(v):
    """17 significant digits, locale independent."""
    return format(float(v), ".17g")


# ----------------------------------------------------------- config

def parse_config_text(text):
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        out[key] = val
    return out


def _float(d, key, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing {key}")
        return default
    try:
        v = float(d[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {d[key]!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def _floats(d, key):
    try:
        vals = [float(s) for s in d[key].split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers") from None
    if not vals:
        raise ConfigError(f"{key} is empty")
    return vals


def _bool(d, key):
    v = d.get(key, "false").lower()
    if v not in ("true", "false", "1", "0", "yes", "no"):
        raise ConfigError(f"{key} must be true or false")
    return v in ("true", "1", "yes")


@dataclass
class ExperimentConfig:
    """Validated experiment description; ``from_mapping`` does all checks."""

    model: object
    state: object
    channel: str
    bases: list
    L_values: list
    detector: object = None
    reg: object = field(default_factory=nm.Regulator)
    central: bool = False
    ordering: str = "earlier-first"
    out: str = "-"

    @classmethod
    def from_mapping(cls, d):
        name = d.get("model", "minkowski")
        if name not in fl.MODELS:
            raise ConfigError(f"unknown model {name!r}; choose from {sorted(fl.MODELS)}")
        params = {k: _float(d, k) for k in MODEL_PARAMS[name] if k in d}
        for k in ("m", "a", "mu", "ell", "nu"):
            if k in d and k not in MODEL_PARAMS[name]:
                raise ConfigError(f"parameter {k} does not apply to model {name}")
        try:
            model = fl.MODELS[name](**params)
        except ProbeError as exc:
            raise ConfigError(str(exc)) from None

        sname = d.get("state", "vacuum")
        if sname not in fl.STATES:
            raise ConfigError(f"unknown state {sname!r}")
        if sname == "one-particle":
            if not (name == "minkowski" and model.m == 0):
                raise ConfigError("one-particle state needs the massless Minkowski model")
            try:
                state = fl.OneParticleGaussian(_float(d, "sigma_k", 1.0))
            except ProbeError as exc:
                raise ConfigError(str(exc)) from None
        else:
            state = fl.Vacuum()

        channel = d.get("channel", "exact-field")
        if channel not in es.CHANNELS:
            raise ConfigError(f"unknown channel {channel!r}")
        ordering = d.get("ordering", "earlier-first")
        if ordering not in es.ORDERINGS:
            raise ConfigError(f"unknown ordering {ordering!r}")
        central = _bool(d, "central")

        if "sweep" in d and "L" in d:
            raise ConfigError("give either L or sweep, not both")
        if "sweep" in d:
            Ls = _floats(d, "sweep")
        else:
            Ls = [_float(d, "L", 0.1)]
        if any(not v > 0 for v in Ls):
            raise ConfigError("L values must be positive")
        if any(b >= a for a, b in zip(Ls, Ls[1:])):
            raise ConfigError("sweep values must be strictly decreasing")

        eps_rel = _float(d, "epsilon_rel", 1e-6)
        if not eps_rel > 0:
            raise ConfigError("epsilon_rel must be positive")

        detector = None
        smearing = d.get("smearing", "pointlike")
        if smearing.startswith("gaussian:"):
            smearing, d = "gaussian", dict(d, sigma_s=smearing.split(":", 1)[1])
        if smearing not in ("pointlike", "gaussian"):
            raise ConfigError(f"unknown smearing {smearing!r}")
        if channel == "detector-protocol":
            omega = _float(d, "omega", 1.0)
            lam = _float(d, "lambda", 0.01)
            try:
                smear = (dt.GaussianBall(_float(d, "sigma_s")) if smearing == "gaussian"
                         else dt.PointlikeDelta())
                detector = dt.DetectorSpec(omega, model.chart, (0.0, 0.0, 0.0), lam, smear)
            except ProbeError as exc:
                raise ConfigError(str(exc)) from None
            if smearing == "gaussian" and (name != "minkowski" or sname != "vacuum"):
                raise ConfigError("Gaussian smearing needs the Minkowski vacuum")
        elif smearing == "gaussian":
            raise ConfigError("smearing applies to the detector-protocol channel only")

        coords = (_floats(d, "coords") if "coords" in d else list(DEFAULT_COORDS[name]))
        bases = []
        if "scan_axis" in d or "scan_values" in d:
            axis = int(_float(d, "scan_axis"))
            if not 0 <= axis < len(coords):
                raise ConfigError(f"scan_axis {axis} out of range")
            rel = _bool(d, "scan_relative")
            if rel and len(Ls) != 1:
                raise ConfigError("scan_relative needs a single L")
            for v in _floats(d, "scan_values"):
                c = list(coords)
                c[axis] = v * Ls[0] if rel else v
                bases.append(c)
        else:
            bases.append(coords)

        events = []
        for c in bases:
            try:
                ev = geo.Event(model.chart, tuple(c))
                for L in Ls:
                    _check_stencil(ev, L, central)
            except ProbeError as exc:
                raise ConfigError(f"invalid coordinates {c}: {exc}") from None
            events.append(ev)
        return cls(model, state, channel, events, Ls, detector,
                   nm.Regulator(eps_rel), central, ordering, d.get("out", "-"))


def _check_stencil(ev, L, central):
    if central:
        lo = geo.Event(ev.chart, tuple(v - L / 2 for v in ev.coords))
        es.LatticeSpec(lo, L / 2, extent=3)
    else:
        es.LatticeSpec(ev, L, extent=2)


# ------------------------------------------------------------ runs

def _model_label(model):
    parts = [model.name] + [f"{k}={fmt(getattr(model, k))}" for k in MODEL_PARAMS[model.name]]
    return ";".join(parts)


def _state_label(state):
    if isinstance(state, fl.OneParticleGaussian):
        return f"one-particle;sigma_k={fmt(state.sigma_k)}"
    return state.name


def run(cfg):
    """Evaluate every (base, L) cell; return (csv rows, failures, orders)."""
    rows, failures, orders = [], [], []
    kw = dict(reg=cfg.reg, detector=cfg.detector, central=cfg.central,
              ordering=cfg.ordering)
    for base in cfg.bases:
        res = es.sweep(cfg.model, cfg.state, base, cfg.L_values, cfg.channel, **kw)
        orders.append((base, res.orders))
        blabel = ";".join(fmt(v) for v in base.coords)
        for r in res.rows:
            head = [_model_label(cfg.model), _state_label(cfg.state), cfg.channel,
                    fmt(r.L), blabel]
            if r.estimate is None:
                failures.append({"L": r.L, "base": list(base.coords), "error": r.error})
                rows.append(head + ["", "", "", "", "", "", "error"])
                continue
            e = r.estimate
            for mu, nu in product(range(base.dim), repeat=2):
                if e.divergent[mu, nu]:
                    rows.append(head + [mu, nu, "", "", fmt(e.exact[mu, nu]), "", "divergent"])
                else:
                    g = e.components[mu, nu]
                    rows.append(head + [mu, nu, fmt(g.real), fmt(g.imag),
                                        fmt(e.exact[mu, nu]), fmt(e.abs_err[mu, nu]), ""])
    return rows, failures, orders


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def _write_atomic(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".csv")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _error_record(code, kind, message, **extra):
    rec = {"status": "error", "exit_code": code, "kind": kind, "message": message}
    rec.update(extra)
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def _print_orders(orders, stream):
    for base, o in orders:
        D = o.shape[0]
        cells = []
        for mu, nu in product(range(D), repeat=2):
            v = o[mu, nu]
            txt = "n/a" if v is None else (v if isinstance(v, str) else f"{v:.3f}")
            cells.append(f"g{mu}{nu}={txt}")
        print("order at (" + ", ".join(fmt(c) for c in base.coords) + "): "
              + " ".join(cells), file=stream)


# ---------------------------------------------------------- verify

def _check(results, name, value, ok):
    results.append((name, value, bool(ok)))


def verify_checks(c4_scale=1.0):
    """Run the self-check suite; return ``[(name, measured, passed)]``.

    ``c4_scale`` perturbs the metric normalisation (mutation test hook).
    """
    res = []
    rng = np.random.default_rng(20240601)
    V = fl.Vacuum()

    # special functions against closed forms
    err = max(abs(nm.bessel_j1(1.0) - 0.44005058574493352),
              abs(nm.bessel_y1(1.0) + 0.78121282130028872)) / 0.78
    _check(res, "bessel J1/Y1 at 1", err, err < 1e-13)
    z = [0.3 + 0.2j, -2.5 + 0.1j, 0.95 - 0.4j, 5.0 + 3.0j]
    err = max(abs(nm.hyp2f1(1, 1, 2, v) + np.log(1 - v) / v) / abs(np.log(1 - v) / v) for v in z)
    _check(res, "hyp2f1(1,1;2;z) = -log(1-z)/z", err, err < 1e-10)
    err = max(abs(nm.hyp2f1(0.7, 1.3, 1.3, v) - (1 - v) ** -0.7) / abs((1 - v) ** -0.7) for v in z)
    _check(res, "hyp2f1(a,b;b;z) = (1-z)^-a", err, err < 1e-10)
    # leading two terms of the large-argument expansion
    zz = 400.0 + 0.0j
    asym = np.sqrt(2 / (np.pi * zz)) * np.exp(-1j * (zz - 0.75 * np.pi)) * (1 - 3j / (8 * zz))
    err = abs(nm.hankel2_1(zz) - asym) / abs(asym)
    _check(res, "hankel2_1 large-argument form", err, err < 1e-5)

    err = max(geo.coincidence_identity_check(k, 0.05) for k in (1, 2, 4))
    _check(res, "flat world-function coincidence limits", err, err < 1e-8)

    models = [
        (fl.MinkowskiInertial(1.0), geo.Event("inertial-minkowski", (0, 0, 0, 0)), 1),
        (fl.MinkowskiRindler(1.0), geo.Event("rindler", (0.2, 1.0, 0, 0)), 2),
        (fl.RWHyperbolicStatic(1.0, 1.0), geo.Event("rw-hyperbolic", (0, 1.0, 1.0, 0.5)), 1),
        (fl.DeSitterConformal(), geo.Event("desitter-conformal", (1.0, 0, 0, 0)), 1),
        (fl.HalfMinkowskiDirichlet(), geo.Event("half-minkowski", (0, 0, 0, 1.0)), 1),
    ]
    herm = 0.0
    for model, x, _ in models:
        d = rng.normal(scale=0.3, size=4)
        d[1:] = np.abs(d[1:]) if model.chart in ("rindler", "half-minkowski") else d[1:]
        xp = geo.Event(x.chart, tuple(np.add(x.coords, d)))
        w1, w2 = fl.wightman(model, V, x, xp), fl.wightman(model, V, xp, x)
        herm = max(herm, abs(w1 - w2.conjugate()) / abs(w1))
    _check(res, "W(x,x') = conj W(x',x)", herm, herm < 1e-10)

    c4 = es.c_D(4) * c4_scale
    for model, x, axis in models:
        h = fl.hadamard_check(model, x, axis, 1e-3) * (-1 / (8 * math.pi ** 2)) / c4
        _check(res, f"hadamard {model.name}", abs(h - 1), abs(h - 1) < 1e-2)

    worst = 0.0
    for _ in range(100):
        vals = rng.normal(size=4) + 1j * rng.normal(size=4)
        cs = dt.CorrelatorSet(abs(vals[0].real), abs(vals[1].real), vals[2], vals[3])
        t1, t2, om = rng.uniform(0, 3, size=3)
        ps = dt.pair_state(cs, t1, t2, 0.01, om)
        worst = max(worst, abs(dt.correlation_C(cs, t1, t2, om, 0.01)
                               - dt.correlation_from_state(ps)))
    _check(res, "correlation C two-path", worst, worst < 1e-12)

    mink = fl.MinkowskiInertial(1.0)
    x = geo.Event("inertial-minkowski", (0.1, 0.2, -0.3, 0.4))
    worst = 0.0
    for dx in ((0.7, 0, 0, 0), (0, 0.5, 0.2, 0), (0.3, 0.6, 0, 0.1)):
        xp = geo.Event(x.chart, tuple(np.add(x.coords, dx)))
        w = fl.wightman(mink, V, x, xp)
        worst = max(worst, abs(dt.measure_wightman(mink, V, x, xp) - w) / abs(w))
    _check(res, "protocol closure", worst, worst < 1e-12)

    for L in (0.1, 0.01):
        e = es.estimate_metric(fl.MinkowskiInertial(), V, x, L, prefactor_scale=c4_scale)
        err = float(e.abs_err.max())
        _check(res, f"massless Minkowski exact at L={L}", err, err < 1e-8)
    errs = [es.estimate_metric(mink, V, x, L, prefactor_scale=c4_scale).abs_err[0, 0]
            for L in (0.2, 0.1, 0.05, 0.025)]
    ok = all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] <= 1e-2
    _check(res, "massive Minkowski convergence", errs[-1], ok)
    a = es.estimate_metric(mink, V, x, 0.1, prefactor_scale=c4_scale)
    b = es.estimate_metric(mink, V, x, 0.1, "detector-protocol", prefactor_scale=c4_scale)
    diff = float(np.abs(a.components - b.components).max())
    _check(res, "channel equivalence", diff, diff < 1e-10)
    e = es.estimate_metric(fl.HalfMinkowskiDirichlet(), V,
                           geo.Event("half-minkowski", (0, 0, 0, 0.0)), 0.1)
    _check(res, "Dirichlet boundary flagged", int(e.divergent.sum()), e.divergent.any())

    if nm.KERNEL_BACKEND == "compiled":
        from . import _kernels, _kernels_py
        zs = [0.5 + 0.1j, 3.0 - 2.0j, 7.0 + 0.5j]
        d1 = max(abs(np.subtract(_kernels.bessel1_series(v)[:2],
                                 _kernels_py.bessel1_series(v)[:2])).max() for v in zs)
        _check(res, "compiled vs python kernels", d1, d1 < 1e-12)
    return res


def verify(c4_scale=1.0, stream=None):
    stream = stream or sys.stdout
    t = time.perf_counter()
    res = verify_checks(c4_scale)
    for name, val, ok in res:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {val:.3e}", file=stream)
    n_fail = sum(not ok for _, _, ok in res)
    print(f"{len(res) - n_fail}/{len(res)} passed in {time.perf_counter() - t:.1f} s "
          f"(kernels: {nm.KERNEL_BACKEND})", file=stream)
    return 0 if n_fail == 0 else 1


# ------------------------------------------------------------ main

def _build_parser():
    p = argparse.ArgumentParser(prog="spacetime-probe",
                                description="Metric recovery from detector correlations.")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run an experiment and write CSV")
    r.add_argument("config", nargs="?", help="key = value config file")
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--model")
    r.add_argument("--state")
    r.add_argument("--L", dest="L")
    r.add_argument("--sweep", help="comma-separated decreasing L values")
    r.add_argument("--channel")
    r.add_argument("--omega")
    r.add_argument("--lambda", dest="lambda_")
    r.add_argument("--smearing", help="pointlike, gaussian or gaussian:<sigma_s>")
    r.add_argument("--epsilon-rel", dest="epsilon_rel")
    r.add_argument("--out", help="CSV path, '-' for stdout")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")
    v = sub.add_parser("verify", help="run the self-check suite")
    v.add_argument("--c4-scale", type=float, default=1.0,
                   help="multiply the metric normalisation (mutation test hook)")
    sub.add_parser("presets", help="list figure presets")
    return p


def _merged_config(args):
    d = {}
    if args.preset:
        d.update(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                d.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    flags = {"model": args.model, "state": args.state, "L": args.L, "sweep": args.sweep,
             "channel": args.channel, "omega": args.omega, "lambda": args.lambda_,
             "smearing": args.smearing, "epsilon_rel": args.epsilon_rel, "out": args.out}
    for k, v in flags.items():
        if v is not None:
            if k == "L":
                d.pop("sweep", None)
            if k == "sweep":
                d.pop("L", None)
            d[k] = v
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {k!r}")
        d[k] = v
    return d


def main(argv=None):
    p = _build_parser()
    args = p.parse_args(argv)
    if args.command == "verify":
        return verify(args.c4_scale)
    if args.command == "presets":
        for name in sorted(PRESETS):
            print(name + ": " + ", ".join(f"{k}={v}" for k, v in PRESETS[name].items()))
        return 0
    if args.command != "run":
        p.print_help(sys.stderr)
        return 2
    try:
        cfg = ExperimentConfig.from_mapping(_merged_config(args))
    except ConfigError as exc:
        return _error_record(2, "config", str(exc))
    try:
        rows, failures, orders = run(cfg)
    except (ProbeError, ArithmeticError) as exc:
        return _error_record(3, "numerical", f"{type(exc).__name__}: {exc}")
    text = render_csv(rows)
    _write_atomic(cfg.out, text)
    _print_orders(orders, sys.stderr if cfg.out == "-" else sys.stdout)
    if failures:
        return _error_record(3, "numerical", "some rows failed", rows=failures)
    return 0


if __name__ == "__main__":
    sys.exit(main())
