"""Command-line entry point: ``retarded-qed <mode> [--config F | --preset P] [--out F]``.

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import MODES, ConfigError, GridSpec, Scenario, load
from .cqed import (JJArrayParams, PhysicalSetup, dispersion, nearest_commensurate_eta, phase_velocity,
                   to_system_params)
from .dde import integrate_pm
from .driven import (c_plus_steady_closed, c_plus_steady_literal, c_plus_steady_modes, c_plus_transient,
                     excitation_map, scattered_spectrum)
from .dynamics import (RatePole, c_pm_lambert, c_pm_reflection, critical_eta,
                       effective_rate, effective_rate_pm, effective_shift, effective_shift_pm, rate_jump,
                       shift_jump, zeroth_mode_rate)
from .params import TABLE_I_RATIO, DriveParams, InitialState, SystemParams
from .presets import PRESETS, preset
from .spectrum import FrequencyGrid, comb_spacing, resonance_peaks, waveguide_spectrum
from .tables import Table, render
from .validation import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

SWEEP_AXES = ("beta", "eta", "phi_p", "omega0_over_gamma", "detuning_d", "rabi", "theta", "n")
OBSERVABLES = ("fwhm", "rate_jump", "shift_jump", "critical_eta", "zeroth_mode_rate", "comb_spacing",
               "resonance", "steady_population")


class NumericFailure(RuntimeError):
    """A computation failed; the message carries the offending parameters."""


# -- helpers ---------------------------------------------------------------

def _grid(sc, name, default: GridSpec) -> np.ndarray:
    return sc.grids.get(name, default).values()


def _etas(sc, system):
    """Separations for multi-curve outputs, snapped to the parity option when given."""
    raw = sc.options.get("etas")
    if raw is None:
        return [system]
    parity = sc.options.get("parity")
    out = []
    for tok in str(raw).split(","):
        eta = float(tok)
        if parity is not None:
            eta, _ = nearest_commensurate_eta(eta, system.omega0_over_gamma, parity)
        out.append(SystemParams(system.beta, eta, omega0_over_gamma=system.omega0_over_gamma,
                                gamma=system.gamma))
    return out


def _method(sc, allowed):
    method = sc.options.get("method", allowed[0])
    if method not in allowed:
        raise ConfigError(f"option method must be one of {', '.join(allowed)}, got {method!r}")
    return method


def _time(sc):
    t = sc.options.get("t", "inf")
    return math.inf if str(t) == "inf" else float(t)


def _complex_cols(prefix):
    return [f"{prefix}_re", f"{prefix}_im"]


# -- modes -----------------------------------------------------------------

def run_dynamics(sc: Scenario) -> Table:
    p = sc.resolved_system()
    method = _method(sc, ("reflection", "lambert", "oracle"))
    t = _grid(sc, "time", GridSpec(0.0, 10.0, 1001))
    if method == "oracle":
        runs = [integrate_pm(p, sign, float(t[-1])) for sign in (+1, -1)]
        stride = max(1, (len(runs[0].times) - 1) // max(1, len(t) - 1))
        t = runs[0].times[::stride]
        cp, cm = runs[0].values[::stride], runs[1].values[::stride]
    else:
        solver = c_pm_reflection if method == "reflection" else c_pm_lambert
        cp, cm = solver(p, +1, t), solver(p, -1, t)
    c1 = sc.initial.k_plus * cp + sc.initial.k_minus * cm
    c2 = sc.initial.k_plus * cp - sc.initial.k_minus * cm
    cols = ["t"] + _complex_cols("c1") + _complex_cols("c2")
    cols += _complex_cols("c_plus") + _complex_cols("c_minus") + ["population"]
    table = Table(cols, metadata={"method": method})
    for k in range(len(t)):
        a, b, u, v = complex(c1[k]), complex(c2[k]), complex(cp[k]), complex(cm[k])
        table.add(float(t[k]), a.real, a.imag, b.real, b.imag, u.real, u.imag, v.real, v.imag,
                  abs(a) ** 2 + abs(b) ** 2)
    return table


def _maybe(fn, *args):
    try:
        return fn(*args)
    except RatePole:
        return None


def run_rates(sc: Scenario) -> Table:
    p = sc.resolved_system()
    if sc.options.get("table", "rates") == "ladder":
        return _ladder(sc, p)
    t = _grid(sc, "time", GridSpec(0.0, 10.0, 1001))
    meta = {
        "rate_jump_plus": rate_jump(p, +1), "rate_jump_minus": rate_jump(p, -1),
        "shift_jump_plus": shift_jump(p, +1), "shift_jump_minus": shift_jump(p, -1),
        "critical_eta": critical_eta(p.beta),
        "zeroth_mode_rate_plus": zeroth_mode_rate(p, +1), "zeroth_mode_rate_minus": zeroth_mode_rate(p, -1),
    }
    cols = ["t", "rate_atom1", "rate_atom2", "rate_plus", "rate_minus",
            "shift_atom1", "shift_atom2", "shift_plus", "shift_minus"]
    table = Table(cols, metadata={k: repr(float(v)) for k, v in meta.items()})
    for tk in t:
        tk = float(tk)
        table.add(tk, _maybe(effective_rate, p, sc.initial, tk, 1), _maybe(effective_rate, p, sc.initial, tk, 2),
                  _maybe(effective_rate_pm, p, +1, tk), _maybe(effective_rate_pm, p, -1, tk),
                  effective_shift(p, sc.initial, tk, 1), effective_shift(p, sc.initial, tk, 2),
                  effective_shift_pm(p, +1, tk), effective_shift_pm(p, -1, tk))
    return table


def _signs(initial):
    return [s for s, k in ((+1, initial.k_plus), (-1, initial.k_minus)) if abs(k) > 1e-15]


def _ladder(sc, p):
    branches = int(sc.options.get("branches", 3))
    parity = sc.options.get("parity")
    table = Table(["eta", "p", "sign", "n", "delta_omega_res", "gamma_res", "residual"])
    for target in _grid(sc, "eta", GridSpec(0.05, 10.0, 200)):
        eta, order = float(target), None
        if parity is not None:
            eta, order = nearest_commensurate_eta(eta, p.omega0_over_gamma, parity)
        q = p.with_(eta=eta, phi_p=None)
        for sign in _signs(sc.initial):
            for pk in resonance_peaks(q, sign, branches):
                table.add(eta, order, sign, pk.n, pk.delta_omega_res, pk.gamma_res, pk.residual)
    return table


def run_spectrum(sc: Scenario) -> Table:
    base = sc.resolved_system()
    t = _time(sc)
    method = _method(sc, ("closed", "lambert"))
    det = _grid(sc, "detuning", GridSpec(-10.0, 10.0, 4001))
    cols = ["eta", "detuning"] + _complex_cols("c_a") + _complex_cols("c_b") + ["density"]
    table = Table(cols, metadata={"t": repr(t), "method": method})
    for p in _etas(sc, base):
        grid = FrequencyGrid(det)
        if sc.options.get("refine") and p.eta > 0:
            peaks = [pk for s in _signs(sc.initial) for pk in resonance_peaks(p, s, 40)]
            grid = grid.refined([pk for pk in peaks if det[0] <= pk.delta_omega_res <= det[-1]])
        res = waveguide_spectrum(p, sc.initial, grid, t=t, method=method)
        table.metadata[f"fwhm[eta={p.eta!r}]"] = repr(res.fwhm)
        for k, d in enumerate(grid.detunings):
            a, b = complex(res.amplitude_right[k]), complex(res.amplitude_left[k])
            table.add(p.eta, float(d), a.real, a.imag, b.real, b.imag, float(res.density[k]))
    return table


def run_driven(sc: Scenario) -> Table:
    kind = sc.options.get("table", "steady")
    if kind == "map":
        return _map(sc)
    p = sc.resolved_system()
    if kind == "scattering":
        return _scattering(sc, p)
    if kind == "transient":
        t = _grid(sc, "time", GridSpec(0.0, 20.0, 401))
        vals = c_plus_transient(p, sc.drive, t)
        table = Table(["t"] + _complex_cols("c_plus") + ["population"],
                      metadata={"steady": repr(c_plus_steady_closed(p, sc.drive))})
        for tk, v in zip(t, np.atleast_1d(vals)):
            table.add(float(tk), v.real, v.imag, abs(v) ** 2)
        return table
    if kind != "steady":
        raise ConfigError(f"option table must be steady, transient, map or scattering, got {kind!r}")
    det = _grid(sc, "detuning", GridSpec(-5.0, 5.0, 1001))
    cols = ["detuning_d"] + _complex_cols("closed") + ["population"] + _complex_cols("modes")
    cols += _complex_cols("literal")
    table = Table(cols)
    worst_modes = worst_literal = 0.0
    for d in det:
        drive = DriveParams(sc.drive.rabi, float(d))
        closed = c_plus_steady_closed(p, drive)
        if p.eta > 0:
            modes = c_plus_steady_modes(p, drive)
            literal, _ = c_plus_steady_literal(p, drive)
            worst_modes = max(worst_modes, abs(modes - closed))
            worst_literal = max(worst_literal, abs(literal - closed))
            extra = (modes.real, modes.imag, literal.real, literal.imag)
        else:
            extra = (None,) * 4
        table.add(float(d), closed.real, closed.imag, abs(closed) ** 2, *extra)
    table.metadata["max_abs(modes-closed)"] = repr(worst_modes)
    table.metadata["max_abs(literal-closed)"] = repr(worst_literal)
    return table


def _map(sc):
    base = sc.resolved_system() if (sc.system or sc.physical) else SystemParams(0.95, 1.0)
    parity = sc.options.get("parity", "even")
    n_ridges = int(sc.options.get("ridges", 10))
    det = _grid(sc, "detuning", GridSpec(-3.0, 3.0, 601))
    m = excitation_map(base.beta, sc.drive.rabi, _grid(sc, "eta", GridSpec(0.05, 10.0, 100)), det,
                       parity, base.omega0_over_gamma, n_ridges)
    cols = ["eta", "p"] + [f"pop@{float(d)!r}" for d in det]
    cols += [f"ridge_n={n}" for n in range(-n_ridges, n_ridges + 1)]
    table = Table(cols, metadata={"parity": parity, "rabi": repr(sc.drive.rabi)})
    for eta, order, row, ridges in zip(m.etas, m.orders, m.population, m.ridges):
        rid = list(ridges) if len(ridges) == 2 * n_ridges + 1 else [None] * n_ridges + list(ridges) + [None] * n_ridges
        table.add(float(eta), int(order), *[float(v) for v in row], *rid)
    return table


def _scattering(sc, base):
    det = _grid(sc, "detuning", GridSpec(-5.0, 5.0, 2001))
    table = Table(["eta", "detuning"] + _complex_cols("amplitude") + ["density"])
    for p in _etas(sc, base):
        res = scattered_spectrum(p, sc.drive, FrequencyGrid(det))
        table.metadata[f"elastic_weight_rate[eta={p.eta!r}]"] = repr(float(res.singular[0].weight_rate))
        for k, d in enumerate(det):
            a = complex(res.amplitude_right[k])
            table.add(p.eta, float(d), a.real, a.imag, float(res.density[k]))
    return table


def run_dispersion(sc: Scenario) -> Table:
    setup = sc.physical
    if setup is None:
        raise ConfigError("dispersion needs a [physical] section with junction-array parameters")
    if setup.jj is None:
        raise ConfigError("dispersion needs the junction-array parameters l_j, c_j, c_g, a")
    jj = setup.jj
    ka = _grid(sc, "ka", GridSpec(math.pi / 1000, math.pi, 1000))
    p = to_system_params(setup)
    meta = {"phase_velocity_at_omega0": repr(phase_velocity(jj, setup.omega0)), "eta": repr(p.eta),
            "phi_p": repr(p.phi_p), "omega0_over_gamma": repr(p.omega0_over_gamma),
            "band_top": repr(jj.band_top)}
    table = Table(["ka", "omega", "frequency", "phase_velocity"], metadata=meta)
    for k in ka:
        w = dispersion(jj, float(k))
        table.add(float(k), w, w / (2 * math.pi), w * jj.a / float(k))
    return table


# -- sweeps ----------------------------------------------------------------

def _point_inputs(base, initial, drive, options, point):
    sys_kw = {"beta": base.beta, "eta": base.eta, "phi_p": base.phi_p,
              "omega0_over_gamma": base.omega0_over_gamma, "gamma": base.gamma}
    derived_phase = base.phi_p == base.eta * base.omega0_over_gamma
    for key in ("beta", "eta", "phi_p", "omega0_over_gamma"):
        if key in point:
            sys_kw[key] = point[key]
    parity = options.get("parity")
    if parity is not None:
        sys_kw["eta"], _ = nearest_commensurate_eta(sys_kw["eta"], sys_kw["omega0_over_gamma"], parity)
        sys_kw["phi_p"] = None
    elif derived_phase and "phi_p" not in point:
        sys_kw["phi_p"] = None
    p = SystemParams(**sys_kw)
    init = InitialState(point.get("theta", initial.theta), initial.phi_s)
    drv = DriveParams(point.get("rabi", drive.rabi), point.get("detuning_d", drive.detuning_d))
    return p, init, drv


def _observe(args):
    base, initial, drive, options, det, point = args
    p, init, drv = _point_inputs(base, initial, drive, options, point)
    name = options["observable"]
    try:
        if name == "fwhm":
            res = waveguide_spectrum(p, init, FrequencyGrid(det))
            return [("fwhm", res.fwhm)]
        if name == "rate_jump":
            return [("rate_jump", rate_jump(p, +1))]
        if name == "shift_jump":
            return [("shift_jump", shift_jump(p, +1))]
        if name == "critical_eta":
            return [("critical_eta", critical_eta(p.beta))]
        if name == "zeroth_mode_rate":
            return [("zeroth_mode_rate", zeroth_mode_rate(p, +1))]
        if name == "comb_spacing":
            return [("comb_spacing", comb_spacing(p))]
        if name == "steady_population":
            return [("steady_population", abs(c_plus_steady_closed(p, drv)) ** 2)]
        if name == "resonance":
            n = int(point.get("n", 0))
            pk = [x for x in resonance_peaks(p, +1, max(abs(n), 2)) if x.n == n][0]
            return [("delta_omega_res", pk.delta_omega_res), ("gamma_res", pk.gamma_res),
                    ("residual", pk.residual)]
    except (ArithmeticError, ValueError) as exc:
        raise NumericFailure(f"{type(exc).__name__} at {p!r} {point!r}: {exc}") from None
    raise NumericFailure(f"unknown observable {name!r}")


def run_sweep(sc: Scenario, jobs: int | None = None) -> Table:
    obs = sc.options.get("observable")
    if obs not in OBSERVABLES:
        raise ConfigError(f"sweep observable must be one of {', '.join(OBSERVABLES)}, got {obs!r}")
    if not 1 <= len(sc.axes) <= 2:
        raise ConfigError("a sweep needs one or two axes in [sweep]")
    for name, values in sc.axes:
        if name not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {name!r}; use {', '.join(SWEEP_AXES)}")
        if len(values) == 0:
            raise ConfigError(f"sweep axis {name!r} has no points")
    if "phi_p" in dict(sc.axes) and sc.options.get("parity"):
        raise ConfigError("sweep over phi_p conflicts with the parity option")
    base = sc.resolved_system() if (sc.system or sc.physical) else SystemParams(0.95, 1.0)
    names = [a[0] for a in sc.axes]
    points = [dict(zip(names, map(float, combo))) for combo in itertools.product(*(a[1] for a in sc.axes))]
    det = _grid(sc, "detuning", GridSpec(-10.0, 10.0, 4001))
    for pt in points:
        try:
            _point_inputs(base, sc.initial, sc.drive, sc.options, pt)
        except ValueError as exc:
            raise ConfigError(f"sweep point {pt!r}: {exc}") from None
    tasks = [(base, sc.initial, sc.drive, dict(sc.options), det, pt) for pt in points]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(tasks) < 4:
        results = [_observe(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_observe, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    table = Table(names + ["eta_used", "observable", "value"], metadata={"observable": obs})
    for pt, res in zip(points, results):
        p, _, _ = _point_inputs(base, sc.initial, sc.drive, sc.options, pt)
        for key, value in res:
            table.add(*[pt[n] for n in names], p.eta, key, value)
    return table


# -- entry point -----------------------------------------------------------

def default_scenario(mode: str) -> Scenario:
    sc = Scenario(mode=mode, source="<defaults>")
    if mode == "dispersion":
        jj = JJArrayParams(1e-9, 1e-15, 100e-15, 10e-6)
        sc.physical = PhysicalSetup(2 * math.pi * 5e9, 2 * math.pi * 10e6, 0.95, 0.016, jj)
    elif mode != "validate":
        eta, _ = nearest_commensurate_eta(1.0, TABLE_I_RATIO, "even")
        sc.system = SystemParams(0.95, eta)
    return sc


def _build_parser():
    ap = argparse.ArgumentParser(prog="retarded-qed", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", help="scenario file (INI)")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="named figure scenario")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
        sp.add_argument("--tolerance", type=float, default=None,
                        help="override every check tolerance (validate)")
    return ap


def _scenario(args) -> Scenario:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset")
    if args.preset:
        sc = preset(args.preset)
        if sc.mode != args.mode:
            raise ConfigError(f"preset {args.preset} is a {sc.mode} scenario, not {args.mode}")
        return sc
    if args.config:
        return load(args.config, mode=args.mode)
    return default_scenario(args.mode)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sc = _scenario(args)
        if args.mode == "validate":
            results = run_checks(args.tolerance)
            for r in results:
                print(r.line())
            table = Table(["check", "error", "tolerance", "passed"])
            for r in results:
                table.add(r.name, r.error, r.tolerance, r.passed)
            if args.out:
                _emit(render(table, args.format), args.out)
            return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION
        runner = {"dynamics": run_dynamics, "rates": run_rates, "spectrum": run_spectrum,
                  "driven": run_driven, "dispersion": run_dispersion}.get(args.mode)
        table = run_sweep(sc, args.jobs) if args.mode == "sweep" else runner(sc)
        meta = sc.metadata()
        meta.update(table.metadata)
        table.metadata = meta
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, ValueError) as exc:
        where = ""
        try:
            where = f" with {sc.resolved_system()!r}"
        except Exception:
            pass
        print(f"numeric failure{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        _emit(render(table, args.format), args.out)
    except BrokenPipeError:
        # reader closed stdout early (e.g. piped into head); not an error
        sys.stderr.close()
        return EXIT_OK
    except OSError as exc:
        print(f"config error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
