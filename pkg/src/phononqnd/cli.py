"""Command-line front end.

    phononqnd steady-state --epsilon 1.2 --lambda11 0.5 --delta-omega -1
    phononqnd gamma-ratio --variant 1.2:0 --variant 1.2:0.5
    phononqnd oracle correlator --lambda11 0.01 --epsilon 0.8 --compare
    phononqnd sde --trajectories 2000 --seed 3

Parameters are in units of kappa.  ``--si --kappa K`` rescales rate-like
output columns by K (rad/s) and times by 1/K.  Exit status is 0 on success,
1 for bad parameters or failed validation, and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, SweepSpec, apply_overrides, load_config
from .effective import THETA_CONVENTIONS, coefficients_for, gamma_ratio_sweep, qnd_figure_of_merit
from .fluctuations import CHANNELS, ORDERS, build_model, operator_correlators
from .fock import (
    ConvergenceError,
    IntegrationError,
    TruncationError,
    ancilla_steady_state,
    destroy,
    fit_decay_rate,
    joint_evolution,
    recommended_dim,
    regression_correlator,
)
from .measurement import distinguishability_time, signal_gain
from .params import ModelParams
from .positivep import run_ensemble
from .steady_state import solve_steady_state
from .validation import run_all

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2

# power of a rate carried by each output column, used by --si
UNIT_POWER = {
    "delta_omega": 1, "lambda11": 1, "epsilon": 1, "kappa": 1, "lambda01": 1, "lambda00": 1,
    "omega0": 1, "nu": 1, "damping_thermal": 1, "damping_measurement": 1,
    "Lambda1_sq": 2, "Lambda_sq": 2, "delta": 1, "theta": 1, "theta_re": 1, "theta_im": 1,
    "gamma": 1, "gamma0": 1, "tau": -1, "t": -1, "localization_time": -1, "dwell_time": -1,
    "gain": 0.5, "gain_fixed_quadrature": 0.5, "background": 0.5, "background_fixed_quadrature": 0.5,
    "quadrature": 0.5,
}

_PARAM_FLAGS = {
    "delta_omega": "detuning omega_1 - omega_d",
    "lambda11": "ancilla self-Kerr coefficient",
    "epsilon": "drive strength",
    "damping_thermal": "damping into the thermal bath",
    "damping_measurement": "damping into the measurement bath",
    "N_bar1": "thermal-bath occupation",
    "N_m": "measurement-bath occupation",
    "N1": "set both bath occupations",
    "lambda01": "system-ancilla coupling",
    "omega0": "system frequency",
    "lambda00": "system self-Kerr coefficient",
    "nu": "system damping rate",
    "N0": "system bath occupation",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % float(x)
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float("%.12g" % float(x)) if math.isfinite(x) else None
    return x


def _split_complex(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[f"{k}_re"] = float(v.real)
            out[f"{k}_im"] = float(v.imag)
        else:
            out[k] = v
    return out


def _to_si(rows: list[dict], kappa: float) -> list[dict]:
    out = []
    for row in rows:
        new = {}
        for k, v in row.items():
            base = k[:-3] if k.endswith(("_re", "_im")) and k[:-3] in UNIT_POWER else k
            power = UNIT_POWER.get(base)
            if power is not None and isinstance(v, (float, int, np.floating)) and not isinstance(v, bool):
                v = float(v) * kappa**power
            new[k] = v
        out.append(new)
    return out


def _header(cfg: RunConfig, command: str, extra: list[str]) -> list[str]:
    m = cfg.model
    lines = [f"phononqnd {__version__} {command}"]
    for name, obj in (("system", m.system), ("ancilla", m.ancilla), ("coupling", m.coupling)):
        lines.append(f"{name}: " + " ".join(f"{k}={_fmt(v)}" for k, v in asdict(obj).items()))
    lines.append(f"derived: kappa={_fmt(m.ancilla.kappa)} N1={_fmt(m.ancilla.N1)}")
    if cfg.sweeps:
        lines.append("sweep: " + ", ".join(f"{s.variable}:{_fmt(s.start)}:{_fmt(s.stop)}:{s.points}:{s.spacing}" for s in cfg.sweeps))
    lines.append("units: " + (f"SI (kappa = {_fmt(cfg.kappa_si)} rad/s)" if cfg.kappa_si else "kappa"))
    return lines + extra


def render(rows: list[dict], cfg: RunConfig, command: str, extra: list[str] | None = None) -> str:
    rows = [_split_complex(r) for r in rows]
    if cfg.kappa_si:
        rows = _to_si(rows, cfg.kappa_si)
    columns: list[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    if cfg.format == "json":
        data = [{k: _json_value(r.get(k)) for k in columns} for r in rows]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    for line in _header(cfg, command, extra or []):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[k]) if k in r else "" for k in columns])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- point evaluators


def _steady_rows(model: ModelParams, args) -> list[dict]:
    sol = solve_steady_state(model.ancilla)
    return [
        {
            "branch": i,
            "n0": b.n0,
            "beta0": b.beta0,
            "Lambda1_sq": b.Lambda1_sq,
            "Lambda_sq": b.Lambda_sq,
            "stable": b.stable,
            "multiplicity": b.multiplicity,
            "operating": i == sol.operating,
        }
        for i, b in enumerate(sol.branches)
    ]


def _coefficient_rows(model: ModelParams, args) -> list[dict]:
    co = coefficients_for(model.ancilla, model.coupling, model.system.lambda00, args.branch, args.theta_convention)
    row = {
        "delta": co.delta,
        "theta": co.theta,
        "gamma": co.gamma,
        "gamma0": co.gamma0,
        "ratio": co.ratio,
    }
    if model.system.nu > 0:
        rep = qnd_figure_of_merit(co, model.system)
        row["gamma_over_nu"] = rep.gamma_over_nu
        row["resolvable"] = rep.verdict
    return [row]


def _signal_rows(model: ModelParams, args) -> list[dict]:
    p, c = model.ancilla, model.coupling
    br = solve_steady_state(p).branch(args.branch)
    s = signal_gain(br, p, c)
    row = {
        "background": s.background,
        "gain": s.gain,
        "background_fixed_quadrature": s.background_fixed_quadrature,
        "gain_fixed_quadrature": s.gain_fixed_quadrature,
        "sqrt_gamma_factor": s.sqrt_gamma_factor,
        "gamma": s.gamma,
        "gain_check_residual": s.gain - s.sqrt_gamma_factor * math.sqrt(s.gamma) * (1 if c.lambda01 >= 0 else -1),
    }
    if s.gamma > 0 and model.system.nu > 0:
        d = distinguishability_time(s, model.system)
        row.update(localization_time=d.localization_time, dwell_time=d.dwell_time, gamma_over_nu=d.gamma_over_nu)
    return [row]


_POINT_COMMANDS = {
    "steady-state": _steady_rows,
    "coefficients": _coefficient_rows,
    "signal": _signal_rows,
}


def _evaluate_point(job):
    command, model, overrides, args = job
    rows = _POINT_COMMANDS[command](apply_overrides(model, overrides), args)
    return [{**overrides, **r} for r in rows]


def _sweep_points(sweeps: tuple[SweepSpec, ...]) -> list[dict]:
    if not sweeps:
        return [{}]
    grids = [s.grid() for s in sweeps]
    return [{s.variable: float(v) for s, v in zip(sweeps, combo)} for combo in itertools.product(*grids)]


def _run_point_command(cfg: RunConfig, args) -> list[dict]:
    jobs = [(args.command, cfg.model, pt, _picklable(args)) for pt in _sweep_points(cfg.sweeps)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(_evaluate_point, jobs))
    else:
        chunks = [_evaluate_point(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def _picklable(args) -> argparse.Namespace:
    return argparse.Namespace(**{k: v for k, v in vars(args).items() if k != "func"})


# ---------------------------------------------------------------- commands


def _no_sweep(cfg: RunConfig, command: str) -> None:
    if cfg.sweeps:
        raise ConfigError(f"{command} does not take sweeps")


def cmd_point(cfg: RunConfig, args) -> str:
    return render(_run_point_command(cfg, args), cfg, args.command)


def cmd_correlators(cfg: RunConfig, args) -> str:
    _no_sweep(cfg, "correlators")
    p = cfg.model.ancilla
    br = solve_steady_state(p).branch(args.branch)
    model = build_model(br, p)
    taus = np.linspace(0.0, args.tau_max, args.points)
    orders = ORDERS if args.order == "both" else (args.order,)
    rows = []
    for order in orders:
        ch = operator_correlators(model, taus, order)
        for i, t in enumerate(taus):
            rows.append({"order": order, "tau": t, **{k: complex(ch[k][i]) for k in CHANNELS}})
    return render(rows, cfg, "correlators")


def _variants(args, cfg: RunConfig) -> list[tuple[float, float]]:
    if not args.variant:
        return [(cfg.model.ancilla.epsilon, cfg.model.ancilla.lambda11)]
    out = []
    for text in args.variant:
        try:
            eps, lam = (float(x) for x in text.split(":"))
        except ValueError:
            raise ConfigError(f"variant {text!r} must look like epsilon:lambda11") from None
        out.append((eps, lam))
    return out


def _ratio_rows(cfg: RunConfig, args, variants) -> list[dict]:
    grid = np.linspace(args.dw_min, args.dw_max, args.points)
    return [asdict(r) for r in gamma_ratio_sweep(cfg.model.ancilla, grid, variants, cfg.branch)]


def cmd_gamma_ratio(cfg: RunConfig, args) -> str:
    _no_sweep(cfg, "gamma-ratio")
    return render(_ratio_rows(cfg, args, _variants(args, cfg)), cfg, "gamma-ratio")


FIG2_VARIANTS = ((1.2, 0.0), (0.6, 0.3), (0.9, 0.3), (1.2, 0.3))


def emit_fig2_data(cfg: RunConfig, args) -> list[str]:
    """One CSV per (epsilon, lambda11) variant of the Gamma/Gamma0 detuning curve."""
    variants = _variants(args, cfg) if args.variant else list(FIG2_VARIANTS)
    os.makedirs(args.outdir, exist_ok=True)
    paths = []
    for eps, lam in variants:
        rows = _ratio_rows(cfg, args, [(eps, lam)])
        sub = replace(cfg, model=apply_overrides(cfg.model, {"epsilon": eps, "lambda11": lam}))
        path = os.path.join(args.outdir, f"gamma_ratio_eps{_fmt(eps)}_lam{_fmt(lam)}.{cfg.format}")
        _emit(render(rows, sub, "fig2"), path)
        paths.append(path)
    return paths


def cmd_fig2(cfg: RunConfig, args) -> str:
    _no_sweep(cfg, "fig2")
    return "".join(f"{p}\n" for p in emit_fig2_data(cfg, args))


def _oracle_state(cfg: RunConfig, args):
    p = cfg.model.ancilla
    kw = {}
    if cfg.tail_tol is not None:
        kw["tail_tol"] = cfg.tail_tol
    return ancilla_steady_state(p, dim=args.dim, tol=cfg.tol or 1e-9, **kw)


def _compare_row(name, analytic, oracle) -> dict:
    err = abs(oracle - analytic) / abs(analytic) if analytic != 0 else abs(oracle - analytic)
    return {"quantity": name, "analytic": analytic, "oracle": oracle, "rel_error": err}


def cmd_oracle(cfg: RunConfig, args) -> str:
    _no_sweep(cfg, "oracle")
    p = cfg.model.ancilla
    if args.target == "steady-state":
        ss, gen, cert = _oracle_state(cfg, args)
        mb = complex(ss.expect(destroy(gen.dim)))
        nb = float(ss.expect(destroy(gen.dim).conj().T @ destroy(gen.dim)).real)
        extra = [f"dim={gen.dim} residual={_fmt(cert.residual)} time={_fmt(cert.time)} trace_error={_fmt(cert.trace_error)}"]
        if args.compare:
            br = solve_steady_state(p).branch(args.branch)
            model = build_model(br, p)
            rows = [
                _compare_row("mean_b_re", br.beta0.real, mb.real),
                _compare_row("mean_b_im", br.beta0.imag, mb.imag),
                _compare_row("mean_number", br.n0 + model.one_time[0, 1].real, nb),
            ]
        else:
            rows = [{"n": k, "population": float(ss.entries[k, k].real)} for k in range(gen.dim)]
        return render(rows, cfg, "oracle steady-state", extra)

    if args.target == "correlator":
        ss, gen, cert = _oracle_state(cfg, args)
        taus = np.linspace(0.0, args.tau_max, args.points)
        orders = ORDERS if args.order == "both" else (args.order,)
        channels = CHANNELS if args.channel == "all" else (args.channel,)
        rows = []
        model = build_model(solve_steady_state(p).branch(args.branch), p) if args.compare else None
        for order in orders:
            lin = operator_correlators(model, taus, order) if model else None
            for ch in channels:
                vals = regression_correlator(ss, gen, ch, taus, order, tol=cfg.tol or 1e-10)
                for i, t in enumerate(taus):
                    row = {"order": order, "channel": ch, "tau": t, "oracle": complex(vals[i])}
                    if lin is not None:
                        row["analytic"] = complex(lin[ch][i])
                        row["abs_error"] = abs(vals[i] - lin[ch][i])
                    rows.append(row)
        return render(rows, cfg, "oracle correlator", [f"dim={gen.dim}"])

    # joint
    model = cfg.model
    br = solve_steady_state(p).branch(args.branch)
    co = coefficients_for(p, model.coupling, model.system.lambda00, args.branch)
    anc_dim = args.anc_dim or min(recommended_dim(br.n0, p.N1), 30)
    t_final = args.t_final if args.t_final is not None else min(4.0 / co.gamma, 1e4) if co.gamma > 0 else 50.0
    times = np.linspace(0.0, t_final, args.points)
    rho0 = None
    if args.fock is not None:
        rho0 = np.zeros((args.sys_dim, args.sys_dim), dtype=complex)
        rho0[args.fock, args.fock] = 1.0
    phase = signal_gain(br, p, model.coupling).quadrature_phase if p.mu > 0 else 1.0
    js = joint_evolution(args.sys_dim, anc_dim, model, t_final, times=times, rho_sys0=rho0,
                         quadrature_phase=phase, method=args.method, tol=cfg.tol or 1e-10)
    extra = [f"sys_dim={args.sys_dim} anc_dim={anc_dim} method={args.method}"]
    if args.compare:
        t_stop = min(10.0 / co.gamma, t_final) if co.gamma > 0 else t_final
        rate = fit_decay_rate(js.times, js.rho_sys[:, 0, 1], 3.0 / p.kappa, t_stop)
        drift = float(np.abs(js.populations - js.populations[0]).max())
        rows = [_compare_row("gamma", co.gamma, rate), {"quantity": "population_drift", "analytic": 0.0, "oracle": drift, "rel_error": drift}]
        return render(rows, cfg, "oracle joint", extra)
    rows = []
    for i, t in enumerate(js.times):
        row = {"t": t, "n_sys": js.n_sys[i], "coherence_01": js.coherence[i, 0, 1], "quadrature": math.sqrt(2 * p.mu) * js.quadrature[i], "trace": js.trace[i]}
        row.update({f"pop_{k}": js.populations[i, k] for k in range(args.sys_dim)})
        rows.append(row)
    return render(rows, cfg, "oracle joint", extra)


def cmd_sde(cfg: RunConfig, args) -> str:
    _no_sweep(cfg, "sde")
    p = cfg.model.ancilla
    st = run_ensemble(
        p, n_traj=args.trajectories, dt=args.dt, t_final=args.t_final, seed=cfg.seed,
        transient=args.transient, dump_trajectories=args.dump_trajectories if args.dump else 0,
        dump_stride=args.dump_stride,
    )
    br = solve_steady_state(p).branch(args.branch)
    C0 = build_model(br, p).one_time
    rows = [
        {"quantity": "mean_beta", "estimate": st.mean_beta, "std_error": st.se_beta, "linearized": br.beta0},
        {"quantity": "mean_alpha", "estimate": st.mean_alpha, "std_error": st.se_alpha, "linearized": br.alpha0},
        {"quantity": "cov_beta_beta", "estimate": st.cov_bb, "std_error": st.se_bb, "linearized": complex(C0[0, 0])},
        {"quantity": "cov_beta_alpha", "estimate": st.cov_ba, "std_error": st.se_ba, "linearized": complex(C0[0, 1])},
        {"quantity": "cov_alpha_alpha", "estimate": st.cov_aa, "std_error": st.se_aa, "linearized": complex(C0[1, 1])},
    ]
    extra = [f"trajectories={st.n_traj} diverged={st.divergence_count} batches={st.n_batches} seed={cfg.seed}"]
    if args.dump:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["traj", "t", "re_beta", "im_beta", "re_alpha", "im_alpha"])
        for r in st.samples:
            w.writerow([str(int(r[0]))] + [_fmt(x) for x in r[1:]])
        _emit(buf.getvalue(), args.dump)
    return render(rows, cfg, "sde", extra)


def cmd_validate(cfg: RunConfig, args) -> str:
    results = run_all(cfg.seed)
    rows = [{"check": r.name, "status": "PASS" if r.passed else "FAIL", "error": r.error, "tolerance": r.tolerance} for r in results]
    args._failed = not all(r.passed for r in results)
    return render(rows, cfg, "validate")


# ---------------------------------------------------------------- parser


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("parameters (kappa units)")
    for name, text in _PARAM_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=float, default=None, help=text)
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--sweep", action="append", default=[], metavar="VAR:START:STOP:POINTS[:SPACING]")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None, help="integrator tolerance override")
    parser.add_argument("--tail-tol", type=float, default=None, help="Fock tail tolerance override")
    parser.add_argument("--branch", default=None, help="operating, lowest, highest or an index")
    parser.add_argument("--si", action="store_true", help="SI output; needs --kappa")
    parser.add_argument("--kappa", type=float, default=None, help="kappa in rad/s for --si")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")


def _ratio_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dw-min", type=float, default=-3.0)
    p.add_argument("--dw-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=601)
    p.add_argument("--variant", action="append", default=[], metavar="EPSILON:LAMBDA11")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phononqnd", description="Phonon-number QND measurement with a Kerr ancilla.")
    parser.add_argument("--version", action="version", version=f"phononqnd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("steady-state", help="mean-field branches and their stability")
    _common(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("coefficients", help="Delta, Theta, Gamma of the reduced master equation")
    _common(p)
    p.add_argument("--theta-convention", choices=THETA_CONVENTIONS, default="derived")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("signal", help="readout gain, background and time scales")
    _common(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("correlators", help="linearized two-time operator correlators")
    _common(p)
    p.add_argument("--tau-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--order", choices=ORDERS + ("both",), default="both")
    p.set_defaults(func=cmd_correlators)

    p = sub.add_parser("gamma-ratio", help="Gamma/Gamma0 against detuning")
    _common(p)
    _ratio_flags(p)
    p.set_defaults(func=cmd_gamma_ratio)

    p = sub.add_parser("fig2", help="write one Gamma/Gamma0 file per (epsilon, lambda11) variant")
    _common(p)
    _ratio_flags(p)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("oracle", help="truncated Fock-space Lindblad oracle")
    p.add_argument("target", choices=("steady-state", "correlator", "joint"))
    _common(p)
    p.add_argument("--compare", action="store_true", help="print analytic and oracle values side by side")
    p.add_argument("--dim", type=int, default=None, help="ancilla truncation (default: automatic)")
    p.add_argument("--tau-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--order", choices=ORDERS + ("both",), default="later_left")
    p.add_argument("--channel", choices=CHANNELS + ("n_n", "all"), default="all")
    p.add_argument("--sys-dim", type=int, default=4)
    p.add_argument("--anc-dim", type=int, default=None)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--fock", type=int, default=None, help="start the system in this Fock state")
    p.add_argument("--method", choices=("auto", "full", "sectors"), default="auto")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sde", help="positive-P Monte Carlo ensemble")
    _common(p)
    p.add_argument("--trajectories", type=int, default=10_000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--transient", type=float, default=None)
    p.add_argument("--dump", default=None, help="per-trajectory sample CSV")
    p.add_argument("--dump-trajectories", type=int, default=10)
    p.add_argument("--dump-stride", type=int, default=100)
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("validate", help="run the cross-oracle checks")
    _common(p)
    p.set_defaults(func=cmd_validate)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {k: getattr(args, k) for k in _PARAM_FLAGS if getattr(args, k) is not None}
    model = apply_overrides(cfg.model, overrides) if overrides else cfg.model
    sweeps = cfg.sweeps + tuple(SweepSpec.parse(s) for s in args.sweep)
    if args.si and args.kappa is None and cfg.kappa_si is None:
        raise ConfigError("--si needs --kappa")
    if args.kappa is not None and not args.si:
        raise ConfigError("--kappa only applies together with --si")
    kappa_si = (args.kappa if args.kappa is not None else cfg.kappa_si) if args.si else None
    if kappa_si is not None and not kappa_si > 0:
        raise ConfigError("--kappa must be positive")
    cfg = replace(
        cfg,
        model=model,
        sweeps=sweeps,
        format=args.format or cfg.format,
        output=args.output or cfg.output,
        seed=cfg.seed if args.seed is None else args.seed,
        tol=args.tol if args.tol is not None else cfg.tol,
        tail_tol=args.tail_tol if args.tail_tol is not None else cfg.tail_tol,
        kappa_si=kappa_si,
        branch=args.branch or cfg.branch,
    )
    branch = cfg.branch
    args.branch = int(branch) if branch.lstrip("-").isdigit() else branch
    if args.branch not in ("operating", "lowest", "highest") and not isinstance(args.branch, int):
        raise ConfigError(f"unknown branch selector {branch!r}")
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        text = args.func(cfg, args)
        _emit(text, cfg.output)
    except (TruncationError, IntegrationError, ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"phononqnd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, IndexError) as exc:
        print(f"phononqnd: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "_failed", False):
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())
