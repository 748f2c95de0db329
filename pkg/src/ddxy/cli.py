"""Command-line orchestration: sweeps, runs, oracle checks, figure data.

Subcommands: mf-sweep, stability, trajectory, gap, oracle-check, plot-data.
Global flags: --config FILE, --seed N, --out DIR, --threads N.

Model keys (j, mu, omega, gamma, coupling.kind, coupling.n,
coupling.periodic, coupling.z) resolve with precedence
CLI flag > DDXY_* environment variable > config file > default; the
environment name for a key upper-cases it and turns dots into underscores
(coupling.n -> DDXY_COUPLING_N).

Every run writes manifest.json (command, resolved configuration, seed,
package version) next to its outputs, sufficient to reproduce them.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 insufficient statistics.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__, exact, meanfield, permsym, stability, trajectories
from .model import (
    InfiniteRange,
    MeanFieldZ,
    ModelParams,
    NearestNeighbor1D,
    ParameterError,
    config_from_params,
    load_config,
    params_from_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STATS = 4

ENV_PREFIX = "DDXY_"

MODEL_KEYS = ("j", "mu", "omega", "gamma", "coupling.kind", "coupling.n",
              "coupling.periodic", "coupling.z")


def _env_key(key: str) -> str:
    return ENV_PREFIX + key.upper().replace(".", "_")


def _resolve_model_config(args, require=("j", "mu", "omega")) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in MODEL_KEYS:
        env = os.environ.get(_env_key(key))
        if env is not None:
            cfg[key] = env
        flag = key.replace(".", "_")
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val
    missing = [k for k in require if k not in cfg]
    if missing:
        raise ParameterError(f"missing parameters: {', '.join(missing)} "
                             f"(flags, {ENV_PREFIX}* env, or --config)")
    return cfg


def _params(args, require=("j", "mu", "omega"), **overrides) -> ModelParams:
    cfg = _resolve_model_config(args, require=())
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    missing = [k for k in require if k not in cfg]
    if missing:
        raise ParameterError(f"missing parameters: {', '.join(missing)} "
                             f"(flags, {ENV_PREFIX}* env, or --config)")
    return params_from_config(cfg)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_manifest(out_dir: str, command: str, payload: dict):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "version": __version__,
        "argv": sys.argv[1:],
        **_jsonable(payload),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


class _CsvFlusher:
    """Append rows with a header, flushing after every write; resumable."""

    def __init__(self, path: str, columns: list[str], resume_keys=None):
        self.path = path
        self.columns = columns
        self.done = set()
        exists = os.path.exists(path)
        if exists and resume_keys:
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    self.done.add(tuple(row[k] for k in resume_keys))
        self.fh = open(path, "a", newline="", encoding="utf-8")
        self.writer = csv.writer(self.fh)
        if not exists or os.path.getsize(path) == 0:
            self.writer.writerow(columns)
            self.fh.flush()
        self.resume_keys = resume_keys or []

    def is_done(self, row: dict) -> bool:
        return tuple(_fmt(row[k]) for k in self.resume_keys) in self.done

    def write(self, row: dict):
        self.writer.writerow([_fmt(row[c]) for c in self.columns])
        self.fh.flush()

    def close(self):
        self.fh.close()


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ParameterError("grid steps must be >= 1")
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


# ---------------------------------------------------------------------------
# mf-sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ["mu_over_gamma", "omega_over_gamma", "phase_label", "n_A",
                 "n_B", "lc_period", "lc_amplitude", "n_attractors"]


def _sweep_task(task):
    params, mu, om, seed, kwargs = task
    point = replace(params, mu=mu * params.gamma, omega=om * params.gamma)
    try:
        result = meanfield.classify_phase(point, seed=seed, **kwargs)
    except (ParameterError, meanfield.IntegrationError, RuntimeError):
        result = None
    return meanfield._sweep_row(mu, om, result)


def cmd_mf_sweep(args) -> int:
    params = _params(args, mu=0.0, omega=0.0)
    mus = _grid(args.mu_min, args.mu_max, args.mu_steps)
    omegas = _grid(args.omega_min, args.omega_max, args.omega_steps)
    kwargs = dict(t_total=args.t_total, transient=args.transient,
                  n_random=args.n_random, dt=args.classify_dt)
    out = args.out
    _write_manifest(out, "mf-sweep", {
        "params": config_from_params(params), "seed": args.seed,
        "mu_grid": [args.mu_min, args.mu_max, args.mu_steps],
        "omega_grid": [args.omega_min, args.omega_max, args.omega_steps],
        "classify": kwargs,
    })
    sink = _CsvFlusher(os.path.join(out, "mf_sweep.csv"), SWEEP_COLUMNS,
                       resume_keys=["mu_over_gamma", "omega_over_gamma"])
    tasks = []
    index = 0
    for mu in mus:
        for om in omegas:
            key = (_fmt(float(mu)), _fmt(float(om)))
            if key not in sink.done:
                tasks.append((params, float(mu), float(om),
                              meanfield.sweep_point_seed(args.seed, index), kwargs))
            index += 1
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            for row in pool.map(_sweep_task, tasks):
                sink.write(row)
    else:
        for task in tasks:
            sink.write(_sweep_task(task))
    sink.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

def cmd_stability(args) -> int:
    params = _params(args)
    roots = meanfield.uniform_steady_states(params)
    out = args.out
    _write_manifest(out, "stability", {
        "params": config_from_params(params), "seed": args.seed,
        "n_k": args.n_k,
    })
    report_rows = []
    for idx, root in enumerate(roots):
        rep = stability.scan_stability(root.bloch, params, n_k=args.n_k)
        path = os.path.join(out, f"stability_branch{idx}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "re_omega_1", "re_omega_2", "re_omega_3",
                        "im_omega_1", "im_omega_2", "im_omega_3"])
            for k, evs in zip(rep.k_grid, rep.eigenvalues):
                evs = sorted(evs, key=lambda z: (-z.real, z.imag))
                w.writerow([repr(float(k))]
                           + [repr(float(e.real)) for e in evs]
                           + [repr(float(e.imag)) for e in evs])
        report_rows.append({
            "branch": idx,
            "bloch": list(root.bloch),
            "photon_n": root.photon_n,
            "stable_k0": root.stable_k0,
            "classification": rep.classification.value,
            "k_star": rep.k_star,
            "max_re_omega": rep.max_growth_rate,
        })
    with open(os.path.join(out, "stability.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable({"branches": report_rows}), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# trajectory
# ---------------------------------------------------------------------------

def cmd_trajectory(args) -> int:
    params = _params(args)
    n = params.n_sites
    out = args.out
    _write_manifest(out, "trajectory", {
        "params": config_from_params(params), "seed": args.seed,
        "n_traj": args.n_traj, "t_final": args.t_final,
        "sample_dt": args.sample_dt, "dt": args.dt,
    })
    records = trajectories.run_ensemble(
        params, master_seed=args.seed, n_traj=args.n_traj,
        t_final=args.t_final, sample_dt=args.sample_dt, dt=args.dt,
        max_batch=args.max_batch)
    rec = records[0]
    with open(os.path.join(out, "trajectory_000.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "N"] + [f"n_{i}" for i in range(n)]
                   + [f"sy_{i}" for i in range(n)])
        for k, t in enumerate(rec.times):
            w.writerow([repr(float(t)), repr(float(rec.n_total[k]))]
                       + [repr(float(v)) for v in rec.n_sites[k]]
                       + [repr(float(v)) for v in rec.sy_sites[k]])
    with open(os.path.join(out, "jumps_000.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "site"])
        for t, site in rec.jumps:
            w.writerow([repr(float(t)), site])

    stats_payload: dict = {"n_records": len(records)}
    if len(records) >= 2:
        stats = trajectories.ensemble_stats(records, burn_in=args.burn_in,
                                            block_length=args.block_length)
        stats_payload.update({
            "sigma_y_corr": stats.sigma_y_corr,
            "stderr": stats.sigma_y_stderr,
            "n_mean": stats.n_mean,
            "n_stderr": stats.n_stderr,
            "dN2_over_N": stats.dn2_over_n,
            "dN2_over_N_stderr": stats.dn2_over_n_stderr,
        })
    for key in ("tau1", "tau2", "gamma_toy", "gamma_toy_stderr", "n_switches"):
        stats_payload.setdefault(key, None)
    if args.switching:
        roots = meanfield.uniform_steady_states(params)
        stable = [r for r in roots if r.stable_k0]
        if len(stable) < 2:
            print("switching requested but the mean field is monostable here",
                  file=sys.stderr)
            return EXIT_STATS
        n_lo = n * stable[0].photon_n
        n_hi = n * stable[-1].photon_n
        sw = trajectories.pooled_switching_times(records, n_lo=n_lo, n_hi=n_hi)
        stats_payload.update({
            "tau1": sw.tau1, "tau2": sw.tau2, "gamma_toy": sw.gamma_toy,
            "gamma_toy_stderr": sw.gamma_toy_stderr,
            "n_switches": sw.n_switches,
            "thresholds": {"n_lo": n_lo, "n_hi": n_hi},
        })
    with open(os.path.join(out, "stats.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(stats_payload), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gap
# ---------------------------------------------------------------------------

GAP_COLUMNS = ["mu_over_gamma", "omega_over_gamma", "gap_over_gamma", "n_sites"]


def cmd_gap(args) -> int:
    cfg = _resolve_model_config(args, require=("j",))
    n = args.n_sites
    base = params_from_config({**cfg, "mu": 0.0, "omega": 0.0,
                               "coupling.kind": "infinite", "coupling.n": n})
    mus = _grid(args.mu_min, args.mu_max, args.mu_steps)
    omegas = _grid(args.omega_min, args.omega_max, args.omega_steps)
    out = args.out
    _write_manifest(out, "gap", {
        "params": config_from_params(base), "seed": args.seed, "n_sites": n,
        "mu_grid": [args.mu_min, args.mu_max, args.mu_steps],
        "omega_grid": [args.omega_min, args.omega_max, args.omega_steps],
    })
    sink = _CsvFlusher(os.path.join(out, "gap.csv"), GAP_COLUMNS,
                       resume_keys=["mu_over_gamma", "omega_over_gamma"])
    for mu in mus:
        for om in omegas:
            row = {"mu_over_gamma": float(mu), "omega_over_gamma": float(om),
                   "n_sites": n}
            if sink.is_done({**row, "gap_over_gamma": 0.0}):
                continue
            point = replace(base, mu=float(mu) * base.gamma,
                            omega=float(om) * base.gamma)
            row["gap_over_gamma"] = permsym.liouvillian_gap(point) / base.gamma
            sink.write(row)
    sink.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle-check
# ---------------------------------------------------------------------------

def _check_mf_analytic(tol, rng):
    worst = 0.0
    for _ in range(20):
        mu, om, g = rng.uniform(-6, 6), rng.uniform(0.1, 5), rng.uniform(0.3, 3)
        p = ModelParams(j=0.0, mu=mu, omega=om, gamma=g, coupling=MeanFieldZ(2))
        roots = meanfield.uniform_steady_states(p)
        want = om ** 2 / (mu ** 2 + g ** 2 / 4 + 2 * om ** 2)
        worst = max(worst, abs(roots[0].photon_n - want))
    return worst


def _check_cubic_residual(tol, rng):
    worst = 0.0
    for _ in range(20):
        p = ModelParams(j=rng.uniform(0, 12), mu=rng.uniform(-8, 8),
                        omega=rng.uniform(0, 8), gamma=1.0, coupling=MeanFieldZ(2))
        for root in meanfield.uniform_steady_states(p):
            resid = np.abs(meanfield.mf_rhs(root.bloch[None, :], p)).max()
            worst = max(worst, resid)
    return worst


def _check_stability_jacobian(tol, rng):
    worst = 0.0
    for _ in range(5):
        p = ModelParams(j=rng.uniform(0, 12), mu=rng.uniform(-6, 6),
                        omega=rng.uniform(0, 6), gamma=1.0, coupling=MeanFieldZ(2))
        for root in meanfield.uniform_steady_states(p):
            m = stability.stability_matrix(root.bloch, p, k=0.0)
            h = 1e-4
            jac = np.empty((3, 3))
            for c in range(3):
                e = np.zeros(3)
                e[c] = h
                jac[:, c] = (stability.uniform_rhs(root.bloch + e, p)
                             - stability.uniform_rhs(root.bloch - e, p)) / (2 * h)
            worst = max(worst, np.abs(m - jac).max())
    return worst


def _check_superoperator_vs_master(tol, rng):
    import scipy.linalg
    p = ModelParams(j=6.0, mu=-2.0, omega=1.5, gamma=1.0,
                    coupling=NearestNeighbor1D(2))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0)
    lv = exact.liouvillian_dense(p)
    want = (scipy.linalg.expm(lv * 5.0) @ rho0.flatten(order="F")).reshape(
        (4, 4), order="F")
    _, rhos = exact.evolve_master(rho0, p, t_final=5.0, dt=5e-4)
    return np.abs(rhos[-1] - want).max()


def _check_permsym_vs_dense(tol, rng):
    p = ModelParams(j=8.0, mu=-3.0, omega=2.0, gamma=1.0,
                    coupling=InfiniteRange(3))
    c = permsym.steady_state_coeffs(p)
    obs = permsym.observables_from_coeffs(c, 3)
    rho = exact.steady_state_dense(p)
    n1, n2 = exact.total_number_moments(rho)
    return max(abs(obs.n_total - n1), abs(obs.n_total_sq - n2))


def _check_permsym_gap(tol, rng):
    p = ModelParams(j=10.0, mu=-5.0, omega=2.0, gamma=1.0,
                    coupling=InfiniteRange(3))
    return abs(permsym.liouvillian_gap(p) - exact.liouvillian_gap_dense(p))


def _check_trajectories_vs_master(tol, rng):
    # fixed internal seed: the check is a deterministic regression, not a
    # fresh statistical trial
    p = ModelParams(j=10.0, mu=-2.5, omega=2.5, gamma=1.0,
                    coupling=NearestNeighbor1D(3))
    records = trajectories.run_ensemble(p, master_seed=777, n_traj=300,
                                        t_final=10.0, sample_dt=2.0)
    n_traj = np.stack([r.n_total for r in records])
    mean = n_traj.mean(axis=0)
    se = n_traj.std(axis=0, ddof=1) / np.sqrt(len(records))
    times, rhos = exact.evolve_master(exact.vacuum_density_matrix(3), p,
                                      t_final=10.0, dt=1e-3, store_every=2000)
    worst = 0.0
    for k in range(1, len(times)):
        n_master = exact.total_number_moments(rhos[k])[0]
        worst = max(worst, abs(mean[k] - n_master) / max(se[k], 1e-9))
    return worst


def _check_stability_vs_chain(tol, rng):
    # a STABLE point must relax back to uniform in an actual chain
    p = ModelParams(j=10.0, mu=-5.0, omega=2.0, gamma=1.0, coupling=MeanFieldZ(2))
    roots = meanfield.uniform_steady_states(p)
    stable = [r for r in roots if r.stable_k0][0]
    rep = stability.scan_stability(stable.bloch, p)
    if rep.classification is not stability.StabilityClass.STABLE:
        return float("inf")
    n = 32
    chain = replace(p, coupling=NearestNeighbor1D(n))
    init = np.tile(stable.bloch, (n, 1)) + 1e-6 * rng.standard_normal((n, 3))
    _, states = meanfield.evolve_mf_batch(init[None], chain, t_final=200.0,
                                          store_every=10 ** 9)
    dev = np.abs(states[-1, 0] - stable.bloch).max()
    return dev


ORACLE_CHECKS = [
    ("meanfield_vs_analytic_single_site", _check_mf_analytic, 1e-9),
    ("cubic_roots_vs_rhs_residual", _check_cubic_residual, 1e-9),
    ("stability_vs_fd_jacobian", _check_stability_jacobian, 1e-10),
    ("superoperator_vs_master_rk4", _check_superoperator_vs_master, 1e-8),
    ("permsym_vs_dense_steady_state", _check_permsym_vs_dense, 1e-8),
    ("permsym_gap_vs_dense_gap", _check_permsym_gap, 1e-8),
    ("trajectories_vs_master_3se", _check_trajectories_vs_master, 3.0),
    ("stability_vs_chain_dynamics", _check_stability_vs_chain, 1e-5),
]


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    results = []
    all_passed = True
    for name, fn, tol in ORACLE_CHECKS:
        tol_eff = tol * args.tol_scale
        value = fn(tol_eff, rng)
        if args.inject_error == name:
            value = value + 2.0 * tol_eff + 1.0
        passed = bool(value < tol_eff)
        all_passed &= passed
        results.append({"check": name, "passed": passed,
                        "value": float(value), "tolerance": tol_eff})
        print(f"{'PASS' if passed else 'FAIL'}  {name}  "
              f"(value {value:.3e}, tolerance {tol_eff:.3e})")
    out = args.out
    _write_manifest(out, "oracle-check", {"seed": args.seed,
                                          "tol_scale": args.tol_scale})
    with open(os.path.join(out, "oracle_check.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable({"all_passed": all_passed, "checks": results}),
                  fh, indent=2)
        fh.write("\n")
    return EXIT_OK if all_passed else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# plot-data
# ---------------------------------------------------------------------------

def _require_grids(args, which=("mu", "omega")):
    for name in which:
        for part in ("min", "max", "steps"):
            if getattr(args, f"{name}_{part}", None) is None:
                raise ParameterError(
                    f"--figure {args.figure} needs --{name}-{part}")


def _default_ring(args):
    """Fill in a periodic ring of --n-sites when no coupling is specified."""
    if (getattr(args, "coupling_kind", None) is None
            and os.environ.get(_env_key("coupling.kind")) is None):
        args.coupling_kind = "nn1d"
        args.coupling_n = args.n_sites


def cmd_plot_data(args) -> int:
    if args.figure == "phase-diagram":
        _require_grids(args)
        return cmd_mf_sweep(args)
    if args.figure == "gap-map":
        _require_grids(args)
        return cmd_gap(args)
    if args.figure == "switching-trace":
        _default_ring(args)
        return _plot_data_switching(args)
    if args.figure == "correlation-map":
        _require_grids(args)
        _default_ring(args)
        return _plot_data_correlation(args)
    if args.figure == "gap-curve":
        _require_grids(args, which=("omega",))
        return _plot_data_gap_curve(args)
    raise ParameterError(f"unknown figure kind {args.figure}")


def _plot_data_switching(args) -> int:
    params = _params(args)
    out = args.out
    code = cmd_trajectory(args)
    if code != EXIT_OK:
        return code
    # mean-field branch photon numbers over a drive window around the run
    n = params.n_sites
    omegas = np.linspace(max(0.0, params.omega / params.gamma - 2.0),
                         params.omega / params.gamma + 2.0, 81)
    with open(os.path.join(out, "mf_branches.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_over_gamma", "branch", "n_total", "stable_k0"])
        for om in omegas:
            point = replace(params, omega=float(om) * params.gamma)
            for b, root in enumerate(meanfield.uniform_steady_states(point)):
                w.writerow([repr(float(om)), b, repr(n * root.photon_n),
                            int(root.stable_k0)])
    return EXIT_OK


def _plot_data_correlation(args) -> int:
    params = _params(args, mu=0.0, omega=0.0)
    out = args.out
    mus = _grid(args.mu_min, args.mu_max, args.mu_steps)
    omegas = _grid(args.omega_min, args.omega_max, args.omega_steps)
    _write_manifest(out, "plot-data correlation-map", {
        "params": config_from_params(params), "seed": args.seed,
        "n_traj": args.n_traj, "t_final": args.t_final,
    })
    cols = ["mu_over_gamma", "omega_over_gamma", "sigma_y_1",
            "sigma_y_1_stderr", "dn2_over_n", "dn2_over_n_stderr"]
    sink = _CsvFlusher(os.path.join(out, "correlation_map.csv"), cols,
                       resume_keys=["mu_over_gamma", "omega_over_gamma"])
    for mu in mus:
        for om in omegas:
            row = {"mu_over_gamma": float(mu), "omega_over_gamma": float(om)}
            if sink.is_done({**row, "sigma_y_1": 0, "sigma_y_1_stderr": 0,
                             "dn2_over_n": 0, "dn2_over_n_stderr": 0}):
                continue
            point = replace(params, mu=float(mu) * params.gamma,
                            omega=float(om) * params.gamma)
            records = trajectories.run_ensemble(
                point, master_seed=args.seed, n_traj=args.n_traj,
                t_final=args.t_final, sample_dt=args.sample_dt, dt=args.dt)
            stats = trajectories.ensemble_stats(records, burn_in=args.burn_in,
                                                block_length=args.block_length)
            row.update({
                "sigma_y_1": stats.sigma_y_corr[1],
                "sigma_y_1_stderr": stats.sigma_y_stderr[1],
                "dn2_over_n": stats.dn2_over_n,
                "dn2_over_n_stderr": stats.dn2_over_n_stderr,
            })
            sink.write(row)
    sink.close()
    return EXIT_OK


def _plot_data_gap_curve(args) -> int:
    cfg = _resolve_model_config(args, require=("j", "mu"))
    out = args.out
    omegas = _grid(args.omega_min, args.omega_max, args.omega_steps)
    sizes = [int(s) for s in args.sizes.split(",")]
    _write_manifest(out, "plot-data gap-curve", {
        "j": float(cfg["j"]), "mu": float(cfg["mu"]), "seed": args.seed,
        "sizes": sizes,
        "omega_grid": [args.omega_min, args.omega_max, args.omega_steps],
    })
    sink = _CsvFlusher(os.path.join(out, "gap_curve.csv"),
                       GAP_COLUMNS, resume_keys=["omega_over_gamma", "n_sites"])
    for n in sizes:
        for om in omegas:
            row = {"mu_over_gamma": float(cfg["mu"]),
                   "omega_over_gamma": float(om), "n_sites": n}
            if (_fmt(row["omega_over_gamma"]), _fmt(n)) in sink.done:
                continue
            point = params_from_config({**cfg, "omega": float(om),
                                        "coupling.kind": "infinite",
                                        "coupling.n": n})
            row["gap_over_gamma"] = permsym.liouvillian_gap(point) / point.gamma
            sink.write(row)
    sink.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_global(parser):
    parser.add_argument("--config", help="flat key=value parameter file")
    parser.add_argument("--seed", type=int, default=2024, help="master seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweeps")


def _add_model(parser, grid_mu=False, grid_omega=False, grid_required=True):
    parser.add_argument("--j", type=float)
    if not grid_mu:
        parser.add_argument("--mu", type=float)
    if not grid_omega:
        parser.add_argument("--omega", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--coupling-kind", dest="coupling_kind",
                        choices=["nn1d", "infinite", "meanfield"])
    parser.add_argument("--coupling-n", dest="coupling_n", type=int)
    parser.add_argument("--coupling-periodic", dest="coupling_periodic",
                        choices=["true", "false"])
    parser.add_argument("--coupling-z", dest="coupling_z", type=int)
    if grid_mu:
        parser.add_argument("--mu-min", type=float, required=grid_required)
        parser.add_argument("--mu-max", type=float, required=grid_required)
        parser.add_argument("--mu-steps", type=int, required=grid_required)
    if grid_omega:
        parser.add_argument("--omega-min", type=float, required=grid_required)
        parser.add_argument("--omega-max", type=float, required=grid_required)
        parser.add_argument("--omega-steps", type=int, required=grid_required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddxy",
        description="driven-dissipative hard-core lattice simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mf-sweep", help="mean-field phase diagram over a grid")
    _add_global(p)
    _add_model(p, grid_mu=True, grid_omega=True)
    p.add_argument("--t-total", type=float, default=2000.0)
    p.add_argument("--transient", type=float, default=500.0)
    p.add_argument("--n-random", type=int, default=32)
    p.add_argument("--classify-dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_mf_sweep)

    p = sub.add_parser("stability", help="linear stability of uniform branches")
    _add_global(p)
    _add_model(p)
    p.add_argument("--n-k", type=int, default=1024)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("trajectory", help="quantum-jump trajectories")
    _add_global(p)
    _add_model(p)
    p.add_argument("--n-traj", type=int, default=1)
    p.add_argument("--t-final", type=float, default=100.0)
    p.add_argument("--sample-dt", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--max-batch", type=int, default=512)
    p.add_argument("--burn-in", type=float, default=50.0)
    p.add_argument("--block-length", type=float, default=10.0)
    p.add_argument("--switching", action="store_true",
                   help="extract dwell times against the mean-field branches")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("gap", help="permutation-symmetric Liouvillian gap")
    _add_global(p)
    _add_model(p, grid_mu=True, grid_omega=True)
    p.add_argument("--n-sites", type=int, required=True)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("oracle-check", help="cross-validation matrix")
    _add_global(p)
    p.add_argument("--tol-scale", type=float, default=1.0,
                   help="multiply every check tolerance")
    p.add_argument("--inject-error", default=None,
                   help="negative control: force the named check to fail")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("plot-data", help="emit figure-ready datasets")
    _add_global(p)
    p.add_argument("--figure", required=True,
                   choices=["phase-diagram", "correlation-map",
                            "switching-trace", "gap-map", "gap-curve"])
    _add_model(p, grid_mu=True, grid_omega=True, grid_required=False)
    p.add_argument("--mu", type=float, help="fixed detuning (trace/curve figures)")
    p.add_argument("--omega", type=float, help="fixed drive (trace figures)")
    p.add_argument("--n-sites", type=int, default=12)
    p.add_argument("--sizes", default="8,12", help="gap-curve system sizes")
    p.add_argument("--n-traj", type=int, default=8)
    p.add_argument("--t-final", type=float, default=400.0)
    p.add_argument("--sample-dt", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--max-batch", type=int, default=512)
    p.add_argument("--burn-in", type=float, default=50.0)
    p.add_argument("--block-length", type=float, default=10.0)
    p.add_argument("--switching", action="store_true")
    p.add_argument("--t-total", type=float, default=2000.0)
    p.add_argument("--transient", type=float, default=500.0)
    p.add_argument("--n-random", type=int, default=32)
    p.add_argument("--classify-dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_plot_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FileNotFoundError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except trajectories.InsufficientSwitchingError as err:
        print(f"insufficient statistics: {err}", file=sys.stderr)
        return EXIT_STATS
    except (meanfield.IntegrationError, trajectories.TrajectoryError,
            exact.DegenerateSteadyStateError, permsym.SingularReductionError,
            np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
