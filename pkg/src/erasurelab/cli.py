"""Command-line surface: calibrate, erase, sweep, fit, mi, report.

Every command reads one JSON configuration (or the built-in defaults),
writes its artifacts into the output directory, and is deterministic for
a fixed master seed: per-run Philox streams make the results independent
of worker count and execution order.

    erasurelab <command> [--config cfg.json] [--seed N] [--jobs N] [--out dir]

Exit status: 0 on success, 1 on configuration/validation errors, 2 on
runtime errors (missing prerequisite files, escaped trajectories, I/O).
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, io
from .config import ConfigError, DEFAULTS, RunConfig, _build, config_from_dict, load_config
from .dynamics import DutySchedule, simulate_trajectory
from .measurement import draw_mixture_pairs, mi_monte_carlo, mi_quadrature
from .energetics import ledger_check
from .potential import reconstruct_potential
from .protocol import FEEDBACK, OPEN_LOOP, ProtocolSchedule, run_ensemble, tau_for_duty
from .units import kbt

# stream-id blocks that cannot collide with protocol run ids
_CAL_STREAM_BASE = 2**31
_MI_STREAM_ID = 2**31 + 2**20

_KIND_TAG = {FEEDBACK: "fb", OPEN_LOOP: "ol"}


def write_records(records, path, format: str) -> None:
    """Persist a record list (runs or sweep stats) or a report dict."""
    if format == "csv":
        if records and isinstance(records[0], analysis.EnsembleStats):
            io.write_sweep_csv(records, path)
        else:
            io.write_runs_csv(records, path)
    elif format == "json":
        io.write_json(records, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def _tau_for(cfg: RunConfig, d: float) -> float:
    return tau_for_duty(d, cfg.tau_ref, cfg.d_ref, cfg.tau_exponent)


def _schedule(cfg: RunConfig, d: float, tau: float | None = None) -> ProtocolSchedule:
    return ProtocolSchedule(
        t_m=cfg.t_m,
        tau=_tau_for(cfg, d) if tau is None else tau,
        t_relax=cfg.t_relax,
        d_erase=d,
    )


def _runs_filename(kind: str, d: float) -> str:
    return f"runs_{_KIND_TAG[kind]}_d{d:g}.csv"


def cmd_calibrate(cfg: RunConfig, jobs: int) -> None:
    """Equilibrium runs at d = 0.5: well statistics and Boltzmann reconstruction."""
    sched = DutySchedule.constant(0.5, cfg.cal_burn_in + cfg.cal_t_sim)
    xs = []
    for i in range(cfg.cal_n_particles):
        # alternate wells so both basins carry their equilibrium weight exactly
        x0 = -cfg.potential.L if i % 2 == 0 else cfg.potential.L
        traj = simulate_trajectory(x0, sched, cfg.sim, cfg.potential, _CAL_STREAM_BASE + i)
        xs.append(traj.positions[traj.times >= cfg.cal_burn_in])
    samples = np.concatenate(xs)

    left = samples[samples < 0]
    right = samples[samples >= 0]
    if left.size < 2 or right.size < 2:
        raise RuntimeError("calibration sampled only one well; increase t_sim_s")
    var_left = float(np.var(left, ddof=1))
    var_right = float(np.var(right, ddof=1))
    sigma_t = float(np.sqrt(0.5 * (var_left + var_right)))
    var_theory = kbt(cfg.sim.T) / (0.5 * cfg.potential.k)

    span = cfg.potential.L + cfg.potential.w + 5 * sigma_t
    nbins = int(np.ceil(2 * span / cfg.cal_bin_width))
    edges = np.linspace(-span, span, nbins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    curve = reconstruct_potential(centers, counts, cfg.sim.T)

    out = cfg.output_dir
    curve.to_csv(os.path.join(out, "potential_reconstructed.csv"))
    io.write_json(
        {
            "seed": cfg.seed,
            "n_particles": cfg.cal_n_particles,
            "t_sim_s": cfg.cal_t_sim,
            "burn_in_s": cfg.cal_burn_in,
            "n_samples": int(samples.size),
            "sigma_T_nm": sigma_t,
            "mean_left_nm": float(np.mean(left)),
            "mean_right_nm": float(np.mean(right)),
            "var_left_nm2": var_left,
            "var_right_nm2": var_right,
            "var_theory_nm2": var_theory,
        },
        os.path.join(out, "calibration.json"),
    )
    print(f"calibrate: sigma_T = {sigma_t:.2f} nm "
          f"(per-well variance theory {var_theory:.1f} nm^2, "
          f"measured L/R {var_left:.1f}/{var_right:.1f} nm^2)")


def cmd_erase(cfg: RunConfig, jobs: int) -> None:
    """One erasure ensemble at the configured (d, sigma_n)."""
    kind = FEEDBACK if cfg.erase_kind == "feedback" else OPEN_LOOP
    sched = _schedule(cfg, cfg.erase_d, cfg.erase_tau)
    runs = run_ensemble(
        kind,
        cfg.erase_n_runs,
        sched,
        cfg.sim,
        cfg.potential,
        sensor=cfg.sensor if kind == FEEDBACK else None,
        stream_offset=0,
    )
    path = os.path.join(cfg.output_dir, "runs.csv")
    io.write_runs_csv(runs, path)
    stats = analysis.aggregate(runs)
    print(
        f"erase: {kind} d={cfg.erase_d:g} tau={sched.tau:g}s n={stats.n_runs} "
        f"p_hat={stats.p_hat:.3f} <W>={stats.mean_W:.3f} kBT -> {path}"
    )


def cmd_sweep(cfg: RunConfig, jobs: int) -> None:
    """Feedback and open-loop ensembles for every duty ratio in the sweep list."""
    tasks = [(FEEDBACK, d) for d in cfg.sweep_d_list] + [
        (OPEN_LOOP, d) for d in cfg.sweep_d_list
    ]

    def run_one(args):
        idx, (kind, d) = args
        sched = _schedule(cfg, d)
        return run_ensemble(
            kind,
            cfg.sweep_n_runs,
            sched,
            cfg.sim,
            cfg.potential,
            sensor=cfg.sensor if kind == FEEDBACK else None,
            stream_offset=idx * cfg.sweep_n_runs,
        )

    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(pool.map(run_one, enumerate(tasks)))

    stats = []
    for (kind, d), runs in zip(tasks, results):
        io.write_runs_csv(runs, os.path.join(cfg.output_dir, _runs_filename(kind, d)))
        stats.append(analysis.aggregate(runs))
    sweep_path = os.path.join(cfg.output_dir, "sweep.csv")
    io.write_sweep_csv(stats, sweep_path)
    for (kind, d), s in zip(tasks, stats):
        print(
            f"sweep: {kind} d={d:g} p_hat={s.p_hat:.3f} "
            f"<W>={s.mean_W:.3f}+-{s.se_W:.3f} kBT zero_mass={s.zero_mass:.3f}"
        )
    print(f"sweep: table -> {sweep_path}")


def cmd_fit(cfg: RunConfig, jobs: int) -> None:
    """Weighted least-squares extrapolation of the sweep's feedback work."""
    sweep_path = os.path.join(cfg.output_dir, "sweep.csv")
    if not os.path.exists(sweep_path):
        raise FileNotFoundError(f"fit needs {sweep_path}; run `sweep` first")
    stats = [s for s in io.read_sweep_csv(sweep_path) if s.sigma_n is not None]
    fit = analysis.fit_work_model(stats)
    payload = {"seed": cfg.seed, **fit.to_dict()}
    path = os.path.join(cfg.output_dir, "fit.json")
    io.write_json(payload, path)
    print(f"fit: A = {fit.A:.4f} +- {fit.se_A:.4f} kBT, "
          f"B = {fit.B:.3f} +- {fit.se_B:.3f} kBT -> {path}")


def cmd_mi(cfg: RunConfig, jobs: int) -> None:
    """Mutual information of the sensor channel, by quadrature and Monte Carlo."""
    i_quad = mi_quadrature(cfg.mixture, cfg.sensor)
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(_MI_STREAM_ID,)))
    )
    pairs = draw_mixture_pairs(cfg.mixture, cfg.sensor, cfg.mi_n_samples, rng)
    est = mi_monte_carlo(pairs, cfg.mixture, cfg.sensor)
    path = os.path.join(cfg.output_dir, "mi.json")
    io.write_json(
        {
            "seed": cfg.seed,
            "I_quadrature_nats": i_quad,
            "I_quadrature_bits": i_quad / np.log(2.0),
            "I_mc_nats": est.value,
            "I_mc_se_nats": est.se,
            "n_samples": est.n_samples,
            "p_left": cfg.mixture.p,
            "sigma_T_nm": cfg.mixture.sigma_T,
            "sigma_n_nm": cfg.sensor.sigma_n,
            "L_nm": cfg.mixture.L,
        },
        path,
    )
    print(f"mi: I = {i_quad:.4f} nats (MC {est.value:.4f} +- {est.se:.4f}) -> {path}")


def cmd_report(cfg: RunConfig, jobs: int) -> None:
    """Assemble the second-law ledger and deficit comparison from prior outputs."""
    out = cfg.output_dir
    sweep_path = os.path.join(out, "sweep.csv")
    mi_path = os.path.join(out, "mi.json")
    fit_path = os.path.join(out, "fit.json")
    for p, cmd in ((sweep_path, "sweep"), (mi_path, "mi"), (fit_path, "fit")):
        if not os.path.exists(p):
            raise FileNotFoundError(f"report needs {p}; run `{cmd}` first")
    mi_data = io.read_json(mi_path)
    fit_data = io.read_json(fit_path)
    I = mi_data["I_quadrature_nats"]

    points = []
    for s in io.read_sweep_csv(sweep_path):
        if s.sigma_n is None:
            continue
        runs_path = os.path.join(out, _runs_filename(FEEDBACK, s.d))
        if not os.path.exists(runs_path):
            raise FileNotFoundError(f"report needs {runs_path}; run `sweep` first")
        ledger = ledger_check(io.read_runs_csv(runs_path), I)
        points.append({"d": s.d, **ledger.to_dict()})

    fit = analysis.FitResult(
        A=fit_data["A_kBT"],
        B=fit_data["B_kBT"],
        cov=np.array(fit_data["cov_kBT2"]),
        chi2=fit_data["chi2"],
        dof=fit_data["dof"],
    )
    deficit = analysis.deficit_report(fit, I)
    path = os.path.join(out, "report.json")
    io.write_json(
        {
            "seed": cfg.seed,
            "I_nats": I,
            "points": points,
            "fit": fit_data,
            "deficit": deficit.to_dict(),
        },
        path,
    )
    ok = all(p["satisfied"] for p in points)
    print(f"report: {len(points)} ledger points, second law "
          f"{'satisfied' if ok else 'VIOLATED'}; deficit = {deficit.deficit:.4f} kBT "
          f"vs I = {I:.4f} nats -> {path}")


_COMMANDS = {
    "calibrate": cmd_calibrate,
    "erase": cmd_erase,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "mi": cmd_mi,
    "report": cmd_report,
}


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="erasurelab",
        description="Brownian-dynamics simulation of feedback-controlled bit erasure",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--jobs", type=int, default=None, help="worker threads (default: CPU count)")
        p.add_argument("--out", default=None, help="override the output directory")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else config_from_dict({})
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
            raw = copy.deepcopy(cfg.raw)
            raw["seed"] = args.seed
            cfg = _build(raw)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
        _COMMANDS[args.command](cfg, jobs)
    except (FileNotFoundError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
