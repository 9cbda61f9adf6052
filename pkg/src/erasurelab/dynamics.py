"""Overdamped Langevin integration of the trapped particle.

The particle obeys  gamma dx/dt = F(x, t) + xi(t)  with Gaussian white
noise of strength <xi xi'> = 2 gamma k_B T delta(t - t'), integrated with
the Euler-Maruyama scheme

    x' = x + F(x) dt / gamma + sqrt(2 k_B T dt / gamma) * N(0, 1).

Two force models are supported: `averaged` uses the duty-averaged
effective force, `multiplexed` the instantaneous single-laser force with
the laser position toggling every period t_mux according to the duty
ratio.  Randomness comes from counter-based Philox streams derived from
(master seed, stream id), so every trajectory is reproducible in isolation
and ensembles give identical results no matter how runs are batched or
scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .potential import PotentialParams, bistable_force, effective_force
from .units import kbt

# steps integrated per noise block; partitioning does not affect the streams
_CHUNK_STEPS = 8192


class EscapeError(RuntimeError):
    """A particle left the configured escape bound, signaling a blown-up step size."""

    def __init__(self, x: float, t: float, bound: float):
        super().__init__(
            f"particle escaped to x={x:.6g} nm (|x| > {bound:g} nm) at t={t:.6g} s; "
            "check dt against the stability bound 2*gamma/k"
        )
        self.x = x
        self.t = t
        self.bound = bound


@dataclass(frozen=True)
class SimConfig:
    """Bath and integration parameters.

    T in K, gamma in pN s/nm, dt in s.  mode selects the force model;
    t_mux is the laser multiplexing period (s) used in multiplexed mode.
    record_stride is the number of integration steps between recorded
    samples; escape_bound (nm) aborts runaway trajectories.
    """

    T: float = 300.0
    gamma: float = 4.5e-6
    dt: float = 5e-5
    mode: str = "averaged"
    t_mux: float = 1e-5
    seed: int = 42
    record_stride: int = 20
    escape_bound: float = 1e6

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError(f"temperature must be positive, got {self.T}")
        if self.gamma <= 0:
            raise ValueError(f"drag coefficient must be positive, got {self.gamma}")
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.mode not in ("averaged", "multiplexed"):
            raise ValueError(f"mode must be 'averaged' or 'multiplexed', got {self.mode!r}")
        if self.t_mux <= 0:
            raise ValueError(f"multiplexing period must be positive, got {self.t_mux}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.escape_bound <= 0:
            raise ValueError(f"escape bound must be positive, got {self.escape_bound}")

    def validate_against(self, params: PotentialParams) -> None:
        """Check the stability constraints that involve the trap stiffness."""
        limit = 2.0 * self.gamma / params.k
        if not (self.dt < limit):
            raise ValueError(
                f"dt={self.dt:g} violates Euler-Maruyama stability dt < 2*gamma/k = {limit:g}"
            )
        if self.mode == "multiplexed" and self.dt > self.t_mux / 10.0:
            raise ValueError(
                f"multiplexed mode needs dt <= t_mux/10 = {self.t_mux / 10.0:g}, got {self.dt:g}"
            )

    @property
    def noise_amp(self) -> float:
        """Per-step noise amplitude sqrt(2 k_B T dt / gamma), nm."""
        return float(np.sqrt(2.0 * kbt(self.T) * self.dt / self.gamma))


def stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based Philox generator for the stream at `path` under `seed`.

    Distinct paths give statistically independent streams; the same
    (seed, path) always yields the same sequence regardless of how many
    values are drawn per call.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=path)))


def multiplex_r(t: float, d: float, t_mux: float) -> int:
    """Laser location flag at time t: 0 (left) for the first d*t_mux of each period, else 1."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    phase = (t / t_mux) % 1.0
    return 0 if phase < d else 1


def step_em(
    x: float,
    d: float,
    r: Optional[int],
    cfg: SimConfig,
    params: PotentialParams,
    noise: float,
) -> float:
    """One Euler-Maruyama update from position x given a standard-normal draw.

    In averaged mode r must be None and the duty-averaged force is used;
    in multiplexed mode r in {0, 1} selects the instantaneous force.
    Raises EscapeError if the new position exceeds the escape bound.
    """
    cfg.validate_against(params)
    if cfg.mode == "averaged":
        if r is not None:
            raise ValueError("r must be absent in averaged mode")
        f = effective_force(x, d, params)
    else:
        if r not in (0, 1):
            raise ValueError("r must be 0 or 1 in multiplexed mode")
        f = bistable_force(x, r, params)
    x_new = x + f * cfg.dt / cfg.gamma + cfg.noise_amp * noise
    if abs(x_new) > cfg.escape_bound:
        raise EscapeError(x_new, cfg.dt, cfg.escape_bound)
    return float(x_new)


@njit(cache=True, nogil=True)
def _advance_averaged(x, d, noise, k, w, L, drift, amp, bound):
    """Advance every particle through noise.shape[1] steps of the averaged force."""
    n, steps = noise.shape
    esc = np.full(n, -1, np.int64)
    for i in range(n):
        xi = x[i]
        di = d[i]
        for s in range(steps):
            f = 0.0
            u = xi + L
            if u >= -w and u <= w:
                f -= di * k * u
            v = xi - L
            if v >= -w and v <= w:
                f -= (1.0 - di) * k * v
            xi += f * drift + amp * noise[i, s]
            if xi < -bound or xi > bound:
                esc[i] = s
                break
        x[i] = xi
    return esc


@njit(cache=True, nogil=True)
def _advance_multiplexed(x, d, noise, k, w, L, drift, amp, bound, dt, t_mux, start_step):
    """Advance with the instantaneous single-laser force; r(t) follows the duty ratio."""
    n, steps = noise.shape
    esc = np.full(n, -1, np.int64)
    for i in range(n):
        xi = x[i]
        di = d[i]
        for s in range(steps):
            t = (start_step + s) * dt
            phase = (t / t_mux) % 1.0
            f = 0.0
            if phase < di:
                u = xi + L
                if u >= -w and u <= w:
                    f = -k * u
            else:
                v = xi - L
                if v >= -w and v <= w:
                    f = -k * v
            xi += f * drift + amp * noise[i, s]
            if xi < -bound or xi > bound:
                esc[i] = s
                break
        x[i] = xi
    return esc


def _advance_ensemble(
    x: np.ndarray,
    d: np.ndarray,
    rngs: Sequence[np.random.Generator],
    n_steps: int,
    start_step: int,
    cfg: SimConfig,
    params: PotentialParams,
    record_stride: int = 0,
    rec: Optional[np.ndarray] = None,
) -> int:
    """Advance the ensemble in place by n_steps, drawing per-particle noise.

    Steps are counted globally from the start of the trajectory so the
    multiplex phase stays continuous across protocol segments.  When
    record_stride > 0, positions at every global step divisible by the
    stride are written to rec[global_step // stride].  Returns the new
    global step counter.
    """
    n = x.shape[0]
    drift = cfg.dt / cfg.gamma
    amp = cfg.noise_amp
    step = start_step
    remaining = n_steps
    noise = np.empty((n, _CHUNK_STEPS))
    while remaining > 0:
        block = min(remaining, _CHUNK_STEPS)
        for i in range(n):
            rngs[i].standard_normal(block, dtype=np.float64, out=noise[i, :block])
        done = 0
        while done < block:
            if record_stride > 0:
                to_boundary = record_stride - (step % record_stride)
                piece = min(block - done, to_boundary)
            else:
                piece = block - done
            sl = noise[:, done : done + piece]
            if cfg.mode == "averaged":
                esc = _advance_averaged(
                    x, d, sl, params.k, params.w, params.L, drift, amp, cfg.escape_bound
                )
            else:
                esc = _advance_multiplexed(
                    x, d, sl, params.k, params.w, params.L, drift, amp,
                    cfg.escape_bound, cfg.dt, cfg.t_mux, step,
                )
            if np.any(esc >= 0):
                hit = np.where(esc >= 0)[0]
                first = hit[np.argmin(esc[hit])]
                t_esc = (step + esc[first] + 1) * cfg.dt
                raise EscapeError(float(x[first]), t_esc, cfg.escape_bound)
            step += piece
            done += piece
            if record_stride > 0 and step % record_stride == 0:
                rec[step // record_stride] = x
        remaining -= block
    return step


@dataclass(frozen=True)
class DutySchedule:
    """Piecewise-constant duty ratio d(t) on [0, t_end].

    times are segment start times beginning at 0; values the duty ratio
    on each segment.  The final segment extends to t_end.
    """

    times: np.ndarray
    values: np.ndarray
    t_end: float

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape or times.size == 0:
            raise ValueError("times and values must be 1-D arrays of equal nonzero length")
        if times[0] != 0.0:
            raise ValueError("schedule must start at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("segment start times must be strictly increasing")
        if np.any((values < 0.0) | (values > 1.0)):
            raise ValueError("duty ratios must lie in [0, 1]")
        if self.t_end < times[-1]:
            raise ValueError("t_end must not precede the last segment start")

    @classmethod
    def constant(cls, d: float, t_end: float) -> "DutySchedule":
        return cls(np.array([0.0]), np.array([float(d)]), float(t_end))

    def d_at(self, t: float) -> float:
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.values[max(idx, 0)])


@dataclass(frozen=True)
class Trajectory:
    """Recorded positions at uniform spacing dt * record_stride."""

    times: np.ndarray
    positions: np.ndarray
    duty_schedule: DutySchedule
    seed_used: int
    stream_id: int

    def duty_at_samples(self) -> np.ndarray:
        return np.array([self.duty_schedule.d_at(t) for t in self.times])

    def to_csv(self, path) -> None:
        """Write `t_s,x_nm,d` rows for every recorded sample."""
        duties = self.duty_at_samples()
        lines = ["t_s,x_nm,d"]
        for t, x, d in zip(self.times, self.positions, duties):
            lines.append(f"{t:.17g},{x:.17g},{d:.17g}")
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def _steps_for(duration: float, dt: float) -> int:
    """Whole number of steps closest to duration/dt (durations are rounded to the grid)."""
    return int(round(duration / dt))


def simulate_trajectory(
    x0: float,
    schedule: DutySchedule,
    cfg: SimConfig,
    params: PotentialParams,
    stream_id: int,
) -> Trajectory:
    """Integrate one trajectory over the schedule's horizon.

    The result is a deterministic function of all arguments plus cfg.seed;
    positions are recorded every cfg.record_stride steps starting with x0
    at t = 0.  Averaged mode requires duty ratios strictly inside (0, 1).
    """
    cfg.validate_against(params)
    if cfg.mode == "averaged" and np.any(
        (schedule.values <= 0.0) | (schedule.values >= 1.0)
    ):
        raise ValueError("averaged mode requires duty ratios strictly inside (0, 1)")
    total_steps = _steps_for(schedule.t_end, cfg.dt)
    n_rec = total_steps // cfg.record_stride
    rec = np.empty((n_rec + 1, 1))
    rec[0] = x0
    x = np.array([float(x0)])
    rng = stream(cfg.seed, stream_id)
    boundaries = [_steps_for(t, cfg.dt) for t in schedule.times] + [total_steps]
    step = 0
    for seg, d in enumerate(schedule.values):
        seg_steps = boundaries[seg + 1] - boundaries[seg]
        if seg_steps <= 0:
            continue
        step = _advance_ensemble(
            x,
            np.array([float(d)]),
            [rng],
            seg_steps,
            step,
            cfg,
            params,
            record_stride=cfg.record_stride,
            rec=rec,
        )
    times = np.arange(n_rec + 1) * (cfg.dt * cfg.record_stride)
    return Trajectory(
        times=times,
        positions=rec[:, 0].copy(),
        duty_schedule=schedule,
        seed_used=cfg.seed,
        stream_id=stream_id,
    )


def stationary_stats(traj: Trajectory, window: tuple[float, float]) -> tuple[float, float]:
    """Sample mean and variance (ddof=1) of the positions inside [t0, t1]."""
    t0, t1 = window
    mask = (traj.times >= t0) & (traj.times <= t1)
    xs = traj.positions[mask]
    if xs.size < 2:
        raise ValueError(f"window [{t0}, {t1}] contains fewer than two samples")
    return float(np.mean(xs)), float(np.var(xs, ddof=1))
