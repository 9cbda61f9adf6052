"""Run configuration: JSON ingestion, strict validation, presets.

The configuration is plain JSON with the nested sections documented in
config.schema.json.  Unknown keys are rejected (misspellings must fail
loudly, never silently fall back to defaults), and every invariant
violation names the offending key.  An empty object {} yields the full
default parameter set.

The `fast-bath` preset multiplies the drag coefficient and every time in
the problem (dt, t_mux, t_m, tau, t_relax, calibration horizons) by 0.01.
The overdamped dynamics is invariant under this joint rescaling, so the
trajectories are statistically identical, sample for sample, while the
simulated horizon shrinks a hundredfold.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .dynamics import SimConfig
from .measurement import MixtureModel, SensorModel
from .potential import PotentialParams

FAST_BATH_FACTOR = 0.01

DEFAULTS = {
    "seed": 42,
    "output_dir": "out",
    "preset": "full",
    "potential": {
        "k_pN_per_nm": 0.0045,
        "w_nm": 175.0,
        "L_nm": 550.0,
        "U_r_pNnm": 0.0,
    },
    "sim": {
        "T_K": 300.0,
        "gamma_pNs_per_nm": 4.5e-6,
        "dt_s": None,  # None -> (gamma/k)/20
        "mode": "averaged",
        "t_mux_s": 1e-5,
        "record_stride": 20,
        "escape_bound_nm": 1e6,
    },
    "sensor": {"sigma_n_nm": 300.0},
    "mixture": {"p_left": 0.5, "sigma_T_nm": 43.0},
    "protocol": {
        "t_m_s": 0.1,
        "t_relax_s": 2.0,
        "tau_ref_s": 90.0,
        "d_ref": 0.7,
        "tau_exponent": 0.5,
    },
    "erase": {"d": 0.7, "tau_s": None, "n_runs": 300, "kind": "feedback"},
    "sweep": {"d_list": [0.7, 0.75, 0.8, 0.85], "n_runs": 300},
    "calibrate": {
        "n_particles": 128,
        "t_sim_s": 20.0,
        "burn_in_s": 0.1,
        "bin_width_nm": 10.0,
    },
    "mi": {"n_samples": 100000},
}


class ConfigError(ValueError):
    """A configuration file failed validation; the message names the key."""


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of every knob a command needs."""

    seed: int
    output_dir: str
    preset: str
    potential: PotentialParams
    sim: SimConfig
    sensor: SensorModel
    mixture: MixtureModel
    t_m: float
    t_relax: float
    tau_ref: float
    d_ref: float
    tau_exponent: float
    erase_d: float
    erase_tau: float | None
    erase_n_runs: int
    erase_kind: str
    sweep_d_list: tuple[float, ...]
    sweep_n_runs: int
    cal_n_particles: int
    cal_t_sim: float
    cal_burn_in: float
    cal_bin_width: float
    mi_n_samples: int
    raw: dict = field(repr=False)


def _merge_strict(defaults: dict, user: dict, prefix: str = "") -> dict:
    merged = {}
    for key, dval in defaults.items():
        path = f"{prefix}{key}"
        if key in user:
            uval = user[key]
            if isinstance(dval, dict):
                if not isinstance(uval, dict):
                    raise ConfigError(f"{path}: expected an object")
                merged[key] = _merge_strict(dval, uval, prefix=f"{path}.")
            else:
                merged[key] = uval
        else:
            merged[key] = dval if not isinstance(dval, dict) else _merge_strict(dval, {}, f"{path}.")
    for key in user:
        if key not in defaults:
            raise ConfigError(f"unknown configuration key: {prefix}{key}")
    return merged


def _require_number(raw: dict, section: str, key: str, allow_none: bool = False):
    val = raw[section][key] if section else raw[key]
    path = f"{section}.{key}" if section else key
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {val!r}")
    return float(val)


def _build(raw: dict) -> RunConfig:
    if raw["preset"] not in ("full", "fast-bath"):
        raise ConfigError(f"preset: must be 'full' or 'fast-bath', got {raw['preset']!r}")
    if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool) or raw["seed"] < 0:
        raise ConfigError(f"seed: must be a nonnegative integer, got {raw['seed']!r}")
    if not isinstance(raw["output_dir"], str):
        raise ConfigError("output_dir: must be a string")

    scale = FAST_BATH_FACTOR if raw["preset"] == "fast-bath" else 1.0

    try:
        potential = PotentialParams(
            k=_require_number(raw, "potential", "k_pN_per_nm"),
            w=_require_number(raw, "potential", "w_nm"),
            L=_require_number(raw, "potential", "L_nm"),
            U_r=_require_number(raw, "potential", "U_r_pNnm"),
        )
    except ValueError as exc:
        raise ConfigError(f"potential: {exc}")

    gamma = _require_number(raw, "sim", "gamma_pNs_per_nm") * scale
    dt = _require_number(raw, "sim", "dt_s", allow_none=True)
    dt = (gamma / potential.k) / 20.0 if dt is None else dt * scale
    stride = raw["sim"]["record_stride"]
    if not isinstance(stride, int) or isinstance(stride, bool):
        raise ConfigError(f"sim.record_stride: expected an integer, got {stride!r}")
    try:
        sim = SimConfig(
            T=_require_number(raw, "sim", "T_K"),
            gamma=gamma,
            dt=dt,
            mode=raw["sim"]["mode"],
            t_mux=_require_number(raw, "sim", "t_mux_s") * scale,
            seed=raw["seed"],
            record_stride=stride,
            escape_bound=_require_number(raw, "sim", "escape_bound_nm"),
        )
        sim.validate_against(potential)
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}")

    try:
        sensor = SensorModel(sigma_n=_require_number(raw, "sensor", "sigma_n_nm"))
    except ValueError as exc:
        raise ConfigError(f"sensor.sigma_n_nm: {exc}")

    try:
        mixture = MixtureModel(
            p=_require_number(raw, "mixture", "p_left"),
            L=potential.L,
            sigma_T=_require_number(raw, "mixture", "sigma_T_nm"),
        )
    except ValueError as exc:
        raise ConfigError(f"mixture: {exc}")

    t_m = _require_number(raw, "protocol", "t_m_s") * scale
    t_relax = _require_number(raw, "protocol", "t_relax_s") * scale
    tau_ref = _require_number(raw, "protocol", "tau_ref_s") * scale
    d_ref = _require_number(raw, "protocol", "d_ref")
    tau_exponent = _require_number(raw, "protocol", "tau_exponent")
    if t_m < 0:
        raise ConfigError(f"protocol.t_m_s: must be >= 0, got {t_m}")
    if t_relax < 0:
        raise ConfigError(f"protocol.t_relax_s: must be >= 0, got {t_relax}")
    if tau_ref <= 0:
        raise ConfigError(f"protocol.tau_ref_s: must be > 0, got {tau_ref}")
    if not (0.5 < d_ref < 1.0):
        raise ConfigError(f"protocol.d_ref: must lie in (0.5, 1), got {d_ref}")

    erase_d = _require_number(raw, "erase", "d")
    if not (0.5 < erase_d < 1.0):
        raise ConfigError(f"erase.d: must lie in (0.5, 1), got {erase_d}")
    erase_tau = _require_number(raw, "erase", "tau_s", allow_none=True)
    if erase_tau is not None:
        erase_tau *= scale
        if erase_tau <= 0:
            raise ConfigError(f"erase.tau_s: must be > 0, got {erase_tau}")
    erase_n = raw["erase"]["n_runs"]
    if not isinstance(erase_n, int) or isinstance(erase_n, bool) or erase_n < 1:
        raise ConfigError(f"erase.n_runs: must be a positive integer, got {erase_n!r}")
    erase_kind = raw["erase"]["kind"]
    if erase_kind not in ("feedback", "open_loop"):
        raise ConfigError(f"erase.kind: must be 'feedback' or 'open_loop', got {erase_kind!r}")

    d_list = raw["sweep"]["d_list"]
    if not isinstance(d_list, list) or not d_list:
        raise ConfigError("sweep.d_list: must be a nonempty list")
    for d in d_list:
        if isinstance(d, bool) or not isinstance(d, (int, float)) or not (0.5 < d < 1.0):
            raise ConfigError(f"sweep.d_list: every duty ratio must lie in (0.5, 1), got {d!r}")
    if len(set(d_list)) != len(d_list):
        raise ConfigError("sweep.d_list: duty ratios must be distinct")
    sweep_n = raw["sweep"]["n_runs"]
    if not isinstance(sweep_n, int) or isinstance(sweep_n, bool) or sweep_n < 1:
        raise ConfigError(f"sweep.n_runs: must be a positive integer, got {sweep_n!r}")

    cal_particles = raw["calibrate"]["n_particles"]
    if not isinstance(cal_particles, int) or isinstance(cal_particles, bool) or cal_particles < 1:
        raise ConfigError(f"calibrate.n_particles: must be a positive integer, got {cal_particles!r}")
    cal_t_sim = _require_number(raw, "calibrate", "t_sim_s") * scale
    cal_burn = _require_number(raw, "calibrate", "burn_in_s") * scale
    cal_bin = _require_number(raw, "calibrate", "bin_width_nm")
    if cal_t_sim <= 0:
        raise ConfigError(f"calibrate.t_sim_s: must be > 0, got {cal_t_sim}")
    if cal_burn < 0:
        raise ConfigError(f"calibrate.burn_in_s: must be >= 0, got {cal_burn}")
    if cal_bin <= 0:
        raise ConfigError(f"calibrate.bin_width_nm: must be > 0, got {cal_bin}")

    mi_n = raw["mi"]["n_samples"]
    if not isinstance(mi_n, int) or isinstance(mi_n, bool) or mi_n < 1000:
        raise ConfigError(f"mi.n_samples: must be an integer >= 1000, got {mi_n!r}")

    return RunConfig(
        seed=raw["seed"],
        output_dir=raw["output_dir"],
        preset=raw["preset"],
        potential=potential,
        sim=sim,
        sensor=sensor,
        mixture=mixture,
        t_m=t_m,
        t_relax=t_relax,
        tau_ref=tau_ref,
        d_ref=d_ref,
        tau_exponent=tau_exponent,
        erase_d=erase_d,
        erase_tau=erase_tau,
        erase_n_runs=erase_n,
        erase_kind=erase_kind,
        sweep_d_list=tuple(float(d) for d in d_list),
        sweep_n_runs=sweep_n,
        cal_n_particles=cal_particles,
        cal_t_sim=cal_t_sim,
        cal_burn_in=cal_burn,
        cal_bin_width=cal_bin,
        mi_n_samples=mi_n,
        raw=raw,
    )


def config_from_dict(user: dict) -> RunConfig:
    """Validate a configuration dict against the schema and fill defaults."""
    if not isinstance(user, dict):
        raise ConfigError("configuration root must be a JSON object")
    return _build(_merge_strict(DEFAULTS, user))


def load_config(path) -> RunConfig:
    """Load and validate a JSON configuration file."""
    if not os.path.exists(path):
        raise ConfigError(f"configuration file not found: {path}")
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})")
    return config_from_dict(user)
