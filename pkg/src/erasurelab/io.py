"""File formats: run records, sweep tables, and JSON reports.

Floats are serialized with 17 significant digits so round-trips are exact
and outputs are byte-stable for a fixed seed.  Missing values (the sensor
fields of open-loop runs) are empty CSV fields.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

from .analysis import EnsembleStats
from .protocol import ErasureRun

RUNS_HEADER = "run_id,d,sigma_n_nm,init_well,x_tm_nm,m_nm,action,W1_kBT,W2_kBT,W_kBT,x_final_nm,success"
SWEEP_HEADER = "d,sigma_n_nm,n,mean_W_kBT,se_W_kBT,p_hat,se_p,zero_mass"


def _f(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.17g}"


def _parse_opt(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def write_runs_csv(runs: Sequence[ErasureRun], path) -> None:
    lines = [RUNS_HEADER]
    for r in runs:
        lines.append(
            ",".join(
                [
                    str(r.run_id),
                    _f(r.d),
                    _f(r.sigma_n),
                    r.initial_well,
                    _f(r.x_at_tm),
                    _f(r.m),
                    r.action,
                    _f(r.W1),
                    _f(r.W2),
                    _f(r.W_total),
                    _f(r.x_final),
                    "true" if r.success else "false",
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_runs_csv(path) -> list[ErasureRun]:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RUNS_HEADER:
        raise ValueError(f"{path}: not a runs CSV (bad header)")
    runs = []
    for line in lines[1:]:
        f = line.split(",")
        if len(f) != 12:
            raise ValueError(f"{path}: malformed row {line!r}")
        runs.append(
            ErasureRun(
                run_id=int(f[0]),
                d=float(f[1]),
                sigma_n=_parse_opt(f[2]),
                initial_well=f[3],
                x_at_tm=float(f[4]),
                m=_parse_opt(f[5]),
                action=f[6],
                W1=float(f[7]),
                W2=float(f[8]),
                W_total=float(f[9]),
                x_final=float(f[10]),
                success=f[11] == "true",
            )
        )
    return runs


def write_sweep_csv(stats: Sequence[EnsembleStats], path) -> None:
    lines = [SWEEP_HEADER]
    for s in stats:
        lines.append(
            ",".join(
                [
                    _f(s.d),
                    _f(s.sigma_n),
                    str(s.n_runs),
                    _f(s.mean_W),
                    _f(s.se_W),
                    _f(s.p_hat),
                    _f(s.se_p),
                    _f(s.zero_mass),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[EnsembleStats]:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SWEEP_HEADER:
        raise ValueError(f"{path}: not a sweep CSV (bad header)")
    stats = []
    for line in lines[1:]:
        f = line.split(",")
        if len(f) != 8:
            raise ValueError(f"{path}: malformed row {line!r}")
        stats.append(
            EnsembleStats(
                d=float(f[0]),
                sigma_n=_parse_opt(f[1]),
                n_runs=int(f[2]),
                mean_W=float(f[3]),
                se_W=float(f[4]),
                p_hat=float(f[5]),
                se_p=float(f[6]),
                zero_mass=float(f[7]),
            )
        )
    return stats


def write_json(obj: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
