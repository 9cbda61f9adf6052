"""Stochastic work accounting and the information-thermodynamic ledger.

An erasure does work only at the two instants where the duty ratio jumps:
each switch contributes the potential-energy difference at the frozen
particle position, evaluated with the duty-averaged potential (the duty
ratio, not the instantaneous laser location, is the thermodynamic control
parameter).  The ledger compares the ensemble-averaged feedback work with
the bound glb(p) - I, where glb is the generalized Landauer bound for an
erasure succeeding with probability p and I is the measurement mutual
information; the gap below ln 2 is exactly paid for by the measurement,
whose combined acquisition-plus-reset cost is bounded below by k_B T I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .potential import PotentialParams, effective_energy
from .units import kbt

LN2 = math.log(2.0)


def switch_work(
    x, d_old: float, d_new: float, params: PotentialParams, T: float = 300.0
):
    """Work of an instantaneous duty switch at fixed position, in k_B T.

    Returns [U_eff(x, d_new) - U_eff(x, d_old)] / k_B T; zero on the
    plateau, where the effective potential does not depend on d.  Accepts
    scalar or array x.
    """
    du = effective_energy(x, d_new, params) - effective_energy(x, d_old, params)
    return du / kbt(T)


def glb(p: float) -> float:
    """Generalized Landauer bound ln2 + p ln p + (1-p) ln(1-p), in k_B T.

    The minimum average work to erase one bit with success probability p;
    recovers ln 2 at p = 1 and vanishes at p = 1/2 (0 ln 0 = 0 convention).
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    h = 0.0
    if 0.0 < p < 1.0:
        h = p * math.log(p) + (1.0 - p) * math.log(1.0 - p)
    return LN2 + h


def feedback_bound(I: float, p: float) -> float:
    """Lower bound glb(p) - I on the average feedback work, in k_B T.

    With perfect erasure this is ln2 - I; it may be negative, in which
    case the second law constrains the feedback phase not at all.
    """
    if I < 0:
        raise ValueError(f"mutual information must be >= 0, got {I}")
    return glb(p) - I


@dataclass(frozen=True)
class LedgerReport:
    """Per-phase second-law accounting for a feedback-erasure ensemble.

    Energies in k_B T, information in nats.  bound_fb = glb(p) - I is the
    feedback-work bound; bound_meas_plus_reset = I is the combined minimum
    cost of acquiring and clearing the measurement record.  satisfied
    flags mean_W_fb >= bound_fb within two standard errors.
    """

    mean_W_fb: float
    se_W_fb: float
    delta_F_particle: float
    I: float
    bound_fb: float
    bound_meas_plus_reset: float
    slack_fb: float
    satisfied: bool
    n_runs: int
    p_used: float

    def to_dict(self) -> dict:
        return {
            "mean_W_fb": self.mean_W_fb,
            "se_W_fb": self.se_W_fb,
            "delta_F_particle": self.delta_F_particle,
            "I": self.I,
            "bound_fb": self.bound_fb,
            "bound_meas_plus_reset": self.bound_meas_plus_reset,
            "slack_fb": self.slack_fb,
            "satisfied": self.satisfied,
            "n_runs": self.n_runs,
            "p_used": self.p_used,
        }


def ledger_check(
    runs: Sequence, I: float, p_target: Optional[float] = None
) -> LedgerReport:
    """Build the second-law ledger from an ensemble of erasure runs.

    Uses the empirical success rate unless p_target overrides it (e.g. to
    evaluate the bound at a nominal target probability).  Requires at
    least 30 runs for a meaningful standard error.
    """
    if len(runs) < 30:
        raise ValueError(f"ledger needs at least 30 runs, got {len(runs)}")
    if I < 0:
        raise ValueError(f"mutual information must be >= 0, got {I}")
    w = np.array([r.W_total for r in runs])
    mean_w = float(np.mean(w))
    se_w = float(np.std(w, ddof=1) / math.sqrt(len(runs)))
    p_hat = float(np.mean([r.success for r in runs]))
    p_used = p_hat if p_target is None else float(p_target)
    delta_f = glb(p_used)
    bound = delta_f - I
    slack = mean_w - bound
    return LedgerReport(
        mean_W_fb=mean_w,
        se_W_fb=se_w,
        delta_F_particle=delta_f,
        I=I,
        bound_fb=bound,
        bound_meas_plus_reset=I,
        slack_fb=slack,
        satisfied=bool(slack > -2.0 * se_w),
        n_runs=len(runs),
        p_used=p_used,
    )
