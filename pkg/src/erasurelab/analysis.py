"""Ensemble statistics, work distributions, and the quasistatic extrapolation.

The average feedback work for a duty-ratio sweep is fitted by weighted
least squares to

    <W>(d) = A + B * exp(-0.99/(d - 0.5)) / sqrt(d - 0.5),

whose regressor vanishes as d -> 0.5, so the intercept A estimates the
quasistatic work.  The deficit ln2 - A is then compared against the
measurement mutual information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .energetics import LN2
from .protocol import ErasureRun


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregates of one (d, sigma_n) ensemble; work in k_B T."""

    d: float
    sigma_n: Optional[float]
    n_runs: int
    mean_W: float
    se_W: float
    p_hat: float
    se_p: float
    zero_mass: float


def _same_sigma(a: Optional[float], b: Optional[float]) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a == b


def aggregate(runs: Sequence[ErasureRun]) -> EnsembleStats:
    """Mean work, success rate, and zero-work mass of a uniform ensemble.

    All runs must share the same duty ratio and sensor noise; the standard
    error of p_hat is the binomial estimate sqrt(p(1-p)/n).
    """
    if len(runs) < 2:
        raise ValueError(f"need at least 2 runs to aggregate, got {len(runs)}")
    d = runs[0].d
    sigma_n = runs[0].sigma_n
    for r in runs:
        if r.d != d or not _same_sigma(r.sigma_n, sigma_n):
            raise ValueError("mixed (d, sigma_n) ensembles cannot be aggregated")
    w = np.array([r.W_total for r in runs])
    succ = np.array([r.success for r in runs], dtype=float)
    n = len(runs)
    p_hat = float(succ.mean())
    return EnsembleStats(
        d=d,
        sigma_n=sigma_n,
        n_runs=n,
        mean_W=float(w.mean()),
        se_W=float(w.std(ddof=1) / math.sqrt(n)),
        p_hat=p_hat,
        se_p=float(math.sqrt(p_hat * (1.0 - p_hat) / n)),
        zero_mass=float(np.mean(w == 0.0)),
    )


@dataclass(frozen=True)
class WorkHistogram:
    """Work distribution with the exactly-zero runs split into a point mass.

    zero_mass is the probability atom at W = 0; the remaining probability
    is binned with uniform width.  All masses sum to one.
    """

    zero_mass: float
    bin_edges: np.ndarray
    bin_masses: np.ndarray
    n_runs: int


def work_histogram(runs: Sequence[ErasureRun], bin_width: float) -> WorkHistogram:
    """Histogram W_total with a dedicated atom for zero-work (no-action) runs."""
    if bin_width <= 0:
        raise ValueError(f"bin width must be > 0, got {bin_width}")
    w = np.array([r.W_total for r in runs])
    n = w.size
    zero = w == 0.0
    nonzero = w[~zero]
    if nonzero.size == 0:
        edges = np.array([0.0, bin_width])
        masses = np.array([0.0])
    else:
        lo = math.floor(nonzero.min() / bin_width) * bin_width
        hi = math.ceil(nonzero.max() / bin_width) * bin_width
        if hi <= lo:
            hi = lo + bin_width
        nbins = int(round((hi - lo) / bin_width))
        edges = lo + bin_width * np.arange(nbins + 1)
        counts, _ = np.histogram(nonzero, bins=edges)
        masses = counts / n
    return WorkHistogram(
        zero_mass=float(np.sum(zero) / n),
        bin_edges=edges,
        bin_masses=masses,
        n_runs=n,
    )


def work_regressor(d) -> np.ndarray:
    """The fit regressor g(d) = exp(-0.99/(d-0.5)) / sqrt(d-0.5), zero as d -> 0.5."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.5):
        raise ValueError("regressor requires d > 0.5")
    u = d - 0.5
    return np.exp(-0.99 / u) / np.sqrt(u)


@dataclass(frozen=True)
class FitResult:
    """WLS estimates of the work model intercept A and amplitude B, k_B T.

    cov is the 2x2 parameter covariance (X' W X)^-1; chi2 the weighted
    residual sum of squares with dof = n_points - 2.
    """

    A: float
    B: float
    cov: np.ndarray
    chi2: float
    dof: int

    @property
    def se_A(self) -> float:
        return float(math.sqrt(self.cov[0, 0]))

    @property
    def se_B(self) -> float:
        return float(math.sqrt(self.cov[1, 1]))

    def model(self, d) -> np.ndarray:
        return self.A + self.B * work_regressor(d)

    def to_dict(self) -> dict:
        return {
            "A_kBT": self.A,
            "B_kBT": self.B,
            "se_A_kBT": self.se_A,
            "se_B_kBT": self.se_B,
            "cov_kBT2": [list(row) for row in self.cov.tolist()],
            "chi2": self.chi2,
            "dof": self.dof,
        }


def fit_work_model(points: Sequence[EnsembleStats]) -> FitResult:
    """Weighted least squares of mean work on [1, g(d)] with weights 1/se_W^2."""
    if len(points) < 3:
        raise ValueError(f"fit needs at least 3 sweep points, got {len(points)}")
    d = np.array([p.d for p in points])
    y = np.array([p.mean_W for p in points])
    se = np.array([p.se_W for p in points])
    if np.any(d <= 0.5):
        raise ValueError("all sweep points must have d > 0.5")
    if np.any(se <= 0):
        raise ValueError("all sweep points must carry positive se_W")
    X = np.column_stack([np.ones_like(d), work_regressor(d)])
    wts = 1.0 / se**2
    xtwx = X.T @ (X * wts[:, None])
    xtwy = X.T @ (y * wts)
    try:
        beta = np.linalg.solve(xtwx, xtwy)
        cov = np.linalg.inv(xtwx)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular normal equations (degenerate d values): {exc}")
    resid = y - X @ beta
    chi2 = float(np.sum(wts * resid**2))
    return FitResult(A=float(beta[0]), B=float(beta[1]), cov=cov, chi2=chi2, dof=len(points) - 2)


@dataclass(frozen=True)
class DeficitReport:
    """Energy deficit ln2 - A against the mutual information, k_B T vs nats."""

    deficit: float
    se_deficit: float
    I: float
    difference: float
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "deficit_kBT": self.deficit,
            "se_deficit_kBT": self.se_deficit,
            "I_nats": self.I,
            "difference": self.difference,
            "consistent": self.consistent,
        }


def deficit_report(fit: FitResult, I: float) -> DeficitReport:
    """Compare the quasistatic work deficit below ln 2 with the mutual information."""
    deficit = LN2 - fit.A
    diff = deficit - I
    return DeficitReport(
        deficit=float(deficit),
        se_deficit=fit.se_A,
        I=float(I),
        difference=float(diff),
        consistent=bool(abs(diff) <= 2.0 * fit.se_A),
    )
