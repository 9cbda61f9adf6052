"""Noisy position sensor, feedback decision rule, and mutual information.

The sensor reports m = x + eta with eta ~ N(0, sigma_n^2).  With the
particle position modeled as a two-component Gaussian mixture

    f_X = p N(-L, sigma_T^2) + (1 - p) N(+L, sigma_T^2),

the measurement is the mixture broadened by the sensor noise, and the
mutual information I(X; M) = h(M) - h(eta) follows from the mixture
entropy, computed here by adaptive quadrature or by a plug-in Monte Carlo
estimate.  All information quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp
from scipy.stats import norm

ACT = "act"
NO_ACTION = "no_action"


@dataclass(frozen=True)
class SensorModel:
    """Additive Gaussian measurement noise with standard deviation sigma_n (nm)."""

    sigma_n: float = 300.0

    def __post_init__(self) -> None:
        if self.sigma_n < 0:
            raise ValueError(f"sigma_n must be >= 0, got {self.sigma_n}")


@dataclass(frozen=True)
class MixtureModel:
    """Two-well position density: p N(-L, sigma_T^2) + (1-p) N(+L, sigma_T^2)."""

    p: float = 0.5
    L: float = 550.0
    sigma_T: float = 43.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"left-well probability must lie in [0, 1], got {self.p}")
        if self.sigma_T <= 0:
            raise ValueError(f"thermal spread sigma_T must be > 0, got {self.sigma_T}")


def sample_measurement(x: float, sensor: SensorModel, noise: float) -> float:
    """Sensor output m = x + sigma_n * noise for a standard-normal draw."""
    if not math.isfinite(x):
        raise ValueError(f"position must be finite, got {x}")
    return x + sensor.sigma_n * noise


def decide_action(m: float) -> str:
    """Feedback rule: tilt only for strictly positive readings (m = 0 maps to no action)."""
    if not math.isfinite(m):
        raise ValueError(f"measurement must be finite, got {m}")
    return ACT if m > 0 else NO_ACTION


def _measurement_density(mix: MixtureModel, sensor: SensorModel):
    """Density of M and its log, as closures over the broadened mixture."""
    var = mix.sigma_T**2 + sensor.sigma_n**2
    s = math.sqrt(var)
    log_norm = -0.5 * math.log(2.0 * math.pi * var)
    weights = np.array([mix.p, 1.0 - mix.p])
    log_w = np.full(2, -np.inf)  # weights may be 0 at p in {0, 1}
    np.log(weights, where=weights > 0, out=log_w)
    mus = np.array([-mix.L, mix.L])

    def logpdf(m):
        m = np.asarray(m, dtype=float)
        z = (m[..., None] - mus) / s
        return logsumexp(log_w + log_norm - 0.5 * z**2, axis=-1)

    def pdf(m):
        return np.exp(logpdf(m))

    return pdf, logpdf, s


def mi_quadrature(mix: MixtureModel, sensor: SensorModel) -> float:
    """Mutual information I(X; M) in nats via adaptive quadrature of h(M).

    I = h(M) - h(eta) with h(eta) = ln(2 pi e sigma_n^2) / 2.  Requires
    sigma_n > 0; a noiseless sensor has divergent information about a
    continuous position.
    """
    if sensor.sigma_n <= 0:
        raise ValueError("mutual information diverges for sigma_n = 0")
    pdf, logpdf, s = _measurement_density(mix, sensor)

    def integrand(m):
        f = float(pdf(m))
        return -f * float(logpdf(m)) if f > 0 else 0.0

    lo, hi = -(mix.L + 10.0 * s), mix.L + 10.0 * s
    h_m, _ = integrate.quad(
        integrand, lo, hi, limit=400, epsabs=1e-6, epsrel=1e-9,
        points=[-mix.L, 0.0, mix.L],
    )
    h_eta = 0.5 * math.log(2.0 * math.pi * math.e * sensor.sigma_n**2)
    return float(h_m - h_eta)


@dataclass(frozen=True)
class MIEstimate:
    """Plug-in Monte Carlo mutual information with its standard error, nats."""

    value: float
    se: float
    n_samples: int


def mi_monte_carlo(
    samples: np.ndarray, mix: MixtureModel, sensor: SensorModel
) -> MIEstimate:
    """Plug-in estimate (1/N) sum ln f_eta(m - x) - ln f_M(m) from paired samples.

    samples is an (N, 2) array of (x, m) pairs with N >= 1000; the mixture
    and sensor supply the analytic densities.
    """
    if sensor.sigma_n <= 0:
        raise ValueError("mutual information diverges for sigma_n = 0")
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError("samples must be an (N, 2) array of (x, m) pairs")
    n = samples.shape[0]
    if n < 1000:
        raise ValueError(f"need at least 1000 paired samples, got {n}")
    x, m = samples[:, 0], samples[:, 1]
    _, logpdf_m, _ = _measurement_density(mix, sensor)
    log_f_eta = norm.logpdf(m - x, scale=sensor.sigma_n)
    terms = log_f_eta - logpdf_m(m)
    return MIEstimate(
        value=float(np.mean(terms)),
        se=float(np.std(terms, ddof=1) / math.sqrt(n)),
        n_samples=n,
    )


def draw_mixture_pairs(
    mix: MixtureModel, sensor: SensorModel, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample (x, m) pairs from the mixture-plus-sensor model."""
    left = rng.random(n) < mix.p
    x = np.where(left, -mix.L, mix.L) + mix.sigma_T * rng.standard_normal(n)
    m = x + sensor.sigma_n * rng.standard_normal(n)
    return np.column_stack([x, m])


@dataclass(frozen=True)
class ErasureProbability:
    """Closed-form feedback erasure probability; out-of-range values are reported, not clamped."""

    value: float
    out_of_range: bool


def erasure_prob_analytic(
    p_ol: float, mix: MixtureModel, sensor: SensorModel
) -> ErasureProbability:
    """Feedback success probability p_ol - Phi(-L / sqrt(sigma_T^2 + sigma_n^2)) / 2.

    The correction is the chance that a right-well particle is misread as
    already reset, so no tilt happens and the erasure fails.
    """
    if not (0.0 <= p_ol <= 1.0):
        raise ValueError(f"open-loop probability must lie in [0, 1], got {p_ol}")
    s = math.sqrt(mix.sigma_T**2 + sensor.sigma_n**2)
    value = p_ol - 0.5 * norm.cdf(-mix.L / s)
    return ErasureProbability(value=float(value), out_of_range=not (0.0 <= value <= 1.0))
