#!/usr/bin/env python3
"""
Monte Carlo law of the supremum at an independent exponential time.

The jump part is simulated exactly as a superposition of compound Poisson processes,
one per exponential term of the Levy density. Terms beyond the first n_series_terms
are replaced by their Gaussian moment match. Between consecutive points of a time grid
merged with the jump epochs the Gaussian part is a Brownian bridge, whose maximum is
sampled exactly, so the grid step does not bias the supremum.
"""

import json
import math
import sys
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import stats

from theta_wiener_hopf.errors import ConfigurationError
from theta_wiener_hopf.model import SCHEMA_VERSION, ExpSeriesMeasure, SeriesProcess, ThetaProcess
from theta_wiener_hopf.model_base import LevyModel
from theta_wiener_hopf.roots import ModelLike, as_model


@dataclass(frozen=True)
class SimConfig:
    """
    Simulation settings.

    :param n_paths: Number of simulated paths
    :type n_paths: int
    :param n_series_terms: Exponential terms per side simulated as jumps
    :type n_series_terms: int
    :param time_grid_dt: Grid step of the Gaussian increments (the bridge maximum makes the supremum exact for any step)
    :type time_grid_dt: float
    :param rng_seed: Seed of the per-batch random streams
    :type rng_seed: int
    :param q: Killing rate of the exponential horizon
    :type q: float
    :param batch_size: Paths per random stream
    :type batch_size: int
    :param max_expected_jumps: Cap on the expected total number of simulated jumps
    :type max_expected_jumps: float
    """

    n_paths: int = 10_000
    n_series_terms: int = 200
    time_grid_dt: float = 1e-3
    rng_seed: int = 0
    q: float = 1.0
    batch_size: int = 1024
    max_expected_jumps: float = 1e8

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ConfigurationError(f"n_paths must be at least 1, got {self.n_paths}")
        if not self.time_grid_dt > 0:
            raise ConfigurationError(f"time_grid_dt must be positive, got {self.time_grid_dt}")
        if not self.q > 0:
            raise ConfigurationError(f"q must be positive, got {self.q}")
        if self.n_series_terms < 0:
            raise ConfigurationError(f"n_series_terms must be nonnegative, got {self.n_series_terms}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be at least 1, got {self.batch_size}")


@dataclass(frozen=True)
class EmpiricalLaw:
    """
    Sorted supremum sample with optional goodness-of-fit results.

    :param samples: Sorted nonnegative supremum values
    :type samples: np.ndarray
    :param ks: Kolmogorov-Smirnov statistic against a reference, if computed
    :type ks: Optional[float]
    :param p_value: KS p-value, if computed
    :type p_value: Optional[float]
    """

    samples: np.ndarray
    ks: Optional[float] = None
    p_value: Optional[float] = None

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def atom_frequency(self) -> float:
        """Fraction of paths whose supremum is exactly zero."""
        return float(np.mean(self.samples == 0.0)) if self.n else 0.0


@dataclass(frozen=True)
class JumpPlan:
    """Simulated jump terms and the Gaussian replacement of everything else."""

    rates: np.ndarray
    sizes: np.ndarray
    signs: np.ndarray
    total_rate: float
    drift: float
    variance: float


def _measure_and_convention(model: LevyModel) -> Tuple[ExpSeriesMeasure, float, bool]:
    if isinstance(model, ThetaProcess):
        return model.measure(), model.family.mu, model.family.compensated
    if isinstance(model, SeriesProcess):
        return model.measure(), model.mu, True
    raise ConfigurationError(f"cannot simulate a {type(model).__name__}")


def jump_plan(p: ModelLike, cfg: SimConfig) -> JumpPlan:
    """
    Split the Levy measure into simulated compound Poisson terms and a Gaussian remainder.

    Compensated models (mean mu) subtract the simulated terms' means from the drift;
    uncompensated ones (linear drift mu) add the omitted terms' means instead.
    """
    model = as_model(p)
    measure, mu, compensated = _measure_and_convention(model)
    count = cfg.n_series_terms
    a, rho = measure.arrays("pos", count)
    a_hat, rho_hat = measure.arrays("neg", count)
    if compensated:
        drift = mu - (math.fsum(a / rho) - math.fsum(a_hat / rho_hat))
    else:
        drift = mu + measure.moment_sum("pos", 1.0, start=count + 1) - measure.moment_sum("neg", 1.0, start=count + 1)
    variance = model.sigma ** 2 + 2.0 * (measure.moment_sum("pos", 2.0, start=count + 1)
                                         + measure.moment_sum("neg", 2.0, start=count + 1))
    rates = np.concatenate((a, a_hat))
    total_rate = math.fsum(rates)
    if not math.isfinite(total_rate):
        raise ConfigurationError("total jump intensity overflows; lower n_series_terms")
    return JumpPlan(rates=rates, sizes=np.concatenate((rho, rho_hat)),
                    signs=np.concatenate((np.ones(a.size), -np.ones(a_hat.size))),
                    total_rate=total_rate, drift=drift, variance=variance)


def _path_supremum(rng: np.random.Generator, plan: JumpPlan, cfg: SimConfig) -> float:
    horizon = rng.exponential(1.0 / cfg.q)
    n_jumps = rng.poisson(plan.total_rate * horizon) if plan.total_rate > 0 else 0
    epochs = rng.uniform(0.0, horizon, n_jumps)
    if n_jumps:
        terms = rng.choice(plan.rates.size, size=n_jumps, p=plan.rates / plan.total_rate)
        jumps = plan.signs[terms] * rng.exponential(1.0 / plan.sizes[terms])
    else:
        jumps = np.zeros(0)
    grid = np.arange(1, math.floor(horizon / cfg.time_grid_dt) + 1) * cfg.time_grid_dt
    times = np.concatenate((grid, [horizon], epochs))
    sizes = np.concatenate((np.zeros(grid.size + 1), jumps))
    order = np.argsort(times, kind="stable")
    times, sizes = times[order], sizes[order]
    steps = np.diff(times, prepend=0.0)
    diffusion = rng.normal(plan.drift * steps, np.sqrt(plan.variance * steps))
    post = np.cumsum(diffusion + sizes)
    pre = post - sizes
    if plan.variance == 0:
        return max(0.0, float(post.max()), float(pre.max()))
    # Maximum of the Brownian bridge from the previous post-jump value to the next pre-jump value
    start = np.concatenate(([0.0], post[:-1]))
    log_u = np.log1p(-rng.random(steps.size))
    peak = 0.5 * (start + pre + np.sqrt((pre - start) ** 2 - 2.0 * plan.variance * steps * log_u))
    return max(0.0, float(post.max()), float(peak.max()))


def simulate_sup(p: ModelLike, cfg: SimConfig) -> EmpiricalLaw:
    """
    Sample the supremum of X over [0, e(q)].

    Paths are grouped in batches; batch b draws from SeedSequence(rng_seed, spawn_key=(b,)),
    so results depend only on the seed and the batch size.

    :param p: Family or model
    :type p: ModelLike
    :param cfg: Simulation settings
    :type cfg: SimConfig
    :return: Sorted sample
    :rtype: EmpiricalLaw
    :raises ConfigurationError: If the expected number of jumps is unmanageable
    """
    plan = jump_plan(p, cfg)
    expected = plan.total_rate / cfg.q * cfg.n_paths
    if expected > cfg.max_expected_jumps:
        raise ConfigurationError(
            f"about {expected:.3g} jumps expected; lower n_series_terms (the remainder is simulated as diffusion)")
    samples = np.empty(cfg.n_paths)
    for start in range(0, cfg.n_paths, cfg.batch_size):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(start // cfg.batch_size,)))
        for i in range(start, min(start + cfg.batch_size, cfg.n_paths)):
            samples[i] = _path_supremum(rng, plan, cfg)
    return EmpiricalLaw(samples=np.sort(samples))


def _evaluate_cdf(cdf: Callable, x: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(cdf(x), dtype=float)
        if values.shape == x.shape:
            return values
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(v)) for v in x])


def ks_statistic(emp: EmpiricalLaw, cdf: Callable) -> float:
    """
    Two-sided Kolmogorov-Smirnov distance between the sample and a reference CDF.

    The reference is treated as continuous on (0, inf) with a possible atom at 0, whose
    left limit is 0.

    :param emp: Sample
    :type emp: EmpiricalLaw
    :param cdf: Reference CDF (vectorized or scalar)
    :type cdf: Callable
    :return: sup |F_emp - F|
    :rtype: float
    """
    x = emp.samples
    n = x.size
    if n == 0:
        raise ConfigurationError("KS statistic of an empty sample")
    F = _evaluate_cdf(cdf, x)
    F_left = np.where(x <= 0.0, 0.0, F)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(F_left - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def ks_test(emp: EmpiricalLaw, cdf: Callable) -> EmpiricalLaw:
    """Sample with KS statistic and p-value attached."""
    ks = ks_statistic(emp, cdf)
    return replace(emp, ks=ks, p_value=float(stats.kstwo.sf(ks, emp.n)))


def dump_samples(emp: EmpiricalLaw, path: str) -> None:
    """
    Write the raw sample as float64 to path and a JSON header to path + ".json".
    """
    emp.samples.astype(np.float64).tofile(path)
    header = {
        "schema_version": SCHEMA_VERSION,
        "n": emp.n,
        "dtype": "float64",
        "byteorder": sys.byteorder,
        "atom_frequency": emp.atom_frequency,
        "ks": emp.ks,
        "p_value": emp.p_value,
    }
    with open(path + ".json", 'w') as f:
        json.dump(header, f, indent=2)


def load_samples(path: str) -> EmpiricalLaw:
    with open(path + ".json", 'r') as f:
        header = json.load(f)
    samples = np.fromfile(path, dtype=np.float64, count=header["n"])
    return EmpiricalLaw(samples=samples, ks=header.get("ks"), p_value=header.get("p_value"))
