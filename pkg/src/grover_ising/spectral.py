"""Closed-form and sampling-based estimates driving the search schedule.

The spectrum of a disordered all-to-all Ising instance is modelled as a
zero-mean Gaussian with deviation ``sigma``.  Everything here follows from
that density: the extreme-energy quantile (erfc tail condition), the
phase-flip evolution time, its large-``N_q`` expansion, the Grover iteration
count, the ground-state gap estimates, and the bitstring-sample budget needed
to pin ``sigma`` accurately enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .ising import IsingInstance, PAIR_COUNT, pair_indices


@dataclass(frozen=True)
class SpectralModel:
    """Gaussian spectral model: deviation sigma over 2**n_qubits levels."""

    sigma: float
    n_qubits: int

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")

    @property
    def n_states(self) -> int:
        return 1 << self.n_qubits


@dataclass(frozen=True)
class GroverSchedule:
    """Evolution time and iteration count, tagged with how they were chosen.

    ``iterations == 0`` is allowed and means "initialize only" (used by
    ensemble baselines).
    """

    evolution_time: float
    iterations: int
    origin: str = "manual"  # analytic | grid-tuned | feedback-tuned | manual

    def __post_init__(self) -> None:
        if self.evolution_time <= 0 or not math.isfinite(self.evolution_time):
            raise ValueError("evolution_time must be positive and finite")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.origin not in ("analytic", "grid-tuned", "feedback-tuned", "manual"):
            raise ValueError(f"unknown schedule origin: {self.origin!r}")


def tail_condition(x: float, n_qubits: int) -> float:
    """Residual of the extreme-quantile equation: erfc(x/sqrt(2))/2 - 2**-n_qubits."""
    return 0.5 * special.erfc(x / math.sqrt(2.0)) - 2.0 ** (-n_qubits)


def extreme_quantile(model: SpectralModel) -> float:
    """|e*_min|: dimensionless magnitude of the estimated extreme energy.

    Solves ``erfc(x / sqrt 2) / 2 = 2**-n_qubits`` by bisection on [0, 10] to
    relative tolerance 1e-12.  By symmetry ``e*_max = -e*_min``.
    """
    n_q = model.n_qubits
    lo, hi = 0.0, 10.0
    f_lo = tail_condition(lo, n_q)
    if f_lo == 0.0:
        return 0.0
    if f_lo < 0.0 or tail_condition(hi, n_q) > 0.0:
        raise ValueError("quantile root not bracketed on [0, 10]")
    while hi - lo > 1e-12 * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if tail_condition(mid, n_q) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_time(model: SpectralModel) -> float:
    """Mean-optimal evolution time: the phase flip |E*_min| * T = pi."""
    x = extreme_quantile(model)
    if x == 0.0:
        return math.inf
    return math.pi / (model.sigma * x)


def asymptotic_time(model: SpectralModel) -> float:
    """Large-N_q expansion of :func:`optimal_time`.

    First-order inverse-quantile expansion with the full logarithm retained:
    T ~ (pi / (sigma sqrt(2 ln2 N_q))) * (1 + ln(4 pi ln2 N_q) / (4 ln2 N_q)).
    Keeping the additive constant inside the log keeps the expansion within a
    few percent of the exact erfc root already at N_q ~ 10.
    """
    lam = model.n_qubits * math.log(2.0)  # ln(N_s)
    leading = math.pi / (model.sigma * math.sqrt(2.0 * lam))
    return leading * (1.0 + math.log(4.0 * math.pi * lam) / (4.0 * lam))


def optimal_iterations(n_states: int, degenerate_pair: bool) -> int:
    """Grover iteration count: round(pi/4 sqrt(N_s / 2)) for a marked +/- pair,
    round(pi/4 sqrt(N_s)) for a single marked state.  Nearest integer, floor 1.
    """
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    effective = n_states / 2.0 if degenerate_pair else float(n_states)
    return max(1, int(math.floor(0.25 * math.pi * math.sqrt(effective) + 0.5)))


def analytic_schedule(sigma: float, n_qubits: int, degenerate_pair: bool = True) -> GroverSchedule:
    """Schedule (T*, n*) from a known spectral deviation."""
    model = SpectralModel(sigma=sigma, n_qubits=n_qubits)
    return GroverSchedule(
        evolution_time=optimal_time(model),
        iterations=optimal_iterations(model.n_states, degenerate_pair),
        origin="analytic",
    )


def gap_estimate(model: SpectralModel) -> float:
    """Leading-order mean ground-state gap: sigma / sqrt(2 ln N_s)."""
    return model.sigma / math.sqrt(2.0 * model.n_qubits * math.log(2.0))


def gap_quantile(model: SpectralModel) -> float:
    """Exact Gaussian-quantile gap: sigma * (Phi^-1(2/N_s) - Phi^-1(1/N_s))."""
    n_s = model.n_states
    if n_s < 4:
        raise ValueError("quantile gap needs n_states >= 4")
    return model.sigma * float(stats.norm.ppf(2.0 / n_s) - stats.norm.ppf(1.0 / n_s))


def quantile_asymptotic(n_states: int) -> float:
    """Asymptotic lower quantile: Phi^-1(1/N_s) ~ -sqrt(2 ln(N_s / sqrt(4 pi ln N_s)))."""
    log_ns = math.log(n_states)
    return -math.sqrt(2.0 * math.log(n_states / math.sqrt(4.0 * math.pi * log_ns)))


def critical_gap(schedule: GroverSchedule) -> float:
    """Gap scale below which a nearby level disturbs the search: 2 pi / (T n).

    At the analytic schedule this shrinks like 1/sqrt(N_s).
    """
    if schedule.iterations < 1:
        raise ValueError("critical gap needs at least one iteration")
    return 2.0 * math.pi / (schedule.evolution_time * schedule.iterations)


def required_samples(n_qubits: int, safety: float = 100.0) -> int:
    """Bitstring samples needed to pin sigma: ceil(safety * N_q**2).

    The induced iteration-count error scales like N_q / sqrt(M); the default
    safety factor 100 puts it near 0.1.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if safety <= 0:
        raise ValueError("safety must be positive")
    return int(math.ceil(safety * n_qubits * n_qubits))


def estimate_sigma(
    instance: IsingInstance, m_samples: int, seed: int = 0
) -> tuple[float, float]:
    """Sample-based spectral deviation from uniform random bitstrings.

    Draws ``m_samples`` configurations with replacement, evaluates their
    energies (O(N_q^2) each), and returns the sample standard deviation plus
    its ~sigma/sqrt(2M) standard error.  The RNG stream depends only on
    ``seed``, not on evaluation order.
    """
    if m_samples < 2:
        raise ValueError("m_samples must be >= 2")
    rng = np.random.default_rng(seed)
    n = instance.n_qubits
    bits = rng.integers(0, instance.n_states, size=m_samples, dtype=np.int64)
    spins = 1.0 - 2.0 * ((bits[:, None] >> np.arange(n)[None, :]) & 1)
    i_idx, j_idx = pair_indices(n)
    energies = spins @ instance.fields + (spins[:, i_idx] * spins[:, j_idx]) @ (
        PAIR_COUNT * instance.couplings
    )
    sigma_hat = float(energies.std(ddof=1))
    return sigma_hat, sigma_hat / math.sqrt(2.0 * m_samples)
