"""Ensemble harness: run many disorder realizations and aggregate.

Per-realization seeds are derived from the master seed with a counter-based
splitting scheme (``numpy.random.SeedSequence(master, spawn_key=(i, tag))``),
so adding realizations never perturbs earlier ones and results are fully
deterministic for a given configuration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import engine, tuning
from .ising import (
    IsingInstance,
    Spectrum,
    enumerate_energies_batch,
    enumerate_spectrum,
    sample_instance,
)
from .spectral import (
    GroverSchedule,
    SpectralModel,
    asymptotic_time,
    gap_estimate,
    optimal_iterations,
    optimal_time,
)

SCHEDULE_POLICIES = ("analytic", "grid", "feedback")


def derive_seed(master: int, *path: int) -> int:
    """Counter-based child seed: SeedSequence(master, spawn_key=path)."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ExperimentConfig:
    """Settings for one ensemble run."""

    n_qubits: int = 10
    sigma_eps: float = 2.0
    sigma_j: float = 2.0
    realizations: int = 100
    schedule: str = "analytic"
    seed: int = 0
    bins: int = 60
    evolution_time: float | None = None  # overrides the analytic T*
    iterations: int | None = None  # overrides the analytic n*
    degenerate_pair: bool = True
    grid_points: int = 20
    shots: int = 1024
    feedback_rounds: int = 5
    threads: int = 1
    keep_probabilities: bool = False
    kind: str = "custom"

    def validate(self) -> None:
        problems = []
        if self.n_qubits < 1:
            problems.append("n_qubits must be >= 1")
        if self.n_qubits > 20:
            problems.append("n_qubits > 20 is not supported by the ensemble harness")
        if self.sigma_eps <= 0 or self.sigma_j <= 0:
            problems.append("sigma_eps and sigma_j must be positive")
        if self.realizations < 1:
            problems.append("realizations must be >= 1")
        if self.bins < 2:
            problems.append("bins must be >= 2")
        if self.schedule not in SCHEDULE_POLICIES:
            problems.append(f"schedule must be one of {SCHEDULE_POLICIES}")
        if self.evolution_time is not None and self.evolution_time <= 0:
            problems.append("evolution_time must be positive")
        if self.iterations is not None and self.iterations < 0:
            problems.append("iterations must be >= 0")
        if self.grid_points < 2:
            problems.append("grid_points must be >= 2")
        if self.shots < 1:
            problems.append("shots must be >= 1")
        if self.threads < 1:
            problems.append("threads must be >= 1")
        if problems:
            raise ValueError("invalid configuration: " + "; ".join(problems))


@dataclass
class RealizationRecord:
    """Summary of one disorder realization."""

    index: int
    instance_seed: int
    sigma: float
    evolution_time: float
    iterations: int
    p_min: float
    p_max: float
    verified: bool
    probabilities: np.ndarray | None = None

    @property
    def p_success(self) -> float:
        return self.p_min + self.p_max


@dataclass
class Histogram:
    """Binned mass plus the unit-area density derived from it."""

    edges: np.ndarray
    mass: np.ndarray
    density: np.ndarray


@dataclass
class BinnedProfile:
    """Mean probability per bin of a scatter (P_j against E_j or xi_j)."""

    edges: np.ndarray
    mean_probability: np.ndarray
    counts: np.ndarray


@dataclass
class EnsembleResult:
    config: ExperimentConfig
    records: list[RealizationRecord]
    energy_hist: Histogram
    energy_initial: Histogram
    xi_hist: Histogram
    xi_initial: Histogram
    energy_profile: BinnedProfile
    xi_profile: BinnedProfile
    verified_fraction: float

    @property
    def mean_extreme_probability(self) -> float:
        return float(np.mean([r.p_success for r in self.records]))


def brute_force_extremes(instance: IsingInstance) -> tuple[int, int, float, float]:
    """Exhaustive scan for the lowest/highest-energy configurations.

    Independent of the enumeration path used elsewhere: spins are derived via
    an explicit parity loop over stored pairs, scanning configurations in
    ascending order so ties resolve to the smallest bitstring.  Returns
    (argmin_bits, argmax_bits, e_min, e_max).
    """
    n = instance.n_qubits
    size = instance.n_states
    fields = instance.fields
    couplings = instance.couplings
    best_min = math.inf
    best_max = -math.inf
    argmin_bits = 0
    argmax_bits = 0
    chunk = 1 << 14
    for start in range(0, size, chunk):
        b = np.arange(start, min(start + chunk, size), dtype=np.int64)
        spins = np.where(((b[:, None] >> np.arange(n)[None, :]) & 1) == 1, -1.0, 1.0)
        e = spins @ fields
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                e += 2.0 * couplings[k] * spins[:, i] * spins[:, j]
                k += 1
        lo = int(np.argmin(e))
        hi = int(np.argmax(e))
        if e[lo] < best_min:
            best_min = float(e[lo])
            argmin_bits = int(b[lo])
        if e[hi] > best_max:
            best_max = float(e[hi])
            argmax_bits = int(b[hi])
    return argmin_bits, argmax_bits, best_min, best_max


def _build_schedule(
    config: ExperimentConfig,
    instance: IsingInstance,
    spectrum: Spectrum,
    sigma: float,
    realization: int,
) -> GroverSchedule:
    n_default = optimal_iterations(spectrum.n_states, config.degenerate_pair)
    n = config.iterations if config.iterations is not None else n_default
    if config.schedule == "analytic":
        t = (
            config.evolution_time
            if config.evolution_time is not None
            else optimal_time(SpectralModel(sigma=sigma, n_qubits=config.n_qubits))
        )
        return GroverSchedule(t, n, origin="analytic")
    if config.schedule == "grid":
        report = tuning.grid_tune(
            spectrum, k_points=config.grid_points, n=n, objective="extreme-pair"
        )
        return GroverSchedule(report.t_opt, n, origin="grid-tuned")
    report = tuning.feedback_tune(
        instance,
        "extreme",
        n_shots=config.shots,
        max_rounds=config.feedback_rounds,
        seed=derive_seed(config.seed, realization, 1),
        n=n,
    )
    return GroverSchedule(report.t_opt, n, origin="feedback-tuned")


def _run_one(config: ExperimentConfig, realization: int):
    instance_seed = derive_seed(config.seed, realization, 0)
    instance = sample_instance(
        config.n_qubits, config.sigma_eps, config.sigma_j, seed=instance_seed
    )
    spectrum = enumerate_spectrum(instance)
    sigma = spectrum.sigma()
    schedule = _build_schedule(config, instance, spectrum, sigma, realization)
    final, _ = engine.run(spectrum.energies, schedule, trace_mode="success")
    probs = engine.probabilities(final)
    p_min = float(probs[spectrum.min_indices()].sum())
    p_max = float(probs[spectrum.max_indices()].sum())
    argmin_bits, argmax_bits, _, _ = brute_force_extremes(instance)
    verified = int(np.argmax(probs)) in (argmin_bits, argmax_bits)
    record = RealizationRecord(
        index=realization,
        instance_seed=instance_seed,
        sigma=sigma,
        evolution_time=schedule.evolution_time,
        iterations=schedule.iterations,
        p_min=p_min,
        p_max=p_max,
        verified=verified,
        probabilities=probs if config.keep_probabilities else None,
    )
    xi = engine.xi_transform(spectrum.energies)
    return record, spectrum.energies, xi, probs


def _histogram_pair(values: np.ndarray, weights: np.ndarray, bins: int) -> tuple[Histogram, Histogram]:
    edges = np.histogram_bin_edges(values, bins=bins)
    mass, _ = np.histogram(values, bins=edges, weights=weights)
    density, _ = np.histogram(values, bins=edges, weights=weights, density=True)
    initial_mass, _ = np.histogram(values, bins=edges)
    initial_density, _ = np.histogram(values, bins=edges, density=True)
    weighted = Histogram(edges=edges, mass=mass, density=density)
    initial = Histogram(
        edges=edges, mass=initial_mass.astype(float), density=initial_density
    )
    return weighted, initial


def _binned_profile(values: np.ndarray, probs: np.ndarray, bins: int) -> BinnedProfile:
    edges = np.histogram_bin_edges(values, bins=bins)
    total, _ = np.histogram(values, bins=edges, weights=probs)
    counts, _ = np.histogram(values, bins=edges)
    mean = np.divide(total, counts, out=np.zeros_like(total), where=counts > 0)
    return BinnedProfile(edges=edges, mean_probability=mean, counts=counts)


def run_ensemble(config: ExperimentConfig) -> EnsembleResult:
    """Sample instances, build schedules per policy, run, and aggregate."""
    config.validate()
    indices = range(config.realizations)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outputs = list(pool.map(lambda i: _run_one(config, i), indices))
    else:
        outputs = [_run_one(config, i) for i in indices]

    records = [out[0] for out in outputs]
    energies = np.concatenate([out[1] for out in outputs])
    xis = np.concatenate([out[2] for out in outputs])
    probs = np.concatenate([out[3] for out in outputs])

    energy_hist, energy_initial = _histogram_pair(energies, probs, config.bins)
    xi_hist, xi_initial = _histogram_pair(xis, probs, config.bins)
    return EnsembleResult(
        config=config,
        records=records,
        energy_hist=energy_hist,
        energy_initial=energy_initial,
        xi_hist=xi_hist,
        xi_initial=xi_initial,
        energy_profile=_binned_profile(energies, probs, config.bins),
        xi_profile=_binned_profile(xis, probs, config.bins),
        verified_fraction=float(np.mean([r.verified for r in records])),
    )


def target_energy_ensemble(
    n_qubits: int,
    realizations: int,
    seed: int = 0,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    bins: int = 60,
    e_tar: float | None = None,
) -> tuple[EnsembleResult, float]:
    """Ensemble with the time tuned per realization to a non-extreme target.

    When ``e_tar`` is None it is set three median absolute deviations above
    the pooled spectral mean of this same ensemble.  Returns the aggregated
    result and the target energy used.
    """
    spectra = []
    for r in range(realizations):
        instance = sample_instance(
            n_qubits, sigma_eps, sigma_j, seed=derive_seed(seed, r, 0)
        )
        spectra.append(enumerate_spectrum(instance))
    if e_tar is None:
        pooled = np.concatenate([s.energies for s in spectra])
        mad = float(np.median(np.abs(pooled - np.median(pooled))))
        e_tar = float(pooled.mean() + 3.0 * mad)

    records = []
    energies_pool = []
    probs_pool = []
    xi_pool = []
    n_star = optimal_iterations(1 << n_qubits, degenerate_pair=False)
    for r, spectrum in enumerate(spectra):
        report = tuning.target_energy_mode(spectrum, e_tar, n=n_star, k_points=20)
        final, _ = engine.run(
            spectrum.energies, GroverSchedule(report.t_opt, n_star), "success"
        )
        probs = engine.probabilities(final)
        records.append(
            RealizationRecord(
                index=r,
                instance_seed=derive_seed(seed, r, 0),
                sigma=spectrum.sigma(),
                evolution_time=report.t_opt,
                iterations=n_star,
                p_min=float(probs[spectrum.min_indices()].sum()),
                p_max=float(probs[spectrum.max_indices()].sum()),
                verified=False,
            )
        )
        energies_pool.append(spectrum.energies)
        probs_pool.append(probs)
        xi_pool.append(engine.xi_transform(spectrum.energies))

    energies = np.concatenate(energies_pool)
    probs = np.concatenate(probs_pool)
    xis = np.concatenate(xi_pool)
    config = ExperimentConfig(
        n_qubits=n_qubits, realizations=realizations, seed=seed, bins=bins,
        kind="target-energy",
    )
    energy_hist, energy_initial = _histogram_pair(energies, probs, bins)
    xi_hist, xi_initial = _histogram_pair(xis, probs, bins)
    result = EnsembleResult(
        config=config,
        records=records,
        energy_hist=energy_hist,
        energy_initial=energy_initial,
        xi_hist=xi_hist,
        xi_initial=xi_initial,
        energy_profile=_binned_profile(energies, probs, bins),
        xi_profile=_binned_profile(xis, probs, bins),
        verified_fraction=0.0,
    )
    return result, e_tar


# ---------------------------------------------------------------------------
# Cross-size studies backing the survey figures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapStatsRow:
    n_qubits: int
    mean_gap: float
    estimate: float  # sigma_bar / sqrt(2 ln N_s)
    realizations: int


def gap_statistics(
    n_qubits_list,
    realizations: int,
    seed: int = 0,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    batch: int = 256,
) -> list[GapStatsRow]:
    """Ensemble-mean ground-state gap per size, with the Gaussian estimate.

    The estimate uses the ensemble-mean spectral deviation, realization by
    realization the same quantity the schedule builder would use.
    """
    rows = []
    for n_q in n_qubits_list:
        gap_total = 0.0
        sigma_total = 0.0
        done = 0
        while done < realizations:
            block = min(batch, realizations - done)
            instances = [
                sample_instance(
                    n_q, sigma_eps, sigma_j, seed=derive_seed(seed, n_q, done + k)
                )
                for k in range(block)
            ]
            energies = enumerate_energies_batch(instances)
            lowest_two = np.partition(energies, 1, axis=1)[:, :2]
            gap_total += float((lowest_two[:, 1] - lowest_two[:, 0]).sum())
            sigma_total += float(energies.std(axis=1).sum())
            done += block
        mean_sigma = sigma_total / realizations
        rows.append(
            GapStatsRow(
                n_qubits=n_q,
                mean_gap=gap_total / realizations,
                estimate=gap_estimate(SpectralModel(sigma=mean_sigma, n_qubits=n_q)),
                realizations=realizations,
            )
        )
    return rows


@dataclass(frozen=True)
class OptimalTimeRow:
    n_qubits: int
    mean_t_opt: float
    t_star_numeric: float
    t_star_asymptotic: float
    realizations: int


def optimal_time_study(
    n_qubits_list,
    realizations: int = 100,
    seed: int = 0,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    grid_points: int = 20,
) -> list[OptimalTimeRow]:
    """Disorder-averaged numerically tuned time against the two predictions."""
    rows = []
    for n_q in n_qubits_list:
        t_opts = []
        t_stars = []
        t_asym = []
        for r in range(realizations):
            instance = sample_instance(
                n_q, sigma_eps, sigma_j, seed=derive_seed(seed, n_q, r)
            )
            spectrum = enumerate_spectrum(instance)
            model = SpectralModel(sigma=spectrum.sigma(), n_qubits=n_q)
            n_star = optimal_iterations(spectrum.n_states, degenerate_pair=False)
            report = tuning.grid_tune(
                spectrum, k_points=grid_points, n=n_star, objective="extreme-abs"
            )
            t_opts.append(report.t_opt)
            t_stars.append(optimal_time(model))
            t_asym.append(asymptotic_time(model))
        rows.append(
            OptimalTimeRow(
                n_qubits=n_q,
                mean_t_opt=float(np.mean(t_opts)),
                t_star_numeric=float(np.mean(t_stars)),
                t_star_asymptotic=float(np.mean(t_asym)),
                realizations=realizations,
            )
        )
    return rows


def time_scan_study(
    n_qubits: int,
    realizations: int = 100,
    seed: int = 0,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    k_points: int = 41,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean probability of the largest-|E| state versus evolution time.

    The scan grid is expressed in units of each realization's analytic T*
    (common dimensionless axis), spanning [0.2, 2.0] * T*.
    """
    fractions = np.linspace(0.2, 2.0, k_points)
    total = np.zeros(k_points)
    for r in range(realizations):
        instance = sample_instance(
            n_qubits, sigma_eps, sigma_j, seed=derive_seed(seed, n_qubits, r)
        )
        spectrum = enumerate_spectrum(instance)
        model = SpectralModel(sigma=spectrum.sigma(), n_qubits=n_qubits)
        t_star = optimal_time(model)
        n_star = optimal_iterations(spectrum.n_states, degenerate_pair=False)
        idx = tuning.abs_extreme_index(spectrum.energies)
        for col, frac in enumerate(fractions):
            final, _ = engine.run(
                spectrum.energies,
                GroverSchedule(float(frac * t_star), n_star),
                trace_mode="success",
            )
            total[col] += float(np.abs(final.amplitudes[idx]) ** 2)
    return fractions, total / realizations


def iteration_scan_study(
    n_qubits: int,
    realizations: int = 50,
    seed: int = 0,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    n_max: int | None = None,
    grid_points: int = 20,
) -> np.ndarray:
    """Mean probability of the largest-|E| state versus iteration count.

    The evolution time is grid-tuned per realization before scanning n.
    """
    n_star = optimal_iterations(1 << n_qubits, degenerate_pair=False)
    if n_max is None:
        n_max = max(2 * n_star, n_star + 6)
    total = np.zeros(n_max + 1)
    for r in range(realizations):
        instance = sample_instance(
            n_qubits, sigma_eps, sigma_j, seed=derive_seed(seed, n_qubits, r)
        )
        spectrum = enumerate_spectrum(instance)
        report = tuning.grid_tune(
            spectrum, k_points=grid_points, n=n_star, objective="extreme-abs"
        )
        total += tuning.scan_iterations(spectrum, report.t_opt, n_max)
    return total / realizations


# ---------------------------------------------------------------------------
# Ensemble CSV exports
# ---------------------------------------------------------------------------


def save_records_csv(result: EnsembleResult, path: str | Path) -> Path:
    """Per-realization records: one row per disorder realization."""
    path = Path(path)
    header = "realization,instance_seed,sigma,t,n,p_min,p_max,p_success,verified"
    rows = [
        f"{r.index},{r.instance_seed},{r.sigma!r},{r.evolution_time!r},"
        f"{r.iterations},{r.p_min!r},{r.p_max!r},{r.p_success!r},{int(r.verified)}"
        for r in result.records
    ]
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def save_histogram_csv(hist: Histogram, initial: Histogram, path: str | Path) -> Path:
    """Weighted density next to the initial-state density, one row per bin."""
    path = Path(path)
    header = "bin_lo,bin_hi,mass,density,initial_density"
    rows = [
        f"{float(hist.edges[k])!r},{float(hist.edges[k + 1])!r},{float(hist.mass[k])!r},"
        f"{float(hist.density[k])!r},{float(initial.density[k])!r}"
        for k in range(hist.mass.size)
    ]
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def save_profile_csv(profile: BinnedProfile, path: str | Path, label: str) -> Path:
    """Binned mean probability: ``<label>_lo,<label>_hi,mean_probability,count``."""
    path = Path(path)
    header = f"{label}_lo,{label}_hi,mean_probability,count"
    rows = [
        f"{float(profile.edges[k])!r},{float(profile.edges[k + 1])!r},"
        f"{float(profile.mean_probability[k])!r},{int(profile.counts[k])}"
        for k in range(profile.mean_probability.size)
    ]
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def save_summary(result: EnsembleResult, path: str | Path) -> Path:
    """Key-value run summary (aggregates only)."""
    path = Path(path)
    cfg = result.config
    ps = [r.p_success for r in result.records]
    stderr = float(np.std(ps, ddof=1) / math.sqrt(len(ps))) if len(ps) > 1 else 0.0
    lines = [
        "# grover-ising ensemble summary v1",
        f"n_qubits = {cfg.n_qubits}",
        f"realizations = {cfg.realizations}",
        f"schedule = {cfg.schedule}",
        f"seed = {cfg.seed}",
        f"mean_p_success = {float(np.mean(ps))!r}",
        f"stderr_p_success = {stderr!r}",
        f"verified_fraction = {result.verified_fraction!r}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
