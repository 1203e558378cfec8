"""Per-realization refinement of the schedule (T, n).

Three strategies:

* ``grid_tune``: evaluate the engine on a grid of evolution times around the
  analytic T* and keep the best.
* ``feedback_tune``: the measurement-feedback protocol: run at T*, measure,
  take the measured energy closest to the target, set T = pi/|E|, repeat.
* ``target_energy_mode``: aim at an arbitrary energy E_tar with T = pi/|E_tar|.
  All states with energies near E_tar*(2l+1), l integer, are amplified as
  well (odd harmonics of the phase-flip condition), so |E_tar| should stay
  above the spectral deviation for the target peak to remain distinguishable.

``scan_iterations`` sweeps the iteration count at fixed T.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import engine
from .ising import IsingInstance, Spectrum, enumerate_spectrum
from .spectral import GroverSchedule, SpectralModel, optimal_iterations, optimal_time

OBJECTIVES = ("extreme-pair", "extreme-abs", "target")


@dataclass
class TuneReport:
    """Outcome of a tuning pass.

    ``history`` rows are (round_or_grid_index, T, best_energy, probability).
    """

    t_star_analytic: float
    t_opt: float
    n_used: int
    target_probability: float
    history: list[tuple[int, float, float, float]] = field(default_factory=list)
    origin: str = "grid-tuned"
    target_energy: float | None = None
    band_probability: float | None = None

    def schedule(self) -> GroverSchedule:
        return GroverSchedule(self.t_opt, self.n_used, origin=self.origin)


def _as_spectrum(spectrum_or_instance) -> Spectrum:
    if isinstance(spectrum_or_instance, IsingInstance):
        return enumerate_spectrum(spectrum_or_instance)
    if isinstance(spectrum_or_instance, Spectrum):
        return spectrum_or_instance
    return Spectrum.from_energies(np.asarray(spectrum_or_instance, dtype=float))


def _spectral_sigma(spectrum: Spectrum) -> float:
    sigma = spectrum.sigma()
    if sigma <= 0:
        raise ValueError("degenerate flat spectrum: spectral deviation is zero")
    return sigma


def abs_extreme_index(energies: np.ndarray) -> int:
    """Index of the state with the largest |E_j| (smallest index on ties)."""
    return int(np.argmax(np.abs(energies)))


def default_window(t_star: float, sigma: float) -> tuple[float, float]:
    """Search window of width 1/sigma centred on T*, clipped to positive times."""
    half = 0.5 / sigma
    lo = max(t_star - half, 1e-9 * t_star)
    return lo, t_star + half


def _objective_indices(
    spectrum: Spectrum, objective: str, e_tar: float | None
) -> np.ndarray:
    if objective == "extreme-pair":
        return np.concatenate([spectrum.min_indices(), spectrum.max_indices()])
    if objective == "extreme-abs":
        return np.array([abs_extreme_index(spectrum.energies)])
    if objective == "target":
        if e_tar is None:
            raise ValueError("objective 'target' needs e_tar")
        return np.array([int(np.argmin(np.abs(spectrum.energies - e_tar)))])
    raise ValueError(f"objective must be one of {OBJECTIVES}")


def grid_tune(
    spectrum_or_instance,
    window: tuple[float, float] | None = None,
    k_points: int = 20,
    n: int | None = None,
    objective: str = "extreme-abs",
    e_tar: float | None = None,
) -> TuneReport:
    """Pick the evolution time on a k-point grid that maximizes the objective.

    Objectives: probability of the extreme pair, of the single largest-|E|
    state, or of the state nearest ``e_tar``.  Ties go to the smallest T.
    """
    spectrum = _as_spectrum(spectrum_or_instance)
    sigma = _spectral_sigma(spectrum)
    t_star = optimal_time(SpectralModel(sigma=sigma, n_qubits=spectrum.n_qubits))
    if window is None:
        window = default_window(t_star, sigma)
    t_a, t_b = window
    if not (0 < t_a < t_b):
        raise ValueError("window must satisfy 0 < t_a < t_b")
    if k_points < 2:
        raise ValueError("k_points must be >= 2")
    if n is None:
        n = optimal_iterations(spectrum.n_states, degenerate_pair=(objective == "extreme-pair"))

    idx = _objective_indices(spectrum, objective, e_tar)
    energies = spectrum.energies
    ts = np.linspace(t_a, t_b, k_points)
    best_t = ts[0]
    best_value = -1.0
    history: list[tuple[int, float, float, float]] = []
    for i, t in enumerate(ts):
        final, _ = engine.run(energies, GroverSchedule(float(t), n), trace_mode="success")
        probs_at = np.abs(final.amplitudes[idx]) ** 2
        value = float(probs_at.sum())
        best_energy = float(energies[idx[int(np.argmax(probs_at))]])
        history.append((i, float(t), best_energy, value))
        if value > best_value:
            best_value = value
            best_t = float(t)
    return TuneReport(
        t_star_analytic=t_star,
        t_opt=best_t,
        n_used=n,
        target_probability=best_value,
        history=history,
        origin="grid-tuned",
        target_energy=e_tar,
    )


def feedback_tune(
    instance: IsingInstance,
    e_tar: float | str = "extreme",
    n_shots: int = 1024,
    max_rounds: int = 5,
    seed: int = 0,
    n: int | None = None,
) -> TuneReport:
    """Measurement-feedback refinement of the evolution time.

    Round k runs the engine at T_k, draws ``n_shots`` samples, picks from the
    measured energies the one closest to the target (largest |E| in extreme
    mode) as E*_k, and sets T_{k+1} = pi/|E*_k| exactly.  Stops when E*_k
    repeats or after ``max_rounds``.  A measured E*_k of zero would give an
    infinite time; such rounds fall back to the next-closest nonzero energy.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    extreme_mode = isinstance(e_tar, str)
    if extreme_mode and e_tar != "extreme":
        raise ValueError("e_tar must be a float or the string 'extreme'")

    spectrum = enumerate_spectrum(instance)
    sigma = _spectral_sigma(spectrum)
    energies = spectrum.energies
    t_star = optimal_time(SpectralModel(sigma=sigma, n_qubits=spectrum.n_qubits))
    if n is None:
        n = optimal_iterations(spectrum.n_states, degenerate_pair=False)

    t_current = t_star
    history: list[tuple[int, float, float, float]] = []
    best_energy_prev: float | None = None
    selected_idx = abs_extreme_index(energies)
    for round_k in range(max_rounds):
        final, _ = engine.run(energies, GroverSchedule(t_current, n), trace_mode="success")
        hist = engine.measure(final, n_shots, seed=_round_seed(seed, round_k))
        measured = np.array(sorted(hist), dtype=int)
        measured_e = energies[measured]
        if extreme_mode:
            order = np.argsort(-np.abs(measured_e), kind="stable")
        else:
            order = np.argsort(np.abs(measured_e - float(e_tar)), kind="stable")
        chosen = None
        for pos in order:
            if measured_e[pos] != 0.0:
                chosen = int(measured[pos])
                break
        if chosen is None:
            raise ValueError("all measured energies are zero; cannot refine the time")
        best_energy = float(energies[chosen])
        probability = float(np.abs(final.amplitudes[chosen]) ** 2)
        history.append((round_k, t_current, best_energy, probability))
        selected_idx = chosen
        if best_energy_prev is not None and best_energy == best_energy_prev:
            break
        best_energy_prev = best_energy
        t_current = math.pi / abs(best_energy)

    t_opt = math.pi / abs(float(energies[selected_idx]))
    final, _ = engine.run(energies, GroverSchedule(t_opt, n), trace_mode="success")
    target_probability = float(np.abs(final.amplitudes[selected_idx]) ** 2)
    return TuneReport(
        t_star_analytic=t_star,
        t_opt=t_opt,
        n_used=n,
        target_probability=target_probability,
        history=history,
        origin="feedback-tuned",
        target_energy=None if extreme_mode else float(e_tar),
    )


def _round_seed(seed: int, round_k: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(round_k,))
    return int(ss.generate_state(1, np.uint64)[0])


def scan_iterations(spectrum_or_energies, t: float, n_max: int) -> np.ndarray:
    """Success probability of the largest-|E| state after n = 0 .. n_max steps."""
    spectrum = _as_spectrum(spectrum_or_energies)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _, trace = engine.run(spectrum.energies, GroverSchedule(t, n_max), trace_mode="summary")
    if abs(spectrum.e_min) >= abs(spectrum.e_max):
        return trace.p_min_state
    return trace.p_max_state


def first_peak(curve: np.ndarray) -> int:
    """Index of the first local maximum of a curve (end counts as a peak)."""
    for k in range(1, curve.size - 1):
        if curve[k] > curve[k - 1] and curve[k] >= curve[k + 1]:
            return k
    return int(curve.size - 1)


def target_energy_mode(
    spectrum_or_instance,
    e_tar: float,
    n: int | None = None,
    k_points: int | None = None,
    band_halfwidth: float | None = None,
) -> TuneReport:
    """Amplify states around an arbitrary target energy with T = pi/|E_tar|.

    With ``k_points`` set, T is additionally grid-tuned around pi/|E_tar|.
    Reports the probability of the nearest state as the primary metric and the
    total probability of the band |E - E_tar| <= band_halfwidth (default
    sigma/2) as a secondary one.  States near odd multiples E_tar*(2l+1) are
    amplified too; keep |E_tar| at least of order sigma so the peaks stay
    separated.
    """
    if e_tar == 0:
        raise ValueError("e_tar must be nonzero")
    spectrum = _as_spectrum(spectrum_or_instance)
    sigma = _spectral_sigma(spectrum)
    if abs(e_tar) < sigma:
        warnings.warn(
            "targets inside one spectral deviation overlap neighbouring peaks",
            stacklevel=2,
        )
    if n is None:
        n = optimal_iterations(spectrum.n_states, degenerate_pair=False)
    t_flip = math.pi / abs(e_tar)

    if k_points is not None:
        report = grid_tune(
            spectrum,
            window=default_window(t_flip, sigma),
            k_points=k_points,
            n=n,
            objective="target",
            e_tar=e_tar,
        )
    else:
        final, _ = engine.run(spectrum.energies, GroverSchedule(t_flip, n), trace_mode="success")
        idx = int(np.argmin(np.abs(spectrum.energies - e_tar)))
        value = float(np.abs(final.amplitudes[idx]) ** 2)
        report = TuneReport(
            t_star_analytic=t_flip,
            t_opt=t_flip,
            n_used=n,
            target_probability=value,
            history=[(0, t_flip, float(spectrum.energies[idx]), value)],
            origin="grid-tuned",
            target_energy=e_tar,
        )

    final, _ = engine.run(spectrum.energies, GroverSchedule(report.t_opt, n), trace_mode="success")
    half = 0.5 * sigma if band_halfwidth is None else band_halfwidth
    in_band = np.abs(spectrum.energies - e_tar) <= half
    report.band_probability = float(np.sum(np.abs(final.amplitudes[in_band]) ** 2))
    report.target_energy = e_tar
    return report


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save_report(report: TuneReport, path: str | Path) -> Path:
    """Write the report as a key-value text document."""
    path = Path(path)
    lines = [
        "# grover-ising tune report v1",
        f"origin = {report.origin}",
        f"t_star_analytic = {report.t_star_analytic!r}",
        f"t_opt = {report.t_opt!r}",
        f"n_used = {report.n_used}",
        f"target_probability = {report.target_probability!r}",
    ]
    if report.target_energy is not None:
        lines.append(f"target_energy = {report.target_energy!r}")
    if report.band_probability is not None:
        lines.append(f"band_probability = {report.band_probability!r}")
    lines.append(f"rounds = {len(report.history)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_history_csv(report: TuneReport, path: str | Path) -> Path:
    """Write the tuning history: ``round,T,best_energy,probability``."""
    path = Path(path)
    rows = [
        f"{rnd},{t!r},{best_e!r},{prob!r}"
        for rnd, t, best_e, prob in report.history
    ]
    path.write_text("round,T,best_energy,probability\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path
