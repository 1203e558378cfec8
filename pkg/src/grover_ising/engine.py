"""Exact simulation of the search: phase oracle plus reflection about the mean.

Works on either a full 2**n_qubits statevector (energies from an enumerated
spectrum, in configuration order) or an arbitrary synthetic level list of
length >= 2.  The oracle multiplies amplitude ``j`` by ``exp(-i E_j t)``
(hbar = 1; flipping the sign convention only conjugates amplitudes and leaves
every probability unchanged).  The diffusion step is the O(L) reflection
``a -> 2 mean(a) - a``; no operator matrix is ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import GroverSchedule

NORM_TOL = 1e-9

TRACE_MODES = ("success", "summary", "full")


@dataclass
class AmplitudeState:
    """Complex amplitudes over a fixed diagonal spectrum."""

    amplitudes: np.ndarray
    energies: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        energies = np.asarray(self.energies, dtype=float)
        if amps.shape != energies.shape or amps.ndim != 1:
            raise ValueError("amplitudes and energies must be flat arrays of equal length")
        if amps.size < 2:
            raise ValueError("need at least two levels")
        self.amplitudes = amps
        self.energies = energies

    @property
    def n_levels(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass
class IterationTrace:
    """Per-step success summaries; row ``k`` describes the state after ``k`` iterations."""

    mode: str
    p_success: np.ndarray
    p_min_state: np.ndarray | None = None
    p_max_state: np.ndarray | None = None
    probabilities: np.ndarray | None = None  # (steps+1, L), mode == "full" only
    min_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    max_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def steps(self) -> int:
        return self.p_success.size - 1


def uniform_state(energies: np.ndarray) -> AmplitudeState:
    """Equal-weight superposition 1/sqrt(L) over all levels."""
    energies = np.asarray(energies, dtype=float)
    if energies.ndim != 1 or energies.size < 2:
        raise ValueError("need a flat array of at least two energies")
    amps = np.full(energies.size, 1.0 / np.sqrt(energies.size), dtype=complex)
    return AmplitudeState(amps, energies)


def apply_oracle(state: AmplitudeState, t: float) -> AmplitudeState:
    """Imprint the diagonal phases exp(-i E_j t)."""
    if t <= 0:
        raise ValueError("evolution time must be positive")
    phases = np.exp(-1j * t * state.energies)
    return AmplitudeState(phases * state.amplitudes, state.energies)


def apply_diffusion(state: AmplitudeState) -> AmplitudeState:
    """Reflect about the mean amplitude (the O(L) form of 2|s><s| - I)."""
    mean = state.amplitudes.mean()
    return AmplitudeState(2.0 * mean - state.amplitudes, state.energies)


def probabilities(state: AmplitudeState) -> np.ndarray:
    """|amplitude|^2 per level."""
    return np.abs(state.amplitudes) ** 2


def run(
    energies: np.ndarray,
    schedule: GroverSchedule,
    trace_mode: str = "summary",
) -> tuple[AmplitudeState, IterationTrace]:
    """Apply (diffusion o oracle) ``schedule.iterations`` times to the uniform state.

    The trace records the initial state as step 0.  ``trace_mode`` is one of
    ``success`` (extreme-pair probability only), ``summary`` (adds the lowest-
    and highest-energy state probabilities) or ``full`` (adds the whole
    probability vector per step; memory-heavy for large runs).
    """
    if trace_mode not in TRACE_MODES:
        raise ValueError(f"trace_mode must be one of {TRACE_MODES}")
    energies = np.asarray(energies, dtype=float)
    state = uniform_state(energies)
    n_steps = schedule.iterations

    min_idx = np.flatnonzero(energies == energies.min())
    max_idx = np.flatnonzero(energies == energies.max())
    p_min = np.empty(n_steps + 1)
    p_max = np.empty(n_steps + 1)
    probs_full = np.empty((n_steps + 1, energies.size)) if trace_mode == "full" else None

    amps = state.amplitudes
    phases = np.exp(-1j * schedule.evolution_time * energies)

    def record(step: int, a: np.ndarray) -> None:
        p_min[step] = float(np.sum(np.abs(a[min_idx]) ** 2))
        p_max[step] = float(np.sum(np.abs(a[max_idx]) ** 2))
        if probs_full is not None:
            probs_full[step] = np.abs(a) ** 2

    record(0, amps)
    for step in range(1, n_steps + 1):
        amps = phases * amps
        amps = 2.0 * amps.mean() - amps
        record(step, amps)

    final = AmplitudeState(amps, energies)
    drift = abs(final.norm() - 1.0)
    if drift > NORM_TOL:
        raise FloatingPointError(f"statevector norm drifted by {drift:.3e}")

    # On a flat spectrum min and max coincide; don't count that level twice.
    flat = energies.min() == energies.max()
    p_success = p_min.copy() if flat else p_min + p_max
    trace = IterationTrace(
        mode=trace_mode,
        p_success=p_success,
        p_min_state=p_min if trace_mode in ("summary", "full") else None,
        p_max_state=p_max if trace_mode in ("summary", "full") else None,
        probabilities=probs_full,
        min_indices=min_idx,
        max_indices=max_idx,
    )
    return final, trace


def xi_transform(spectrum_or_energies) -> np.ndarray:
    """Rescale energies so the extremes land exactly at 0 and 1.

    xi_j = (E_j - E_min) / (E_max - E_min); rejects flat spectra.
    """
    energies = np.asarray(getattr(spectrum_or_energies, "energies", spectrum_or_energies), dtype=float)
    e_min = energies.min()
    e_max = energies.max()
    if e_max <= e_min:
        raise ValueError("flat spectrum: e_max must exceed e_min")
    return (energies - e_min) / (e_max - e_min)


def measure(state: AmplitudeState, n_shots: int, seed: int = 0) -> dict[int, int]:
    """Multinomial sampling of level indices; deterministic for a given seed."""
    if n_shots < 0:
        raise ValueError("n_shots must be >= 0")
    if n_shots == 0:
        return {}
    probs = probabilities(state)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    counts = np.random.default_rng(seed).multinomial(n_shots, probs)
    hit = np.flatnonzero(counts)
    return {int(i): int(counts[i]) for i in hit}


def most_frequent(histogram: dict[int, int]) -> int:
    """Index with the highest count; ties broken toward the smallest index."""
    if not histogram:
        raise ValueError("empty histogram")
    best = max(sorted(histogram), key=lambda i: histogram[i])
    return int(best)


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------


def save_trace_csv(trace: IterationTrace, path: str | Path) -> Path:
    """Write the per-step trace: ``step,p_success,p_min_state,p_max_state[,p_j...]``."""
    path = Path(path)
    if trace.mode == "success":
        header = "step,p_success"
        rows = [f"{k},{float(trace.p_success[k])!r}" for k in range(trace.steps + 1)]
    else:
        header = "step,p_success,p_min_state,p_max_state"
        rows = [
            f"{k},{float(trace.p_success[k])!r},{float(trace.p_min_state[k])!r},"
            f"{float(trace.p_max_state[k])!r}"
            for k in range(trace.steps + 1)
        ]
        if trace.mode == "full":
            width = trace.probabilities.shape[1]
            header += "," + ",".join(f"p_{j}" for j in range(width))
            rows = [
                rows[k] + "," + ",".join(repr(x) for x in trace.probabilities[k].tolist())
                for k in range(trace.steps + 1)
            ]
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def save_snapshot_csv(state: AmplitudeState, path: str | Path) -> Path:
    """Write ``index,energy,probability`` for the current state."""
    path = Path(path)
    probs = probabilities(state)
    rows = [
        f"{j},{float(state.energies[j])!r},{float(probs[j])!r}"
        for j in range(state.n_levels)
    ]
    path.write_text("index,energy,probability\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path
