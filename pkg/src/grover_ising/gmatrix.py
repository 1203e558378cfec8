"""Reduced (n+2)-dimensional dynamics of the search.

Instead of tracking all 2**n_qubits amplitudes, track the amplitude ``a_pm``
on the symmetric pair of extreme states |+-> and the coefficients ``b_k`` on
the orbit |k> of the bulk superposition |0> under the diagonal evolution
operator.  One search iteration is the sparse linear map

        [ 1 - 2 a0^2   2 a0 b0 <0|1>   2 a0 b0 <0|2>  ... ]
        [ -2 a0 b0     2 b0^2  <0|1>   2 b0^2  <0|2>  ... ]
        [ 0            -1              0              ... ]
        [ 0            0               -1             ... ]

with a0 = sqrt(2/N_s), b0 = sqrt(1 - a0^2).  All spectral statistics enter
through the overlaps <0|k>; for a Gaussian bulk they decay like
exp(-k^2 t^2 sigma^2 / 2).  Memory is O(steps) instead of O(N_s).

The |k> basis is not orthogonal.  The map above is applied exactly as is,
validated against the full simulator; the Gram-corrected norm is available as
a diagnostic only (:func:`gram_norm`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import optimal_iterations

OVERLAP_SOURCES = ("gaussian-analytic", "empirical-spectrum")


@dataclass(frozen=True)
class OverlapSequence:
    """Overlaps <0|k> of the bulk state with its k-fold oracle image."""

    values: np.ndarray
    source: str

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("overlaps must be a flat, nonempty array")
        if abs(values[0] - 1.0) > 1e-12:
            raise ValueError("<0|0> must be 1")
        if np.any(np.abs(values) > 1.0 + 1e-9):
            raise ValueError("|<0|k>| cannot exceed 1")
        if self.source not in OVERLAP_SOURCES:
            raise ValueError(f"unknown overlap source: {self.source!r}")
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return self.values.size - 1


def gaussian_overlaps(sigma: float, t: float, n_max: int) -> OverlapSequence:
    """Analytic overlaps for a Gaussian bulk: <0|k> = exp(-k^2 t^2 sigma^2 / 2)."""
    if sigma < 0 or t <= 0:
        raise ValueError("need sigma >= 0 and t > 0")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    k = np.arange(n_max + 1, dtype=float)
    return OverlapSequence(
        values=np.exp(-0.5 * (k * t * sigma) ** 2).astype(complex),
        source="gaussian-analytic",
    )


def empirical_overlaps(
    energies: np.ndarray,
    t: float,
    n_max: int,
    excluded: tuple[int, int],
) -> OverlapSequence:
    """Exact finite-sum overlaps over all levels except the two extreme indices."""
    energies = np.asarray(energies, dtype=float)
    if energies.size < 3:
        raise ValueError("need at least three levels")
    if t <= 0:
        raise ValueError("t must be positive")
    i, j = excluded
    if i == j or not (0 <= i < energies.size and 0 <= j < energies.size):
        raise ValueError("excluded must be two distinct valid indices")
    mask = np.ones(energies.size, dtype=bool)
    mask[[i, j]] = False
    bulk = energies[mask]
    values = np.empty(n_max + 1, dtype=complex)
    values[0] = 1.0
    z = np.exp(-1j * t * bulk)
    power = z.copy()
    for k in range(1, n_max + 1):
        values[k] = power.mean()
        power *= z
    return OverlapSequence(values=values, source="empirical-spectrum")


@dataclass(frozen=True)
class GMatrix:
    """Sparse one-iteration map over (a_pm, b_0 .. b_n_max)."""

    n_states: int
    overlaps: OverlapSequence
    n_max: int

    def __post_init__(self) -> None:
        if self.n_states < 4:
            raise ValueError("n_states must be >= 4")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.n_max > self.overlaps.horizon:
            raise ValueError("n_max exceeds the overlap horizon")

    @property
    def a0(self) -> float:
        return math.sqrt(2.0 / self.n_states)

    @property
    def b0(self) -> float:
        return math.sqrt(1.0 - 2.0 / self.n_states)

    @property
    def dim(self) -> int:
        return self.n_max + 2

    def dense(self) -> np.ndarray:
        """Dense matrix form (for tests and small problems).

        Column 0 acts on a_pm, column k >= 1 on b_{k-1}.  Overlap entries past
        the stored horizon are zero; they are never exercised when the number
        of applications stays <= n_max.
        """
        a0, b0 = self.a0, self.b0
        w = self.overlaps.values
        dim = self.dim
        g = np.zeros((dim, dim), dtype=complex)
        g[0, 0] = 1.0 - 2.0 * a0 * a0
        g[1, 0] = -2.0 * a0 * b0
        for col in range(1, dim):
            if col <= self.overlaps.horizon:
                g[0, col] = 2.0 * a0 * b0 * w[col]
                g[1, col] = 2.0 * b0 * b0 * w[col]
        for col in range(1, dim - 1):
            g[col + 1, col] = -1.0
        return g


def build_gmatrix(n_states: int, overlaps: OverlapSequence, n_max: int) -> GMatrix:
    """Assemble the reduced one-iteration map for a given overlap sequence."""
    return GMatrix(n_states=n_states, overlaps=overlaps, n_max=n_max)


@dataclass(frozen=True)
class ReducedState:
    """Reduced amplitude vector after ``step`` iterations."""

    a_pm: complex
    b: np.ndarray
    step: int


def gram_norm(state: ReducedState, overlaps: OverlapSequence) -> float:
    """Norm diagnostic |a|^2 + b^H Omega b with the Gram matrix Omega_jk = <j|k>.

    <j|k> equals <0|k-j> (conjugated for j > k); the extreme pair is exactly
    orthogonal to every |k>.  For empirical overlaps on a spectrum whose two
    excluded states are exact phase-flipped extremes this evaluates to 1 up to
    rounding; for analytic Gaussian overlaps it is approximate.
    """
    b = np.asarray(state.b, dtype=complex)
    m = b.size
    if m - 1 > overlaps.horizon:
        raise ValueError("state extends past the overlap horizon")
    w = overlaps.values
    omega = np.empty((m, m), dtype=complex)
    for row in range(m):
        for col in range(m):
            d = col - row
            omega[row, col] = w[d] if d >= 0 else np.conj(w[-d])
    return float(abs(state.a_pm) ** 2 + np.real(np.conj(b) @ omega @ b))


def _evolve_kernel(
    w: np.ndarray, a0: float, steps: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Iterate the reduced map for a batch of overlap rows.

    ``w`` has shape (batch, K+1) with K >= steps; ``a0`` is the marked-state
    amplitude in the uniform state.  Returns (probabilities of shape
    (batch, steps+1), final marked amplitude, final b of shape (batch, steps+1)).
    """
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    batch = w.shape[0]
    if w.shape[1] < steps + 1:
        raise ValueError("steps exceeding overlap horizon")
    b0 = math.sqrt(1.0 - a0 * a0)

    a = np.full(batch, a0, dtype=complex)
    b = np.zeros((batch, steps + 1), dtype=complex)
    b[:, 0] = b0
    probs = np.empty((batch, steps + 1))
    probs[:, 0] = np.abs(a) ** 2
    for step in range(1, steps + 1):
        m = step  # b_0 .. b_{m-1} are populated entering this step
        s = np.einsum("bk,bk->b", b[:, :m], w[:, 1 : m + 1])
        a_new = (1.0 - 2.0 * a0 * a0) * a + (2.0 * a0 * b0) * s
        b_head = (-2.0 * a0 * b0) * a + (2.0 * b0 * b0) * s
        b[:, 1 : m + 1] = -b[:, :m]
        b[:, 0] = b_head
        a = a_new
        probs[:, step] = np.abs(a) ** 2
    return probs, a, b


def _evolve_overlap_batch(
    w: np.ndarray, n_states: int, steps: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced-map iteration with the symmetric extreme pair marked."""
    return _evolve_kernel(w, math.sqrt(2.0 / n_states), steps)


def evolve(
    g: GMatrix, steps: int, return_state: bool = False
) -> np.ndarray | tuple[np.ndarray, ReducedState]:
    """Success-probability curve P_+-(n) = |a_pm|^2 for n = 0 .. steps.

    Starts from (a0, b0, 0, ...); costs O(steps^2) time and O(steps) memory.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps > g.n_max:
        raise ValueError("steps exceeding overlap horizon")
    probs, a, b = _evolve_overlap_batch(g.overlaps.values[None, :], g.n_states, steps)
    if not return_state:
        return probs[0]
    return probs[0], ReducedState(a_pm=complex(a[0]), b=b[0], step=steps)


# ---------------------------------------------------------------------------
# Ensemble studies on synthetic spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuccessCurve:
    """Disorder-averaged P_+-(n) for one (n_qubits, sigma_t) setting."""

    n_qubits: int
    sigma_t: float
    realizations: int
    probabilities: np.ndarray  # mean over realizations, index = iteration
    n_star: int

    @property
    def peak_step(self) -> int:
        return int(np.argmax(self.probabilities))

    @property
    def peak_value(self) -> float:
        return float(self.probabilities.max())


def success_probability_curve(
    n_qubits: int,
    sigma_t: float,
    realizations: int,
    seed: int = 0,
    n_max: int | None = None,
    batch: int = 32,
) -> SuccessCurve:
    """Average reduced-model success curve over synthetic Gaussian spectra.

    Each realization plants exact extremes at +-E with E*T = pi and draws the
    remaining N_s - 2 levels from Normal(0, sigma) with sigma*T = ``sigma_t``;
    overlaps are the exact empirical sums over the bulk.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    if sigma_t < 0:
        raise ValueError("sigma_t must be >= 0")
    n_states = 1 << n_qubits
    n_star = optimal_iterations(n_states, degenerate_pair=True)
    if n_max is None:
        n_max = max(n_star + 2, int(math.ceil(1.35 * n_star)))
    rng = np.random.default_rng(seed)
    total = np.zeros(n_max + 1)
    done = 0
    while done < realizations:
        block = min(batch, realizations - done)
        theta = rng.normal(0.0, sigma_t, size=(block, n_states - 2))
        z = np.exp(-1j * theta)
        w = np.empty((block, n_max + 1), dtype=complex)
        w[:, 0] = 1.0
        power = z.copy()
        for k in range(1, n_max + 1):
            w[:, k] = power.mean(axis=1)
            power *= z
        probs, _, _ = _evolve_overlap_batch(w, n_states, n_max)
        total += probs.sum(axis=0)
        done += block
    return SuccessCurve(
        n_qubits=n_qubits,
        sigma_t=sigma_t,
        realizations=realizations,
        probabilities=total / realizations,
        n_star=n_star,
    )


@dataclass(frozen=True)
class GapStudyResult:
    """Success at the optimal step versus the planted dimensionless gap."""

    n_qubits: int
    deltas: np.ndarray  # dimensionless delta = Delta * T* * n* / pi
    mean: np.ndarray
    stderr: np.ndarray
    realizations: int
    n_star: int
    t_star: float
    sigma: float


def gap_study(
    n_qubits: int,
    delta_grid: np.ndarray,
    realizations: int,
    seed: int = 0,
    sigma_t: float = 0.25 * math.pi,
    keep_mirror: bool = True,
    batch: int = 32,
) -> GapStudyResult:
    """Probe how a level planted just above the ground state degrades the search.

    Spectra have exact extremes at +-E with E*T = pi, one level planted at
    -E + Delta, and a Gaussian bulk of dimensionless disorder
    sigma * T = ``sigma_t``.  For each dimensionless gap
    delta = Delta T n* / pi the reduced model is run to n* and the success
    probability of the true extreme pair is averaged over realizations.
    Holding sigma_t fixed across sizes keeps the undisturbed baseline common,
    which is what makes the delta-curves of different sizes comparable.  The
    Gaussian bulk is shared across the delta grid within a realization, which
    sharpens saturation and collapse comparisons.

    ``keep_mirror=False`` drops the +E mirror state (single marked state,
    a0 = sqrt(1/N_s)); the default keeps the symmetric pair.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1 or deltas.size < 1:
        raise ValueError("delta_grid must be a flat, nonempty array")
    if np.any(deltas < 0):
        raise ValueError("deltas must be >= 0")
    if realizations < 2:
        raise ValueError("need at least two realizations for a standard error")
    if sigma_t <= 0:
        raise ValueError("sigma_t must be positive")

    n_states = 1 << n_qubits
    e_extreme = math.pi  # units with T = 1; only sigma*T and E*T matter
    t_star = 1.0
    n_star = optimal_iterations(n_states, degenerate_pair=True)

    bulk_size = n_states - 3 if keep_mirror else n_states - 2
    planted_energies = -e_extreme + deltas * e_extreme / n_star  # Delta = delta*pi/(T n*)
    z_planted = np.exp(-1j * t_star * planted_energies)  # (D,)

    rng = np.random.default_rng(seed)
    d = deltas.size
    finals = np.empty((realizations, d))
    done = 0
    while done < realizations:
        block = min(batch, realizations - done)
        theta = rng.normal(0.0, sigma_t, size=(block, bulk_size))
        z = np.exp(-1j * theta)
        power_sums = np.empty((block, n_star + 1), dtype=complex)
        power_sums[:, 0] = bulk_size
        power = z.copy()
        for k in range(1, n_star + 1):
            power_sums[:, k] = power.sum(axis=1)
            power *= z
        # Planted-state powers, shared across the block.
        k_arr = np.arange(n_star + 1)
        planted_pow = z_planted[:, None] ** k_arr[None, :]  # (D, K+1)
        w = (power_sums[:, None, :] + planted_pow[None, :, :]) / (bulk_size + 1)
        w = w.reshape(block * d, n_star + 1)
        w[:, 0] = 1.0
        if keep_mirror:
            probs, _, _ = _evolve_overlap_batch(w, n_states, n_star)
        else:
            probs = _evolve_single_marked(w, n_states, n_star)
        finals[done : done + block] = probs[:, -1].reshape(block, d)
        done += block

    mean = finals.mean(axis=0)
    stderr = finals.std(axis=0, ddof=1) / math.sqrt(realizations)
    return GapStudyResult(
        n_qubits=n_qubits,
        deltas=deltas,
        mean=mean,
        stderr=stderr,
        realizations=realizations,
        n_star=n_star,
        t_star=t_star,
        sigma=sigma_t / t_star,
    )


def _evolve_single_marked(w: np.ndarray, n_states: int, steps: int) -> np.ndarray:
    """Variant of the reduced map with a single marked extreme (no mirror)."""
    probs, _, _ = _evolve_kernel(w, math.sqrt(1.0 / n_states), steps)
    return probs
