"""All-to-all disordered classical Ising model: disorder sampling and exact spectra.

Configurations are plain integers ``b`` in ``[0, 2**n_qubits)``.  Bit ``j`` of
``b`` (i.e. ``(b >> j) & 1``) encodes spin ``j`` with the convention
``bit 0 -> s_j = +1`` and ``bit 1 -> s_j = -1``.  Couplings are stored once per
unordered pair ``i < j`` in row-major order and enter the energy with a factor
``PAIR_COUNT = 2``, which reproduces the ordered double sum over ``i != j``
with symmetric couplings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

# One stored J_ij per unordered pair, counted twice by the ordered-sum convention.
PAIR_COUNT = 2.0

# 2**24 float64 energies is 128 MiB; refuse larger enumerations by default.
MAX_ENUM_QUBITS = 24

# Above this size the dense sign basis (L x n_pairs doubles) gets too large;
# fall back to the O(n^2) streaming accumulation.
_BASIS_MAX_QUBITS = 16


def pair_indices(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (i, j) index arrays over unordered pairs i < j."""
    rows, cols = np.triu_indices(n_qubits, k=1)
    return rows, cols


def n_pairs(n_qubits: int) -> int:
    return n_qubits * (n_qubits - 1) // 2


def spins_from_bits(bits: int, n_qubits: int) -> np.ndarray:
    """Spin vector (+1/-1) for configuration ``bits``."""
    return 1.0 - 2.0 * ((bits >> np.arange(n_qubits)) & 1)


def complement(bits: int, n_qubits: int) -> int:
    """Configuration with every spin flipped."""
    return bits ^ ((1 << n_qubits) - 1)


def bitstring(bits: int, n_qubits: int) -> str:
    """Binary label with qubit 0 as the rightmost character."""
    return format(bits, f"0{n_qubits}b")


@dataclass(frozen=True)
class IsingInstance:
    """One disorder realization: local fields, pair couplings, generation seed."""

    n_qubits: int
    fields: np.ndarray
    couplings: np.ndarray
    rng_seed: int

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        fields = np.asarray(self.fields, dtype=float)
        couplings = np.asarray(self.couplings, dtype=float)
        if fields.shape != (self.n_qubits,):
            raise ValueError(f"fields must have shape ({self.n_qubits},)")
        if couplings.shape != (n_pairs(self.n_qubits),):
            raise ValueError(
                f"couplings must have one entry per unordered pair "
                f"({n_pairs(self.n_qubits)} for n_qubits={self.n_qubits})"
            )
        if not (np.all(np.isfinite(fields)) and np.all(np.isfinite(couplings))):
            raise ValueError("fields and couplings must be finite")
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "couplings", couplings)

    @property
    def n_states(self) -> int:
        return 1 << self.n_qubits

    @property
    def n_pairs(self) -> int:
        return n_pairs(self.n_qubits)


def sample_instance(
    n_qubits: int,
    sigma_eps: float = 2.0,
    sigma_j: float = 2.0,
    seed: int = 0,
) -> IsingInstance:
    """Draw one disorder realization with Normal(0, sigma^2) fields and couplings.

    Fields are drawn before couplings from ``numpy.random.default_rng(seed)``,
    so results are bit-reproducible for a given seed.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if sigma_eps <= 0 or sigma_j <= 0:
        raise ValueError("standard deviations must be positive")
    rng = np.random.default_rng(seed)
    fields = rng.normal(0.0, sigma_eps, size=n_qubits)
    couplings = rng.normal(0.0, sigma_j, size=n_pairs(n_qubits))
    return IsingInstance(n_qubits, fields, couplings, int(seed))


def energy(instance: IsingInstance, bits: int) -> float:
    """Energy of one spin configuration."""
    n = instance.n_qubits
    if not 0 <= bits < instance.n_states:
        raise ValueError(f"configuration {bits} out of range for {n} qubits")
    s = spins_from_bits(bits, n)
    i_idx, j_idx = pair_indices(n)
    field_term = float(instance.fields @ s)
    pair_term = float(instance.couplings @ (s[i_idx] * s[j_idx]))
    return field_term + PAIR_COUNT * pair_term


@dataclass(frozen=True)
class Spectrum:
    """All 2**n_qubits energies indexed by configuration, with cached extremes."""

    energies: np.ndarray
    e_min: float
    e_max: float
    gap: float

    @classmethod
    def from_energies(cls, energies: np.ndarray) -> "Spectrum":
        energies = np.asarray(energies, dtype=float)
        if energies.ndim != 1 or energies.size < 2:
            raise ValueError("need a flat array of at least two energies")
        lowest_two = np.partition(energies, 1)[:2]
        return cls(
            energies=energies,
            e_min=float(energies.min()),
            e_max=float(energies.max()),
            gap=float(lowest_two[1] - lowest_two[0]),
        )

    @property
    def n_states(self) -> int:
        return self.energies.size

    @property
    def n_qubits(self) -> int:
        # floor(log2): exact for enumerated spectra, nominal for synthetic lists
        return int(self.energies.size).bit_length() - 1

    def min_indices(self) -> np.ndarray:
        return np.flatnonzero(self.energies == self.e_min)

    def max_indices(self) -> np.ndarray:
        return np.flatnonzero(self.energies == self.e_max)

    def sigma(self) -> float:
        """Spectral standard deviation (population, over all 2**n states)."""
        return float(self.energies.std())


@lru_cache(maxsize=2)
def _sign_basis(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """(L, n) spin signs and (L, n_pairs) pair products for all configurations."""
    b = np.arange(1 << n_qubits, dtype=np.int64)
    spins = 1.0 - 2.0 * ((b[:, None] >> np.arange(n_qubits)[None, :]) & 1)
    i_idx, j_idx = pair_indices(n_qubits)
    return spins, spins[:, i_idx] * spins[:, j_idx]


def _energies_streaming(instance: IsingInstance) -> np.ndarray:
    # O(L) memory: one parity pass per field / pair term.
    n = instance.n_qubits
    b = np.arange(1 << n, dtype=np.int64)
    energies = np.zeros(b.size, dtype=float)
    for j in range(n):
        energies += instance.fields[j] * (1.0 - 2.0 * ((b >> j) & 1))
    i_idx, j_idx = pair_indices(n)
    for k in range(instance.n_pairs):
        parity = ((b >> int(i_idx[k])) ^ (b >> int(j_idx[k]))) & 1
        energies += (PAIR_COUNT * instance.couplings[k]) * (1.0 - 2.0 * parity)
    return energies


def enumerate_energies(instance: IsingInstance, allow_large: bool = False) -> np.ndarray:
    """Energies of all 2**n_qubits configurations, indexed by configuration."""
    n = instance.n_qubits
    if n >= MAX_ENUM_QUBITS and not allow_large:
        raise ValueError(
            f"refusing to enumerate 2**{n} states; pass allow_large=True to override"
        )
    if n <= _BASIS_MAX_QUBITS:
        spins, pair_prod = _sign_basis(n)
        return spins @ instance.fields + pair_prod @ (PAIR_COUNT * instance.couplings)
    return _energies_streaming(instance)


def enumerate_spectrum(instance: IsingInstance, allow_large: bool = False) -> Spectrum:
    """Full exact spectrum with cached extremes and ground-state gap."""
    return Spectrum.from_energies(enumerate_energies(instance, allow_large=allow_large))


def enumerate_energies_batch(instances: list[IsingInstance]) -> np.ndarray:
    """Energies for many same-size instances at once, shape (len(instances), 2**n).

    Uses one matrix product over the shared sign basis; intended for ensemble
    statistics (gap averages and the like) at n_qubits <= 16.
    """
    if not instances:
        raise ValueError("need at least one instance")
    n = instances[0].n_qubits
    if any(inst.n_qubits != n for inst in instances):
        raise ValueError("all instances must have the same n_qubits")
    if n > _BASIS_MAX_QUBITS:
        raise ValueError(f"batch enumeration supports n_qubits <= {_BASIS_MAX_QUBITS}")
    spins, pair_prod = _sign_basis(n)
    fields = np.stack([inst.fields for inst in instances])
    couplings = np.stack([inst.couplings for inst in instances])
    return fields @ spins.T + (PAIR_COUNT * couplings) @ pair_prod.T


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

_INSTANCE_HEADER = "# grover-ising instance v1 (bit 0 -> spin +1; couplings row-major i<j, x2 in energy)"


def save_instance(instance: IsingInstance, path: str | Path) -> Path:
    """Write a human-readable key-value instance file (exact float round-trip)."""
    path = Path(path)
    lines = [
        _INSTANCE_HEADER,
        f"n_qubits = {instance.n_qubits}",
        f"seed = {instance.rng_seed}",
        "fields = " + " ".join(repr(x) for x in instance.fields.tolist()),
        "couplings = " + " ".join(repr(x) for x in instance.couplings.tolist()),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_instance(path: str | Path) -> IsingInstance:
    """Read an instance file written by :func:`save_instance`."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed instance line: {line!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    try:
        n_qubits = int(values["n_qubits"])
        seed = int(values["seed"])
        fields = np.array([float(x) for x in values["fields"].split()], dtype=float)
        raw_couplings = values["couplings"].split()
        couplings = np.array([float(x) for x in raw_couplings], dtype=float)
    except KeyError as exc:
        raise ValueError(f"instance file missing field: {exc}") from exc
    return IsingInstance(n_qubits, fields, couplings, seed)


def save_spectrum_csv(spectrum: Spectrum, path: str | Path) -> Path:
    """Export the spectrum as CSV with columns ``bitstring,energy``."""
    path = Path(path)
    n = spectrum.n_qubits
    rows = [
        f"{bitstring(b, n)},{float(spectrum.energies[b])!r}"
        for b in range(spectrum.n_states)
    ]
    path.write_text("bitstring,energy\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path
