import math

import numpy as np
import pytest

from grover_ising.ising import (
    IsingInstance,
    bitstring,
    complement,
    energy,
    enumerate_energies,
    enumerate_energies_batch,
    enumerate_spectrum,
    load_instance,
    n_pairs,
    sample_instance,
    save_instance,
    save_spectrum_csv,
    spins_from_bits,
)


def naive_energy(instance: IsingInstance, bits: int) -> float:
    """Independent double-loop oracle used to cross-check enumeration."""
    n = instance.n_qubits
    s = [1.0 if ((bits >> j) & 1) == 0 else -1.0 for j in range(n)]
    e = sum(instance.fields[j] * s[j] for j in range(n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            e += 2.0 * instance.couplings[k] * s[i] * s[j]
            k += 1
    return e


def test_sample_instance_counts():
    inst = sample_instance(10, 2.0, 2.0, seed=1)
    assert inst.fields.shape == (10,)
    assert inst.couplings.shape == (45,)
    assert inst.rng_seed == 1


def test_sample_instance_deterministic():
    a = sample_instance(8, 2.0, 2.0, seed=99)
    b = sample_instance(8, 2.0, 2.0, seed=99)
    np.testing.assert_array_equal(a.fields, b.fields)
    np.testing.assert_array_equal(a.couplings, b.couplings)


def test_single_qubit_instance_has_no_pairs():
    inst = sample_instance(1, 2.0, 2.0, seed=0)
    assert inst.fields.shape == (1,)
    assert inst.couplings.shape == (0,)


def test_sample_instance_rejects_bad_args():
    with pytest.raises(ValueError):
        sample_instance(0, 2.0, 2.0, seed=0)
    with pytest.raises(ValueError):
        sample_instance(4, -1.0, 2.0, seed=0)
    with pytest.raises(ValueError):
        sample_instance(4, 2.0, 0.0, seed=0)


def test_instance_validation():
    with pytest.raises(ValueError):
        IsingInstance(3, np.zeros(3), np.zeros(2), 0)  # needs 3 couplings
    with pytest.raises(ValueError):
        IsingInstance(3, np.array([1.0, np.inf, 0.0]), np.zeros(3), 0)


def test_energy_hand_case():
    # two qubits, eps = (1, -1), J_01 = 0.5, config 00 -> spins (+1, +1)
    inst = IsingInstance(2, np.array([1.0, -1.0]), np.array([0.5]), 0)
    assert energy(inst, 0b00) == pytest.approx(1.0 - 1.0 + 2.0 * 0.5)


def test_energy_null_hamiltonian():
    inst = IsingInstance(3, np.zeros(3), np.zeros(3), 0)
    for b in range(8):
        assert energy(inst, b) == 0.0


def test_field_term_odd_under_global_flip():
    rng = np.random.default_rng(3)
    inst = IsingInstance(5, rng.normal(size=5), np.zeros(n_pairs(5)), 0)
    for b in (0, 7, 19, 31):
        assert energy(inst, complement(b, 5)) == pytest.approx(-energy(inst, b))


def test_energy_rejects_out_of_range():
    inst = sample_instance(3, 2.0, 2.0, seed=0)
    with pytest.raises(ValueError):
        energy(inst, 8)


def test_enumerate_two_qubit_coupling_only():
    inst = IsingInstance(2, np.zeros(2), np.array([1.0]), 0)
    spec = enumerate_spectrum(inst)
    # aligned pairs (00, 11) at +2, anti-aligned (01, 10) at -2
    np.testing.assert_allclose(spec.energies, [2.0, -2.0, -2.0, 2.0])
    assert spec.e_min == -2.0
    assert spec.e_max == 2.0
    assert spec.gap == 0.0


def test_enumerate_matches_naive_oracle():
    for nq, seed in ((6, 0), (9, 1), (12, 2)):
        inst = sample_instance(nq, 2.0, 2.0, seed=seed)
        energies = enumerate_energies(inst)
        sampled = [0, 1, inst.n_states // 3, inst.n_states - 1]
        if nq <= 9:
            sampled = range(inst.n_states)
        for b in sampled:
            assert energies[b] == pytest.approx(naive_energy(inst, b), abs=1e-10)


def test_enumerate_basic_shape_and_order_stats():
    inst = sample_instance(7, 2.0, 2.0, seed=4)
    spec = enumerate_spectrum(inst)
    assert spec.n_states == 128
    assert spec.e_min <= spec.energies.mean() <= spec.e_max
    assert spec.gap >= 0.0
    lowest_two = np.sort(spec.energies)[:2]
    assert spec.gap == pytest.approx(lowest_two[1] - lowest_two[0])


def test_spectrum_symmetric_under_complement_when_fields_vanish():
    rng = np.random.default_rng(8)
    inst = IsingInstance(8, np.zeros(8), rng.normal(size=n_pairs(8)), 0)
    energies = enumerate_energies(inst)
    b = np.arange(256)
    np.testing.assert_allclose(energies[b], energies[255 - b], atol=1e-12)


def test_streaming_path_matches_basis_path():
    inst = sample_instance(10, 2.0, 2.0, seed=6)
    from grover_ising.ising import _energies_streaming

    np.testing.assert_allclose(
        _energies_streaming(inst), enumerate_energies(inst), atol=1e-9
    )


def test_enumerate_size_guard():
    inst = IsingInstance(24, np.zeros(24), np.zeros(n_pairs(24)), 0)
    with pytest.raises(ValueError):
        enumerate_spectrum(inst)


def test_enumerate_batch_matches_single():
    instances = [sample_instance(6, 2.0, 2.0, seed=s) for s in range(5)]
    batch = enumerate_energies_batch(instances)
    for row, inst in zip(batch, instances):
        np.testing.assert_allclose(row, enumerate_energies(inst), atol=1e-10)


def test_disorder_moments_converge():
    # 10^4 instances: sample means within 4 standard errors of 0, deviations
    # within 4 standard errors of sigma.
    reps = 10_000
    nq = 6
    fields = np.empty((reps, nq))
    couplings = np.empty((reps, n_pairs(nq)))
    for k in range(reps):
        inst = sample_instance(nq, 2.0, 2.0, seed=k)
        fields[k] = inst.fields
        couplings[k] = inst.couplings
    for values, sigma in ((fields.ravel(), 2.0), (couplings.ravel(), 2.0)):
        se_mean = sigma / math.sqrt(values.size)
        assert abs(values.mean()) < 4 * se_mean
        se_std = sigma / math.sqrt(2 * values.size)
        assert abs(values.std(ddof=1) - sigma) < 4 * se_std


def test_spins_and_bitstring_convention():
    np.testing.assert_array_equal(spins_from_bits(0b0101, 4), [-1.0, 1.0, -1.0, 1.0])
    assert bitstring(0b0101, 4) == "0101"
    assert complement(0b0101, 4) == 0b1010


def test_instance_file_round_trip(tmp_path):
    inst = sample_instance(7, 2.0, 2.0, seed=123)
    path = save_instance(inst, tmp_path / "inst.txt")
    back = load_instance(path)
    assert back.n_qubits == inst.n_qubits
    assert back.rng_seed == inst.rng_seed
    np.testing.assert_array_equal(back.fields, inst.fields)
    np.testing.assert_array_equal(back.couplings, inst.couplings)


def test_spectrum_csv_export(tmp_path):
    inst = sample_instance(3, 2.0, 2.0, seed=5)
    spec = enumerate_spectrum(inst)
    path = save_spectrum_csv(spec, tmp_path / "spec.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "bitstring,energy"
    assert len(lines) == 9
    label, value = lines[1].split(",")
    assert label == "000"
    assert float(value) == pytest.approx(spec.energies[0])
