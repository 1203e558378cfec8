import math

import numpy as np
import pytest

from grover_ising.engine import run
from grover_ising.ising import IsingInstance, Spectrum, n_pairs, sample_instance
from grover_ising.spectral import GroverSchedule, optimal_iterations
from grover_ising.tuning import (
    feedback_tune,
    first_peak,
    grid_tune,
    save_history_csv,
    save_report,
    scan_iterations,
    target_energy_mode,
)


def two_marked_spectrum(n_states, e=1.0):
    energies = np.zeros(n_states)
    energies[0], energies[-1] = -e, e
    return energies


def test_grid_tune_finds_exact_flip_on_grid():
    energies = two_marked_spectrum(64, e=2.0)
    t_flip = math.pi / 2.0
    # 11-point window that contains the flip time exactly
    report = grid_tune(
        energies, window=(t_flip - 0.5, t_flip + 0.5), k_points=11,
        n=optimal_iterations(64, True), objective="extreme-pair",
    )
    assert report.t_opt == pytest.approx(t_flip, abs=1e-12)
    assert report.target_probability > 0.99
    assert len(report.history) == 11
    assert report.origin == "grid-tuned"


def test_grid_tune_refinement_never_hurts():
    # nested refinement (2k - 1 points shares the coarse grid) cannot lower the max
    inst = sample_instance(8, 2.0, 2.0, seed=3)
    coarse = grid_tune(inst, k_points=10, objective="extreme-abs")
    fine = grid_tune(inst, k_points=19, objective="extreme-abs")
    assert fine.target_probability >= coarse.target_probability - 1e-12


def test_grid_tune_tie_breaks_to_smallest_time():
    # with zero iterations the objective is T-independent, an exact tie
    spec = Spectrum.from_energies(np.array([0.0, 1.0, -1.0, 0.5]))
    report = grid_tune(spec, window=(0.5, 2.5), k_points=9, n=0, objective="extreme-pair")
    assert report.t_opt == pytest.approx(0.5)


def test_grid_tune_validation():
    inst = sample_instance(6, 2.0, 2.0, seed=0)
    with pytest.raises(ValueError):
        grid_tune(inst, window=(2.0, 1.0))
    with pytest.raises(ValueError):
        grid_tune(inst, k_points=1)
    with pytest.raises(ValueError):
        grid_tune(inst, objective="target")  # e_tar missing
    with pytest.raises(ValueError):
        grid_tune(inst, objective="luck")


def test_grid_tune_accepts_instance_spectrum_or_array():
    inst = sample_instance(6, 2.0, 2.0, seed=1)
    from grover_ising.ising import enumerate_spectrum

    spec = enumerate_spectrum(inst)
    r1 = grid_tune(inst, k_points=8, objective="extreme-abs")
    r2 = grid_tune(spec, k_points=8, objective="extreme-abs")
    r3 = grid_tune(spec.energies, k_points=8, objective="extreme-abs")
    assert r1.t_opt == r2.t_opt == r3.t_opt


def test_feedback_time_follows_phase_flip_rule():
    inst = sample_instance(8, 2.0, 2.0, seed=5)
    from grover_ising.ising import enumerate_spectrum

    spec = enumerate_spectrum(inst)
    report = feedback_tune(inst, "extreme", n_shots=512, max_rounds=4, seed=11)
    # every refined time is exactly pi / |selected energy|
    for rnd, t, best_e, _prob in report.history[1:]:
        prev_e = report.history[rnd - 1][2]
        assert t == pytest.approx(math.pi / abs(prev_e), rel=1e-12)
    assert report.t_opt == pytest.approx(math.pi / abs(report.history[-1][2]))
    assert np.any(np.isclose(spec.energies, report.history[-1][2]))
    assert report.origin == "feedback-tuned"


def test_feedback_converges_within_two_rounds_at_small_sizes():
    # exhaustive over seeds at n_qubits <= 8: once the largest-|E| state is
    # isolated enough that T* sits near its flip time, the selected energy
    # repeats immediately and the loop stops after two rounds
    converged_fast = 0
    total = 0
    for nq in (6, 7, 8):
        for s in range(10):
            inst = sample_instance(nq, 2.0, 2.0, seed=40 + s)
            report = feedback_tune(inst, "extreme", n_shots=1024, max_rounds=6, seed=s)
            selected = [row[2] for row in report.history]
            total += 1
            if len(selected) >= 2 and selected[-1] == selected[-2]:
                converged_fast += len(report.history) <= 2
    assert converged_fast >= 0.7 * total


def test_feedback_rejects_flat_spectrum():
    inst = IsingInstance(5, np.zeros(5), np.zeros(n_pairs(5)), 0)
    with pytest.raises(ValueError):
        feedback_tune(inst, "extreme", n_shots=16, max_rounds=2, seed=0)


def test_feedback_validation():
    inst = sample_instance(5, 2.0, 2.0, seed=1)
    with pytest.raises(ValueError):
        feedback_tune(inst, "extreme", n_shots=0)
    with pytest.raises(ValueError):
        feedback_tune(inst, "extreme", max_rounds=0)
    with pytest.raises(ValueError):
        feedback_tune(inst, "both-ends")


def test_feedback_finds_true_extreme_most_of_the_time():
    from grover_ising.experiments import brute_force_extremes
    from grover_ising.engine import measure, most_frequent

    hits = 0
    trials = 30
    for s in range(trials):
        inst = sample_instance(8, 2.0, 2.0, seed=1000 + s)
        from grover_ising.ising import enumerate_spectrum

        spec = enumerate_spectrum(inst)
        report = feedback_tune(inst, "extreme", n_shots=1024, max_rounds=5, seed=s)
        final, _ = run(spec.energies, report.schedule(), trace_mode="success")
        top = most_frequent(measure(final, 1024, seed=s + 7))
        amin, amax, _, _ = brute_force_extremes(inst)
        hits += top in (amin, amax)
    assert hits >= 0.8 * trials


def test_scan_iterations_two_marked_closed_form():
    L = 128
    energies = two_marked_spectrum(L, e=1.0)
    curve = scan_iterations(energies, math.pi, 24)
    theta = math.asin(math.sqrt(2.0 / L))
    # largest-|E| state is one of the pair, carrying half the pair mass
    expected = 0.5 * np.sin((2 * np.arange(25) + 1) * theta) ** 2
    np.testing.assert_allclose(curve, expected, atol=1e-10)


def test_scan_iterations_smooth_near_peak():
    L = 128
    energies = two_marked_spectrum(L, e=1.0)
    curve = scan_iterations(energies, math.pi, 20)
    peak = first_peak(curve)
    for neighbour in (peak - 1, peak + 1):
        assert abs(curve[neighbour] - curve[peak]) <= 0.15 * curve[peak]


def test_first_peak_picks_first_local_maximum():
    assert first_peak(np.array([0.0, 0.5, 1.0, 0.7, 1.2, 0.1])) == 2
    assert first_peak(np.array([0.0, 0.2, 0.4, 0.9])) == 3


def test_target_energy_mode_reduces_to_extreme_search():
    inst = sample_instance(8, 2.0, 2.0, seed=21)
    from grover_ising.ising import enumerate_spectrum

    spec = enumerate_spectrum(inst)
    target = spec.e_min if abs(spec.e_min) >= spec.e_max else spec.e_max
    report = target_energy_mode(spec, target, k_points=15)
    abs_report = grid_tune(
        spec,
        window=(math.pi / abs(target) - 0.5 / spec.sigma(), math.pi / abs(target) + 0.5 / spec.sigma()),
        k_points=15,
        n=report.n_used,
        objective="extreme-abs",
    )
    assert report.target_probability == pytest.approx(abs_report.target_probability, rel=1e-9)


def test_target_energy_mode_amplifies_odd_harmonics():
    # states at +-E and +-3E all flip at T = pi/E and get amplified together
    L = 64
    e_tar = 2.0
    energies = np.zeros(L)
    energies[0], energies[1] = -e_tar, e_tar
    energies[2], energies[3] = -3 * e_tar, 3 * e_tar
    final, _ = run(energies, GroverSchedule(math.pi / e_tar, 1), trace_mode="success")
    probs = np.abs(final.amplitudes) ** 2
    uniform = 1.0 / L
    for idx in range(4):
        assert probs[idx] > 2.0 * uniform
    assert probs[10] < uniform


def test_target_energy_mode_warns_inside_sigma():
    inst = sample_instance(8, 2.0, 2.0, seed=8)
    from grover_ising.ising import enumerate_spectrum

    spec = enumerate_spectrum(inst)
    with pytest.warns(UserWarning):
        target_energy_mode(spec, 0.5 * spec.sigma())
    with pytest.raises(ValueError):
        target_energy_mode(spec, 0.0)


def test_target_energy_mode_reports_band():
    inst = sample_instance(9, 2.0, 2.0, seed=13)
    from grover_ising.ising import enumerate_spectrum

    spec = enumerate_spectrum(inst)
    e_tar = 1.5 * spec.sigma()
    report = target_energy_mode(spec, e_tar, k_points=12)
    assert report.band_probability is not None
    assert report.band_probability >= report.target_probability - 1e-12
    assert report.target_energy == e_tar


def test_tuning_never_hurts_on_average():
    # tuned extreme-pair probability beats the fixed analytic schedule
    from grover_ising.ising import enumerate_spectrum
    from grover_ising.spectral import SpectralModel, optimal_time

    fixed, tuned = [], []
    for s in range(40):
        inst = sample_instance(9, 2.0, 2.0, seed=500 + s)
        spec = enumerate_spectrum(inst)
        n_star = optimal_iterations(spec.n_states, True)
        t_star = optimal_time(SpectralModel(sigma=spec.sigma(), n_qubits=9))
        final, trace = run(spec.energies, GroverSchedule(t_star, n_star), "summary")
        fixed.append(trace.p_min_state[-1] + trace.p_max_state[-1])
        report = grid_tune(spec, k_points=20, n=n_star, objective="extreme-pair")
        tuned.append(report.target_probability)
    assert np.mean(tuned) > np.mean(fixed)


def test_report_serialization(tmp_path):
    inst = sample_instance(6, 2.0, 2.0, seed=2)
    report = grid_tune(inst, k_points=6, objective="extreme-abs")
    text_path = save_report(report, tmp_path / "report.txt")
    content = text_path.read_text()
    assert "t_opt" in content and "grid-tuned" in content
    csv_path = save_history_csv(report, tmp_path / "history.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "round,T,best_energy,probability"
    assert len(lines) == 7
