"""Command-line front end.

Verbs: ``generate`` (write an instance file), ``run`` (single realization),
``ensemble`` (disorder ensemble), ``tune`` (grid or feedback refinement),
``gap-study`` (planted-gap saturation), ``figure N`` (emit a figure analogue's
CSV/SVG payload).

Every flag can also come from a key-value config file (``--config FILE`` with
``key = value`` lines, keys named like the long flags with underscores);
explicit flags override the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import engine, experiments, figures, gmatrix, tuning
from .experiments import ExperimentConfig, derive_seed
from .ising import enumerate_spectrum, load_instance, sample_instance, save_instance, save_spectrum_csv
from .spectral import GroverSchedule, SpectralModel, optimal_iterations, optimal_time


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="key-value config file")
    parser.add_argument("--nq", type=int, default=None, help="number of qubits")
    parser.add_argument("--sigma-eps", type=float, default=None, help="field deviation")
    parser.add_argument("--sigma-j", type=float, default=None, help="coupling deviation")
    parser.add_argument("--realizations", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument(
        "--schedule", choices=("analytic", "grid", "feedback"), default=None
    )
    parser.add_argument("--t", type=float, default=None, help="evolution time override")
    parser.add_argument("--n", type=int, default=None, help="iteration count override")
    parser.add_argument("--e-tar", type=float, default=None, help="target energy")
    parser.add_argument("--shots", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--bins", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--instance", type=str, default=None, help="instance file to load")


_DEFAULTS = {
    "nq": 10,
    "sigma_eps": 2.0,
    "sigma_j": 2.0,
    "realizations": 100,
    "seed": 0,
    "schedule": "analytic",
    "t": None,
    "n": None,
    "e_tar": None,
    "shots": 1024,
    "out": "out",
    "bins": 60,
    "threads": 1,
    "instance": None,
}

_CONFIG_TYPES = {
    "nq": int,
    "realizations": int,
    "seed": int,
    "shots": int,
    "bins": int,
    "threads": int,
    "n": int,
    "sigma_eps": float,
    "sigma_j": float,
    "t": float,
    "e_tar": float,
    "schedule": str,
    "out": str,
    "instance": str,
}


def parse_config_file(path: str | Path) -> dict:
    """Read ``key = value`` lines; blank lines and # comments are skipped."""
    values: dict = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {line!r}")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ValueError(f"unknown config key: {key!r}")
        values[key] = _CONFIG_TYPES[key](val.strip())
    return values


def _resolve(args: argparse.Namespace) -> dict:
    """Merge builtin defaults, config file, and explicit flags (highest wins).

    ``merged["_provided"]`` records which keys came from the user (file or
    flag), letting verb handlers pick their own fallbacks for the rest.
    """
    merged = dict(_DEFAULTS)
    provided: set[str] = set()
    if getattr(args, "config", None):
        file_values = parse_config_file(args.config)
        merged.update(file_values)
        provided.update(file_values)
    for key in _DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
            provided.add(key)
    merged["_provided"] = provided
    return merged


def _opt(opts: dict, key: str, fallback):
    """User-provided value for ``key``, else the verb-specific fallback."""
    return opts[key] if key in opts["_provided"] else fallback


def _out_dir(opts: dict) -> Path:
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_or_sample(opts: dict):
    if opts["instance"]:
        return load_instance(opts["instance"])
    return sample_instance(opts["nq"], opts["sigma_eps"], opts["sigma_j"], seed=opts["seed"])


def _cmd_generate(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    instance = sample_instance(opts["nq"], opts["sigma_eps"], opts["sigma_j"], seed=opts["seed"])
    path = save_instance(instance, out / f"instance_nq{opts['nq']}_seed{opts['seed']}.txt")
    print(f"wrote {path}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    instance = _load_or_sample(opts)
    spectrum = enumerate_spectrum(instance)
    sigma = spectrum.sigma()
    model = SpectralModel(sigma=sigma, n_qubits=instance.n_qubits)
    t = opts["t"] if opts["t"] is not None else optimal_time(model)
    n = opts["n"] if opts["n"] is not None else optimal_iterations(spectrum.n_states, True)
    schedule = GroverSchedule(t, n, origin="manual" if opts["t"] else "analytic")
    final, trace = engine.run(spectrum.energies, schedule, trace_mode="summary")
    paths = [
        save_spectrum_csv(spectrum, out / "spectrum.csv"),
        engine.save_trace_csv(trace, out / "trace.csv"),
        engine.save_snapshot_csv(final, out / "final_state.csv"),
    ]
    for p in paths:
        print(f"wrote {p}")
    print(
        f"sigma={sigma:.6g} T={t:.6g} n={n} "
        f"p_success={trace.p_success[-1]:.6g}"
    )
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    config = ExperimentConfig(
        n_qubits=opts["nq"],
        sigma_eps=opts["sigma_eps"],
        sigma_j=opts["sigma_j"],
        realizations=opts["realizations"],
        schedule=opts["schedule"],
        seed=opts["seed"],
        bins=opts["bins"],
        evolution_time=opts["t"],
        iterations=opts["n"],
        shots=opts["shots"],
        threads=opts["threads"],
    )
    result = experiments.run_ensemble(config)
    paths = [
        experiments.save_records_csv(result, out / "records.csv"),
        experiments.save_histogram_csv(result.energy_hist, result.energy_initial, out / "density_energy.csv"),
        experiments.save_histogram_csv(result.xi_hist, result.xi_initial, out / "density_xi.csv"),
        experiments.save_profile_csv(result.xi_profile, out / "profile_xi.csv", "xi"),
        experiments.save_summary(result, out / "summary.txt"),
    ]
    for p in paths:
        print(f"wrote {p}")
    print(
        f"mean extreme-pair probability: {result.mean_extreme_probability:.6g}; "
        f"verified fraction: {result.verified_fraction:.6g}"
    )
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    instance = _load_or_sample(opts)
    if opts["schedule"] == "feedback":
        report = tuning.feedback_tune(
            instance,
            opts["e_tar"] if opts["e_tar"] is not None else "extreme",
            n_shots=opts["shots"],
            seed=derive_seed(opts["seed"], 1),
            n=opts["n"],
        )
    elif opts["e_tar"] is not None:
        report = tuning.target_energy_mode(instance, opts["e_tar"], n=opts["n"], k_points=20)
    else:
        report = tuning.grid_tune(instance, n=opts["n"], objective="extreme-abs")
    paths = [
        tuning.save_report(report, out / "tune_report.txt"),
        tuning.save_history_csv(report, out / "tune_history.csv"),
    ]
    for p in paths:
        print(f"wrote {p}")
    print(
        f"T*={report.t_star_analytic:.6g} T_opt={report.t_opt:.6g} "
        f"n={report.n_used} P={report.target_probability:.6g}"
    )
    return 0


def _cmd_gap_study(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    deltas = np.linspace(0.0, 4.0, 17)
    result = gmatrix.gap_study(
        opts["nq"], deltas, realizations=opts["realizations"], seed=opts["seed"]
    )
    paths = figures.emit_figure([result], "fig4", out)
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    opts = _resolve(args)
    out = _out_dir(opts)
    number = args.number
    seed = opts["seed"]
    paths: list[Path]
    if number == 2:
        nq = opts["nq"]
        instance = sample_instance(nq, opts["sigma_eps"], opts["sigma_j"], seed=seed)
        spectrum = enumerate_spectrum(instance)
        model = SpectralModel(sigma=spectrum.sigma(), n_qubits=nq)
        t_star = optimal_time(model)
        snapshots = []
        for n_iter in (1, optimal_iterations(spectrum.n_states, True)):
            final, _ = engine.run(spectrum.energies, GroverSchedule(t_star, n_iter), "success")
            snapshots.append((n_iter, final))
        paths = figures.emit_figure(snapshots, "fig2", out)
    elif number == 3:
        realizations = _opt(opts, "realizations", 400)
        curves = [
            gmatrix.success_probability_curve(nq, st * np.pi, realizations, seed=derive_seed(seed, nq, k))
            for nq in (opts["nq"],)
            for k, st in enumerate((0.01, 0.1, 0.25))
        ]
        paths = figures.emit_figure(curves, "fig3", out)
    elif number == 4:
        deltas = np.linspace(0.0, 4.0, 17)
        studies = [
            gmatrix.gap_study(nq, deltas, realizations=opts["realizations"], seed=derive_seed(seed, nq))
            for nq in (10, 14, 18)
        ]
        paths = figures.emit_figure(studies, "fig4", out)
    elif number == 5:
        realizations = _opt(opts, "realizations", 10_000)
        rows = experiments.gap_statistics(
            range(6, 15), realizations, seed=seed,
            sigma_eps=opts["sigma_eps"], sigma_j=opts["sigma_j"],
        )
        paths = figures.emit_figure(rows, "fig5", out)
    elif number in (6, 7, 8, 9):
        config = ExperimentConfig(
            n_qubits=_opt(opts, "nq", 13),
            sigma_eps=opts["sigma_eps"],
            sigma_j=opts["sigma_j"],
            realizations=_opt(opts, "realizations", 400),
            schedule="analytic" if number in (6, 7) else "grid",
            seed=seed,
            bins=opts["bins"],
            threads=opts["threads"],
        )
        result = experiments.run_ensemble(config)
        paths = figures.emit_figure(result, f"fig{number}", out)
    elif number == 10:
        rows = experiments.optimal_time_study(
            range(6, 13), realizations=opts["realizations"], seed=seed,
            sigma_eps=opts["sigma_eps"], sigma_j=opts["sigma_j"],
        )
        paths = figures.emit_figure(rows, "fig10", out)
    elif number == 11:
        nq = _opt(opts, "nq", 6)
        scan = experiments.time_scan_study(
            nq, realizations=opts["realizations"], seed=seed,
            sigma_eps=opts["sigma_eps"], sigma_j=opts["sigma_j"],
        )
        paths = figures.emit_figure(scan, "fig11", out)
    elif number == 12:
        nq = _opt(opts, "nq", 7)
        realizations = _opt(opts, "realizations", 50)
        curve = experiments.iteration_scan_study(
            nq, realizations=realizations, seed=seed,
            sigma_eps=opts["sigma_eps"], sigma_j=opts["sigma_j"],
        )
        paths = figures.emit_figure(curve, "fig12", out)
    elif number == 13:
        nq = _opt(opts, "nq", 8)
        realizations = _opt(opts, "realizations", 400)
        result, e_tar = experiments.target_energy_ensemble(
            nq, realizations, seed,
            sigma_eps=opts["sigma_eps"], sigma_j=opts["sigma_j"],
            bins=opts["bins"], e_tar=opts["e_tar"],
        )
        paths = figures.emit_figure((result, e_tar), "fig13", out)
    else:
        raise SystemExit(f"no figure analogue numbered {number}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grover-ising",
        description="Search lowest/highest-energy states of disordered Ising models "
        "by simulated amplitude amplification.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, handler in (
        ("generate", _cmd_generate),
        ("run", _cmd_run),
        ("ensemble", _cmd_ensemble),
        ("tune", _cmd_tune),
        ("gap-study", _cmd_gap_study),
    ):
        p = sub.add_parser(verb)
        _add_common(p)
        p.set_defaults(handler=handler)
    p = sub.add_parser("figure")
    p.add_argument("number", type=int, help="figure analogue number (2..13)")
    _add_common(p)
    p.set_defaults(handler=_cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
