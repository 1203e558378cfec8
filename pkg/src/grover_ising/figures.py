"""CSV + SVG emitters for the survey figures.

Every figure analogue writes its data as CSV (the authoritative artifact; all
verification reads these) and a presentation-only SVG.  Payloads are validated
before any file is created, so a bad input never leaves partial outputs.

Figure analogues and their CSV schemas:

* fig2  - single-realization probability snapshots: ``step,index,energy,probability``
* fig3  - reduced-model success curves: ``sigmaT,n,p_success`` (one file per size)
* fig4  - planted-gap saturation: ``nq,delta,p_success_mean,p_success_stderr``
* fig5  - gap statistics: ``nq,mean_gap,gap_estimate``
* fig6/fig8 - binned P_j against xi_j: ``xi_lo,xi_hi,mean_probability,count``
* fig7/fig9 - weighted densities, energy and xi files:
  ``bin_lo,bin_hi,mass,density,initial_density``
* fig10 - optimal-time agreement: ``nq,mean_t_opt,t_star_numeric,t_star_asymptotic``
* fig11 - time scan: ``t_over_t_star,mean_probability``
* fig12 - iteration scan: ``n,mean_probability``
* fig13 - arbitrary-target run: ``e_tar,bin_lo,bin_hi,mean_probability``
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .engine import AmplitudeState, probabilities
from .experiments import (
    EnsembleResult,
    GapStatsRow,
    OptimalTimeRow,
    save_histogram_csv,
    save_profile_csv,
)
from .gmatrix import GapStudyResult, SuccessCurve

FIGURE_KINDS = (
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7",
    "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
)


def _ensure_outdir(out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _plot_lines(path: Path, xs, ys, labels, xlabel: str, ylabel: str, title: str,
                scatter: bool = False) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for x, y, label in zip(xs, ys, labels):
        if scatter:
            ax.plot(x, y, "o", ms=3, label=label)
        else:
            ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if any(labels):
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _write_csv(path: Path, header: str, rows: list[str]) -> None:
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


def emit_figure(result, kind: str, out_dir: str | Path) -> list[Path]:
    """Write the CSV+SVG pair(s) for one figure analogue.

    ``result`` is the payload matching ``kind``: an :class:`EnsembleResult`
    for fig6-9 and fig13, lists of study rows for fig3/4/5/10, curve tuples
    for fig11/12, and snapshot pairs for fig2 (see the module docstring).
    """
    if kind not in FIGURE_KINDS:
        raise ValueError(f"kind must be one of {FIGURE_KINDS}")
    handler = _HANDLERS[kind]
    return handler(result, _ensure_outdir(out_dir))


def _emit_fig2(result, out_dir: Path) -> list[Path]:
    # result: list of (step, AmplitudeState)
    if not result:
        raise ValueError("empty result: no snapshots")
    rows = []
    for step, state in result:
        if not isinstance(state, AmplitudeState):
            raise ValueError("fig2 payload must be (step, AmplitudeState) pairs")
        probs = probabilities(state)
        rows.extend(
            f"{step},{j},{float(state.energies[j])!r},{float(probs[j])!r}"
            for j in range(state.n_levels)
        )
    csv_path = out_dir / "fig2_snapshots.csv"
    _write_csv(csv_path, "step,index,energy,probability", rows)
    svg_path = out_dir / "fig2_snapshots.svg"
    xs, ys, labels = [], [], []
    for step, state in result:
        order = np.argsort(state.energies)
        xs.append(state.energies[order])
        ys.append(probabilities(state)[order])
        labels.append(f"n={step}")
    _plot_lines(svg_path, xs, ys, labels, "E_j", "P_j", "state probabilities", scatter=True)
    return [csv_path, svg_path]


def _emit_fig3(result, out_dir: Path) -> list[Path]:
    # result: list[SuccessCurve]
    if not result:
        raise ValueError("empty result: no success curves")
    if not all(isinstance(c, SuccessCurve) for c in result):
        raise ValueError("fig3 payload must be SuccessCurve objects")
    paths = []
    for nq in sorted({c.n_qubits for c in result}):
        curves = [c for c in result if c.n_qubits == nq]
        rows = [
            f"{float(c.sigma_t)!r},{n},{float(c.probabilities[n])!r}"
            for c in curves
            for n in range(c.probabilities.size)
        ]
        csv_path = out_dir / f"fig3_nq{nq}.csv"
        _write_csv(csv_path, "sigmaT,n,p_success", rows)
        svg_path = out_dir / f"fig3_nq{nq}.svg"
        _plot_lines(
            svg_path,
            [np.arange(c.probabilities.size) for c in curves],
            [c.probabilities for c in curves],
            [f"sigmaT={c.sigma_t:.4g}" for c in curves],
            "n",
            "P_pair",
            f"success dynamics, {nq} qubits",
        )
        paths.extend([csv_path, svg_path])
    return paths


def _emit_fig4(result, out_dir: Path) -> list[Path]:
    # result: list[GapStudyResult]
    if not result:
        raise ValueError("empty result: no gap studies")
    if not all(isinstance(g, GapStudyResult) for g in result):
        raise ValueError("fig4 payload must be GapStudyResult objects")
    rows = [
        f"{g.n_qubits},{float(g.deltas[k])!r},{float(g.mean[k])!r},{float(g.stderr[k])!r}"
        for g in result
        for k in range(g.deltas.size)
    ]
    csv_path = out_dir / "fig4_gap_saturation.csv"
    _write_csv(csv_path, "nq,delta,p_success_mean,p_success_stderr", rows)
    svg_path = out_dir / "fig4_gap_saturation.svg"
    _plot_lines(
        svg_path,
        [g.deltas for g in result],
        [g.mean for g in result],
        [f"nq={g.n_qubits}" for g in result],
        "delta",
        "P_pair(n*)",
        "success vs planted dimensionless gap",
    )
    return [csv_path, svg_path]


def _emit_fig5(result, out_dir: Path) -> list[Path]:
    # result: list[GapStatsRow]
    if not result:
        raise ValueError("empty result: no gap statistics")
    if not all(isinstance(r, GapStatsRow) for r in result):
        raise ValueError("fig5 payload must be GapStatsRow objects")
    rows = [f"{r.n_qubits},{r.mean_gap!r},{r.estimate!r}" for r in result]
    csv_path = out_dir / "fig5_gap_statistics.csv"
    _write_csv(csv_path, "nq,mean_gap,gap_estimate", rows)
    svg_path = out_dir / "fig5_gap_statistics.svg"
    nqs = np.array([r.n_qubits for r in result])
    _plot_lines(
        svg_path,
        [nqs, nqs],
        [np.array([r.mean_gap for r in result]), np.array([r.estimate for r in result])],
        ["ensemble mean", "sigma/sqrt(2 ln N_s)"],
        "N_q",
        "gap",
        "ground-state gap vs size",
    )
    return [csv_path, svg_path]


def _require_ensemble(result) -> EnsembleResult:
    if not isinstance(result, EnsembleResult):
        raise ValueError("payload must be an EnsembleResult")
    if not result.records:
        raise ValueError("empty result: no realizations")
    return result


def _emit_xi_profile(result, out_dir: Path, stem: str) -> list[Path]:
    result = _require_ensemble(result)
    csv_path = save_profile_csv(result.xi_profile, out_dir / f"{stem}_xi_profile.csv", "xi")
    svg_path = out_dir / f"{stem}_xi_profile.svg"
    centers = 0.5 * (result.xi_profile.edges[:-1] + result.xi_profile.edges[1:])
    _plot_lines(
        svg_path,
        [centers],
        [result.xi_profile.mean_probability],
        [None],
        "xi",
        "mean P_j",
        f"probability vs rescaled energy ({result.config.schedule})",
        scatter=True,
    )
    return [csv_path, svg_path]


def _emit_densities(result, out_dir: Path, stem: str) -> list[Path]:
    result = _require_ensemble(result)
    paths = [
        save_histogram_csv(result.energy_hist, result.energy_initial, out_dir / f"{stem}_energy.csv"),
        save_histogram_csv(result.xi_hist, result.xi_initial, out_dir / f"{stem}_xi.csv"),
    ]
    for label, hist, initial in (
        ("energy", result.energy_hist, result.energy_initial),
        ("xi", result.xi_hist, result.xi_initial),
    ):
        centers = 0.5 * (hist.edges[:-1] + hist.edges[1:])
        svg_path = out_dir / f"{stem}_{label}.svg"
        _plot_lines(
            svg_path,
            [centers, centers],
            [hist.density, initial.density],
            ["final", "initial"],
            label,
            "density",
            f"weighted density over {label} ({result.config.schedule})",
        )
        paths.append(svg_path)
    return paths


def _emit_fig10(result, out_dir: Path) -> list[Path]:
    # result: list[OptimalTimeRow]
    if not result:
        raise ValueError("empty result: no optimal-time rows")
    if not all(isinstance(r, OptimalTimeRow) for r in result):
        raise ValueError("fig10 payload must be OptimalTimeRow objects")
    rows = [
        f"{r.n_qubits},{r.mean_t_opt!r},{r.t_star_numeric!r},{r.t_star_asymptotic!r}"
        for r in result
    ]
    csv_path = out_dir / "fig10_optimal_time.csv"
    _write_csv(csv_path, "nq,mean_t_opt,t_star_numeric,t_star_asymptotic", rows)
    svg_path = out_dir / "fig10_optimal_time.svg"
    nqs = np.array([r.n_qubits for r in result])
    _plot_lines(
        svg_path,
        [nqs, nqs, nqs],
        [
            np.array([r.mean_t_opt for r in result]),
            np.array([r.t_star_numeric for r in result]),
            np.array([r.t_star_asymptotic for r in result]),
        ],
        ["tuned (mean)", "erfc condition", "asymptotic"],
        "N_q",
        "T",
        "optimal evolution time vs size",
    )
    return [csv_path, svg_path]


def _emit_fig11(result, out_dir: Path) -> list[Path]:
    # result: (fractions_of_t_star, mean_probability)
    fractions, mean_p = result
    fractions = np.asarray(fractions, float)
    mean_p = np.asarray(mean_p, float)
    if fractions.size == 0 or fractions.shape != mean_p.shape:
        raise ValueError("fig11 payload must be two equal-length nonempty arrays")
    rows = [f"{float(fractions[k])!r},{float(mean_p[k])!r}" for k in range(fractions.size)]
    csv_path = out_dir / "fig11_time_scan.csv"
    _write_csv(csv_path, "t_over_t_star,mean_probability", rows)
    svg_path = out_dir / "fig11_time_scan.svg"
    _plot_lines(svg_path, [fractions], [mean_p], [None], "T / T*", "mean P(max |E|)",
                "probability vs evolution time")
    return [csv_path, svg_path]


def _emit_fig12(result, out_dir: Path) -> list[Path]:
    # result: mean curve indexed by iteration count
    curve = np.asarray(result, float)
    if curve.size < 2:
        raise ValueError("fig12 payload must be a curve over iteration counts")
    rows = [f"{n},{float(curve[n])!r}" for n in range(curve.size)]
    csv_path = out_dir / "fig12_iteration_scan.csv"
    _write_csv(csv_path, "n,mean_probability", rows)
    svg_path = out_dir / "fig12_iteration_scan.svg"
    _plot_lines(svg_path, [np.arange(curve.size)], [curve], [None], "n",
                "mean P(max |E|)", "probability vs iteration count")
    return [csv_path, svg_path]


def _emit_fig13(result, out_dir: Path) -> list[Path]:
    # result: (EnsembleResult-like energy profile, e_tar)
    ens, e_tar = result
    ens = _require_ensemble(ens)
    profile = ens.energy_profile
    rows = [
        f"{float(e_tar)!r},{float(profile.edges[k])!r},{float(profile.edges[k + 1])!r},"
        f"{float(profile.mean_probability[k])!r}"
        for k in range(profile.mean_probability.size)
    ]
    csv_path = out_dir / "fig13_target_energy.csv"
    _write_csv(csv_path, "e_tar,bin_lo,bin_hi,mean_probability", rows)
    svg_path = out_dir / "fig13_target_energy.svg"
    centers = 0.5 * (profile.edges[:-1] + profile.edges[1:])
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(centers, profile.mean_probability, "o", ms=3)
    ax.axvline(float(e_tar), ls="--", color="k", label="E_tar")
    ax.set_xlabel("E_j")
    ax.set_ylabel("mean P_j")
    ax.set_title("amplification around an arbitrary target energy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return [csv_path, svg_path]


_HANDLERS = {
    "fig2": _emit_fig2,
    "fig3": _emit_fig3,
    "fig4": _emit_fig4,
    "fig5": _emit_fig5,
    "fig6": lambda result, out: _emit_xi_profile(result, out, "fig6"),
    "fig7": lambda result, out: _emit_densities(result, out, "fig7"),
    "fig8": lambda result, out: _emit_xi_profile(result, out, "fig8"),
    "fig9": lambda result, out: _emit_densities(result, out, "fig9"),
    "fig10": _emit_fig10,
    "fig11": _emit_fig11,
    "fig12": _emit_fig12,
    "fig13": _emit_fig13,
}
