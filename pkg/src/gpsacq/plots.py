"""Render sweep and benchmark figures next to the CSV output.

The CSV is the contract; these figures are convenience views of the same
rows.  Files land alongside the delimited output with a suffix per figure.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _setup():
    plt.rcParams.update({
        "figure.figsize": (6.0, 4.0),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.2,
        "lines.markersize": 4,
        "legend.fontsize": 8,
        "savefig.bbox": "tight",
    })


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)
    print(f"Saved: {path}")


def _series_label(receiver, p_channels):
    return "MF" if receiver == "mf" else f"CS P={p_channels}"


def _group_rows(rows, n_sym):
    groups = {}
    for row in rows:
        if int(row["n_sym"]) != n_sym:
            continue
        key = (row["receiver"], row["P"] or None)
        groups.setdefault(key, []).append(row)
    for series in groups.values():
        series.sort(key=lambda r: float(r["snr_db"]))
    return groups


def render_sweep_figures(rows, csv_path) -> list[str]:
    """Success-rate and RMSE curves vs SNR, one panel per n_sym mode."""
    _setup()
    base, _ = os.path.splitext(str(csv_path))
    n_sym_values = sorted({int(r["n_sym"]) for r in rows})
    written = []

    fig, axes = plt.subplots(1, len(n_sym_values), squeeze=False,
                             figsize=(5.5 * len(n_sym_values), 4.0))
    for ax, n_sym in zip(axes[0], n_sym_values):
        for (receiver, p), series in sorted(_group_rows(rows, n_sym).items(),
                                            key=lambda kv: (kv[0][0], kv[0][1] or 0)):
            snr = [float(r["snr_db"]) for r in series]
            rate = [float(r["success_rate"]) for r in series]
            if receiver == "mf":
                ax.plot(snr, rate, "k--o", label="MF")
            else:
                ax.plot(snr, rate, marker="o", label=_series_label(receiver, p))
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("satellite identification rate")
        ax.set_ylim(-0.02, 1.05)
        ax.set_title(f"n_sym = {n_sym}")
        ax.legend()
    path = f"{base}_success.png"
    _save(fig, path)
    written.append(path)

    fig, axes = plt.subplots(2, len(n_sym_values), squeeze=False,
                             figsize=(5.5 * len(n_sym_values), 7.0))
    for col, n_sym in enumerate(n_sym_values):
        for (receiver, p), series in sorted(_group_rows(rows, n_sym).items(),
                                            key=lambda kv: (kv[0][0], kv[0][1] or 0)):
            snr = [float(r["snr_db"]) for r in series]
            rq = [float(r["rmse_q_s"]) if r["rmse_q_s"] not in ("", None)
                  else float("nan") for r in series]
            rk = [float(r["rmse_k_rads"]) if r["rmse_k_rads"] not in ("", None)
                  else float("nan") for r in series]
            label = _series_label(receiver, p)
            axes[0][col].semilogy(snr, rq, marker="o", label=label)
            axes[1][col].semilogy(snr, rk, marker="o", label=label)
        axes[0][col].set_title(f"delay RMSE (s), n_sym = {n_sym}")
        axes[1][col].set_title(f"Doppler RMSE (rad/s), n_sym = {n_sym}")
        for row_ax in axes:
            row_ax[col].set_xlabel("SNR (dB)")
            row_ax[col].legend()
    path = f"{base}_rmse.png"
    _save(fig, path)
    written.append(path)
    return written


def render_bench_figure(rows, csv_path) -> str:
    """Median receiver runtime vs channel count, MF as a flat reference."""
    _setup()
    base, _ = os.path.splitext(str(csv_path))
    fig, ax = plt.subplots()
    cs_rows = [r for r in rows if r["receiver"] == "cs"]
    mf_rows = [r for r in rows if r["receiver"] == "mf"]
    if cs_rows:
        p_vals = [int(r["P"]) for r in cs_rows]
        med = [float(r["median_s"]) for r in cs_rows]
        ax.plot(p_vals, med, marker="o", label="CS")
    for r in mf_rows:
        ax.axhline(float(r["median_s"]), color="k", linestyle="--",
                   label="MF")
    ax.set_xlabel("channels P")
    ax.set_ylabel("median runtime (s)")
    ax.set_yscale("log")
    ax.legend()
    path = f"{base}_runtime.png"
    _save(fig, path)
    return path
