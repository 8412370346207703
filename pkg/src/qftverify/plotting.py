"""PNG figures written next to CLI tables."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.dpi": 120,
}
# strip the version string so repeated runs give identical files
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_verify(rows, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 0.22 * len(rows) + 1.2))
        labels = [f"{r['suite']}.{r['identity']}" for r in rows]
        res = np.array([r["max_residual"] if r["max_residual"] is not None else np.nan for r in rows], dtype=float)
        shown = np.log10(np.maximum(res, 1e-18))
        colors = ["tab:green" if r["status"] == "PASS" else "tab:red" for r in rows]
        y = np.arange(len(rows))
        ax.barh(y, shown + 18, left=-18, color=colors)
        for yi, r in zip(y, rows):
            if r["tol"] > 0:
                ax.plot([np.log10(r["tol"])] * 2, [yi - 0.4, yi + 0.4], color="k", lw=1)
        ax.set_yticks(y)
        ax.set_yticklabels(labels)
        ax.invert_yaxis()
        ax.set_xlabel("log10 max residual (tick: tolerance)")
        return _save(fig, path)


def plot_compton(rows, path) -> Path:
    theta = np.array([r["theta"] for r in rows])
    with plt.rc_context(STYLE):
        fig, (ax, bx) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
        for key, label in (("dsigma_feynman", "Feynman"), ("dsigma_constructed", "constructed")):
            if key in rows[0]:
                ax.plot(theta, [r[key] for r in rows], label=label)
        ax.set_ylabel("dsigma/dOmega")
        ax.legend()
        if "ratio" in rows[0]:
            bx.plot(theta, [r["ratio"] - 1 for r in rows], label="ratio - 1")
        bx.plot(theta, [-r["fractional_error_bound"] for r in rows], "--", label="-fractional error")
        bx.set_xlabel("theta")
        bx.legend()
        return _save(fig, path)


def plot_potential(rows, path, fit=None) -> Path:
    r = np.array([row["r"] for row in rows])
    mag = np.array([row["magnitude"] for row in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.loglog(r, r * mag, "o", ms=3, label="r |V| (quadrature)")
        ax.loglog(r, r * np.array([row["magnitude_closed_form"] for row in rows]), lw=1, label="closed form")
        if fit is not None:
            ax.loglog(r, fit["C"] * np.exp(-fit["epsilon"] * r), "--", lw=1, label="Yukawa fit")
        ax.set_xlabel("r")
        ax.set_ylabel("r |V(r)|")
        ax.legend()
        return _save(fig, path)


def plot_amplitude(record, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        names, vals = [], []
        for variant, res in record["results"].items():
            for term, v in res["channel_terms"].items():
                names.append(f"{variant}:{term}")
                vals.append(np.hypot(*v))
        ax.bar(range(len(vals)), vals)
        ax.set_xticks(range(len(vals)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("|term|")
        return _save(fig, path)
