"""Figure rendering for the report paths (headless matplotlib, PNG files)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["decay_figure", "probe_figure", "rank_figure", "field_figure",
           "mu_hat_figure"]

_DPI = 140


def decay_figure(report: dict, path: str, title: str = "") -> None:
    """Log-log averages against the radius, with fitted and predicted lines."""
    rho = np.asarray(report["rho_levels"], float)
    avg = np.asarray(report["averages"], float)
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.loglog(rho, avg, "o", base=2, label="measured")
    anchor = avg[0]
    fit = anchor * (rho / rho[0]) ** report["fitted_slope"]
    ax.loglog(rho, fit, "-", base=2,
              label=f"fit slope {report['fitted_slope']:.3f}")
    if report.get("predicted_slope") is not None:
        pred = anchor * (rho / rho[0]) ** report["predicted_slope"]
        ax.loglog(rho, pred, "--", base=2,
                  label=f"predicted {report['predicted_slope']:.3f}")
    ax.set_xlabel(r"$\rho$")
    ax.set_ylabel("average")
    ax.legend(fontsize=8)
    ax.set_title(title or "decay of the averaged transform", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def probe_figure(report: dict, path: str, title: str = "") -> None:
    """Norm-ratio scaling of the probe family against the thickness."""
    deltas = np.asarray(report["deltas"], float)
    ratios = (np.asarray(report["output_norms"], float)
              / np.asarray(report["input_norms"], float))
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.loglog(deltas, ratios, "s", base=2, label="ratio")
    fit = ratios[0] * (deltas / deltas[0]) ** report["ratio_slope"]
    ax.loglog(deltas, fit, "-", base=2,
              label=f"slope {report['ratio_slope']:.3f} ({report['verdict']})")
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel(r"$\|Rf_\delta\|_q / \|f_\delta\|_p$")
    ax.legend(fontsize=8)
    ax.set_title(title or "scaling-family norm probe", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def rank_figure(margins: np.ndarray, tol: float, path: str,
                title: str = "") -> None:
    """Histogram of per-sample rank margins with the pass tolerance marked."""
    margins = np.asarray(margins, float)
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    positive = margins[margins > 0]
    if len(positive):
        bins = np.logspace(np.log10(max(positive.min(), 1e-16)),
                           np.log10(positive.max() + 1e-16), 40)
        ax.hist(positive, bins=bins, color="tab:blue", alpha=0.8)
        ax.set_xscale("log")
    zeros = int(np.sum(margins <= 0))
    if zeros:
        ax.axvline(1e-16, color="tab:red", lw=2,
                   label=f"{zeros} zero-margin samples")
    ax.axvline(tol, color="k", ls="--", label=f"tol {tol:g}")
    ax.set_xlabel("margin  $\\sigma_r/\\sigma_1$")
    ax.set_ylabel("samples")
    ax.legend(fontsize=8)
    ax.set_title(title or "rank-condition margins", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def field_figure(values: np.ndarray, lo, hi, path: str, title: str = "") -> None:
    """Heatmap of a 2D field (or the middle slice of a 3D one)."""
    v = np.asarray(values, float)
    if v.ndim == 3:
        v = v[:, :, v.shape[2] // 2]
    fig, ax = plt.subplots(figsize=(5.0, 4.4))
    im = ax.imshow(v.T, origin="lower",
                   extent=[lo[0], hi[0], lo[1], hi[1]], cmap="viridis")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_title(title or "field", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def mu_hat_figure(rho_levels, magnitudes, path: str, title: str = "") -> None:
    """|mu_hat| against rho for each direction bundle (log-log)."""
    mags = np.atleast_2d(np.asarray(magnitudes, float))
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    q = np.nanmean(mags, axis=1)
    ax.loglog(rho_levels, q, "o-", base=2, label="mean over directions")
    ax.loglog(rho_levels, np.nanmax(mags, axis=1), ":", base=2, label="max")
    if not math.isclose(float(np.nanmax(mags)), float(np.nanmin(mags))):
        ax.loglog(rho_levels, np.nanmin(mags, axis=1), ":", base=2, label="min")
    ax.set_xlabel(r"$\rho$")
    ax.set_ylabel(r"$|\hat\mu(\rho\omega)|$")
    ax.legend(fontsize=8)
    ax.set_title(title or "transform magnitude", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
