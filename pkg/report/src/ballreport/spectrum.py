"""Spectrum figure: sorted exponents, zero band, pairing partners."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .artifacts import read_spectrum


def plot_spectrum(spectrum_file, out_image) -> None:
    """Bar chart of the sorted exponents.

    The tol_zero band from the file's meta block is shaded, and each pairing
    partner couple (i, m+1-i) is connected so the symplectic symmetry is
    visible at a glance.  Raises SchemaError on anything but a spectrum file.
    """
    meta, rows = read_spectrum(spectrum_file)
    lams = [r["lambda"] for r in rows]
    idx = [r["index"] for r in rows]
    m = len(lams)
    tol = float(meta.get("tol_zero", 0.0))
    verdict = meta.get("verdict", "")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if tol > 0:
        ax.axhspan(-tol, tol, color="0.85", zorder=0, label=f"zero band (±{tol:.3g})")
    ax.bar(idx, lams, color="#3465a4", zorder=2)
    for i in range(m // 2):
        j = m - 1 - i
        if j <= i:
            break
        ax.plot(
            [idx[i], idx[j]],
            [lams[i], lams[j]],
            color="#cc0000",
            linewidth=0.8,
            alpha=0.6,
            zorder=3,
        )
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("exponent index")
    ax.set_ylabel("Lyapunov exponent")
    title = f"Lyapunov spectrum (T={meta.get('total_time', '?')}"
    if verdict:
        title += f", verdict: {verdict}"
    title += ")"
    ax.set_title(title)
    ax.set_xticks(idx)
    if tol > 0:
        ax.legend(loc="best")
    fig.tight_layout()
    # strip the toolkit version stamp so repeated runs are byte-identical
    fig.savefig(out_image, metadata={"Software": None})
    plt.close(fig)
