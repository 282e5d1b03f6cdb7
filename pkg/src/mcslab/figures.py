"""File-only figure rendering for the experiment runners.

Uses the Agg backend so runs never require a display; every function
writes a PNG next to the delimited artifacts and returns its path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 120


def _save(fig, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(p, dpi=_DPI, metadata={"Software": "mcslab"})
    plt.close(fig)
    return p


def render_embedding_curve(path, proj: np.ndarray) -> Path:
    """Projected curve: 3-D line when there are 3 columns, else 2-D."""
    proj = np.asarray(proj, dtype=float)
    fig = plt.figure(figsize=(6, 5))
    if proj.shape[1] >= 3:
        ax = fig.add_subplot(projection="3d")
        ax.plot(proj[:, 0], proj[:, 1], proj[:, 2], lw=0.8)
        ax.set_zlabel("y2")
    else:
        ax = fig.add_subplot()
        if proj.shape[1] == 2:
            ax.plot(proj[:, 0], proj[:, 1], lw=0.8)
        else:
            ax.plot(proj[:, 0], lw=0.8)
    ax.set_xlabel("y0")
    ax.set_ylabel("y1" if proj.shape[1] > 1 else "y0")
    ax.set_title("random projection of the signal curve")
    return _save(fig, path)


def render_sweep(path, m_values, medians) -> Path:
    """Median measured distortion against measurement count, log-log."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(m_values, medians, "o-")
    ax.axhline(1 / 3, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("measurements M")
    ax.set_ylabel("median distortion")
    ax.set_title("embedding distortion vs measurement count")
    ax.grid(True, which="both", lw=0.3)
    return _save(fig, path)


def render_recovery(path, errors, bounds) -> Path:
    """Per-trial recovery error with the corresponding bound values."""
    errors = np.asarray(errors, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    idx = np.arange(len(errors))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(idx, errors, ".", label="recovery error")
    ax.plot(idx, bounds, ".", label="error bound", alpha=0.6)
    ax.set_yscale("log")
    ax.set_xlabel("trial")
    ax.set_ylabel("ambient error")
    ax.set_title("recovery error against its bound")
    ax.legend()
    ax.grid(True, lw=0.3)
    return _save(fig, path)


def render_toolbox(path, reports) -> Path:
    """Worst slack per geometric property, symmetric-log scale."""
    ids = [r.property_id for r in reports]
    slacks = [r.worst_slack for r in reports]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(ids, slacks)
    ax.set_yscale("symlog", linthresh=1e-9)
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("property")
    ax.set_ylabel("worst slack")
    ax.set_title("geometric property slack (negative = violation)")
    ax.grid(True, axis="y", lw=0.3)
    return _save(fig, path)


def render_certificate(path, cert) -> Path:
    """Per-level failure-probability contributions of the certificate."""
    terms = np.asarray(cert.level_terms, dtype=float)
    idx = np.arange(len(terms))
    fig, ax = plt.subplots(figsize=(7, 4))
    positive = terms > 0
    if positive.any():
        ax.bar(idx[positive], terms[positive])
        ax.set_yscale("log")
    else:
        ax.bar(idx, np.zeros_like(terms))
    ax.set_xlabel("chain level (0 = base term)")
    ax.set_ylabel("failure probability contribution")
    ax.set_title(f"chaining certificate at M = {cert.m_rows} (total {cert.total:.3e})")
    ax.grid(True, axis="y", lw=0.3)
    return _save(fig, path)
