"""Files written by the command line: JSON documents, CSV tables and SVG figures

Figures are drawn with matplotlib on the Agg backend; the SVG hash salt and the metadata are
fixed so that repeated runs produce identical files.
"""

from __future__ import annotations

import logging

from pathlib import Path
from typing import Any, Sequence, Union

import matplotlib


matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from nlwasserstein.certify.certificates import (  # noqa: E402
    BoundCertificate,
    certificates_to_dataframe,
)
from nlwasserstein.certify.experiments import ConvergenceTable  # noqa: E402
from nlwasserstein.space.discrete_space import DiscreteSpace  # noqa: E402
from nlwasserstein.space.measures import Path as MeasurePath  # noqa: E402
from nlwasserstein.utils.formats import write_json  # noqa: E402


log = logging.getLogger(__name__)

SVG_SALT = "nlwasserstein"
N_SNAPSHOTS = 5


def output_dir(out: Union[str, Path]) -> Path:

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_table(frame: pd.DataFrame, file_path: Path) -> Path:

    frame.to_csv(file_path, index=False, float_format="%.12g")
    log.debug(f"Wrote {file_path}")
    return file_path


def write_document(obj: Any, file_path: Path) -> Path:

    write_json(obj, file_path)
    log.debug(f"Wrote {file_path}")
    return file_path


def _save_svg(fig: plt.Figure, file_path: Path) -> Path:

    with plt.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig.savefig(file_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    log.debug(f"Wrote {file_path}")

    return file_path


def path_frame(space: DiscreteSpace, path: MeasurePath) -> pd.DataFrame:
    """Long table (t, node, x_1..x_d, density) of a path."""

    frame = path.to_dataframe()
    coords = space.points[frame["node"].to_numpy()]
    for k in range(space.dim):
        frame.insert(2 + k, f"x{k + 1}", coords[:, k])

    return frame


def plot_geodesic(space: DiscreteSpace, path: MeasurePath, file_path: Path) -> Path:
    """Density snapshots at evenly spaced times; scatter plots colored by density beyond 1D."""

    steps = np.unique(np.linspace(0, path.n_steps, N_SNAPSHOTS).round().astype(int))
    if space.dim == 1:
        fig, ax = plt.subplots(figsize=(6.4, 3.8))
        order = np.argsort(space.points[:, 0])
        for k in steps:
            ax.plot(
                space.points[order, 0],
                path.densities[k, order],
                label=f"t = {path.times[k]:.2f}",
            )
        ax.set_xlabel("x")
        ax.set_ylabel("density")
        ax.legend(frameon=False)
    else:
        fig, axes = plt.subplots(1, steps.size, figsize=(3.0 * steps.size, 3.0), squeeze=False)
        for ax, k in zip(axes[0], steps):
            ax.scatter(space.points[:, 0], space.points[:, 1], c=path.densities[k], s=8)
            ax.set_title(f"t = {path.times[k]:.2f}")
            ax.set_aspect("equal")
    fig.tight_layout()

    return _save_svg(fig, file_path)


def plot_convergence(table: ConvergenceTable, file_path: Path) -> Path:
    """Log-log error against ε with a slope one half guide through the largest scale."""

    frame = table.frame
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    eps = frame["eps"].to_numpy()
    errors = frame["error"].to_numpy()
    positive = errors > 0
    if positive.any():
        ax.loglog(eps[positive], errors[positive], "o-", label="|scaled - W2|")
        anchor = int(np.argmax(np.where(positive, eps, -np.inf)))
        guide = errors[anchor] * np.sqrt(eps / eps[anchor])
        ax.loglog(eps, guide, "--", color="gray", label="slope 1/2")
    else:
        ax.set_xscale("log")
        ax.plot(eps, errors, "o-", label="|scaled - W2|")
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.legend(frameon=False)
    fig.tight_layout()

    return _save_svg(fig, file_path)


def write_certificates(certificates: Sequence[BoundCertificate], out: Path) -> pd.DataFrame:

    write_document([c.to_dict() for c in certificates], out / "certificates.json")
    frame = certificates_to_dataframe(certificates)
    write_table(frame, out / "certificates.csv")

    return frame
