"""File renderers: binary PGM for density grids, matplotlib figures for the
report paths (density heatmaps, attractor scatters, growth curves).

The PGM encodes per-cell midpoint mass scaled linearly so the largest cell
maps to 255.  All output is deterministic for fixed input.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InputFormatError
from .fractal import DensityGrid, PointCloud


def grid_to_image(grid: DensityGrid) -> np.ndarray:
    """Midpoint masses as a 2-D image array (row 0 = top of the box)."""
    mid = grid.midpoints()
    if grid.spec.dim == 1:
        return mid[None, :]
    if grid.spec.dim == 2:
        # midpoints axis 0 is the x axis; image rows run top to bottom
        return mid.T[::-1, :]
    raise InputFormatError("PGM rendering supports dimensions 1 and 2 only")


def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM (P5, maxval 255), scaled so the maximum value hits 255."""
    if image.ndim != 2:
        raise InputFormatError("PGM needs a 2-D array")
    peak = float(image.max())
    if peak > 0:
        scaled = np.rint(image / peak * 255.0).astype(np.uint8)
    else:
        scaled = np.zeros_like(image, dtype=np.uint8)
    height, width = scaled.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(scaled.tobytes())


def read_pgm(path) -> np.ndarray:
    """Parse back a binary PGM written by write_pgm (used by tests)."""
    with open(path, "rb") as fh:
        data = fh.read()
    header, _, rest = data.partition(b"\n255\n")
    magic, dims = header.split(b"\n")
    if magic != b"P5":
        raise InputFormatError("not a binary PGM file")
    width, height = (int(tok) for tok in dims.split())
    arr = np.frombuffer(rest[: width * height], dtype=np.uint8)
    return arr.reshape((height, width))


def save_density_figure(grid: DensityGrid, path) -> None:
    image = grid_to_image(grid)
    lo = [float(v) for v in grid.spec.lo]
    hi = [float(v) for v in grid.spec.hi]
    fig, ax = plt.subplots(figsize=(5, 4))
    if grid.spec.dim == 1:
        extent = (lo[0], hi[0], 0.0, 1.0)
        ax.set_yticks([])
    else:
        extent = (lo[0], hi[0], lo[1], hi[1])
    im = ax.imshow(image, cmap="magma", extent=extent, aspect="auto", origin="upper")
    fig.colorbar(im, ax=ax, label="cell midpoint mass")
    ax.set_title(f"contact measure, depth {grid.depth}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_attractor_figure(cloud: PointCloud, path) -> None:
    pts = cloud.points
    fig, ax = plt.subplots(figsize=(5, 5))
    if pts.shape[1] == 1:
        ax.scatter(pts[:, 0], np.zeros(len(pts)), s=0.5, color="black")
        ax.set_yticks([])
    else:
        ax.scatter(pts[:, 0], pts[:, 1], s=0.5, color="black", linewidths=0)
        ax.set_aspect("equal")
    ax.set_title(f"attractor approximant, depth {cloud.depth}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_growth_figure(depths, sizes, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(list(depths), list(sizes), marker="o", color="tab:blue")
    ax.set_xlabel("depth")
    ax.set_ylabel("sphere size")
    ax.set_title("growth of spheres")
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
