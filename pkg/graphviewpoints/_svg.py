"""
Equirectangular sphere heatmaps of per-viewpoint values, written as SVG.

Each pixel of the longitude/latitude grid takes the value of the nearest
sampled viewpoint. Output is deterministic: fixed SVG id salt and no date
metadata.
"""
from typing import Optional

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
from scipy.spatial import cKDTree

_GRID_WIDTH = 360
_GRID_HEIGHT = 180
_HASH_SALT = "graphviewpoints"


def to_longitude_latitude(vectors: np.ndarray) -> np.ndarray:
    """(n, 3) unit vectors to (n, 2) longitude in [-180, 180] and latitude in [-90, 90], degrees."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, 3)
    longitude = np.degrees(np.arctan2(vectors[:, 1], vectors[:, 0]))
    latitude = np.degrees(np.arcsin(np.clip(vectors[:, 2], -1.0, 1.0)))
    return np.column_stack([longitude, latitude])


def nearest_sample_grid(viewpoints: np.ndarray, values: np.ndarray,
                        width: int = _GRID_WIDTH, height: int = _GRID_HEIGHT) -> np.ndarray:
    """
    Resample per-viewpoint values onto a longitude/latitude grid.

    Returns:
        (height, width) array, row 0 at latitude +90.
    """
    longitude = np.radians(-180.0 + (np.arange(width) + 0.5) * 360.0 / width)
    latitude = np.radians(90.0 - (np.arange(height) + 0.5) * 180.0 / height)
    lon, lat = np.meshgrid(longitude, latitude)
    cells = np.column_stack([
        (np.cos(lat) * np.cos(lon)).ravel(),
        (np.cos(lat) * np.sin(lon)).ravel(),
        np.sin(lat).ravel(),
    ])
    _, nearest = cKDTree(np.asarray(viewpoints, dtype=float)).query(cells)
    return np.asarray(values, dtype=float)[nearest].reshape(height, width)


def write_sphere_heatmap(filename: str,
                         viewpoints: np.ndarray,
                         values: np.ndarray,
                         title: str,
                         description: str,
                         best: Optional[np.ndarray] = None,
                         worst: Optional[np.ndarray] = None,
                         vmin: float = 0.0,
                         vmax: float = 1.0) -> None:
    """
    Write an equirectangular heatmap with optional best/worst selection markers.

    Args:
        filename:       Output SVG path.
        viewpoints:     (n, 3) sampled unit vectors.
        values:         (n,) value per viewpoint.
        title:          Plot title.
        description:    Stored in the SVG metadata (provenance).
        best, worst:    (k, 3) selected view vectors to mark.
        vmin, vmax:     Colour scale limits.
    """
    grid = nearest_sample_grid(viewpoints, values)

    with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT, "svg.fonttype": "none"}):
        figure = Figure(figsize=(8, 4.5))
        FigureCanvasSVG(figure)
        axes = figure.add_subplot(1, 1, 1)
        image = axes.imshow(grid, extent=(-180, 180, -90, 90), origin="upper", cmap="viridis",
                            vmin=vmin, vmax=vmax, interpolation="nearest", aspect="auto")
        figure.colorbar(image, ax=axes, fraction=0.04)

        for points, marker, colour, label in ((best, "o", "white", "best"), (worst, "X", "red", "worst")):
            if points is not None and len(points):
                lonlat = to_longitude_latitude(points)
                axes.scatter(lonlat[:, 0], lonlat[:, 1], marker=marker, facecolors="none" if marker == "o" else colour,
                             edgecolors=colour if marker == "o" else "black", linewidths=1.0, s=40, label=label)

        axes.set_xlim(-180, 180)
        axes.set_ylim(-90, 90)
        axes.set_xlabel("longitude (deg)")
        axes.set_ylabel("latitude (deg)")
        axes.set_title(title)
        if (best is not None and len(best)) or (worst is not None and len(worst)):
            axes.legend(loc="lower left", fontsize="small")
        figure.savefig(filename, format="svg", metadata={"Date": None, "Description": description})
