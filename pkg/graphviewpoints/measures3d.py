# -*- coding: utf-8 -*-
"""
Depth-aware overlap measures and the Isometric Viewpoint Deviation score.

Overlaps are counted pairwise. For an edge and a node that overlap on
screen, whichever is nearer the eye decides the direction: edge-over-node
(ENO) or node-over-edge (NEO). Pairs of an edge and its own endpoint are
never counted.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from . import constants as cnst
from . import _geometry as geo
from ._overlap_raster import thick_segment_disc_area
from .dataset import Graph, Layout3D
from .exceptions import DomainException
from .measures2d import RawMeasure
from .projection import ProjectedCircle, ProjectedDrawing, ProjectedThickSegment
from .utilities import sorted_eigenpairs


@dataclass(frozen=True)
class OverlapCensus:
    nn_count: int = 0
    en_count: int = 0
    ne_count: int = 0
    nn_area: float = 0.0
    en_area: float = 0.0
    ne_area: float = 0.0

    def as_measures(self) -> List[RawMeasure]:
        return [
            RawMeasure(cnst.NNO, float(self.nn_count)),
            RawMeasure(cnst.ENO, float(self.en_count)),
            RawMeasure(cnst.NEO, float(self.ne_count)),
            RawMeasure(cnst.NNOA, self.nn_area),
            RawMeasure(cnst.ENOA, self.en_area),
            RawMeasure(cnst.NEOA, self.ne_area),
        ]


@dataclass(frozen=True, eq=False)
class PrincipalAxes:
    """PCA of node positions: eigenvectors as columns, eigenvalues descending."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True, eq=False)
class IsoInputs:
    """Intermediate quantities of the ISO score, kept for inspection."""

    a: np.ndarray
    a_norm: np.ndarray
    w: np.ndarray
    mu: float
    sigma_w: float
    alpha: float
    sigma_max: float = cnst.ISO_SIGMA_MAX


def lens_areas(d: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """
    Closed-form intersection area of circle pairs with centre distance d.
    """
    d, r1, r2 = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(r1, dtype=float),
                                    np.asarray(r2, dtype=float))
    area = np.zeros(d.shape)

    contained = d <= np.abs(r1 - r2)
    area[contained] = math.pi * np.minimum(r1, r2)[contained] ** 2

    partial = ~contained & (d < r1 + r2)
    if partial.any():
        dp, a, b = d[partial], r1[partial], r2[partial]
        alpha = np.arccos(np.clip((dp * dp + a * a - b * b) / (2 * dp * a), -1.0, 1.0))
        beta = np.arccos(np.clip((dp * dp + b * b - a * a) / (2 * dp * b), -1.0, 1.0))
        kite = (-dp + a + b) * (dp + a - b) * (dp - a + b) * (dp + a + b)
        area[partial] = a * a * alpha + b * b * beta - 0.5 * np.sqrt(np.clip(kite, 0.0, None))
    return area


def circle_circle_area(c1: ProjectedCircle, c2: ProjectedCircle) -> float:
    """Exact lens area of two projected node circles."""
    d = math.hypot(c1.center[0] - c2.center[0], c1.center[1] - c2.center[1])
    return float(lens_areas(d, c1.radius, c2.radius))


def thick_segment_circle_area(segment: ProjectedThickSegment,
                              circle: ProjectedCircle,
                              resolution: int = cnst.DEFAULT_RASTER_RESOLUTION) -> float:
    """
    Rasterised area of a projected edge tube overlapping a node circle.

    Args:
        segment:    Projected edge.
        circle:     Projected node.
        resolution: Samples per min(circle radius, min half-width); at least 64.

    Returns:
        Approximate intersection area in viewport units squared.
    """
    if resolution < cnst.MIN_RASTER_RESOLUTION:
        raise DomainException(f"raster resolution must be at least {cnst.MIN_RASTER_RESOLUTION}, got {resolution}")
    a, b = np.asarray(segment.endpoints[0], dtype=float), np.asarray(segment.endpoints[1], dtype=float)
    return _tube_disc_area(a, b, segment.half_widths[0], segment.half_widths[1],
                           np.asarray(circle.center, dtype=float), circle.radius, resolution)


def overlap_census(drawing: ProjectedDrawing,
                   graph: Graph,
                   resolution: int = cnst.DEFAULT_RASTER_RESOLUTION) -> OverlapCensus:
    """
    Count and measure node-node, edge-over-node and node-over-edge overlaps.

    Args:
        drawing:    Projected drawing.
        graph:      Source graph (supplies edge endpoints).
        resolution: Raster resolution for edge/node areas.

    Returns:
        The overlap census.
    """
    if resolution < cnst.MIN_RASTER_RESOLUTION:
        raise DomainException(f"raster resolution must be at least {cnst.MIN_RASTER_RESOLUTION}, got {resolution}")

    centers, radii, depths = drawing.node_centers, drawing.node_radii, drawing.node_depths
    n, m = drawing.node_count, drawing.edge_count

    nn_count, nn_area = 0, 0.0
    if n >= 2:
        i, j = np.triu_indices(n, 1)
        dist = np.linalg.norm(centers[i] - centers[j], axis=1)
        areas = lens_areas(dist, radii[i], radii[j])
        positive = areas > 0
        nn_count, nn_area = int(positive.sum()), float(areas[positive].sum())

    en_count = ne_count = 0
    en_area = ne_area = 0.0
    if n and m:
        ends = drawing.segment_endpoints
        half_widths = drawing.segment_half_widths
        a, b = ends[:, None, 0, :], ends[:, None, 1, :]
        gap = geo.point_segment_distances(centers[None, :, :], a, b)
        reach = radii[None, :] + half_widths.max(axis=1)[:, None]
        candidate = gap < reach
        rows = np.arange(m)
        candidate[rows, graph.edges[:, 0]] = False
        candidate[rows, graph.edges[:, 1]] = False

        seg_depths = drawing.segment_depths
        for e, k in zip(*np.nonzero(candidate)):
            area = _tube_disc_area(ends[e, 0], ends[e, 1], half_widths[e, 0], half_widths[e, 1],
                                   centers[k], radii[k], resolution)
            if area <= 0:
                continue
            t = float(geo.closest_parameters(centers[k], ends[e, 0], ends[e, 1]))
            # Depth is linear in 1/z along the projected segment
            edge_depth = 1.0 / ((1.0 - t) / seg_depths[e, 0] + t / seg_depths[e, 1])
            if edge_depth < depths[k] + cnst.DEPTH_TIE_EPS:
                en_count += 1
                en_area += area
            else:
                ne_count += 1
                ne_area += area

    logging.debug(f"Overlap census: NN {nn_count}, EN {en_count}, NE {ne_count}")
    return OverlapCensus(nn_count, en_count, ne_count, nn_area, en_area, ne_area)


def pca_axes(layout: Layout3D) -> PrincipalAxes:
    """
    Principal axes of the node positions (population covariance).

    Each eigenvector is signed so its largest-magnitude component is
    nonnegative, the earliest axis winning ties.
    """
    positions = layout.positions
    if len(positions) == 0:
        return PrincipalAxes(np.eye(3), np.zeros(3))
    centred = positions - positions.mean(axis=0)
    covariance = centred.T @ centred / len(positions)
    if not covariance.any():
        return PrincipalAxes(np.eye(3), np.zeros(3))
    vectors, values = sorted_eigenpairs(covariance)
    return PrincipalAxes(vectors, values)


def iso_inputs(v: np.ndarray, axes: PrincipalAxes) -> IsoInputs:
    """
    Compute the quantities the ISO score is built from.
    """
    v = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > cnst.UNIT_VECTOR_TOL:
        logging.error(f"ISO requested for non-unit view vector {v}")
        raise DomainException(f"view vector must be unit length, got norm {np.linalg.norm(v)}")

    a = np.abs(axes.eigenvectors.T @ v)
    a_norm = a / a.sum()
    total = axes.eigenvalues.sum()
    if total <= 0:
        w = np.full(3, 1.0 / 3.0)
        return IsoInputs(a, a_norm, w, float(w @ a_norm), 0.0, 0.0)

    w = axes.eigenvalues / total
    mu = float(w @ a_norm)
    sigma_w = math.sqrt(float(w @ (a_norm - mu) ** 2))
    alpha = float(np.std(w, ddof=1)) / cnst.ISO_SIGMA_MAX
    return IsoInputs(a, a_norm, w, mu, sigma_w, alpha)


def iso_score(v: np.ndarray, axes: PrincipalAxes) -> RawMeasure:
    """
    Isometric Viewpoint Deviation, 1 - alpha * sigma_w / sigma_max.

    Args:
        v:      Unit view vector in layout coordinates.
        axes:   Principal axes of the layout.

    Returns:
        ISO in [0, 1]; 1 for balanced views or graphs without dominant axes.
    """
    inputs = iso_inputs(v, axes)
    value = 1.0 - inputs.alpha * inputs.sigma_w / inputs.sigma_max
    return RawMeasure(cnst.ISO, min(1.0, max(0.0, value)))


# Private utility functions
def _tube_disc_area(a: np.ndarray, b: np.ndarray, hw0: float, hw1: float, center: np.ndarray, radius: float,
                    resolution: int) -> float:
    if a[0] == b[0] and a[1] == b[1]:
        # An edge seen end-on covers a disc of its wider half-width
        d = math.hypot(center[0] - a[0], center[1] - a[1])
        return float(lens_areas(d, max(hw0, hw1), radius))
    return thick_segment_disc_area(a, b, hw0, hw1, center, radius, resolution)
