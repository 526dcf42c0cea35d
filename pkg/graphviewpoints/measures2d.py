# -*- coding: utf-8 -*-
"""
Classical 2D aesthetic measures of a projected drawing.

All measures work on node centres and edge centrelines; the drawn thickness
of nodes and edges only matters to the overlap measures in measures3d.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from . import constants as cnst
from . import _geometry as geo
from ._symmetry import SymmetryConfig, symmetry_votes
from .dataset import Graph
from .exceptions import DomainException
from .projection import ProjectedDrawing


@dataclass(frozen=True)
class RawMeasure:
    """One measure value before range normalisation."""

    measure_id: str
    value: float
    polarity: str = ""

    def __post_init__(self) -> None:
        if self.measure_id not in cnst.POLARITY:
            raise DomainException(f"unknown measure id '{self.measure_id}'")
        expected = cnst.POLARITY[self.measure_id]
        if not self.polarity:
            object.__setattr__(self, "polarity", expected)
        elif self.polarity != expected:
            raise DomainException(f"{self.measure_id} is {expected}, got {self.polarity}")
        if not math.isfinite(self.value):
            raise DomainException(f"{self.measure_id} value must be finite, got {self.value}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, eq=False)
class CrossingSet:
    """
    Crossing edge pairs with their intersection points and acute angles (degrees).

    Proper crossings have angles in (0, 90]. Collinear edges that overlap are
    kept as one crossing at angle 0, placed at the middle of the shared piece,
    so they count fully against CAR.
    """

    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    angles: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.pairs)


def crossings(drawing: ProjectedDrawing) -> CrossingSet:
    """
    Find every pair of non-adjacent edges whose open centrelines intersect.

    Args:
        drawing: Projected drawing.

    Returns:
        The crossing set, pairs in lexicographic order.
    """
    pairs = geo.non_adjacent_pairs(drawing.edges)
    if not len(pairs):
        return CrossingSet()

    ends = drawing.segment_endpoints
    a, b = ends[pairs[:, 0]], ends[pairs[:, 1]]

    # Cheap bounding-box rejection before the exact test
    eps = cnst.CROSSING_EPS
    overlap = ((np.minimum(a[:, 0], a[:, 1]) <= np.maximum(b[:, 0], b[:, 1]) + eps)
               & (np.minimum(b[:, 0], b[:, 1]) <= np.maximum(a[:, 0], a[:, 1]) + eps)).all(axis=1)
    pairs, a, b = pairs[overlap], a[overlap], b[overlap]

    hit, points, angles = geo.segment_intersections(a[:, 0], a[:, 1], b[:, 0], b[:, 1], eps)
    return CrossingSet(pairs[hit], points[hit], angles[hit])


def measure_cr(crossing_set: CrossingSet) -> RawMeasure:
    return RawMeasure(cnst.CR, float(len(crossing_set)))


def measure_car(crossing_set: CrossingSet) -> RawMeasure:
    """Crossing angular resolution against a 90 degree optimum; no crossings scores 1."""
    if not len(crossing_set):
        return RawMeasure(cnst.CAR, 1.0)
    deviation = np.abs(90.0 - crossing_set.angles) / 90.0
    return RawMeasure(cnst.CAR, 1.0 - float(deviation.mean()))


def measure_stress(drawing: ProjectedDrawing, graph: Graph) -> RawMeasure:
    """
    Weighted stress with weights d^-2 at the optimal uniform scale.

    Disconnected pairs are skipped.
    """
    n = drawing.node_count
    if n < 2:
        return RawMeasure(cnst.ST, 0.0)

    d = graph.shortest_path_lengths[np.triu_indices(n, 1)]
    e = pdist(drawing.node_centers)
    finite = np.isfinite(d) & (d > 0)
    if not finite.any():
        return RawMeasure(cnst.ST, 0.0)
    d, e = d[finite], e[finite]
    w = d ** -2.0

    denominator = (w * e * e).sum()
    if denominator == 0:
        return RawMeasure(cnst.ST, float((w * d * d).sum() / len(d)))
    scale = (w * d * e).sum() / denominator
    return RawMeasure(cnst.ST, float((w * (scale * e - d) ** 2).sum() / len(d)))


def measure_area_aspect(drawing: ProjectedDrawing) -> Tuple[RawMeasure, RawMeasure]:
    """
    Bounding-box area relative to the viewport, and the box's aspect ratio.
    """
    if drawing.node_count == 0:
        return RawMeasure(cnst.AR, 0.0), RawMeasure(cnst.ASP, 0.0)
    span = drawing.node_centers.max(axis=0) - drawing.node_centers.min(axis=0)
    width, height = float(span[0]), float(span[1])
    area = width * height / drawing.viewport_area
    longer = max(width, height)
    aspect = min(width, height) / longer if longer > 0 else 0.0
    return RawMeasure(cnst.AR, area), RawMeasure(cnst.ASP, aspect)


def measure_concentration(drawing: ProjectedDrawing) -> RawMeasure:
    """
    Share of nodes crowding into already-occupied cells of a ceil(sqrt(n))^2 grid.
    """
    n = drawing.node_count
    if n < 2:
        return RawMeasure(cnst.CON, 0.0)

    k = math.ceil(math.sqrt(n))
    centers = drawing.node_centers
    lo = centers.min(axis=0)
    span = centers.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    cells = np.where(span > 0, np.floor((centers - lo) / safe * k), 0).astype(np.int64)
    cells = np.clip(cells, 0, k - 1)
    counts = np.bincount(cells[:, 0] * k + cells[:, 1], minlength=k * k)
    return RawMeasure(cnst.CON, float(np.maximum(counts - 1, 0).sum()) / (n - 1))


def measure_node_orthogonality(drawing: ProjectedDrawing) -> RawMeasure:
    """
    How densely the nodes fill a square lattice with the median nearest-neighbour pitch.
    """
    n = drawing.node_count
    if n < 2:
        return RawMeasure(cnst.NO, 0.0)

    centers = drawing.node_centers
    lo = centers.min(axis=0)
    span = centers.max(axis=0) - lo
    distances, _ = cKDTree(centers).query(centers, k=2)
    unit = float(np.median(distances[:, 1]))
    if unit <= 0 or not (span > 0).any():
        return RawMeasure(cnst.NO, 0.0)

    # Smallest lattice of this pitch that covers the bounding box
    cols, rows = np.ceil(span / unit - 1e-9)
    lattice_points = (cols + 1) * (rows + 1)
    return RawMeasure(cnst.NO, min(1.0, n / lattice_points))


def measure_gabriel(drawing: ProjectedDrawing, graph: Graph) -> RawMeasure:
    """
    Fraction of (edge, non-endpoint node) pairs where the node stays out of
    the edge's diametral disc.
    """
    n, m = drawing.node_count, drawing.edge_count
    if n < 3 or m == 0:
        return RawMeasure(cnst.GR, 1.0)

    ends = drawing.segment_endpoints
    mid = ends.mean(axis=1)
    radius_sq = ((ends[:, 1] - ends[:, 0]) ** 2).sum(axis=1) / 4.0
    dist_sq = ((drawing.node_centers[None, :, :] - mid[:, None, :]) ** 2).sum(axis=-1)
    inside = dist_sq < radius_sq[:, None]
    rows = np.arange(m)
    inside[rows, graph.edges[:, 0]] = False
    inside[rows, graph.edges[:, 1]] = False
    return RawMeasure(cnst.GR, 1.0 - inside.sum() / (m * (n - 2)))


def measure_angular_resolution(drawing: ProjectedDrawing, graph: Graph) -> RawMeasure:
    """
    Deviation of the smallest angle between incident edges from 360/deg.

    Zero-length projected edges are left out of a node's fan.
    """
    edges = graph.edges
    if not len(edges):
        return RawMeasure(cnst.ANGR, 1.0)

    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    vec = drawing.node_centers[dst] - drawing.node_centers[src]
    keep = np.hypot(vec[:, 0], vec[:, 1]) > 0
    src, vec = src[keep], vec[keep]
    if not len(src):
        return RawMeasure(cnst.ANGR, 1.0)

    angles = np.mod(np.degrees(np.arctan2(vec[:, 1], vec[:, 0])), 360.0)
    order = np.lexsort((angles, src))
    src, angles = src[order], angles[order]

    counts = np.bincount(src, minlength=drawing.node_count)
    nonempty = np.flatnonzero(counts)
    starts = np.concatenate([[0], np.cumsum(counts[nonempty])[:-1]])
    lasts = starts + counts[nonempty] - 1

    # Each angle's gap to the next one around the node, wrapping at the last
    following = np.arange(len(angles)) + 1
    following[lasts] = starts
    gaps = angles[following] - angles
    gaps[lasts] += 360.0
    smallest = np.minimum.reduceat(gaps, starts)

    degree = counts[nonempty]
    fan = degree >= 2
    if not fan.any():
        return RawMeasure(cnst.ANGR, 1.0)
    ideal = 360.0 / degree[fan]
    deviation = np.abs(ideal - smallest[fan]) / ideal
    return RawMeasure(cnst.ANGR, 1.0 - float(deviation.mean()))


def measure_edge_orthogonality(drawing: ProjectedDrawing) -> RawMeasure:
    """How close edges are to horizontal or vertical; zero-length edges are skipped."""
    ends = drawing.segment_endpoints
    vec = ends[:, 1] - ends[:, 0]
    keep = np.hypot(vec[:, 0], vec[:, 1]) > 0
    if not keep.any():
        return RawMeasure(cnst.EO, 1.0)
    theta = np.degrees(np.arctan2(np.abs(vec[keep, 1]), np.abs(vec[keep, 0])))
    deviation = np.minimum(theta, 90.0 - theta) / 45.0
    return RawMeasure(cnst.EO, 1.0 - float(deviation.mean()))


def measure_edge_length_deviation(drawing: ProjectedDrawing) -> RawMeasure:
    """Mean absolute deviation of edge lengths relative to the mean length."""
    if drawing.edge_count == 0:
        return RawMeasure(cnst.ELD, 0.0)
    ends = drawing.segment_endpoints
    lengths = np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)
    mean = lengths.mean()
    if mean == 0:
        return RawMeasure(cnst.ELD, 0.0)
    return RawMeasure(cnst.ELD, float(np.abs(lengths - mean).mean() / mean))


_SYMMETRY_IDS = {"reflective": cnst.ESR, "rotational": cnst.ESO, "translational": cnst.EST}


def measure_symmetry(drawing: ProjectedDrawing,
                     kind: str,
                     config: Optional[SymmetryConfig] = None) -> RawMeasure:
    """
    Edge-based symmetry by Hough-style voting over edge pairs.

    Args:
        drawing:    Projected drawing.
        kind:       "reflective", "rotational" or "translational".
        config:     Bin pitches and length tolerance.

    Returns:
        Weight of the heaviest transform bin over m/2, clamped to [0, 1].
    """
    if kind not in _SYMMETRY_IDS:
        raise DomainException(f"symmetry kind must be one of {tuple(_SYMMETRY_IDS)}, got '{kind}'")
    measure_id = _SYMMETRY_IDS[kind]
    m = drawing.edge_count
    if m < 2:
        return RawMeasure(measure_id, 0.0)

    heaviest = symmetry_votes(drawing.segment_endpoints, drawing.viewport_diagonal, kind,
                              config or SymmetryConfig())
    logging.debug(f"{kind} symmetry: heaviest bin weight {heaviest} over {m} edges")
    return RawMeasure(measure_id, min(1.0, max(0.0, heaviest / (m / 2.0))))
