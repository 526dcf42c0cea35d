# -*- coding: utf-8 -*-
"""
Viewpoint sampling, camera construction and perspective projection.

Projected coordinates are in viewport units: the image plane sits at unit
distance in front of the eye, so a vertical field of view of 90 degrees gives
a viewport two units high.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import constants as cnst
from .dataset import GraphBundle, Layout3D
from .exceptions import DegenerateLayoutException, DomainException, ProjectionDomainException

Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class CameraConfig:
    """Perspective camera parameters shared by every viewpoint of a run."""

    vertical_fov: float = cnst.DEFAULT_VERTICAL_FOV_DEG
    aspect: float = cnst.DEFAULT_ASPECT
    distance_factor: float = cnst.DEFAULT_DISTANCE_FACTOR
    preferred_up: Vec3 = cnst.DEFAULT_PREFERRED_UP
    fallback_up: Vec3 = cnst.DEFAULT_FALLBACK_UP

    def __post_init__(self) -> None:
        if not 0 < self.vertical_fov < 180:
            raise DomainException(f"vertical_fov must lie in (0, 180) degrees, got {self.vertical_fov}")
        if not self.aspect > 0:
            raise DomainException(f"aspect must be positive, got {self.aspect}")
        if not self.distance_factor > 1:
            raise DomainException(f"distance_factor must exceed 1, got {self.distance_factor}")
        for name in ("preferred_up", "fallback_up"):
            axis = tuple(float(a) for a in getattr(self, name))
            if len(axis) != 3 or np.linalg.norm(axis) == 0:
                raise DomainException(f"{name} must be a nonzero 3-vector, got {axis}")
            object.__setattr__(self, name, axis)
        if np.linalg.norm(np.cross(self.preferred_up, self.fallback_up)) == 0:
            raise DomainException("preferred_up and fallback_up must not be parallel")

    @property
    def viewport_height(self) -> float:
        return 2.0 * math.tan(math.radians(self.vertical_fov) / 2.0)

    @property
    def viewport_width(self) -> float:
        return self.aspect * self.viewport_height

    def to_dict(self) -> dict:
        d = asdict(self)
        d["preferred_up"] = list(self.preferred_up)
        d["fallback_up"] = list(self.fallback_up)
        return d


@dataclass(frozen=True, eq=False)
class Camera:
    """A pinhole camera: eye point, orthonormal basis and image-plane extent."""

    eye: np.ndarray
    right: np.ndarray
    up: np.ndarray
    forward: np.ndarray
    focal: float
    viewport: Tuple[float, float]

    @property
    def basis(self) -> np.ndarray:
        """Rows are right, up, forward."""
        return np.vstack([self.right, self.up, self.forward])

    def to_eye_space(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.eye) @ self.basis.T


@dataclass(frozen=True)
class ProjectedCircle:
    center: Tuple[float, float]
    radius: float
    depth: float
    node_index: int


@dataclass(frozen=True)
class ProjectedThickSegment:
    endpoints: Tuple[Tuple[float, float], Tuple[float, float]]
    half_widths: Tuple[float, float]
    depths: Tuple[float, float]
    edge_index: int


@dataclass(frozen=True, eq=False)
class ProjectedDrawing:
    """
    A 2D drawing with depth: one circle per node, one thick segment per edge.

    Stored as arrays; ``circles`` and ``segments`` give the per-primitive view.
    Segment endpoints and depths are those of the edge's end nodes.
    """

    node_centers: np.ndarray
    edges: np.ndarray
    node_radii: Optional[np.ndarray] = None
    node_depths: Optional[np.ndarray] = None
    segment_half_widths: Optional[np.ndarray] = None
    viewport: Tuple[float, float] = (2.0, 2.0)

    def __post_init__(self) -> None:
        centers = np.asarray(self.node_centers, dtype=float).reshape(-1, 2)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n, m = len(centers), len(edges)

        radii = np.full(n, 0.01) if self.node_radii is None else np.asarray(self.node_radii, dtype=float)
        depths = np.ones(n) if self.node_depths is None else np.asarray(self.node_depths, dtype=float)
        if self.segment_half_widths is None:
            half_widths = np.full((m, 2), 0.003)
        else:
            half_widths = np.asarray(self.segment_half_widths, dtype=float).reshape(-1, 2)

        if radii.shape != (n,) or depths.shape != (n,) or half_widths.shape != (m, 2):
            raise DomainException("projected drawing arrays do not match the node and edge counts")
        if m and (edges.min() < 0 or edges.max() >= n):
            raise DomainException("projected drawing has an edge referencing a missing node")

        for name, value in (("node_centers", centers), ("edges", edges), ("node_radii", radii),
                            ("node_depths", depths), ("segment_half_widths", half_widths)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "viewport", (float(self.viewport[0]), float(self.viewport[1])))

    @property
    def node_count(self) -> int:
        return len(self.node_centers)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def segment_endpoints(self) -> np.ndarray:
        """Shape (m, 2, 2): edge, endpoint, xy."""
        return self.node_centers[self.edges]

    @property
    def segment_depths(self) -> np.ndarray:
        return self.node_depths[self.edges]

    @property
    def viewport_area(self) -> float:
        return self.viewport[0] * self.viewport[1]

    @property
    def viewport_diagonal(self) -> float:
        return math.hypot(*self.viewport)

    @property
    def circles(self) -> List[ProjectedCircle]:
        return [
            ProjectedCircle(tuple(c), float(r), float(d), i)
            for i, (c, r, d) in enumerate(zip(self.node_centers.tolist(), self.node_radii, self.node_depths))
        ]

    @property
    def segments(self) -> List[ProjectedThickSegment]:
        ends = self.segment_endpoints.tolist()
        depths = self.segment_depths.tolist()
        widths = self.segment_half_widths.tolist()
        return [
            ProjectedThickSegment((tuple(e[0]), tuple(e[1])), tuple(w), tuple(d), i)
            for i, (e, w, d) in enumerate(zip(ends, widths, depths))
        ]

    def transformed(self, linear: np.ndarray, offset: Optional[np.ndarray] = None) -> "ProjectedDrawing":
        """
        Apply a similarity transform to the 2D coordinates.

        Radii and half-widths scale with sqrt(|det(linear)|); depths are kept.
        """
        linear = np.asarray(linear, dtype=float)
        offset = np.zeros(2) if offset is None else np.asarray(offset, dtype=float)
        scale = math.sqrt(abs(np.linalg.det(linear)))
        return ProjectedDrawing(
            self.node_centers @ linear.T + offset,
            self.edges,
            self.node_radii * scale,
            self.node_depths,
            self.segment_half_widths * scale,
            (self.viewport[0] * scale, self.viewport[1] * scale),
        )


def fibonacci_viewpoints(count: int) -> np.ndarray:
    """
    Near-uniform unit vectors on the sphere from the Fibonacci lattice.

    Point i has z = 1 - (2i+1)/count and azimuth i * pi * (3 - sqrt(5)).

    Args:
        count: Number of viewpoints, at least 1.

    Returns:
        Array of shape (count, 3).
    """
    if count < 1:
        logging.error(f"Requested {count} Fibonacci viewpoints")
        raise DomainException(f"viewpoint count must be at least 1, got {count}")

    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    points = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    # Renormalise away the rounding in sqrt(1 - z^2)
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def camera_from_viewpoint(v: np.ndarray, layout: Layout3D, config: CameraConfig) -> Camera:
    """
    Place a camera on the view ray through the layout centre.

    Args:
        v:      Unit view direction (from the eye towards the graph).
        layout: Layout supplying centre and bounding radius.
        config: Camera parameters.

    Returns:
        Camera looking along v from distance_factor bounding radii away.
    """
    v = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > cnst.UNIT_VECTOR_TOL:
        raise DomainException(f"view vector must be unit length, got norm {np.linalg.norm(v)}")
    if layout.bounding_radius <= 0:
        logging.error("Camera requested for a layout with zero bounding radius")
        raise DegenerateLayoutException("layout has zero bounding radius")

    forward = v / np.linalg.norm(v)
    up_axis = np.asarray(config.preferred_up, dtype=float)
    up_axis = up_axis / np.linalg.norm(up_axis)
    if abs(forward @ up_axis) > cnst.UP_PARALLEL_THRESHOLD:
        logging.debug(f"View {forward} is parallel to the preferred up axis, using fallback")
        up_axis = np.asarray(config.fallback_up, dtype=float)
        up_axis = up_axis / np.linalg.norm(up_axis)

    # Gram-Schmidt: strip the forward component from the up axis
    up = up_axis - (up_axis @ forward) * forward
    up = up / np.linalg.norm(up)
    right = np.cross(forward, up)
    right = right / np.linalg.norm(right)

    eye = layout.center - forward * (config.distance_factor * layout.bounding_radius)
    return Camera(eye, right, up, forward, 1.0, (config.viewport_width, config.viewport_height))


def project(bundle: GraphBundle, camera: Camera) -> ProjectedDrawing:
    """
    Perspective-project a bundle's nodes and edges.

    Node radii and edge half-widths shrink with depth as radius * focal / depth.

    Args:
        bundle: Graph drawing to project.
        camera: Camera from camera_from_viewpoint.

    Returns:
        The projected drawing.
    """
    eye_space = camera.to_eye_space(bundle.layout.positions)
    depths = eye_space[:, 2]
    behind = np.flatnonzero(depths <= 0)
    if len(behind):
        logging.error(f"Node {behind[0]} of {bundle.id} is behind the eye plane")
        raise ProjectionDomainException(
            f"node {behind[0]} of bundle '{bundle.id}' is not in front of the camera (depth {depths[behind[0]]})"
        )

    centers = camera.focal * eye_space[:, :2] / depths[:, None]
    radii = bundle.layout.node_radius * camera.focal / depths
    half_widths = bundle.layout.edge_radius * camera.focal / depths[bundle.graph.edges]

    return ProjectedDrawing(centers, bundle.graph.edges, radii, depths, half_widths, camera.viewport)


def project_viewpoint(bundle: GraphBundle, v: np.ndarray, config: CameraConfig) -> ProjectedDrawing:
    return project(bundle, camera_from_viewpoint(v, bundle.layout, config))
