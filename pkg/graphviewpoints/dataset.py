# -*- coding: utf-8 -*-
"""
Graphs, 3D layouts, study selections and the canonical dataset file format.

A dataset file is a single JSON document with two top-level lists,
``bundles`` (graph drawings) and ``selections`` (the best/worst viewpoints
participants picked for them).
"""
import io
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, BinaryIO, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.spatial.transform import Rotation

from . import constants as cnst
from .exceptions import (
    DatasetParseException,
    DatasetValidationException,
    DegeneratePoseException,
    DomainException,
)

_TOP_LEVEL_KEYS = ("bundles", "selections")
_BUNDLE_KEYS = ("id", "layout_class", "size_class", "nodes", "edges", "node_radius", "edge_radius")
_SELECTION_KEYS = ("participant", "graph", "polarity", "graph_pose", "user_pose")
_POSE_KEYS = ("position", "rotation")


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected simple graph on nodes 0..node_count-1."""

    node_count: int
    edges: np.ndarray

    def __post_init__(self) -> None:
        if self.node_count < 0:
            raise DatasetValidationException(f"node_count must be nonnegative, got {self.node_count}")

        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= self.node_count):
            bad = edges[((edges < 0) | (edges >= self.node_count)).any(axis=1)][0]
            raise DatasetValidationException(
                f"edge ({bad[0]}, {bad[1]}) references a node outside [0, {self.node_count})"
            )

        loops = edges[edges[:, 0] == edges[:, 1]]
        if len(loops):
            raise DatasetValidationException(f"self-loop on node {loops[0, 0]}")

        unordered = np.sort(edges, axis=1)
        unique, counts = np.unique(unordered, axis=0, return_counts=True)
        if len(unique) and counts.max() > 1:
            dup = unique[counts.argmax()]
            raise DatasetValidationException(f"duplicate edge ({dup[0]}, {dup[1]})")

        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(map(tuple, self.edges.tolist()))
        return g

    @cached_property
    def shortest_path_lengths(self) -> np.ndarray:
        """
        Unweighted all-pairs hop distances; disconnected pairs are inf.
        """
        if self.node_count == 0:
            return np.zeros((0, 0))
        return np.asarray(nx.floyd_warshall_numpy(self.to_networkx(), nodelist=list(range(self.node_count))))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)


@dataclass(frozen=True, eq=False)
class Layout3D:
    """Fixed 3D node positions together with the sphere and tube radii used to draw them."""

    positions: np.ndarray
    node_radius: float
    edge_radius: float
    center: np.ndarray
    bounding_radius: float

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if not np.isfinite(positions).all():
            raise DatasetValidationException("node positions must be finite")
        center = np.asarray(self.center, dtype=float).reshape(3)

        reach = np.linalg.norm(positions - center, axis=1).max() if len(positions) else 0.0
        if self.bounding_radius < reach * (1 - 1e-12) - 1e-12:
            raise DatasetValidationException(
                f"bounding_radius {self.bounding_radius} is smaller than the farthest node distance {reach}"
            )
        if not self.node_radius > 0:
            raise DatasetValidationException(f"node_radius must be positive, got {self.node_radius}")
        if not 0 < self.edge_radius < self.node_radius:
            raise DatasetValidationException(
                f"edge_radius must lie in (0, node_radius={self.node_radius}), got {self.edge_radius}"
            )

        positions.setflags(write=False)
        center.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "center", center)

    @classmethod
    def from_positions(cls,
                       positions: Sequence[Sequence[float]],
                       node_radius: Optional[float] = None,
                       edge_radius: Optional[float] = None) -> "Layout3D":
        """
        Build a layout, recomputing the centre and bounding radius from the positions.

        Args:
            positions:      One 3D point per node, in layout units.
            node_radius:    Sphere radius. Defaults to 0.02 x bounding radius.
            edge_radius:    Tube half-thickness. Defaults to 0.006 x bounding radius.

        Returns:
            The validated layout.
        """
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        center = positions.mean(axis=0) if len(positions) else np.zeros(3)
        reach = float(np.linalg.norm(positions - center, axis=1).max()) if len(positions) else 0.0

        # Coincident nodes give no scale, so the defaults fall back to unit scale
        scale = reach if reach > 0 else 1.0
        if node_radius is None:
            node_radius = cnst.DEFAULT_NODE_RADIUS_FACTOR * scale
        if edge_radius is None:
            edge_radius = cnst.DEFAULT_EDGE_RADIUS_FACTOR * scale
        bounding_radius = reach if reach > 0 else float(node_radius)

        return cls(positions, float(node_radius), float(edge_radius), center, bounding_radius)

    @property
    def node_count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True, eq=False)
class GraphBundle:
    """A graph with its layout and class metadata."""

    id: str
    layout_class: str
    size_class: str
    graph: Graph
    layout: Layout3D

    def __post_init__(self) -> None:
        if self.layout_class not in cnst.LAYOUT_CLASSES:
            raise DatasetValidationException(
                f"bundle '{self.id}': layout_class must be one of {cnst.LAYOUT_CLASSES}, got '{self.layout_class}'"
            )
        if self.size_class not in cnst.SIZE_CLASSES:
            raise DatasetValidationException(
                f"bundle '{self.id}': size_class must be one of {cnst.SIZE_CLASSES}, got '{self.size_class}'"
            )
        if self.layout.node_count != self.graph.node_count:
            raise DatasetValidationException(
                f"bundle '{self.id}': {self.layout.node_count} positions for {self.graph.node_count} nodes"
            )

    def size_class_warning(self) -> Optional[str]:
        """
        Check the declared size class against the node-count bands.

        Returns:
            A warning message, or None if the node count is within 25% of the band.
        """
        target = cnst.SIZE_CLASS_NODE_COUNTS[self.size_class]
        n = self.graph.node_count
        if abs(n - target) > cnst.SIZE_CLASS_TOLERANCE * target:
            return f"bundle '{self.id}': {n} nodes is outside the {self.size_class} band ({target} +/- 25%)"
        return None


@dataclass(frozen=True, eq=False)
class Pose:
    """A position plus a unit quaternion in (x, y, z, w) order."""

    position: np.ndarray
    rotation: np.ndarray

    def __post_init__(self) -> None:
        position = np.asarray(self.position, dtype=float).reshape(3)
        rotation = np.asarray(self.rotation, dtype=float).reshape(4)
        norm = np.linalg.norm(rotation)
        if abs(norm - 1.0) > cnst.QUATERNION_NORM_TOL:
            raise DatasetValidationException(f"rotation quaternion has norm {norm}, expected 1")
        position.setflags(write=False)
        rotation.setflags(write=False)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "rotation", rotation)

    def as_rotation(self) -> Rotation:
        return Rotation.from_quat(self.rotation)


@dataclass(frozen=True, eq=False)
class SelectionRecord:
    """One logged best or worst view of a graph."""

    participant_id: str
    graph_id: str
    polarity: str
    graph_pose: Pose
    user_pose: Pose

    def __post_init__(self) -> None:
        if self.polarity not in cnst.POLARITIES:
            raise DatasetValidationException(
                f"selection of participant '{self.participant_id}' on graph '{self.graph_id}': "
                f"polarity must be one of {cnst.POLARITIES}, got '{self.polarity}'"
            )

    @property
    def label(self) -> int:
        return cnst.LABELS[self.polarity]


@dataclass(frozen=True, eq=False)
class StudyDataset:
    """All graph bundles of a study plus the selections made on them."""

    bundles: Tuple[GraphBundle, ...]
    selections: Tuple[SelectionRecord, ...]
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bundles", tuple(self.bundles))
        object.__setattr__(self, "selections", tuple(self.selections))
        object.__setattr__(self, "warnings", tuple(self.warnings))

        seen = set()
        for bundle in self.bundles:
            if bundle.id in seen:
                raise DatasetValidationException(f"bundle '{bundle.id}': duplicate bundle id")
            seen.add(bundle.id)

        for i, sel in enumerate(self.selections):
            if sel.graph_id not in seen:
                raise DatasetValidationException(
                    f"selection {i} (participant '{sel.participant_id}', polarity '{sel.polarity}'): "
                    f"unknown graph id '{sel.graph_id}'"
                )

    @cached_property
    def _bundle_index(self) -> Dict[str, GraphBundle]:
        return {b.id: b for b in self.bundles}

    def bundle(self, graph_id: str) -> GraphBundle:
        try:
            return self._bundle_index[graph_id]
        except KeyError:
            logging.error(f"Unknown graph id {graph_id}")
            raise DomainException(f"dataset has no graph '{graph_id}'")

    @property
    def graph_ids(self) -> List[str]:
        return [b.id for b in self.bundles]


def infer_size_class(node_count: int) -> str:
    """
    Pick the size class whose nominal node count is closest to node_count.
    """
    return min(cnst.SIZE_CLASSES, key=lambda s: abs(cnst.SIZE_CLASS_NODE_COUNTS[s] - node_count))


def edge_density(graph: Graph) -> float:
    """
    Fraction of possible edges present, 2m / (n(n-1)).

    Args:
        graph: Graph with at least two nodes.

    Returns:
        Edge density in [0, 1].
    """
    n = graph.node_count
    if n < 2:
        logging.error(f"Edge density undefined for {n} nodes")
        raise DomainException(f"edge density needs at least 2 nodes, got {n}")
    return 2.0 * graph.edge_count / (n * (n - 1))


def selection_to_viewpoint(record: SelectionRecord, bundle: GraphBundle) -> np.ndarray:
    """
    Convert a logged (graph pose, user pose) pair into a view vector.

    The view vector points from the user towards the graph and is expressed in
    the graph's local coordinates, so it can be compared across rotations.

    Args:
        record: The selection to convert.
        bundle: The bundle the selection refers to.

    Returns:
        Unit 3-vector in graph-local coordinates.
    """
    if record.graph_id != bundle.id:
        raise DomainException(f"selection refers to graph '{record.graph_id}', got bundle '{bundle.id}'")

    direction = record.graph_pose.position - record.user_pose.position
    local = record.graph_pose.as_rotation().inv().apply(direction)
    norm = np.linalg.norm(local)
    if norm < 1e-12:
        logging.error(f"Zero-length view direction for participant {record.participant_id} on {record.graph_id}")
        raise DegeneratePoseException(
            f"user and graph positions coincide for participant '{record.participant_id}' on graph '{record.graph_id}'"
        )
    return local / norm


# ------------------------------------------------------------------------
# ----------------------- Canonical JSON format --------------------------
# ------------------------------------------------------------------------
def parse_dataset(input: Union[bytes, str, BinaryIO], format: str = "canonical-json") -> StudyDataset:
    """
    Parse and validate a dataset document.

    Args:
        input:  Raw bytes, text, or a binary stream holding the JSON document.
        format: Only "canonical-json" is understood.

    Returns:
        A validated StudyDataset. Unknown fields are skipped and listed in
        its ``warnings``.
    """
    if format != "canonical-json":
        raise DomainException(f"unsupported dataset format '{format}'")

    if hasattr(input, "read"):
        input = input.read()
    if isinstance(input, bytes):
        try:
            input = input.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DatasetParseException(f"dataset is not valid UTF-8: {e}")

    try:
        document = json.loads(input)
    except json.JSONDecodeError as e:
        logging.error(f"Malformed dataset JSON at line {e.lineno}")
        raise DatasetParseException(f"line {e.lineno}, column {e.colno}: {e.msg}")

    warnings: List[str] = []
    _check_object(document, "$", _TOP_LEVEL_KEYS, warnings)
    raw_bundles = _check_list(_require(document, "bundles", "$"), "$.bundles")
    raw_selections = _check_list(document.get("selections", []), "$.selections")

    bundles = [_parse_bundle(b, f"$.bundles[{i}]", warnings) for i, b in enumerate(raw_bundles)]
    selections = [_parse_selection(s, f"$.selections[{i}]", warnings) for i, s in enumerate(raw_selections)]

    for bundle in bundles:
        message = bundle.size_class_warning()
        if message:
            warnings.append(message)

    for message in warnings:
        logging.warning(message)

    return StudyDataset(tuple(bundles), tuple(selections), tuple(warnings))


def serialize_dataset(dataset: StudyDataset) -> str:
    """
    Write a dataset back to canonical JSON. Radii are always written out.
    """
    document = {
        "bundles": [
            {
                "id": b.id,
                "layout_class": b.layout_class,
                "size_class": b.size_class,
                "nodes": b.layout.positions.tolist(),
                "edges": b.graph.edges.tolist(),
                "node_radius": b.layout.node_radius,
                "edge_radius": b.layout.edge_radius,
            }
            for b in dataset.bundles
        ],
        "selections": [
            {
                "participant": s.participant_id,
                "graph": s.graph_id,
                "polarity": s.polarity,
                "graph_pose": _pose_to_dict(s.graph_pose),
                "user_pose": _pose_to_dict(s.user_pose),
            }
            for s in dataset.selections
        ],
    }
    return json.dumps(document, indent=1)


def read_dataset(filename: str) -> StudyDataset:
    with open(filename, "rb") as f:
        return parse_dataset(f)


def write_dataset(dataset: StudyDataset, filename: str) -> None:
    with io.open(filename, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_dataset(dataset))


def _pose_to_dict(pose: Pose) -> dict:
    return {"position": pose.position.tolist(), "rotation": pose.rotation.tolist()}


def _parse_bundle(raw: Any, path: str, warnings: List[str]) -> GraphBundle:
    _check_object(raw, path, _BUNDLE_KEYS, warnings)
    bundle_id = _check_str(_require(raw, "id", path), f"{path}.id")

    nodes = _check_list(_require(raw, "nodes", path), f"{path}.nodes")
    positions = [_check_vector(p, 3, f"{path}.nodes[{i}]") for i, p in enumerate(nodes)]
    if not positions:
        raise DatasetValidationException(f"bundle '{bundle_id}' ({path}): a bundle needs at least one node")

    raw_edges = _check_list(_require(raw, "edges", path), f"{path}.edges")
    edges = [_check_index_pair(e, f"{path}.edges[{i}]") for i, e in enumerate(raw_edges)]

    node_radius = raw.get("node_radius")
    edge_radius = raw.get("edge_radius")
    if node_radius is not None:
        node_radius = _check_number(node_radius, f"{path}.node_radius")
    if edge_radius is not None:
        edge_radius = _check_number(edge_radius, f"{path}.edge_radius")

    try:
        graph = Graph(len(positions), np.array(edges, dtype=np.int64).reshape(-1, 2))
        layout = Layout3D.from_positions(positions, node_radius, edge_radius)
        return GraphBundle(
            bundle_id,
            _check_str(_require(raw, "layout_class", path), f"{path}.layout_class"),
            _check_str(_require(raw, "size_class", path), f"{path}.size_class"),
            graph,
            layout,
        )
    except DatasetValidationException as e:
        logging.error(f"Invalid bundle {bundle_id}: {e}")
        raise DatasetValidationException(f"bundle '{bundle_id}' ({path}): {e}")


def _parse_selection(raw: Any, path: str, warnings: List[str]) -> SelectionRecord:
    _check_object(raw, path, _SELECTION_KEYS, warnings)
    participant = _check_str(_require(raw, "participant", path), f"{path}.participant")
    graph_id = _check_str(_require(raw, "graph", path), f"{path}.graph")
    try:
        return SelectionRecord(
            participant,
            graph_id,
            _check_str(_require(raw, "polarity", path), f"{path}.polarity"),
            _parse_pose(_require(raw, "graph_pose", path), f"{path}.graph_pose", warnings),
            _parse_pose(_require(raw, "user_pose", path), f"{path}.user_pose", warnings),
        )
    except DatasetValidationException as e:
        logging.error(f"Invalid selection at {path}: {e}")
        raise DatasetValidationException(f"selection {path} (participant '{participant}', graph '{graph_id}'): {e}")


def _parse_pose(raw: Any, path: str, warnings: List[str]) -> Pose:
    _check_object(raw, path, _POSE_KEYS, warnings)
    return Pose(
        _check_vector(_require(raw, "position", path), 3, f"{path}.position"),
        _check_vector(_require(raw, "rotation", path), 4, f"{path}.rotation"),
    )


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise DatasetParseException(f"{path}: missing required field '{key}'")
    return obj[key]


def _check_object(obj: Any, path: str, known: Sequence[str], warnings: List[str]) -> None:
    if not isinstance(obj, dict):
        raise DatasetParseException(f"{path}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in known:
            warnings.append(f"{path}.{key}: unknown field ignored")


def _check_list(obj: Any, path: str) -> list:
    if not isinstance(obj, list):
        raise DatasetParseException(f"{path}: expected a list, got {type(obj).__name__}")
    return obj


def _check_str(obj: Any, path: str) -> str:
    if not isinstance(obj, str):
        raise DatasetParseException(f"{path}: expected a string, got {type(obj).__name__}")
    return obj


def _check_number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
        raise DatasetParseException(f"{path}: expected a finite number, got {obj!r}")
    return float(obj)


def _check_vector(obj: Any, length: int, path: str) -> List[float]:
    values = _check_list(obj, path)
    if len(values) != length:
        raise DatasetParseException(f"{path}: expected {length} numbers, got {len(values)}")
    return [_check_number(v, f"{path}[{i}]") for i, v in enumerate(values)]


def _check_index_pair(obj: Any, path: str) -> Tuple[int, int]:
    values = _check_list(obj, path)
    if len(values) != 2:
        raise DatasetParseException(f"{path}: an edge needs exactly 2 node indices, got {len(values)}")
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, int):
            raise DatasetParseException(f"{path}[{i}]: expected an integer node index, got {v!r}")
    return values[0], values[1]
