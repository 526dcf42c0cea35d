# -*- coding: utf-8 -*-
"""
The measure registry and the evaluation pipeline.

A viewpoint is evaluated by projecting the bundle once and running every
registered measure on the projection. Sampling a graph's landscape evaluates
the Fibonacci viewpoints (optionally across worker processes, always reduced
in sample order) and range normalisation maps raw values to [0, 1] scores
with 1 the best value seen for that graph.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import constants as cnst
from . import measures2d as m2d
from . import measures3d as m3d
from ._symmetry import SymmetryConfig
from .dataset import GraphBundle
from .exceptions import DomainException, MissingRangeException
from .projection import CameraConfig, ProjectedDrawing, fibonacci_viewpoints, project_viewpoint
from . import utilities


class _Evaluation:
    """Everything the measures of one viewpoint share, computed on demand."""

    def __init__(self,
                 bundle: GraphBundle,
                 v: np.ndarray,
                 drawing: ProjectedDrawing,
                 axes: m3d.PrincipalAxes,
                 resolution: int,
                 symmetry: SymmetryConfig) -> None:
        self.bundle = bundle
        self.v = v
        self.drawing = drawing
        self.axes = axes
        self.resolution = resolution
        self.symmetry = symmetry

    @cached_property
    def crossings(self) -> m2d.CrossingSet:
        return m2d.crossings(self.drawing)

    @cached_property
    def area_aspect(self) -> Tuple[m2d.RawMeasure, m2d.RawMeasure]:
        return m2d.measure_area_aspect(self.drawing)

    @cached_property
    def census(self) -> Dict[str, m2d.RawMeasure]:
        measures = m3d.overlap_census(self.drawing, self.bundle.graph, self.resolution).as_measures()
        return {measure.measure_id: measure for measure in measures}


# measure_id -> function of the shared evaluation context, in registry order
MEASURE_REGISTRY: Dict[str, Callable[[_Evaluation], m2d.RawMeasure]] = {
    cnst.CR: lambda ev: m2d.measure_cr(ev.crossings),
    cnst.ST: lambda ev: m2d.measure_stress(ev.drawing, ev.bundle.graph),
    cnst.CAR: lambda ev: m2d.measure_car(ev.crossings),
    cnst.AR: lambda ev: ev.area_aspect[0],
    cnst.ASP: lambda ev: ev.area_aspect[1],
    cnst.CON: lambda ev: m2d.measure_concentration(ev.drawing),
    cnst.NO: lambda ev: m2d.measure_node_orthogonality(ev.drawing),
    cnst.GR: lambda ev: m2d.measure_gabriel(ev.drawing, ev.bundle.graph),
    cnst.ANGR: lambda ev: m2d.measure_angular_resolution(ev.drawing, ev.bundle.graph),
    cnst.EO: lambda ev: m2d.measure_edge_orthogonality(ev.drawing),
    cnst.ELD: lambda ev: m2d.measure_edge_length_deviation(ev.drawing),
    cnst.ESR: lambda ev: m2d.measure_symmetry(ev.drawing, "reflective", ev.symmetry),
    cnst.ESO: lambda ev: m2d.measure_symmetry(ev.drawing, "rotational", ev.symmetry),
    cnst.EST: lambda ev: m2d.measure_symmetry(ev.drawing, "translational", ev.symmetry),
    cnst.NNO: lambda ev: ev.census[cnst.NNO],
    cnst.ENO: lambda ev: ev.census[cnst.ENO],
    cnst.NEO: lambda ev: ev.census[cnst.NEO],
    cnst.NNOA: lambda ev: ev.census[cnst.NNOA],
    cnst.ENOA: lambda ev: ev.census[cnst.ENOA],
    cnst.NEOA: lambda ev: ev.census[cnst.NEOA],
    cnst.ISO: lambda ev: m3d.iso_score(ev.v, ev.axes),
}


@dataclass(frozen=True, eq=False)
class RawVector:
    """All registry measures of one (graph, viewpoint)."""

    graph_id: str
    viewpoint: np.ndarray
    values: Mapping[str, m2d.RawMeasure]

    def __post_init__(self) -> None:
        if set(self.values) != set(cnst.MEASURE_IDS):
            missing = sorted(set(cnst.MEASURE_IDS) - set(self.values))
            raise DomainException(f"raw vector for {self.graph_id} is missing measures {missing}")

    def __getitem__(self, measure_id: str) -> float:
        return self.values[measure_id].value

    def as_series(self) -> pd.Series:
        return pd.Series([self[m] for m in cnst.MEASURE_IDS], index=list(cnst.MEASURE_IDS), dtype=float)


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Range-normalised scores, 1 being the best value over the sampled landscape."""

    graph_id: str
    viewpoint: Optional[np.ndarray]
    scores: Mapping[str, float]
    range_table_id: str = ""

    def __post_init__(self) -> None:
        if set(self.scores) != set(cnst.MEASURE_IDS):
            missing = sorted(set(cnst.MEASURE_IDS) - set(self.scores))
            raise DomainException(f"score vector for {self.graph_id} is missing measures {missing}")
        for measure_id, score in self.scores.items():
            if not 0.0 <= score <= 1.0:
                raise DomainException(f"score {measure_id}={score} of {self.graph_id} is outside [0, 1]")

    def __getitem__(self, measure_id: str) -> float:
        return self.scores[measure_id]

    def as_array(self) -> np.ndarray:
        return np.array([self.scores[m] for m in cnst.MEASURE_IDS], dtype=float)

    def as_series(self) -> pd.Series:
        return pd.Series(self.as_array(), index=list(cnst.MEASURE_IDS))

    @classmethod
    def from_array(cls, graph_id: str, values: Sequence[float], viewpoint: Optional[np.ndarray] = None,
                   range_table_id: str = "") -> "ScoreVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (len(cnst.MEASURE_IDS),):
            raise DomainException(f"expected {len(cnst.MEASURE_IDS)} scores, got shape {values.shape}")
        return cls(graph_id, viewpoint, dict(zip(cnst.MEASURE_IDS, values.tolist())), range_table_id)


class RangeTable:
    """
    Per (graph, measure) minimum and maximum raw value over a sampled landscape.

    Rows are kept in graph order of insertion, then registry measure order.
    """

    def __init__(self, frame: pd.DataFrame, config_hash: str = "") -> None:
        missing = [c for c in cnst.RANGE_FIELD_NAMES if c not in frame.columns]
        if missing:
            raise DomainException(f"range table is missing columns {missing}")
        frame = frame.loc[:, list(cnst.RANGE_FIELD_NAMES)].reset_index(drop=True)
        frame = frame.astype({
            cnst.RANGE_GRAPH_FIELD_NAME: str,
            cnst.RANGE_MEASURE_FIELD_NAME: str,
            cnst.RANGE_MIN_FIELD_NAME: float,
            cnst.RANGE_MAX_FIELD_NAME: float,
            cnst.RANGE_SAMPLES_FIELD_NAME: np.int64,
        })
        inverted = frame[frame[cnst.RANGE_MIN_FIELD_NAME] > frame[cnst.RANGE_MAX_FIELD_NAME]]
        if len(inverted):
            row = inverted.iloc[0]
            raise DomainException(f"range of {row[cnst.RANGE_GRAPH_FIELD_NAME]}/{row[cnst.RANGE_MEASURE_FIELD_NAME]} "
                                  f"has min > max")
        self._frame = frame
        self._config_hash = config_hash

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    @property
    def config_hash(self) -> str:
        return self._config_hash

    @property
    def graph_ids(self) -> List[str]:
        return list(dict.fromkeys(self._frame[cnst.RANGE_GRAPH_FIELD_NAME]))

    @cached_property
    def table_id(self) -> str:
        """Content hash identifying this table in score provenance."""
        return utilities.config_hash({"config": self._config_hash,
                                      "rows": self._frame.astype(object).values.tolist()})

    @cached_property
    def _bounds(self) -> Dict[Tuple[str, str], Tuple[float, float]]:
        f = self._frame
        keys = zip(f[cnst.RANGE_GRAPH_FIELD_NAME], f[cnst.RANGE_MEASURE_FIELD_NAME])
        values = zip(f[cnst.RANGE_MIN_FIELD_NAME], f[cnst.RANGE_MAX_FIELD_NAME])
        return dict(zip(keys, values))

    def bounds(self, graph_id: str, measure_id: str) -> Tuple[float, float]:
        try:
            return self._bounds[(graph_id, measure_id)]
        except KeyError:
            logging.error(f"No range row for graph {graph_id}, measure {measure_id}")
            raise MissingRangeException(f"range table has no row for graph '{graph_id}', measure '{measure_id}'")

    def __len__(self) -> int:
        return len(self._frame)

    @classmethod
    def from_landscape(cls, graph_id: str, landscape: pd.DataFrame, config_hash: str = "") -> "RangeTable":
        """Build the range rows of one graph from its sampled landscape."""
        values = landscape.loc[:, list(cnst.MEASURE_IDS)]
        frame = pd.DataFrame({
            cnst.RANGE_GRAPH_FIELD_NAME: graph_id,
            cnst.RANGE_MEASURE_FIELD_NAME: list(cnst.MEASURE_IDS),
            cnst.RANGE_MIN_FIELD_NAME: values.min(axis=0).to_numpy(),
            cnst.RANGE_MAX_FIELD_NAME: values.max(axis=0).to_numpy(),
            cnst.RANGE_SAMPLES_FIELD_NAME: len(values),
        })
        return cls(frame, config_hash)

    @classmethod
    def concat(cls, tables: Iterable["RangeTable"]) -> "RangeTable":
        tables = list(tables)
        hashes = {t.config_hash for t in tables}
        if len(hashes) > 1:
            logging.warning(f"Concatenating range tables from different configurations {sorted(hashes)}")
        if not tables:
            return cls(pd.DataFrame(columns=list(cnst.RANGE_FIELD_NAMES)))
        frame = pd.concat([t.frame for t in tables], ignore_index=True)
        return cls(frame, tables[0].config_hash)

    def to_csv(self, filename: str) -> None:
        utilities.write_csv(self._frame, filename, self._config_hash)

    @classmethod
    def from_csv(cls, filename: str) -> "RangeTable":
        frame = utilities.read_csv(filename, dtype={cnst.RANGE_GRAPH_FIELD_NAME: str, cnst.RANGE_MEASURE_FIELD_NAME: str})
        return cls(frame, frame.attrs.get("config_hash", ""))


def evaluation_config(config: CameraConfig,
                      resolution: int,
                      symmetry: Optional[SymmetryConfig] = None) -> dict:
    """The configuration that determines raw measure values, as plain data."""
    symmetry = symmetry or SymmetryConfig()
    return {
        "camera": config.to_dict(),
        "raster_resolution": int(resolution),
        "symmetry": {
            "angle_pitch_deg": symmetry.angle_pitch_deg,
            "axis_offset_pitch": symmetry.axis_offset_pitch,
            "center_pitch": symmetry.center_pitch,
            "translation_pitch": symmetry.translation_pitch,
            "length_sigma": symmetry.length_sigma,
        },
    }


def evaluate_raw(bundle: GraphBundle,
                 v: np.ndarray,
                 config: CameraConfig,
                 resolution: int = cnst.DEFAULT_RASTER_RESOLUTION,
                 axes: Optional[m3d.PrincipalAxes] = None,
                 symmetry: Optional[SymmetryConfig] = None) -> RawVector:
    """
    Evaluate all registry measures for one viewpoint.

    Args:
        bundle:     Graph drawing.
        v:          Unit view vector in layout coordinates.
        config:     Camera parameters.
        resolution: Raster resolution of edge/node overlap areas.
        axes:       Principal axes of the layout, computed if not supplied.
        symmetry:   Symmetry accumulator parameters.

    Returns:
        The raw vector.
    """
    v = np.asarray(v, dtype=float).reshape(3)
    drawing = project_viewpoint(bundle, v, config)
    evaluation = _Evaluation(bundle, v, drawing, axes if axes is not None else m3d.pca_axes(bundle.layout),
                             resolution, symmetry or SymmetryConfig())
    values = {measure_id: measure(evaluation) for measure_id, measure in MEASURE_REGISTRY.items()}
    return RawVector(bundle.id, v, values)


def sample_landscape(bundle: GraphBundle,
                     count: int,
                     config: CameraConfig,
                     resolution: int = cnst.DEFAULT_RASTER_RESOLUTION,
                     symmetry: Optional[SymmetryConfig] = None,
                     workers: int = 1) -> pd.DataFrame:
    """
    Raw measure values at every Fibonacci viewpoint of a graph.

    Args:
        bundle:     Graph drawing.
        count:      Number of viewpoints.
        config:     Camera parameters.
        resolution: Raster resolution.
        symmetry:   Symmetry accumulator parameters.
        workers:    Worker processes; 1 evaluates in this process.

    Returns:
        DataFrame indexed by sample number with the view vector columns
        followed by one column per measure in registry order.
    """
    viewpoints = fibonacci_viewpoints(count)
    axes = m3d.pca_axes(bundle.layout)
    symmetry = symmetry or SymmetryConfig()
    logging.debug(f"Sampling {count} viewpoints of {bundle.id} with {workers} worker(s)")

    if workers <= 1 or count < 2 * workers:
        rows = _evaluate_chunk(bundle, viewpoints, config, resolution, axes, symmetry)
    else:
        chunks = np.array_split(viewpoints, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # map() yields in submission order, so rows stay in sample order
            results = executor.map(_evaluate_chunk, *zip(*[
                (bundle, chunk, config, resolution, axes, symmetry) for chunk in chunks
            ]))
            rows = np.concatenate(list(results))

    frame = pd.DataFrame(np.column_stack([viewpoints, rows]),
                         columns=list(cnst.VIEW_FIELD_NAMES) + list(cnst.MEASURE_IDS))
    frame.index.name = cnst.SAMPLE_INDEX_FIELD_NAME
    return frame


def sample_ranges(bundle: GraphBundle,
                  count: int,
                  config: CameraConfig,
                  resolution: int = cnst.DEFAULT_RASTER_RESOLUTION,
                  symmetry: Optional[SymmetryConfig] = None,
                  workers: int = 1) -> RangeTable:
    """
    Per-measure min/max over the graph's sampled landscape.

    Args:
        bundle:     Graph drawing.
        count:      Number of Fibonacci viewpoints, at least 2.

    Returns:
        Range table with one row per registry measure.
    """
    if count < 2:
        logging.error(f"Range sampling needs at least 2 viewpoints, got {count}")
        raise DomainException(f"sample count must be at least 2, got {count}")
    landscape = sample_landscape(bundle, count, config, resolution, symmetry, workers)
    digest = utilities.config_hash(evaluation_config(config, resolution, symmetry))
    return RangeTable.from_landscape(bundle.id, landscape, digest)


def normalize(raw: RawVector, ranges: RangeTable) -> ScoreVector:
    """
    Map raw values to [0, 1] against the graph's range, 1 being best.

    Args:
        raw:    Raw vector of one viewpoint.
        ranges: Range table covering raw.graph_id.

    Returns:
        The score vector.
    """
    scores = {}
    for measure_id in cnst.MEASURE_IDS:
        lo, hi = ranges.bounds(raw.graph_id, measure_id)
        scores[measure_id] = float(_scale(np.array([raw[measure_id]]), np.array([lo]), np.array([hi]),
                                          cnst.POLARITY[measure_id])[0])
    return ScoreVector(raw.graph_id, raw.viewpoint, scores, ranges.table_id)


def normalize_frame(frame: pd.DataFrame, ranges: RangeTable, graph_id: Optional[str] = None) -> pd.DataFrame:
    """
    Normalise every measure column of a table of raw values.

    Args:
        frame:      Table with one column per measure id and, unless graph_id
                    is given, a graph column naming each row's graph.
        ranges:     Range table covering every graph in the frame.
        graph_id:   Graph of all rows, for single-graph tables such as a landscape.

    Returns:
        A copy of frame with the measure columns replaced by scores.
    """
    if graph_id is not None:
        graphs = pd.Series(graph_id, index=frame.index)
    elif cnst.GRAPH_FIELD_NAME in frame.columns:
        graphs = frame[cnst.GRAPH_FIELD_NAME].astype(str)
    else:
        raise DomainException(f"frame has no '{cnst.GRAPH_FIELD_NAME}' column and no graph_id was given")

    out = frame.copy()
    for measure_id in cnst.MEASURE_IDS:
        if measure_id not in frame.columns:
            continue
        bounds = np.array([ranges.bounds(g, measure_id) for g in graphs]).reshape(-1, 2)
        out[measure_id] = _scale(frame[measure_id].to_numpy(dtype=float), bounds[:, 0], bounds[:, 1],
                                 cnst.POLARITY[measure_id])
    return out


# Private utility functions
def _scale(values: np.ndarray, lo: np.ndarray, hi: np.ndarray, polarity: str) -> np.ndarray:
    span = hi - lo
    degenerate = span < cnst.DEGENERATE_RANGE_EPS
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip((values - lo) / np.where(degenerate, 1.0, span), 0.0, 1.0)
    scores = t if polarity == cnst.HIGHER_BETTER else 1.0 - t
    return np.where(degenerate, 1.0, scores)


def _evaluate_chunk(bundle: GraphBundle,
                    viewpoints: np.ndarray,
                    config: CameraConfig,
                    resolution: int,
                    axes: m3d.PrincipalAxes,
                    symmetry: SymmetryConfig) -> np.ndarray:
    rows = np.empty((len(viewpoints), len(cnst.MEASURE_IDS)))
    for i, v in enumerate(viewpoints):
        rows[i] = evaluate_raw(bundle, v, config, resolution, axes, symmetry).as_series().to_numpy()
    return rows
