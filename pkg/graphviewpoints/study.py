import logging
import os
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from . import constants as c
from . import measures3d as m3d
from . import pipeline
from . import utilities
from ._symmetry import SymmetryConfig
from .dataset import GraphBundle, StudyDataset, read_dataset, selection_to_viewpoint
from .exceptions import DomainException
from .projection import CameraConfig


class ViewpointStudy:
    "A study dataset holds several graph drawings and the best/worst viewpoints picked for them"

    def __init__(self,
                 filename: str,
                 camera: Optional[CameraConfig] = None,
                 sample_count: int = c.DEFAULT_SAMPLE_COUNT,
                 raster_resolution: int = c.DEFAULT_RASTER_RESOLUTION,
                 symmetry: Optional[SymmetryConfig] = None,
                 workers: int = 1,
                 cache_dir: Optional[str] = None) -> None:
        if sample_count < 2:
            logging.error(f"Study opened with sample count {sample_count}")
            raise DomainException(f"sample count must be at least 2, got {sample_count}")
        self._filename = filename
        self._dataset = read_dataset(filename)
        for warning in self._dataset.warnings:
            logging.warning(warning)

        self._camera = camera or CameraConfig()
        self._sample_count = sample_count
        self._raster_resolution = raster_resolution
        self._symmetry = symmetry or SymmetryConfig()
        self._workers = workers
        self._cache_dir = cache_dir if cache_dir is not None else os.path.dirname(os.path.abspath(filename))
        self._config_hash = utilities.config_hash(
            pipeline.evaluation_config(self._camera, raster_resolution, self._symmetry))

        # Only build the selection table if requested
        self._selections = None

        # Only sample a graph's landscape if its ranges or landscape are requested
        self._landscape_dict: Dict[str, Optional[pd.DataFrame]] = dict.fromkeys(self._dataset.graph_ids, None)
        self._ranges_dict: Dict[str, Optional[pipeline.RangeTable]] = dict.fromkeys(self._dataset.graph_ids, None)
        self._axes_dict: Dict[str, m3d.PrincipalAxes] = {}

    @property
    def filename(self) -> str:
        """
        Get the filename (including filepath) of this dataset.
        """
        return self._filename

    @property
    def dataset(self) -> StudyDataset:
        return self._dataset

    @property
    def bundles(self) -> List[GraphBundle]:
        return list(self._dataset.bundles)

    @property
    def config_hash(self) -> str:
        """
        Hash of the camera, raster and symmetry settings that raw values depend on.
        """
        return self._config_hash

    @property
    def selections(self) -> pd.DataFrame:
        """
        Get a dataframe of every selection with its graph classes and view vector.
        Will be calculated upon first request for this data.
        """
        if self._selections is None:
            self._selections = self._build_selection_table()
        return self._selections

    def get_bundle(self, graph_id: str) -> GraphBundle:
        return self._dataset.bundle(graph_id)

    def get_axes(self, graph_id: str) -> m3d.PrincipalAxes:
        if graph_id not in self._axes_dict:
            self._axes_dict[graph_id] = m3d.pca_axes(self.get_bundle(graph_id).layout)
        return self._axes_dict[graph_id]

    def get_landscape(self, graph_id: str) -> pd.DataFrame:
        """
        Get the raw measure values at every sampled viewpoint of a graph.

        Args:
            graph_id:   The graph to sample.
        """
        if self._landscape_dict.get(graph_id) is None:
            self._landscape_dict[graph_id] = pipeline.sample_landscape(
                self.get_bundle(graph_id), self._sample_count, self._camera,
                self._raster_resolution, self._symmetry, self._workers)
        return self._landscape_dict[graph_id]

    def get_ranges(self, graph_id: str, try_load_from_file: bool = True) -> pipeline.RangeTable:
        """
        Get the per-measure range table of a graph.

        Args:
            graph_id:           The graph to get ranges for.
            try_load_from_file: Attempt to load the ranges from the cache file first.
                                The file can be generated using save_ranges
        """
        if self._ranges_dict.get(graph_id) is None:
            loaded = None
            if try_load_from_file:
                loaded = self._load_cached_ranges(graph_id)
            if loaded is None:
                loaded = pipeline.RangeTable.from_landscape(graph_id, self.get_landscape(graph_id), self._config_hash)
            self._ranges_dict[graph_id] = loaded

        return self._ranges_dict[graph_id]

    def get_all_ranges(self, try_load_from_file: bool = True) -> pipeline.RangeTable:
        return pipeline.RangeTable.concat(
            self.get_ranges(graph_id, try_load_from_file) for graph_id in self._dataset.graph_ids)

    def save_ranges(self, graph_id: str) -> str:
        save_file_name = self._generate_range_cache_filename(graph_id)
        self.get_ranges(graph_id).to_csv(save_file_name)
        return save_file_name

    def score_selections(self, ranges: Optional[pipeline.RangeTable] = None) -> pd.DataFrame:
        """
        Evaluate and normalise every selected viewpoint.

        Args:
            ranges: Range table to normalise against. Sampled (or loaded from
                    the cache) per graph if not given.

        Returns:
            The selection table with one score column per measure.
        """
        table = self.selections
        raw = np.empty((len(table), len(c.MEASURE_IDS)))
        for i, row in enumerate(table.itertuples(index=False)):
            graph_id = getattr(row, c.GRAPH_FIELD_NAME)
            v = np.array([getattr(row, name) for name in c.VIEW_FIELD_NAMES])
            raw[i] = pipeline.evaluate_raw(self.get_bundle(graph_id), v, self._camera, self._raster_resolution,
                                           self.get_axes(graph_id), self._symmetry).as_series().to_numpy()

        raw_frame = pd.DataFrame(raw, columns=list(c.MEASURE_IDS), index=table.index)
        raw_frame[c.GRAPH_FIELD_NAME] = table[c.GRAPH_FIELD_NAME]
        if ranges is None:
            graph_ids = list(dict.fromkeys(table[c.GRAPH_FIELD_NAME]))
            ranges = pipeline.RangeTable.concat(self.get_ranges(g) for g in graph_ids)
        scores = pipeline.normalize_frame(raw_frame, ranges)
        logging.info(f"Scored {len(table)} selections of {self.filename}")
        return pd.concat([table, scores[list(c.MEASURE_IDS)]], axis=1)


    # ------------------------------------------------------------------------
    # ----------------------- Private class functions ------------------------
    # ------------------------------------------------------------------------
    def _generate_range_cache_filename(self, graph_id: str) -> str:
        return os.path.join(self._cache_dir,
                            f"{graph_id}.{self._config_hash}.n{self._sample_count}.ranges.csv")

    def _load_cached_ranges(self, graph_id: str) -> Optional[pipeline.RangeTable]:
        save_file_name = self._generate_range_cache_filename(graph_id)
        try:
            table = pipeline.RangeTable.from_csv(save_file_name)
        except FileNotFoundError:
            return None
        if table.config_hash != self._config_hash or table.graph_ids != [graph_id]:
            logging.warning(f"Ignoring range cache {save_file_name}: it does not match this configuration")
            return None
        logging.debug(f"Loaded ranges of {graph_id} from {save_file_name}")
        return table

    def _build_selection_table(self) -> pd.DataFrame:
        """
        Tabulate the selections with their bundle classes and view vectors.

        Returns:
            One row per selection, in dataset order.
        """
        rows = []
        for record in self._dataset.selections:
            bundle = self.get_bundle(record.graph_id)
            v = selection_to_viewpoint(record, bundle)
            rows.append({
                c.PARTICIPANT_FIELD_NAME: record.participant_id,
                c.GRAPH_FIELD_NAME: record.graph_id,
                c.POLARITY_FIELD_NAME: record.polarity,
                c.LABEL_FIELD_NAME: record.label,
                c.LAYOUT_CLASS_FIELD_NAME: bundle.layout_class,
                c.SIZE_CLASS_FIELD_NAME: bundle.size_class,
                c.VIEW_X_FIELD_NAME: v[0],
                c.VIEW_Y_FIELD_NAME: v[1],
                c.VIEW_Z_FIELD_NAME: v[2],
            })
        return pd.DataFrame(rows, columns=_SELECTION_COLUMNS)


_SELECTION_COLUMNS = [
    c.PARTICIPANT_FIELD_NAME,
    c.GRAPH_FIELD_NAME,
    c.POLARITY_FIELD_NAME,
    c.LABEL_FIELD_NAME,
    c.LAYOUT_CLASS_FIELD_NAME,
    c.SIZE_CLASS_FIELD_NAME,
] + list(c.VIEW_FIELD_NAMES)
