import math

import numpy as np
import pandas as pd
import pytest

from graphviewpoints import constants as cnst
from graphviewpoints import measures2d as m2d
from graphviewpoints import measures3d as m3d
from graphviewpoints.dataset import Graph, GraphBundle, Layout3D
from graphviewpoints.exceptions import DomainException, MissingRangeException
from graphviewpoints.pipeline import (
    MEASURE_REGISTRY,
    RangeTable,
    RawVector,
    ScoreVector,
    evaluate_raw,
    normalize,
    normalize_frame,
    sample_landscape,
    sample_ranges,
)
from graphviewpoints.projection import CameraConfig, project_viewpoint

CONFIG = CameraConfig()
FRONT = np.array([0.0, 0.0, 1.0])


def _bundle(positions, edges, bundle_id="g1"):
    positions = np.asarray(positions, dtype=float)
    return GraphBundle(bundle_id, "energy", "S", Graph(len(positions), np.array(edges, dtype=np.int64).reshape(-1, 2)),
                       Layout3D.from_positions(positions))


def _tetrahedron():
    nodes = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    return _bundle(nodes, edges, "tetra")


def _random_bundle(seed, n=10, m=15):
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = [pairs[k] for k in sorted(rng.choice(len(pairs), size=m, replace=False))]
    return _bundle(rng.normal(size=(n, 3)), edges, f"r{seed}")


def _ranges(graph_id, lo, hi):
    frame = pd.DataFrame({
        cnst.RANGE_GRAPH_FIELD_NAME: graph_id,
        cnst.RANGE_MEASURE_FIELD_NAME: list(cnst.MEASURE_IDS),
        cnst.RANGE_MIN_FIELD_NAME: lo,
        cnst.RANGE_MAX_FIELD_NAME: hi,
        cnst.RANGE_SAMPLES_FIELD_NAME: 10,
    })
    return RangeTable(frame, "abc")


def _raw(graph_id, values):
    measures = {m: m2d.RawMeasure(m, float(v)) for m, v in zip(cnst.MEASURE_IDS, values)}
    return RawVector(graph_id, FRONT, measures)


def test_registry_order_and_polarity():
    assert tuple(MEASURE_REGISTRY) == cnst.MEASURE_IDS
    assert len(cnst.MEASURE_IDS) == 21
    assert all(cnst.POLARITY[m] == cnst.LOWER_BETTER for m in (cnst.NNO, cnst.ENO, cnst.NEO,
                                                              cnst.NNOA, cnst.ENOA, cnst.NEOA))
    assert cnst.POLARITY[cnst.ISO] == cnst.HIGHER_BETTER


def test_single_isolated_node():
    raw = evaluate_raw(_bundle([[0.0, 0.0, 0.0]], []), FRONT, CONFIG)
    assert raw[cnst.CR] == 0.0
    assert raw[cnst.AR] == 0.0
    assert raw[cnst.ISO] == 1.0
    for measure_id in (cnst.NNO, cnst.ENO, cnst.NEO, cnst.NNOA, cnst.ENOA, cnst.NEOA):
        assert raw[measure_id] == 0.0


def test_single_edge_broadside():
    raw = evaluate_raw(_bundle([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [(0, 1)]), FRONT, CONFIG)
    assert raw[cnst.CR] == 0.0
    assert raw[cnst.ENO] == 0.0
    assert raw[cnst.NEO] == 0.0


def test_raw_vector_matches_standalone_measures():
    bundle = _random_bundle(3)
    v = np.array([0.3, -0.4, math.sqrt(1 - 0.25)])
    raw = evaluate_raw(bundle, v, CONFIG, resolution=64)
    drawing = project_viewpoint(bundle, v, CONFIG)
    crossing_set = m2d.crossings(drawing)

    assert raw[cnst.CR] == m2d.measure_cr(crossing_set).value
    assert raw[cnst.CAR] == m2d.measure_car(crossing_set).value
    assert raw[cnst.ST] == m2d.measure_stress(drawing, bundle.graph).value
    assert raw[cnst.GR] == m2d.measure_gabriel(drawing, bundle.graph).value
    assert raw[cnst.ESO] == m2d.measure_symmetry(drawing, "rotational").value
    census = m3d.overlap_census(drawing, bundle.graph, 64)
    assert raw[cnst.ENOA] == census.en_area
    assert raw[cnst.ISO] == m3d.iso_score(v, m3d.pca_axes(bundle.layout)).value


def test_landscape_layout():
    landscape = sample_landscape(_tetrahedron(), 6, CONFIG, resolution=64)
    assert list(landscape.columns) == list(cnst.VIEW_FIELD_NAMES) + list(cnst.MEASURE_IDS)
    assert landscape.index.name == cnst.SAMPLE_INDEX_FIELD_NAME
    assert len(landscape) == 6


def test_ranges_are_landscape_extremes():
    bundle = _random_bundle(5)
    landscape = sample_landscape(bundle, 2, CONFIG, resolution=64)
    ranges = sample_ranges(bundle, 2, CONFIG, resolution=64)
    assert len(ranges) == 21
    for measure_id in cnst.MEASURE_IDS:
        lo, hi = ranges.bounds(bundle.id, measure_id)
        assert lo == landscape[measure_id].min()
        assert hi == landscape[measure_id].max()


def test_landscape_scores_reach_both_ends():
    bundle = _random_bundle(6)
    landscape = sample_landscape(bundle, 12, CONFIG, resolution=64)
    ranges = RangeTable.from_landscape(bundle.id, landscape)
    scores = normalize_frame(landscape, ranges, bundle.id)
    for measure_id in cnst.MEASURE_IDS:
        lo, hi = ranges.bounds(bundle.id, measure_id)
        column = scores[measure_id]
        if hi - lo < cnst.DEGENERATE_RANGE_EPS:
            assert (column == 1.0).all()
        else:
            assert column.min() == 0.0
            assert column.max() == 1.0


def test_tetrahedron_iso_is_constant():
    ranges = sample_ranges(_tetrahedron(), 40, CONFIG, resolution=64)
    lo, hi = ranges.bounds("tetra", cnst.ISO)
    assert lo == hi == pytest.approx(1.0)


def test_sample_ranges_needs_two_viewpoints():
    with pytest.raises(DomainException):
        sample_ranges(_tetrahedron(), 1, CONFIG)


def test_parallel_sampling_keeps_order():
    bundle = _random_bundle(7)
    serial = sample_landscape(bundle, 8, CONFIG, resolution=64, workers=1)
    parallel = sample_landscape(bundle, 8, CONFIG, resolution=64, workers=2)
    pd.testing.assert_frame_equal(serial, parallel)


def test_normalize_polarity():
    ranges = _ranges("g1", 0.0, 10.0)
    low = normalize(_raw("g1", np.zeros(21)), ranges)
    high = normalize(_raw("g1", np.full(21, 10.0)), ranges)
    for measure_id in cnst.MEASURE_IDS:
        if cnst.POLARITY[measure_id] == cnst.LOWER_BETTER:
            assert low[measure_id] == 1.0 and high[measure_id] == 0.0
        else:
            assert low[measure_id] == 0.0 and high[measure_id] == 1.0
    assert low.range_table_id == ranges.table_id


def test_normalize_clamps_outside_range():
    ranges = _ranges("g1", 2.0, 4.0)
    scores = normalize(_raw("g1", np.full(21, 100.0)), ranges)
    assert scores[cnst.ISO] == 1.0
    assert scores[cnst.CR] == 0.0
    scores = normalize(_raw("g1", np.full(21, 3.0)), ranges)
    assert scores[cnst.ISO] == pytest.approx(0.5)


def test_normalize_degenerate_range_is_best():
    scores = normalize(_raw("g1", np.full(21, 7.0)), _ranges("g1", 3.0, 3.0))
    assert all(scores[m] == 1.0 for m in cnst.MEASURE_IDS)


def test_normalize_missing_range_names_pair():
    with pytest.raises(MissingRangeException, match="'g2'"):
        normalize(_raw("g2", np.zeros(21)), _ranges("g1", 0.0, 1.0))


def test_normalize_frame_per_graph():
    ranges = RangeTable.concat([_ranges("a", 0.0, 1.0), _ranges("b", 0.0, 2.0)])
    frame = pd.DataFrame(np.full((2, 21), 1.0), columns=list(cnst.MEASURE_IDS))
    frame[cnst.GRAPH_FIELD_NAME] = ["a", "b"]
    scores = normalize_frame(frame, ranges)
    assert scores.loc[0, cnst.ISO] == 1.0
    assert scores.loc[1, cnst.ISO] == pytest.approx(0.5)
    assert scores.loc[1, cnst.CR] == pytest.approx(0.5)


def test_range_table_rejects_inverted_rows():
    with pytest.raises(DomainException):
        _ranges("g1", 2.0, 1.0)


def test_range_table_csv_keeps_provenance(tmp_path):
    table = _ranges("g1", 0.0, 1.0)
    filename = str(tmp_path / "ranges.csv")
    table.to_csv(filename)
    with open(filename, encoding="utf-8") as f:
        assert f.readline().strip() == f"# graphviewpoints registry={cnst.REGISTRY_VERSION} config=abc"
    loaded = RangeTable.from_csv(filename)
    assert loaded.config_hash == "abc"
    assert loaded.table_id == table.table_id


def test_score_vector_validation():
    with pytest.raises(DomainException):
        ScoreVector.from_array("g1", np.full(21, 1.5))
    with pytest.raises(DomainException):
        ScoreVector.from_array("g1", np.zeros(20))
    vector = ScoreVector.from_array("g1", np.linspace(0, 1, 21))
    assert vector[cnst.ISO] == 1.0
    np.testing.assert_allclose(vector.as_array(), np.linspace(0, 1, 21))
