import math

import numpy as np
import pytest

from graphviewpoints import constants as cnst
from graphviewpoints.dataset import Graph
from graphviewpoints.exceptions import DomainException
from graphviewpoints.measures2d import (
    RawMeasure,
    crossings,
    measure_angular_resolution,
    measure_area_aspect,
    measure_car,
    measure_concentration,
    measure_cr,
    measure_edge_length_deviation,
    measure_edge_orthogonality,
    measure_gabriel,
    measure_node_orthogonality,
    measure_stress,
    measure_symmetry,
)
from graphviewpoints.projection import ProjectedDrawing


def _drawing(centers, edges=(), viewport=(2.0, 2.0)):
    return ProjectedDrawing(np.asarray(centers, dtype=float), np.array(edges, dtype=np.int64).reshape(-1, 2),
                            viewport=viewport)


def _graph(n, edges):
    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def _brute_force_crossings(points, edges):
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    count = 0
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            a, b = edges[i]
            c, d = edges[j]
            if len({a, b, c, d}) < 4:
                continue
            p, q, r, s = points[a], points[b], points[c], points[d]
            if orient(p, q, r) * orient(p, q, s) < 0 and orient(r, s, p) * orient(r, s, q) < 0:
                count += 1
    return count


def test_square_diagonals_cross_once():
    drawing = _drawing([[0, 0], [1, 0], [1, 1], [0, 1]], [(0, 2), (1, 3)])
    result = crossings(drawing)
    assert len(result) == 1
    np.testing.assert_allclose(result.points[0], [0.5, 0.5])
    assert result.angles[0] == pytest.approx(90.0)
    assert measure_cr(result).value == 1.0
    assert measure_car(result).value == pytest.approx(1.0)


def test_parallel_segments_do_not_cross():
    drawing = _drawing([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 1), (2, 3)])
    assert len(crossings(drawing)) == 0
    assert measure_car(crossings(drawing)).value == 1.0


def test_adjacent_edges_never_cross():
    drawing = _drawing([[0, 0], [1, 0], [2, 0]], [(0, 1), (1, 2)])
    assert measure_cr(crossings(drawing)).value == 0.0


def test_collinear_overlap_counts_with_zero_angle():
    drawing = _drawing([[0, 0], [2, 0], [1, 0], [3, 0]], [(0, 1), (2, 3)])
    result = crossings(drawing)
    assert len(result) == 1
    assert result.angles[0] == 0.0
    np.testing.assert_allclose(result.points[0], [1.5, 0.0])
    assert measure_car(result).value == 0.0


def test_crossings_match_brute_force():
    rng = np.random.default_rng(8)
    for _ in range(200):
        n = int(rng.integers(4, 51))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        m = int(rng.integers(1, min(100, len(pairs)) + 1))
        edges = [pairs[k] for k in rng.choice(len(pairs), size=m, replace=False)]
        points = rng.uniform(-1, 1, size=(n, 2))
        drawing = _drawing(points, edges)
        assert len(crossings(drawing)) == _brute_force_crossings(points, edges)


def test_car_for_45_degree_crossing():
    drawing = _drawing([[0, 0], [2, 0], [0, -1], [2, 1]], [(0, 1), (2, 3)])
    assert measure_car(crossings(drawing)).value == pytest.approx(0.5)


def test_stress_collinear_path():
    drawing = _drawing([[0, 0], [2, 0], [4, 0]], [(0, 1), (1, 2)])
    assert measure_stress(drawing, _graph(3, [(0, 1), (1, 2)])).value == pytest.approx(0.0, abs=1e-18)


def test_stress_exact_triangle():
    h = math.sqrt(3.0) / 2.0
    drawing = _drawing([[0, 0], [1, 0], [0.5, h]], [(0, 1), (1, 2), (0, 2)])
    assert measure_stress(drawing, _graph(3, [(0, 1), (1, 2), (0, 2)])).value < 1e-18


def test_stress_scale_beats_grid_search():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = 8
        edges = [(i, i + 1) for i in range(n - 1)] + [(0, 4), (2, 6)]
        points = rng.normal(size=(n, 2))
        graph = _graph(n, edges)
        value = measure_stress(_drawing(points, edges), graph).value

        d = graph.shortest_path_lengths[np.triu_indices(n, 1)]
        diff = points[:, None, :] - points[None, :, :]
        e = np.linalg.norm(diff, axis=-1)[np.triu_indices(n, 1)]
        w = d ** -2.0
        grid = np.logspace(-4, 4, 10_000)
        scanned = ((w * (grid[:, None] * e - d) ** 2).sum(axis=1) / len(d)).min()
        assert value <= scanned * (1 + 1e-6)


def test_stress_skips_disconnected_pairs():
    drawing = _drawing([[0, 0], [1, 0], [5, 5]], [(0, 1)])
    assert measure_stress(drawing, _graph(3, [(0, 1)])).value == pytest.approx(0.0, abs=1e-18)


def test_area_aspect_full_viewport():
    area, aspect = measure_area_aspect(_drawing([[-1, -1], [1, 1]]))
    assert area.value == pytest.approx(1.0)
    assert aspect.value == pytest.approx(1.0)


def test_aspect_collinear_horizontal():
    area, aspect = measure_area_aspect(_drawing([[-1, 0], [0, 0], [1, 0]]))
    assert area.value == 0.0
    assert aspect.value == 0.0


def test_area_random_cloud():
    rng = np.random.default_rng(2)
    points = rng.uniform(-1, 1, size=(30, 2))
    area, aspect = measure_area_aspect(_drawing(points))
    width, height = np.ptp(points, axis=0)
    assert area.value == pytest.approx(width * height / 4.0)
    assert aspect.value == pytest.approx(min(width, height) / max(width, height))


def test_concentration_one_cell():
    assert measure_concentration(_drawing([[0.3, 0.3]] * 5)).value == pytest.approx(1.0)


def test_concentration_one_node_per_cell():
    assert measure_concentration(_drawing([[0, 0], [1, 0], [0, 1], [1, 1]])).value == pytest.approx(0.0)


def test_concentration_single_node():
    assert measure_concentration(_drawing([[0, 0]])).value == 0.0


def test_node_orthogonality_full_lattice():
    assert measure_node_orthogonality(_drawing([[0, 0], [1, 0], [0, 1], [1, 1]])).value == pytest.approx(1.0)


def test_node_orthogonality_sparse():
    # Unit pitch from the close pairs; the box spans 12 lattice points
    value = measure_node_orthogonality(_drawing([[0, 0], [1, 0], [10, 0], [11, 0]])).value
    assert value == pytest.approx(4.0 / 12.0)


def test_node_orthogonality_lattice_covers_box():
    # Pitch 1 over a 2.45 x 1 box needs a 4 x 2 lattice
    value = measure_node_orthogonality(_drawing([[0, 0], [1, 0], [2, 0], [2.45, 1]])).value
    assert value == pytest.approx(0.5)


def test_gabriel_violation():
    drawing = _drawing([[0, 0], [2, 0], [1, 0.5]], [(0, 1)])
    assert measure_gabriel(drawing, _graph(3, [(0, 1)])).value == pytest.approx(0.0)


def test_gabriel_clear():
    drawing = _drawing([[0, 0], [2, 0], [1, 2]], [(0, 1)])
    assert measure_gabriel(drawing, _graph(3, [(0, 1)])).value == pytest.approx(1.0)


def test_gabriel_boundary_is_outside():
    drawing = _drawing([[0, 0], [2, 0], [1, 1]], [(0, 1)])
    assert measure_gabriel(drawing, _graph(3, [(0, 1)])).value == pytest.approx(1.0)


def test_gabriel_small_graph():
    assert measure_gabriel(_drawing([[0, 0], [1, 0]], [(0, 1)]), _graph(2, [(0, 1)])).value == 1.0


def test_angular_resolution_perfect_cross():
    points = [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]]
    edges = [(0, 1), (0, 2), (0, 3), (0, 4)]
    assert measure_angular_resolution(_drawing(points, edges), _graph(5, edges)).value == pytest.approx(1.0)


def test_angular_resolution_right_angle_path():
    points = [[1, 0], [0, 0], [0, 1]]
    edges = [(0, 1), (1, 2)]
    assert measure_angular_resolution(_drawing(points, edges), _graph(3, edges)).value == pytest.approx(0.5)


def test_angular_resolution_coincident_directions():
    points = [[0, 0], [1, 0], [2, 0]]
    edges = [(0, 1), (0, 2)]
    assert measure_angular_resolution(_drawing(points, edges), _graph(3, edges)).value == pytest.approx(0.0)


def test_edge_orthogonality():
    axis_parallel = _drawing([[0, 0], [1, 0], [1, 1]], [(0, 1), (1, 2)])
    assert measure_edge_orthogonality(axis_parallel).value == pytest.approx(1.0)
    diagonal = _drawing([[0, 0], [1, 1]], [(0, 1)])
    assert measure_edge_orthogonality(diagonal).value == pytest.approx(0.0)
    assert measure_edge_orthogonality(_drawing([[0, 0]])).value == 1.0


def test_edge_length_deviation():
    equal = _drawing([[0, 0], [1, 0], [1, 1]], [(0, 1), (1, 2)])
    assert measure_edge_length_deviation(equal).value == pytest.approx(0.0)
    mixed = _drawing([[0, 0], [1, 0], [0, 5], [3, 5]], [(0, 1), (2, 3)])
    assert measure_edge_length_deviation(mixed).value == pytest.approx(0.5)
    assert measure_edge_length_deviation(_drawing([[0, 0]])).value == 0.0


def test_reflective_symmetry_mirror_pair():
    drawing = _drawing([[-0.5, -0.2], [-0.2, 0.3], [0.5, -0.2], [0.2, 0.3]], [(0, 1), (2, 3)])
    assert measure_symmetry(drawing, "reflective").value == pytest.approx(1.0)


def test_symmetry_dissimilar_lengths():
    drawing = _drawing([[-0.5, 0.0], [-0.49, 0.0], [0.0, 0.5], [0.0, -0.5]], [(0, 1), (2, 3)])
    assert measure_symmetry(drawing, "reflective").value < 1e-6


def test_rotational_symmetry_square():
    drawing = _drawing([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]], [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert measure_symmetry(drawing, "rotational").value == pytest.approx(1.0)


def test_translational_symmetry_parallel_copies():
    drawing = _drawing([[-0.5, 0.0], [-0.1, 0.2], [0.1, 0.0], [0.5, 0.2]], [(0, 1), (2, 3)])
    assert measure_symmetry(drawing, "translational").value == pytest.approx(1.0)


def test_symmetry_needs_two_edges():
    drawing = _drawing([[0, 0], [1, 0]], [(0, 1)])
    for kind in ("reflective", "rotational", "translational"):
        assert measure_symmetry(drawing, kind).value == 0.0


def test_symmetry_unknown_kind():
    with pytest.raises(DomainException):
        measure_symmetry(_drawing([[0, 0], [1, 0]], [(0, 1)]), "glide")


def test_raw_measure_polarity_checked():
    assert RawMeasure(cnst.CR, 3).polarity == cnst.LOWER_BETTER
    with pytest.raises(DomainException):
        RawMeasure(cnst.CR, 3.0, cnst.HIGHER_BETTER)
    with pytest.raises(DomainException):
        RawMeasure("XX", 1.0)


def _similarity(rng):
    angle = rng.uniform(0, 2 * math.pi)
    scale = rng.uniform(0.5, 2.0)
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    return scale * rotation, rng.uniform(-1, 1, 2)


def test_measures_invariant_under_rotation_and_scale():
    rng = np.random.default_rng(30)
    for _ in range(50):
        n = 12
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        edges = [pairs[k] for k in rng.choice(len(pairs), size=18, replace=False)]
        graph = _graph(n, edges)
        drawing = _drawing(rng.uniform(-1, 1, size=(n, 2)), edges)
        moved = drawing.transformed(*_similarity(rng))

        assert len(crossings(moved)) == len(crossings(drawing))
        assert measure_car(crossings(moved)).value == pytest.approx(measure_car(crossings(drawing)).value, abs=1e-6)
        assert measure_gabriel(moved, graph).value == pytest.approx(measure_gabriel(drawing, graph).value, abs=1e-6)
        assert measure_angular_resolution(moved, graph).value == pytest.approx(
            measure_angular_resolution(drawing, graph).value, abs=1e-6)
        assert measure_edge_length_deviation(moved).value == pytest.approx(
            measure_edge_length_deviation(drawing).value, abs=1e-6)


def test_symmetry_invariant_under_rotation_and_scale():
    rng = np.random.default_rng(31)
    for _ in range(50):
        drawing = _drawing(rng.uniform(-0.5, 0.5, size=(4, 2)), [(0, 1), (2, 3)])
        moved = drawing.transformed(*_similarity(rng))
        for kind in ("reflective", "rotational", "translational"):
            assert measure_symmetry(moved, kind).value == pytest.approx(measure_symmetry(drawing, kind).value,
                                                                        abs=1e-6)


def test_axis_bound_measures_invariant_under_scale():
    # CON and EO are tied to the screen axes, so only scale and shift leave them unchanged
    rng = np.random.default_rng(32)
    for _ in range(50):
        n = 10
        edges = [(i, i + 1) for i in range(n - 1)]
        graph = _graph(n, edges)
        drawing = _drawing(rng.uniform(-1, 1, size=(n, 2)), edges)
        moved = drawing.transformed(rng.uniform(0.1, 10.0) * np.eye(2), rng.uniform(-1, 1, 2))
        assert measure_concentration(moved).value == pytest.approx(measure_concentration(drawing).value, abs=1e-6)
        assert measure_edge_orthogonality(moved).value == pytest.approx(
            measure_edge_orthogonality(drawing).value, abs=1e-6)
        assert measure_stress(moved, graph).value == pytest.approx(measure_stress(drawing, graph).value,
                                                                   rel=1e-9, abs=1e-12)
