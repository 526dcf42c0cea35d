"""Vectorised 2D segment helpers shared by the measure modules."""
import numpy as np


def cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """z component of the cross product of stacked 2D vectors."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def non_adjacent_pairs(edges: np.ndarray) -> np.ndarray:
    """
    All unordered pairs of edges that share no endpoint.

    Args:
        edges: (m, 2) node indices.

    Returns:
        (k, 2) edge index pairs with first < second, in lexicographic order.
    """
    m = len(edges)
    if m < 2:
        return np.zeros((0, 2), dtype=np.int64)
    a, b = np.triu_indices(m, 1)
    ea, eb = edges[a], edges[b]
    shared = (ea[:, :1] == eb).any(axis=1) | (ea[:, 1:] == eb).any(axis=1)
    return np.column_stack([a[~shared], b[~shared]])


def segment_intersections(a0: np.ndarray, a1: np.ndarray, b0: np.ndarray, b1: np.ndarray, eps: float):
    """
    Intersections of open segments a0-a1 and b0-b1, row by row.

    Proper crossings need both endpoints of each segment strictly more than
    eps away from the other segment's supporting line, on opposite sides.
    Collinear segments whose overlap is longer than eps intersect at the
    overlap midpoint with angle 0.

    Returns:
        (hit, points, angles): boolean mask (k,), points (k, 2) and acute
        crossing angles in degrees (k,). Rows without a hit carry nan.
    """
    da = a1 - a0
    db = b1 - b0
    len_a = np.hypot(da[:, 0], da[:, 1])
    len_b = np.hypot(db[:, 0], db[:, 1])
    usable = (len_a > eps) & (len_b > eps)
    safe_a = np.where(usable, len_a, 1.0)
    safe_b = np.where(usable, len_b, 1.0)

    # Signed distances of each segment's endpoints from the other's line
    sb0 = cross2(da, b0 - a0) / safe_a
    sb1 = cross2(da, b1 - a0) / safe_a
    sa0 = cross2(db, a0 - b0) / safe_b
    sa1 = cross2(db, a1 - b0) / safe_b

    straddle_b = ((sb0 > eps) & (sb1 < -eps)) | ((sb0 < -eps) & (sb1 > eps))
    straddle_a = ((sa0 > eps) & (sa1 < -eps)) | ((sa0 < -eps) & (sa1 > eps))
    proper = usable & straddle_a & straddle_b

    points = np.full(a0.shape, np.nan)
    angles = np.full(len(a0), np.nan)

    with np.errstate(invalid="ignore", divide="ignore"):
        t = sa0 / (sa0 - sa1)
    points[proper] = a0[proper] + t[proper, None] * da[proper]
    cos_angle = np.abs((da * db).sum(axis=1)) / (safe_a * safe_b)
    angles[proper] = np.degrees(np.arccos(np.clip(cos_angle[proper], 0.0, 1.0)))

    collinear = usable & (np.abs(sb0) <= eps) & (np.abs(sb1) <= eps) & (np.abs(sa0) <= eps) & (np.abs(sa1) <= eps)
    if collinear.any():
        unit = da[collinear] / safe_a[collinear, None]
        u0 = ((b0[collinear] - a0[collinear]) * unit).sum(axis=1)
        u1 = ((b1[collinear] - a0[collinear]) * unit).sum(axis=1)
        lo = np.maximum(0.0, np.minimum(u0, u1))
        hi = np.minimum(len_a[collinear], np.maximum(u0, u1))
        overlapping = hi - lo > eps
        idx = np.flatnonzero(collinear)[overlapping]
        points[idx] = a0[idx] + unit[overlapping] * ((lo + hi)[overlapping] / 2.0)[:, None]
        angles[idx] = 0.0
        collinear[np.flatnonzero(collinear)[~overlapping]] = False

    return proper | collinear, points, angles


def closest_parameters(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Parameter t in [0, 1] of the point on segment a-b closest to each point."""
    d = b - a
    length_sq = (d * d).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((points - a) * d).sum(axis=-1) / length_sq
    return np.clip(np.where(length_sq > 0, t, 0.0), 0.0, 1.0)


def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t = closest_parameters(points, a, b)
    nearest = a + t[..., None] * (b - a)
    return np.linalg.norm(points - nearest, axis=-1)


def undirected_angle_difference(theta_a: np.ndarray, theta_b: np.ndarray) -> np.ndarray:
    """Difference in degrees between line directions, folded into [0, 90]."""
    diff = np.mod(theta_a - theta_b, 180.0)
    return np.minimum(diff, 180.0 - diff)
