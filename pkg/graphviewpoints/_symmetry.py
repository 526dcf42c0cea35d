"""
Hough-style accumulator for edge-based symmetry.

Every unordered pair of edges proposes the transform that maps one
centreline onto the other. Votes are weighted by how similar the two edges
are and summed per quantised transform; the heaviest bin is the best single
symmetry of the drawing. Bins are centred on multiples of their pitch.
"""
from dataclasses import dataclass

import numpy as np

from . import constants as cnst
from ._geometry import undirected_angle_difference


@dataclass(frozen=True)
class SymmetryConfig:
    """
    Accumulator parameters.

    Offsets and pitches marked as fractions are relative to the viewport
    diagonal; length_sigma is relative to the mean edge length.
    """

    angle_pitch_deg: float = cnst.DEFAULT_SYMMETRY_ANGLE_PITCH_DEG
    axis_offset_pitch: float = cnst.DEFAULT_SYMMETRY_AXIS_OFFSET_PITCH
    center_pitch: float = cnst.DEFAULT_SYMMETRY_CENTER_PITCH
    translation_pitch: float = cnst.DEFAULT_SYMMETRY_TRANSLATION_PITCH
    length_sigma: float = cnst.DEFAULT_SYMMETRY_LENGTH_SIGMA


def symmetry_votes(endpoints: np.ndarray, diagonal: float, kind: str, config: SymmetryConfig) -> float:
    """
    Weight of the heaviest transform bin.

    Args:
        endpoints:  (m, 2, 2) centreline endpoints.
        diagonal:   Viewport diagonal, the unit for positional bin pitches.
        kind:       "reflective", "rotational" or "translational".
        config:     Accumulator parameters.

    Returns:
        Summed vote weight of the heaviest bin (0 if nothing voted).
    """
    p0, p1 = endpoints[:, 0], endpoints[:, 1]
    vec = p1 - p0
    length = np.hypot(vec[:, 0], vec[:, 1])
    usable = np.flatnonzero(length > 0)
    if len(usable) < 2:
        return 0.0

    mean_length = length[usable].mean()
    sigma = config.length_sigma * mean_length
    i, j = np.triu_indices(len(usable), 1)
    i, j = usable[i], usable[j]

    mid = (p0 + p1) / 2.0
    heading = np.degrees(np.arctan2(vec[:, 1], vec[:, 0]))
    similarity = np.exp(-((length[i] - length[j]) / sigma) ** 2)

    if kind == "reflective":
        keys, weights = _reflective_votes(mid, heading, i, j, similarity, diagonal, config)
    elif kind == "rotational":
        keys, weights = _rotational_votes(mid, heading, i, j, similarity, diagonal, config)
    else:
        keys, weights = _translational_votes(mid, heading, i, j, similarity, diagonal, config)

    if not len(keys):
        return 0.0
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    return float(np.bincount(inverse.ravel(), weights=weights).max())


def _reflective_votes(mid, heading, i, j, similarity, diagonal, config):
    delta = mid[j] - mid[i]
    dist = np.hypot(delta[:, 0], delta[:, 1])
    ok = dist > 0
    i, j, delta, dist, similarity = i[ok], j[ok], delta[ok], dist[ok], similarity[ok]

    # The mirror axis is the perpendicular bisector of the two midpoints
    normal = delta / dist[:, None]
    axis_angle = np.mod(np.degrees(np.arctan2(normal[:, 1], normal[:, 0])), 360.0)
    offset = (normal * (mid[i] + mid[j]) / 2.0).sum(axis=1)
    flip = axis_angle >= 180.0
    axis_angle = axis_angle - 180.0 * flip
    offset = np.where(flip, -offset, offset)

    # The mirrored direction of edge i must agree with edge j
    mirrored = 2.0 * (axis_angle + 90.0) - heading[i]
    mismatch = undirected_angle_difference(mirrored, heading[j])
    weights = similarity * np.exp(-(mismatch / config.angle_pitch_deg) ** 2)

    keys = np.column_stack([
        np.rint(axis_angle / config.angle_pitch_deg),
        np.rint(offset / (config.axis_offset_pitch * diagonal)),
    ]).astype(np.int64)
    return keys, weights


def _rotational_votes(mid, heading, i, j, similarity, diagonal, config):
    keys, weights = [], []
    # An undirected edge maps onto another in two ways, half a turn apart
    for extra in (0.0, 180.0):
        turn = np.mod(heading[j] - heading[i] + extra, 360.0)
        # Canonical angle in (0, 180]; a rotation and its inverse share the centre
        angle = np.where(turn > 180.0, 360.0 - turn, turn)
        ok = angle >= config.angle_pitch_deg / 2.0
        if not ok.any():
            continue

        rad = np.radians(turn[ok])
        cos, sin = np.cos(rad), np.sin(rad)
        a, b = mid[i[ok]], mid[j[ok]]
        # Solve (I - R) c = b - R a
        ra = np.column_stack([cos * a[:, 0] - sin * a[:, 1], sin * a[:, 0] + cos * a[:, 1]])
        rhs = b - ra
        det = 2.0 * (1.0 - cos)
        cx = ((1.0 - cos) * rhs[:, 0] - sin * rhs[:, 1]) / det
        cy = (sin * rhs[:, 0] + (1.0 - cos) * rhs[:, 1]) / det

        pitch = config.center_pitch * diagonal
        keys.append(np.column_stack([
            np.rint(cx / pitch),
            np.rint(cy / pitch),
            np.rint(angle[ok] / config.angle_pitch_deg),
        ]).astype(np.int64))
        weights.append(similarity[ok])

    if not keys:
        return np.zeros((0, 3), dtype=np.int64), np.zeros(0)
    return np.concatenate(keys), np.concatenate(weights)


def _translational_votes(mid, heading, i, j, similarity, diagonal, config):
    shift = mid[j] - mid[i]
    ok = np.hypot(shift[:, 0], shift[:, 1]) > 0
    shift, i, j, similarity = shift[ok], i[ok], j[ok], similarity[ok]

    # A shift and its reverse describe the same symmetry
    negate = (shift[:, 0] < 0) | ((shift[:, 0] == 0) & (shift[:, 1] < 0))
    shift = np.where(negate[:, None], -shift, shift)

    mismatch = undirected_angle_difference(heading[i], heading[j])
    weights = similarity * np.exp(-(mismatch / config.angle_pitch_deg) ** 2)

    pitch = config.translation_pitch * diagonal
    keys = np.rint(shift / pitch).astype(np.int64)
    return keys, weights
