import numpy as np


def transform_coords(points, ratio, orthogonal, offset):
    """Apply x -> ratio * O x + offset to every row of points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return ratio * points @ np.asarray(orthogonal, dtype=float).T + np.asarray(offset, dtype=float)


def transform_box(lo, hi, ratio, orthogonal, offset):
    """Axis-aligned bounding box of the image of the box [lo, hi] under a similarity."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    center = (lo + hi) / 2
    half = (hi - lo) / 2
    new_center = transform_coords(center, ratio, orthogonal, offset)[0]
    new_half = ratio * np.abs(np.asarray(orthogonal, dtype=float)) @ half
    return new_center - new_half, new_center + new_half


def scale_coords(points, factor, shift=None):
    """Divide coordinates by factor, then subtract shift (used for measure push-forwards)."""
    points = np.asarray(points, dtype=float) / factor
    if shift is not None:
        points = points - np.asarray(shift, dtype=float)
    return points
