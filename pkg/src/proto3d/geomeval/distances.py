"""Nearest-neighbour distances between clouds: Chamfer and Hausdorff."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .registration import EmptyCloud, _points


def nn_distances(a, b) -> tuple[np.ndarray, np.ndarray]:
    """For each point of ``a``: (index of nearest point in ``b``, Euclidean distance).

    The k-d tree only selects the neighbour; the distance is recomputed with the
    same arithmetic a brute-force scan uses, so both routes agree bit for bit.
    """
    pa, pb = _points(a), _points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptyCloud("distance between empty clouds is undefined")
    _, idx = cKDTree(pb).query(pa)
    return idx, euclidean(pa, pb[idx])


def euclidean(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = p - q
    return np.sqrt(d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2])


def chamfer(a, b, *, squared: bool = False) -> float:
    """Half the sum of the two directed mean nearest-neighbour distances.

    ``squared=True`` averages squared distances instead.
    """
    _, dab = nn_distances(a, b)
    _, dba = nn_distances(b, a)
    if squared:
        dab, dba = dab * dab, dba * dba
    return 0.5 * (float(np.mean(dab)) + float(np.mean(dba)))


def hausdorff(a, b) -> float:
    _, dab = nn_distances(a, b)
    _, dba = nn_distances(b, a)
    return max(float(dab.max()), float(dba.max()))
