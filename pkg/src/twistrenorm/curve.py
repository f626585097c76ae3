"""Polyline curves through the Cantor set by iterated refinement.

One refinement step replaces ``g`` on ``[0, 1]`` by five pieces, in order:

    connector  g(0) -> psi_0(g(0))                on an interval of length a
    psi_0 o g  reparametrized                      on length theta
    connector  psi_0(g(1)) -> psi_1(g(0))          on length a
    psi_1 o g  reparametrized                      on length theta
    connector  psi_1(g(1)) -> g(1)                 on length a

with ``a = (1 - 2 theta) / 3``.  The copies are formed by mapping the
vertices only.  A mapped chord is then at most ``max ||D psi_i||`` times the
original chord, by the mean value inequality along the segment.  So the
Lipschitz bookkeeping holds exactly for the polylines themselves, and no
resampling is needed.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .config import THETA
from .errors import DegenerateParam, DomainEscape
from .ifs import EUCLIDEAN, psi_many
from .twistmap import OK

_CHUNK = 64


class PolylineCurve:
    """Piecewise linear curve with breakpoints ``params`` (``0 = t_0 < ... < t_m = 1``).

    ``lip`` is the Lipschitz constant in ``metric``, computed once on
    construction (instances are immutable).
    """

    __slots__ = ("params", "points", "metric", "lip")

    def __init__(self, params, points, metric=EUCLIDEAN):
        t = np.array(params, dtype=float)
        p = np.array(points, dtype=float)
        if t.ndim != 1 or p.shape != (len(t), 2):
            raise ValueError("params must be 1-d and points of shape (len(params), 2)")
        if len(t) < 2:
            raise ValueError("a curve needs at least two vertices")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ValueError("params and points must be finite")
        dt = np.diff(t)
        if np.any(dt == 0.0):
            k = int(np.flatnonzero(dt == 0.0)[0])
            raise DegenerateParam("consecutive parameters coincide", index=k, t=float(t[k]))
        if np.any(dt < 0.0) or t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("params must increase from 0 to 1")
        t.setflags(write=False)
        p.setflags(write=False)
        self.params, self.points, self.metric = t, p, metric
        self.lip = float(segment_slopes(t, p, metric).max())

    def __len__(self):
        return len(self.params)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, self.params, self.points[:, 0]),
                         np.interp(t, self.params, self.points[:, 1])], axis=-1)

    def __repr__(self):
        return f"PolylineCurve(vertices={len(self)}, lip={self.lip:.6g})"

    def with_metric(self, metric):
        return PolylineCurve(self.params, self.points, metric)


def segment_slopes(params, points, metric=EUCLIDEAN):
    """Chord length over parameter length for each segment."""
    return metric.norm(np.diff(points, axis=0)) / np.diff(params)


def lipschitz_constant(curve, metric=None):
    """Max over segments of ``|chord| / |parameter step|``.

    For a polyline this is the exact Lipschitz constant.
    """
    metric = curve.metric if metric is None else metric
    return float(segment_slopes(curve.params, curve.points, metric).max())


def diagonal_seed(region, segments=8, metric=EUCLIDEAN):
    """Diagonal of the base rectangle, uniformly subdivided."""
    a, b = region.diagonal()
    t = np.linspace(0.0, 1.0, segments + 1)
    t[-1] = 1.0
    return PolylineCurve(t, a[None, :] + t[:, None] * (b - a)[None, :], metric)


def piece_lengths(theta=THETA):
    a = (1.0 - 2.0 * theta) / 3.0
    return a, theta


def refine(curve, scal, m, theta=THETA):
    """One refinement step (see the module docstring).

    Endpoints are preserved exactly.  Raises :class:`DomainEscape` if a
    vertex image is undefined.
    """
    a, th = piece_lengths(theta)
    t, p = curve.params, curve.points
    p0, _ = psi_many(scal, m, 0, p)
    p1, st = psi_many(scal, m, 1, p)
    if np.any(st != OK):
        raise DomainEscape("psi_1 image of a curve vertex is undefined",
                           count=int(np.sum(st != OK)))
    params = np.concatenate([[0.0], a + th * t, 2 * a + th + th * t, [1.0]])
    points = np.concatenate([p[:1], p0, p1, p[-1:]])
    return PolylineCurve(params, points, curve.metric)


def piece_slopes(curve, prev_vertices, metric=None):
    """Lipschitz constants of the five pieces of a refined curve.

    ``prev_vertices`` is the vertex count of the curve that was refined.
    """
    metric = curve.metric if metric is None else metric
    V = prev_vertices
    sl = segment_slopes(curve.params, curve.points, metric)
    return {"connector_start": float(sl[0]),
            "psi0_copy": float(sl[1:V].max()),
            "connector_middle": float(sl[V]),
            "psi1_copy": float(sl[V + 1:2 * V].max()),
            "connector_end": float(sl[2 * V])}


def curve_sequence(seed, scal, m, K, theta=THETA):
    """``[g_0, g_1, ..., g_K]``, each the refinement of the previous one."""
    out = [seed]
    for _ in range(int(K)):
        out.append(refine(out[-1], scal, m, theta))
    return out


def sup_distance(c1, c2, metric=None):
    """``sup_t |c1(t) - c2(t)|``, attained on the union of the breakpoints."""
    metric = c1.metric if metric is None else metric
    t = np.union1d(c1.params, c2.params)
    return float(metric.dist(c1(t), c2(t)).max())


def sequence_summary(curves, metric=None):
    """Lipschitz constants ``L_k``, sup-distances ``d_k`` and their ratios."""
    metric = curves[0].metric if metric is None else metric
    L = [lipschitz_constant(c, metric) for c in curves]
    d = [sup_distance(a, b, metric) for a, b in zip(curves[:-1], curves[1:])]
    ratios = [d1 / d0 if d0 > 0 else 0.0 for d0, d1 in zip(d[:-1], d[1:])]
    return {"lipschitz": L, "sup_distance": d, "ratios": ratios,
            "vertices": [len(c) for c in curves]}


def point_segment_distances(pts, a, b, metric=EUCLIDEAN):
    """Distances from each point to each segment ``[a_j, b_j]``, shape ``(P, S)``."""
    sc = np.array([1.0, 1.0 / metric.kappa])
    P = np.asarray(pts, dtype=float).reshape(-1, 2) * sc
    A, B = np.asarray(a) * sc, np.asarray(b) * sc
    e = B - A
    ee = np.sum(e * e, axis=1)
    w = P[:, None, :] - A[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(ee > 0, np.sum(w * e[None], axis=2) / ee, 0.0)
    u = np.clip(u, 0.0, 1.0)
    diff = w - u[..., None] * e[None]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _min_distance_brute(P, A, B):
    out = np.empty(len(P))
    for i in range(0, len(P), _CHUNK):
        out[i:i + _CHUNK] = point_segment_distances(P[i:i + _CHUNK], A, B).min(axis=1)
    return out


def distances_to_polyline(pts, points, metric=EUCLIDEAN):
    """Distance from each point to the polyline through ``points``.

    Any segment of length ``l`` at distance ``r`` from a point has its
    midpoint within ``r + l / 2``.  The nearest vertex gives an upper bound
    for ``r``, so only segments passing a midpoint ball query need exact
    evaluation.  Segments are grouped by length so that the query radius
    stays tight.
    """
    sc = np.array([1.0, 1.0 / metric.kappa])
    P = np.asarray(pts, dtype=float).reshape(-1, 2) * sc
    V = np.asarray(points, dtype=float) * sc
    A, B = V[:-1], V[1:]
    if len(P) * len(A) <= 4 * _CHUNK * _CHUNK:
        return _min_distance_brute(P, A, B)
    best = cKDTree(V).query(P)[0]
    length = np.linalg.norm(B - A, axis=1)
    mid = 0.5 * (A + B)
    bucket = np.floor(np.log2(np.maximum(length, 1e-300))).astype(int)
    for k in np.unique(bucket):
        idx = np.flatnonzero(bucket == k)
        half = 0.5 * float(length[idx].max())
        hits = cKDTree(mid[idx]).query_ball_point(P, best + half * (1.0 + 1e-12) + 1e-15)
        counts = np.fromiter((len(h) for h in hits), dtype=int, count=len(P))
        if counts.sum() == 0:
            continue
        pi = np.repeat(np.arange(len(P)), counts)
        si = idx[np.concatenate([np.asarray(h, dtype=int) for h in hits if len(h)])]
        e = B[si] - A[si]
        ee = np.sum(e * e, axis=1)
        w = P[pi] - A[si]
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(ee > 0, np.sum(w * e, axis=1) / ee, 0.0)
        u = np.clip(u, 0.0, 1.0)
        dist = np.linalg.norm(w - u[:, None] * e, axis=1)
        np.minimum.at(best, pi, dist)
    return best


def hausdorff_to_cloud(curve, cloud, metric=None):
    """Max over cloud points of the distance to the polyline (one-sided)."""
    metric = curve.metric if metric is None else metric
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 2)
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    return float(distances_to_polyline(cloud, curve.points, metric).max())
