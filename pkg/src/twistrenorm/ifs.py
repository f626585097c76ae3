"""The renormalization microscope at the fixed point.

Everything here lives in the translated frame in which the map fixes the
origin and the tip sits at ``(c, 0)``.  The two rescalings are

    psi_0(x, y) = (lam x + p, mu y),      psi_1 = F o psi_0,

with ``p = c (1 - lam)`` so that the tip is the fixed point of ``psi_0``.
Words ``w = (w_1, ..., w_n)`` act by ``psi_w = psi_{w_1} o ... o psi_{w_n}``
(``w_1`` outermost) and are enumerated in lexicographic order, i.e. by the
integer whose binary digits, most significant first, are ``w_1 ... w_n``.

Contraction, diameters and distances are measured in a weighted Euclidean
metric ``|(u, v)| = sqrt(u**2 + (v / kappa)**2)`` whose weight is fitted to
make ``psi_1`` as contracting as possible on the base region; see
:func:`fit_metric`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import ConvexHull

from .config import TOL
from .errors import (AmbiguousFixedPoint, DomainEscape, NestingViolation,
                     NoSymmetricFixedPoint, NotPermutation, NotSingleCycle)
from .series import evaluate
from .twistmap import OK, ImplicitMap


# words ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicWord:
    """Address ``(w_1, ..., w_n)``; ``w_1`` is applied last (outermost)."""

    bits: tuple = ()
    max_length: int = field(default=24, compare=False, repr=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"word bits must be 0 or 1, got {self.bits}")
        if len(bits) > self.max_length:
            raise ValueError(f"word longer than {self.max_length}")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    @classmethod
    def parse(cls, text):
        return cls(tuple(int(ch) for ch in text.strip()))

    @classmethod
    def from_index(cls, k, n):
        """Word whose lexicographic position among length-``n`` words is ``k``."""
        return cls(tuple((k >> (n - 1 - i)) & 1 for i in range(n)))

    def index(self):
        k = 0
        for b in self.bits:
            k = 2 * k + b
        return k


def all_words(n):
    return [DyadicWord.from_index(k, n) for k in range(2 ** n)]


def odometer_index(k, n):
    """Lexicographic index of ``w + 1`` where the carry starts at ``w_1``."""
    bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
    for i in range(n):
        if bits[i] == 0:
            bits[i] = 1
            break
        bits[i] = 0
    out = 0
    for b in bits:
        out = 2 * out + b
    return out


# scalings and the translated frame -----------------------------------------------

@dataclass(frozen=True)
class Scalings:
    """``lam, mu`` of the rescalings, translation ``p`` and tip abscissa ``c``."""

    lam: float
    mu: float
    p: float
    c: float
    candidates: tuple = ()

    def __post_init__(self):
        if abs(self.c * (1.0 - self.lam) - self.p) > 4e-16 * max(1.0, abs(self.p)):
            raise ValueError("p must equal c (1 - lam)")

    @classmethod
    def from_tip(cls, lam, mu, c, candidates=()):
        return cls(float(lam), float(mu), float(c) * (1.0 - float(lam)), float(c),
                   tuple(candidates))

    @classmethod
    def from_translation(cls, lam, mu, p):
        return cls(float(lam), float(mu), float(p), float(p) / (1.0 - float(lam)))

    @property
    def tip(self):
        return np.array([self.c, 0.0])

    def to_dict(self):
        return {"lambda": self.lam, "mu": self.mu, "p": self.p, "c": self.c,
                "candidates": list(self.candidates)}


def derive_translation(gen, m=None, scan=241):
    """Scalings of the translated frame from the symmetric fixed point.

    Finds ``x*`` with ``F(x*, 0) = (x*, 0)`` for the untranslated map, i.e. a
    root of ``s(x, x)`` for which the implicit X-solve returns ``x*``
    itself.  The tip of the translated frame is ``c = -x*``.  Raises
    :class:`AmbiguousFixedPoint` when the diagonal is degenerate or several
    candidates pass, and :class:`NoSymmetricFixedPoint` when none does.
    """
    s = gen.s
    m = ImplicitMap(gen) if m is None else m
    lo, hi = s.domain
    diag = lambda x: evaluate(s, x, x)
    nodes = np.linspace(lo, hi, scan)
    vals = diag(nodes)
    if np.all(np.abs(vals) <= 1e-14 * max(1.0, s.sup_norm())):
        raise AmbiguousFixedPoint("every point of the symmetry line is fixed")
    roots = []
    for a, b, fa, fb in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(brentq(diag, a, b, xtol=1e-15))
    passing = []
    for r in roots:
        X, Y, st = m.forward_many(r, 0.0)
        if int(st) == OK and abs(float(X) - r) <= 1e-9 and abs(float(Y)) <= 1e-9:
            passing.append(r)
    if not passing:
        raise NoSymmetricFixedPoint("no fixed point on the symmetry line", candidates=roots)
    if len(passing) > 1:
        raise AmbiguousFixedPoint("several fixed points on the symmetry line",
                                  candidates=passing)
    c = -passing[0]
    shifted = m.with_shift(c)
    X, Y = shifted.forward(0.0, 0.0)
    if max(abs(X), abs(Y)) > 1e-9:
        raise NoSymmetricFixedPoint("translated map does not fix the origin", image=(X, Y))
    return Scalings.from_tip(gen.lam, gen.mu, c, roots)


def microscope(gen):
    """``(Scalings, translated map)`` for a solved generating system."""
    scal = derive_translation(gen)
    return scal, ImplicitMap(gen, shift=scal.c)


# rescalings ------------------------------------------------------------------------

def psi0_many(scal, pts):
    pts = np.asarray(pts, dtype=float)
    return np.stack([scal.lam * pts[..., 0] + scal.p, scal.mu * pts[..., 1]], axis=-1)


def psi_many(scal, m, i, pts):
    """``psi_i`` on an array of points; returns ``(images, status)``."""
    a = psi0_many(scal, pts)
    if i == 0:
        return a, np.zeros(a.shape[:-1], dtype=int)
    X, Y, st = m.forward_many(a[..., 0], a[..., 1])
    return np.stack([X, Y], axis=-1), st


def psi(scal, m, i, pt):
    """``psi_0(pt)`` or ``psi_1(pt) = F(psi_0(pt))`` for one point."""
    if i == 0:
        return tuple(psi0_many(scal, pt))
    return m.forward(*psi0_many(scal, pt))


def word_image(scal, m, w, pt):
    """``psi_w(pt)``; raises :class:`DomainEscape` naming the failing depth."""
    bits = w.bits if isinstance(w, DyadicWord) else tuple(w)
    q = np.asarray(pt, dtype=float)
    n = len(bits)
    for depth, b in enumerate(reversed(bits)):
        q, st = psi_many(scal, m, b, q)
        if int(st) != OK:
            raise DomainEscape("word image left the domain of the map",
                               depth=n - depth, word="".join(map(str, bits)))
    return tuple(q)


def level_images(scal, m, n, pts):
    """Images of ``pts`` under every word of length ``n``.

    Returns an array of shape ``(2**n, len(pts), 2)`` in lexicographic word
    order.  Built by ``psi_w = psi_{w_1} o psi_rest``, one level at a time.
    """
    cur = np.asarray(pts, dtype=float)[None, :, :]
    for level in range(1, n + 1):
        a, _ = psi_many(scal, m, 0, cur)
        b, st = psi_many(scal, m, 1, cur)
        if np.any(st != OK):
            raise DomainEscape("word image left the domain of the map", depth=level)
        cur = np.concatenate([a, b], axis=0)
    return cur


def cantor_cloud(scal, m, n):
    """``[(word, point)]`` for the ``2**n`` points ``psi_w(tip)``."""
    pts = level_images(scal, m, n, scal.tip[None, :])[:, 0, :]
    return [(DyadicWord.from_index(k, n), pts[k]) for k in range(2 ** n)]


def cloud_points(scal, m, n):
    """Array of the level-``n`` Cantor points (lexicographic order)."""
    return level_images(scal, m, n, scal.tip[None, :])[:, 0, :]


# metric -------------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedMetric:
    """``|(u, v)| = sqrt(u**2 + (v / kappa)**2)``; ``kappa = 1`` is Euclidean."""

    kappa: float = 1.0

    def _scale(self, v):
        v = np.asarray(v, dtype=float)
        return np.stack([v[..., 0], v[..., 1] / self.kappa], axis=-1)

    def norm(self, v):
        return np.linalg.norm(self._scale(v), axis=-1)

    def dist(self, a, b):
        return self.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))

    def op_norm(self, A):
        """Induced operator norm of (a stack of) 2x2 matrices."""
        A = np.asarray(A, dtype=float)
        K = np.diag([1.0, self.kappa])
        Ki = np.diag([1.0, 1.0 / self.kappa])
        return np.linalg.norm(Ki @ A @ K, 2, axis=(-2, -1))

    def diameter(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) > 3:
            try:
                pts = pts[ConvexHull(pts, qhull_options="QbB").vertices]
            except Exception:
                pass
        q = self._scale(pts)
        diff = q[:, None, :] - q[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())


EUCLIDEAN = WeightedMetric(1.0)


def psi1_derivatives(scal, m, pts):
    """``D psi_1 = DF(psi_0 p) diag(lam, mu)`` at each sample point."""
    a = psi0_many(scal, pts)
    J, st = m.differential_many(a[..., 0], a[..., 1])
    if np.any(st != OK):
        raise DomainEscape("psi_0 image of the sample leaves the map's domain")
    return J @ np.diag([scal.lam, scal.mu])


def fit_metric(scal, m, sample, bounds=(0.05, 50.0)):
    """Weight ``kappa`` minimizing the sampled sup of ``||D psi_1||``."""
    A = psi1_derivatives(scal, m, sample)
    f = lambda t: float(WeightedMetric(np.exp(t)).op_norm(A).max())
    res = minimize_scalar(f, bounds=np.log(bounds), method="bounded",
                          options={"xatol": 1e-6})
    return WeightedMetric(float(np.exp(res.x)))


def contraction(scal, m, sample, metric):
    """Sampled ``max ||D psi_0||`` and ``max ||D psi_1||`` in ``metric``.

    ``D psi_0`` is diagonal, so its norm is ``max(|lam|, mu)`` in every
    weighted metric.
    """
    A = psi1_derivatives(scal, m, sample)
    return {"psi0": float(metric.op_norm(np.diag([scal.lam, scal.mu]))),
            "psi1": float(metric.op_norm(A).max()),
            "psi1_euclidean": float(EUCLIDEAN.op_norm(A).max()),
            "kappa": metric.kappa}


# base region -------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseRegion:
    """Axis-aligned rectangle standing in for the region ``B_F``."""

    lo: tuple
    hi: tuple
    grid: int = 12

    def sample(self, grid=None):
        k = self.grid if grid is None else grid
        gx = np.linspace(self.lo[0], self.hi[0], k)
        gy = np.linspace(self.lo[1], self.hi[1], k)
        xx, yy = np.meshgrid(gx, gy, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def corners(self):
        (x0, y0), (x1, y1) = self.lo, self.hi
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    def diameter(self, metric=EUCLIDEAN):
        return float(metric.dist(self.lo, self.hi))

    def diagonal(self):
        """End points of the lower-left to upper-right diagonal."""
        return np.array(self.lo, dtype=float), np.array(self.hi, dtype=float)


def base_region(scal, m, level=6, pad=0.2, grid=12):
    """Bounding box of the level-``level`` cloud, padded on every side.

    Each side moves out by ``pad`` times the half-diagonal of the cloud's
    bounding box.  Padding by a fraction of each side separately would leave
    the box very thin in ``y``, too thin to contain its own ``psi_1`` image.
    """
    pts = cloud_points(scal, m, level)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = pad * 0.5 * float(np.linalg.norm(hi - lo))
    return BaseRegion(tuple(lo - margin), tuple(hi + margin), grid)


# convex hull geometry -------------------------------------------------------------------

def convex_hull(pts):
    """Counter-clockwise hull vertices of a planar point set."""
    pts = np.asarray(pts, dtype=float)
    hull = ConvexHull(pts, qhull_options="QbB")
    return pts[hull.vertices]


def polygon_area(poly):
    # centre first: tiny boxes far from the origin lose all digits otherwise
    q = poly - poly.mean(axis=0)
    x, y = q[:, 0], q[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _edges(poly):
    """Outward unit normals and offsets of a counter-clockwise polygon."""
    e = np.roll(poly, -1, axis=0) - poly
    nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    off = np.sum(nrm * poly, axis=1)
    return nrm, off


def points_in_polygon(pts, poly, tol=0.0):
    """Which points lie in the convex polygon inflated by ``tol``."""
    nrm, off = _edges(poly)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    return np.all(pts @ nrm.T - off[None, :] <= tol, axis=1)


def polygon_contains(outer, inner, tol):
    return bool(points_in_polygon(inner, outer, tol).all())


def polygons_disjoint(a, b):
    """Separating-axis test for two convex polygons."""
    for poly, other in ((a, b), (b, a)):
        nrm, off = _edges(poly)
        proj = other @ nrm.T - off[None, :]
        if np.any(proj.min(axis=0) > 0.0):
            return True
    return False


# boxes ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxRegion:
    """Hull of the image of the base sample under ``psi_w``."""

    word: DyadicWord
    hull: np.ndarray
    center: np.ndarray

    @property
    def area(self):
        return polygon_area(self.hull)

    def to_dict(self):
        return {"word": str(self.word), "center": list(map(float, self.center)),
                "hull": self.hull.tolist()}


def _level_boxes(scal, m, n, images, centers):
    out = []
    for k in range(2 ** n):
        hull = convex_hull(images[k])
        if not polygon_area(hull) > 0.0:
            raise NestingViolation("degenerate hull", word=str(DyadicWord.from_index(k, n)))
        out.append(BoxRegion(DyadicWord.from_index(k, n), hull, centers[k]))
    return out


def box_levels(scal, m, n, base_sample, tol=None, check=True):
    """Boxes of every level ``0..n``; optionally check nesting and disjointness."""
    tol = TOL if tol is None else tol
    pts = np.asarray(base_sample, dtype=float)
    cur = pts[None, :, :]
    ctr = scal.tip[None, :]
    levels = [_level_boxes(scal, m, 0, cur, ctr)]
    for level in range(1, n + 1):
        a, _ = psi_many(scal, m, 0, cur)
        b, st = psi_many(scal, m, 1, cur)
        ca, _ = psi_many(scal, m, 0, ctr)
        cb, stc = psi_many(scal, m, 1, ctr)
        if np.any(st != OK) or np.any(stc != OK):
            raise DomainEscape("box image left the domain of the map", depth=level)
        cur = np.concatenate([a, b])
        ctr = np.concatenate([ca, cb])
        levels.append(_level_boxes(scal, m, level, cur, ctr))
        if check:
            check_nesting(levels[-2], levels[-1], tol.hull_inflation)
            check_disjoint(levels[-1])
    return levels


def boxes(scal, m, n, base_sample, tol=None, check=True):
    """The ``2**n`` level-``n`` boxes, lexicographic order.

    Raises :class:`NestingViolation` when a box is not inside its parent
    (up to ``TOL.hull_inflation``) or two boxes of the level overlap.
    """
    return box_levels(scal, m, n, base_sample, tol, check)[n]


def check_nesting(parents, children, tol):
    for k, child in enumerate(children):
        parent = parents[k // 2]
        if not polygon_contains(parent.hull, child.hull, tol):
            raise NestingViolation("box not contained in its parent",
                                   word=str(child.word))


def check_disjoint(level):
    """Raise unless all hulls of a level are pairwise disjoint."""
    lo = np.array([b.hull.min(axis=0) for b in level])
    hi = np.array([b.hull.max(axis=0) for b in level])
    over = np.all((lo[:, None, :] <= hi[None, :, :]) & (lo[None, :, :] <= hi[:, None, :]),
                  axis=-1)
    i, j = np.nonzero(np.triu(over, k=1))
    for a, b in zip(i, j):
        if not polygons_disjoint(level[a].hull, level[b].hull):
            raise NestingViolation("boxes overlap", words=(str(level[a].word),
                                                           str(level[b].word)))


def odometer_check(scal, m, n, level_boxes=None, base_sample=None, tol=None):
    """Permutation induced by ``F`` on the level-``n`` boxes.

    ``sigma[k]`` is the index of the unique box containing ``F`` of the
    centre of box ``k``.  Raises :class:`NotPermutation` or
    :class:`NotSingleCycle` when the result is not a single ``2**n``-cycle.
    """
    tol = TOL if tol is None else tol
    if level_boxes is None:
        level_boxes = boxes(scal, m, n, base_sample, tol, check=False)
    centers = np.array([b.center for b in level_boxes])
    X, Y, st = m.forward_many(centers[:, 0], centers[:, 1])
    if np.any(st != OK):
        raise NotPermutation("image of a box centre is undefined")
    img = np.column_stack([X, Y])
    inside = np.array([points_in_polygon(img, b.hull, tol.hull_inflation)
                       for b in level_boxes]).T
    hits = inside.sum(axis=1)
    if np.any(hits != 1):
        k = int(np.flatnonzero(hits != 1)[0])
        raise NotPermutation("box centre image is not in exactly one box",
                             word=str(level_boxes[k].word), hits=int(hits[k]))
    sigma = np.argmax(inside, axis=1)
    if len(set(sigma.tolist())) != len(sigma):
        raise NotPermutation("two boxes are mapped into the same box")
    k, length = 0, 0
    while True:
        k = int(sigma[k])
        length += 1
        if k == 0:
            break
    if length != len(sigma):
        raise NotSingleCycle("permutation splits into several cycles", cycle_length=length)
    return sigma


def hausdorff(a, b, metric=EUCLIDEAN):
    """Symmetric Hausdorff distance between two finite point sets."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    D = metric.dist(a[:, None, :], b[None, :, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
