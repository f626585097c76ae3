"""Truncated bivariate polynomial series.

A :class:`BivariateSeries` holds the coefficients ``c[i, j]`` of the terms
``x**i * X**j`` with ``i + j <= max_degree`` in a dense square matrix (the
upper-left triangle is used; everything past the anti-diagonal is zero).
Products and compositions are truncated back to ``max_degree``; the summed
magnitude of the dropped coefficients is accumulated on the result as
``truncation`` so that callers can tell when the truncation is not
negligible.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainEscape

DEFAULT_DOMAIN = (-1.2, 1.2)
_SAMPLES = 11


@lru_cache(maxsize=None)
def _tables(d):
    """Index tables for truncated products at total degree ``d``."""
    i, j = np.indices((d + 1, d + 1))
    mask = (i + j) <= d
    tri = np.argwhere(mask)
    n = len(tri)
    flat = -np.ones((d + 1, d + 1), dtype=np.intp)
    flat[mask] = np.arange(n)

    p, q = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    p, q = p.ravel(), q.ravel()
    tgt = tri[p] + tri[q]
    keep = tgt.sum(axis=1) <= d
    kept = (p[keep], q[keep], flat[tgt[keep, 0], tgt[keep, 1]])

    drop = ~keep
    dt = tgt[drop]
    w = 2 * d + 1
    dflat = dt[:, 0] * w + dt[:, 1]
    uniq, dpos = np.unique(dflat, return_inverse=True)
    dropped = (p[drop], q[drop], dpos.ravel(), len(uniq))
    for arr in (mask, *kept, *dropped[:3]):
        arr.setflags(write=False)
    return mask, kept, dropped


def _mask(d):
    return _tables(d)[0]


def _to_vec(c):
    return c[_mask(c.shape[0] - 1)]


def _from_vec(v, d):
    c = np.zeros((d + 1, d + 1))
    c[_mask(d)] = v
    return c


def _pad(c, d):
    if c.shape[0] == d + 1:
        return c
    out = np.zeros((d + 1, d + 1))
    k = min(c.shape[0], d + 1)
    out[:k, :k] = c[:k, :k]
    return np.where(_mask(d), out, 0.0)


def _mul_vec(a, b, d):
    p, q, t = _tables(d)[1]
    return np.bincount(t, weights=a[p] * b[q], minlength=len(a))


def _dropped_mag(a, b, d):
    p, q, t, m = _tables(d)[2]
    if m == 0:
        return 0.0
    return float(np.abs(np.bincount(t, weights=a[p] * b[q], minlength=m)).sum())


def _mul_operator(zvec, d, dropped=False):
    """Matrix of ``v -> trunc(z * v)`` on triangle vectors (and the dropped part)."""
    n = len(zvec)
    p, q, t = _tables(d)[1]
    M = np.zeros((n, n))
    M[t, q] = zvec[p]
    if not dropped:
        return M
    p2, q2, t2, m = _tables(d)[2]
    M2 = np.zeros((m, n))
    M2[t2, q2] = zvec[p2]
    return M, M2


class BivariateSeries:
    """Truncated polynomial ``sum c[i, j] x**i X**j`` trusted on ``domain**2``.

    Instances are immutable; arithmetic returns new series.
    """

    __slots__ = ("coeffs", "domain", "truncation")

    def __init__(self, coeffs, domain=DEFAULT_DOMAIN, truncation=0.0):
        c = np.array(coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError(f"coefficient matrix must be square, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        d = c.shape[0] - 1
        if np.any(c[~_mask(d)] != 0.0):
            raise ValueError(f"coefficients beyond total degree {d} must be zero")
        lo, hi = (float(v) for v in domain)
        if not lo < hi:
            raise ValueError(f"empty domain {domain}")
        c.setflags(write=False)
        self.coeffs = c
        self.domain = (lo, hi)
        self.truncation = float(truncation)

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, degree, domain=DEFAULT_DOMAIN):
        return cls(np.zeros((degree + 1, degree + 1)), domain)

    @classmethod
    def constant(cls, value, degree, domain=DEFAULT_DOMAIN):
        c = np.zeros((degree + 1, degree + 1))
        c[0, 0] = value
        return cls(c, domain)

    @classmethod
    def from_terms(cls, terms, degree, domain=DEFAULT_DOMAIN):
        """Build from ``{(i, j): coefficient}``."""
        c = np.zeros((degree + 1, degree + 1))
        for (i, j), v in terms.items():
            if i + j > degree:
                raise ValueError(f"term x^{i} X^{j} exceeds degree {degree}")
            c[i, j] += v
        return cls(c, domain)

    @classmethod
    def from_vector(cls, vec, degree, domain=DEFAULT_DOMAIN):
        return cls(_from_vec(np.asarray(vec, dtype=float), degree), domain)

    # basic properties -----------------------------------------------------
    @property
    def max_degree(self):
        return self.coeffs.shape[0] - 1

    def vector(self):
        """Coefficients of the triangle, in row-major order."""
        return _to_vec(self.coeffs)

    def __call__(self, x, X):
        return evaluate(self, x, X)

    def __repr__(self):
        return (f"BivariateSeries(max_degree={self.max_degree}, domain={self.domain}, "
                f"truncation={self.truncation:.3g})")

    def _new(self, coeffs, truncation=None):
        t = self.truncation if truncation is None else truncation
        return BivariateSeries(coeffs, self.domain, t)

    def padded(self, degree):
        """Same polynomial stored at a larger ``max_degree``."""
        if degree < self.max_degree:
            raise ValueError("use truncated() to lower the degree")
        return self._new(_pad(self.coeffs, degree))

    def truncated(self, degree):
        c = self.coeffs
        mask = _mask(degree)
        keep = np.zeros((degree + 1, degree + 1))
        k = min(degree + 1, c.shape[0])
        keep[:k, :k] = c[:k, :k]
        dropped = np.abs(c).sum() - np.abs(keep[mask]).sum()
        return self._new(np.where(mask, keep, 0.0), self.truncation + max(dropped, 0.0))

    def with_domain(self, domain):
        return BivariateSeries(self.coeffs, domain, self.truncation)

    def transpose(self):
        """The series with its two arguments swapped, ``(x, X) -> f(X, x)``."""
        return self._new(self.coeffs.T)

    def is_symmetric(self, tol=0.0):
        return bool(np.abs(self.coeffs - self.coeffs.T).max() <= tol)

    def sup_norm(self):
        """Coefficient sup norm."""
        return float(np.abs(self.coeffs).max())

    def partial(self, axis):
        return partial(self, axis)

    # arithmetic sugar -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, BivariateSeries):
            return add(self, other)
        return add(self, BivariateSeries.constant(float(other), self.max_degree, self.domain))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BivariateSeries):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return scale(self, 1.0 / float(other))

    # serialization ----------------------------------------------------------
    def to_dict(self):
        return {
            "max_degree": self.max_degree,
            "domain": list(self.domain),
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        d = int(data["max_degree"])
        raw = np.asarray(data["coeffs"], dtype=float)
        if raw.ndim == 1:
            raw = raw.reshape(d + 1, d + 1)
        if raw.shape != (d + 1, d + 1):
            raise ValueError(f"coeffs shape {raw.shape} does not match max_degree {d}")
        return cls(raw, tuple(data.get("domain", DEFAULT_DOMAIN)))


def evaluate(f, x, X):
    """Value of ``f`` at ``(x, X)``; broadcasts over arrays (nested Horner)."""
    x, X = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(X, dtype=float))
    out = P.polyval2d(x, X, f.coeffs)
    return out if np.ndim(out) else float(out)


def partial(f, axis):
    """Exact derivative in the first (``0``/``"first"``) or second argument."""
    axis = {"first": 0, "second": 1, 0: 0, 1: 1}[axis]
    d = f.max_degree
    if d == 0:
        return f._new(np.zeros((1, 1)))
    c = f.coeffs if axis == 0 else f.coeffs.T
    dc = c[1:, :-1] * np.arange(1, d + 1)[:, None]
    return f._new(dc if axis == 0 else dc.T)


def add(f, g):
    d = max(f.max_degree, g.max_degree)
    return f._new(_pad(f.coeffs, d) + _pad(g.coeffs, d), f.truncation + g.truncation)


def scale(f, a):
    return f._new(a * f.coeffs, abs(a) * f.truncation)


def mul(f, g, track=True):
    """Truncated product; dropped magnitude is added to ``truncation``."""
    d = max(f.max_degree, g.max_degree)
    a, b = _to_vec(_pad(f.coeffs, d)), _to_vec(_pad(g.coeffs, d))
    c = _from_vec(_mul_vec(a, b, d), d)
    lost = _dropped_mag(a, b, d) if track else 0.0
    return f._new(c, f.truncation + g.truncation + lost)


def reciprocal(f):
    """Series ``1/f``; requires ``f(0, 0) != 0``.

    Newton iteration ``r <- r (2 - f r)`` doubles the number of correct
    degrees per step, so ``ceil(log2(d + 1))`` steps are exact.
    """
    d = f.max_degree
    c0 = f.coeffs[0, 0]
    if c0 == 0.0:
        raise ZeroDivisionError("series with zero constant term has no reciprocal")
    a = _to_vec(f.coeffs)
    r = np.zeros_like(a)
    r[0] = 1.0 / c0
    two = np.zeros_like(a)
    two[0] = 2.0
    for _ in range(int(np.ceil(np.log2(d + 1))) + 1):
        r = _mul_vec(r, two - _mul_vec(a, r, d), d)
    return f._new(_from_vec(r, d))


def sample_grid(domain, n=_SAMPLES):
    lo, hi = domain
    g = np.linspace(lo, hi, n)
    return np.meshgrid(g, g, indexing="ij")


def check_substitution_domain(f, z, a, n=_SAMPLES):
    """Raise :class:`DomainEscape` if ``f(z(x, X), a X)`` leaves ``f``'s domain."""
    lo, hi = f.domain
    xx, XX = sample_grid(z.domain, n)
    zv = evaluate(z, xx, XX)
    zlo, zhi = float(zv.min()), float(zv.max())
    if zlo < lo or zhi > hi:
        raise DomainEscape("range of inner series leaves the trusted domain",
                           range=(zlo, zhi), domain=f.domain)
    ends = sorted((a * z.domain[0], a * z.domain[1]))
    if ends[0] < lo or ends[1] > hi:
        raise DomainEscape("scaled second argument leaves the trusted domain",
                           range=tuple(ends), domain=f.domain)


def _compose_first(fcs, zvec, a, d, track):
    """Horner in the first argument for several outer coefficient arrays at once.

    Returns the triangle vectors of ``f(z, a X)`` (one column per ``f``) and
    the dropped magnitude per column.
    """
    F = np.stack(fcs, axis=-1) * (a ** np.arange(d + 1))[None, :, None]
    if track:
        M, M2 = _mul_operator(zvec, d, dropped=True)
    else:
        M = _mul_operator(zvec, d)
    lost = np.zeros(F.shape[-1])
    res = np.zeros((len(zvec), F.shape[-1]))
    # row 0 of the triangle holds the pure powers of X, at positions 0..d
    res[:d + 1] = F[d]
    for i in range(d - 1, -1, -1):
        if track:
            lost += np.abs(M2 @ res).sum(axis=0)
        res = M @ res
        res[:d + 1] += F[i]
    return res, lost


def substitute_first(f, z, a, check_domain=True, track=True):
    """Series for ``(x, X) -> f(z(x, X), a X)``.

    Horner's scheme in the first argument of ``f``; every multiplication by
    ``z`` is truncated to ``max(f.max_degree, z.max_degree)``.
    """
    if check_domain:
        check_substitution_domain(f, z, a)
    d = max(f.max_degree, z.max_degree)
    res, lost = _compose_first([_pad(f.coeffs, d)], _to_vec(_pad(z.coeffs, d)), a, d, track)
    trunc = f.truncation + z.truncation + float(lost[0])
    return BivariateSeries(_from_vec(res[:, 0], d), z.domain, trunc)
