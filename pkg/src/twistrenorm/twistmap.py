"""The area-preserving map defined by a generating function.

``F(x, y) = (X, Y)`` with ``y = -s(X, x)`` solved for ``X`` and then
``Y = s(x, X)``.  An optional ``shift`` moves the whole picture along the
x-axis: ``F_shift(x, y) = F(x - shift, y) + (shift, 0)``, which is how the
translated (tip-at-``shift``) frame is realized.
"""
from __future__ import annotations

import warnings

import numpy as np

from .config import TOL
from .errors import DomainEscape, MultipleRootsWarning, NoRoot, SingularTwist
from .series import evaluate, partial

OK, MULTIPLE, NOROOT, ESCAPE = 0, 1, 2, 3
STATUS_NAMES = {OK: "ok", MULTIPLE: "multiple", NOROOT: "noroot", ESCAPE: "escape"}

T = np.diag([1.0, -1.0])


def reflect(pt):
    """The reversing involution ``(x, y) -> (x, -y)``."""
    x, y = pt
    return x, -y


class ImplicitMap:
    """Map ``F`` generated by ``s``; accepts a series or anything with ``.s``.

    The X-search runs over ``bracket`` (default: the series' trusted
    interval), split into ``cells`` sub-intervals to isolate roots; the root
    is bracketed to ``bisection_width`` and polished by safeguarded Newton.
    """

    def __init__(self, gen, shift=0.0, bracket=None, cells=24, newton_tol=None,
                 max_iter=60, bisection_width=None, singular_twist=None):
        s = getattr(gen, "s", gen)
        self.gen = gen if s is not gen else None
        self.s = s
        self.s1 = partial(s, 0)
        self.s2 = partial(s, 1)
        self.shift = float(shift)
        self.bracket = tuple(s.domain if bracket is None else bracket)
        self.cells = int(cells)
        self.newton_tol = TOL.map_newton if newton_tol is None else newton_tol
        self.bisection_width = TOL.bisection_width if bisection_width is None else bisection_width
        self.max_iter = int(max_iter)
        self.singular_twist = TOL.singular_twist if singular_twist is None else singular_twist
        d = s.max_degree
        self._pows = np.arange(d + 1)

    def with_shift(self, shift):
        return ImplicitMap(self.gen if self.gen is not None else self.s, shift, self.bracket,
                           self.cells, self.newton_tol, self.max_iter, self.bisection_width,
                           self.singular_twist)

    # implicit solve -----------------------------------------------------------
    def _row_coeffs(self, u):
        """Coefficients in X of ``s(X, u)`` for each ``u``: shape ``(N, d + 1)``."""
        return (u[:, None] ** self._pows[None, :]) @ self.s.coeffs.T

    def solve_X(self, x, y):
        """Vectorized root ``X`` of ``y + s(X, x)`` (unshifted coordinates).

        Returns ``(X, status)``; status codes are ``OK``, ``MULTIPLE`` (the
        smallest-|X| root is returned), ``NOROOT`` and ``ESCAPE`` (``x``
        outside the trusted interval).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        x, y = np.broadcast_arrays(x, y)
        n = len(x)
        A = self._row_coeffs(x)
        A[:, 0] += y
        lo, hi = self.bracket
        nodes = np.linspace(lo, hi, self.cells + 1)
        V = A @ (nodes[None, :] ** self._pows[:, None])
        pos = V > 0
        change = pos[:, :-1] != pos[:, 1:]
        count = change.sum(axis=1)
        status = np.full(n, OK)
        status[count > 1] = MULTIPLE
        status[count == 0] = NOROOT
        lo_s, hi_s = self.s.domain
        status[(x < lo_s) | (x > hi_s) | ~np.isfinite(x) | ~np.isfinite(y)] = ESCAPE
        X = np.full(n, np.nan)
        live = np.flatnonzero(count > 0)
        if live.size == 0:
            return X, status
        # smallest-|X| sign-change cell
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        dist = np.where(change[live], np.abs(mids)[None, :], np.inf)
        cell = np.argmin(dist, axis=1)
        a, b = nodes[cell], nodes[cell + 1]
        Al = A[live]
        fa = V[live, cell]
        poly = lambda M, t: np.sum(M * t[:, None] ** self._pows[None, :], axis=1)
        while np.max(b - a) > self.bisection_width:
            m = 0.5 * (a + b)
            fm = poly(Al, m)
            left = (fm > 0) != (fa > 0)
            b = np.where(left, m, b)
            a = np.where(left, a, m)
            fa = np.where(left, fa, fm)
        dA = Al[:, 1:] * self._pows[1:][None, :]
        dpoly = lambda t: np.sum(dA * t[:, None] ** self._pows[:-1][None, :], axis=1)
        t = 0.5 * (a + b)
        for _ in range(self.max_iter):
            ft = poly(Al, t)
            if np.all(np.abs(ft) <= self.newton_tol):
                break
            same = (ft > 0) == (fa > 0)
            a = np.where(same, t, a)
            fa = np.where(same, ft, fa)
            b = np.where(same, b, t)
            dt = dpoly(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = t - ft / dt
            bad = ~np.isfinite(tn) | (tn <= np.minimum(a, b)) | (tn >= np.maximum(a, b))
            tn = np.where(bad, 0.5 * (a + b), tn)
            t = np.where(np.abs(ft) <= self.newton_tol, t, tn)
        # one last Newton step, kept only where it helps
        ft = poly(Al, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - ft / dpoly(t)
        better = np.isfinite(tn) & (np.abs(poly(Al, np.where(np.isfinite(tn), tn, t))) < np.abs(ft))
        X[live] = np.where(better, tn, t)
        return X, status

    # forward and backward -------------------------------------------------------
    def forward_many(self, x, y):
        """Vectorized ``F``; returns ``(X, Y, status)``."""
        x = np.asarray(x, dtype=float)
        shape = np.broadcast(x, np.asarray(y)).shape
        u = x - self.shift
        Xu, status = self.solve_X(u, y)
        uu = np.broadcast_to(u, shape).ravel()
        with np.errstate(invalid="ignore"):
            Y = evaluate(self.s, uu, Xu)
        Y = np.asarray(Y, dtype=float).reshape(shape)
        return (Xu + self.shift).reshape(shape), Y, status.reshape(shape)

    def forward(self, x, y):
        """``F(x, y)`` at one point.

        Warns :class:`MultipleRootsWarning` when the X-search is ambiguous and
        raises :class:`NoRoot` or :class:`DomainEscape` when it fails.
        """
        X, Y, st = self.forward_many(float(x), float(y))
        st = int(st)
        if st == NOROOT:
            raise NoRoot("no sign change of y + s(X, x) on the bracket", x=x, y=y)
        if st == ESCAPE:
            raise DomainEscape("point outside the trusted domain", x=x, y=y)
        if st == MULTIPLE:
            warnings.warn(MultipleRootsWarning(f"several roots at ({x}, {y}); "
                                               "smallest |X| chosen"), stacklevel=2)
        return float(X), float(Y)

    def backward(self, X, Y):
        """``F^{-1} = T F T`` with ``T(x, y) = (x, -y)``."""
        x, y = self.forward(X, -Y)
        return x, -y

    def backward_many(self, X, Y):
        x, y, st = self.forward_many(X, -np.asarray(Y, dtype=float))
        return x, -y, st

    def __call__(self, pt):
        return self.forward(*pt)

    # derivatives ------------------------------------------------------------------
    def _partials(self, u, Xu):
        s1a = evaluate(self.s1, Xu, u)
        s2a = evaluate(self.s2, Xu, u)
        s1b = evaluate(self.s1, u, Xu)
        s2b = evaluate(self.s2, u, Xu)
        return s1a, s2a, s1b, s2b

    def differential_many(self, x, y):
        """Differentials at many points, shape ``(..., 2, 2)``, plus status."""
        x = np.asarray(x, dtype=float)
        shape = np.broadcast(x, np.asarray(y)).shape
        u = np.broadcast_to(x - self.shift, shape).ravel()
        Xu, status = self.solve_X(u, y)
        s1a, s2a, s1b, s2b = self._partials(u, Xu)
        with np.errstate(divide="ignore", invalid="ignore"):
            J = np.empty(u.shape + (2, 2))
            J[:, 0, 0] = -s2a / s1a
            J[:, 0, 1] = -1.0 / s1a
            J[:, 1, 0] = s1b - s2b * s2a / s1a
            J[:, 1, 1] = -s2b / s1a
        return J.reshape(shape + (2, 2)), status.reshape(shape)

    def differential(self, x, y):
        """``DF(x, y)`` from the implicit-function formula.

        Raises :class:`SingularTwist` if ``|s_1(X, x)|`` is below
        ``singular_twist`` (default ``TOL.singular_twist``).
        """
        u = float(x) - self.shift
        X, _ = self.forward(x, y)
        Xu = X - self.shift
        s1a, s2a, s1b, s2b = self._partials(u, Xu)
        if abs(s1a) < self.singular_twist:
            raise SingularTwist("s_1(X, x) vanishes", x=x, y=y, s1=s1a)
        return np.array([[-s2a / s1a, -1.0 / s1a],
                         [s1b - s2b * s2a / s1a, -s2b / s1a]])

    def inverse_differential(self, x, y):
        """``D(F^{-1})(x, y) = T DF(T(x, y)) T``."""
        return T @ self.differential(x, -y) @ T

    def twist(self, x, y):
        """``dX/dy = -1 / s_1(X, x)`` at ``(x, y)``."""
        return float(self.differential(x, y)[0, 1])

    def twist_many(self, x, y):
        J, st = self.differential_many(x, y)
        return J[..., 0, 1], st
