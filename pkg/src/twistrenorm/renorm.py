"""Period-doubling renormalization on generating functions.

For a generating function ``s`` and a scaling ``lam`` the midpoint function
``z`` is the symmetric solution of

    s(lam x, z) + s(lam X, z) = 0,

and the renormalized generating function is

    R(s)(x, X) = s(z(x, X), lam X) / mu,      mu = dz/dx (1, 0).

A fixed point of ``R`` is searched for with damped Gauss-Newton on the
coefficients of ``s`` together with ``lam``.  The coordinate freedom is fixed
by the gauge conditions ``s(1, 0) = 0`` and ``ds/dx (1, 0) = 1``, appended to
``R(s) - s`` as two extra residual rows.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .config import TOL, SeedScan, Tolerances
from .errors import (DegenerateScaling, InvalidSchedule, NoConvergence,
                     NormalizationFailure, SingularJacobian, TwistRenormError)
from .series import (DEFAULT_DOMAIN, BivariateSeries, _compose_first, _from_vec,
                     _mul_vec, _pad, _to_vec, check_substitution_domain,
                     evaluate, partial, reciprocal, sample_grid,
                     substitute_first)

_GRID = 11
_MIDPOINT_STEPS = 50
_FD_STEP = 1e-7


@dataclass(frozen=True)
class GeneratingSystem:
    """A generating function with its scalings.

    ``mu`` is derived from the midpoint function and may be ``None`` before
    the first renormalization; ``z`` caches the last midpoint solution and is
    used as a warm start.
    """

    s: BivariateSeries
    lam: float
    mu: float | None = None
    z: BivariateSeries | None = None

    def __post_init__(self):
        if not -1.0 < self.lam < 0.0:
            raise ValueError(f"lambda must lie in (-1, 0), got {self.lam}")
        if self.mu is not None and not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")

    @property
    def degree(self):
        return self.s.max_degree

    @property
    def domain(self):
        return self.s.domain

    def padded(self, degree):
        """Same system with ``s`` (and the cached ``z``) stored at ``degree``."""
        z = None if self.z is None else self.z.padded(degree)
        return dataclasses.replace(self, s=self.s.padded(degree), z=z)

    def gauge_errors(self):
        """``(s(1, 0), ds/dx(1, 0) - 1)``."""
        return (evaluate(self.s, 1.0, 0.0),
                evaluate(partial(self.s, 0), 1.0, 0.0) - 1.0)

    def to_dict(self):
        out = {"lambda": self.lam, "mu": self.mu, "s": self.s.to_dict()}
        out["z"] = None if self.z is None else self.z.to_dict()
        return out

    @classmethod
    def from_dict(cls, data):
        z = data.get("z")
        return cls(BivariateSeries.from_dict(data["s"]), float(data["lambda"]),
                   None if data.get("mu") is None else float(data["mu"]),
                   None if z is None else BivariateSeries.from_dict(z))


@dataclass(frozen=True)
class SolveReport:
    """Diagnostics of one fixed-point solve.

    ``gated`` tells whether the acceptance gates were applied; a gated report
    is only ever returned when all of them passed.
    """

    residual_norm: float
    newton_steps: int
    truncation_diag: float
    lam: float
    mu: float
    degree: int
    gauge_error: float
    midpoint_residual: float
    converged: bool
    gated: bool

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d


# midpoint equation -------------------------------------------------------------

def _pointwise_midpoint(s, lam, x, X, cells=24):
    """Root ``w`` of ``s(lam x, w) + s(lam X, w)`` closest to the domain centre."""
    lo, hi = s.domain
    phi = lambda w: evaluate(s, lam * x, w) + evaluate(s, lam * X, w)
    nodes = np.linspace(lo, hi, cells + 1)
    vals = phi(nodes)
    roots = []
    for a, b, fa, fb in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(brentq(phi, a, b, xtol=1e-14))
    if vals[-1] == 0.0:
        roots.append(hi)
    if not roots:
        return None
    mid = 0.5 * (lo + hi)
    return min(roots, key=lambda r: abs(r - mid))


def initial_midpoint(s, lam):
    """Symmetric affine guess ``a + b (x + X)`` fitted to pointwise roots.

    The midpoint equation is solved by bracketing at a 3x3 grid of points
    half-way out in the trusted square.
    """
    lo, hi = s.domain
    mid, half = 0.5 * (lo + hi), 0.25 * (hi - lo)
    nodes = (mid - half, mid, mid + half)
    rows, rhs = [], []
    for x in nodes:
        for X in nodes:
            w = _pointwise_midpoint(s, lam, x, X)
            if w is not None:
                rows.append((1.0, x + X))
                rhs.append(w)
    if not rows:
        raise NoConvergence("midpoint equation has no root at any seed point", lam=lam)
    A = np.array(rows)
    if np.ptp(A[:, 1]) == 0.0:
        coef = (float(np.mean(rhs)), 0.0)
    else:
        coef = np.linalg.lstsq(A, np.array(rhs), rcond=None)[0]
    d = s.max_degree
    c = np.zeros((d + 1, d + 1))
    c[0, 0] = coef[0]
    if d >= 1:
        c[1, 0] = c[0, 1] = coef[1]
    return BivariateSeries(c, s.domain)


def _midpoint_parts(sc, s2c, zvec, lam, d, track=False):
    """Residual ``G`` and derivative ``D`` of the midpoint equation as vectors."""
    res, lost = _compose_first([sc.T, s2c.T], zvec, lam, d, track)
    G = _from_vec(res[:, 0], d)
    D = _from_vec(res[:, 1], d)
    return _to_vec(G + G.T), _to_vec(D + D.T), lost


def _check_derivative(Dvec, d, domain, tol):
    xx, XX = sample_grid(domain, _GRID)
    Dmin = float(np.abs(evaluate(BivariateSeries(_from_vec(Dvec, d), domain), xx, XX)).min())
    if Dmin < tol:
        raise SingularJacobian("midpoint equation derivative vanishes on the grid",
                               min_abs=Dmin)


def _midpoint_newton(sc, lam, d, zvec, domain, tol, max_steps=_MIDPOINT_STEPS,
                     check=False, singular_tol=TOL.singular_derivative):
    """Series Newton for the midpoint equation; returns the triangle vector of z."""
    s2c = _partial_second(sc)
    prev = np.inf
    for step in range(max_steps):
        G, D, _ = _midpoint_parts(sc, s2c, zvec, lam, d)
        if check and step == 0:
            _check_derivative(D, d, domain, singular_tol)
        if D[0] == 0.0:
            raise SingularJacobian("midpoint equation derivative vanishes at the origin")
        rD = _to_vec(reciprocal(BivariateSeries(_from_vec(D, d), domain)).coeffs)
        dz = -_mul_vec(G, rD, d)
        dzm = _from_vec(dz, d)
        dz = _to_vec(0.5 * (dzm + dzm.T))
        zvec = zvec + dz
        size = float(np.abs(dz).max())
        if not np.all(np.isfinite(zvec)):
            break
        if size <= tol * max(1.0, float(np.abs(zvec).max())):
            return zvec, step + 1
        # rounding floor: the step stopped shrinking at a tiny size
        if size < 1e-11 and size > 0.5 * prev:
            return zvec, step + 1
        prev = size
    raise NoConvergence("midpoint Newton did not converge", steps=max_steps, lam=lam)


def _partial_second(c):
    d = c.shape[0] - 1
    out = np.zeros_like(c)
    if d >= 1:
        out[:, :-1] = c[:, 1:] * np.arange(1, d + 1)[None, :]
    return out


def solve_midpoint(s, lam, degree=None, z0=None, tol=None):
    """Symmetric series ``z`` with ``s(lam x, z) + s(lam X, z) = 0``.

    Newton's method on series, symmetrizing every step.  ``z0`` is a warm
    start; without one an affine fit to pointwise roots is used.

    Raises :class:`SingularJacobian` when ``ds/dX`` along the solution comes
    within ``TOL.singular_derivative`` of zero on the sample grid, and
    :class:`NoConvergence` when Newton exceeds its step cap.
    """
    tol = TOL if tol is None else tol
    d = s.max_degree if degree is None else int(degree)
    s = s.padded(d) if d >= s.max_degree else s.truncated(d)
    if z0 is None:
        z0 = initial_midpoint(s, lam)
    z0c = _pad(z0.coeffs, d) if z0.max_degree <= d else z0.truncated(d).coeffs
    z0c = 0.5 * (z0c + z0c.T)
    zvec, _ = _midpoint_newton(s.coeffs, lam, d, _to_vec(z0c), s.domain,
                               tol.midpoint_newton, check=True,
                               singular_tol=tol.singular_derivative)
    _, D, lost = _midpoint_parts(s.coeffs, _partial_second(s.coeffs), zvec,
                                 lam, d, track=True)
    _check_derivative(D, d, s.domain, tol.singular_derivative)
    z = BivariateSeries(_from_vec(zvec, d), s.domain, s.truncation + float(lost.sum()))
    check_substitution_domain(s, z, lam)
    return z


def midpoint_residual(s, lam, z, n=20):
    """Sup over an ``n x n`` grid of ``|s(lam x, z) + s(lam X, z)|``."""
    xx, XX = sample_grid(z.domain, n)
    zz = evaluate(z, xx, XX)
    return float(np.abs(evaluate(s, lam * xx, zz) + evaluate(s, lam * XX, zz)).max())


def scaling_from_midpoint(z):
    """``mu = dz/dx (1, 0)``."""
    return evaluate(partial(z, 0), 1.0, 0.0)


def renormalize(g, tol=None):
    """Return ``(R(s), z)`` for the system ``g``.

    Raises :class:`DegenerateScaling` when ``mu = dz/dx(1, 0)`` is not in
    ``(0, 1)``.
    """
    z = solve_midpoint(g.s, g.lam, z0=g.z, tol=tol)
    mu = scaling_from_midpoint(z)
    if not 0.0 < mu < 1.0:
        raise DegenerateScaling("mu = dz/dx(1,0) outside (0, 1)", mu=mu)
    return substitute_first(g.s.padded(z.max_degree), z, g.lam) / mu, z


# fixed point solve -------------------------------------------------------------

def pack(g):
    """Unknown vector: triangle coefficients of ``s`` followed by ``lam``."""
    return np.concatenate([g.s.vector(), [g.lam]])


def unpack(v, degree, domain=DEFAULT_DOMAIN):
    return BivariateSeries(_from_vec(v[:-1], degree), domain), float(v[-1])


def _residual(v, d, zvec, tol):
    """Fast residual ``[R(s) - s, s(1,0), s_x(1,0) - 1]``; also returns z."""
    sc = _from_vec(v[:-1], d)
    lam = float(v[-1])
    if not -1.0 < lam < 0.0:
        raise DegenerateScaling("lambda left (-1, 0)", lam=lam)
    zvec, _ = _midpoint_newton(sc, lam, d, zvec, DEFAULT_DOMAIN, tol.midpoint_newton)
    zc = _from_vec(zvec, d)
    # dz/dx at (1, 0) only sees the pure powers of x
    mu = float(np.sum(np.arange(d + 1) * zc[:, 0]))
    if not 0.0 < mu < 1.0:
        raise DegenerateScaling("mu = dz/dx(1,0) outside (0, 1)", mu=mu)
    comp, _ = _compose_first([sc], zvec, lam, d, False)
    r = comp[:, 0] / mu - v[:-1]
    s10 = float(np.sum(sc[:, 0]))
    s1_10 = float(np.sum(np.arange(d + 1) * sc[:, 0]))
    return np.concatenate([r, [s10, s1_10 - 1.0]]), zvec


def residual_vector(g, tol=None):
    """Residual of the fixed-point system at ``g`` (coefficients then gauge rows)."""
    tol = TOL if tol is None else tol
    z0 = g.z if g.z is not None else initial_midpoint(g.s, g.lam)
    d = g.degree
    return _residual(pack(g), d, _to_vec(_pad(z0.coeffs, d)), tol)[0]


def _jacobian(v, d, r0, zvec, tol, h=_FD_STEP):
    J = np.empty((len(r0), len(v)))
    for i in range(len(v)):
        vp = v.copy()
        vp[i] += h * max(1.0, abs(v[i]))
        dv = vp[i] - v[i]
        J[:, i] = (_residual(vp, d, zvec, tol)[0] - r0) / dv
    return J


def fd_jacobian(g, tol=None, h=_FD_STEP):
    """Forward-difference Jacobian of :func:`residual_vector` in the packed unknowns."""
    tol = TOL if tol is None else tol
    d = g.degree
    z0 = g.z if g.z is not None else initial_midpoint(g.s, g.lam)
    v = pack(g)
    r0, zvec = _residual(v, d, _to_vec(_pad(z0.coeffs, d)), tol)
    return _jacobian(v, d, r0, zvec, tol, h)


def fixed_point_solve(initial, degree=None, tol=None, max_steps=30, gate=True):
    """Damped Gauss-Newton for the renormalization fixed point.

    Returns the solved :class:`GeneratingSystem` (with ``mu`` and ``z``
    filled in) and a :class:`SolveReport`.  With ``gate`` the residual,
    gauge, truncation and midpoint-grid gates are enforced and failures
    raise :class:`NoConvergence` or :class:`NormalizationFailure`.

    The truncated system is overdetermined and only consistent up to the
    truncation error, so iteration stops once the step or the achievable
    decrease becomes negligible rather than when the residual hits zero.
    """
    tol = TOL if tol is None else tol
    d = initial.degree if degree is None else int(degree)
    g = initial.padded(d) if d >= initial.degree else initial
    domain = g.domain
    z = g.z if g.z is not None else initial_midpoint(g.s, g.lam)
    zvec = _to_vec(_pad(z.coeffs, d))
    v = pack(g)
    try:
        r, zvec = _residual(v, d, zvec, tol)
    except TwistRenormError as exc:
        raise NoConvergence(f"initial residual failed: {exc}", degree=d) from exc
    nr = float(np.linalg.norm(r))
    steps = 0
    converged = False
    for steps in range(1, max_steps + 1):
        J = _jacobian(v, d, r, zvec, tol)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        small = float(np.abs(step).max()) <= 1e-14 * max(1.0, float(np.abs(v).max()))
        t = 1.0
        accepted = False
        for _ in range(21):
            vn = v + t * step
            try:
                rn, zn = _residual(vn, d, zvec, tol)
                nn = float(np.linalg.norm(rn))
            except TwistRenormError:
                nn = np.inf
            if np.isfinite(nn) and nn <= (1.0 - 1e-4 * t) * nr:
                accepted = True
                break
            t *= 0.5
        if accepted:
            v, r, zvec, nr = vn, rn, zn, nn
        if small or not accepted:
            # no further decrease is possible: the floor set by truncation
            converged = bool(small or float(np.abs(step).max()) < 1e-6)
            break
    s, lam = unpack(v, d, domain)
    sys0 = GeneratingSystem(s, lam, z=BivariateSeries(_from_vec(zvec, d), domain))
    try:
        Rs, z = renormalize(sys0, tol)
    except TwistRenormError as exc:
        raise NoConvergence(f"renormalization failed at the solution: {exc}",
                            degree=d) from exc
    mu = scaling_from_midpoint(z)
    residual_norm = float(np.abs((Rs - s).coeffs).max())
    e0, e1 = GeneratingSystem(s, lam).gauge_errors()
    gauge = max(abs(e0), abs(e1))
    mres = midpoint_residual(s, lam, z)
    report = SolveReport(residual_norm=residual_norm, newton_steps=steps,
                         truncation_diag=Rs.truncation, lam=lam, mu=mu, degree=d,
                         gauge_error=gauge, midpoint_residual=mres,
                         converged=converged, gated=gate)
    if gate:
        _apply_gates(report, tol)
    return GeneratingSystem(s, lam, mu, z), report


def _apply_gates(rep, tol):
    ctx = dict(degree=rep.degree)
    if rep.residual_norm > tol.residual:
        raise NoConvergence("fixed-point residual above tolerance",
                            residual=rep.residual_norm, tol=tol.residual, **ctx)
    if rep.gauge_error > tol.gauge:
        raise NormalizationFailure("gauge conditions violated at the solution",
                                   gauge_error=rep.gauge_error, tol=tol.gauge, **ctx)
    if rep.truncation_diag > tol.truncation:
        raise NoConvergence("truncation diagnostic above tolerance",
                            truncation=rep.truncation_diag, tol=tol.truncation, **ctx)
    if rep.midpoint_residual > tol.midpoint_grid:
        raise NoConvergence("midpoint equation residual above tolerance on the grid",
                            midpoint_residual=rep.midpoint_residual,
                            tol=tol.midpoint_grid, **ctx)
    if not (-1.0 < rep.lam < 0.0 and 0.0 < rep.mu < 1.0):
        raise NormalizationFailure("scalings outside their ranges", lam=rep.lam,
                                   mu=rep.mu, **ctx)


# seed and continuation ----------------------------------------------------------

def seed_system(degree=6, lam0=-0.25, mu0=0.0625, cross=0.0, domain=DEFAULT_DOMAIN):
    """Quadratic seed ``x - 1 + b X + c X**2 + cross x X``.

    For ``cross = 0`` the midpoint equation is quadratic in ``z``; ``b`` and
    ``c`` are chosen so that its solution has ``z(1, 0) = 1`` and
    ``dz/dx(1, 0) = mu0`` at ``lam = lam0``:

        b + c = 1 - lam0 / 2,      b + 2 c = -lam0 / (2 mu0).
    """
    c = -lam0 / (2.0 * mu0) - 1.0 + lam0 / 2.0
    b = 1.0 - lam0 / 2.0 - c
    terms = {(0, 0): -1.0, (1, 0): 1.0, (0, 1): b, (0, 2): c, (1, 1): cross}
    return GeneratingSystem(BivariateSeries.from_terms(terms, degree, domain), lam0)


def solve_from_seed(degree, params=None, tol=None, domain=DEFAULT_DOMAIN):
    """Scan the seed family until the solve at ``degree`` lands on a fixed point."""
    params = SeedScan() if params is None else params
    tol = TOL if tol is None else tol
    failures = []
    for cross in params.cross_values:
        seed = seed_system(degree, params.lam0, params.mu0, cross, domain)
        try:
            g, rep = fixed_point_solve(seed, degree, tol, gate=False)
        except TwistRenormError as exc:
            failures.append((cross, exc.code))
            continue
        if rep.converged and rep.residual_norm < 1e-5:
            return g, rep, cross
        failures.append((cross, "NOT_CONVERGED"))
    raise NoConvergence("no seed in the scan converged", degree=degree,
                        tried=len(failures))


def validate_schedule(schedule):
    sched = [int(d) for d in schedule]
    if not sched:
        raise InvalidSchedule("degree schedule is empty")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise InvalidSchedule("degree schedule must be strictly increasing", schedule=sched)
    if sched[0] > 6 or sched[0] < 2:
        raise InvalidSchedule("first degree must lie in [2, 6]", schedule=sched)
    return sched


def degree_continuation(schedule, seed_params=None, tol=None, domain=DEFAULT_DOMAIN,
                        gate_final=True):
    """Solve along increasing degrees, each solution seeding the next.

    The lowest degree starts from the seed scan.  Intermediate degrees are
    not gated: their residual is limited by truncation, which is exactly
    what the continuation is meant to shrink.  The last degree is gated
    unless ``gate_final`` is false.  Errors are re-raised carrying the
    failing degree.
    """
    sched = validate_schedule(schedule)
    tol = TOL if tol is None else tol
    path = []
    g = None
    for k, d in enumerate(sched):
        gate = gate_final and k == len(sched) - 1
        try:
            if g is None:
                g, rep, _ = solve_from_seed(d, seed_params, tol, domain)
                if gate:
                    g, rep = fixed_point_solve(g, d, tol, gate=True)
            else:
                g, rep = fixed_point_solve(g, d, tol, gate=gate)
        except TwistRenormError as exc:
            ctx = {**exc.context, "degree": d}
            raise type(exc)(exc.args[0] if exc.args else "", **ctx) from exc
        path.append((g, rep))
    return path
