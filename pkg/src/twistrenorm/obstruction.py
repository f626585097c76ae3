"""Tip derivatives, cone fields and the direction-field clash.

Directions are unoriented lines, stored by their angle in ``(-pi/2, pi/2]``
from the positive x-axis.  A direction that is neither horizontal nor
vertical lies on the ``right`` or ``left`` of the vertical: the sign of its
x-component once it is oriented to point upwards.

The clash experiment pulls a direction at the tip back by ``psi_0**n``,
where it becomes nearly vertical.  It then pushes it through ``DF`` and
``DF**-1``, which tips it towards the horizontal on opposite sides, and
finally transports it forward by ``psi_0**n``.  By the identity

    F**(+-2**n) = psi_0**n o F**(+-1) o psi_0**(-n)   near the tip,

the results are the directions an invariant direction field would need at
``F**(+-2**n)(tip)``.  Both points converge to the tip.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .config import THETA, TOL
from .errors import ChainViolation, ConeEscape, TwistViolation
from .series import evaluate, partial
from .twistmap import OK, T, ImplicitMap

HALF_PI = 0.5 * np.pi


# directions -----------------------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """Unoriented line direction with its side of the vertical."""

    angle: float
    side: str

    def __post_init__(self):
        a = float(self.angle)
        if not -HALF_PI < a <= HALF_PI:
            raise ValueError(f"angle {a} outside (-pi/2, pi/2]")
        if self.side != _side_of_angle(a):
            raise ValueError(f"side {self.side!r} inconsistent with angle {a}")

    @classmethod
    def from_vector(cls, v):
        u, w = float(v[0]), float(v[1])
        if u == 0.0 and w == 0.0:
            raise ValueError("zero vector has no direction")
        if w < 0.0 or (w == 0.0 and u < 0.0):
            u, w = -u, -w
        # atan2 of the upward-oriented vector avoids tan overflow near vertical
        a = float(np.arctan2(w, u))
        if a > HALF_PI:
            a -= np.pi
        return cls(a, _side_of_angle(a))

    @classmethod
    def from_angle(cls, angle):
        return cls.from_vector((np.cos(angle), np.sin(angle)))

    @classmethod
    def from_degrees(cls, deg):
        if float(deg) % 180.0 == 90.0:
            return cls(HALF_PI, "vertical")
        return cls.from_angle(np.deg2rad(deg))

    def vector(self):
        """Unit vector pointing upwards (or to the right when horizontal)."""
        if self.side == "vertical":
            return np.array([0.0, 1.0])
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def from_horizontal(self):
        return abs(self.angle)

    @property
    def from_vertical(self):
        return HALF_PI - abs(self.angle)

    def to_dict(self):
        return {"angle": self.angle, "degrees": float(np.rad2deg(self.angle)),
                "side": self.side}


def _side_of_angle(a):
    if a == HALF_PI:
        return "vertical"
    if a == 0.0:
        return "horizontal"
    return "right" if a > 0.0 else "left"


def horizontal_half(v):
    """``+`` if the vector points right, ``-`` if left."""
    return "+" if v[0] > 0 else "-"


def vertical_half(v):
    return "+" if v[1] > 0 else "-"


# derivative chain at the tip -----------------------------------------------------------

@dataclass(frozen=True)
class TipChain:
    dXdx_tip: float
    s2_10: float
    z2_10: float
    s2_sum: float
    s1_lam1: float
    identities: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def tip_derivative_chain(gen, tol=None):
    """Chain of identities giving the sign of ``dX/dx`` at the tip.

    In the untranslated frame the tip is the origin and ``F(0, 0) = (1, .)``,
    so ``dX/dx(tip) = -s_2(1, 0) / s_1(1, 0)``.  Differentiating the midpoint
    and fixed-point equations gives

        s_2(1, 0)               = z_2(1, 0) / (mu - lam)
        z_2(1, 0)               = -lam s_1(0, 1) / (s_2(lam, 1) + s_2(0, 1))
        s_2(lam, 1) + s_2(0, 1) = -(lam / mu) s_1(lam, 1)

    Each identity is checked with both sides evaluated independently and
    :class:`ChainViolation` names the first one off by more than
    ``TOL.chain_relative``.  The sign conclusions must hold with margin
    ``TOL.sign_margin``.
    """
    tol = TOL if tol is None else tol
    s, z, lam, mu = gen.s, gen.z, gen.lam, gen.mu
    s1, s2, z2 = partial(s, 0), partial(s, 1), partial(z, 1)
    s2_10 = evaluate(s2, 1.0, 0.0)
    z2_10 = evaluate(z2, 1.0, 0.0)
    s2_sum = evaluate(s2, lam, 1.0) + evaluate(s2, 0.0, 1.0)
    s1_lam1 = evaluate(s1, lam, 1.0)
    dXdx_formula = -s2_10 / evaluate(s1, 1.0, 0.0)
    dXdx_map = float(ImplicitMap(s).differential(0.0, 0.0)[0, 0])
    checks = [
        ("dXdx_tip", dXdx_map, dXdx_formula),
        ("s2_10", s2_10, z2_10 / (mu - lam)),
        ("z2_10", z2_10, -lam * evaluate(s1, 0.0, 1.0) / s2_sum),
        ("s2_sum", s2_sum, -(lam / mu) * s1_lam1),
    ]
    identities = {}
    for name, lhs, rhs in checks:
        err = _rel(lhs, rhs)
        identities[name] = {"lhs": lhs, "rhs": rhs, "relative_error": err}
        if err > tol.chain_relative:
            raise ChainViolation(f"identity for {name} fails", lhs=lhs, rhs=rhs,
                                 relative_error=err)
    signs = [("s1_lam1", s1_lam1, 1), ("s2_sum", s2_sum, 1), ("z2_10", z2_10, 1),
             ("s2_10", s2_10, 1), ("dXdx_tip", dXdx_map, -1)]
    for name, val, sign in signs:
        if sign * val < tol.sign_margin:
            raise ChainViolation(f"sign conclusion for {name} fails", value=val)
    return TipChain(dXdx_map, s2_10, z2_10, s2_sum, s1_lam1, identities)


# cones ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeParams:
    """Twist bound and cone openings.

    ``half_angle`` opens the vertical cone about the vertical axis and
    ``horizontal_half_angle`` the horizontal cone about the horizontal axis;
    the cones are disjoint.
    """

    twist_bound: float
    half_angle: float
    horizontal_half_angle: float

    def __post_init__(self):
        if not self.twist_bound < 0.0:
            raise ValueError("twist bound must be negative")
        for a in (self.half_angle, self.horizontal_half_angle):
            if not 0.0 < a < HALF_PI:
                raise ValueError(f"cone half angle {a} outside (0, pi/2)")
        if self.half_angle + self.horizontal_half_angle >= HALF_PI:
            raise ValueError("vertical and horizontal cones overlap")

    def in_vertical(self, d):
        return d.from_vertical <= self.half_angle

    def in_horizontal(self, d):
        return d.from_horizontal <= self.horizontal_half_angle

    def to_dict(self):
        return asdict(self)


def _from_horizontal(w):
    """Angle between the line of ``w`` (last axis) and the horizontal."""
    return np.arctan2(np.abs(w[..., 1]), np.abs(w[..., 0]))


def _image_from_horizontal(J, phi):
    """Angle from horizontal of ``J`` applied to the direction ``phi`` off vertical."""
    return _from_horizontal(J @ np.array([np.sin(phi), np.cos(phi)]))


def twist_bound(m, samples, tol=None):
    """Cone parameters fitted over ``samples``.

    ``a`` is the largest sampled ``dX/dy``, which must be negative.  The
    horizontal opening is the largest sampled angle of ``DF`` applied to
    the vertical, widened by ``TOL.cone_margin``.  The vertical opening is
    then the largest angle whose image stays inside that horizontal cone at
    every sample, capped so the two cones stay disjoint.
    """
    tol = TOL if tol is None else tol
    pts = np.asarray(samples, dtype=float).reshape(-1, 2)
    J, st = m.differential_many(pts[:, 0], pts[:, 1])
    if np.any(st != OK):
        raise TwistViolation("differential undefined at a sample point",
                             index=int(np.flatnonzero(st != OK)[0]))
    twist = J[:, 0, 1]
    bad = np.flatnonzero(~(twist < 0.0))
    if bad.size:
        k = int(bad[0])
        raise TwistViolation("dX/dy is not negative", point=tuple(map(float, pts[k])),
                             value=float(twist[k]))
    a = float(twist.max())
    alpha_h = (1.0 + tol.cone_margin) * float(_image_from_horizontal(J, 0.0).max())
    if not alpha_h < HALF_PI:
        raise ConeEscape("image of the vertical is too close to vertical", angle=alpha_h)

    def ok(phi):
        return all(np.all(_image_from_horizontal(J, f) <= alpha_h)
                   for f in np.linspace(-phi, phi, 17))

    lo, hi = 0.0, HALF_PI - alpha_h
    if ok(hi * (1 - 1e-9)):
        lo = hi * (1 - 1e-9)
    else:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    alpha_v = min(lo, (HALF_PI - alpha_h) * (1 - 1e-9))
    return ConeParams(a, float(alpha_v), float(alpha_h))


def ratchet_step(m, cone, p, d, oriented_half="+", inverse=False):
    """Push the oriented direction ``d`` at ``p`` through ``DF`` (or ``DF**-1``).

    ``oriented_half`` picks the upward (``+``) or downward (``-``) half of
    the vertical cone.  Returns ``(image point, image direction, horizontal
    half)``; the half is ``+`` for right-pointing images.  For the negative
    twist, ``DF`` flips the half and ``DF**-1`` keeps it.  Raises
    :class:`ConeEscape` if ``d`` is outside the vertical cone or its image
    outside the horizontal one.
    """
    if not cone.in_vertical(d):
        raise ConeEscape("input direction outside the vertical cone", angle=d.angle)
    v = d.vector() * (1.0 if oriented_half == "+" else -1.0)
    if inverse:
        q = m.backward(*p)
        J = m.inverse_differential(*p)
    else:
        q = m.forward(*p)
        J = m.differential(*p)
    w = J @ v
    out = Direction.from_vector(w)
    if not cone.in_horizontal(out):
        raise ConeEscape("image direction outside the horizontal cone", angle=out.angle)
    return q, out, horizontal_half(w)


# clash experiment ------------------------------------------------------------------------

def pullback_direction(scal, n, d):
    """Vector of ``D(psi_0**-n)`` applied to ``d``, rescaled to unit length.

    Computed as ``((mu / lam)**n cos, sin)`` so that it never overflows.
    """
    v = d.vector()
    r = (scal.mu / scal.lam) ** n
    w = np.array([r * v[0], v[1]])
    return w / np.linalg.norm(w)


def pushforward_direction(scal, n, w):
    """Vector of ``D(psi_0**n)`` applied to ``w``, unit length."""
    r = (scal.mu / scal.lam) ** n
    u = np.array([w[0], r * w[1]])
    return u / np.linalg.norm(u)


@dataclass(frozen=True)
class ClashStep:
    n: int
    plus: Direction
    minus: Direction
    plus_point: tuple
    minus_point: tuple
    plus_distance: float
    minus_distance: float
    bound: float

    @property
    def opposite(self):
        sides = {self.plus.side, self.minus.side}
        return sides == {"left", "right"}

    def near_horizontal(self, deg):
        lim = np.deg2rad(deg)
        return self.plus.from_horizontal <= lim and self.minus.from_horizontal <= lim

    def close(self):
        return self.plus_distance <= self.bound and self.minus_distance <= self.bound

    def to_dict(self):
        return {"n": self.n, "plus": self.plus.to_dict(), "minus": self.minus.to_dict(),
                "plus_point": list(self.plus_point), "minus_point": list(self.minus_point),
                "plus_distance": self.plus_distance, "minus_distance": self.minus_distance,
                "bound": self.bound, "opposite_sides": self.opposite}


@dataclass(frozen=True)
class ClashReport:
    seed: Direction
    first_image: Direction | None
    steps: tuple
    N: int | None
    monotone_from_N: bool
    sides_stable_from_N: bool
    angle_tol_deg: float

    def to_dict(self):
        return {"seed": self.seed.to_dict(),
                "first_image": None if self.first_image is None else self.first_image.to_dict(),
                "N": self.N, "monotone_from_N": self.monotone_from_N,
                "sides_stable_from_N": self.sides_stable_from_N,
                "angle_tol_deg": self.angle_tol_deg,
                "steps": [s.to_dict() for s in self.steps]}


def clash_step(m, scal, n, d, diam):
    """The two transported directions and orbit points at depth ``n``."""
    tip = scal.tip
    v = pullback_direction(scal, n, d)
    J = m.differential(*tip)
    Jinv = T @ m.differential(tip[0], -tip[1]) @ T
    wp = pushforward_direction(scal, n, J @ v)
    wm = pushforward_direction(scal, n, Jinv @ v)
    # orbit points through the conjugacy, never by 2**n iterations
    pts = []
    for q in (m.forward(*tip), m.backward(*tip)):
        q = np.array(q)
        for _ in range(n):
            q = np.array([scal.lam * q[0] + scal.p, scal.mu * q[1]])
        pts.append(q)
    dist = [float(diam[1].dist(q, tip)) for q in pts]
    return ClashStep(n, Direction.from_vector(wp), Direction.from_vector(wm),
                     tuple(map(float, pts[0])), tuple(map(float, pts[1])),
                     dist[0], dist[1], float(THETA ** n * diam[0]))


def clash_experiment(m, scal, max_depth, d_tip, diam, metric, tol=None):
    """Run the clash for ``n = 1..max_depth``.

    ``diam`` is the diameter of the base region in ``metric``; orbit
    distances are compared with ``theta**n * diam``.  A horizontal seed is
    first pushed through ``DF`` at the tip, which sends it to the left of the
    vertical because ``dX/dx < 0`` there.  That image then seeds the clash.

    ``N`` is the smallest depth from which on, up to ``max_depth``, the two
    directions lie on opposite sides within ``TOL.clash_angle_deg`` of
    horizontal and both orbit points are within the bound.
    """
    tol = TOL if tol is None else tol
    first = None
    seed = d_tip
    if d_tip.side == "horizontal":
        first = Direction.from_vector(m.differential(*scal.tip) @ d_tip.vector())
        seed = first
    steps = tuple(clash_step(m, scal, n, seed, (diam, metric))
                  for n in range(1, int(max_depth) + 1))
    good = [s.opposite and s.near_horizontal(tol.clash_angle_deg) and s.close()
            for s in steps]
    N = None
    for k in range(len(steps) - 1, -1, -1):
        if not good[k]:
            break
        N = steps[k].n
    monotone = stable = False
    if N is not None:
        tail = [s for s in steps if s.n >= N]
        ang = [max(s.plus.from_horizontal, s.minus.from_horizontal) for s in tail]
        monotone = all(b < a or b == 0.0 for a, b in zip(ang, ang[1:]))
        pattern = [(s.plus.side, s.minus.side) for s in tail]
        stable = all(
            (p == pattern[0]) if (tail[i].n - tail[0].n) % 2 == 0 else
            (p == pattern[0][::-1])
            for i, p in enumerate(pattern))
    return ClashReport(d_tip, first, steps, N, monotone, stable, tol.clash_angle_deg)
