"""Why no invariant direction field along the Cantor set can be continuous at the tip.

Run with ``python3 demos/04_direction_clash.py``.
"""
# %% [markdown]
# Near the tip, ``F**(2**n) = psi_0**n o F o psi_0**(-n)``.  Pulling any
# direction back by ``psi_0**n`` makes it almost vertical, because
# ``|mu / lam| < 1``.  The negative twist then tips the vertical to one side
# under ``DF`` and to the other side under ``DF**-1``.  Pushing forward again
# flattens both towards the horizontal.  So the points ``F**(+-2**n)(tip)``,
# which converge to the tip, need directions on opposite sides of the
# vertical.

# %%
import numpy as np

from twistrenorm.ifs import cloud_points
from twistrenorm.obstruction import Direction, clash_experiment, ratchet_step, tip_derivative_chain, twist_bound
from twistrenorm.pipeline import prepare, solve

gen = solve()[0]
sc = prepare(gen)

# %% [markdown]
# The sign of ``dX/dx`` at the tip, checked through a chain of identities
# obtained by differentiating the fixed-point and midpoint equations.

# %%
chain = tip_derivative_chain(gen)
for name, rec in chain.identities.items():
    print(f"{name:>9}: {rec['lhs']:+.12f} vs {rec['rhs']:+.12f}  (rel. err {rec['relative_error']:.1e})")

# %% [markdown]
# Cones: ``DF`` sends the vertical cone into the horizontal cone, flipping
# the upward half to the left half.  ``DF**-1`` keeps it on the right.

# %%
pts = cloud_points(sc.scal, sc.m, 8)
cone = twist_bound(sc.m, pts)
print(f"\nmax dX/dy = {cone.twist_bound:.4f}, vertical cone {np.rad2deg(cone.half_angle):.2f} deg, "
      f"horizontal cone {np.rad2deg(cone.horizontal_half_angle):.2f} deg")
up = Direction.from_degrees(90)
print("DF:    up ->", ratchet_step(sc.m, cone, sc.scal.tip, up)[2])
print("DF^-1: up ->", ratchet_step(sc.m, cone, sc.scal.tip, up, inverse=True)[2])

# %%
rep = clash_experiment(sc.m, sc.scal, 20, Direction.from_degrees(45), sc.diam, sc.metric)
print(f"\n{'n':>3} {'plus':>8} {'side':>6} {'minus':>8} {'side':>6} {'dist':>10} {'bound':>10}")
for s in rep.steps:
    print(f"{s.n:3d} {np.rad2deg(s.plus.angle):8.3f} {s.plus.side:>6} "
          f"{np.rad2deg(s.minus.angle):8.3f} {s.minus.side:>6} "
          f"{max(s.plus_distance, s.minus_distance):10.2e} {s.bound:10.2e}")
print(f"\nopposite sides within 5 deg of horizontal from n = {rep.N} on; "
      f"monotone: {rep.monotone_from_N}")
