"""The fixed-point map, its tip and the nested boxes around its Cantor set.

Run with ``python3 demos/02_map_and_microscope.py``.
"""
# %%
import numpy as np

from twistrenorm.config import THETA
from twistrenorm.ifs import box_levels, cloud_points, contraction, odometer_check
from twistrenorm.pipeline import prepare, solve
from twistrenorm.twistmap import ImplicitMap

gen, rep, _ = solve()
F = ImplicitMap(gen)

# %% [markdown]
# The normalization ``s(1, 0) = 0`` sends the origin to ``x = 1``, and
# ``ds/dx(1, 0) = 1`` makes the twist there exactly ``-1``.

# %%
print("F(0, 0) =", F.forward(0.0, 0.0))
print("DF(0, 0) =\n", F.differential(0.0, 0.0))
print("det DF(0, 0) =", np.linalg.det(F.differential(0.0, 0.0)))

# %% [markdown]
# Moving to the frame where the fixed point on the symmetry line sits at the
# origin, ``psi_0(x, y) = (lam x + p, mu y)`` and ``psi_1 = F o psi_0``.  The
# tip is the fixed point of ``psi_0``.

# %%
sc = prepare(gen)
print(f"\nlam = {sc.scal.lam:.6f}, mu = {sc.scal.mu:.6f}, p = {sc.scal.p:.6f}, "
      f"tip = ({sc.scal.c:.6f}, 0)")
print(f"base region x in [{sc.region.lo[0]:.4f}, {sc.region.hi[0]:.4f}], "
      f"y in [{sc.region.lo[1]:.4f}, {sc.region.hi[1]:.4f}]")

# %% [markdown]
# In the Euclidean norm ``D psi_1`` is not a 0.272-contraction on this box.
# Weighting the y-coordinate by ``1/kappa`` fixes that.

# %%
c = contraction(sc.scal, sc.m, sc.region.sample(), sc.metric)
print(f"\n|D psi_0| = {c['psi0']:.5f}, |D psi_1| = {c['psi1']:.5f} (kappa = {c['kappa']:.4f}), "
      f"Euclidean |D psi_1| = {c['psi1_euclidean']:.5f}")

# %%
levels = box_levels(sc.scal, sc.m, 10, sc.region.sample())
print(f"\n{'n':>3} {'boxes':>6} {'max diam':>10} {'theta^n diam':>13}")
for n in range(0, 11, 2):
    worst = max(sc.metric.diameter(b.hull) for b in levels[n])
    print(f"{n:3d} {len(levels[n]):6d} {worst:10.3e} {THETA ** n * sc.diam:13.3e}")

# %% [markdown]
# ``F`` permutes the level-``n`` boxes like adding one (with carry) to the
# binary address: the dynamics on the Cantor set is the adding machine.

# %%
sigma = odometer_check(sc.scal, sc.m, 3, levels[3])
for k in range(8):
    print(f"{levels[3][k].word} -> {levels[3][sigma[k]].word}")

pts = cloud_points(sc.scal, sc.m, 12)
print(f"\nlevel-12 cloud: {len(pts)} points, spread {np.ptp(pts, axis=0)}")
