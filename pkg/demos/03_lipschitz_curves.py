"""Lipschitz curves through the Cantor set by iterated refinement.

Run with ``python3 demos/03_lipschitz_curves.py``.
"""
# %% [markdown]
# Each refinement keeps the two endpoints and puts ``psi_0`` and ``psi_1``
# copies of the current curve on parameter intervals of length ``theta``,
# joined by three straight connectors of length ``(1 - 2 theta) / 3``.
# The copies contract space by ``theta`` and parameter by ``theta``, so
# their slopes never exceed the previous Lipschitz constant.

# %%
from twistrenorm.config import THETA
from twistrenorm.curve import (curve_sequence, diagonal_seed, hausdorff_to_cloud, piece_slopes,
                               sequence_summary)
from twistrenorm.ifs import cloud_points
from twistrenorm.pipeline import prepare, solve

sc = prepare(solve()[0])
seed = diagonal_seed(sc.region, metric=sc.metric)
curves = curve_sequence(seed, sc.scal, sc.m, 12)
summ = sequence_summary(curves)

# %%
print(f"{'k':>3} {'vertices':>9} {'L_k':>9} {'d_k':>10} {'ratio':>7} {'to cloud':>10} {'bound':>10}")
for k, c in enumerate(curves):
    d = summ["sup_distance"][k - 1] if k else float("nan")
    r = summ["ratios"][k - 2] if k >= 2 else float("nan")
    h = hausdorff_to_cloud(c, cloud_points(sc.scal, sc.m, k))
    print(f"{k:3d} {len(c):9d} {c.lip:9.4f} {d:10.3e} {r:7.4f} {h:10.3e} "
          f"{THETA ** k * sc.diam:10.3e}")

# %% [markdown]
# The five pieces of the last refinement: the connectors carry the
# Lipschitz constant, and both copies stay below it.

# %%
for name, value in piece_slopes(curves[-1], len(curves[-2])).items():
    print(f"{name:>17}: {value:.4f}")
