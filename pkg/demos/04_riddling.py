# %% [markdown]
# Riddled basin boundaries in the (nu, lambda) plane.
#
# Every grid point is integrated from the same initial state and labelled
# (fixed point, periodic with its period, chaotic, or escaping). The
# boundary density counts the cells whose corners disagree at successively
# finer resolutions. A smooth boundary halves that fraction with each
# level; a riddled one decays more slowly.

# %%
from dataclasses import replace

import numpy as np

from mapflow import Axis, boundary_density, decrease_factor, label_grid, plane_scan
from mapflow.scenarios import plane_plan, straight_boundary

# %%
plan = replace(plane_plan(), axis1=Axis("nu", 0.53, 0.75, 65), axis2=Axis("lambda", 1.10, 1.40, 65))
grid = plane_scan(plan)
labels = label_grid(grid)
names, counts = np.unique(labels, return_counts=True)
print(dict(zip(names.tolist(), counts.tolist())))

# %%
fractions = boundary_density(labels, 6)
print("fractions:", np.round(fractions, 4))
print(f"decrease factor, levels 2..6: {decrease_factor(fractions[1:]):.3f}")

# %% [markdown]
# The same measurement on a synthetic straight boundary, for comparison.

# %%
line = boundary_density(straight_boundary(65, 0.37, 0.3), 6)
print(f"straight line factor: {decrease_factor(line[1:]):.3f}")
