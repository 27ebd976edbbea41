# %% [markdown]
# Bifurcation diagram of the scaled cubic along nu = 2/3.
#
# Each lambda is started from the final state of its neighbour, so the sweep
# follows one attractor until it is lost. Peaks of X after the transient are
# the points of the diagram, written to bifurcation.svg.

# %%
from collections import Counter
from pathlib import Path

from mapflow import Axis, ScaledCubicSystem, SweepPlan, bifurcation_sweep
from mapflow.io import bifurcation_svg

# %%
plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 0.2, 1.4, 241))
records = bifurcation_sweep(plan)

# %%
last = None
for r in records:
    label = str(r.cls)
    if label != last:
        print(f"lambda={r.params['lambda']:.3f}: {label}")
        last = label
print(Counter(str(r.cls) for r in records).most_common())

# %%
out = Path(__file__).with_name("bifurcation.svg")
out.write_text(bifurcation_svg(records, "lambda"))
print("wrote", out)
