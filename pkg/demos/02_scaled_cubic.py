# %% [markdown]
# The cubic truncation of the logistic map in scaled form.
#
# With tau = 3t and X = (2p/9) x the order-3 truncation of p x (1 - x)
# becomes X''' + X'' + nu X' - lambda X + X^2 = 0 with nu = 2/3 and
# lambda = 2(p - 1)/9. Both forms are integrated here and compared on the
# same time grid.

# %%
import numpy as np

from mapflow import (
    IntegratorConfig,
    Logistic,
    RK45Adaptive,
    classify,
    integrate,
    scaled_from_unscaled,
    to_scaled,
    truncate,
)

# %%
p = 4.2
x0 = np.array([0.3, 0.0, 0.0])
cfg = IntegratorConfig(RK45Adaptive(), t_end=10.0, sample_stride=0.05)
orig = integrate(truncate(Logistic(p), 3).field(), x0, cfg)

scaled = to_scaled(p)
cfg_tau = IntegratorConfig(RK45Adaptive(), t_end=30.0, sample_stride=0.15)
tau = integrate(scaled.field(), scaled_from_unscaled(x0, p), cfg_tau)

err = np.abs(scaled_from_unscaled(orig.states, p) - tau.states).max()
print(f"nu={scaled.nu:.4f} lambda={scaled.lam:.4f}; max |X(3t) - (2p/9) x(t)| = {err:.2e}")

# %% [markdown]
# Long-time behaviour along the nu = 2/3 line, started near X = 0.

# %%
for lam in (0.3, 0.8, 1.1, 1.2, 1.4):
    fld = to_scaled(1.0 + 4.5 * lam).field()
    print(f"lambda={lam}: {classify(fld, (0.1, 0.0, 0.0))}")
