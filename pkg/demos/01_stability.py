# %% [markdown]
# Exact stability of the truncated embedding.
#
# The linearization of an order-N truncation at a fixed point x* depends only
# on alpha = 1 - f'(x*). Hurwitz minors are computed in exact rational
# arithmetic, so the verdict never depends on round-off.

# %%
from fractions import Fraction

from mapflow import Logistic, char_poly, deriv, fixed_points, hurwitz_sequence, roots, stable_alpha_window

# %%
for order in range(1, 7):
    window = stable_alpha_window(order)
    if window is None:
        print(f"N={order}: no stable alpha in [-100, 100]")
    else:
        print(f"N={order}: stable for alpha in ({window[0]:.4g}, {window[1]:.4g})")

# %% [markdown]
# Orders 1 and 2 are stable for every alpha > 0 (the upper end is the search
# limit). N = 3 and N = 4 have bounded windows. From N = 5 on, a minor is
# negative for every alpha.

# %%
cp = char_poly(5, Fraction(5, 3))
rep = hurwitz_sequence(cp)
print(rep.verdict.value, [str(u) for u in rep.u_sequence])
print("sign changes:", rep.sign_changes, "roots:", roots(cp))

# %%
f = Logistic(3.2)
for x in fixed_points(f):
    alpha = Fraction(1) - Fraction(float(deriv(f, x))).limit_denominator(10**12)
    verdicts = {n: hurwitz_sequence(char_poly(n, alpha)).verdict.value for n in range(1, 7)}
    print(f"x*={x:.4f} alpha={float(alpha):.3f}", verdicts)
