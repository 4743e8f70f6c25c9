"""Classify orbits: iterate, detect a cycle, polish it, grade stability.

The pipeline behind ``classify_orbit``:

    iterate -> sliding-window period detection -> Newton polish of
    F^p(u) = u -> spectral radius of the cycle monodromy -> verdict.

Closed forms first, where every number is checkable by hand, then a
parabolic period map where they are not.
"""

import numpy as np

from monotone_lab import (
    ClassifyBudget,
    classify_orbit,
    cubic_map,
    logistic_map,
    parabolic_system,
)

# ------------------------------------------------ cubic interval map

# u + 0.1 u (1 - u^2): fixed points 0 and +-1, derivative 1.1 at 0
# and 0.8 at the pair, so 0 repels and +-1 attract
cubic = cubic_map()
print("cubic interval map, fixed points with known multipliers")
for x0 in (0.5, -0.5, 0.0):
    c = classify_orbit(cubic, x0)
    rec = c.cycle
    print(f"  from {x0:+.2f}: {c.verdict:14s} point {rec.points[0][0]:+.6f} "
          f"period {rec.period}  rho {rec.rho:.6f}  ({rec.rho_method}, "
          f"{c.iterations_used} iterations)")

# ----------------------------------------------- logistic two-cycle

# r=3.2 sits past the first period doubling; the closed form for the
# two-cycle multiplier is 4 + 2r - r^2 = 0.16
logi = logistic_map()
c = classify_orbit(logi, 0.3)
rec = c.cycle
r = 3.2
pts = np.sort(rec.points[:, 0])
closed = np.sort([(r + 1 + np.sqrt((r - 3) * (r + 1))) / (2 * r),
                  (r + 1 - np.sqrt((r - 3) * (r + 1))) / (2 * r)])
print("\nlogistic map, r=3.2")
print(f"  verdict {c.verdict}, minimal period {rec.period}")
print(f"  cycle points   {pts[0]:.12f}  {pts[1]:.12f}")
print(f"  closed form    {closed[0]:.12f}  {closed[1]:.12f}")
print(f"  multiplier {rec.rho:.12f}  vs 4 + 2r - r^2 = {4 + 2 * r - r * r:.12f}")
print(f"  Newton residual {rec.residual:.2e} after {rec.newton_iterations} steps")

# ------------------------------------------- parabolic period map

# Dirichlet cubic at strength 15: the orbit settles on a fixed profile
# of the period map, a time-periodic solution of the underlying problem
system = parabolic_system("dirichlet", 31, 15.0)
budget = ClassifyBudget(max_iterations=400, p_max=8)
xs = system.grid.nodes()
c = classify_orbit(system, 0.4 * np.sin(np.pi * xs), budget)
rec = c.cycle
print("\nDirichlet cubic period map, n=31, strength 15")
print(f"  verdict {c.verdict}, period {rec.period}, rho {rec.rho:.6f} "
      f"({rec.rho_method})")
print(f"  profile sup {np.max(np.abs(rec.points[0])):.6f}, "
      f"residual {rec.residual:.2e}")
print(f"  diagnostics: {c.diagnostics}")

# starting below zero lands on the mirrored profile
c2 = classify_orbit(system, -0.4 * np.sin(np.pi * xs), budget)
gap = np.max(np.abs(c2.cycle.points[0] + rec.points[0]))
print(f"  from the mirrored start: sup|u_down + u_up| = {gap:.2e}")
