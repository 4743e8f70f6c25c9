"""Probe the exceptional set along a line, and the two one-sided limits.

Two finer predictions about where convergence to a stable cycle can
fail for a strongly monotone map:

* along any straight line of initial states the failures form at most a
  countable set, so a uniform scan should see isolated bad parameters
  whose count does not grow under refinement;
* at a failure point x the one-sided limits still exist: orbits started
  just above x share a single limit set omega_plus(x), orbits just
  below share omega_minus(x), and at least one of them stays separated
  from x itself.

The cubic map makes both visible: the basin boundary is the single
repeller at 0.
"""

import numpy as np

from monotone_lab import (
    cubic_map,
    line_probe,
    line_scan,
    omega_plus_probe,
    separation_probe,
)

cubic = cubic_map()

# ------------------------------------------------------- line scan

# the segment crosses u=0 at s=0.505 and nowhere else; every other
# parameter lands in the basin of -1 or +1
sampler = line_scan(base=[-0.505], direction=[1.0], s_min=0.0, s_max=1.01,
                    resolution=101)
rep = line_probe(cubic, sampler)
print("line scan through the basin boundary, 101 parameters")
print(f"  stable verdicts {rep.stable_count}/101")
for entry in rep.bad:
    print(f"  bad parameter: s = {entry['s']:.6f} -> {entry['verdict']}")

fine = line_probe(cubic, line_scan([-0.505], [1.0], 0.0, 1.01, resolution=201))
print(f"  at doubled resolution: {len(fine.bad)} bad of 201, "
      f"s = {[round(e['s'], 6) for e in fine.bad]}")
print("  refinement does not grow the bad set: consistent with a")
print("  countable exceptional set on every line")

# ------------------------------------------------- one-sided limits

# at the repeller the two-sided limit does not exist, but each side has
# a clean limit: +1 from above, -1 from below; epsilon is swept over
# three decades to check stabilization
probe = omega_plus_probe(cubic, 0.0)
print("\none-sided limit probe at the repeller u=0")
print(f"  base verdict {probe.base_verdict}")
print(f"  upper side: membership {probe.upper.membership}, "
      f"limit {np.ravel(probe.upper.limit)}, consistent over eps {probe.eps_values}")
print(f"  lower side: membership {probe.lower.membership}, "
      f"limit {np.ravel(probe.lower.limit)}")
print(f"  distance from omega(0) to the upper limit "
      f"{probe.upper.distance_to_base:.3f}")

# the same probe at the attractor finds nothing: nearby orbits share
# the limit of the point itself
settled = omega_plus_probe(cubic, 1.0)
print(f"  at the attractor u=1: upper membership {settled.upper.membership}, "
      f"distance {settled.upper.distance_to_base:.2e}")

# ------------------------------------------------ separation probe

# the dichotomy at an unstable point: perturbed orbits either collapse
# back or hold a gap; here they hold a gap of order 1
gap = separation_probe(cubic, 0.0)
print("\nseparation probe")
print(f"  at u=0: separation estimate {gap:.4f}  (orbits flee to +-1)")
gap = separation_probe(cubic, 1.0)
print(f"  at u=1: separation estimate {gap:.2e}  (orbits collapse back)")
