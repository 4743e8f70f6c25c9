"""Group actions on discretized states and symmetry of limit sets.

Actions are node permutations, so they are exactly order preserving and
norm preserving: the cyclic rotations of the ring lattice (the discrete
stand-in for rotations of a circle), the mirror flip of the interval, and
the trivial group. Equivariance of a system under an action is a checkable
property, not an assumption; classification of limits composes
classify_orbit with a per-cycle-point symmetry verdict.

Symmetry is judged at cycle points only. Transients of an equivariant
system are generally asymmetric and say nothing about the limit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, GridError
from .grids import Grid
from .order import PropertyReport, StateVector, draw_box_state
from .asymptotics import ClassifyBudget, classify_orbit
from .systems import evaluate

ACTION_KINDS = ("ring_rotation", "interval_reflection", "trivial")


@dataclass(eq=False)
class GroupAction:
    """A finite group acting on grid nodes by permutations.

    generators holds index permutations: element g acts by u -> u[g].
    Invariance under every generator is equivalent to invariance under the
    generated group, which for the ring rotation is the full cyclic group.
    """

    kind: str
    grid: Grid
    generators: tuple

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        checked = []
        for perm in self.generators:
            arr = np.asarray(perm, dtype=int)
            if arr.shape != (self.grid.n,) or not np.array_equal(
                np.sort(arr), np.arange(self.grid.n)
            ):
                raise ValueError("generators must be permutations of the grid nodes")
            checked.append(arr)
        self.generators = tuple(checked)

    def elements(self):
        """All group elements, generated by closure from the generators."""
        identity = np.arange(self.grid.n)
        seen = {tuple(identity)}
        out = [identity]
        frontier = [identity]
        while frontier:
            nxt = []
            for g in frontier:
                for h in self.generators:
                    # (g then h) acts by u -> (u[g])[h] = u[g[h]]
                    comp = g[h]
                    key = tuple(comp)
                    if key not in seen:
                        seen.add(key)
                        out.append(comp)
                        nxt.append(comp)
            frontier = nxt
        return out


def ring_rotation(grid):
    """Full cyclic rotation group of a ring grid, generated by a one-node shift."""
    if grid.kind != "ring":
        raise GridError("ring_rotation acts on ring grids only")
    shift = (np.arange(grid.n) - 1) % grid.n  # u[shift] == roll(u, 1)
    return GroupAction("ring_rotation", grid, (shift,))


def interval_reflection(grid):
    """Mirror flip of an interval grid about its midpoint."""
    if grid.kind not in ("dirichlet", "neumann"):
        raise GridError("interval_reflection acts on interval grids only")
    return GroupAction("interval_reflection", grid, (np.arange(grid.n)[::-1],))


def trivial_action(grid):
    return GroupAction("trivial", grid, (np.arange(grid.n),))


def apply_action(action, g, u):
    """Act with group element g (an index permutation) on a state."""
    perm = np.asarray(g, dtype=int)
    if perm.shape != (action.grid.n,):
        raise DimensionMismatchError("group element does not fit the action grid")
    if isinstance(u, StateVector):
        if u.grid != action.grid:
            raise DimensionMismatchError("state grid does not match the action grid")
        return u.with_values(u.values[perm])
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.shape != (action.grid.n,):
        raise DimensionMismatchError("state does not fit the action grid")
    return arr[perm]


@dataclass(eq=False)
class SymmetryVerdict:
    """Deviation of one state from invariance under an action."""

    deviation: float
    symmetric: bool
    per_generator: list
    tol_sym: float

    def to_json(self):
        return {
            "deviation": self.deviation,
            "symmetric": self.symmetric,
            "per_generator": list(self.per_generator),
            "tol_sym": self.tol_sym,
        }


def symmetry_deviation(u, action, tol_sym=1e-5):
    """Max over generators of sup|g.u - u|, with a verdict at tol_sym."""
    values = u.values if isinstance(u, StateVector) else np.asarray(u, dtype=float)
    per = [
        float(np.max(np.abs(values[perm] - values))) for perm in action.generators
    ]
    deviation = max(per)
    return SymmetryVerdict(deviation, deviation < tol_sym, per, tol_sym)


def spatial_variance(u):
    """Mean squared deviation of nodal values from their mean."""
    values = u.values if isinstance(u, StateVector) else np.asarray(u, dtype=float)
    return float(np.var(values))


def check_equivariance(system, action, sample_count=30, seed=7086, tol=1e-10):
    """Check sup|F(g.u) - g.F(u)| < tol for random box states and all generators."""
    if action.grid != system.grid:
        raise DimensionMismatchError(
            f"action grid {action.grid} does not match system grid {system.grid}"
        )
    rng = np.random.default_rng(seed)
    worst = -np.inf
    violations = 0
    for _ in range(sample_count):
        x = draw_box_state(system, rng)
        gap = -np.inf
        try:
            fx = evaluate(system, x)
            for perm in action.generators:
                f_gx = evaluate(system, apply_action(action, perm, x))
                g_fx = apply_action(action, perm, fx)
                gap = max(
                    gap, float(np.max(np.abs(f_gx.values - g_fx.values)))
                )
        except (ValueError, RuntimeError):
            gap = np.inf
        worst = max(worst, gap)
        if gap > tol:
            violations += 1
    return PropertyReport("equivariance", sample_count, violations, worst, seed)


def classify_symmetric_limit(system, action, x0, budget=None, tol_sym=1e-5):
    """Classify the orbit and grade every cycle point against the action.

    Returns the Classification together with one SymmetryVerdict per cycle
    point (an empty list when no cycle was detected).
    """
    cls = classify_orbit(system, x0, budget)
    verdicts = []
    if cls.cycle is not None:
        verdicts = [
            symmetry_deviation(pt, action, tol_sym) for pt in cls.cycle.points
        ]
    return cls, verdicts


@dataclass(eq=False)
class SymmetrySurvey:
    """Aggregated symmetric-limit statistics over an ensemble of starts."""

    count: int
    stable_count: int
    symmetric_count: int
    symmetric_fraction: float
    max_deviation: float
    verdicts: list
    deviations: list
    tol_sym: float

    def to_json(self):
        return {
            "schema_version": 1,
            "kind": "symmetry_survey",
            "count": self.count,
            "stable_count": self.stable_count,
            "symmetric_count": self.symmetric_count,
            "symmetric_fraction": self.symmetric_fraction,
            "max_deviation": self.max_deviation,
            "verdicts": list(self.verdicts),
            "deviations": list(self.deviations),
            "tol_sym": self.tol_sym,
        }


def symmetric_limit_survey(system, action, states, budget=None, tol_sym=1e-5):
    """Run classify_symmetric_limit over given starts and aggregate.

    symmetric_fraction counts samples whose every detected cycle point is
    invariant at tol_sym, over all samples; unresolved and escaped samples
    therefore lower the fraction rather than dropping out.
    """
    verdicts = []
    deviations = []
    stable = 0
    symmetric = 0
    worst = 0.0
    for x0 in states:
        cls, per_point = classify_symmetric_limit(
            system, action, x0, budget, tol_sym
        )
        verdicts.append(cls.verdict)
        if per_point:
            dev = max(v.deviation for v in per_point)
            deviations.append(dev)
            worst = max(worst, dev)
            if all(v.symmetric for v in per_point):
                symmetric += 1
        else:
            deviations.append(None)
        if cls.verdict == "stable_cycle":
            stable += 1
    count = len(verdicts)
    fraction = symmetric / count if count else 0.0
    return SymmetrySurvey(
        count, stable, symmetric, fraction, worst, verdicts, deviations, tol_sym
    )
