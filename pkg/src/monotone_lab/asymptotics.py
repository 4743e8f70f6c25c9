"""Long-run behavior of the iterated maps.

The pipeline is: iterate an orbit, watch a sliding window for low-period
recurrence, polish the candidate cycle with a damped Newton step on the
period-p displacement, and grade stability by the spectral radius of the
monodromy product of Jacobians around the cycle. On top of that sit two
probe experiments:

* ``omega_plus_probe`` estimates the one-sided limit of omega sets under
  perturbations eps * v with v strongly positive and eps shrinking through
  decades, and decides whether the base point is separated from that limit
  (membership in the upper or lower instability set).
* ``separation_probe`` measures the smallest eventual sup-distance between
  the base trajectory and trajectories started a small push away, which is
  an order-of-magnitude proxy for asymptotic (in)stability of the base
  point itself.

Escape of an orbit past twice the trapping amplitude is a verdict here, not
an error; non-finite arithmetic still raises.
"""

from collections import deque
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, EscapeError, NumericalError, OrderError
from .grids import Grid
from .order import StateVector
from .systems import Parabolic, jacobian, apply_map

VERDICTS = ("stable_cycle", "unstable_cycle", "unresolved", "escaped")


def default_tol_cyc(system):
    """Recurrence tolerance: looser for discretized PDE period maps."""
    return 1e-6 if isinstance(system.kind, Parabolic) else 1e-8


@dataclass(frozen=True)
class ClassifyBudget:
    """Iteration and tolerance budget for orbit classification.

    ``None`` fields are resolved against the system: check_every defaults to
    p_max, tol_cyc to default_tol_cyc, newton_tol to max(1e-12, tol_cyc*1e-4).
    """

    max_iterations: int = 500
    p_max: int = 64
    check_every: Optional[int] = None
    tol_cyc: Optional[float] = None
    tol_stab: float = 1e-6
    newton_tol: Optional[float] = None
    newton_max_iter: int = 12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.p_max < 1:
            raise ValueError("p_max must be at least 1")
        if self.check_every is not None and self.check_every < 1:
            raise ValueError("check_every must be at least 1")
        for name in ("tol_cyc", "tol_stab", "newton_tol"):
            val = getattr(self, name)
            if val is not None and val <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.newton_max_iter < 0:
            raise ValueError("newton_max_iter must be nonnegative")

    def resolve(self, system):
        tol_cyc = self.tol_cyc if self.tol_cyc is not None else default_tol_cyc(system)
        newton_tol = self.newton_tol
        if newton_tol is None:
            newton_tol = max(1e-12, tol_cyc * 1e-4)
        check_every = self.check_every if self.check_every is not None else self.p_max
        return replace(
            self,
            check_every=check_every,
            tol_cyc=tol_cyc,
            newton_tol=newton_tol,
        )


# ---------------------------------------------------------------------------
# orbits

@dataclass(eq=False)
class OrbitRecord:
    """Stored iterates of one orbit. Row k of samples is iterate indices[k]."""

    grid: Grid
    samples: np.ndarray
    indices: np.ndarray
    escaped: bool = False

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        self.indices = np.asarray(self.indices, dtype=int)
        if self.samples.shape[0] != self.indices.shape[0]:
            raise DimensionMismatchError("one index per stored sample required")
        if self.samples.shape[1] != self.grid.n:
            raise DimensionMismatchError(
                f"samples have {self.samples.shape[1]} nodes, grid has {self.grid.n}"
            )

    def __len__(self):
        return self.samples.shape[0]

    def state(self, i):
        return StateVector(self.samples[i], self.grid)

    def final(self):
        return self.state(len(self) - 1)

    def to_csv(self):
        cols = ",".join(f"node_{j}" for j in range(self.samples.shape[1]))
        lines = [f"iter,{cols}"]
        for idx, row in zip(self.indices, self.samples):
            lines.append(str(int(idx)) + "," + ",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def iterate_orbit(system, x0, n_iter, thinning=1):
    """Iterate the map n_iter times, storing every thinning-th iterate.

    Iterate 0 (the initial state) is always stored. Escape truncates the
    record and sets the escaped flag instead of raising.
    """
    if thinning < 1:
        raise ValueError("thinning must be at least 1")
    if n_iter < 0:
        raise ValueError("n_iter must be nonnegative")
    u = _initial_values(system, x0)
    rows = [u.copy()]
    idx = [0]
    escaped = False
    for k in range(1, n_iter + 1):
        try:
            u = apply_map(system, u, iteration=k)
        except EscapeError:
            escaped = True
            break
        if k % thinning == 0:
            rows.append(u.copy())
            idx.append(k)
    return OrbitRecord(system.grid, np.array(rows), np.array(idx), escaped)


def _initial_values(system, x0):
    if isinstance(x0, StateVector):
        if x0.grid != system.grid:
            raise DimensionMismatchError(
                f"state grid {x0.grid} does not match system grid {system.grid}"
            )
        return x0.values.copy()
    u = np.atleast_1d(np.asarray(x0, dtype=float))
    if u.shape != (system.n,):
        raise DimensionMismatchError(
            f"initial state has shape {u.shape}, system expects ({system.n},)"
        )
    return u.copy()


def _as_state_array(obj):
    """Coerce an orbit record, array, or sequence of states to shape (k, n)."""
    if isinstance(obj, OrbitRecord):
        return obj.samples
    if isinstance(obj, CycleRecord) or isinstance(obj, CycleCandidate):
        return obj.points
    if isinstance(obj, StateVector):
        return obj.values[None, :]
    if isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], StateVector):
        return np.stack([s.values for s in obj])
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 1:
        # sequence of scalar states
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("expected a 1-D or 2-D collection of states")
    return arr


# ---------------------------------------------------------------------------
# cycle detection and refinement

@dataclass(eq=False)
class CycleCandidate:
    """Raw window detection: the last `period` iterates of the tail."""

    period: int
    points: np.ndarray


def detect_cycle(tail, p_max, tol_cyc):
    """Scan a trajectory tail for the minimal period p <= p_max.

    The tail must hold at least 3 * p_max states. A period p is accepted when
    the last 2 * p_max states agree with their p-shifted predecessors to
    within tol_cyc in sup norm, so each candidate is vetted over at least two
    full turns of the cycle and divisor aliasing picks the smallest period
    first. Returns a CycleCandidate or None.
    """
    arr = _as_state_array(tail)
    length = arr.shape[0]
    if p_max < 1:
        raise ValueError("p_max must be at least 1")
    if length < 3 * p_max:
        raise ValueError(
            f"tail holds {length} states, need at least 3 * p_max = {3 * p_max}"
        )
    window = 2 * p_max
    base = arr[length - window:]
    for p in range(1, p_max + 1):
        shifted = arr[length - window - p: length - p]
        if float(np.max(np.abs(base - shifted))) < tol_cyc:
            return CycleCandidate(p, arr[length - p:].copy())
    return None


@dataclass(eq=False)
class CycleRecord:
    """A polished periodic orbit: consecutive iterates, one row per point."""

    grid: Grid
    points: np.ndarray
    period: int
    residual: float
    rho: Optional[float] = None
    stability: str = "undetermined"
    rho_method: str = ""
    newton_converged: bool = False
    newton_iterations: int = 0

    def state(self, i):
        return StateVector(self.points[i], self.grid)

    def to_json(self):
        return {
            "period": self.period,
            "residual": self.residual,
            "rho": self.rho,
            "stability": self.stability,
            "rho_method": self.rho_method,
            "newton_converged": self.newton_converged,
            "newton_iterations": self.newton_iterations,
            "points": np.asarray(self.points).tolist(),
        }


def _jacobian_at(system, values):
    return jacobian(system, system.state(values))


def _orbit_of(system, z, period):
    xs = np.empty((period + 1, z.shape[0]))
    xs[0] = z
    for j in range(period):
        xs[j + 1] = apply_map(system, xs[j])
    return xs


def refine_cycle(system, candidate, newton_tol=1e-12, max_newton=12):
    """Polish a cycle candidate by damped Newton on G(z) = F^p(z) - z.

    The Jacobian of G is the monodromy product minus the identity; a
    singular or stalled solve leaves the candidate unrefined with the
    converged flag down. The returned points are regenerated by iterating
    the refined base point, so they are consecutive iterates by
    construction and the residual is the closure defect sup|F(last)-first|.
    """
    pts = _as_state_array(candidate)
    period = pts.shape[0]
    z = pts[0].astype(float).copy()
    eye = np.eye(z.shape[0])
    converged = False
    iters_used = 0
    try:
        xs = _orbit_of(system, z, period)
        gap = float(np.max(np.abs(xs[period] - z)))
        for it in range(1, max_newton + 1):
            if gap <= newton_tol:
                converged = True
                break
            mono = eye
            for j in range(period):
                mono = _jacobian_at(system, xs[j]) @ mono
            try:
                delta = np.linalg.solve(mono - eye, z - xs[period])
            except np.linalg.LinAlgError:
                # neutral multiplier, nothing to polish against
                break
            accepted = False
            step = delta
            for _ in range(4):
                z_try = z + step
                try:
                    xs_try = _orbit_of(system, z_try, period)
                    gap_try = float(np.max(np.abs(xs_try[period] - z_try)))
                except (EscapeError, NumericalError):
                    gap_try = np.inf
                if gap_try < gap:
                    z, xs, gap = z_try, xs_try, gap_try
                    accepted = True
                    iters_used = it
                    break
                step = 0.5 * step
            if not accepted:
                break
        if gap <= newton_tol:
            converged = True
    except (EscapeError, NumericalError):
        # refinement wandered out of the admissible box, fall back
        z = pts[0].astype(float).copy()
        xs = _orbit_of(system, z, period)
    points = xs[:period].copy()
    residual = float(np.max(np.abs(xs[period] - points[0])))
    return CycleRecord(
        system.grid,
        points,
        period,
        residual,
        newton_converged=converged,
        newton_iterations=iters_used,
    )


# ---------------------------------------------------------------------------
# stability

@dataclass(frozen=True)
class SpectralRadiusResult:
    rho: float
    method: str
    iterations: int


def cycle_spectral_radius(system, cycle, tol=1e-8, max_power_iter=10_000,
                          detail=False):
    """Spectral radius of the product of Jacobians around a cycle.

    Power iteration from the all-ones vector, normalized in sup norm; the
    monodromy of a monotone map has nonnegative entries so the Perron value
    dominates and the ratio settles. If the ratio has not stabilized to tol
    within the budget (rotating complex pair, near-degenerate leading pair)
    the dense eigenvalue solve of the assembled product is used instead and
    reported as such.
    """
    pts = _as_state_array(cycle)
    mats = [_jacobian_at(system, row) for row in pts]
    dim = mats[0].shape[0]
    w = np.ones(dim)
    lam_prev = None
    for k in range(1, max_power_iter + 1):
        w_next = w
        for mat in mats:
            w_next = mat @ w_next
        lam = float(np.max(np.abs(w_next)))
        if lam == 0.0:
            return _radius_result(0.0, "power", k, detail)
        w = w_next / lam
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(1.0, lam):
            return _radius_result(lam, "power", k, detail)
        lam_prev = lam
    mono = np.eye(dim)
    for mat in mats:
        mono = mat @ mono
    rho = float(np.max(np.abs(np.linalg.eigvals(mono))))
    return _radius_result(rho, "dense", max_power_iter, detail)


def _radius_result(rho, method, iterations, detail):
    if detail:
        return SpectralRadiusResult(rho, method, iterations)
    return rho


# ---------------------------------------------------------------------------
# classification

@dataclass(eq=False)
class Classification:
    """Outcome of one classify_orbit run."""

    verdict: str
    cycle: Optional[CycleRecord]
    iterations_used: int
    diagnostics: str = ""

    def to_json(self):
        return {
            "verdict": self.verdict,
            "iterations_used": self.iterations_used,
            "diagnostics": self.diagnostics,
            "cycle": None if self.cycle is None else self.cycle.to_json(),
        }


def classify_orbit(system, x0, budget=None):
    """Iterate from x0 and classify the orbit's eventual behavior.

    Verdicts: stable_cycle / unstable_cycle when a cycle of period at most
    p_max is detected and graded, escaped when the orbit leaves the inflated
    trapping box, unresolved when the budget runs out first. Detection runs
    on a sliding window of the last 3 * p_max iterates, every check_every
    steps once the window fills, and once more at the final iterate.
    """
    budget = (budget if budget is not None else ClassifyBudget()).resolve(system)
    window_len = 3 * budget.p_max
    window = deque(maxlen=window_len)
    u = _initial_values(system, x0)
    window.append(u)
    iters = 0
    try:
        while iters < budget.max_iterations:
            u = apply_map(system, u, iteration=iters + 1)
            iters += 1
            window.append(u)
            if len(window) == window_len and (
                iters % budget.check_every == 0 or iters == budget.max_iterations
            ):
                cand = detect_cycle(np.asarray(window), budget.p_max, budget.tol_cyc)
                if cand is not None:
                    return _grade_candidate(system, cand, budget, iters)
    except EscapeError as exc:
        return Classification(
            "escaped", None, iters, f"orbit escaped at iteration {iters + 1}: {exc}"
        )
    return Classification(
        "unresolved",
        None,
        iters,
        f"no cycle of period at most {budget.p_max} within "
        f"{budget.max_iterations} iterations at tolerance {budget.tol_cyc:g}",
    )


def _grade_candidate(system, cand, budget, iters):
    rec = refine_cycle(
        system, cand, newton_tol=budget.newton_tol, max_newton=budget.newton_max_iter
    )
    det = cycle_spectral_radius(system, rec, detail=True)
    rec.rho = det.rho
    rec.rho_method = det.method
    stable = det.rho <= 1.0 + budget.tol_stab
    rec.stability = "stable" if stable else "unstable"
    verdict = "stable_cycle" if stable else "unstable_cycle"
    notes = (
        f"period {rec.period}, spectral radius {det.rho:.6g} ({det.method}), "
        f"closure residual {rec.residual:.3g}"
    )
    if not rec.newton_converged:
        notes += ", refinement did not converge"
    return Classification(verdict, rec, iters, notes)


# ---------------------------------------------------------------------------
# omega limit sets

def omega_set(orbit, tail_fraction=0.25, tol=1e-8):
    """Distinct states visited by the trailing fraction of an orbit.

    Greedy dedup in sup norm: a tail state joins the representative list
    when it is farther than tol from every representative found so far.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    arr = _as_state_array(orbit)
    if arr.shape[0] == 0:
        raise ValueError("empty orbit")
    count = max(1, int(np.ceil(tail_fraction * arr.shape[0])))
    tail = arr[-count:]
    reps = [tail[0]]
    for row in tail[1:]:
        if min(float(np.max(np.abs(row - r))) for r in reps) > tol:
            reps.append(row)
    return np.array(reps)


def set_distance(first, second):
    """Symmetric Hausdorff distance between two finite state sets, sup norm."""
    a = _as_state_array(first)
    b = _as_state_array(second)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("set_distance needs nonempty sets")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError("state dimensions differ")
    pair = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    return float(max(pair.min(axis=1).max(), pair.min(axis=0).max()))


# ---------------------------------------------------------------------------
# probes

@dataclass(eq=False)
class SideEstimate:
    """One-sided omega limit estimate for a fixed perturbation direction."""

    sign: int
    verdicts: list
    sets: list
    consistent: bool
    limit: Optional[np.ndarray]
    distance_to_base: Optional[float]
    membership: str  # member / not_member / inconclusive

    def to_json(self):
        return {
            "sign": self.sign,
            "verdicts": list(self.verdicts),
            "consistent": self.consistent,
            "limit": None if self.limit is None else np.asarray(self.limit).tolist(),
            "distance_to_base": self.distance_to_base,
            "membership": self.membership,
        }


@dataclass(eq=False)
class OmegaProbeReport:
    base_point: np.ndarray
    direction: np.ndarray
    eps_values: tuple
    tol_set: float
    base_verdict: str
    omega_base: Optional[np.ndarray]
    upper: SideEstimate
    lower: SideEstimate
    direction_disagreement: Optional[float] = None
    notes: str = ""

    def to_json(self):
        return {
            "base_point": np.asarray(self.base_point).tolist(),
            "direction": np.asarray(self.direction).tolist(),
            "eps_values": list(self.eps_values),
            "tol_set": self.tol_set,
            "base_verdict": self.base_verdict,
            "omega_base": None
            if self.omega_base is None
            else np.asarray(self.omega_base).tolist(),
            "upper": self.upper.to_json(),
            "lower": self.lower.to_json(),
            "direction_disagreement": self.direction_disagreement,
            "notes": self.notes,
        }


def _probe_direction(system, direction):
    if direction is None:
        v = np.ones(system.n)
    else:
        v = np.atleast_1d(np.asarray(direction, dtype=float))
    if v.shape != (system.n,):
        raise DimensionMismatchError(
            f"direction has shape {v.shape}, system expects ({system.n},)"
        )
    if np.min(v) <= 0.0:
        raise OrderError("probe direction must be strongly positive")
    return v


def _one_side(system, base, v, sign, eps_values, budget, tol_set, omega_base):
    sets = []
    verdicts = []
    for eps in eps_values:
        cls = classify_orbit(system, base + sign * eps * v, budget)
        verdicts.append(cls.verdict)
        if cls.cycle is not None:
            sets.append(cls.cycle.points)
    if len(sets) < len(eps_values):
        # some perturbed orbit failed to settle, no limit to speak of
        return SideEstimate(sign, verdicts, sets, False, None, None, "inconclusive")
    consistent = all(
        set_distance(sets[i], sets[j]) <= tol_set
        for i in range(len(sets))
        for j in range(i + 1, len(sets))
    )
    limit = sets[-1]
    if not consistent or omega_base is None:
        return SideEstimate(sign, verdicts, sets, consistent, limit, None,
                            "inconclusive")
    dist = set_distance(omega_base, limit)
    membership = "member" if dist > tol_set else "not_member"
    return SideEstimate(sign, verdicts, sets, consistent, limit, dist, membership)


def omega_plus_probe(system, x, direction=None, eps_values=(1e-2, 1e-3, 1e-4),
                     budget=None, tol_set=1e-4, extra_directions=None):
    """Estimate the one-sided limits of omega sets under x + eps * v, eps -> 0.

    For each sign the perturbed orbits are classified at each eps; the side
    estimate is consistent when all resolved omega sets agree pairwise within
    tol_set, and its limit is the set at the smallest eps. The base point is
    reported as a member of the one-sided instability set when its own omega
    set sits farther than tol_set from that limit. Any unresolved or escaped
    ingredient degrades the verdict to inconclusive rather than guessing.

    extra_directions, when given, repeats the upper estimate along other
    strongly positive directions and reports the worst pairwise disagreement
    of the limits without altering the primary verdicts.
    """
    base = _initial_values(system, x)
    v = _probe_direction(system, direction)
    eps_values = tuple(sorted((float(e) for e in eps_values), reverse=True))
    if len(eps_values) == 0:
        raise ValueError("need at least one eps value")
    if any(e <= 0.0 for e in eps_values):
        raise ValueError("eps values must be positive")
    widest = eps_values[0]
    for sign in (1.0, -1.0):
        probe0 = base + sign * widest * v
        if float(np.max(np.abs(probe0))) >= system.kappa:
            raise ValueError(
                "largest perturbation leaves the trapping box; shrink eps or v"
            )
    base_cls = classify_orbit(system, base, budget)
    omega_base = None if base_cls.cycle is None else base_cls.cycle.points
    notes = ""
    if base_cls.verdict in ("unresolved", "escaped"):
        notes = f"base orbit {base_cls.verdict}; membership cannot be graded"
    upper = _one_side(system, base, v, 1, eps_values, budget, tol_set, omega_base)
    lower = _one_side(system, base, v, -1, eps_values, budget, tol_set, omega_base)
    disagreement = None
    if extra_directions:
        limits = [] if upper.limit is None else [upper.limit]
        for other in extra_directions:
            w = _probe_direction(system, other)
            est = _one_side(system, base, w, 1, eps_values, budget, tol_set,
                            omega_base)
            if est.limit is not None:
                limits.append(est.limit)
        if len(limits) >= 2:
            disagreement = max(
                set_distance(limits[i], limits[j])
                for i in range(len(limits))
                for j in range(i + 1, len(limits))
            )
            if disagreement > tol_set and not notes:
                notes = "one-sided limits disagree across directions"
    return OmegaProbeReport(
        base_point=base,
        direction=v,
        eps_values=eps_values,
        tol_set=tol_set,
        base_verdict=base_cls.verdict,
        omega_base=omega_base,
        upper=upper,
        lower=lower,
        direction_disagreement=disagreement,
        notes=notes,
    )


def separation_probe(system, x, scales=(1e-2, 1e-4), direction=None, budget=None):
    """Smallest eventual separation between the base orbit and pushed copies.

    For each scale s and each sign, the orbit of x + sign * s * v is run
    alongside the base orbit and the largest sup-distance over the trailing
    half of the run is recorded; the probe value is the minimum over all
    admissible pushes. Values near or above the attractor gap indicate the
    base point sits on a repelling structure; values collapsing with s
    indicate stability. A pushed orbit that escapes counts as separated at
    the trapping amplitude, since the base orbit is assumed trapped.
    """
    budget = (budget if budget is not None else ClassifyBudget()).resolve(system)
    steps = budget.max_iterations
    tail_start = max(1, steps // 2)
    base0 = _initial_values(system, x)
    v = _probe_direction(system, direction)
    base_traj = np.empty((steps + 1, base0.shape[0]))
    base_traj[0] = base0
    for k in range(1, steps + 1):
        base_traj[k] = apply_map(system, base_traj[k - 1], iteration=k)
    gaps = []
    for scale in scales:
        if scale <= 0.0:
            raise ValueError("scales must be positive")
        for sign in (1.0, -1.0):
            y = base0 + sign * scale * v
            if float(np.max(np.abs(y))) >= system.kappa:
                continue
            gap = 0.0
            for k in range(1, steps + 1):
                try:
                    y = apply_map(system, y, iteration=k)
                except (EscapeError, NumericalError):
                    gap = max(gap, float(system.kappa))
                    break
                if k >= tail_start:
                    gap = max(gap, float(np.max(np.abs(y - base_traj[k]))))
            gaps.append(gap)
    if not gaps:
        raise ValueError("no admissible probe stayed inside the trapping box")
    return float(min(gaps))
