"""Ensemble experiments: prevalence estimates and line probes.

The prevalence estimate classifies many independently sampled initial
states and reports the fraction that converge to a linearly stable cycle,
with a Wilson 95% interval. That is Monte Carlo evidence of prevalence on
a box, not a certificate of shyness of the complement; the report says so
in its caveat field and records the sampler so runs are comparable.

The line probe classifies equally spaced states along a straight line with
strongly positive direction. The predicted picture is that non-stable
verdicts are confined to isolated parameter values, so refining the
resolution should never grow the exceptional set beyond shrinking
neighborhoods of the points already found.

Determinism contract: the random stream of sample i is seeded by the pair
(sampler seed, i), and aggregation runs in index order, so the report is
identical for any worker-thread count apart from the wall_time field.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridError, OrderError
from .order import StateVector
from .asymptotics import ClassifyBudget, classify_orbit

STRATEGIES = ("box_uniform", "smooth_field", "line_scan")

CAVEAT = (
    "Monte Carlo evidence of prevalence on a box, not a certificate of "
    "shyness of the complement"
)

WILSON_Z = 1.959963984540054  # two-sided 95%

RHO_EDGES = np.linspace(0.0, 2.0, 21)


@dataclass(eq=False)
class SamplerSpec:
    """How to draw initial states. Unused fields are ignored per strategy.

    box_uniform: independent nodal values uniform in (-amplitude, amplitude).
    smooth_field: random low-frequency combination, amplitude-normalized so
        max|u| <= amplitude regardless of the drawn coefficients.
    line_scan: deterministic sweep base + s * direction over a linspace;
        the rng stream is unused and the index addresses the point.
    """

    strategy: str
    seed: int = 0
    amplitude: float = 1.0
    modes: int = 6
    base: Optional[np.ndarray] = None
    direction: Optional[np.ndarray] = None
    s_min: float = 0.0
    s_max: float = 1.0
    resolution: int = 101

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown sampler strategy {self.strategy!r}")
        if self.strategy in ("box_uniform", "smooth_field"):
            if self.amplitude <= 0.0:
                raise ValueError("amplitude must be positive")
        if self.strategy == "smooth_field" and self.modes < 1:
            raise ValueError("smooth_field needs at least one mode")
        if self.strategy == "line_scan":
            if self.base is None or self.direction is None:
                raise ValueError("line_scan needs base and direction")
            self.base = np.atleast_1d(np.asarray(self.base, dtype=float))
            self.direction = np.atleast_1d(np.asarray(self.direction, dtype=float))
            if self.base.shape != self.direction.shape:
                raise ValueError("base and direction must have equal length")
            if float(np.min(self.direction)) <= 0.0:
                raise OrderError("line_scan direction must be strongly positive")
            if self.resolution < 1:
                raise ValueError("resolution must be at least 1")
            if self.s_max < self.s_min:
                raise ValueError("s_max must not be below s_min")

    def s_values(self):
        if self.strategy != "line_scan":
            raise ValueError("s_values applies to line_scan samplers")
        return np.linspace(self.s_min, self.s_max, self.resolution)

    def describe(self):
        out = {"strategy": self.strategy, "seed": self.seed}
        if self.strategy in ("box_uniform", "smooth_field"):
            out["amplitude"] = self.amplitude
        if self.strategy == "smooth_field":
            out["modes"] = self.modes
        if self.strategy == "line_scan":
            out["base"] = np.asarray(self.base).tolist()
            out["direction"] = np.asarray(self.direction).tolist()
            out["s_min"] = self.s_min
            out["s_max"] = self.s_max
            out["resolution"] = self.resolution
        return out


def box_uniform(amplitude=1.0, seed=0):
    return SamplerSpec("box_uniform", seed=seed, amplitude=amplitude)


def smooth_field(amplitude=1.0, modes=6, seed=0):
    return SamplerSpec("smooth_field", seed=seed, amplitude=amplitude, modes=modes)


def line_scan(base, direction, s_min=0.0, s_max=1.0, resolution=101):
    return SamplerSpec(
        "line_scan",
        base=base,
        direction=direction,
        s_min=s_min,
        s_max=s_max,
        resolution=resolution,
    )


def _smooth_mode(grid, k, x):
    """k-th basis function of the smooth sampler, bounded by 1 in sup norm."""
    if grid.kind == "dirichlet":
        return np.sin((k + 1) * np.pi * x)
    if grid.kind == "neumann":
        return np.cos(k * np.pi * x)
    if grid.kind == "ring":
        if k == 0:
            return np.ones_like(x)
        freq = (k + 1) // 2
        if k % 2 == 1:
            return np.sin(2.0 * np.pi * freq * x)
        return np.cos(2.0 * np.pi * freq * x)
    if grid.kind == "radial":
        # zero slope at the axis, zero value at the rim
        return np.cos((k + 0.5) * np.pi * x)
    raise GridError("smooth_field sampling needs a spatial grid")


def sample_initial(sampler, index, grid):
    """Draw sample number `index` on `grid`. Deterministic in (seed, index)."""
    if index < 0:
        raise ValueError("sample index must be nonnegative")
    if sampler.strategy == "line_scan":
        if index >= sampler.resolution:
            raise ValueError(
                f"index {index} out of range for resolution {sampler.resolution}"
            )
        if sampler.base.shape != (grid.n,):
            raise ValueError("line_scan base does not fit the grid")
        s = sampler.s_values()[index]
        return StateVector(sampler.base + s * sampler.direction, grid)
    rng = np.random.default_rng([sampler.seed, index])
    if sampler.strategy == "box_uniform":
        values = rng.uniform(-sampler.amplitude, sampler.amplitude, grid.n)
        return StateVector(values, grid)
    x = grid.nodes()
    coeff = rng.uniform(-1.0, 1.0, sampler.modes)
    total = float(np.sum(np.abs(coeff)))
    u = np.zeros(grid.n)
    for k, c in enumerate(coeff):
        u += c * _smooth_mode(grid, k, x)
    # normalizing by the l1 coefficient mass bounds sup|u| by the amplitude
    u *= sampler.amplitude / max(total, 1e-300)
    return StateVector(u, grid)


def resolve_threads(requested=None):
    """Worker-thread count: MONOTONE_LAB_THREADS overrides the argument."""
    env = os.environ.get("MONOTONE_LAB_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    if requested is not None and requested >= 1:
        return int(requested)
    return 1


def _check_sampler_box(system, sampler):
    if sampler.strategy in ("box_uniform", "smooth_field"):
        if sampler.amplitude > system.kappa:
            raise ValueError(
                f"sampler amplitude {sampler.amplitude} exceeds the trapping "
                f"amplitude {system.kappa}"
            )
    else:
        if sampler.base.shape != (system.n,):
            raise ValueError("line_scan base does not fit the system")
        for s in (sampler.s_min, sampler.s_max):
            point = sampler.base + s * sampler.direction
            if float(np.max(np.abs(point))) >= system.kappa:
                raise ValueError(
                    "line_scan endpoints leave the trapping box; shrink the range"
                )


def _classify_many(system, sampler, indices, budget, threads):
    def one(i):
        state = sample_initial(sampler, i, system.grid)
        cls = classify_orbit(system, state, budget)
        if cls.cycle is None:
            return cls.verdict, None, None
        return cls.verdict, cls.cycle.period, cls.cycle.rho

    if threads <= 1:
        return [one(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, indices))


@dataclass(eq=False)
class PrevalenceReport:
    system_name: str
    sampler: dict
    count: int
    budget: dict
    counts: dict
    stable_fraction: Optional[float]
    wilson_95: Optional[tuple]
    period_histogram: dict
    rho_histogram: dict
    caveat: str = CAVEAT
    wall_time: float = 0.0
    schema_version: int = 1

    def to_json(self):
        return {
            "schema_version": self.schema_version,
            "kind": "prevalence",
            "system_name": self.system_name,
            "sampler": dict(self.sampler),
            "count": self.count,
            "budget": dict(self.budget),
            "counts": dict(self.counts),
            "stable_fraction": self.stable_fraction,
            "wilson_95": None if self.wilson_95 is None else list(self.wilson_95),
            "period_histogram": {
                str(k): v for k, v in sorted(self.period_histogram.items())
            },
            "rho_histogram": {
                "edges": list(self.rho_histogram["edges"]),
                "counts": list(self.rho_histogram["counts"]),
                "overflow": self.rho_histogram["overflow"],
            },
            "caveat": self.caveat,
            "wall_time": self.wall_time,
        }

    def to_csv(self):
        lines = [f"{name},{self.counts[name]}" for name in VERDICT_ORDER]
        lines.append(f"samples,{self.count}")
        if self.stable_fraction is None:
            lines.append("stable_fraction,undefined")
            lines.append("wilson_95,undefined,undefined")
        else:
            lines.append(f"stable_fraction,{self.stable_fraction:.17g}")
            lo, hi = self.wilson_95
            lines.append(f"wilson_95,{lo:.17g},{hi:.17g}")
        return "\n".join(lines) + "\n"


VERDICT_ORDER = ("stable_cycle", "unstable_cycle", "unresolved", "escaped")


def prevalence_report_from_json(doc):
    wilson = doc.get("wilson_95")
    return PrevalenceReport(
        system_name=doc["system_name"],
        sampler=dict(doc["sampler"]),
        count=doc["count"],
        budget=dict(doc["budget"]),
        counts=dict(doc["counts"]),
        stable_fraction=doc["stable_fraction"],
        wilson_95=None if wilson is None else tuple(wilson),
        period_histogram={int(k): v for k, v in doc["period_histogram"].items()},
        rho_histogram={
            "edges": list(doc["rho_histogram"]["edges"]),
            "counts": list(doc["rho_histogram"]["counts"]),
            "overflow": doc["rho_histogram"]["overflow"],
        },
        caveat=doc["caveat"],
        wall_time=doc["wall_time"],
        schema_version=doc["schema_version"],
    )


def wilson_interval(successes, total, z=WILSON_Z):
    """Wilson score interval; always contains the point estimate."""
    if total <= 0:
        raise ValueError("Wilson interval needs a positive total")
    p_hat = successes / total
    denom = 1.0 + z * z / total
    center = (p_hat + z * z / (2.0 * total)) / denom
    half = (
        z
        * np.sqrt(p_hat * (1.0 - p_hat) / total + z * z / (4.0 * total * total))
        / denom
    )
    # rounding at p_hat in {0, 1} can push a limit past the estimate
    lo = min(float(center - half), p_hat)
    hi = max(float(center + half), p_hat)
    return (max(0.0, lo), min(1.0, hi))


def _budget_summary(budget):
    return {
        "max_iterations": budget.max_iterations,
        "p_max": budget.p_max,
        "check_every": budget.check_every,
        "tol_cyc": budget.tol_cyc,
        "tol_stab": budget.tol_stab,
    }


def estimate_prevalence(system, sampler=None, count=200, budget=None, threads=None):
    """Classify `count` sampled initial states and aggregate the verdicts.

    The stable fraction is conservative: unresolved and escaped samples stay
    in the denominator and never in the numerator. Detected periods count
    the applications of the map until closure, which for a period map of a
    time-periodic problem is the multiple k of the forcing period. Refuses
    systems declared non-monotone, since the prevalence prediction is about
    monotone dynamics.
    """
    if not system.monotone_expected:
        raise ValueError(
            "prevalence experiments apply to monotone systems; "
            f"{system.name or system.kind} is declared non-monotone"
        )
    if count < 0:
        raise ValueError("count must be nonnegative")
    if sampler is None:
        sampler = box_uniform(amplitude=0.9 * system.kappa)
    _check_sampler_box(system, sampler)
    if sampler.strategy == "line_scan" and count > sampler.resolution:
        raise ValueError("count exceeds the line_scan resolution")
    threads = resolve_threads(threads)
    resolved = (budget if budget is not None else ClassifyBudget()).resolve(system)
    start = time.perf_counter()
    results = _classify_many(system, sampler, range(count), resolved, threads)
    wall = time.perf_counter() - start

    counts = {name: 0 for name in VERDICT_ORDER}
    periods = {}
    rhos = []
    for verdict, period, rho in results:
        counts[verdict] += 1
        if period is not None:
            periods[period] = periods.get(period, 0) + 1
        if rho is not None:
            rhos.append(rho)
    if count > 0:
        fraction = counts["stable_cycle"] / count
        wilson = wilson_interval(counts["stable_cycle"], count)
    else:
        fraction = None
        wilson = None
    in_range, _ = np.histogram(
        [r for r in rhos if r <= RHO_EDGES[-1]], bins=RHO_EDGES
    )
    overflow = sum(1 for r in rhos if r > RHO_EDGES[-1])
    return PrevalenceReport(
        system_name=system.name or system.kind.__class__.__name__,
        sampler=sampler.describe(),
        count=count,
        budget=_budget_summary(resolved),
        counts=counts,
        stable_fraction=fraction,
        wilson_95=wilson,
        period_histogram=periods,
        rho_histogram={
            "edges": [float(e) for e in RHO_EDGES],
            "counts": [int(c) for c in in_range],
            "overflow": int(overflow),
        },
        wall_time=wall,
    )


@dataclass(eq=False)
class LineReport:
    system_name: str
    sampler: dict
    budget: dict
    s_values: list
    verdicts: list
    rhos: list
    stable_count: int
    bad: list  # entries {index, s, verdict}
    bad_fraction: float
    wall_time: float = 0.0
    schema_version: int = 1

    def to_json(self):
        return {
            "schema_version": self.schema_version,
            "kind": "line_probe",
            "system_name": self.system_name,
            "sampler": dict(self.sampler),
            "budget": dict(self.budget),
            "s_values": list(self.s_values),
            "verdicts": list(self.verdicts),
            "rhos": list(self.rhos),
            "stable_count": self.stable_count,
            "bad": [dict(entry) for entry in self.bad],
            "bad_fraction": self.bad_fraction,
            "wall_time": self.wall_time,
        }

    def to_csv(self):
        lines = ["index,s,verdict,rho"]
        for i, (s, verdict, rho) in enumerate(
            zip(self.s_values, self.verdicts, self.rhos)
        ):
            rho_txt = "" if rho is None else f"{rho:.17g}"
            lines.append(f"{i},{s:.17g},{verdict},{rho_txt}")
        return "\n".join(lines) + "\n"


def line_report_from_json(doc):
    return LineReport(
        system_name=doc["system_name"],
        sampler=dict(doc["sampler"]),
        budget=dict(doc["budget"]),
        s_values=list(doc["s_values"]),
        verdicts=list(doc["verdicts"]),
        rhos=list(doc["rhos"]),
        stable_count=doc["stable_count"],
        bad=[dict(entry) for entry in doc["bad"]],
        bad_fraction=doc["bad_fraction"],
        wall_time=doc["wall_time"],
        schema_version=doc["schema_version"],
    )


def line_probe(system, sampler, budget=None, threads=None):
    """Classify every point of a line_scan sweep and list the exceptions.

    The exceptional list holds every index whose verdict is not
    stable_cycle together with its parameter value; the prediction under
    test is that these stay confined to isolated parameter values as the
    resolution grows.
    """
    if sampler.strategy != "line_scan":
        raise ValueError("line_probe needs a line_scan sampler")
    if not system.monotone_expected:
        raise ValueError("line probes apply to monotone systems")
    _check_sampler_box(system, sampler)
    threads = resolve_threads(threads)
    resolved = (budget if budget is not None else ClassifyBudget()).resolve(system)
    start = time.perf_counter()
    results = _classify_many(
        system, sampler, range(sampler.resolution), resolved, threads
    )
    wall = time.perf_counter() - start
    s_values = [float(s) for s in sampler.s_values()]
    verdicts = [r[0] for r in results]
    rhos = [r[2] for r in results]
    bad = [
        {"index": i, "s": s_values[i], "verdict": verdicts[i]}
        for i in range(len(verdicts))
        if verdicts[i] != "stable_cycle"
    ]
    stable = sum(1 for v in verdicts if v == "stable_cycle")
    return LineReport(
        system_name=system.name or system.kind.__class__.__name__,
        sampler=sampler.describe(),
        budget=_budget_summary(resolved),
        s_values=s_values,
        verdicts=verdicts,
        rhos=rhos,
        stable_count=stable,
        bad=bad,
        bad_fraction=len(bad) / len(verdicts) if verdicts else 0.0,
        wall_time=wall,
    )


def report_export(report, format="json"):
    """Render a report as a JSON or CSV document string."""
    if format == "json":
        return json.dumps(report.to_json(), indent=2) + "\n"
    if format == "csv":
        return report.to_csv()
    raise ValueError(f"unknown export format {format!r}")
