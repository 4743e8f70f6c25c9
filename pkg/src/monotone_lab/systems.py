"""System catalog: explicit test maps and periodically forced parabolic problems.

A system couples a map specification with a trapping amplitude kappa. The
open box of states with sup-norm below kappa is expected to be forward
invariant for the shipped monotone systems; the box inflated by a factor two
is the escape guard during iteration.

Three kinds are supported:

* ``AnalyticScalar``: closed-form scalar maps (a cubic Euler-style map, the
  logistic family, a sign flip). The non-monotone members exist to exercise
  the generic machinery and the violation paths of the property checks.
* ``LinearCooperative``: linear maps with entrywise nonnegative matrices.
* ``Parabolic``: the period map of a scalar reaction-diffusion problem with
  time-periodic reaction, realized by the discretization in ``numerics``.

The parabolic reaction is a(t) * strength * g(u) with the periodic factor
a(t) = 1 + modulation * sin(2 pi t / tau), mean one over a period, and
g(u) = u (1 - u^2) (cubic form) or g(u) = u (linear form). A strictly
positive spatial profile can multiply the reaction for symmetry-breaking
experiments; custom reactions supply their own callables and may consume
du/dx (experimental, and excluded from the smoothness and growth caveats
documented in the validators).
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DimensionMismatchError, EscapeError, GridError, NumericalError
from .grids import Grid
from .numerics import SteppingScheme, _propagator
from .order import PropertyReport, StateVector, draw_box_state


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Reaction specification for parabolic systems."""

    form: str = "cubic"
    strength: float = 1.0
    modulation: float = 0.0
    profile: Optional[np.ndarray] = None
    custom_value: Optional[Callable] = None
    custom_du: Optional[Callable] = None
    custom_dux: Optional[Callable] = None
    uses_gradient: bool = False

    def __post_init__(self):
        if self.form not in ("cubic", "linear", "custom"):
            raise ValueError(f"unknown reaction form {self.form!r}")
        if not 0.0 <= self.modulation < 1.0:
            raise ValueError("modulation must lie in [0, 1)")
        if self.form == "custom" and (self.custom_value is None or self.custom_du is None):
            raise ValueError("custom reactions need custom_value and custom_du")
        if self.uses_gradient and self.form != "custom":
            raise ValueError("only custom reactions may consume du/dx")

    def forcing(self, t, tau):
        """Periodic amplitude a(t), mean one over a period."""
        return 1.0 + self.modulation * np.sin(2.0 * np.pi * np.asarray(t) / tau)

    def value(self, t, tau, u, ux=None, xs=None):
        """Reaction value without the spatial profile factor."""
        if self.form == "custom":
            return self.custom_value(t, xs, u, ux)
        base = u - u * u * u if self.form == "cubic" else u
        return self.forcing(t, tau) * self.strength * base


@dataclass(frozen=True)
class AnalyticScalar:
    """Closed-form scalar map, selected by family name.

    cubic:    u + param * u (1 - u^2)
    logistic: param * u (1 - u)
    negation: -u (deliberately non-monotone)
    """

    family: str
    param: float = 0.0

    def __post_init__(self):
        if self.family not in ("cubic", "logistic", "negation"):
            raise ValueError(f"unknown scalar family {self.family!r}")

    def value(self, u):
        if self.family == "cubic":
            return u + self.param * u * (1.0 - u * u)
        if self.family == "logistic":
            return self.param * u * (1.0 - u)
        return -u

    def deriv(self, u):
        if self.family == "cubic":
            return 1.0 + self.param * (1.0 - 3.0 * u * u)
        if self.family == "logistic":
            return self.param * (1.0 - 2.0 * u)
        return -1.0 + 0.0 * u


@dataclass(frozen=True, eq=False)
class LinearCooperative:
    """Linear map with entrywise nonnegative matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got shape {mat.shape}")
        if np.any(mat < 0.0):
            raise ValueError("cooperative matrices must be entrywise nonnegative")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True, eq=False)
class Parabolic:
    """Period map of a forced reaction-diffusion problem on a spatial grid."""

    grid: Grid
    nonlinearity: Nonlinearity
    tau: float = 1.0
    scheme: SteppingScheme = SteppingScheme()
    diffusivity: float = 1.0

    def __post_init__(self):
        if self.grid.kind == "flat":
            raise GridError("parabolic systems need a spatial grid")
        if self.tau <= 0.0:
            raise ValueError("period tau must be positive")
        if self.diffusivity < 0.0:
            raise ValueError("diffusivity must be nonnegative")


SystemKind = Union[AnalyticScalar, LinearCooperative, Parabolic]


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """A map together with its trapping amplitude and a catalog label."""

    kind: SystemKind
    kappa: float = 1.5
    monotone_expected: bool = True
    name: str = ""

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")

    @property
    def grid(self):
        if isinstance(self.kind, Parabolic):
            return self.kind.grid
        if isinstance(self.kind, LinearCooperative):
            return Grid("flat", self.kind.matrix.shape[0])
        return Grid("flat", 1)

    @property
    def n(self):
        return self.grid.n

    def state(self, values):
        """Convenience constructor for a state on this system's grid."""
        arr = np.atleast_1d(np.asarray(values, dtype=float))
        return StateVector(arr, self.grid)

    def zero_state(self):
        return StateVector(np.zeros(self.grid.n), self.grid)


# ---------------------------------------------------------------------------
# catalog constructors

def cubic_map(gain=0.1, kappa=1.5):
    return SystemSpec(AnalyticScalar("cubic", gain), kappa=kappa, name="cubic_map")


def logistic_map(r=3.2):
    return SystemSpec(
        AnalyticScalar("logistic", r), kappa=1.0, monotone_expected=False, name="logistic_map"
    )


def negation_map():
    return SystemSpec(
        AnalyticScalar("negation"), kappa=1.0, monotone_expected=False, name="negation_map"
    )


def linear_cooperative(matrix=None, kappa=1.5):
    if matrix is None:
        matrix = ((0.5, 0.2), (0.2, 0.5))
    return SystemSpec(LinearCooperative(np.asarray(matrix)), kappa=kappa, name="linear_cooperative")


def spatial_profile(grid, name):
    """Named strictly positive profiles for symmetry experiments.

    none: no profile. ramp: 1 + x/2. wave: 1 + sin(2 pi x)/2.
    """
    if name == "none":
        return None
    xs = grid.nodes()
    if name == "ramp":
        return 1.0 + 0.5 * xs
    if name == "wave":
        return 1.0 + 0.5 * np.sin(2.0 * np.pi * xs)
    raise ValueError(f"unknown spatial profile {name!r}")


def parabolic_system(
    domain,
    n=32,
    strength=15.0,
    modulation=0.3,
    form="cubic",
    tau=1.0,
    steps_per_period=200,
    theta=0.5,
    kappa=1.5,
    radial_dim=3,
    diffusivity=1.0,
    profile=None,
    name="",
):
    """Assemble a parabolic system on the named domain kind."""
    grid = Grid(domain, n, dim=radial_dim if domain == "radial" else 1)
    if isinstance(profile, str):
        profile = spatial_profile(grid, profile)
    nl = Nonlinearity(form=form, strength=strength, modulation=modulation, profile=profile)
    scheme = SteppingScheme(steps_per_period=steps_per_period, theta=theta)
    kind = Parabolic(grid, nl, tau=tau, scheme=scheme, diffusivity=diffusivity)
    if not name:
        name = f"{domain}_{form}_{strength:g}"
    return SystemSpec(kind, kappa=kappa, name=name)


_CATALOG = None


def catalog():
    """The shipped systems, built once and shared (warm propagator caches)."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = {
            "cubic_map": cubic_map(),
            "logistic_map": logistic_map(),
            "linear_cooperative": linear_cooperative(),
            "dirichlet_cubic_5": parabolic_system("dirichlet", 32, 5.0, name="dirichlet_cubic_5"),
            "dirichlet_cubic_15": parabolic_system("dirichlet", 32, 15.0, name="dirichlet_cubic_15"),
            "neumann_cubic_5": parabolic_system("neumann", 32, 5.0, name="neumann_cubic_5"),
            # strength 5 on the ring: the period map then contracts like
            # exp(-10) near the homogeneous states, which keeps image gaps of
            # ordered pairs well above roundoff for the order property checks
            # (strength 15 would contract like exp(-30) and flatten them).
            "ring_cubic_5": parabolic_system("ring", 16, 5.0, name="ring_cubic_5"),
            "radial_cubic_15": parabolic_system(
                "radial", 32, 15.0, radial_dim=3, name="radial_cubic_15"
            ),
        }
    return dict(_CATALOG)


def monotone_catalog():
    """Catalog restricted to systems expected to be (strongly) monotone."""
    return {k: s for k, s in catalog().items() if s.monotone_expected}


def parabolic_catalog():
    """Catalog restricted to the parabolic systems."""
    return {k: s for k, s in catalog().items() if isinstance(s.kind, Parabolic)}


# ---------------------------------------------------------------------------
# evaluation

def apply_map(system, u, iteration=0):
    """Apply the map once to a raw value array. Fast path for orbit loops."""
    kind = system.kind
    if isinstance(kind, Parabolic):
        return _propagator(system).period(u, 2.0 * system.kappa, iteration)
    if isinstance(kind, AnalyticScalar):
        y = kind.value(np.asarray(u, dtype=float))
    else:
        y = kind.matrix @ np.asarray(u, dtype=float)
    sup = float(np.max(np.abs(y)))
    if not np.isfinite(sup):
        raise NumericalError("map produced a non-finite value")
    if sup > 2.0 * system.kappa:
        raise EscapeError(
            f"image left the inflated trapping box (sup {sup:.3g} > {2.0 * system.kappa:.3g})",
            iteration=iteration,
            sup=sup,
        )
    return y


def evaluate(system, x):
    """Apply the map once. Raises EscapeError outside the inflated box."""
    if x.grid != system.grid:
        raise DimensionMismatchError(
            f"state grid {x.grid} does not match system grid {system.grid}"
        )
    return x.with_values(apply_map(system, x.values))


def jacobian(system, x):
    """Dense derivative of the map at x, shape (n, n).

    Parabolic systems propagate the identity block through the variational
    recursion in a single lockstep pass.
    """
    kind = system.kind
    if isinstance(kind, AnalyticScalar):
        return np.array([[kind.deriv(float(x.values[0]))]])
    if isinstance(kind, LinearCooperative):
        return kind.matrix.copy()
    if x.grid != system.grid:
        raise DimensionMismatchError(
            f"state grid {x.grid} does not match system grid {system.grid}"
        )
    _, v = _propagator(system).period_with_tangent(
        x.values, np.eye(system.n), 2.0 * system.kappa
    )
    return v


# ---------------------------------------------------------------------------
# standing-assumption validators

def _reaction_sample(system, t, node, u):
    """Reaction value at one probe point, profile factor included."""
    kind = system.kind
    if isinstance(kind, AnalyticScalar):
        return kind.value(u) - u
    nl = kind.nonlinearity
    prof = 1.0 if nl.profile is None else float(nl.profile[node])
    xs = kind.grid.nodes() if nl.form == "custom" else None
    x_node = None if xs is None else xs[node]
    val = nl.value(t, kind.tau, np.asarray(u), ux=np.asarray(0.0), xs=x_node)
    return prof * float(val)


def validate_dissipativity(system, sample_count=200, seed=7083):
    """Sign condition pulling large states inward: u * f < 0 for kappa <= |u| <= 2 kappa.

    For explicit scalar maps the reaction is read as F(u) - u. worst_margin
    is the largest product u * f observed; any nonnegative value is a
    violation.
    """
    kind = system.kind
    if not isinstance(kind, (AnalyticScalar, Parabolic)):
        raise ValueError("dissipativity check applies to scalar reactions only")
    rng = np.random.default_rng(seed)
    kappa = system.kappa
    tau = kind.tau if isinstance(kind, Parabolic) else 1.0
    n = system.n
    violations = 0
    worst = -np.inf
    for _ in range(sample_count):
        t = rng.uniform(0.0, tau)
        node = int(rng.integers(0, n))
        u = float(rng.uniform(kappa, 2.0 * kappa)) * (1.0 if rng.uniform() < 0.5 else -1.0)
        margin = u * _reaction_sample(system, t, node, u)
        worst = max(worst, margin)
        if margin >= 0.0:
            violations += 1
    return PropertyReport("dissipativity", sample_count, violations, worst, seed)


def trapping_check(system, horizon=200, sample_count=20, seed=7084, initial_states=None):
    """Iterate from box samples and report any exit from the open kappa-box.

    worst_margin is the largest excess max_sup - kappa over all recorded
    iterates (negative values mean the box was never left).
    """
    rng = np.random.default_rng(seed)
    if initial_states is None:
        initial_states = [draw_box_state(system, rng) for _ in range(sample_count)]
    violations = 0
    worst = -np.inf
    for x in initial_states:
        exited = False
        try:
            y = x
            for _ in range(horizon):
                y = evaluate(system, y)
                sup = y.sup_norm()
                worst = max(worst, sup - system.kappa)
                if sup > system.kappa:
                    exited = True
        except (EscapeError, NumericalError):
            exited = True
            worst = np.inf
        if exited:
            violations += 1
    return PropertyReport("trapping", len(initial_states), violations, worst, seed)


def check_strong_positivity(system, probe_count=50, seed=7085, eta=1e-12):
    """Derivative positivity: DF(x) v must be strictly positive for v >= 0, v != 0.

    Probes mix coordinate directions with random nonnegative vectors at
    random box states. worst_margin is the smallest component of DF(x) v
    observed; the check passes when it stays above eta.
    """
    rng = np.random.default_rng(seed)
    n = system.n
    kind = system.kind
    violations = 0
    min_gap = np.inf
    for j in range(probe_count):
        x = draw_box_state(system, rng)
        if j < n:
            v = np.zeros(n)
            v[j] = 1.0
        else:
            v = rng.uniform(0.0, 1.0, size=n)
            if np.max(v) <= 0.0:
                v[0] = 1.0
        if isinstance(kind, Parabolic):
            _, dv = _propagator(system).period_with_tangent(
                x.values, v, 2.0 * system.kappa
            )
        elif isinstance(kind, AnalyticScalar):
            dv = kind.deriv(x.values) * v
        else:
            dv = kind.matrix @ v
        gap = float(np.min(dv))
        min_gap = min(min_gap, gap)
        if gap <= eta:
            violations += 1
    return PropertyReport("strong_positivity", probe_count, violations, min_gap, seed)
