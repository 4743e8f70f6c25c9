"""Method-of-lines discretization and one-period propagation.

The continuous model is a scalar reaction-diffusion equation on the unit
interval (or ring, or radial segment) with a time-periodic reaction,

    du/dt = kappa_d * A u + f(t, x, u, du/dx),      A = second-order operator,

whose time-tau solution operator is the period map studied everywhere else in
the package. Space is discretized by second-order central differences
(``build_diffusion``), time by an implicit-explicit two-step scheme:

* diffusion is advanced with a theta weighting (theta = 1/2 is
  Crank-Nicolson),
* the reaction is explicit Adams-Bashforth with weights 3/2 and -1/2, an
  implicit-Euler-style startup step supplying the missing history.

Both parts are second order at theta = 1/2, which the refinement tests
verify. One step of width dt = tau/M reads

    (I - theta dt A) u_{k+1} = (I + (1-theta) dt A) u_k
                               + dt (3/2 f_k - 1/2 f_{k-1}).

The implicit matrix is factored once per system (the grids here are small,
at most a few hundred nodes) and reused for every step, every trajectory.

Tangent propagation advances the exact derivative of the discrete step:
the same recursion with f replaced by its u-linearization frozen along the
base trajectory, including the Adams-Bashforth history of the linearized
reaction. Base and tangent advance in lockstep, so the result matches
divided differences of the fully discrete period map to roundoff plus the
differencing error.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EscapeError, GridError, NumericalError
from .grids import Grid


@dataclass(frozen=True)
class SteppingScheme:
    """Time discretization of one forcing period.

    steps_per_period
        Number M of equal steps covering [0, tau].
    theta
        Implicitness of the diffusion solve, in [0, 1]. The default 1/2 is
        Crank-Nicolson; the reaction stays explicit regardless.
    newton_tol, newton_max_iter
        Reserved for a fully implicit stepping mode; the implicit-explicit
        path never reads them.
    """

    steps_per_period: int = 200
    theta: float = 0.5
    newton_tol: float = 1e-10
    newton_max_iter: int = 20

    def __post_init__(self):
        if self.steps_per_period < 1:
            raise ValueError("steps_per_period must be at least 1")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.newton_tol <= 0 or self.newton_max_iter < 1:
            raise ValueError("newton parameters must be positive")


@dataclass(frozen=True, eq=False)
class LinearOperatorBand:
    """Tridiagonal operator with optional periodic wrap corners.

    ``main`` has length n, ``lower`` and ``upper`` length n-1. ``corner_low``
    is the (0, n-1) entry and ``corner_high`` the (n-1, 0) entry; both are
    zero except on ring grids. Entries carry units of 1/length^2.
    """

    grid: Grid
    main: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    corner_low: float = 0.0
    corner_high: float = 0.0

    def to_dense(self):
        a = np.diag(self.main).astype(float)
        a += np.diag(self.lower, -1)
        a += np.diag(self.upper, 1)
        a[0, -1] += self.corner_low
        a[-1, 0] += self.corner_high
        return a

    def row_sums(self):
        return self.to_dense().sum(axis=1)


def build_diffusion(grid):
    """Second-order diffusion operator for the grid, as a banded matrix.

    Boundary handling by kind:

    * dirichlet: homogeneous boundary values eliminated; first and last rows
      simply lose a neighbor.
    * neumann: mirrored ghost nodes, so boundary rows read 2 (u_1 - u_0)/h^2
      and rows sum to zero.
    * ring: periodic wrap through the corner entries, rows sum to zero.
    * radial: profile u(r) in ``dim`` space dimensions. The interior stencil
      is the conservation form of u'' + (dim-1)/r u', with face weights
      (r +- h/2)^(dim-1) / r^(dim-1); this keeps every off-diagonal entry
      positive for any dim >= 2. The axis row uses the symmetry limit of the
      operator, dim * u'' with a mirrored ghost; r = 1 is held at zero.

    Off-diagonal entries are nonnegative for every kind, the sign structure
    behind order preservation of the heat propagator.
    """
    n = grid.n
    if grid.kind == "flat":
        raise GridError("no diffusion operator on a flat grid")
    if n < 3:
        raise GridError(f"diffusion operator needs at least 3 nodes, got {n}")
    h = grid.h
    inv = 1.0 / (h * h)
    if grid.kind == "dirichlet":
        main = np.full(n, -2.0 * inv)
        off = np.full(n - 1, inv)
        return LinearOperatorBand(grid, main, off, off.copy())
    if grid.kind == "neumann":
        main = np.full(n, -2.0 * inv)
        lower = np.full(n - 1, inv)
        upper = np.full(n - 1, inv)
        upper[0] = 2.0 * inv
        lower[-1] = 2.0 * inv
        return LinearOperatorBand(grid, main, lower, upper)
    if grid.kind == "ring":
        main = np.full(n, -2.0 * inv)
        off = np.full(n - 1, inv)
        return LinearOperatorBand(grid, main, off, off.copy(), corner_low=inv, corner_high=inv)
    # radial
    dim = grid.dim
    r = grid.nodes()
    main = np.empty(n)
    lower = np.empty(n - 1)
    upper = np.empty(n - 1)
    main[0] = -2.0 * dim * inv
    upper[0] = 2.0 * dim * inv
    power = dim - 1
    for i in range(1, n):
        w_minus = ((r[i] - h / 2.0) ** power) / (r[i] ** power) * inv
        w_plus = ((r[i] + h / 2.0) ** power) / (r[i] ** power) * inv
        lower[i - 1] = w_minus
        main[i] = -(w_minus + w_plus)
        if i < n - 1:
            upper[i] = w_plus
    return LinearOperatorBand(grid, main, lower, upper)


def gradient_matrix(grid):
    """Central first-derivative matrix matching the diffusion boundary rules.

    Used only by reactions that consume du/dx. Dirichlet and radial outer
    boundaries difference against an eliminated zero; mirrored ghosts make
    the derivative vanish at Neumann walls and at the radial axis; the ring
    wraps.
    """
    n = grid.n
    if grid.kind == "flat":
        raise GridError("no gradient operator on a flat grid")
    if n < 3:
        raise GridError(f"gradient operator needs at least 3 nodes, got {n}")
    half = 1.0 / (2.0 * grid.h)
    d = np.zeros((n, n))
    for i in range(1, n - 1):
        d[i, i - 1] = -half
        d[i, i + 1] = half
    if grid.kind == "dirichlet":
        d[0, 1] = half
        d[n - 1, n - 2] = -half
    elif grid.kind in ("neumann", "radial"):
        # mirrored ghost at the lower wall (and upper wall for neumann)
        if grid.kind == "radial":
            d[n - 1, n - 2] = -half
    else:  # ring
        d[0, 1] = half
        d[0, n - 1] = -half
        d[n - 1, n - 2] = -half
        d[n - 1, 0] = half
    return d


class _Propagator:
    """Precomputed one-period integrator for a single parabolic system.

    Holds the dense step matrices, the forcing samples at the step times,
    and specialized reaction closures, so that repeated propagation is a
    short numpy loop.
    """

    def __init__(self, system):
        par = system.kind
        grid = par.grid
        scheme = par.scheme
        n = grid.n
        m_steps = scheme.steps_per_period
        dt = par.tau / m_steps
        if par.diffusivity != 0.0:
            lap = par.diffusivity * build_diffusion(grid).to_dense()
        else:
            lap = np.zeros((n, n))
        eye = np.eye(n)
        a_imp = eye - scheme.theta * dt * lap
        try:
            s_inv = np.linalg.inv(a_imp)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"implicit diffusion matrix is singular: {exc}") from None
        self.grid = grid
        self.n = n
        self.m_steps = m_steps
        self.dt = dt
        self.tau = par.tau
        self.step_mat = s_inv @ (eye + (1.0 - scheme.theta) * dt * lap)
        self.source_mat = s_inv * dt
        self.times = dt * np.arange(m_steps)
        nl = par.nonlinearity
        self.nl = nl
        self.forcing = nl.forcing(self.times, par.tau)
        self.uses_gradient = nl.uses_gradient
        self.grad = gradient_matrix(grid) if self.uses_gradient else None
        self.xs = grid.nodes() if nl.form == "custom" else None
        if nl.profile is None:
            self.profile = 1.0
        else:
            prof = np.asarray(nl.profile, dtype=float)
            if prof.shape != (n,):
                raise DimensionMismatchError(
                    f"spatial profile has shape {prof.shape}, grid has {n} nodes"
                )
            self.profile = prof

    # reaction and its u-derivative at step k (forcing sampled on the step grid)
    def _f(self, k, u, ux):
        nl = self.nl
        if nl.form == "cubic":
            return (self.forcing[k] * nl.strength) * self.profile * (u - u * u * u)
        if nl.form == "linear":
            return (self.forcing[k] * nl.strength) * self.profile * u
        return nl.custom_value(self.times[k], self.xs, u, ux)

    def _f_du(self, k, u, ux):
        nl = self.nl
        if nl.form == "cubic":
            return (self.forcing[k] * nl.strength) * self.profile * (1.0 - 3.0 * u * u)
        if nl.form == "linear":
            return (self.forcing[k] * nl.strength) * (
                self.profile * np.ones_like(u) if np.isscalar(self.profile) else self.profile
            )
        return nl.custom_du(self.times[k], self.xs, u, ux)

    def _guard(self, u, k, escape_sup, iteration=0):
        sup = float(np.max(np.abs(u)))
        if not np.isfinite(sup):
            raise NumericalError(f"non-finite state at step {k}")
        if sup > escape_sup:
            raise EscapeError(
                f"trajectory left the inflated trapping box (sup {sup:.3g} > "
                f"{escape_sup:.3g}) at step {k}",
                iteration=iteration,
                step=k,
                sup=sup,
            )
        return sup

    def period(self, u0, escape_sup, iteration=0):
        """Advance one full period from phase t = 0. Returns the raw vector."""
        u = np.asarray(u0, dtype=float)
        f_prev = None
        for k in range(self.m_steps):
            ux = self.grad @ u if self.uses_gradient else None
            f_k = self._f(k, u, ux)
            expl = f_k if f_prev is None else 1.5 * f_k - 0.5 * f_prev
            u = self.step_mat @ u + self.source_mat @ expl
            f_prev = f_k
            self._guard(u, k, escape_sup, iteration)
        return u

    def period_with_tangent(self, u0, v0, escape_sup):
        """Advance base and tangent in lockstep for one period.

        ``v0`` may be a single vector (n,) or a block of columns (n, m);
        the block form assembles Jacobians in one pass.
        """
        u = np.asarray(u0, dtype=float)
        v = np.asarray(v0, dtype=float)
        block = v.ndim == 2
        f_prev = None
        g_prev = None
        for k in range(self.m_steps):
            ux = self.grad @ u if self.uses_gradient else None
            f_k = self._f(k, u, ux)
            du = self._f_du(k, u, ux)
            if block:
                jv = du[:, None] * v
            else:
                jv = du * v
            if self.uses_gradient and self.nl.custom_dux is not None:
                dux = self.nl.custom_dux(self.times[k], self.xs, u, ux)
                gv = self.grad @ v
                jv = jv + (dux[:, None] * gv if block else dux * gv)
            expl = f_k if f_prev is None else 1.5 * f_k - 0.5 * f_prev
            expl_v = jv if g_prev is None else 1.5 * jv - 0.5 * g_prev
            u = self.step_mat @ u + self.source_mat @ expl
            v = self.step_mat @ v + self.source_mat @ expl_v
            f_prev = f_k
            g_prev = jv
            self._guard(u, k, escape_sup)
            if not np.all(np.isfinite(v)):
                raise NumericalError(f"non-finite tangent at step {k}")
        return u, v

    def step_once(self, u0, t, escape_sup):
        """A single startup-weighted step from an arbitrary phase t."""
        u = np.asarray(u0, dtype=float)
        ux = self.grad @ u if self.uses_gradient else None
        nl = self.nl
        if nl.form == "custom":
            f_k = nl.custom_value(t, self.xs, u, ux)
        else:
            amp = nl.forcing(t, self.tau) * nl.strength
            base = (u - u * u * u) if nl.form == "cubic" else u
            f_k = amp * self.profile * base
        u = self.step_mat @ u + self.source_mat @ f_k
        self._guard(u, 0, escape_sup)
        return u


_PROPAGATORS = {}


def _propagator(system):
    key = id(system)
    prop = _PROPAGATORS.get(key)
    if prop is None or prop[0] is not system:
        prop = (system, _Propagator(system))
        _PROPAGATORS[key] = prop
    return prop[1]


def _require_parabolic(system):
    from .systems import Parabolic

    if not isinstance(system.kind, Parabolic):
        raise ValueError("stepping operations apply to parabolic systems only")


def _check_state(system, state):
    if state.grid != system.grid:
        raise DimensionMismatchError(
            f"state grid {state.grid} does not match system grid {system.grid}"
        )


def step(state, t, system):
    """One implicit-explicit step of width tau/M from phase t.

    A lone step has no reaction history, so it uses the startup weighting
    (plain explicit reaction); within ``propagate_period`` all subsequent
    steps use the two-step weights.
    """
    _require_parabolic(system)
    _check_state(system, state)
    u = _propagator(system).step_once(state.values, t, 2.0 * system.kappa)
    return state.with_values(u)


def propagate_period(state, system):
    """The period map: integrate one full forcing period from phase t = 0."""
    _require_parabolic(system)
    _check_state(system, state)
    u = _propagator(system).period(state.values, 2.0 * system.kappa)
    return state.with_values(u)


def propagate_tangent(state, tangent, system):
    """Derivative of the period map at ``state`` applied to ``tangent``.

    Integrates the variational recursion of the discrete scheme along the
    base trajectory, in lockstep, and returns the propagated tangent.
    """
    _require_parabolic(system)
    _check_state(system, state)
    _check_state(system, tangent)
    _, v = _propagator(system).period_with_tangent(
        state.values, tangent.values, 2.0 * system.kappa
    )
    return tangent.with_values(v)
