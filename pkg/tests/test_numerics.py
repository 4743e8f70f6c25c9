"""Discretization structure, stepping accuracy, and tangent consistency."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from monotone_lab import (
    DimensionMismatchError,
    EscapeError,
    Grid,
    GridError,
    StateVector,
    SteppingScheme,
    build_diffusion,
    evaluate,
    gradient_matrix,
    parabolic_system,
    propagate_period,
    propagate_tangent,
    step,
)


def discrete_mu1(n):
    # smallest eigenvalue of -A on the dirichlet grid with n interior nodes
    h = 1.0 / (n + 1)
    return 4.0 / (h * h) * np.sin(np.pi * h / 2.0) ** 2


def diffusion_only(n, steps, grid="dirichlet"):
    return parabolic_system(
        grid, n, strength=0.0, modulation=0.0, form="linear",
        steps_per_period=steps, name="diffusion_only",
    )


# ---------------------------------------------------------- operator shape

def test_dirichlet_operator_entries():
    op = build_diffusion(Grid("dirichlet", 8))
    inv = 81.0  # h = 1/9
    np.testing.assert_allclose(op.main, -2.0 * inv)
    np.testing.assert_allclose(op.lower, inv)
    np.testing.assert_allclose(op.upper, inv)
    assert op.corner_low == 0.0 and op.corner_high == 0.0
    sums = op.row_sums()
    np.testing.assert_allclose(sums[1:-1], 0.0, atol=1e-9)
    assert sums[0] == pytest.approx(-inv)
    assert sums[-1] == pytest.approx(-inv)


def test_neumann_operator_conserves_mass():
    op = build_diffusion(Grid("neumann", 9))
    np.testing.assert_allclose(op.row_sums(), 0.0, atol=1e-9)
    inv = 1.0 / Grid("neumann", 9).h ** 2
    assert op.upper[0] == pytest.approx(2.0 * inv)
    assert op.lower[-1] == pytest.approx(2.0 * inv)


def test_ring_operator_is_circulant():
    n = 8
    op = build_diffusion(Grid("ring", n))
    dense = op.to_dense()
    np.testing.assert_allclose(dense.sum(axis=1), 0.0, atol=1e-9)
    assert op.corner_low > 0.0 and op.corner_high > 0.0
    # invariance under the one-node cyclic shift S u = roll(u, 1)
    shift = np.zeros((n, n))
    for i in range(n):
        shift[i, (i - 1) % n] = 1.0
    np.testing.assert_array_equal(dense @ shift, shift @ dense)


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_radial_operator_structure(dim):
    n = 16
    op = build_diffusion(Grid("radial", n, dim=dim))
    assert np.all(op.lower > 0.0)
    assert np.all(op.upper > 0.0)
    inv = float(n * n)
    assert op.main[0] == pytest.approx(-2.0 * dim * inv)
    assert op.upper[0] == pytest.approx(2.0 * dim * inv)
    sums = op.row_sums()
    # conservation form: interior rows sum to zero, outer row leaks to the
    # eliminated zero boundary
    np.testing.assert_allclose(sums[1:-1], 0.0, atol=1e-6 * inv)
    assert sums[-1] < 0.0


def test_diffusion_rejects_flat_and_tiny_grids():
    with pytest.raises(GridError):
        build_diffusion(Grid("flat", 8))
    with pytest.raises(GridError):
        build_diffusion(Grid("dirichlet", 2))
    with pytest.raises(GridError):
        gradient_matrix(Grid("flat", 8))


def test_gradient_matrix_second_order():
    n = 64
    gd = Grid("dirichlet", n)
    xs = gd.nodes()
    err = gradient_matrix(gd) @ np.sin(np.pi * xs) - np.pi * np.cos(np.pi * xs)
    assert np.max(np.abs(err)) < 0.02

    gn = Grid("neumann", n)
    xs = gn.nodes()
    err = gradient_matrix(gn) @ np.cos(np.pi * xs) + np.pi * np.sin(np.pi * xs)
    assert np.max(np.abs(err)) < 0.02

    gr = Grid("ring", n)
    xs = gr.nodes()
    err = gradient_matrix(gr) @ np.sin(2 * np.pi * xs) - 2 * np.pi * np.cos(2 * np.pi * xs)
    assert np.max(np.abs(err)) < 0.02


def test_stepping_scheme_validation():
    SteppingScheme(steps_per_period=1, theta=0.0)
    with pytest.raises(ValueError):
        SteppingScheme(steps_per_period=0)
    with pytest.raises(ValueError):
        SteppingScheme(theta=1.2)
    with pytest.raises(ValueError):
        SteppingScheme(newton_tol=-1.0)


# ------------------------------------------------------- stepping accuracy

def test_pure_diffusion_matches_rational_decay():
    # Crank-Nicolson on the lowest dirichlet mode has the exact discrete
    # amplification ((1 - dt mu/2) / (1 + dt mu/2))^M
    n, m_steps = 31, 200
    system = diffusion_only(n, m_steps)
    xs = system.grid.nodes()
    u0 = np.sin(np.pi * xs)
    out = propagate_period(system.state(u0), system)
    mu = discrete_mu1(n)
    dt = 1.0 / m_steps
    factor = ((1.0 - dt * mu / 2.0) / (1.0 + dt * mu / 2.0)) ** m_steps
    measured = out.values / u0
    np.testing.assert_allclose(measured, factor, rtol=1e-10)


def test_pure_diffusion_near_exponential_decay():
    # over one period the CN product should track e^{-mu1} to O(dt^2),
    # about 0.2% at M=200
    system = diffusion_only(31, 200)
    xs = system.grid.nodes()
    u0 = np.sin(np.pi * xs)
    out = propagate_period(system.state(u0), system)
    factor = float(out.values[15] / u0[15])
    target = np.exp(-discrete_mu1(31))
    rel = abs(factor - target) / target
    assert rel < 5e-3


def test_time_refinement_is_second_order():
    def run(m_steps):
        system = parabolic_system("dirichlet", 31, 15.0, steps_per_period=m_steps)
        xs = system.grid.nodes()
        u0 = 0.8 * np.sin(np.pi * xs) + 0.3 * np.sin(2 * np.pi * xs)
        return propagate_period(system.state(u0), system).values

    ref = run(3200)
    errs = [np.max(np.abs(run(m) - ref)) for m in (100, 200, 400)]
    r1 = errs[0] / errs[1]
    r2 = errs[1] / errs[2]
    assert 3.2 < r1 < 4.8, (errs, r1)
    assert 3.2 < r2 < 4.8, (errs, r2)


def test_grid_refinement_is_second_order():
    # nested dirichlet grids: nodes of n = 2^k - 1 sit inside the n = 255 grid
    m_steps = 1600

    def run(n):
        system = parabolic_system("dirichlet", n, 15.0, steps_per_period=m_steps)
        xs = system.grid.nodes()
        u0 = 0.8 * np.sin(np.pi * xs) + 0.3 * np.sin(2 * np.pi * xs)
        return propagate_period(system.state(u0), system).values

    ref = run(255)
    errs = []
    for n in (15, 31, 63):
        stride = 256 // (n + 1)
        idx = np.arange(1, n + 1) * stride - 1
        errs.append(np.max(np.abs(run(n) - ref[idx])))
    r1 = errs[0] / errs[1]
    r2 = errs[1] / errs[2]
    assert 3.2 < r1 < 4.8, (errs, r1)
    assert 3.2 < r2 < 4.8, (errs, r2)


def test_single_step_uses_phase(dirichlet15):
    xs = dirichlet15.grid.nodes()
    x = dirichlet15.state(0.3 * np.sin(np.pi * xs))
    at_zero = step(x, 0.0, dirichlet15)
    quarter = step(x, 0.25, dirichlet15)
    # modulation 0.3 peaks at tau/4, so the reaction pushes harder there
    assert quarter.sup_norm() > at_zero.sup_norm()
    assert at_zero.grid == x.grid


def test_stepping_requires_parabolic_and_matching_grid(cubic, dirichlet15):
    x = cubic.state([0.2])
    with pytest.raises(ValueError):
        propagate_period(x, cubic)
    with pytest.raises(ValueError):
        step(x, 0.0, cubic)
    wrong = StateVector(np.zeros(7), Grid("dirichlet", 7))
    with pytest.raises(DimensionMismatchError):
        propagate_period(wrong, dirichlet15)


def test_escape_during_period_integration():
    system = parabolic_system(
        "dirichlet", 15, strength=25.0, modulation=0.0, form="linear",
        name="unstable_linear",
    )
    xs = system.grid.nodes()
    x = system.state(0.5 * np.sin(np.pi * xs))
    with pytest.raises(EscapeError) as info:
        propagate_period(x, system)
    assert info.value.sup > 2.0 * system.kappa
    assert info.value.step is not None


def test_profile_shape_must_match_grid():
    system = parabolic_system("dirichlet", 32, profile=np.ones(5))
    with pytest.raises(DimensionMismatchError):
        evaluate(system, system.zero_state())


# ------------------------------------------------------------ tangent map

def test_tangent_is_linear(dirichlet5):
    xs = dirichlet5.grid.nodes()
    x = dirichlet5.state(0.4 * np.sin(np.pi * xs))
    v = dirichlet5.state(np.cos(3.0 * xs))
    w = dirichlet5.state(xs * (1.0 - xs))
    tv = propagate_tangent(x, v, dirichlet5).values
    tw = propagate_tangent(x, w, dirichlet5).values
    combo = propagate_tangent(
        x, dirichlet5.state(2.0 * v.values - 0.5 * w.values), dirichlet5
    ).values
    np.testing.assert_allclose(combo, 2.0 * tv - 0.5 * tw, rtol=1e-12, atol=1e-14)


def test_tangent_matches_divided_differences(dirichlet5):
    xs = dirichlet5.grid.nodes()
    x = dirichlet5.state(0.4 * np.sin(np.pi * xs))
    v = np.sin(2.0 * np.pi * xs)
    eps = 1e-6
    plus = evaluate(dirichlet5, dirichlet5.state(x.values + eps * v)).values
    minus = evaluate(dirichlet5, dirichlet5.state(x.values - eps * v)).values
    fd = (plus - minus) / (2.0 * eps)
    tv = propagate_tangent(x, dirichlet5.state(v), dirichlet5).values
    assert np.max(np.abs(tv - fd)) < 1e-6 * max(1.0, np.max(np.abs(tv)))


def test_tangent_block_and_vector_agree(dirichlet5):
    from monotone_lab import jacobian

    xs = dirichlet5.grid.nodes()
    x = dirichlet5.state(0.2 * np.sin(np.pi * xs))
    jac = jacobian(dirichlet5, x)
    assert jac.shape == (dirichlet5.n, dirichlet5.n)
    for j in (0, dirichlet5.n // 2, dirichlet5.n - 1):
        e = np.zeros(dirichlet5.n)
        e[j] = 1.0
        col = propagate_tangent(x, dirichlet5.state(e), dirichlet5).values
        np.testing.assert_allclose(jac[:, j], col, rtol=1e-12, atol=1e-15)


# ------------------------------------------------------------- concurrency

def test_period_map_is_thread_safe(dirichlet5):
    xs = dirichlet5.grid.nodes()
    states = [
        dirichlet5.state(0.1 * (k + 1) / 16.0 * np.sin(np.pi * xs) + 0.05 * np.sin(2 * np.pi * xs))
        for k in range(16)
    ]
    serial = [evaluate(dirichlet5, s).values for s in states]
    with ThreadPoolExecutor(max_workers=8) as pool:
        threaded = list(pool.map(lambda s: evaluate(dirichlet5, s).values, states))
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)
