"""Orbit classification: detection, refinement, stability, and probes."""

import numpy as np
import pytest

from monotone_lab import (
    ClassifyBudget,
    CycleCandidate,
    DimensionMismatchError,
    OrderError,
    Parabolic,
    VERDICTS,
    classify_orbit,
    cycle_spectral_radius,
    default_tol_cyc,
    detect_cycle,
    evaluate,
    iterate_orbit,
    jacobian,
    leq,
    linear_cooperative,
    negation_map,
    omega_plus_probe,
    omega_set,
    refine_cycle,
    separation_probe,
    set_distance,
)

LOGISTIC_R = 3.2


def logistic_two_cycle():
    r = LOGISTIC_R
    root = np.sqrt((r - 3.0) * (r + 1.0))
    return sorted(((r + 1.0 - root) / (2.0 * r), (r + 1.0 + root) / (2.0 * r)))


# ----------------------------------------------------------------- budget

def test_budget_validation():
    with pytest.raises(ValueError):
        ClassifyBudget(max_iterations=0)
    with pytest.raises(ValueError):
        ClassifyBudget(p_max=0)
    with pytest.raises(ValueError):
        ClassifyBudget(check_every=0)
    with pytest.raises(ValueError):
        ClassifyBudget(tol_stab=-1.0)
    with pytest.raises(ValueError):
        ClassifyBudget(newton_max_iter=-1)


def test_budget_resolution(cubic, dirichlet15):
    assert default_tol_cyc(cubic) == 1e-8
    assert default_tol_cyc(dirichlet15) == 1e-6
    resolved = ClassifyBudget(p_max=8).resolve(cubic)
    assert resolved.check_every == 8
    assert resolved.tol_cyc == 1e-8
    assert resolved.newton_tol == pytest.approx(1e-12)
    par = ClassifyBudget().resolve(dirichlet15)
    assert par.tol_cyc == 1e-6
    assert par.newton_tol == pytest.approx(1e-10)


# ----------------------------------------------------------------- orbits

def test_iterate_orbit_thinning(cubic):
    orb = iterate_orbit(cubic, 0.3, 10, thinning=3)
    np.testing.assert_array_equal(orb.indices, [0, 3, 6, 9])
    assert len(orb) == 4
    assert orb.state(0).values[0] == 0.3
    assert not orb.escaped


def test_iterate_orbit_escape_truncates():
    system = linear_cooperative(matrix=[[2.0]], kappa=1.0)
    orb = iterate_orbit(system, 1.0, 10)
    assert orb.escaped
    np.testing.assert_array_equal(orb.indices, [0, 1])
    np.testing.assert_allclose(orb.samples[:, 0], [1.0, 2.0])


def test_iterate_orbit_validation(cubic, coop):
    with pytest.raises(ValueError):
        iterate_orbit(cubic, 0.3, 10, thinning=0)
    with pytest.raises(ValueError):
        iterate_orbit(cubic, 0.3, -1)
    with pytest.raises(DimensionMismatchError):
        iterate_orbit(coop, np.zeros(3), 5)
    with pytest.raises(DimensionMismatchError):
        iterate_orbit(cubic, coop.zero_state(), 5)


def test_orbit_csv_shape(coop):
    orb = iterate_orbit(coop, [0.4, -0.1], 5)
    text = orb.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "iter,node_0,node_1"
    assert len(lines) == 7
    assert lines[1].startswith("0,")


# -------------------------------------------------------------- detection

def test_detect_cycle_finds_minimal_period():
    four = np.tile([0.0, 1.0, 0.0, 2.0], 3)
    cand = detect_cycle(four, p_max=4, tol_cyc=1e-8)
    assert cand.period == 4
    two = np.tile([0.0, 1.0], 6)
    assert detect_cycle(two, p_max=4, tol_cyc=1e-8).period == 2
    assert detect_cycle(np.ones(12), p_max=4, tol_cyc=1e-8).period == 1


def test_detect_cycle_rejects_transients():
    assert detect_cycle(np.arange(12.0), p_max=4, tol_cyc=1e-8) is None


def test_detect_cycle_needs_long_tail():
    with pytest.raises(ValueError):
        detect_cycle(np.ones(11), p_max=4, tol_cyc=1e-8)
    with pytest.raises(ValueError):
        detect_cycle(np.ones(12), p_max=0, tol_cyc=1e-8)


# ------------------------------------------------------------- refinement

def test_refine_polishes_logistic_two_cycle(logistic):
    lo, hi = logistic_two_cycle()
    cand = CycleCandidate(2, np.array([[lo + 1e-3], [hi - 1e-3]]))
    rec = refine_cycle(logistic, cand, newton_tol=1e-12)
    assert rec.newton_converged
    assert rec.residual < 1e-12
    assert sorted(rec.points[:, 0]) == pytest.approx([lo, hi], abs=1e-10)


def test_refine_handles_neutral_multiplier(logistic):
    # f'(u) = 1 at u = (1 - 1/r)/2, so the period-1 Newton matrix is singular
    u = (1.0 - 1.0 / LOGISTIC_R) / 2.0
    cand = CycleCandidate(1, np.array([[u]]))
    rec = refine_cycle(logistic, cand, newton_tol=1e-12)
    assert not rec.newton_converged
    fu = LOGISTIC_R * u * (1.0 - u)
    assert rec.residual == pytest.approx(abs(fu - u))
    assert rec.points[0, 0] == pytest.approx(u)


def test_refine_accepts_exact_cycle(cubic):
    rec = refine_cycle(cubic, CycleCandidate(1, np.array([[1.0]])), newton_tol=1e-12)
    assert rec.newton_converged
    assert rec.residual == 0.0
    assert rec.newton_iterations == 0


# ---------------------------------------------------------------- spectra

def test_spectral_radius_of_fixed_points(cubic, coop):
    det = cycle_spectral_radius(cubic, np.array([[0.0]]), detail=True)
    assert det.method == "power"
    assert det.rho == pytest.approx(1.1, abs=1e-10)
    rho = cycle_spectral_radius(cubic, np.array([[1.0]]))
    assert rho == pytest.approx(0.8, abs=1e-10)
    det = cycle_spectral_radius(coop, np.array([[0.0, 0.0]]), detail=True)
    assert det.rho == pytest.approx(0.7, abs=1e-8)


def test_spectral_radius_neutral_flip_cycle():
    neg = negation_map()
    det = cycle_spectral_radius(neg, np.array([[0.5], [-0.5]]), detail=True)
    assert det.rho == pytest.approx(1.0, abs=1e-12)


def test_spectral_radius_dense_fallback():
    # leading eigenvalues +-sqrt(2): the power ratio oscillates forever
    system = linear_cooperative(matrix=[[0.0, 2.0], [1.0, 0.0]], kappa=10.0)
    det = cycle_spectral_radius(
        system, np.array([[0.1, 0.1]]), max_power_iter=50, detail=True
    )
    assert det.method == "dense"
    assert det.rho == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_power_and_dense_radii_agree_on_catalog(cat):
    for name, system in cat.items():
        if not system.monotone_expected:
            continue
        if isinstance(system.kind, Parabolic):
            x0 = 0.5 * np.ones(system.n)
        else:
            x0 = 0.3 * np.ones(system.n)
        orb = iterate_orbit(system, x0, 60)
        point = orb.samples[-1]
        det = cycle_spectral_radius(system, point[None, :], detail=True)
        mono = jacobian(system, system.state(point))
        rho_dense = float(np.max(np.abs(np.linalg.eigvals(mono))))
        assert abs(det.rho - rho_dense) <= 1e-6 * max(1.0, rho_dense), name


# ---------------------------------------------------------- classification

def test_classify_cubic_attractors(cubic):
    up = classify_orbit(cubic, 0.5)
    assert up.verdict == "stable_cycle"
    assert up.cycle.period == 1
    assert up.cycle.points[0, 0] == pytest.approx(1.0, abs=1e-8)
    assert up.cycle.rho == pytest.approx(0.8, abs=1e-6)
    assert "period 1" in up.diagnostics
    down = classify_orbit(cubic, -0.5)
    assert down.cycle.points[0, 0] == pytest.approx(-1.0, abs=1e-8)


def test_classify_cubic_repeller(cubic):
    at_zero = classify_orbit(cubic, 0.0)
    assert at_zero.verdict == "unstable_cycle"
    assert at_zero.cycle.rho == pytest.approx(1.1, abs=1e-8)
    assert at_zero.cycle.stability == "unstable"


def test_classify_logistic_two_cycle(logistic):
    cls = classify_orbit(logistic, 0.3)
    assert cls.verdict == "stable_cycle"
    assert cls.cycle.period == 2
    r = LOGISTIC_R
    multiplier = 4.0 + 2.0 * r - r * r
    assert cls.cycle.rho == pytest.approx(multiplier, abs=1e-6)
    lo, hi = logistic_two_cycle()
    assert sorted(cls.cycle.points[:, 0]) == pytest.approx([lo, hi], abs=1e-8)


def test_classify_linear_contraction(coop):
    cls = classify_orbit(coop, [0.9, -0.3])
    assert cls.verdict == "stable_cycle"
    assert cls.cycle.period == 1
    assert cls.cycle.rho == pytest.approx(0.7, abs=1e-6)
    np.testing.assert_allclose(cls.cycle.points[0], 0.0, atol=1e-7)


def test_classify_escape():
    system = linear_cooperative(matrix=[[2.0]], kappa=1.0)
    cls = classify_orbit(system, 1.0)
    assert cls.verdict == "escaped"
    assert cls.cycle is None
    assert "escaped" in cls.diagnostics


def test_classify_unresolved_when_budget_short(logistic):
    cls = classify_orbit(logistic, 0.3, ClassifyBudget(max_iterations=5, p_max=4))
    assert cls.verdict == "unresolved"
    assert "5 iterations" in cls.diagnostics
    assert cls.iterations_used == 5


def test_classify_final_check_fires(cubic):
    # check_every beyond the budget: only the terminal check can detect
    cls = classify_orbit(
        cubic, 0.5, ClassifyBudget(max_iterations=300, p_max=4, check_every=1000)
    )
    assert cls.verdict == "stable_cycle"
    assert cls.iterations_used == 300


def test_classify_parabolic_fixed_profile(neumann5):
    budget = ClassifyBudget(max_iterations=120, p_max=8)
    cls = classify_orbit(neumann5, 0.2 * np.ones(neumann5.n), budget)
    assert cls.verdict == "stable_cycle"
    assert cls.cycle.period == 1
    np.testing.assert_allclose(cls.cycle.points[0], 1.0, atol=1e-6)
    # homogeneous-mode multiplier of the forced ODE w' = -10 a(t) w
    assert cls.cycle.rho == pytest.approx(np.exp(-10.0), rel=0.05)


def test_classification_serialization(cubic):
    cls = classify_orbit(cubic, 0.5)
    data = cls.to_json()
    assert data["verdict"] in VERDICTS
    assert set(data) == {"verdict", "iterations_used", "diagnostics", "cycle"}
    assert data["cycle"]["period"] == 1


# ------------------------------------------------------------- omega sets

def test_omega_set_dedup():
    orbit = np.array([[0.0], [0.9], [0.5], [0.8], [0.5], [0.8]])
    reps = omega_set(orbit, tail_fraction=0.5, tol=1e-3)
    assert reps.shape == (2, 1)
    with pytest.raises(ValueError):
        omega_set(orbit, tail_fraction=0.0)


def test_set_distance_hand_values():
    assert set_distance([[0.0]], [[1.0]]) == pytest.approx(1.0)
    assert set_distance([[0.0], [1.0]], [[1.0], [0.0]]) == 0.0
    assert set_distance([[0.0]], [[0.0], [2.0]]) == pytest.approx(2.0)
    with pytest.raises(DimensionMismatchError):
        set_distance([[0.0]], [[0.0, 1.0]])


# ----------------------------------------------------------------- probes

def test_omega_probe_unstable_point_is_two_sided_member(cubic):
    rep = omega_plus_probe(cubic, 0.0)
    assert rep.base_verdict == "unstable_cycle"
    assert rep.upper.membership == "member"
    assert rep.lower.membership == "member"
    assert rep.upper.consistent and rep.lower.consistent
    assert rep.upper.limit[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert rep.lower.limit[0, 0] == pytest.approx(-1.0, abs=1e-6)
    assert rep.upper.distance_to_base == pytest.approx(1.0, abs=1e-6)


def test_omega_probe_stable_point_is_no_member(cubic):
    rep = omega_plus_probe(cubic, 1.0)
    assert rep.base_verdict == "stable_cycle"
    assert rep.upper.membership == "not_member"
    assert rep.lower.membership == "not_member"
    assert rep.upper.distance_to_base < 1e-6


def test_omega_probe_degrades_to_inconclusive(cubic):
    rep = omega_plus_probe(
        cubic, 0.0, budget=ClassifyBudget(max_iterations=5, p_max=4)
    )
    assert rep.base_verdict == "unresolved"
    assert rep.upper.membership == "inconclusive"
    assert "unresolved" in rep.notes


def test_omega_probe_multi_direction_consistency(cubic):
    rep = omega_plus_probe(cubic, 0.0, extra_directions=[[2.0]])
    assert rep.direction_disagreement is not None
    assert rep.direction_disagreement < 1e-6


def test_omega_probe_validation(cubic, coop):
    with pytest.raises(ValueError):
        omega_plus_probe(cubic, 1.0, eps_values=(1.0,))
    with pytest.raises(ValueError):
        omega_plus_probe(cubic, 0.0, eps_values=())
    with pytest.raises(ValueError):
        omega_plus_probe(cubic, 0.0, eps_values=(-1e-3,))
    with pytest.raises(OrderError):
        omega_plus_probe(coop, [0.0, 0.0], direction=[1.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        omega_plus_probe(coop, [0.0, 0.0], direction=[1.0])


def test_omega_probe_serialization(cubic):
    data = omega_plus_probe(cubic, 0.0).to_json()
    assert data["upper"]["membership"] == "member"
    assert data["eps_values"] == [1e-2, 1e-3, 1e-4]
    assert isinstance(data["base_point"], list)


def test_separation_probe_contrasts_repeller_and_attractor(cubic, coop):
    assert separation_probe(cubic, 0.0) >= 0.9
    assert separation_probe(cubic, 1.0) < 1e-4
    assert separation_probe(coop, [0.0, 0.0]) < 1e-6


def test_separation_probe_validation(cubic):
    with pytest.raises(ValueError):
        separation_probe(cubic, 0.0, scales=(-1e-2,))
    with pytest.raises(ValueError):
        separation_probe(cubic, 0.0, scales=(2.0,))


def test_separation_probe_counts_escape_as_separated():
    system = linear_cooperative(matrix=[[1.5]], kappa=1.0)
    # base at the fixed point 0, pushes blow up and leave the box
    gap = separation_probe(system, 0.0, scales=(1e-2,),
                           budget=ClassifyBudget(max_iterations=60))
    assert gap >= 1.0


# --------------------------------------------------- order-theoretic facts

def test_orbit_from_subequilibrium_is_increasing(cubic, dirichlet15):
    orb = iterate_orbit(cubic, 0.1, 40)
    for i in range(len(orb) - 1):
        assert leq(orb.state(i), orb.state(i + 1))

    xs = dirichlet15.grid.nodes()
    x0 = dirichlet15.state(0.05 * np.sin(np.pi * xs))
    assert leq(x0, evaluate(dirichlet15, x0))
    orb = iterate_orbit(dirichlet15, x0, 25)
    for i in range(len(orb) - 1):
        assert leq(orb.state(i), orb.state(i + 1))


def test_stable_cycles_have_collapsing_separation(cubic, coop):
    for system, x0 in ((cubic, 0.5), (coop, [0.4, 0.2])):
        cls = classify_orbit(system, x0)
        assert cls.verdict == "stable_cycle" and cls.cycle.rho < 0.95
        budget = ClassifyBudget(max_iterations=80)
        gap = separation_probe(system, cls.cycle.points[0], budget=budget)
        assert gap < 10.0 * default_tol_cyc(system)


def test_stable_parabolic_cycle_separation(dirichlet15):
    budget = ClassifyBudget(max_iterations=60, p_max=8)
    cls = classify_orbit(dirichlet15, 0.5 * np.ones(dirichlet15.n), budget)
    assert cls.verdict == "stable_cycle"
    gap = separation_probe(
        dirichlet15, cls.cycle.points[0], budget=ClassifyBudget(max_iterations=60)
    )
    assert gap < 10.0 * default_tol_cyc(dirichlet15)
