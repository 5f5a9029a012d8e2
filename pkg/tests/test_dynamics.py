import numpy as np
import pytest

from bnls.dynamics import (
    FlowSpec,
    Trajectory,
    conv3,
    evolve,
    evolve_array,
    from_interaction,
    gamma_sum,
    gauge_forward,
    gauge_inverse,
    residual,
    rhs,
    rhs_split,
    separation_time,
    single_mode_solution,
    to_interaction,
    truncated_gauge_forward,
)
from bnls.fields import SpectralField, mass, sobolev_norm
from bnls.resonance import grid_triples


def random_field(n_grid, seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    dim = 2 * n_grid + 1
    return SpectralField(scale * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)), n_grid)


# -- convolution and interaction sums -----------------------------------------


def test_conv3_paths_agree():
    rng = np.random.default_rng(1)
    for n_grid in (3, 8, 20):
        dim = 2 * n_grid + 1
        a, b, c = (rng.standard_normal((2, dim)) + 1j * rng.standard_normal((2, dim)) for _ in "abc")
        direct = conv3(a, b, c, n_grid, "direct")
        fft = conv3(a, b, c, n_grid, "fft")
        assert np.max(np.abs(direct - fft)) <= 1e-10 * max(1.0, np.max(np.abs(direct)))


def test_gamma_sum_matches_table_enumeration():
    n_grid, t = 5, 0.83
    v = random_field(n_grid, seed=2, scale=1.0).coeffs
    for trunc in (None, 3):
        table = grid_triples(n_grid if trunc is None else trunc)
        brute = np.zeros(2 * n_grid + 1, dtype=np.complex128)
        for n1, n2, n3, n, phi in zip(table.n1, table.n2, table.n3, table.out, table.phi):
            brute[n + n_grid] += (
                np.exp(-1j * phi * t) * v[n1 + n_grid] * np.conj(v[n2 + n_grid]) * v[n3 + n_grid]
            )
        got = gamma_sum(v, t, n_grid, trunc)
        assert np.max(np.abs(got - brute)) <= 1e-12 * max(1.0, np.max(np.abs(brute)))


def test_rhs_single_mode_resonant_only():
    f = SpectralField.from_modes({2: 0.7 + 0.1j}, 5)
    spec = FlowSpec(variant="interaction", dt=1e-3)
    nonres, res = rhs_split(spec, f, 0.3)
    # empty nonresonant set; the convolution-minus-diagonals path cancels to rounding
    assert np.max(np.abs(nonres.coeffs)) <= 4 * np.finfo(float).eps
    expected = 1j * abs(f.get(2)) ** 2 * f.get(2)
    assert res.get(2) == pytest.approx(expected)


def test_truncated_rhs_vanishes_on_high_modes():
    f = random_field(8, seed=3)
    spec = FlowSpec(variant="truncated_embedded", trunc_n=4, dt=1e-3)
    out = rhs(spec, f, 0.1)
    high = np.abs(out.frequencies()) > 4
    assert np.max(np.abs(out.coeffs[high])) == 0.0


def test_renormalized_rhs_matches_gauge_chain_rule():
    """Finite-difference oracle: the gauge of a physical solution solves the
    renormalized equation.

    Differencing happens on the quartic-phase-derotated path (which is
    slow), and the exactly known linear part is restored afterwards; a
    direct stencil on the stiff trajectory would be dominated by the
    n^4 oscillation rather than by the identity under test.
    """
    n_grid = 5
    u0 = random_field(n_grid, seed=4)
    eps = 1e-6
    fine = FlowSpec(variant="physical", dt=eps / 4, integrator="filon")
    n4 = np.arange(-n_grid, n_grid + 1, dtype=np.float64) ** 4

    def derotated_gauged(tau):
        if tau == 0.0:
            return u0.coeffs.copy()
        _, u = evolve_array(fine, u0.coeffs, 0.0, tau, n_grid, store=False)
        w = gauge_forward(SpectralField(u, n_grid), tau)
        return np.exp(1j * tau * n4) * w.coeffs

    z = {k: derotated_gauged(k * eps) for k in (-2, -1, 1, 2)}
    fd = (-z[2] + 8 * z[1] - 8 * z[-1] + z[-2]) / (12 * eps)
    fd_rhs = fd - 1j * n4 * u0.coeffs  # remove the derotation generator
    spec = FlowSpec(variant="renormalized", dt=1e-3)
    analytic = rhs(spec, u0, 0.0)
    scale = max(1.0, float(np.max(np.abs(analytic.coeffs))))
    assert np.max(np.abs(fd_rhs - analytic.coeffs)) <= 1e-10 * scale


# -- evolution ------------------------------------------------------------------


def test_zero_and_degenerate_trajectories():
    spec = FlowSpec(variant="interaction", dt=1e-3)
    z = SpectralField.zero(4)
    traj = evolve(spec, z, 0.0, 0.05)
    assert np.max(np.abs(traj.coeffs)) == 0.0
    single = evolve(spec, random_field(4), 0.3, 0.3)
    assert len(single) == 1
    assert np.array_equal(single.coeffs[0], single.initial.coeffs)


def test_single_mode_against_closed_form():
    a = 0.7 + 0.3j
    for variant in ("physical", "renormalized"):
        for sign in (+1, -1):
            spec = FlowSpec(variant=variant, sign=sign, dt=1e-4)
            traj = evolve(spec, SpectralField.from_modes({1: a}, 4), 0.0, 0.1)
            if variant == "physical":
                expected = a * np.exp(-1j * (1.0 + sign * abs(a) ** 2) * 0.1)
            else:
                # renormalized single mode: i w' = w_xxxx + sign(|w|^2 - 2|w|^2) w
                expected = a * np.exp(-1j * (1.0 - sign * abs(a) ** 2) * 0.1)
            assert abs(traj.final.get(1) - expected) <= 1e-9


def test_explicit_solution_matches_physical_evolution():
    a = 0.7 + 0.3j
    spec = FlowSpec(variant="physical", dt=1e-4)
    traj = evolve(spec, SpectralField.from_modes({1: a}, 4), 0.0, 0.1)
    sol = single_mode_solution(1, a, +1, 0.1, 0.0, n_grid=4)
    assert np.max(np.abs(sol.coeffs - traj.final.coeffs)) <= 1e-9


@pytest.mark.parametrize("integ,tol", [("rk4", 1e-7), ("gauss", 1e-6), ("filon", 5e-11)])
def test_integrators_converge_to_shared_reference(integ, tol):
    n_grid = 6
    f0 = random_field(n_grid, seed=5, scale=0.6)
    ref_spec = FlowSpec(variant="interaction", dt=1e-6, integrator="rk4")
    _, ref = evolve_array(ref_spec, f0.coeffs, 0.0, 0.005, n_grid, store=False)
    spec = FlowSpec(variant="interaction", dt=1e-4, integrator=integ)
    _, got = evolve_array(spec, f0.coeffs, 0.0, 0.005, n_grid, store=False)
    assert np.max(np.abs(got - ref)) <= tol


@pytest.mark.parametrize("integ", ["rk4", "gauss"])
def test_classical_schemes_are_fourth_order(integ):
    n_grid = 5
    f0 = random_field(n_grid, seed=18, scale=0.6)
    ref_spec = FlowSpec(variant="interaction", dt=1e-6, integrator="rk4")
    _, ref = evolve_array(ref_spec, f0.coeffs, 0.0, 0.004, n_grid, store=False)
    errs = []
    for dt in (4e-4, 2e-4):
        spec = FlowSpec(variant="interaction", dt=dt, integrator=integ)
        _, got = evolve_array(spec, f0.coeffs, 0.0, 0.004, n_grid, store=False)
        errs.append(np.max(np.abs(got - ref)))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.5)


def test_mass_conservation_all_variants_short():
    ens = random_field(12, seed=6, scale=0.4)
    for variant, trunc in [
        ("physical", None),
        ("renormalized", None),
        ("interaction", None),
        ("truncated_embedded", 6),
        ("truncated_finite", 12),
        ("approx_physical", 6),
    ]:
        spec = FlowSpec(variant=variant, trunc_n=trunc, dt=1e-3)
        traj = evolve(spec, ens, 0.0, 0.05)
        drift = abs(mass(traj.final) - mass(traj.initial)) / mass(traj.initial)
        assert drift <= 1e-11, (variant, drift)


def test_hamiltonian_conserved_on_physical_flow():
    from bnls.fields import hamiltonian

    f0 = random_field(8, seed=7, scale=0.4)
    spec = FlowSpec(variant="physical", dt=1e-4, integrator="filon")
    traj = evolve(spec, f0, 0.0, 0.02)
    h0 = hamiltonian(traj.initial, +1)
    hT = hamiltonian(traj.final, +1)
    assert abs(hT - h0) <= 1e-9 * max(1.0, abs(h0))


def test_truncated_flow_freezes_high_modes():
    f0 = random_field(10, seed=8)
    spec = FlowSpec(variant="truncated_embedded", trunc_n=4, dt=1e-3)
    traj = evolve(spec, f0, 0.0, 0.05)
    high = np.abs(f0.frequencies()) > 4
    assert np.array_equal(traj.final.coeffs[high], f0.coeffs[high])


def test_truncated_finite_requires_support():
    f0 = random_field(8, seed=9)
    spec = FlowSpec(variant="truncated_finite", trunc_n=4, dt=1e-3)
    with pytest.raises(ValueError):
        evolve(spec, f0, 0.0, 0.01)


def test_flow_two_parameter_property():
    f0 = random_field(6, seed=10, scale=0.5)
    spec = FlowSpec(variant="truncated_embedded", trunc_n=6, dt=1e-3)
    _, mid = evolve_array(spec, f0.coeffs, 0.0, 0.02, 6, store=False)
    _, end_two = evolve_array(spec, mid, 0.02, 0.05, 6, store=False)
    _, end_one = evolve_array(spec, f0.coeffs, 0.0, 0.05, 6, store=False)
    assert np.max(np.abs(end_two - end_one)) <= 1e-12


def test_inverse_flow_and_conjugation_reversal():
    f0 = random_field(8, seed=11, scale=0.5)
    spec = FlowSpec(variant="interaction", dt=1e-3, integrator="gauss")
    _, fwd = evolve_array(spec, f0.coeffs, 0.0, 0.05, 8, store=False)
    _, back = evolve_array(spec, fwd, 0.05, 0.0, 8, store=False)
    assert np.max(np.abs(back - f0.coeffs)) <= 1e-12
    # running backward in time equals conjugating data, running forward, conjugating
    _, neg = evolve_array(spec, f0.coeffs, 0.0, -0.05, 8, store=False)
    _, conj_fwd = evolve_array(spec, np.conj(f0.coeffs), 0.0, 0.05, 8, store=False)
    assert np.max(np.abs(np.conj(neg) - conj_fwd)) <= 1e-12


def test_approx_physical_conserves_both_masses():
    f0 = random_field(12, seed=12, scale=0.4)
    trunc = 5
    spec = FlowSpec(variant="approx_physical", trunc_n=trunc, dt=1e-3)
    traj = evolve(spec, f0, 0.0, 0.05)
    low = np.abs(f0.frequencies()) <= trunc
    m_full_0 = float(np.sum(np.abs(f0.coeffs) ** 2))
    m_full_T = float(np.sum(np.abs(traj.final.coeffs) ** 2))
    m_low_0 = float(np.sum(np.abs(f0.coeffs[low]) ** 2))
    m_low_T = float(np.sum(np.abs(traj.final.coeffs[low]) ** 2))
    assert abs(m_full_T - m_full_0) <= 1e-12 * m_full_0
    assert abs(m_low_T - m_low_0) <= 1e-12 * m_low_0


def test_truncated_gauge_composition_on_low_modes():
    """Conjugating the truncated physical approximation by the low-mode gauge
    and the free flow reproduces the embedded truncated flow on |n| <= N."""
    n_grid, trunc, t_end = 10, 4, 0.05
    f0 = random_field(n_grid, seed=13, scale=0.5)
    approx = FlowSpec(variant="approx_physical", trunc_n=trunc, dt=1e-4, integrator="filon")
    embedded = FlowSpec(variant="truncated_embedded", trunc_n=trunc, dt=1e-4, integrator="filon")
    _, uN = evolve_array(approx, f0.coeffs, 0.0, t_end, n_grid, store=False)
    _, vN = evolve_array(embedded, f0.coeffs, 0.0, t_end, n_grid, store=False)
    gauged = truncated_gauge_forward(SpectralField(uN, n_grid), t_end, trunc)
    composed = to_interaction(gauged, t_end)
    low = np.abs(np.arange(-n_grid, n_grid + 1)) <= trunc
    assert np.max(np.abs(composed.coeffs[low] - vN[low])) <= 1e-9


# -- gauge and interaction maps ---------------------------------------------------


def test_gauge_maps():
    f = random_field(5, seed=14)
    assert np.array_equal(gauge_forward(f, 0.0).coeffs, f.coeffs)
    g = gauge_forward(f, 0.7)
    assert mass(g) == pytest.approx(mass(f), rel=1e-14)
    back = gauge_inverse(g, 0.7)
    # exact inverse up to rounding of the (large) phase argument 2 t sum|f|^2
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))
    c = 1.1 - 0.2j
    single = gauge_forward(SpectralField.from_modes({0: c}), 0.3)
    assert single.get(0) == pytest.approx(c * np.exp(2j * 0.3 * abs(c) ** 2))


def test_interaction_picture_maps():
    f = random_field(6, seed=15)
    assert np.array_equal(to_interaction(f, 0.0).coeffs, f.coeffs)
    v = to_interaction(f, 0.4)
    for s in (0.0, 0.8, 2.0):
        assert sobolev_norm(v, s) == pytest.approx(sobolev_norm(f, s), rel=1e-13)
    back = from_interaction(v, 0.4)
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-14 * np.max(np.abs(f.coeffs))


def test_composition_identity_small_grid():
    u0 = random_field(8, seed=16, scale=0.5)
    t_end = 0.05
    phys = FlowSpec(variant="physical", dt=1e-4, integrator="filon")
    inter = FlowSpec(variant="interaction", dt=1e-4, integrator="filon")
    _, up = evolve_array(phys, u0.coeffs, 0.0, t_end, 8, store=False)
    _, v = evolve_array(inter, u0.coeffs, 0.0, t_end, 8, store=False)
    u_comp = gauge_inverse(from_interaction(SpectralField(v, 8), t_end), t_end)
    assert sobolev_norm(SpectralField(up, 8) - u_comp, 0.0) <= 1e-9


# -- explicit solutions and residuals -----------------------------------------------


def test_explicit_solution_time_zero():
    s = -0.25
    sol = single_mode_solution(3, 1.0 + 2.0j, +1, 0.0, s)
    assert sol.get(3) == pytest.approx(3.0 ** (-s) * (1.0 + 2.0j))


def test_separation_matches_closed_form():
    s = -0.25
    mode = 8192
    for n in (1, 2, 5):
        tn = separation_time(mode, s, n)
        u1 = single_mode_solution(mode, 1.0, +1, tn, s)
        u2 = single_mode_solution(mode, 1.0 + 1.0 / n, +1, tn, s)
        assert abs(sobolev_norm(u1 - u2, s) - (2.0 + 1.0 / n)) <= 1e-8


def test_residual_of_exact_solution_scales():
    s, a = 0.0, 0.9 + 0.2j

    def sampled_traj(dt):
        times = np.arange(5) * dt
        states = [single_mode_solution(1, a, +1, float(t), s, n_grid=3) for t in times]
        return Trajectory(
            times=times,
            coeffs=np.stack([f.coeffs for f in states]),
            spec=FlowSpec(variant="physical", dt=dt),
            n_grid=3,
        )

    res_coarse = residual(sampled_traj(1e-3))
    res_fine = residual(sampled_traj(5e-4))
    assert res_coarse <= 1e-5
    # second-order convergence of the centered stencil
    assert res_coarse / res_fine == pytest.approx(4.0, rel=0.1)


def test_residual_zero_trajectory_and_guards():
    spec = FlowSpec(variant="interaction", dt=1e-3)
    z = evolve(spec, SpectralField.zero(3), 0.0, 0.004)
    assert residual(z) == 0.0
    with pytest.raises(ValueError):
        residual(Trajectory(times=np.array([0.0]), coeffs=np.zeros((1, 7)), spec=spec, n_grid=3))


def test_spec_validation():
    with pytest.raises(ValueError):
        FlowSpec(variant="nope")
    with pytest.raises(ValueError):
        FlowSpec(variant="truncated_embedded")
    with pytest.raises(ValueError):
        FlowSpec(variant="physical", dt=-1.0)
    with pytest.raises(ValueError):
        FlowSpec(variant="interaction", integrator="if_rk4").resolved_integrator(8)
