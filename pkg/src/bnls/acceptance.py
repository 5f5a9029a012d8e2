"""Acceptance battery: one callable per verification criterion.

Each function runs a pinned-parameter experiment and returns a
DiagnosticsReport whose flags decide pass/fail.  The same battery backs
``tests/test_acceptance.py`` and the ``suite`` command; ``scale='smoke'``
shrinks ensembles and horizons for a fast end-to-end exercise, while
``scale='full'`` grows them.  Tolerances never change across scales.
"""

from __future__ import annotations

import time

import numpy as np

from . import energy as energy_mod
from . import measures as measures_mod
from .dynamics import (
    FlowSpec,
    evolve,
    evolve_array,
    from_interaction,
    gauge_inverse,
    residual,
    separation_time,
    single_mode_solution,
)
from .fields import SpectralField, sobolev_norm
from .measures import EventSpec, GaussianSpec, sample
from .normalform import duhamel_split, normal_form_terms
from .reports import DiagnosticsReport

__all__ = ["CRITERIA", "run_criterion", "run_suite"]


def _report(command, config, scalars, flags, started, series=None):
    return DiagnosticsReport(
        command=command,
        config=config,
        scalars=scalars,
        series=series or {},
        flags=flags,
        wall_clock=time.time() - started,
    )


def _ball_ensemble(count, s=1.0, cutoff=16, r=2.0, seed=0, n_grid=None):
    return sample(GaussianSpec(s=s, sample_cutoff=cutoff, r=r, seed=seed, n_grid=n_grid), count)


# -- 1: exact phase factorization ----------------------------------------------


def phase_factorization(scale="verify"):
    started = time.time()
    limit = {"smoke": 12, "verify": 40, "full": 48}[scale]
    rng = np.arange(-limit, limit + 1, dtype=np.int64)
    n1, n2, n3 = np.meshgrid(rng, rng, rng, indexing="ij")
    n1, n2, n3 = n1.ravel(), n2.ravel(), n3.ravel()
    n = n1 - n2 + n3
    direct = n1**4 - n2**4 + n3**4 - n**4
    factored = (n1 - n2) * (n1 - n) * (n1**2 + n2**2 + n3**2 + n**2 + 2 * (n1 + n3) ** 2)
    mismatches = int(np.count_nonzero(direct != factored))
    return _report(
        "phase-factorization",
        {"limit": limit},
        {"quads": int(n1.shape[0]), "mismatches": mismatches},
        {"factorization_exact": mismatches == 0},
        started,
    )


# -- 2: mass conservation --------------------------------------------------------


def mass_conservation(scale="verify"):
    started = time.time()
    n_draws = {"smoke": 2, "verify": 10, "full": 10}[scale]
    t_end = {"smoke": 0.01, "verify": 0.1, "full": 0.1}[scale]
    ens = _ball_ensemble(n_draws, seed=42)
    worst = {}
    for variant, trunc in [
        ("physical", None),
        ("renormalized", None),
        ("interaction", None),
        ("truncated_embedded", 8),
        ("truncated_finite", 16),
        ("approx_physical", 8),
    ]:
        spec = FlowSpec(variant=variant, trunc_n=trunc, dt=1e-4)
        drift = np.zeros(n_draws)
        m0 = np.sum(np.abs(ens.coeffs) ** 2, axis=-1)

        def monitor(k, t, V, m0=m0, drift=drift):
            np.maximum(drift, np.abs(np.sum(np.abs(V) ** 2, axis=-1) - m0) / m0, out=drift)

        evolve_array(spec, ens.coeffs, 0.0, t_end, 16, store=False, monitor=monitor)
        worst[variant] = float(np.max(drift))
    tol = 1e-9
    return _report(
        "mass-conservation",
        {"n_draws": n_draws, "t_end": t_end, "dt": 1e-4, "n_grid": 16, "tol": tol},
        {f"drift_{k}": v for k, v in worst.items()},
        {f"mass_ok_{k}": v <= tol for k, v in worst.items()},
        started,
    )


# -- 3: gauge/free-flow composition ----------------------------------------------


def composition_identity(scale="verify"):
    started = time.time()
    t_end = {"smoke": 0.02, "verify": 0.1, "full": 0.1}[scale]
    u0 = _ball_ensemble(1, seed=11).fields[0]
    phys = FlowSpec(variant="physical", dt=1e-4, integrator="filon")
    inter = FlowSpec(variant="interaction", dt=1e-4, integrator="filon")
    _, up = evolve_array(phys, u0.coeffs, 0.0, t_end, 16, store=False)
    _, v = evolve_array(inter, u0.coeffs, 0.0, t_end, 16, store=False)
    u_comp = gauge_inverse(from_interaction(SpectralField(v, 16), t_end), t_end)
    diff = sobolev_norm(SpectralField(up, 16) - u_comp, 0.0)
    tol = 1e-8
    return _report(
        "composition-identity",
        {"t_end": t_end, "dt": 1e-4, "n_grid": 16, "tol": tol},
        {"l2_difference": diff},
        {"composition_ok": diff <= tol},
        started,
    )


# -- 4 & 5: normal-form identity and resonant smoothing bound ---------------------


def normal_form_identity(scale="verify"):
    started = time.time()
    n_draws = {"smoke": 3, "verify": 20, "full": 20}[scale]
    s = 1.5
    t_end = 0.05
    ens = sample(GaussianSpec(s=s, sample_cutoff=8, seed=1), n_draws)
    spec = FlowSpec(variant="interaction", dt=1e-4, integrator="filon")
    worst_identity = 0.0
    worst_ratio = 0.0
    worst_duhamel = 0.0
    for f in ens.fields:
        traj = evolve(spec, f, 0.0, t_end)
        split = duhamel_split(traj)
        terms = normal_form_terms(traj)
        worst_identity = max(
            worst_identity, sobolev_norm(terms.total() - split.nonresonant, 0.0)
        )
        duh = sobolev_norm(traj.final - traj.initial - split.nonresonant - split.resonant, 0.0)
        worst_duhamel = max(worst_duhamel, duh / max(split.quadrature_error_estimate, 1e-300))
        sup_hs = max(sobolev_norm(traj.state(i), s) for i in range(len(traj)))
        bound = split.t * sup_hs**3
        worst_ratio = max(worst_ratio, sobolev_norm(split.resonant, 3.0 * s) / bound)
    return _report(
        "normal-form-identity",
        {"n_draws": n_draws, "s": s, "n_grid": 8, "t_end": t_end, "dt": 1e-4},
        {
            "max_identity_residual": worst_identity,
            "max_resonant_ratio": worst_ratio,
            "max_duhamel_over_estimate": worst_duhamel,
        },
        {
            "identity_ok": worst_identity <= 1e-6,
            "resonant_bound_ok": worst_ratio <= 1.0 + 1e-6,
            "duhamel_ok": worst_duhamel <= 2.0,
        },
        started,
    )


# -- 6: Liouville ------------------------------------------------------------------


def liouville(scale="verify"):
    started = time.time()
    t_end = {"smoke": 0.05, "verify": 0.5, "full": 0.5}[scale]
    dt = 1e-4
    base_points = {"smoke": 1, "verify": 5, "full": 5}[scale]
    scalars, flags = {}, {}
    for trunc in (4, 8):
        points = [
            sample(GaussianSpec(s=1.0, sample_cutoff=trunc, r=2.0, seed=100 + j), 1).fields[0]
            for j in range(base_points)
        ]
        # classical joint stepping resolves the N=4 phases comfortably; at
        # N=8 the symplectic scheme pins the determinant at rounding level
        integ = "rk4" if trunc <= 4 else "gauss"
        dets = measures_mod.liouville_determinants(trunc, t_end, points, dt=dt, integrator=integ)
        # the symbolic divergence structure is point-independent; check once
        rep = measures_mod.liouville_check(trunc, 0.0, points[0], dt=dt)
        scalars[f"max_abs_log_det_N{trunc}"] = max(dets)
        flags[f"volume_ok_N{trunc}"] = max(dets) <= 1e-6
        flags[f"divergence_ok_N{trunc}"] = rep["no_diagonal_triples"] and rep["divergence_zero"]
    return _report(
        "liouville", {"t_end": t_end, "dt": dt, "base_points": base_points}, scalars, flags, started
    )


# -- 7: measure invariance under the free flow and the gauge ------------------------


def measure_invariance(scale="verify"):
    started = time.time()
    n_seeds = {"smoke": 4, "verify": 20, "full": 20}[scale]
    count = {"smoke": 2000, "verify": 10_000, "full": 10_000}[scale]
    passes = 0
    worst_z = 0.0
    mod_exact = True
    for seed in range(n_seeds):
        ok = True
        for transform in ("free_flow", "gauge"):
            rep = measures_mod.invariance_test(
                transform, GaussianSpec(s=1.0, sample_cutoff=8, seed=1000 + seed), count, t=1.0
            )
            worst_z = max(worst_z, rep["max_abs_z"])
            mod_exact = mod_exact and rep["modulus_exact"]
            ok = ok and rep["all_within_4"]
        passes += int(ok)
    need = max(n_seeds - 1, 1)
    return _report(
        "measure-invariance",
        {"n_seeds": n_seeds, "count": count, "s": 1.0, "cutoff": 8},
        {"meta_passes": passes, "worst_abs_z": worst_z},
        {"meta_test_ok": passes >= need, "modulus_exact": mod_exact},
        started,
    )


# -- 8: energy derivative identity ---------------------------------------------------


def energy_derivative_identity(scale="verify"):
    started = time.time()
    n_draws = {"smoke": 2, "verify": 10, "full": 10}[scale]
    spec = FlowSpec(variant="truncated_embedded", trunc_n=8, dt=1e-4, integrator="filon")
    worst = 0.0
    coarse_worst = 0.0
    for seed in range(n_draws):
        v0 = sample(GaussianSpec(s=0.8, sample_cutoff=8, seed=200 + seed), 1).fields[0]
        traj = evolve(spec, v0, 0.0, 0.003)
        d = energy_mod.derivative_terms(traj, len(traj) // 2, 0.8, 8)
        worst = max(worst, abs(d.sum - d.fd_refined) / (1.0 + abs(d.fd_refined)))
        coarse_worst = max(coarse_worst, abs(d.sum - d.fd_derivative) / (1.0 + abs(d.fd_derivative)))
    return _report(
        "energy-derivative-identity",
        {"n_draws": n_draws, "s": 0.8, "trunc_n": 8, "dt": 1e-4},
        {"max_rel_error_refined_fd": worst, "max_rel_error_grid_fd": coarse_worst},
        {"identity_ok": worst <= 1e-5},
        started,
    )


# -- 9: energy bound stability ---------------------------------------------------------


def energy_bound_stability(scale="verify"):
    started = time.time()
    count = {"smoke": 8, "verify": 50, "full": 50}[scale]
    rep = energy_mod.energy_bound_scan(count, 0.8, [4, 8, 16], t_end=0.1, dt=1e-3, seed=6)
    rmax = rep["ratio_max"]
    chain_ok = (
        rmax["16"] <= 2.0 * rmax["8"] + 1e-12 and rmax["8"] <= 2.0 * rmax["4"] + 1e-12
    )
    return _report(
        "energy-bound-stability",
        {"ensemble": count, "s": 0.8, "n_list": [4, 8, 16], "theta": 0.1, "epsilon": 0.05},
        {f"ratio_max_N{k}": v for k, v in rmax.items()}
        | {f"ratio_p99_N{k}": v for k, v in rep["ratio_p99"].items()},
        {"p99_finite": rep["finite"], "doubling_chain_ok": chain_ok},
        started,
    )


# -- 10: explicit-solution oracle --------------------------------------------------------


def explicit_solution_oracle(scale="verify"):
    started = time.time()
    s = -0.25
    # PDE residual of the closed-form solution, sampled finely
    spec = FlowSpec(variant="physical", dt=3e-6)
    times = np.arange(5) * 3e-6
    states = [single_mode_solution(1, 0.9 + 0.2j, +1, float(t), s, n_grid=3) for t in times]
    from .dynamics import Trajectory

    traj = Trajectory(
        times=times, coeffs=np.stack([f.coeffs for f in states]), spec=spec, n_grid=3
    )
    res = residual(traj)
    worst_sep = 0.0
    mode = 8192
    for n in (1, 2, 5):
        tn = separation_time(mode, s, n)
        u1 = single_mode_solution(mode, 1.0, +1, tn, s)
        u2 = single_mode_solution(mode, 1.0 + 1.0 / n, +1, tn, s)
        sep = sobolev_norm(u1 - u2, s)
        worst_sep = max(worst_sep, abs(sep - (2.0 + 1.0 / n)))
    return _report(
        "explicit-solution-oracle",
        {"s": s, "mode": mode},
        {"pde_residual": res, "max_separation_error": worst_sep},
        {"residual_ok": res <= 1e-10, "separation_ok": worst_sep <= 1e-8},
        started,
    )


# -- 11: truncation approximation ----------------------------------------------------------


def truncation_approximation(scale="verify"):
    started = time.time()
    n_draws = {"smoke": 4, "verify": 20, "full": 20}[scale]
    ens = _ball_ensemble(n_draws, cutoff=64, seed=77, n_grid=128)
    ref_spec = FlowSpec(variant="physical", dt=1e-3)
    _, ref = evolve_array(ref_spec, ens.coeffs, 0.0, 0.1, 128, store=False)
    means = {}
    for trunc in (8, 16, 32):
        spec = FlowSpec(variant="approx_physical", trunc_n=trunc, dt=1e-3)
        _, uN = evolve_array(spec, ens.coeffs, 0.0, 0.1, 128, store=False)
        means[trunc] = float(np.mean(np.sqrt(np.sum(np.abs(uN - ref) ** 2, axis=-1))))
    return _report(
        "truncation-approximation",
        {"n_draws": n_draws, "n_grid": 128, "t_end": 0.1, "n_list": [8, 16, 32]},
        {f"mean_l2_N{k}": v for k, v in means.items()},
        {
            "nonincreasing": means[8] >= means[16] >= means[32],
            "halved": means[32] < 0.5 * means[8],
        },
        started,
    )


# -- 12: weight convergence --------------------------------------------------------------------


def weight_convergence(scale="verify"):
    started = time.time()
    count = {"smoke": 2000, "verify": 10_000, "full": 20_000}[scale]
    rep = measures_mod.lp_weight_convergence(
        GaussianSpec(s=1.0, sample_cutoff=16, seed=30), 2.0, 0.1, [2.0], [2, 4, 8], count
    )
    rows = rep["distances"]["2.0"]
    return _report(
        "weight-convergence",
        {"count": count, "s": 1.0, "r": 2.0, "t": 0.1, "n_list": [2, 4, 8]},
        {f"l2_distance_N{row['N']}": row["estimate"] for row in rows},
        {"decreasing": rep["decreasing"]},
        started,
        series={"distance_vs_N": [(row["N"], row["estimate"], row["std_error"]) for row in rows]},
    )


# -- 13: change of variable ---------------------------------------------------------------------


def change_of_variable(scale="verify"):
    started = time.time()
    count = {"smoke": 3000, "verify": 20_000, "full": 40_000}[scale]
    events = {
        "box": EventSpec(kind="box", coords=((1, "re"),), lo=(-0.5,), hi=(0.5,)),
        "ball": EventSpec(kind="ball", coords=((0, "re"), (0, "im")), center=(0.0, 0.0), radius=1.0),
        "halfspace": EventSpec(
            kind="halfspace", coords=((2, "re"), (-1, "im")), weights=(1.0, 1.0), threshold=0.0
        ),
    }
    suite = measures_mod.change_of_variable_suite(4, 2.0, 0.1, 1.0, count, events, seed=9, dt=2e-3)
    scalars, flags = {}, {}
    for name, rep in suite["events"].items():
        scalars[f"z_{name}"] = rep["z"]
        scalars[f"estimate_{name}"] = rep["estimate_pullback"]
        flags[f"agree_{name}"] = rep["agree_within_4"]
    return _report(
        "change-of-variable", {"count": count, "trunc_n": 4, "r": 2.0, "t": 0.1}, scalars, flags, started
    )


CRITERIA = {
    "01-phase-factorization": phase_factorization,
    "02-mass-conservation": mass_conservation,
    "03-composition-identity": composition_identity,
    "04-05-normal-form-identity": normal_form_identity,
    "06-liouville": liouville,
    "07-measure-invariance": measure_invariance,
    "08-energy-derivative-identity": energy_derivative_identity,
    "09-energy-bound-stability": energy_bound_stability,
    "10-explicit-solution-oracle": explicit_solution_oracle,
    "11-truncation-approximation": truncation_approximation,
    "12-weight-convergence": weight_convergence,
    "13-change-of-variable": change_of_variable,
}


def run_criterion(name: str, scale: str = "verify") -> DiagnosticsReport:
    return CRITERIA[name](scale)


def run_suite(scale: str = "verify", parallel: bool = True, max_workers: int | None = None):
    """Run the full battery; independent criteria may run in parallel.

    Results are keyed and ordered by criterion name, so the aggregate is
    identical regardless of worker count.
    """
    names = sorted(CRITERIA)
    if parallel:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = {name: pool.submit(run_criterion, name, scale) for name in names}
            return {name: futures[name].result() for name in names}
    return {name: run_criterion(name, scale) for name in names}
