"""Gaussian ensembles and Monte Carlo transport diagnostics.

The reference measure has independent coefficients g_n / <n>^s with g_n
complex standard Gaussians (unit variance per real component, so
Var(g_n) = 2).  An optional l2-ball cutoff |v| <= r is imposed by
rejection.  All measure-level quantities are self-normalized ratio
estimators: normalization constants are never computed.

Throughout this module the l2 norm of a field means the plain coefficient
norm (sum |v_n|^2)^{1/2}, matching the dropped-2*pi convention of the
Gaussian family; the 2*pi-weighted physical mass is available separately
in ``fields``.

Sampling is keyed by (master seed, draw index, attempt) through a
counter-based generator, so ensembles are reproducible and independent of
any worker layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .dynamics import FlowSpec, evolve_array, linearized_rhs_array
from .energy import correction_array
from .fields import SpectralField, bracket
from .normalform import linearized_final
from .resonance import grid_triples

__all__ = [
    "GaussianSpec",
    "Ensemble",
    "EventSpec",
    "WeightReport",
    "sample",
    "weight",
    "invariance_test",
    "liouville_check",
    "change_of_variable_test",
    "lp_weight_convergence",
    "measure_growth_experiment",
    "tail_sanity",
]

_MAX_REJECTION_ATTEMPTS = 20_000


@dataclass(frozen=True)
class GaussianSpec:
    """Defines the Gaussian family: regularity, sampled band, optional ball."""

    s: float
    sample_cutoff: int
    r: float | None = None
    seed: int = 0
    n_grid: int | None = None
    allow_low_regularity: bool = False

    def __post_init__(self):
        if self.sample_cutoff < 0:
            raise ValueError("sample_cutoff must be >= 0")
        if self.r is not None and self.r <= 0:
            raise ValueError("cutoff radius r must be positive")
        if self.s <= 0.5 and not self.allow_low_regularity:
            raise ValueError(
                "s <= 1/2 leaves the family outside its l2 regime; "
                "set allow_low_regularity=True to override"
            )
        if self.n_grid is not None and self.n_grid < self.sample_cutoff:
            raise ValueError("n_grid must be >= sample_cutoff")

    @property
    def grid(self) -> int:
        return self.sample_cutoff if self.n_grid is None else self.n_grid


@dataclass(frozen=True)
class Ensemble:
    spec: GaussianSpec
    coeffs: np.ndarray  # (count, dim)
    attempts: int

    def __len__(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def n_grid(self) -> int:
        return self.spec.grid

    @property
    def fields(self) -> list[SpectralField]:
        return [SpectralField(c, self.n_grid) for c in self.coeffs]


def l2_norm_array(V: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(V) ** 2, axis=-1))


def _draw_once(spec: GaussianSpec, draw_index: int, attempt: int) -> np.ndarray:
    rng = Generator(Philox(SeedSequence((spec.seed, draw_index, attempt))))
    dim_cut = 2 * spec.sample_cutoff + 1
    z = rng.standard_normal(dim_cut) + 1j * rng.standard_normal(dim_cut)
    ns = np.arange(-spec.sample_cutoff, spec.sample_cutoff + 1)
    coeff = z * bracket(ns, -spec.s)
    out = np.zeros(2 * spec.grid + 1, dtype=np.complex128)
    out[spec.grid - spec.sample_cutoff : spec.grid + spec.sample_cutoff + 1] = coeff
    return out


def sample(spec: GaussianSpec, count: int) -> Ensemble:
    """Draw ``count`` fields; rejection-sample into the ball when r is set."""
    if count < 0:
        raise ValueError("count must be >= 0")
    dim = 2 * spec.grid + 1
    out = np.empty((count, dim), dtype=np.complex128)
    attempts = 0
    for i in range(count):
        for attempt in range(_MAX_REJECTION_ATTEMPTS):
            attempts += 1
            v = _draw_once(spec, i, attempt)
            if spec.r is None or float(l2_norm_array(v)) <= spec.r:
                out[i] = v
                break
        else:
            raise RuntimeError(
                f"rejection acceptance below {1.0 / _MAX_REJECTION_ATTEMPTS:.0e}; "
                f"increase the cutoff radius r={spec.r}"
            )
    return Ensemble(spec=spec, coeffs=out, attempts=attempts)


# -- weights ------------------------------------------------------------------


@dataclass(frozen=True)
class WeightReport:
    f_n_r_t: float
    f_r_t: float
    indicator: bool


def _weight_exponent_array(V: np.ndarray, trunc: int, t: float, s: float, n_grid: int) -> np.ndarray:
    """-(1/2) correction of the low-mode block, batched."""
    low = V[..., n_grid - trunc : n_grid + trunc + 1]
    return -0.5 * correction_array(low, t, s, trunc)


def weight(v: SpectralField, trunc_n: int, r: float, t: float, s: float) -> WeightReport:
    """Gibbs-type weights of the truncated and full correction, with ball cut."""
    if trunc_n > v.n_grid:
        raise ValueError("trunc_n exceeds field grid")
    inside = bool(float(l2_norm_array(v.coeffs)) <= r)
    if not inside:
        return WeightReport(f_n_r_t=0.0, f_r_t=0.0, indicator=False)
    expo_n = float(_weight_exponent_array(v.coeffs, trunc_n, t, s, v.n_grid))
    expo = float(_weight_exponent_array(v.coeffs, v.n_grid, t, s, v.n_grid))
    return WeightReport(f_n_r_t=float(np.exp(expo_n)), f_r_t=float(np.exp(expo)), indicator=True)


def _weights_batch(V: np.ndarray, trunc: int, r: float, t: float, s: float, n_grid: int) -> np.ndarray:
    inside = l2_norm_array(V) <= r
    expo = _weight_exponent_array(V, trunc, t, s, n_grid)
    return np.where(inside, np.exp(expo), 0.0)


# -- invariance tests ---------------------------------------------------------


def _apply_transform(V: np.ndarray, transform: str, t: float, n_grid: int, seed: int) -> np.ndarray:
    ns = np.arange(-n_grid, n_grid + 1)
    if transform == "free_flow":
        return V * np.exp(-1j * t * ns.astype(np.float64) ** 4)
    if transform == "gauge":
        m0 = np.sum(np.abs(V) ** 2, axis=-1, keepdims=True)
        return V * np.exp(2j * t * m0)
    if transform == "rotation":
        rng = Generator(Philox(SeedSequence((seed, 0xC0FFEE))))
        angles = rng.uniform(0.0, 2.0 * np.pi, size=2 * n_grid + 1)
        return V * np.exp(1j * angles)
    raise ValueError(f"unknown transform {transform!r}")


def _paired_z(delta: np.ndarray, scale: float = 1.0) -> float:
    """z-score of a paired difference.

    Differences at rounding level relative to ``scale`` carry no
    statistical content (an exactly invariant moment differs only by
    correlated floating-point noise, which would otherwise produce an
    arbitrarily large ratio); those return 0.
    """
    n = delta.shape[0]
    if n == 0 or float(np.max(np.abs(delta))) <= 1e-12 * max(scale, 1e-300):
        return 0.0
    m = float(np.mean(delta))
    sd = float(np.std(delta, ddof=1)) if n > 1 else 0.0
    if sd == 0.0:
        return 0.0
    return m / (sd / np.sqrt(n))


def invariance_test(
    transform: str,
    spec: GaussianSpec,
    count: int,
    t: float = 1.0,
    probe_pairs: int = 10,
) -> dict:
    """Distributional invariance of the ensemble under a unimodular map.

    Compares per-mode moments, mixed pair moments and two characteristic
    functionals between the raw and transformed ensembles via paired
    z-scores; per-draw modulus preservation is asserted exactly (to
    rounding) since all transforms are unimodular multipliers.
    """
    ens = sample(spec, count)
    V = ens.coeffs
    TV = _apply_transform(V, transform, t, ens.n_grid, spec.seed)
    ns = np.arange(-ens.n_grid, ens.n_grid + 1)
    names, zs = [], []
    # per-mode moments
    for j, n in enumerate(ns):
        mode_scale = float(np.mean(np.abs(V[:, j]) ** 2)) + 1e-30
        zs.append(_paired_z(np.abs(TV[:, j]) ** 2 - np.abs(V[:, j]) ** 2, mode_scale))
        names.append(f"abs2_n{n}")
        zs.append(_paired_z(TV[:, j].real - V[:, j].real, np.sqrt(mode_scale)))
        names.append(f"re_n{n}")
    # mixed pair moments
    rng = Generator(Philox(SeedSequence((spec.seed, 0xBEEF))))
    dim = ns.shape[0]
    for _ in range(probe_pairs):
        a, b = rng.integers(0, dim, size=2)
        prod_t = TV[:, a] * np.conj(TV[:, b])
        prod_r = V[:, a] * np.conj(V[:, b])
        pair_scale = float(np.mean(np.abs(prod_r))) + 1e-30
        zs.append(_paired_z(prod_t.real - prod_r.real, pair_scale))
        names.append(f"repair_n{ns[a]}_n{ns[b]}")
        zs.append(_paired_z(prod_t.imag - prod_r.imag, pair_scale))
        names.append(f"impair_n{ns[a]}_n{ns[b]}")
    # characteristic functionals with fixed probes
    for k in range(2):
        h = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) * bracket(ns, -spec.s)
        ip_t = np.real(np.sum(TV * np.conj(h), axis=-1))
        ip_r = np.real(np.sum(V * np.conj(h), axis=-1))
        zs.append(_paired_z(np.cos(ip_t) - np.cos(ip_r), 1.0))
        names.append(f"charfun_{k}")
    zs = np.asarray(zs)
    mod_dev = float(np.max(np.abs(np.abs(TV) - np.abs(V)))) if count else 0.0
    scale = float(np.max(np.abs(V))) if count else 1.0
    return {
        "transform": transform,
        "t": t,
        "count": count,
        "moment_names": names,
        "z_scores": zs.tolist(),
        "max_abs_z": float(np.max(np.abs(zs))) if len(zs) else 0.0,
        "modulus_deviation": mod_dev,
        "modulus_exact": bool(mod_dev <= 64.0 * np.finfo(float).eps * max(scale, 1.0)),
        "all_within_4": bool(np.all(np.abs(zs) <= 4.0)),
    }


# -- Liouville ---------------------------------------------------------------


def liouville_determinants(
    trunc_n: int,
    t: float,
    points: list[SpectralField],
    dt: float = 1e-4,
    sign: int = +1,
    integrator: str = "gauss",
) -> list[float]:
    """|log det| of the finite truncated flow's Jacobian at several states.

    All base points are integrated jointly (one variational run with a
    batch axis).  With the symplectic Gauss scheme the discrete map itself
    preserves volume and the values sit at the fixed-point tolerance;
    the cheaper classical scheme leaves an O(dt^4) determinant drift,
    still far below the acceptance tolerance at verification steps.
    """
    dim = 2 * trunc_n + 1
    spec = FlowSpec(
        variant="truncated_finite", sign=sign, trunc_n=trunc_n, dt=dt, integrator=integrator
    )
    basis = np.zeros((2 * dim, dim), dtype=np.complex128)
    for j in range(dim):
        basis[j, j] = 1.0
        basis[dim + j, j] = 1.0j
    V0 = np.stack(
        [p.coeffs[p.n_grid - trunc_n : p.n_grid + trunc_n + 1] for p in points], axis=0
    )[:, None, :]
    W0 = np.broadcast_to(basis, (len(points),) + basis.shape)
    _, _, W = linearized_final(spec, V0, W0, 0.0, t, trunc_n, store=False)
    out = []
    for b in range(len(points)):
        jac = np.zeros((2 * dim, 2 * dim))
        jac[:dim, :] = W[b].real.T
        jac[dim:, :] = W[b].imag.T
        _, log_det = np.linalg.slogdet(jac)
        out.append(float(abs(log_det)))
    return out


def liouville_check(trunc_n: int, t: float, u0: SpectralField, dt: float = 1e-4, sign: int = +1) -> dict:
    """Volume preservation of the finite truncated flow.

    (a) the vector field is checked divergence-free term by term: the
    nonresonant table contains no diagonal couplings, and the resonant
    Wirtinger diagonal 2i|v_n|^2 is purely imaginary so its real part
    vanishes identically.  (b) the Jacobian of the time-t map at u0 is
    assembled from the variational flow on all 2(2*trunc_n+1) real
    directions and its log-determinant reported.
    """
    ns_full = np.arange(-u0.n_grid, u0.n_grid + 1)
    if np.any(np.abs(u0.coeffs[np.abs(ns_full) > trunc_n]) != 0.0):
        raise ValueError("base point must be supported in |n| <= trunc_n")
    dim = 2 * trunc_n + 1
    V0 = u0.coeffs[u0.n_grid - trunc_n : u0.n_grid + trunc_n + 1]
    table = grid_triples(trunc_n)
    no_diagonal = bool(np.all(table.n1 != table.out) and np.all(table.n3 != table.out))
    resonant_diag = 2j * sign * np.abs(V0) ** 2
    divergence = float(np.sum(2.0 * resonant_diag.real))  # exactly 0.0
    spec = FlowSpec(variant="truncated_finite", sign=sign, trunc_n=trunc_n, dt=dt)
    basis = np.zeros((2 * dim, dim), dtype=np.complex128)
    for j in range(dim):
        basis[j, j] = 1.0
        basis[dim + j, j] = 1.0j
    _, _, W = linearized_final(spec, V0, basis, 0.0, t, trunc_n, store=False)
    jac = np.zeros((2 * dim, 2 * dim))
    jac[:dim, :] = W.real.T[:, :]
    jac[dim:, :] = W.imag.T[:, :]
    sign_det, log_det = np.linalg.slogdet(jac)
    return {
        "trunc_n": trunc_n,
        "t": t,
        "dt": dt,
        "no_diagonal_triples": no_diagonal,
        "divergence": divergence,
        "divergence_zero": divergence == 0.0,
        "det_sign": float(sign_det),
        "log_det": float(log_det),
        "abs_log_det": float(abs(log_det)),
    }


# -- events -------------------------------------------------------------------


@dataclass(frozen=True)
class EventSpec:
    """Measurable predicate on finitely many coefficient components.

    kind 'box': every (mode, comp) coordinate within [lo, hi];
    kind 'ball': euclidean ball around ``center`` in the coordinates;
    kind 'halfspace': sum of weighted coordinates >= threshold;
    kinds 'all'/'empty' need no coordinates.
    """

    kind: str
    coords: tuple = ()  # ((mode, 're'|'im'), ...)
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0
    weights: tuple = ()
    threshold: float = 0.0

    def evaluate(self, V: np.ndarray, n_grid: int) -> np.ndarray:
        if self.kind == "all":
            return np.ones(V.shape[:-1], dtype=bool)
        if self.kind == "empty":
            return np.zeros(V.shape[:-1], dtype=bool)
        comps = []
        for mode, part in self.coords:
            col = V[..., int(mode) + n_grid]
            comps.append(col.real if part == "re" else col.imag)
        X = np.stack(comps, axis=-1)
        if self.kind == "box":
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            return np.all((X >= lo) & (X <= hi), axis=-1)
        if self.kind == "ball":
            c = np.asarray(self.center)
            return np.sum((X - c) ** 2, axis=-1) <= self.radius**2
        if self.kind == "halfspace":
            w = np.asarray(self.weights)
            return np.sum(X * w, axis=-1) >= self.threshold
        raise ValueError(f"unknown event kind {self.kind!r}")


def _ratio_estimate(num_samples: np.ndarray, den_samples: np.ndarray):
    """Self-normalized ratio estimator with delta-method standard error."""
    n = num_samples.shape[0]
    num = float(np.mean(num_samples))
    den = float(np.mean(den_samples))
    if den == 0.0:
        raise ZeroDivisionError("zero effective sample size in ratio estimator")
    ratio = num / den
    resid = num_samples - ratio * den_samples
    var = float(np.var(resid, ddof=1)) / n if n > 1 else 0.0
    se = np.sqrt(var) / abs(den)
    return ratio, float(se)


# -- change of variable --------------------------------------------------------


def change_of_variable_suite(
    trunc_n: int,
    r: float,
    t: float,
    s: float,
    count: int,
    events: dict,
    seed: int = 0,
    sample_cutoff: int | None = None,
    dt: float = 1e-3,
) -> dict:
    """Two independent estimators of the transported weighted measure.

    Estimator A evaluates the flowed event by pulling samples back through
    the inverse truncated flow and weighting with the reference weight;
    estimator B integrates over the event directly, reweighting by the
    energy difference accumulated along the forward flow.  Both are
    self-normalized against the same weight normalization; agreement is
    reported as a per-event z-score.  The two estimators use disjoint
    ensembles; all events share the same pair of flow evaluations.
    """
    cutoff = trunc_n if sample_cutoff is None else sample_cutoff
    if count <= 1:
        raise ValueError("count must be > 1")
    flow = FlowSpec(variant="truncated_embedded", trunc_n=trunc_n, dt=dt)
    wgt_s = bracket(np.arange(-trunc_n, trunc_n + 1), s)

    def low(V):
        return V[..., cutoff - trunc_n : cutoff + trunc_n + 1]

    # shared runs: backward flow for estimator A, forward for estimator B
    ens_a = sample(GaussianSpec(s=s, sample_cutoff=cutoff, seed=seed), count)
    Va = ens_a.coeffs
    Fa = _weights_batch(Va, trunc_n, r, t, s, cutoff)
    _, back = evolve_array(flow, Va, t, 0.0, cutoff, store=False)

    ens_b = sample(GaussianSpec(s=s, sample_cutoff=cutoff, seed=seed + 1), count)
    Vb = ens_b.coeffs
    Fb = _weights_batch(Vb, trunc_n, r, t, s, cutoff)
    _, fwd = evolve_array(flow, Vb, 0.0, t, cutoff, store=False)
    inside = (l2_norm_array(Vb) <= r).astype(np.float64)
    sob_0 = np.sum(np.abs(low(Vb) * wgt_s) ** 2, axis=-1)
    sob_t = np.sum(np.abs(low(fwd) * wgt_s) ** 2, axis=-1)
    corr_t = correction_array(low(fwd), t, s, trunc_n)
    reweight = inside * np.exp(0.5 * (sob_0 - sob_t - corr_t))

    results = {}
    for name, event in events.items():
        ind_a = event.evaluate(back, cutoff).astype(np.float64)
        ratio_a, se_a = _ratio_estimate(ind_a * Fa, Fa)
        ind_b = event.evaluate(Vb, cutoff).astype(np.float64)
        ratio_b, se_b = _ratio_estimate(ind_b * reweight, Fb)
        se = float(np.hypot(se_a, se_b))
        z = (ratio_a - ratio_b) / se if se > 0 else 0.0
        results[name] = {
            "event_kind": event.kind,
            "estimate_pullback": ratio_a,
            "se_pullback": se_a,
            "estimate_reweight": ratio_b,
            "se_reweight": se_b,
            "z": float(z),
            "agree_within_4": bool(abs(z) <= 4.0),
        }
    return {
        "trunc_n": trunc_n,
        "r": r,
        "t": t,
        "s": s,
        "count": count,
        "events": results,
    }


def change_of_variable_test(
    trunc_n: int,
    r: float,
    t: float,
    s: float,
    count: int,
    event: EventSpec,
    seed: int = 0,
    sample_cutoff: int | None = None,
    dt: float = 1e-3,
) -> dict:
    """Single-event form of ``change_of_variable_suite``."""
    suite = change_of_variable_suite(
        trunc_n, r, t, s, count, {"event": event}, seed, sample_cutoff, dt
    )
    out = {k: suite[k] for k in ("trunc_n", "r", "t", "s", "count")}
    out.update(suite["events"]["event"])
    return out


# -- weight convergence ---------------------------------------------------------


def lp_weight_convergence(
    spec: GaussianSpec,
    r: float,
    t: float,
    p_list: list[float],
    n_list: list[int],
    count: int,
) -> dict:
    """Monte Carlo L^p distance between truncated and full weights per cutoff."""
    ens = sample(GaussianSpec(s=spec.s, sample_cutoff=spec.sample_cutoff, seed=spec.seed), count)
    V = ens.coeffs
    cutoff = ens.n_grid
    full = _weights_batch(V, cutoff, r, t, spec.s, cutoff)
    table = {}
    for p in p_list:
        rows = []
        for trunc in n_list:
            truncated = _weights_batch(V, min(trunc, cutoff), r, t, spec.s, cutoff)
            diff = np.abs(truncated - full) ** p
            m = float(np.mean(diff))
            se_m = float(np.std(diff, ddof=1) / np.sqrt(count)) if count > 1 else 0.0
            est = m ** (1.0 / p) if m > 0 else 0.0
            se = (m ** (1.0 / p - 1.0) / p) * se_m if m > 0 else 0.0
            rows.append({"N": trunc, "estimate": est, "std_error": se})
        table[str(p)] = rows
    decreasing = True
    for p in p_list:
        rows = table[str(p)]
        for a, b in zip(rows, rows[1:]):
            if b["estimate"] > a["estimate"] + 2.0 * np.hypot(a["std_error"], b["std_error"]):
                decreasing = False
    return {
        "s": spec.s,
        "r": r,
        "t": t,
        "count": count,
        "p_list": list(p_list),
        "n_list": list(n_list),
        "distances": table,
        "decreasing": decreasing,
    }


# -- measure growth --------------------------------------------------------------


def measure_growth_experiment(
    trunc_n: int,
    r: float,
    t: float,
    s: float,
    radii: list[float],
    count: int,
    seed: int = 0,
    sample_cutoff: int | None = None,
    dt: float = 1e-3,
) -> dict:
    """Transported vs. reference weighted measure of shrinking events.

    Events are balls in the (Re v_0, Im v_0) coordinates.  Fits the
    exponent alpha in  measure(flowed event) ~ measure(event)^alpha and
    reports it with a least-squares confidence band; alpha stays near 1
    for t = 0 and should remain bounded below away from 0.
    """
    cutoff = trunc_n if sample_cutoff is None else sample_cutoff
    ens = sample(GaussianSpec(s=s, sample_cutoff=cutoff, seed=seed), count)
    V = ens.coeffs
    F = _weights_batch(V, trunc_n, r, t, s, cutoff)
    flow = FlowSpec(variant="truncated_embedded", trunc_n=trunc_n, dt=dt)
    _, back = evolve_array(flow, V, t, 0.0, cutoff, store=False)
    rows = []
    xs, ys = [], []
    for rad in radii:
        ev = EventSpec(kind="ball", coords=((0, "re"), (0, "im")), center=(0.0, 0.0), radius=rad)
        rho_a, se_a = _ratio_estimate(ev.evaluate(V, cutoff).astype(float) * F, F)
        rho_fl, se_fl = _ratio_estimate(ev.evaluate(back, cutoff).astype(float) * F, F)
        rows.append(
            {
                "radius": rad,
                "measure": rho_a,
                "measure_se": se_a,
                "flowed_measure": rho_fl,
                "flowed_se": se_fl,
            }
        )
        if rho_a > 0 and rho_fl > 0:
            xs.append(np.log(rho_a))
            ys.append(np.log(rho_fl))
    if len(xs) >= 2:
        coeffs, cov = np.polyfit(xs, ys, 1, cov=True)
        slope = float(coeffs[0])
        slope_se = float(np.sqrt(cov[0, 0]))
    else:
        slope, slope_se = float("nan"), float("nan")
    return {
        "trunc_n": trunc_n,
        "r": r,
        "t": t,
        "s": s,
        "count": count,
        "rows": rows,
        "exponent": slope,
        "exponent_se": slope_se,
    }


# -- sampler tail sanity -----------------------------------------------------------


def tail_sanity(m_modes: int, k_list: list[float], count: int, seed: int = 0) -> dict:
    """Empirical Gaussian-vector tail against the sub-Gaussian envelope.

    Estimates P[ (sum_{n<=M} |g_n|^2)^{1/2} >= K ] over the K list and fits
    the envelope rate c in exp(-c K^2) on the strictly positive tail
    points.
    """
    rng = Generator(Philox(SeedSequence((seed, 0x7A11))))
    z = rng.standard_normal((count, m_modes)) + 1j * rng.standard_normal((count, m_modes))
    norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=1))
    rows = []
    xs, ys = [], []
    for K in k_list:
        p = float(np.mean(norms >= K))
        rows.append({"K": K, "tail": p})
        if 0.0 < p < 1.0 and K > np.sqrt(2.0 * m_modes):
            xs.append(K * K)
            ys.append(-np.log(p))
    fit_c = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else float("nan")
    tails = [row["tail"] for row in rows]
    monotone = all(a >= b - 1e-12 for a, b in zip(tails, tails[1:]))
    return {
        "m_modes": m_modes,
        "count": count,
        "rows": rows,
        "fitted_rate": fit_c,
        "monotone": monotone,
    }
