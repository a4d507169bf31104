"""Acceptance gate: one recorded PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary under "acceptance criteria".
"""

import itertools
import math
import time
from functools import lru_cache

import numpy as np

from perispec import multipliers
from perispec.fields import SpectralField, make_decay_field
from perispec.multipliers import (
    Material,
    eigenvalues_exact,
    eigenvalues_quadrature,
    multiplier_matrix,
    multiplier_quadrature,
)
from perispec.solvers import (
    Peridynamic,
    apply_operator,
    forced_solution,
    homogeneous_solution,
    mode_energy,
    solve_equilibrium,
)
from perispec.specfun import pfq
from perispec.studies import (
    StudyConfig,
    asymptotic_validation,
    local_limit_sweep,
    regularity_study,
    temporal_consistency_check,
)


def decreasing(values):
    return all(a > b for a, b in zip(values, values[1:]))


def fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


# -- study tables shared by several criteria and replayed for determinism --------

def build_tables():
    tables = {}
    tables["asym_beta0"] = asymptotic_validation(
        StudyConfig(n=1, delta=1.0, beta=0.0, mu=1.0, lambda_star=2.0, radii=(50.0, 100.0, 200.0)))
    tables["asym_beta1"] = asymptotic_validation(
        StudyConfig(n=1, delta=1.0, beta=1.0, mu=1.0, lambda_star=1.0, radii=(50.0, 100.0, 200.0)))
    mult = StudyConfig(n=2, delta=1.0, beta=2.0, mu=1.0, lambda_star=1.0, modes=((1, 0),))
    tables["mult_delta"] = local_limit_sweep("multiplier", "delta_to_zero", mult)
    tables["mult_beta"] = local_limit_sweep("multiplier", "beta_to_np2", mult)
    tables["temporal"] = temporal_consistency_check("homogeneous", StudyConfig(n=1, K=32))
    tables["reg_equilibrium"] = regularity_study(
        "equilibrium", StudyConfig(n=1, K=256, s=1.0, beta_values=(0.0, 2.0)))
    tables["reg_velocity"] = regularity_study(
        "homogeneous", StudyConfig(n=1, K=256, s1=2.0, s2=1.0, channel="velocity",
                                   beta_values=(2.9, 3.0)))
    conv = StudyConfig(n=1, K=16, beta=1.0, t=1.0, epsilon=0.5)
    for target in ("equilibrium", "homogeneous", "forced"):
        for sweep in ("delta_to_zero", "beta_to_np2"):
            tables[f"conv_{target}_{sweep}"] = local_limit_sweep(target, sweep, conv)
    return tables


@lru_cache(maxsize=1)
def shared_tables():
    return build_tables()


def clear_caches():
    multipliers.eigenvalues_at_ksq.cache_clear()
    multipliers._quadrature_components.cache_clear()
    multipliers._transverse_bond.cache_clear()


# -- criteria -------------------------------------------------------------------------

def test_criterion_01_cross_oracle(criterion):
    start = time.perf_counter()
    worst_eig = 0.0
    worst_mat = 0.0
    not_series = 0
    count = 0
    for n in (1, 2, 3):
        ks = [k for k in itertools.product(range(-4, 5), repeat=n) if any(k)]
        for beta, delta, lam in itertools.product((n - 1, n, n + 0.5, n + 1.5), (0.5, 1.0), (1.0, 2.0)):
            m = Material(n, delta, beta, 1.0, lam)
            for k in ks:
                e = eigenvalues_exact(m, k, fallback=False)
                q = eigenvalues_quadrature(m, k)
                not_series += e.method != "hypergeometric"
                worst_eig = max(worst_eig,
                                abs(e.lambda1 - q.lambda1) / abs(q.lambda1),
                                abs(e.lambda2 - q.lambda2) / abs(q.lambda2))
                A = multiplier_matrix(m, k).dense()
                B = multiplier_quadrature(m, k).dense()
                scale = max(1.0, np.linalg.norm(B, 2))
                worst_mat = max(worst_mat, np.max(np.abs(A - B)) / scale)
                count += 1
    elapsed = time.perf_counter() - start
    ok = worst_eig <= 1e-7 and worst_mat <= 1e-7 and elapsed <= 120 and not_series == 0
    criterion(1, ok, f"{count} (material, k) pairs; max eigenvalue rel diff {worst_eig:.2e}, "
                     f"max matrix diff {worst_mat:.2e} (tol 1e-7); {elapsed:.1f}s (budget 120s)")
    assert ok


def test_criterion_02_pfq_identities(criterion):
    sine = pfq([1.5], [1.5, 1.5], -math.pi**2 / 4).value
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(20):
        a, b, c = rng.uniform(0.2, 5.0, size=3)
        z = rng.uniform(-10.0, 2.0)
        reduced = pfq([a], [c, a + 1.0], z, reduce_pairs=False).value
        full = pfq([a, b], [b, c, a + 1.0], z, reduce_pairs=False).value
        worst = max(worst, abs(full - reduced) / max(1.0, abs(reduced)))
    ok = abs(sine) <= 1e-12 and worst <= 1e-12
    criterion(2, ok, f"1F2(3/2; 3/2, 3/2; -pi^2/4) = {sine:.2e}; "
                     f"max reduction diff over 20 draws {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_03_asymptotics_beta_ne_n(criterion):
    t = shared_tables()["asym_beta0"]
    l2 = t.column("lambda2_rel_error")
    l12 = t.column("lambda12_rel_error")
    l12_norm = t.column("lambda12_error_over_lambda1")
    better = t.metadata["better_lambda1_form"]
    l1 = t.column(f"lambda1_{better}_rel_error")
    other = t.column("lambda1_as_stated_rel_error" if better == "as_sum" else "lambda1_as_sum_rel_error")
    ok2 = decreasing(l2) and l2[-1] <= 0.02
    ok12 = decreasing(l12) and l12[-1] <= 0.02
    ok1 = decreasing(l1) and l1[-1] <= 0.02
    ok = ok2 and ok12 and ok1
    criterion(3, ok, f"lambda2 rel err {fmt(l2)} {'ok' if ok2 else 'bad'}; "
                     f"lambda12 rel err {fmt(l12)} {'ok' if ok12 else 'bad'} "
                     f"(expansion coefficient degenerate: {t.metadata['lambda12_coefficient_degenerate']}, "
                     f"error/|lambda1| {fmt(l12_norm)}); "
                     f"lambda1 better form {better} rel err {fmt(l1)} {'ok' if ok1 else 'bad'} "
                     f"(other form {fmt(other)})")
    assert ok


def test_criterion_04_asymptotics_beta_eq_n(criterion):
    t = shared_tables()["asym_beta1"]
    radii = t.parameter_column
    diff = [abs(d) for d in t.column("lambda2_difference")]
    bounds = [50.0 / r**2 for r in radii]
    ok = t.metadata["branch"] == "beta_eq_n" and decreasing(diff) \
        and all(d <= b for d, b in zip(diff, bounds))
    criterion(4, ok, f"|lambda2 - asymptote| {fmt(diff)} vs 50/r^2 {fmt(bounds)}")
    assert ok


def test_criterion_05_local_limits(criterion):
    td = shared_tables()["mult_delta"]
    tb = shared_tables()["mult_beta"]
    ed, rd = td.column("error"), td.column("relative_error")
    eb, rb = tb.column("error"), tb.column("relative_error")
    okd = decreasing(ed) and rd[-1] < 1e-3
    okb = decreasing(eb) and rb[-1] < 1e-2
    ok = okd and okb
    criterion(5, ok, f"delta sweep errors {fmt(ed)} final rel {rd[-1]:.2e} (< 1e-3); "
                     f"beta sweep errors {fmt(eb)} final rel {rb[-1]:.2e} (< 1e-2)")
    assert ok


def test_criterion_06_equilibrium_round_trip(criterion):
    worst_res = 0.0
    worst_rec = 0.0
    for n, K in ((1, 64), (2, 16)):
        op = Peridynamic(Material(n, 1.0, n + 0.5, 1.0, 2.0))
        b = make_decay_field(n, K, 0.0, seed=11)
        u = solve_equilibrium(op, b)
        res = np.linalg.norm(apply_operator(op, u).coeffs - b.coeffs, axis=-1)
        worst_res = max(worst_res, float(res.max()))
        v = make_decay_field(n, K, 0.0, seed=12)
        back = solve_equilibrium(op, apply_operator(op, v))
        worst_rec = max(worst_rec, float(np.max(np.abs(back.coeffs - v.coeffs))))
    ok = worst_res <= 1e-10 and worst_rec <= 1e-12
    criterion(6, ok, f"max per-mode residual {worst_res:.2e} (tol 1e-10); "
                     f"max recovery error {worst_rec:.2e} (tol 1e-12)")
    assert ok


def test_criterion_07_evolution_invariants(criterion):
    op = Peridynamic(Material(1, 1.0, 1.0, 1.0, 1.0))
    f = make_decay_field(1, 32, 1.0, seed=21)
    g = make_decay_field(1, 32, 0.0, seed=22)
    sol = homogeneous_solution(op, f, g)
    e0 = mode_energy(sol, 0.0)
    drift = max(abs(mode_energy(sol, t) - e0) / e0 for t in np.arange(0.0, 10.25, 0.5))
    initial = np.array_equal(sol.at(0.0).coeffs, f.coeffs) \
        and np.array_equal(sol.derivative(0.0, 1).coeffs, g.coeffs)
    r = shared_tables()["temporal"].column("residual")
    ratios = [a / b for a, b in zip(r, r[1:])]
    ok = drift <= 1e-10 and initial and all(3.5 <= x <= 4.5 for x in ratios)
    criterion(7, ok, f"energy drift {drift:.2e} (tol 1e-10); initial conditions exact: {initial}; "
                     f"FD residual ratios {fmt(ratios)} (in [3.5, 4.5])")
    assert ok


def test_criterion_08_forced_solution(criterion):
    m = Material(2, 1.0, 2.5, 1.0, 2.0)
    op = Peridynamic(m)
    k = (2, 1)
    bk = np.array([0.3 + 0.1j, -0.4j])
    b = SpectralField.from_modes(2, 4, {k: bk, (-2, -1): np.conj(bk)})
    sol = forced_solution(op, b)
    zero = not np.any(sol.at(0.0).coeffs)
    M = multiplier_matrix(m, k)
    lam_min = min(abs(M.lambda1), abs(M.lambda2))
    bound = 2.0 * np.linalg.norm(bk) / lam_min
    peak = max(float(np.linalg.norm(sol.at(t).mode(k))) for t in np.linspace(0.0, 20.0, 401))
    accel = float(np.max(np.abs(sol.derivative(0.0, 2).coeffs - b.coeffs)))
    ok = zero and peak <= bound and accel <= 1e-10
    criterion(8, ok, f"U(0) = 0 exactly: {zero}; max |U_k(t)| {peak:.4g} <= bound {bound:.4g}; "
                     f"|U''(0) - b| {accel:.2e} (tol 1e-10)")
    assert ok


def test_criterion_09_regularity(criterion):
    eq = shared_tables()["reg_equilibrium"]
    betas = eq.parameter_column
    fitted = dict(zip(betas, eq.column("fitted_exponent")))
    predicted = dict(zip(betas, eq.column("predicted_exponent")))
    gain = dict(zip(betas, eq.column("fitted_gain")))
    ok_eq = abs(fitted[2.0] - predicted[2.0]) <= 0.15
    ok_ctrl = gain[0.0] < 0.15
    vel = shared_tables()["reg_velocity"]
    vgain = dict(zip(vel.parameter_column, vel.column("fitted_gain")))
    vpred = dict(zip(vel.parameter_column, vel.column("predicted_gain")))
    ok_vel = abs(vgain[3.0] - 1.0) <= 0.15 and abs(vgain[2.9] - vpred[2.9]) <= 0.15
    ok = ok_eq and ok_ctrl and ok_vel
    criterion(9, ok, f"equilibrium beta=2 exponent {fitted[2.0]:.4f} vs {predicted[2.0]:.4f}; "
                     f"beta=0 gain {gain[0.0]:.4f} (< 0.15); velocity gain beta=3 (Navier limit) "
                     f"{vgain[3.0]:.4f} vs 1, beta=2.9 {vgain[2.9]:.4f} vs {vpred[2.9]:.2f}")
    assert ok


def test_criterion_10_convergence_sweeps(criterion):
    tables = shared_tables()
    parts = []
    ok = True
    for target in ("equilibrium", "homogeneous", "forced"):
        for sweep in ("delta_to_zero", "beta_to_np2"):
            e = tables[f"conv_{target}_{sweep}"].column("error")
            ratio = e[-1] / e[0]
            good = decreasing(e) and ratio < 0.05
            ok = ok and good
            parts.append(f"{target}/{sweep.split('_')[0]} ratio {ratio:.2e}{'' if good else ' bad'}")
    criterion(10, ok, "; ".join(parts))
    assert ok


def test_criterion_11_determinism(criterion):
    first = {name: t.to_csv().encode() for name, t in shared_tables().items()}
    clear_caches()
    second = {name: t.to_csv().encode() for name, t in build_tables().items()}
    differing = [name for name in first if first[name] != second[name]]
    ok = not differing and set(first) == set(second)
    criterion(11, ok, f"{len(first)} acceptance tables rebuilt from cold caches; "
                      f"byte-identical CSV: {not differing}" + (f" (differ: {differing})" if differing else ""))
    assert ok
