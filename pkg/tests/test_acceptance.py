"""Acceptance gate: every criterion at its stated tolerance, one line each.

Criteria are grouped exactly as shipped: exact identities, the semigroup
sandwich, linear-smoothing refinement stability, commutator refinement
stability, solver correctness, desk-scale theorem measurements at n = 256,
and suite determinism.  Runtime bars are asserted where the criteria state
them.
"""

import json
import time

import numpy as np
import pytest

from sqgsim.errors import TrialSkipped
from sqgsim.estimates import (
    ExperimentSpec,
    default_fit_window,
    gen_rough_data,
    measure_global_decay,
    measure_smoothing,
    measure_time_integrability,
    resolved_time,
    run_suite,
)
from sqgsim.grid import PhysicalField, SpectralField, TorusGrid, two_thirds_mask
from sqgsim.inequalities import (
    commutator_stability_report,
    sandwich_constants,
    verify_linear_smoothing,
    verify_semigroup_block,
    _sample_admissible_tuples,
)
from sqgsim.lp import active_bands, bony_paraproducts, dealiased_product, lp_project
from sqgsim.randfields import envelope_field, rough_field, sine_field
from sqgsim.solver import (
    SimulationState,
    SolverConfig,
    cfl_dt,
    hs_key,
    integrate,
    semigroup_apply,
    step,
)
from sqgsim.spectral import forward_transform, inverse_transform, riesz_velocity, sobolev_norm


def announce(name, ok, extra=""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {extra}")
    assert ok, f"{name} {extra}"


# ----------------------------------------------------------------- criterion 1
@pytest.mark.slow
def test_exact_identities():
    t0 = time.perf_counter()

    # transform round trip, 100 trials
    worst_rt = 0.0
    for i in range(100):
        n = (8, 64, 256)[i % 3]
        rng = np.random.default_rng(i)
        vals = rng.standard_normal((n, n))
        back = inverse_transform(forward_transform(PhysicalField(TorusGrid(n), vals)))
        worst_rt = max(worst_rt, np.max(np.abs(back.values - vals)) / np.max(np.abs(vals)))
    announce("round-trip", worst_rt < 1e-12, f"(worst {worst_rt:.2e})")

    # Parseval, 100 trials
    worst_p = 0.0
    for i in range(100):
        n = 64
        rng = np.random.default_rng(1000 + i)
        vals = rng.standard_normal((n, n))
        F = forward_transform(PhysicalField(TorusGrid(n), vals))
        lhs = np.sum(vals**2) / n**2
        rhs = np.sum(np.abs(F.coeffs) ** 2)
        worst_p = max(worst_p, abs(lhs - rhs) / rhs)
    announce("parseval", worst_p < 1e-12, f"(worst {worst_p:.2e})")

    # Bony residual, 100 pairs across n in {64, 128}
    worst_b = 0.0
    for i in range(100):
        n = 64 if i < 50 else 128
        f = envelope_field(2000 + i, n, 1.0)
        g = envelope_field(3000 + i, n, 1.0)
        tfg, tgf, rem = bony_paraproducts(f, g)
        prod = dealiased_product(f, g)
        num = tfg.coeffs + tgf.coeffs + rem.coeffs - prod.coeffs
        num[0, 0] = 0.0
        den = prod.coeffs.copy()
        den[0, 0] = 0.0
        worst_b = max(worst_b, np.linalg.norm(num) / np.linalg.norm(den))
    announce("bony-residual", worst_b < 1e-10, f"(worst {worst_b:.2e})")

    # localization pairing identity, 100 pairs, all active bands
    worst_l = 0.0
    for i in range(100):
        n = 64
        u = envelope_field(4000 + i, n, 1.0)
        v = envelope_field(5000 + i, n, 1.0)
        scale = sobolev_norm(u, 0.0) * sobolev_norm(v, 0.0)
        for j in active_bands(u.grid):
            djv = lp_project(v, j, "delta").coeffs
            lhs = np.real(np.sum(u.coeffs * np.conj(djv)))
            rhs = np.real(np.sum(lp_project(u, j, "tilde").coeffs * np.conj(djv)))
            worst_l = max(worst_l, abs(lhs - rhs) / scale)
    announce("localization-identity", worst_l < 1e-12, f"(worst {worst_l:.2e})")

    # divergence-free velocity per mode, 100 trials
    worst_d = 0.0
    for i in range(100):
        n = 64 if i < 60 else 256
        theta = envelope_field(6000 + i, n, 1.0)
        u1, u2 = riesz_velocity(theta)
        g = theta.grid
        div = g.j1 * u1.coeffs + g.j2 * u2.coeffs
        worst_d = max(worst_d, np.max(np.abs(div)) / np.max(np.abs(theta.coeffs)))
    announce("divergence-free", worst_d < 1e-13, f"(worst {worst_d:.2e})")

    elapsed = time.perf_counter() - t0
    announce("exact-identities-runtime", elapsed < 60.0, f"({elapsed:.1f}s)")


# ----------------------------------------------------------------- criterion 2
@pytest.mark.slow
def test_semigroup_sandwich():
    worst = 0.0
    trials = 0
    for gamma in (0.6, 1.0, 1.5):
        lam, lamp = sandwich_constants(gamma)
        assert lam == 2.0 ** (-gamma - 1) and lamp == 2.0 ** (gamma - 1)
        for seed in range(5):
            v = envelope_field(seed, 128, 0.8)
            for j in active_bands(v.grid):
                try:
                    tr = verify_semigroup_block(v, j, gamma, (0.01, 0.1, 1.0))
                except TrialSkipped:
                    continue
                trials += 1
                worst = max(worst, tr.ratio)
    announce("semigroup-sandwich", worst <= 1e-12,
             f"({trials} trials, worst violation {worst:.2e})")


# ----------------------------------------------------------------- criterion 3
@pytest.mark.slow
def test_linear_smoothing_stability():
    t_grid = np.geomspace(1e-4, 1.0, 257)  # 64+ nodes per decade
    for s in (0.25, 0.5):
        sups = []
        for n in (64, 128):
            sup_n = 0.0
            trend_all = True
            for seed in range(5):
                tr = verify_linear_smoothing(envelope_field(700 + seed, n, 0.0), 1.0, s, t_grid)
                sup_n = max(sup_n, tr.ratio)
                trend_all = trend_all and tr.details["small_t_trend_ok"]
            sups.append(sup_n)
            announce(f"smoothing-trend[s={s},n={n}]", trend_all)
        growth = sups[1] / sups[0] - 1.0
        announce(f"smoothing-stability[s={s}]", growth < 0.10,
                 f"(sup {sups[1]:.4f}, growth {100 * growth:+.2f}%)")


# ----------------------------------------------------------------- criterion 4
@pytest.mark.slow
def test_commutator_refinement_stability():
    t0 = time.perf_counter()
    tuples = [(0.0, 1.0, 0.25), (0.5, 4.0 / 3.0, 1.0 / 3.0)]
    tuples += _sample_admissible_tuples(np.random.default_rng(99), 4)
    reports = commutator_stability_report((64, 128, 256), tuples, n_pairs=50, seed=123)
    for rep in reports:
        label = f"commutator[m={rep.details['m']},s={rep.details['s']:.3g},t={rep.details['t']:.3g}]"
        announce(label, rep.verdict == "pass",
                 f"(aggregate {rep.max_ratio:.4f}, growth {100 * rep.refinement_growth:+.3f}%)")
    elapsed = time.perf_counter() - t0
    announce("commutator-runtime", elapsed < 600.0, f"({elapsed:.1f}s)")


# ----------------------------------------------------------------- criterion 5
@pytest.mark.slow
def test_solver_correctness():
    # linear-mode equivalence
    cfg = SolverConfig(gamma=0.7, n=32, dt=5e-3, t_end=1.0, linear_only=True)
    theta0 = envelope_field(5, 32, 1.5)
    _, traj = integrate(cfg, theta0, [0.25, 0.5, 1.0])
    worst = max(
        abs(rec["l2"] - sobolev_norm(semigroup_apply(theta0, 0.7, t), 0.0)) / rec["l2"]
        for t, rec in zip(traj.times, traj.records)
    )
    announce("linear-equivalence", worst < 1e-12, f"(worst {worst:.2e})")

    # steady orbit
    worst = 0.0
    for gamma in (0.6, 1.0, 1.5):
        cfg = SolverConfig(gamma=gamma, n=32, dt=1e-3, t_end=1.0)
        _, traj = integrate(cfg, sine_field(32), [1.0])
        exact = np.exp(-((2 * np.pi) ** gamma)) / np.sqrt(2)
        worst = max(worst, abs(traj.column("l2")[-1] - exact) / exact)
    announce("steady-orbit", worst < 1e-10, f"(worst {worst:.2e})")

    # Richardson order 2 +- 0.3 at t = 0.5
    orders = []
    for gamma, dts in ((0.6, (4e-3, 2e-3, 5e-4)), (1.0, (8e-4, 4e-4, 1e-4)),
                       (1.5, (8e-4, 4e-4, 1e-4))):
        theta0 = envelope_field(7, 32, 3.0)
        sols = {}
        for dt in dts:
            cfg = SolverConfig(gamma=gamma, n=32, dt=dt, t_end=0.5)
            st, _ = integrate(cfg, theta0, [])
            sols[dt] = st.theta.coeffs
        e1 = np.linalg.norm(sols[dts[0]] - sols[dts[2]])
        e2 = np.linalg.norm(sols[dts[1]] - sols[dts[2]])
        orders.append(np.log2(e1 / e2))
    announce("richardson-order", all(1.7 <= o <= 2.3 for o in orders),
             "(" + ", ".join(f"{o:.2f}" for o in orders) + ")")

    # L2 monotone decay + maximum principle + mean conservation, stepwise
    n, dt = 64, 1e-3
    cfg = SolverConfig(gamma=1.0, n=n, dt=dt, t_end=0.3)
    c0 = envelope_field(9, n, 4.0, amplitude=0.5).coeffs.copy()
    c0[~two_thirds_mask(n)] = 0.0
    st = SimulationState(0.0, SpectralField(TorusGrid(n), c0))
    l2_prev = sobolev_norm(st.theta, 0.0)
    linf_prev = np.max(np.abs(inverse_transform(st.theta).values))
    ok_l2 = ok_linf = ok_mean = True
    for _ in range(300):
        st = step(st, dt, cfg)
        l2 = sobolev_norm(st.theta, 0.0)
        linf = np.max(np.abs(inverse_transform(st.theta).values))
        ok_l2 = ok_l2 and l2 <= l2_prev * (1 + 1e-12)
        ok_linf = ok_linf and linf <= linf_prev * (1 + 1e-6)
        ok_mean = ok_mean and abs(st.theta.coeffs[0, 0]) < 1e-14
        l2_prev, linf_prev = l2, linf
    announce("l2-monotone", ok_l2)
    announce("maximum-principle", ok_linf)
    announce("mean-conservation", ok_mean)


# ------------------------------------------------- criteria 6-8: desk scale
@pytest.fixture(scope="module")
def smoothing_run():
    gamma, n, dt = 1.0, 256, 1e-4
    t_res = resolved_time(n, gamma)
    t_s = 30.0 * t_res
    betas = (0.5, 1.0, 2.0)
    hs = tuple(dict.fromkeys([2 - gamma + b for b in betas] + [1.5, 2.0]))
    cfg = SolverConfig(gamma=gamma, n=n, dt=dt, t_end=t_s, hs_list=hs, t0=1.0)
    theta0 = gen_rough_data(7, 1.05, n, 1.0)
    t0 = time.perf_counter()
    _, traj = integrate(cfg, theta0, np.geomspace(t_res / 4, t_s, 96))
    return traj, time.perf_counter() - t0, gamma, n


@pytest.mark.slow
def test_thm1_desk_scale(smoothing_run):
    traj, elapsed, gamma, n = smoothing_run
    window = default_fit_window(n, gamma)
    for beta in (0.5, 1.0, 2.0):
        fit, details = measure_smoothing(traj, beta, gamma, window)
        announce(
            f"thm1[beta={beta:g}]",
            details["verdict"] == "pass",
            f"(slope {fit.slope:.3f} >= {details['slope_bound']:.2f}, "
            f"trend {'ok' if details['trend_ok'] else 'violated'})",
        )
    announce("thm1-runtime", elapsed < 300.0, f"({elapsed:.1f}s)")


@pytest.mark.slow
def test_thm3_time_integrability(smoothing_run):
    traj, _, gamma, n = smoothing_run
    window = (resolved_time(n, gamma), float(traj.t[-1]))
    for b1, b2 in ((0.0, 0.5), (0.5, 0.5)):
        val = measure_time_integrability(traj, b1, b2, gamma, window)
        half = measure_time_integrability(traj, b1, b2, gamma, window, stride=2)
        growth = abs(val / half - 1.0)
        announce(
            f"thm3[b1={b1:g},b2={b2:g}]",
            np.isfinite(val) and growth < 0.10,
            f"(value {val:.4f}, quadrature growth {100 * growth:.2f}%)",
        )


@pytest.fixture(scope="module")
def decay_run():
    gamma, n, t_end = 1.0, 256, 20.0
    theta0 = gen_rough_data(7, 1.05, n, 0.5)
    c0 = theta0.coeffs.copy()
    c0[~two_thirds_mask(n)] = 0.0
    probe = SimulationState(0.0, SpectralField(theta0.grid, c0))
    cfg_probe = SolverConfig(gamma=gamma, n=n, dt=1e-4, t_end=t_end)
    bound = cfl_dt(probe, cfg_probe)
    e = 10.0 ** np.floor(np.log10(bound))
    dt = float(np.floor(bound / e) * e)
    hs = (1.0, 1.5, 2.0)
    cfg = SolverConfig(gamma=gamma, n=n, dt=dt, t_end=t_end, hs_list=hs, t0=1.0)
    times = sorted(set(list(np.geomspace(dt * 4, t_end, 48)) + list(np.linspace(0.0, t_end, 48))))
    t0 = time.perf_counter()
    _, traj = integrate(cfg, theta0, times)
    return traj, time.perf_counter() - t0, gamma


@pytest.mark.slow
def test_thm4_decay(decay_run):
    traj, elapsed, gamma = decay_run
    fit, sup = measure_global_decay(traj, 0.0, gamma)
    announce("thm4-tail-slope", fit.slope <= -0.25,
             f"(measured {fit.slope:.3f} over [{fit.window[0]:.1f}, {fit.window[1]:.1f}];"
             f" bar -0.25, torus rate ~ -2 pi)")
    announce("linf-decay", sup["linf_nontrending"]
             and sup["linf_weighted_sup_late"] <= 2 * sup["linf_weighted_sup_ref_1_5"],
             f"(sup from t=1: {sup['linf_weighted_sup_late']:.3e}, "
             f"ref [1,5]: {sup['linf_weighted_sup_ref_1_5']:.3e})")
    announce("analyticity-y", sup["t0_reported"] is not None
             and sup["y_max_after_t0"] <= 0.5,
             f"(T0 reported {sup['t0_reported']}, y max after {sup['y_max_after_t0']:.3f})")
    announce("thm4-runtime", elapsed < 600.0, f"({elapsed:.1f}s)")


# ----------------------------------------------------------------- criterion 9
@pytest.mark.slow
def test_suite_determinism():
    spec = ExperimentSpec(gamma=1.0, n=64, dt=5e-4, t_end=12.0, seed=11,
                          beta_list=(1.0, 2.0), amplitude=0.4, sample_count=48)
    r1 = run_suite(spec)
    r2 = run_suite(spec)
    b1 = json.dumps({"claims": r1.claims, "metadata": r1.metadata}, sort_keys=True)
    b2 = json.dumps({"claims": r2.claims, "metadata": r2.metadata}, sort_keys=True)
    announce("suite-determinism", b1 == b2, f"({len(r1.claims)} claims)")
