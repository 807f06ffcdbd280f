"""
Acceptance suite. Each test records one PASS/FAIL line (printed in the
"acceptance criteria" section of the pytest summary) and then asserts it.
"""

import math
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from ris_beamtrain.array_geometry import steering_h
from ris_beamtrain.baselines import exhaustive_search
from ris_beamtrain.channel import (CascadeLink, ChannelRealization, ScenarioConfig,
                                   received_snr_factored, received_snr_full)
from ris_beamtrain.codebook import build_codebook, intra_set_distance, multibeam_vector
from ris_beamtrain.config import parse_config
from ris_beamtrain.experiment import (ExperimentPlan, draw_trial, gamma_for_snr, read_report,
                                      render_report, run_monte_carlo, trial_streams)
from ris_beamtrain.search import (SearchConfig, instrumented_symbol_count, run_ris_training,
                                  run_user_training, training_symbol_budget)

ROOT = Path(__file__).resolve().parents[1]

TABLE_64_8 = [[l + 8 * k for k in range(8)] for l in range(1, 9)]


def binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def test_c01_factorization(criterion):
    """C1 factorized SNR equals full-matrix SNR (1000 instances, rel 1e-10, < 10 s)"""
    rng = np.random.default_rng(2024)
    cfg = ScenarioConfig(N_h=32, N_v=8, N_t=8, N_r=8)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        real = ChannelRealization(complex(*rng.standard_normal(2)),
                                  complex(*rng.standard_normal(2)), *rng.uniform(-1, 1, 6))
        xh = np.exp(1j * rng.uniform(0, 2 * np.pi, 32))
        xv = np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
        w = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        w /= np.linalg.norm(w)
        full = received_snr_full(cfg, real, np.kron(xh, xv), w, 1.0)
        fact = received_snr_factored(cfg, real, xh, xv, w, 1.0)
        worst = max(worst, abs(full - fact) / full)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 10.0
    criterion(ok, f"max rel err {worst:.2e}, {dt:.2f} s")
    assert ok


def test_c02_codebook_table(criterion):
    """C2 build_codebook(64, 8) reproduces the reference bin table, intra-set distance 8"""
    cb = build_codebook(64, 8)
    dist = [intra_set_distance(b) for b in cb.bins]
    ok = cb.table().tolist() == TABLE_64_8 and dist == [8] * 8
    criterion(ok, f"first row {list(cb.bins[0])}, distances {sorted(set(dist))}")
    assert ok


def noiseless_grid_sweep(n_h, m):
    cfg = ScenarioConfig(N_h=n_h, N_v=4, N_r=4, N_t=1, kappa_ui=200.0, kappa_ia=200.0)
    cb = build_codebook(n_h, m)
    base = ChannelRealization.from_angles(cfg, 1.0, 1.0)
    hits = 0
    for j in range(1, n_h + 1):
        real = base.replace(omega_i=base.omega_r - cb.grid.value(j))
        res = run_ris_training(cfg, real, SearchConfig(M=m, noise_enabled=False), 1.0, None)
        hits += res.chosen_index == j
    return hits / n_h


def test_c03_noiseless_soundness(criterion):
    """C3 noiseless LoS on-grid sweep, PS with T=L succeeds exactly for (16,2), (32,4), (64,8)"""
    t0 = time.perf_counter()
    rates = {nm: noiseless_grid_sweep(*nm) for nm in ((16, 2), (32, 4), (64, 8))}
    dt = time.perf_counter() - t0
    ok = all(r == 1.0 for r in rates.values()) and dt < 30.0
    criterion(ok, ", ".join(f"{nm}: {r:.4f}" for nm, r in rates.items()) + f", {dt:.2f} s")
    assert ok


def test_c04_oracle_equivalence(criterion):
    """C4 PS pair attains the exhaustive maximum on N_h=8, N_t=4 noiseless on-grid trials (>= 99%)"""
    plan = ExperimentPlan(
        scenario=ScenarioConfig(N_h=8, N_v=4, N_r=4, N_t=4),
        ris_search=SearchConfig(M=2, noise_enabled=False),
        user_search=SearchConfig(M=2, noise_enabled=False),
        schemes=("ps",), trials=500, master_seed=4, truth="grid")
    cfg = plan.scenario
    t0 = time.perf_counter()
    hits = 0
    for t in range(plan.trials):
        channel_seed, _ = trial_streams(plan.master_seed, 0, t)
        real = draw_trial(plan, np.random.default_rng(channel_seed))
        r = run_ris_training(cfg, real, plan.ris_search, 1.0, None)
        u = run_user_training(cfg, real, r.chosen_vector, plan.user_search, 1.0, None)
        link = CascadeLink(cfg, real, 1.0)
        eta = link.snr(r.chosen_vector, link.matched_xi_v(), u.chosen_vector)
        best = exhaustive_search(cfg, real, 1.0).snr
        hits += eta >= best * (1.0 - 1e-12)
    dt = time.perf_counter() - t0
    rate = hits / plan.trials
    ok = rate >= 0.99 and dt < 30.0
    criterion(ok, f"optimal in {rate:.4f} of {plan.trials} trials (M_ris=2, M_user=2), {dt:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def desk_curves():
    plan = ExperimentPlan(
        scenario=ScenarioConfig(N_h=64, N_v=8, N_r=64, N_t=1),
        ris_search=SearchConfig(M=8), schemes=("ps", "cs"),
        snr_points=tuple(float(x) for x in np.linspace(-10.0, 39.0, 15)),
        trials=2000, master_seed=5)
    t0 = time.perf_counter()
    report = run_monte_carlo(plan)
    return plan, report, time.perf_counter() - t0


def test_c05_desk_curves(desk_curves, criterion):
    """C5 desk-scale curves: monotone within 2 SE, PS >= CS everywhere, PS - CS >= 0.05 mid-range"""
    plan, report, dt = desk_curves
    n = plan.trials
    curves = {s: np.array([r.success_rate for r in report.get(s)]) for s in plan.schemes}
    dips = []
    for s, c in curves.items():
        for i in range(len(c) - 1):
            tol = 2 * math.hypot(binomial_se(c[i], n), binomial_se(c[i + 1], n))
            if c[i + 1] < c[i] - tol:
                dips.append(f"{s}@{plan.snr_points[i + 1]:.1f}dB ({c[i]:.3f}->{c[i + 1]:.3f})")
    ps, cs = curves["ps"], curves["cs"]
    below = [f"{plan.snr_points[i]:.1f}dB" for i in range(len(ps))
             if ps[i] < cs[i] - 2 * math.hypot(binomial_se(ps[i], n), binomial_se(cs[i], n))]
    mid = range(len(ps) // 3, 2 * len(ps) // 3)
    gap = max(ps[i] - cs[i] for i in mid)
    ok = not dips and not below and gap >= 0.05 and dt < 300.0
    detail = (f"dips {dips or 'none'}; PS below CS at {below or 'none'}; "
              f"best mid-range gap {gap:.3f}; PS {ps.min():.3f}..{ps.max():.3f}, "
              f"CS {cs.min():.3f}..{cs.max():.3f}; {dt:.1f} s")
    criterion(ok, detail)
    assert ok


def test_c06_reduced_T(criterion):
    """C6 T = L/2 instead of L changes the top-3-SNR success rate by <= 0.02 (N_h=160, M=8)"""
    base = ExperimentPlan(
        scenario=ScenarioConfig(N_h=160, N_v=160, N_r=64, N_t=1),
        ris_search=SearchConfig(M=8), schemes=("ps",),
        snr_points=(35.0, 37.5, 40.0), trials=2000, master_seed=6)
    full = run_monte_carlo(base)
    half = run_monte_carlo(replace(base, ris_search=SearchConfig(M=8, T=10)))
    a = np.array([r.success_rate for r in full.rows])
    b = np.array([r.success_rate for r in half.rows])
    diff = np.abs(a - b)
    ok = bool(np.all(diff <= 0.02))
    criterion(ok, f"T=20 {np.round(a, 4).tolist()}, T=10 {np.round(b, 4).tolist()}, "
                  f"max |diff| {diff.max():.4f}")
    assert ok


def test_c07_symbol_accounting(criterion, tmp_path):
    """C7 sweeps counted equal L + log2(M) + T; budget is L + log2(M) + T + 1; both reported"""
    rng = np.random.default_rng(7)
    bad = []
    for n, m in ((16, 2), (32, 4), (64, 8), (160, 8), (160, 4), (128, 16)):
        cfg = ScenarioConfig(N_h=n, N_v=4, N_r=4)
        L = n // m
        for T in sorted({1, max(1, L // 2), L}):
            real = ChannelRealization.from_angles(cfg).replace(omega_i=rng.uniform(-1, 1))
            res = run_ris_training(cfg, real, SearchConfig(M=m, T=T), 1.0, rng)
            log2m = int(math.log2(m))
            if (res.symbol_count != L + log2m + T or len(res.sweep_log) != res.symbol_count
                    or training_symbol_budget(L, m, T) != L + log2m + T + 1
                    or instrumented_symbol_count(L, m, T) != res.symbol_count):
                bad.append((n, m, T, res.symbol_count))
    plan = ExperimentPlan(scenario=ScenarioConfig(N_h=64, N_v=8, N_r=8),
                          schemes=("ps", "cs"), trials=3)
    out = tmp_path / "r.csv"
    out.write_text(render_report(run_monte_carlo(plan)))
    rows = {r.scheme: r for r in read_report(out).rows}
    reported = (rows["ps"].symbols, rows["ps"].budget_symbols)
    ok = not bad and reported == (8 + 3 + 8, 8 + 3 + 8 + 1) and rows["cs"].symbols == 11
    criterion(ok, f"mismatches {bad or 'none'}; report ps symbols/budget_symbols {reported}")
    assert ok


def test_c08_slice_and_modulus(criterion):
    """C8 slice identity and unit modulus over 1e4 randomized cases each at 1e-12"""
    rng = np.random.default_rng(8)
    sizes = [(16, 2), (32, 4), (64, 8), (160, 8), (128, 16), (40, 4)]
    worst_slice = worst_mod = 0.0
    for _ in range(10_000):
        n, m = sizes[rng.integers(len(sizes))]
        L = n // m
        a = rng.uniform(-1, 1)
        k = int(rng.integers(1, m + 1))
        sub = np.exp(1j * np.pi * (k - 1) * L * a) * math.sqrt(L / n) * steering_h(L, a)
        worst_slice = max(worst_slice,
                          float(np.max(np.abs(steering_h(n, a)[(k - 1) * L:k * L] - sub))))
    for _ in range(10_000):
        n, m = sizes[rng.integers(len(sizes))]
        cb = build_codebook(n, m)
        r = int(rng.integers(1, cb.coarse_rounds + 2))
        dirs = rng.integers(1, n + 1, m >> (r - 1))
        v = multibeam_vector(cb, r, dirs)
        worst_mod = max(worst_mod, float(np.max(np.abs(np.abs(v) - 1.0))))
    ok = worst_slice <= 1e-12 and worst_mod <= 1e-12
    criterion(ok, f"slice dev {worst_slice:.1e}, modulus dev {worst_mod:.1e} "
                  "(plus hypothesis suite in test_properties)")
    assert ok


def test_c09_determinism(criterion, tmp_path):
    """C9 sweep with a fixed seed is byte-identical across runs and worker counts"""
    cfg = ROOT / "configs" / "desk.ini"
    outs = []
    for i, workers in enumerate((1, 1, 2, 3)):
        out = tmp_path / f"r{i}.csv"
        subprocess.run([sys.executable, "-m", "ris_beamtrain", "sweep", "--config", str(cfg),
                        "--out", str(out), "--seed", "99", "--workers", str(workers)],
                       check=True, capture_output=True)
        outs.append(out.read_bytes())
    ok = all(o == outs[0] for o in outs) and len(outs[0]) > 0
    criterion(ok, f"{len(outs)} runs (workers 1, 1, 2, 3), {len(outs[0])} bytes each")
    assert ok


def test_c10_full_scale(criterion, tmp_path):
    """C10 full-size run (160x160 RIS, N_r=64, 7500 trials, PS+CS) finishes in < 30 min"""
    cli = parse_config(ROOT / "configs" / "full.ini")
    plan = cli.plan
    t0 = time.perf_counter()
    report = run_monte_carlo(plan, workers=cli.workers)
    dt = time.perf_counter() - t0
    out = tmp_path / "full.csv"
    out.write_text(render_report(report))
    top = {s: report.get(s)[-1].success_rate for s in plan.schemes}
    ok = dt < 1800.0 and len(report.rows) == len(plan.snr_points) * 2
    criterion(ok, f"{plan.trials} trials x {len(plan.snr_points)} SNR points x 2 schemes in "
                  f"{dt / 60:.1f} min; success at {plan.snr_points[-1]} dB {top}")
    assert ok
