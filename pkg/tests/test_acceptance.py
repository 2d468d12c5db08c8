"""Acceptance suite: one test per acceptance criterion, with a printed
pass/fail line each (run with ``pytest tests/test_acceptance.py -v -s``).

The desk-scale experiment configuration shared by several criteria is
L=10, d=2, k0=3 (k=6, N=20, T=120 candidate supports), minimum block SNR
13 dB, eta0=1/4, Gaussian sampling matrix redrawn every 100-trial block,
2000 trials per sweep point.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from oracles import bessel_k_quad, gamma_quad, gaussian_q_quad
from unionrec import bounds, montecarlo as mc, specfun
from unionrec.bounds import BoundConfig

MASTER_SEED = 17

CRITERION1_CONFIG = mc.ExperimentConfig(
    L=10, d=2, k0=3, sweep_axis="m", sweep_values=(8, 10, 12, 16, 20),
    trials=2000, master_seed=MASTER_SEED, bsnr_min_db=13.0,
    matrix_redraws=20, decoders=("ml",), eta0=0.25, r0=1.0,
)


def _report(criterion, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    suffix = f" - {detail}" if detail else ""
    print(f"\nACCEPTANCE criterion {criterion}: {tag}{suffix}")
    assert passed, f"criterion {criterion} failed: {detail}"


@pytest.fixture(scope="module")
def criterion1_sweep():
    t0 = time.perf_counter()
    result = mc.run_sweep(CRITERION1_CONFIG)
    return result, time.perf_counter() - t0


def test_criterion_1_bound_dominance(criterion1_sweep):
    result, elapsed = criterion1_sweep
    records = result.sorted_points()
    ok = True
    notes = []
    for r in records:
        se = mc.wilson_se(r.errors["ml"], r.trials)
        if r.error_rate["ml"] > r.bound_clamped + 3.0 * se:
            ok = False
        notes.append(f"M={r.m}: emp={r.error_rate['ml']:.4f} bound={r.bound_clamped:.4f}")
    # both curves non-increasing in M (empirical: up to interval width)
    for a, b in zip(records, records[1:]):
        joint = 3.0 * math.hypot(
            mc.wilson_se(a.errors["ml"], a.trials), mc.wilson_se(b.errors["ml"], b.trials)
        )
        if b.error_rate["ml"] > a.error_rate["ml"] + joint:
            ok = False
        if b.bound_clamped > a.bound_clamped:
            ok = False
    if elapsed >= 300.0:
        ok = False
    _report(1, ok, "; ".join(notes) + f"; elapsed {elapsed:.1f}s")


def test_criterion_2_decoder_ordering():
    cfg = mc.ExperimentConfig(
        L=10, d=2, k0=3, sweep_axis="bsnr_db", m=14,
        sweep_values=(7.0, 10.0, 13.0, 16.0, 19.0), bsnr_ratio=1.825,
        trials=2000, master_seed=MASTER_SEED, matrix_redraws=20,
        decoders=("ml", "bomp"), eta0=0.25, r0=1.0,
    )
    records = mc.run_sweep(cfg).sorted_points()
    ok = True
    strictly_greater = 0
    notes = []
    for r in records:
        joint = 3.0 * math.hypot(
            mc.wilson_se(r.errors["ml"], r.trials), mc.wilson_se(r.errors["bomp"], r.trials)
        )
        if r.error_rate["bomp"] < r.error_rate["ml"] - joint:
            ok = False
        if r.error_rate["bomp"] > r.error_rate["ml"]:
            strictly_greater += 1
        notes.append(
            f"{r.bsnr_min_db:g}dB: ml={r.error_rate['ml']:.4f} bomp={r.error_rate['bomp']:.4f}"
        )
    if strictly_greater < 3:
        ok = False
    _report(2, ok, "; ".join(notes) + f"; strict gap at {strictly_greater}/5 points")


def test_criterion_3_noiseless_exhaustive_recovery():
    cfg = mc.ExperimentConfig(
        L=20, d=1, k0=3, sweep_axis="m", sweep_values=(4,), trials=100,
        master_seed=MASTER_SEED, noiseless=True, matrix_redraws=100,
        decoders=("ml",),
    )
    rec = mc.run_point(cfg, 0)
    _report(3, rec.errors["ml"] == 0, f"{rec.trials - rec.errors['ml']}/{rec.trials} recovered at M=k+1")


def test_criterion_4_high_snr_sufficiency():
    cfg = mc.ExperimentConfig(
        L=10, d=2, k0=3, sweep_axis="m", sweep_values=(8,), trials=2000,
        master_seed=MASTER_SEED, bsnr_min_db=40.0, matrix_redraws=20,
        decoders=("ml",), eta0=0.25, r0=1.0,
    )
    rec = mc.run_point(cfg, 0)
    _report(
        4,
        rec.error_rate["ml"] < 1e-2,
        f"error rate {rec.error_rate['ml']:.4g} at M=k+2, 40 dB",
    )


@pytest.fixture(scope="module")
def criterion5_record():
    op, bm, tj, ci, sig, noise = mc.pairwise_instance(
        L=8, d=1, k0=3, M=10, lam_target=40.0, seed=5
    )
    return mc.pairwise_validation(
        op, bm, tj, ci, sig, noise, BoundConfig(0.25, 1.0), 100_000, seed=99
    )


def test_criterion_5_sharp_h2_and_lemma_dominance(criterion5_record):
    rec = criterion5_record
    ok = 20.0 <= rec.lam <= 60.0
    # exact Gaussian expression for the h2 event probability
    se_h2 = mc.wilson_se(int(round(rec.p_h2 * rec.n_draws)), rec.n_draws)
    if abs(rec.p_h2 - rec.q_term) > 3.0 * se_h2:
        ok = False
    # the pairwise error event stays below the full bound
    se_d = mc.wilson_se(int(round(rec.p_delta * rec.n_draws)), rec.n_draws)
    if rec.p_delta > rec.pair_bound_clamped + 3.0 * se_d:
        ok = False
    _report(
        5,
        ok,
        f"lambda={rec.lam:.1f}: h2 emp={rec.p_h2:.5f} vs Q-term={rec.q_term:.5f}; "
        f"Pr(Delta<0)={rec.p_delta:.2e} vs bound={rec.pair_bound_clamped:.4f} "
        "(h1 tail clause reported separately)",
    )


@pytest.mark.xfail(
    strict=True,
    reason="published chi-square-difference tail-bound constant lies below the true "
    "tail (a sqrt(2t) factor is dropped in its derivation), so the h1 event rate "
    "exceeds it; see the decisions ledger",
)
def test_criterion_5_h1_tail_dominance(criterion5_record):
    rec = criterion5_record
    _report(
        "5 (h1 clause)",
        rec.p_h1 <= rec.h1_bound,
        f"h1 emp={rec.p_h1:.5f} vs 2x tail bound={rec.h1_bound:.5f}",
    )


def test_criterion_6_special_function_oracles():
    t0 = time.perf_counter()
    ok = True
    for x in np.linspace(-3.0, 6.0, 19):
        ref = gaussian_q_quad(float(x))
        got = specfun.gaussian_q(float(x))
        if abs(got - ref) > 1e-10 or abs(got - ref) > 1e-8 * ref:
            ok = False
    for x in [0.5, 0.8, 1.0, 1.5, 2.5, 4.0, 6.5, 10.0, 15.0, 22.0, 30.0]:
        if abs(math.exp(specfun.ln_gamma(x)) - gamma_quad(x)) > 1e-8 * gamma_quad(x):
            ok = False
    for x in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]:
        for twice_nu in range(0, 21):
            nu = twice_nu / 2.0
            ref = bessel_k_quad(nu, x)
            if abs(specfun.bessel_k(nu, x) - ref) > 1e-8 * ref:
                ok = False
    for l in (1, 2, 3, 4, 8):
        half, _ = quad(lambda w: specfun.chi2_diff_pdf(l, w), 0.0, np.inf, limit=200)
        if abs(2.0 * half - 1.0) > 1e-6:
            ok = False
    elapsed = time.perf_counter() - t0
    if elapsed >= 30.0:
        ok = False
    _report(6, ok, f"Q/Gamma/K vs quadrature and pdf normalization in {elapsed:.1f}s")


def test_criterion_7_specialization_consistency():
    n, k, csnr = 20, 3, 10.0
    cfg = BoundConfig(0.25, 1.0)
    ok = True
    for m in range(5, 45, 2):  # 20-point grid
        std = bounds.standard_bound_random(n, k, m, csnr, cfg).raw
        blk = bounds.block_bound_random(n, k, 1, m, csnr, cfg).raw
        if abs(blk - std) > 1e-12 * std:
            ok = False
        a2 = {l: l * csnr for l in range(1, k + 1)}
        t0 = {l: math.comb(k, l) * math.comb(n - k, l) for l in range(1, k + 1)}
        grp = bounds.grouped_bound(a2, t0, m, k, cfg).raw
        if abs(grp - std) > 1e-12 * std:
            ok = False
    _report(7, ok, "block(d=1) = standard = grouped to 1e-12 relative on 20 points")


def test_criterion_8_comparison_bound_reproduction():
    ok = True
    # high-SNR floor of the comparison bound
    bv = bounds.wainwright_bound(20, 3, 15, 1e6)
    floor = 4.0 * math.exp(-(15 - 3) / 64.0) * (math.comb(20, 3) - 1)
    if abs(bv.raw - floor) > 0.01 * floor:
        ok = False
    # our standard bound sits strictly below it on the figure-style grid
    cfg = BoundConfig(0.25, 1.0)
    for m in range(10, 46, 2):
        ours = bounds.standard_bound_random(50, 5, m, 10.0, cfg).raw
        theirs = bounds.wainwright_bound(50, 5, m, 10.0).raw
        if not ours < theirs:
            ok = False
    _report(8, ok, f"floor ratio {bv.raw / floor:.4f}; pointwise below on N=L=50 grid")


def test_criterion_9_determinism_and_shard_merge(criterion1_sweep):
    result, _ = criterion1_sweep
    replay = mc.run_sweep(CRITERION1_CONFIG)
    ok = replay.to_csv() == result.to_csv()
    csv_bytes_equal = ok
    # ten-shard split of every point merges to the single-run tallies
    shards_equal = True
    for point_index in range(len(CRITERION1_CONFIG.sweep_values)):
        full = mc.run_point_tally(CRITERION1_CONFIG, point_index)
        shards = [
            mc.run_point_tally(CRITERION1_CONFIG, point_index, s, s + 200)
            for s in range(0, 2000, 200)
        ]
        if mc.merge_tallies(shards) != full:
            shards_equal = False
    ok = csv_bytes_equal and shards_equal
    _report(
        9,
        ok,
        f"byte-identical CSV: {csv_bytes_equal}; 10-shard merge exact: {shards_equal}",
    )
