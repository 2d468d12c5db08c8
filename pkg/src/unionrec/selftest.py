"""Fast built-in invariant suite behind the ``selftest`` CLI command.

Runs at least one representative invariant per module at reduced trial
counts.  This is a smoke screen for installations and configuration
overrides, not a replacement for the full pytest suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import bounds, decode, linalg, model, montecarlo, specfun
from .seeding import derive_rng


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _check(name, fn, results):
    try:
        detail = fn() or ""
        results.append(CheckResult(name, True, detail))
    except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
        results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))


def run_selftest(eta0: float = 0.25, r0: float = 1.0, seed: int = 0) -> list:
    """Execute the reduced invariant suite; returns one result per check."""
    results: list[CheckResult] = []

    def config_check():
        bounds.BoundConfig(eta0, r0)
        return f"eta0={eta0}, r0={r0}"

    _check("bounds.config_constants", config_check, results)
    cfg = None
    try:
        cfg = bounds.BoundConfig(eta0, r0)
    except Exception:
        cfg = None

    def linalg_check():
        rng = derive_rng(seed, 0)
        for m, k in [(6, 2), (10, 4), (9, 3)]:
            b = rng.standard_normal((m, k))
            y = rng.standard_normal(m)
            q = linalg.thin_q(b)
            p_y = q @ (q.T @ y)
            r = linalg.residual_project(b, y)
            assert np.linalg.norm(b.T @ r) <= 1e-9 * np.linalg.norm(y)
            assert abs((p_y @ p_y) + (r @ r) - y @ y) <= 1e-9 * (y @ y)
            qn = linalg.nullspace_basis(b)
            assert abs(np.linalg.norm(qn.T @ y) - np.linalg.norm(r)) <= 1e-9 * np.linalg.norm(y)
        return "projector identities on 3 random shapes"

    _check("linalg.projector_identities", linalg_check, results)

    def specfun_check():
        q_ref, _ = quad(lambda t: math.exp(-t * t / 2.0) / math.sqrt(2 * math.pi), 1.0, np.inf)
        assert abs(specfun.gaussian_q(1.0) - q_ref) < 1e-10
        assert abs(specfun.ln_gamma(5.0) - math.log(24.0)) < 1e-12
        assert abs(specfun.bessel_k(0.5, 1.0) - math.sqrt(math.pi / 2.0) * math.exp(-1.0)) < 1e-12
        assert abs(
            specfun.psi_term(3, 25.0, 0.25) - 2.0 * specfun.chi2_diff_tail_bound(3, 0.25 * 25.0)
        ) < 1e-15
        total, _ = quad(lambda w: specfun.chi2_diff_pdf(2, w), 0.0, np.inf)
        assert abs(2.0 * total - 1.0) < 1e-6
        return "Q/Gamma/K spot values, psi-tail identity, pdf normalization"

    _check("specfun.identities", specfun_check, results)

    def model_check():
        L, k0 = 6, 3
        assert sum(model.count_t_of_l(L, k0, l) for l in range(1, k0 + 1)) == math.comb(L, k0) - 1
        bm = model.BlockModel(5, 2, 2)
        noise = model.NoiseSpec(0.7)
        sig = model.generate_block_signal(bm, (1, 3), 13.0, 1.825, noise, derive_rng(seed, 1))
        assert abs(model.bsnr_min(sig, noise) - 10.0**1.3) < 1e-9 * 10.0**1.3
        op = model.sample_gaussian_operator(8, bm.ambient_dim, derive_rng(seed, 2))
        lam = model.lambda_j_given_i(op, bm, (1, 3), (0, 1), sig, noise)
        assert lam > 0.0
        return "overlap counts, BSNR round trip, lambda positivity"

    _check("model.quantities", model_check, results)

    def decode_check():
        rng = derive_rng(seed, 3)
        bm = model.BlockModel(8, 1, 2)
        supports = model.enumerate_supports(8, 2)
        op = model.sample_gaussian_operator(3, 8, rng)  # M = k + 1
        cands = model.candidate_bases(op, bm)
        hits = 0
        for t in range(20):
            sig = model.generate_block_signal(
                bm, supports[t % len(supports)], 0.0, 1.0, model.NoiseSpec(1.0), derive_rng(seed, 4, t)
            )
            y = op.A @ sig.c
            res = decode.ml_decode(y, cands)
            hits += supports[res.estimated] == sig.support
        assert hits == 20
        y = rng.standard_normal(3)
        d_ij = decode.decision_statistic(y, cands[0], cands[1])
        d_ji = decode.decision_statistic(y, cands[1], cands[0])
        assert abs(d_ij + d_ji) < 1e-9
        return "noiseless recovery at M=k+1, statistic antisymmetry"

    _check("decode.recovery", decode_check, results)

    def bounds_check():
        c = cfg or bounds.BoundConfig()
        blk = bounds.block_bound_random(20, 3, 1, 10, 10.0, c).raw
        std = bounds.standard_bound_random(20, 3, 10, 10.0, c).raw
        assert blk == std
        prev = math.inf
        for m in range(8, 30, 4):
            val = bounds.block_bound_random(10, 3, 2, m, 10.0**1.3, c).raw
            assert val < prev
            prev = val
        rep = bounds.block_complexity(10, 3, 2, 1e30, c)
        assert rep.m_required == 6
        return "specialization equality, monotone decrease in M, high-SNR limit"

    _check("bounds.calculators", bounds_check, results)

    def montecarlo_check():
        mc_cfg = montecarlo.ExperimentConfig(
            L=5, d=1, k0=2, sweep_axis="m", sweep_values=(4, 6), trials=40,
            master_seed=seed + 11, bsnr_min_db=12.0, matrix_redraws=4,
            decoders=("ml", "bomp"), eta0=(cfg.eta0 if cfg else 0.25),
        )
        first = montecarlo.run_sweep(mc_cfg).to_csv()
        second = montecarlo.run_sweep(mc_cfg).to_csv()
        assert first == second
        full = montecarlo.run_point_tally(mc_cfg, 0)
        halves = montecarlo.merge_tallies([
            montecarlo.run_point_tally(mc_cfg, 0, 0, 20),
            montecarlo.run_point_tally(mc_cfg, 0, 20, 40),
        ])
        assert halves == full
        return "byte-identical replay and shard merge on a micro sweep"

    _check("montecarlo.determinism", montecarlo_check, results)
    return results


def format_report(results) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        detail = f" ({r.detail})" if r.detail else ""
        lines.append(f"{status}: {r.name}{detail}")
    n_fail = sum(not r.ok for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
