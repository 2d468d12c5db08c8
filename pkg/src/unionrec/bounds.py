"""Analytic error-probability bounds and sample-complexity calculators.

Every calculator is a pure function of scalars.  The union bounds all share
one per-overlap building block,

    term(l, lam) = Q((1/2)(1 - 2 eta0) sqrt(lam)) + Psi(l, lam),

summed with combinatorial multiplicities; the variants differ only in how
``lam`` and the multiplicities are produced (actual pairwise energies, the
null-space SNR floor times M - k, or l times the minimum block / component
SNR under random sampling).  Sums are accumulated with log-sum-exp because
the multiplicities reach binomial-coefficient scale while individual terms
underflow, so naive evaluation would lose both ends.

Raw bound values can exceed one (they are union bounds); results carry the
raw value and a [0, 1] clamp side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .exceptions import DomainError
from .model import BlockModel, pair_overlap, lambda_j_given_i, _iter_candidates
from .specfun import ln_gaussian_q, ln_psi_term

# Constant in the second complexity condition.
B0 = math.sqrt(2.0 * math.pi) / 4.0

# Validity margin for the Chernoff-form bound: the Bessel asymptotics behind
# it need lam >> l/2 - 1/2, enforced here as a factor-of-ten margin.
CHERNOFF_VALIDITY_FACTOR = 10.0


@dataclass(frozen=True)
class BoundConfig:
    """Tuning constants shared by the bounds: 0 < eta0 < 1/2, r0 > 0."""

    eta0: float = 0.25
    r0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eta0 < 0.5:
            raise DomainError(f"eta0 must lie in (0, 1/2), got {self.eta0}")
        if not self.r0 > 0.0:
            raise DomainError(f"r0 must be > 0, got {self.r0}")

    @property
    def b0(self) -> float:
        return B0


@dataclass(frozen=True)
class BoundValue:
    """A bound with its raw value and the [0, 1] clamp used for plotting."""

    raw: float

    @property
    def clamped(self) -> float:
        return min(self.raw, 1.0)


@dataclass(frozen=True)
class ChernoffGroupedBound(BoundValue):
    """Chernoff-form bound plus a flag for its asymptotic validity regime."""

    asymptotics_valid: bool = True


@dataclass(frozen=True)
class ComplexityReport:
    """Sample requirement M > k + max(m1, m2) from a vanishing-error condition."""

    m1: float
    m2: float
    m_required: int
    dominating_l: Optional[int] = None


@dataclass(frozen=True)
class WainwrightComplexityReport:
    m_required: int
    m_tilde1: float
    m_tilde2: float
    dominating: str


def _ln_comb(n: int, k: int) -> float:
    return math.log(math.comb(n, k))


def _ln_pair_term(l: int, lam: float, eta0: float) -> float:
    q_arg = 0.5 * (1.0 - 2.0 * eta0) * math.sqrt(lam)
    return float(np.logaddexp(ln_gaussian_q(q_arg), ln_psi_term(l, lam, eta0)))


def _ln_sum(ln_terms: Sequence[float]) -> float:
    if not ln_terms:
        raise DomainError("bound sum has no terms")
    arr = np.asarray(ln_terms, dtype=float)
    hi = arr.max()
    if not np.isfinite(hi):
        return float(hi)
    return float(hi + np.log(np.sum(np.exp(arr - hi))))


def _exp(x: float) -> float:
    return float(np.exp(x))


def pairwise_error_bound(l: int, lam: float, cfg: BoundConfig) -> BoundValue:
    """Bound on the probability of preferring one wrong subspace.

    ``lam`` is the noise-normalized unexplained signal energy and ``l`` the
    overlap count between the pair.  Strictly decreasing in ``lam``.
    """
    if lam <= 0.0:
        raise DomainError(f"pairwise bound requires lambda > 0, got {lam}")
    return BoundValue(_exp(_ln_pair_term(int(l), float(lam), cfg.eta0)))


def union_avg_bound(op, model_or_union, signals, noise, cfg: BoundConfig) -> BoundValue:
    """Average-over-truth union bound on the ML error probability.

    Sums the pairwise bound over every ordered candidate pair, using each
    pair's actual unexplained energy, and averages over the uniformly chosen
    true subspace.  ``signals`` holds one signal per candidate; for a block
    model these are BlockSignal objects aligned with the lexicographic
    support order, and the overlap l counts blocks.
    """
    cands = list(_iter_candidates(model_or_union))
    is_block = isinstance(model_or_union, BlockModel)
    ln_terms = []
    for j_idx, true_j in enumerate(cands):
        sig = signals[j_idx] if is_block else (true_j, signals[j_idx])
        for cand in cands:
            if cand == true_j:
                continue
            l = pair_overlap(op, model_or_union, true_j, cand)
            lam = lambda_j_given_i(op, model_or_union, true_j, cand, sig, noise)
            if lam <= 0.0:
                raise DomainError(
                    f"pair ({true_j}, {cand}) has lambda = {lam}; union members "
                    "must be distinct"
                )
            ln_terms.append(_ln_pair_term(l, lam, cfg.eta0))
    return BoundValue(_exp(_ln_sum(ln_terms) - math.log(len(cands))))


def _check_profile(alpha_min_sq: Mapping, t0: Mapping):
    active = sorted(l for l, c in t0.items() if c > 0)
    if not active:
        raise DomainError("no overlap class has a positive candidate count")
    for l in active:
        if l < 1:
            raise DomainError(f"overlap l must be >= 1, got {l}")
        if alpha_min_sq.get(l, 0.0) <= 0.0:
            raise DomainError(f"alpha_min_sq must be > 0 at l={l} with t0 > 0")
    return active


def grouped_bound(
    alpha_min_sq: Mapping[int, float],
    t0: Mapping[int, int],
    M: int,
    k: int,
    cfg: BoundConfig,
) -> BoundValue:
    """Union bound grouped by overlap class.

    Replaces each pairwise energy with its floor (M - k) * alpha_min_sq[l]
    and each per-truth candidate count with its maximum t0[l]; a relaxation
    of ``union_avg_bound`` on the same instance.
    """
    if M <= k:
        raise DomainError(f"need M > k, got M={M}, k={k}")
    active = _check_profile(alpha_min_sq, t0)
    ln_terms = [
        math.log(t0[l]) + _ln_pair_term(l, (M - k) * alpha_min_sq[l], cfg.eta0)
        for l in active
    ]
    return BoundValue(_exp(_ln_sum(ln_terms)))


def general_complexity(
    alpha_min_sq: Mapping[int, float],
    t0: Mapping[int, int],
    k: int,
    cfg: BoundConfig,
) -> ComplexityReport:
    """Samples needed for the grouped bound to vanish as M grows.

    Reports the two inner conditions and M > k + max(m1, m2); the max is
    floored at zero before the ceiling so vanishing log terms (t0 = 1) never
    push the requirement below k.
    """
    active = _check_profile(alpha_min_sq, t0)
    e = cfg.eta0
    best1 = best2 = -math.inf
    dominating = active[0]
    for l in active:
        a2 = alpha_min_sq[l]
        ln_t0 = math.log(t0[l])
        f1 = 8.0 / ((1.0 - 2.0 * e) ** 2 * a2) * (ln_t0 + math.log(0.5))
        f2 = (
            2.0
            * (0.5 * k + cfg.r0 - 1.0)
            / (cfg.r0 * e * a2)
            * (ln_t0 + math.log(2.0 * B0 / math.sqrt(math.pi)))
        )
        if max(f1, f2) > max(best1, best2):
            dominating = l
        best1 = max(best1, f1)
        best2 = max(best2, f2)
    m_req = math.ceil(k + max(0.0, best1, best2))
    return ComplexityReport(best1, best2, m_req, dominating)


def block_bound_random(
    L: int, k0: int, d: int, M: int, bsnr_min: float, cfg: BoundConfig
) -> BoundValue:
    """Error bound for block sparsity pattern recovery under Gaussian sampling.

    With k = k0 * d, sums over block overlaps l = 1..k0 the pairwise term at
    lam = (M - k) * l * bsnr_min with multiplicity C(k0, l) C(L - k0, l).
    """
    L, k0, d, M = int(L), int(k0), int(d), int(M)
    if not 1 <= k0 <= L:
        raise DomainError(f"need 1 <= k0 <= L, got k0={k0}, L={L}")
    if d < 1:
        raise DomainError(f"need d >= 1, got {d}")
    k = k0 * d
    if M <= k:
        raise DomainError(f"need M > k = k0*d, got M={M}, k={k}")
    if bsnr_min <= 0.0:
        raise DomainError(f"need bsnr_min > 0, got {bsnr_min}")
    ln_terms = [
        _ln_comb(k0, l)
        + _ln_comb(L - k0, l)
        + _ln_pair_term(l, (M - k) * l * bsnr_min, cfg.eta0)
        for l in range(1, k0 + 1)
    ]
    return BoundValue(_exp(_ln_sum(ln_terms)))


def standard_bound_random(
    N: int, k: int, M: int, csnr_min: float, cfg: BoundConfig
) -> BoundValue:
    """Standard-sparsity specialization: the block bound at d = 1, L = N."""
    return block_bound_random(N, k, 1, M, csnr_min, cfg)


def block_complexity(
    L: int, k0: int, d: int, bsnr_min: float, cfg: BoundConfig
) -> ComplexityReport:
    """Samples needed for the block-sparsity bound to vanish.

    Valid for k0 <= L/2, which is what lets the binomial multiplicities be
    absorbed into the log(L - k0) terms.
    """
    L, k0, d = int(L), int(k0), int(d)
    if not 1 <= k0 or 2 * k0 > L:
        raise DomainError(f"need 1 <= k0 <= L/2, got k0={k0}, L={L}")
    if d < 1:
        raise DomainError(f"need d >= 1, got {d}")
    if bsnr_min <= 0.0:
        raise DomainError(f"need bsnr_min > 0, got {bsnr_min}")
    k = k0 * d
    e = cfg.eta0
    ln_lmk = math.log(L - k0)
    m1 = 16.0 / (bsnr_min * (1.0 - 2.0 * e) ** 2) * (ln_lmk + math.log(math.e / math.sqrt(2.0)))
    m2 = (
        4.0
        * (0.5 * k0 + cfg.r0 - 1.0)
        / (e * cfg.r0 * bsnr_min)
        * (ln_lmk + 0.5 * math.log(2.0 * B0 * math.e**2 / math.sqrt(math.pi)))
    )
    m_req = math.ceil(k + max(0.0, m1, m2))
    return ComplexityReport(m1, m2, m_req, None)


def wainwright_bound(N: int, k: int, M: int, csnr_min: float) -> BoundValue:
    """Comparison bound for standard sparsity from the literature.

    Sum over l of C(k, l) C(N - k, l) * 4 exp(-(M - k) l C / (64 (l C + 8)))
    with C the minimum component SNR.  As C grows the exponent saturates at
    (M - k)/64, leaving the bound floored at 4 exp(-(M-k)/64) (C(N, k) - 1).
    """
    N, k, M = int(N), int(k), int(M)
    if M <= k:
        raise DomainError(f"need M > k, got M={M}, k={k}")
    if csnr_min <= 0.0:
        raise DomainError(f"need csnr_min > 0, got {csnr_min}")
    ln_terms = [
        _ln_comb(k, l)
        + _ln_comb(N - k, l)
        + math.log(4.0)
        - (M - k) * l * csnr_min / (64.0 * (l * csnr_min + 8.0))
        for l in range(1, k + 1)
    ]
    return BoundValue(_exp(_ln_sum(ln_terms)))


def wainwright_complexity(
    N: int, k: int, csnr_min: float, eta1: float
) -> WainwrightComplexityReport:
    """Comparison sample requirement M > k + (eta1 + 2048) max(...).

    The constant eta1 is left symbolic in the source result, so the caller
    must supply it.
    """
    N, k = int(N), int(k)
    if csnr_min <= 0.0:
        raise DomainError(f"need csnr_min > 0, got {csnr_min}")
    if math.comb(N - k, k) < 1:
        raise DomainError(f"C(N-k, k) vanishes for N={N}, k={k}")
    t1 = _ln_comb(N - k, k)
    t2 = math.log(N - k) / csnr_min
    value = k + (eta1 + 2048.0) * max(t1, t2)
    return WainwrightComplexityReport(
        math.ceil(value), t1, t2, "combinatorial" if t1 >= t2 else "snr"
    )


def rip_sample_count(T: int, k: int, delta: float, t: float, c: float) -> int:
    """Samples for a Gaussian operator to satisfy the RIP over T subspaces.

    Evaluates M > (2 / (c delta)) (log(2 T) + k log(12 / delta) + t) and
    returns the ceiling.  These counts are used only for comparison against
    the decoding-based requirements.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"need 0 < delta < 1, got {delta}")
    if t <= 0.0 or c <= 0.0:
        raise DomainError(f"need t > 0 and c > 0, got t={t}, c={c}")
    if T < 1 or k < 0:
        raise DomainError(f"need T >= 1 and k >= 0, got T={T}, k={k}")
    value = (2.0 / (c * delta)) * (
        math.log(2.0 * T) + k * math.log(12.0 / delta) + t
    )
    return math.ceil(value)


def rip_block_sample_count(L: int, k0: int, d: int, delta: float, t: float) -> int:
    """Block-RIP sample count: prefactor 36/(7 delta) over the C(L, k0) union."""
    return rip_sample_count(math.comb(L, k0), k0 * d, delta, t, c=7.0 / 18.0)


def chernoff_grouped_bound(
    alpha_min_sq: Mapping[int, float],
    t0: Mapping[int, int],
    M: int,
    k: int,
    cfg: BoundConfig,
) -> ChernoffGroupedBound:
    """Closed-exponential relaxation of the grouped bound.

    Applies the Chernoff bound to the Q term and the large-argument Bessel
    asymptotic to the Psi term:

        sum_l t0(l) [ (1/2) exp(-(1-2 eta0)^2 (M-k) a2_l / 8) + phi_l ],
        phi_l = (b0 / Gamma(l/2)) (eta0 (M-k) a2_l / 4)^(l/2-1)
                * exp(-eta0 (M-k) a2_l / 2).

    The asymptotics need (M - k) a2_l to dominate l/2 - 1/2; the result
    carries ``asymptotics_valid = False`` when any active overlap class
    misses that margin, and the ordering against ``grouped_bound`` is only
    promised when the flag is set.
    """
    if M <= k:
        raise DomainError(f"need M > k, got M={M}, k={k}")
    active = _check_profile(alpha_min_sq, t0)
    e = cfg.eta0
    ln_terms = []
    valid = True
    for l in active:
        lam = (M - k) * alpha_min_sq[l]
        if lam < CHERNOFF_VALIDITY_FACTOR * (0.5 * l - 0.5):
            valid = False
        ln_q = math.log(0.5) - (1.0 - 2.0 * e) ** 2 * lam / 8.0
        ln_phi = (
            math.log(B0)
            - math.lgamma(0.5 * l)
            + (0.5 * l - 1.0) * math.log(0.25 * e * lam)
            - 0.5 * e * lam
        )
        ln_terms.append(math.log(t0[l]) + float(np.logaddexp(ln_q, ln_phi)))
    return ChernoffGroupedBound(_exp(_ln_sum(ln_terms)), valid)
