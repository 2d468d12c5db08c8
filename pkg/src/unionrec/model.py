"""Signal model: unions of subspaces, block-sparse signals, sampling operators.

Two union flavours are supported.  A ``GeneralUnion`` is an explicit list of
T basis matrices, one N x k basis per subspace.  A ``BlockModel`` is the
structured case: an N x N orthonormal basis split into L blocks of d columns,
with each subspace in the union spanned by k0 of the L blocks, so the union
has T = C(L, k0) members and subspace dimension k = k0 * d.  Standard
sparsity is the d = 1 special case.

Alongside the data types live the quantities the analytic bounds consume:
the noise-normalized unexplained energy ``lambda_j_given_i``, the null-space
SNR floor ``alpha_min_sq``, the per-overlap candidate counts, and the
minimum block / component SNR of a signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    DomainError,
    NoCandidateError,
    SizeError,
)
from .linalg import nullspace_basis, residual_project, thin_q
from .seeding import as_rng

# Exhaustive decoding touches every support, so enumeration is capped and the
# caller must raise the cap deliberately for larger-than-desk problems.
DEFAULT_SUPPORT_CAP = 10**6

# How orthonormal an N x N basis must be, max |V^T V - I|.
ORTHONORMAL_TOL = 1e-9

# A sampled basis column counts as lying inside a candidate span when its
# projection residual is below this fraction of its norm.
SPAN_TOL = 1e-8


SupportSet = tuple  # sorted tuple of block indices


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise with variance sigma_w2 per sample."""

    sigma_w2: float

    def __post_init__(self):
        if not self.sigma_w2 > 0.0:
            raise DomainError(f"sigma_w2 must be > 0, got {self.sigma_w2}")

    @property
    def sigma_w(self) -> float:
        return math.sqrt(self.sigma_w2)


@dataclass(frozen=True, eq=False)
class GeneralUnion:
    """Union of T distinct k-dimensional subspaces of R^N, one basis each."""

    bases: tuple

    def __init__(self, bases, check_distinct: bool = False):
        mats = tuple(np.asarray(b, dtype=float) for b in bases)
        if not mats:
            raise DomainError("a union needs at least one subspace")
        n, k = mats[0].shape
        for b in mats:
            if b.shape != (n, k):
                raise DimensionMismatchError(
                    f"all bases must share shape {(n, k)}, got {b.shape}"
                )
            thin_q(b)  # full column rank
        object.__setattr__(self, "bases", mats)
        if check_distinct:
            self._check_distinct()

    def _check_distinct(self):
        # No subspace may contain another: every ordered pair must leave at
        # least one basis direction of the first outside the second's span.
        for i, bi in enumerate(self.bases):
            qi = thin_q(bi)
            for j, bj in enumerate(self.bases):
                if i == j:
                    continue
                resid = bj - qi @ (qi.T @ bj)
                outside = np.linalg.norm(resid, axis=0) > SPAN_TOL * np.linalg.norm(
                    bj, axis=0
                )
                if not outside.any():
                    raise DomainError(
                        f"subspace {j} is contained in subspace {i}; "
                        "union members must be distinct"
                    )

    @property
    def ambient_dim(self) -> int:
        return self.bases[0].shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.bases[0].shape[1]

    @property
    def n_subspaces(self) -> int:
        return len(self.bases)


@dataclass(frozen=True, eq=False)
class BlockModel:
    """Structured union: k0 active blocks out of L, each of d columns of V."""

    L: int
    d: int
    k0: int
    V: np.ndarray

    def __init__(self, L: int, d: int, k0: int, V=None):
        L, d, k0 = int(L), int(d), int(k0)
        if L < 1 or d < 1 or k0 < 1:
            raise DomainError(f"L, d, k0 must be >= 1, got {(L, d, k0)}")
        if 2 * k0 > L:
            raise DomainError(f"need k0 <= L/2, got k0={k0}, L={L}")
        n = L * d
        if V is None:
            V = np.eye(n)
        else:
            V = np.asarray(V, dtype=float)
            if V.shape != (n, n):
                raise DimensionMismatchError(
                    f"V must be {n} x {n} for L={L}, d={d}, got {V.shape}"
                )
            err = np.abs(V.T @ V - np.eye(n)).max()
            if err > ORTHONORMAL_TOL:
                raise DomainError(f"V is not orthonormal (max deviation {err:.3e})")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "k0", k0)
        object.__setattr__(self, "V", V)

    @property
    def ambient_dim(self) -> int:
        return self.L * self.d

    @property
    def subspace_dim(self) -> int:
        return self.k0 * self.d

    @property
    def n_subspaces(self) -> int:
        return math.comb(self.L, self.k0)


@dataclass(frozen=True, eq=False)
class BlockSignal:
    """Block-sparse coefficient vector with its support set."""

    c: np.ndarray
    support: tuple
    d: int

    def __init__(self, c, support, d: int):
        c = np.asarray(c, dtype=float)
        support = tuple(sorted(int(i) for i in support))
        d = int(d)
        if c.ndim != 1 or c.size % d != 0:
            raise DimensionMismatchError(
                f"coefficient vector of length {c.size} not divisible into "
                f"blocks of {d}"
            )
        n_blocks = c.size // d
        if len(set(support)) != len(support):
            raise DomainError("support indices must be unique")
        for i in range(n_blocks):
            blk = c[i * d : (i + 1) * d]
            if i in support:
                if not np.any(blk != 0.0):
                    raise DomainError(f"supported block {i} is identically zero")
            elif np.any(blk != 0.0):
                raise DomainError(f"block {i} outside the support is nonzero")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "d", d)

    def block(self, i: int) -> np.ndarray:
        return self.c[i * self.d : (i + 1) * self.d]


@dataclass(frozen=True, eq=False)
class SamplingOperator:
    """M x N sampling matrix plus a record of where it came from."""

    A: np.ndarray
    provenance: dict

    def __init__(self, A, provenance=None):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] < 1:
            raise DimensionMismatchError(f"operator must be a 2-d matrix, got {A.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "provenance", dict(provenance or {"kind": "explicit"}))

    @property
    def n_samples(self) -> int:
        return self.A.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.A.shape[1]


# ---------------------------------------------------------------------------
# support-set combinatorics
# ---------------------------------------------------------------------------


def enumerate_supports(L: int, k0: int, cap: int = DEFAULT_SUPPORT_CAP) -> list:
    """All C(L, k0) support sets in lexicographic order."""
    if not 1 <= k0 <= L:
        raise DomainError(f"need 1 <= k0 <= L, got k0={k0}, L={L}")
    total = math.comb(L, k0)
    if total > cap:
        raise SizeError(
            f"C({L},{k0}) = {total} supports exceeds the enumeration cap {cap}"
        )
    return [tuple(c) for c in combinations(range(L), k0)]


def overlap_l(uj, ui) -> int:
    """Number of blocks of uj missing from ui, |uj \\ ui|."""
    return len(set(uj) - set(ui))


def count_t_of_l(L: int, k0: int, l: int) -> int:
    """Number of supports ui at overlap l from any fixed uj: C(k0,l) C(L-k0,l)."""
    if not 1 <= l <= k0:
        raise DomainError(f"need 1 <= l <= k0, got l={l}, k0={k0}")
    return math.comb(k0, l) * math.comb(L - k0, l)


def block_columns(support, d: int) -> np.ndarray:
    """Column indices selected by a support set, in block index order."""
    idx = []
    for b in sorted(support):
        idx.extend(range(b * d, (b + 1) * d))
    return np.asarray(idx, dtype=int)


def build_block_basis(model: BlockModel, support) -> np.ndarray:
    """Columns of V belonging to the blocks in ``support``, concatenated."""
    for b in support:
        if not 0 <= b < model.L:
            raise DomainError(f"block index {b} out of range for L={model.L}")
    return model.V[:, block_columns(support, model.d)]


# ---------------------------------------------------------------------------
# operators, signals, observations
# ---------------------------------------------------------------------------


def sample_gaussian_operator(M: int, N: int, seed) -> SamplingOperator:
    """M x N matrix with iid standard normal entries, deterministic in seed."""
    if M < 1 or N < 1:
        raise DomainError(f"need M, N >= 1, got {(M, N)}")
    rng = as_rng(seed)
    A = rng.standard_normal((M, N))
    prov = {"kind": "gaussian", "seed": seed if isinstance(seed, int) else "derived"}
    return SamplingOperator(A, prov)


def random_orthonormal(n: int, seed) -> np.ndarray:
    """Haar-distributed n x n orthonormal matrix."""
    rng = as_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def signal_vector(model_or_union, signal) -> np.ndarray:
    """Ambient-space signal x for a block signal or a (index, coeffs) pair."""
    if isinstance(model_or_union, BlockModel):
        return model_or_union.V @ signal.c
    j, coeffs = signal
    return model_or_union.bases[j] @ np.asarray(coeffs, dtype=float)


def observe(op: SamplingOperator, model_or_union, signal, noise, seed) -> np.ndarray:
    """Noisy samples y = A x + w, with w iid N(0, sigma_w2).

    Pass ``noise=None`` for the noiseless mode; the seed is then unused.
    """
    x = signal_vector(model_or_union, signal)
    if x.shape[0] != op.ambient_dim:
        raise DimensionMismatchError(
            f"signal dimension {x.shape[0]} does not match operator "
            f"ambient dimension {op.ambient_dim}"
        )
    y = op.A @ x
    if noise is not None:
        rng = as_rng(seed)
        y = y + noise.sigma_w * rng.standard_normal(op.n_samples)
    return y


def bsnr_min(signal: BlockSignal, noise: NoiseSpec) -> float:
    """Minimum nonzero block SNR, min over supported blocks of ||c_m||^2 / sigma_w2."""
    if not signal.support:
        raise DomainError("signal has empty support")
    return min(
        float(signal.block(m) @ signal.block(m)) for m in signal.support
    ) / noise.sigma_w2


def csnr_min(signal: BlockSignal, noise: NoiseSpec) -> float:
    """Minimum component SNR over entries of the supported blocks."""
    if not signal.support:
        raise DomainError("signal has empty support")
    comps = np.concatenate([signal.block(m) for m in signal.support])
    return float(np.min(comps**2)) / noise.sigma_w2


def generate_block_signal(
    model: BlockModel,
    support,
    bsnr_min_db: float,
    bsnr_ratio: float,
    noise: NoiseSpec,
    seed,
) -> BlockSignal:
    """Block signal with exact minimum block SNR and min-to-max SNR ratio.

    Squared block norms are equally spaced between sigma_w2 * 10^(db/10) and
    that value times ``bsnr_ratio``, assigned to the supported blocks in
    ascending index order; directions within each block are uniform on the
    sphere.  A single supported block sits exactly at the minimum.
    """
    if bsnr_ratio < 1.0:
        raise DomainError(f"bsnr_ratio must be >= 1, got {bsnr_ratio}")
    support = tuple(sorted(int(i) for i in support))
    if len(support) != model.k0:
        raise DomainError(
            f"support size {len(support)} does not match k0={model.k0}"
        )
    rng = as_rng(seed)
    snr_floor = 10.0 ** (bsnr_min_db / 10.0)
    norms2 = noise.sigma_w2 * np.linspace(snr_floor, snr_floor * bsnr_ratio, model.k0)
    c = np.zeros(model.ambient_dim)
    for m, target in zip(support, norms2):
        g = rng.standard_normal(model.d)
        c[m * model.d : (m + 1) * model.d] = math.sqrt(target) * g / np.linalg.norm(g)
    return BlockSignal(c, support, model.d)


# ---------------------------------------------------------------------------
# sampled candidate bases and the bound inputs
# ---------------------------------------------------------------------------


def candidate_bases(op: SamplingOperator, model_or_union, supports=None) -> list:
    """Sampled basis B_i = A V_i for every candidate subspace, in order.

    For a block model the candidates follow ``enumerate_supports`` order
    unless an explicit support list is given.
    """
    if isinstance(model_or_union, BlockModel):
        if supports is None:
            supports = enumerate_supports(model_or_union.L, model_or_union.k0)
        av = op.A @ model_or_union.V
        return [av[:, block_columns(u, model_or_union.d)] for u in supports]
    return [op.A @ v for v in model_or_union.bases]


def _sampled_basis(op, model_or_union, key) -> np.ndarray:
    if isinstance(model_or_union, BlockModel):
        return op.A @ build_block_basis(model_or_union, key)
    return op.A @ model_or_union.bases[key]


def _unexplained_part(op, model_or_union, true_j, cand_i, signal) -> np.ndarray:
    """Sampled signal component spanned by true basis directions outside
    candidate i's span (the columns B_{j \\ i} times their coefficients)."""
    if isinstance(model_or_union, BlockModel):
        extra = sorted(set(true_j) - set(cand_i))
        cols = block_columns(extra, model_or_union.d)
        return op.A @ (model_or_union.V[:, cols] @ signal.c[cols])
    j, coeffs = true_j, np.asarray(signal[1], dtype=float)
    bj = op.A @ model_or_union.bases[j]
    qi = thin_q(_sampled_basis(op, model_or_union, cand_i))
    mask = _outside_mask(bj, qi)
    return bj[:, mask] @ coeffs[mask]


def _outside_mask(bj: np.ndarray, qi: np.ndarray) -> np.ndarray:
    resid = bj - qi @ (qi.T @ bj)
    return np.linalg.norm(resid, axis=0) > SPAN_TOL * np.linalg.norm(bj, axis=0)


def pair_overlap(op, model_or_union, true_j, cand_i) -> int:
    """Overlap measure l between a true subspace and a candidate.

    Block models count blocks of the true support missing from the
    candidate; general unions count sampled basis columns of the true
    subspace outside the candidate's span.
    """
    if isinstance(model_or_union, BlockModel):
        return overlap_l(true_j, cand_i)
    bj = _sampled_basis(op, model_or_union, true_j)
    qi = thin_q(_sampled_basis(op, model_or_union, cand_i))
    return int(_outside_mask(bj, qi).sum())


def lambda_j_given_i(op, model_or_union, true_j, cand_i, signal, noise) -> float:
    """Noise-normalized energy of the sampled true signal unexplained by
    candidate i: ||P_i_perp A x||^2 / sigma_w2."""
    if true_j == cand_i:
        raise DomainError("lambda is defined for distinct subspaces only")
    ax = op.A @ signal_vector(model_or_union, signal)
    bi = _sampled_basis(op, model_or_union, cand_i)
    r = residual_project(bi, ax)
    return float(r @ r) / noise.sigma_w2


def _iter_candidates(model_or_union):
    if isinstance(model_or_union, BlockModel):
        return enumerate_supports(model_or_union.L, model_or_union.k0)
    return range(model_or_union.n_subspaces)


def alpha_min_sq(op, model_or_union, true_j, l: int, signal, noise) -> float:
    """Minimum squared null-space SNR component at overlap l.

    For every candidate i at overlap l from the true subspace, projects the
    unexplained signal part onto each eigenvector of P_i_perp with unit
    eigenvalue and takes the smallest squared coefficient over both the
    eigenvector index and the candidate; (M - k) times this value lower
    bounds every lambda_j_given_i at that overlap.
    """
    found = False
    best = math.inf
    for cand in _iter_candidates(model_or_union):
        if cand == true_j:
            continue
        if pair_overlap(op, model_or_union, true_j, cand) != l:
            continue
        found = True
        bi = _sampled_basis(op, model_or_union, cand)
        qnull = nullspace_basis(bi)
        t = _unexplained_part(op, model_or_union, true_j, cand, signal)
        alphas = (qnull.T @ t) / noise.sigma_w
        best = min(best, float(np.min(alphas**2)))
    if not found:
        raise NoCandidateError(f"no candidate subspace has overlap l={l}")
    return best


def alpha_profile(op, model_or_union, signals, noise) -> dict:
    """Per-overlap bound inputs aggregated over every ordered pair.

    ``signals`` supplies one signal per candidate (the signal used when that
    candidate is the true subspace), aligned with candidate order.  Returns
    ``{l: (alpha_min_sq_l, t0_l)}`` where the alpha value is minimized over
    all ordered pairs at overlap l and t0_l is the largest per-truth
    candidate count at that overlap.
    """
    cands = list(_iter_candidates(model_or_union))
    alpha2 = {}
    counts = {}
    for j_idx, true_j in enumerate(cands):
        sig = signals[j_idx]
        sig_obj = sig if isinstance(model_or_union, BlockModel) else (true_j, sig)
        per_j = {}
        for cand in cands:
            if cand == true_j:
                continue
            l = pair_overlap(op, model_or_union, true_j, cand)
            bi = _sampled_basis(op, model_or_union, cand)
            qnull = nullspace_basis(bi)
            t = _unexplained_part(op, model_or_union, true_j, cand, sig_obj)
            a2 = float(np.min(((qnull.T @ t) / noise.sigma_w) ** 2))
            alpha2[l] = min(alpha2.get(l, math.inf), a2)
            per_j[l] = per_j.get(l, 0) + 1
        for l, c in per_j.items():
            counts[l] = max(counts.get(l, 0), c)
    return {l: (alpha2[l], counts[l]) for l in sorted(counts)}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def load_matrix_csv(path) -> np.ndarray:
    """Matrix from a CSV file, one matrix row per line."""
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)


def save_matrix_csv(path, a) -> None:
    np.savetxt(path, np.asarray(a, dtype=float), delimiter=",")


def basis_from_spec(spec, n: int) -> np.ndarray:
    """Resolve a basis description to an n x n orthonormal matrix.

    Accepted forms: ``"identity"``, ``{"kind": "haar", "seed": s}``,
    ``{"kind": "csv", "path": p}`` or an explicit nested list / array.
    """
    if spec is None or spec == "identity":
        return np.eye(n)
    if isinstance(spec, Mapping):
        kind = spec.get("kind")
        if kind == "haar":
            return random_orthonormal(n, int(spec["seed"]))
        if kind == "csv":
            return load_matrix_csv(spec["path"])
        raise DomainError(f"unknown basis kind {kind!r}")
    if isinstance(spec, (Sequence, np.ndarray)):
        return np.asarray(spec, dtype=float)
    raise DomainError(f"cannot interpret basis spec {spec!r}")


def block_model_to_dict(model: BlockModel, basis_spec="identity") -> dict:
    doc = {"L": model.L, "d": model.d, "k0": model.k0, "basis": basis_spec}
    if basis_spec == "explicit":
        doc["basis"] = {"kind": "explicit", "entries": model.V.tolist()}
    return doc


def block_model_from_dict(doc: Mapping) -> BlockModel:
    L, d, k0 = int(doc["L"]), int(doc["d"]), int(doc["k0"])
    spec = doc.get("basis", "identity")
    if isinstance(spec, Mapping) and spec.get("kind") == "explicit":
        v = np.asarray(spec["entries"], dtype=float)
    else:
        v = basis_from_spec(spec, L * d)
    return BlockModel(L, d, k0, v)
