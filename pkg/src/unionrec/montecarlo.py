"""Seeded Monte Carlo harness for empirical error rates vs analytic bounds.

At each sweep point (a number of samples M, or a minimum block SNR)
the harness draws a true support uniformly at random per trial, draws a
block signal with controlled minimum block SNR, observes it through a
Gaussian sampling matrix that is redrawn every fixed block of trials, adds
white noise, runs the configured decoders, and tallies exact-support
errors.  The matching analytic bound is evaluated alongside each point.

Reproducibility contract: every random draw comes from a stream derived
from (master seed, point index, trial or matrix-block index, purpose tag),
so a sweep is a pure function of its configuration.  Splitting the trials
of a point into shards and merging the tallies is exactly equivalent to one
run, and identical configurations produce byte-identical CSV output.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict
from typing import Mapping, Optional, Sequence

import numpy as np

from . import decode
from .bounds import BoundConfig, block_bound_random
from .exceptions import ConfigError, RankDeficientError
from .linalg import residual_project, thin_q
from .model import (
    BlockModel,
    NoiseSpec,
    _sampled_basis,
    basis_from_spec,
    block_columns,
    build_block_basis,
    enumerate_supports,
    generate_block_signal,
    overlap_l,
    pair_overlap,
    sample_gaussian_operator,
    signal_vector,
    DEFAULT_SUPPORT_CAP,
)
from .seeding import MATRIX, NOISE, SIGNAL, SUPPORT, derive_rng, as_rng
from .specfun import chi2_diff_tail_bound, gaussian_q, psi_term

CSV_SCHEMA = "unionrec.sweep.v1"
SIDECAR_SCHEMA = "unionrec.sidecar.v1"

# 95% normal quantile used by the Wilson intervals.
Z95 = 1.959963984540054

# A decoding failure under a pathological matrix draw is retried with the
# next matrix stream values this many times before counting as an error.
MAX_MATRIX_RETRIES = 3

KNOWN_DECODERS = ("ml", "bomp")

CSV_COLUMNS = [
    "point_index",
    "m",
    "bsnr_min_db",
    "trials",
    "decode_failures",
    "ml_errors",
    "ml_error_rate",
    "ml_wilson_lo",
    "ml_wilson_hi",
    "bomp_errors",
    "bomp_error_rate",
    "bomp_wilson_lo",
    "bomp_wilson_hi",
    "bound_raw",
    "bound_clamped",
]


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple:
    """Wilson score interval for a binomial proportion.

    Stays informative at zero observed errors, which is where the
    acceptance checks operate.
    """
    if trials < 1:
        raise ConfigError("trials", "need at least one trial")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    # the score interval touches the boundary exactly at 0 or n errors;
    # keep that exact instead of leaving roundoff dust
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return (lo, hi)


def wilson_se(errors: int, trials: int, z: float = Z95) -> float:
    """Half-width of the Wilson interval expressed per unit z."""
    lo, hi = wilson_interval(errors, trials, z)
    return (hi - lo) / (2.0 * z)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_REQUIRED_FIELDS = ("L", "d", "k0", "sweep_axis", "sweep_values", "trials", "master_seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one sweep; hashable into a provenance fingerprint."""

    L: int
    d: int
    k0: int
    sweep_axis: str  # "m" or "bsnr_db"
    sweep_values: tuple
    trials: int
    master_seed: int
    m: Optional[int] = None
    bsnr_min_db: Optional[float] = None
    bsnr_ratio: float = 1.0
    sigma_w2: float = 1.0
    noiseless: bool = False
    matrix_redraws: int = 1
    decoders: tuple = ("ml",)
    eta0: float = 0.25
    r0: float = 1.0
    basis: object = "identity"
    support_cap: int = DEFAULT_SUPPORT_CAP

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "decoders", tuple(self.decoders))
        k = self.k0 * self.d
        if self.sweep_axis not in ("m", "bsnr_db"):
            raise ConfigError("sweep_axis", f"must be 'm' or 'bsnr_db', got {self.sweep_axis!r}")
        if not self.sweep_values:
            raise ConfigError("sweep_values", "sweep must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials", "need at least one trial per point")
        if not 1 <= self.matrix_redraws <= self.trials:
            raise ConfigError("matrix_redraws", "need 1 <= matrix_redraws <= trials")
        for dec in self.decoders:
            if dec not in KNOWN_DECODERS:
                raise ConfigError("decoders", f"unknown decoder {dec!r}")
        if not self.decoders:
            raise ConfigError("decoders", "need at least one decoder")
        if self.sweep_axis == "m":
            for v in self.sweep_values:
                if int(v) <= k:
                    raise ConfigError("sweep_values", f"every swept M must exceed k = k0*d = {k}, got {v}")
            if not self.noiseless and self.bsnr_min_db is None:
                raise ConfigError("bsnr_min_db", "required for an M sweep with noise")
        else:
            if self.noiseless:
                raise ConfigError("sweep_axis", "a BSNR sweep is meaningless in noiseless mode")
            if self.m is None:
                raise ConfigError("m", "required for a BSNR sweep")
            if int(self.m) <= k:
                raise ConfigError("m", f"fixed M must exceed k = k0*d = {k}")
        if not self.noiseless and self.sigma_w2 <= 0.0:
            raise ConfigError("sigma_w2", "noise variance must be > 0")
        if self.bsnr_ratio < 1.0:
            raise ConfigError("bsnr_ratio", "must be >= 1")
        try:
            BoundConfig(self.eta0, self.r0)
        except Exception as exc:
            raise ConfigError("eta0", str(exc)) from exc

    @property
    def k(self) -> int:
        return self.k0 * self.d

    @property
    def ambient_dim(self) -> int:
        return self.L * self.d

    @property
    def trials_per_matrix(self) -> int:
        return math.ceil(self.trials / self.matrix_redraws)

    def point_params(self, point_index: int) -> tuple:
        """(M, bsnr_min_db) in effect at a sweep point."""
        value = self.sweep_values[point_index]
        if self.sweep_axis == "m":
            return int(value), self.bsnr_min_db
        return int(self.m), float(value)

    def bound_config(self) -> BoundConfig:
        return BoundConfig(self.eta0, self.r0)

    def build_model(self) -> BlockModel:
        return BlockModel(self.L, self.d, self.k0, basis_from_spec(self.basis, self.ambient_dim))

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["sweep_values"] = list(self.sweep_values)
        doc["decoders"] = list(self.decoders)
        return doc

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("<root>", "config must be a JSON object")
        unknown = set(doc) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        for name in _REQUIRED_FIELDS:
            if name not in doc:
                raise ConfigError(name, "missing required field")
        kwargs = dict(doc)
        for name in ("L", "d", "k0", "trials", "master_seed", "matrix_redraws", "support_cap"):
            if name in kwargs and kwargs[name] is not None:
                try:
                    kwargs[name] = int(kwargs[name])
                except (TypeError, ValueError):
                    raise ConfigError(name, f"expected integer, got {kwargs[name]!r}")
        return cls(**kwargs)


@dataclass(frozen=True)
class PointTally:
    """Raw per-point counts; the mergeable unit for sharded runs."""

    trials: int
    errors: dict
    decode_failures: int


def merge_tallies(tallies: Sequence[PointTally]) -> PointTally:
    """Combine tallies from disjoint trial ranges of the same point."""
    if not tallies:
        raise ConfigError("tallies", "nothing to merge")
    decs = list(tallies[0].errors)
    return PointTally(
        trials=sum(t.trials for t in tallies),
        errors={d: sum(t.errors[d] for t in tallies) for d in decs},
        decode_failures=sum(t.decode_failures for t in tallies),
    )


@dataclass(frozen=True)
class PointRecord:
    """One sweep point: empirical rates with intervals plus the bound."""

    point_index: int
    m: int
    bsnr_min_db: Optional[float]
    trials: int
    decode_failures: int
    errors: dict
    error_rate: dict
    wilson_lo: dict
    wilson_hi: dict
    bound_raw: Optional[float]
    bound_clamped: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# trial execution
# ---------------------------------------------------------------------------


class _PointContext:
    """Immutable per-point precomputation shared by all trial blocks."""

    def __init__(self, cfg: ExperimentConfig, point_index: int):
        self.cfg = cfg
        self.point_index = point_index
        self.m, self.bsnr_min_db = cfg.point_params(point_index)
        self.model = cfg.build_model()
        self.supports = enumerate_supports(cfg.L, cfg.k0, cfg.support_cap)
        self.noise = None if cfg.noiseless else NoiseSpec(cfg.sigma_w2)
        # Reference noise level for signal scaling; in noiseless mode the
        # scale is arbitrary so a unit reference is used.
        self.signal_noise = self.noise if self.noise is not None else NoiseSpec(1.0)
        self.signal_db = self.bsnr_min_db if self.bsnr_min_db is not None else 0.0
        self.col_index = [block_columns(u, cfg.d) for u in self.supports]


def _draw_operator(cfg, ctx, block_index, attempt):
    rng = derive_rng(cfg.master_seed, ctx.point_index, block_index, MATRIX, attempt)
    return sample_gaussian_operator(ctx.m, cfg.ambient_dim, rng)


def _prepare_decoders(cfg, ctx, op):
    av = op.A @ ctx.model.V
    prep = {}
    if "ml" in cfg.decoders:
        prep["q_stack"] = decode.precompute_q([av[:, ci] for ci in ctx.col_index])
    if "bomp" in cfg.decoders:
        prep["blocks"] = [av[:, i * cfg.d : (i + 1) * cfg.d] for i in range(cfg.L)]
    prep["av"] = av
    return prep


def _trial_signal(cfg, ctx, trial_index):
    rng_s = derive_rng(cfg.master_seed, ctx.point_index, trial_index, SUPPORT)
    s_idx = int(rng_s.integers(len(ctx.supports)))
    sig = generate_block_signal(
        ctx.model,
        ctx.supports[s_idx],
        ctx.signal_db,
        cfg.bsnr_ratio,
        ctx.signal_noise,
        derive_rng(cfg.master_seed, ctx.point_index, trial_index, SIGNAL),
    )
    return s_idx, sig


def _trial_measurement(cfg, ctx, op, trial_index, sig):
    y = op.A @ (ctx.model.V @ sig.c)
    if ctx.noise is not None:
        rng_n = derive_rng(cfg.master_seed, ctx.point_index, trial_index, NOISE)
        y = y + ctx.noise.sigma_w * rng_n.standard_normal(ctx.m)
    return y


def _bomp_with_retries(cfg, ctx, block_index, base_attempt, trial_index, sig, prep, y):
    """B-OMP for one trial; a rank-deficient selection redraws the matrix."""
    try:
        return decode.bomp(y, prep["blocks"], cfg.k0), 0
    except RankDeficientError:
        pass
    for extra in range(1, MAX_MATRIX_RETRIES + 1):
        op_retry = _draw_operator(cfg, ctx, block_index, base_attempt + extra)
        try:
            prep_retry = _prepare_decoders(cfg, ctx, op_retry)
            y_retry = _trial_measurement(cfg, ctx, op_retry, trial_index, sig)
            return decode.bomp(y_retry, prep_retry["blocks"], cfg.k0), extra
        except RankDeficientError:
            continue
    return None, MAX_MATRIX_RETRIES


def run_point_tally(
    cfg: ExperimentConfig,
    point_index: int,
    trial_start: int = 0,
    trial_stop: Optional[int] = None,
) -> PointTally:
    """Error tallies for a contiguous trial range of one sweep point.

    The range defaults to all trials.  Tallies over disjoint ranges merge to
    exactly the full-range result because every draw is keyed by absolute
    trial (or matrix-block) index.
    """
    ctx = _PointContext(cfg, point_index)
    stop = cfg.trials if trial_stop is None else min(trial_stop, cfg.trials)
    errors = {d: 0 for d in cfg.decoders}
    failures = 0
    per_block = cfg.trials_per_matrix
    t = trial_start
    while t < stop:
        block_index = t // per_block
        block_end = min((block_index + 1) * per_block, stop)
        trial_range = range(t, block_end)
        t = block_end

        op = None
        prep = None
        attempt = 0
        while attempt <= MAX_MATRIX_RETRIES:
            op = _draw_operator(cfg, ctx, block_index, attempt)
            try:
                prep = _prepare_decoders(cfg, ctx, op)
                break
            except RankDeficientError:
                attempt += 1
        if prep is None:
            # Pathological matrices three times in a row: count the block as
            # failed rather than aborting the sweep.
            n = len(trial_range)
            failures += n
            for d in cfg.decoders:
                errors[d] += n
            continue
        if attempt > 0:
            failures += len(trial_range)

        truth = np.empty(len(trial_range), dtype=int)
        Y = np.empty((ctx.m, len(trial_range)))
        sigs = []
        for col, trial_index in enumerate(trial_range):
            s_idx, sig = _trial_signal(cfg, ctx, trial_index)
            truth[col] = s_idx
            sigs.append(sig)
            Y[:, col] = _trial_measurement(cfg, ctx, op, trial_index, sig)

        if "ml" in cfg.decoders:
            est = decode.ml_decode_batch(Y, prep["q_stack"])
            errors["ml"] += int(np.sum(est != truth))
        if "bomp" in cfg.decoders:
            for col, trial_index in enumerate(trial_range):
                s_hat, retries = _bomp_with_retries(
                    cfg, ctx, block_index, attempt, trial_index, sigs[col], prep, Y[:, col]
                )
                if retries:
                    failures += 1
                if s_hat != ctx.supports[truth[col]]:
                    errors["bomp"] += 1
    return PointTally(stop - trial_start, errors, failures)


def tally_to_record(cfg: ExperimentConfig, point_index: int, tally: PointTally) -> PointRecord:
    m, bsnr_db = cfg.point_params(point_index)
    rate, lo, hi = {}, {}, {}
    for d, e in tally.errors.items():
        rate[d] = e / tally.trials
        lo[d], hi[d] = wilson_interval(e, tally.trials)
    bound_raw = bound_clamped = None
    if bsnr_db is not None and not cfg.noiseless:
        bv = block_bound_random(
            cfg.L, cfg.k0, cfg.d, m, 10.0 ** (bsnr_db / 10.0), cfg.bound_config()
        )
        bound_raw, bound_clamped = bv.raw, bv.clamped
    return PointRecord(
        point_index=point_index,
        m=m,
        bsnr_min_db=bsnr_db,
        trials=tally.trials,
        decode_failures=tally.decode_failures,
        errors=dict(tally.errors),
        error_rate=rate,
        wilson_lo=lo,
        wilson_hi=hi,
        bound_raw=bound_raw,
        bound_clamped=bound_clamped,
    )


def run_point(cfg: ExperimentConfig, point_index: int) -> PointRecord:
    """All trials of one sweep point."""
    return tally_to_record(cfg, point_index, run_point_tally(cfg, point_index))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list
    elapsed: dict = field(default_factory=dict)

    def sorted_points(self) -> list:
        axis = self.config.sweep_axis
        key = (lambda r: (r.m, r.point_index)) if axis == "m" else (
            lambda r: (r.bsnr_min_db, r.point_index)
        )
        return sorted(self.points, key=key)

    def to_csv(self) -> str:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return repr(x)
            return str(x)

        lines = [
            f"# schema={CSV_SCHEMA}",
            f"# master_seed={self.config.master_seed}",
            f"# config={self.config.canonical_json()}",
            ",".join(CSV_COLUMNS),
        ]
        for r in self.sorted_points():
            row = [
                fmt(r.point_index),
                fmt(r.m),
                fmt(r.bsnr_min_db),
                fmt(r.trials),
                fmt(r.decode_failures),
            ]
            for dec in ("ml", "bomp"):
                if dec in r.errors:
                    row += [
                        fmt(r.errors[dec]),
                        fmt(r.error_rate[dec]),
                        fmt(r.wilson_lo[dec]),
                        fmt(r.wilson_hi[dec]),
                    ]
                else:
                    row += ["", "", "", ""]
            row += [fmt(r.bound_raw), fmt(r.bound_clamped)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())

    def sidecar(self) -> dict:
        """Provenance document: full config, seed lineage, timings."""
        return {
            "schema": SIDECAR_SCHEMA,
            "config": self.config.to_dict(),
            "config_fingerprint": self.config.fingerprint(),
            "master_seed": self.config.master_seed,
            "seed_lineage": {
                "per_trial_streams": "(master_seed; point_index, trial_index, purpose)",
                "matrix_stream": "(master_seed; point_index, block_index, purpose, attempt)",
                "purpose_tags": {"support": SUPPORT, "signal": SIGNAL, "matrix": MATRIX, "noise": NOISE},
                "trials_per_matrix": self.config.trials_per_matrix,
            },
            "elapsed_seconds": {str(k): v for k, v in sorted(self.elapsed.items())},
            "points": [r.to_dict() for r in self.sorted_points()],
        }

    def write_sidecar(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_checkpoint(cfg: ExperimentConfig, path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        return {}
    if doc.get("config_fingerprint") != cfg.fingerprint():
        raise ConfigError(
            "checkpoint", f"resumption token at {path} belongs to a different configuration"
        )
    records = {}
    for item in doc.get("points", []):
        rec = PointRecord(**item)
        records[rec.point_index] = rec
    return records


def _write_checkpoint(cfg: ExperimentConfig, path, records: dict, elapsed: dict) -> None:
    doc = {
        "schema": SIDECAR_SCHEMA + ".checkpoint",
        "config_fingerprint": cfg.fingerprint(),
        "config": cfg.to_dict(),
        "points": [records[i].to_dict() for i in sorted(records)],
        "elapsed_seconds": {str(k): v for k, v in sorted(elapsed.items())},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_sweep(cfg: ExperimentConfig, checkpoint_path=None, n_threads: int = 1) -> SweepResult:
    """Evaluate every sweep point; points are independent and resumable.

    When ``checkpoint_path`` is given, completed points are persisted there
    after each point together with a fingerprint of the configuration; a
    rerun with the same path and configuration skips them, so an interrupted
    sweep resumes instead of restarting.

    Points are independent units, so ``n_threads > 1`` evaluates them
    concurrently; every draw is keyed by point and trial index, and results
    are reduced by point index, so the output is identical for any degree
    of parallelism.
    """
    records = dict(_load_checkpoint(cfg, checkpoint_path)) if checkpoint_path else {}
    elapsed = {}
    pending = [i for i in range(len(cfg.sweep_values)) if i not in records]
    if n_threads > 1 and len(pending) > 1:
        from concurrent.futures import ThreadPoolExecutor, as_completed

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            t0 = time.perf_counter()
            futures = {pool.submit(run_point, cfg, i): i for i in pending}
            for fut in as_completed(futures):
                i = futures[fut]
                records[i] = fut.result()
                elapsed[i] = time.perf_counter() - t0
                if checkpoint_path:
                    _write_checkpoint(cfg, checkpoint_path, records, elapsed)
    else:
        for point_index in pending:
            t0 = time.perf_counter()
            records[point_index] = run_point(cfg, point_index)
            elapsed[point_index] = time.perf_counter() - t0
            if checkpoint_path:
                _write_checkpoint(cfg, checkpoint_path, records, elapsed)
    return SweepResult(cfg, [records[i] for i in sorted(records)], elapsed)


# ---------------------------------------------------------------------------
# pairwise validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairwiseValidationRecord:
    """Empirical pairwise event rates against their analytic counterparts.

    ``h1`` is the two-sided chi-square-difference event, ``h2`` the Gaussian
    cross-term event at the threshold delta_star = eta0 * lambda; their union
    covers the pairwise error event (decision statistic below zero).
    """

    lam: float
    l_dof: int
    delta_star: float
    n_draws: int
    p_delta: float
    p_delta_interval: tuple
    p_h1: float
    p_h1_interval: tuple
    p_h2: float
    p_h2_interval: tuple
    q_term: float
    psi: float
    h1_bound: float
    pair_bound_raw: float
    pair_bound_clamped: float

    def to_dict(self) -> dict:
        return asdict(self)


def pairwise_validation(
    op,
    model_or_union,
    true_j,
    cand_i,
    signal,
    noise: NoiseSpec,
    cfg: BoundConfig,
    n_draws: int,
    seed,
) -> PairwiseValidationRecord:
    """Monte Carlo check of the pairwise error bound on a fixed instance.

    Holds the operator and the signal fixed, redraws only the noise, and
    tallies the pairwise error event and the two events whose union bounds
    it.  The chi-square degrees of freedom count sampled basis columns of
    the true subspace outside the candidate span (blocks times block size
    for a block model).
    """
    if isinstance(model_or_union, BlockModel):
        l_dof = model_or_union.d * overlap_l(true_j, cand_i)
        sig_obj = signal
    else:
        l_dof = pair_overlap(op, model_or_union, true_j, cand_i)
        sig_obj = (true_j, signal)

    ax = op.A @ signal_vector(model_or_union, sig_obj)
    qi = thin_q(_sampled_basis(op, model_or_union, cand_i))
    qj = thin_q(_sampled_basis(op, model_or_union, true_j))
    ri = ax - qi @ (qi.T @ ax)
    lam = float(ri @ ri) / noise.sigma_w2
    delta_star = cfg.eta0 * lam

    rng = as_rng(seed)
    m = op.n_samples
    w = noise.sigma_w * rng.standard_normal((m, n_draws))
    y = ax[:, None] + w

    def perp_energy(q, z):
        return np.sum(z * z, axis=0) - np.sum((q.T @ z) ** 2, axis=0)

    ei_y = perp_energy(qi, y)
    ej_y = perp_energy(qj, y)
    ei_w = perp_energy(qi, w)

    n_delta = int(np.sum(ei_y - ej_y < 0.0))
    n_h1 = int(np.sum(np.abs(ej_y - ei_w) / noise.sigma_w2 >= delta_star))
    n_h2 = int(np.sum((ei_y - ei_w) / noise.sigma_w2 <= 2.0 * delta_star))

    q_term = gaussian_q(0.5 * math.sqrt(lam) * (1.0 - 2.0 * cfg.eta0))
    psi = psi_term(l_dof, lam, cfg.eta0)
    h1_bound = 2.0 * chi2_diff_tail_bound(l_dof, delta_star)
    raw = q_term + psi
    return PairwiseValidationRecord(
        lam=lam,
        l_dof=l_dof,
        delta_star=delta_star,
        n_draws=n_draws,
        p_delta=n_delta / n_draws,
        p_delta_interval=wilson_interval(n_delta, n_draws),
        p_h1=n_h1 / n_draws,
        p_h1_interval=wilson_interval(n_h1, n_draws),
        p_h2=n_h2 / n_draws,
        p_h2_interval=wilson_interval(n_h2, n_draws),
        q_term=q_term,
        psi=psi,
        h1_bound=h1_bound,
        pair_bound_raw=raw,
        pair_bound_clamped=min(raw, 1.0),
    )


def pairwise_instance(
    L: int,
    d: int,
    k0: int,
    M: int,
    lam_target: float,
    seed: int,
    basis="identity",
):
    """Construct a fixed pairwise instance with an exact energy target.

    Builds a block model, a Gaussian operator and a signal on the first
    support, picks the candidate support shifted by one block, then sets the
    noise variance so the unexplained-energy parameter lambda equals
    ``lam_target``.  Returns (op, model, true_support, candidate_support,
    signal, noise).
    """
    model = BlockModel(L, d, k0, basis_from_spec(basis, L * d))
    op = sample_gaussian_operator(M, L * d, derive_rng(seed, 0, MATRIX))
    true_j = tuple(range(k0))
    cand_i = tuple(range(1, k0 + 1))
    ref = NoiseSpec(1.0)
    sig = generate_block_signal(model, true_j, 0.0, 1.0, ref, derive_rng(seed, 0, SIGNAL))
    ax = op.A @ (model.V @ sig.c)
    r = residual_project(op.A @ build_block_basis(model, cand_i), ax)
    noise = NoiseSpec(float(r @ r) / lam_target)
    return op, model, true_j, cand_i, sig, noise
