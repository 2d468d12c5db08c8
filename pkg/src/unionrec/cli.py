"""Command-line interface.

Subcommands: ``bound`` and ``complexity`` expose the analytic calculators,
``simulate`` runs a single Monte Carlo point, ``sweep`` runs a full
experiment from a JSON configuration or a named preset, ``validate-pairwise``
checks the pairwise bound on a constructed instance, and ``selftest`` runs
the reduced invariant suite.

Exit status: 0 on success, 1 on configuration errors (with the offending
field named), 2 on runtime numerical errors.  The environment variables
UNIONREC_SEED and UNIONREC_ETA0 override the master seed and the eta0
constant supplied by flags or configs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, bounds, montecarlo, selftest
from .exceptions import ConfigError, UnionRecError

BOUND_CSV_SCHEMA = "unionrec.bound.v1"

# Named experiment presets at full scale; --desk shrinks them to sizes that
# run in seconds for the acceptance-style checks.
PRESETS = {
    "fig1a": {
        "full": dict(
            L=25, d=2, k0=5, sweep_axis="m",
            sweep_values=[15, 20, 25, 30, 35, 40, 45], bsnr_min_db=13.0,
            trials=100_000, matrix_redraws=100, decoders=["ml"], master_seed=17,
        ),
        "desk": dict(
            L=10, d=2, k0=3, sweep_axis="m", sweep_values=[8, 10, 12, 16, 20],
            bsnr_min_db=13.0, trials=2000, matrix_redraws=20, decoders=["ml"],
            master_seed=17,
        ),
    },
    "fig1b": {
        "full": dict(
            L=50, d=1, k0=5, sweep_axis="m",
            sweep_values=[10, 15, 20, 25, 30, 35, 40, 45], bsnr_min_db=10.0,
            trials=100_000, matrix_redraws=100, decoders=["ml"], master_seed=17,
        ),
        "desk": dict(
            L=20, d=1, k0=3, sweep_axis="m", sweep_values=[4, 6, 8, 10, 12],
            bsnr_min_db=10.0, trials=2000, matrix_redraws=20, decoders=["ml"],
            master_seed=17,
        ),
    },
    "fig2": {
        "full": dict(
            L=25, d=2, k0=5, sweep_axis="bsnr_db", m=20,
            sweep_values=[7.0, 9.0, 11.0, 13.0, 15.0, 17.0, 19.0],
            bsnr_ratio=1.825, trials=10_000, matrix_redraws=100,
            decoders=["ml", "bomp"], master_seed=17,
        ),
        "desk": dict(
            L=10, d=2, k0=3, sweep_axis="bsnr_db", m=14,
            sweep_values=[7.0, 10.0, 13.0, 16.0, 19.0], bsnr_ratio=1.825,
            trials=2000, matrix_redraws=20, decoders=["ml", "bomp"],
            master_seed=17,
        ),
    },
}


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors use the config exit status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(name, f"environment override must be an integer, got {raw!r}")


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(name, f"environment override must be a number, got {raw!r}")


def _resolve_seed(seed):
    return _env_int("UNIONREC_SEED", seed)


def _resolve_eta0(eta0):
    return _env_float("UNIONREC_ETA0", eta0)


def _emit(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_grid(spec):
    """Comma list ('8,10,12') or range ('8:40:4') of integers."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) == 2:
            parts.append(1)
        start, stop, step = parts
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",")]


def _model_args(p, require_snr=True):
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    p.add_argument("--desk", action="store_true", help="desk-scale variant of the preset")
    p.add_argument("--L", type=int, help="number of blocks")
    p.add_argument("--d", type=int, help="block size")
    p.add_argument("--k0", type=int, help="number of active blocks")
    if require_snr:
        p.add_argument("--bsnr-db", type=float, help="minimum block SNR in dB")
        p.add_argument("--csnr-db", type=float, help="minimum component SNR in dB (d=1 view)")
    p.add_argument("--eta0", type=float, default=0.25)
    p.add_argument("--r0", type=float, default=1.0)


def _resolve_model(args, require_snr=True):
    params = {}
    if args.preset:
        params.update(PRESETS[args.preset]["desk" if args.desk else "full"])
    for name in ("L", "d", "k0"):
        if getattr(args, name) is not None:
            params[name] = getattr(args, name)
    for name in ("L", "d", "k0"):
        if params.get(name) is None:
            raise ConfigError(name, "missing (give --preset or the flag)")
    snr_db = None
    if require_snr:
        if getattr(args, "csnr_db", None) is not None:
            snr_db = args.csnr_db + 10.0 * math.log10(params["d"])
        if getattr(args, "bsnr_db", None) is not None:
            snr_db = args.bsnr_db
        if snr_db is None:
            snr_db = params.get("bsnr_min_db")
        if snr_db is None:
            raise ConfigError("bsnr_db", "missing (give --bsnr-db, --csnr-db or a preset)")
    return params["L"], params["d"], params["k0"], snr_db


def _load_profile(path):
    """Per-overlap bound inputs from JSON: {"l": [alpha_min_sq, t0], ...}."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("profile", f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("profile", f"invalid JSON: {exc}")
    a2, t0 = {}, {}
    for key, pair in doc.items():
        try:
            l = int(key)
            a2[l] = float(pair[0])
            t0[l] = int(pair[1])
        except (TypeError, ValueError, IndexError):
            raise ConfigError("profile", f"entry {key!r} must map an overlap to [alpha_min_sq, t0]")
    return a2, t0


def _load_block_instance(path):
    """Concrete block instance: model, operator and one signal per support."""
    from . import model as mdl
    from .seeding import derive_rng

    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("instance", f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("instance", f"invalid JSON: {exc}")
    for name in ("L", "d", "k0", "M"):
        if name not in doc:
            raise ConfigError(name, "missing required field")
    bm = mdl.BlockModel(
        int(doc["L"]), int(doc["d"]), int(doc["k0"]),
        mdl.basis_from_spec(doc.get("basis", "identity"), int(doc["L"]) * int(doc["d"])),
    )
    op_spec = doc.get("operator", {"kind": "gaussian", "seed": 0})
    if op_spec.get("kind") == "csv":
        op = mdl.SamplingOperator(mdl.load_matrix_csv(op_spec["path"]))
    else:
        op = mdl.sample_gaussian_operator(
            int(doc["M"]), bm.ambient_dim, int(op_spec.get("seed", 0))
        )
    noise = mdl.NoiseSpec(float(doc.get("sigma_w2", 1.0)))
    sig_spec = doc.get("signal", {})
    db = float(sig_spec.get("bsnr_min_db", 10.0))
    ratio = float(sig_spec.get("bsnr_ratio", 1.0))
    seed = int(sig_spec.get("seed", 0))
    supports = mdl.enumerate_supports(bm.L, bm.k0)
    signals = [
        mdl.generate_block_signal(bm, u, db, ratio, noise, derive_rng(seed, j))
        for j, u in enumerate(supports)
    ]
    return bm, op, signals, noise


def _cmd_bound(args):
    cfg = bounds.BoundConfig(_resolve_eta0(args.eta0), args.r0)
    if args.kind == "pairwise":
        for name in ("l", "lam"):
            if getattr(args, name) is None:
                raise ConfigError(name, "required for --kind pairwise")
        bv = bounds.pairwise_error_bound(args.l, args.lam, cfg)
        _emit(
            {"kind": "pairwise_error_bound", "l": args.l, "lam": args.lam,
             "eta0": cfg.eta0, "raw": bv.raw, "clamped": bv.clamped},
            args.out,
        )
        return 0
    if args.kind in ("grouped", "chernoff"):
        if args.profile is None:
            raise ConfigError("profile", f"required for --kind {args.kind}")
        for name in ("M", "k"):
            if getattr(args, name) is None:
                raise ConfigError(name, f"required for --kind {args.kind}")
        a2, t0 = _load_profile(args.profile)
        doc = {"kind": f"{args.kind}_bound", "M": args.M, "k": args.k,
               "eta0": cfg.eta0, "r0": cfg.r0,
               "profile": {str(l): [a2[l], t0[l]] for l in sorted(t0)}}
        if args.kind == "grouped":
            bv = bounds.grouped_bound(a2, t0, args.M, args.k, cfg)
        else:
            bv = bounds.chernoff_grouped_bound(a2, t0, args.M, args.k, cfg)
            doc["asymptotics_valid"] = bv.asymptotics_valid
        doc["raw"], doc["clamped"] = bv.raw, bv.clamped
        _emit(doc, args.out)
        return 0
    if args.kind == "union-avg":
        if args.instance is None:
            raise ConfigError("instance", "required for --kind union-avg")
        from .model import alpha_profile

        bm, op, signals, noise = _load_block_instance(args.instance)
        bv = bounds.union_avg_bound(op, bm, signals, noise, cfg)
        prof = alpha_profile(op, bm, signals, noise)
        a2 = {l: v[0] for l, v in prof.items()}
        t0 = {l: v[1] for l, v in prof.items()}
        grp = bounds.grouped_bound(a2, t0, op.n_samples, bm.subspace_dim, cfg)
        _emit(
            {"kind": "union_avg_bound",
             "L": bm.L, "d": bm.d, "k0": bm.k0, "M": op.n_samples,
             "eta0": cfg.eta0, "r0": cfg.r0,
             "raw": bv.raw, "clamped": bv.clamped,
             "grouped_raw": grp.raw, "grouped_clamped": grp.clamped,
             "profile": {str(l): [a2[l], t0[l]] for l in sorted(t0)}},
            args.out,
        )
        return 0
    L, d, k0, snr_db = _resolve_model(args)
    snr = 10.0 ** (snr_db / 10.0)
    base = {
        "kind": "block_error_bound",
        "L": L, "d": d, "k0": k0, "k": k0 * d,
        "bsnr_min_db": snr_db, "eta0": cfg.eta0, "r0": cfg.r0,
    }
    if args.M_grid:
        ms = _parse_grid(args.M_grid)
        lines = [
            f"# schema={BOUND_CSV_SCHEMA}",
            f"# config={json.dumps(base, sort_keys=True, separators=(',', ':'))}",
            "m,bound_raw,bound_clamped"
            + (",wainwright_raw,wainwright_clamped" if args.wainwright else ""),
        ]
        for m in ms:
            bv = bounds.block_bound_random(L, k0, d, m, snr, cfg)
            row = f"{m},{bv.raw!r},{bv.clamped!r}"
            if args.wainwright:
                wv = bounds.wainwright_bound(L * d, k0 * d, m, snr / d)
                row += f",{wv.raw!r},{wv.clamped!r}"
            lines.append(row)
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    if args.M is None:
        raise ConfigError("M", "missing (give --M or --M-grid)")
    bv = bounds.block_bound_random(L, k0, d, args.M, snr, cfg)
    doc = dict(base, M=args.M, raw=bv.raw, clamped=bv.clamped)
    if args.wainwright:
        wv = bounds.wainwright_bound(L * d, k0 * d, args.M, snr / d)
        doc["wainwright_raw"] = wv.raw
        doc["wainwright_clamped"] = wv.clamped
    _emit(doc, args.out)
    return 0


def _cmd_complexity(args):
    if args.kind == "general":
        if args.profile is None:
            raise ConfigError("profile", "required for --kind general")
        if args.k is None:
            raise ConfigError("k", "required for --kind general")
        cfg = bounds.BoundConfig(_resolve_eta0(args.eta0), args.r0)
        a2, t0 = _load_profile(args.profile)
        rep = bounds.general_complexity(a2, t0, args.k, cfg)
        _emit(
            {"kind": "general_complexity", "k": args.k, "eta0": cfg.eta0, "r0": cfg.r0,
             "m1": rep.m1, "m2": rep.m2, "m_required": rep.m_required,
             "dominating_l": rep.dominating_l},
            args.out,
        )
        return 0
    if args.kind == "block":
        L, d, k0, snr_db = _resolve_model(args)
        cfg = bounds.BoundConfig(_resolve_eta0(args.eta0), args.r0)
        rep = bounds.block_complexity(L, k0, d, 10.0 ** (snr_db / 10.0), cfg)
        _emit(
            {
                "kind": "block_complexity",
                "L": L, "d": d, "k0": k0, "k": k0 * d,
                "bsnr_min_db": snr_db, "eta0": cfg.eta0, "r0": cfg.r0,
                "m1": rep.m1, "m2": rep.m2, "m_required": rep.m_required,
            },
            args.out,
        )
        return 0
    if args.kind == "wainwright":
        for name in ("N", "k"):
            if getattr(args, name) is None:
                raise ConfigError(name, "required for --kind wainwright")
        if args.csnr_db is None:
            raise ConfigError("csnr_db", "required for --kind wainwright")
        rep = bounds.wainwright_complexity(
            args.N, args.k, 10.0 ** (args.csnr_db / 10.0), args.eta1
        )
        _emit(
            {
                "kind": "wainwright_complexity",
                "N": args.N, "k": args.k, "csnr_min_db": args.csnr_db, "eta1": args.eta1,
                "m_required": rep.m_required, "m_tilde1": rep.m_tilde1,
                "m_tilde2": rep.m_tilde2, "dominating": rep.dominating,
            },
            args.out,
        )
        return 0
    # RIP comparison count over the block union
    L, d, k0, _ = _resolve_model(args, require_snr=False)
    m_req = bounds.rip_block_sample_count(L, k0, d, args.delta, args.t)
    _emit(
        {
            "kind": "rip_sample_count",
            "L": L, "d": d, "k0": k0, "k": k0 * d,
            "delta": args.delta, "t": args.t,
            "m_required": m_req,
        },
        args.out,
    )
    return 0


def _sweep_config_from_args(args):
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ConfigError("config", f"no such file: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}")
    elif args.preset:
        doc = dict(PRESETS[args.preset]["desk" if args.desk else "full"])
    else:
        raise ConfigError("config", "give --config FILE or --preset NAME")
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.seed is not None:
        doc["master_seed"] = args.seed
    doc["master_seed"] = _resolve_seed(doc.get("master_seed"))
    if doc.get("master_seed") is None:
        raise ConfigError("master_seed", "missing required field")
    doc["eta0"] = _resolve_eta0(doc.get("eta0", 0.25))
    return montecarlo.ExperimentConfig.from_dict(doc)


def _cmd_sweep(args):
    cfg = _sweep_config_from_args(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.name or (args.preset if args.preset else Path(args.config).stem)
    checkpoint = out_dir / f"{stem}.checkpoint.json" if args.checkpoint else None
    n_threads = args.threads if args.threads else (os.cpu_count() or 1)
    result = montecarlo.run_sweep(cfg, checkpoint_path=checkpoint, n_threads=n_threads)
    csv_path = out_dir / f"{stem}.csv"
    sidecar_path = out_dir / f"{stem}.sidecar.json"
    result.write_csv(csv_path)
    result.write_sidecar(sidecar_path)
    for r in result.sorted_points():
        axis = f"M={r.m}" if cfg.sweep_axis == "m" else f"BSNR={r.bsnr_min_db} dB"
        rates = ", ".join(f"{d}={r.error_rate[d]:.4g}" for d in cfg.decoders)
        bound_txt = f", bound={r.bound_clamped:.4g}" if r.bound_clamped is not None else ""
        sys.stdout.write(f"{axis}: {rates}{bound_txt} ({r.trials} trials)\n")
    sys.stdout.write(f"wrote {csv_path} and {sidecar_path}\n")
    return 0


def _cmd_simulate(args):
    doc = dict(
        L=args.L, d=args.d, k0=args.k0, sweep_axis="m", sweep_values=[args.M],
        trials=args.trials, master_seed=_resolve_seed(args.seed),
        bsnr_min_db=args.bsnr_db, bsnr_ratio=args.bsnr_ratio,
        noiseless=args.noiseless, matrix_redraws=args.matrix_redraws,
        decoders=args.decoders.split(","), eta0=_resolve_eta0(args.eta0), r0=args.r0,
    )
    if args.noiseless:
        doc.pop("bsnr_min_db")
    for name in ("L", "d", "k0", "M"):
        if doc.get(name) is None and name != "M":
            raise ConfigError(name, "missing required flag")
    if args.M is None:
        raise ConfigError("M", "missing required flag")
    cfg = montecarlo.ExperimentConfig.from_dict(doc)
    record = montecarlo.run_point(cfg, 0)
    _emit(
        {"config": cfg.to_dict(), "master_seed": cfg.master_seed, "point": record.to_dict()},
        args.out,
    )
    return 0


def _cmd_validate_pairwise(args):
    seed = _resolve_seed(args.seed)
    cfg = bounds.BoundConfig(_resolve_eta0(args.eta0), args.r0)
    op, mdl, true_j, cand_i, sig, noise = montecarlo.pairwise_instance(
        args.L, args.d, args.k0, args.M, args.lam, seed
    )
    record = montecarlo.pairwise_validation(
        op, mdl, true_j, cand_i, sig, noise, cfg, args.draws, seed + 1
    )
    doc = record.to_dict()
    doc.update(
        {
            "L": args.L, "d": args.d, "k0": args.k0, "M": args.M,
            "eta0": cfg.eta0, "master_seed": seed,
            "true_support": list(true_j), "candidate_support": list(cand_i),
        }
    )
    _emit(doc, args.out)
    return 0


def _cmd_selftest(args):
    results = selftest.run_selftest(eta0=_resolve_eta0(0.25), seed=_resolve_seed(0))
    sys.stdout.write(selftest.format_report(results) + "\n")
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unionrec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"unionrec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[], help="evaluate the error-probability bounds")
    _model_args(p)
    p.add_argument(
        "--kind",
        choices=["block", "pairwise", "grouped", "chernoff", "union-avg"],
        default="block",
    )
    p.add_argument("--M", type=int, help="number of samples")
    p.add_argument("--M-grid", help="grid of M values, '8,10,12' or '8:40:4' (emits CSV)")
    p.add_argument("--wainwright", action="store_true", help="include the comparison bound")
    p.add_argument("--l", type=int, help="overlap count (pairwise)")
    p.add_argument("--lam", type=float, help="unexplained energy (pairwise)")
    p.add_argument("--k", type=int, help="subspace dimension (grouped/chernoff)")
    p.add_argument("--profile", help='JSON {"l": [alpha_min_sq, t0], ...} (grouped/chernoff)')
    p.add_argument("--instance", help="JSON block-model instance (union-avg)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("complexity", help="sample-complexity calculators")
    _model_args(p)
    p.add_argument("--kind", choices=["block", "general", "wainwright", "rip"], default="block")
    p.add_argument("--N", type=int, help="ambient dimension (wainwright)")
    p.add_argument("--k", type=int, help="sparsity (wainwright/general)")
    p.add_argument("--profile", help='JSON {"l": [alpha_min_sq, t0], ...} (general)')
    p.add_argument("--eta1", type=float, default=0.0, help="symbolic constant (wainwright)")
    p.add_argument("--delta", type=float, default=0.5, help="isometry constant (rip)")
    p.add_argument("--t", type=float, default=1.0, help="tail parameter (rip)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("simulate", help="Monte Carlo at a single point")
    p.add_argument("--L", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k0", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--bsnr-db", type=float, dest="bsnr_db")
    p.add_argument("--bsnr-ratio", type=float, default=1.0, dest="bsnr_ratio")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--matrix-redraws", type=int, default=10, dest="matrix_redraws")
    p.add_argument("--decoders", default="ml")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta0", type=float, default=0.25)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="full experiment sweep from config or preset")
    p.add_argument("--config", help="JSON experiment configuration")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--desk", action="store_true")
    p.add_argument("--trials", type=int, help="override trial count")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.add_argument("--name", help="output file stem")
    p.add_argument("--checkpoint", action="store_true", help="persist a resumption token")
    p.add_argument(
        "--threads", type=int, help="parallel sweep points (default: all cores); "
        "output is identical for any value",
    )
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate-pairwise", help="Monte Carlo check of the pairwise bound")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--k0", type=int, default=3)
    p.add_argument("--M", type=int, default=12)
    p.add_argument("--lam", type=float, default=40.0, help="target unexplained energy")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta0", type=float, default=0.25)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate_pairwise)

    p = sub.add_parser("selftest", help="run the reduced invariant suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"error": "config", "field": exc.field, "message": str(exc)}) + "\n")
        return 1
    except UnionRecError as exc:
        sys.stderr.write(
            json.dumps({"error": "runtime", "type": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
