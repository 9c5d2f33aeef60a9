"""Command-line harness: ``ldm <subcommand> ...``.

Every command writes its primary output to ``--out`` and a JSON metadata
record to ``<out>.meta.json`` holding the full configuration, the argv that
reproduces the run, library versions and dataset preprocessing.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ldm import __version__
from ldm.ann import exact_knn
from ldm.datasets import gen_hypersphere, gen_swiss_roll, load_any, save_csv, save_dense
from ldm.embed import fit
from ldm.experiments import (
    BENCH_COLUMNS,
    BENCH_SUMMARY_COLUMNS,
    RECALL_COLUMNS,
    SUMMARY_COLUMNS,
    bench,
    gamma_grid,
    recall_rows,
    sweep_gamma,
)


@dataclass
class RunConfig:
    command: str
    params: dict
    argv: list = field(default_factory=list)


def _int_list(s):
    return [int(x) for x in s.split(",") if x.strip()]


def _float_list(s):
    return [float(x) for x in s.split(",") if x.strip()]


def _epsilon(s):
    if s == "auto":
        return None
    v = float(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive or 'auto'")
    return v


def meta_path(out) -> Path:
    return Path(str(out) + ".meta.json")


def write_meta(out, config: RunConfig, extra=None):
    record = {
        "command": config.command,
        "config": config.params,
        "argv": config.argv,
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    record.update(extra or {})
    with open(meta_path(out), "w", encoding="utf-8", newline="\n") as f:
        json.dump(record, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_rows(path, rows, columns, append=False):
    path = Path(path)
    new = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        if new:
            w.writeheader()
        w.writerows(rows)


def _load(args):
    return load_any(args.data, limit=args.limit, has_labels=args.has_labels)


def _machine():
    return {
        "platform": platform.platform(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
    }


def _ldm_kw(args):
    kw = {"t": args.time, "eps": args.epsilon, "drop_trivial": args.drop_trivial}
    if getattr(args, "raw_eigvecs", False):
        kw["raw_eigvecs"] = True
    return kw


# Commands ------------------------------------------------------------------


def cmd_generate(args, config):
    if args.dataset == "swiss-roll":
        ds = gen_swiss_roll(args.n, args.noise, args.seed)
    else:
        ds = gen_hypersphere(args.n, args.ambient_dim, args.radial_noise, args.seed)
    if args.format == "csv":
        save_csv(args.out, ds.data, ds.labels)
    else:
        save_dense(args.out, ds.data, ds.labels)
    write_meta(args.out, config, {"dataset": ds.meta, "shape": list(ds.data.shape)})
    return ds


def cmd_embed(args, config):
    ds = _load(args)
    method = args.method
    if method == "ldm" and args.variant == "asymmetric":
        method = "ldm-a"
    kw = {"seed": args.seed}
    if method != "pca":
        kw.update(_ldm_kw(args))
    emb = fit(ds.data, method, args.dim, **kw)
    cols = [f"x{i}" for i in range(emb.dim)]
    data = emb.coords
    if ds.labels is not None:
        cols.append("label")
        data = np.column_stack([data, ds.labels])
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        w.writerows([repr(float(v)) for v in row] for row in data)
    eig_path = Path(str(args.out) + ".eigenvalues.csv")
    with open(eig_path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        w.writerows([i, repr(float(v))] for i, v in enumerate(emb.eigenvalues))
    write_meta(args.out, config, {
        "dataset": ds.meta,
        "shape": list(ds.data.shape),
        "method": emb.method,
        "epsilon": emb.epsilon,
        "diffusion_time": emb.diffusion_time,
        "dropped_trivial": emb.dropped_trivial,
        "eigenvalues": [float(v) for v in emb.eigenvalues],
        "lanczos_iterations": emb.iterations,
    })
    return emb


def cmd_knn(args, config):
    ds = _load(args)
    if args.method == "exact":
        nl = exact_knn(ds.data, args.k)
    else:
        kw = {"seed": args.seed}
        if args.method != "pca":
            kw.update(_ldm_kw(args))
        nl = exact_knn(fit(ds.data, args.method, args.dim, **kw).coords, args.k)
    nl.to_csv(args.out)
    write_meta(args.out, config, {"dataset": ds.meta, "shape": list(ds.data.shape)})
    return nl


def cmd_recall(args, config):
    ds = _load(args)
    method = "ldm-a" if args.method == "ldm-a" or args.variant == "asymmetric" else "ldm"
    rows = recall_rows(ds, _int_list(args.dim), args.k, method, args.seed, _ldm_kw(args))
    write_rows(args.out, rows, RECALL_COLUMNS, append=args.append)
    write_meta(args.out, config, {"dataset": ds.meta, "shape": list(ds.data.shape)})
    return rows


def cmd_sweep_gamma(args, config):
    dims = _int_list(args.ambient_dims)
    if args.sizes:
        pairs = gamma_grid(dims, sizes=_int_list(args.sizes))
    else:
        pairs = gamma_grid(dims, gammas=_float_list(args.gammas))
    d, k = int(args.dim), args.k
    min_n = max(k + 1, d + 2)
    skipped = [p for p in pairs if p[0] < min_n]
    pairs = [p for p in pairs if p[0] >= min_n]
    method = "ldm-a" if args.variant == "asymmetric" else "ldm"
    rows, summary = sweep_gamma(
        pairs, args.seeds, args.seed, d, k, method, args.radial_noise, args.workers, _ldm_kw(args)
    )
    write_rows(args.out, rows, RECALL_COLUMNS)
    summary_path = Path(str(args.out) + ".summary.csv")
    write_rows(summary_path, summary, SUMMARY_COLUMNS)
    write_meta(args.out, config, {
        "pairs": pairs,
        "skipped_pairs": skipped,
        "summary": str(summary_path),
        "dataset": {"name": "hypersphere", "radial_noise": args.radial_noise},
    })
    return rows, summary


def cmd_bench(args, config):
    methods = [m for m in args.method.split(",") if m]
    raw, summary = bench(_int_list(args.sizes), args.ambient_dim, int(args.dim), methods,
                         args.repeats, args.seed)
    write_rows(args.out, raw, BENCH_COLUMNS)
    summary_path = Path(str(args.out) + ".summary.csv")
    write_rows(summary_path, summary, BENCH_SUMMARY_COLUMNS)
    write_meta(args.out, config, {"machine": _machine(), "summary": str(summary_path)})
    return raw, summary


# Parser --------------------------------------------------------------------


def _add_data(p):
    p.add_argument("--data", required=True, help="IDX, dense binary (LDMDNSE1) or CSV file")
    p.add_argument("--limit", type=int, default=None, help="use only the first LIMIT rows")
    p.add_argument("--has-labels", action="store_true", help="CSV: last column is a label")


def _add_ldm(p):
    p.add_argument("--epsilon", type=_epsilon, default=None, metavar="{auto|FLOAT}",
                   help="kernel scale; auto = 4 * max squared row norm (default)")
    p.add_argument("--time", type=float, default=1.0, help="diffusion time t (default 1)")
    p.add_argument("--variant", choices=("symmetric", "asymmetric"), default="symmetric")
    p.add_argument("--drop-trivial", action=argparse.BooleanOptionalAction, default=True,
                   help="discard the eigenvalue-1 pair")


def build_parser():
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="ldm", description=__doc__, formatter_class=fmt)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset", formatter_class=fmt,
                       description="Output: dense binary (default) or CSV with labels as the "
                                   "last column (swiss-roll labels are the roll parameter t).")
    p.add_argument("dataset", choices=("swiss-roll", "hypersphere"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ambient-dim", type=int, default=3, help="hypersphere ambient dimension D")
    p.add_argument("--noise", type=float, default=0.0, help="swiss-roll Gaussian noise")
    p.add_argument("--radial-noise", type=float, default=0.0)
    p.add_argument("--format", choices=("dense", "csv"), default="dense")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="fit an embedding", formatter_class=fmt,
                       description="CSV columns: x0..x{d-1}[,label]. Eigenvalues go to "
                                   "<out>.eigenvalues.csv (index,eigenvalue).")
    _add_data(p)
    p.add_argument("--method", choices=("pca", "ldm", "ldm-a"), default="ldm")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--raw-eigvecs", action="store_true",
                   help="LDM: output symmetric-operator eigenvectors without conversion or scaling")
    _add_ldm(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("knn", help="write a neighbor list", formatter_class=fmt,
                       description="CSV: one row per point, k neighbor indices, no header.")
    _add_data(p)
    p.add_argument("--method", choices=("exact", "pca", "ldm", "ldm-a"), default="exact")
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--k", type=int, default=10)
    _add_ldm(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("recall", help="recall@k of PCA and LDM over latent dims",
                       formatter_class=fmt,
                       description="CSV columns: " + ",".join(RECALL_COLUMNS) +
                                   "\nrecall_diff is PCA minus LDM.")
    _add_data(p)
    p.add_argument("--dim", default="2,5,10,20,50", help="comma-separated latent dims")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--method", choices=("ldm", "ldm-a"), default="ldm",
                   help="LDM variant compared against PCA")
    _add_ldm(p)
    p.add_argument("--append", action="store_true", help="append to an existing CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recall)

    p = sub.add_parser("sweep-gamma", help="hypersphere recall difference vs gamma = N/D",
                       formatter_class=fmt,
                       description="CSV columns: " + ",".join(RECALL_COLUMNS) +
                                   "\nSummary (<out>.summary.csv): " + ",".join(SUMMARY_COLUMNS) +
                                   "\nCell c uses seed = --seed + c.")
    p.add_argument("--ambient-dims", default="20,100,400")
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--gammas", default="0.5,2,10,50")
    grid.add_argument("--sizes", default=None, help="explicit N values instead of gammas")
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seeds", type=int, default=5, help="replicates per (N, D)")
    p.add_argument("--radial-noise", type=float, default=0.0)
    _add_ldm(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_gamma)

    p = sub.add_parser("bench", help="fit time versus N on hypersphere data",
                       formatter_class=fmt,
                       description="CSV columns: " + ",".join(BENCH_COLUMNS) +
                                   "\nSummary (<out>.summary.csv): " + ",".join(BENCH_SUMMARY_COLUMNS))
    p.add_argument("--sizes", default="1000,2000,4000,8000")
    p.add_argument("--ambient-dim", type=int, default=100)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--method", default="pca,ldm", help="comma-separated subset of pca,ldm,ldm-a")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k != "func"}
    config = RunConfig(args.command, params, argv)
    args.func(args, config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
