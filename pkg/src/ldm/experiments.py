"""Recall grids, hypersphere gamma sweeps and fit-time benchmarks.

These produce plain lists of dict rows; the CLI writes them as CSV.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ldm.ann import exact_knn, recall_at_k
from ldm.datasets import LabeledDataset, gen_hypersphere
from ldm.embed import fit, fit_pca

RECALL_COLUMNS = (
    "dataset", "N", "D", "d", "k", "method", "seed",
    "recall_vs_exact", "recall_pca_vs_ldm", "recall_diff",
    "fit_seconds", "knn_seconds", "gamma",
)
SUMMARY_COLUMNS = (
    "dataset", "N", "D", "d", "k", "method", "n_seeds", "gamma",
    "recall_vs_exact_mean", "recall_vs_exact_std",
    "recall_diff_mean", "recall_diff_std",
    "recall_pca_vs_ldm_mean", "fit_seconds_mean",
)
BENCH_COLUMNS = ("method", "N", "D", "d", "repeat", "seconds")
BENCH_SUMMARY_COLUMNS = ("method", "N", "D", "d", "repeats", "median_seconds", "ratio_to_previous")


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def recall_rows(ds: LabeledDataset, dims, k=10, ldm_method="ldm", seed=0, ldm_kw=None):
    """For each latent dim, recall@k of PCA and LDM against exact kNN.

    Two rows per ``d`` (``method`` = ``pca`` and the LDM method). Both rows
    carry ``recall_diff`` = PCA minus LDM and ``recall_pca_vs_ldm``, the
    overlap between the two approximate lists.
    """
    ldm_kw = dict(ldm_kw or {})
    X = ds.data
    n, D = X.shape
    exact = exact_knn(X, k)
    rows = []
    for d in dims:
        pca_emb, pca_fit = _timed(fit_pca, X, d, seed=seed)
        pca_nl, pca_knn = _timed(exact_knn, pca_emb.coords, k)
        ldm_emb, ldm_fit = _timed(fit, X, ldm_method, d, seed=seed, **ldm_kw)
        ldm_nl, ldm_knn = _timed(exact_knn, ldm_emb.coords, k)
        r_pca = recall_at_k(pca_nl, exact)
        r_ldm = recall_at_k(ldm_nl, exact)
        overlap = recall_at_k(pca_nl, ldm_nl)
        for method, r, fs, ks in (("pca", r_pca, pca_fit, pca_knn), (ldm_method, r_ldm, ldm_fit, ldm_knn)):
            rows.append({
                "dataset": ds.name, "N": n, "D": D, "d": d, "k": k, "method": method,
                "seed": seed, "recall_vs_exact": r, "recall_pca_vs_ldm": overlap,
                "recall_diff": r_pca - r_ldm, "fit_seconds": fs, "knn_seconds": ks,
                "gamma": n / D,
            })
    return rows


def gamma_grid(ambient_dims, gammas=None, sizes=None, min_n=2):
    """(N, D) pairs from either gamma = N / D values or explicit sizes.

    Pairs with ``N < min_n`` are dropped.
    """
    if (gammas is None) == (sizes is None):
        raise ValueError("give exactly one of gammas or sizes")
    pairs = []
    for D in ambient_dims:
        ns = [int(round(g * D)) for g in gammas] if gammas is not None else list(sizes)
        pairs.extend((n, D) for n in ns if n >= min_n)
    return pairs


def sweep_gamma(pairs, n_seeds=5, base_seed=0, d=10, k=10, ldm_method="ldm",
                radial_noise=0.0, workers=1, ldm_kw=None):
    """Hypersphere recall sweep.

    Cells are ``(N, D, replicate)`` in grid order and cell ``c`` uses seed
    ``base_seed + c`` for both data generation and the eigensolver. Returns
    ``(rows, summary)``; rows keep cell order regardless of ``workers``.
    """
    cells = [(n, D, r) for n, D in pairs for r in range(n_seeds)]

    def run(ci):
        n, D, _ = cells[ci]
        seed = base_seed + ci
        ds = gen_hypersphere(n, D, radial_noise, seed)
        return recall_rows(ds, [d], k, ldm_method, seed, ldm_kw)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(cells))))
    else:
        results = [run(ci) for ci in range(len(cells))]
    rows = [row for res in results for row in res]
    return rows, summarize(rows)


def summarize(rows):
    """Mean and standard deviation over seeds for each (N, D, d, k, method)."""
    groups = {}
    for r in rows:
        key = (r["dataset"], r["N"], r["D"], r["d"], r["k"], r["method"])
        groups.setdefault(key, []).append(r)
    out = []
    for (name, n, D, d, k, method), rs in groups.items():
        rec = [r["recall_vs_exact"] for r in rs]
        diff = [r["recall_diff"] for r in rs]
        out.append({
            "dataset": name, "N": n, "D": D, "d": d, "k": k, "method": method,
            "n_seeds": len(rs), "gamma": n / D,
            "recall_vs_exact_mean": float(np.mean(rec)),
            "recall_vs_exact_std": float(np.std(rec)),
            "recall_diff_mean": float(np.mean(diff)),
            "recall_diff_std": float(np.std(diff)),
            "recall_pca_vs_ldm_mean": float(np.mean([r["recall_pca_vs_ldm"] for r in rs])),
            "fit_seconds_mean": float(np.mean([r["fit_seconds"] for r in rs])),
        })
    return out


def bench(sizes, ambient_dim=100, d=10, methods=("pca", "ldm"), repeats=5, seed=0):
    """Wall-clock fit time on hypersphere data; raw samples and medians."""
    raw, summary = [], []
    for method in methods:
        prev = None
        for n in sizes:
            X = gen_hypersphere(n, ambient_dim, seed=seed).data
            times = []
            for rep in range(repeats):
                _, secs = _timed(fit, X, method, d, seed=seed)
                times.append(secs)
                raw.append({"method": method, "N": n, "D": ambient_dim, "d": d,
                            "repeat": rep, "seconds": secs})
            med = statistics.median(times)
            summary.append({"method": method, "N": n, "D": ambient_dim, "d": d,
                            "repeats": repeats, "median_seconds": med,
                            "ratio_to_previous": med / prev if prev else float("nan")})
            prev = med
    return raw, summary
