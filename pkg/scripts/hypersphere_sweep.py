"""Hypersphere recall difference (PCA minus LDM) over gamma = N/D.

    python3 scripts/hypersphere_sweep.py --out runs/sphere
"""

import argparse
import csv
from pathlib import Path

from ldm.cli import main


def run(out: Path, dims: str, gammas: str, seeds: int, d: int, k: int, workers: int):
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    main(["sweep-gamma", "--ambient-dims", dims, "--gammas", gammas, "--dim", str(d),
          "--k", str(k), "--seeds", str(seeds), "--workers", str(workers), "--out", str(path)])
    with open(str(path) + ".summary.csv", newline="") as f:
        rows = [r for r in csv.DictReader(f) if r["method"] == "pca"]
    print(f"{'D':>5} {'N':>6} {'gamma':>6}  diff mean   diff std")
    for r in rows:
        print(f"{r['D']:>5} {r['N']:>6} {float(r['gamma']):6.1f}  {float(r['recall_diff_mean']):+.4f}"
              f"    {float(r['recall_diff_std']):.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs/sphere"))
    ap.add_argument("--ambient-dims", default="20,100,400")
    ap.add_argument("--gammas", default="0.5,2,10,50")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    run(a.out, a.ambient_dims, a.gammas, a.seeds, a.dim, a.k, a.workers)
