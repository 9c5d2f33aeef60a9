"""Recall@k against latent dimension on an IDX image file (e.g. MNIST).

    python3 scripts/idx_recall.py /data/train-images-idx3-ubyte --limit 5000 --out runs/mnist
"""

import argparse
import csv
from pathlib import Path

from ldm.cli import main


def run(images: Path, out: Path, limit: int, dims: str, k: int):
    out.mkdir(parents=True, exist_ok=True)
    path = out / "recall.csv"
    main(["recall", "--data", str(images), "--limit", str(limit), "--dim", dims, "--k", str(k),
          "--out", str(path)])
    with open(path, newline="") as f:
        for r in csv.DictReader(f):
            print(f"d={r['d']:>3} {r['method']:>5} recall@{k}={float(r['recall_vs_exact']):.4f}"
                  f" overlap={float(r['recall_pca_vs_ldm']):.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("images", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs/idx"))
    ap.add_argument("--limit", type=int, default=5000)
    ap.add_argument("--dim", default="2,5,10,20,50")
    ap.add_argument("--k", type=int, default=10)
    a = ap.parse_args()
    run(a.images, a.out, a.limit, a.dim, a.k)
