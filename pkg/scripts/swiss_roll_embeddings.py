"""Swiss roll: 2-D PCA and LDM embeddings side by side, as CSV for plotting.

    python3 scripts/swiss_roll_embeddings.py --out runs/swiss
"""

import argparse
from pathlib import Path

from ldm.cli import main


def run(out: Path, n: int, noise: float, seed: int):
    out.mkdir(parents=True, exist_ok=True)
    data = out / "roll.bin"
    main(["generate", "swiss-roll", "--n", str(n), "--noise", str(noise), "--seed", str(seed),
          "--out", str(data)])
    for method in ("pca", "ldm"):
        main(["embed", "--data", str(data), "--method", method, "--dim", "2", "--seed", str(seed),
              "--out", str(out / f"{method}.csv")])
    print(f"wrote {out}/pca.csv and {out}/ldm.csv (columns x0,x1,label)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs/swiss"))
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args()
    run(a.out, a.n, a.noise, a.seed)
