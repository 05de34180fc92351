"""Shared (joint) versus separate (dependency-only) training on the mini treebank.

    python scripts/ablation.py [--seeds 1 2 3] [--epochs 15] [--shared-layers 8] [--out ablation.json]

Prints per-seed best-epoch dev scores and the medians per mode.
"""

import argparse
import json
import logging

from jointparse.config import ModelConfig
from jointparse.experiments import ablation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--epochs", type=int, default=15)
    ap.add_argument("--modes", nargs="+", default=["joint", "dep"], choices=["joint", "dep", "const"])
    ap.add_argument("--shared-layers", type=int, default=8)
    ap.add_argument("--out")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    result = ablation(args.seeds, args.modes, args.epochs, ModelConfig(shared_layers=args.shared_layers))
    for mode, runs in result.runs.items():
        for rec in runs:
            print(mode, json.dumps(rec, sort_keys=True))
        metrics = [m for m in ("F1", "UAS", "LAS") if m in runs[0]]
        print(mode, "median", " ".join(f"{m}={result.median(mode, m):.2f}" for m in metrics))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result.runs, fh, indent=2)


if __name__ == "__main__":
    main()
