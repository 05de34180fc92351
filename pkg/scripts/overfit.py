"""Overfit the 32-sentence toy treebank with the full-size encoder.

    python scripts/overfit.py [--seed 1] [--max-epochs 200]
"""

import argparse
import logging

from jointparse.experiments import overfit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-epochs", type=int, default=200)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    res = overfit(max_epochs=args.max_epochs, seed=args.seed)
    scores = " ".join(f"{k}={v:.2f}" for k, v in res.train_metrics.items())
    print(f"epochs={res.epochs} seconds={res.seconds:.0f} {scores}")


if __name__ == "__main__":
    main()
