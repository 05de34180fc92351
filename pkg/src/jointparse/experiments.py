"""Reusable experiment drivers: the toy overfit run and the shared-vs-separate ablation."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import load_bundled
from .config import ModelConfig, TrainConfig
from .train import evaluate, train


@dataclass
class OverfitResult:
    train_metrics: dict
    epochs: int
    seconds: float


def overfit(model_cfg: ModelConfig = ModelConfig(), max_epochs: int = 200, seed: int = 1,
            target: float = 99.5) -> OverfitResult:
    """Train and evaluate on toy32 itself until 0.5 * (F1 + LAS) reaches ``target``."""
    corpus = load_bundled("toy32")
    cfg = TrainConfig(max_epochs=max_epochs, batch_tokens=100, eval_every=5, target_metric=target, seed=seed)
    t0 = time.perf_counter()
    res = train(corpus, corpus, model_cfg, cfg)
    metrics = evaluate(res.model, corpus, "joint")
    return OverfitResult(metrics, res.history[-1]["epoch"], time.perf_counter() - t0)


@dataclass
class AblationResult:
    runs: dict = field(default_factory=dict)  # mode -> list of best dev records, one per seed

    def median(self, mode: str, metric: str) -> float:
        return statistics.median(r[metric] for r in self.runs[mode])


def ablation(seeds: Sequence[int] = (1, 2, 3), modes: Sequence[str] = ("joint", "dep"), epochs: int = 15,
             model_cfg: ModelConfig = ModelConfig(), batch_tokens: int = 250) -> AblationResult:
    """Best-epoch dev scores on the mini treebank for each mode and seed."""
    train_set, dev = load_bundled("mini_train"), load_bundled("mini_dev")
    out = AblationResult()
    for mode in modes:
        for seed in seeds:
            cfg = TrainConfig(mode=mode, seed=seed, max_epochs=epochs, batch_tokens=batch_tokens)
            res = train(train_set, dev, replace(model_cfg), cfg)
            out.runs.setdefault(mode, []).append(dict(res.best_dev, seed=seed, best_epoch=res.best_epoch))
    return out
