"""Joint training of J1 + lambda * J2 with Adam, warmup and checkpointing."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import tensor as T
from .config import ModelConfig, TrainConfig
from .metrics import EvalConfig, bracket_prf, uas_las
from .model import Batch, DataError, JointParser, LossBreakdown, make_batch, model_from_arrays, model_metadata, text_array, array_text
from .treebank import Example, Vocabulary, build_vocab, load_pretrained_vectors
from .trees import validate_projective

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


class Adam:
    """Adam with linear warmup followed by inverse-square-root decay."""

    def __init__(self, params: Sequence[tuple[str, T.Tensor]], cfg: TrainConfig):
        self.params = list(params)
        self.cfg = cfg
        self.step_count = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params}

    def learning_rate(self, step: Optional[int] = None) -> float:
        step = max(1, self.step_count if step is None else step)
        warm = max(1, self.cfg.warmup_steps)
        return self.cfg.lr * min(step / warm, math.sqrt(warm / step))

    def clip(self) -> float:
        total = 0.0
        for _, p in self.params:
            if p.grad is not None:
                total += float(np.sum(p.grad.astype(np.float64) ** 2))
        norm = math.sqrt(total)
        if self.cfg.clip_norm and norm > self.cfg.clip_norm:
            scale = self.cfg.clip_norm / (norm + 1e-12)
            for _, p in self.params:
                if p.grad is not None:
                    p.grad = p.grad * scale
        return norm

    def step(self) -> float:
        """One update; parameters without a gradient are left untouched."""
        self.step_count += 1
        lr = self.learning_rate()
        b1, b2 = self.cfg.beta1, self.cfg.beta2
        c1 = 1 - b1 ** self.step_count
        c2 = 1 - b2 ** self.step_count
        for name, p in self.params:
            if p.grad is None:
                continue
            g = p.grad
            m = self.m[name] = b1 * self.m[name] + (1 - b1) * g
            v = self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            p.data = (p.data - lr * (m / c1) / (np.sqrt(v / c2) + 1e-9)).astype(p.dtype)
        return lr

    def state_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for name, _ in self.params:
            out.append((f"optim/m/{name}", self.m[name]))
            out.append((f"optim/v/{name}", self.v[name]))
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, _ in self.params:
            self.m[name] = arrays[f"optim/m/{name}"].copy()
            self.v[name] = arrays[f"optim/v/{name}"].copy()


@dataclass
class TrainState:
    step: int = 0
    epoch: int = 0
    best_metric: float = -1.0
    best_epoch: int = -1
    rng_state: Optional[dict] = None
    mode: str = "joint"


def save_checkpoint(path, model: JointParser, optimizer: Optional[Adam] = None,
                    state: Optional[TrainState] = None) -> None:
    arrays = model_metadata(model) + model.state_arrays()
    if optimizer is not None:
        arrays += optimizer.state_arrays()
    if state is not None:
        payload = dict(vars(state), optimizer_step=optimizer.step_count if optimizer else 0)
        arrays.append(("meta/train_state", text_array(json.dumps(payload, sort_keys=True))))
    T.save_arrays(path, arrays)


def load_checkpoint(path, train_cfg: Optional[TrainConfig] = None):
    """Returns (model, optimizer or None, TrainState or None)."""
    arrays = T.load_arrays(path)
    model = model_from_arrays(arrays)
    optimizer = state = None
    if "meta/train_state" in arrays:
        raw = json.loads(array_text(arrays["meta/train_state"]))
        opt_step = raw.pop("optimizer_step", 0)
        state = TrainState(**raw)
        optimizer = Adam(model.named_parameters(), train_cfg or TrainConfig())
        optimizer.load_state_arrays(arrays)
        optimizer.step_count = opt_step
    return model, optimizer, state


def joint_step(batch: Batch, model: JointParser, optimizer: Adam, cfg: TrainConfig,
               rng: Optional[np.random.Generator] = None) -> LossBreakdown:
    """Forward both decoders, backpropagate J1 + lambda * J2, update once."""
    model.train()
    model.zero_grad()
    result = model.losses(batch, cfg.mode, cfg.lambda_, rng)
    if not np.isfinite(result.total):
        raise TrainingError(f"non-finite loss {result.total} at step {optimizer.step_count + 1} "
                            f"(lr={optimizer.learning_rate(optimizer.step_count + 1):.3g})")
    result.loss.backward()
    optimizer.clip()
    optimizer.step()
    result.loss = None
    return result


def make_batches(examples: Sequence[Example], batch_tokens: int, rng: Optional[np.random.Generator]) -> list[list[Example]]:
    order = np.arange(len(examples))
    if rng is not None:
        rng.shuffle(order)
    batches: list[list[Example]] = []
    current: list[Example] = []
    tokens = 0
    for idx in order:
        ex = examples[int(idx)]
        size = len(ex.sentence) + 2
        if current and tokens + size > batch_tokens:
            batches.append(current)
            current, tokens = [], 0
        current.append(ex)
        tokens += size
    if current:
        batches.append(current)
    return batches


def evaluate(model: JointParser, corpus: Sequence[Example], mode: str = "joint",
             eval_cfg: EvalConfig = EvalConfig()) -> dict:
    parsed = model.parse([ex.sentence for ex in corpus], mode)
    rec: dict = {}
    if mode in ("joint", "const"):
        score = bracket_prf([t for t, _ in parsed], [ex.tree for ex in corpus], eval_cfg)
        rec.update(LR=score.recall, LP=score.precision, F1=score.f1)
    if mode in ("joint", "dep"):
        att = uas_las([d for _, d in parsed], [ex.dep for ex in corpus], [ex.sentence for ex in corpus], eval_cfg)
        rec.update(UAS=att.uas, LAS=att.las)
    return rec


def selection_metric(rec: dict, mode: str) -> float:
    if mode == "joint":
        return 0.5 * (rec["F1"] + rec["LAS"])
    return rec["F1"] if mode == "const" else rec["LAS"]


def filter_training(corpus: Sequence[Example], mode: str) -> list[Example]:
    """Check gold availability and drop non-projective dependency gold."""
    kept = []
    dropped = 0
    for k, ex in enumerate(corpus):
        if mode in ("joint", "const") and ex.tree is None:
            raise DataError(f"training sentence {k + 1} has no constituency tree (mode={mode})")
        if mode in ("joint", "dep"):
            if ex.dep is None:
                raise DataError(f"training sentence {k + 1} has no dependency tree (mode={mode})")
            if not (ex.dep.is_tree() and validate_projective(ex.dep)):
                dropped += 1
                continue
        kept.append(ex)
    if dropped:
        log.warning("dropped %d non-projective or malformed dependency trees from training", dropped)
    return kept


@dataclass
class TrainResult:
    model: JointParser
    history: list[dict] = field(default_factory=list)
    best_metric: float = -1.0
    best_epoch: int = -1
    best_dev: dict = field(default_factory=dict)
    vocab: Optional[Vocabulary] = None


def train(corpus: Sequence[Example], dev: Sequence[Example], model_cfg: ModelConfig, cfg: TrainConfig,
          vocab: Optional[Vocabulary] = None, eval_cfg: EvalConfig = EvalConfig()) -> TrainResult:
    """Run epochs, evaluating on ``dev`` after each; keep the best parameters."""
    cfg.validate()
    model_cfg.validate()
    if not corpus or not dev:
        raise DataError("training and dev corpora must be nonempty")
    corpus = filter_training(corpus, cfg.mode)
    vocab = vocab or build_vocab(corpus, cfg.min_word_freq)
    pretrained = (load_pretrained_vectors(model_cfg.pretrained_vectors, vocab, model_cfg.np_dtype)
                  if model_cfg.pretrained_vectors else None)
    model = JointParser(model_cfg, vocab, seed=cfg.seed, pretrained=pretrained)
    optimizer = Adam(model.named_parameters(), cfg)
    rng = np.random.default_rng(cfg.seed)
    state = TrainState(mode=cfg.mode)
    history: list[dict] = []
    best_arrays = None
    best_dev: dict = {}
    stale = 0
    log_fh = open(cfg.log_path, "w", encoding="utf-8") if cfg.log_path else None
    need_const = cfg.mode in ("joint", "const")
    need_dep = cfg.mode in ("joint", "dep")
    try:
        for epoch in range(1, cfg.max_epochs + 1):
            state.epoch = epoch
            for chunk in make_batches(corpus, cfg.batch_tokens, rng):
                batch = make_batch(chunk, vocab, rng, cfg.unk_replace_prob, need_const, need_dep)
                res = joint_step(batch, model, optimizer, cfg, rng)
                state.step += 1
                rec = {"step": state.step, "epoch": epoch, "J1": res.j1, "J2": res.j2,
                       "total": res.total, "lr": optimizer.learning_rate()}
                history.append(rec)
                if log_fh:
                    log_fh.write(json.dumps(rec) + "\n")
            if epoch % cfg.eval_every and epoch != cfg.max_epochs:
                continue
            dev_rec = evaluate(model, dev, cfg.mode, eval_cfg)
            metric = selection_metric(dev_rec, cfg.mode)
            rec = {"epoch": epoch, "step": state.step, "dev": dev_rec, "dev_metric": metric}
            history.append(rec)
            if log_fh:
                log_fh.write(json.dumps(rec) + "\n")
                log_fh.flush()
            log.info("epoch %d step %d dev %s", epoch, state.step, dev_rec)
            if metric > state.best_metric:
                state.best_metric, state.best_epoch = metric, epoch
                best_dev = dev_rec
                stale = 0
                best_arrays = [(n, a.copy()) for n, a in model.state_arrays()]
                if cfg.checkpoint:
                    state.rng_state = rng.bit_generator.state
                    save_checkpoint(cfg.checkpoint, model, optimizer, state)
            else:
                stale += 1
            if cfg.target_metric is not None and metric >= cfg.target_metric:
                break
            if cfg.patience and stale >= cfg.patience:
                log.info("early stop after %d epochs without improvement", stale)
                break
    finally:
        if log_fh:
            log_fh.close()
    if best_arrays is not None:
        model.load_state_arrays(dict(best_arrays))
    return TrainResult(model, history, state.best_metric, state.best_epoch, best_dev, vocab)


def checkpoint_path(directory, name: str = "model.ckpt") -> Path:
    return Path(directory) / name
