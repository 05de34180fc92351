"""Model and training configuration plus the flat ``key = value`` config file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from typing import Any, Optional

import numpy as np


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    # token representation
    use_word: bool = True
    use_pos: bool = False
    use_char: bool = True
    char_encoder: str = "lstm"  # lstm | cnn
    composition: str = "sum"  # sum | concat
    d_word: int = 64
    d_pos: int = 64
    d_char_out: int = 64
    d_char_emb: int = 32
    char_cnn_widths: tuple = (2, 3)
    pretrained_vectors: Optional[str] = None
    # encoder
    d_model: int = 128
    total_layers: int = 8
    shared_layers: int = 8
    heads: int = 4
    d_ff: int = 256
    max_len: int = 512
    embedding_dropout: float = 0.1
    attention_dropout: float = 0.1
    residual_dropout: float = 0.1
    relu_dropout: float = 0.1
    # decoders
    d_span_hidden: int = 128
    d_arc: int = 128
    d_rel: int = 64
    mean_dep_loss: bool = False
    dtype: str = "float32"

    @property
    def d_content(self) -> int:
        return self.d_model // 2

    @property
    def np_dtype(self):
        return np.dtype(self.dtype)

    def validate(self) -> "ModelConfig":
        if not (self.use_word or self.use_pos or self.use_char):
            raise ConfigError("at least one of use_word, use_pos, use_char must be enabled")
        if self.char_encoder not in ("lstm", "cnn"):
            raise ConfigError(f"char_encoder must be lstm or cnn, got {self.char_encoder!r}")
        if self.composition not in ("sum", "concat"):
            raise ConfigError(f"composition must be sum or concat, got {self.composition!r}")
        if self.d_model % 2:
            raise ConfigError(f"d_model must be even to split content/position halves, got {self.d_model}")
        if self.d_model % 4:
            raise ConfigError(f"d_model must be divisible by 4, got {self.d_model}")
        if self.d_content % self.heads:
            raise ConfigError(f"d_model/2 = {self.d_content} is not divisible by heads = {self.heads}")
        if not 0 <= self.shared_layers <= self.total_layers:
            raise ConfigError(
                f"shared_layers must be in [0, {self.total_layers}], got {self.shared_layers}")
        if self.composition == "sum":
            dims = {"d_word": self.d_word, "d_pos": self.d_pos, "d_char_out": self.d_char_out}
            enabled = {k: v for k, v in dims.items()
                       if (k == "d_word" and self.use_word) or (k == "d_pos" and self.use_pos)
                       or (k == "d_char_out" and self.use_char)}
            bad = {k: v for k, v in enabled.items() if v != self.d_content}
            if bad:
                raise ConfigError(f"sum composition needs every enabled source at d_model/2 = "
                                  f"{self.d_content}; got {bad}")
        if self.use_char and self.char_encoder == "lstm" and self.d_char_out % 2:
            raise ConfigError("d_char_out must be even for the bidirectional char encoder")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        return self


@dataclass
class TrainConfig:
    lambda_: float = 1.0
    mode: str = "joint"  # joint | const | dep
    batch_tokens: int = 400
    max_epochs: int = 50
    lr: float = 1e-3
    warmup_steps: int = 100
    beta1: float = 0.9
    beta2: float = 0.98
    clip_norm: float = 5.0
    seed: int = 1
    min_word_freq: int = 1
    unk_replace_prob: float = 0.3
    patience: int = 0  # 0 disables early stopping
    checkpoint: Optional[str] = None
    log_path: Optional[str] = None
    deterministic: bool = True
    eval_every: int = 1
    # stop as soon as the dev metric reaches this value (None: never)
    target_metric: Optional[float] = None

    def validate(self) -> "TrainConfig":
        if self.mode not in ("joint", "const", "dep"):
            raise ConfigError(f"mode must be joint, const or dep, got {self.mode!r}")
        if self.lambda_ < 0:
            raise ConfigError("lambda must be >= 0")
        if self.batch_tokens < 1 or self.max_epochs < 0:
            raise ConfigError("batch_tokens must be >= 1 and max_epochs >= 0")
        return self


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_trees: Optional[str] = None
    train_conll: Optional[str] = None
    dev_trees: Optional[str] = None
    dev_conll: Optional[str] = None
    output_dir: str = "run"
    profile: str = "english"

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.train.validate()
        return self

    def as_flat(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sub in fields(value):
                    out[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
            else:
                out[f.name] = value
        return out


def _coerce(raw: str, current: Any, key: str, annotation: str) -> Any:
    text = raw.strip()
    if text.lower() in ("none", "") and "Optional" in str(annotation):
        return None
    if isinstance(current, bool) or annotation == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(current, int) or annotation == "int":
            return int(text)
        if isinstance(current, float) or annotation == "float" or "float" in str(annotation):
            return float(text)
        if isinstance(current, tuple) or annotation == "tuple":
            return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return text


def apply_settings(cfg: RunConfig, settings: dict[str, str]) -> RunConfig:
    """Set dotted keys (``model.d_model``) or bare top-level keys from strings."""
    for key, raw in settings.items():
        target: Any = cfg
        name = key
        if "." in key:
            section, name = key.split(".", 1)
            if section not in ("model", "train"):
                raise ConfigError(f"unknown config section {section!r} in {key!r}")
            target = getattr(cfg, section)
        known = {f.name: f for f in fields(target)}
        if name == "lambda":
            name = "lambda_"
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(target, name, _coerce(raw, getattr(target, name), key, known[name].type))
    return cfg


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: Optional[str], overrides: Optional[dict[str, str]] = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            apply_settings(cfg, parse_config_text(fh.read()))
    if overrides:
        apply_settings(cfg, overrides)
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for key, value in cfg.as_flat().items():
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
