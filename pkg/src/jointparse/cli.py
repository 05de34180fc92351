"""Command-line entry point: train, parse, eval and oracle-check.

Exit codes: 0 success, 1 internal failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, dump_config, load_config
from .metrics import EvalError, bracket_prf, format_report, get_profile, metric_record, uas_las
from .model import DataError
from .treebank import TreebankFormatError, load_corpus, read_bracketed, read_conll, write_bracketed, write_conll
from .trees import Sentence

log = logging.getLogger("jointparse")


class InputError(ValueError):
    pass


def _fail(code: int, message: str) -> int:
    print(f"jointparse: error: {message}", file=sys.stderr)
    return code


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


# train ------------------------------------------------------------------

def _train_overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    flag_map = {
        "mode": "train.mode", "shared_layers": "model.shared_layers", "composition": "model.composition",
        "lambda_": "train.lambda_", "seed": "train.seed", "epochs": "train.max_epochs",
        "train_trees": "train_trees", "train_conll": "train_conll", "dev_trees": "dev_trees",
        "dev_conll": "dev_conll", "output_dir": "output_dir", "profile": "profile",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = str(value)
    if args.char_encoder is not None:
        out["model.char_encoder"] = args.char_encoder.replace("-style", "")
    for attr, key in (("use_pos", "model.use_pos"), ("use_word", "model.use_word"), ("use_char", "model.use_char")):
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = str(value)
    if args.deterministic:
        out["train.deterministic"] = "true"
    return out


def cmd_train(args) -> int:
    from .train import train

    settings: dict[str, str] = {}
    if args.manifest:
        manifest = json.loads(_read(args.manifest))
        settings.update({k: ("none" if v is None else ",".join(map(str, v)) if isinstance(v, list) else str(v))
                         for k, v in manifest["config"].items()})
    settings.update(_train_overrides(args))
    if args.config is not None:
        _read(args.config)  # existence check with a clean message
    cfg = load_config(args.config, settings)
    if not cfg.train_trees and not cfg.train_conll:
        raise InputError("no training data: set train_trees and/or train_conll")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    need_trees = cfg.train.mode in ("joint", "const")
    need_deps = cfg.train.mode in ("joint", "dep")
    for key, needed in (("train_trees", need_trees), ("train_conll", need_deps)):
        if needed and not getattr(cfg, key):
            raise InputError(f"mode {cfg.train.mode} needs {key}")
    for key in ("train_trees", "train_conll", "dev_trees", "dev_conll"):
        if getattr(cfg, key):
            _read(getattr(cfg, key))
    corpus = load_corpus(cfg.train_trees if need_trees else None, cfg.train_conll if need_deps else None)
    dev_trees = cfg.dev_trees or cfg.train_trees
    dev_conll = cfg.dev_conll or cfg.train_conll
    dev = load_corpus(dev_trees if need_trees else None, dev_conll if need_deps else None)

    ckpt = out_dir / "model.ckpt"
    cfg.train.checkpoint = str(ckpt)
    cfg.train.log_path = str(out_dir / "train.log")
    (out_dir / "config.txt").write_text(dump_config(cfg), encoding="utf-8")
    result = train(corpus, dev, cfg.model, cfg.train, eval_cfg=get_profile(cfg.profile))
    vocab_text = result.vocab.save()
    dev_metrics = {
        "constituency": ({k: result.best_dev[k] for k in ("LR", "LP", "F1")} if need_trees else None),
        "dependency": ({k: result.best_dev[k] for k in ("UAS", "LAS")} if need_deps else None),
    }
    manifest = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.as_flat().items()},
        "seed": cfg.train.seed,
        "vocab_sha256": hashlib.sha256(vocab_text.encode("utf-8")).hexdigest(),
        "checkpoint": str(ckpt),
        "best_epoch": result.best_epoch,
        "dev_metrics": dev_metrics,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("best epoch %d, dev %s", result.best_epoch, result.best_dev)
    return 0


# parse ------------------------------------------------------------------

def read_raw_sentences(text: str, need_pos: bool) -> list[Sentence]:
    """One sentence per line; tokens are ``word`` or, when every token has one, ``word/TAG``."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if all("/" in t.strip("/") for t in tokens):
            pairs = [t.rsplit("/", 1) for t in tokens]
            out.append(Sentence([w for w, _ in pairs], [p for _, p in pairs]))
        else:
            if need_pos:
                raise InputError(f"line {lineno}: the model uses POS tags but tokens carry none (use word/TAG)")
            out.append(Sentence(tokens, ["X"] * len(tokens)))
    return out


def cmd_parse(args) -> int:
    from .train import load_checkpoint

    if not Path(args.checkpoint).is_file():
        raise InputError(f"no such file: {args.checkpoint}")
    model, _, state = load_checkpoint(args.checkpoint)
    mode = args.mode or (getattr(state, "mode", None) if state else None) or "joint"
    sentences = read_raw_sentences(_read(args.input), model.cfg.use_pos)
    parsed = model.parse(sentences, mode) if sentences else []
    if args.trees_out and mode in ("joint", "const"):
        Path(args.trees_out).write_text("".join(write_bracketed(t) + "\n" for t, _ in parsed), encoding="utf-8")
    if args.conll_out and mode in ("joint", "dep"):
        Path(args.conll_out).write_text(
            "".join(write_conll(s, d) + "\n" for s, (_, d) in zip(sentences, parsed)), encoding="utf-8")
    return 0


# eval -------------------------------------------------------------------

def cmd_eval(args) -> int:
    profile = get_profile(args.profile)
    brackets = attachment = None
    if bool(args.pred_trees) != bool(args.gold_trees) or bool(args.pred_conll) != bool(args.gold_conll):
        raise InputError("give predicted and gold files in pairs")
    if not (args.pred_trees or args.pred_conll):
        raise InputError("nothing to evaluate: pass --pred-trees/--gold-trees and/or --pred-conll/--gold-conll")
    if args.pred_trees:
        pred = [t for _, t in read_bracketed(_read(args.pred_trees))]
        gold = [t for _, t in read_bracketed(_read(args.gold_trees))]
        brackets = bracket_prf(pred, gold, profile)
    if args.pred_conll:
        pred = read_conll(_read(args.pred_conll))
        gold = read_conll(_read(args.gold_conll))
        if len(pred) != len(gold):
            raise EvalError(f"{len(pred)} predicted vs {len(gold)} gold dependency blocks")
        attachment = uas_las([d for _, d in pred], [d for _, d in gold], [s for s, _ in gold], profile)
    report = format_report(brackets, attachment)
    sys.stdout.write(report)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    if args.json:
        Path(args.json).write_text(json.dumps(metric_record(brackets, attachment), indent=2) + "\n", encoding="utf-8")
    return 0


# oracle-check -----------------------------------------------------------

def cmd_oracle_check(args) -> int:
    from . import oracles
    from .dependency import eisner
    from .trees import MAX_ENUM_CONSTITUENT, MAX_ENUM_DEPENDENCY

    if not 1 <= args.max_n <= min(MAX_ENUM_CONSTITUENT, MAX_ENUM_DEPENDENCY):
        raise InputError(f"--max-n must be in [1, {min(MAX_ENUM_CONSTITUENT, MAX_ENUM_DEPENDENCY)}]")
    decoders = {}
    if args.inject_fault == "eisner-split":
        decoders["eisner"] = lambda s: eisner(s, _split_offset=1)
    results = oracles.run_all(args.seeds, args.max_n, decoders)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("oracle-check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


# main -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jointparse", description="Joint constituency and dependency parser.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--config", help="flat key = value config file")
    t.add_argument("--manifest", help="rerun with the configuration recorded in a manifest")
    t.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    t.add_argument("--mode", choices=["joint", "const", "dep"])
    t.add_argument("--shared-layers", type=int)
    t.add_argument("--composition", choices=["sum", "concat"])
    t.add_argument("--char-encoder", choices=["lstm", "cnn", "lstm-style", "cnn-style"])
    t.add_argument("--use-pos", dest="use_pos", action="store_const", const=True)
    t.add_argument("--no-pos", dest="use_pos", action="store_const", const=False)
    t.add_argument("--use-word", dest="use_word", action="store_const", const=True)
    t.add_argument("--no-word", dest="use_word", action="store_const", const=False)
    t.add_argument("--use-char", dest="use_char", action="store_const", const=True)
    t.add_argument("--no-char", dest="use_char", action="store_const", const=False)
    t.add_argument("--lambda", dest="lambda_", type=float)
    t.add_argument("--seed", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--deterministic", action="store_true")
    t.add_argument("--train-trees")
    t.add_argument("--train-conll")
    t.add_argument("--dev-trees")
    t.add_argument("--dev-conll")
    t.add_argument("--output-dir")
    t.add_argument("--profile", choices=["english", "chinese", "none"])
    t.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse raw tokenized text")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--trees-out")
    p.add_argument("--conll-out")
    p.add_argument("--mode", choices=["joint", "const", "dep"])
    p.set_defaults(func=cmd_parse)

    e = sub.add_parser("eval", help="score predictions against gold")
    e.add_argument("--pred-trees")
    e.add_argument("--gold-trees")
    e.add_argument("--pred-conll")
    e.add_argument("--gold-conll")
    e.add_argument("--profile", default="english", choices=["english", "chinese", "none"])
    e.add_argument("--report", help="write the text report here")
    e.add_argument("--json", help="write the machine-readable record here")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle-check", help="compare decoders against brute-force enumeration")
    o.add_argument("--seeds", type=int, default=200)
    o.add_argument("--max-n", type=int, default=6)
    o.add_argument("--inject-fault", choices=["eisner-split"], help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ConfigError, TreebankFormatError, EvalError, DataError) as exc:
        return _fail(2, str(exc))
    except Exception as exc:  # noqa: BLE001 - top-level guard maps to exit code 1
        log.exception("internal failure")
        return _fail(1, f"internal failure: {exc}")


if __name__ == "__main__":
    sys.exit(main())
