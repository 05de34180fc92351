import numpy as np
import pytest

from jointparse import load_bundled
from jointparse.config import ModelConfig


@pytest.fixture(scope="session")
def toy32():
    return load_bundled("toy32")


def tiny_config(**overrides) -> ModelConfig:
    """A model small enough for finite differences (64-bit, no dropout)."""
    base = dict(d_model=8, heads=2, d_ff=8, total_layers=2, shared_layers=1, d_word=4, d_char_emb=3,
                d_char_out=4, d_pos=4, d_span_hidden=6, d_arc=5, d_rel=3, max_len=16, dtype="float64",
                embedding_dropout=0.0, attention_dropout=0.0, relu_dropout=0.0, residual_dropout=0.0)
    base.update(overrides)
    return ModelConfig(**base).validate()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
