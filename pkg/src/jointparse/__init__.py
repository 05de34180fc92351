"""Joint constituency and dependency parsing with a shared self-attentive encoder."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

BUNDLED = ("toy32", "mini_train", "mini_dev")


def data_path(name: str, ext: str) -> Path:
    """Path of a bundled treebank file, e.g. ``data_path("toy32", "trees")``."""
    if name not in BUNDLED or ext not in ("trees", "conll"):
        raise KeyError(f"no bundled file {name}.{ext}")
    return Path(str(resources.files(__name__) / "data" / f"{name}.{ext}"))


def load_bundled(name: str):
    """Aligned examples of a bundled treebank."""
    from .treebank import load_corpus

    return load_corpus(data_path(name, "trees"), data_path(name, "conll"))
