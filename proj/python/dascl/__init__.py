"""Dictionary-assisted supervised contrastive learning for text classification."""

import json

from ._core import (
    DasclRuntimeError,
    Lexicon,
    LexiconSet,
    ValidationError,
    average_precision,
    cross_entropy,
    dascl_loss,
    evaluate,
    evaluate_checkpoint,
    export_embeddings,
    gradcheck,
    join_tokens,
    keyword_simplify,
    loss_modes,
    macro_f1,
    parse_dictionary,
    precision_recall_f1,
    scl_loss,
    tokenize,
    total_loss,
)
from ._core import _train_from_config


def train_from_config(config_path):
    """Train from an experiment config file and return the parsed history.

    Writes checkpoint.json and history.json (and test_report.json when the
    config names a test set) into the configured output directory.
    """
    return json.loads(_train_from_config(str(config_path)))


__all__ = [
    "DasclRuntimeError",
    "Lexicon",
    "LexiconSet",
    "ValidationError",
    "average_precision",
    "cross_entropy",
    "dascl_loss",
    "evaluate",
    "evaluate_checkpoint",
    "export_embeddings",
    "gradcheck",
    "join_tokens",
    "keyword_simplify",
    "loss_modes",
    "macro_f1",
    "parse_dictionary",
    "precision_recall_f1",
    "scl_loss",
    "tokenize",
    "total_loss",
    "train_from_config",
]
