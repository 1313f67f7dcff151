"""Python bindings for the ctrkit corpus monitoring core."""

import json as _json

from ._core import (
    DomainError,
    Error,
    Graph,
    IoError,
    KeynessResult,
    NotFoundError,
    ParseError,
    TfidfResult,
    Token,
    ValidationError,
    analyze,
    build_graph,
    classify,
    detect_excursions,
    extract_hashtags,
    keyness,
    log_ratio_value,
    pseudonymize,
    tfidf,
)
from . import _core

__all__ = [
    "DomainError", "Engine", "Error", "Graph", "IoError", "KeynessResult", "NotFoundError",
    "ParseError", "TfidfResult", "Token", "ValidationError", "analyze", "build_graph", "classify",
    "detect_excursions", "extract_hashtags", "keyness", "log_ratio_value", "pseudonymize",
    "tally_file", "tfidf",
]


def tally_file(path, bot):
    """Per-label counts of a labeled-pair JSONL file for one bot."""
    return _json.loads(_core.tally_file(str(path), bot))


class Engine:
    """Store-backed analytics; results come back as plain dicts and lists."""

    def __init__(self, data_dir, salt="ctrkit"):
        self._engine = _core._Engine(str(data_dir), salt)

    def ingest_file(self, path):
        return _json.loads(self._engine.ingest_file(str(path)))

    def ingest_text(self, text):
        return _json.loads(self._engine.ingest_text(text))

    def keyness(self, period, n=3, granularity="month"):
        return _json.loads(self._engine.keyness(period, n, granularity))

    def tfidf(self, kind="noun", n=30):
        return _json.loads(self._engine.tfidf(kind, n))

    def graph(self, seed=None, min_weight=None, depth=1):
        return _json.loads(self._engine.graph(seed, min_weight, depth))

    def series(self, term, granularity="month"):
        return _json.loads(self._engine.series(term, granularity))

    def watch(self, term, actor="python"):
        return _json.loads(self._engine.watch(term, actor))

    def watchlist(self):
        return _json.loads(self._engine.watchlist())

    def audit_classify(self):
        return self._engine.audit_classify()

    def audit_tally(self, bot):
        return _json.loads(self._engine.audit_tally(bot))

    def __len__(self):
        return self._engine.post_count()
