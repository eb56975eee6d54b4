"""Run the closed loop against a model backend and collect scored records."""
from .backends import (BackendError, BackendKind, ConfigError, HttpChatBackend, Reply, RunConfig,
                       load_cassette, make_backend, prompt_hash)
from .corrupt import corrupt
from .pipeline import (BOTTOM, OK, EvalRecord, read_results, record_cassette, run_pipeline, score_sample,
                       write_results)

__all__ = [
    "BackendError", "BackendKind", "ConfigError", "HttpChatBackend", "Reply", "RunConfig",
    "load_cassette", "make_backend", "prompt_hash", "corrupt", "BOTTOM", "OK", "EvalRecord",
    "read_results", "record_cassette", "run_pipeline", "score_sample", "write_results",
]
