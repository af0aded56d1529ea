"""Python bindings for the qrcd toolkit."""

from ._core import (
    ContractError,
    NormConfig,
    ParseError,
    RankedAnswer,
    Run,
    UnicodeForm,
    cli,
    compare,
    dataset_stats,
    evaluate,
    exact_match,
    fuse,
    normalize,
    parse_run,
    prr,
    token_f1,
    tokenize,
    validate_dataset,
    write_run,
)
from ._core import __version__

__all__ = [
    "ContractError",
    "NormConfig",
    "ParseError",
    "RankedAnswer",
    "Run",
    "UnicodeForm",
    "cli",
    "compare",
    "dataset_stats",
    "evaluate",
    "exact_match",
    "fuse",
    "normalize",
    "parse_run",
    "prr",
    "token_f1",
    "tokenize",
    "validate_dataset",
    "write_run",
]
