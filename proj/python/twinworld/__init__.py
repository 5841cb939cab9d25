from ._twinworld import (
    ConfigError,
    DependencyError,
    Error,
    GateError,
    InputError,
    TransportError,
    __version__,
    dl_distance,
    dl_similarity,
    expected_hitting_time,
    k_core_ids,
    normalize_answer,
    relation_distribution,
    run_stage,
    shift_timestamp,
    stage_names,
    token_f1,
)

__all__ = [
    "ConfigError",
    "DependencyError",
    "Error",
    "GateError",
    "InputError",
    "TransportError",
    "__version__",
    "dl_distance",
    "dl_similarity",
    "expected_hitting_time",
    "k_core_ids",
    "normalize_answer",
    "relation_distribution",
    "run_stage",
    "shift_timestamp",
    "stage_names",
    "token_f1",
]
