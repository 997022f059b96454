"""Python bindings for the GACN core library."""

from ._gacn import (
    ConfigError,
    ContractViolation,
    Error,
    Graph,
    NumericError,
    ParseError,
    Trainer,
    TrainConfig,
    apply_variant,
    dataset_fingerprint,
    ingest,
    linear_probe,
    link_rank,
    load_dataset,
    load_edge_list,
    run_experiment,
    split_edges,
    split_nodes,
)

__all__ = [name for name in dir() if not name.startswith("_")]
