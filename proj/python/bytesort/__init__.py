"""File-type identification from byte-value histograms."""

from ._core import (
    BadMagic,
    ChecksumError,
    CountMismatch,
    Dataset,
    DimensionError,
    EmptyFile,
    EmptySupervisedSet,
    Error,
    FormatError,
    HashMismatch,
    InvalidArgument,
    IoError,
    Model,
    Sample,
    Split,
    VersionUnsupported,
    byte_histogram,
    featurize_file,
    fit_knn,
    fit_tree,
    ingest,
    load_features,
    load_model,
    model_from_bytes,
    parameter_counts,
    save_features,
    select_supervised,
    shuffle_split,
    train_mlp,
    train_sgan,
    write_synthetic_corpus,
)

__version__ = "0.1.0"
