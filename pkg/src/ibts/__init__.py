"""Classifier-ready features from interval-based temporal sequences."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ESequence,
    EventInterval,
    Relation,
    allen_relation,
    duration,
    first_occurrence,
    relative_frequency,
    sequence_duration,
)
from .features import (  # noqa: E402
    SelectionReport,
    apply_selection,
    build_combined_matrix,
    build_relfreq_matrix,
    build_temporal_matrix,
    select_labels,
    support,
)
from .ingest import Dataset, FeatureMatrix, parse_dataset, read_feature_matrix, write_feature_matrix  # noqa: E402
