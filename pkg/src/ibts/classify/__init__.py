"""Random forest classifier and cross-validation harness."""

from ._backend import BACKENDS, DEFAULT as DEFAULT_BACKEND
from .cv import CVReport, cross_validate, stratified_folds
from .encoding import EncodedColumn, Encoding, one_hot_encode
from .forest import (
    ForestModel,
    ForestParams,
    Prediction,
    Tree,
    bootstrap_sample,
    default_workers,
    derive_seed,
    fit_forest,
)

__all__ = [
    "BACKENDS",
    "DEFAULT_BACKEND",
    "CVReport",
    "EncodedColumn",
    "Encoding",
    "ForestModel",
    "ForestParams",
    "Prediction",
    "Tree",
    "bootstrap_sample",
    "cross_validate",
    "default_workers",
    "derive_seed",
    "fit_forest",
    "one_hot_encode",
    "stratified_folds",
]
