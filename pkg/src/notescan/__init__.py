"""Counterfeit banknote detection from texture features of scanned notes."""
from .dataset import (
    CLASS_VALUES,
    Dataset,
    FeatureRecord,
    MinMaxNormalizer,
    NormalizationParams,
    build_dataset,
    min_max_normalize,
    read_arff,
    read_csv,
    write_arff,
    write_csv,
)
from .evaluation import cross_validate, stratified_folds
from .imaging import RoiSpec, preprocess
from .resample import Smote, SmoteConfig, smote, smote_schedule
from .texfeat import FEATURE_NAMES, TextureFeatures, feature_vector

__version__ = "0.1.0"

__all__ = [
    "CLASS_VALUES", "Dataset", "FeatureRecord", "MinMaxNormalizer", "NormalizationParams",
    "build_dataset", "min_max_normalize", "read_arff", "read_csv", "write_arff", "write_csv",
    "cross_validate", "stratified_folds", "RoiSpec", "preprocess", "Smote", "SmoteConfig",
    "smote", "smote_schedule", "FEATURE_NAMES", "TextureFeatures", "feature_vector",
]
