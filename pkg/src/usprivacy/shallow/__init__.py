"""Shallow baseline models and their feature builders."""

from .features import (FeatureMatrix, dictionary_features, labels_of,
                       pool_labels_of, text_features)
from .models import (MODEL_REGISTRY, GaussianNaiveBayes, KNearestNeighbors,
                     LinearSVM, LogisticRegression, ShallowModel, load_model)
from .trees import DecisionTree, RandomForest

__all__ = [
    "DecisionTree",
    "FeatureMatrix",
    "GaussianNaiveBayes",
    "KNearestNeighbors",
    "LinearSVM",
    "LogisticRegression",
    "MODEL_REGISTRY",
    "RandomForest",
    "ShallowModel",
    "dictionary_features",
    "labels_of",
    "load_model",
    "pool_labels_of",
    "text_features",
]
