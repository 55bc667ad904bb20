from .base import ClassifierHandle, ColumnMapMismatch, ModelError
from .external import AdapterError, ExternalModel, external_predict
from .fit import FAMILIES, CvConfig, fit, grid_search_cv, kfold_indices
from .logistic import LogisticRegression
from .metrics import EvalReport, auc_score, confusion_counts, evaluate, report_from_scores
from .mlp import MLP
from .serialize import load_handle, save_handle
from .tree import DecisionTree

__all__ = [
    "AdapterError",
    "ClassifierHandle",
    "ColumnMapMismatch",
    "CvConfig",
    "DecisionTree",
    "EvalReport",
    "ExternalModel",
    "FAMILIES",
    "LogisticRegression",
    "MLP",
    "ModelError",
    "auc_score",
    "confusion_counts",
    "evaluate",
    "external_predict",
    "fit",
    "grid_search_cv",
    "kfold_indices",
    "load_handle",
    "report_from_scores",
    "save_handle",
]
