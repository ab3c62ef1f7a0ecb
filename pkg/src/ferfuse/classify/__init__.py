"""Random forest, k-NN, and MLP classifiers over reduced features."""

from .forest import (
    DecisionTree,
    ForestModel,
    load_forest,
    rf_predict,
    rf_train,
    save_forest,
)
from .knn import knn_predict
from .mlp import (
    MlpModel,
    load_mlp,
    loss_and_grads,
    mlp_init,
    mlp_predict,
    mlp_train,
    save_mlp,
)

__all__ = [
    "DecisionTree",
    "ForestModel",
    "MlpModel",
    "knn_predict",
    "load_forest",
    "load_mlp",
    "loss_and_grads",
    "mlp_init",
    "mlp_predict",
    "mlp_train",
    "rf_predict",
    "rf_train",
    "save_forest",
    "save_mlp",
]
