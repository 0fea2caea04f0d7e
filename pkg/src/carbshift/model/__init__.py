from .forest import ForestConfig, ForestModel, forest_fit_predict
from .gcn import (GcnConfig, GcnModel, TrainOutcome, gcn_forward,
                  load_checkpoint, loss_and_grad, save_checkpoint, train,
                  train_report)
from .graphs import (TARGETS, MolecularGraph, block_diagonal, build_graph,
                     normalized_adjacency)
from .metrics import EvaluationBatch, rmse, rmse_arrays

__all__ = [
    "EvaluationBatch", "ForestConfig", "ForestModel", "GcnConfig", "GcnModel",
    "MolecularGraph", "TARGETS", "TrainOutcome", "block_diagonal",
    "build_graph", "forest_fit_predict", "gcn_forward", "load_checkpoint",
    "loss_and_grad", "normalized_adjacency", "rmse", "rmse_arrays",
    "save_checkpoint", "train", "train_report",
]
