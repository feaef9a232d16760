"""Training runs, sweeps, landscapes and the transfer pipeline."""
from mufno.experiments.landscape import lr_landscape
from mufno.experiments.records import SweepResult, SweepSpec, TrainRecord
from mufno.experiments.sweep import sweep
from mufno.experiments.trainer import evaluate, train
from mufno.experiments.transfer import CostReport, TransferResult, mu_transfer

__all__ = [
    "CostReport",
    "SweepResult",
    "SweepSpec",
    "TrainRecord",
    "TransferResult",
    "evaluate",
    "lr_landscape",
    "mu_transfer",
    "sweep",
    "train",
]
