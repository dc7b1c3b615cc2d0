from training.losses import (
    LossTerms,
    LossWeights,
    class_weights,
    dice_structural_loss,
    edge_class_loss,
    total_loss,
)
from training.adam import AdamState, adam_step, init_adam
from training.trainer import EpochLoss, TrainConfig, TrainResult, save_loss_trace, trace_frame, train
