"""From-scratch recurrent classifier: cells, network, loss, optimizer,
training loop, gradient checking, and checkpoints."""

from .cells import (
    GruCellParams,
    LstmCellParams,
    ShapeMismatch,
    gru_cell_forward,
    init_gru,
    init_lstm,
    lstm_cell_forward,
    sigmoid,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import (
    TOLERANCE,
    analytic_gradients,
    max_relative_errors,
    numeric_gradients,
    run_gradient_check,
)
from .loss import (
    EmptyClass,
    LabelOutOfRange,
    NoClasses,
    batch_loss_grad,
    class_weights,
    log_softmax,
    softmax,
    weighted_cross_entropy,
)
from .network import (
    BI,
    GRU,
    LSTM,
    UNI,
    EmptySequence,
    RecurrentStack,
    StaleCache,
    backward_batch,
    forward_batch,
    forward_sequence,
    make_dropout_masks,
)
from .optim import adam_init, adam_step
from .training import (
    CurvePoint,
    EmptySet,
    EvalReport,
    LearningCurve,
    TrainConfig,
    evaluate,
    predict,
    tally,
    train,
)

__all__ = [
    "BI", "GRU", "LSTM", "UNI", "TOLERANCE",
    "CheckpointError", "CurvePoint", "EmptyClass", "EmptySequence",
    "EmptySet", "EvalReport", "GruCellParams",
    "LabelOutOfRange", "LearningCurve", "LstmCellParams", "NoClasses",
    "RecurrentStack", "ShapeMismatch", "StaleCache", "TrainConfig",
    "adam_init", "adam_step", "analytic_gradients", "backward_batch",
    "batch_loss_grad", "class_weights", "evaluate", "forward_batch",
    "forward_sequence", "gru_cell_forward", "init_gru", "init_lstm",
    "load_checkpoint", "log_softmax", "lstm_cell_forward",
    "make_dropout_masks", "max_relative_errors", "numeric_gradients",
    "predict", "run_gradient_check", "save_checkpoint", "sigmoid",
    "softmax", "tally", "train", "weighted_cross_entropy",
]
