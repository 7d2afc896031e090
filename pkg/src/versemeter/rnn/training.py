"""Mini-batch training loop, evaluation metrics, and the learning curve.

Sequences of different lengths are handled by grouping each shuffled
mini-batch into equal-length sub-batches; gradients are accumulated over
the whole batch (ordered, so runs are bit-reproducible) and one Adam
step is taken per batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .loss import batch_loss_grad, class_weights
from .network import RecurrentStack, backward_batch, forward_batch, make_dropout_masks
from .optim import BETA1, BETA2, EPS, adam_init, adam_step


class EmptySet(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = EPS
    dropout: float = 0.0
    validation_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0
    use_weights: bool = False
    # optional early exit once validation accuracy reaches a target;
    # None trains for the full epoch budget
    stop_at_validation_accuracy: float | None = None

    def validate(self) -> list[str]:
        problems = []
        if self.epochs < 0:
            problems.append("epochs must be >= 0")
        if self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if self.learning_rate <= 0:
            problems.append("learning_rate must be > 0")
        if not 0.0 <= self.dropout < 1.0:
            problems.append("dropout must be in [0, 1)")
        for name in ("validation_fraction", "test_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                problems.append(f"{name} must be in (0, 1)")
        if self.validation_fraction + self.test_fraction >= 1.0:
            problems.append("validation_fraction + test_fraction must be < 1")
        return problems


@dataclass
class CurvePoint:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class LearningCurve:
    points: list[CurvePoint] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_accuracy"]
        lines += [
            f"{p.epoch},{p.train_loss!r},{p.val_accuracy!r}" for p in self.points
        ]
        return "\n".join(lines) + "\n"


def _time_major(seq) -> np.ndarray:
    """Accept an EncodedMatrix or [n x p] array; return [p, n]."""
    values = getattr(seq, "values", seq)
    return np.asarray(values, dtype=float).T


def _length_groups(indices, lengths):
    """Split indices into runs of equal sequence length, order-stable."""
    groups: dict[int, list[int]] = {}
    for i in indices:
        groups.setdefault(lengths[i], []).append(i)
    return list(groups.values())


def predict(stack: RecurrentStack, sequences) -> np.ndarray:
    """Deterministic eval-mode argmax predictions for a list of verses."""
    xs = [_time_major(s) for s in sequences]
    lengths = [x.shape[0] for x in xs]
    preds = np.empty(len(xs), dtype=int)
    for group in _length_groups(range(len(xs)), lengths):
        X = np.stack([xs[i] for i in group])
        logits, _ = forward_batch(X, stack)
        preds[list(group)] = np.argmax(logits, axis=1)
    return preds


@dataclass
class EvalReport:
    overall_accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray  # [true, predicted] counts
    support: np.ndarray


def tally(y_true, y_pred, n_classes: int) -> EvalReport:
    """Confusion matrix and accuracies from parallel label arrays."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.size == 0:
        raise EmptySet("no examples to evaluate")
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (y_true, y_pred), 1)
    support = confusion.sum(axis=1)
    correct = np.diag(confusion)
    with np.errstate(invalid="ignore"):
        per_class = np.where(support > 0, correct / np.maximum(support, 1), np.nan)
    return EvalReport(
        overall_accuracy=float(correct.sum() / y_true.size),
        per_class_accuracy=per_class,
        confusion=confusion,
        support=support,
    )


def evaluate(stack: RecurrentStack, sequences, labels) -> EvalReport:
    """Accuracy, per-class recall, and confusion matrix on a labeled set."""
    if len(sequences) == 0:
        raise EmptySet("no examples to evaluate")
    preds = predict(stack, sequences)
    return tally(labels, preds, stack.n_classes)


def train(
    stack: RecurrentStack,
    train_sequences,
    train_labels,
    cfg: TrainConfig,
    val_sequences=(),
    val_labels=(),
):
    """Train the stack in place; returns (stack, LearningCurve).

    Identical stack / data / config / seed produce bit-identical
    parameters and curves.
    """
    problems = [p for p in cfg.validate() if "fraction" not in p]
    if problems:
        raise ValueError("; ".join(problems))
    if len(train_sequences) == 0:
        raise EmptySet("empty training split")

    xs = [_time_major(s) for s in train_sequences]
    lengths = [x.shape[0] for x in xs]
    labels = np.asarray(train_labels, dtype=int)
    n = len(xs)

    weights = None
    if cfg.use_weights:
        counts = np.bincount(labels, minlength=stack.n_classes)
        weights = class_weights(counts)

    order_rng, dropout_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2)
    )
    params = dict(stack.named_parameters())
    state = adam_init(params)
    curve = LearningCurve()

    for epoch in range(1, cfg.epochs + 1):
        order = order_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            batch_grads = {name: np.zeros_like(p) for name, p in params.items()}
            for group in _length_groups(batch.tolist(), lengths):
                X = np.stack([xs[i] for i in group])
                y = labels[group]
                masks = make_dropout_masks(stack, X.shape[0], X.shape[1], dropout_rng)
                logits, cache = forward_batch(X, stack, masks)
                losses, dlogits = batch_loss_grad(
                    logits, y, weights, grad_scale=1.0 / len(batch)
                )
                epoch_loss += float(losses.sum())
                for name, g in backward_batch(stack, cache, dlogits).items():
                    batch_grads[name] += g
            adam_step(
                params, batch_grads, state,
                cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps,
            )
        val_acc = (
            evaluate(stack, val_sequences, val_labels).overall_accuracy
            if len(val_sequences)
            else float("nan")
        )
        curve.points.append(CurvePoint(epoch, epoch_loss / n, val_acc))
        if (
            cfg.stop_at_validation_accuracy is not None
            and val_acc >= cfg.stop_at_validation_accuracy
        ):
            break
    return stack, curve
