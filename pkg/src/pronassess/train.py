"""Training loop: Adam, early stopping on validation loss, loss history.

Determinism contract: a fixed seed fixes the parameter init, the
validation split and the per-epoch shuffling stream, so two runs produce
bit-identical histories and checkpoints.
"""

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .model import ModelConfig, ScoringModel, UtteranceFeatures


@dataclass
class TrainConfig:
    lr: float = 1e-4
    batch: int = 32
    epochs: int = 50
    patience: int = 2
    seed: int = 0
    loss_weight_fluency: float = 0.5
    loss_weight_prosody: float = 0.5
    val_fraction: float = 0.1


def parse_train_config(path) -> TrainConfig:
    """key=value file; blank lines and # comments ignored; unknown keys rejected."""
    valid = {f.name for f in fields(TrainConfig)}
    int_keys = {"batch", "epochs", "patience", "seed"}
    kwargs = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{ln}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in valid:
            raise ValidationError(f"{path}:{ln}: unknown config key {key!r}")
        try:
            kwargs[key] = int(value) if key in int_keys else float(value)
        except ValueError as exc:
            raise ValidationError(f"{path}:{ln}: bad value for {key!r}: {value!r}") from exc
    return TrainConfig(**kwargs)


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainResult:
    model: ScoringModel          # parameters of the best-validation epoch
    history: list[tuple[int, float, float]]  # (epoch, train_loss, val_loss)
    best_epoch: int
    train_indices: list[int]
    val_indices: list[int]


def history_csv(history) -> str:
    lines = ["epoch,train_loss,val_loss"]
    for epoch, tr, va in history:
        lines.append(f"{epoch},{tr!r},{va!r}")
    return "\n".join(lines) + "\n"


def train(dataset: list[UtteranceFeatures], model_config: ModelConfig = ModelConfig(),
          config: TrainConfig = TrainConfig(), epoch_callback=None) -> TrainResult:
    """Train a fresh model on the dataset.

    10% of the data (at least one utterance) is held out for validation
    and early stopping; training stops once validation loss has failed to
    improve for `patience` consecutive epochs. The returned model carries
    the parameters of the best-validation epoch.
    """
    if not dataset:
        raise ValidationError("empty dataset")
    for utt in dataset:
        if utt.fluency is None or utt.prosody is None:
            raise ValidationError("every training utterance needs both labels")

    rng = np.random.default_rng(config.seed)
    model = ScoringModel(model_config, seed=config.seed)
    weights = (config.loss_weight_fluency, config.loss_weight_prosody)

    order = rng.permutation(len(dataset))
    n_val = max(1, int(round(config.val_fraction * len(dataset))))
    if len(dataset) < 2:
        n_val = 0
    val_idx = [int(i) for i in order[:n_val]]
    train_idx = [int(i) for i in order[n_val:]]
    val_set = [dataset[i] for i in val_idx]
    train_set = [dataset[i] for i in train_idx]

    opt = Adam(model.params, lr=config.lr)
    history: list[tuple[int, float, float]] = []
    best_val = np.inf
    best_epoch = 0
    best_params = {k: v.copy() for k, v in model.params.items()}
    bad_epochs = 0

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(len(train_set))
        epoch_losses = []
        for lo in range(0, len(train_set), config.batch):
            batch = [train_set[int(i)] for i in perm[lo : lo + config.batch]]
            loss, _, cache = model.forward_batch(batch, weights)
            if not np.isfinite(loss):
                raise ValidationError(
                    f"non-finite training loss at epoch {epoch}; aborting"
                )
            grads = model.backward(cache)
            opt.step(model.params, grads)
            epoch_losses.append((loss, len(batch)))

        for name, p in model.params.items():
            if not np.all(np.isfinite(p)):
                raise ValidationError(
                    f"non-finite values in {name!r} after epoch {epoch}; aborting"
                )

        train_loss = float(
            sum(l * n for l, n in epoch_losses) / sum(n for _, n in epoch_losses)
        )
        if val_set:
            val_loss, _, _ = model.forward_batch(val_set, weights)
            val_loss = float(val_loss)
        else:
            val_loss = train_loss
        if not np.isfinite(val_loss):
            raise ValidationError(f"non-finite validation loss at epoch {epoch}; aborting")
        history.append((epoch, train_loss, val_loss))

        if epoch_callback is not None:
            epoch_callback(epoch, model)

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break

    model.params = best_params
    return TrainResult(model, history, best_epoch, train_idx, val_idx)
