"""Wide residual network classifier: build, forward, gradients, training, ensembles."""

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import structlog
import torch
from torch.nn import functional as F

from core.errors import InvalidArgumentError, NumericError, ShapeError
from models import WideResNet
from schemas.dataset_schema import Manifest, fold_name
from schemas.model_schema import EpochRecord, FoldAssignment, TrainConfig, WrnConfig
from schemas.spectro_schema import SpectroConfig
from services.dataset import load_features
from services.weights_io import read_weights, save_weights

logger = structlog.get_logger(__name__)

INFERENCE_BATCH = 256


def build(cfg: WrnConfig, seed: int = 0) -> WideResNet:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = WideResNet(cfg.depth, cfg.widen, cfg.classes, cfg.in_channels, cfg.dropout)
    model.config = cfg
    return model


def parameter_count(model: torch.nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def _as_tensor(batch, model: torch.nn.Module) -> torch.Tensor:
    dtype = next(model.parameters()).dtype
    if isinstance(batch, torch.Tensor):
        return batch.to(dtype)
    return torch.as_tensor(np.asarray(batch), dtype=dtype)


def _check_batch(model: torch.nn.Module, batch: torch.Tensor) -> None:
    cfg: WrnConfig = model.config
    expected = (cfg.in_channels, cfg.input_h, cfg.input_w)
    if batch.ndim != 4 or tuple(batch.shape[1:]) != expected:
        raise ShapeError(f"batch shape {tuple(batch.shape)} does not match (N, {expected})")


def forward(model: WideResNet, batch, mode: str = "eval") -> torch.Tensor:
    if mode not in ("train", "eval"):
        raise InvalidArgumentError(f"mode must be 'train' or 'eval', got {mode}")
    batch = _as_tensor(batch, model)
    _check_batch(model, batch)
    model.train(mode == "train")
    if mode == "eval":
        with torch.no_grad():
            logits = model(batch)
    else:
        logits = model(batch)
    if not torch.isfinite(logits).all():
        raise NumericError("non-finite logits")
    return logits


def loss_and_grads(model: WideResNet, batch, labels) -> tuple[float, dict[str, torch.Tensor]]:
    labels = torch.as_tensor(np.asarray(labels), dtype=torch.long)
    if labels.min() < 0 or labels.max() >= model.config.classes:
        raise InvalidArgumentError("labels out of range")
    model.zero_grad(set_to_none=True)
    logits = forward(model, batch, "train")
    if labels.shape[0] != logits.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels for a batch of {logits.shape[0]}")
    loss = F.cross_entropy(logits, labels)
    loss.backward()
    grads = {name: p.grad.detach().clone() for name, p in model.named_parameters()}
    return float(loss.detach()), grads


def predict(model: WideResNet, batch) -> np.ndarray:
    """Eval-mode softmax probabilities as float64, shape (N, classes)."""
    batch = _as_tensor(batch, model)
    chunks = []
    for start in range(0, batch.shape[0], INFERENCE_BATCH):
        logits = forward(model, batch[start:start + INFERENCE_BATCH], "eval")
        chunks.append(torch.softmax(logits.to(torch.float64), dim=1).numpy())
    if not chunks:
        return np.zeros((0, model.config.classes))
    return np.concatenate(chunks)


@dataclass
class Ensemble:
    members: list[WideResNet] = field(default_factory=list)

    def __post_init__(self):
        if not self.members:
            raise InvalidArgumentError("an ensemble needs at least one member")
        first = self.members[0].config
        for member in self.members[1:]:
            cfg = member.config
            if (cfg.classes, cfg.in_channels, cfg.input_h, cfg.input_w) != (
                first.classes, first.in_channels, first.input_h, first.input_w
            ):
                raise InvalidArgumentError("ensemble members disagree on classes or input shape")

    @property
    def config(self) -> WrnConfig:
        return self.members[0].config

    def predict_proba(self, batch) -> np.ndarray:
        return ensemble_predict(self, batch)


def ensemble_predict(ensemble: Ensemble, batch) -> np.ndarray:
    if not ensemble.members:
        raise InvalidArgumentError("an ensemble needs at least one member")
    total = None
    for member in ensemble.members:
        probs = predict(member, batch)
        total = probs if total is None else total + probs
    return total / len(ensemble.members)


def accuracy(model: WideResNet, features: np.ndarray, labels: np.ndarray) -> float:
    if len(labels) == 0:
        return math.nan
    return float((predict(model, features).argmax(axis=1) == labels).mean())


def fit(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    wrn_cfg: WrnConfig,
    train_cfg: TrainConfig,
) -> tuple[WideResNet, list[EpochRecord]]:
    """SGD with momentum over shuffled mini-batches; returns best-validation weights."""
    if len(y_train) == 0:
        raise InvalidArgumentError("training split is empty")

    model = build(wrn_cfg, train_cfg.seed)
    optimizer = torch.optim.SGD(
        model.parameters(),
        lr=train_cfg.lr,
        momentum=train_cfg.momentum,
        weight_decay=train_cfg.weight_decay,
    )
    scheduler = torch.optim.lr_scheduler.MultiStepLR(
        optimizer, milestones=train_cfg.milestones, gamma=train_cfg.lr_decay
    )
    generator = torch.Generator().manual_seed(train_cfg.seed)
    x_train_t = torch.as_tensor(x_train, dtype=torch.float32)
    y_train_t = torch.as_tensor(y_train, dtype=torch.long)

    history: list[EpochRecord] = []
    best_state = copy.deepcopy(model.state_dict())
    best_acc = -1.0

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(train_cfg.seed)
        for epoch in range(1, train_cfg.epochs + 1):
            model.train()
            order = torch.randperm(len(y_train_t), generator=generator)
            running, seen = 0.0, 0
            for start in range(0, len(order), train_cfg.batch_size):
                index = order[start:start + train_cfg.batch_size]
                if len(index) < 2 and len(order) >= 2:
                    continue  # batch norm needs more than one sample
                optimizer.zero_grad(set_to_none=True)
                loss = F.cross_entropy(model(x_train_t[index]), y_train_t[index])
                if not torch.isfinite(loss):
                    raise NumericError(f"training diverged at epoch {epoch}")
                loss.backward()
                optimizer.step()
                running += float(loss.detach()) * len(index)
                seen += len(index)
            scheduler.step()

            val_acc = accuracy(model, x_val, y_val)
            record = EpochRecord(epoch=epoch, train_loss=running / max(seen, 1), val_acc=val_acc)
            history.append(record)
            logger.info("epoch_done", epoch=epoch, train_loss=round(record.train_loss, 5), val_acc=val_acc)

            if math.isnan(val_acc) or val_acc > best_acc:
                best_acc = val_acc if not math.isnan(val_acc) else best_acc
                best_state = copy.deepcopy(model.state_dict())

    model.load_state_dict(best_state)
    model.eval()
    return model, history


def train(
    manifest: Manifest,
    root: str | Path,
    folds: FoldAssignment,
    wrn_cfg: WrnConfig,
    train_cfg: TrainConfig,
    spectro_cfg: SpectroConfig,
    threads: int = 1,
) -> tuple[WideResNet, list[EpochRecord]]:
    train_records = [r for r in manifest if r.split in folds.train_splits]
    val_records = [r for r in manifest if r.split in folds.val_splits]
    if not train_records:
        raise InvalidArgumentError(f"no records in training splits {sorted(folds.train_splits)}")

    loader_args = dict(
        root=root,
        spectro_cfg=spectro_cfg,
        height=wrn_cfg.input_h,
        width=wrn_cfg.input_w,
        include_phase=wrn_cfg.include_phase,
        threads=threads,
    )
    x_train, y_train, _ = load_features(train_records, **loader_args)
    x_val, y_val, _ = load_features(val_records, **loader_args)
    logger.info("training_started", train=len(y_train), val=len(y_val), depth=wrn_cfg.depth, widen=wrn_cfg.widen)
    return fit(x_train, y_train, x_val, y_val, wrn_cfg, train_cfg)


def fold_assignments(k: int, members: int) -> list[FoldAssignment]:
    """members == 1: folds 0..k-2 train, fold k-1 validates; otherwise member i validates on fold i."""
    folds = [fold_name(i) for i in range(k)]
    if members == 1:
        return [FoldAssignment(train_splits=set(folds[:-1]), val_splits={folds[-1]})]
    if members > k:
        raise InvalidArgumentError(f"{members} ensemble members need at least {members} folds")
    return [
        FoldAssignment(train_splits=set(folds) - {folds[i]}, val_splits={folds[i]})
        for i in range(members)
    ]


def train_ensemble(
    manifest: Manifest,
    root: str | Path,
    k: int,
    members: int,
    wrn_cfg: WrnConfig,
    train_cfg: TrainConfig,
    spectro_cfg: SpectroConfig,
    threads: int = 1,
) -> tuple[Ensemble, list[list[EpochRecord]]]:
    fold_records = [r for r in manifest if r.split.startswith("fold_")]
    loader_args = dict(
        root=root,
        spectro_cfg=spectro_cfg,
        height=wrn_cfg.input_h,
        width=wrn_cfg.input_w,
        include_phase=wrn_cfg.include_phase,
        threads=threads,
    )
    features, labels, _ = load_features(fold_records, **loader_args)
    splits = np.array([r.split for r in fold_records])

    models, histories = [], []
    for index, assignment in enumerate(fold_assignments(k, members)):
        train_mask = np.isin(splits, sorted(assignment.train_splits))
        val_mask = np.isin(splits, sorted(assignment.val_splits))
        logger.info("member_started", member=index, train=int(train_mask.sum()), val=int(val_mask.sum()))
        member_cfg = train_cfg.model_copy(update={"seed": train_cfg.seed + index})
        model, history = fit(
            features[train_mask], labels[train_mask], features[val_mask], labels[val_mask], wrn_cfg, member_cfg
        )
        models.append(model)
        histories.append(history)
    return Ensemble(models), histories


def save(model: WideResNet, path: str | Path) -> Path:
    return save_weights(model, model.config, path)


def load(path: str | Path) -> WideResNet:
    cfg, tensors = read_weights(path)
    model = build(cfg)
    state = model.state_dict()
    missing = set(state) - set(tensors)
    if missing:
        raise ShapeError(f"{path}: weight file lacks tensors {sorted(missing)[:3]}")
    restored = {}
    for name, reference in state.items():
        array = tensors[name]
        if tuple(array.shape) != tuple(reference.shape):
            raise ShapeError(f"{path}: tensor {name} has shape {array.shape}, expected {tuple(reference.shape)}")
        restored[name] = torch.from_numpy(array.copy()).to(reference.dtype)
    model.load_state_dict(restored)
    model.eval()
    return model


def load_ensemble(paths) -> Ensemble:
    return Ensemble([load(p) for p in paths])
