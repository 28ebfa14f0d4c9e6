"""Training loops: epoch fitting, curriculum pre-training, ensemble fine-tuning.

Improvement for early stopping and learning-rate decay is measured on
validation accuracy. The best-validation weights (including batch-norm
running stats) are restored at the end of every fit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint  # noqa: F401  (re-exported)
from .data.datasets import LabeledDataset
from .errors import ConfigError, TrainingError
from .models import EnsembleModel
from .nn import Network, SGD, cross_entropy

__all__ = [
    "CurriculumSpec",
    "OptimizerConfig",
    "StoppingPolicy",
    "TrainReport",
    "concat_datasets",
    "curriculum_fit",
    "ensemble_accuracy",
    "finetune_ensemble",
    "fit",
    "load_checkpoint",
    "save_checkpoint",
    "stratified_subset",
]


@dataclass
class OptimizerConfig:
    lr: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64


@dataclass
class StoppingPolicy:
    early_stop_patience: int = 10
    lr_decay_factor: float = 0.5
    lr_decay_patience: int = 3
    min_lr: float = 1e-5

    def __post_init__(self):
        if self.early_stop_patience < 1 or self.lr_decay_patience < 1:
            raise ConfigError("patience values must be >= 1")
        if not (0.0 < self.lr_decay_factor < 1.0):
            raise ConfigError("lr decay factor must be in (0, 1)")


@dataclass
class CurriculumSpec:
    """Small-subset pre-training followed by the full pool (full-scale
    reference counts: 160_000 then 1_250_400 windows)."""

    stage1_windows: int = 160_000
    stage2_windows: int = 1_250_400
    stage1_epochs: int = 20
    stage2_epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.stage1_windows >= self.stage2_windows:
            raise ConfigError("stage 1 must be smaller than stage 2")


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)  # dicts: epoch, lr, train_loss, val_loss, val_acc
    stop_reason: str = ""
    wall_time_s: float = 0.0
    best_epoch: int = 0
    best_val_acc: float = 0.0
    checkpoint_path: str = ""
    warnings: list = field(default_factory=list)

    def record(self, epoch: int, lr: float, train_loss: float, val_loss: float, val_acc: float):
        self.epochs.append(
            {"epoch": epoch, "lr": lr, "train_loss": train_loss, "val_loss": val_loss, "val_acc": val_acc}
        )

    @property
    def val_accuracies(self) -> list[float]:
        return [e["val_acc"] for e in self.epochs]

    def to_csv(self) -> str:
        lines = ["epoch,lr,train_loss,val_loss,val_acc"]
        for e in self.epochs:
            lines.append(
                f"{e['epoch']},{e['lr']:.8g},{e['train_loss']:.6f},{e['val_loss']:.6f},{e['val_acc']:.6f}"
            )
        lines.append(
            f"# stop_reason={self.stop_reason} best_epoch={self.best_epoch} "
            f"best_val_acc={self.best_val_acc:.6f} wall_time_s={self.wall_time_s:.2f}"
        )
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Path) -> None:
        Path(path).write_text(self.to_csv())


def _check_disjoint(train_set: LabeledDataset, val_set: LabeledDataset) -> None:
    tr = {tuple(s) for s in train_set.sources}
    va = {tuple(s) for s in val_set.sources}
    if tr & va:
        raise ConfigError(f"train and val share {len(tr & va)} windows")


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def eval_network(net: Network, ds: LabeledDataset, batch_size: int = 256) -> tuple[float, float]:
    """(mean cross-entropy, accuracy) over a dataset in eval mode."""
    net.eval()
    total_loss, correct = 0.0, 0
    for start in range(0, len(ds), batch_size):
        x = ds.windows[start : start + batch_size]
        y = ds.labels[start : start + batch_size]
        logits = net.forward(x)
        loss, _ = cross_entropy(logits, y)
        total_loss += loss * len(y)
        correct += int((logits.argmax(axis=1) == y).sum())
    return total_loss / len(ds), correct / len(ds)


def fit(
    net: Network,
    train_set: LabeledDataset,
    val_set: LabeledDataset,
    policy: StoppingPolicy | None = None,
    opt: OptimizerConfig | None = None,
    max_epochs: int = 50,
    seed: int = 0,
    verbose: bool = False,
) -> tuple[Network, TrainReport]:
    """Epochs of shuffled mini-batches with val-accuracy-driven stopping."""
    policy = policy or StoppingPolicy()
    opt = opt or OptimizerConfig()
    if len(train_set) == 0:
        raise ConfigError("empty train set")
    _check_disjoint(train_set, val_set)

    optimizer = SGD(net.parameters(), lr=opt.lr, momentum=opt.momentum)
    report = TrainReport()
    best_state = net.copy_state()
    best_acc, best_epoch = -1.0, 0
    stall_stop, stall_decay = 0, 0
    t0 = time.perf_counter()

    for epoch in range(1, max_epochs + 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, epoch]))
        net.train()
        losses = []
        for idx in _batches(len(train_set), opt.batch_size, rng):
            logits = net.forward(train_set.windows[idx])
            loss, dlogits = cross_entropy(logits, train_set.labels[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss at epoch {epoch}")
            net.zero_grad()
            net.backward(dlogits)
            optimizer.step()
            losses.append(loss)
        train_loss = float(np.mean(losses))
        val_loss, val_acc = eval_network(net, val_set, opt.batch_size * 4)
        report.record(epoch, optimizer.lr, train_loss, val_loss, val_acc)
        if verbose:
            print(
                f"epoch {epoch:3d}  lr {optimizer.lr:.2e}  train {train_loss:.4f}  "
                f"val {val_loss:.4f}  acc {val_acc:.4f}"
            )

        if val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best_state = net.copy_state()
            stall_stop = stall_decay = 0
        else:
            stall_stop += 1
            stall_decay += 1
            if stall_decay >= policy.lr_decay_patience:
                optimizer.lr = max(optimizer.lr * policy.lr_decay_factor, policy.min_lr)
                stall_decay = 0
            if stall_stop >= policy.early_stop_patience:
                report.stop_reason = "early_stop"
                break
    else:
        report.stop_reason = "max_epochs"

    net.load_state_arrays(best_state)
    report.best_epoch = best_epoch
    report.best_val_acc = best_acc
    report.wall_time_s = time.perf_counter() - t0
    return net, report


def stratified_subset(ds: LabeledDataset, n_windows: int, seed: int) -> LabeledDataset:
    """Seeded per-class draw of ~n_windows windows (equal counts per class)."""
    per_class = n_windows // ds.n_classes
    rng = np.random.default_rng(seed)
    picks = []
    for c in range(ds.n_classes):
        ix = np.flatnonzero(ds.labels == c)
        if len(ix) < per_class:
            raise ConfigError(f"class {c} has {len(ix)} windows, need {per_class}")
        picks.append(rng.permutation(ix)[:per_class])
    return ds.subset(rng.permutation(np.concatenate(picks)))


def curriculum_fit(
    net: Network,
    train_set: LabeledDataset,
    val_set: LabeledDataset,
    curriculum: CurriculumSpec,
    policy: StoppingPolicy | None = None,
    opt: OptimizerConfig | None = None,
    verbose: bool = False,
) -> tuple[Network, TrainReport, TrainReport]:
    """Stage 1 on a seeded stratified subset, stage 2 on the larger pool.

    Stage 1 windows are drawn from the stage 2 pool, so every stage 1 window
    appears again in stage 2.
    """
    if len(train_set) < curriculum.stage2_windows:
        raise ConfigError(
            f"curriculum needs {curriculum.stage2_windows} windows, have {len(train_set)}"
        )
    stage2 = stratified_subset(train_set, curriculum.stage2_windows, curriculum.seed)
    stage1 = stratified_subset(stage2, curriculum.stage1_windows, curriculum.seed + 1)
    net, report1 = fit(
        net, stage1, val_set, policy, opt,
        max_epochs=curriculum.stage1_epochs, seed=curriculum.seed, verbose=verbose,
    )
    net, report2 = fit(
        net, stage2, val_set, policy, opt,
        max_epochs=curriculum.stage2_epochs, seed=curriculum.seed + 1, verbose=verbose,
    )
    return net, report1, report2


def concat_datasets(parts: list[LabeledDataset], split: str = "") -> LabeledDataset:
    """Concatenate datasets sharing one label space (e.g. per-distance device sets)."""
    names = parts[0].label_names
    for p in parts[1:]:
        if p.label_names != names:
            raise ConfigError("datasets have different label spaces")
    return LabeledDataset(
        windows=np.concatenate([p.windows for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        task=parts[0].task,
        label_names=names,
        split=split or parts[0].split,
        sources=np.concatenate([p.sources for p in parts]),
    )


def ensemble_accuracy(ens: EnsembleModel, ds: LabeledDataset, batch_size: int = 512) -> float:
    """End-to-end device accuracy of the masked ensemble on device-labeled data."""
    from .models import ensemble_predict_batch

    correct = 0
    for start in range(0, len(ds), batch_size):
        x = ds.windows[start : start + batch_size]
        y = ds.labels[start : start + batch_size]
        _, m_idx, _ = ensemble_predict_batch(ens, x)
        correct += int((m_idx == y).sum())
    return correct / len(ds)


def finetune_ensemble(
    ens: EnsembleModel,
    train_set: LabeledDataset,
    val_set: LabeledDataset,
    policy: StoppingPolicy | None = None,
    opt: OptimizerConfig | None = None,
    max_epochs: int = 10,
    seed: int = 0,
    verbose: bool = False,
) -> tuple[EnsembleModel, TrainReport]:
    """Route windows through the frozen distance classifier and update only
    the selected device model on each window's device label.

    The distance classifier receives no gradients; device models other than
    the routed one receive none for a given window. Improvement is tracked on
    end-to-end ensemble accuracy over the validation set.
    """
    policy = policy or StoppingPolicy()
    opt = opt or OptimizerConfig()
    if len(train_set) == 0:
        raise ConfigError("empty fine-tuning set")
    _check_disjoint(train_set, val_set)

    dist_state = ens.distance_model.net.copy_state()  # freeze contract check
    optimizers = [SGD(m.net.parameters(), lr=opt.lr, momentum=opt.momentum) for m in ens.device_models]
    report = TrainReport()
    best_states = [m.net.copy_state() for m in ens.device_models]
    best_acc = ensemble_accuracy(ens, val_set)
    report.record(0, opt.lr, float("nan"), float("nan"), best_acc)
    best_epoch = 0
    stall_stop, stall_decay = 0, 0
    routed_counts = np.zeros(ens.n_distances, dtype=np.int64)
    t0 = time.perf_counter()

    for epoch in range(1, max_epochs + 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, epoch]))
        losses = []
        for idx in _batches(len(train_set), opt.batch_size, rng):
            x = train_set.windows[idx]
            y = train_set.labels[idx]
            d_logits = ens.distance_model.net.eval().forward(x)
            d_idx = d_logits.argmax(axis=1)
            for k in np.unique(d_idx):
                rows = d_idx == k
                routed_counts[k] += int(rows.sum())
                net = ens.device_models[k].net
                net.train()
                logits = net.forward(x[rows])
                loss, dlogits = cross_entropy(logits, y[rows])
                if not np.isfinite(loss):
                    raise TrainingError(f"non-finite fine-tuning loss at epoch {epoch}")
                net.zero_grad()
                net.backward(dlogits)
                optimizers[k].step()
                losses.append(loss * rows.sum())
        train_loss = float(np.sum(losses) / len(train_set))
        val_acc = ensemble_accuracy(ens, val_set)
        report.record(epoch, optimizers[0].lr, train_loss, float("nan"), val_acc)
        if verbose:
            print(f"finetune epoch {epoch:3d}  train {train_loss:.4f}  ensemble acc {val_acc:.4f}")

        if val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best_states = [m.net.copy_state() for m in ens.device_models]
            stall_stop = stall_decay = 0
        else:
            stall_stop += 1
            stall_decay += 1
            if stall_decay >= policy.lr_decay_patience:
                for o in optimizers:
                    o.lr = max(o.lr * policy.lr_decay_factor, policy.min_lr)
                stall_decay = 0
            if stall_stop >= policy.early_stop_patience:
                report.stop_reason = "early_stop"
                break
    else:
        report.stop_reason = "max_epochs"

    for model, state in zip(ens.device_models, best_states):
        model.net.load_state_arrays(state)
    for a, b in zip(ens.distance_model.net.state_arrays(), dist_state):
        assert np.array_equal(a, b), "distance classifier changed during fine-tuning"
    for k, count in enumerate(routed_counts):
        if count == 0:
            report.warnings.append(
                f"device model for {ens.device_models[k].distance_ft:g}ft received no routed windows"
            )
    report.best_epoch = best_epoch
    report.best_val_acc = best_acc
    report.wall_time_s = time.perf_counter() - t0
    return ens, report
