"""Downstream probes and metrics: pixel classification, index forecasting,
and land-cover classification over frozen or fine-tuned encoders.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .cube import SitsCube
from .encoder import Encoder, encode
from .errors import ConfigError, DomainError
from .nn import Linear
from .optim import AdamState, adam_step
from .patches import extract_patch_series, sample_pixels, slice_patches
from .recurrence import bilinear_resize, stack_channels
from .tensor import Tensor, mean_all, mul, no_grad, relu, softmax_cross_entropy_rows, sub
from .indices import INDEX_CHANNELS

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# metrics


def confusion_matrix(y_true, y_pred, classes) -> np.ndarray:
    index = {int(c): i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        ti, pi = index.get(int(t)), index.get(int(p))
        if ti is not None and pi is not None:
            cm[ti, pi] += 1
    return cm


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    return float(np.mean(y_true == np.asarray(y_pred))) if y_true.size else 0.0


def balanced_accuracy(y_true, y_pred) -> float:
    """Unweighted mean of per-class recalls over classes present in y_true."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    recalls = []
    for c in np.unique(y_true):
        mask = y_true == c
        recalls.append(float(np.mean(y_pred[mask] == c)))
    return float(np.mean(recalls)) if recalls else 0.0


def macro_f1(y_true, y_pred) -> float:
    """Mean per-class F1 over classes present in y_true (0 when undefined)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    scores = []
    for c in np.unique(y_true):
        tp = float(np.sum((y_pred == c) & (y_true == c)))
        fp = float(np.sum((y_pred == c) & (y_true != c)))
        fn = float(np.sum((y_pred != c) & (y_true == c)))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores)) if scores else 0.0


@dataclass
class MetricsReport:
    task_id: str
    model: str = ""
    acc: float | None = None
    balanced_acc: float | None = None
    f1: float | None = None
    mae: float | None = None
    mse: float | None = None
    rmse: float | None = None
    per_index: dict[str, dict[str, float]] = field(default_factory=dict)
    confusion: list[list[int]] | None = None
    classes: list[int] | None = None
    support: dict[str, int] = field(default_factory=dict)
    excluded_classes: list[int] = field(default_factory=list)
    skipped_samples: int = 0

    def to_json(self) -> str:
        doc = {k: v for k, v in vars(self).items() if v is not None}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        rows = ["metric,value"]
        for key in ("acc", "balanced_acc", "f1", "mae", "mse", "rmse"):
            value = getattr(self, key)
            if value is not None:
                rows.append(f"{key},{value:.6f}")
        for name in sorted(self.per_index):
            for key in sorted(self.per_index[name]):
                rows.append(f"{name}_{key},{self.per_index[name][key]:.6f}")
        return "\n".join(rows) + "\n"

    def confusion_csv(self) -> str:
        if self.confusion is None:
            return ""
        header = "true\\pred," + ",".join(str(c) for c in self.classes)
        rows = [header]
        for c, row in zip(self.classes, self.confusion):
            rows.append(f"{c}," + ",".join(str(v) for v in row))
        return "\n".join(rows) + "\n"


def classification_report(task_id: str, y_true, y_pred, model="", excluded=(), skipped=0) -> MetricsReport:
    classes = sorted(
        {int(c) for c in np.unique(np.asarray(y_true))}
        | {int(c) for c in np.unique(np.asarray(y_pred))}
    )
    cm = confusion_matrix(y_true, y_pred, classes)
    return MetricsReport(
        task_id=task_id,
        model=model,
        acc=accuracy(y_true, y_pred),
        balanced_acc=balanced_accuracy(y_true, y_pred),
        f1=macro_f1(y_true, y_pred),
        confusion=cm.tolist(),
        classes=classes,
        support={str(c): int(np.sum(np.asarray(y_true) == c)) for c in classes},
        excluded_classes=sorted(int(c) for c in excluded),
        skipped_samples=skipped,
    )


def forecast_report(task_id: str, y_true, y_pred, model="", skipped=0) -> MetricsReport:
    """Per-index and overall MAE/MSE/RMSE; arrays are (n, 3, horizon)."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise DomainError(f"target shape {y_true.shape} != prediction shape {y_pred.shape}")
    err = y_pred - y_true
    per_index = {}
    for k, name in enumerate(INDEX_CHANNELS):
        mse = float(np.mean(err[:, k] ** 2))
        per_index[name] = {
            "mae": float(np.mean(np.abs(err[:, k]))),
            "mse": mse,
            "rmse": float(np.sqrt(mse)),
        }
    mse = float(np.mean(err**2))
    return MetricsReport(
        task_id=task_id,
        model=model,
        mae=float(np.mean(np.abs(err))),
        mse=mse,
        rmse=float(np.sqrt(mse)),
        per_index=per_index,
        skipped_samples=skipped,
    )


def compare_runs(reports: list[MetricsReport]) -> str:
    """Deterministic ranking table (CSV) across reports of the same task."""
    rows = ["task,model,acc,balanced_acc,f1,mae,mse,rmse"]

    def sort_key(r: MetricsReport):
        primary = -(r.acc if r.acc is not None else -(r.mae if r.mae is not None else 0.0))
        return (r.task_id, primary, r.model)

    for r in sorted(reports, key=sort_key):
        cells = [r.task_id, r.model]
        for key in ("acc", "balanced_acc", "f1", "mae", "mse", "rmse"):
            v = getattr(r, key)
            cells.append("" if v is None else f"{v:.6f}")
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# probe heads


@dataclass
class ProbeConfig:
    epochs: int = 100
    lr: float = 1e-3
    weight_decay: float = 0.0
    batch_size: int = 64
    seed: int = 0
    hidden: int | None = None  # optional single hidden layer
    finetune: bool = False
    finetune_lr: float | None = None  # defaults to lr / 10


class ProbeHead:
    """Linear (optionally one-hidden-layer) map from embeddings."""

    def __init__(self, embed_dim: int, out_dim: int, hidden: int | None, seed: int):
        rng = np.random.default_rng([seed, 101])
        self.hidden = None
        if hidden:
            self.hidden = Linear(embed_dim, hidden, rng=rng)
            self.out = Linear(hidden, out_dim, rng=rng)
        else:
            self.out = Linear(embed_dim, out_dim, rng=rng)

    def __call__(self, feats: Tensor) -> Tensor:
        if self.hidden is not None:
            feats = relu(self.hidden(feats))
        return self.out(feats)

    def params(self) -> dict[str, Tensor]:
        out = self.out.params("head.out")
        if self.hidden is not None:
            out.update(self.hidden.params("head.hidden"))
        return out


def embed_batches(encoder: Encoder, images: np.ndarray, batch: int = 128) -> np.ndarray:
    """Eval-mode embeddings of an (n, 3, s, s) array, without a tape."""
    outs = []
    with no_grad():
        for i in range(0, len(images), batch):
            outs.append(encode(encoder, images[i : i + batch], train=False).data)
    return np.concatenate(outs, axis=0)


def params_checksum(encoder: Encoder) -> str:
    """Digest of all parameters and buffers; detects any mutation."""
    digest = hashlib.sha256()
    for name, p in sorted(encoder.params().items()):
        digest.update(name.encode())
        digest.update(p.data.tobytes())
    for name, b in sorted(encoder.buffers().items()):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(b).tobytes())
    return digest.hexdigest()


def _mse_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = sub(pred, Tensor(target))
    return mean_all(mul(diff, diff))


def train_probe(
    encoder: Encoder,
    images: np.ndarray,
    targets: np.ndarray,
    out_dim: int,
    config: ProbeConfig,
    kind: str = "classifier",
) -> ProbeHead:
    """Fit a head on encoder features; optionally fine-tune the encoder.

    ``kind`` is "classifier" (integer targets, cross entropy) or
    "forecaster" (float targets flattened to out_dim, mean squared error).
    """
    if kind not in ("classifier", "forecaster"):
        raise DomainError(f"unknown probe kind '{kind}'")
    head = ProbeHead(encoder.config.embed_dim, out_dim, config.hidden, config.seed)
    head_opt = AdamState(lr=config.lr, weight_decay=config.weight_decay)
    enc_opt = None
    if config.finetune:
        enc_lr = config.finetune_lr if config.finetune_lr is not None else config.lr / 10.0
        enc_opt = AdamState(lr=enc_lr, weight_decay=config.weight_decay)
    feats_cache = None if config.finetune else embed_batches(encoder, images)

    n = len(images)
    head_params = head.params()
    enc_params = encoder.params() if config.finetune else {}
    for epoch in range(config.epochs):
        rng = np.random.default_rng([config.seed, 31, epoch])
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            if config.finetune:
                feats = encode(encoder, images[idx], train=True)
            else:
                feats = Tensor(feats_cache[idx])
            pred = head(feats)
            if kind == "classifier":
                loss = softmax_cross_entropy_rows(pred, targets[idx])
            else:
                loss = _mse_loss(pred, targets[idx].reshape(len(idx), -1))
            loss.backward()
            adam_step(head_params, head_opt)
            if enc_opt is not None:
                adam_step(enc_params, enc_opt)
    return head


def predict_probe(encoder: Encoder, head: ProbeHead, images: np.ndarray, batch: int = 128) -> np.ndarray:
    feats = embed_batches(encoder, images, batch=batch)
    with no_grad():
        outs = []
        for i in range(0, len(feats), batch):
            outs.append(head(Tensor(feats[i : i + batch])).data)
    return np.concatenate(outs, axis=0)


# ---------------------------------------------------------------------------
# labeled sets built from cubes


@dataclass
class LabeledPlotSet:
    """Plot images with per-pixel class labels (pixel classification)."""

    plots: np.ndarray  # (n, 3, s, s)
    labels: np.ndarray  # (n,)
    series: np.ndarray | None = None  # (n, 3, t) source series, kept for forecasting


def labeled_pixel_set(
    cube: SitsCube,
    labels: np.ndarray,
    ps: int,
    input_size: int,
    pixels_per_cube: int = 200,
    seed: int = 0,
    exclude_hilbert_m: int | None = None,
    exclude_labels: tuple = (),
) -> LabeledPlotSet:
    """Random-mode evaluation pixels, disjoint from the SSL Hilbert pixels.

    ``exclude_hilbert_m`` reproduces the Hilbert selection of that size so
    the evaluation sample avoids it.
    """
    if labels.shape != (cube.height, cube.width):
        raise ConfigError(f"label raster {labels.shape} != cube extent {(cube.height, cube.width)}")
    grid = slice_patches(cube, ps)
    per_patch = -(-pixels_per_cube // len(grid.patches))
    plots, ys, series_rows = [], [], []
    for pi, patch in enumerate(grid.patches):
        exclude = None
        if exclude_hilbert_m:
            exclude = set(sample_pixels(ps, "hilbert", exclude_hilbert_m))
        take = min(per_patch, ps * ps - (len(exclude) if exclude else 0))
        sset = extract_patch_series(
            cube, patch, ps, "random", take, seed=[seed, 13, pi], exclude=exclude
        )
        for k in range(sset.m):
            r, c = sset.pixels[k]
            label = int(labels[r, c])
            if label in exclude_labels:
                continue
            img = stack_channels(sset.series[k], pixel=(r, c))
            plots.append(bilinear_resize(img.data, input_size))
            ys.append(label)
            series_rows.append(sset.series[k])
    if not plots:
        raise ConfigError("no labeled pixels selected")
    order = np.random.default_rng([seed, 17]).permutation(len(plots))[:pixels_per_cube]
    return LabeledPlotSet(
        plots=np.stack(plots)[order].astype(np.float32),
        labels=np.asarray(ys, dtype=np.int64)[order],
        series=np.stack(series_rows)[order].astype(np.float32),
    )


def merge_plot_sets(sets: list[LabeledPlotSet]) -> LabeledPlotSet:
    return LabeledPlotSet(
        plots=np.concatenate([s.plots for s in sets]),
        labels=np.concatenate([s.labels for s in sets]),
        series=(
            np.concatenate([s.series for s in sets])
            if all(s.series is not None for s in sets)
            else None
        ),
    )


# ---------------------------------------------------------------------------
# the three protocols


def classify_pixels(
    encoder: Encoder,
    train_set: LabeledPlotSet,
    test_set: LabeledPlotSet,
    config: ProbeConfig,
    model: str = "plot-encoder",
) -> MetricsReport:
    """Plot -> embedding -> linear head, reported on the held-out split."""
    train_classes = set(int(c) for c in np.unique(train_set.labels))
    test_classes = set(int(c) for c in np.unique(test_set.labels))
    missing = sorted(test_classes - train_classes)
    keep = np.isin(test_set.labels, sorted(train_classes))
    if missing:
        log.warning("classes %s absent from train split; excluded from evaluation", missing)
    classes = sorted(train_classes)
    remap = {c: i for i, c in enumerate(classes)}
    y_train = np.array([remap[int(c)] for c in train_set.labels])
    head = train_probe(encoder, train_set.plots, y_train, len(classes), config)
    logits = predict_probe(encoder, head, test_set.plots[keep])
    y_pred = np.array([classes[i] for i in np.argmax(logits, axis=1)])
    return classification_report(
        "pixel-classification",
        test_set.labels[keep],
        y_pred,
        model=model,
        excluded=missing,
        skipped=int(np.sum(~keep)),
    )


def build_forecast_windows(
    series: np.ndarray, context: int, horizon: int, input_size: int
) -> tuple[np.ndarray, np.ndarray, int]:
    """Split (n, 3, t) series into plot images of the context and targets.

    Returns (X (n,3,s,s), Y (n,3,horizon), skipped) where series shorter
    than context+horizon are skipped and counted.
    """
    xs, ys, skipped = [], [], 0
    for row in series:
        if row.shape[1] < context + horizon:
            skipped += 1
            continue
        img = stack_channels(row[:, :context])
        xs.append(bilinear_resize(img.data, input_size))
        ys.append(row[:, context : context + horizon])
    if not xs:
        raise DomainError(f"no series long enough for context {context} + horizon {horizon}")
    return np.stack(xs).astype(np.float32), np.stack(ys).astype(np.float32), skipped


def forecast_index(
    encoder: Encoder,
    train_series: np.ndarray,
    test_series: np.ndarray,
    config: ProbeConfig,
    horizon: int = 10,
    context: int = 32,
    model: str = "plot-encoder",
) -> MetricsReport:
    """Plot of the context window -> embedding -> linear 3 x horizon head."""
    x_tr, y_tr, skip_tr = build_forecast_windows(train_series, context, horizon, encoder.config.input_size)
    x_te, y_te, skip_te = build_forecast_windows(test_series, context, horizon, encoder.config.input_size)
    head = train_probe(encoder, x_tr, y_tr, 3 * horizon, config, kind="forecaster")
    pred = predict_probe(encoder, head, x_te).reshape(-1, 3, horizon)
    return forecast_report(
        "index-forecasting", y_te, pred, model=model, skipped=skip_tr + skip_te
    )


def classify_landcover(
    encoder: Encoder,
    train_images: np.ndarray,
    train_labels: np.ndarray,
    test_images: np.ndarray,
    test_labels: np.ndarray,
    config: ProbeConfig,
    model: str = "image-encoder",
) -> MetricsReport:
    """Image -> embedding -> linear head over scene-level labels."""
    classes = sorted(int(c) for c in np.unique(train_labels))
    remap = {c: i for i, c in enumerate(classes)}
    missing = sorted(set(int(c) for c in np.unique(test_labels)) - set(classes))
    keep = np.isin(test_labels, classes)
    if missing:
        log.warning("classes %s absent from train split; excluded from evaluation", missing)
    y_train = np.array([remap[int(c)] for c in train_labels])
    head = train_probe(encoder, train_images, y_train, len(classes), config)
    logits = predict_probe(encoder, head, test_images[keep])
    y_pred = np.array([classes[i] for i in np.argmax(logits, axis=1)])
    return classification_report(
        "landcover-classification",
        test_labels[keep],
        y_pred,
        model=model,
        excluded=missing,
        skipped=int(np.sum(~keep)),
    )
