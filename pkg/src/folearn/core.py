"""Shared domain types: examples, datasets, losses, hypotheses and the two
training objectives (average loss and max loss).

All feature vectors are dense float64 arrays and labels live in {-1, +1}.
Loss values reported to callers are always truncated into [0, 1]; learners
that need untruncated surrogate gradients compute them internally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

LN2 = math.log(2.0)

MODEL_SCHEMA_VERSION = 1


class LossKind(Enum):
    ZERO_ONE = "zero_one"
    HINGE = "hinge"
    LOGISTIC = "logistic"


class DimensionMismatch(ValueError):
    """Raised when a hypothesis / example / dataset dimension disagreement is found."""


def _as_readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Example:
    """One labeled training point: feature vector x and label y in {-1, +1}."""

    features: np.ndarray
    label: float

    def __post_init__(self):
        object.__setattr__(self, "features", _as_readonly(self.features))
        if self.features.ndim != 1:
            raise ValueError("features must be a 1-d vector")
        if self.label not in (-1.0, 1.0, -1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label}")
        object.__setattr__(self, "label", float(self.label))

    @property
    def dim(self):
        return self.features.shape[0]


class Dataset:
    """An ordered, immutable collection of m >= 1 examples of equal dimension.

    Stored as a dense (m, d) feature matrix plus an (m,) label vector so that
    whole-set objective evaluation is vectorized.
    """

    def __init__(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d (m, d) array")
        if X.shape[0] < 1:
            raise ValueError("dataset must contain at least one example")
        if y.shape != (X.shape[0],):
            raise DimensionMismatch(
                f"labels shape {y.shape} does not match {X.shape[0]} examples"
            )
        bad = ~np.isin(y, (-1.0, 1.0))
        if bad.any():
            raise ValueError(f"labels must be -1/+1; offending rows: {np.flatnonzero(bad)[:5]}")
        self.X = _as_readonly(X)
        self.y = _as_readonly(y)

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, i) -> Example:
        return Example(self.X[i], float(self.y[i]))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx])


@dataclass(frozen=True)
class Hypothesis:
    """A linear predictor w: sign(<w, x>) for classification (ties to +1),
    raw <w, x> for real-valued output."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_readonly(self.weights))

    @property
    def dim(self):
        return self.weights.shape[0]

    def decision_value(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"x has dim {x.shape[-1]}, hypothesis has dim {self.dim}")
        return x @ self.weights

    def predict(self, x):
        v = self.decision_value(x)
        return np.where(np.asarray(v) >= 0.0, 1.0, -1.0) if np.ndim(v) else (1.0 if v >= 0.0 else -1.0)


class EnsembleMode(Enum):
    MAJORITY = "majority"
    AVERAGE = "average"


@dataclass(frozen=True)
class EnsembleHypothesis:
    """k weight snapshots combined by majority vote or by averaging.

    Majority is the classification combiner; averaging collapses to a single
    linear hypothesis because the predictor is linear in w.
    """

    members: tuple
    mode: EnsembleMode = EnsembleMode.MAJORITY

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("ensemble needs at least one member")
        d = self.members[0].dim
        for h in self.members:
            if h.dim != d:
                raise DimensionMismatch("ensemble members disagree on dimension")
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def k(self):
        return len(self.members)

    @property
    def dim(self):
        return self.members[0].dim

    def weight_matrix(self):
        return np.vstack([h.weights for h in self.members])

    def averaged(self) -> Hypothesis:
        """The single hypothesis with the mean weight vector."""
        return Hypothesis(self.weight_matrix().mean(axis=0))

    def predict(self, x):
        """Majority: sign of the sum of member sign-predictions (ties to +1).
        Average: mean decision value (a real number)."""
        x = np.asarray(x, dtype=np.float64)
        W = self.weight_matrix()
        if x.shape[-1] != W.shape[1]:
            raise DimensionMismatch(f"x has dim {x.shape[-1]}, ensemble has dim {W.shape[1]}")
        vals = x @ W.T
        if self.mode is EnsembleMode.AVERAGE:
            return vals.mean(axis=-1)
        votes = np.where(vals >= 0.0, 1.0, -1.0).sum(axis=-1)
        out = np.where(votes >= 0.0, 1.0, -1.0)
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def truncated_loss_from_margin(kind: LossKind, margin):
    """Loss as a function of the classification margin z = y * <w, x>,
    truncated into [0, 1]. Vectorized over `margin`."""
    z = np.asarray(margin, dtype=np.float64)
    if kind is LossKind.ZERO_ONE:
        out = np.where(z <= 0.0, 1.0, 0.0)
    elif kind is LossKind.HINGE:
        out = np.minimum(1.0, np.maximum(0.0, 1.0 - z))
    elif kind is LossKind.LOGISTIC:
        # log(1 + exp(-z)) / log 2, computed stably, then capped at 1
        out = np.minimum(1.0, np.logaddexp(0.0, -z) / LN2)
    else:  # pragma: no cover
        raise ValueError(f"unknown loss kind {kind}")
    return out if out.ndim else float(out)


def evaluate_loss(kind: LossKind, h: Hypothesis, e: Example) -> float:
    """Truncated loss of hypothesis h on example e; always in [0, 1]."""
    if h.dim != e.dim:
        raise DimensionMismatch(f"hypothesis dim {h.dim} != example dim {e.dim}")
    return float(truncated_loss_from_margin(kind, e.label * float(e.features @ h.weights)))


def loss_matrix(kind: LossKind, W, ds: Dataset):
    """(k, m) matrix of truncated losses for k weight rows over the dataset."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    if W.shape[1] != ds.dim:
        raise DimensionMismatch(f"weights dim {W.shape[1]} != dataset dim {ds.dim}")
    margins = ds.y[None, :] * (W @ ds.X.T)
    return truncated_loss_from_margin(kind, margins)


def _per_example_losses(kind, h, ds):
    if isinstance(h, EnsembleHypothesis):
        return loss_matrix(kind, h.weight_matrix(), ds).mean(axis=0)
    return loss_matrix(kind, h.weights[None, :], ds)[0]


def objective_max(kind: LossKind, h, ds: Dataset) -> float:
    """Max over examples of the (ensemble-averaged, for ensembles) loss."""
    if ds.m < 1:
        raise ValueError("empty dataset")
    return float(_per_example_losses(kind, h, ds).max())


def objective_avg(kind: LossKind, h, ds: Dataset) -> float:
    """Mean per-example (ensemble-averaged, for ensembles) loss."""
    if ds.m < 1:
        raise ValueError("empty dataset")
    return float(_per_example_losses(kind, h, ds).mean())


def training_mistakes(h, ds: Dataset) -> int:
    """Number of training examples misclassified by h (hypothesis or ensemble)."""
    preds = h.predict(ds.X)
    return int(np.sum(preds != ds.y))


# ---------------------------------------------------------------------------
# dataset CSV format: one row per example, first column the -1/+1 label,
# remaining d columns the features; optional header; UTF-8
# ---------------------------------------------------------------------------

class DatasetFormatError(ValueError):
    """Malformed dataset CSV; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def load_dataset_csv(path) -> Dataset:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            parts = [p.strip() for p in raw.split(",")]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise DatasetFormatError(f"non-numeric field in {parts!r}", line=lineno)
            if len(vals) < 2:
                raise DatasetFormatError("need a label plus at least one feature", line=lineno)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DatasetFormatError(
                    f"row has {len(vals)} columns, expected {width}", line=lineno
                )
            if vals[0] not in (-1.0, 1.0):
                raise DatasetFormatError(f"label must be -1 or +1, got {vals[0]}", line=lineno)
            rows.append(vals)
    if not rows:
        raise DatasetFormatError("no data rows found")
    arr = np.asarray(rows, dtype=np.float64)
    return Dataset(arr[:, 1:], arr[:, 0])


def save_dataset_csv(ds: Dataset, path, header=False):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write(",".join(["label"] + [f"x{j}" for j in range(ds.dim)]) + "\n")
        for i in range(ds.m):
            fields = [repr(float(ds.y[i]))] + [repr(float(v)) for v in ds.X[i]]
            fh.write(",".join(fields) + "\n")


# ---------------------------------------------------------------------------
# model JSON (schema_version pinned for forward compatibility)
# ---------------------------------------------------------------------------

def hypothesis_to_json(h: Hypothesis, kind="linear") -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": kind,
        "d": h.dim,
        "weights": [float(v) for v in h.weights],
    }


def ensemble_to_json(ens: EnsembleHypothesis) -> dict:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": "ensemble",
        "mode": ens.mode.value,
        "d": ens.dim,
        "members": [[float(v) for v in h.weights] for h in ens.members],
    }
    if ens.mode is EnsembleMode.AVERAGE:
        doc["average_weights"] = [float(v) for v in ens.averaged().weights]
    return doc


def model_from_json(doc: dict):
    if doc.get("kind") == "ensemble":
        members = tuple(Hypothesis(np.asarray(w)) for w in doc["members"])
        return EnsembleHypothesis(members, EnsembleMode(doc["mode"]))
    return Hypothesis(np.asarray(doc["weights"]))


def dump_model(model, path):
    doc = ensemble_to_json(model) if isinstance(model, EnsembleHypothesis) else hypothesis_to_json(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
