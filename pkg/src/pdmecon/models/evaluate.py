"""RMSE metric and the walk-forward evaluation harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..features import LagSpec, make_lag_matrix, walk_forward_splits
from .linear import fit_ols, predict_linear
from .ensemble import (
    BOOST_DEFAULTS,
    FOREST_DEFAULTS,
    fit_boost,
    fit_forest,
    predict_boost,
    predict_forest,
)
from .tree import TreeParams, predict_tree

MODEL_KINDS = ("linear", "forest", "boost")

KIND_LABELS = {
    "linear": "Linear Regression",
    "forest": "Random Forest",
    "boost": "Gradient Boosting",
}


def rmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Root mean square error: sqrt of the mean squared prediction error."""
    y = np.asarray(y, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if len(y) == 0:
        raise ValidationError("rmse of empty vectors is undefined")
    if len(y) != len(y_hat):
        raise ValidationError(f"length mismatch: {len(y)} vs {len(y_hat)}")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


@dataclass(frozen=True)
class EvalReport:
    model_kind: str
    per_split_rmse: tuple[float, ...]
    average_rmse: float

    def __post_init__(self):
        object.__setattr__(self, "per_split_rmse", tuple(self.per_split_rmse))
        if not self.per_split_rmse:
            raise ValidationError("report needs at least one split")
        mean = float(np.mean(self.per_split_rmse))
        if abs(self.average_rmse - mean) > 1e-9:
            raise ValidationError(
                f"average_rmse {self.average_rmse} is not the mean of the splits ({mean})"
            )

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "per_split_rmse": list(self.per_split_rmse),
            "average_rmse": self.average_rmse,
        }


def _tree_params(hp: dict, defaults: TreeParams) -> TreeParams:
    return TreeParams(
        max_depth=hp.get("max_depth", defaults.max_depth),
        min_samples_leaf=hp.get("min_samples_leaf", defaults.min_samples_leaf),
    )


def fit_model(kind: str, X: np.ndarray, y: np.ndarray, hyperparams: dict | None = None, seed: int = 0):
    """Fit one of the three regressor kinds with the given hyperparameters."""
    hp = dict(hyperparams or {})
    if kind == "linear":
        _reject_unknown(hp, set(), kind)
        return fit_ols(X, y)
    if kind == "forest":
        _reject_unknown(hp, {"n_trees", "max_depth", "min_samples_leaf", "bootstrap"}, kind)
        return fit_forest(
            X,
            y,
            n_trees=hp.get("n_trees", 100),
            params=_tree_params(hp, FOREST_DEFAULTS),
            seed=seed,
            bootstrap=hp.get("bootstrap", True),
        )
    if kind == "boost":
        _reject_unknown(hp, {"n_stages", "learning_rate", "max_depth", "min_samples_leaf"}, kind)
        return fit_boost(
            X,
            y,
            n_stages=hp.get("n_stages", 100),
            learning_rate=hp.get("learning_rate", 0.1),
            params=_tree_params(hp, BOOST_DEFAULTS),
            seed=seed,
        )
    raise ValidationError(f"unknown model kind '{kind}'; expected one of {MODEL_KINDS}")


def predict(model, X: np.ndarray) -> np.ndarray:
    """Uniform prediction contract over every model kind."""
    from .linear import LinearModel
    from .ensemble import BoostModel, ForestModel
    from .tree import RegressionTree

    if isinstance(model, LinearModel):
        return predict_linear(model, X)
    if isinstance(model, ForestModel):
        return predict_forest(model, X)
    if isinstance(model, BoostModel):
        return predict_boost(model, X)
    if isinstance(model, RegressionTree):
        return predict_tree(model, X)
    raise ValidationError(f"cannot predict with object of type {type(model).__name__}")


def evaluate_cv(
    series,
    lag_spec: LagSpec,
    k: int,
    model_kind: str,
    hyperparams: dict | None = None,
    seed: int = 0,
) -> EvalReport:
    """Walk-forward evaluation: fit a fresh model per fold, report test RMSE.

    The report has one RMSE per split plus their arithmetic mean, mirroring
    the shape of a per-split results table.
    """
    supervised = make_lag_matrix(series, lag_spec)
    plan = walk_forward_splits(supervised.n_rows, k)
    per_split = []
    for fold in plan.folds:
        tr, te = fold.train_indices, fold.test_indices
        model = fit_model(model_kind, supervised.X[tr], supervised.y[tr], hyperparams, seed)
        per_split.append(rmse(supervised.y[te], predict(model, supervised.X[te])))
    return EvalReport(
        model_kind=model_kind,
        per_split_rmse=tuple(per_split),
        average_rmse=float(np.mean(per_split)),
    )


def format_eval_table(reports: list[EvalReport]) -> str:
    """Aligned text table: one row per split plus an Average row."""
    if not reports:
        raise ValidationError("no reports to format")
    n_splits = len(reports[0].per_split_rmse)
    if any(len(r.per_split_rmse) != n_splits for r in reports):
        raise ValidationError("reports disagree on split count")
    headers = ["Split Number"] + [
        f"{KIND_LABELS.get(r.model_kind, r.model_kind)} RMSE (kPa)" for r in reports
    ]
    rows = []
    for i in range(n_splits):
        rows.append([str(i + 1)] + [f"{r.per_split_rmse[i]:.2f}" for r in reports])
    rows.append(["Average"] + [f"{r.average_rmse:.2f}" for r in reports])
    widths = [max(len(h), *(len(row[c]) for row in rows)) for c, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def _reject_unknown(hp: dict, allowed: set, kind: str) -> None:
    unknown = set(hp) - allowed
    if unknown:
        raise ValidationError(
            f"unknown hyperparameters for '{kind}': {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
