"""Versioned JSON serialization for trained models.

Trees serialize as nested {"f", "t", "l", "r"} / {"v"} dicts; the walkers are
iterative because unlimited-depth trees can exceed the recursion limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ValidationError
from ..features import LagSpec
from .ensemble import BoostModel, ForestModel
from .linear import LinearModel
from .tree import RegressionTree, TreeNode, TreeParams

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LoadedModel:
    model: object
    kind: str
    seed: int
    lag_spec: LagSpec | None


def _tree_to_dict(tree: RegressionTree) -> dict:
    wrapper: dict = {}
    stack = [(tree.root, wrapper, "root")]
    while stack:
        node, holder, key = stack.pop()
        if node.is_leaf:
            holder[key] = {"v": node.value}
        else:
            encoded: dict = {"f": node.feature, "t": node.threshold}
            holder[key] = encoded
            stack.append((node.left, encoded, "l"))
            stack.append((node.right, encoded, "r"))
    return {
        "root": wrapper["root"],
        "params": tree.params.to_dict(),
        "n_features": tree.n_features,
    }


def _tree_from_dict(doc: dict) -> RegressionTree:
    root = TreeNode()
    stack = [(doc["root"], root)]
    while stack:
        encoded, node = stack.pop()
        if "v" in encoded:
            node.value = float(encoded["v"])
        else:
            node.feature = int(encoded["f"])
            node.threshold = float(encoded["t"])
            node.left, node.right = TreeNode(), TreeNode()
            stack.append((encoded["l"], node.left))
            stack.append((encoded["r"], node.right))
    params = TreeParams(**doc["params"])
    return RegressionTree(root=root, params=params, n_features=int(doc["n_features"]))


def model_to_dict(model, seed: int = 0, lag_spec: LagSpec | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "seed": seed}
    if lag_spec is not None:
        doc["lag_spec"] = lag_spec.to_dict()
    if isinstance(model, LinearModel):
        doc["kind"] = "linear"
        doc["hyperparams"] = {}
        doc["params"] = {
            "intercept": model.intercept,
            "coefficients": [float(c) for c in model.coefficients],
            "ridge_applied": model.ridge_applied,
        }
    elif isinstance(model, ForestModel):
        doc["kind"] = "forest"
        doc["seed"] = model.seed
        doc["hyperparams"] = {
            "n_trees": model.n_trees,
            "bootstrap": model.bootstrap,
            **model.params.to_dict(),
        }
        doc["params"] = {"trees": [_tree_to_dict(t) for t in model.trees]}
    elif isinstance(model, BoostModel):
        doc["kind"] = "boost"
        doc["seed"] = model.seed
        doc["hyperparams"] = {
            "n_stages": model.n_stages,
            "learning_rate": model.learning_rate,
            **model.params.to_dict(),
        }
        doc["params"] = {
            "init_value": model.init_value,
            "stages": [_tree_to_dict(t) for t in model.stages],
            "stage_train_rmse": list(model.stage_train_rmse),
            "n_features": model.n_features,
        }
    else:
        raise ValidationError(f"cannot serialize model of type {type(model).__name__}")
    return doc


def model_from_dict(doc: dict) -> LoadedModel:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported model schema_version {version!r}")
    kind = doc.get("kind")
    params = doc.get("params", {})
    seed = int(doc.get("seed", 0))
    if kind == "linear":
        model = LinearModel(
            intercept=float(params["intercept"]),
            coefficients=params["coefficients"],
            ridge_applied=bool(params.get("ridge_applied", False)),
        )
    elif kind == "forest":
        hp = doc.get("hyperparams", {})
        model = ForestModel(
            trees=[_tree_from_dict(t) for t in params["trees"]],
            bootstrap=bool(hp.get("bootstrap", True)),
            seed=seed,
            params=TreeParams(
                max_depth=hp.get("max_depth"),
                min_samples_leaf=hp.get("min_samples_leaf", 1),
            ),
        )
    elif kind == "boost":
        hp = doc.get("hyperparams", {})
        model = BoostModel(
            init_value=float(params["init_value"]),
            stages=[_tree_from_dict(t) for t in params["stages"]],
            learning_rate=float(hp.get("learning_rate", 0.1)),
            seed=seed,
            params=TreeParams(
                max_depth=hp.get("max_depth"),
                min_samples_leaf=hp.get("min_samples_leaf", 1),
            ),
            n_features=int(params["n_features"]),
            stage_train_rmse=[float(v) for v in params.get("stage_train_rmse", [])],
        )
    else:
        raise ValidationError(f"unknown model kind {kind!r} in document")
    lag_doc = doc.get("lag_spec")
    lag_spec = LagSpec(**lag_doc) if lag_doc else None
    return LoadedModel(model=model, kind=kind, seed=seed, lag_spec=lag_spec)


def save_model(path: str | Path, model, seed: int = 0, lag_spec: LagSpec | None = None) -> None:
    doc = model_to_dict(model, seed=seed, lag_spec=lag_spec)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LoadedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file {path} is not valid JSON: {exc}") from None
    return model_from_dict(doc)
