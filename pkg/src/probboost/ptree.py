"""Boosted probabilistic decision trees.

Every node is trained on the whole dataset with weights that fold in both
the boosting reweighting and the probability of reaching the node.  Each
child edge s carries a domain-partitioned weight alpha_s and a normalizer
Z_s; the running bound C(T) is the sum over leaves of the product of Z
along the path, and growth greedily expands the leaf with the largest
product.

Sign convention: the per-node factor of an example is
q(sign, X) * exp(-sign * alpha * y), so the minus child uses
exp(+alpha_{s-} y).  This is the form under which the leaf-sum identity
C(T) = sum_leaves prod Z holds together with the signed leaf values
H_l = sum sign * alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._zstats import optimal_alphas, w_statistics
from .core import Dataset, RandomStream, path_last, path_parent, validate_path
from .weak_learner import ProbClassifier, WeakLearner, classifier_from_record, estimate_q_strategy_A

__all__ = [
    "DEAD_BRANCH_THRESHOLD",
    "TreeNode",
    "TreeModel",
    "node_alphas",
    "children_weights",
    "leaf_value",
    "select_growth_leaf",
    "grow_tree",
    "exact_tree_bound",
    "predict_tree",
]

DEAD_BRANCH_THRESHOLD = 1e-300


def node_alphas(
    weights: np.ndarray, q_plus: np.ndarray, labels: np.ndarray
) -> tuple[float, float]:
    """Children alphas (alpha_{s+}, alpha_{s-}) from the node's weights."""
    w = w_statistics(weights, q_plus, labels)
    return optimal_alphas(w)


def children_weights(
    weights: np.ndarray,
    q_plus: np.ndarray,
    labels: np.ndarray,
    alpha_plus: float,
    alpha_minus: float,
) -> tuple[np.ndarray, float, np.ndarray, float]:
    """Split a node's weights into its two children.

    Returns (D_{s+}, Z_{s+}, D_{s-}, Z_{s-}); a child with unnormalized
    mass below the dead-branch threshold keeps Z but gets a zero vector.
    """
    weights = np.asarray(weights, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)
    y = np.asarray(labels, dtype=float)
    mass_plus = weights * q_plus * np.exp(-alpha_plus * y)
    mass_minus = weights * (1.0 - q_plus) * np.exp(alpha_minus * y)
    z_plus = float(mass_plus.sum())
    z_minus = float(mass_minus.sum())
    d_plus = mass_plus / z_plus if z_plus >= DEAD_BRANCH_THRESHOLD else np.zeros_like(weights)
    d_minus = mass_minus / z_minus if z_minus >= DEAD_BRANCH_THRESHOLD else np.zeros_like(weights)
    return d_plus, z_plus, d_minus, z_minus


@dataclass
class TreeNode:
    """An inner node: its classifier plus the statistics of its two edges."""

    classifier: ProbClassifier
    q_plus: np.ndarray  # per-example branch probabilities used in training
    weights: np.ndarray  # D_s at this node
    alpha_plus: float
    alpha_minus: float
    z_plus: float
    z_minus: float
    weights_plus: np.ndarray
    weights_minus: np.ndarray

    def alpha(self, sign: int) -> float:
        return self.alpha_plus if sign == 1 else self.alpha_minus

    def z(self, sign: int) -> float:
        return self.z_plus if sign == 1 else self.z_minus

    def child_weights(self, sign: int) -> np.ndarray:
        return self.weights_plus if sign == 1 else self.weights_minus

    def to_record(self) -> dict[str, Any]:
        return {
            "classifier": self.classifier.to_record(),
            "q_plus": self.q_plus.tolist(),
            "weights": self.weights.tolist(),
            "alpha_plus": self.alpha_plus,
            "alpha_minus": self.alpha_minus,
            "z_plus": self.z_plus,
            "z_minus": self.z_minus,
            "weights_plus": self.weights_plus.tolist(),
            "weights_minus": self.weights_minus.tolist(),
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "TreeNode":
        return cls(
            classifier=classifier_from_record(record["classifier"]),
            q_plus=np.array(record["q_plus"], dtype=float),
            weights=np.array(record["weights"], dtype=float),
            alpha_plus=record["alpha_plus"],
            alpha_minus=record["alpha_minus"],
            z_plus=record["z_plus"],
            z_minus=record["z_minus"],
            weights_plus=np.array(record["weights_plus"], dtype=float),
            weights_minus=np.array(record["weights_minus"], dtype=float),
        )


@dataclass
class TreeModel:
    nodes: dict[str, TreeNode] = field(default_factory=dict)
    trajectory: list[float] = field(default_factory=list)  # C(0), C(1), ...
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def recorded_bound(self) -> float:
        return self.trajectory[-1] if self.trajectory else 1.0

    def leaves(self) -> list[str]:
        if not self.nodes:
            return [""]
        out = []
        for path in self.nodes:
            for sign in ("+", "-"):
                child = path + sign
                if child not in self.nodes:
                    out.append(child)
        return sorted(out, key=_path_order)

    def leaf_product(self, leaf: str) -> float:
        """Product of Z_s over the non-root prefixes of the leaf."""
        product = 1.0
        for depth in range(1, len(leaf) + 1):
            prefix = leaf[:depth]
            parent = self.nodes[prefix[:-1]]
            product *= parent.z(path_last(prefix))
        return product

    def leaf_sum(self) -> float:
        return sum(self.leaf_product(leaf) for leaf in self.leaves())

    def is_dead(self, leaf: str) -> bool:
        if leaf == "":
            return False
        parent = self.nodes[path_parent(leaf)]
        return parent.z(path_last(leaf)) < DEAD_BRANCH_THRESHOLD

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.metadata.get("kind", "ptree"),
            "metadata": self.metadata,
            "trajectory": list(self.trajectory),
            "nodes": {path: node.to_record() for path, node in self.nodes.items()},
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "TreeModel":
        nodes = {
            validate_path(path): TreeNode.from_record(node)
            for path, node in record["nodes"].items()
        }
        for path in nodes:
            if path and path[:-1] not in nodes:
                raise ValueError(f"node {path!r} has no parent in the record")
        return cls(
            nodes=nodes,
            trajectory=list(record.get("trajectory", [])),
            metadata=record.get("metadata", {}),
        )


def _path_order(path: str) -> tuple[int, str]:
    # shorter paths first; '+' before '-' at equal depth
    return len(path), path.replace("+", "0").replace("-", "1")


def leaf_value(tree: TreeModel, leaf: str) -> float:
    """Signed alpha sum H_l along the path from the root to the leaf."""
    validate_path(leaf)
    if leaf != "" and leaf not in tree.nodes:
        parent = path_parent(leaf)
        if parent not in tree.nodes:
            raise ValueError(f"unknown path {leaf!r}")
    value = 0.0
    for depth in range(1, len(leaf) + 1):
        prefix = leaf[:depth]
        parent_node = tree.nodes.get(prefix[:-1])
        if parent_node is None:
            raise ValueError(f"unknown path {leaf!r}")
        sign = path_last(prefix)
        value += sign * parent_node.alpha(sign)
    return value


def select_growth_leaf(tree: TreeModel) -> str:
    """Live leaf with the largest Z product; lexicographic tie-break."""
    candidates = [leaf for leaf in tree.leaves() if not tree.is_dead(leaf)]
    if not candidates:
        raise ValueError("all leaves are dead; growth cannot continue")
    best = candidates[0]
    best_product = tree.leaf_product(best)
    for leaf in candidates[1:]:
        product = tree.leaf_product(leaf)
        if product > best_product:
            best, best_product = leaf, product
    return best


def grow_tree(
    dataset: Dataset,
    learner: WeakLearner,
    max_nodes: int | None = None,
    target_bound: float | None = None,
    config=None,
    stream: RandomStream | None = None,
    on_grow=None,
) -> TreeModel:
    """Greedy bound-reducing growth, one weak classifier per step.

    Stops at ``max_nodes`` inner nodes or once C(T) <= ``target_bound``.
    ``on_grow(tree, leaf)`` is invoked after every added node (used by the
    matryoshka builder).
    """
    from .adaboost import TrainConfig

    if max_nodes is None and target_bound is None:
        raise ValueError("either max_nodes or target_bound must be given")
    config = config or TrainConfig()
    stream = stream or RandomStream(config.seed)
    tree = TreeModel(trajectory=[1.0], metadata=_metadata(config, max_nodes, target_bound))
    tree.metadata["dimension"] = dataset.dimension
    step = 0
    while True:
        if max_nodes is not None and tree.n_nodes >= max_nodes:
            break
        if target_bound is not None and tree.recorded_bound() <= target_bound:
            break
        try:
            leaf = select_growth_leaf(tree)
        except ValueError:
            break
        step += 1
        grow_at_leaf(tree, leaf, dataset, learner, config, stream, step)
        if on_grow is not None:
            on_grow(tree, leaf)
    return tree


def grow_at_leaf(
    tree: TreeModel,
    leaf: str,
    dataset: Dataset,
    learner: WeakLearner,
    config,
    stream: RandomStream,
    step: int,
) -> TreeNode:
    """Train a classifier at ``leaf`` and turn it into an inner node."""
    weights = (
        dataset.weights.copy()
        if leaf == ""
        else tree.nodes[path_parent(leaf)].child_weights(path_last(leaf))
    )
    try:
        classifier = learner.train(dataset, weights, stream.generator("tree-train", 0, step))
    except Exception as exc:
        raise RuntimeError(f"weak learner failed at node {leaf!r} (step {step})") from exc
    q = _node_q(classifier, dataset, weights, config, stream, step)
    attach_node(tree, leaf, classifier, q, weights, dataset.labels)
    return tree.nodes[leaf]


def attach_node(
    tree: TreeModel,
    leaf: str,
    classifier: ProbClassifier,
    q: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
) -> None:
    """Install a trained classifier at a leaf and update the C trajectory."""
    if leaf in tree.nodes:
        raise ValueError(f"{leaf!r} is already an inner node")
    a_plus, a_minus = node_alphas(weights, q, labels)
    d_plus, z_plus, d_minus, z_minus = children_weights(weights, q, labels, a_plus, a_minus)
    tree.nodes[leaf] = TreeNode(
        classifier=classifier,
        q_plus=np.asarray(q, dtype=float),
        weights=np.asarray(weights, dtype=float),
        alpha_plus=a_plus,
        alpha_minus=a_minus,
        z_plus=z_plus,
        z_minus=z_minus,
        weights_plus=d_plus,
        weights_minus=d_minus,
    )
    prefix_product = tree.leaf_product(leaf)  # product above the grown leaf
    c_prev = tree.trajectory[-1]
    tree.trajectory.append(c_prev + prefix_product * (z_plus + z_minus - 1.0))


def _node_q(classifier, dataset, weights, config, stream, step) -> np.ndarray:
    if config.exact_q:
        return np.array([classifier.q_plus(x) for x in dataset.features])
    q, _ = estimate_q_strategy_A(
        classifier,
        dataset,
        weights,
        stream,
        purpose=f"tree-q-est-{step}",
        estimator=config.estimator,
        r_min=config.r_min,
        r_max=config.r_max,
    )
    return q


def _metadata(config, max_nodes, target_bound) -> dict[str, Any]:
    return {
        "kind": "ptree",
        "seed": config.seed,
        "exact_q": config.exact_q,
        "estimator": config.estimator,
        "max_nodes": max_nodes,
        "target_bound": target_bound,
    }


def exact_tree_bound(tree: TreeModel, dataset: Dataset) -> float:
    """Weighted expected exponential loss by full leaf enumeration.

    Sum over examples and leaves of D(n) p(l, X_n) exp(-H_l y_n), with the
    reach probability p(l, X) the product of branch probabilities along the
    path.  Equals the recorded leaf-sum of Z products.
    """
    y = dataset.labels.astype(float)
    total = np.zeros(dataset.n_examples)
    for leaf in tree.leaves():
        reach = np.ones(dataset.n_examples)
        h = 0.0
        for depth in range(1, len(leaf) + 1):
            prefix = leaf[:depth]
            parent = tree.nodes[prefix[:-1]]
            sign = path_last(prefix)
            q_branch = parent.q_plus if sign == 1 else 1.0 - parent.q_plus
            reach = reach * q_branch
            h += sign * parent.alpha(sign)
        total += reach * np.exp(-h * y)
    return float(np.sum(dataset.weights * total))


def predict_tree(
    tree: TreeModel, x: np.ndarray, rng: np.random.Generator
) -> tuple[float, str]:
    """Sample a root-to-leaf walk; returns (score H, trajectory path)."""
    x = np.asarray(x, dtype=float)
    dim = tree.metadata.get("dimension")
    if dim is not None and x.shape != (dim,):
        raise ValueError(f"expected feature dimension {dim}, got {x.shape}")
    path = ""
    score = 0.0
    while path in tree.nodes:
        node = tree.nodes[path]
        sign = node.classifier.sample(x, rng)
        score += sign * node.alpha(sign)
        path += "+" if sign == 1 else "-"
    return score, path
