"""Matryoshka (recursively nested) decision trees.

A trained subtree can be collected into a single composite probabilistic
node: its output is the sign of the inner tree's sampled score (ties go to
+1), which makes it a drop-in Bernoulli weak classifier one level up.  The
fixed-2 builder nests two-node trees L levels deep; the greedy builder
grows a plain tree and collects a subtree whenever the analytic nesting
decrease rate beats the observed one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bounds import rate_matryoshka, rate_simple
from .core import Dataset, RandomStream, path_last, path_parent
from .ptree import (
    TreeModel,
    attach_node,
    grow_at_leaf,
    leaf_value,
    select_growth_leaf,
)
from .weak_learner import (
    ProbClassifier,
    Stopwatch,
    SystemStopwatch,
    WeakLearner,
    estimate_q_strategy_A,
    register_classifier_kind,
)

__all__ = [
    "CompositeNode",
    "MatryoshkaPolicy",
    "CountingLearner",
    "collect_leaves",
    "exact_composite_q",
    "build_fixed_2_matryoshka",
    "build_greedy_matryoshka",
]


class CompositeNode(ProbClassifier):
    """A collected subtree acting as a single Bernoulli node.

    Output is sign(H_inner(X)) with ties resolved to +1; when every inner
    classifier exposes exact branch probabilities, q(+, X) is computable
    by leaf enumeration.
    """

    def __init__(self, inner: TreeModel):
        self.inner = inner
        self.has_exact_q = all(
            node.classifier.has_exact_q for node in inner.nodes.values()
        )

    def q_plus(self, x: np.ndarray) -> float:
        if not self.has_exact_q:
            raise NotImplementedError("inner q unavailable; sample instead")
        total = 0.0
        for leaf in self.inner.leaves():
            h = leaf_value(self.inner, leaf)
            if h < 0.0:
                continue
            reach = 1.0
            for depth in range(1, len(leaf) + 1):
                prefix = leaf[:depth]
                node = self.inner.nodes[prefix[:-1]]
                q = node.classifier.q_plus(x)
                reach *= q if path_last(prefix) == 1 else 1.0 - q
            total += reach
        return total

    def sample(self, x: np.ndarray, rng: np.random.Generator) -> int:
        score = 0.0
        path = ""
        while path in self.inner.nodes:
            node = self.inner.nodes[path]
            sign = node.classifier.sample(x, rng)
            score += sign * node.alpha(sign)
            path += "+" if sign == 1 else "-"
        return 1 if score >= 0.0 else -1

    def to_record(self) -> dict[str, Any]:
        return {"kind": "composite", "inner": self.inner.to_record()}

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "CompositeNode":
        return cls(TreeModel.from_record(record["inner"]))


register_classifier_kind("composite", CompositeNode)


def collect_leaves(subtree: TreeModel) -> CompositeNode:
    """Wrap a trained subtree as a single composite probabilistic node."""
    return CompositeNode(subtree)


def exact_composite_q(composite: CompositeNode, x: np.ndarray) -> float:
    """Leaf-enumeration probability that the composite outputs +1."""
    return composite.q_plus(x)


@dataclass
class MatryoshkaPolicy:
    mode: str = "fixed-2"  # "fixed-2" | "greedy"
    rate_basis: str = "per-node"  # "per-node" | "per-second"

    def __post_init__(self) -> None:
        if self.mode not in ("fixed-2", "greedy"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.rate_basis not in ("per-node", "per-second"):
            raise ValueError(f"unknown rate basis {self.rate_basis!r}")


class CountingLearner(WeakLearner):
    """Wrapper counting raw weak-learner invocations (budget accounting)."""

    def __init__(self, base: WeakLearner):
        self.base = base
        self.calls = 0

    def train(self, dataset, weights, rng) -> ProbClassifier:
        self.calls += 1
        return self.base.train(dataset, weights, rng)


class _UnitLearner(WeakLearner):
    """Level-k unit: a two-node tree of level-(k-1) units, collected."""

    def __init__(self, level: int, base: WeakLearner, config):
        self.level = level
        self.base = base
        self.config = config

    def train(self, dataset: Dataset, weights, rng) -> ProbClassifier:
        if self.level == 0:
            return self.base.train(dataset, weights, rng)
        from .ptree import grow_tree

        positioned = Dataset(dataset.features, dataset.labels, np.asarray(weights, float))
        inner_stream = RandomStream(int(rng.integers(0, 2**63)))
        subtree = grow_tree(
            positioned,
            _UnitLearner(self.level - 1, self.base, self.config),
            max_nodes=2,
            config=self.config,
            stream=inner_stream,
        )
        return collect_leaves(subtree)


def build_fixed_2_matryoshka(
    dataset: Dataset,
    learner: WeakLearner,
    L: int,
    config=None,
) -> TreeModel:
    """L-level 2-matryoshka; the top two-node tree is returned uncollected.

    Total raw weak-classifier budget is 2^L.
    """
    from .adaboost import TrainConfig
    from .ptree import grow_tree

    if L < 1:
        raise ValueError("L must be >= 1")
    config = config or TrainConfig()
    tree = grow_tree(
        dataset,
        _UnitLearner(L - 1, learner, config),
        max_nodes=2,
        config=config,
        stream=RandomStream(config.seed),
    )
    tree.metadata["kind"] = "matryoshka"
    tree.metadata["mode"] = "fixed-2"
    tree.metadata["levels"] = L
    return tree


@dataclass
class _BuildLogEntry:
    step: int
    subtree: str
    action: str  # "grow" | "collect"
    C: float
    T: int
    rate_simple: float
    rate_matryoshka: float


def build_greedy_matryoshka(
    dataset: Dataset,
    learner: WeakLearner,
    max_raw_nodes: int,
    policy: MatryoshkaPolicy | None = None,
    stopwatch: Stopwatch | None = None,
    config=None,
) -> tuple[TreeModel, list[_BuildLogEntry]]:
    """Grow greedily; after each added node, scan enclosing subtrees from
    the top and collect the first whose analytic nesting rate beats the
    observed decrease rate.  At most one collection per step."""
    from .adaboost import TrainConfig

    policy = policy or MatryoshkaPolicy(mode="greedy")
    stopwatch = stopwatch or SystemStopwatch()
    config = config or TrainConfig()
    stream = RandomStream(config.seed)
    tree = TreeModel(trajectory=[1.0])
    tree.metadata.update(
        {"kind": "matryoshka", "mode": "greedy", "seed": config.seed,
         "dimension": dataset.dimension, "exact_q": config.exact_q,
         "estimator": config.estimator}
    )
    history: dict[str, list[float]] = {}
    log: list[_BuildLogEntry] = []
    for step in range(1, max_raw_nodes + 1):
        try:
            leaf = select_growth_leaf(tree)
        except ValueError:
            break
        t0 = stopwatch.now()
        grow_at_leaf(tree, leaf, dataset, learner, config, stream, step)
        elapsed = max(stopwatch.now() - t0, 1e-9)
        for prefix_len in range(len(leaf) + 1):
            p = leaf[:prefix_len]
            history.setdefault(p, []).append(_subtree_leaf_sum(tree, p))
        log.append(
            _BuildLogEntry(step, leaf, "grow", tree.recorded_bound(), tree.n_nodes,
                           math.nan, math.nan)
        )
        # scan enclosing subtrees starting from the top
        for prefix_len in range(len(leaf) + 1):
            p = leaf[:prefix_len]
            t_sub = _subtree_size(tree, p)
            if t_sub < 2 or len(history.get(p, [])) < 2:
                continue
            c_values = history[p]
            c_now = c_values[-1]
            if not 0.0 < c_now <= 1.0:
                continue
            if len(c_values) >= 3:
                simple = rate_simple(c_values[-3], c_values[-1])
            else:
                # first opportunity: forward difference from C(0) = 1
                simple = c_values[-1] - c_values[-2]
            matry = rate_matryoshka(c_now, t_sub)
            if policy.rate_basis == "per-second":
                simple /= elapsed
                matry /= elapsed
            if matry < simple:
                _collect_subtree(tree, p, dataset, config, stream, step)
                for key in list(history):
                    if key.startswith(p) and key != p:
                        del history[key]
                history[p] = [_subtree_leaf_sum(tree, p)]
                log.append(
                    _BuildLogEntry(step, p, "collect", tree.recorded_bound(),
                                   tree.n_nodes, simple, matry)
                )
                break
    return tree, log


def _subtree_size(tree: TreeModel, p: str) -> int:
    return sum(1 for path in tree.nodes if path.startswith(p))


def _subtree_leaf_sum(tree: TreeModel, p: str) -> float:
    """C of the subtree rooted at p, computed on the subtree only."""
    total = 0.0
    for leaf in tree.leaves():
        if not leaf.startswith(p):
            continue
        product = 1.0
        for depth in range(len(p) + 1, len(leaf) + 1):
            prefix = leaf[:depth]
            product *= tree.nodes[prefix[:-1]].z(path_last(prefix))
        total += product
    return total


def _extract_subtree(tree: TreeModel, p: str) -> TreeModel:
    nodes = {
        path[len(p):]: node for path, node in tree.nodes.items() if path.startswith(p)
    }
    return TreeModel(nodes=nodes, metadata={"kind": "ptree", "collected_from": p})


def _collect_subtree(
    tree: TreeModel,
    p: str,
    dataset: Dataset,
    config,
    stream: RandomStream,
    step: int,
) -> None:
    composite = collect_leaves(_extract_subtree(tree, p))
    weights = (
        dataset.weights.copy()
        if p == ""
        else tree.nodes[path_parent(p)].child_weights(path_last(p))
    )
    for path in [path for path in tree.nodes if path.startswith(p)]:
        del tree.nodes[path]
    if config.exact_q and composite.has_exact_q:
        q = np.array([composite.q_plus(x) for x in dataset.features])
    else:
        q, _ = estimate_q_strategy_A(
            composite,
            dataset,
            weights,
            stream,
            purpose=f"collect-q-est-{step}",
            estimator=config.estimator,
            r_min=config.r_min,
            r_max=config.r_max,
        )
    attach_node(tree, p, composite, q, weights, dataset.labels)
    # attach_node's incremental update assumed plain growth; restate C exactly
    tree.trajectory[-1] = tree.leaf_sum()
