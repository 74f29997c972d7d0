"""Probabilistic AdaBoost: sequential boosting of Bernoulli weak classifiers.

The weight-update rule replaces the deterministic margin with the branch
probabilities q(+/-, X); everything else mirrors AdaBoost with
domain-partitioned alphas.  Recorded Z statistics are the actual update
normalizers, so the product of recorded Z equals the exact weighted
expected exponential loss (the telescoping identity).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._zstats import (
    ALPHA_SMOOTHING,
    WStats,
    optimal_alphas,
    w_statistics,
    z_min,
    z_value,
)
from .core import Dataset, RandomStream
from .weak_learner import (
    OracleEstimate,
    ProbClassifier,
    SamplingState,
    SystemStopwatch,
    WeakLearner,
    classifier_from_record,
    estimate_q_strategy_A,
    estimate_q_strategy_B,
    map_z_estimate,
)

__all__ = [
    "WStats",
    "w_statistics",
    "optimal_alphas",
    "z_value",
    "z_min",
    "update_weights",
    "TrainConfig",
    "StageRecord",
    "AdaboostModel",
    "train_adaboost",
    "exact_expected_bound",
    "mc_misclassification",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 20


def update_weights(
    weights: np.ndarray,
    q_plus: np.ndarray,
    labels: np.ndarray,
    alpha_plus: float,
    alpha_minus: float,
) -> tuple[np.ndarray, float]:
    """One probabilistic-AdaBoost weight update; returns (D_{t+1}, Z_t)."""
    weights = np.asarray(weights, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)
    y = np.asarray(labels, dtype=float)
    factors = q_plus * np.exp(-alpha_plus * y) + (1.0 - q_plus) * np.exp(alpha_minus * y)
    z = float(np.sum(weights * factors))
    return weights * factors / z, z


@dataclass
class TrainConfig:
    seed: int = 0
    exact_q: bool = False
    estimator: str = "map"  # "map" | "ml"
    strategy: str = "A"  # "A" | "B"
    r_min: int = 2
    r_max: int = 10_000


@dataclass
class StageRecord:
    classifier: ProbClassifier
    q_plus: np.ndarray  # training-time estimates (or exact q) per example
    alpha_plus: float
    alpha_minus: float
    z: float
    w: WStats

    def to_record(self) -> dict[str, Any]:
        return {
            "classifier": self.classifier.to_record(),
            "q_plus": self.q_plus.tolist(),
            "alpha_plus": self.alpha_plus,
            "alpha_minus": self.alpha_minus,
            "z": self.z,
            "w": list(self.w),
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "StageRecord":
        return cls(
            classifier=classifier_from_record(record["classifier"]),
            q_plus=np.array(record["q_plus"], dtype=float),
            alpha_plus=record["alpha_plus"],
            alpha_minus=record["alpha_minus"],
            z=record["z"],
            w=WStats(*record["w"]),
        )


@dataclass
class AdaboostModel:
    stages: list[StageRecord]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def recorded_bound(self) -> float:
        return math.prod(stage.z for stage in self.stages)

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": "adaboost",
            "metadata": self.metadata,
            "stages": [stage.to_record() for stage in self.stages],
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "AdaboostModel":
        if record.get("kind") != "adaboost":
            raise ValueError("not an adaboost model record")
        return cls(
            stages=[StageRecord.from_record(s) for s in record["stages"]],
            metadata=record.get("metadata", {}),
        )


def _stage_q(
    classifier: ProbClassifier,
    dataset: Dataset,
    weights: np.ndarray,
    config: TrainConfig,
    stream: RandomStream,
    round_index: int,
) -> np.ndarray:
    if config.exact_q:
        return np.array([classifier.q_plus(x) for x in dataset.features])
    q, _ = estimate_q_strategy_A(
        classifier,
        dataset,
        weights,
        stream,
        purpose=f"q-est-{round_index}",
        estimator=config.estimator,
        r_min=config.r_min,
        r_max=config.r_max,
    )
    return q


def _make_stage(
    classifier: ProbClassifier,
    q: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
) -> tuple[StageRecord, np.ndarray]:
    w = w_statistics(weights, q, labels)
    a_plus, a_minus = optimal_alphas(w)
    next_weights, z = update_weights(weights, q, labels, a_plus, a_minus)
    stage = StageRecord(classifier, q, a_plus, a_minus, z, w)
    return stage, next_weights


def train_adaboost(
    dataset: Dataset,
    learner: WeakLearner,
    T: int,
    config: TrainConfig | None = None,
) -> AdaboostModel:
    """Train T rounds; each round trains, estimates q, and reweights."""
    if T < 1:
        raise ValueError("T must be >= 1")
    config = config or TrainConfig()
    stream = RandomStream(config.seed)
    if config.strategy == "B" and not config.exact_q:
        return _train_strategy_B(dataset, learner, T, config, stream)

    weights = dataset.weights.copy()
    stages: list[StageRecord] = []
    for t in range(1, T + 1):
        try:
            classifier = learner.train(dataset, weights, stream.generator("train", 0, t))
        except Exception as exc:
            raise RuntimeError(f"weak learner failed at round {t}") from exc
        q = _stage_q(classifier, dataset, weights, config, stream, t)
        stage, weights = _make_stage(classifier, q, weights, dataset.labels)
        stages.append(stage)
    return AdaboostModel(stages, metadata=_metadata(config, T))


def _train_strategy_B(
    dataset: Dataset,
    learner: WeakLearner,
    T: int,
    config: TrainConfig,
    stream: RandomStream,
) -> AdaboostModel:
    stopwatch = SystemStopwatch()
    weights = dataset.weights.copy()
    classifier = learner.train(dataset, weights, stream.generator("train", 0, 1))
    estimate = OracleEstimate.empty(dataset.n_examples)
    from .weak_learner import _sample_round  # first sampling pass

    estimate.observe(_sample_round(classifier, dataset, stream, "q-est-1", 1))
    z, _ = map_z_estimate(estimate, weights, dataset.labels, config.estimator)
    state = SamplingState(
        dataset=dataset,
        learner=learner,
        stream=stream,
        t=1,
        weights=weights,
        classifier=classifier,
        estimate=estimate,
        z=z,
        estimator=config.estimator,
    )
    stages: list[StageRecord] = []
    guard = 0
    while state.t < T:
        prev_classifier = state.classifier
        prev_weights = state.weights
        prev_q = state.q_plus()
        decision = estimate_q_strategy_B(state, stopwatch)
        if decision == "A":
            stage, _ = _make_stage(prev_classifier, prev_q, prev_weights, dataset.labels)
            stages.append(stage)
        guard += 1
        if guard > config.r_max * T:
            break
    stage, _ = _make_stage(state.classifier, state.q_plus(), state.weights, dataset.labels)
    stages.append(stage)
    return AdaboostModel(stages, metadata=_metadata(config, T))


def _metadata(config: TrainConfig, T: int) -> dict[str, Any]:
    return {
        "T": T,
        "seed": config.seed,
        "exact_q": config.exact_q,
        "estimator": config.estimator,
        "strategy": config.strategy,
    }


def exact_expected_bound(model: AdaboostModel, dataset: Dataset) -> float:
    """Weighted expected exponential loss by exhaustive enumeration over the
    2^T joint outputs of the stage oracles.  Equals the product of recorded
    Z statistics (telescoping identity)."""
    T = model.n_stages
    if T == 0:
        return 1.0
    if T > ENUMERATION_CAP:
        raise ValueError(f"enumeration supports at most {ENUMERATION_CAP} stages, got {T}")
    y = dataset.labels.astype(float)
    total = np.zeros(dataset.n_examples)
    for signs in itertools.product((1, -1), repeat=T):
        term = np.ones(dataset.n_examples)
        for stage, s in zip(model.stages, signs):
            q_s = stage.q_plus if s == 1 else 1.0 - stage.q_plus
            alpha = stage.alpha_plus if s == 1 else stage.alpha_minus
            term = term * q_s * np.exp(-alpha * s * y)
        total += term
    return float(np.sum(dataset.weights * total))


def mc_misclassification(
    model: AdaboostModel,
    dataset: Dataset,
    trials: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo weighted 0/1 loss of the sampled ensemble.

    Ties H(X) = 0 count as misclassification.  Returns (mean, standard error).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stream = RandomStream(seed)
    n = dataset.n_examples
    H = np.zeros((trials, n))
    for t, stage in enumerate(model.stages, start=1):
        u = stream.generator("mc-stage", 0, t).random((trials, n))
        plus = u < stage.q_plus[None, :]
        H += np.where(plus, stage.alpha_plus, -stage.alpha_minus)
    wrong = (H * dataset.labels[None, :]) <= 0.0
    per_trial = wrong @ dataset.weights
    mean = float(per_trial.mean())
    se = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    return mean, se
