"""probboost: probabilistic boosting, probabilistic decision trees, and
matryoshka (nested) trees, with an exact training-error bound calculus."""

from . import adaboost, bounds, core, matryoshka, persist, ptree, specfun, weak_learner
from .adaboost import AdaboostModel, TrainConfig, train_adaboost
from .bounds import (
    bound_adaboost,
    bound_F,
    bound_iso_nested,
    bound_M2,
    bound_nested,
    rho_from_epsilon,
)
from .core import Dataset, RandomStream, load_csv, make_synthetic_dataset
from .matryoshka import build_fixed_2_matryoshka, build_greedy_matryoshka, collect_leaves
from .persist import load_model, save_model
from .ptree import TreeModel, grow_tree
from .weak_learner import builtin_constant_edge_oracle, builtin_noisy_stump

__version__ = "0.1.0"
