"""Treatment codes and the review-loop state machine.

A treatment is a 4-letter code choosing how the review behaves along four
axes: when model-based selection starts (P patient / H hasty), how the
model queries (U uncertainty / C certainty), whether training ever stops
(S stop-when-stable / T never), and how class imbalance is handled
(N none / A aggressive undersampling / W weighting / M mixed).  The
sentinel "linear" reviews in random order and never trains.

The loop itself: studies are picked at random until enough relevant ones
are found, then the model is (re)trained and picks the next study, either
the least certain or the most confidently relevant.  Once the relevant
count reaches the stability threshold, S-codes freeze the model and
A/M-codes rebalance by dropping easy irrelevant examples before retraining.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import svm
from .features import FeatureMatrix

STARTS = ("P", "H")
QUERIES = ("U", "C")
STOPS = ("S", "T")
BALANCES = ("N", "A", "W", "M")

PHASE_RANDOM = "random"
PHASE_UNCERTAINTY = "uncertainty"
PHASE_CERTAINTY = "certainty"


class PoolExhaustedError(Exception):
    """Every study is already labeled; nothing left to query."""


@dataclass(frozen=True)
class TreatmentCode:
    start: str = ""
    query: str = ""
    stop: str = ""
    balance: str = ""
    linear: bool = False

    @classmethod
    def parse(cls, text: str) -> "TreatmentCode":
        if text.strip().lower() == "linear":
            return LINEAR
        code = text.strip().upper()
        if len(code) != 4:
            raise ValueError(f"treatment code must be 4 letters or 'linear': {text!r}")
        start, query, stop, balance = code
        if start not in STARTS or query not in QUERIES or stop not in STOPS or balance not in BALANCES:
            raise ValueError(f"unknown treatment code {text!r}")
        return cls(start=start, query=query, stop=stop, balance=balance)

    def __str__(self) -> str:
        if self.linear:
            return "linear"
        return self.start + self.query + self.stop + self.balance

    @property
    def weighted_training(self) -> bool:
        return self.balance in ("W", "M")

    @property
    def undersamples(self) -> bool:
        return self.balance in ("A", "M")


LINEAR = TreatmentCode(linear=True)
FASTREAD = TreatmentCode(start="H", query="U", stop="T", balance="M")


def all_codes() -> tuple[TreatmentCode, ...]:
    """The 32 non-sentinel codes, in axis order."""
    return tuple(
        TreatmentCode(start=s, query=q, stop=st, balance=b)
        for s, q, st, b in itertools.product(STARTS, QUERIES, STOPS, BALANCES)
    )


@dataclass(frozen=True)
class TreatmentConfig:
    """Loop thresholds.

    P codes wait for start_threshold relevant studies before model-based
    selection (H codes need one); stable_threshold relevant studies mark
    the switch from uncertainty to certainty querying.
    """

    start_threshold: int = 5
    stable_threshold: int = 30
    target_recall: float = 0.95

    def __post_init__(self):
        if not 1 <= self.start_threshold <= self.stable_threshold:
            raise ValueError("need 1 <= start_threshold <= stable_threshold")
        if not 0 < self.target_recall <= 1:
            raise ValueError("target_recall must be in (0, 1]")


DEFAULT_CONFIG = TreatmentConfig()


class ReviewState:
    """Single-writer state of one review: labels, current model, rng.

    ``labels`` maps study id -> True (relevant) / False (irrelevant).
    The partition invariant |labeled| + |unlabeled| = n always holds by
    construction; labeled ids only accumulate.  Counts and the unlabeled
    mask are maintained incrementally so long reviews stay O(n) per step.
    """

    def __init__(self, n: int, rng: np.random.Generator):
        if n < 1:
            raise ValueError("review needs at least one study")
        self.n = n
        self.rng = rng
        self.labels: dict[int, bool] = {}
        self.model: svm.LinearModel | None = None
        self._unlabeled = np.ones(n, dtype=bool)
        self._n_relevant = 0

    @classmethod
    def create(cls, n: int, seed: int = 0) -> "ReviewState":
        return cls(n=n, rng=np.random.default_rng(seed))

    @property
    def labeled_count(self) -> int:
        return len(self.labels)

    @property
    def relevant_count(self) -> int:
        return self._n_relevant

    @property
    def irrelevant_count(self) -> int:
        return len(self.labels) - self._n_relevant

    def is_labeled(self, study_id: int) -> bool:
        return study_id in self.labels

    def labeled_ids(self) -> np.ndarray:
        return np.fromiter(sorted(self.labels), dtype=np.int64, count=len(self.labels))

    def relevant_ids(self) -> np.ndarray:
        return np.array(sorted(i for i, rel in self.labels.items() if rel), dtype=np.int64)

    def irrelevant_ids(self) -> np.ndarray:
        return np.array(sorted(i for i, rel in self.labels.items() if not rel), dtype=np.int64)

    def unlabeled_ids(self) -> np.ndarray:
        return np.flatnonzero(self._unlabeled)


def enough(code: TreatmentCode, config: TreatmentConfig = DEFAULT_CONFIG) -> float:
    """Relevant count needed before model-based selection starts."""
    if code.linear:
        return math.inf
    if code.start == "H":
        return 1
    return config.start_threshold


def not_stable(state: ReviewState, config: TreatmentConfig = DEFAULT_CONFIG) -> bool:
    return state.relevant_count < config.stable_threshold


def should_retrain(
    code: TreatmentCode, state: ReviewState, config: TreatmentConfig = DEFAULT_CONFIG
) -> bool:
    """T-codes retrain every round; S-codes freeze once stable."""
    if code.linear:
        return False
    return code.stop == "T" or not_stable(state, config)


def train_step(
    code: TreatmentCode,
    state: ReviewState,
    features: FeatureMatrix,
    seed: int = 0,
    config: TreatmentConfig = DEFAULT_CONFIG,
) -> svm.LinearModel:
    """Train the selection model on the current labels.

    W/M codes weight classes by inverse frequency.  Once stable, A/M codes
    drop all but the min(|relevant|, |irrelevant|) most confidently
    irrelevant examples (lowest interim scores) and retrain unweighted.
    """
    relevant = state.relevant_ids()
    irrelevant = state.irrelevant_ids()
    if relevant.size == 0 or irrelevant.size == 0:
        raise svm.DegenerateTrainingError("need labeled examples of both classes")
    y = np.concatenate([np.ones(relevant.size), -np.ones(irrelevant.size)])
    ids = np.concatenate([relevant, irrelevant])
    weights = None
    if code.weighted_training:
        weights = svm.balanced_weights(relevant.size, irrelevant.size)
    model = svm.train(features.rows(ids), y, weights=weights, seed=seed)

    if code.undersamples and not not_stable(state, config):
        scores = model.decision(features.rows(irrelevant))
        keep_n = min(relevant.size, irrelevant.size)
        # stable sort over ascending ids breaks score ties by id
        kept = irrelevant[np.argsort(scores, kind="stable")[:keep_n]]
        ids = np.concatenate([relevant, kept])
        y = np.concatenate([np.ones(relevant.size), -np.ones(kept.size)])
        model = svm.train(features.rows(ids), y, weights=None, seed=seed)
    return model


def current_phase(
    code: TreatmentCode,
    state: ReviewState,
    config: TreatmentConfig = DEFAULT_CONFIG,
) -> str:
    """Which selection strategy the next query will use."""
    if code.linear or state.model is None or state.relevant_count < enough(code, config):
        return PHASE_RANDOM
    if code.query == "U" and not_stable(state, config):
        return PHASE_UNCERTAINTY
    return PHASE_CERTAINTY


def query_next(
    code: TreatmentCode,
    state: ReviewState,
    features: FeatureMatrix | None,
    batch: int = 1,
    config: TreatmentConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Pick the next ``batch`` study ids to review; ties go to lower ids.

    Random phase draws without replacement from the state's rng; model
    phases sort by |score| ascending (uncertainty) or score descending
    (certainty).
    """
    pool = state.unlabeled_ids()
    if pool.size == 0:
        raise PoolExhaustedError("all studies are labeled")
    k = min(batch, pool.size)
    phase = current_phase(code, state, config)
    if phase == PHASE_RANDOM:
        return np.sort(state.rng.choice(pool, size=k, replace=False))
    scores = state.model.decision(features.rows(pool))
    key = np.abs(scores) if phase == PHASE_UNCERTAINTY else -scores
    return pool[np.argsort(key, kind="stable")[:k]]


def record_label(state: ReviewState, study_id: int, code: str) -> ReviewState:
    """Move one study from unlabeled to labeled; code is "yes" or "no"."""
    if not 0 <= study_id < state.n:
        raise ValueError(f"study id {study_id} out of range")
    if study_id in state.labels:
        raise ValueError(f"study {study_id} is already labeled")
    if code not in ("yes", "no"):
        raise ValueError(f"label must be 'yes' or 'no', got {code!r}")
    relevant = code == "yes"
    state.labels[study_id] = relevant
    state._unlabeled[study_id] = False
    state._n_relevant += relevant
    return state


def recode(state: ReviewState, study_id: int, code: str) -> ReviewState:
    """Overwrite the label of an already-labeled study."""
    if study_id not in state.labels:
        raise ValueError(f"study {study_id} is not labeled yet")
    if code not in ("yes", "no"):
        raise ValueError(f"label must be 'yes' or 'no', got {code!r}")
    relevant = code == "yes"
    state._n_relevant += int(relevant) - int(state.labels[study_id])
    state.labels[study_id] = relevant
    return state


def derive_train_seed(base_seed: int, labeled_count: int) -> int:
    """Deterministic per-retrain seed, stable across replays."""
    return int(np.random.SeedSequence([base_seed, labeled_count]).generate_state(1)[0])


def train_if_due(
    code: TreatmentCode,
    state: ReviewState,
    features: FeatureMatrix | None,
    train_seed: int = 0,
    config: TreatmentConfig = DEFAULT_CONFIG,
) -> None:
    """Retrain the selection model when the schedule calls for it.

    Training waits until the relevant count reaches the code's start
    threshold and both classes are present; otherwise selection stays
    random.  A frozen (S-code, stable) model is reused as-is.
    """
    can_train = (
        not code.linear
        and state.relevant_count >= enough(code, config)
        and state.relevant_count >= 1
        and state.irrelevant_count >= 1
    )
    if can_train and (should_retrain(code, state, config) or state.model is None):
        state.model = train_step(code, state, features, seed=train_seed, config=config)


def select_batch(
    code: TreatmentCode,
    state: ReviewState,
    features: FeatureMatrix | None,
    batch: int = 1,
    config: TreatmentConfig = DEFAULT_CONFIG,
    train_seed: int = 0,
) -> np.ndarray:
    """One loop cycle: retrain if due, then pick the next batch."""
    train_if_due(code, state, features, train_seed, config)
    return query_next(code, state, features, batch, config)
