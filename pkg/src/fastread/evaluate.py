"""Simulation harness, retrieval metrics, repeat aggregation, and ranking.

simulate() drives the review loop against a fully oracle-labeled corpus
until 95% (configurable) of the relevant studies are found, recording the
recall trajectory.  The headline metrics are X95 (studies reviewed at
target recall) and WSS@95 (work saved over reviewing at a linear rate).
repeat() runs seeded repetitions; scott_knott() clusters treatments into
statistically distinct rank groups; cost_saving() converts review counts
into effort saved under a two-tier (abstract vs full-text) cost model.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import active, features
from .corpus import Corpus, CorpusStats
from .features import FeatureMatrix


class OracleError(Exception):
    """Simulation asked for a label the corpus does not carry."""


@dataclass(frozen=True)
class SimulationResult:
    """Outcome of one simulated review.

    ``trajectory`` holds (reviewed, found) after every labeled study;
    ``missed`` (the relevant ids still unlabeled at termination) lives in
    memory only and is not serialized to run logs.
    """

    treatment: active.TreatmentCode
    seed: int
    trajectory: tuple[tuple[int, int], ...]
    x95: int
    wss95: float
    missed: frozenset[int]

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "treatment": str(self.treatment),
                "seed": self.seed,
                "x95": self.x95,
                "wss95": self.wss95,
                "trajectory": [list(point) for point in self.trajectory],
            },
            separators=(",", ":"),
        )


def parse_run_line(line: str) -> SimulationResult:
    """Inverse of to_json_line (missed comes back empty)."""
    raw = json.loads(line)
    return SimulationResult(
        treatment=active.TreatmentCode.parse(raw["treatment"]),
        seed=int(raw["seed"]),
        trajectory=tuple((int(a), int(b)) for a, b in raw["trajectory"]),
        x95=int(raw["x95"]),
        wss95=float(raw["wss95"]),
        missed=frozenset(),
    )


def read_run_log(path) -> list[SimulationResult]:
    """Parse a JSON-lines run log, skipping blank lines."""
    results = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                results.append(parse_run_line(line))
    return results


def append_run_log(results, path) -> None:
    """Append results to a JSON-lines run log, one line each."""
    with open(path, "a", encoding="utf-8") as handle:
        for result in results:
            handle.write(result.to_json_line() + "\n")


def wss_at_95(x95: int, pool: int, target_recall: float = 0.95) -> float:
    """Work saved over sampling: target_recall - x95/pool."""
    if pool < 1:
        raise ValueError("pool must be positive")
    if not 0 < x95 <= pool:
        raise ValueError(f"x95 must be in 1..{pool}, got {x95}")
    return target_recall - x95 / pool


def recall_target(n_relevant: int, target_recall: float = 0.95) -> int:
    """Relevant studies that must be found: ceil(target_recall * |R|)."""
    return math.ceil(target_recall * n_relevant)


def simulate(
    corpus: Corpus,
    code: active.TreatmentCode,
    config: active.TreatmentConfig = active.DEFAULT_CONFIG,
    seed: int = 0,
    batch: int = 1,
    max_terms: int = features.MAX_TERMS,
    feature_matrix: FeatureMatrix | None = None,
) -> SimulationResult:
    """Run one review to the recall target and measure it.

    Passing a precomputed ``feature_matrix`` (from features.featurize)
    skips refeaturization across repeats; the linear baseline never needs
    features at all.
    """
    unlabeled = [s.id for s in corpus.studies if s.oracle_label is None]
    if unlabeled:
        raise OracleError(f"study {unlabeled[0]} has no oracle label")
    relevant = corpus.relevant_ids
    if not relevant:
        raise ValueError("corpus has no relevant studies to find")
    target = recall_target(len(relevant), config.target_recall)

    fm = feature_matrix
    if fm is None and not code.linear:
        fm = features.featurize(corpus, max_terms)

    state = active.ReviewState.create(len(corpus), seed=seed)
    trajectory: list[tuple[int, int]] = []
    while state.relevant_count < target:
        ids = active.select_batch(
            code,
            state,
            fm,
            batch=batch,
            config=config,
            train_seed=active.derive_train_seed(seed, state.labeled_count),
        )
        for sid in ids.tolist():
            label = "yes" if sid in relevant else "no"
            active.record_label(state, sid, label)
            trajectory.append((state.labeled_count, state.relevant_count))
            if state.relevant_count >= target:
                break

    x95 = state.labeled_count
    return SimulationResult(
        treatment=code,
        seed=seed,
        trajectory=tuple(trajectory),
        x95=x95,
        wss95=wss_at_95(x95, len(corpus), config.target_recall),
        missed=frozenset(r for r in relevant if not state.labels.get(r, False)),
    )


def _simulate_task(args) -> SimulationResult:
    corpus, code, config, seed, batch, max_terms, fm = args
    return simulate(corpus, code, config, seed, batch, max_terms, fm)


def run_seeds(
    corpus: Corpus,
    code: active.TreatmentCode,
    seeds,
    config: active.TreatmentConfig = active.DEFAULT_CONFIG,
    batch: int = 1,
    max_terms: int = features.MAX_TERMS,
    jobs: int = 1,
    feature_matrix: FeatureMatrix | None = None,
) -> list[SimulationResult]:
    """One simulation per seed, results in the seeds' given order."""
    seeds = list(seeds)
    fm = feature_matrix
    if fm is None and not code.linear and seeds:
        fm = features.featurize(corpus, max_terms)
    tasks = [(corpus, code, config, seed, batch, max_terms, fm) for seed in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_simulate_task, tasks))
    return [_simulate_task(t) for t in tasks]


def repeat(
    corpus: Corpus,
    code: active.TreatmentCode,
    config: active.TreatmentConfig = active.DEFAULT_CONFIG,
    n: int = 30,
    base_seed: int = 0,
    batch: int = 1,
    max_terms: int = features.MAX_TERMS,
    jobs: int = 1,
) -> list[SimulationResult]:
    """n seeded simulations (seeds base_seed..base_seed+n-1), ordered by seed."""
    if n < 1:
        raise ValueError("need at least one repeat")
    return run_seeds(
        corpus,
        code,
        range(base_seed, base_seed + n),
        config=config,
        batch=batch,
        max_terms=max_terms,
        jobs=jobs,
    )


def _nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    idx = math.ceil(percentile / 100.0 * sorted_values.size) - 1
    return float(sorted_values[max(idx, 0)])


def median_iqr(values) -> tuple[float, float]:
    """Nearest-rank median and 75th-25th percentile spread."""
    arr = np.sort(np.asarray(list(values), dtype=np.float64))
    if arr.size == 0:
        raise ValueError("need at least one value")
    return (
        _nearest_rank(arr, 50),
        _nearest_rank(arr, 75) - _nearest_rank(arr, 25),
    )


@dataclass(frozen=True)
class RankEntry:
    rank: int
    treatment: str
    x95_median: float
    x95_iqr: float
    wss95_median: float | None = None
    wss95_iqr: float | None = None


@dataclass(frozen=True)
class RankReport:
    entries: tuple[RankEntry, ...]

    def ranks(self) -> dict[str, int]:
        return {e.treatment: e.rank for e in self.entries}


def _cliffs_delta(a: np.ndarray, b: np.ndarray) -> float:
    greater = 0
    less = 0
    for value in a:
        greater += int(np.count_nonzero(b < value))
        less += int(np.count_nonzero(b > value))
    return (greater - less) / (a.size * b.size)


def _bootstrap_differs(
    a: np.ndarray, b: np.ndarray, rng: np.random.Generator, resamples: int, confidence: float
) -> bool:
    """Two-sided pooled-bootstrap test on the difference of means."""
    observed = abs(a.mean() - b.mean())
    pooled = np.concatenate([a, b])
    ra = pooled[rng.integers(0, pooled.size, size=(resamples, a.size))].mean(axis=1)
    rb = pooled[rng.integers(0, pooled.size, size=(resamples, b.size))].mean(axis=1)
    p = float(np.mean(np.abs(ra - rb) >= observed))
    return p <= 1.0 - confidence


SMALL_EFFECT = 0.147


def scott_knott(
    x95_samples: dict[str, list[float]],
    wss_samples: dict[str, list[float]] | None = None,
    seed: int = 0,
    resamples: int = 512,
    confidence: float = 0.95,
    effect_threshold: float = SMALL_EFFECT,
) -> RankReport:
    """Cluster treatments into rank groups over their x95 samples.

    Treatments are sorted by median (smaller x95 is better), then
    recursively split at the boundary maximizing the between-group sum of
    squares; a split stands only when the two sides differ both
    significantly (pooled bootstrap) and by a non-small effect (Cliff's
    delta).  Rank 1 is the best group.
    """
    if not x95_samples:
        raise ValueError("need at least one treatment")
    sizes = {len(v) for v in x95_samples.values()}
    if 0 in sizes:
        raise ValueError("every treatment needs at least one sample")
    if len(sizes) != 1:
        raise ValueError("treatments must share the repeat count")

    ordered = sorted(x95_samples, key=lambda t: (median_iqr(x95_samples[t])[0], t))
    arrays = {t: np.asarray(x95_samples[t], dtype=np.float64) for t in ordered}
    rng = np.random.default_rng(seed)

    def split(names: list[str]) -> list[list[str]]:
        if len(names) < 2:
            return [names]
        values = [arrays[t] for t in names]
        grand = np.concatenate(values).mean()
        best_k, best_ss = 0, -1.0
        for k in range(1, len(names)):
            left = np.concatenate(values[:k])
            right = np.concatenate(values[k:])
            ss = left.size * (left.mean() - grand) ** 2 + right.size * (right.mean() - grand) ** 2
            if ss > best_ss:
                best_k, best_ss = k, ss
        left = np.concatenate(values[:best_k])
        right = np.concatenate(values[best_k:])
        differs = abs(_cliffs_delta(left, right)) >= effect_threshold and _bootstrap_differs(
            left, right, rng, resamples, confidence
        )
        if not differs:
            return [names]
        return split(names[:best_k]) + split(names[best_k:])

    entries = []
    for rank, group in enumerate(split(list(ordered)), start=1):
        for treatment in group:
            x95_med, x95_iqr = median_iqr(x95_samples[treatment])
            wss_med = wss_iqr = None
            if wss_samples is not None and treatment in wss_samples:
                wss_med, wss_iqr = median_iqr(wss_samples[treatment])
            entries.append(
                RankEntry(
                    rank=rank,
                    treatment=treatment,
                    x95_median=x95_med,
                    x95_iqr=x95_iqr,
                    wss95_median=wss_med,
                    wss95_iqr=wss_iqr,
                )
            )
    entries.sort(key=lambda e: (e.rank, e.x95_median, e.treatment))
    return RankReport(entries=tuple(entries))


@dataclass(frozen=True)
class CostModel:
    """c_abstract per title/abstract screen, c_fulltext per content review."""

    c_abstract: float
    c_fulltext: float

    def __post_init__(self):
        if self.c_abstract < 0 or self.c_fulltext < 0:
            raise ValueError("costs must be non-negative")


def cost_saving(
    result: SimulationResult,
    stats: CorpusStats,
    model: CostModel,
    fulltext_reviewed: int,
) -> float:
    """Fraction of review effort saved versus screening every candidate.

    With a known abstract-relevant count, the machine-assisted review
    costs x95 abstract screens plus the given full-text reviews, against
    all-candidates abstract screens plus full texts for every
    abstract-relevant study.  Without that count, the worst case charges
    every reviewed study both tiers and assumes only the missed relevant
    studies would have needed full text beyond the reviewed ones.
    """
    c_a, c_d = model.c_abstract, model.c_fulltext
    if stats.abstract_relevant is not None:
        ours = result.x95 * c_a + fulltext_reviewed * c_d
        everything = stats.candidates * c_a + stats.abstract_relevant * c_d
    else:
        ours = result.x95 * (c_a + c_d)
        everything = (result.x95 + len(result.missed)) * c_d + stats.candidates * c_a
    if everything == 0:
        warnings.warn("total review cost is zero; saving undefined, returning 0")
        return 0.0
    return 1.0 - ours / everything
