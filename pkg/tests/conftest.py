"""Shared corpus builders for the test suite."""

import numpy as np

from fastread import corpus as cp

TOPIC_RELEVANT = [
    "testing", "defect", "prediction", "fault", "metrics", "regression",
    "coverage", "mutation", "oracle", "suite", "flaky", "assertion",
    "debugging", "localization", "spectrum", "prioritization", "selection",
    "generation", "symbolic", "concolic", "fuzzing", "invariant", "slicing",
    "taint", "refactoring", "smell", "clone", "churn", "commit", "bug",
    "triage", "severity", "duplicate", "report", "crash", "stack",
    "traceability", "requirement", "verification", "validation",
]
TOPIC_IRRELEVANT = [
    "network", "protocol", "routing", "wireless", "packet", "sensor",
    "antenna", "bandwidth", "latency", "throughput", "congestion", "relay",
    "cellular", "handover", "modulation", "beamforming", "interference",
    "channel", "fading", "spectral", "multiplexing", "transceiver",
    "gateway", "topology", "mesh", "broadcast", "multicast", "ethernet",
    "optical", "fiber", "satellite", "radar", "telemetry", "uplink",
    "downlink", "baseband", "antennas", "repeater", "jamming", "roaming",
]
BACKGROUND = [
    "software", "system", "analysis", "approach", "study", "method",
    "result", "model", "data", "evaluation", "process", "design",
    "framework", "tool", "experiment", "case", "performance", "measure",
    "development", "application", "project", "technique", "research",
    "empirical", "industrial", "survey", "report", "review", "practice",
    "quality",
]


def make_corpus(n=120, n_relevant=25, seed=0, name="synthetic"):
    """Labeled corpus that rewards query-by-uncertainty reviewing.

    The two classes draw from disjoint 40-word topical vocabularies, so the
    corpus is linearly separable.  Each relevant study samples only a few of
    those words: two relevant studies share little vocabulary, so a model
    trained on the first few knows only a slice of the relevant pool, and
    unseen relevant studies score near zero.  Irrelevant studies are loud
    (many own-topic tokens) and score confidently negative once a handful
    are labeled.  Least-certain querying therefore surfaces the remaining
    relevant studies far faster than random order would, which mirrors how
    screening corpora behave in practice.
    """
    rng = np.random.default_rng(seed)
    relevant_ids = set(rng.choice(n, size=n_relevant, replace=False).tolist())
    records = []
    labels = []
    for i in range(n):
        if i in relevant_ids:
            strength = int(rng.integers(3, 7))
            filler = int(rng.integers(6, 11))
            words = rng.choice(TOPIC_RELEVANT, size=strength, replace=False).tolist()
        else:
            strength = int(rng.integers(6, 11))
            filler = int(rng.integers(4, 9))
            words = rng.choice(TOPIC_IRRELEVANT, size=strength, replace=False).tolist()
        words += rng.choice(BACKGROUND, size=filler).tolist()
        rng.shuffle(words)
        title = " ".join(words[:4])
        abstract = " ".join(words[4:])
        records.append((title, abstract))
        labels.append("relevant" if i in relevant_ids else "irrelevant")
    return cp.from_records(records, name=name, labels=labels)


def corpus_csv_text(corpus):
    """Render a corpus back to interchange CSV text."""
    import io

    from fastread.corpus import write_csv

    buf = io.StringIO()
    write_csv(corpus, buf)
    return buf.getvalue()
