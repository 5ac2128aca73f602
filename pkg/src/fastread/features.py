"""Sparse tf-idf features over study titles and abstracts.

Each study's title and abstract are concatenated, lowercased, split on
non-alphanumerics, and stripped of stop words.  Terms are scored by
summed tf-idf across the corpus, the top ``M`` terms become the
vocabulary, and each document becomes an L2-normalized sparse row of
tf * idf weights over that vocabulary.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .corpus import Corpus, Study
from .stopwords import STOPWORDS

MAX_TERMS = 4000

_TOKEN = re.compile(r"[a-z0-9]+")


class EmptyVocabularyError(Exception):
    """No usable terms survived tokenization and stop-word removal."""


def tokenize_text(text: str, stoplist: frozenset[str] | set[str] = STOPWORDS) -> list[str]:
    """Lowercase alphanumeric tokens of length >= 2, stop words removed."""
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2 and t not in stoplist]


def tokenize(study: Study, stoplist: frozenset[str] | set[str] = STOPWORDS) -> list[str]:
    return tokenize_text(study.title + " " + study.abstract, stoplist)


@dataclass(frozen=True)
class Vocabulary:
    """All distinct corpus terms plus the top-M selection used for features.

    ``terms`` is lexicographically sorted; ``df``, ``idf`` and ``selected``
    align with it.  Feature columns are the selected terms in ``terms``
    order, so column order is deterministic.
    """

    terms: tuple[str, ...]
    df: np.ndarray
    idf: np.ndarray
    selected: np.ndarray
    n_docs: int

    @property
    def selected_terms(self) -> tuple[str, ...]:
        return tuple(t for t, keep in zip(self.terms, self.selected) if keep)

    @property
    def dim(self) -> int:
        return int(self.selected.sum())

    def column_index(self) -> dict[str, int]:
        """Map selected term -> feature column."""
        return {t: i for i, t in enumerate(self.selected_terms)}


@dataclass(frozen=True)
class FeatureMatrix:
    """One sparse row per study, in corpus order."""

    matrix: sparse.csr_matrix
    dim: int

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def rows(self, ids) -> sparse.csr_matrix:
        return self.matrix[ids]


def fit(
    corpus: Corpus,
    max_terms: int = MAX_TERMS,
    stoplist: frozenset[str] | set[str] = STOPWORDS,
) -> Vocabulary:
    """Score every term by summed tf-idf and keep the ``max_terms`` best.

    Ties at the selection boundary break lexicographically, so the result
    is a deterministic function of the corpus text alone.
    """
    n_docs = len(corpus)
    df: Counter[str] = Counter()
    total_tf: Counter[str] = Counter()
    for study in corpus.studies:
        counts = Counter(tokenize(study, stoplist))
        for term, count in counts.items():
            df[term] += 1
            total_tf[term] += count
    if not df:
        raise EmptyVocabularyError(f"corpus {corpus.name!r} has no usable terms")

    terms = tuple(sorted(df))
    df_arr = np.array([df[t] for t in terms], dtype=np.int64)
    idf_arr = np.log(n_docs / df_arr) + 1.0
    scores = np.array([total_tf[t] for t in terms], dtype=np.float64) * idf_arr

    selected = np.zeros(len(terms), dtype=bool)
    if len(terms) <= max_terms:
        selected[:] = True
    else:
        # stable sort on (-score) keeps lexicographic order among ties
        order = np.argsort(-scores, kind="stable")
        selected[order[:max_terms]] = True
    return Vocabulary(terms=terms, df=df_arr, idf=idf_arr, selected=selected, n_docs=n_docs)


def transform(
    corpus: Corpus,
    vocab: Vocabulary,
    stoplist: frozenset[str] | set[str] = STOPWORDS,
) -> FeatureMatrix:
    """tf * idf rows over the selected vocabulary, L2-normalized.

    Documents containing no selected term come out as all-zero rows.
    """
    column = vocab.column_index()
    idf_by_term = {t: vocab.idf[i] for i, t in enumerate(vocab.terms) if vocab.selected[i]}
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for study in corpus.studies:
        counts = Counter(tokenize(study, stoplist))
        entries = sorted(
            (column[t], tf * idf_by_term[t]) for t, tf in counts.items() if t in column
        )
        norm = math.sqrt(sum(v * v for _, v in entries))
        for col, value in entries:
            indices.append(col)
            data.append(value / norm)
        indptr.append(len(indices))
    dim = len(column)
    matrix = sparse.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
        shape=(len(corpus), dim),
    )
    return FeatureMatrix(matrix=matrix, dim=dim)


def featurize(corpus: Corpus, max_terms: int = MAX_TERMS) -> FeatureMatrix:
    """fit + transform in one call."""
    return transform(corpus, fit(corpus, max_terms))
