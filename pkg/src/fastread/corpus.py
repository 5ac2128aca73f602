"""Candidate-study collections and their CSV interchange format.

A corpus is loaded from a CSV file whose header must contain the columns
"Document Title", "Abstract", "Year" and "PDF Link".  An optional "label"
column carries ground-truth relevance (used to answer queries during
simulation) and an optional "code" column carries reviewer decisions.
Corpora are immutable after load; reviewer codes are attached by building
a new corpus via :meth:`Corpus.with_codes`.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable

REQUIRED_COLUMNS = ("Document Title", "Abstract", "Year", "PDF Link")
LABEL_COLUMN = "label"
CODE_COLUMN = "code"

RELEVANT = "relevant"
IRRELEVANT = "irrelevant"

CODE_YES = "yes"
CODE_NO = "no"
CODE_UNDETERMINED = "undetermined"

_LABEL_VALUES = {"yes": RELEVANT, "no": IRRELEVANT}
_CODE_VALUES = {"yes": CODE_YES, "no": CODE_NO, "undetermined": CODE_UNDETERMINED}


class CorpusError(Exception):
    """Base class for corpus loading and export failures."""


class CorpusFormatError(CorpusError):
    """The CSV file does not match the expected column layout."""


class EmptyCorpusError(CorpusError):
    """The CSV file contains a header but no data rows."""


@dataclass(frozen=True)
class Study:
    """One bibliographic record within a corpus.

    ``oracle_label`` is the ground truth used by simulations (``relevant`` /
    ``irrelevant`` or None when unknown); ``code`` is the reviewer's decision
    and starts ``undetermined``.
    """

    id: int
    title: str
    abstract: str = ""
    year: int | None = None
    pdf_link: str = ""
    oracle_label: str | None = None
    code: str = CODE_UNDETERMINED
    year_raw: str | None = None
    extras: tuple[str, ...] = ()

    @property
    def year_text(self) -> str:
        if self.year_raw is not None:
            return self.year_raw
        return "" if self.year is None else str(self.year)


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of studies.

    Safe to share read-only across concurrent simulation runs; all
    mutation-shaped operations return a new corpus.
    """

    name: str
    studies: tuple[Study, ...]
    has_label_column: bool = False
    extra_columns: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.studies)

    def __getitem__(self, study_id: int) -> Study:
        return self.studies[study_id]

    @property
    def relevant_ids(self) -> frozenset[int]:
        return frozenset(s.id for s in self.studies if s.oracle_label == RELEVANT)

    @property
    def fully_labeled(self) -> bool:
        return all(s.oracle_label is not None for s in self.studies)

    def with_codes(self, codes: dict[int, str]) -> "Corpus":
        """Snapshot of this corpus with reviewer codes applied.

        ``codes`` maps study id to ``yes``/``no``; ids absent from the map
        keep their existing code.
        """
        studies = []
        for s in self.studies:
            if s.id in codes:
                code = codes[s.id]
                if code not in (CODE_YES, CODE_NO, CODE_UNDETERMINED):
                    raise ValueError(f"invalid code {code!r} for study {s.id}")
                studies.append(replace(s, code=code))
            else:
                studies.append(s)
        return replace(self, studies=tuple(studies))


@dataclass(frozen=True)
class CorpusStats:
    candidates: int
    relevant: int | None
    abstract_relevant: int | None = None


def _parse_label(raw: str, row_num: int) -> str | None:
    value = raw.strip().lower()
    if not value:
        return None
    if value in _LABEL_VALUES:
        return _LABEL_VALUES[value]
    warnings.warn(
        f"row {row_num}: unknown label {raw!r} treated as unlabeled", stacklevel=3
    )
    return None


def _parse_code(raw: str, row_num: int) -> str:
    value = raw.strip().lower()
    if not value:
        return CODE_UNDETERMINED
    if value in _CODE_VALUES:
        return _CODE_VALUES[value]
    warnings.warn(
        f"row {row_num}: unknown code {raw!r} treated as undetermined", stacklevel=3
    )
    return CODE_UNDETERMINED


def _parse_year(raw: str) -> int | None:
    try:
        return int(raw.strip())
    except ValueError:
        return None


def load_csv(path: str | Path, name: str | None = None) -> Corpus:
    """Load a candidate-study corpus from ``path``.

    The header must contain the four required columns (matched exactly
    after trimming whitespace).  Rows become studies in file order with
    ids 0..n-1.  Raises :class:`CorpusFormatError` when a required column
    is missing or a row cannot be parsed, :class:`EmptyCorpusError` when
    the file has no data rows.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        columns = {}
        for idx, col in enumerate(header):
            columns.setdefault(col, idx)
        for col in REQUIRED_COLUMNS:
            if col not in columns:
                raise CorpusFormatError(f"{path}: missing required column {col!r}")
        has_label = LABEL_COLUMN in columns
        has_code = CODE_COLUMN in columns
        core = set(REQUIRED_COLUMNS) | {LABEL_COLUMN, CODE_COLUMN}
        extra_columns = tuple(c for c in header if c not in core)
        extra_idx = [columns[c] for c in extra_columns]

        studies = []
        for row_num, row in enumerate(reader):
            needed = max(columns[c] for c in REQUIRED_COLUMNS)
            if len(row) <= needed:
                raise CorpusFormatError(
                    f"{path}: row {row_num} has {len(row)} fields, expected at least {needed + 1}"
                )

            def cell(col: str) -> str:
                idx = columns[col]
                return row[idx] if idx < len(row) else ""

            year_raw = cell("Year")
            studies.append(
                Study(
                    id=row_num,
                    title=cell("Document Title"),
                    abstract=cell("Abstract"),
                    year=_parse_year(year_raw),
                    year_raw=year_raw,
                    pdf_link=cell("PDF Link"),
                    oracle_label=_parse_label(cell(LABEL_COLUMN), row_num) if has_label else None,
                    code=_parse_code(cell(CODE_COLUMN), row_num) if has_code else CODE_UNDETERMINED,
                    extras=tuple(row[i] if i < len(row) else "" for i in extra_idx),
                )
            )

    if not studies:
        raise EmptyCorpusError(f"{path}: no data rows")
    return Corpus(
        name=name if name is not None else path.stem,
        studies=tuple(studies),
        has_label_column=has_label,
        extra_columns=extra_columns,
    )


def _label_text(label: str | None) -> str:
    if label == RELEVANT:
        return "yes"
    if label == IRRELEVANT:
        return "no"
    return ""


def write_csv(corpus: Corpus, fh: IO[str]) -> None:
    """Write ``corpus`` to an open text stream in the interchange format."""
    if not corpus.studies:
        raise EmptyCorpusError("refusing to export an empty corpus")
    header = list(REQUIRED_COLUMNS)
    if corpus.has_label_column:
        header.append(LABEL_COLUMN)
    header.extend(corpus.extra_columns)
    header.append(CODE_COLUMN)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for s in corpus.studies:
        row = [s.title, s.abstract, s.year_text, s.pdf_link]
        if corpus.has_label_column:
            row.append(_label_text(s.oracle_label))
        row.extend(s.extras)
        row.append(s.code)
        writer.writerow(row)


def export_csv(corpus: Corpus, path: str | Path) -> None:
    """Write ``corpus`` (all input columns plus the code column) to ``path``."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        write_csv(corpus, fh)


def stats(corpus: Corpus) -> CorpusStats:
    """Candidate and relevant counts; relevant is None for unlabeled corpora."""
    labeled = [s for s in corpus.studies if s.oracle_label is not None]
    if not labeled:
        return CorpusStats(candidates=len(corpus), relevant=None)
    relevant = sum(1 for s in labeled if s.oracle_label == RELEVANT)
    return CorpusStats(candidates=len(corpus), relevant=relevant)


def from_records(
    records: Iterable[tuple[str, str]],
    name: str = "corpus",
    labels: Iterable[str | None] | None = None,
) -> Corpus:
    """Build a corpus from (title, abstract) pairs, mainly for tests and tools."""
    pairs = list(records)
    label_list: list[str | None]
    if labels is None:
        label_list = [None] * len(pairs)
    else:
        label_list = list(labels)
        if len(label_list) != len(pairs):
            raise ValueError("labels length does not match records")
    studies = tuple(
        Study(id=i, title=title, abstract=abstract, oracle_label=label)
        for i, ((title, abstract), label) in enumerate(zip(pairs, label_list))
    )
    if not studies:
        raise EmptyCorpusError("no records")
    return Corpus(name=name, studies=studies, has_label_column=labels is not None)
