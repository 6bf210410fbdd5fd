"""Streaming TSV parsers and corpus-hygiene filtering.

papers.tsv: header ``id\\tyear\\tdoc_type\\tauthor_ids\\tfield_ids`` with
author/field lists semicolon-joined. edges.tsv: header ``citer_id\\tcited_id``.
Malformed lines are collected (with line numbers) rather than aborting the
stream; callers can set a bad-line fraction that aborts at end of stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .graph import CitationGraph, PaperRecord

PAPERS_HEADER = ("id", "year", "doc_type", "author_ids", "field_ids")
EDGES_HEADER = ("citer_id", "cited_id")

MAX_FIELD_ID = 291  # taxonomy of 292 categories


class IngestError(Exception):
    pass


class MissingHeader(IngestError):
    pass


class TooManyParseErrors(IngestError):
    pass


@dataclass
class ParseIssue:
    line_no: int
    message: str
    text: str


@dataclass
class ParseReport:
    """Mutable tally filled while a parser generator is consumed."""

    n_lines: int = 0
    n_records: int = 0
    n_bad: int = 0
    n_blank: int = 0
    n_self_loops: int = 0
    issues: list[ParseIssue] = field(default_factory=list)
    max_issues: int = 50

    def add_issue(self, line_no: int, message: str, text: str) -> None:
        self.n_bad += 1
        if len(self.issues) < self.max_issues:
            self.issues.append(ParseIssue(line_no, message, text[:120]))

    @property
    def bad_fraction(self) -> float:
        seen = self.n_records + self.n_bad
        return self.n_bad / seen if seen else 0.0


def _check_threshold(report: ParseReport, max_bad_fraction: float | None) -> None:
    if max_bad_fraction is not None and report.bad_fraction > max_bad_fraction:
        raise TooManyParseErrors(
            f"{report.n_bad} bad lines out of {report.n_records + report.n_bad} "
            f"({report.bad_fraction:.1%} > {max_bad_fraction:.1%} allowed)"
        )


def _read_header(lines: Iterator[str], expected: tuple[str, ...]) -> None:
    first = next(lines, None)
    if first is None:
        raise MissingHeader(f"empty input, expected header {expected}")
    cols = tuple(first.lstrip("﻿").rstrip("\r\n").split("\t"))
    if cols != expected:
        raise MissingHeader(f"expected header {expected}, got {cols}")


def parse_papers(
    lines: Iterable[str],
    report: ParseReport | None = None,
    *,
    max_field_id: int = MAX_FIELD_ID,
    max_bad_fraction: float | None = None,
) -> Iterator[PaperRecord]:
    """Yield one PaperRecord per valid line of a papers.tsv stream."""
    rep = report if report is not None else ParseReport()
    it = iter(lines)
    _read_header(it, PAPERS_HEADER)
    for line_no, line in enumerate(it, start=2):
        rep.n_lines += 1
        line = line.rstrip("\r\n")
        if not line:
            rep.n_blank += 1
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            rep.add_issue(line_no, f"expected 5 columns, got {len(parts)}", line)
            continue
        pid, year_s, doc_type, authors_s, fields_s = parts
        if not pid:
            rep.add_issue(line_no, "empty id", line)
            continue
        try:
            year = int(year_s)
        except ValueError:
            rep.add_issue(line_no, f"bad year {year_s!r}", line)
            continue
        if not 1500 <= year <= 2100:
            rep.add_issue(line_no, f"year {year} out of range", line)
            continue
        if not doc_type:
            rep.add_issue(line_no, "empty doc_type", line)
            continue
        author_ids = tuple(a for a in authors_s.split(";") if a) if authors_s else ()
        try:
            field_ids = tuple(int(f) for f in fields_s.split(";") if f) if fields_s else ()
        except ValueError:
            rep.add_issue(line_no, f"bad field ids {fields_s!r}", line)
            continue
        if any(f < 0 or f > max_field_id for f in field_ids):
            rep.add_issue(line_no, f"field id out of [0, {max_field_id}]", line)
            continue
        rep.n_records += 1
        yield PaperRecord(
            id=pid, year=year, doc_type=doc_type,
            author_ids=author_ids, field_ids=field_ids,
        )
    _check_threshold(rep, max_bad_fraction)


def parse_edges(
    lines: Iterable[str],
    report: ParseReport | None = None,
    *,
    max_bad_fraction: float | None = None,
) -> Iterator[tuple[str, str]]:
    """Yield (citer_id, cited_id) pairs in input order; no deduplication.

    Self-loops are emitted (and tallied); the graph builder drops them.
    Blank lines are skipped silently.
    """
    rep = report if report is not None else ParseReport()
    it = iter(lines)
    _read_header(it, EDGES_HEADER)
    for line_no, line in enumerate(it, start=2):
        rep.n_lines += 1
        line = line.rstrip("\r\n")
        if not line:
            rep.n_blank += 1
            continue
        citer, sep, cited = line.partition("\t")
        if not sep or not citer or not cited or "\t" in cited:
            rep.add_issue(line_no, "expected 2 tab-separated ids", line)
            continue
        if citer == cited:
            rep.n_self_loops += 1
        rep.n_records += 1
        yield (citer, cited)
    _check_threshold(rep, max_bad_fraction)


@dataclass(frozen=True)
class CorpusFilter:
    """Focal-eligibility rules; filtered papers stay in the graph as context."""

    min_references: int = 1
    min_citations: int = 1
    doc_types: frozenset[str] = frozenset({"journal-article"})
    min_year: int | None = None
    max_year: int | None = None

    def __post_init__(self) -> None:
        if self.min_references < 0 or self.min_citations < 0:
            raise ValueError("min_references/min_citations must be >= 0")
        if not self.doc_types:
            raise ValueError("doc_types must be nonempty")


@dataclass(frozen=True)
class FilterReport:
    n_total: int
    n_eligible: int
    excluded_by_doc_type: int
    excluded_by_references: int
    excluded_by_citations: int
    excluded_by_year: int


def apply_filter(
    g: CitationGraph, f: CorpusFilter = CorpusFilter()
) -> tuple[CitationGraph, FilterReport]:
    """Mark focal eligibility on a copy of the graph; nothing is deleted.

    Exclusion counts are tallied per reason independently, so a paper failing
    two rules increments both counters. Composes with an existing eligibility
    mask (intersection), so tightening a filter never grows the eligible set.
    """
    n = len(g)
    doc_ok = np.zeros(n, dtype=bool)
    for d in f.doc_types:
        if d in g.doc_vocab:
            doc_ok |= g.doc_codes == g.doc_vocab.index(d)
    refs_ok = g.n_references >= f.min_references
    cits_ok = g.n_citations >= f.min_citations
    year_ok = np.ones(n, dtype=bool)
    if f.min_year is not None:
        year_ok &= g.years >= f.min_year
    if f.max_year is not None:
        year_ok &= g.years <= f.max_year

    base = g.eligible_mask()
    mask = base & doc_ok & refs_ok & cits_ok & year_ok
    report = FilterReport(
        n_total=n,
        n_eligible=int(mask.sum()),
        excluded_by_doc_type=int((base & ~doc_ok).sum()),
        excluded_by_references=int((base & ~refs_ok).sum()),
        excluded_by_citations=int((base & ~cits_ok).sum()),
        excluded_by_year=int((base & ~year_ok).sum()),
    )
    return g.with_eligibility(mask), report
