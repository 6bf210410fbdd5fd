"""Immutable in-memory citation graph with year-windowed adjacency queries.

The graph stores papers under opaque external ids (strings) and assigns
dense internal indices in sorted-id order, so adjacency lists sorted by
internal index are also sorted by external id. All query methods are
read-only; a built graph is frozen and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

YEAR_MIN = 1500
YEAR_MAX = 2100


class GraphError(Exception):
    pass


class UnknownPaper(GraphError, KeyError):
    def __init__(self, paper_id: str):
        super().__init__(paper_id)
        self.paper_id = paper_id

    def __str__(self) -> str:
        return f"unknown paper id: {self.paper_id!r}"


class DuplicatePaper(GraphError, ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Citation window: a citer counts if 0 <= citer.year - anchor <= years.

    ``years=None`` means unlimited. Citers published before the anchor year
    never count; same-year citers always do (year-granular data cannot order
    within a year).
    """

    years: int | None = None

    def __post_init__(self) -> None:
        if self.years is not None and self.years < 1:
            raise ValueError(f"window years must be >= 1, got {self.years}")

    @classmethod
    def unlimited(cls) -> "Window":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "Window":
        text = text.strip().lower()
        if text in ("unlimited", "inf", "none", ""):
            return cls(None)
        return cls(int(text))

    def allows(self, delta_years: int) -> bool:
        if delta_years < 0:
            return False
        return self.years is None or delta_years <= self.years

    def __str__(self) -> str:
        return "unlimited" if self.years is None else str(self.years)


UNLIMITED = Window()


@dataclass(frozen=True)
class PaperRecord:
    """Per-paper metadata; reference/citation counts are filled by the graph."""

    id: str
    year: int
    doc_type: str = "journal-article"
    author_ids: tuple[str, ...] = ()
    field_ids: tuple[int, ...] = ()
    n_references: int = 0
    n_citations: int = 0


@dataclass(frozen=True)
class BuildReport:
    n_papers: int
    n_edges_in: int
    n_edges: int
    n_duplicate_edges: int
    n_self_loops: int
    n_dangling: int
    dangling_sample: tuple[tuple[str, str], ...] = ()


def _csr_from_pairs(
    src: np.ndarray, dst: np.ndarray, n: int
) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst[order].astype(np.int32)


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


def _encode_ragged(
    per_paper: list[tuple],
) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Dense-encode per-paper token tuples into CSR (indptr, sorted codes)."""
    vocab = sorted({t for toks in per_paper for t in toks})
    code = {t: i for i, t in enumerate(vocab)}
    indptr = np.zeros(len(per_paper) + 1, dtype=np.int64)
    chunks = []
    for i, toks in enumerate(per_paper):
        cs = sorted({code[t] for t in toks})
        indptr[i + 1] = indptr[i] + len(cs)
        if cs:
            chunks.append(np.asarray(cs, dtype=np.int32))
    idx = (
        np.concatenate(chunks)
        if chunks
        else np.empty(0, dtype=np.int32)
    )
    return indptr, idx, tuple(vocab)


class CitationGraph:
    """Frozen citation graph: papers plus forward/backward adjacency.

    ``ref_indptr/ref_idx`` hold each paper's references, ``cit_indptr/cit_idx``
    its citers, both as CSR over internal indices and sorted within each row.
    The two are mutually consistent by construction. ``eligible`` is an
    optional focal-eligibility mask set by corpus filters; filtered papers
    stay in the graph as references/citers.
    """

    def __init__(
        self,
        ids: list[str],
        years: np.ndarray,
        doc_codes: np.ndarray,
        doc_vocab: tuple[str, ...],
        auth_indptr: np.ndarray,
        auth_idx: np.ndarray,
        author_vocab: tuple[str, ...],
        field_indptr: np.ndarray,
        field_idx: np.ndarray,
        ref_indptr: np.ndarray,
        ref_idx: np.ndarray,
        cit_indptr: np.ndarray,
        cit_idx: np.ndarray,
        eligible: np.ndarray | None = None,
        build_report: BuildReport | None = None,
    ):
        self.ids = ids
        self._index = {pid: i for i, pid in enumerate(ids)}
        self.years = years
        self.doc_codes = doc_codes
        self.doc_vocab = doc_vocab
        self.auth_indptr = auth_indptr
        self.auth_idx = auth_idx
        self.author_vocab = author_vocab
        self.field_indptr = field_indptr
        self.field_idx = field_idx
        self.ref_indptr = ref_indptr
        self.ref_idx = ref_idx
        self.cit_indptr = cit_indptr
        self.cit_idx = cit_idx
        self.eligible = eligible
        self.build_report = build_report
        _freeze(years, doc_codes, auth_indptr, auth_idx, field_indptr,
                field_idx, ref_indptr, ref_idx, cit_indptr, cit_idx)
        if eligible is not None:
            _freeze(eligible)

    # -- identity ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._index

    def index(self, paper_id: str) -> int:
        try:
            return self._index[paper_id]
        except KeyError:
            raise UnknownPaper(paper_id) from None

    def paper_id(self, ix: int) -> str:
        return self.ids[ix]

    # -- per-paper metadata -----------------------------------------------

    @property
    def n_references(self) -> np.ndarray:
        return np.diff(self.ref_indptr)

    @property
    def n_citations(self) -> np.ndarray:
        return np.diff(self.cit_indptr)

    def year_of(self, paper_id: str) -> int:
        return int(self.years[self.index(paper_id)])

    def authors_of(self, paper_id: str) -> tuple[str, ...]:
        ix = self.index(paper_id)
        s, e = self.auth_indptr[ix], self.auth_indptr[ix + 1]
        return tuple(self.author_vocab[c] for c in self.auth_idx[s:e])

    def fields_of(self, paper_id: str) -> tuple[int, ...]:
        ix = self.index(paper_id)
        s, e = self.field_indptr[ix], self.field_indptr[ix + 1]
        return tuple(int(c) for c in self.field_idx[s:e])

    def record(self, paper_id: str) -> PaperRecord:
        ix = self.index(paper_id)
        return PaperRecord(
            id=paper_id,
            year=int(self.years[ix]),
            doc_type=self.doc_vocab[self.doc_codes[ix]],
            author_ids=self.authors_of(paper_id),
            field_ids=self.fields_of(paper_id),
            n_references=int(self.ref_indptr[ix + 1] - self.ref_indptr[ix]),
            n_citations=int(self.cit_indptr[ix + 1] - self.cit_indptr[ix]),
        )

    # -- adjacency queries --------------------------------------------------

    def _refs_ix(self, ix: int) -> np.ndarray:
        return self.ref_idx[self.ref_indptr[ix]:self.ref_indptr[ix + 1]]

    def _citers_ix(self, ix: int, window: Window, anchor_year: int,
                   exclude_ix: int = -1) -> np.ndarray:
        raw = self.cit_idx[self.cit_indptr[ix]:self.cit_indptr[ix + 1]]
        cy = self.years[raw]
        mask = cy >= anchor_year
        if window.years is not None:
            mask &= cy - anchor_year <= window.years
        if exclude_ix >= 0:
            mask &= raw != exclude_ix
        return raw[mask]

    def references(self, paper_id: str) -> list[str]:
        """Reference ids of a paper, sorted, duplicate-free. No window applies."""
        ix = self.index(paper_id)
        return [self.ids[j] for j in self._refs_ix(ix)]

    def citers(self, paper_id: str, window: Window = UNLIMITED) -> list[str]:
        """Citing-paper ids with citer.year >= paper.year, within the window."""
        ix = self.index(paper_id)
        anchor = int(self.years[ix])
        return [self.ids[j] for j in self._citers_ix(ix, window, anchor)]

    def anchored_citer_count(self, ix: int, anchor_year: int, window: Window,
                             exclude_ix: int = -1) -> int:
        """Citer count of node ``ix`` within a window anchored at another paper's year."""
        return len(self._citers_ix(ix, window, anchor_year, exclude_ix))

    def reference_citation_counts(
        self, paper_id: str, window: Window = UNLIMITED
    ) -> list[tuple[str, int]]:
        """(reference id, citer count) pairs, window anchored at the focal year.

        The focal paper itself is excluded from each reference's citer count so
        that reference impact and focal impact are measured over the same set
        of subsequent papers.
        """
        ix = self.index(paper_id)
        anchor = int(self.years[ix])
        return [
            (self.ids[r], self.anchored_citer_count(r, anchor, window, exclude_ix=ix))
            for r in self._refs_ix(ix)
        ]

    def most_cited_reference(
        self, paper_id: str, window: Window = UNLIMITED
    ) -> tuple[str, int] | None:
        """Reference with the highest windowed citer count; ties go to the
        smallest external id. None if the paper has no references."""
        ix = self.index(paper_id)
        anchor = int(self.years[ix])
        best: tuple[str, int] | None = None
        for r in self._refs_ix(ix):  # ascending internal ix == ascending id
            cnt = self.anchored_citer_count(r, anchor, window, exclude_ix=ix)
            if best is None or cnt > best[1]:
                best = (self.ids[r], cnt)
        return best

    # -- eligibility ---------------------------------------------------------

    def eligible_mask(self) -> np.ndarray:
        if self.eligible is None:
            return np.ones(len(self.ids), dtype=bool)
        return self.eligible

    def eligible_indices(self) -> np.ndarray:
        return np.flatnonzero(self.eligible_mask()).astype(np.int64)

    def eligible_ids(self) -> Iterator[str]:
        for ix in self.eligible_indices():
            yield self.ids[ix]

    def with_eligibility(self, mask: np.ndarray) -> "CitationGraph":
        """Shallow copy sharing all arrays, with a new focal-eligibility mask."""
        g = CitationGraph.__new__(CitationGraph)
        g.__dict__.update(self.__dict__)
        mask = np.asarray(mask, dtype=bool).copy()
        _freeze(mask)
        g.eligible = mask
        return g

    # -- equality (metadata + adjacency contents) ----------------------------

    def content_equal(self, other: "CitationGraph") -> bool:
        if self.ids != other.ids or self.doc_vocab != other.doc_vocab:
            return False
        if self.author_vocab != other.author_vocab:
            return False
        for name in ("years", "doc_codes", "auth_indptr", "auth_idx",
                     "field_indptr", "field_idx", "ref_indptr", "ref_idx",
                     "cit_indptr", "cit_idx"):
            if not np.array_equal(getattr(self, name), getattr(other, name)):
                return False
        a, b = self.eligible, other.eligible
        if (a is None) != (b is None):
            return np.array_equal(self.eligible_mask(), other.eligible_mask())
        return a is None or np.array_equal(a, b)


def build_graph(
    records: Iterable[PaperRecord],
    edges: Iterable[tuple[str, str]],
    *,
    strict_dangling: bool = False,
    max_dangling_sample: int = 10,
) -> CitationGraph:
    """Build a frozen CitationGraph from record and (citer, cited) streams.

    Edges may arrive unsorted and with duplicates; duplicates and self-loops
    are dropped with counts in the build report. Edges whose endpoints are not
    in ``records`` are dropped (or fatal with ``strict_dangling``). Identical
    input streams in any order produce identical graphs: internal indices are
    assigned in sorted external-id order.
    """
    recs = list(records)
    ids = sorted(r.id for r in recs)
    if len(set(ids)) != len(ids):
        dup = next(a for a, b in zip(ids, ids[1:]) if a == b)
        raise DuplicatePaper(f"duplicate paper id: {dup!r}")
    index = {pid: i for i, pid in enumerate(ids)}
    n = len(ids)

    years = np.zeros(n, dtype=np.int32)
    doc_names: list[str] = [""] * n
    authors: list[tuple] = [()] * n
    fields: list[tuple] = [()] * n
    for r in recs:
        if not r.id or "\n" in r.id:
            raise ValueError(f"bad paper id {r.id!r}")
        if not r.doc_type or "\n" in r.doc_type:
            raise ValueError(f"paper {r.id!r} has bad doc_type {r.doc_type!r}")
        if any((not a) or "\n" in a for a in r.author_ids):
            raise ValueError(f"paper {r.id!r} has a bad author id")
        i = index[r.id]
        years[i] = r.year
        doc_names[i] = r.doc_type
        authors[i] = tuple(r.author_ids)
        fields[i] = tuple(r.field_ids)

    bad_year = (years < YEAR_MIN) | (years > YEAR_MAX)
    if n and bad_year.any():
        j = int(np.flatnonzero(bad_year)[0])
        raise ValueError(
            f"paper {ids[j]!r} has year {years[j]} outside [{YEAR_MIN}, {YEAR_MAX}]"
        )

    doc_vocab = tuple(sorted(set(doc_names)))
    doc_code = {d: i for i, d in enumerate(doc_vocab)}
    doc_codes = np.asarray([doc_code[d] for d in doc_names], dtype=np.uint16)

    auth_indptr, auth_idx, author_vocab = _encode_ragged(authors)
    field_ptr_list: list[tuple] = [tuple(sorted(set(f))) for f in fields]
    field_indptr = np.zeros(n + 1, dtype=np.int64)
    fchunks = []
    for i, fs in enumerate(field_ptr_list):
        if fs and (min(fs) < 0):
            raise ValueError(f"paper {ids[i]!r} has negative field id")
        field_indptr[i + 1] = field_indptr[i] + len(fs)
        if fs:
            fchunks.append(np.asarray(fs, dtype=np.int32))
    field_idx = np.concatenate(fchunks) if fchunks else np.empty(0, dtype=np.int32)

    citer_list: list[int] = []
    cited_list: list[int] = []
    n_edges_in = 0
    n_self = 0
    n_dangling = 0
    dangling_sample: list[tuple[str, str]] = []
    get = index.get
    for a, b in edges:
        n_edges_in += 1
        ia = get(a, -1)
        ib = get(b, -1)
        if ia < 0 or ib < 0:
            n_dangling += 1
            if len(dangling_sample) < max_dangling_sample:
                dangling_sample.append((a, b))
            continue
        if ia == ib:
            n_self += 1
            continue
        citer_list.append(ia)
        cited_list.append(ib)
    if strict_dangling and n_dangling:
        raise GraphError(
            f"{n_dangling} dangling edges (first: {dangling_sample[:3]})"
        )

    citer = np.asarray(citer_list, dtype=np.int64)
    cited = np.asarray(cited_list, dtype=np.int64)
    if len(citer):
        key = citer * n + cited
        key = np.unique(key)
        citer = key // n
        cited = key % n
    n_dup = len(citer_list) - len(citer)

    ref_indptr, ref_idx = _csr_from_pairs(citer, cited, n)
    cit_indptr, cit_idx = _csr_from_pairs(cited, citer, n)

    report = BuildReport(
        n_papers=n,
        n_edges_in=n_edges_in,
        n_edges=len(citer),
        n_duplicate_edges=n_dup,
        n_self_loops=n_self,
        n_dangling=n_dangling,
        dangling_sample=tuple(dangling_sample),
    )
    return CitationGraph(
        ids=ids,
        years=years,
        doc_codes=doc_codes,
        doc_vocab=doc_vocab,
        auth_indptr=auth_indptr,
        auth_idx=auth_idx,
        author_vocab=author_vocab,
        field_indptr=field_indptr,
        field_idx=field_idx,
        ref_indptr=ref_indptr,
        ref_idx=ref_idx,
        cit_indptr=cit_indptr,
        cit_idx=cit_idx,
        build_report=report,
    )
