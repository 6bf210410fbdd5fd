"""Citer classification and the disruption index family.

Subsequent papers relative to a focal paper split into three types: those
citing only the focal paper (i), those citing the focal paper and at least
one of its references (j), and those citing references only (k). The index
is (N_i - N_j) / (N_i + N_j + N_k); it factors exactly into a local
displacement term (N_i - N_j)/(N_i + N_j) damped by 1 + N_k/(N_i + N_j),
and is approximated by local displacement over (1 + knowledge burden), where
burden is the most-cited reference's citation count over the focal paper's.

Papers with no references or no in-window citers get a flagged null, never
a structurally forced 0.0 or 1.0; their classification is empty.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import UNLIMITED, CitationGraph, Window

FLAG_NO_REFS = "no_refs"
FLAG_NO_CITERS = "no_citers"
FLAG_NO_AUTHOR_DATA = "no_author_data"

N_COUNTS = 15
# counts row layout:
# 0 c_p | 1 n_i | 2 n_j | 3 n_k | 4 n_i1 | 5 n_j1 | 6 n_k1
# 7 n_i2 | 8 n_j2 | 9 n_k2 | 10 w_j | 11 w_k | 12 c_max | 13 best_ref | 14 n_refs


@dataclass(frozen=True)
class VariantConfig:
    """Settings for the alternative index definitions.

    ``popular_quantile`` sets the popularity cutoff for the popular-references
    variant as a corpus-wide quantile of citation counts among cited papers;
    ``popular_min_citations`` overrides it with a fixed count. The weighted
    variant can optionally include weighted k-citers in its denominator.
    """

    popular_quantile: float = 0.75
    popular_min_citations: int | None = None
    self_citation_rule: str = "author_overlap"  # or "off"
    d4_weighted_k_denominator: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.popular_quantile <= 1.0:
            raise ValueError("popular_quantile must be in (0, 1]")
        if self.self_citation_rule not in ("author_overlap", "off"):
            raise ValueError(f"bad self_citation_rule {self.self_citation_rule!r}")


@dataclass(frozen=True)
class CiterClassification:
    focal: str
    window: Window
    set_i: tuple[str, ...]
    set_j: tuple[str, ...]
    set_k: tuple[str, ...]
    flags: tuple[str, ...] = ()

    @property
    def n_i(self) -> int:
        return len(self.set_i)

    @property
    def n_j(self) -> int:
        return len(self.set_j)

    @property
    def n_k(self) -> int:
        return len(self.set_k)


@dataclass(frozen=True)
class Decomposition:
    local_displacement: float
    k_ratio: float
    burden: float | None
    reconstruction: float  # local_displacement / (1 + k_ratio) == d_index


@dataclass(frozen=True)
class DisruptionResult:
    """Per-focal-paper metrics row. Null metrics carry explanatory flags."""

    id: str
    year: int
    n_authors: int
    n_refs: int
    n_i: int
    n_j: int
    n_k: int
    c_p: int
    c_max: int | None
    d0: float | None
    local_displacement: float | None
    k_ratio: float | None
    burden: float | None
    d1: float | None
    d2: float | None
    d3: float | None
    d4: float | None
    flags: tuple[str, ...] = ()


def popularity_threshold(g: CitationGraph, cfg: VariantConfig) -> float:
    """Resolve the popular-reference cutoff once per corpus.

    The pool is the citation counts of papers cited at least once (the
    papers that can appear as references); a reference is popular when its
    count is >= the threshold.
    """
    if cfg.popular_min_citations is not None:
        return float(cfg.popular_min_citations)
    indeg = g.n_citations
    pool = indeg[indeg > 0]
    if pool.size == 0:
        return float("inf")
    return float(np.quantile(pool, cfg.popular_quantile))


def _popular_mask(g: CitationGraph, cfg: VariantConfig,
                  threshold: float | None = None) -> np.ndarray:
    if threshold is None:
        threshold = popularity_threshold(g, cfg)
    return g.n_citations >= threshold


def _flags_for(g: CitationGraph, ix: int, n_refs: int, c_p: int,
               cfg: VariantConfig) -> tuple[str, ...]:
    flags = []
    if n_refs == 0:
        flags.append(FLAG_NO_REFS)
    if c_p == 0:
        flags.append(FLAG_NO_CITERS)
    if (cfg.self_citation_rule == "author_overlap"
            and g.auth_indptr[ix + 1] == g.auth_indptr[ix]):
        flags.append(FLAG_NO_AUTHOR_DATA)
    return tuple(flags)


def classify_citers(
    g: CitationGraph, paper_id: str, window: Window = UNLIMITED
) -> CiterClassification:
    """Split subsequent papers into types i/j/k for one focal paper.

    A paper with no references or no in-window citers yields an empty,
    flagged classification. The focal paper itself never appears in any set.
    """
    ix = g.index(paper_id)
    y0 = int(g.years[ix])
    wcit = g._citers_ix(ix, window, y0)
    refs = g._refs_ix(ix)
    if len(refs) == 0 or len(wcit) == 0:
        flags = []
        if len(refs) == 0:
            flags.append(FLAG_NO_REFS)
        if len(wcit) == 0:
            flags.append(FLAG_NO_CITERS)
        return CiterClassification(paper_id, window, (), (), (), tuple(flags))
    parts = [g._citers_ix(int(r), window, y0, exclude_ix=ix) for r in refs]
    u = np.unique(np.concatenate(parts))
    in_u = np.isin(wcit, u, assume_unique=True)
    set_j = wcit[in_u]
    set_i = wcit[~in_u]
    set_k = u[~np.isin(u, wcit, assume_unique=True)]
    return CiterClassification(
        focal=paper_id,
        window=window,
        set_i=tuple(g.ids[c] for c in set_i),
        set_j=tuple(g.ids[c] for c in set_j),
        set_k=tuple(g.ids[c] for c in set_k),
    )


def _author_set(g: CitationGraph, ix: int) -> frozenset[int]:
    s, e = g.auth_indptr[ix], g.auth_indptr[ix + 1]
    return frozenset(g.auth_idx[s:e].tolist())


def _counts_one(g: CitationGraph, ix: int, window: Window,
                popular: np.ndarray) -> np.ndarray:
    """Reference implementation of the per-paper count vector (see layout)."""
    out = np.zeros(N_COUNTS, dtype=np.int64)
    y0 = int(g.years[ix])
    wcit = g._citers_ix(ix, window, y0)
    refs = g._refs_ix(ix)
    n_refs = len(refs)
    c_p = len(wcit)
    out[0] = c_p
    out[14] = n_refs
    out[12] = -1
    out[13] = -1

    parts = []
    c_max, best_ref = -1, -1
    for r in refs:
        cs = g._citers_ix(int(r), window, y0, exclude_ix=ix)
        parts.append((int(r), cs))
        if len(cs) > c_max:  # ties keep the smaller ref index
            c_max, best_ref = len(cs), int(r)
    out[12] = c_max
    out[13] = best_ref

    if n_refs == 0 or c_p == 0:
        return out

    all_c = (np.concatenate([cs for _, cs in parts])
             if parts else np.empty(0, dtype=np.int32))
    u, mult = np.unique(all_c, return_counts=True)
    pop_parts = [cs for r, cs in parts if popular[r]]
    pu = (np.unique(np.concatenate(pop_parts))
          if pop_parts else np.empty(0, dtype=np.int32))

    in_u = np.isin(wcit, u, assume_unique=True)
    n_j = int(in_u.sum())
    n_i = c_p - n_j
    n_k = len(u) - n_j
    w_total = int(mult.sum())
    w_j = int(mult[np.searchsorted(u, wcit[in_u])].sum()) if n_j else 0
    w_k = w_total - w_j

    in_pu = np.isin(wcit, pu, assume_unique=True)
    n_j2 = int(in_pu.sum())
    n_i2 = c_p - n_j2
    n_k2 = len(pu) - n_j2

    focal_auth = _author_set(g, ix)
    if focal_auth:
        def is_self(c: int) -> bool:
            s, e = g.auth_indptr[c], g.auth_indptr[c + 1]
            return not focal_auth.isdisjoint(g.auth_idx[s:e].tolist())

        self_w = np.fromiter((is_self(int(c)) for c in wcit), dtype=bool,
                             count=c_p)
        n_j1 = int((in_u & ~self_w).sum())
        n_i1 = int((~in_u & ~self_w).sum())
        k_members = u[~np.isin(u, wcit, assume_unique=True)]
        n_k1 = sum(1 for c in k_members if not is_self(int(c)))
    else:
        n_i1, n_j1, n_k1 = n_i, n_j, n_k

    out[1:12] = (n_i, n_j, n_k, n_i1, n_j1, n_k1, n_i2, n_j2, n_k2, w_j, w_k)
    return out


def _derive(g: CitationGraph, ix: int, row: Sequence[int],
            cfg: VariantConfig) -> DisruptionResult:
    (c_p, n_i, n_j, n_k, n_i1, n_j1, n_k1, n_i2, n_j2, n_k2,
     w_j, w_k, c_max, _best, n_refs) = (int(x) for x in row)
    flags = _flags_for(g, ix, n_refs, c_p, cfg)
    defined = n_refs > 0 and c_p > 0
    if not defined:
        # flagged papers report the (empty) classification, not raw counts
        n_i = n_j = n_k = c_p = 0

    d0 = (n_i - n_j) / (n_i + n_j + n_k) if defined else None
    local = (n_i - n_j) / c_p if defined else None
    k_ratio = n_k / c_p if defined else None
    burden = c_max / c_p if defined else None

    if cfg.self_citation_rule == "off" or FLAG_NO_AUTHOR_DATA in flags:
        d1 = d0
    elif defined and (n_i1 + n_j1) > 0:
        d1 = (n_i1 - n_j1) / (n_i1 + n_j1 + n_k1)
    else:
        d1 = None
    d2 = (n_i2 - n_j2) / (n_i2 + n_j2 + n_k2) if defined else None
    d3 = n_i / c_p if defined else None
    if defined:
        den = n_i + w_j + (w_k if cfg.d4_weighted_k_denominator else 0)
        d4 = n_i / den
    else:
        d4 = None

    return DisruptionResult(
        id=g.ids[ix],
        year=int(g.years[ix]),
        n_authors=int(g.auth_indptr[ix + 1] - g.auth_indptr[ix]),
        n_refs=n_refs,
        n_i=n_i, n_j=n_j, n_k=n_k, c_p=c_p,
        c_max=(c_max if defined else None),
        d0=d0,
        local_displacement=local,
        k_ratio=k_ratio,
        burden=burden,
        d1=d1, d2=d2, d3=d3, d4=d4,
        flags=flags,
    )


def compute_result(
    g: CitationGraph,
    paper_id: str,
    window: Window = UNLIMITED,
    cfg: VariantConfig = VariantConfig(),
    *,
    popular: np.ndarray | None = None,
) -> DisruptionResult:
    """Full metrics row for one paper (resolves the popularity cutoff per call
    unless a precomputed mask is supplied)."""
    ix = g.index(paper_id)
    if popular is None:
        popular = _popular_mask(g, cfg)
    return _derive(g, ix, _counts_one(g, ix, window, popular), cfg)


def d_index(g: CitationGraph, paper_id: str,
            window: Window = UNLIMITED) -> float | None:
    """(N_i - N_j)/(N_i + N_j + N_k); None (never 0.0) when the paper has no
    references or no in-window citers."""
    cls = classify_citers(g, paper_id, window)
    if cls.flags:
        return None
    return (cls.n_i - cls.n_j) / (cls.n_i + cls.n_j + cls.n_k)


def decompose(g: CitationGraph, paper_id: str,
              window: Window = UNLIMITED) -> Decomposition | None:
    """Local displacement, k-ratio, burden, and the reconstructed index.

    None when the paper has no in-window citers. Burden is None when the
    paper has no references.
    """
    res = compute_result(g, paper_id, window)
    if res.local_displacement is None or res.k_ratio is None:
        return None
    return Decomposition(
        local_displacement=res.local_displacement,
        k_ratio=res.k_ratio,
        burden=res.burden,
        reconstruction=res.local_displacement / (1.0 + res.k_ratio),
    )


def d_variants(
    g: CitationGraph,
    paper_id: str,
    window: Window = UNLIMITED,
    cfg: VariantConfig = VariantConfig(),
    *,
    popular: np.ndarray | None = None,
) -> tuple[float | None, float | None, float | None, float | None]:
    """The four alternative definitions (self-citation-free, popular-references,
    focal-citer fraction, citation-weighted) for one paper."""
    res = compute_result(g, paper_id, window, cfg, popular=popular)
    return (res.d1, res.d2, res.d3, res.d4)


def _counts_batch(
    g: CitationGraph,
    focals: np.ndarray,
    window: Window,
    popular: np.ndarray,
    *,
    workers: int = 1,
    engine: str = "auto",
) -> np.ndarray:
    if engine == "auto":
        from . import _kernels
        engine = "numba" if _kernels.available() else "python"
    out = np.zeros((len(focals), N_COUNTS), dtype=np.int64)
    if engine == "python":
        for t, ix in enumerate(focals):
            out[t] = _counts_one(g, int(ix), window, popular)
        return out
    if engine != "numba":
        raise ValueError(f"unknown engine {engine!r}")
    from . import _kernels
    wyears = -1 if window.years is None else int(window.years)
    pop_u8 = popular.astype(np.uint8)
    args = (g.years, g.ref_indptr, g.ref_idx, g.cit_indptr, g.cit_idx,
            g.auth_indptr, g.auth_idx, pop_u8, wyears)
    if workers <= 1 or len(focals) < 2048:
        _kernels.classify_batch(focals, *args, out)
        return out
    bounds = np.linspace(0, len(focals), workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b > a:
                futures.append(ex.submit(
                    _kernels.classify_batch, focals[a:b], *args, out[a:b]))
        for fut in futures:
            fut.result()
    return out


def batch_compute(
    g: CitationGraph,
    window: Window = UNLIMITED,
    cfg: VariantConfig = VariantConfig(),
    *,
    ids: Iterable[str] | None = None,
    workers: int = 1,
    engine: str = "auto",
) -> Iterator[DisruptionResult]:
    """Metrics rows for every eligible paper (or an explicit id subset),
    streamed in external-id order.

    Output is a pure function of (graph, window, config): identical across
    reruns, engines, and worker counts. Per-paper undefined metrics are
    flagged nulls and never abort the batch.
    """
    if ids is None:
        focals = g.eligible_indices()
    else:
        focals = np.array(sorted(g.index(p) for p in ids), dtype=np.int64)
    popular = _popular_mask(g, cfg)
    rows = _counts_batch(g, focals, window, popular,
                         workers=workers, engine=engine)
    for t in range(len(focals)):
        yield _derive(g, int(focals[t]), rows[t], cfg)
