"""Seeded synthetic corpora for experiments and verification.

All generators are deterministic given their seed. They produce either
(records, edges) streams for the graph builder, raw TSV files for the
ingestion path, or fabricated result rows where a study only needs rows.
"""

from __future__ import annotations

import os
from typing import Iterable

import numpy as np

from .disruption import DisruptionResult
from .graph import PaperRecord
from .zipf import rank_law_counts


def random_corpus(
    n_papers: int = 200,
    seed: int = 0,
    *,
    avg_refs: float = 4.0,
    year_range: tuple[int, int] = (2000, 2010),
    frac_other_doc: float = 0.1,
    author_pool: int = 0,
    max_authors: int = 3,
    taxonomy_size: int = 0,
    fields_per_paper: int = 2,
    duplicate_edge_frac: float = 0.05,
) -> tuple[list[PaperRecord], list[tuple[str, str]]]:
    """Acyclic random citation corpus: paper i may cite only papers with a
    smaller index, years are drawn independently (so year inversions occur
    and exercise the subsequent-year rule)."""
    rng = np.random.default_rng(seed)
    ids = [f"P{i:06d}" for i in range(n_papers)]
    years = rng.integers(year_range[0], year_range[1] + 1, n_papers)
    records = []
    for i in range(n_papers):
        doc = "other" if rng.random() < frac_other_doc else "journal-article"
        authors: tuple[str, ...] = ()
        if author_pool:
            k = int(rng.integers(1, max_authors + 1))
            authors = tuple(sorted({f"A{int(a)}" for a in
                                    rng.integers(0, author_pool, k)}))
        fields: tuple[int, ...] = ()
        if taxonomy_size:
            fields = tuple(sorted(rng.choice(
                taxonomy_size, size=min(fields_per_paper, taxonomy_size),
                replace=False).tolist()))
        records.append(PaperRecord(
            id=ids[i], year=int(years[i]), doc_type=doc,
            author_ids=authors, field_ids=fields,
        ))
    edges: list[tuple[str, str]] = []
    for i in range(1, n_papers):
        k = min(i, rng.poisson(avg_refs))
        if k == 0:
            continue
        for j in rng.choice(i, size=k, replace=False):
            edges.append((ids[i], ids[int(j)]))
    n_dup = int(len(edges) * duplicate_edge_frac)
    if n_dup and edges:
        for j in rng.integers(0, len(edges), n_dup):
            edges.append(edges[int(j)])
    perm = rng.permutation(len(edges))
    edges = [edges[int(p)] for p in perm]
    return records, edges


def zipf_reference_corpus(
    n_focal: int = 30,
    n_refs: int = 29,
    a: float = 2.0,
    b: float = 1.4,
    scale: float = 5000.0,
    seed: int = 0,
    focal_year: int = 2000,
) -> tuple[list[PaperRecord], list[tuple[str, str]]]:
    """Corpus where each focal paper's reference citation counts follow the
    rank law with parameters (a, b, scale), up to integer rounding.

    Reference citers are distinct per (focal, reference) and published after
    the focal year, so windowed anchored counts reproduce the law exactly.
    """
    counts = np.rint(rank_law_counts(a, b, scale, n_refs)).astype(int)
    records: list[PaperRecord] = []
    edges: list[tuple[str, str]] = []
    serial = 0
    for f in range(n_focal):
        fid = f"F{f:04d}"
        records.append(PaperRecord(id=fid, year=focal_year))
        for r in range(n_refs):
            rid = f"R{f:04d}_{r:03d}"
            records.append(PaperRecord(id=rid, year=focal_year - 3))
            edges.append((fid, rid))
            for _ in range(int(counts[r])):
                cid = f"C{serial:07d}"
                serial += 1
                records.append(PaperRecord(id=cid, year=focal_year + 1))
                edges.append((cid, rid))
        # one citer of the focal paper keeps it corpus-eligible
        cid = f"C{serial:07d}"
        serial += 1
        records.append(PaperRecord(id=cid, year=focal_year + 1))
        edges.append((cid, fid))
    return records, edges


def lagged_team_corpus(
    seed: int = 0,
    *,
    cohort_year: int = 2000,
    papers_per_team_size: int = 120,
    team_sizes: Iterable[int] = range(1, 11),
    n_refs: int = 10,
    ref_pool: int = 3000,
    early_citers: int = 12,
    late_citers: int = 24,
    lag: int = 6,
) -> tuple[list[PaperRecord], list[tuple[str, str]]]:
    """Cohort corpus where small-team recognition arrives late.

    Every focal paper gets ``early_citers`` within 1 year and ``late_citers``
    from ``lag`` years on. For small teams the early citers mostly also cite
    the references (consolidating-looking) while the late ones cite the focal
    paper alone; large teams get the reverse. Under a short window the index
    therefore rises with team size, under a long window it falls.
    """
    rng = np.random.default_rng(seed)
    team_sizes = list(team_sizes)
    records: list[PaperRecord] = []
    edges: list[tuple[str, str]] = []
    pool_ids = [f"R{i:05d}" for i in range(ref_pool)]
    for i, rid in enumerate(pool_ids):
        records.append(PaperRecord(
            id=rid, year=cohort_year - 1 - int(rng.integers(0, 8))))
    serial = 0
    for k in team_sizes:
        lo, hi = min(team_sizes), max(team_sizes)
        span = max(hi - lo, 1)
        p_early_only = 0.2 + 0.54 * (k - lo) / span
        p_late_only = 0.9 - 0.72 * (k - lo) / span
        for m in range(papers_per_team_size):
            fid = f"P{k:02d}_{m:05d}"
            authors = tuple(f"A_{fid}_{i}" for i in range(k))
            records.append(PaperRecord(
                id=fid, year=cohort_year, author_ids=authors))
            refs = rng.choice(ref_pool, size=n_refs, replace=False)
            for r in refs:
                edges.append((fid, pool_ids[int(r)]))
            for phase, count, p_only in (
                ("early", early_citers, p_early_only),
                ("late", late_citers, p_late_only),
            ):
                for _ in range(count):
                    cid = f"C{serial:07d}"
                    serial += 1
                    if phase == "early":
                        year = cohort_year + int(rng.integers(0, 2))
                    else:
                        year = cohort_year + lag + int(rng.integers(0, 5))
                    records.append(PaperRecord(id=cid, year=year))
                    edges.append((cid, fid))
                    if rng.random() >= p_only:
                        for r in rng.choice(refs, size=2, replace=False):
                            edges.append((cid, pool_ids[int(r)]))
    return records, edges


def planted_regression_rows(
    n: int = 10_000,
    seed: int = 0,
    *,
    b0: float = 0.1,
    b_k: float = -0.05,
    b_r: float = 0.02,
    b_c: float = -0.01,
    year_effects: dict[int, float] | None = None,
    noise_sd: float = 0.01,
) -> tuple[list[tuple[float, int, int, int, int]], dict[str, float]]:
    """Rows drawn from the log-linear model with known coefficients."""
    if year_effects is None:
        year_effects = {2000: 0.0, 2001: 0.012, 2002: -0.02,
                        2003: 0.005, 2004: -0.008}
    rng = np.random.default_rng(seed)
    years = np.array(sorted(year_effects))
    k = rng.integers(1, 11, n)
    r = rng.integers(5, 51, n)
    c = rng.integers(10, 1001, n)
    yr = years[rng.integers(0, len(years), n)]
    eff = np.array([year_effects[int(v)] for v in yr])
    d = (b0 + b_k * np.log(k) + b_r * np.log(r) + b_c * np.log(c) + eff)
    if noise_sd > 0:
        d = d + rng.normal(0.0, noise_sd, n)
    rows = [(float(d[i]), int(k[i]), int(r[i]), int(c[i]), int(yr[i]))
            for i in range(n)]
    truth = {"b0": b0, "b_k": b_k, "b_r": b_r, "b_c": b_c}
    return rows, truth


def displacement_scaled_results(
    seed: int = 0,
    *,
    burden_levels: Iterable[float] = (1.0, 10.0, 100.0),
    local_by_level: dict[float, float] | None = None,
    ref_lengths: Iterable[int] = range(5, 51, 5),
    papers_per_cell: int = 20,
    year: int = 2000,
) -> list[DisruptionResult]:
    """Fabricated result rows where the index equals local/(1 + burden)
    exactly, so the index is flat in reference length within each stratum."""
    if local_by_level is None:
        local_by_level = {lvl: 0.02 for lvl in burden_levels}
    rows: list[DisruptionResult] = []
    serial = 0
    for level in burden_levels:
        local = local_by_level[level]
        d0 = local / (1.0 + level)
        for n_refs in ref_lengths:
            for _ in range(papers_per_cell):
                c_p = 100
                rows.append(DisruptionResult(
                    id=f"S{serial:06d}", year=year, n_authors=3,
                    n_refs=int(n_refs), n_i=51, n_j=49, n_k=0,
                    c_p=c_p, c_max=int(level * c_p),
                    d0=d0, local_displacement=local,
                    k_ratio=0.0, burden=float(level),
                    d1=d0, d2=d0, d3=0.51, d4=0.51, flags=(),
                ))
                serial += 1
    return rows


def write_corpus_tsv(
    records: Iterable[PaperRecord],
    edges: Iterable[tuple[str, str]],
    papers_path: str | os.PathLike,
    edges_path: str | os.PathLike,
) -> None:
    with open(papers_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tyear\tdoc_type\tauthor_ids\tfield_ids\n")
        for r in records:
            fh.write(f"{r.id}\t{r.year}\t{r.doc_type}\t"
                     f"{';'.join(r.author_ids)}\t"
                     f"{';'.join(str(f) for f in r.field_ids)}\n")
    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("citer_id\tcited_id\n")
        for a, b in edges:
            fh.write(f"{a}\t{b}\n")


def scale_corpus_tsv(
    n_papers: int,
    n_edges: int,
    papers_path: str | os.PathLike,
    edges_path: str | os.PathLike,
    seed: int = 0,
    *,
    year_range: tuple[int, int] = (1950, 2020),
    author_pool: int = 300_000,
    taxonomy_size: int = 292,
    chunk: int = 200_000,
) -> None:
    """Large random corpus written straight to TSV (vectorized, low memory).

    Edge pairs are oriented so the later paper cites the earlier one, which
    keeps most citations valid under the subsequent-year rule.
    """
    rng = np.random.default_rng(seed)
    years = rng.integers(year_range[0], year_range[1] + 1, n_papers)
    n_auth = rng.integers(1, 4, n_papers)
    auth = rng.integers(0, author_pool, int(n_auth.sum()))
    f1 = rng.integers(0, taxonomy_size, n_papers)
    f2 = rng.integers(0, taxonomy_size, n_papers)
    width = len(str(n_papers - 1))
    with open(papers_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tyear\tdoc_type\tauthor_ids\tfield_ids\n")
        apos = 0
        lines = []
        for i in range(n_papers):
            na = int(n_auth[i])
            a_str = ";".join(f"A{int(x)}" for x in auth[apos:apos + na])
            apos += na
            fields = {int(f1[i]), int(f2[i])}
            f_str = ";".join(str(x) for x in sorted(fields))
            lines.append(f"W{i:0{width}d}\t{years[i]}\tjournal-article\t"
                         f"{a_str}\t{f_str}")
            if len(lines) >= chunk:
                fh.write("\n".join(lines) + "\n")
                lines = []
        if lines:
            fh.write("\n".join(lines) + "\n")

    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("citer_id\tcited_id\n")
        written = 0
        while written < n_edges:
            m = min(chunk * 5, n_edges - written)
            u = rng.integers(0, n_papers, m)
            v = rng.integers(0, n_papers, m)
            ok = u != v
            u, v = u[ok], v[ok]
            swap = years[u] < years[v]
            u2 = np.where(swap, v, u)
            v2 = np.where(swap, u, v)
            lines = [f"W{int(a):0{width}d}\tW{int(b):0{width}d}"
                     for a, b in zip(u2, v2)]
            fh.write("\n".join(lines) + "\n")
            written += len(lines)
