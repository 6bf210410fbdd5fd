"""Command-line front end: ingest / compute / zipf / study.

Data goes to files; progress and warnings go to stderr as structured lines.
Exit codes: 0 ok, 2 fatal input/parse problem, 3 snapshot corruption,
4 empty zipf population, 5 results/snapshot checksum mismatch.

A ``--config key=value`` file can pre-set any long option (keys use the
option's dest name, e.g. ``min_references=2``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
from typing import Callable

from .analysis import (AnalysisError, OverlapStudySpec, RegressionSpec,
                       distribution_summary, overlap_empirical,
                       ols_fit, reference_length_independence,
                       regression_rows, window_sweep)
from .disruption import VariantConfig, batch_compute
from .graph import GraphError, Window, build_graph
from .ingest import (CorpusFilter, IngestError, ParseReport, apply_filter,
                     parse_edges, parse_papers)
from .results_io import (ResultsFormatError, read_results_jsonl,
                         write_results_jsonl, write_results_tsv)
from .snapshot import SnapshotError, load_snapshot, save_snapshot, snapshot_checksum
from .zipf import zipf_survey

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SNAPSHOT = 3
EXIT_EMPTY_POPULATION = 4
EXIT_CHECKSUM = 5

_HARD_DEFAULTS: dict[str, object] = {
    "workers": 1,
    "seed": 0,
    "max_bad_fraction": 0.05,
    "strict_dangling": False,
    "window": "unlimited",
    "format": "jsonl",
    "min_references": 1,
    "min_citations": 1,
    "doc_type": ["journal-article"],
    "min_year": None,
    "max_year": None,
    "popular_quantile": 0.75,
    "popular_min_citations": None,
    "self_citation_rule": "author_overlap",
    "d4_weighted_k": False,
    "sample": 1000,
    "min_refs": 3,
    "summary_out": None,
    "overlap_min_citations": 100,
    "overlap_min_d": 0.2,
    "taxonomy_size": 292,
    "fields_per_paper": 2,
    "dist_min_citations": 10,
    "d_band": "0:0.05",
    "b_levels": "1,10,100",
    "fixed_effects": "dummy",
    "cohorts": None,
    "engine": "auto",
}

_BOOL_KEYS = {"strict_dangling", "d4_weighted_k"}
_INT_KEYS = {"workers", "seed", "min_references", "min_citations", "min_year",
             "max_year", "popular_min_citations", "sample", "min_refs",
             "overlap_min_citations", "taxonomy_size", "fields_per_paper",
             "dist_min_citations"}
_FLOAT_KEYS = {"max_bad_fraction", "popular_quantile", "overlap_min_d"}
_LIST_KEYS = {"doc_type"}


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _coerce(key: str, raw: str):
    if key in _BOOL_KEYS:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _LIST_KEYS:
        return [v for v in raw.split(",") if v]
    return raw


def _load_config(path: str) -> dict[str, object]:
    out: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise IngestError(f"{path}:{line_no}: expected key=value")
            key = key.strip()
            if key not in _HARD_DEFAULTS:
                raise IngestError(f"{path}:{line_no}: unknown config key {key!r}")
            out[key] = _coerce(key, value.strip())
    return out


def _resolve(ns: argparse.Namespace, config: dict[str, object]) -> None:
    for key, default in _HARD_DEFAULTS.items():
        if not hasattr(ns, key):
            continue
        if getattr(ns, key) is None:
            setattr(ns, key, config.get(key, default))


def _atomic_text(path: str, write: Callable) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".out-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands ----------------------------------------------------------------


def cmd_ingest(ns: argparse.Namespace) -> int:
    rep_p, rep_e = ParseReport(), ParseReport()
    try:
        with open(ns.papers, "r", encoding="utf-8") as fh:
            records = list(parse_papers(
                fh, rep_p, max_bad_fraction=ns.max_bad_fraction))
        with open(ns.edges, "r", encoding="utf-8") as fh:
            pairs = list(parse_edges(
                fh, rep_e, max_bad_fraction=ns.max_bad_fraction))
        g = build_graph(records, pairs, strict_dangling=ns.strict_dangling)
        checksum = save_snapshot(g, ns.out)
    except (OSError, IngestError, GraphError, ValueError) as exc:
        _log(f"ingest: fatal: {exc}")
        return EXIT_INPUT
    rep = g.build_report
    _log(f"ingest: papers={rep.n_papers} edges_in={rep.n_edges_in} "
         f"edges_kept={rep.n_edges} duplicates={rep.n_duplicate_edges} "
         f"self_loops={rep.n_self_loops} dangling={rep.n_dangling}")
    _log(f"ingest: parse_errors_papers={rep_p.n_bad} "
         f"parse_errors_edges={rep_e.n_bad} snapshot_checksum={checksum}")
    for issue in (rep_p.issues + rep_e.issues)[:10]:
        _log(f"ingest: warn line {issue.line_no}: {issue.message}")
    return EXIT_OK


def _variant_config(ns: argparse.Namespace) -> VariantConfig:
    return VariantConfig(
        popular_quantile=ns.popular_quantile,
        popular_min_citations=ns.popular_min_citations,
        self_citation_rule=ns.self_citation_rule,
        d4_weighted_k_denominator=bool(ns.d4_weighted_k),
    )


def _corpus_filter(ns: argparse.Namespace) -> CorpusFilter:
    return CorpusFilter(
        min_references=ns.min_references,
        min_citations=ns.min_citations,
        doc_types=frozenset(ns.doc_type),
        min_year=ns.min_year,
        max_year=ns.max_year,
    )


def cmd_compute(ns: argparse.Namespace) -> int:
    try:
        g = load_snapshot(ns.snapshot)
        checksum = snapshot_checksum(ns.snapshot)
    except (OSError, SnapshotError) as exc:
        _log(f"compute: snapshot error: {exc}")
        return EXIT_SNAPSHOT
    window = Window.parse(ns.window)
    g2, frep = apply_filter(g, _corpus_filter(ns))
    cfg = _variant_config(ns)
    _log(f"compute: papers={frep.n_total} eligible={frep.n_eligible} "
         f"window={window}")
    if frep.n_eligible == 0:
        _log("compute: warn: eligible set is empty")
    results = batch_compute(g2, window, cfg,
                            workers=ns.workers, engine=ns.engine)
    if ns.format == "jsonl":
        n = write_results_jsonl(ns.out, results,
                                snapshot_checksum=checksum,
                                window=str(window), cfg=cfg)
    else:
        n = write_results_tsv(ns.out, results,
                              snapshot_checksum=checksum, window=str(window))
    _log(f"compute: rows={n} out={ns.out}")
    return EXIT_OK


def cmd_zipf(ns: argparse.Namespace) -> int:
    try:
        g = load_snapshot(ns.snapshot)
    except (OSError, SnapshotError) as exc:
        _log(f"zipf: snapshot error: {exc}")
        return EXIT_SNAPSHOT
    window = Window.parse(ns.window)
    g2, _ = apply_filter(g, CorpusFilter())
    nrefs = g2.n_references
    population = [g2.ids[i] for i in g2.eligible_indices()
                  if nrefs[i] >= ns.min_refs]
    if not population:
        _log(f"zipf: no eligible papers with >= {ns.min_refs} references")
        return EXIT_EMPTY_POPULATION
    k = min(ns.sample, len(population))
    if k < ns.sample:
        _log(f"zipf: warn: sample {ns.sample} > population {len(population)}, "
             f"using all")
    rng = random.Random(ns.seed)
    sample = sorted(rng.sample(population, k))
    survey = zipf_survey(g2, sample, window, min_refs=ns.min_refs)
    _atomic_text(ns.out, survey.to_tsv)
    summary_path = ns.summary_out or ns.out + ".summary.tsv"

    def write_summary(fh):
        fh.write("key\tvalue\n")
        for key, value in survey.aggregate().items():
            cell = "NA" if value is None else (
                repr(value) if isinstance(value, float) else str(value))
            fh.write(f"{key}\t{cell}\n")

    _atomic_text(summary_path, write_summary)
    _log(f"zipf: sampled={k} fitted={survey.n_fitted} "
         f"skipped={len(survey.skipped)} out={ns.out}")
    return EXIT_OK


def _parse_cohorts(text: str) -> list[tuple[int, int | None]]:
    cohorts = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        year_s, sep, win_s = part.partition(":")
        if not sep:
            raise ValueError(f"cohort {part!r} must be YEAR:WINDOW")
        win = None if win_s.lower() in ("unlimited", "") else int(win_s)
        cohorts.append((int(year_s), win))
    if not cohorts:
        raise ValueError("no cohorts given")
    return cohorts


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_study(ns: argparse.Namespace) -> int:
    try:
        g = load_snapshot(ns.snapshot)
        snap_sum = snapshot_checksum(ns.snapshot)
    except (OSError, SnapshotError) as exc:
        _log(f"study: snapshot error: {exc}")
        return EXIT_SNAPSHOT
    try:
        header, results = read_results_jsonl(ns.results)
    except (OSError, ResultsFormatError) as exc:
        _log(f"study: results error: {exc}")
        return EXIT_INPUT
    if header.get("snapshot_checksum") != snap_sum:
        _log(f"study: checksum mismatch: results were computed from snapshot "
             f"{header.get('snapshot_checksum')}, given {snap_sum}")
        return EXIT_CHECKSUM
    window = Window.parse(str(header.get("window", "unlimited")))
    os.makedirs(ns.out, exist_ok=True)

    try:
        if ns.study == "overlap":
            spec = OverlapStudySpec(
                min_citations=ns.overlap_min_citations,
                min_d=ns.overlap_min_d,
                taxonomy_size=ns.taxonomy_size,
                fields_per_paper=ns.fields_per_paper,
            )
            outcome = overlap_empirical(g, results, spec, window)

            def write(fh):
                fh.write("key\tvalue\n")
                fh.write(f"rate\t{outcome.rate!r}\n")
                fh.write(f"baseline\t{outcome.baseline!r}\n")
                fh.write(f"ratio_to_baseline\t{outcome.ratio_to_baseline!r}\n")
                fh.write(f"n_pairs\t{outcome.n_pairs}\n")
                fh.write(f"n_selected\t{outcome.n_selected}\n")
                fh.write(f"n_missing_fields\t{outcome.n_missing_fields}\n")

            _atomic_text(os.path.join(ns.out, "overlap.tsv"), write)

        elif ns.study == "distribution":
            summary = distribution_summary(results, ns.dist_min_citations)

            def write(fh):
                fh.write("key\tvalue\n")
                for key, value in summary.items():
                    fh.write(f"{key}\t{_fmt(value)}\n")

            _atomic_text(os.path.join(ns.out, "distribution.tsv"), write)

        elif ns.study == "reflen":
            lo_s, _, hi_s = ns.d_band.partition(":")
            band = (float(lo_s), float(hi_s))
            levels = [float(v) for v in ns.b_levels.split(",") if v]
            reports = reference_length_independence(results, band, levels)

            def write_buckets(fh):
                fh.write("burden_level\tn_refs\tn\tmean_d0\ttheory\n")
                for rep in reports:
                    for b in rep.buckets:
                        fh.write(f"{rep.burden_level!r}\t{b.n_refs}\t{b.n}\t"
                                 f"{b.mean_d0!r}\t{b.theory!r}\n")

            def write_slopes(fh):
                fh.write("burden_level\tn\tslope\tse\tci_low\tci_high\tflags\n")
                for rep in reports:
                    flags = ",".join(rep.flags) if rep.flags else "-"
                    fh.write(f"{rep.burden_level!r}\t{rep.n}\t{_fmt(rep.slope)}"
                             f"\t{_fmt(rep.slope_se)}\t{_fmt(rep.ci_low)}\t"
                             f"{_fmt(rep.ci_high)}\t{flags}\n")

            _atomic_text(os.path.join(ns.out, "reflen_buckets.tsv"), write_buckets)
            _atomic_text(os.path.join(ns.out, "reflen_slopes.tsv"), write_slopes)

        elif ns.study == "regression":
            fit = ols_fit(regression_rows(results), RegressionSpec(),
                          ns.fixed_effects)
            payload = {
                "b0": fit.b0, "b_k": fit.b_k, "b_r": fit.b_r, "b_c": fit.b_c,
                "se": fit.se, "n": fit.n, "r2": fit.r2,
                "dropped_year": fit.dropped_year,
                "n_excluded": fit.n_excluded,
                "year_effects": {str(y): v for y, v in
                                 sorted(fit.year_effects.items())},
                "mean_k": fit.mean_k, "mean_r": fit.mean_r, "mean_c": fit.mean_c,
                "method": fit.method,
            }
            _atomic_text(os.path.join(ns.out, "regression.json"),
                         lambda fh: fh.write(json.dumps(payload, indent=2) + "\n"))

            def write(fh):
                fh.write("term\tcoef\tse\n")
                for term in ("b0", "b_k", "b_r", "b_c"):
                    fh.write(f"{term}\t{getattr(fit, term)!r}\t"
                             f"{_fmt(fit.se.get(term))}\n")
                for year, eff in sorted(fit.year_effects.items()):
                    fh.write(f"year:{year}\t{eff!r}\t"
                             f"{_fmt(fit.se.get(f'year:{year}'))}\n")

            _atomic_text(os.path.join(ns.out, "regression.tsv"), write)

        elif ns.study == "window-sweep":
            if not ns.cohorts:
                _log("study: --cohorts YEAR:WINDOW[,YEAR:WINDOW...] is required")
                return EXIT_INPUT
            cohorts = _parse_cohorts(ns.cohorts)
            g2, _ = apply_filter(g, CorpusFilter())
            rows = window_sweep(g2, cohorts, RegressionSpec(),
                                _variant_config(ns),
                                fixed_effects=ns.fixed_effects,
                                workers=ns.workers, engine=ns.engine)

            def write(fh):
                fh.write("year\twindow\tn\tb_k\tse_k\terror\n")
                for row in rows:
                    win = "unlimited" if row.window_years is None else row.window_years
                    err = row.error or "-"
                    fh.write(f"{row.year}\t{win}\t{row.n}\t{_fmt(row.b_k)}\t"
                             f"{_fmt(row.se_k)}\t{err}\n")

            _atomic_text(os.path.join(ns.out, "window_sweep.tsv"), write)

        else:  # pragma: no cover - argparse choices prevent this
            _log(f"study: unknown study {ns.study!r}")
            return EXIT_INPUT
    except AnalysisError as exc:
        _log(f"study: {ns.study} failed: {exc}")
        return 1
    _log(f"study: {ns.study} done, outputs in {ns.out}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dindex",
        description="Citation-graph analytics: disruption metrics and studies.",
    )
    parser.add_argument("--workers", type=int, default=None,
                        help="worker threads for batch computation")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for sampling operations")
    parser.add_argument("--config", default=None,
                        help="key=value file mirroring long options")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse TSV inputs and write a snapshot")
    p.add_argument("papers")
    p.add_argument("edges")
    p.add_argument("out")
    p.add_argument("--max-bad-fraction", type=float, default=None)
    p.add_argument("--strict-dangling", action="store_const", const=True,
                   default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compute", help="disruption metrics for eligible papers")
    p.add_argument("snapshot")
    p.add_argument("out")
    p.add_argument("--window", default=None)
    p.add_argument("--format", choices=("jsonl", "tsv"), default=None)
    p.add_argument("--min-references", type=int, default=None)
    p.add_argument("--min-citations", type=int, default=None)
    p.add_argument("--doc-type", action="append", default=None)
    p.add_argument("--min-year", type=int, default=None)
    p.add_argument("--max-year", type=int, default=None)
    p.add_argument("--popular-quantile", type=float, default=None)
    p.add_argument("--popular-min-citations", type=int, default=None)
    p.add_argument("--self-citation-rule", choices=("author_overlap", "off"),
                   default=None)
    p.add_argument("--d4-weighted-k", action="store_const", const=True,
                   default=None)
    p.add_argument("--engine", choices=("auto", "numba", "python"), default=None)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("zipf", help="rank-law survey over a seeded sample")
    p.add_argument("snapshot")
    p.add_argument("out")
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--min-refs", type=int, default=None)
    p.add_argument("--window", default=None)
    p.add_argument("--summary-out", default=None)
    p.set_defaults(func=cmd_zipf)

    p = sub.add_parser("study", help="corpus-level studies over results")
    p.add_argument("snapshot")
    p.add_argument("results")
    p.add_argument("--study", required=True,
                   choices=("overlap", "distribution", "reflen",
                            "regression", "window-sweep"))
    p.add_argument("--out", required=True)
    p.add_argument("--overlap-min-citations", type=int, default=None)
    p.add_argument("--overlap-min-d", type=float, default=None)
    p.add_argument("--taxonomy-size", type=int, default=None)
    p.add_argument("--fields-per-paper", type=int, default=None)
    p.add_argument("--dist-min-citations", type=int, default=None)
    p.add_argument("--d-band", default=None)
    p.add_argument("--b-levels", default=None)
    p.add_argument("--fixed-effects", choices=("dummy", "within"), default=None)
    p.add_argument("--cohorts", default=None)
    p.add_argument("--popular-quantile", type=float, default=None)
    p.add_argument("--popular-min-citations", type=int, default=None)
    p.add_argument("--self-citation-rule", choices=("author_overlap", "off"),
                   default=None)
    p.add_argument("--d4-weighted-k", action="store_const", const=True,
                   default=None)
    p.add_argument("--engine", choices=("auto", "numba", "python"), default=None)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    config: dict[str, object] = {}
    if ns.config:
        try:
            config = _load_config(ns.config)
        except (OSError, IngestError) as exc:
            _log(f"dindex: config error: {exc}")
            return EXIT_INPUT
    _resolve(ns, config)
    try:
        return ns.func(ns)
    except ValueError as exc:
        _log(f"dindex: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
