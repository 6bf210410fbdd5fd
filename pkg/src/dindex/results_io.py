"""Result file formats: JSONL (primary) and TSV, both atomic-write.

Files start with a header carrying the schema version and the checksum of
the snapshot the results were computed from, so downstream studies can
refuse mismatched inputs. Metric nulls serialize as JSON null / TSV "NA".
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict
from typing import Iterable

from .disruption import DisruptionResult, VariantConfig

RESULTS_FORMAT = "dindex-results"
RESULTS_SCHEMA = 1

COLUMNS = (
    "id", "year", "n_authors", "n_refs", "n_i", "n_j", "n_k", "c_p", "c_max",
    "d0", "local_displacement", "k_ratio", "burden", "d1", "d2", "d3", "d4",
    "flags",
)


class ResultsFormatError(Exception):
    pass


def results_header(snapshot_checksum: str, window: str,
                   cfg: VariantConfig | None = None) -> dict:
    header = {
        "format": RESULTS_FORMAT,
        "schema": RESULTS_SCHEMA,
        "snapshot_checksum": snapshot_checksum,
        "window": window,
    }
    if cfg is not None:
        header["variant_config"] = {
            "popular_quantile": cfg.popular_quantile,
            "popular_min_citations": cfg.popular_min_citations,
            "self_citation_rule": cfg.self_citation_rule,
            "d4_weighted_k_denominator": cfg.d4_weighted_k_denominator,
        }
    return header


def _atomic_writer(path: str | os.PathLike):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".results-", suffix=".tmp")
    return fd, tmp, path


def result_to_json(r: DisruptionResult) -> str:
    d = asdict(r)
    d["flags"] = list(r.flags)
    return json.dumps(d, separators=(",", ":"), sort_keys=False)


def write_results_jsonl(
    path: str | os.PathLike,
    results: Iterable[DisruptionResult],
    *,
    snapshot_checksum: str,
    window: str,
    cfg: VariantConfig | None = None,
) -> int:
    fd, tmp, path = _atomic_writer(path)
    n = 0
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(
                results_header(snapshot_checksum, window, cfg),
                separators=(",", ":")) + "\n")
            for r in results:
                fh.write(result_to_json(r) + "\n")
                n += 1
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return n


def _cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_tsv(
    path: str | os.PathLike,
    results: Iterable[DisruptionResult],
    *,
    snapshot_checksum: str,
    window: str,
) -> int:
    fd, tmp, path = _atomic_writer(path)
    n = 0
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {RESULTS_FORMAT}\tschema={RESULTS_SCHEMA}\t"
                     f"snapshot_checksum={snapshot_checksum}\twindow={window}\n")
            fh.write("\t".join(COLUMNS) + "\n")
            for r in results:
                d = asdict(r)
                d["flags"] = ",".join(r.flags) if r.flags else "-"
                fh.write("\t".join(_cell(d[c]) for c in COLUMNS) + "\n")
                n += 1
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return n


def read_results_jsonl(
    path: str | os.PathLike,
) -> tuple[dict, list[DisruptionResult]]:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise ResultsFormatError("empty results file")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ResultsFormatError(f"bad results header: {exc}") from exc
        if header.get("format") != RESULTS_FORMAT:
            raise ResultsFormatError("not a results file (bad format field)")
        if header.get("schema") != RESULTS_SCHEMA:
            raise ResultsFormatError(
                f"results schema {header.get('schema')}, expected {RESULTS_SCHEMA}")
        rows = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                d["flags"] = tuple(d.get("flags", ()))
                rows.append(DisruptionResult(**d))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ResultsFormatError(f"bad result row at line {line_no}: {exc}") from exc
    return header, rows
