"""Citation-graph analytics: the disruption index family, its exact
decomposition, reference rank-law fits, and corpus-level studies."""

from .analysis import (OverlapOutcome, OverlapStudySpec, RegressionFit,
                       RegressionSpec, StratumReport, SweepRow,
                       distribution_summary, marginal_effect_team_size,
                       ols_fit, overlap_baseline, overlap_empirical,
                       reference_length_independence, regression_rows,
                       window_sweep)
from .disruption import (CiterClassification, Decomposition, DisruptionResult,
                         VariantConfig, batch_compute, classify_citers,
                         compute_result, d_index, d_variants, decompose,
                         popularity_threshold)
from .graph import (UNLIMITED, BuildReport, CitationGraph, DuplicatePaper,
                    GraphError, PaperRecord, UnknownPaper, Window, build_graph)
from .ingest import (CorpusFilter, FilterReport, MissingHeader, ParseReport,
                     TooManyParseErrors, apply_filter, parse_edges,
                     parse_papers)
from .results_io import (read_results_jsonl, write_results_jsonl,
                         write_results_tsv)
from .snapshot import (ChecksumMismatch, SnapshotError, VersionMismatch,
                       load_snapshot, save_snapshot, snapshot_checksum)
from .zipf import (FitConfig, RankSeries, ZipfFit, ZipfSurvey,
                   cmax_ratio_empirical, cmax_ratio_theoretical, fit_zipf,
                   rank_law_counts, rank_series, zipf_survey)

__version__ = "0.1.0"
