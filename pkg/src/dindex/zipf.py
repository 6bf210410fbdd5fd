"""Rank-law fitting of reference citation counts.

A paper's references, ranked by descending citation count, follow
C_r ~ c / (b + r)^a. Fitting minimizes squared residuals of
log(C_r + shift) against log c - a*log(b + r) with a coarse (a, b) grid,
closed-form c at each grid point, and deterministic local zoom refinement.
The shift (default 1) keeps zero-count references in the fit.

The closed-form share of the top reference, (a - 1)/(1 + b), applies when
a > 1; it is compared against the exact empirical ratio C_max / C_total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .graph import UNLIMITED, CitationGraph, Window

NON_ZIPF_A = 0.2  # fitted exponents below this mean an essentially flat series


class ZipfError(Exception):
    pass


class NoReferences(ZipfError):
    pass


class InsufficientData(ZipfError):
    pass


class ZeroTotal(ZipfError):
    pass


class ExponentTooSmall(ZipfError):
    pass


@dataclass(frozen=True)
class FitConfig:
    a_bounds: tuple[float, float] = (0.1, 5.0)
    b_bounds: tuple[float, float] = (0.0, 20.0)
    coarse_a_points: int = 50
    coarse_b_points: int = 41
    zoom_points: int = 21
    max_zoom_rounds: int = 8
    a_resolution: float = 0.002
    b_resolution: float = 0.01
    log_shift: float = 1.0


DEFAULT_FIT = FitConfig()


@dataclass(frozen=True)
class RankSeries:
    """Citation counts of one paper's references, sorted descending."""

    counts: tuple[float, ...]
    focal: str | None = None

    def __post_init__(self) -> None:
        if any(b > a for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("rank series must be non-increasing")

    @classmethod
    def from_counts(cls, counts: Iterable[float],
                    focal: str | None = None) -> "RankSeries":
        return cls(tuple(sorted((float(c) for c in counts), reverse=True)), focal)

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> float:
        return float(sum(self.counts))


@dataclass(frozen=True)
class ZipfFit:
    a: float
    b: float
    c: float
    sse: float
    n_points: int
    flags: tuple[str, ...] = ()


def rank_law_counts(a: float, b: float, c: float, n: int) -> np.ndarray:
    """Counts predicted by the rank law for ranks 1..n (descending by design)."""
    r = np.arange(1, n + 1, dtype=float)
    return c / (b + r) ** a


def rank_series(g: CitationGraph, paper_id: str,
                window: Window = UNLIMITED) -> RankSeries:
    """Windowed citer counts of a paper's references, sorted descending.

    Counts are anchored at the focal paper's year and exclude the focal
    paper itself; zero-count references are retained.
    """
    counts = [c for _, c in g.reference_citation_counts(paper_id, window)]
    if not counts:
        raise NoReferences(f"paper {paper_id!r} has no references")
    return RankSeries.from_counts(counts, focal=paper_id)


def _fit_log_points(y: np.ndarray, r: np.ndarray, config: FitConfig) -> ZipfFit:
    """Grid-plus-zoom least squares over (a, b) with closed-form log c."""

    def scan(a_vals: np.ndarray, b_vals: np.ndarray,
             best: tuple[float, float, float, float] | None):
        for b in b_vals:
            lb = np.log(b + r)
            resid0 = y[None, :] + a_vals[:, None] * lb[None, :]
            logc = resid0.mean(axis=1)
            sse = ((resid0 - logc[:, None]) ** 2).sum(axis=1)
            k = int(np.argmin(sse))
            if best is None or sse[k] < best[0]:
                best = (float(sse[k]), float(a_vals[k]), float(b), float(logc[k]))
        return best

    a_lo, a_hi = config.a_bounds
    b_lo, b_hi = config.b_bounds
    a_vals = np.linspace(a_lo, a_hi, config.coarse_a_points)
    b_vals = np.linspace(b_lo, b_hi, config.coarse_b_points)
    best = scan(a_vals, b_vals, None)
    a_step = (a_hi - a_lo) / (config.coarse_a_points - 1)
    b_step = (b_hi - b_lo) / (config.coarse_b_points - 1)

    flags: list[str] = []
    for _ in range(config.max_zoom_rounds):
        if a_step <= config.a_resolution and b_step <= config.b_resolution:
            break
        _, a_best, b_best, _ = best
        a_vals = np.linspace(max(a_lo, a_best - 2 * a_step),
                             min(a_hi, a_best + 2 * a_step),
                             config.zoom_points)
        b_vals = np.linspace(max(b_lo, b_best - 2 * b_step),
                             min(b_hi, b_best + 2 * b_step),
                             config.zoom_points)
        best = scan(a_vals, b_vals, best)
        a_step = (a_vals[-1] - a_vals[0]) / (config.zoom_points - 1)
        b_step = (b_vals[-1] - b_vals[0]) / (config.zoom_points - 1)
    if a_step > config.a_resolution or b_step > config.b_resolution:
        flags.append("refinement_cap")

    sse, a, b, logc = best
    if a < NON_ZIPF_A:
        flags.append("non_zipf")
    return ZipfFit(a=a, b=b, c=float(np.exp(logc)), sse=sse,
                   n_points=len(y), flags=tuple(flags))


def fit_zipf(series: RankSeries, config: FitConfig = DEFAULT_FIT) -> ZipfFit:
    """Fit the rank law to one series; needs >= 3 ranks and >= 3 positive counts."""
    counts = np.asarray(series.counts, dtype=float)
    if series.n < 3 or int((counts > 0).sum()) < 3:
        raise InsufficientData(
            f"need >= 3 references with >= 3 positive counts, "
            f"got n={series.n} positive={(counts > 0).sum()}"
        )
    ranks = np.arange(1, series.n + 1, dtype=float)
    if config.log_shift > 0:
        y = np.log(counts + config.log_shift)
    else:
        keep = counts > 0
        y = np.log(counts[keep])
        ranks = ranks[keep]
    return _fit_log_points(y, ranks, config)


def cmax_ratio_empirical(series: RankSeries) -> float:
    """Top reference's share of all reference citations, C_max / C_total."""
    total = series.total
    if total <= 0:
        raise ZeroTotal("series has no citations")
    return series.counts[0] / total


def cmax_ratio_theoretical(a: float, b: float) -> float:
    """Closed-form top-reference share (a - 1)/(1 + b); requires a > 1."""
    if a <= 1.0:
        raise ExponentTooSmall(f"closed form needs a > 1, got a={a}")
    return (a - 1.0) / (1.0 + b)


@dataclass(frozen=True)
class SurveyRow:
    paper_id: str
    n_refs: int
    a: float
    b: float
    c: float
    sse: float
    ratio_emp: float
    ratio_theory: float | None
    flags: tuple[str, ...] = ()


@dataclass
class ZipfSurvey:
    rows: list[SurveyRow] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    pooled: ZipfFit | None = None

    @property
    def n_fitted(self) -> int:
        return len(self.rows)

    def aggregate(self) -> dict[str, float | int | None]:
        out: dict[str, float | int | None] = {
            "n_fitted": len(self.rows),
            "n_skipped": len(self.skipped),
        }
        if not self.rows:
            out.update(mean_a=None, mean_b=None, frac_a_gt_1=None,
                       mean_ratio_emp=None, mean_ratio_theory=None)
            return out
        a = np.array([r.a for r in self.rows])
        b = np.array([r.b for r in self.rows])
        emp = np.array([r.ratio_emp for r in self.rows])
        theory = [r.ratio_theory for r in self.rows if r.ratio_theory is not None]
        out["mean_a"] = float(a.mean())
        out["mean_b"] = float(b.mean())
        out["frac_a_gt_1"] = float((a > 1.0).mean())
        out["mean_ratio_emp"] = float(emp.mean())
        out["mean_ratio_theory"] = float(np.mean(theory)) if theory else None
        if self.pooled is not None:
            out["pooled_a"] = self.pooled.a
            out["pooled_b"] = self.pooled.b
        return out

    def to_tsv(self, fh: TextIO) -> None:
        fh.write("paper_id\tn_refs\ta\tb\tc\tsse\tratio_emp\tratio_theory\tflags\n")
        for r in self.rows:
            theory = "NA" if r.ratio_theory is None else repr(r.ratio_theory)
            flags = ",".join(r.flags) if r.flags else "-"
            fh.write(f"{r.paper_id}\t{r.n_refs}\t{r.a!r}\t{r.b!r}\t{r.c!r}\t"
                     f"{r.sse!r}\t{r.ratio_emp!r}\t{theory}\t{flags}\n")


def zipf_survey(
    g: CitationGraph,
    sample: Sequence[str],
    window: Window = UNLIMITED,
    config: FitConfig = DEFAULT_FIT,
    *,
    min_refs: int = 3,
) -> ZipfSurvey:
    """Per-paper fits plus a pooled fit over max-normalized series.

    Papers that cannot be fitted (too few references or positive counts) are
    collected in ``skipped`` with a reason; they never abort the survey.
    """
    survey = ZipfSurvey()
    pooled_ranks: list[np.ndarray] = []
    pooled_logs: list[np.ndarray] = []
    for pid in sample:
        try:
            series = rank_series(g, pid, window)
        except NoReferences:
            survey.skipped.append((pid, "no_references"))
            continue
        if series.n < min_refs:
            survey.skipped.append((pid, "too_few_references"))
            continue
        try:
            fit = fit_zipf(series, config)
        except InsufficientData:
            survey.skipped.append((pid, "too_few_positive_counts"))
            continue
        emp = cmax_ratio_empirical(series)
        flags = fit.flags
        if fit.a > 1.0:
            theory = cmax_ratio_theoretical(fit.a, fit.b)
        else:
            theory = None
            flags = flags + ("exponent_le_1",)
        survey.rows.append(SurveyRow(
            paper_id=pid, n_refs=series.n, a=fit.a, b=fit.b, c=fit.c,
            sse=fit.sse, ratio_emp=emp, ratio_theory=theory, flags=flags,
        ))
        counts = np.asarray(series.counts, dtype=float)
        top = counts[0]
        if top > 0:
            keep = counts > 0
            pooled_ranks.append(np.arange(1, series.n + 1, dtype=float)[keep])
            pooled_logs.append(np.log(counts[keep] / top))
    if pooled_logs:
        y = np.concatenate(pooled_logs)
        r = np.concatenate(pooled_ranks)
        if len(y) >= 3:
            survey.pooled = _fit_log_points(y, r, config)
    return survey
