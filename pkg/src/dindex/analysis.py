"""Corpus-level studies over disruption results.

Covers the field-overlap study against its combinatorial random baseline,
distribution summaries of the decomposition factors, the reference-length
independence check, and the team-size regression with yearly fixed effects
(including the citation-window sweep that recomputes the index per cohort).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .disruption import DisruptionResult, VariantConfig, batch_compute
from .graph import UNLIMITED, CitationGraph, Window


class AnalysisError(Exception):
    pass


class InvalidCounts(AnalysisError):
    pass


class EmptySelection(AnalysisError):
    pass


class EmptyInput(AnalysisError):
    pass


class RankDeficient(AnalysisError):
    pass


class InsufficientSample(AnalysisError):
    pass


class NonpositiveK(AnalysisError):
    pass


# -- field overlap ----------------------------------------------------------


def overlap_baseline(taxonomy_size: int, fields_per_paper: int) -> float:
    """Chance that two papers share a field when each draws ``fields_per_paper``
    distinct fields uniformly from a taxonomy: 1 - C(t-f, f)/C(t, f).

    Computed with exact rational arithmetic, then converted to float.
    """
    t, f = taxonomy_size, fields_per_paper
    if f < 1 or t < f:
        raise InvalidCounts(f"need taxonomy_size >= fields_per_paper >= 1, got ({t}, {f})")
    return float(1 - Fraction(math.comb(t - f, f), math.comb(t, f)))


@dataclass(frozen=True)
class OverlapStudySpec:
    min_citations: int = 100   # strict: c_p > min_citations
    min_d: float = 0.2         # strict: d0 > min_d
    taxonomy_size: int = 292
    fields_per_paper: int = 2


@dataclass(frozen=True)
class OverlapOutcome:
    rate: float
    n_pairs: int
    n_missing_fields: int
    n_selected: int
    baseline: float

    @property
    def ratio_to_baseline(self) -> float:
        return self.rate / self.baseline


def overlap_empirical(
    g: CitationGraph,
    results: Iterable[DisruptionResult],
    spec: OverlapStudySpec = OverlapStudySpec(),
    window: Window = UNLIMITED,
) -> OverlapOutcome:
    """Fraction of selected papers sharing >= 1 field with their most-cited
    reference. Pairs with missing field data are excluded and counted."""
    n_selected = 0
    n_missing = 0
    hits = 0
    pairs = 0
    for r in results:
        if r.d0 is None or r.d0 <= spec.min_d or r.c_p <= spec.min_citations:
            continue
        n_selected += 1
        best = g.most_cited_reference(r.id, window)
        if best is None:
            n_missing += 1
            continue
        focal_fields = set(g.fields_of(r.id))
        ref_fields = set(g.fields_of(best[0]))
        if not focal_fields or not ref_fields:
            n_missing += 1
            continue
        pairs += 1
        if focal_fields & ref_fields:
            hits += 1
    if pairs == 0:
        raise EmptySelection(
            f"no usable pairs (selected={n_selected}, missing fields={n_missing})"
        )
    return OverlapOutcome(
        rate=hits / pairs,
        n_pairs=pairs,
        n_missing_fields=n_missing,
        n_selected=n_selected,
        baseline=overlap_baseline(spec.taxonomy_size, spec.fields_per_paper),
    )


# -- distribution summary ----------------------------------------------------


@dataclass(frozen=True)
class DistributionSummary:
    n_input: int
    n_selected: int
    min_citations: int
    median_d0: float
    median_local: float
    median_burden: float
    frac_local_neg: float
    frac_local_zero: float
    frac_local_pos: float
    frac_burden_lt1: float
    frac_burden_eq1: float
    frac_burden_gt1: float
    frac_d0_pos: float
    frac_d0_nonpos: float

    def items(self) -> list[tuple[str, float | int]]:
        return [(k, getattr(self, k)) for k in self.__dataclass_fields__]


def distribution_summary(
    results: Iterable[DisruptionResult], min_citations: int = 10
) -> DistributionSummary:
    """Medians and sign fractions of the index and its two factors, over
    papers with at least ``min_citations`` in-window citers."""
    all_rows = list(results)
    rows = [r for r in all_rows
            if r.d0 is not None and r.c_p >= min_citations]
    if not rows:
        raise EmptyInput("no defined results at this citation threshold")
    d0 = np.array([r.d0 for r in rows])
    local = np.array([r.local_displacement for r in rows])
    burden = np.array([r.burden for r in rows])
    return DistributionSummary(
        n_input=len(all_rows),
        n_selected=len(rows),
        min_citations=min_citations,
        median_d0=float(np.median(d0)),
        median_local=float(np.median(local)),
        median_burden=float(np.median(burden)),
        frac_local_neg=float((local < 0).mean()),
        frac_local_zero=float((local == 0).mean()),
        frac_local_pos=float((local > 0).mean()),
        frac_burden_lt1=float((burden < 1).mean()),
        frac_burden_eq1=float((burden == 1).mean()),
        frac_burden_gt1=float((burden > 1).mean()),
        frac_d0_pos=float((d0 > 0).mean()),
        frac_d0_nonpos=float((d0 <= 0).mean()),
    )


# -- reference-length independence -------------------------------------------


@dataclass(frozen=True)
class RefLenBucket:
    n_refs: int
    n: int
    mean_d0: float
    theory: float


@dataclass(frozen=True)
class StratumReport:
    burden_level: float
    n: int
    mean_local: float | None
    theory: float | None
    slope: float | None
    slope_se: float | None
    ci_low: float | None
    ci_high: float | None
    buckets: tuple[RefLenBucket, ...] = ()
    flags: tuple[str, ...] = ()


def reference_length_independence(
    results: Iterable[DisruptionResult],
    d_band: tuple[float, float] = (0.0, 0.05),
    b_levels: Sequence[float] = (1.0, 10.0, 100.0),
) -> list[StratumReport]:
    """Within a local-displacement band, stratify by burden level and check
    that the index does not depend on reference length.

    Each stratum reports per-reference-length mean index values, the
    theoretical flat line mean_local/(1 + level), and the fitted slope of the
    index against reference length with a 95% interval (expected to cover 0).
    """
    lo, hi = d_band
    base = [r for r in results
            if r.d0 is not None and r.burden is not None
            and lo <= r.local_displacement <= hi]
    reports = []
    for level in b_levels:
        tol = 1e-9 * max(1.0, abs(level))
        stratum = [r for r in base if abs(r.burden - level) <= tol]
        if not stratum:
            reports.append(StratumReport(
                burden_level=level, n=0, mean_local=None, theory=None,
                slope=None, slope_se=None, ci_low=None, ci_high=None,
                flags=("empty_stratum",),
            ))
            continue
        d0 = np.array([r.d0 for r in stratum])
        local = np.array([r.local_displacement for r in stratum])
        nrefs = np.array([r.n_refs for r in stratum], dtype=float)
        mean_local = float(local.mean())
        theory = mean_local / (1.0 + level)
        buckets = []
        for val in np.unique(nrefs):
            m = nrefs == val
            buckets.append(RefLenBucket(
                n_refs=int(val), n=int(m.sum()),
                mean_d0=float(d0[m].mean()), theory=theory,
            ))
        if len(np.unique(nrefs)) < 2:
            reports.append(StratumReport(
                burden_level=level, n=len(stratum), mean_local=mean_local,
                theory=theory, slope=None, slope_se=None,
                ci_low=None, ci_high=None, buckets=tuple(buckets),
                flags=("single_bucket",),
            ))
            continue
        X = np.column_stack([np.ones_like(nrefs), nrefs])
        beta, rss = _solve_ols(X, d0)
        df = max(len(stratum) - 2, 1)
        s2 = rss / df
        cov = s2 * np.linalg.inv(X.T @ X)
        slope = float(beta[1])
        se = float(np.sqrt(cov[1, 1]))
        reports.append(StratumReport(
            burden_level=level, n=len(stratum), mean_local=mean_local,
            theory=theory, slope=slope, slope_se=se,
            ci_low=slope - 1.96 * se, ci_high=slope + 1.96 * se,
            buckets=tuple(buckets),
        ))
    return reports


# -- OLS with yearly fixed effects --------------------------------------------


@dataclass(frozen=True)
class RegressionSpec:
    """Sample bounds (inclusive) for the team-size regression."""

    team_bounds: tuple[int, int] = (1, 10)
    ref_bounds: tuple[int, int] = (5, 50)
    cite_bounds: tuple[int, int] = (10, 1000)


@dataclass(frozen=True)
class RegressionFit:
    b0: float
    b_k: float
    b_r: float
    b_c: float
    year_effects: dict[int, float]
    se: dict[str, float]
    n: int
    r2: float
    dropped_year: int
    n_excluded: int
    mean_k: float
    mean_r: float
    mean_c: float
    method: str


def regression_rows(
    results: Iterable[DisruptionResult],
) -> list[tuple[float, int, int, int, int]]:
    """(index, team size, reference count, citation count, year) rows for
    every defined result."""
    return [(r.d0, r.n_authors, r.n_refs, r.c_p, r.year)
            for r in results if r.d0 is not None]


def _solve_ols(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Normal-equation OLS; raises RankDeficient on singular designs."""
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        raise RankDeficient(f"design matrix rank {rank} < {X.shape[1]} columns")
    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    return beta, float(resid @ resid)


def ols_fit(
    rows: Iterable[tuple[float, int, int, int, int]],
    spec: RegressionSpec = RegressionSpec(),
    fixed_effects: str = "dummy",
) -> RegressionFit:
    """Index on log team size, log reference count, log citation count, with
    yearly fixed effects (earliest year dropped as the reference level).

    ``fixed_effects='dummy'`` uses explicit year dummies; ``'within'``
    demeans within years and reconstructs the intercept and effects. Both
    give identical slopes (and slope standard errors) up to rounding.
    """
    data = np.array([(d, k, r, c, yr) for d, k, r, c, yr in rows], dtype=float)
    if data.size == 0:
        raise InsufficientSample("no rows")
    (k_lo, k_hi), (r_lo, r_hi), (c_lo, c_hi) = (
        spec.team_bounds, spec.ref_bounds, spec.cite_bounds)
    keep = ((data[:, 1] >= k_lo) & (data[:, 1] <= k_hi)
            & (data[:, 2] >= r_lo) & (data[:, 2] <= r_hi)
            & (data[:, 3] >= c_lo) & (data[:, 3] <= c_hi))
    n_excluded = int((~keep).sum())
    data = data[keep]
    n = len(data)
    y = data[:, 0]
    lnx = np.log(data[:, 1:4])
    years = data[:, 4].astype(int)
    years_u = np.unique(years)
    dropped = int(years_u[0])
    n_params = 4 + len(years_u) - 1
    if n <= n_params:
        raise InsufficientSample(f"n={n} <= {n_params} parameters")

    if fixed_effects == "dummy":
        dummies = (years[:, None] == years_u[None, 1:]).astype(float)
        X = np.column_stack([np.ones(n), lnx, dummies])
        beta, rss = _solve_ols(X, y)
        df = n - X.shape[1]
        s2 = rss / df
        cov = s2 * np.linalg.inv(X.T @ X)
        ses = np.sqrt(np.diag(cov))
        year_effects = {dropped: 0.0}
        se = {"b0": float(ses[0]), "b_k": float(ses[1]),
              "b_r": float(ses[2]), "b_c": float(ses[3])}
        for i, yr in enumerate(years_u[1:]):
            year_effects[int(yr)] = float(beta[4 + i])
            se[f"year:{int(yr)}"] = float(ses[4 + i])
        b0, b_k, b_r, b_c = (float(b) for b in beta[:4])
    elif fixed_effects == "within":
        yd = y.copy()
        xd = lnx.copy()
        group_means: dict[int, tuple[float, np.ndarray]] = {}
        for yr in years_u:
            m = years == yr
            my = float(y[m].mean())
            mx = lnx[m].mean(axis=0)
            group_means[int(yr)] = (my, mx)
            yd[m] -= my
            xd[m] -= mx
        beta_s, rss = _solve_ols(xd, yd)
        df = n - 3 - len(years_u)
        if df <= 0:
            raise InsufficientSample(f"no residual degrees of freedom (n={n})")
        s2 = rss / df
        cov = s2 * np.linalg.inv(xd.T @ xd)
        ses = np.sqrt(np.diag(cov))
        b_k, b_r, b_c = (float(b) for b in beta_s)
        alphas = {yr: my - float(mx @ beta_s)
                  for yr, (my, mx) in group_means.items()}
        b0 = alphas[dropped]
        year_effects = {yr: alphas[yr] - b0 for yr in alphas}
        se = {"b_k": float(ses[0]), "b_r": float(ses[1]), "b_c": float(ses[2])}
    else:
        raise ValueError(f"unknown fixed_effects method {fixed_effects!r}")

    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else float("nan")
    return RegressionFit(
        b0=b0, b_k=b_k, b_r=b_r, b_c=b_c,
        year_effects=year_effects, se=se, n=n, r2=r2,
        dropped_year=dropped, n_excluded=n_excluded,
        mean_k=float(data[:, 1].mean()),
        mean_r=float(data[:, 2].mean()),
        mean_c=float(data[:, 3].mean()),
        method=fixed_effects,
    )


def marginal_effect_team_size(fit: RegressionFit, at_k: float | None = None) -> float:
    """Derivative of the index in team size under the log-linear model,
    b_k / k, evaluated at ``at_k`` (default: sample mean team size)."""
    k = fit.mean_k if at_k is None else at_k
    if k <= 0:
        raise NonpositiveK(f"team size must be positive, got {k}")
    return fit.b_k / k


# -- citation-window sweep -----------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    year: int
    window_years: int | None
    n: int
    b_k: float | None
    se_k: float | None
    error: str | None = None


def window_sweep(
    g: CitationGraph,
    cohorts: Sequence[tuple[int, int | None]],
    spec: RegressionSpec = RegressionSpec(),
    cfg: VariantConfig = VariantConfig(),
    *,
    fixed_effects: str = "dummy",
    workers: int = 1,
    engine: str = "auto",
) -> list[SweepRow]:
    """Per (publication year, window) cohort: recompute the index under that
    window, fit the team-size regression, and report b_k with its standard
    error. Per-cohort failures are recorded; the sweep continues."""
    out: list[SweepRow] = []
    eligible = g.eligible_mask()
    for year, wyears in cohorts:
        window = UNLIMITED if wyears is None else Window(int(wyears))
        ixs = np.flatnonzero(eligible & (g.years == year))
        ids = [g.ids[i] for i in ixs]
        try:
            if not ids:
                raise EmptySelection(f"no eligible papers in cohort year {year}")
            results = batch_compute(g, window, cfg, ids=ids,
                                    workers=workers, engine=engine)
            fit = ols_fit(regression_rows(results), spec, fixed_effects)
            out.append(SweepRow(year=year, window_years=wyears, n=fit.n,
                                b_k=fit.b_k, se_k=fit.se.get("b_k"),
                                error=None))
        except AnalysisError as exc:
            out.append(SweepRow(year=year, window_years=wyears, n=0,
                                b_k=None, se_k=None, error=str(exc)))
    return out
