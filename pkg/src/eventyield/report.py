"""Study configuration, orchestration, and rendering: regression tables in
basis points with significance stars, path CSVs for figures, and placebo
band CSVs.

Outputs are byte-identical across repeated runs with the same config and
seed: UTF-8, LF line endings, fixed float formatting.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
import yaml
from scipy.stats import norm

from .design import Estimator, StudySpec, build_design
from .errors import ConfigError
from .estimators import (
    CumulativePath,
    accumulate_lad_path,
    constant_stats,
    cumulative_path,
    fit_lad,
    fit_ols,
    hac_covariance,
    median_change,
)
from .events import (
    EventSet,
    GroupAssignment,
    align_events,
    split_by_country,
    split_by_median,
    split_by_openness,
    split_by_sign,
)
from .ingest import (
    parse_event_table,
    parse_fred_csv,
    parse_forecast_series,
    parse_ohlc_csv,
)
from .permutation import (
    PermutationResult,
    PermutationSpec,
    Statistic,
    permutation_comparison,
    permutation_group_level,
)
from .series import PriceSeries, Transform, to_returns

_FLOAT = "%.12g"


@dataclass(frozen=True)
class AssetConfig:
    path: str
    kind: str  # fred | ohlc | forecast
    label: str


@dataclass(frozen=True)
class PermutationConfig:
    replications: int = 5000
    seed: int = 0
    statistic: str = "ols"  # ols | lad | median


@dataclass(frozen=True)
class StudyConfig:
    assets: tuple[AssetConfig, ...]
    events_path: str
    output_dir: str
    split: str = "openness"
    window: int = 15
    hac_lags: int = 30
    estimator: str = "ols"
    years: tuple[int, int] | None = None
    permutation: PermutationConfig | None = None

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.estimator not in ("ols", "lad", "median"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        for asset in self.assets:
            if asset.kind not in ("fred", "ohlc", "forecast"):
                raise ConfigError(f"unknown asset kind {asset.kind!r}")


def load_config(path: str | Path) -> StudyConfig:
    """Read the YAML study document; see README for the schema."""
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    base = Path(path).parent
    try:
        assets = tuple(
            AssetConfig(
                path=str(base / a["path"]),
                kind=a.get("kind", "fred"),
                label=a.get("label", Path(a["path"]).stem),
            )
            for a in doc["assets"]
        )
        cfg = StudyConfig(
            assets=assets,
            events_path=str(base / doc["events"]),
            output_dir=str(base / doc.get("output_dir", "out")),
            split=doc.get("split", "openness"),
            window=int(doc.get("window", 15)),
            hac_lags=int(doc.get("hac_lags", 30)),
            estimator=doc.get("estimator", "ols"),
            years=tuple(doc["years"]) if doc.get("years") else None,
            permutation=(
                PermutationConfig(
                    replications=int(doc["permutation"].get("replications", 5000)),
                    seed=int(doc["permutation"].get("seed", 0)),
                    statistic=doc["permutation"].get("statistic", "ols"),
                )
                if doc.get("permutation")
                else None
            ),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from None
    for p in [cfg.events_path] + [a.path for a in cfg.assets]:
        if not os.path.exists(p):
            raise ConfigError(f"file not found: {p}")
    return cfg


_PARSERS = {
    "fred": lambda text, label: parse_fred_csv(text),
    "ohlc": parse_ohlc_csv,
    "forecast": lambda text, label: parse_forecast_series(text),
}


def load_asset(asset: AssetConfig) -> PriceSeries:
    with open(asset.path, encoding="utf-8") as fh:
        text = fh.read()
    if asset.kind == "ohlc":
        return parse_ohlc_csv(text, asset_id=asset.label)
    return _PARSERS[asset.kind](text, asset.label)


def resolve_split(events: EventSet, rule: str) -> GroupAssignment | EventSet:
    """Split rules: pooled | openness | median:<attr> | sign:<attr> |
    country:<pivot> | interaction:<open|closed>:<attr>."""
    if rule == "pooled":
        return events
    if rule == "openness":
        return split_by_openness(events)
    head, _, rest = rule.partition(":")
    if head == "median" and rest:
        return split_by_median(events, rest)
    if head == "sign" and rest:
        return split_by_sign(events, rest)
    if head == "country" and rest:
        return split_by_country(events, rest)
    if head == "interaction" and rest:
        side, _, attr = rest.partition(":")
        if side not in ("open", "closed") or not attr:
            raise ConfigError(f"bad interaction rule {rule!r}")
        by_open = split_by_openness(events)
        subset = by_open.group_a if side == "open" else by_open.group_b
        return split_by_sign(subset, attr)
    raise ConfigError(f"unknown split rule {rule!r}")


# --- rendering -------------------------------------------------------------


def _round_half_away(x: float, places: int) -> Decimal:
    q = Decimal(1).scaleb(-places)
    return Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP)


def format_cell(estimate_bp: float, p: float) -> str:
    """'30.4 (<0.01)***' style cell: basis points to one decimal (ties away
    from zero), p to two decimals with '<0.01' below 0.005, strict-inequality
    stars at 0.10/0.05/0.01."""
    bp = _round_half_away(estimate_bp, 1)
    if p < 0.005:
        p_str = "<0.01"
    else:
        p_str = f"{_round_half_away(p, 2):.2f}"
    if p < 0.01:
        stars = "***"
    elif p < 0.05:
        stars = "**"
    elif p < 0.10:
        stars = "*"
    else:
        stars = ""
    return f"{bp:.1f} ({p_str}){stars}"


def render_table(
    columns: list[CumulativePath],
    constant: tuple[float, float] | None = None,
    scale: float = 100.0,
) -> str:
    """Text table of cumulative paths: one row per relative day plus an
    optional constant row.  ``scale`` converts estimates to basis points
    (100 for percent-point inputs).  ``constant`` is (estimate, p-value) in
    the unscaled units."""
    if not columns:
        raise ConfigError("no columns to render")
    days = columns[0].rel_days
    for c in columns[1:]:
        if not np.array_equal(c.rel_days, days):
            raise ConfigError("columns cover different relative-day ranges")
    header = ["Day"] + [c.label for c in columns]
    rows = [header]
    for i, r in enumerate(days):
        cells = [str(int(r))]
        for c in columns:
            p = float(c.pvalues[i]) if c.pvalues is not None else float("nan")
            if np.isnan(p):
                bp = _round_half_away(float(c.estimates[i]) * scale, 1)
                cells.append(f"{bp:.1f}")
            else:
                cells.append(format_cell(float(c.estimates[i]) * scale, p))
        rows.append(cells)
    if constant is not None:
        mu, p = constant
        rows.append(["Constant", format_cell(mu * scale, p)] + [""] * (len(columns) - 1))
    widths = [max(len(row[j]) for row in rows) for j in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


# --- CSV emission ----------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "" if x is None else _FLOAT % x


def emit_paths(path: CumulativePath, out_file: str | Path, scale: float = 100.0) -> Path:
    """Write one cumulative path as CSV (estimates scaled to basis points
    for percent-point series; pass scale=1.0 for log-return series)."""
    out_file = Path(out_file)
    lines = ["relative_day,estimate_bp,se,ci90_lo,ci90_hi,ci95_lo,ci95_hi"]
    for i, r in enumerate(path.rel_days):
        est = float(path.estimates[i]) * scale
        if path.ses is None:
            cells = [str(int(r)), _fmt(est), "", "", "", "", ""]
        else:
            cells = [
                str(int(r)),
                _fmt(est),
                _fmt(float(path.ses[i]) * scale),
                _fmt(float(path.ci90[0][i]) * scale),
                _fmt(float(path.ci90[1][i]) * scale),
                _fmt(float(path.ci95[0][i]) * scale),
                _fmt(float(path.ci95[1][i]) * scale),
            ]
        lines.append(",".join(cells))
    out_file.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out_file


def emit_placebo(result: PermutationResult, out_file: str | Path, scale: float = 100.0) -> Path:
    out_file = Path(out_file)
    lines = ["relative_day,observed,placebo_mean,band90_lo,band90_hi,band95_lo,band95_hi"]
    lo90, hi90 = result.bands[0.90]
    lo95, hi95 = result.bands[0.95]
    for i, r in enumerate(result.rel_days):
        cells = [
            str(int(r)),
            _fmt(float(result.observed[i]) * scale),
            _fmt(float(result.placebo_mean[i]) * scale),
            _fmt(float(lo90[i]) * scale),
            _fmt(float(hi90[i]) * scale),
            _fmt(float(lo95[i]) * scale),
            _fmt(float(hi95[i]) * scale),
        ]
        lines.append(",".join(cells))
    out_file.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out_file


def read_path_csv(path: str | Path, label: str | None = None) -> CumulativePath:
    """Reconstruct a CumulativePath from an emitted path CSV; p-values are
    recomputed from the estimate/SE ratio."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    if header[0] != "relative_day":
        raise ConfigError(f"{path}: not a path CSV")
    days, ests, ses = [], [], []
    have_se = True
    for line in lines[1:]:
        cells = line.split(",")
        days.append(int(cells[0]))
        ests.append(float(cells[1]))
        if cells[2] == "":
            have_se = False
        else:
            ses.append(float(cells[2]))
    est = np.array(ests)
    if not have_se:
        return CumulativePath(label=label or Path(path).stem, rel_days=np.array(days), estimates=est)
    se = np.array(ses)
    p = np.ones_like(est)
    nz = se > 0
    p[nz] = 2.0 * norm.sf(np.abs(est[nz]) / se[nz])
    p[(se == 0) & (est != 0)] = 0.0
    return CumulativePath(
        label=label or Path(path).stem,
        rel_days=np.array(days),
        estimates=est,
        ses=se,
        pvalues=p,
    )


# --- writers for the ingest shapes (round-trip + synth output) -------------


def write_fred_csv(series: PriceSeries) -> str:
    lines = [f"DATE,{series.asset_id}"]
    for d, v in zip(series.calendar.dates, series.values):
        lines.append(f"{d.isoformat()},{_FLOAT % v}")
    return "\n".join(lines) + "\n"


def write_event_csv(events: EventSet) -> str:
    header = "date,model,open,lab,country,arena_score,frontier_gap,agi_shift"
    lines = [header]
    for e in events:
        cells = [
            e.date.isoformat(),
            e.name,
            "x" if e.openness.value == "open" else "",
            str(e.attr("lab") or ""),
            str(e.attr("country") or ""),
        ]
        for attr in ("arena_score", "frontier_gap", "agi_shift"):
            v = e.attr(attr)
            cells.append("" if v is None else _FLOAT % float(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# --- orchestration ---------------------------------------------------------

_STAT_BY_NAME = {
    "ols": (Statistic.OLS_PATH, Statistic.OLS_DIFFERENCE),
    "lad": (Statistic.LAD_PATH, Statistic.LAD_DIFFERENCE),
    "median": (Statistic.MEDIAN_PATH, Statistic.MEDIAN_DIFFERENCE),
}


def _scale_for(series: PriceSeries) -> float:
    # percent points -> bp for level series; log returns left unscaled
    return 100.0 if series.transform is Transform.LEVEL else 1.0


def _estimate_paths(series, returns, groups, config: StudyConfig):
    """Paths per group plus the difference, and the constant row (OLS only)."""
    two_group = isinstance(groups, GroupAssignment)
    if config.estimator == "median":
        if two_group:
            a = median_change(series, groups.group_a, config.window)
            b = median_change(series, groups.group_b, config.window)
            diff = CumulativePath(
                label=f"{groups.label_a} - {groups.label_b}",
                rel_days=a.rel_days,
                estimates=a.estimates - b.estimates,
            )
            a = CumulativePath(label=groups.label_a, rel_days=a.rel_days, estimates=a.estimates)
            b = CumulativePath(label=groups.label_b, rel_days=b.rel_days, estimates=b.estimates)
            return [a, b, diff], None
        path = median_change(series, groups, config.window)
        return [path], None

    estimator = Estimator.LAD if config.estimator == "lad" else Estimator.OLS
    aligned = (
        GroupAssignment(
            align_events(groups.group_a, returns.calendar),
            align_events(groups.group_b, returns.calendar),
            groups.label_a,
            groups.label_b,
        )
        if two_group
        else align_events(groups, returns.calendar)
    )
    spec = StudySpec(config.window, aligned, estimator, config.hac_lags)
    design = build_design(returns, spec)
    if estimator is Estimator.LAD:
        fit = fit_lad(design)
        paths = [accumulate_lad_path(fit, group=g) for g in design.group_labels]
        if two_group:
            paths.append(accumulate_lad_path(fit, contrast=True))
        return paths, None
    fit = fit_ols(design)
    cov = hac_covariance(design, fit, config.hac_lags)
    paths = [cumulative_path(fit, cov, group=g) for g in design.group_labels]
    if two_group:
        paths.append(cumulative_path(fit, cov, contrast=True))
    mu, _, p = constant_stats(fit, cov)
    return paths, (mu, p)


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in text).strip("_").lower()


def run_study(config: StudyConfig) -> list[Path]:
    """Run the configured study end to end; returns the written files."""
    with open(config.events_path, encoding="utf-8") as fh:
        events = parse_event_table(fh.read())
    if config.years:
        events = events.filter_years(*config.years)
    if len(events) == 0:
        raise ConfigError("no events")
    groups = resolve_split(events, config.split)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for asset in config.assets:
        series = load_asset(asset)
        returns = to_returns(series)
        scale = _scale_for(series)
        paths, constant = _estimate_paths(series, returns, groups, config)
        two_group = isinstance(groups, GroupAssignment)
        for i, path in enumerate(paths):
            is_diff = two_group and i == len(paths) - 1
            suffix = "diff" if is_diff else _slug(path.label)
            written.append(
                emit_paths(path, out_dir / f"{asset.label}_{suffix}.csv", scale=scale)
            )
        table = render_table(paths, constant=constant, scale=scale)
        table_file = out_dir / f"{asset.label}_table.txt"
        table_file.write_text(table, encoding="utf-8", newline="\n")
        written.append(table_file)

        if config.permutation is not None:
            written.extend(_run_permutation(series, groups, config, asset, out_dir, scale))
    return written


def _run_permutation(series, groups, config, asset, out_dir, scale) -> list[Path]:
    level_stat, diff_stat = _STAT_BY_NAME[config.permutation.statistic]
    written = []
    two_group = isinstance(groups, GroupAssignment)
    if two_group:
        # group-level panels draw samples of the smaller group's size
        k = min(len(groups.group_a), len(groups.group_b))
        for label, evset in ((groups.label_a, groups.group_a), (groups.label_b, groups.group_b)):
            spec = PermutationSpec(
                replications=config.permutation.replications,
                statistic=level_stat,
                window=config.window,
                seed=config.permutation.seed,
                k=k,
                hac_lags=config.hac_lags,
            )
            result = permutation_group_level(series, evset, spec)
            written.append(
                emit_placebo(result, out_dir / f"{asset.label}_{_slug(label)}_placebo.csv", scale)
            )
        spec = PermutationSpec(
            replications=config.permutation.replications,
            statistic=diff_stat,
            window=config.window,
            seed=config.permutation.seed,
            hac_lags=config.hac_lags,
        )
        result = permutation_comparison(series, groups, spec)
        written.append(emit_placebo(result, out_dir / f"{asset.label}_diff_placebo.csv", scale))
    else:
        spec = PermutationSpec(
            replications=config.permutation.replications,
            statistic=level_stat,
            window=config.window,
            seed=config.permutation.seed,
            hac_lags=config.hac_lags,
        )
        result = permutation_group_level(series, groups, spec)
        written.append(emit_placebo(result, out_dir / f"{asset.label}_all_placebo.csv", scale))
    return written
