"""Command-line interface: run full studies, placebo permutations, render
tables, generate synthetic data, and validate configs."""

from __future__ import annotations

import sys
from datetime import date
from pathlib import Path

import click

from . import report
from .errors import EventYieldError
from .events import Event, EventSet, GroupAssignment, Openness, split_by_openness
from .report import StudyConfig, load_config, run_study
from .synth import SynthSpec, generate_walk, inject_effects


def _parse_years(text: str | None) -> tuple[int, int] | None:
    if not text:
        return None
    try:
        a, b = text.split("..")
        return int(a), int(b)
    except ValueError:
        raise click.BadParameter("expected <first>..<last>, e.g. 2023..2024")


def _apply_overrides(cfg: StudyConfig, **kw) -> StudyConfig:
    from dataclasses import replace

    updates = {}
    if kw.get("window") is not None:
        updates["window"] = kw["window"]
    if kw.get("hac_lags") is not None:
        updates["hac_lags"] = kw["hac_lags"]
    if kw.get("estimator") is not None:
        updates["estimator"] = kw["estimator"]
    if kw.get("years") is not None:
        updates["years"] = kw["years"]
    perm = cfg.permutation
    if kw.get("seed") is not None or kw.get("replications") is not None:
        perm = report.PermutationConfig(
            replications=kw.get("replications") or (perm.replications if perm else 5000),
            seed=kw.get("seed") if kw.get("seed") is not None else (perm.seed if perm else 0),
            statistic=perm.statistic if perm else "ols",
        )
        updates["permutation"] = perm
    return replace(cfg, **updates) if updates else cfg


@click.group()
def main():
    """Event studies around dated releases: fixed-effect regressions with
    HAC inference, median/LAD estimators, and permutation placebo bands."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Permutation seed override.")
@click.option("--window", type=int, default=None)
@click.option("--hac-lags", type=int, default=None)
@click.option("--replications", type=int, default=None)
@click.option("--years", default=None, help="Restrict events, e.g. 2023..2024.")
@click.option("--estimator", type=click.Choice(["ols", "lad", "median"]), default=None)
def run(config_path, seed, window, hac_lags, replications, years, estimator):
    """Run the full study described by the config file."""
    try:
        cfg = load_config(config_path)
        cfg = _apply_overrides(
            cfg,
            seed=seed,
            window=window,
            hac_lags=hac_lags,
            replications=replications,
            years=_parse_years(years),
            estimator=estimator,
        )
        written = run_study(cfg)
    except EventYieldError as exc:
        raise click.ClickException(str(exc))
    for p in written:
        click.echo(p)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0)
@click.option("--replications", type=int, default=5000)
@click.option("--statistic", type=click.Choice(["ols", "lad", "median"]), default="ols")
@click.option("--years", default=None)
def permute(config_path, seed, replications, statistic, years):
    """Compute placebo permutation bands only."""
    from dataclasses import replace

    try:
        cfg = load_config(config_path)
        cfg = replace(
            cfg,
            years=_parse_years(years) or cfg.years,
            permutation=report.PermutationConfig(
                replications=replications, seed=seed, statistic=statistic
            ),
        )
        with open(cfg.events_path, encoding="utf-8") as fh:
            events = report.parse_event_table(fh.read())
        if cfg.years:
            events = events.filter_years(*cfg.years)
        groups = report.resolve_split(events, cfg.split)
        out_dir = Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for asset in cfg.assets:
            series = report.load_asset(asset)
            scale = report._scale_for(series)
            written.extend(
                report._run_permutation(series, groups, cfg, asset, out_dir, scale)
            )
    except EventYieldError as exc:
        raise click.ClickException(str(exc))
    for p in written:
        click.echo(p)


@main.command()
@click.option("--output", type=click.Path(), required=True, help="Output directory.")
@click.option("--length", type=int, default=800)
@click.option("--sigma-bp", type=float, default=5.0, help="Daily volatility in bp.")
@click.option("--drift-bp", type=float, default=0.0, help="Daily drift in bp.")
@click.option("--seed", type=int, default=0)
@click.option("--events-per-group", type=int, default=10)
@click.option("--effect-bp", type=float, default=10.0, help="Day-0 effect: +x for group A, -x for B.")
@click.option("--window", type=int, default=15)
def synth(output, length, sigma_bp, drift_bp, seed, events_per_group, effect_bp, window):
    """Generate an oracle dataset: a random-walk price file and an event
    table with known injected effects, in the shapes `run` ingests."""
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(
        length=length, sigma=sigma_bp / 100.0, drift=drift_bp / 100.0, seed=seed, asset_id="SYNTH"
    )
    series = generate_walk(spec)
    cal = series.calendar
    n = len(cal)
    usable = n - 2 * (window + 1)
    total = 2 * events_per_group
    step = max(1, usable // (total + 1))
    dates = [cal.dates[window + 1 + (i + 1) * step] for i in range(total)]
    evs = []
    for i, d in enumerate(dates):
        openness = Openness.OPEN if i % 2 == 0 else Openness.CLOSED
        evs.append(Event(date=d, name=f"synthetic-{i}", openness=openness))
    events = EventSet(tuple(evs))
    groups = split_by_openness(events)
    series = inject_effects(
        series,
        groups,
        {"Open": {0: effect_bp / 100.0}, "Closed": {0: -effect_bp / 100.0}},
    )
    (out / "synth_prices.csv").write_text(
        report.write_fred_csv(series), encoding="utf-8", newline="\n"
    )
    (out / "synth_events.csv").write_text(
        report.write_event_csv(events), encoding="utf-8", newline="\n"
    )
    click.echo(out / "synth_prices.csv")
    click.echo(out / "synth_events.csv")


@main.command()
@click.argument("path_csvs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Write here instead of stdout.")
def table(path_csvs, out):
    """Render a significance table from emitted path CSVs."""
    try:
        columns = [report.read_path_csv(p) for p in path_csvs]
        text = report.render_table(columns, scale=1.0)  # CSVs are already in bp
    except EventYieldError as exc:
        raise click.ClickException(str(exc))
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        click.echo(out)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def validate(config_path):
    """Parse the config and every referenced file; report problems."""
    try:
        cfg = load_config(config_path)
        with open(cfg.events_path, encoding="utf-8") as fh:
            events = report.parse_event_table(fh.read())
        report.resolve_split(events, cfg.split)
        for asset in cfg.assets:
            report.load_asset(asset)
    except EventYieldError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"OK: {len(events)} events, {len(cfg.assets)} asset(s)")


if __name__ == "__main__":
    main()
