"""Broker-style markdown report assembled from the analyses, with its figures."""

import csv
import io
from pathlib import Path

import numpy as np

from .analysis import (
    correlate_features,
    fit_regional,
    hk_counterfactual,
    summarize_by_hull,
)
from .core_data import HULL, Hull, Region, RegionScheme
from .errors import UnknownRegion
from .evaluation import ModelSpec, fit_model, make_split, run_swap, swap_csv, table_markdown
from .ingest import REGION_TO_TOKEN
from .plots import FigureKind, FigureSpec, Series, render_svg
from .serialize import fmt_float

FEATURE_LABELS = {
    "length_ft": "Length overall (ft)",
    "year": "Year built",
    "waterline_ft": "Waterline length (ft)",
    "beam_ft": "Beam (ft)",
    "draft_ft": "Draft (ft)",
    "displacement_lb": "Displacement (lb)",
    "sail_area_sqft": "Sail area (sq ft)",
    "hull": "Hull type",
    "gdp": "Regional GDP (USD)",
    "gdp_per_capita": "GDP per capita (USD)",
}


def correlations_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("feature", "r", "slope", "intercept", "n"))
    for c in results:
        w.writerow((c.feature, fmt_float(c.pearson_r), fmt_float(c.trend_slope),
                    fmt_float(c.trend_intercept), c.n))
    return buf.getvalue()


def counterfactual_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("id", "hull", "original_region", "pred_original", "pred_hk", "delta"))
    for r in rows:
        w.writerow((r.id, r.hull.value.lower(), REGION_TO_TOKEN[r.original_region],
                    fmt_float(r.pred_original), fmt_float(r.pred_hk), fmt_float(r.delta)))
    return buf.getvalue()


def effects_csv(effects):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("region", "effect_usd"))
    for region, value in effects.effects.items():
        w.writerow((REGION_TO_TOKEN[region], fmt_float(value)))
    return buf.getvalue()


def _usd(v):
    sign = "-" if v < 0 else ""
    return f"{sign}${abs(v):,.2f}"


def correlation_sentence(c):
    label = FEATURE_LABELS.get(c.feature, c.feature)
    if c.feature == HULL:
        more = "more" if c.trend_slope >= 0 else "less"
        return (f"Catamarans list for {_usd(abs(c.trend_slope))} {more} than monohulls on "
                f"average (point-biserial r = {c.pearson_r:.3f}).")
    if abs(c.pearson_r) < 0.1:
        return f"{label} shows negligible correlation with listing price (r = {c.pearson_r:.3f})."
    direction = "rises" if c.pearson_r > 0 else "falls"
    return (f"Listing price {direction} with {label.lower()} (r = {c.pearson_r:.3f}, "
            f"trend {_usd(c.trend_slope)} per unit).")


def feature_figure(records, c, out_dir):
    label = FEATURE_LABELS.get(c.feature, c.feature)
    path = out_dir / f"fig_{c.feature}.svg"
    prices = [r.listing_price for r in records]
    if c.feature == HULL:
        means = []
        for h in (Hull.MONOHULL, Hull.CATAMARAN):
            vals = [r.listing_price for r in records if r.hull is h]
            if vals:
                means.append((h.value, float(np.mean(vals))))
        spec = FigureSpec(FigureKind.BAR, "Average listing price by hull type", "Hull type",
                          "Average listing price (USD)", (Series("mean price", tuple(means)),),
                          str(path))
    else:
        xs = [float(getattr(r, c.feature)) for r in records]
        spec = FigureSpec(FigureKind.SCATTER_TREND, f"Listing price vs {label.lower()}", label,
                          "Listing price (USD)", (Series("listings", tuple(zip(xs, prices))),),
                          str(path))
    return render_svg(spec)


def residual_figure(report, predictions, path, title):
    pts = tuple(zip((float(p) for p in predictions), report.residuals))
    return render_svg(FigureSpec(FigureKind.RESIDUAL, title, "Predicted price (USD)",
                                 "Residual (USD)", (Series(report.model_name, pts),), str(path)))


def counterfactual_figure(rows, hull, path):
    ordered = sorted(rows, key=lambda r: (r.pred_original, r.id))
    original = tuple((i, r.pred_original) for i, r in enumerate(ordered))
    relabeled = tuple((i, r.pred_hk) for i, r in enumerate(ordered))
    return render_svg(FigureSpec(
        FigureKind.GROUPED_COMPARISON,
        f"{hull.value}s: predicted price as listed vs in Hong Kong",
        "Boat (sorted by predicted price as listed)", "Predicted price (USD)",
        (Series("as listed", original), Series("relabeled Hong Kong", relabeled)), str(path)))


def build_report(records, out_dir, seed=42, regions=None, sample_size=3000, cleaning=None):
    """Run correlations, the regional fit and (4-region data) the HK counterfactual.

    Writes CSVs, SVG figures and ``report.md`` into ``out_dir``; returns the
    list of files written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    has_hk = any(r.region is Region.HONG_KONG for r in records)
    if regions is None:
        scheme = RegionScheme.FOUR_REGION_HK if has_hk else RegionScheme.THREE_REGION
    else:
        scheme = RegionScheme(regions)
    if scheme is RegionScheme.FOUR_REGION_HK and not has_hk:
        raise UnknownRegion("Hong Kong analysis requested (four-region scheme) but the data has "
                            "no hong_kong listings; the HK coefficient cannot be estimated. "
                            "Use --regions three or add Hong Kong rows.")
    if scheme is RegionScheme.THREE_REGION and has_hk:
        raise UnknownRegion("data contains hong_kong listings, which the three-region scheme "
                            "cannot encode; use --regions four")
    written = []

    def write(name, text):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
        return path

    correlations = correlate_features(records)
    write("correlations.csv", correlations_csv(correlations))
    figures = [(c, feature_figure(records, c, out_dir)) for c in correlations]
    written += [p for _, p in figures]

    effects = fit_regional(records, "ols", scheme)
    write("regional_effects.csv", effects_csv(effects))
    spec = ModelSpec("ols", region_scheme=scheme, name="ols+region")
    split = make_split([r.id for r in records], seed + 1)
    swap = run_swap(records, spec, split)
    write("regional_swap.csv", swap_csv([swap]))
    by_id = {r.id: r for r in records}
    fitted_a = fit_model([by_id[i] for i in split.half_a_ids], spec)
    preds_b = fitted_a.predict([by_id[i] for i in split.half_b_ids])
    resid_path = residual_figure(swap.forward, preds_b, out_dir / "fig_regional_residuals.svg",
                                 "Residuals of the region-aware linear model (train A, test B)")
    written.append(resid_path)

    hk_rows, hk_summary, hk_figs = None, None, []
    if scheme is RegionScheme.FOUR_REGION_HK:
        hk_rows, grouped = hk_counterfactual(effects.model, records, sample_size, seed + 3)
        write("counterfactual.csv", counterfactual_csv(hk_rows))
        hk_summary = summarize_by_hull(grouped)
        for hull, rows in grouped.items():
            if rows:
                p = counterfactual_figure(rows, hull, out_dir / f"fig_hk_{hull.value.lower()}.svg")
                written.append(p)
                hk_figs.append((hull, p))

    lines = ["# Sailboat listing prices: features, regions and Hong Kong", ""]
    lines.append(f"Listings analysed: {len(records)}.")
    if cleaning is not None:
        lines.append(f"Cleaning removed {cleaning.dropped_missing_region} rows without a region, "
                     f"{cleaning.dropped_missing_technical} with missing technical data and "
                     f"{cleaning.dropped_malformed} malformed rows ({cleaning.rows_in} read).")
    lines += ["", "## What drives the price", ""]
    lines += [f"- {correlation_sentence(c)}" for c in correlations]
    lines += ["", "| feature | r | trend slope | trend intercept | n |", "|---|---:|---:|---:|---:|"]
    for c in correlations:
        lines.append(f"| {c.feature} | {c.pearson_r:.4f} | {c.trend_slope:.6g} | "
                     f"{c.trend_intercept:.6g} | {c.n} |")
    lines.append("")
    for c, path in figures:
        lines.append(f"![{FEATURE_LABELS.get(c.feature, c.feature)}]({path.name})")
    lines += ["", "## Regional effects", ""]
    lines.append(f"Linear model on the eight boat features plus region indicators "
                 f"({effects.base_region.value} is the reference level).")
    lines += ["", "| region | effect (USD) |", "|---|---:|"]
    for region, value in effects.effects.items():
        lines.append(f"| {region.value} | {value:,.2f} |")
    lines += ["", "Half/half cross-validation of this model, trained on each half in turn:", ""]
    lines.append(table_markdown([swap.forward, swap.backward]).rstrip("\n"))
    lines.append("")
    lines.append(f"Relative MSE gap {swap.relative_mse_gap:.2%}, relative MAE gap "
                 f"{swap.relative_mae_gap:.2%}"
                 + (" (within 10%)." if swap.within(0.10) else " (exceeds 10%)."))
    lines += ["", f"![Regional model residuals]({resid_path.name})"]
    if hk_summary is not None:
        hk = effects.effects[Region.HONG_KONG]
        lines += ["", "## Hong Kong", ""]
        lines.append(f"The Hong Kong coefficient is {_usd(hk)} relative to the "
                     f"{effects.base_region.value}. {len(hk_rows)} boats listed elsewhere were "
                     f"relabeled to Hong Kong and re-priced with the same model.")
        lines += ["", "| hull | boats | mean price as listed | mean price in HK | mean change |",
                  "|---|---:|---:|---:|---:|"]
        for s in hk_summary:
            if s.count:
                lines.append(f"| {s.hull.value} | {s.count} | {s.mean_original:,.2f} | "
                             f"{s.mean_hk:,.2f} | {s.mean_delta:,.2f} |")
        lines.append("")
        for hull, path in hk_figs:
            lines.append(f"![{hull.value} counterfactual]({path.name})")
    lines.append("")
    write("report.md", "\n".join(lines))
    return written
