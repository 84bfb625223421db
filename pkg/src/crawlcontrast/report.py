"""Corpus-level statistics and report rendering.

Aggregates per-site audits into the coverage summary, pass-rate
distribution, category breakdown, and worst/best site tables, then renders
them as canonical JSON, CSV (one file per table), or markdown. Rendering
is byte-deterministic: ratios display with two decimals ("4.13:1"),
percentages with one ("62.7%").
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .pipeline import (
    OUTCOME_ANALYSED,
    OUTCOME_FETCH_FAILED,
    OUTCOME_NO_COLOUR_DATA,
    OUTCOME_NOT_FOUND,
    OUTCOME_PARSE_FAILED,
    SiteAudit,
)

FORMATS = ("json", "csv", "markdown")

# pass-rate buckets over the normal-text threshold, highest first;
# full compliance is its own bucket, exclusive of the 90% band
_BUCKETS = (
    ("100% (fully compliant)", None),
    ("90-99%", 0.90),
    ("75-89%", 0.75),
    ("50-74%", 0.50),
    ("25-49%", 0.25),
    ("0-24%", 0.0),
)


@dataclass(frozen=True)
class DistributionRow:
    bucket_label: str
    domain_count: int
    percentage: float


@dataclass(frozen=True)
class CategoryStat:
    category: str
    domains: int
    avg_pass_rate: float
    median_pass_rate: float
    fully_compliant: int


@dataclass(frozen=True)
class WorstSite:
    domain: str
    pass_rate: float
    failing_pairings: int
    worst_ratio: float


@dataclass(frozen=True)
class BestSite:
    domain: str
    pairings_checked: int
    mean_ratio: float


@dataclass
class AggregateReport:
    sites_total: int = 0
    sites_analysed: int = 0
    sites_no_colour: int = 0
    sites_fetch_failed: int = 0
    sites_not_found: int = 0
    sites_parse_failed: int = 0
    pairings_total: int = 0
    pairings_failing_normal: int = 0
    global_unique_pairings: int = 0
    mean_pass_rate: float = 0.0
    median_pass_rate: float = 0.0
    fully_compliant_count: int = 0
    above_90_count: int = 0
    below_50_count: int = 0
    distribution: list[DistributionRow] = field(default_factory=list)
    category_stats: list[CategoryStat] = field(default_factory=list)
    worst_sites: list[WorstSite] = field(default_factory=list)
    best_sites: list[BestSite] = field(default_factory=list)


def bucket_index(rate: float) -> int:
    """Index into the distribution buckets; every rate lands in exactly one."""
    if rate >= 1.0:
        return 0
    for i, (_, lower) in enumerate(_BUCKETS[1:], start=1):
        if rate >= lower:
            return i
    return len(_BUCKETS) - 1


def _median(values: list[float]) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def aggregate(audits: list[SiteAudit], top_n: int = 10) -> AggregateReport:
    """Corpus statistics over a full audit list; empty input yields a zeroed report."""
    analysed = [a for a in audits if a.outcome == OUTCOME_ANALYSED]
    rates = [a.pass_rate_normal for a in analysed if a.pass_rate_normal is not None]

    bucket_counts = [0] * len(_BUCKETS)
    for rate in rates:
        bucket_counts[bucket_index(rate)] += 1
    n_analysed = len(analysed)
    distribution = [
        DistributionRow(
            bucket_label=label,
            domain_count=count,
            percentage=(100.0 * count / n_analysed) if n_analysed else 0.0,
        )
        for (label, _), count in zip(_BUCKETS, bucket_counts)
    ]

    by_category: dict[str, list[SiteAudit]] = {}
    for audit in analysed:
        by_category.setdefault(audit.category, []).append(audit)
    category_stats = [
        CategoryStat(
            category=category,
            domains=len(members),
            avg_pass_rate=sum(m.pass_rate_normal for m in members) / len(members),
            median_pass_rate=_median([m.pass_rate_normal for m in members]),
            fully_compliant=sum(1 for m in members if m.pass_rate_normal >= 1.0),
        )
        for category, members in by_category.items()
    ]
    category_stats.sort(key=lambda s: (-s.avg_pass_rate, s.category))

    worst = sorted(analysed, key=lambda a: (a.pass_rate_normal, a.domain))[:top_n]
    compliant = [a for a in analysed if a.pass_rate_normal >= 1.0]
    best = sorted(compliant, key=lambda a: (-a.total_pairings, a.domain))[:top_n]

    global_unique = {
        (pairing.fg.rgb, pairing.bg.rgb)
        for audit in analysed
        for pairing, _ in audit.pairings
    }

    return AggregateReport(
        sites_total=len(audits),
        sites_analysed=n_analysed,
        sites_no_colour=sum(1 for a in audits if a.outcome == OUTCOME_NO_COLOUR_DATA),
        sites_fetch_failed=sum(1 for a in audits if a.outcome == OUTCOME_FETCH_FAILED),
        sites_not_found=sum(1 for a in audits if a.outcome == OUTCOME_NOT_FOUND),
        sites_parse_failed=sum(1 for a in audits if a.outcome == OUTCOME_PARSE_FAILED),
        pairings_total=sum(a.total_pairings for a in analysed),
        pairings_failing_normal=sum(a.total_pairings - a.passing_normal for a in analysed),
        global_unique_pairings=len(global_unique),
        mean_pass_rate=(sum(rates) / len(rates)) if rates else 0.0,
        median_pass_rate=_median(rates),
        fully_compliant_count=sum(1 for r in rates if r >= 1.0),
        above_90_count=sum(1 for r in rates if r > 0.90),
        below_50_count=sum(1 for r in rates if r < 0.50),
        distribution=distribution,
        category_stats=category_stats,
        worst_sites=[
            WorstSite(
                domain=a.domain,
                pass_rate=a.pass_rate_normal,
                failing_pairings=a.total_pairings - a.passing_normal,
                worst_ratio=a.worst_ratio,
            )
            for a in worst
        ],
        best_sites=[
            BestSite(
                domain=a.domain,
                pairings_checked=a.total_pairings,
                mean_ratio=a.mean_ratio,
            )
            for a in best
        ],
    )


def format_pct(fraction_or_pct: float, already_pct: bool = False) -> str:
    value = fraction_or_pct if already_pct else fraction_or_pct * 100.0
    return f"{value:.1f}%"


def format_ratio(ratio: float) -> str:
    return f"{ratio:.2f}:1"


def _json_payload(report: AggregateReport) -> dict:
    failing_pct = (
        100.0 * report.pairings_failing_normal / report.pairings_total
        if report.pairings_total
        else 0.0
    )
    return {
        "schema": 1,
        "coverage": {
            "sites_total": report.sites_total,
            "sites_analysed": report.sites_analysed,
            "sites_no_colour_data": report.sites_no_colour,
            "sites_fetch_failed": report.sites_fetch_failed,
            "sites_not_found": report.sites_not_found,
            "sites_parse_failed": report.sites_parse_failed,
        },
        "pairings": {
            "total": report.pairings_total,
            "failing_normal": report.pairings_failing_normal,
            "failing_normal_pct": round(failing_pct, 1),
            "global_unique": report.global_unique_pairings,
        },
        "pass_rates": {
            "mean_pct": round(report.mean_pass_rate * 100.0, 1),
            "median_pct": round(report.median_pass_rate * 100.0, 1),
            "fully_compliant_sites": report.fully_compliant_count,
            "above_90_pct_sites": report.above_90_count,
            "below_50_pct_sites": report.below_50_count,
        },
        "distribution": [
            {
                "bucket": row.bucket_label,
                "domains": row.domain_count,
                "percentage": round(row.percentage, 1),
            }
            for row in report.distribution
        ],
        "categories": [
            {
                "category": s.category,
                "domains": s.domains,
                "avg_pass_rate_pct": round(s.avg_pass_rate * 100.0, 1),
                "median_pass_rate_pct": round(s.median_pass_rate * 100.0, 1),
                "fully_compliant": s.fully_compliant,
            }
            for s in report.category_stats
        ],
        "worst_sites": [
            {
                "domain": w.domain,
                "pass_rate_pct": round(w.pass_rate * 100.0, 1),
                "failing_pairings": w.failing_pairings,
                "worst_ratio": round(w.worst_ratio, 2),
            }
            for w in report.worst_sites
        ],
        "best_sites": [
            {
                "domain": b.domain,
                "pairings_checked": b.pairings_checked,
                "mean_ratio": round(b.mean_ratio, 2),
            }
            for b in report.best_sites
        ],
    }


def _csv_bytes(header: list[str], rows: list[list[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _csv_files(report: AggregateReport) -> dict[str, bytes]:
    return {
        "report_distribution.csv": _csv_bytes(
            ["Pass rate range", "Domains", "Percentage"],
            [
                [row.bucket_label, str(row.domain_count), format_pct(row.percentage, True)]
                for row in report.distribution
            ],
        ),
        "report_categories.csv": _csv_bytes(
            ["Category", "Domains", "Avg pass rate", "Median", "Compliant"],
            [
                [
                    s.category,
                    str(s.domains),
                    format_pct(s.avg_pass_rate),
                    format_pct(s.median_pass_rate),
                    str(s.fully_compliant),
                ]
                for s in report.category_stats
            ],
        ),
        "report_worst_sites.csv": _csv_bytes(
            ["Domain", "Pass rate", "Failing pairings", "Worst ratio"],
            [
                [
                    w.domain,
                    format_pct(w.pass_rate),
                    str(w.failing_pairings),
                    format_ratio(w.worst_ratio),
                ]
                for w in report.worst_sites
            ],
        ),
        "report_best_sites.csv": _csv_bytes(
            ["Domain", "Pairings checked", "Mean ratio"],
            [
                [b.domain, str(b.pairings_checked), format_ratio(b.mean_ratio)]
                for b in report.best_sites
            ],
        ),
    }


def _markdown(report: AggregateReport) -> str:
    failing_pct = (
        100.0 * report.pairings_failing_normal / report.pairings_total
        if report.pairings_total
        else 0.0
    )
    lines = [
        "# Colour contrast audit report",
        "",
        "## Coverage",
        "",
        f"- Sites audited: {report.sites_total}",
        f"- Analysed (>= 1 colour pairing): {report.sites_analysed}",
        f"- No colour data: {report.sites_no_colour}",
        f"- Not found in index: {report.sites_not_found}",
        f"- Fetch failed: {report.sites_fetch_failed}",
        f"- Parse failed: {report.sites_parse_failed}",
        "",
        "## Overall compliance (normal text, 4.5:1)",
        "",
        f"- Colour pairings checked (summed per site): {report.pairings_total}",
        f"- Globally unique pairings: {report.global_unique_pairings}",
        f"- Failing pairings: {report.pairings_failing_normal}"
        f" ({format_pct(failing_pct, True)})",
        f"- Mean per-site pass rate: {format_pct(report.mean_pass_rate)}",
        f"- Median per-site pass rate: {format_pct(report.median_pass_rate)}",
        f"- Fully compliant sites: {report.fully_compliant_count}",
        "",
        "## Distribution of per-site pass rates",
        "",
        "| Pass rate range | Domains | Percentage |",
        "| --- | ---: | ---: |",
    ]
    for row in report.distribution:
        lines.append(
            f"| {row.bucket_label} | {row.domain_count} | {format_pct(row.percentage, True)} |"
        )
    lines += [
        "",
        "## Pass rates by category",
        "",
        "| Category | Domains | Avg pass rate | Median | Compliant |",
        "| --- | ---: | ---: | ---: | ---: |",
    ]
    for s in report.category_stats:
        lines.append(
            f"| {s.category} | {s.domains} | {format_pct(s.avg_pass_rate)}"
            f" | {format_pct(s.median_pass_rate)} | {s.fully_compliant} |"
        )
    lines += [
        "",
        "## Lowest pass-rate domains",
        "",
        "| Domain | Pass rate | Failing pairings | Worst ratio |",
        "| --- | ---: | ---: | ---: |",
    ]
    for w in report.worst_sites:
        lines.append(
            f"| {w.domain} | {format_pct(w.pass_rate)} | {w.failing_pairings}"
            f" | {format_ratio(w.worst_ratio)} |"
        )
    lines += [
        "",
        "## Fully compliant sites with the most pairings checked",
        "",
        "| Domain | Pairings checked | Mean ratio |",
        "| --- | ---: | ---: |",
    ]
    for b in report.best_sites:
        lines.append(
            f"| {b.domain} | {b.pairings_checked} | {format_ratio(b.mean_ratio)} |"
        )
    lines.append("")
    return "\n".join(lines)


def render(report: AggregateReport, format: str) -> dict[str, bytes]:
    """Render a report as {relative filename: bytes}; byte-deterministic.

    json and markdown produce a single file; csv produces one file per
    table, which is why the return value is a mapping.
    """
    if format == "json":
        payload = json.dumps(_json_payload(report), sort_keys=True, indent=2) + "\n"
        return {"report.json": payload.encode("utf-8")}
    if format == "csv":
        return _csv_files(report)
    if format == "markdown":
        return {"report.md": _markdown(report).encode("utf-8")}
    raise ValueError(f"unknown format: {format!r}")
