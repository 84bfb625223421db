"""Deterministic WCAG AA colour-contrast audits of Common Crawl archives."""

from .ccindex import CaptureLocation, IndexClient, emit_athena_sql
from .colors import NonColorKeyword, RgbaColor, hsl_to_rgb, parse_color
from .contrast import ContrastResult, assess, contrast_ratio, relative_luminance
from .cssextract import (
    StyleDeclaration,
    extract_background_shorthand_color,
    extract_declarations,
    parse_style_block,
)
from .fetch import ArchiveFetcher, FetchPolicy, fetch_record_bytes
from .pairings import ColorPairing, build_pairings, resolve_alpha
from .pipeline import SiteAudit, audit_domain, run_audit
from .report import AggregateReport, aggregate, render
from .warc import ArchivedResponse, WarcRecord, parse_http_response, read_record

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "ArchiveFetcher",
    "ArchivedResponse",
    "CaptureLocation",
    "ColorPairing",
    "ContrastResult",
    "FetchPolicy",
    "IndexClient",
    "NonColorKeyword",
    "RgbaColor",
    "SiteAudit",
    "StyleDeclaration",
    "WarcRecord",
    "aggregate",
    "assess",
    "audit_domain",
    "build_pairings",
    "contrast_ratio",
    "emit_athena_sql",
    "extract_background_shorthand_color",
    "extract_declarations",
    "fetch_record_bytes",
    "hsl_to_rgb",
    "parse_color",
    "parse_http_response",
    "parse_style_block",
    "read_record",
    "relative_luminance",
    "render",
    "resolve_alpha",
    "run_audit",
]
