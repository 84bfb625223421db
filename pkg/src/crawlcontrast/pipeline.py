"""Per-domain audit orchestration.

Chains locate -> fetch -> parse -> extract -> pair -> assess for each
domain and folds every failure mode into a coverage outcome, so a batch
over hundreds of domains always runs to completion. Results serialize as
JSON-lines with a schema version.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .ccindex import CaptureLocation
from .colors import RgbaColor
from .contrast import ContrastResult, assess
from .cssextract import extract_declarations
from .fetch import ArchiveFetcher
from .pairings import ColorPairing, build_pairings
from .warc import (
    MalformedHttpError,
    MalformedRecordError,
    parse_http_response,
    read_record,
)

SCHEMA_VERSION = 1

OUTCOME_ANALYSED = "analysed"
OUTCOME_NO_COLOUR_DATA = "no-colour-data"
OUTCOME_FETCH_FAILED = "fetch-failed"
OUTCOME_NOT_FOUND = "not-found"
OUTCOME_PARSE_FAILED = "parse-failed"

ALL_OUTCOMES = (
    OUTCOME_ANALYSED,
    OUTCOME_NO_COLOUR_DATA,
    OUTCOME_FETCH_FAILED,
    OUTCOME_NOT_FOUND,
    OUTCOME_PARSE_FAILED,
)

CATEGORIES = (
    "Research",
    "EU Institutions",
    "E-commerce",
    "Education",
    "News/Media",
    "Open Knowledge",
    "Government",
    "Technology",
    "Hosting/Platform",
    "Other",
)

Locator = Callable[[str], CaptureLocation | None]


def assign_category(domain: str, mapping: dict[str, str] | None = None) -> str:
    """Category for a domain: explicit mapping first, then TLD heuristics."""
    domain = domain.strip().lower()
    if mapping:
        explicit = mapping.get(domain)
        if explicit:
            return explicit
    labels = domain.split(".")
    second_level = labels[-2] if len(labels) >= 2 else ""
    if domain.endswith(".edu") or ".edu." in domain or second_level == "ac":
        return "Education"
    if (
        domain.endswith((".gov", ".mil"))
        or ".gov." in domain
        or ".mil." in domain
        or second_level == "go"
    ):
        return "Government"
    return "Other"


@dataclass
class SiteAudit:
    domain: str
    category: str
    outcome: str
    capture: CaptureLocation | None = None
    pairings: list[tuple[ColorPairing, ContrastResult]] = field(default_factory=list)
    total_pairings: int = 0
    passing_normal: int = 0
    passing_large: int = 0
    pass_rate_normal: float | None = None
    pass_rate_large: float | None = None
    worst_ratio: float | None = None
    mean_ratio: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "domain": self.domain,
            "category": self.category,
            "outcome": self.outcome,
            "capture": self.capture.to_json_dict() if self.capture else None,
            "pairings": [
                {
                    "fg": pairing.fg.css_hex(),
                    "bg": pairing.bg.css_hex(),
                    "provenance": pairing.provenance,
                    "rule_id": pairing.first_rule_id,
                    "ratio": result.ratio,
                    "passes_normal": result.passes_normal,
                    "passes_large": result.passes_large,
                }
                for pairing, result in self.pairings
            ],
            "total_pairings": self.total_pairings,
            "passing_normal": self.passing_normal,
            "passing_large": self.passing_large,
            "pass_rate_normal": self.pass_rate_normal,
            "pass_rate_large": self.pass_rate_large,
            "worst_ratio": self.worst_ratio,
            "mean_ratio": self.mean_ratio,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "SiteAudit":
        schema = d.get("schema")
        if schema != SCHEMA_VERSION:
            raise ValueError(
                f"results schema version mismatch: file has {schema!r}, "
                f"this build reads {SCHEMA_VERSION}"
            )
        pairings = []
        for p in d.get("pairings", []):
            fg = _hex_to_color(p["fg"])
            bg = _hex_to_color(p["bg"])
            pairings.append(
                (
                    ColorPairing(
                        fg=fg,
                        bg=bg,
                        provenance=p["provenance"],
                        first_rule_id=p.get("rule_id", ""),
                    ),
                    ContrastResult(
                        ratio=float(p["ratio"]),
                        passes_normal=bool(p["passes_normal"]),
                        passes_large=bool(p["passes_large"]),
                    ),
                )
            )
        capture = d.get("capture")
        return cls(
            domain=d["domain"],
            category=d.get("category", "Other"),
            outcome=d["outcome"],
            capture=CaptureLocation.from_json_dict(capture) if capture else None,
            pairings=pairings,
            total_pairings=int(d.get("total_pairings", 0)),
            passing_normal=int(d.get("passing_normal", 0)),
            passing_large=int(d.get("passing_large", 0)),
            pass_rate_normal=d.get("pass_rate_normal"),
            pass_rate_large=d.get("pass_rate_large"),
            worst_ratio=d.get("worst_ratio"),
            mean_ratio=d.get("mean_ratio"),
        )


def _hex_to_color(text: str) -> RgbaColor:
    digits = text.lstrip("#")
    return RgbaColor(int(digits[0:2], 16), int(digits[2:4], 16), int(digits[4:6], 16))


def _analysed_audit(
    domain: str, category: str, capture: CaptureLocation, pairings: list[ColorPairing]
) -> SiteAudit:
    results = [(pairing, assess(pairing.fg, pairing.bg)) for pairing in pairings]
    total = len(results)
    passing_normal = sum(1 for _, r in results if r.passes_normal)
    passing_large = sum(1 for _, r in results if r.passes_large)
    ratios = [r.ratio for _, r in results]
    return SiteAudit(
        domain=domain,
        category=category,
        outcome=OUTCOME_ANALYSED,
        capture=capture,
        pairings=results,
        total_pairings=total,
        passing_normal=passing_normal,
        passing_large=passing_large,
        pass_rate_normal=passing_normal / total,
        pass_rate_large=passing_large / total,
        worst_ratio=min(ratios),
        mean_ratio=sum(ratios) / total,
    )


def audit_domain(
    domain: str,
    category: str,
    locator: Locator,
    fetcher: ArchiveFetcher,
) -> SiteAudit:
    """Audit one domain end to end; never raises, every failure is an outcome."""

    def failed(outcome: str, capture: CaptureLocation | None = None) -> SiteAudit:
        return SiteAudit(domain=domain, category=category, outcome=outcome, capture=capture)

    try:
        capture = locator(domain)
    except Exception:
        return failed(OUTCOME_FETCH_FAILED)
    if capture is None:
        return failed(OUTCOME_NOT_FOUND)

    try:
        raw = fetcher.fetch_record_bytes(capture)
    except Exception:
        return failed(OUTCOME_FETCH_FAILED, capture)

    try:
        record = read_record(raw)
        if record.record_type.lower() != "response":
            return failed(OUTCOME_PARSE_FAILED, capture)
        response = parse_http_response(record.content)
        if response.status_code != 200:
            return failed(OUTCOME_PARSE_FAILED, capture)
        decls = extract_declarations(response.body, response.declared_charset)
    except (MalformedRecordError, MalformedHttpError):
        return failed(OUTCOME_PARSE_FAILED, capture)
    except Exception:
        return failed(OUTCOME_PARSE_FAILED, capture)

    pairings = build_pairings(decls)
    if not pairings:
        return failed(OUTCOME_NO_COLOUR_DATA, capture)
    return _analysed_audit(domain, category, capture, pairings)


def run_audit(
    domains: Sequence[tuple[str, str]],
    locator: Locator,
    fetcher: ArchiveFetcher,
    workers: int = 1,
    partial_path: str | Path | None = None,
) -> list[SiteAudit]:
    """Audit many (domain, category) pairs; output order equals input order.

    Completed audits are appended to `partial_path` as they finish so an
    interrupted run leaves a usable trace; the returned list is always
    input-ordered regardless of completion order.
    """
    results: list[SiteAudit | None] = [None] * len(domains)
    sink_lock = threading.Lock()
    sink = open(partial_path, "a", encoding="utf-8") if partial_path else None

    def work(index: int, domain: str, category: str) -> None:
        audit = audit_domain(domain, category, locator, fetcher)
        results[index] = audit
        if sink:
            with sink_lock:
                sink.write(audit.to_json_line() + "\n")
                sink.flush()

    try:
        if workers <= 1 or len(domains) <= 1:
            for i, (domain, category) in enumerate(domains):
                work(i, domain, category)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(work, i, domain, category)
                    for i, (domain, category) in enumerate(domains)
                ]
                for future in futures:
                    future.result()
    finally:
        if sink:
            sink.close()
    return [audit for audit in results if audit is not None]
