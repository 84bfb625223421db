"""Common Crawl index lookups.

Locates each domain's homepage capture in a named crawl via the public
per-crawl CDX HTTP endpoint (JSON-lines output), preferring the bare
domain or www host over deeper subdomains and HTTPS over HTTP. Also emits
the equivalent single SQL statement against the public columnar index
table for users with Athena access; both paths select identical captures
given identical index content.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit

import requests

DEFAULT_INDEX_URL = "https://index.commoncrawl.org"
DEFAULT_USER_AGENT = "crawlcontrast/0.1.0 (archived-page colour contrast audit)"

_RETRYABLE_STATUS = {429, 503}


class IndexUnreachableError(RuntimeError):
    """The index endpoint could not be reached after retries."""


class IndexThrottledError(IndexUnreachableError):
    """The index kept answering 429/503 beyond the retry budget."""


@dataclass(frozen=True)
class CaptureLocation:
    """Where one capture lives inside the crawl archive."""

    url: str
    timestamp: str
    warc_filename: str
    offset: int
    length: int
    status: int
    mime_detected: str
    digest: str

    def to_json_dict(self) -> dict:
        return {
            "url": self.url,
            "timestamp": self.timestamp,
            "warc_filename": self.warc_filename,
            "offset": self.offset,
            "length": self.length,
            "status": self.status,
            "mime_detected": self.mime_detected,
            "digest": self.digest,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CaptureLocation":
        return cls(
            url=d["url"],
            timestamp=d["timestamp"],
            warc_filename=d["warc_filename"],
            offset=int(d["offset"]),
            length=int(d["length"]),
            status=int(d["status"]),
            mime_detected=d["mime_detected"],
            digest=d["digest"],
        )


def _candidate_from_line(line: dict) -> CaptureLocation | None:
    try:
        return CaptureLocation(
            url=line["url"],
            timestamp=str(line.get("timestamp", "")),
            warc_filename=line["filename"],
            offset=int(line["offset"]),
            length=int(line["length"]),
            status=int(line.get("status", 0)),
            mime_detected=line.get("mime-detected") or line.get("mime") or "",
            digest=str(line.get("digest", "")),
        )
    except (KeyError, TypeError, ValueError):
        return None


def _host_score(host: str, domain: str) -> int:
    if host == domain or host == "www." + domain:
        return 2
    return 0


def _rank_key(cand: CaptureLocation, domain: str):
    parts = urlsplit(cand.url)
    host = (parts.hostname or "").lower()
    path_is_root = parts.path in ("", "/") and not parts.query
    scheme_score = 1 if parts.scheme == "https" else 0
    try:
        ts = int(cand.timestamp)
    except ValueError:
        ts = 0
    # sorted() ascending: best candidate first, URL breaking exact ties
    return (
        -int(path_is_root),
        -_host_score(host, domain),
        -scheme_score,
        -ts,
        cand.url,
    )


def _acceptable(cand: CaptureLocation, domain: str, allow_any_subdomain: bool) -> bool:
    if cand.status != 200 or cand.mime_detected != "text/html":
        return False
    parts = urlsplit(cand.url)
    if parts.path not in ("", "/") or parts.query:
        return False
    host = (parts.hostname or "").lower()
    if host in (domain, "www." + domain):
        return True
    return allow_any_subdomain and host.endswith("." + domain)


class IndexClient:
    """Per-crawl CDX index client with politeness and offline fixtures.

    At most `max_concurrent` queries are in flight regardless of caller
    concurrency; 429/503 answers back off exponentially. With an
    `offline_dir`, recorded JSON-lines responses (<domain>.jsonl) are read
    instead of the network and no connection is ever opened.
    """

    def __init__(
        self,
        base_url: str = DEFAULT_INDEX_URL,
        session: requests.Session | None = None,
        user_agent: str = DEFAULT_USER_AGENT,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        max_concurrent: int = 2,
        timeout: float = 30.0,
        candidate_cap: int = 10_000,
        allow_any_subdomain: bool = False,
        offline_dir: str | Path | None = None,
        sleep=time.sleep,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.user_agent = user_agent
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self.candidate_cap = candidate_cap
        self.allow_any_subdomain = allow_any_subdomain
        self.offline_dir = Path(offline_dir) if offline_dir is not None else None
        self._sleep = sleep
        self._session = session
        self._limiter = threading.BoundedSemaphore(max_concurrent)

    def _get_session(self) -> requests.Session:
        if self._session is None:
            self._session = requests.Session()
        return self._session

    def _get(self, url: str, params: dict) -> requests.Response:
        headers = {"User-Agent": self.user_agent}
        last_error: Exception | None = None
        throttled = False
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(min(60.0, self.backoff_base * 2 ** (attempt - 1)))
            try:
                with self._limiter:
                    resp = self._get_session().get(
                        url, params=params, headers=headers, timeout=self.timeout
                    )
            except requests.RequestException as exc:
                last_error = exc
                throttled = False
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = RuntimeError(f"index answered {resp.status_code}")
                throttled = True
                continue
            return resp
        if throttled:
            raise IndexThrottledError(f"index still throttling after retries: {last_error}")
        raise IndexUnreachableError(f"index unreachable: {last_error}")

    def _query_lines(self, crawl_id: str, url_pattern: str, match_type: str | None) -> list[dict]:
        endpoint = f"{self.base_url}/{crawl_id}-index"
        params: dict[str, str] = {"url": url_pattern, "output": "json"}
        if match_type:
            params["matchType"] = match_type

        probe = self._get(endpoint, {**params, "showNumPages": "true"})
        if probe.status_code == 404:
            return []  # no captures for this pattern in this crawl
        pages = 1
        try:
            pages = max(1, int(json.loads(probe.text.strip().splitlines()[0]).get("pages", 1)))
        except (ValueError, IndexError, AttributeError):
            pages = 1

        lines: list[dict] = []
        for page in range(pages):
            resp = self._get(endpoint, {**params, "page": str(page)})
            if resp.status_code == 404:
                continue
            if resp.status_code != 200:
                raise IndexUnreachableError(f"index answered {resp.status_code}")
            for raw in resp.text.splitlines():
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    lines.append(json.loads(raw))
                except json.JSONDecodeError:
                    continue
                if len(lines) >= self.candidate_cap:
                    return lines
        return lines

    def _offline_lines(self, domain: str) -> list[dict]:
        assert self.offline_dir is not None
        path = self.offline_dir / f"{domain}.jsonl"
        if not path.exists():
            return []
        lines = []
        for raw in path.read_text("utf-8").splitlines():
            raw = raw.strip()
            if not raw:
                continue
            try:
                lines.append(json.loads(raw))
            except json.JSONDecodeError:
                continue
        return lines[: self.candidate_cap]

    def candidates(self, domain: str, crawl_id: str) -> list[CaptureLocation]:
        """All filtered root-page candidates for a domain, unranked."""
        domain = domain.strip().lower().rstrip(".")
        if self.offline_dir is not None:
            raw_lines = self._offline_lines(domain)
        elif self.allow_any_subdomain:
            raw_lines = self._query_lines(crawl_id, domain, "domain")
        else:
            raw_lines = []
            for host in (domain, f"www.{domain}"):
                raw_lines.extend(self._query_lines(crawl_id, f"{host}/", "exact"))
        seen = set()
        out = []
        for line in raw_lines:
            cand = _candidate_from_line(line)
            if cand is None:
                continue
            key = (cand.url, cand.timestamp, cand.digest, cand.warc_filename, cand.offset)
            if key in seen:
                continue
            seen.add(key)
            if _acceptable(cand, domain, self.allow_any_subdomain):
                out.append(cand)
        return out

    def lookup_homepage(self, domain: str, crawl_id: str) -> CaptureLocation | None:
        """Best homepage capture for a domain, or None when nothing qualifies."""
        domain = domain.strip().lower().rstrip(".")
        cands = self.candidates(domain, crawl_id)
        if not cands:
            return None
        return sorted(cands, key=lambda c: _rank_key(c, domain))[0]


def emit_athena_sql(domains: list[str], crawl_id: str) -> str:
    """One SQL statement locating all the domains' captures in the columnar index.

    Output is deterministic: domains are deduplicated and sorted before
    rendering, so any input order produces byte-identical SQL.
    """
    if not domains:
        raise ValueError("domain list is empty")
    normalized = sorted({d.strip().lower() for d in domains if d.strip()})
    if not normalized:
        raise ValueError("domain list is empty")
    quoted = ", ".join("'" + d.replace("'", "''") + "'" for d in normalized)
    crawl = crawl_id.replace("'", "''")
    return (
        "SELECT url,\n"
        "       warc_filename,\n"
        "       warc_record_offset,\n"
        "       warc_record_length,\n"
        "       content_mime_detected,\n"
        "       fetch_status\n"
        'FROM "ccindex"."ccindex"\n'
        f"WHERE crawl = '{crawl}'\n"
        "  AND subset = 'warc'\n"
        "  AND fetch_status = 200\n"
        "  AND content_mime_detected = 'text/html'\n"
        f"  AND url_host_registered_domain IN ({quoted});\n"
    )
