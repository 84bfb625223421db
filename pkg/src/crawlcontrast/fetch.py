"""Byte-range retrieval of single WARC records from the archive host.

A fetcher owns its politeness state: a concurrency cap, a minimum delay
between requests on each connection slot, and exponential backoff on
throttling answers. Fetched records are cached on disk keyed by
(filename, offset, length) with atomic writes, so interrupted runs resume
without refetching and offline runs never touch the network.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .ccindex import CaptureLocation

DEFAULT_ARCHIVE_URL = "https://data.commoncrawl.org"
DEFAULT_USER_AGENT = "crawlcontrast/0.1.0 (archived-page colour contrast audit)"

_CRAWL_IN_PATH_RE = re.compile(r"crawl-data/([^/]+)/")
_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class FetchError(RuntimeError):
    """Base class; `outcome` is the stable manifest label."""

    outcome = "transport-error"


class RangeNotSatisfiableError(FetchError):
    outcome = "range-not-satisfiable"


class ThrottledError(FetchError):
    outcome = "throttled"


class ShortReadError(FetchError):
    outcome = "short-read"


class FullBodyResponseError(FetchError):
    """Server ignored the Range header; refusing to buffer a whole archive."""

    outcome = "range-ignored"


class OfflineMissError(FetchError):
    outcome = "offline-miss"


@dataclass
class FetchPolicy:
    max_concurrent: int = 4
    min_delay_ms: int = 250
    max_retries: int = 5
    backoff_base_ms: int = 1000
    cache_dir: str | Path | None = None

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


def cache_key(loc: CaptureLocation) -> str:
    raw = f"{loc.warc_filename}:{loc.offset}:{loc.length}"
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()


def crawl_of(loc: CaptureLocation) -> str:
    m = _CRAWL_IN_PATH_RE.search(loc.warc_filename)
    return m.group(1) if m else "unknown-crawl"


class _Slot:
    """One politeness lane: at most one request at a time, spaced min_delay apart."""

    def __init__(self) -> None:
        self.last_request = 0.0


class ArchiveFetcher:
    def __init__(
        self,
        policy: FetchPolicy | None = None,
        base_url: str = DEFAULT_ARCHIVE_URL,
        session: requests.Session | None = None,
        user_agent: str = DEFAULT_USER_AGENT,
        offline: bool = False,
        timeout: float = 30.0,
        sleep=time.sleep,
        clock=time.monotonic,
    ) -> None:
        self.policy = policy or FetchPolicy()
        self.base_url = base_url.rstrip("/")
        self.user_agent = user_agent
        self.offline = offline
        self.timeout = timeout
        self._sleep = sleep
        self._clock = clock
        self._session = session
        self._limiter = threading.BoundedSemaphore(self.policy.max_concurrent)
        self._slots = [_Slot() for _ in range(self.policy.max_concurrent)]
        self._slots_lock = threading.Lock()

    def _get_session(self) -> requests.Session:
        if self._session is None:
            self._session = requests.Session()
        return self._session

    def cache_path(self, loc: CaptureLocation) -> Path | None:
        if self.policy.cache_dir is None:
            return None
        return Path(self.policy.cache_dir) / crawl_of(loc) / f"{cache_key(loc)}.bin"

    def _cache_read(self, loc: CaptureLocation) -> bytes | None:
        path = self.cache_path(loc)
        if path is None or not path.exists():
            return None
        return path.read_bytes()

    def _cache_write(self, loc: CaptureLocation, data: bytes) -> None:
        path = self.cache_path(loc)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        stamp = f".tmp.{os.getpid()}.{threading.get_ident()}"
        tmp = path.with_name(path.name + stamp)
        tmp.write_bytes(data)
        os.replace(tmp, path)
        meta = {
            "warc_filename": loc.warc_filename,
            "offset": loc.offset,
            "length": loc.length,
            "url": loc.url,
            "sha256": hashlib.sha256(data).hexdigest(),
        }
        meta_path = path.with_suffix(".json")
        tmp_meta = meta_path.with_name(meta_path.name + stamp)
        tmp_meta.write_text(json.dumps(meta, sort_keys=True) + "\n", "utf-8")
        os.replace(tmp_meta, meta_path)

    def _take_slot(self) -> _Slot:
        self._limiter.acquire()
        with self._slots_lock:
            return self._slots.pop()

    def _release_slot(self, slot: _Slot) -> None:
        with self._slots_lock:
            self._slots.append(slot)
        self._limiter.release()

    def _request_once(self, loc: CaptureLocation) -> bytes:
        url = f"{self.base_url}/{loc.warc_filename.lstrip('/')}"
        headers = {
            "User-Agent": self.user_agent,
            "Range": f"bytes={loc.offset}-{loc.offset + loc.length - 1}",
        }
        slot = self._take_slot()
        try:
            wait = self.policy.min_delay_ms / 1000.0 - (self._clock() - slot.last_request)
            if wait > 0:
                self._sleep(wait)
            slot.last_request = self._clock()
            resp = self._get_session().get(
                url, headers=headers, stream=True, timeout=self.timeout
            )
            try:
                if resp.status_code == 416:
                    raise RangeNotSatisfiableError(
                        f"range {headers['Range']} not satisfiable for {loc.warc_filename}"
                    )
                if resp.status_code == 200:
                    raise FullBodyResponseError(
                        f"server ignored Range header for {loc.warc_filename}"
                    )
                if resp.status_code in _RETRYABLE_STATUS:
                    raise ThrottledError(f"archive answered {resp.status_code}")
                if resp.status_code != 206:
                    raise FetchError(f"unexpected status {resp.status_code}")
                chunks = []
                received = 0
                for chunk in resp.iter_content(chunk_size=65536):
                    chunks.append(chunk)
                    received += len(chunk)
                    if received > loc.length:
                        raise FetchError(
                            f"server sent more than the requested {loc.length} bytes"
                        )
                if received < loc.length:
                    raise ShortReadError(f"got {received} of {loc.length} bytes")
                return b"".join(chunks)
            finally:
                resp.close()
        finally:
            self._release_slot(slot)

    def fetch_record_bytes(self, loc: CaptureLocation) -> bytes:
        """Exactly loc.length bytes of the record, from cache or the archive."""
        if loc.length <= 0:
            raise ValueError("capture length must be positive")
        cached = self._cache_read(loc)
        if cached is not None:
            return cached
        if self.offline:
            raise OfflineMissError(
                f"offline mode: {loc.warc_filename}@{loc.offset} not in cache"
            )

        attempt = 0
        short_retries = 0
        while True:
            try:
                data = self._request_once(loc)
                break
            except (RangeNotSatisfiableError, FullBodyResponseError):
                raise
            except ShortReadError:
                if short_retries >= 1:
                    raise
                short_retries += 1
            except ThrottledError:
                if attempt >= self.policy.max_retries:
                    raise
                backoff = min(60.0, self.policy.backoff_base_ms / 1000.0 * 2**attempt)
                self._sleep(backoff)
                attempt += 1
            except FetchError:
                raise
            except requests.RequestException as exc:
                if attempt >= self.policy.max_retries:
                    raise FetchError(f"transport failure: {exc}") from exc
                backoff = min(60.0, self.policy.backoff_base_ms / 1000.0 * 2**attempt)
                self._sleep(backoff)
                attempt += 1
        self._cache_write(loc, data)
        return data


def fetch_record_bytes(
    loc: CaptureLocation, policy: FetchPolicy | None = None, **kwargs
) -> bytes:
    """One-shot convenience wrapper around ArchiveFetcher."""
    return ArchiveFetcher(policy=policy, **kwargs).fetch_record_bytes(loc)
