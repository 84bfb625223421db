"""Shared fixtures: fixture builders, local range/index servers, fake sessions."""

from __future__ import annotations

import gzip
import io
import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

import pytest

DATA_DIR = __import__("pathlib").Path(__file__).parent / "data"


# ---------------------------------------------------------------- builders


def http_response_bytes(
    status: int = 200,
    reason: str = "OK",
    headers: list[tuple[str, str]] | None = None,
    body: bytes = b"",
    chunked: bool = False,
    gzip_body: bool = False,
) -> bytes:
    headers = list(headers or [])
    if gzip_body:
        body = gzip.compress(body, mtime=0)
        headers.append(("Content-Encoding", "gzip"))
    if chunked:
        headers.append(("Transfer-Encoding", "chunked"))
        body = rechunk(body, [7, 3, 11])
    else:
        headers.append(("Content-Length", str(len(body))))
    head = f"HTTP/1.1 {status} {reason}\r\n"
    head += "".join(f"{k}: {v}\r\n" for k, v in headers)
    return head.encode("ascii") + b"\r\n" + body


def rechunk(body: bytes, sizes: list[int]) -> bytes:
    """Encode a body with chunked transfer coding using the given chunk sizes."""
    out = bytearray()
    i = 0
    s = 0
    while i < len(body):
        size = max(1, sizes[s % len(sizes)])
        chunk = body[i : i + size]
        out += f"{len(chunk):x}".encode() + b"\r\n" + chunk + b"\r\n"
        i += len(chunk)
        s += 1
    out += b"0\r\n\r\n"
    return bytes(out)


def warc_record_bytes(
    payload: bytes,
    target_uri: str = "https://example.com/",
    record_type: str = "response",
    content_length: int | None = None,
    extra_headers: list[tuple[str, str]] | None = None,
) -> bytes:
    length = len(payload) if content_length is None else content_length
    headers = [
        ("WARC-Type", record_type),
        ("WARC-Target-URI", target_uri),
        ("WARC-Date", "2026-02-15T00:00:00Z"),
        ("Content-Type", "application/http; msgtype=response"),
        ("Content-Length", str(length)),
    ] + list(extra_headers or [])
    head = b"WARC/1.0\r\n" + "".join(f"{k}: {v}\r\n" for k, v in headers).encode("utf-8")
    return head + b"\r\n" + payload + b"\r\n\r\n"


def gzip_member(data: bytes) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as gz:
        gz.write(data)
    return buf.getvalue()


def build_archive(records: list[bytes]) -> tuple[bytes, list[tuple[int, int]]]:
    """Concatenate pre-encoded records into one archive blob with (offset, length) spans."""
    blob = bytearray()
    spans = []
    for record in records:
        spans.append((len(blob), len(record)))
        blob += record
    return bytes(blob), spans


def index_line(
    url: str,
    filename: str,
    offset: int,
    length: int,
    status: int = 200,
    mime_detected: str = "text/html",
    timestamp: str = "20260215000000",
    digest: str = "sha1:AAAA",
) -> dict:
    return {
        "urlkey": url,
        "timestamp": timestamp,
        "url": url,
        "mime": mime_detected,
        "mime-detected": mime_detected,
        "status": str(status),
        "digest": digest,
        "length": str(length),
        "offset": str(offset),
        "filename": filename,
    }


def warc_fixture_files() -> dict[str, tuple[bytes, bytes | None]]:
    """Definitions of the checked-in .warc/.warc.gz files: name -> (bytes, expected body).

    expected body None means parsing must fail with a malformed-record error.
    """
    plain_http = http_response_bytes(
        headers=[("Content-Type", "text/html; charset=utf-8")], body=b"<html>ok</html>"
    )
    chunked_http = http_response_bytes(
        headers=[("Content-Type", "text/html")], body=b"<html>chunked body</html>", chunked=True
    )
    gzipped_http = http_response_bytes(
        headers=[("Content-Type", "text/html")], body=b"<html>gz body</html>", gzip_body=True
    )
    minimal = warc_record_bytes(plain_http)
    truncated = warc_record_bytes(plain_http, content_length=len(plain_http) + 100)
    return {
        "minimal.warc": (minimal, b"<html>ok</html>"),
        "minimal.warc.gz": (gzip_member(minimal), b"<html>ok</html>"),
        "chunked.warc.gz": (gzip_member(warc_record_bytes(chunked_http)), b"<html>chunked body</html>"),
        "gzip_body.warc.gz": (gzip_member(warc_record_bytes(gzipped_http)), b"<html>gz body</html>"),
        "truncated.warc": (truncated, None),
    }


# ---------------------------------------------------------------- servers


class _SilentHandler(BaseHTTPRequestHandler):
    def log_message(self, *args) -> None:
        pass


class RangeFileHandler(_SilentHandler):
    """Serves server.files with single-range support; behaviour set by server.mode."""

    def do_GET(self) -> None:
        server = self.server
        with server.lock:
            server.request_log.append((self.path, self.headers.get("Range")))
            throttle = server.throttle_first > 0
            if throttle:
                server.throttle_first -= 1
        if throttle:
            self.send_response(503)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        data = server.files.get(self.path)
        if data is None:
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        range_header = self.headers.get("Range")
        if server.mode == "ignore_range" or not range_header:
            self.send_response(200)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return
        if server.mode == "reject_range":
            self.send_response(416)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        start_s, _, end_s = range_header.removeprefix("bytes=").partition("-")
        start, end = int(start_s), int(end_s)
        if start >= len(data):
            self.send_response(416)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        body = data[start : end + 1]
        if server.mode == "short":
            body = body[: max(0, len(body) // 2)]
        self.send_response(206)
        self.send_header("Content-Range", f"bytes {start}-{end}/{len(data)}")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class IndexHandler(_SilentHandler):
    """CDX-style endpoint: JSON lines per url pattern, with page/showNumPages."""

    def do_GET(self) -> None:
        server = self.server
        parts = urlsplit(self.path)
        params = {k: v[0] for k, v in parse_qs(parts.query).items()}
        with server.lock:
            server.request_log.append((parts.path, params))
            throttle = server.throttle_first > 0
            if throttle:
                server.throttle_first -= 1
        if throttle:
            self.send_response(503)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        lines = server.index_data.get(params.get("url", ""), [])
        if not lines:
            payload = json.dumps({"error": "No Captures found"}).encode()
            self.send_response(404)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)
            return
        pages = max(1, math.ceil(len(lines) / server.page_size))
        if params.get("showNumPages") == "true":
            payload = json.dumps({"pages": pages, "pageSize": server.page_size}).encode()
        else:
            page = int(params.get("page", "0"))
            subset = lines[page * server.page_size : (page + 1) * server.page_size]
            payload = "\n".join(json.dumps(line) for line in subset).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


class LocalServer:
    def __init__(self, handler) -> None:
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self.httpd.lock = threading.Lock()
        self.httpd.request_log = []
        self.httpd.throttle_first = 0
        self.httpd.files = {}
        self.httpd.index_data = {}
        self.httpd.page_size = 1000
        self.httpd.mode = "normal"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    @property
    def request_log(self) -> list:
        return self.httpd.request_log

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def archive_server():
    server = LocalServer(RangeFileHandler)
    yield server
    server.stop()


@pytest.fixture
def index_server():
    server = LocalServer(IndexHandler)
    yield server
    server.stop()


# ---------------------------------------------------------------- fake sessions


class ExplodingSession:
    """Any request is a test failure: used to prove offline paths stay offline."""

    def get(self, *args, **kwargs):
        raise AssertionError(f"network request attempted in offline mode: {args}")


class CountingSession:
    """Wraps a real requests.Session, recording calls and peak concurrency."""

    def __init__(self, inner=None) -> None:
        import requests

        self.inner = inner or requests.Session()
        self.calls: list[str] = []
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0
        self.delay = 0.0

    def get(self, url, **kwargs):
        import time

        with self._lock:
            self.calls.append(url)
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            if self.delay:
                time.sleep(self.delay)
            return self.inner.get(url, **kwargs)
        finally:
            with self._lock:
                self._in_flight -= 1
