"""WARC record and archived HTTP response parsing.

Handles single records as returned by archive byte-range fetches: one gzip
member (or plain text in tests) holding one WARC record, whose payload is
an HTTP/1.x message. Chunked transfer coding and gzip/deflate content
encodings are undone; decompressed sizes are capped so hostile records
cannot exhaust memory.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field

DEFAULT_MAX_DECOMPRESSED = 16 * 1024 * 1024

_STATUS_LINE_RE = re.compile(rb"HTTP/\d\.\d[ \t]+(\d{3})(?:[ \t]|$)")
_CHARSET_PARAM_RE = re.compile(r"charset\s*=\s*\"?([^\s;\"]+)", re.IGNORECASE)


class MalformedRecordError(ValueError):
    """The byte range does not hold a well-formed WARC record."""


class MalformedHttpError(ValueError):
    """The record payload is not a parseable HTTP response."""


class Headers:
    """Ordered header collection with case-insensitive lookup."""

    def __init__(self, pairs: list[tuple[str, str]] | None = None) -> None:
        self._pairs: list[tuple[str, str]] = list(pairs or [])
        self._index = {name.lower(): value for name, value in self._pairs}

    def get(self, name: str, default: str | None = None) -> str | None:
        return self._index.get(name.lower(), default)

    def __contains__(self, name: str) -> bool:
        return name.lower() in self._index

    def items(self) -> list[tuple[str, str]]:
        return list(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Headers):
            return self._pairs == other._pairs
        return NotImplemented

    def __repr__(self) -> str:
        return f"Headers({self._pairs!r})"


@dataclass
class WarcRecord:
    warc_headers: Headers
    record_type: str
    target_uri: str
    content: bytes


@dataclass
class ArchivedResponse:
    status_code: int
    http_headers: Headers
    body: bytes
    declared_charset: str | None = field(default=None)


def _gunzip_capped(data: bytes, cap: int, error: type[ValueError]) -> bytes:
    try:
        d = zlib.decompressobj(wbits=31)
        out = d.decompress(data, cap + 1)
    except zlib.error as exc:
        raise error(f"bad gzip data: {exc}") from exc
    if len(out) > cap:
        raise error(f"decompressed size exceeds cap of {cap} bytes")
    return out


def _inflate_capped(data: bytes, cap: int) -> bytes:
    # deflate in the wild is sometimes raw (no zlib wrapper); try both
    for wbits in (15, -15):
        try:
            d = zlib.decompressobj(wbits=wbits)
            out = d.decompress(data, cap + 1)
        except zlib.error:
            continue
        if len(out) > cap:
            raise MalformedHttpError(f"decompressed size exceeds cap of {cap} bytes")
        return out
    raise MalformedHttpError("bad deflate data")


def _parse_header_lines(lines: list[bytes]) -> Headers:
    pairs: list[tuple[str, str]] = []
    for line in lines:
        if line[:1] in (b" ", b"\t") and pairs:
            # folded continuation line
            name, value = pairs[-1]
            pairs[-1] = (name, value + " " + line.strip().decode("utf-8", "replace"))
            continue
        name, sep, value = line.partition(b":")
        if not sep:
            continue
        pairs.append(
            (name.strip().decode("utf-8", "replace"), value.strip().decode("utf-8", "replace"))
        )
    return Headers(pairs)


def read_record(raw: bytes, max_decompressed: int = DEFAULT_MAX_DECOMPRESSED) -> WarcRecord:
    """Parse one WARC record from a byte-range fetch.

    Accepts a single gzip member or uncompressed record text. Raises
    MalformedRecordError on anything that is not a complete record; the
    caller should skip the capture and record a coverage failure.
    """
    if raw[:2] == b"\x1f\x8b":
        raw = _gunzip_capped(raw, max_decompressed, MalformedRecordError)
    head, sep, rest = raw.partition(b"\r\n\r\n")
    if not sep:
        raise MalformedRecordError("missing header terminator")
    lines = head.split(b"\r\n")
    version = lines[0]
    if not version.startswith(b"WARC/"):
        raise MalformedRecordError(f"bad version line: {version[:40]!r}")
    headers = _parse_header_lines(lines[1:])
    length_text = headers.get("Content-Length")
    if length_text is None:
        raise MalformedRecordError("missing Content-Length")
    try:
        length = int(length_text)
    except ValueError as exc:
        raise MalformedRecordError(f"bad Content-Length: {length_text!r}") from exc
    if length < 0:
        raise MalformedRecordError(f"bad Content-Length: {length_text!r}")
    if len(rest) < length:
        raise MalformedRecordError(f"truncated content: {len(rest)} of {length} bytes")
    return WarcRecord(
        warc_headers=headers,
        record_type=headers.get("WARC-Type", "") or "",
        target_uri=headers.get("WARC-Target-URI", "") or "",
        content=rest[:length],
    )


def dechunk(body: bytes) -> bytes:
    """Undo HTTP/1.1 chunked transfer coding."""
    out = bytearray()
    i = 0
    n = len(body)
    while True:
        eol = body.find(b"\r\n", i)
        if eol == -1:
            raise MalformedHttpError("truncated chunk size line")
        size_token = body[i:eol].split(b";", 1)[0].strip()
        try:
            size = int(size_token, 16)
        except ValueError as exc:
            raise MalformedHttpError(f"bad chunk size: {size_token[:20]!r}") from exc
        i = eol + 2
        if size == 0:
            return bytes(out)  # trailers, if any, are ignored
        if i + size > n:
            raise MalformedHttpError("truncated chunk data")
        out += body[i : i + size]
        i += size
        if body[i : i + 2] != b"\r\n":
            raise MalformedHttpError("missing chunk terminator")
        i += 2


def _decode_body(body: bytes, headers: Headers, cap: int) -> bytes:
    te = (headers.get("Transfer-Encoding") or "").lower()
    if "chunked" in te:
        body = dechunk(body)
    ce = (headers.get("Content-Encoding") or "").strip().lower()
    if ce in ("", "identity", "none"):
        return body
    if ce in ("gzip", "x-gzip"):
        return _gunzip_capped(body, cap, MalformedHttpError)
    if ce == "deflate":
        return _inflate_capped(body, cap)
    raise MalformedHttpError(f"unsupported content encoding: {ce!r}")


def parse_http_response(
    content: bytes, max_decompressed: int = DEFAULT_MAX_DECOMPRESSED
) -> ArchivedResponse:
    """Parse the HTTP/1.x message stored in a WARC response record.

    Raises MalformedHttpError when no usable response is present; the
    caller should skip the capture.
    """
    i_crlf = content.find(b"\r\n\r\n")
    i_lf = content.find(b"\n\n")
    if i_crlf == -1 and i_lf == -1:
        raise MalformedHttpError("missing header terminator")
    if i_lf == -1 or (i_crlf != -1 and i_crlf <= i_lf):
        head, body = content[:i_crlf], content[i_crlf + 4 :]
    else:
        head, body = content[:i_lf], content[i_lf + 2 :]
    lines = head.replace(b"\r\n", b"\n").split(b"\n")
    m = _STATUS_LINE_RE.match(lines[0] + b" ")
    if not m:
        raise MalformedHttpError(f"bad status line: {lines[0][:60]!r}")
    status = int(m.group(1))
    if not 100 <= status <= 599:
        raise MalformedHttpError(f"status code out of range: {status}")
    headers = _parse_header_lines(lines[1:])
    body = _decode_body(body, headers, max_decompressed)
    charset = None
    content_type = headers.get("Content-Type")
    if content_type:
        cm = _CHARSET_PARAM_RE.search(content_type)
        if cm:
            charset = cm.group(1).strip("'\"")
    return ArchivedResponse(
        status_code=status,
        http_headers=headers,
        body=body,
        declared_charset=charset,
    )
