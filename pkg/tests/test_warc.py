import gzip

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    DATA_DIR,
    gzip_member,
    http_response_bytes,
    rechunk,
    warc_fixture_files,
    warc_record_bytes,
)
from crawlcontrast.warc import (
    Headers,
    MalformedHttpError,
    MalformedRecordError,
    dechunk,
    parse_http_response,
    read_record,
)

MINIMAL = b"WARC/1.0\r\nWARC-Type: response\r\nContent-Length: 5\r\n\r\nhello"


class TestReadRecord:
    def test_minimal_synthetic_record(self):
        record = read_record(MINIMAL)
        assert record.record_type == "response"
        assert record.content == b"hello"

    def test_gzip_member_is_transparent(self):
        plain = read_record(MINIMAL)
        zipped = read_record(gzip_member(MINIMAL))
        assert zipped.content == plain.content
        assert zipped.warc_headers == plain.warc_headers
        assert zipped.record_type == plain.record_type

    def test_truncated_content_is_malformed(self):
        with pytest.raises(MalformedRecordError):
            read_record(b"WARC/1.0\r\nContent-Length: 99\r\n\r\nshort")

    def test_bad_version_line(self):
        with pytest.raises(MalformedRecordError):
            read_record(b"NOTWARC/1.0\r\nContent-Length: 0\r\n\r\n")

    def test_warc_1_1_accepted(self):
        record = read_record(b"WARC/1.1\r\nContent-Length: 2\r\n\r\nhi")
        assert record.content == b"hi"

    def test_missing_content_length(self):
        with pytest.raises(MalformedRecordError):
            read_record(b"WARC/1.0\r\nWARC-Type: response\r\n\r\nbody")

    def test_corrupt_gzip(self):
        with pytest.raises(MalformedRecordError):
            read_record(b"\x1f\x8b\x08\x00garbage-that-is-not-gzip")

    def test_trailing_bytes_beyond_content_ignored(self):
        record = read_record(MINIMAL + b"\r\n\r\nJUNK AFTER RECORD")
        assert record.content == b"hello"

    def test_header_names_case_insensitive(self):
        record = read_record(b"WARC/1.0\r\ncontent-length: 2\r\nwarc-type: response\r\n\r\nok")
        assert record.record_type == "response"
        assert record.warc_headers.get("CONTENT-LENGTH") == "2"

    def test_target_uri_captured(self):
        payload = http_response_bytes(body=b"x")
        raw = warc_record_bytes(payload, target_uri="https://example.org/")
        assert read_record(raw).target_uri == "https://example.org/"

    def test_decompression_bomb_capped(self):
        bomb = gzip_member(b"\x00" * 100_000)
        with pytest.raises(MalformedRecordError):
            read_record(bomb, max_decompressed=10_000)

    def test_round_trip_bit_exact(self):
        payload = http_response_bytes(
            headers=[("Content-Type", "text/html; charset=utf-8"), ("X-Thing", "v")],
            body=b"<html>round trip \xe2\x9c\x93</html>",
        )
        raw = warc_record_bytes(payload, target_uri="https://example.com/", extra_headers=[("WARC-Record-ID", "<urn:uuid:1>")])
        record = read_record(raw)
        assert record.content == payload
        expected_headers = Headers(
            [
                ("WARC-Type", "response"),
                ("WARC-Target-URI", "https://example.com/"),
                ("WARC-Date", "2026-02-15T00:00:00Z"),
                ("Content-Type", "application/http; msgtype=response"),
                ("Content-Length", str(len(payload))),
                ("WARC-Record-ID", "<urn:uuid:1>"),
            ]
        )
        assert record.warc_headers == expected_headers

    def test_content_length_header_equals_content_size(self):
        record = read_record(gzip_member(warc_record_bytes(b"12345678")))
        assert int(record.warc_headers.get("Content-Length")) == len(record.content)


class TestCheckedInFixtures:
    @pytest.mark.parametrize("name", sorted(warc_fixture_files()))
    def test_fixture_files_match_definitions(self, name):
        data, _ = warc_fixture_files()[name]
        assert (DATA_DIR / "warc" / name).read_bytes() == data

    @pytest.mark.parametrize("name", sorted(warc_fixture_files()))
    def test_fixture_files_parse_to_expected_bodies(self, name):
        raw = (DATA_DIR / "warc" / name).read_bytes()
        _, expected_body = warc_fixture_files()[name]
        if expected_body is None:
            with pytest.raises(MalformedRecordError):
                read_record(raw)
            return
        record = read_record(raw)
        response = parse_http_response(record.content)
        assert response.status_code == 200
        assert response.body == expected_body


class TestParseHttpResponse:
    def test_basic_with_charset(self):
        resp = parse_http_response(
            b"HTTP/1.1 200 OK\r\nContent-Type: text/html; charset=utf-8\r\n\r\n<html>"
        )
        assert resp.status_code == 200
        assert resp.declared_charset == "utf-8"
        assert resp.body == b"<html>"

    def test_chunked_body(self):
        # RFC 7230 chunk grammar applied by hand: 5-byte chunk then terminator
        resp = parse_http_response(
            b"HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\n5\r\nhello\r\n0\r\n\r\n"
        )
        assert resp.body == b"hello"

    def test_chunk_extensions_tolerated(self):
        resp = parse_http_response(
            b"HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\n5;ext=1\r\nhello\r\n0\r\n\r\n"
        )
        assert resp.body == b"hello"

    def test_redirect_status_reported_not_rejected(self):
        resp = parse_http_response(b"HTTP/1.1 301 Moved\r\nLocation: /new\r\n\r\n")
        assert resp.status_code == 301

    def test_gzip_content_encoding(self):
        body = gzip.compress(b"<html>gz</html>", mtime=0)
        resp = parse_http_response(b"HTTP/1.1 200 OK\r\nContent-Encoding: gzip\r\n\r\n" + body)
        assert resp.body == b"<html>gz</html>"

    def test_deflate_content_encoding_both_flavours(self):
        import zlib

        wrapped = zlib.compress(b"wrapped")
        compressor = zlib.compressobj(wbits=-15)
        raw = compressor.compress(b"rawdata") + compressor.flush()
        for payload, expected in ((wrapped, b"wrapped"), (raw, b"rawdata")):
            resp = parse_http_response(
                b"HTTP/1.1 200 OK\r\nContent-Encoding: deflate\r\n\r\n" + payload
            )
            assert resp.body == expected

    def test_chunked_then_gzip(self):
        body = rechunk(gzip.compress(b"both", mtime=0), [4])
        resp = parse_http_response(
            b"HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\nContent-Encoding: gzip\r\n\r\n"
            + body
        )
        assert resp.body == b"both"

    def test_no_status_line_is_malformed(self):
        with pytest.raises(MalformedHttpError):
            parse_http_response(b"not an http message\r\n\r\nbody")

    def test_status_out_of_range(self):
        with pytest.raises(MalformedHttpError):
            parse_http_response(b"HTTP/1.1 999 Weird\r\n\r\n")

    def test_unsupported_content_encoding_is_malformed(self):
        with pytest.raises(MalformedHttpError):
            parse_http_response(b"HTTP/1.1 200 OK\r\nContent-Encoding: br\r\n\r\nxxxx")

    def test_truncated_chunk_is_malformed(self):
        with pytest.raises(MalformedHttpError):
            parse_http_response(
                b"HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\nff\r\nshort"
            )

    def test_lf_only_header_separator_tolerated(self):
        resp = parse_http_response(b"HTTP/1.1 200 OK\nContent-Type: text/html\n\nbody")
        assert resp.status_code == 200
        assert resp.body == b"body"

    def test_header_lookup_case_insensitive(self):
        resp = parse_http_response(b"HTTP/1.1 200 OK\r\ncontent-TYPE: text/plain\r\n\r\n")
        assert resp.http_headers.get("Content-Type") == "text/plain"


class TestDechunkProperties:
    @settings(max_examples=200, deadline=None)
    @given(
        st.binary(max_size=2048),
        st.lists(st.integers(min_value=1, max_value=600), min_size=1, max_size=8),
    )
    def test_dechunk_inverts_any_chunking(self, body, sizes):
        assert dechunk(rechunk(body, sizes)) == body

    @settings(max_examples=100, deadline=None)
    @given(st.binary(max_size=512))
    def test_single_chunk(self, body):
        encoded = f"{len(body):x}".encode() + b"\r\n" + body + b"\r\n0\r\n\r\n"
        if body:
            assert dechunk(encoded) == body
        else:
            assert dechunk(b"0\r\n\r\n") == b""
