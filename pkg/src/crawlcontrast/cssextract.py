"""Colour declaration extraction from archived HTML.

Pulls `color`, `background-color`, and `background` shorthand declarations
out of <style> blocks and style="..." attributes with a tolerant scanner:
malformed markup or CSS never aborts extraction, it just contributes
nothing. No DOM is built and no selector matching happens; selectors are
only kept as provenance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html.parser import HTMLParser

from .colors import NonColorKeyword, RgbaColor, parse_color

ORIGIN_EMBEDDED = "embedded"
ORIGIN_INLINE = "inline"

PROP_COLOR = "color"
PROP_BACKGROUND_COLOR = "background-color"
PROP_BACKGROUND_SHORTHAND = "background-shorthand"

_WATCHED_PROPERTIES = {
    "color": PROP_COLOR,
    "background-color": PROP_BACKGROUND_COLOR,
    "background": PROP_BACKGROUND_SHORTHAND,
}

_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_OPEN_COMMENT_RE = re.compile(r"/\*.*\Z", re.DOTALL)
_IMPORTANT_RE = re.compile(r"!\s*important\s*\Z", re.IGNORECASE)
_CHARSET_META_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([a-zA-Z0-9_\-:.]+)""", re.IGNORECASE
)


@dataclass(frozen=True)
class StyleDeclaration:
    """One extracted colour-bearing declaration with its source context."""

    property: str  # PROP_COLOR | PROP_BACKGROUND_COLOR | PROP_BACKGROUND_SHORTHAND
    raw_value: str
    parsed: RgbaColor | NonColorKeyword | None
    origin: str  # ORIGIN_EMBEDDED | ORIGIN_INLINE
    rule_id: str


def decode_html(data: bytes, charset_hint: str | None = None) -> str:
    """Decode an HTML body: header charset, then <meta> sniffing, then UTF-8.

    Invalid byte sequences are replaced rather than raised.
    """
    if data.startswith(b"\xef\xbb\xbf"):
        return data.decode("utf-8-sig", errors="replace")
    candidates = [charset_hint]
    m = _CHARSET_META_RE.search(data[:1024])
    if m:
        candidates.append(m.group(1).decode("ascii", errors="replace"))
    for charset in candidates:
        if not charset:
            continue
        try:
            return data.decode(charset.strip().strip('"').strip("'"), errors="replace")
        except (LookupError, ValueError):
            continue
    return data.decode("utf-8", errors="replace")


class _StyleCollector(HTMLParser):
    """Collects <style> contents and style attributes in document order.

    Script bodies, HTML comments, and CDATA sections never contribute;
    <noscript> subtrees are skipped only when configured to.
    """

    def __init__(self, skip_noscript: bool = False) -> None:
        super().__init__(convert_charrefs=True)
        self.events: list[tuple[str, str, str]] = []  # (kind, tag-or-"", payload)
        self._skip_noscript = skip_noscript
        self._noscript_depth = 0
        self._style_depth = 0
        self._style_buf: list[str] = []

    def _flush_style(self) -> None:
        if self._style_depth:
            self.events.append(("style", "", "".join(self._style_buf)))
            self._style_buf = []
            self._style_depth = 0

    def _record_attrs(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        for name, value in attrs:
            if name == "style" and value:
                self.events.append(("attr", tag, value))
                return

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag == "noscript":
            self._noscript_depth += 1
        if self._skip_noscript and self._noscript_depth:
            return
        if tag == "style":
            self._flush_style()  # unterminated previous block
            self._style_depth = 1
            return
        self._record_attrs(tag, attrs)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if self._skip_noscript and self._noscript_depth:
            return
        if tag != "style":
            self._record_attrs(tag, attrs)

    def handle_endtag(self, tag: str) -> None:
        if tag == "style":
            self._flush_style()
        elif tag == "noscript" and self._noscript_depth:
            self._noscript_depth -= 1

    def handle_data(self, data: str) -> None:
        if self._style_depth and not (self._skip_noscript and self._noscript_depth):
            self._style_buf.append(data)

    def close(self) -> None:
        super().close()
        self._flush_style()


def _strip_comments(css: str) -> str:
    css = _COMMENT_RE.sub(" ", css)
    # an unterminated comment swallows the tail (tolerant-tail rule)
    css = _OPEN_COMMENT_RE.sub(" ", css)
    # legacy SGML comment delimiters wrapping old stylesheets
    return css.replace("<!--", " ").replace("-->", " ")


def _split_declarations(block: str) -> list[str]:
    """Split a declaration list at top-level semicolons only."""
    parts: list[str] = []
    buf: list[str] = []
    depth = 0
    quote: str | None = None
    for ch in block:
        if quote:
            buf.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
            buf.append(ch)
        elif ch in "([{":
            depth += 1
            buf.append(ch)
        elif ch in ")]}":
            depth = max(0, depth - 1)
            buf.append(ch)
        elif ch == ";" and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def _declarations_from_block(body: str) -> list[tuple[str, str]]:
    found: list[tuple[str, str]] = []
    for chunk in _split_declarations(body):
        name, sep, value = chunk.partition(":")
        if not sep:
            continue
        prop = _WATCHED_PROPERTIES.get(name.strip().lower())
        if prop is None:
            continue
        value = _IMPORTANT_RE.sub("", value.strip()).strip()
        if value:
            found.append((prop, value))
    return found


def _shorten(selector: str, limit: int = 60) -> str:
    selector = " ".join(selector.split())
    return selector if len(selector) <= limit else selector[: limit - 3] + "..."


def parse_style_block(css: str) -> list[tuple[str, str, str]]:
    """Extract (rule_id, property, raw_value) triples from one stylesheet text.

    Comments are stripped, block-bodied at-rules (@media, @supports) are
    recursed into, statement at-rules are skipped, and an unbalanced-brace
    tail is dropped while earlier rules survive.
    """
    out: list[tuple[str, str, str]] = []
    counter = [0]
    _scan_rules(_strip_comments(css), out, counter)
    return out


def _scan_rules(css: str, out: list[tuple[str, str, str]], counter: list[int]) -> None:
    i = 0
    n = len(css)
    while i < n:
        brace = css.find("{", i)
        if brace == -1:
            return
        prelude = css[i:brace]
        # drop any ;-terminated statement at-rules sitting before the selector
        prelude = prelude.rsplit(";", 1)[-1].strip()
        j = brace + 1
        depth = 1
        while j < n and depth:
            ch = css[j]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            j += 1
        if depth:
            return  # unbalanced tail dropped
        body = css[brace + 1 : j - 1]
        if prelude.startswith("@"):
            _scan_rules(body, out, counter)
        else:
            decls = _declarations_from_block(body)
            if decls:
                rule_id = f"rule[{counter[0]}] {_shorten(prelude)}"
                for prop, value in decls:
                    out.append((rule_id, prop, value))
            counter[0] += 1
        i = j


def _top_level_tokens(value: str) -> list[str]:
    """Split a property value at top-level whitespace and commas."""
    tokens: list[str] = []
    buf: list[str] = []
    depth = 0
    quote: str | None = None
    for ch in value:
        if quote:
            buf.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
            buf.append(ch)
        elif ch == "(":
            depth += 1
            buf.append(ch)
        elif ch == ")":
            depth = max(0, depth - 1)
            buf.append(ch)
        elif depth == 0 and (ch.isspace() or ch == ","):
            if buf:
                tokens.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))
    return tokens


def extract_background_shorthand_color(value: str) -> RgbaColor | NonColorKeyword | None:
    """First colour among the top-level tokens of a background shorthand.

    url(...) contents are never scanned, and neither are the interiors of
    gradients or other nested functions.
    """
    for token in _top_level_tokens(value):
        if token.lower().startswith("url("):
            continue
        parsed = parse_color(token)
        if parsed is not None:
            return parsed
    return None


def _parse_value(prop: str, raw_value: str) -> RgbaColor | NonColorKeyword | None:
    if prop == PROP_BACKGROUND_SHORTHAND:
        return extract_background_shorthand_color(raw_value)
    return parse_color(raw_value)


def extract_declarations(
    html: bytes,
    charset_hint: str | None = None,
    skip_noscript: bool = False,
) -> list[StyleDeclaration]:
    """All colour-bearing declarations of a document, in document order.

    Declarations whose value does not parse are retained (parsed=None) so
    callers can count them; pairing skips them.
    """
    text = decode_html(html, charset_hint)
    collector = _StyleCollector(skip_noscript=skip_noscript)
    try:
        collector.feed(text)
        collector.close()
    except Exception:
        pass  # keep whatever was collected from the parseable prefix

    decls: list[StyleDeclaration] = []
    style_index = 0
    inline_index = 0
    for kind, tag, payload in collector.events:
        if kind == "style":
            for rule_id, prop, value in parse_style_block(payload):
                decls.append(
                    StyleDeclaration(
                        property=prop,
                        raw_value=value,
                        parsed=_parse_value(prop, value),
                        origin=ORIGIN_EMBEDDED,
                        rule_id=f"style[{style_index}].{rule_id}",
                    )
                )
            style_index += 1
        else:
            rule_id = f"inline[{inline_index}] <{tag}>"
            for prop, value in _declarations_from_block(_strip_comments(payload)):
                decls.append(
                    StyleDeclaration(
                        property=prop,
                        raw_value=value,
                        parsed=_parse_value(prop, value),
                        origin=ORIGIN_INLINE,
                        rule_id=rule_id,
                    )
                )
            inline_index += 1
    return decls
