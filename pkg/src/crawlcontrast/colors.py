"""CSS colour value parsing.

Turns the colour syntaxes found in real-world stylesheets (hex, rgb()/rgba(),
hsl()/hsla(), and the 148 CSS named colours) into a canonical sRGB value.
Keywords that name no concrete colour (transparent, inherit, ...) are
recognised and reported separately so callers can exclude them.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class RgbaColor:
    """A parsed sRGB colour with 8-bit channels and an optional alpha."""

    r: int
    g: int
    b: int
    alpha: float = 1.0

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v!r} outside 0-255")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha!r} outside 0.0-1.0")

    @property
    def rgb(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)

    def css_hex(self) -> str:
        """Lowercase hex form: #rrggbb, or #rrggbbaa when not fully opaque."""
        base = f"#{self.r:02x}{self.g:02x}{self.b:02x}"
        if self.alpha >= 1.0:
            return base
        return base + f"{round_half_up(self.alpha * 255):02x}"


class NonColorKeyword(enum.Enum):
    """CSS-wide or colour keywords that carry no resolvable colour value."""

    TRANSPARENT = "transparent"
    INHERIT = "inherit"
    CURRENT_COLOR = "currentcolor"
    INITIAL = "initial"
    UNSET = "unset"
    REVERT = "revert"


BLACK = RgbaColor(0, 0, 0)
WHITE = RgbaColor(255, 255, 255)

_KEYWORDS = {kw.value: kw for kw in NonColorKeyword}

_HEX_RE = re.compile(r"#([0-9a-fA-F]+)\Z")
_FUNC_RE = re.compile(r"(rgba?|hsla?)\(\s*(.*?)\s*\)\Z", re.IGNORECASE | re.DOTALL)


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties away from zero (0.5 -> 1)."""
    return math.floor(x + 0.5)


def _load_named_colors() -> dict[str, RgbaColor]:
    table = {}
    text = resources.files(__package__).joinpath("data/named_colors.txt").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("# "):
            continue
        name, hexval = line.split()
        parsed = _parse_hex(hexval)
        if parsed is None:
            raise ValueError(f"bad named-colour table entry: {line!r}")
        table[name] = parsed
    return table


def _parse_hex(text: str) -> RgbaColor | None:
    m = _HEX_RE.match(text)
    if not m:
        return None
    digits = m.group(1)
    if len(digits) in (3, 4):
        digits = "".join(d * 2 for d in digits)
    if len(digits) == 6:
        digits += "ff"
    if len(digits) != 8:
        return None
    r, g, b, a = (int(digits[i : i + 2], 16) for i in (0, 2, 4, 6))
    return RgbaColor(r, g, b, a / 255.0)


NAMED_COLORS: dict[str, RgbaColor] = _load_named_colors()


def _parse_component(token: str) -> tuple[float, bool] | None:
    """Parse one numeric component; returns (value, is_percentage)."""
    token = token.strip()
    is_pct = token.endswith("%")
    if is_pct:
        token = token[:-1].strip()
    try:
        value = float(token)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value, is_pct


def _split_args(args: str) -> tuple[list[str], str | None]:
    """Split a colour-function argument list into channels and optional alpha.

    Handles both the legacy comma syntax ("255, 0, 0, 0.5") and the modern
    space syntax ("255 0 0 / 0.5").
    """
    if "," in args:
        parts = [p.strip() for p in args.split(",")]
        if len(parts) == 4:
            return parts[:3], parts[3]
        return parts, None
    if "/" in args:
        head, _, alpha = args.partition("/")
        return head.split(), alpha.strip()
    return args.split(), None


def _channel_8bit(token: str) -> int | None:
    parsed = _parse_component(token)
    if parsed is None:
        return None
    value, is_pct = parsed
    if is_pct:
        value = value / 100.0 * 255.0
    return min(255, max(0, round_half_up(value)))


def _alpha_value(token: str | None) -> float | None:
    if token is None or token == "":
        return 1.0
    parsed = _parse_component(token)
    if parsed is None:
        return None
    value, is_pct = parsed
    if is_pct:
        value /= 100.0
    return min(1.0, max(0.0, value))


def _hue_degrees(token: str) -> float | None:
    token = token.strip()
    if token.lower().endswith("deg"):
        token = token[:-3].strip()
    try:
        value = float(token)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value


def _fraction(token: str) -> float | None:
    """Saturation/lightness component: percentage, or bare number on the 0-100 scale."""
    parsed = _parse_component(token)
    if parsed is None:
        return None
    value, _ = parsed
    return min(1.0, max(0.0, value / 100.0))


def hsl_to_rgb(h: float, s: float, l: float) -> tuple[int, int, int]:
    """Convert HSL (hue in degrees, s/l as 0-1 fractions) to 8-bit sRGB.

    Hue is normalised mod 360; channels are rounded half-up.
    """
    h = h % 360.0
    c = (1.0 - abs(2.0 * l - 1.0)) * s
    x = c * (1.0 - abs((h / 60.0) % 2.0 - 1.0))
    m = l - c / 2.0
    if h < 60:
        rp, gp, bp = c, x, 0.0
    elif h < 120:
        rp, gp, bp = x, c, 0.0
    elif h < 180:
        rp, gp, bp = 0.0, c, x
    elif h < 240:
        rp, gp, bp = 0.0, x, c
    elif h < 300:
        rp, gp, bp = x, 0.0, c
    else:
        rp, gp, bp = c, 0.0, x
    return (
        round_half_up((rp + m) * 255.0),
        round_half_up((gp + m) * 255.0),
        round_half_up((bp + m) * 255.0),
    )


def _parse_rgb_func(args: str) -> RgbaColor | None:
    channels, alpha_tok = _split_args(args)
    if len(channels) != 3:
        return None
    values = [_channel_8bit(tok) for tok in channels]
    alpha = _alpha_value(alpha_tok)
    if any(v is None for v in values) or alpha is None:
        return None
    r, g, b = values  # type: ignore[misc]
    return RgbaColor(r, g, b, alpha)


def _parse_hsl_func(args: str) -> RgbaColor | None:
    channels, alpha_tok = _split_args(args)
    if len(channels) != 3:
        return None
    h = _hue_degrees(channels[0])
    s = _fraction(channels[1])
    l = _fraction(channels[2])
    alpha = _alpha_value(alpha_tok)
    if h is None or s is None or l is None or alpha is None:
        return None
    r, g, b = hsl_to_rgb(h, s, l)
    return RgbaColor(r, g, b, alpha)


def parse_color(text: str) -> RgbaColor | NonColorKeyword | None:
    """Parse a CSS colour token or function expression.

    Returns an RgbaColor for any supported colour syntax, a NonColorKeyword
    for keywords that name no concrete colour, and None for anything else.
    Never raises, whatever the input.
    """
    if not isinstance(text, str):
        return None
    text = text.strip()
    if not text:
        return None
    lowered = text.lower()
    if lowered in _KEYWORDS:
        return _KEYWORDS[lowered]
    named = NAMED_COLORS.get(lowered)
    if named is not None:
        return named
    if text.startswith("#"):
        return _parse_hex(text)
    m = _FUNC_RE.match(text)
    if not m:
        return None
    func = m.group(1).lower()
    args = m.group(2)
    try:
        if func in ("rgb", "rgba"):
            return _parse_rgb_func(args)
        return _parse_hsl_func(args)
    except (ValueError, OverflowError):
        return None
