"""WCAG 2.1 contrast arithmetic.

Relative luminance is the weighted sum 0.2126*R + 0.7152*G + 0.0722*B over
linearised sRGB channels; the contrast ratio between two colours is
(L_lighter + 0.05) / (L_darker + 0.05), ranging 1.0 to 21.0. Level AA asks
at least 4.5:1 for normal text and 3.0:1 for large text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .colors import RgbaColor

NORMAL_TEXT_THRESHOLD = 4.5
LARGE_TEXT_THRESHOLD = 3.0

# WCAG 2.1 uses 0.03928 as the linearisation breakpoint (the sRGB standard
# says 0.04045); both agree on every 8-bit input to well below reporting
# precision, and the WCAG figure is what conformance is defined against.
_LINEAR_THRESHOLD = 0.03928


@dataclass(frozen=True)
class ContrastResult:
    ratio: float
    passes_normal: bool
    passes_large: bool


def linearize_channel(c8: int) -> float:
    """Linear-light value of an 8-bit sRGB channel, in 0.0-1.0."""
    if not 0 <= c8 <= 255:
        raise ValueError(f"channel {c8!r} outside 0-255")
    c = c8 / 255.0
    if c <= _LINEAR_THRESHOLD:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(color: RgbaColor) -> float:
    """Relative luminance in 0.0 (black) to 1.0 (white). Alpha is ignored."""
    return (
        0.2126 * linearize_channel(color.r)
        + 0.7152 * linearize_channel(color.g)
        + 0.0722 * linearize_channel(color.b)
    )


def contrast_ratio(a: RgbaColor, b: RgbaColor) -> float:
    """Contrast ratio between two colours; symmetric, in [1.0, 21.0]."""
    la = relative_luminance(a)
    lb = relative_luminance(b)
    lighter = max(la, lb)
    darker = min(la, lb)
    return (lighter + 0.05) / (darker + 0.05)


def assess(a: RgbaColor, b: RgbaColor) -> ContrastResult:
    """Evaluate a pairing against the AA thresholds on the unrounded ratio."""
    ratio = contrast_ratio(a, b)
    return ContrastResult(
        ratio=ratio,
        passes_normal=ratio >= NORMAL_TEXT_THRESHOLD,
        passes_large=ratio >= LARGE_TEXT_THRESHOLD,
    )
