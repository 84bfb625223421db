"""Foreground/background pairing construction.

Per declaration block: an explicit pairing when both text and background
colours are declared; text-only declarations are paired with an assumed
white background, background-only ones with assumed black text. Alpha is
composited away first, then identical RGB pairs are deduplicated.
"""

from __future__ import annotations

from dataclasses import dataclass

from .colors import BLACK, WHITE, RgbaColor, round_half_up
from .cssextract import (
    PROP_BACKGROUND_COLOR,
    PROP_BACKGROUND_SHORTHAND,
    PROP_COLOR,
    StyleDeclaration,
)

PROVENANCE_EXPLICIT = "explicit"
PROVENANCE_ASSUMED_WHITE_BG = "assumed-white-bg"
PROVENANCE_ASSUMED_BLACK_FG = "assumed-black-fg"


@dataclass(frozen=True)
class ColorPairing:
    fg: RgbaColor
    bg: RgbaColor
    provenance: str
    first_rule_id: str


def resolve_alpha(c: RgbaColor, under: RgbaColor) -> RgbaColor:
    """Source-over composite c onto an opaque backdrop; result is opaque."""
    if under.alpha != 1.0:
        raise ValueError("backdrop must be opaque")
    if c.alpha >= 1.0:
        return RgbaColor(c.r, c.g, c.b)
    a = c.alpha
    return RgbaColor(
        round_half_up(a * c.r + (1.0 - a) * under.r),
        round_half_up(a * c.g + (1.0 - a) * under.g),
        round_half_up(a * c.b + (1.0 - a) * under.b),
    )


def _group_by_rule(decls: list[StyleDeclaration]) -> dict[str, list[StyleDeclaration]]:
    groups: dict[str, list[StyleDeclaration]] = {}
    for decl in decls:
        groups.setdefault(decl.rule_id, []).append(decl)
    return groups


def _effective_colors(group: list[StyleDeclaration]) -> tuple[RgbaColor | None, RgbaColor | None]:
    """(text colour, background colour) for one rule group.

    Keyword and unparseable values count as absent; the last parseable
    declaration wins per property; background-color beats the shorthand.
    """
    fg = bg_longhand = bg_shorthand = None
    for decl in group:
        if not isinstance(decl.parsed, RgbaColor):
            continue
        if decl.property == PROP_COLOR:
            fg = decl.parsed
        elif decl.property == PROP_BACKGROUND_COLOR:
            bg_longhand = decl.parsed
        elif decl.property == PROP_BACKGROUND_SHORTHAND:
            bg_shorthand = decl.parsed
    return fg, bg_longhand if bg_longhand is not None else bg_shorthand


def build_pairings(decls: list[StyleDeclaration]) -> list[ColorPairing]:
    """Deduplicated colour pairings from a document's declarations."""
    pairings: list[ColorPairing] = []
    seen: set[tuple[tuple[int, int, int], tuple[int, int, int]]] = set()
    for rule_id, group in _group_by_rule(decls).items():
        fg, bg = _effective_colors(group)
        if fg is None and bg is None:
            continue
        if bg is not None:
            bg = resolve_alpha(bg, WHITE)
        if fg is not None and bg is not None:
            fg = resolve_alpha(fg, bg)
            provenance = PROVENANCE_EXPLICIT
        elif fg is not None:
            bg = WHITE
            fg = resolve_alpha(fg, bg)
            provenance = PROVENANCE_ASSUMED_WHITE_BG
        else:
            fg = BLACK
            provenance = PROVENANCE_ASSUMED_BLACK_FG
        key = (fg.rgb, bg.rgb)
        if key in seen:
            continue
        seen.add(key)
        pairings.append(ColorPairing(fg=fg, bg=bg, provenance=provenance, first_rule_id=rule_id))
    return pairings
