"""Font-aware lexemization of presentation MathML formulas.

Formulas become flat lexeme sequences. Identifier glyphs carry a font
prefix (italic_x, blackboard_N, bold_italic_v), operators become spelled
names without a prefix (plus, equals, element_of), and digit literals pass
through bare. Two-dimensional layout is linearized with paired structure
markers:

    x_i        ->  italic_x POSTSUBSCRIPT_start italic_i POSTSUBSCRIPT_end
    x^2        ->  italic_x POSTSUPERSCRIPT_start 2 POSTSUPERSCRIPT_end
    a/b        ->  FRACTION_start italic_a italic_b FRACTION_end
    sqrt(x)    ->  ROOT_start italic_x ROOT_end

Structures without a marker pair (tables, under/over decorations) emit
their children in reading order and bump a warnings counter.
"""

from __future__ import annotations

import sys
import unicodedata
from dataclasses import dataclass, field
from typing import Optional

from .dom import HtmlElement, parse_html

STYLE_NORMAL = "normal"
STYLE_ITALIC = "italic"
STYLE_CALIGRAPHIC = "caligraphic"
STYLE_BLACKBOARD = "blackboard"
STYLE_FRAKTUR = "fraktur"
STYLE_SANSSERIF = "sansserif"
STYLE_TYPEWRITER = "typewriter"

WEIGHT_NORMAL = "normal"
WEIGHT_BOLD = "bold"


@dataclass(frozen=True)
class FontInfo:
    """Resolved font of a glyph: family style plus weight."""

    style: str = STYLE_NORMAL
    weight: str = WEIGHT_NORMAL


FONT_DEFAULT = FontInfo()
FONT_ITALIC = FontInfo(style=STYLE_ITALIC)

# Node kinds. Leaves carry a glyph; structures carry children.
KIND_SYMBOL = "symbol"
KIND_OPERATOR = "operator"
KIND_NUMBER = "number"
KIND_ROW = "row"
KIND_SUBSCRIPT = "subscript"
KIND_SUPERSCRIPT = "superscript"
KIND_FRACTION = "fraction"
KIND_ROOT = "root"
KIND_OTHER = "other-structure"

_MARKERS = {
    KIND_SUBSCRIPT: ("POSTSUBSCRIPT_start", "POSTSUBSCRIPT_end"),
    KIND_SUPERSCRIPT: ("POSTSUPERSCRIPT_start", "POSTSUPERSCRIPT_end"),
    KIND_FRACTION: ("FRACTION_start", "FRACTION_end"),
    KIND_ROOT: ("ROOT_start", "ROOT_end"),
}


@dataclass
class MathNode:
    """One node of a parsed formula tree."""

    kind: str
    glyph: str = ""
    font: FontInfo = FONT_DEFAULT
    children: tuple["MathNode", ...] = ()


@dataclass
class LexWarnings:
    """Counters for degradations met while lexemizing."""

    unknown_structures: int = 0
    unknown_operators: int = 0


# ---------------------------------------------------------------------------
# Unicode decoding: Mathematical Alphanumeric Symbols and letterlike glyphs.
# Each styled codepoint decodes to (plain base character, style, weight).

_LATIN_FAMILIES = (
    (0x1D400, STYLE_NORMAL, WEIGHT_BOLD),
    (0x1D434, STYLE_ITALIC, WEIGHT_NORMAL),
    (0x1D468, STYLE_ITALIC, WEIGHT_BOLD),
    (0x1D49C, STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    (0x1D4D0, STYLE_CALIGRAPHIC, WEIGHT_BOLD),
    (0x1D504, STYLE_FRAKTUR, WEIGHT_NORMAL),
    (0x1D538, STYLE_BLACKBOARD, WEIGHT_NORMAL),
    (0x1D56C, STYLE_FRAKTUR, WEIGHT_BOLD),
    (0x1D5A0, STYLE_SANSSERIF, WEIGHT_NORMAL),
    (0x1D5D4, STYLE_SANSSERIF, WEIGHT_BOLD),
    # sans-serif italic families keep their dominant family prefix
    (0x1D608, STYLE_SANSSERIF, WEIGHT_NORMAL),
    (0x1D63C, STYLE_SANSSERIF, WEIGHT_BOLD),
    (0x1D670, STYLE_TYPEWRITER, WEIGHT_NORMAL),
)

_GREEK_FAMILIES = (
    (0x1D6A8, STYLE_NORMAL, WEIGHT_BOLD),
    (0x1D6E2, STYLE_ITALIC, WEIGHT_NORMAL),
    (0x1D71C, STYLE_ITALIC, WEIGHT_BOLD),
    (0x1D756, STYLE_SANSSERIF, WEIGHT_BOLD),
    (0x1D790, STYLE_SANSSERIF, WEIGHT_BOLD),
)

# 58 base characters per Greek family, in codepoint order.
_GREEK_SEQUENCE = (
    "ΑΒΓΔΕΖΗΘΙΚ"
    "ΛΜΝΞΟΠΡϴΣΤ"
    "ΥΦΧΨΩ∇"
    "αβγδεζηθικ"
    "λμνξοπρςστ"
    "υφχψω"
    "∂ϵϑϰϕϱϖ"
)

_DIGIT_FAMILIES = (
    (0x1D7CE, STYLE_NORMAL, WEIGHT_BOLD),
    (0x1D7D8, STYLE_BLACKBOARD, WEIGHT_NORMAL),
    (0x1D7E2, STYLE_SANSSERIF, WEIGHT_NORMAL),
    (0x1D7EC, STYLE_SANSSERIF, WEIGHT_BOLD),
    (0x1D7F6, STYLE_TYPEWRITER, WEIGHT_NORMAL),
)

# Letterlike Symbols block: holes in the alphanumeric ranges live here.
_LETTERLIKE = {
    "ℂ": ("C", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℊ": ("g", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℋ": ("H", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℌ": ("H", STYLE_FRAKTUR, WEIGHT_NORMAL),
    "ℍ": ("H", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℎ": ("h", STYLE_ITALIC, WEIGHT_NORMAL),
    "ℏ": ("hbar", STYLE_ITALIC, WEIGHT_NORMAL),
    "ℐ": ("I", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℑ": ("I", STYLE_FRAKTUR, WEIGHT_NORMAL),
    "ℒ": ("L", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℓ": ("l", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℕ": ("N", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "℘": ("p", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℙ": ("P", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℚ": ("Q", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℛ": ("R", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℜ": ("R", STYLE_FRAKTUR, WEIGHT_NORMAL),
    "ℝ": ("R", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℤ": ("Z", STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "ℨ": ("Z", STYLE_FRAKTUR, WEIGHT_NORMAL),
    "ℬ": ("B", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℭ": ("C", STYLE_FRAKTUR, WEIGHT_NORMAL),
    "ℯ": ("e", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℰ": ("E", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℱ": ("F", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℳ": ("M", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "ℴ": ("o", STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
}


def decode_styled_char(ch: str) -> Optional[tuple[str, str, str]]:
    """Decode one styled math character to (base, style, weight).

    Returns None when the character carries no font information of its own.
    """
    if ch in _LETTERLIKE:
        return _LETTERLIKE[ch]
    cp = ord(ch)
    if not 0x1D400 <= cp <= 0x1D7FF:
        return None
    for start, style, weight in _LATIN_FAMILIES:
        if start <= cp < start + 52:
            offset = cp - start
            base = chr(ord("A") + offset) if offset < 26 else chr(ord("a") + offset - 26)
            return base, style, weight
    for start, style, weight in _GREEK_FAMILIES:
        if start <= cp < start + 58:
            return _GREEK_SEQUENCE[cp - start], style, weight
    for start, style, weight in _DIGIT_FAMILIES:
        if start <= cp < start + 10:
            return chr(ord("0") + cp - start), style, weight
    return None


# ---------------------------------------------------------------------------
# Glyph spelling.

# Both the lunate and the small form collapse to the same name.
_GREEK_NAMES = {
    "α": "alpha", "β": "beta", "γ": "gamma", "δ": "delta",
    "ε": "epsilon", "ϵ": "epsilon", "ζ": "zeta", "η": "eta",
    "θ": "theta", "ϑ": "vartheta", "ι": "iota", "κ": "kappa",
    "ϰ": "varkappa", "λ": "lambda", "μ": "mu", "ν": "nu",
    "ξ": "xi", "ο": "omicron", "π": "pi", "ϖ": "varpi",
    "ρ": "rho", "ϱ": "varrho", "σ": "sigma", "ς": "varsigma",
    "τ": "tau", "υ": "upsilon", "ϕ": "phi", "φ": "varphi",
    "χ": "chi", "ψ": "psi", "ω": "omega",
    "Α": "Alpha", "Β": "Beta", "Γ": "Gamma", "Δ": "Delta",
    "Ε": "Epsilon", "Ζ": "Zeta", "Η": "Eta", "Θ": "Theta",
    "ϴ": "Theta", "Ι": "Iota", "Κ": "Kappa", "Λ": "Lambda",
    "Μ": "Mu", "Ν": "Nu", "Ξ": "Xi", "Ο": "Omicron",
    "Π": "Pi", "Ρ": "Rho", "Σ": "Sigma", "Τ": "Tau",
    "Υ": "Upsilon", "Φ": "Phi", "Χ": "Chi", "Ψ": "Psi",
    "Ω": "Omega",
    "∇": "nabla", "∂": "partial",
}

_OPERATOR_NAMES = {
    "+": "plus", "−": "minus", "-": "minus", "±": "plus_minus",
    "∓": "minus_plus", "×": "times", "⋅": "dot",
    "·": "dot", "∗": "asterisk", "*": "asterisk", "/": "slash",
    "÷": "divide", "∘": "circ", "⊕": "oplus",
    "⊗": "otimes", "⊖": "ominus", "⊙": "odot",
    "=": "equals", "≠": "not_equals", "≈": "approx",
    "≃": "similar_equals", "≅": "congruent", "≡": "equivalent",
    "∼": "similar", "∝": "proportional_to",
    "<": "less", ">": "greater", "≤": "less_equals",
    "≥": "greater_equals", "≪": "much_less", "≫": "much_greater",
    "≺": "precedes", "≻": "succeeds",
    "∈": "element_of", "∉": "not_element_of", "∋": "contains",
    "⊂": "subset", "⊆": "subset_equals", "⊃": "superset",
    "⊇": "superset_equals", "∪": "union", "∩": "intersection",
    "∖": "setminus", "∅": "empty_set", "∞": "infinity",
    "∑": "sum", "∏": "product", "∐": "coproduct",
    "∫": "integral", "∬": "double_integral", "∮": "contour_integral",
    "√": "square_root",
    "→": "right_arrow", "←": "left_arrow", "↔": "left_right_arrow",
    "⟶": "long_right_arrow", "⇒": "implies", "⇐": "implied_by",
    "⇔": "iff", "↦": "maps_to", "↑": "up_arrow",
    "↓": "down_arrow",
    "∀": "for_all", "∃": "exists", "∄": "not_exists",
    "¬": "not", "∧": "and", "∨": "or",
    "⊥": "perp", "∥": "parallel", "∦": "not_parallel",
    "∣": "divides", "∤": "not_divides",
    "⊢": "proves", "⊨": "models",
    ",": "comma", ";": "semicolon", ":": "colon", ".": "period",
    "!": "exclamation", "?": "question",
    "(": "left_paren", ")": "right_paren",
    "[": "left_bracket", "]": "right_bracket",
    "{": "left_brace", "}": "right_brace",
    "|": "vertical_bar", "‖": "double_vertical_bar",
    "⟨": "left_angle", "⟩": "right_angle",
    "〈": "left_angle", "〉": "right_angle",
    "⌊": "left_floor", "⌋": "right_floor",
    "⌈": "left_ceiling", "⌉": "right_ceiling",
    "′": "prime", "'": "prime", "″": "double_prime",
    "‴": "triple_prime",
    "°": "degree", "%": "percent", "‰": "per_mille",
    "⋯": "center_dots", "…": "low_dots", "⋮": "vertical_dots",
    "⋱": "diagonal_dots",
    "^": "caret", "_": "underscore", "~": "tilde", "&": "ampersand",
    "#": "hash", "@": "at", "$": "dollar", "∠": "angle",
    "△": "triangle", "□": "square", "♢": "diamond",
    "⊞": "boxplus", "⋀": "big_and", "⋁": "big_or",
    "⋂": "big_intersection", "⋃": "big_union",
    "⊔": "square_union", "⊓": "square_intersection",
    "⊎": "multiset_union", "⨁": "big_oplus", "⨂": "big_otimes",
    "˜": "tilde", "¯": "macron", "̄": "macron",
    "^": "caret", "⃗": "vector_arrow", "´": "acute",
    "`": "grave", "˙": "dot_accent", "¨": "double_dot_accent",
}

# Characters that carry layout only and produce no lexeme.
_INVISIBLE = frozenset(
    "⁡⁢⁣⁤​      ﻿"
)


def _spell_operator(glyph: str, warnings: Optional[LexWarnings] = None) -> list[str]:
    """Spelled names for an operator glyph. Invisible glyphs vanish."""
    stripped = "".join(ch for ch in glyph if ch not in _INVISIBLE and not ch.isspace())
    if not stripped:
        return []
    if stripped in _OPERATOR_NAMES:
        return [_OPERATOR_NAMES[stripped]]
    if stripped.isascii() and stripped.isalpha():
        return [stripped.lower()]
    names = []
    for ch in stripped:
        if ch in _OPERATOR_NAMES:
            names.append(_OPERATOR_NAMES[ch])
        elif ch.isascii() and ch.isalnum():
            names.append(ch.lower())
        else:
            if warnings is not None:
                warnings.unknown_operators += 1
            try:
                derived = unicodedata.name(ch).lower().replace(" ", "_")
                names.append("".join(c for c in derived if c.isalnum() or c == "_"))
            except ValueError:
                names.append("u%04x" % ord(ch))
    return names


def _spell_identifier(glyph: str) -> str:
    """Spell an identifier glyph with ASCII letters, digits, underscores."""
    if all(ch.isascii() and ch.isalnum() for ch in glyph):
        return glyph
    parts = []
    for ch in glyph:
        if ch.isascii() and ch.isalnum():
            parts.append(ch)
        elif ch in _GREEK_NAMES:
            parts.append(_GREEK_NAMES[ch])
        elif ch in _LETTERLIKE:
            parts.append(_LETTERLIKE[ch][0])
        else:
            try:
                derived = unicodedata.name(ch).lower().replace(" ", "_")
                parts.append("".join(c for c in derived if c.isalnum() or c == "_"))
            except ValueError:
                parts.append("u%04x" % ord(ch))
    return "_".join(parts)


def font_prefix(font: FontInfo, glyph: str) -> str:
    """Full lexeme for an identifier glyph under a resolved font.

    Digit-only glyphs stay bare. Everything else gets a prefix naming the
    weight and style, bold combining with the style (bold_italic).
    """
    spelled = _spell_identifier(glyph)
    if spelled and all(ch.isdigit() for ch in spelled):
        return spelled
    parts = []
    if font.weight == WEIGHT_BOLD:
        parts.append("bold")
    if font.style != STYLE_NORMAL:
        parts.append(font.style)
    if not parts:
        parts.append(STYLE_NORMAL)
    return "_".join(parts) + "_" + spelled


def _leaf_lexemes(node: MathNode, warnings: Optional[LexWarnings]) -> list[str]:
    if node.kind == KIND_OPERATOR:
        return _spell_operator(node.glyph, warnings)
    if node.kind == KIND_NUMBER:
        literal = "".join(ch for ch in node.glyph if ch.isdigit() or ch == ".")
        if literal.strip("."):
            return [literal]
        return _spell_operator(node.glyph, warnings)
    glyph = node.glyph.strip()
    if not glyph or all(ch in _INVISIBLE for ch in glyph):
        return []
    return [font_prefix(node.font, glyph)]


def lexemize(root: Optional[MathNode], warnings: Optional[LexWarnings] = None) -> list[str]:
    """Flatten a formula tree into its lexeme sequence.

    Marker pairs are balanced by construction. Unknown structures pass
    their children through and bump warnings.unknown_structures.
    """
    if root is None:
        return []
    out: list[str] = []
    _emit(root, out, warnings)
    return out


def _emit(node: MathNode, out: list[str], warnings: Optional[LexWarnings]) -> None:
    kind = node.kind
    if kind == KIND_ROW:
        for child in node.children:
            _emit(child, out, warnings)
    elif kind in (KIND_SUBSCRIPT, KIND_SUPERSCRIPT):
        start, end = _MARKERS[kind]
        if node.children:
            _emit(node.children[0], out, warnings)
        out.append(start)
        for child in node.children[1:]:
            _emit(child, out, warnings)
        out.append(end)
    elif kind in (KIND_FRACTION, KIND_ROOT):
        start, end = _MARKERS[kind]
        out.append(start)
        for child in node.children:
            _emit(child, out, warnings)
        out.append(end)
    elif kind == KIND_OTHER:
        if warnings is not None:
            warnings.unknown_structures += 1
        for child in node.children:
            _emit(child, out, warnings)
    else:
        out.extend(_leaf_lexemes(node, warnings))


# ---------------------------------------------------------------------------
# MathML tree -> MathNode tree.

_VARIANT_FONTS = {
    "normal": FontInfo(STYLE_NORMAL, WEIGHT_NORMAL),
    "bold": FontInfo(STYLE_NORMAL, WEIGHT_BOLD),
    "italic": FontInfo(STYLE_ITALIC, WEIGHT_NORMAL),
    "bold-italic": FontInfo(STYLE_ITALIC, WEIGHT_BOLD),
    "double-struck": FontInfo(STYLE_BLACKBOARD, WEIGHT_NORMAL),
    "script": FontInfo(STYLE_CALIGRAPHIC, WEIGHT_NORMAL),
    "bold-script": FontInfo(STYLE_CALIGRAPHIC, WEIGHT_BOLD),
    "fraktur": FontInfo(STYLE_FRAKTUR, WEIGHT_NORMAL),
    "bold-fraktur": FontInfo(STYLE_FRAKTUR, WEIGHT_BOLD),
    "sans-serif": FontInfo(STYLE_SANSSERIF, WEIGHT_NORMAL),
    "bold-sans-serif": FontInfo(STYLE_SANSSERIF, WEIGHT_BOLD),
    "sans-serif-italic": FontInfo(STYLE_SANSSERIF, WEIGHT_NORMAL),
    "sans-serif-bold-italic": FontInfo(STYLE_SANSSERIF, WEIGHT_BOLD),
    "monospace": FontInfo(STYLE_TYPEWRITER, WEIGHT_NORMAL),
}

_ROW_TAGS = frozenset(
    ("math", "mrow", "mstyle", "mpadded", "menclose", "merror", "msrow", "semantics")
)
_SKIP_TAGS = frozenset(("annotation", "annotation-xml", "mspace", "none", "mprescripts"))
_OTHER_TAGS = frozenset(
    ("mover", "munder", "munderover", "mtable", "mtr", "mtd", "mmultiscripts",
     "mlabeledtr", "mstack", "mlongdiv")
)


def _decode_leaf(text: str, tag: str, variant: Optional[str]) -> tuple[str, FontInfo]:
    """Resolve (plain glyph, font) for a leaf's text content."""
    bases = []
    styles = set()
    for ch in text:
        decoded = decode_styled_char(ch)
        if decoded is None:
            bases.append(ch)
        else:
            bases.append(decoded[0])
            styles.add((decoded[1], decoded[2]))
    glyph = "".join(bases)
    if variant in _VARIANT_FONTS:
        return glyph, _VARIANT_FONTS[variant]
    if len(styles) == 1:
        style, weight = next(iter(styles))
        return glyph, FontInfo(style, weight)
    if tag == "mi" and len(glyph) == 1 and glyph.isalpha() and glyph.isascii():
        # single ASCII letters render italic by default
        return glyph, FONT_ITALIC
    if tag == "mi" and len(glyph) == 1 and glyph in _GREEK_NAMES and glyph.islower():
        return glyph, FONT_ITALIC
    return glyph, FONT_DEFAULT


def from_mathml(element: HtmlElement) -> Optional[MathNode]:
    """Convert a MathML element subtree into a MathNode tree.

    Returns None for subtrees that contribute nothing (spacing, annotations).
    """
    tag = element.tag
    if tag in _SKIP_TAGS:
        return None
    if tag == "semantics":
        # first child is the presentation branch; annotations are skipped
        for child in element.child_elements():
            node = from_mathml(child)
            if node is not None:
                return node
        return None
    if tag in ("mi", "mo", "mn", "mtext", "ms"):
        text = element.text_content().strip()
        variant = element.attrs.get("mathvariant")
        if tag == "mn":
            glyph, font = _decode_leaf(text, tag, variant)
            return MathNode(KIND_NUMBER, glyph=glyph, font=font)
        if tag == "mo":
            return MathNode(KIND_OPERATOR, glyph=text)
        if tag in ("mtext", "ms"):
            words = text.split()
            if not words:
                return None
            children = tuple(
                MathNode(KIND_SYMBOL, glyph=w, font=FONT_DEFAULT) for w in words
            )
            return children[0] if len(children) == 1 else MathNode(KIND_ROW, children=children)
        glyph, font = _decode_leaf(text, tag, variant)
        if not glyph:
            return None
        return MathNode(KIND_SYMBOL, glyph=glyph, font=font)
    children = tuple(
        node for node in (from_mathml(c) for c in element.child_elements()) if node is not None
    )
    if tag in _ROW_TAGS:
        if len(children) == 1:
            return children[0]
        return MathNode(KIND_ROW, children=children)
    if tag == "msub":
        return MathNode(KIND_SUBSCRIPT, children=children)
    if tag == "msup":
        return MathNode(KIND_SUPERSCRIPT, children=children)
    if tag == "msubsup":
        # base with both scripts reads as superscript over a subscripted base
        if len(children) == 3:
            inner = MathNode(KIND_SUBSCRIPT, children=children[:2])
            return MathNode(KIND_SUPERSCRIPT, children=(inner, children[2]))
        return MathNode(KIND_ROW, children=children)
    if tag == "mfrac":
        return MathNode(KIND_FRACTION, children=children)
    if tag in ("msqrt", "mroot"):
        return MathNode(KIND_ROOT, children=children)
    return MathNode(KIND_OTHER, children=children)


def lexemize_formula(element: HtmlElement, warnings: Optional[LexWarnings] = None) -> list[str]:
    """Lexemes for a MathML element found in a document tree."""
    return lexemize(from_mathml(element), warnings)


def _filter_main() -> int:
    """Line filter: one MathML formula per input line, lexemes out."""
    warnings = LexWarnings()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            print()
            continue
        root = parse_html(line)
        math = None
        for el in root.iter():
            if el.tag == "math":
                math = el
                break
        if math is None and root.child_elements():
            math = root.child_elements()[0]
        tokens = lexemize_formula(math, warnings) if math is not None else []
        print(" ".join(tokens))
    if warnings.unknown_structures or warnings.unknown_operators:
        print(
            f"warning: {warnings.unknown_structures} unknown structures, "
            f"{warnings.unknown_operators} unknown operators",
            file=sys.stderr,
        )
    return 0


if __name__ == "__main__":  # pragma: no cover - exercised via subprocess
    sys.exit(_filter_main())
