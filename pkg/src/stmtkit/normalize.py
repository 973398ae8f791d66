"""Statement content to final token stream.

Narrative words are downcased and stripped of punctuation, numeric
literals become `numliteral`, citations become `citationelement`, internal
references `refelement`, and formulas are spliced in as lexeme runs that
keep their case. Sentences are detected on the narrative side only, so a
formula never ends a sentence, and display math continues whatever
sentence surrounds it.

The serialized form is one sentence per line with space-separated tokens.
Normalizing a serialized paragraph again is a fixed point, with one known
exception: a bare digit lexeme emitted by the math lexer is
indistinguishable from a narrative number once serialized, so it collapses
to `numliteral` on the second pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import langid
from .ingest import (
    CiteRun,
    MathBlock,
    MathRun,
    NarrativeBlock,
    RawStatement,
    RefRun,
)
from .mathlex import LexWarnings, lexemize

CITATION_PLACEHOLDER = "citationelement"
REF_PLACEHOLDER = "refelement"
NUMBER_PLACEHOLDER = "numliteral"

MAX_WORD_LENGTH = 25

_CHUNK_RE = re.compile(r"[0-9]+(?:\.[0-9]+)?|[a-z0-9]+")
_NUMBER_RE = re.compile(r"^[0-9]+(?:\.[0-9]+)?$")
_EDGE_PUNCT = "\"'()[]{}<>,;:.!?*`~‘’“”«»"

_MARKER_TOKENS = frozenset(
    (
        "POSTSUBSCRIPT_start", "POSTSUBSCRIPT_end",
        "POSTSUPERSCRIPT_start", "POSTSUPERSCRIPT_end",
        "FRACTION_start", "FRACTION_end",
        "ROOT_start", "ROOT_end",
    )
)
_LEXEME_RE = re.compile(
    r"^(?:bold(?:_(?:italic|caligraphic|blackboard|fraktur|sansserif|typewriter))?"
    r"|italic|caligraphic|blackboard|fraktur|sansserif|typewriter|normal)"
    r"_[A-Za-z0-9_]+$"
)

# words whose trailing period is not a sentence boundary
_ABBREVIATIONS = frozenset(
    (
        "e.g.", "i.e.", "cf.", "resp.", "vs.", "et", "al.", "w.r.t.", "s.t.",
        "eq.", "eqs.", "fig.", "figs.", "sec.", "secs.", "thm.", "prop.",
        "lem.", "cor.", "def.", "ref.", "refs.", "no.", "nos.", "st.",
        "dr.", "prof.", "ed.", "eds.", "vol.", "pp.", "ch.",
    )
)


@dataclass
class NormalizedParagraph:
    """Final token form of one statement paragraph."""

    sentences: list[list[str]] = field(default_factory=list)
    word_count: int = 0
    flags: set[str] = field(default_factory=set)
    # lowercased narrative words only; feeds language detection
    narrative_tokens: list[str] = field(default_factory=list)


def is_math_lexeme(token: str) -> bool:
    """True for structure markers and font-prefixed glyph lexemes."""
    return token in _MARKER_TOKENS or bool(_LEXEME_RE.match(token))


def _is_sentence_final(word: str) -> bool:
    trimmed = word.rstrip("\"')]’”")
    if not trimmed or trimmed[-1] not in ".!?":
        return False
    return trimmed.lower() not in _ABBREVIATIONS


class _Builder:
    def __init__(self) -> None:
        self.para = NormalizedParagraph()
        self.current: list[str] = []

    def add(self, token: str) -> None:
        self.current.append(token)
        self.para.word_count += 1

    def close_sentence(self) -> None:
        if self.current:
            self.para.sentences.append(self.current)
            self.current = []

    def narrative_word(self, word: str) -> None:
        core = word.strip(_EDGE_PUNCT)
        if core and is_math_lexeme(core):
            self.add(core)
        else:
            for chunk in _CHUNK_RE.findall(word.lower()):
                if _NUMBER_RE.match(chunk):
                    self.para.flags.add("had_number")
                    self.add(NUMBER_PLACEHOLDER)
                    self.para.narrative_tokens.append(NUMBER_PLACEHOLDER)
                else:
                    self.add(chunk)
                    self.para.narrative_tokens.append(chunk)
        if _is_sentence_final(word):
            self.close_sentence()

    def narrative_text(self, text: str) -> None:
        for word in text.split():
            self.narrative_word(word)

    def math(self, lexemes: list[str]) -> None:
        if lexemes:
            self.para.flags.add("had_math")
        for token in lexemes:
            self.add(token)

    def finish(self) -> NormalizedParagraph:
        self.close_sentence()
        return self.para


def normalize(
    stmt: RawStatement,
    include_math: bool = True,
    warnings: Optional[LexWarnings] = None,
) -> NormalizedParagraph:
    """Token stream of a raw statement.

    With include_math False every formula is removed outright, narrative
    text on both sides flowing together.
    """
    builder = _Builder()
    for block in stmt.blocks:
        if isinstance(block, MathBlock):
            if include_math:
                builder.math(lexemize(block.node, warnings))
            continue
        for run in block.runs:
            if isinstance(run, MathRun):
                if include_math:
                    builder.math(lexemize(run.node, warnings))
            elif isinstance(run, CiteRun):
                builder.para.flags.add("had_citation")
                builder.add(CITATION_PLACEHOLDER)
                builder.para.narrative_tokens.append(CITATION_PLACEHOLDER)
            elif isinstance(run, RefRun):
                builder.para.flags.add("had_ref")
                builder.add(REF_PLACEHOLDER)
                builder.para.narrative_tokens.append(REF_PLACEHOLDER)
            else:
                builder.narrative_text(run.text)
    return builder.finish()


def normalize_text(text: str) -> NormalizedParagraph:
    """Normalize plain text, one sentence forced per input line.

    This is the path for re-normalizing serialized paragraphs and for
    classifying ad-hoc text.
    """
    builder = _Builder()
    for line in text.splitlines():
        builder.narrative_text(line)
        builder.close_sentence()
    return builder.finish()


def serialize_paragraph(para: NormalizedParagraph) -> str:
    """One sentence per line, tokens space-separated, trailing newline."""
    return "".join(" ".join(sentence) + "\n" for sentence in para.sentences)


def detect_language(para: NormalizedParagraph) -> tuple[str, Optional[int]]:
    """Best language guess over the paragraph's narrative words.

    Placeholders are excluded from the profiled text; short paragraphs
    come back undetermined.
    """
    placeholders = {CITATION_PLACEHOLDER, REF_PLACEHOLDER, NUMBER_PLACEHOLDER}
    profiled = [t for t in para.narrative_tokens if t not in placeholders]
    return langid.detect(profiled)


def quality_filter(
    para: NormalizedParagraph,
    has_error_markup: bool = False,
    doc_language: str = "english",
) -> tuple[bool, Optional[str]]:
    """(keep, reason) for one normalized paragraph.

    Drops error markup, over-long narrative words, non-English text, and
    empty results. Paragraphs too short to profile inherit the document
    language.
    """
    if has_error_markup:
        return False, "error-markup"
    for sentence in para.sentences:
        for token in sentence:
            if len(token) > MAX_WORD_LENGTH and not is_math_lexeme(token) and "_" not in token:
                return False, "long-word"
    if para.word_count == 0:
        return False, "empty"
    language, _ = detect_language(para)
    if language == langid.UNDETERMINED:
        if doc_language != "english":
            return False, "language"
    elif language != "english":
        return False, "language"
    return True, None
