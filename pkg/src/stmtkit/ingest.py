"""Locating labeled statements in scholarly HTML and slicing their content.

Documents follow the converter's class scheme: theorem-like environments
carry `ltx_theorem ltx_theorem_<envname>` (proofs carry `ltx_proof`),
paragraph containers carry `ltx_para`, narrative paragraphs `ltx_p`,
display equations `ltx_equation`, and section headings live in
`ltx_title`-classed descendants of sectioning elements. That scheme is
confined to this module.

A statement's content is its first logical paragraph: the `ltx_p` blocks
of the first paragraph container plus display-math blocks interleaved
before the second container starts. Title and tag elements never
contribute content.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from .dom import DocumentParseError, HtmlElement, parse_html
from .mathlex import MathNode, from_mathml
from .taxonomy import StatementLabel, Taxonomy

ENV_CLASS_PREFIX = "ltx_theorem_"
PROOF_CLASS = "ltx_proof"
ERROR_CLASS = "ltx_ERROR"

SECTION_CLASSES = frozenset(
    (
        "ltx_part",
        "ltx_chapter",
        "ltx_section",
        "ltx_subsection",
        "ltx_subsubsection",
        "ltx_abstract",
        "ltx_acknowledgements",
        "ltx_keywords",
    )
)

# classes implying a heading name even when the element has no title child
_IMPLIED_HEADINGS = {
    "ltx_abstract": "abstract",
    "ltx_acknowledgements": "acknowledgements",
    "ltx_keywords": "keywords",
}

_EXCLUDED_CONTENT = frozenset(("ltx_title", "ltx_tag"))


@dataclass(frozen=True)
class TextRun:
    text: str


@dataclass(frozen=True)
class MathRun:
    node: Optional[MathNode]


@dataclass(frozen=True)
class CiteRun:
    pass


@dataclass(frozen=True)
class RefRun:
    pass


Run = Union[TextRun, MathRun, CiteRun, RefRun]


@dataclass
class NarrativeBlock:
    runs: list[Run] = field(default_factory=list)


@dataclass
class MathBlock:
    node: Optional[MathNode]


Block = Union[NarrativeBlock, MathBlock]


@dataclass
class ScholarlyDoc:
    doc_id: str
    root: HtmlElement


@dataclass
class RawStatement:
    label: StatementLabel
    blocks: list[Block]
    source_doc: str
    nesting_depth: int = 0
    has_error_markup: bool = False


@dataclass(frozen=True)
class StatementCandidate:
    element: HtmlElement
    label: StatementLabel
    nesting_depth: int


def parse_document(data: bytes | str, doc_id: str = "") -> ScholarlyDoc:
    """Parse one document. Raises DocumentParseError on broken input."""
    return ScholarlyDoc(doc_id=doc_id, root=parse_html(data))


def _environment_label(element: HtmlElement, taxonomy: Taxonomy) -> Optional[StatementLabel]:
    if element.has_class(PROOF_CLASS):
        return taxonomy.canonicalize_env("proof")
    if not element.has_class("ltx_theorem"):
        return None
    for token in element.classes:
        if token.startswith(ENV_CLASS_PREFIX):
            return taxonomy.canonicalize_env(token[len(ENV_CLASS_PREFIX):])
    return None


def _is_environment(element: HtmlElement) -> bool:
    if element.has_class(PROOF_CLASS):
        return True
    return element.has_class("ltx_theorem") and any(
        t.startswith(ENV_CLASS_PREFIX) for t in element.classes
    )


def clean_heading(text: str) -> str:
    """Case-fold a heading and drop surrounding numbering and punctuation."""
    folded = " ".join(text.casefold().split())
    return folded.strip("0123456789.:;,()[]{} \t§—–-")


def _heading_label(element: HtmlElement, taxonomy: Taxonomy) -> Optional[StatementLabel]:
    section_class = next((c for c in element.classes if c in SECTION_CLASSES), None)
    if section_class is None:
        return None
    title = next((el for el in element.iter() if el is not element and el.has_class("ltx_title")), None)
    if title is not None:
        name = clean_heading(title.text_content(skip_classes=frozenset(("ltx_tag",))))
        if name:
            return taxonomy.canonicalize_heading(name)
    implied = _IMPLIED_HEADINGS.get(section_class)
    if implied is not None:
        return taxonomy.canonicalize_heading(implied)
    return None


def find_statements(
    doc: ScholarlyDoc, taxonomy: Taxonomy, skips: Optional[Counter] = None
) -> list[StatementCandidate]:
    """All statement candidates in document order, outer before inner."""
    found: list[StatementCandidate] = []
    _scan(doc.root, taxonomy, 0, found, skips)
    return found


def _scan(
    element: HtmlElement,
    taxonomy: Taxonomy,
    env_depth: int,
    found: list[StatementCandidate],
    skips: Optional[Counter],
) -> None:
    child_depth = env_depth
    if _is_environment(element):
        label = _environment_label(element, taxonomy)
        if label is not None:
            found.append(StatementCandidate(element, label, env_depth))
        elif skips is not None:
            skips["unknown-environment"] += 1
        child_depth = env_depth + 1
    else:
        label = _heading_label(element, taxonomy)
        if label is not None:
            found.append(StatementCandidate(element, label, env_depth))
    for child in element.child_elements():
        _scan(child, taxonomy, child_depth, found, skips)


def _is_display_math(element: HtmlElement) -> bool:
    if element.has_class("ltx_equation") or element.has_class("ltx_equationgroup"):
        return True
    return element.tag == "math" and element.attrs.get("display") == "block"


def _math_elements(element: HtmlElement) -> list[HtmlElement]:
    if element.tag == "math":
        return [element]
    out = []
    for child in element.child_elements():
        if any(child.has_class(c) for c in _EXCLUDED_CONTENT):
            continue
        out.extend(_math_elements(child))
    return out


def _collect_runs(element: HtmlElement, runs: list[Run]) -> None:
    for child in element.children:
        if isinstance(child, str):
            if child:
                runs.append(TextRun(child))
            continue
        if any(child.has_class(c) for c in _EXCLUDED_CONTENT):
            continue
        if child.tag == "math":
            runs.append(MathRun(from_mathml(child)))
        elif child.has_class("ltx_cite"):
            runs.append(CiteRun())
        elif child.has_class("ltx_ref"):
            runs.append(RefRun())
        else:
            _collect_runs(child, runs)


def _content_events(element: HtmlElement, events: list[tuple[str, HtmlElement]]) -> None:
    """Pre-order (kind, element) events: 'container', 'p', 'math'."""
    for child in element.child_elements():
        if any(child.has_class(c) for c in _EXCLUDED_CONTENT):
            continue
        if child.has_class("ltx_para"):
            events.append(("container", child))
            _content_events(child, events)
        elif _is_display_math(child):
            events.append(("math", child))
        elif child.has_class("ltx_p") or child.tag == "p":
            events.append(("p", child))
        else:
            _content_events(child, events)


def _block_is_empty(block: Block) -> bool:
    if isinstance(block, MathBlock):
        return block.node is None
    for run in block.runs:
        if isinstance(run, TextRun):
            if run.text.strip():
                return False
        else:
            return False
    return True


def first_logical_paragraph(
    candidate: StatementCandidate, doc_id: str = ""
) -> Optional[RawStatement]:
    """Content blocks of a candidate's first logical paragraph.

    Returns None when the environment has no usable content.
    """
    events: list[tuple[str, HtmlElement]] = []
    _content_events(candidate.element, events)
    blocks: list[Block] = []
    containers_seen = 0
    for kind, element in events:
        if kind == "container":
            containers_seen += 1
            if containers_seen >= 2:
                break
            continue
        if kind == "p":
            runs: list[Run] = []
            _collect_runs(element, runs)
            blocks.append(NarrativeBlock(runs))
        else:
            for math in _math_elements(element):
                blocks.append(MathBlock(from_mathml(math)))
    if not events:
        # flat environments (keyword lists etc.) carry bare inline content
        runs = []
        _collect_runs(candidate.element, runs)
        if runs:
            blocks.append(NarrativeBlock(runs))
    blocks = [b for b in blocks if not _block_is_empty(b)]
    if not blocks:
        return None
    has_error = any(el.has_class(ERROR_CLASS) for el in candidate.element.iter())
    return RawStatement(
        label=candidate.label,
        blocks=blocks,
        source_doc=doc_id,
        nesting_depth=candidate.nesting_depth,
        has_error_markup=has_error,
    )


def extract_statements(
    doc: ScholarlyDoc, taxonomy: Taxonomy, skips: Optional[Counter] = None
) -> list[RawStatement]:
    """All extractable statements of a parsed document, in document order."""
    statements = []
    for candidate in find_statements(doc, taxonomy, skips):
        stmt = first_logical_paragraph(candidate, doc.doc_id)
        if stmt is None:
            if skips is not None:
                skips["empty-statement"] += 1
            continue
        statements.append(stmt)
    return statements
