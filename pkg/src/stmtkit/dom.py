"""A small document tree over the stdlib HTML parser.

Keeps exactly what the extraction pipeline needs: tags, tokenized class
lists, attributes, and children in document order (element or text nodes).
Parsing is strict about structure: elements left open at end of input are
treated as a truncated document and rejected, which matches how the
upstream converter emits well-formed markup.
"""

from __future__ import annotations

import html.parser
from typing import Iterator, Optional

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)


class DocumentParseError(Exception):
    """Input is not parseable as a scholarly HTML document."""


class HtmlElement:
    """One element: tag, attributes, class tokens, and ordered children."""

    __slots__ = ("tag", "attrs", "classes", "children")

    def __init__(self, tag: str, attrs: Optional[dict[str, str]] = None):
        self.tag = tag
        self.attrs = attrs or {}
        self.classes: tuple[str, ...] = tuple((self.attrs.get("class") or "").split())
        self.children: list["HtmlElement | str"] = []

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def class_with_prefix(self, prefix: str) -> Optional[str]:
        for token in self.classes:
            if token.startswith(prefix):
                return token
        return None

    def child_elements(self) -> list["HtmlElement"]:
        return [c for c in self.children if isinstance(c, HtmlElement)]

    def iter(self) -> Iterator["HtmlElement"]:
        """Pre-order traversal including self."""
        yield self
        for child in self.children:
            if isinstance(child, HtmlElement):
                yield from child.iter()

    def text_content(self, skip_classes: frozenset[str] = frozenset()) -> str:
        """Concatenated text of the subtree, skipping subtrees by class token."""
        parts: list[str] = []
        self._collect_text(parts, skip_classes)
        return "".join(parts)

    def _collect_text(self, parts: list[str], skip_classes: frozenset[str]) -> None:
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            elif not any(child.has_class(c) for c in skip_classes):
                child._collect_text(parts, skip_classes)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        cls = " class=%r" % (" ".join(self.classes),) if self.classes else ""
        return f"<{self.tag}{cls} children={len(self.children)}>"


class _TreeBuilder(html.parser.HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = HtmlElement("#document")
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        element = HtmlElement(tag, {k: (v or "") for k, v in attrs})
        self.stack[-1].children.append(element)
        if tag not in VOID_ELEMENTS:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        self.stack[-1].children.append(HtmlElement(tag, {k: (v or "") for k, v in attrs}))

    def handle_endtag(self, tag):
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if data:
            self.stack[-1].children.append(data)


def parse_html(data: bytes | str) -> HtmlElement:
    """Parse HTML bytes (UTF-8 with lenient fallback) or text into a tree.

    Raises DocumentParseError for truncated or non-HTML input.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            text = data.decode("utf-8", errors="replace")
    else:
        text = data
    builder = _TreeBuilder()
    try:
        builder.feed(text)
        builder.close()
    except Exception as exc:  # html.parser raises AssertionError on some junk
        raise DocumentParseError(f"unparseable markup: {exc}") from exc
    if len(builder.stack) != 1:
        open_tags = ", ".join(e.tag for e in builder.stack[1:])
        raise DocumentParseError(f"truncated document: unclosed <{open_tags}>")
    if not builder.root.child_elements():
        raise DocumentParseError("no elements found")
    return builder.root
