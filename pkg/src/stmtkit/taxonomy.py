"""Canonical statement labels, environment-name aliases, and nest grouping.

The taxonomy is data, not code: it loads from a small sectioned config file
(the default one ships with the package) and is immutable afterwards, so a
single instance can be shared freely across worker processes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

ORIGIN_ENVIRONMENT = "theorem-environment"
ORIGIN_HEADING = "section-heading"

_SOURCE_KEYS = {"env": ORIGIN_ENVIRONMENT, "heading": ORIGIN_HEADING}
_LABEL_NAME_RE = re.compile(r"^[a-z0-9_]+$")


class TaxonomyError(ValueError):
    """Raised when a taxonomy config is malformed or internally inconsistent."""


@dataclass(frozen=True)
class StatementLabel:
    """One of the canonical raw labels.

    ``origin`` records the more common curation source; ``sources`` keeps
    every source the label was curated from (primary first).
    """

    name: str
    origin: str
    sources: tuple[str, ...]


@dataclass(frozen=True)
class NestLabel:
    """A grouped class: a nest name, its member labels, and its paragraph count."""

    name: str
    members: frozenset[str]
    frequency: int


class Taxonomy:
    """Validated, immutable view over labels, aliases, nests, and frequencies."""

    def __init__(
        self,
        labels: dict[str, StatementLabel],
        aliases: dict[str, str],
        nests: dict[str, NestLabel],
        frequencies: dict[str, int],
    ):
        self._labels = dict(labels)
        self._aliases = dict(aliases)
        self._nests = dict(nests)
        self._frequencies = dict(frequencies)
        self._label_to_nest = {
            member: nest.name for nest in nests.values() for member in nest.members
        }
        self._nest_names = sorted(nests)
        self._nest_index = {name: i for i, name in enumerate(self._nest_names)}

    # -- lookups ----------------------------------------------------------

    def canonicalize_env(self, raw: str) -> Optional[StatementLabel]:
        """Map an authored environment or heading name to its canonical label.

        Lookup is case-insensitive and never raises on unknown names; the
        caller counts those as unlabeled.
        """
        key = raw.strip().casefold()
        if not key:
            return None
        name = self._aliases.get(key, key if key in self._labels else None)
        return self._labels.get(name) if name else None

    def canonicalize_heading(self, heading_text: str) -> Optional[StatementLabel]:
        """Like :meth:`canonicalize_env` but restricted to heading-origin labels."""
        label = self.canonicalize_env(heading_text)
        if label is not None and ORIGIN_HEADING in label.sources:
            return label
        return None

    def nest_of(self, label: str | StatementLabel) -> Optional[NestLabel]:
        """Containing nest for an in-task label, None for a dropped one.

        Unknown names signal taxonomy corruption and raise.
        """
        name = label.name if isinstance(label, StatementLabel) else label
        if name not in self._labels:
            raise TaxonomyError(f"unknown label {name!r}")
        nest_name = self._label_to_nest.get(name)
        return self._nests[nest_name] if nest_name else None

    # -- accessors --------------------------------------------------------

    @property
    def labels(self) -> dict[str, StatementLabel]:
        return dict(self._labels)

    @property
    def nests(self) -> dict[str, NestLabel]:
        return dict(self._nests)

    @property
    def nest_names(self) -> list[str]:
        """Nest names in their canonical (sorted) class order."""
        return list(self._nest_names)

    def nest_index(self, name: str) -> int:
        return self._nest_index[name]

    def frequency(self, label: str) -> int:
        return self._frequencies[label]

    @property
    def nest_frequencies(self) -> dict[str, int]:
        return {name: nest.frequency for name, nest in self._nests.items()}

    @property
    def total_frequency(self) -> int:
        return sum(self._frequencies.values())

    @property
    def retained_frequency(self) -> int:
        return sum(nest.frequency for nest in self._nests.values())

    @property
    def retained_fraction(self) -> float:
        return self.retained_frequency / self.total_frequency

    @property
    def heading_labels(self) -> frozenset[str]:
        """The closed set of labels recognizable from section headings."""
        return frozenset(
            name
            for name, label in self._labels.items()
            if ORIGIN_HEADING in label.sources
        )

    def source_counts(self) -> dict[str, int]:
        """How many labels trace to each curation source (a label may have both)."""
        counts = {ORIGIN_ENVIRONMENT: 0, ORIGIN_HEADING: 0}
        for label in self._labels.values():
            for source in label.sources:
                counts[source] += 1
        return counts


# -- config parsing ---------------------------------------------------------


def _parse_sections(text: str, path: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current: Optional[str] = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        if current is None:
            raise TaxonomyError(f"{path}:{lineno}: entry outside any section")
        sections[current].append((lineno, line))
    return sections


def _split_kv(line: str, sep: str, path: str, lineno: int) -> tuple[str, str]:
    if sep not in line:
        raise TaxonomyError(f"{path}:{lineno}: expected '{sep}' in {line!r}")
    key, value = line.split(sep, 1)
    return key.strip(), value.strip()


def parse_taxonomy(text: str, path: str = "<string>") -> Taxonomy:
    """Parse and validate a taxonomy config; raises TaxonomyError on any defect."""
    sections = _parse_sections(text, path)
    for required in ("labels", "aliases", "nests", "frequencies"):
        if required not in sections:
            raise TaxonomyError(f"{path}: missing [{required}] section")

    labels: dict[str, StatementLabel] = {}
    for lineno, line in sections["labels"]:
        name, source_spec = _split_kv(line, "=", path, lineno)
        if not _LABEL_NAME_RE.match(name):
            raise TaxonomyError(f"{path}:{lineno}: bad label name {name!r}")
        if name in labels:
            raise TaxonomyError(f"{path}:{lineno}: duplicate label {name!r}")
        sources = []
        for part in source_spec.split(","):
            key = part.strip()
            if key not in _SOURCE_KEYS:
                raise TaxonomyError(f"{path}:{lineno}: unknown source {key!r}")
            sources.append(_SOURCE_KEYS[key])
        if not sources:
            raise TaxonomyError(f"{path}:{lineno}: label {name!r} has no source")
        labels[name] = StatementLabel(name=name, origin=sources[0], sources=tuple(sources))

    aliases: dict[str, str] = {}
    for lineno, line in sections["aliases"]:
        raw, canonical = _split_kv(line, "=", path, lineno)
        key = raw.casefold()
        if key in aliases:
            raise TaxonomyError(f"{path}:{lineno}: duplicate raw name {raw!r}")
        if canonical not in labels:
            raise TaxonomyError(
                f"{path}:{lineno}: alias target {canonical!r} is not a known label"
            )
        aliases[key] = canonical
    for name in labels:
        existing = aliases.get(name)
        if existing is not None and existing != name:
            raise TaxonomyError(
                f"{path}: raw name {name!r} aliased to {existing!r} shadows a canonical label"
            )
        aliases[name] = name

    frequencies: dict[str, int] = {}
    nest_checksums: dict[str, int] = {}
    for lineno, line in sections["frequencies"]:
        key, value = _split_kv(line, "=", path, lineno)
        try:
            count = int(value)
        except ValueError:
            raise TaxonomyError(f"{path}:{lineno}: bad count {value!r}") from None
        if count < 0:
            raise TaxonomyError(f"{path}:{lineno}: negative count for {key!r}")
        if key.startswith("nest:"):
            nest_checksums[key[len("nest:"):].strip()] = count
            continue
        if key not in labels:
            raise TaxonomyError(f"{path}:{lineno}: frequency for unknown label {key!r}")
        if key in frequencies:
            raise TaxonomyError(f"{path}:{lineno}: duplicate frequency for {key!r}")
        frequencies[key] = count
    for name in labels:
        frequencies.setdefault(name, 0)

    nests: dict[str, NestLabel] = {}
    claimed: dict[str, str] = {}
    for lineno, line in sections["nests"]:
        nest_name, member_spec = _split_kv(line, ":", path, lineno)
        if nest_name in nests:
            raise TaxonomyError(f"{path}:{lineno}: duplicate nest {nest_name!r}")
        members = tuple(m.strip() for m in member_spec.split(",") if m.strip())
        if not members:
            raise TaxonomyError(f"{path}:{lineno}: nest {nest_name!r} has no members")
        for member in members:
            if member not in labels:
                raise TaxonomyError(
                    f"{path}:{lineno}: nest member {member!r} is not a known label"
                )
            if member in claimed:
                raise TaxonomyError(
                    f"{path}:{lineno}: overlapping nests: {member!r} already in "
                    f"{claimed[member]!r}"
                )
            claimed[member] = nest_name
        frequency = sum(frequencies[m] for m in members)
        expected = nest_checksums.get(nest_name)
        if expected is not None and expected != frequency:
            raise TaxonomyError(
                f"{path}: nest {nest_name!r} frequency checksum {expected} "
                f"!= member sum {frequency}"
            )
        nests[nest_name] = NestLabel(
            name=nest_name, members=frozenset(members), frequency=frequency
        )
    for nest_name in nest_checksums:
        if nest_name not in nests:
            raise TaxonomyError(f"{path}: checksum for unknown nest {nest_name!r}")

    return Taxonomy(labels, aliases, nests, frequencies)


def load_taxonomy(path: Optional[str | Path] = None) -> Taxonomy:
    """Load a taxonomy config file; with no path, the bundled default."""
    if path is None:
        text = (
            resources.files("stmtkit").joinpath("data/taxonomy.cfg").read_text("utf-8")
        )
        return parse_taxonomy(text, "stmtkit/data/taxonomy.cfg")
    p = Path(path)
    return parse_taxonomy(p.read_text("utf-8"), str(p))
