"""Materializing the labeled statement dataset on disk.

Layout: one directory per label, one file per paragraph named by the
SHA-256 hex digest of its serialized contents. The digest doubles as the
deduplication key and as the train/test assignment: a file goes to train
when its first hash byte is below round(256 * ratio), which makes the
split reproducible with nothing stored.

Extraction runs document-parallel; results are reduced in sorted document
order so the output tree is byte-identical regardless of worker count.
"""

from __future__ import annotations

import gzip
import hashlib
import statistics
import zipfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import langid
from .dom import DocumentParseError
from .ingest import extract_statements, parse_document
from .normalize import (
    NormalizedParagraph,
    is_math_lexeme,
    normalize,
    quality_filter,
    serialize_paragraph,
)
from .taxonomy import Taxonomy, load_taxonomy

MODE_WITH_MATH = "with-math"
MODE_NO_MATH = "no-math"
SPLIT_SEED = "sha256-first-byte"
WINDOW = 480


@dataclass
class DatasetStats:
    mean_words: float
    median_words: float
    coverage_480: float


@dataclass
class DatasetManifest:
    mode: str = MODE_WITH_MATH
    split_seed: str = SPLIT_SEED
    documents: int = 0
    paragraphs: int = 0
    labels: dict[str, int] = field(default_factory=dict)
    skips: Counter = field(default_factory=Counter)
    stats: Optional[DatasetStats] = None


def write_paragraph(para: NormalizedParagraph, label_name: str, root: Path) -> Path:
    """Write one kept paragraph; identical content under a label dedups."""
    return _write_text(serialize_paragraph(para), label_name, root)


def _write_text(text: str, label_name: str, root: Path) -> Path:
    data = text.encode("utf-8")
    digest = hashlib.sha256(data).hexdigest()
    directory = root / label_name
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{digest}.txt"
    if not path.exists():
        path.write_bytes(data)
    return path


def dataset_files(root: Path) -> list[Path]:
    """All paragraph files, sorted for deterministic iteration."""
    return sorted(root.glob("*/*.txt"))


def collision_report(root: Path) -> dict[str, list[str]]:
    """Hashes stored under more than one label, with their label lists."""
    by_hash: dict[str, list[str]] = {}
    for path in dataset_files(root):
        by_hash.setdefault(path.stem, []).append(path.parent.name)
    return {h: sorted(ls) for h, ls in sorted(by_hash.items()) if len(ls) > 1}


def split_train_test(
    files: Iterable[Path], ratio: float = 0.8
) -> tuple[list[Path], list[Path]]:
    """Deterministic hash-prefix split; every file lands in exactly one side."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"split ratio must be in (0, 1], got {ratio}")
    threshold = round(256 * ratio)
    train, test = [], []
    for path in files:
        first_byte = int(path.stem[:2], 16)
        (train if first_byte < threshold else test).append(path)
    return train, test


def file_word_count(path: Path) -> int:
    return len(path.read_text(encoding="utf-8").split())


def compute_stats(root: Path) -> DatasetStats:
    """Mean and median paragraph length plus 480-token window coverage."""
    counts = [file_word_count(p) for p in dataset_files(root)]
    if not counts:
        raise ValueError(f"no paragraphs under {root}")
    within = sum(1 for c in counts if c <= WINDOW)
    return DatasetStats(
        mean_words=statistics.mean(counts),
        median_words=float(statistics.median(counts)),
        coverage_480=within / len(counts),
    )


@dataclass
class NestView:
    """Dataset files regrouped under nest labels."""

    groups: dict[str, list[Path]]
    retained: int
    dropped: int

    @property
    def retained_fraction(self) -> float:
        total = self.retained + self.dropped
        return self.retained / total if total else 0.0


def regroup_to_nests(root: Path, taxonomy: Taxonomy) -> NestView:
    """Map kept files to nests; files of dropped labels are excluded."""
    groups: dict[str, list[Path]] = {name: [] for name in taxonomy.nest_names}
    retained = dropped = 0
    for path in dataset_files(root):
        nest = taxonomy.nest_of(path.parent.name)
        if nest is None:
            dropped += 1
        else:
            groups[nest.name].append(path)
            retained += 1
    return NestView(groups=groups, retained=retained, dropped=dropped)


# ---------------------------------------------------------------------------
# Corpus extraction.

def _iter_document_sources(input_dir: Path) -> list[tuple[str, str, Optional[str]]]:
    """(doc_id, file path, archive entry) for every document, sorted."""
    sources = []
    for path in sorted(input_dir.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(input_dir).as_posix()
        name = path.name.lower()
        if name.endswith(".html") or name.endswith(".htm") or name.endswith(".html.gz"):
            sources.append((rel, str(path), None))
        elif name.endswith(".zip"):
            with zipfile.ZipFile(path) as archive:
                for entry in sorted(archive.namelist()):
                    if entry.lower().endswith((".html", ".htm")):
                        sources.append((f"{rel}!{entry}", str(path), entry))
    return sources


def _read_document(path: str, entry: Optional[str]) -> bytes:
    if entry is not None:
        with zipfile.ZipFile(path) as archive:
            return archive.read(entry)
    data = Path(path).read_bytes()
    if path.lower().endswith(".gz"):
        data = gzip.decompress(data)
    return data


def _process_document(
    args: tuple[str, str, Optional[str], bool]
) -> tuple[str, list[tuple[str, str]], dict[str, int]]:
    """Worker: one document in, kept (label, text) pairs and skip counts out."""
    doc_id, path, entry, include_math = args
    taxonomy = load_taxonomy()
    skips: Counter = Counter()
    try:
        doc = parse_document(_read_document(path, entry), doc_id)
    except DocumentParseError:
        return doc_id, [], {"parse-error": 1}
    statements = extract_statements(doc, taxonomy, skips)
    normalized = [(s, normalize(s, include_math=include_math)) for s in statements]
    doc_tokens: list[str] = []
    for _, para in normalized:
        doc_tokens.extend(para.narrative_tokens)
    doc_language, _ = langid.detect(doc_tokens)
    if doc_language == langid.UNDETERMINED:
        doc_language = "english"
    kept: list[tuple[str, str]] = []
    for stmt, para in normalized:
        keep, reason = quality_filter(
            para, has_error_markup=stmt.has_error_markup, doc_language=doc_language
        )
        if keep:
            kept.append((stmt.label.name, serialize_paragraph(para)))
        else:
            skips[reason] += 1
    return doc_id, kept, dict(skips)


def extract_corpus(
    input_dir: Path,
    output_dir: Path,
    taxonomy: Optional[Taxonomy] = None,
    mode: str = MODE_WITH_MATH,
    jobs: int = 1,
) -> DatasetManifest:
    """Run the full pipeline over a directory of documents.

    Per-document failures are counted, never fatal. The output tree and
    manifest depend only on the input bytes, not on jobs.
    """
    if mode not in (MODE_WITH_MATH, MODE_NO_MATH):
        raise ValueError(f"unknown mode {mode!r}")
    if taxonomy is None:
        taxonomy = load_taxonomy()
    include_math = mode == MODE_WITH_MATH
    sources = _iter_document_sources(input_dir)
    tasks = [(doc_id, path, entry, include_math) for doc_id, path, entry in sources]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_document, tasks))
    else:
        results = [_process_document(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    manifest = DatasetManifest(mode=mode, documents=len(sources))
    output_dir.mkdir(parents=True, exist_ok=True)
    for _, kept, skips in results:
        manifest.skips.update(skips)
        for label_name, text in kept:
            _write_text(text, label_name, output_dir)
    files = dataset_files(output_dir)
    manifest.paragraphs = len(files)
    counts: Counter = Counter(p.parent.name for p in files)
    manifest.labels = dict(sorted(counts.items()))
    if files:
        manifest.stats = compute_stats(output_dir)
    write_manifest(manifest, output_dir / "manifest.txt")
    collisions = collision_report(output_dir)
    lines = [f"{h} {' '.join(labels)}" for h, labels in collisions.items()]
    (output_dir / "collisions.txt").write_text(
        "".join(line + "\n" for line in lines), encoding="utf-8"
    )
    return manifest


def assert_no_math_lexemes(root: Path) -> None:
    """Raise if any dataset token matches the math-lexeme grammar."""
    for path in dataset_files(root):
        for token in path.read_text(encoding="utf-8").split():
            if is_math_lexeme(token):
                raise AssertionError(f"math lexeme {token!r} in {path}")


# ---------------------------------------------------------------------------
# Manifest serialization: line-oriented key=value.

def format_manifest(manifest: DatasetManifest) -> str:
    lines = [
        f"mode={manifest.mode}",
        f"split_seed={manifest.split_seed}",
        f"documents={manifest.documents}",
        f"paragraphs={manifest.paragraphs}",
    ]
    if manifest.stats is not None:
        lines.append(f"mean_words={manifest.stats.mean_words:.6f}")
        lines.append(f"median_words={manifest.stats.median_words:.6f}")
        lines.append(f"coverage_480={manifest.stats.coverage_480:.6f}")
    for label, count in sorted(manifest.labels.items()):
        lines.append(f"label.{label}={count}")
    for reason, count in sorted(manifest.skips.items()):
        lines.append(f"skip.{reason}={count}")
    return "".join(line + "\n" for line in lines)


def write_manifest(manifest: DatasetManifest, path: Path) -> None:
    path.write_text(format_manifest(manifest), encoding="utf-8")


def parse_manifest(text: str) -> DatasetManifest:
    manifest = DatasetManifest()
    stats: dict[str, float] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        if key == "mode":
            manifest.mode = value
        elif key == "split_seed":
            manifest.split_seed = value
        elif key == "documents":
            manifest.documents = int(value)
        elif key == "paragraphs":
            manifest.paragraphs = int(value)
        elif key in ("mean_words", "median_words", "coverage_480"):
            stats[key] = float(value)
        elif key.startswith("label."):
            manifest.labels[key[len("label."):]] = int(value)
        elif key.startswith("skip."):
            manifest.skips[key[len("skip."):]] = int(value)
    if stats:
        manifest.stats = DatasetStats(
            mean_words=stats.get("mean_words", 0.0),
            median_words=stats.get("median_words", 0.0),
            coverage_480=stats.get("coverage_480", 0.0),
        )
    return manifest
