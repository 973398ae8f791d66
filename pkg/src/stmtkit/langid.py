"""Rank-order language identification over character trigrams.

The classic out-of-place method: a text is profiled by its 300 most
frequent character trigrams, and compared against per-language reference
profiles by summed rank displacement. Trigrams absent from the reference
profile pay the maximum penalty.

Profiles are built from token streams that already went through narrative
normalization (lowercased, ASCII letters and digits only), so the bundled
references are generated from seed texts pushed through the same rules.
Russian is profiled in Latin transliteration for that reason.
"""

from __future__ import annotations

import re
from collections import Counter
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

PROFILE_SIZE = 300
MIN_TOKENS = 10
UNDETERMINED = "undetermined"

_WORD_RE = re.compile(r"[a-z0-9]+")

# space is stored as underscore inside .profile files
_SPACE_MARK = "_"


def narrative_tokens(text: str) -> list[str]:
    """Lowercased alphanumeric words of a seed text."""
    return _WORD_RE.findall(text.lower())


def trigram_counts(tokens: Sequence[str]) -> Counter:
    """Counts of character trigrams over space-joined, space-padded tokens."""
    counts: Counter = Counter()
    if not tokens:
        return counts
    joined = " " + " ".join(tokens) + " "
    for i in range(len(joined) - 2):
        counts[joined[i : i + 3]] += 1
    return counts


def build_profile(tokens: Sequence[str], size: int = PROFILE_SIZE) -> tuple[str, ...]:
    """Top trigrams ranked by count descending, trigram ascending."""
    counts = trigram_counts(tokens)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return tuple(gram for gram, _ in ranked[:size])


def out_of_place(doc_profile: Sequence[str], ref_profile: Sequence[str]) -> int:
    """Summed rank displacement of the document profile against a reference."""
    ref_rank = {gram: i for i, gram in enumerate(ref_profile)}
    penalty = max(len(ref_profile), PROFILE_SIZE)
    total = 0
    for i, gram in enumerate(doc_profile):
        j = ref_rank.get(gram)
        total += penalty if j is None else abs(i - j)
    return total


def detect(
    tokens: Sequence[str],
    profiles: Optional[dict[str, tuple[str, ...]]] = None,
    min_tokens: int = MIN_TOKENS,
) -> tuple[str, Optional[int]]:
    """Best language for a narrative token stream.

    Streams under min_tokens words return (undetermined, None). Ties break
    toward the alphabetically first language for determinism.
    """
    if len(tokens) < min_tokens:
        return UNDETERMINED, None
    if profiles is None:
        profiles = load_profiles()
    doc_profile = build_profile(tokens)
    best_name = UNDETERMINED
    best_distance: Optional[int] = None
    for name in sorted(profiles):
        d = out_of_place(doc_profile, profiles[name])
        if best_distance is None or d < best_distance:
            best_name, best_distance = name, d
    return best_name, best_distance


def format_profile(profile: Sequence[str]) -> str:
    """Serialize a profile, one trigram per line, space shown as underscore."""
    return "\n".join(gram.replace(" ", _SPACE_MARK) for gram in profile) + "\n"


def parse_profile(text: str) -> tuple[str, ...]:
    grams = []
    for line in text.splitlines():
        line = line.rstrip("\n")
        if line:
            grams.append(line.replace(_SPACE_MARK, " "))
    return tuple(grams)


def load_profiles(directory: Optional[Path] = None) -> dict[str, tuple[str, ...]]:
    """Bundled language profiles, or those in an explicit directory."""
    profiles: dict[str, tuple[str, ...]] = {}
    if directory is not None:
        for path in sorted(directory.glob("*.profile")):
            profiles[path.stem] = parse_profile(path.read_text(encoding="utf-8"))
        return profiles
    package_dir = resources.files("stmtkit").joinpath("data/profiles")
    for entry in sorted(package_dir.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".profile"):
            profiles[entry.name[: -len(".profile")]] = parse_profile(
                entry.read_text(encoding="utf-8")
            )
    return profiles
