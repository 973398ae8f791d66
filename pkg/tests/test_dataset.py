"""Dataset materialization, split, stats, and regrouping tests."""

import hashlib
import zipfile
from pathlib import Path

import pytest

from stmtkit.dataset import (
    MODE_NO_MATH,
    DatasetManifest,
    DatasetStats,
    assert_no_math_lexemes,
    collision_report,
    compute_stats,
    dataset_files,
    extract_corpus,
    format_manifest,
    parse_manifest,
    regroup_to_nests,
    split_train_test,
    write_paragraph,
)
from stmtkit.normalize import normalize_text
from stmtkit.taxonomy import load_taxonomy

CORPUS = Path(__file__).parent / "fixtures" / "corpus"
GOLDEN_TREE = Path(__file__).parent / "fixtures" / "golden_tree.txt"

TAXONOMY = load_taxonomy()


def tree_inventory(root: Path) -> list[str]:
    lines = []
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            lines.append(f"{path.relative_to(root).as_posix()} {digest}")
    return lines


class TestWriteParagraph:
    def test_same_content_same_label_dedups(self, tmp_path):
        para = normalize_text("the valuation of a product equals the sum")
        first = write_paragraph(para, "lemma", tmp_path)
        second = write_paragraph(para, "lemma", tmp_path)
        assert first == second
        assert len(dataset_files(tmp_path)) == 1

    def test_distinct_content_distinct_files(self, tmp_path):
        write_paragraph(normalize_text("first paragraph content"), "lemma", tmp_path)
        write_paragraph(normalize_text("second paragraph content"), "lemma", tmp_path)
        assert len(dataset_files(tmp_path)) == 2

    def test_cross_label_duplicate_reported(self, tmp_path):
        para = normalize_text("identical content under two labels")
        write_paragraph(para, "lemma", tmp_path)
        write_paragraph(para, "conjecture", tmp_path)
        report = collision_report(tmp_path)
        assert len(report) == 1
        assert list(report.values()) == [["conjecture", "lemma"]]

    def test_filename_is_content_hash(self, tmp_path):
        para = normalize_text("hash me")
        path = write_paragraph(para, "remark", tmp_path)
        assert path.stem == hashlib.sha256(path.read_bytes()).hexdigest()


def fake_files(n):
    return [Path(hashlib.sha256(f"p{i}".encode()).hexdigest() + ".txt") for i in range(n)]


class TestSplit:
    def test_first_byte_rule(self):
        train, test = split_train_test([Path("cc" + "0" * 62 + ".txt")], ratio=0.8)
        assert len(train) == 1  # 0xcc = 204 < round(256*0.8) = 205
        train, test = split_train_test([Path("cd" + "0" * 62 + ".txt")], ratio=0.8)
        assert len(test) == 1  # 0xcd = 205 is not < 205

    def test_ratio_one_puts_everything_in_train(self):
        files = fake_files(50)
        train, test = split_train_test(files, ratio=1.0)
        assert len(train) == 50 and not test

    def test_invalid_ratio_rejected(self):
        with pytest.raises(ValueError):
            split_train_test([], ratio=0.0)
        with pytest.raises(ValueError):
            split_train_test([], ratio=1.2)

    def test_uniform_hashes_land_near_ratio(self):
        files = fake_files(10000)
        train, _ = split_train_test(files, ratio=0.8)
        assert abs(len(train) - 8000) <= 120

    def test_split_is_deterministic_and_exhaustive(self):
        files = fake_files(500)
        train1, test1 = split_train_test(files, ratio=0.8)
        train2, test2 = split_train_test(files, ratio=0.8)
        assert train1 == train2 and test1 == test2
        assert sorted(train1 + test1) == sorted(files)
        assert not set(train1) & set(test1)


class TestStats:
    def write_sized(self, tmp_path, sizes):
        for i, size in enumerate(sizes):
            text = " ".join(f"w{j}" for j in range(size)) + "\n"
            (tmp_path / "remark").mkdir(exist_ok=True, parents=True)
            digest = hashlib.sha256(text.encode()).hexdigest()
            (tmp_path / "remark" / f"{digest}.txt").write_text(text)

    def test_mean_median(self, tmp_path):
        self.write_sized(tmp_path, [37, 59, 81])
        stats = compute_stats(tmp_path)
        assert stats.median_words == 59
        assert stats.mean_words == 59
        assert stats.coverage_480 == 1.0

    def test_coverage_counts_window_overflow(self, tmp_path):
        self.write_sized(tmp_path, [100, 481])
        assert compute_stats(tmp_path).coverage_480 == 0.5

    def test_empty_dataset_errors(self, tmp_path):
        with pytest.raises(ValueError):
            compute_stats(tmp_path)


class TestRegroup:
    def test_all_lemma_fixture_lands_in_proposition_nest(self, tmp_path):
        for word in ("alpha", "beta", "gamma", "delta"):
            write_paragraph(normalize_text(f"the {word} lemma text"), "lemma", tmp_path)
        view = regroup_to_nests(tmp_path, TAXONOMY)
        assert len(view.groups["proposition"]) == 4
        assert view.dropped == 0

    def test_dropped_labels_excluded(self, tmp_path):
        write_paragraph(normalize_text("kept one"), "theorem", tmp_path)
        write_paragraph(normalize_text("dropped one"), "observation", tmp_path)
        view = regroup_to_nests(tmp_path, TAXONOMY)
        assert view.retained == 1 and view.dropped == 1
        assert view.retained_fraction == 0.5

    def test_only_dropped_labels_gives_empty_view(self, tmp_path):
        write_paragraph(normalize_text("a hint paragraph"), "hint", tmp_path)
        view = regroup_to_nests(tmp_path, TAXONOMY)
        assert view.retained == 0
        assert all(not files for files in view.groups.values())

    def test_nest_counts_conserve_member_counts(self, tmp_path):
        for label in ("theorem", "lemma", "corollary", "remark", "note"):
            write_paragraph(normalize_text(f"text for {label}"), label, tmp_path)
        view = regroup_to_nests(tmp_path, TAXONOMY)
        assert len(view.groups["proposition"]) == 3
        assert len(view.groups["remark"]) == 2


class TestExtractCorpus:
    def test_golden_tree_reproduced(self, tmp_path):
        extract_corpus(CORPUS, tmp_path / "out")
        expected = GOLDEN_TREE.read_text(encoding="utf-8").splitlines()
        assert tree_inventory(tmp_path / "out") == expected

    def test_worker_count_does_not_change_output(self, tmp_path):
        extract_corpus(CORPUS, tmp_path / "serial", jobs=1)
        extract_corpus(CORPUS, tmp_path / "parallel", jobs=2)
        assert tree_inventory(tmp_path / "serial") == tree_inventory(tmp_path / "parallel")

    def test_skip_histogram_covers_failure_modes(self, tmp_path):
        manifest = extract_corpus(CORPUS, tmp_path / "out")
        for reason in ("parse-error", "unknown-environment", "language", "error-markup", "long-word"):
            assert manifest.skips[reason] >= 1, reason

    def test_no_math_mode_strips_all_lexemes(self, tmp_path):
        manifest = extract_corpus(CORPUS, tmp_path / "nm", mode=MODE_NO_MATH)
        assert_no_math_lexemes(tmp_path / "nm")
        assert manifest.paragraphs > 0

    def test_no_math_remark_by_deletion(self, tmp_path):
        extract_corpus(CORPUS, tmp_path / "nm", mode=MODE_NO_MATH)
        remarks = list((tmp_path / "nm" / "remark").glob("*.txt"))
        assert len(remarks) == 1
        assert remarks[0].read_text() == "importantly note that is independent of the s\n"

    def test_no_math_mean_and_median_strictly_lower(self, tmp_path):
        with_math = extract_corpus(CORPUS, tmp_path / "wm").stats
        no_math = extract_corpus(CORPUS, tmp_path / "nm", mode=MODE_NO_MATH).stats
        assert no_math.mean_words < with_math.mean_words
        assert no_math.median_words < with_math.median_words

    def test_zip_archive_documents(self, tmp_path):
        indir = tmp_path / "in"
        indir.mkdir()
        with zipfile.ZipFile(indir / "bundle.zip", "w") as archive:
            archive.writestr("doc01.html", (CORPUS / "doc01.html").read_text())
        manifest = extract_corpus(indir, tmp_path / "out")
        assert manifest.documents == 1
        assert manifest.labels["theorem"] == 1
        assert manifest.labels["lemma"] == 1

    def test_empty_input_directory(self, tmp_path):
        indir = tmp_path / "empty"
        indir.mkdir()
        manifest = extract_corpus(indir, tmp_path / "out")
        assert manifest.documents == 0
        assert manifest.paragraphs == 0


class TestManifestFormat:
    def test_round_trip(self):
        manifest = DatasetManifest(
            mode="with-math",
            documents=10,
            paragraphs=21,
            labels={"theorem": 4, "lemma": 1},
            stats=DatasetStats(mean_words=19.714286, median_words=18.0, coverage_480=1.0),
        )
        manifest.skips["language"] = 1
        parsed = parse_manifest(format_manifest(manifest))
        assert parsed.mode == manifest.mode
        assert parsed.documents == manifest.documents
        assert parsed.labels == manifest.labels
        assert parsed.skips == manifest.skips
        assert parsed.stats.median_words == 18.0

    def test_line_oriented_key_value(self):
        manifest = DatasetManifest(documents=1, paragraphs=2, labels={"remark": 2})
        text = format_manifest(manifest)
        for line in text.splitlines():
            assert "=" in line
