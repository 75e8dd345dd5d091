import pytest
from hypothesis import given
from hypothesis import strategies as st

from conceptminer.corpus import (
    ExplanationRecord,
    clean,
    load_corpus,
    make_corpus,
    merge_annotators,
)
from conceptminer.errors import CorpusFormatError, ValidationError


def test_load_a1_corpus(a1_corpus_path):
    corpus = load_corpus(a1_corpus_path)
    assert len(corpus) == 5
    assert corpus.labels == ("ball", "foul", "out", "strike")
    assert corpus.records[0].explanation.startswith("The batter")


def test_load_single_record(tmp_path):
    path = tmp_path / "one.jsonl"
    path.write_text('{"id": 1, "label": "strike", "explanation": "x"}\n')
    corpus = load_corpus(path)
    assert len(corpus) == 1


def test_load_duplicate_id_errors(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text(
        '{"id": 1, "label": "a", "explanation": "x"}\n'
        '{"id": 1, "label": "a", "explanation": "y"}\n'
    )
    with pytest.raises(ValidationError, match="duplicate"):
        load_corpus(path)


def test_load_duplicate_id_merges_when_asked(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text(
        '{"id": 1, "label": "a", "explanation": "x"}\n'
        '{"id": 1, "label": "a", "explanation": "y"}\n'
    )
    corpus = load_corpus(path, merge_duplicate_ids=True)
    assert corpus.records[0].explanation == "x y"


def test_load_malformed_line_reports_lineno(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": 1, "label": "a", "explanation": "x"}\n{oops\n')
    with pytest.raises(CorpusFormatError, match="line 2"):
        load_corpus(path)


def test_load_empty_file_errors(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(CorpusFormatError, match="empty"):
        load_corpus(path)


def test_merge_annotators_concatenates():
    merged = merge_annotators([
        ExplanationRecord(1, "strike", "A."),
        ExplanationRecord(1, "strike", "B."),
    ])
    assert merged == ExplanationRecord(1, "strike", "A. B.")


def test_merge_single_record_identity():
    rec = ExplanationRecord(1, "strike", "A")
    assert merge_annotators([rec]) is rec


def test_merge_label_conflict_errors():
    with pytest.raises(ValidationError, match="conflicting"):
        merge_annotators([
            ExplanationRecord(1, "strike", "A"),
            ExplanationRecord(1, "ball", "B"),
        ])


def test_clean_removes_none_row(a1_raw_corpus):
    cleaned = clean(a1_raw_corpus)
    assert len(cleaned) == 4
    assert [r.id for r in cleaned.records] == [1, 2, 3, 5]
    assert all(r.label != "none" for r in cleaned.records)


def test_clean_noop_when_no_null_labels():
    corpus = make_corpus([ExplanationRecord(1, "a", "x"), ExplanationRecord(2, "b", "y")])
    assert clean(corpus) == corpus


def test_clean_can_empty_the_corpus():
    corpus = make_corpus([ExplanationRecord(1, "none", "x")])
    cleaned = clean(corpus)
    assert len(cleaned) == 0
    assert cleaned.labels == ()


@given(
    st.lists(
        st.tuples(st.sampled_from(["a", "b", "none"]), st.text(min_size=1, max_size=8)),
        max_size=12,
    )
)
def test_clean_idempotent_and_preserves_survivors(pairs):
    records = [ExplanationRecord(i, label, text) for i, (label, text) in enumerate(pairs)]
    corpus = make_corpus(records)
    once = clean(corpus)
    assert clean(once) == once
    survivors = [r for r in records if r.label != "none"]
    assert list(once.records) == survivors
    assert len(once) == len(corpus) - sum(1 for r in records if r.label == "none")
