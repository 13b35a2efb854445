import json
import re
import string

import pytest
from hypothesis import given, strategies as st

from attnsum.corpus import (
    RawNote,
    Sentence,
    TokenSequence,
    Vocabulary,
    build_document,
    clean_words,
    load_corpus,
    segment_sentences,
    wordpiece_tokenize,
)
from attnsum.errors import EmptyDocument, MissingSpecialToken, ParseError


class TestSegmentSentences:
    def test_two_terminated_sentences(self):
        assert segment_sentences("chest pain noted. plan follow up.") == [
            "chest pain noted.", "plan follow up."]

    def test_unterminated_text_is_one_sentence(self):
        assert segment_sentences("no acute distress") == ["no acute distress"]

    def test_fixture_note_matches_hand_segmentation(self, small_notes, data_dir):
        expected = json.loads((data_dir / "expected_segmentation.json").read_text())
        for note in small_notes:
            assert segment_sentences(note.text) == expected[note.id]

    def test_whitespace_only_raises(self):
        with pytest.raises(EmptyDocument):
            segment_sentences("  \n\t ")

    def test_abbreviation_guard(self):
        assert segment_sentences("seen by dr. smith today. stable.") == [
            "seen by dr. smith today.", "stable."]

    def test_blank_line_is_a_boundary(self):
        assert segment_sentences("first part\n\nsecond part") == [
            "first part", "second part"]

    def test_question_and_exclamation(self):
        assert segment_sentences("any pain? none! follow up.") == [
            "any pain?", "none!", "follow up."]

    @given(st.text(min_size=1).filter(lambda t: t.strip()))
    def test_no_characters_lost(self, text):
        joined = "".join(segment_sentences(text))
        compact = lambda s: "".join(s.split())  # noqa: E731
        assert compact(joined) == compact(text)

    @given(st.text(min_size=1).filter(lambda t: t.strip()))
    def test_no_empty_sentences(self, text):
        assert all(s for s in segment_sentences(text))


class TestCleanWords:
    def test_drops_non_alphabetic(self):
        assert clean_words(["BP", "120/80", "stable"]) == ["bp", "stable"]

    def test_all_dropped(self):
        assert clean_words(["***", "42"]) == []

    def test_percent_tokens_dropped(self):
        assert clean_words(["5%", "dextrose5%", "saline"]) == ["saline"]

    def test_matches_regex_filter_oracle(self):
        # independent one-line filter over a tokenized fixture sentence
        tokens = "Plan: follow-up BP 120/80 q.d. for (severe) headache!!".split()
        oracle = [
            t.lower().strip(string.punctuation) for t in tokens
            if "%" not in t and re.search("[a-zA-Z]", t.strip(string.punctuation))
        ]
        assert clean_words(tokens) == oracle

    @given(st.lists(st.text(max_size=12)))
    def test_idempotent(self, tokens):
        once = clean_words(tokens)
        assert clean_words(once) == once

    @given(st.lists(st.text(max_size=12)))
    def test_output_contract(self, tokens):
        for word in clean_words(tokens):
            assert word == word.lower()
            assert any(c.isalpha() for c in word)


class TestDocument:
    def test_word_counts_total(self, small_docs):
        for doc in small_docs:
            assert sum(doc.word_counts.values()) == sum(
                len(s.words) for s in doc.sentences)

    def test_sentence_indices_contiguous(self, small_docs):
        for doc in small_docs:
            assert [s.index for s in doc.sentences] == list(range(len(doc.sentences)))

    def test_cleaning_applied(self, small_docs):
        doc = next(d for d in small_docs if d.note_id == "note-002")
        words = doc.sentences[1].words
        assert "120/80" not in words
        assert "bp" in words


class TestLoadCorpus:
    def test_three_records_in_order(self, small_notes):
        assert [n.id for n in small_notes] == ["note-001", "note-002", "note-003"]
        assert small_notes[0].labels == ("428.0",)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_corpus(path) == []

    def test_missing_text_field_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "text": "ok"}\n{"id": "b"}\n')
        with pytest.raises(ParseError) as err:
            load_corpus(path)
        assert err.value.line == 2

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "text": "ok"}\nnot json\n')
        with pytest.raises(ParseError) as err:
            load_corpus(path)
        assert err.value.line == 2

    def test_blank_note_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "text": "   "}\n')
        with pytest.raises(ParseError):
            load_corpus(path)

    def test_raw_note_invariants(self):
        with pytest.raises(ValueError):
            RawNote(id="", text="hello")
        with pytest.raises(ValueError):
            RawNote(id="x", text=" \n ")


class TestWordPiece:
    def test_empty_payload(self, small_vocab):
        seq = wordpiece_tokenize(Sentence(0, "***", ()), small_vocab)
        assert seq.ids == (small_vocab.cls_id, small_vocab.sep_id)
        assert seq.segment_ids == (0, 0)

    def test_unknown_word_becomes_unk(self, small_vocab):
        seq = wordpiece_tokenize(Sentence(0, "xyzzy", ("xyzzy",)), small_vocab)
        assert seq.ids == (small_vocab.cls_id, small_vocab.unk_id, small_vocab.sep_id)

    def test_known_word_id_from_fixture_file(self, small_vocab, data_dir):
        lines = (data_dir / "vocab_small.txt").read_text().splitlines()
        expected_id = lines.index("pain")
        seq = wordpiece_tokenize(Sentence(0, "pain", ("pain",)), small_vocab)
        assert seq.ids == (small_vocab.cls_id, expected_id, small_vocab.sep_id)

    def test_subword_decomposition(self, small_vocab):
        seq = wordpiece_tokenize(
            Sentence(0, "severely headache", ("severely", "headache")), small_vocab)
        pieces = [small_vocab.token_of(i) for i in seq.ids[1:-1]]
        assert pieces == ["severe", "##ly", "head", "##ache"]

    def test_truncation_keeps_head(self, small_vocab):
        words = tuple(["pain"] * 300)
        seq = wordpiece_tokenize(Sentence(0, "x", words), small_vocab)
        assert seq.length == 128
        assert seq.ids[0] == small_vocab.cls_id
        assert seq.ids[-1] == small_vocab.sep_id
        assert set(seq.ids[1:-1]) == {small_vocab.id_of("pain")}

    def test_missing_special_token(self):
        with pytest.raises(MissingSpecialToken):
            Vocabulary(["[CLS]", "[UNK]", "word"])  # no [SEP]

    @given(st.lists(st.text(alphabet="abcdef", min_size=1, max_size=20), max_size=40))
    def test_framing_invariants(self, words):
        vocab = Vocabulary(["[CLS]", "[SEP]", "[UNK]", "ab", "##cd", "e"])
        seq = wordpiece_tokenize(Sentence(0, " ".join(words), tuple(words)), vocab)
        assert seq.ids[0] == vocab.cls_id
        assert seq.ids[-1] == vocab.sep_id
        assert seq.length <= 128
        assert set(seq.segment_ids) <= {0}

    def test_token_sequence_length_property(self):
        seq = TokenSequence(ids=(2, 5, 3), segment_ids=(0, 0, 0))
        assert seq.length == 3
