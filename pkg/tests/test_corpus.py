import json

import pytest
from hypothesis import given, settings, strategies as st

from lyricbench.corpus import (
    AnnotationPair, Corpus, CorpusError, SplitSpec, apply_split_manifest, corpus_stats,
    estimate_ci_fraction, expand_sentences, filter_english, is_link_only, load_corpus,
    make_splits, read_split_manifest, save_corpus, split_sentences, strip_link_only,
    write_split_manifest,
)
from lyricbench.harness import SynthSpec, generate_synthetic


def pair(i, lyric="some lyric", annotation="Some annotation.", label=None, song="s"):
    return AnnotationPair(str(i), song, lyric, annotation, label)


def write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


# -- loading ---------------------------------------------------------------------

def test_load_three_lines(tmp_path):
    f = tmp_path / "c.jsonl"
    write_lines(f, [{"id": str(i), "song_id": "s", "lyric": "l", "annotation": "a"} for i in range(3)])
    c = load_corpus(f)
    assert len(c) == 3
    assert [p.id for p in c] == ["0", "1", "2"]


def test_load_empty_file(tmp_path):
    f = tmp_path / "c.jsonl"
    f.write_text("", encoding="utf-8")
    assert len(load_corpus(f)) == 0


def test_missing_annotation_names_line(tmp_path):
    f = tmp_path / "c.jsonl"
    write_lines(f, [{"id": "1", "song_id": "s", "lyric": "l", "annotation": "a"},
                    {"id": "2", "song_id": "s", "lyric": "l"}])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(f)


def test_round_trip(tmp_path):
    c = Corpus([pair(1, label="CI"), pair(2, label="CS"), pair(3)])
    save_corpus(c, tmp_path / "c.jsonl")
    assert load_corpus(tmp_path / "c.jsonl").pairs == c.pairs


def test_invalid_pairs():
    with pytest.raises(CorpusError):
        pair(1, lyric="  ")
    with pytest.raises(CorpusError):
        pair(1, annotation="")
    with pytest.raises(CorpusError):
        pair(1, label="XX")
    with pytest.raises(CorpusError):
        Corpus([pair(1), pair(1)])


# -- filters -----------------------------------------------------------------------

def test_filter_english_examples():
    c = Corpus([pair(1, annotation="this is plain english text about money"),
                pair(2, annotation="ceci n'est pas une annotation anglaise")])
    assert [p.id for p in filter_english(c)] == ["1"]
    assert len(filter_english(Corpus())) == 0


def test_link_only():
    assert is_link_only("http://example.com")
    assert not is_link_only("see http://x.com for the interview")
    assert is_link_only("http://a.com http://b.com")
    c = Corpus([pair(1, annotation="http://example.com"),
                pair(2, annotation="see http://x.com for the interview"),
                pair(3, annotation="http://a.com http://b.com")])
    assert [p.id for p in strip_link_only(c)] == ["2"]


def test_filters_record_provenance():
    c = Corpus([pair(1)], provenance="raw")
    assert strip_link_only(c).provenance == "raw | strip-links"


# -- sentence expansion ------------------------------------------------------------

def test_split_sentences():
    assert split_sentences("One. Two! Three?") == ["One.", "Two!", "Three?"]
    assert split_sentences("Dr. Dre made it. Then he left.") == ["Dr. Dre made it.", "Then he left."]
    assert split_sentences("no boundary here") == ["no boundary here"]
    assert split_sentences("version 2.0 is out. Yes") == ["version 2.0 is out.", "Yes"]


def test_expand_three_sentences():
    out = expand_sentences(Corpus([pair(1, lyric="L", annotation="A one. B two. C three.")]))
    assert len(out) == 3
    assert {p.lyric for p in out} == {"L"}
    assert [p.id for p in out] == ["1#0", "1#1", "1#2"]


def test_expand_single_sentence():
    out = expand_sentences(Corpus([pair(7, annotation="Just one sentence here.")]))
    assert [p.id for p in out] == ["7#0"]


def test_expand_keeps_order():
    c = Corpus([pair(1, lyric="x", annotation="He is rich. He says so."),
                pair(2, lyric="y", annotation="She left town.")])
    out = expand_sentences(c)
    assert [(p.id, p.annotation) for p in out] == [
        ("1#0", "He is rich."), ("1#1", "He says so."), ("2#0", "She left town.")]


# -- splits ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def synth1000():
    return generate_synthetic(SynthSpec.load(n_pairs=1000, seed=3))


def test_split_sizes(synth1000):
    test, dev, train = make_splits(synth1000, SplitSpec(50, 100, 7))
    assert (len(test), len(dev), len(train)) == (50, 100, 850)
    ids = [p.id for part in (test, dev, train) for p in part]
    assert len(ids) == len(set(ids)) == 1000
    assert all(p.context_label == "CI" for p in test)


def test_split_deterministic(synth1000):
    a = make_splits(synth1000, SplitSpec(50, 100, 7))
    b = make_splits(synth1000, SplitSpec(50, 100, 7))
    assert all(x.pairs == y.pairs for x, y in zip(a, b))
    c = make_splits(synth1000, SplitSpec(50, 100, 8))
    assert a[0].pairs != c[0].pairs


def test_split_needs_enough_ci():
    c = Corpus([pair(i, label="CI" if i < 20 else "CS") for i in range(100)])
    with pytest.raises(CorpusError):
        make_splits(c, SplitSpec(50, 10, 0))
    with pytest.raises(CorpusError):
        make_splits(c, SplitSpec(10, 95, 0))


def test_manifest_round_trip(tmp_path, synth1000):
    parts = make_splits(synth1000, SplitSpec(50, 100, 7))
    write_split_manifest(tmp_path / "m.tsv", *parts)
    again = apply_split_manifest(synth1000, read_split_manifest(tmp_path / "m.tsv"))
    assert all(x.pairs == y.pairs for x, y in zip(parts, again))


# -- statistics ----------------------------------------------------------------------

def test_corpus_stats():
    c = Corpus([pair(1, lyric="a b c a", annotation="x"), pair(2, lyric="a b c a b c", annotation="x y")])
    s = corpus_stats(c)
    assert s.n_pairs == 2
    assert s.mean_lyric_tokens == 5.0
    assert s.mean_annotation_tokens == 1.5
    assert s.vocab_lyrics == 3
    assert s.vocab_annotations == 2


def test_ci_fraction():
    c = Corpus([pair(i, label="CI" if i < 348 else "CS") for i in range(1000)])
    assert estimate_ci_fraction(c) == 0.348
    assert estimate_ci_fraction(Corpus([pair(i, label="CI") for i in range(4)])) == 1.0
    assert estimate_ci_fraction(Corpus([pair(i, label="CI" if i == 0 else "CS") for i in range(4)])) == 0.25
    with pytest.raises(CorpusError):
        estimate_ci_fraction(Corpus([pair(1)]))
    with pytest.raises(CorpusError):
        estimate_ci_fraction(Corpus())


# -- properties ------------------------------------------------------------------------

sentences = st.lists(st.sampled_from(["He is rich.", "Money talks!", "Why?", "Dr. Dre is here.",
                                      "http://x.com", "la vie est belle", "see http://y.com now"]),
                     min_size=1, max_size=4)
corpora = st.lists(st.tuples(sentences, st.sampled_from(["CI", "CS"])), max_size=25).map(
    lambda rows: Corpus([pair(i, lyric=f"lyric {i % 5}", annotation=" ".join(s), label=lab)
                         for i, (s, lab) in enumerate(rows)]))


@settings(max_examples=50, deadline=None)
@given(corpora)
def test_filters_never_mutate(c):
    original = set(c.pairs)
    for out in (strip_link_only(c), filter_english(c)):
        assert set(out.pairs) <= original


@settings(max_examples=50, deadline=None)
@given(corpora)
def test_expansion_conserves_lyrics(c):
    out = expand_sentences(c)
    assert {p.lyric for p in out} <= {p.lyric for p in c}
    assert len(out) == sum(len(split_sentences(p.annotation)) for p in c)


@settings(max_examples=50, deadline=None)
@given(corpora, st.integers(0, 2 ** 32), st.data())
def test_splits_partition(c, seed, data):
    n_ci = sum(p.context_label == "CI" for p in c)
    t = data.draw(st.integers(0, n_ci))
    d = data.draw(st.integers(0, len(c) - t))
    parts = make_splits(c, SplitSpec(t, d, seed))
    ids = [p.id for part in parts for p in part]
    assert sorted(ids) == sorted(p.id for p in c)
    assert parts == make_splits(c, SplitSpec(t, d, seed))
