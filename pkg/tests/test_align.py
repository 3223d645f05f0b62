from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lyricbench.align import (NULL, Alignment, TranslationTable, align_corpus, log_likelihood,
                              symmetrize, train_model1, viterbi_align)

LA_PAIRS = [("la maison".split(), "the house".split()), (["la"], ["the"])]


def model1_exact(pairs, iterations, use_null=False):
    """Textbook Model 1 EM in exact rational arithmetic (no probability floor)."""
    def srcs(s):
        return ([NULL] if use_null else []) + list(s)
    cooc = {}
    for s, e in pairs:
        for f in srcs(s):
            cooc.setdefault(f, set()).update(e)
    t = {f: {w: Fraction(1, len(es)) for w in es} for f, es in cooc.items()}
    for _ in range(iterations):
        counts = {f: {w: Fraction(0) for w in t[f]} for f in t}
        for s, e in pairs:
            for w in e:
                z = sum(t[f][w] for f in srcs(s))
                for f in srcs(s):
                    counts[f][w] += t[f][w] / z
        t = {f: {w: c / sum(row.values()) for w, c in row.items()} for f, row in counts.items()}
    return t


def test_hand_stepped_iterations():
    one = model1_exact(LA_PAIRS, 1)
    two = model1_exact(LA_PAIRS, 2)
    assert one["la"]["the"] == Fraction(3, 4)
    assert one["maison"]["house"] == Fraction(1, 2)
    assert two["la"]["the"] == Fraction(24, 29)
    for k, exact in ((1, one), (2, two)):
        table = train_model1(LA_PAIRS, k, use_null=False)
        for f, row in exact.items():
            for w, p in row.items():
                assert table.prob(f, w) == pytest.approx(float(p), abs=1e-12)


def test_la_maison_converges():
    table = train_model1(LA_PAIRS, 20, use_null=False)
    assert table.prob("la", "the") >= 0.9
    assert table.prob("maison", "house") >= 0.9


def test_log_likelihood_non_decreasing():
    for use_null in (False, True):
        table = train_model1(LA_PAIRS, 20, use_null=use_null)
        ll = table.log_likelihoods
        assert len(ll) == 21
        assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))


def test_history_matches_recomputed_likelihood():
    table = train_model1(LA_PAIRS, 3, use_null=True)
    assert table.log_likelihoods[-1] == pytest.approx(log_likelihood(table.t, LA_PAIRS, True), abs=1e-12)


def test_forced_mass():
    table = train_model1([(["a"], ["x"])], 1, use_null=False)
    assert table.prob("a", "x") == 1.0


def test_symmetric_fixed_point():
    for k in (1, 2, 5):
        table = train_model1([("a b".split(), "x y".split())], k, use_null=False)
        for f in "ab":
            for w in "xy":
                assert table.prob(f, w) == 0.5


def test_null_option():
    table = train_model1(LA_PAIRS, 5, use_null=True)
    assert NULL in table
    row = table.t[NULL]
    assert sum(row.values()) == pytest.approx(1.0, abs=1e-12)


def test_bad_arguments():
    with pytest.raises(ValueError):
        train_model1([], 5)
    with pytest.raises(ValueError):
        train_model1(LA_PAIRS, 0)


def test_viterbi_after_training():
    table = train_model1(LA_PAIRS, 20, use_null=False)
    a = viterbi_align(table, "la maison".split(), "the house".split(), use_null=False)
    assert a.links == {(0, 0), (1, 1)}
    assert viterbi_align(table, ["la"], ["zzz"]).links == frozenset()
    assert viterbi_align(table, ["la"], []).links == frozenset()


def test_viterbi_ties_go_left():
    table = TranslationTable({"a": {"x": 0.5}, "b": {"x": 0.5}})
    assert viterbi_align(table, ["a", "b"], ["x"], use_null=False).links == {(0, 0)}


def test_table_dump_load(tmp_path):
    table = train_model1(LA_PAIRS, 3, use_null=True)
    table.dump(tmp_path / "t.tsv", min_prob=0.0)
    again = TranslationTable.load(tmp_path / "t.tsv")
    assert again.t == table.t


def A(links, n=3, m=3):
    return Alignment(frozenset(links), n, m)


def test_symmetrize_identity():
    a = A({(0, 0), (1, 2), (2, 1)})
    assert symmetrize(a, a) == a


def test_symmetrize_grows_diagonal():
    out = symmetrize(A({(0, 0)}, 2, 2), A({(0, 0), (1, 1)}, 2, 2))
    assert out.links == {(0, 0), (1, 1)}


def test_symmetrize_keeps_intersection_when_words_covered():
    # (0, 1) and (1, 0) only join words that the intersection already covers
    fwd = A({(0, 0), (1, 1), (0, 1)}, 2, 2)
    rev = A({(0, 0), (1, 1), (1, 0)}, 2, 2)
    assert symmetrize(fwd, rev).links == {(0, 0), (1, 1)}


def test_symmetrize_final_and_adds_uncovered_pairs():
    # (2, 2) is not adjacent to the intersection but links two uncovered words
    fwd = A({(0, 0), (2, 2)})
    rev = A({(0, 0)})
    assert symmetrize(fwd, rev).links == {(0, 0), (2, 2)}


def test_symmetrize_length_mismatch():
    with pytest.raises(ValueError):
        symmetrize(A(set(), 2, 2), A(set(), 2, 3))


def test_alignment_bounds():
    with pytest.raises(ValueError):
        A({(3, 0)})


links = st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=10)


@settings(max_examples=200, deadline=None)
@given(links, links)
def test_symmetrize_between_intersection_and_union(f, r):
    fwd, rev = A(f, 5, 5), A(r, 5, 5)
    out = symmetrize(fwd, rev).links
    assert (f & r) <= out <= (f | r)


words = st.lists(st.sampled_from("abcde"), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(words, st.lists(st.sampled_from("vwxyz"), min_size=1, max_size=4)),
                min_size=1, max_size=5), st.booleans())
def test_em_properties(pairs, use_null):
    table = train_model1(pairs, 6, use_null=use_null)
    for row in table.t.values():
        assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)
    ll = table.log_likelihoods
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    again = train_model1(pairs, 6, use_null=use_null)
    assert again.t == table.t


def test_align_corpus_shapes():
    fwd = train_model1(LA_PAIRS, 10, use_null=False)
    rev = train_model1([(e, f) for f, e in LA_PAIRS], 10, use_null=False)
    out = align_corpus(LA_PAIRS, fwd, rev, use_null=False)
    assert [(a.src_len, a.tgt_len) for a in out] == [(2, 2), (1, 1)]
    assert out[0].links == {(0, 0), (1, 1)}
    assert out[1].links == {(0, 0)}


def test_null_ties_leave_word_unlinked():
    # NULL and "la" occur in exactly the same sentences, so they tie for "the"
    fwd = train_model1(LA_PAIRS, 10, use_null=True)
    assert fwd.prob(NULL, "the") == pytest.approx(fwd.prob("la", "the"))
    assert viterbi_align(fwd, ["la"], ["the"], use_null=True).links == frozenset()
