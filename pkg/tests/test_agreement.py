import pytest
from hypothesis import assume, given, settings, strategies as st

from lyricbench.agreement import (AgreementError, correlate, fleiss_kappa, load_ratings,
                                  mean_ratings, pearson, rating_matrix, ratings_agreement)


def test_kappa_fixture():
    assert fleiss_kappa([(2, 1), (1, 2)]) == pytest.approx(-1 / 3, abs=1e-4)


def test_kappa_perfect_agreement():
    assert fleiss_kappa([(3, 0), (0, 3)]) == 1.0
    assert fleiss_kappa([(0, 4, 0), (4, 0, 0), (0, 0, 4)]) == 1.0


def test_kappa_errors():
    with pytest.raises(AgreementError, match="degenerate"):
        fleiss_kappa([(3, 0), (3, 0)])
    with pytest.raises(AgreementError):
        fleiss_kappa([(2, 1), (1, 1)])
    with pytest.raises(AgreementError):
        fleiss_kappa([(2, 1)])
    with pytest.raises(AgreementError):
        fleiss_kappa([(1, 0), (0, 1)])
    with pytest.raises(AgreementError):
        fleiss_kappa([(2, -1), (1, 0)])


def test_kappa_textbook_example():
    # the classic 10-item, 14-rater, 5-category table; kappa = 0.210
    table = [
        (0, 0, 0, 0, 14), (0, 2, 6, 4, 2), (0, 0, 3, 5, 6), (0, 3, 9, 2, 0), (2, 2, 8, 1, 1),
        (7, 7, 0, 0, 0), (3, 2, 6, 3, 0), (2, 5, 3, 2, 2), (6, 5, 2, 1, 0), (0, 2, 2, 3, 7),
    ]
    assert fleiss_kappa(table) == pytest.approx(0.20993, abs=1e-5)


def test_pearson_examples():
    assert pearson([1, 2, 3], [1, 3, 2]) == 0.5
    assert pearson([1, 2, 3, 4], [3, 5, 7, 9]) == pytest.approx(1.0, abs=1e-15)
    assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(AgreementError):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(AgreementError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(AgreementError):
        pearson([1], [1])


def test_mean_ratings():
    assert mean_ratings({"a": [3, 4, 5], "b": [2], "c": [1, 2]}) == {"a": 4.0, "b": 2.0, "c": 1.5}
    with pytest.raises(AgreementError):
        mean_ratings({"a": []})


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8), st.integers(2, 6), st.integers(2, 5), st.data())
def test_kappa_range(n_items, n_raters, k, data):
    rows = []
    for _ in range(n_items):
        cuts = sorted(data.draw(st.lists(st.integers(0, n_raters), min_size=k - 1, max_size=k - 1)))
        bounds = [0] + cuts + [n_raters]
        rows.append([b - a for a, b in zip(bounds, bounds[1:])])
    totals = [sum(r[j] for r in rows) for j in range(k)]
    assume(max(totals) < n_items * n_raters)
    kappa = fleiss_kappa(rows)
    assert -1.0 <= kappa <= 1.0
    concentrated = all(max(r) == n_raters for r in rows)
    assert (kappa == pytest.approx(1.0, abs=1e-12)) == concentrated


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=30),
       st.floats(0.01, 100.0), st.floats(-1e3, 1e3))
def test_pearson_affine_invariance(points, a, b):
    x = [p for p, _ in points]
    y = [q for _, q in points]
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    mx = sum(x) / len(x)
    my = sum(y) / len(y)
    # skip numerically degenerate spreads where the shift itself loses the signal
    assume(max(abs(v - mx) for v in x) > 1e-3 and max(abs(v - my) for v in y) > 1e-3)
    r = pearson(x, y)
    assert -1.0 <= r <= 1.0
    assert abs(pearson([a * v + b for v in x], y) - r) <= 1e-12
    assert abs(pearson(x, [a * v + b for v in y]) - r) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=2, max_size=30))
def test_pearson_self_is_one(x):
    assume(len(set(x)) > 1)
    assert pearson(x, x) == 1.0


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_ratings_file(tmp_path):
    f = write(tmp_path / "r.csv",
              "item_id,rater_id,fluency,information\n"
              "1,a,5,4\n1,b,5,2\n1,c,4,2\n"
              "2,a,1,3\n2,b,1,3\n2,c,2,3\n")
    ratings = load_ratings(f)
    assert ratings["fluency"]["1"] == {"a": 5, "b": 5, "c": 4}
    assert rating_matrix(ratings["fluency"]) == [[0, 0, 0, 1, 2], [2, 1, 0, 0, 0]]
    kappas = ratings_agreement(f)
    assert kappas["fluency"] == pytest.approx(fleiss_kappa([[0, 0, 0, 1, 2], [2, 1, 0, 0, 0]]))


def test_ratings_file_errors(tmp_path):
    with pytest.raises(AgreementError, match="line 2"):
        load_ratings(write(tmp_path / "a.csv", "item_id,rater_id,fluency,information\n1,a,6,1\n"))
    with pytest.raises(AgreementError):
        load_ratings(write(tmp_path / "b.csv", "1,a,x,1\n"))
    with pytest.raises(AgreementError):
        load_ratings(write(tmp_path / "c.csv", "1,a,1\n"))
    with pytest.raises(AgreementError, match="duplicate"):
        load_ratings(write(tmp_path / "d.csv", "1,a,1,1\n1,a,2,2\n"))


def test_correlate(tmp_path):
    ratings = write(tmp_path / "r.csv",
                    "1,a,1,2\n1,b,2,2\n2,a,2,3\n2,b,3,3\n3,a,3,1\n3,b,4,1\n")
    scores = write(tmp_path / "s.tsv", "item_id\tbleu\tsari\n1\t10\t5\n2\t20\t3\n3\t30\t1\n")
    result = correlate(ratings, scores)
    assert result[("bleu", "fluency")] == pytest.approx(1.0)
    assert result[("sari", "information")] == pytest.approx(pearson([5, 3, 1], [2, 3, 1]))
