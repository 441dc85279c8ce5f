import math

import pytest

import reclink


def test_string_metrics():
    assert math.isclose(reclink.jaro_winkler("MARTHA", "MARHTA"), 0.9611111111111111, abs_tol=1e-12)
    assert reclink.soundex("ROBERT") == "R163"
    assert reclink.damerau_levenshtein("CA", "ABC") == 3
    assert reclink.levenshtein("KITTEN", "SITTING") == 3
    v = reclink.embed_ngram("JOHN DOE")
    assert len(v) == 256
    assert math.isclose(sum(x * x for x in v), 1.0)


def test_dataset_round_trip():
    ds = reclink.dataset(
        [{"record_id": "a1", "first_name": "john", "last_name": "Doe", "birth_date": "1970-01-01", "sex": "M"}],
        "A",
    )
    assert len(ds) == 1
    (r,) = reclink.records(ds)
    assert r["first_name"] == "JOHN"
    assert r["ssn"] is None
    with pytest.raises(reclink.DataError):
        reclink.dataset([{"record_id": "a1", "birth_date": "1971-02-30"}], "A")


def test_scoring_endpoints():
    assert reclink.score_vector(["agree"] * 7) == 1.0
    assert reclink.score_vector(["disagree"] * 7) == 0.0
    assert reclink.score_vector(["missing"] * 7) == 0.5
    with pytest.raises(reclink.ConfigError):
        reclink.score_vector(["maybe"] * 7)


def test_em_returns_trace():
    vectors = [["agree"] * 3] * 50 + [["disagree"] * 3] * 450 + [["agree", "disagree", "disagree"]] * 50
    r = reclink.estimate_em(vectors, m=0.8, u=0.2, prior=0.1)
    assert len(r["m"]) == 3
    trace = r["log_likelihood_trace"]
    assert all(b >= a - 1e-9 * abs(a) for a, b in zip(trace, trace[1:]))


def test_pipeline():
    a, b, truth = reclink.generate_corpus(n_persons=400, seed=7)
    assert len(a) > 0 and len(b) > 0 and truth
    again = reclink.generate_corpus(n_persons=400, seed=7)
    assert reclink.records(again[1]) == reclink.records(b)

    h = reclink.hybrid_block(a, b)
    kept = [(p["left_id"], p["right_id"]) for p in h["auto_matches"] + h["escalated"]]
    assert set(truth) <= set(kept)

    result = reclink.match_cascade(a, b, kept)
    assert len(result["decisions"]) + len(result["queued"]) == len(kept)
    report = reclink.eval_matching(
        [(d["left_id"], d["right_id"], d["verdict"] == "match") for d in result["decisions"]], truth
    )
    assert report["fp"] == 0

    knn = reclink.block_knn(a, b, k=5, tau=0.5)
    assert all(p["score"] > 0.5 for p in knn)
    rows = reclink.sweep(a, b, truth, k=[5, 10], tau=[0.5, 0.75])
    assert len(rows) == 4

    prompt = reclink.render_match_prompt(a, b, truth[0])
    assert "Record 1:" in prompt and "Record 2:" in prompt


def test_metric_arithmetic():
    cands = [(f"A{i}", f"B{i}") for i in range(4250)]
    r = reclink.eval_blocking(cands, [], 1000, 1000, baseline=52917)
    assert abs(r["reduction_vs_baseline"] - 0.9197) < 1e-4
