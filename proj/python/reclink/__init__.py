"""Python bindings for the reclink record linkage core.

Records are plain dicts keyed by column name (record_id, first_name,
middle_name, last_name, birth_date, ssn, sex, address). Pairs are
(left_id, right_id) tuples.
"""

import json as _json

from . import _reclink as _core
from ._reclink import (
    ConfigError,
    DataError,
    Dataset,
    TransportError,
    UnparseableResponse,
    damerau_levenshtein,
    embed_ngram,
    jaro,
    jaro_winkler,
    levenshtein,
    soundex,
)

__version__ = "0.1.0"


def dataset(records, source, lenient=False):
    """Build a Dataset from an iterable of record dicts."""
    lines = "\n".join(_json.dumps(r) for r in records)
    return Dataset.from_jsonl(lines, source, lenient)


def read_dataset(path, source, lenient=False):
    return Dataset.read(str(path), source, lenient)


def records(ds):
    return _json.loads(ds.records_json())


def generate_corpus(n_persons=5000, seed=20210101, **spec):
    """Returns (A, B, truth)."""
    spec_json = _json.dumps(spec) if spec else None
    a, b, truth = _core.generate_corpus(n_persons, seed, spec_json)
    return a, b, [tuple(t) for t in truth]


def _cmp(comparators):
    return None if comparators is None else _json.dumps(comparators)


def score_pair(a, b, pair, comparators=None, lower=0.65, upper=1.0):
    return _json.loads(_core.compare_and_score(a, b, tuple(pair), _cmp(comparators), lower, upper))


def score_vector(outcomes, comparators=None):
    return _core.score_vector(list(outcomes), _cmp(comparators))


def estimate_em(vectors, m=0.9, u=0.1, prior=0.1, tol=1e-8, max_iter=200):
    return _json.loads(_core.estimate_em([list(v) for v in vectors], m, u, prior, tol, max_iter))


def block_rules(a, b):
    return _json.loads(_core.block_rules(a, b))


def block_knn(a, b, k=10, tau=0.75, dim=256, n=3, threads=0):
    return _json.loads(_core.block_knn(a, b, k, tau, dim, n, threads))


def hybrid_block(a, b, lower=0.65, upper=1.0, comparators=None):
    return _json.loads(_core.hybrid_block(a, b, lower, upper, _cmp(comparators)))


def render_match_prompt(a, b, pair):
    return _core.render_match_prompt(a, b, tuple(pair))


def match_cascade(a, b, pairs, lower=0.65, upper=1.0, target="human_queue",
                  llm_url=None, llm_model=None, llm_retries=2, comparators=None):
    return _json.loads(_core.match_cascade(
        a, b, [tuple(p) for p in pairs], lower, upper, target,
        llm_url, llm_model, llm_retries, _cmp(comparators)))


def eval_matching(decisions, truth):
    """decisions: iterable of (left_id, right_id, is_match)."""
    return _json.loads(_core.eval_matching([tuple(d) for d in decisions], [tuple(t) for t in truth]))


def eval_blocking(candidates, truth, n_a, n_b, baseline=None):
    return _json.loads(_core.eval_blocking(
        [tuple(c) for c in candidates], [tuple(t) for t in truth], n_a, n_b, baseline))


def sweep(a, b, truth, k=(), tau=(), threads=0):
    """KNN blocking over a (k, tau) lattice; returns rows as dicts."""
    text = _core.sweep(a, b, [tuple(t) for t in truth], list(k), list(tau), threads)
    header, *rows = text.strip().split("\n")
    keys = header.split(",")
    return [dict(zip(keys, row.split(","))) for row in rows]
