import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsub.objectives import (
    CoverageObjective,
    LinearObjective,
    RestrictedObjective,
    ShiftedObjective,
    TableObjective,
    check_axioms,
    evaluate,
    expected_value,
    marginal_gain,
    objective_from_dict,
    verify_covering_complement_lemma,
    verify_covering_lemma,
)


def brute_expectation(f, marginals):
    """Independent oracle: sum over all 2^n subsets with explicit product weights."""
    n = len(marginals)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        w = np.prod([m if b else 1 - m for m, b in zip(marginals, bits)])
        total += w * f.value(frozenset(i for i, b in enumerate(bits) if b))
    return total


def random_coverage(rng, n, items=8, density=0.35):
    sets = [np.flatnonzero(rng.random(items) < density).tolist() for _ in range(n)]
    return CoverageObjective(sets, rng.uniform(0.5, 3.0, items))


def test_evaluate_examples():
    assert evaluate(LinearObjective([1, 2, 3]), {0, 2}) == 4
    assert evaluate(LinearObjective([1, 2, 3]), {1, 2}) == 5
    assert evaluate(CoverageObjective([[0, 1], [1, 2]]), {0, 1}) == 3
    for f in (LinearObjective([4, 1]), CoverageObjective([[0], [0, 1]])):
        assert evaluate(f, set()) == 0


def test_marginal_gain_examples():
    assert marginal_gain(LinearObjective([1, 2]), set(), 1) == 2
    assert marginal_gain(CoverageObjective([[0, 1], [1]]), {0}, 1) == 0
    t = TableObjective.from_sets(2, {frozenset({0}): 1.0, frozenset({1}): 1.0, frozenset({0, 1}): 1.5})
    assert marginal_gain(t, {0}, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        marginal_gain(LinearObjective([1, 2]), {1}, 1)


def test_axioms_linear_and_coverage():
    assert check_axioms(LinearObjective([0, 2, 5])).ok
    assert check_axioms(CoverageObjective([[0, 1], [1, 2], [3]])).ok


def test_increasing_gain_table_is_not_submodular():
    t = TableObjective.from_sets(2, {frozenset({0}): 0.0, frozenset({1}): 0.0, frozenset({0, 1}): 2.0})
    rep = check_axioms(t)
    assert rep.normalized and rep.monotone and not rep.submodular


def test_axioms_detect_non_monotone_and_unnormalized():
    assert not check_axioms(TableObjective([1.0, 1.0])).normalized
    assert not check_axioms(TableObjective([0.0, 2.0, 1.0, 1.5])).monotone


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        LinearObjective([1, -1])


def test_vectorized_values_match_pointwise():
    rng = np.random.default_rng(0)
    f = random_coverage(rng, 6)
    F = rng.random((50, 6)) < 0.5
    assert np.allclose(f.values(F), [f.value(frozenset(np.flatnonzero(r))) for r in F])


def test_expected_value_matches_oracle():
    rng = np.random.default_rng(1)
    f = random_coverage(rng, 7)
    m = rng.random(7)
    assert expected_value(f, m) == pytest.approx(brute_expectation(f, m), abs=1e-9)


def test_covering_lemmas_examples():
    rng = np.random.default_rng(2)
    lin = LinearObjective(rng.uniform(0, 5, 6))
    assert verify_covering_lemma(lin, np.full(6, 0.3)) == pytest.approx(0.0, abs=1e-9)
    assert verify_covering_complement_lemma(lin, np.full(6, 0.4)) == pytest.approx(0.0, abs=1e-9)
    cov = random_coverage(rng, 8)
    assert verify_covering_lemma(cov, np.full(8, 0.3)) >= -1e-9
    assert verify_covering_complement_lemma(cov, np.full(8, 0.4)) >= -1e-9
    zero = LinearObjective(np.zeros(5))
    assert verify_covering_lemma(zero, np.full(5, 0.5)) == 0.0
    assert verify_covering_complement_lemma(cov, np.zeros(8)) == pytest.approx(0.0, abs=1e-9)


def test_covering_slack_matches_oracle():
    rng = np.random.default_rng(3)
    f = random_coverage(rng, 6)
    m = rng.uniform(0.1, 0.9, 6)
    E = frozenset(range(6))
    want = brute_expectation(f, m) - m.min() * f.value(E)
    assert verify_covering_lemma(f, m) == pytest.approx(want, abs=1e-9)
    comp = lambda S: f.value(E - S)  # noqa: E731
    drop = f.value(E) - brute_expectation(TableObjective.from_function(6, comp), m)
    assert verify_covering_complement_lemma(f, m) == pytest.approx(m.max() * f.value(E) - drop, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 10), q=st.floats(0.0, 1.0))
def test_random_objectives_satisfy_axioms_and_lemmas(seed, n, q):
    rng = np.random.default_rng(seed)
    f = random_coverage(rng, n)
    assert check_axioms(f).ok
    assert check_axioms(LinearObjective(rng.uniform(0, 3, n))).ok
    m = rng.uniform(0, 1, n) * q
    assert verify_covering_lemma(f, m) >= -1e-9
    assert verify_covering_complement_lemma(f, m) >= -1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 8))
def test_restriction_and_shift_preserve_axioms(seed, n):
    rng = np.random.default_rng(seed)
    f = random_coverage(rng, n)
    mask = frozenset(np.flatnonzero(rng.random(n) < 0.5).tolist())
    assert check_axioms(RestrictedObjective(f, mask)).ok
    assert check_axioms(ShiftedObjective(f, mask)).ok


def test_restricted_objective_masks_elements():
    f = RestrictedObjective(LinearObjective([1, 2, 3]), {1, 2})
    assert f.value({0, 1, 2}) == 5


def test_dict_roundtrip():
    f = LinearObjective([1.5, 2.0])
    assert objective_from_dict(f.to_dict()).value({0, 1}) == 3.5
    with pytest.raises(ValueError):
        objective_from_dict({"kind": "nope"})
