from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellqg.fusion import (
    dual_index,
    forced_interval,
    fusion_path,
    fusion_triple_sl2,
    fusion_triple_uq,
    is_weight_vector,
    modified_fusion_path,
    prefix_sums,
    quantum_window,
    shift_number,
    shift_number_closed,
    suffix_sums,
    uq_fusion_path,
    vanishing_path,
    vanishing_support,
    weight_of_index,
)
from ellqg.weight_functions import compositions


def _clebsch_gordan(a, b):
    # V_a (x) V_b = V_{|a-b|} + V_{|a-b|+2} + ... + V_{a+b}
    return set(range(abs(a - b), a + b + 1, 2))


def _admissible(path, lambdas):
    n = len(path)
    return all(x >= 0 for x in path) and all(
        lambdas[j] in _clebsch_gordan(path[j - 1], path[j]) for j in range(n)
    )


def _all_weights(max_n=4, max_l=3):
    for n in range(1, max_n + 1):
        for lams in product(range(max_l + 1), repeat=n):
            if sum(lams) % 2:
                continue
            for M in compositions(sum(lams) // 2, n, caps=lams):
                yield M, lams


def test_triple_rules_match_clebsch_gordan():
    for a, b, c in product(range(6), repeat=3):
        assert fusion_triple_sl2(a, b, c) == (c in _clebsch_gordan(a, b))


def test_uq_rules_are_truncations():
    for N in range(2, 7):
        for a, b, c in product(range(N + 2), repeat=3):
            if fusion_triple_uq(a, b, c, N):
                assert fusion_triple_sl2(a, b, c) and max(a, b, c) <= N - 2


def test_shift_number_exhaustive():
    count = 0
    for M, lams in _all_weights():
        w = weight_of_index(M, lams)
        sig = prefix_sums(w)
        brute = next(k for k in range(100) if _admissible([s + k for s in sig], lams))
        assert shift_number(w, lams) == brute == shift_number_closed(w, lams)
        count += 1
    assert count > 300


def test_quantum_window_exhaustive():
    for M, lams in _all_weights():
        for N in range(2, 7):
            win = set(quantum_window(M, lams, N))
            for k in range(N):
                assert (k in win) == uq_fusion_path(vanishing_path(M, lams, k), lams, N)


def test_forced_zeros_fill_the_interval():
    for M, lams in _all_weights(4, 3):
        lo, hi = forced_interval(M, lams)
        for k in range(-8, 9):
            assert vanishing_support(M, lams, "ordinary", k) == (lo <= k <= hi)
        assert vanishing_support(M, lams, "modified", 0)


def test_modified_uses_suffix_sums():
    w = (1, -1, 1, -1)
    assert suffix_sums(w) == (0, -1, 0, -1)
    assert prefix_sums(w) == (1, 0, 1, 0)
    assert modified_fusion_path([1, 0, 1, 0], (1, 1, 1, 1)) == fusion_path([0, 1, 0, 1], (1, 1, 1, 1))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.data())
def test_dual_index_negates_weight(lams, data):
    M = [data.draw(st.integers(0, L)) for L in lams]
    w = weight_of_index(M, lams)
    assert weight_of_index(dual_index(M, lams), lams) == tuple(-x for x in w)


def test_rejects_non_weights():
    assert not is_weight_vector((2, 0), (1, 1))
    with pytest.raises(ValueError):
        shift_number((1, 1), (1, 1))
    with pytest.raises(ValueError):
        vanishing_support((0, 1), (1, 1), kind="other")
