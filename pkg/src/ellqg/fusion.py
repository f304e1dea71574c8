"""Fusion rules for sl2 and for U_q(sl2) at q = exp(2 pi i / N), shift numbers, vanishing patterns.

Everything here is exact integer arithmetic. Paths are cyclic and 1-based in
the docs: the ordinary rules use triples (a_{j-1}, a_j, L_j) with a_0 = a_n,
the modified rules use (a_j, a_{j+1}, L_j) with a_{n+1} = a_1.
"""

from __future__ import annotations

from itertools import accumulate


def fusion_triple_sl2(a: int, b: int, c: int) -> bool:
    """L_c sits inside L_a (x) L_b."""
    if min(a, b, c) < 0:
        return False
    d = a - b
    return -c <= d <= c and (d - c) % 2 == 0 and c <= a + b


def fusion_triple_uq(a: int, b: int, c: int, N: int) -> bool:
    """Truncated rule at q = exp(2 pi i / N): sl2 rule, all labels in [0, N-2], a+b <= 2N-c-4."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if not fusion_triple_sl2(a, b, c):
        return False
    if max(a, b, c) > N - 2:
        return False
    return a + b <= 2 * N - c - 4


def _triples(a, lambdas, modified):
    n = len(a)
    if len(lambdas) != n:
        raise ValueError("path and weights differ in length")
    for j in range(n):
        if modified:
            yield a[j], a[(j + 1) % n], lambdas[j]
        else:
            yield a[j - 1], a[j], lambdas[j]


def fusion_path(a, lambdas) -> bool:
    return all(x >= 0 for x in a) and all(fusion_triple_sl2(*t) for t in _triples(a, lambdas, False))


def modified_fusion_path(a, lambdas) -> bool:
    return all(x >= 0 for x in a) and all(fusion_triple_sl2(*t) for t in _triples(a, lambdas, True))


def uq_fusion_path(a, lambdas, N: int) -> bool:
    return all(x >= 0 for x in a) and all(fusion_triple_uq(*t, N) for t in _triples(a, lambdas, False))


def uq_modified_fusion_path(a, lambdas, N: int) -> bool:
    return all(x >= 0 for x in a) and all(fusion_triple_uq(*t, N) for t in _triples(a, lambdas, True))


def weight_of_index(M, lambdas) -> tuple:
    """w_j = L_j - 2 m_j."""
    return tuple(int(L) - 2 * int(m) for L, m in zip(lambdas, M))


def dual_index(M, lambdas) -> tuple:
    """s(M) = (L_1 - m_1, ..., L_n - m_n), the index of weight -w_M."""
    return tuple(int(L) - int(m) for L, m in zip(lambdas, M))


def is_weight_vector(w, lambdas) -> bool:
    return sum(w) == 0 and all(-L <= x <= L and (x - L) % 2 == 0 for x, L in zip(w, lambdas))


def prefix_sums(w) -> tuple:
    """Sigma^j = w_1 + ... + w_j."""
    return tuple(accumulate(w))


def suffix_sums(w) -> tuple:
    """Tilde Sigma^j = w_j + ... + w_n."""
    return tuple(accumulate(reversed(w)))[::-1]


def shift_number(w, lambdas, modified: bool = False) -> int:
    """Least k >= 0 with (Sigma^j + k)_j fusion-admissible.

    With ``modified`` the suffix sums and the modified rules are used instead.
    Admissibility is monotone in k, and at k = sum(lambdas) every triple is
    admissible, so the scan is bounded.
    """
    if not is_weight_vector(w, lambdas):
        raise ValueError(f"{w} is not a weight vector for {lambdas}")
    sig = suffix_sums(w) if modified else prefix_sums(w)
    ok = modified_fusion_path if modified else fusion_path
    bound = sum(lambdas) + max((abs(s) for s in sig), default=0) + 1
    for k in range(bound + 1):
        if ok([s + k for s in sig], lambdas):
            return k
    raise AssertionError("no admissible shift found")  # unreachable for weight vectors


def shift_number_closed(w, lambdas) -> int:
    """Shift number from the triple inequalities, without scanning.

    For a_j = Sigma^j + k the weight steps are fixed; only a_j >= 0 and
    L_j <= a_{j-1} + a_j bound k from below.
    """
    sig = prefix_sums(w)
    n = len(sig)
    k = max(-min(sig), 0)
    for j in range(n):
        need = lambdas[j] - sig[j - 1] - sig[j]
        k = max(k, -(-need // 2))
    return k


def vanishing_path(M, lambdas, k: int, modified: bool = False) -> tuple:
    """Path whose admissibility allows A psi_M(2 eta k) != 0.

    k >= 0 gives (-S^j + k - 1)_j, k < 0 gives (S^j + |k| - 1)_j, with S the
    prefix sums (suffix sums when ``modified``) of w_M.
    """
    w = weight_of_index(M, lambdas)
    sig = suffix_sums(w) if modified else prefix_sums(w)
    if k >= 0:
        return tuple(-s + k - 1 for s in sig)
    return tuple(s - k - 1 for s in sig)


def vanishing_support(M, lambdas, kind: str = "ordinary", k: int = 0, N: int | None = None) -> bool:
    """True if A psi_M(2 eta k) is forced to vanish.

    ``kind`` is "ordinary" (prefix sums, ordinary rules) or "modified"
    (suffix sums, modified rules). With N the U_q rules at q = exp(2 pi i/N)
    are used and k is read modulo N.
    """
    if kind not in ("ordinary", "modified"):
        raise ValueError(f"unknown kind {kind}")
    modified = kind == "modified"
    if N is not None:
        k = k % N
        path = vanishing_path(M, lambdas, k, modified)
        ok = uq_modified_fusion_path if modified else uq_fusion_path
        return not ok(path, lambdas, N)
    path = vanishing_path(M, lambdas, k, modified)
    ok = modified_fusion_path if modified else fusion_path
    return not ok(path, lambdas)


def forced_interval(M, lambdas) -> tuple:
    """[-k(w_M), k(-w_M)]: the k with a forced relation psi_M(2 eta k) = psi_{s(M)}(-2 eta k)."""
    w = weight_of_index(M, lambdas)
    return -shift_number(w, lambdas), shift_number(tuple(-x for x in w), lambdas)


def quantum_window(M, lambdas, N: int) -> range:
    """k in [0, N-1] with k(-w_M) < k < N - k(w_M): relations not forced at the root of unity."""
    w = weight_of_index(M, lambdas)
    lo = shift_number(tuple(-x for x in w), lambdas)
    hi = N - shift_number(w, lambdas)
    return range(max(lo + 1, 0), min(hi, N))
