"""Extremal set combinatorics: dominance certification, polynomial packings,
perfect matchings of set families, column aggregation, and the exhaustive
family-size search behind the conjectured bound.

Matching semantics: a collection of sets (repetition allowed) is perfectly
s-matched when pairwise disjoint s-subsets, one per listed set, exist.  The
family-size search asks for the largest family such that no k-element
multiset drawn from it is perfectly (s-t)-matched; repetition matters as
soon as a single member can host two disjoint blocks.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._validation import as_matrix, check_nonnegative_int, check_positive_int
from .core import IndexSet, Subspace
from .exceptions import (
    NoValidQError,
    OverlappingPartsError,
    TooLargeError,
)
from .galois import field_for_order, usable_orders
from . import linprog

_DOMINANT_SET_LIMIT = 20
_MATCH_SIZE_LIMIT = 10_000
_FAMILY_UNIVERSE_LIMIT = 8
_FAMILY_CANDIDATE_LIMIT = 80
_DOMINANCE_TOL = 1e-7


@dataclass(frozen=True)
class SetFamily:
    """A duplicate-free family of size-s subsets of [d]."""

    universe: int
    set_size: int
    members: tuple

    def __post_init__(self):
        seen = set()
        for member in self.members:
            if not isinstance(member, IndexSet):
                raise TypeError("members must be IndexSet instances")
            if member.universe != self.universe:
                raise ValueError("member universe mismatch")
            if len(member) != self.set_size:
                raise ValueError(
                    f"member {member.elements} has size {len(member)}, "
                    f"expected {self.set_size}"
                )
            if member.elements in seen:
                raise ValueError(f"duplicate member {member.elements}")
            seen.add(member.elements)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_text(self) -> str:
        lines = [f"{self.universe} {self.set_size} {len(self.members)}"]
        for member in self.members:
            lines.append(" ".join(str(e) for e in member.elements))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SetFamily":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        d, s, count = (int(x) for x in lines[0].split())
        members = tuple(
            IndexSet(tuple(int(x) for x in ln.split()), d) for ln in lines[1 : count + 1]
        )
        return cls(d, s, members)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SetFamily":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def load_set_list(path):
    """Read the SetFamily text layout but allow repeated sets.

    Matching queries are about lists of sets, where repetition is
    meaningful; families stay duplicate-free.
    """
    lines = [
        ln.strip()
        for ln in Path(path).read_text(encoding="utf-8").splitlines()
        if ln.strip()
    ]
    d, _, count = (int(x) for x in lines[0].split())
    return [
        IndexSet(tuple(int(x) for x in ln.split()), d)
        for ln in lines[1 : count + 1]
    ]


@dataclass(frozen=True)
class DominanceCertificate:
    """Outcome of dominance certification: the best achievable fraction of
    unit l1 mass placed on the queried coordinates, with a witness when the
    set is dominant (mass >= 1/2)."""

    dominant: bool
    witness: np.ndarray | None
    mass_on_set: float


def is_dominant_t1(subspace: Subspace, index_set: IndexSet) -> DominanceCertificate:
    """Certify 1-dominance of a coordinate set by sign-pattern LPs.

    For each sign pattern on the set, maximize the signed mass subject to
    membership in the subspace and unit l1 norm; the set is dominant when the
    best pattern reaches 1/2.
    """
    if len(index_set) > _DOMINANT_SET_LIMIT:
        raise TooLargeError(
            f"dominance certification enumerates 2^|S| sign patterns; "
            f"|S|={len(index_set)} exceeds {_DOMINANT_SET_LIMIT}"
        )
    d = subspace.ambient_dim
    if index_set.universe != d:
        raise ValueError("index set universe must match the ambient dimension")
    idx = index_set.indices0()
    best_mass = 0.0
    best_u = None
    for signs in itertools.product((1.0, -1.0), repeat=len(idx)):
        value, u = _signed_mass_lp(subspace, idx, np.asarray(signs))
        if value > best_mass:
            best_mass, best_u = value, u
    dominant = best_mass >= 0.5 - _DOMINANCE_TOL
    witness = None
    if dominant and best_u is not None:
        witness = best_u / np.sum(np.abs(best_u))
    return DominanceCertificate(dominant, witness, best_mass)


def _signed_mass_lp(subspace: Subspace, idx, signs):
    """max sum_i signs_i u_idx_i  s.t.  u in subspace, ||u||_1 <= 1.

    Variables (z, w, p, q, r): u = basis z, |u| <= w entrywise via slacks
    p, q >= 0, and sum w + r = 1 with r >= 0.
    """
    basis = subspace.basis
    d, k = basis.shape
    n = k + 3 * d + 1
    eye = np.eye(d)
    zero = np.zeros((d, d))
    rows_upper = np.hstack([basis, -eye, eye, zero, np.zeros((d, 1))])
    rows_lower = np.hstack([-basis, -eye, zero, eye, np.zeros((d, 1))])
    row_norm = np.zeros((1, n))
    row_norm[0, k : k + d] = 1.0
    row_norm[0, -1] = 1.0
    eq = np.vstack([rows_upper, rows_lower, row_norm])
    rhs = np.concatenate([np.zeros(2 * d), [1.0]])
    c = np.zeros(n)
    c[:k] = -(basis[idx].T @ signs)  # maximize => minimize the negation
    lower = np.concatenate([np.full(k, -np.inf), np.zeros(3 * d + 1)])
    upper = np.full(n, np.inf)
    solution = linprog.solve(linprog.LinearProgram(c, eq, rhs, lower, upper))
    if solution.status is not linprog.LpStatus.OPTIMAL:
        raise AssertionError(f"dominance LP reported {solution.status}")
    z = solution.point[:k]
    return -solution.objective_value, basis @ z


def dominance_mass_lower_bound(
    subspace: Subspace, index_set: IndexSet, t: float
) -> float:
    """Heuristic lower bound on the achievable t-dominance mass of a set.

    Exact certification for t > 1 is non-convex (the entry-size indicator),
    so this evaluates the t-level mass of the best t=1 witness: the sum of
    its entries on the set that are at most 1/t in magnitude.  A value of at
    least 1/2 certifies dominance; below 1/2 nothing is concluded.
    """
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    certificate = is_dominant_t1(subspace, index_set)
    if certificate.witness is None:
        return 0.0
    entries = np.abs(certificate.witness[index_set.indices0()])
    return float(np.sum(entries[entries <= 1.0 / t + 1e-12]))


def axis_dominance(k: int, t: float, index_set: IndexSet) -> bool:
    """Dominance rule for the span of the first k coordinate directions:
    a set is t-dominant iff it hits at least t/2 of the first k coordinates
    (valid for t <= k)."""
    check_positive_int(k, "k")
    if not 0 < t <= k:
        raise ValueError(f"rule is valid for 0 < t <= k, got t={t}, k={k}")
    hits = sum(1 for e in index_set.elements if e <= k)
    return hits >= t / 2.0


def aggregate_columns(matrix, parts) -> np.ndarray:
    """Sign-then-sum column aggregation.

    Part j is owned by row j: each column l in part j is negated when the
    owning row's entry is negative, and the j-th output column is the sum of
    the (possibly negated) columns of part j.  Result is square with one
    column per part.
    """
    A = as_matrix(matrix, "matrix")
    rows, d = A.shape
    if len(parts) != rows:
        raise ValueError(
            f"need one part per row: {rows} rows, {len(parts)} parts"
        )
    seen: set[int] = set()
    for part in parts:
        for e in part.elements:
            if e in seen:
                raise OverlappingPartsError(f"column {e} appears in two parts")
            seen.add(e)
        if part.elements and part.elements[-1] > d:
            raise ValueError("part element outside the column range")
    out = np.zeros((rows, rows))
    for j, part in enumerate(parts):
        idx = part.indices0()
        signs = np.where(A[j, idx] >= 0, 1.0, -1.0)
        out[:, j] = A[:, idx] @ signs
    return out


# ---------------------------------------------------------------------------
# packings


def build_packing(d: int, s: int, delta: int) -> SetFamily:
    """The polynomial packing: q^delta size-s subsets of [d] with pairwise
    intersections below delta.

    Uses the largest supported field order q with s <= q and s*q <= d; the
    set for coefficient vector a is {(i, p_a(x_i))} embedded into [d] by
    (i, y) -> (i-1) q + index(y) + 1.
    """
    check_positive_int(d, "d")
    check_positive_int(s, "s")
    check_positive_int(delta, "delta")
    if delta > s:
        raise ValueError(f"need delta <= s, got delta={delta}, s={s}")
    admissible = [q for q in usable_orders(d // s if s else 0) if q >= s]
    if not admissible:
        raise NoValidQError(
            f"no supported field order q with s <= q <= d/s for d={d}, s={s}"
        )
    q = admissible[-1]
    field = field_for_order(q)
    points = list(field.elements())[:s]
    members = []
    for coeffs in itertools.product(field.elements(), repeat=delta):
        elems = []
        for i, x in enumerate(points):
            y = field.poly_eval(coeffs, x)
            elems.append(i * q + y + 1)
        members.append(IndexSet(tuple(sorted(elems)), d))
    return SetFamily(d, s, tuple(members))


def verify_packing(family: SetFamily, delta: int) -> bool:
    """True iff every pairwise intersection has size at most delta - 1,
    counted exactly by a sorted merge."""
    check_positive_int(delta, "delta")
    members = [m.elements for m in family.members]
    for a, b in itertools.combinations(members, 2):
        if _sorted_intersection_size(a, b) > delta - 1:
            return False
    return True


def _sorted_intersection_size(a, b) -> int:
    i = j = count = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            count += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return count


# ---------------------------------------------------------------------------
# perfect matchings


def has_perfect_matching(sets, block_size: int):
    """Decide whether the listed sets (repetition allowed) admit pairwise
    disjoint size-``block_size`` sub-selections, one per set.

    Each set is duplicated into ``block_size`` left vertices and a maximum
    bipartite matching is computed (Hopcroft-Karp); the matching is perfect
    exactly when every duplicate is saturated.  Returns ``(flag, blocks)``
    where ``blocks`` lists the chosen sub-selections when the flag is True.
    """
    check_positive_int(block_size, "block_size")
    sets = list(sets)
    n = len(sets)
    if n == 0:
        return True, []
    if n * block_size > _MATCH_SIZE_LIMIT:
        raise TooLargeError(
            f"matching instance size {n * block_size} exceeds {_MATCH_SIZE_LIMIT}"
        )
    adjacency = []
    for member in sets:
        if len(member) < block_size:
            return False, None
        for _ in range(block_size):
            adjacency.append(tuple(member.elements))
    match_size, left_match = _hopcroft_karp(adjacency)
    if match_size < n * block_size:
        return False, None
    blocks = []
    for i, member in enumerate(sets):
        chosen = sorted(
            left_match[i * block_size + copy] for copy in range(block_size)
        )
        blocks.append(IndexSet(tuple(chosen), member.universe))
    return True, blocks


def _hopcroft_karp(adjacency):
    """Maximum matching of a bipartite graph given as left adjacency lists."""
    n_left = len(adjacency)
    left_match = [None] * n_left
    right_match: dict = {}
    INF = float("inf")

    def bfs():
        dist = {}
        queue = deque()
        for u in range(n_left):
            if left_match[u] is None:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = right_match.get(v)
                if w is None:
                    found = True
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found, dist

    def dfs(u, dist):
        for v in adjacency[u]:
            w = right_match.get(v)
            if w is None or (dist.get(w) == dist[u] + 1 and dfs(w, dist)):
                left_match[u] = v
                right_match[v] = u
                return True
        dist[u] = INF
        return False

    size = 0
    while True:
        found, dist = bfs()
        if not found:
            break
        for u in range(n_left):
            if left_match[u] is None and dfs(u, dist):
                size += 1
    return size, left_match


# ---------------------------------------------------------------------------
# the family-size search


def conjectured_family_bounds(d: int, s: int, k: int, t: int):
    """Size of the best prefix-quota family and the closed-form relaxation.

    The i-th construction keeps the sets meeting quota t+i inside the prefix
    [ik-1]; its size is sum_{j>=t+i} C(ik-1, j) C(d-ik+1, s-j).  The
    closed form is (e k s / d)^(t+1) C(d, s).
    """
    check_positive_int(d, "d")
    check_positive_int(s, "s")
    check_positive_int(k, "k")
    check_nonnegative_int(t, "t")
    if s > d:
        raise ValueError("need s <= d")
    exact = 0
    for i in range(1, s - t + 1):
        prefix = min(i * k - 1, d)
        size = sum(
            math.comb(prefix, j) * math.comb(d - prefix, s - j)
            for j in range(t + i, s + 1)
        )
        exact = max(exact, size)
    closed = (math.e * k * s / d) ** (t + 1) * math.comb(d, s)
    return exact, closed


def prefix_quota_family(d: int, s: int, k: int, t: int, i: int) -> SetFamily:
    """The i-th extremal candidate: all size-s sets with at least t+i
    elements inside the prefix [ik-1]."""
    prefix = min(i * k - 1, d)
    members = tuple(
        IndexSet(combo, d)
        for combo in itertools.combinations(range(1, d + 1), s)
        if sum(1 for e in combo if e <= prefix) >= t + i
    )
    return SetFamily(d, s, members)


def max_family_no_matchable(d: int, s: int, k: int, t: int):
    """Exact maximum size of a family of size-s subsets of [d] from which no
    k-element multiset is perfectly (s-t)-matchable, with a witness family.

    Branch and bound over lexicographic candidates, seeded with the best
    prefix-quota construction; feasibility of each partial family is decided
    by an exact block-assignment search over element bitmasks (equivalent to
    exhausting multisets against the matching oracle, and cross-checked
    against it in the tests).
    """
    check_positive_int(d, "d")
    check_positive_int(s, "s")
    check_positive_int(k, "k")
    check_nonnegative_int(t, "t")
    if s > d:
        raise ValueError("need s <= d")
    if t >= s:
        raise ValueError("need t < s")
    if d > _FAMILY_UNIVERSE_LIMIT or math.comb(d, s) > _FAMILY_CANDIDATE_LIMIT:
        raise TooLargeError(
            f"family search limited to d <= {_FAMILY_UNIVERSE_LIMIT} and "
            f"C(d,s) <= {_FAMILY_CANDIDATE_LIMIT}"
        )
    block = s - t
    combos = list(itertools.combinations(range(d), s))
    masks = [_mask(c) for c in combos]
    n_c = len(masks)
    full = (1 << d) - 1

    counter = _BlockCounter(block, cap=k)

    # the whole candidate set may already be valid (constraint vacuous)
    if counter.max_copies(masks, full) < k:
        family = _family_from_masks(d, s, masks)
        return n_c, family

    best_masks = _best_seed(d, s, k, t, counter, full)
    best_size = len(best_masks)

    chosen: list[int] = []

    def extend(start: int):
        nonlocal best_size, best_masks
        for p in range(start, n_c):
            if len(chosen) + (n_c - p) <= best_size:
                return
            candidate = masks[p]
            chosen.append(candidate)
            if counter.max_copies(chosen, full) < k:
                if len(chosen) > best_size:
                    best_size = len(chosen)
                    best_masks = list(chosen)
                extend(p + 1)
            chosen.pop()

    extend(0)
    return best_size, _family_from_masks(d, s, best_masks)


def _best_seed(d, s, k, t, counter, full):
    best: list[int] = []
    for i in range(1, s - t + 1):
        family = prefix_quota_family(d, s, k, t, i)
        seed = [_mask(tuple(e - 1 for e in m.elements)) for m in family.members]
        if len(seed) > len(best) and counter.max_copies(seed, full) < k:
            best = seed
    return best


def _mask(zero_based) -> int:
    m = 0
    for e in zero_based:
        m |= 1 << e
    return m


def _family_from_masks(d, s, masks) -> SetFamily:
    members = tuple(
        IndexSet(tuple(i + 1 for i in range(d) if mask >> i & 1), d)
        for mask in sorted(masks)
    )
    return SetFamily(d, s, members)


@lru_cache(maxsize=None)
def _popcount_subsets(mask: int, size: int):
    """All subsets of ``mask`` with the given popcount, as masks."""
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    return tuple(
        sum(combo) for combo in itertools.combinations(bits, size)
    )


class _BlockCounter:
    """Max number of pairwise-disjoint blocks placeable into listed sets,
    one block lives inside one set, each set usable any number of times."""

    def __init__(self, block: int, cap: int):
        self.block = block
        self.cap = cap

    def max_copies(self, masks, avail: int) -> int:
        self._memo: dict = {}
        self._masks = tuple(masks)
        return self._search(0, avail)

    def _search(self, idx: int, avail: int) -> int:
        if idx >= len(self._masks):
            return 0
        key = (idx, avail)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        best = self._search(idx + 1, avail)
        if best < self.cap:
            usable = self._masks[idx] & avail
            if bin(usable).count("1") >= self.block:
                for sub in _popcount_subsets(usable, self.block):
                    got = 1 + self._search(idx, avail & ~sub)
                    if got > best:
                        best = got
                        if best >= self.cap:
                            break
        self._memo[key] = best
        return best
