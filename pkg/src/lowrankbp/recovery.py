"""Greedy robust subspace recovery from coordinate-corrupted samples.

``recover_subspace`` walks the coordinates in order, keeping a pivot set J of
coordinates that are independent under the hidden covariance.  For each new
coordinate it pair-differences the samples (cancelling the mean), restricts
to ``J + {i}`` and asks a consensus regressor whether the new coordinate is
an exact linear function of the pivots.  Dependent coordinates contribute a
sparse complement vector; the recovered span is the orthogonal complement of
those vectors, augmented with an anchor point obtained by majority votes.

The consensus regressor replaces a full robust-regression routine with
exact-fit RANSAC: corruptions are exact-sparse and the clean relation is
noiseless, so a single all-clean sample of rows already fits it perfectly and
a strict majority of rows certifies the fit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix
from .core import IndexSet, Subspace, orthonormalize
from .exceptions import (
    ConsensusFailureError,
    DegenerateSampleError,
    EmptyInputError,
)

_CONSENSUS_SEED = 0x5EEDED
_MATCH_TOL = 1e-6
_CONDITION_LIMIT = 1e8
_DEFAULT_ITERATIONS = 200


class RegressVerdict(enum.Enum):
    FULL_RANK = "full-rank"
    DEPENDENT = "dependent"


@dataclass(frozen=True)
class RegressOutcome:
    """Verdict of the consensus regression on an m x (j+1) sample block.

    When DEPENDENT, ``weights`` holds c with last-column = c . prefix on the
    consensus rows, and ``consensus_fraction`` > 1/2.
    """

    verdict: RegressVerdict
    weights: np.ndarray | None
    consensus_fraction: float


@dataclass(frozen=True)
class SubspaceRecoveryResult:
    pivot_set: IndexSet
    complement_vectors: list
    recovered: Subspace
    anchor: np.ndarray


def robust_median(values) -> float:
    """Lower median: the ceil(n/2)-th order statistic."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInputError("robust_median needs at least one value")
    pos = (arr.size + 1) // 2 - 1
    return float(np.partition(arr, pos)[pos])


def robust_rank_and_regress(
    samples,
    eps: float = 0.2,
    iterations: int = _DEFAULT_ITERATIONS,
    tol: float = _MATCH_TOL,
) -> RegressOutcome:
    """Decide whether the last column is an exact linear function of the
    others on a strict majority of rows, and recover the weights if so.

    RANSAC with exact-fit consensus: repeatedly solve a square system from j
    sampled rows and accept when a strict majority of all rows agrees to
    ``tol``.  A DEPENDENT verdict additionally requires the consensus rows'
    prefix second-moment matrix to be well-conditioned.
    """
    block = as_matrix(samples, "samples")
    m, cols = block.shape
    j = cols - 1
    if not 0 <= eps < 0.25:
        raise ValueError(f"need 0 <= eps < 1/4, got {eps}")
    if m < j + 1:
        raise DegenerateSampleError(f"need at least {j + 1} rows, got {m}")

    prefix = block[:, :j]
    last = block[:, j]
    if j == 0:
        agree = np.abs(last) <= tol
        fraction = float(np.mean(agree))
        if fraction > 0.5:
            return RegressOutcome(RegressVerdict.DEPENDENT, np.zeros(0), fraction)
        return RegressOutcome(RegressVerdict.FULL_RANK, None, fraction)

    rng = np.random.default_rng(_CONSENSUS_SEED)
    best_fraction = 0.0
    solved_any = False
    for _ in range(iterations):
        pick = rng.choice(m, size=j, replace=False)
        square = prefix[pick]
        try:
            weights = np.linalg.solve(square, last[pick])
        except np.linalg.LinAlgError:
            continue
        solved_any = True
        agree = np.abs(prefix @ weights - last) <= tol
        fraction = float(np.mean(agree))
        best_fraction = max(best_fraction, fraction)
        if fraction > 0.5:
            _check_conditioning(prefix[agree])
            return RegressOutcome(RegressVerdict.DEPENDENT, weights, fraction)
    if not solved_any:
        raise DegenerateSampleError("every sampled square system was singular")
    return RegressOutcome(RegressVerdict.FULL_RANK, None, best_fraction)


def _check_conditioning(consensus_prefix: np.ndarray) -> None:
    # guard for the assumption that every invertible principal submatrix of
    # the covariance is reasonably well-conditioned
    if consensus_prefix.shape[1] == 0:
        return
    moment = consensus_prefix.T @ consensus_prefix / max(1, len(consensus_prefix))
    cond = float(np.linalg.cond(moment))
    if not np.isfinite(cond) or cond >= _CONDITION_LIMIT:
        raise ConsensusFailureError(
            f"consensus second-moment matrix has condition number {cond:.3g} "
            f">= {_CONDITION_LIMIT:.0e}; dependent verdict rejected"
        )


def majority_value(values, granularity: float = _MATCH_TOL) -> float:
    """The value carried by a strict majority of the inputs.

    Values are grouped by gaps larger than ``granularity``; clean inputs are
    exactly equal up to floating-point noise, corrupted ones scatter.
    """
    arr = np.sort(np.asarray(values, dtype=float).ravel())
    if arr.size == 0:
        raise EmptyInputError("majority_value needs at least one value")
    gaps = np.flatnonzero(np.diff(arr) > granularity)
    starts = np.concatenate([[0], gaps + 1])
    ends = np.concatenate([gaps + 1, [arr.size]])
    sizes = ends - starts
    top = int(np.argmax(sizes))
    if sizes[top] * 2 <= arr.size:
        raise ConsensusFailureError(
            f"largest value cluster holds {sizes[top]}/{arr.size} samples; "
            "no strict majority"
        )
    return float(np.mean(arr[starts[top] : ends[top]]))


def recover_subspace(
    corrupted,
    iterations: int = _DEFAULT_ITERATIONS,
    tol: float = _MATCH_TOL,
) -> SubspaceRecoveryResult:
    """Recover the span of the noise directions and the mean from corrupted
    samples (pair differences for pivots, majority votes for the anchor)."""
    data = as_matrix(corrupted, "corrupted")
    n, d = data.shape
    if n < 2:
        raise DegenerateSampleError("pair-differencing needs at least 2 points")
    pairs = n // 2
    diffs = data[0 : 2 * pairs : 2] - data[1 : 2 * pairs : 2]

    pivots: list[int] = []
    complements: list[np.ndarray] = []
    complement_cols: list[int] = []
    for i in range(d):
        cols = pivots + [i]
        outcome = robust_rank_and_regress(
            diffs[:, cols], iterations=iterations, tol=tol
        )
        if outcome.verdict is RegressVerdict.FULL_RANK:
            pivots.append(i)
        else:
            vec = np.zeros(d)
            vec[pivots] = outcome.weights
            vec[i] = -1.0
            complements.append(vec)
            complement_cols.append(i)

    if not complements:
        # full-dimensional span: nothing to vote on, anchor is free
        recovered = Subspace(d, np.eye(d))
        return SubspaceRecoveryResult(
            IndexSet(tuple(p + 1 for p in pivots), d), [], recovered, np.zeros(d)
        )

    votes = data @ np.column_stack(complements)
    anchor = np.zeros(d)
    for col, i in enumerate(complement_cols):
        anchor[i] = -majority_value(votes[:, col], granularity=tol)

    comp_matrix = np.vstack(complements)
    span_basis = _null_space(comp_matrix)
    if span_basis.shape[1] != len(pivots):
        raise ConsensusFailureError(
            "complement vectors are numerically rank-deficient; "
            f"expected span dimension {len(pivots)}, got {span_basis.shape[1]}"
        )
    spanning = list(span_basis.T)
    if np.linalg.norm(anchor) > 1e-12:
        spanning.append(anchor)
    if not spanning:
        raise DegenerateSampleError("recovered span is empty; data has no spread")
    recovered = orthonormalize(spanning)
    return SubspaceRecoveryResult(
        IndexSet(tuple(p + 1 for p in pivots), d),
        complements,
        recovered,
        anchor,
    )


def _null_space(matrix: np.ndarray) -> np.ndarray:
    _, svals, vt = np.linalg.svd(matrix, full_matrices=True)
    rank = int(np.sum(svals > 1e-9 * svals[0])) if svals.size else 0
    return vt[rank:].T
