"""Core domain types and subspace algebra shared by every other module.

A :class:`Subspace` is stored as a dense orthonormal basis.  Rank decisions
use a relative singular-value cutoff of ``RANK_TOL``; synthetic data at desk
scale keeps singular gaps far above this.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._validation import as_vector, check_positive_int
from .exceptions import AllZeroError, DimensionMismatchError, EmptyInputError

RANK_TOL = 1e-9
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^d with an orthonormal basis.

    ``basis`` is a d-by-k matrix whose columns are orthonormal.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise DimensionMismatchError("basis must be a 2-D array")
        d, k = basis.shape
        if d != self.ambient_dim:
            raise DimensionMismatchError(
                f"basis has {d} rows but ambient_dim is {self.ambient_dim}"
            )
        if not 1 <= k <= d:
            raise DimensionMismatchError(f"need 1 <= dim <= {d}, got {k}")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(k))) > ORTHO_TOL:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def axis_aligned(cls, ambient_dim: int, dim: int) -> "Subspace":
        """The span of the first ``dim`` coordinate directions."""
        check_positive_int(ambient_dim, "ambient_dim")
        check_positive_int(dim, "dim")
        basis = np.zeros((ambient_dim, dim))
        basis[:dim, :dim] = np.eye(dim)
        return cls(ambient_dim, basis)

    def contains(self, vector, tol: float = 1e-8) -> bool:
        v = as_vector(vector, "vector", self.ambient_dim)
        return float(np.linalg.norm(v - project(self, v))) <= tol * max(
            1.0, float(np.linalg.norm(v))
        )


@dataclass(frozen=True)
class GaussianModel:
    """A rank-k Gaussian N(mean, factor^T factor) on R^d.

    ``factor`` is the k-by-d matrix A with covariance A^T A; ``coord_bound``
    is sqrt(max_i Sigma_ii), the largest per-coordinate standard deviation.
    """

    mean: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        factor = np.asarray(self.factor, dtype=float)
        if factor.ndim != 2:
            raise DimensionMismatchError("factor must be a 2-D array")
        k, d = factor.shape
        if mean.shape[0] != d:
            raise DimensionMismatchError(
                f"mean has length {mean.shape[0]} but factor has {d} columns"
            )
        if not 1 <= k <= d:
            raise DimensionMismatchError(f"need 1 <= rank <= {d}, got {k}")
        svals = np.linalg.svd(factor, compute_uv=False)
        if svals[-1] <= RANK_TOL * svals[0]:
            raise ValueError("factor is rank-deficient: covariance rank < k")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "factor", factor)

    @property
    def ambient_dim(self) -> int:
        return self.factor.shape[1]

    @property
    def rank(self) -> int:
        return self.factor.shape[0]

    @property
    def coord_bound(self) -> float:
        """sqrt of the largest diagonal entry of the covariance."""
        return float(np.sqrt(np.max(np.sum(self.factor**2, axis=0))))

    def subspace(self) -> Subspace:
        """Column space of the covariance (the span of the noise)."""
        return orthonormalize(list(self.factor))


@dataclass(frozen=True)
class IndexSet:
    """A sorted, duplicate-free set of 1-based coordinate indices in [1, d]."""

    elements: tuple
    universe: int

    def __post_init__(self):
        elems = tuple(int(e) for e in self.elements)
        if list(elems) != sorted(set(elems)):
            raise ValueError("elements must be sorted and duplicate-free")
        if elems and (elems[0] < 1 or elems[-1] > self.universe):
            raise ValueError(
                f"elements must lie in [1, {self.universe}], got {elems}"
            )
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_iterable(cls, elements: Iterable[int], universe: int) -> "IndexSet":
        return cls(tuple(sorted(set(int(e) for e in elements))), universe)

    def indices0(self) -> np.ndarray:
        """The elements as a 0-based integer array."""
        return np.asarray(self.elements, dtype=int) - 1

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, item) -> bool:
        return item in self.elements

    def __iter__(self):
        return iter(self.elements)

    def intersection_size(self, other: "IndexSet") -> int:
        return len(set(self.elements) & set(other.elements))


def orthonormalize(vectors: Sequence) -> Subspace:
    """Build a Subspace spanning the given vectors.

    The dimension is the numerical rank of the stack, decided at a relative
    singular-value cutoff of ``RANK_TOL``.
    """
    if len(vectors) == 0:
        raise EmptyInputError("need at least one spanning vector")
    arrs = [as_vector(v, "vector") for v in vectors]
    d = arrs[0].shape[0]
    for v in arrs:
        if v.shape[0] != d:
            raise DimensionMismatchError("vectors must all have the same length")
    if all(float(np.linalg.norm(v)) < 1e-12 for v in arrs):
        raise AllZeroError("every input vector has norm < 1e-12")
    mat = np.column_stack(arrs)
    u, svals, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(svals > RANK_TOL * svals[0]))
    rank = max(rank, 1)
    return Subspace(d, u[:, :rank])


def project(subspace: Subspace, vector) -> np.ndarray:
    """Orthogonal projection of ``vector`` onto the subspace."""
    v = as_vector(vector, "vector", subspace.ambient_dim)
    basis = subspace.basis
    return basis @ (basis.T @ v)


def principal_angle_distance(a: Subspace, b: Subspace) -> float:
    """Sine of the largest principal angle between two subspaces.

    Returns 0 iff the spans are equal (in particular the dimensions match);
    subspaces of different dimensions are at distance 1, matching the
    spectral norm of the difference of the orthogonal projectors.
    """
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dims differ: {a.ambient_dim} vs {b.ambient_dim}"
        )
    if a.dim != b.dim:
        return 1.0
    # sine computed from the projection residual: accurate near zero, unlike
    # sqrt(1 - cos^2) of the smallest singular value of the basis product
    resid = b.basis - a.basis @ (a.basis.T @ b.basis)
    svals = np.linalg.svd(resid, compute_uv=False)
    return float(np.clip(np.max(svals) if svals.size else 0.0, 0.0, 1.0))
