"""Finite-dimensional coefficient spaces and their basis bookkeeping.

Everything downstream works with explicit orthonormal bases, so a space
is just a descriptor: what kind of space it is, its dimension, and an
ordered tuple of basis labels.  The label order is part of the on-disk
format of every report, so constructors here are deterministic and the
orderings are lexicographic throughout.

Conventions
-----------
base / dual     R^n with basis e_1..e_n, resp. the dual basis.  Both are
                orthonormal, labels are the integers 1..n.
exterior(k)     wedge powers of the dual space; basis e_J* for strictly
                increasing k-tuples J, orthonormal under the determinant
                inner product.
symmetric(k)    degree-k symmetric tensors, realized as the subspace of
                the k-th tensor power spanned by symmetrizations; basis
                is the normalized symmetrization of e_a* for each
                non-decreasing multi-index a, orthonormal in the induced
                tensor inner product.
tensor          ordered tensor product; labels are tuples of component
                labels in itertools.product order.
sum             orthogonal direct sum; labels are (slot, label) pairs.
fiber           an abstract auxiliary fiber with numbered basis.
"""

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, product
from math import comb, factorial
from collections import Counter

from .errors import BadDegree


@dataclass(frozen=True)
class SpaceDescriptor:
    """Immutable description of one coefficient space."""

    kind: str
    dim: int
    labels: tuple

    def __post_init__(self):
        if self.dim != len(self.labels):
            raise ValueError("dim does not match number of labels")

    def index(self, label):
        # linear scan is fine at these dimensions; hot paths build
        # their own lookup dicts once
        return self.labels.index(label)


def base_space(n: int) -> SpaceDescriptor:
    """Euclidean model space R^n with its standard orthonormal basis."""
    if n < 1:
        raise BadDegree(f"base space needs n >= 1, got {n}")
    return SpaceDescriptor("base", n, tuple(range(1, n + 1)))


def dual_space(n: int) -> SpaceDescriptor:
    """Dual of base_space(n); the covector side of every symbol."""
    if n < 1:
        raise BadDegree(f"dual space needs n >= 1, got {n}")
    return SpaceDescriptor("dual", n, tuple(range(1, n + 1)))


def exterior_power(n: int, k: int) -> SpaceDescriptor:
    """Degree-k wedge power of the dual space.

    Basis labels are strictly increasing k-tuples of 1..n in
    lexicographic order; dimension is C(n, k).  k = 0 gives the scalar
    line with the empty tuple as its single label.
    """
    if k < 0 or k > n:
        raise BadDegree(f"exterior degree k={k} outside [0, {n}]")
    labels = tuple(combinations(range(1, n + 1), k))
    return SpaceDescriptor("exterior", comb(n, k), labels)


def symmetric_power(n: int, k: int) -> SpaceDescriptor:
    """Degree-k symmetric power of the dual space.

    Labels are non-decreasing k-tuples in lexicographic order; the
    basis vector for label a is the unit-normalized symmetrization of
    the elementary tensor e_a* inside the k-th tensor power.
    """
    if k < 0:
        raise BadDegree(f"symmetric degree k={k} must be >= 0")
    labels = tuple(combinations_with_replacement(range(1, n + 1), k))
    return SpaceDescriptor("symmetric", comb(n + k - 1, k), labels)


def tensor_product(factors) -> SpaceDescriptor:
    """Ordered tensor product of descriptor factors."""
    factors = tuple(factors)
    if not factors:
        raise ValueError("tensor product needs at least one factor")
    dim = 1
    for f in factors:
        dim *= f.dim
    labels = tuple(product(*(f.labels for f in factors)))
    return SpaceDescriptor("tensor", dim, labels)


def direct_sum(summands) -> SpaceDescriptor:
    """Orthogonal direct sum; coordinates are concatenated slotwise."""
    summands = tuple(summands)
    labels = tuple((i, lab) for i, s in enumerate(summands) for lab in s.labels)
    return SpaceDescriptor("sum", sum(s.dim for s in summands), labels)


def fiber_space(dim: int, tag: str = "fiber") -> SpaceDescriptor:
    """Abstract auxiliary fiber with basis labeled (tag, 1..dim)."""
    if dim < 0:
        raise ValueError("fiber dimension must be >= 0")
    return SpaceDescriptor("fiber", dim, tuple((tag, i) for i in range(1, dim + 1)))


def build_space(kind: str, n: int = 0, k: int | None = None,
                factors=None, dim: int | None = None, tag: str = "fiber") -> SpaceDescriptor:
    """Single entry point used by serialization and the CLI."""
    if kind == "base":
        return base_space(n)
    if kind == "dual":
        return dual_space(n)
    if kind == "exterior":
        return exterior_power(n, k)
    if kind == "symmetric":
        return symmetric_power(n, k)
    if kind == "tensor":
        return tensor_product(factors)
    if kind == "sum":
        return direct_sum(factors)
    if kind == "fiber":
        return fiber_space(dim, tag)
    raise ValueError(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# combinatorics shared by the wedge and symmetric constructions


def wedge_insert(i: int, J: tuple):
    """Insert index i into the increasing tuple J.

    Returns (sign, K) with e_i* ^ e_J* = sign * e_K*, or None when
    i already occurs in J (the wedge vanishes).
    """
    pos = 0
    for j in J:
        if j == i:
            return None
        if j < i:
            pos += 1
    K = J[:pos] + (i,) + J[pos:]
    return (-1) ** pos, K


def wedge_delete(i: int, K: tuple):
    """Contract e_i against e_K*: returns (sign, K without i) or None."""
    if i not in K:
        return None
    pos = K.index(i)
    return (-1) ** pos, K[:pos] + K[pos + 1:]


def multiset_insert(i: int, a: tuple) -> tuple:
    """Sorted multi-index a with one extra copy of i."""
    return tuple(sorted(a + (i,)))


def multiset_remove(i: int, a: tuple):
    """Sorted multi-index a with one copy of i removed, or None."""
    if i not in a:
        return None
    pos = a.index(i)
    return a[:pos] + a[pos + 1:]


def multiplicity(a: tuple, i: int) -> int:
    return a.count(i)


def arrangement_count(a: tuple) -> int:
    """Number of distinct orderings of the multi-index a.

    Equals k! / prod(m_i!) and also 1 / |Sym(e_a)|^2, so the unit basis
    vector of the symmetric power is sqrt(arrangement_count) * Sym(e_a).
    """
    k = len(a)
    denom = 1
    for m in Counter(a).values():
        denom *= factorial(m)
    return factorial(k) // denom
