"""Linear maps between descriptor spaces, with adjoints and spectra.

All bases are orthonormal, so the adjoint is the conjugate transpose of
the coefficient matrix and no Gram matrices ever appear.  Matrices are
complex (np.complex128) and frozen after construction; maps compose only
when the inner descriptors agree exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian
from .spaces import SpaceDescriptor, tensor_product


@dataclass(eq=False)
class LinearMap:
    """Matrix of a linear map in the orthonormal bases of its spaces.

    matrix has shape (codomain.dim, domain.dim) and is read-only.
    """

    domain: SpaceDescriptor
    codomain: SpaceDescriptor
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not fit map "
                f"{self.domain.dim} -> {self.codomain.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=np.complex128)
        return self.matrix @ vec

    def adjoint(self) -> "LinearMap":
        return LinearMap(self.codomain, self.domain, self.matrix.conj().T)

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self after other; defined only when descriptors match."""
        if other.codomain != self.domain:
            raise ValueError("composition mismatch: inner spaces differ")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def scale(self, a) -> "LinearMap":
        return LinearMap(self.domain, self.codomain, a * self.matrix)

    def norm(self) -> float:
        """Spectral norm."""
        if self.matrix.size == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))


def adjoint(P: LinearMap) -> LinearMap:
    return P.adjoint()


def compose(A: LinearMap, B: LinearMap) -> LinearMap:
    return A.compose(B)


def identity_map(space: SpaceDescriptor) -> LinearMap:
    return LinearMap(space, space, np.eye(space.dim))


def tensor_map(A: LinearMap, B: LinearMap) -> LinearMap:
    """Kronecker product acting on the ordered tensor product."""
    return LinearMap(
        tensor_product((A.domain, B.domain)),
        tensor_product((A.codomain, B.codomain)),
        np.kron(A.matrix, B.matrix),
    )


def stack_maps(maps, codomain: SpaceDescriptor) -> LinearMap:
    """Vertical stack of maps sharing one domain, into a direct sum."""
    maps = list(maps)
    dom = maps[0].domain
    for m in maps[1:]:
        if m.domain != dom:
            raise ValueError("stacked maps must share their domain")
    return LinearMap(dom, codomain, np.vstack([m.matrix for m in maps]))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a self-adjoint map, ascending, plus a residual.

    residual is max over eigenpairs of ||M v - lambda v||, an a
    posteriori certificate independent of the solver.
    """

    eigenvalues: tuple
    residual: float


def hermitian_spectrum(M: LinearMap, tol: float = 1e-10) -> Spectrum:
    """Spectrum of a self-adjoint endomorphism.

    Raises NotHermitian when ||M - M*|| exceeds tol * ||M|| in the
    spectral norm.  The returned residual certifies every eigenpair.
    """
    if M.domain != M.codomain:
        raise NotHermitian("spectrum requested for a non-endomorphism")
    A = M.matrix
    if A.size == 0:
        return Spectrum((), 0.0)
    scale = np.linalg.norm(A, 2)
    dev = np.linalg.norm(A - A.conj().T, 2)
    if dev > tol * max(scale, 1e-300):
        raise NotHermitian(f"self-adjointness residual {dev:.3e} exceeds {tol:.1e} * norm")
    vals, vecs = np.linalg.eigh(A)
    res = float(np.max(np.linalg.norm(A @ vecs - vecs * vals, axis=0)))
    return Spectrum(tuple(float(v) for v in vals), res)


def gram_schmidt_columns(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormalize the columns of M in order, skipping dependents.

    Deterministic modified Gram-Schmidt with one reorthogonalization
    pass; the drop threshold is relative to the largest column norm.
    Returns a matrix with orthonormal columns spanning the column space.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=np.complex128)
    scale = float(np.max(np.linalg.norm(M, axis=0)))
    if scale == 0.0:
        return np.zeros((M.shape[0], 0), dtype=np.complex128)
    basis = []
    for col in M.T:
        w = col.astype(np.complex128, copy=True)
        for _ in range(2):
            for b in basis:
                w = w - b * np.vdot(b, w)
        nw = np.linalg.norm(w)
        if nw > tol * scale:
            basis.append(w / nw)
    if not basis:
        return np.zeros((M.shape[0], 0), dtype=np.complex128)
    return np.column_stack(basis)


def orthonormal_complement(B: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Complete the orthonormal columns of B to a basis of C^dim.

    Runs Gram-Schmidt over the identity columns against B; the result
    spans the orthogonal complement of the column space of B.
    """
    if B.shape[0] != dim:
        raise ValueError("ambient dimension mismatch")
    full = gram_schmidt_columns(np.hstack([B, np.eye(dim)]), tol)
    return full[:, B.shape[1]:]
