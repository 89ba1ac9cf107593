"""Catalog of conformal projections and the conformity certifier.

A surjective map P : U -> W is a conformal projection when P P* is a
positive multiple rho^2 of the identity on W; its adjoint is then a
conformal immersion.  The catalog covers the first-order geometric
symbols used everywhere downstream:

    exterior_projection(n, k)        f (x) w        -> f ^ w           rho^2 = k + 1
    interior_projection(n, k)        f (x) w        -> contract(f, w)  rho^2 = n - k + 1
    symmetrization_projection(n, k)  f (x) A        -> sym insert      rho^2 = (k + 1)^2
    contraction_projection(n, k)     f (x) A        -> A(f, ...)       rho^2 = (n + k - 1) / k
    clifford_projection(n)           f (x) s        -> c_f(s)          rho^2 = n
    twistor_projection(n)            f (x) s        -> ker-c part      rho^2 = 1

All live on V* tensor (fiber) with V* the n-dimensional covector space.
Matrix entries of the wedge and symmetric constructions are assembled
combinatorially; conformity is then measured, never assumed.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .clifford import clifford_generators, spinor_dim, spinor_space
from .errors import BadDegree, NotConformal, NotSurjective
from .linmap import LinearMap, gram_schmidt_columns, orthonormal_complement
from .spaces import (
    SpaceDescriptor,
    dual_space,
    exterior_power,
    fiber_space,
    multiset_insert,
    multiset_remove,
    multiplicity,
    symmetric_power,
    tensor_product,
    wedge_delete,
    wedge_insert,
)

DEFAULT_CONFORMITY_TOL = 1e-10
_SURJECTIVITY_CUTOFF = 1e-10   # relative singular value cutoff for rank


def exterior_projection(n: int, k: int) -> LinearMap:
    """Wedge insertion V* (x) Lambda^k -> Lambda^{k+1}; needs 0 <= k <= n-1."""
    if k < 0 or k > n - 1:
        raise BadDegree(f"exterior projection needs 0 <= k <= {n - 1}, got k={k}")
    Lk = exterior_power(n, k)
    Lk1 = exterior_power(n, k + 1)
    dom = tensor_product((dual_space(n), Lk))
    M = np.zeros((Lk1.dim, dom.dim))
    pos = {lab: p for p, lab in enumerate(Lk1.labels)}
    for jJ, J in enumerate(Lk.labels):
        for i in range(1, n + 1):
            ins = wedge_insert(i, J)
            if ins is None:
                continue
            sign, K = ins
            M[pos[K], (i - 1) * Lk.dim + jJ] = sign
    return LinearMap(dom, Lk1, M)


def interior_projection(n: int, k: int) -> LinearMap:
    """Contraction V* (x) Lambda^k -> Lambda^{k-1}; needs 1 <= k <= n."""
    if k < 1 or k > n:
        raise BadDegree(f"interior projection needs 1 <= k <= {n}, got k={k}")
    Lk = exterior_power(n, k)
    Lk1 = exterior_power(n, k - 1)
    dom = tensor_product((dual_space(n), Lk))
    M = np.zeros((Lk1.dim, dom.dim))
    pos = {lab: p for p, lab in enumerate(Lk1.labels)}
    for jJ, J in enumerate(Lk.labels):
        for i in J:
            sign, K = wedge_delete(i, J)
            M[pos[K], (i - 1) * Lk.dim + jJ] = sign
    return LinearMap(dom, Lk1, M)


def symmetrization_projection(n: int, k: int) -> LinearMap:
    """Symmetrized insertion V* (x) S^k -> S^{k+1}.

    In the normalized monomial bases each column carries the single
    entry sqrt((k+1) * mult_i(target)), the coefficient of projecting
    e_i* (x) s_a onto s_{sort(a+i)} inside the tensor power and scaling
    by the k+1 slot insertions.
    """
    if k < 0:
        raise BadDegree(f"symmetrization needs k >= 0, got k={k}")
    Sk = symmetric_power(n, k)
    Sk1 = symmetric_power(n, k + 1)
    dom = tensor_product((dual_space(n), Sk))
    M = np.zeros((Sk1.dim, dom.dim))
    pos = {lab: p for p, lab in enumerate(Sk1.labels)}
    for ja, a in enumerate(Sk.labels):
        for i in range(1, n + 1):
            b = multiset_insert(i, a)
            M[pos[b], (i - 1) * Sk.dim + ja] = sqrt((k + 1) * multiplicity(b, i))
    return LinearMap(dom, Sk1, M)


def contraction_projection(n: int, k: int) -> LinearMap:
    """First-slot evaluation V* (x) S^k -> S^{k-1}; needs k >= 1.

    Column entry sqrt(mult_i(a) / k) at row a minus one copy of i.
    """
    if k < 1:
        raise BadDegree(f"contraction needs k >= 1, got k={k}")
    Sk = symmetric_power(n, k)
    Sk1 = symmetric_power(n, k - 1)
    dom = tensor_product((dual_space(n), Sk))
    M = np.zeros((Sk1.dim, dom.dim))
    pos = {lab: p for p, lab in enumerate(Sk1.labels)}
    for ja, a in enumerate(Sk.labels):
        for i in set(a):
            g = multiset_remove(i, a)
            M[pos[g], (i - 1) * Sk.dim + ja] = sqrt(multiplicity(a, i) / k)
    return LinearMap(dom, Sk1, M)


def clifford_projection(n: int) -> LinearMap:
    """Clifford action V* (x) S -> S, f (x) s -> c_f(s)."""
    gens = clifford_generators(n)
    S = spinor_space(n)
    dom = tensor_product((dual_space(n), S))
    M = np.zeros((S.dim, dom.dim), dtype=np.complex128)
    for i, g in enumerate(gens):
        M[:, i * S.dim:(i + 1) * S.dim] = g.matrix
    return LinearMap(dom, S, M)


def twistor_projection(n: int) -> LinearMap:
    """Orthogonal projection of V* (x) S onto the kernel of Clifford action.

    The projector is Pi(v (x) s) = v (x) s + (1/n) sum_i e_i* (x) c_i c_v s;
    its range is expressed in an orthonormal basis obtained by a
    deterministic Gram-Schmidt sweep over the projector columns, so the
    returned map is B* Pi = B* with codomain dimension (n-1) * dim S.
    Needs n >= 2 (for n = 1 the kernel is zero).
    """
    if n < 2:
        raise BadDegree(f"twistor projection needs n >= 2, got {n}")
    gens = clifford_generators(n)
    dS = spinor_dim(n)
    S = spinor_space(n)
    dom = tensor_product((dual_space(n), S))
    K = np.zeros((dom.dim, dom.dim), dtype=np.complex128)
    for i, gi in enumerate(gens):
        for j, gj in enumerate(gens):
            K[i * dS:(i + 1) * dS, j * dS:(j + 1) * dS] = gi.matrix @ gj.matrix
    Pi = np.eye(dom.dim) + K / n
    B = gram_schmidt_columns(Pi)
    if B.shape[1] != (n - 1) * dS:
        raise NotSurjective(
            f"twistor kernel basis came out rank {B.shape[1]}, expected {(n - 1) * dS}"
        )
    cod = fiber_space((n - 1) * dS, "twistor")
    return LinearMap(dom, cod, B.conj().T)


# ---------------------------------------------------------------------------
# conformity measurement


@dataclass(frozen=True)
class ProjectionReport:
    """Outcome of one conformity measurement."""

    rho_squared: float
    residual: float
    surjective: bool
    certified: bool
    tolerance: float
    domain_dim: int
    codomain_dim: int

    def to_json_dict(self) -> dict:
        return {
            "rho_squared": self.rho_squared,
            "residual": self.residual,
            "surjective": self.surjective,
            "certified": self.certified,
            "tolerance": self.tolerance,
            "domain_dim": self.domain_dim,
            "codomain_dim": self.codomain_dim,
        }


def conformity_report(P: LinearMap, tol: float = DEFAULT_CONFORMITY_TOL) -> ProjectionReport:
    """Measure rho^2 = trace(P P*) / dim W and its relative residual.

    Never raises; the certified flag records whether P is surjective and
    ||P P* - rho^2 I|| <= tol * rho^2 in the spectral norm.
    """
    m = P.matrix
    dw = P.codomain.dim
    if dw == 0:
        # empty codomain: vacuously conformal, rho^2 is reported as 0
        return ProjectionReport(0.0, 0.0, True, True, tol, P.domain.dim, 0)
    G = m @ m.conj().T
    rho2 = float(np.real(np.trace(G))) / dw
    sv = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(0)
    top = float(sv[0]) if sv.size else 0.0
    rank = int(np.sum(sv > _SURJECTIVITY_CUTOFF * max(top, 1e-300)))
    surjective = rank == dw
    residual = float(np.linalg.norm(G - rho2 * np.eye(dw), 2)) / max(rho2, 1e-300)
    certified = surjective and residual <= tol
    return ProjectionReport(rho2, residual, surjective, certified, tol,
                            P.domain.dim, dw)


def conformity_factor(P: LinearMap, tol: float = DEFAULT_CONFORMITY_TOL) -> ProjectionReport:
    """Certify P as a conformal projection or raise.

    Raises NotSurjective when rank(P) < dim W and NotConformal when the
    normalized residual of P P* - rho^2 I exceeds tol; both carry the
    measured residual.
    """
    rep = conformity_report(P, tol)
    if not rep.surjective:
        raise NotSurjective(
            f"rank deficiency: map onto {P.codomain.dim}-dim codomain is not onto",
            residual=rep.residual,
        )
    if rep.residual > tol:
        raise NotConformal(
            f"conformity residual {rep.residual:.3e} exceeds tolerance {tol:.1e}",
            residual=rep.residual,
        )
    return rep


def line_image_basis(P: LinearMap, xi: np.ndarray, fiber_dim: int,
                     tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of P(span(xi) (x) E) inside the codomain.

    xi is a real covector of length n with n * fiber_dim the domain
    dimension of P.  Deterministic: Gram-Schmidt over P(xi (x) e_j) in
    basis order.
    """
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[0]
    if n * fiber_dim != P.domain.dim:
        raise ValueError("covector length does not match the domain split")
    cols = np.zeros((P.codomain.dim, fiber_dim), dtype=np.complex128)
    m = P.matrix
    for e in range(fiber_dim):
        v = np.zeros(P.domain.dim, dtype=np.complex128)
        v[e::fiber_dim] = xi
        cols[:, e] = m @ v
    return gram_schmidt_columns(cols, tol)


def split_components(P: LinearMap, F1: np.ndarray,
                     tol: float = DEFAULT_CONFORMITY_TOL):
    """Components of P along an orthogonal split W = F1 (+) F1-perp.

    F1 is a matrix of orthonormal columns in codomain coordinates.  The
    components of a conformal projection along any orthogonal split are
    conformal with the same factor; both are measured and reported.  A
    zero-dimensional component is vacuous and inherits the parent factor.
    Returns (P1, P2, (report1, report2)).
    """
    parent = conformity_factor(P, tol)
    F1 = np.asarray(F1, dtype=np.complex128)
    F2 = orthonormal_complement(F1, P.codomain.dim)
    comps = []
    reports = []
    for idx, B in enumerate((F1, F2)):
        cod = fiber_space(B.shape[1], f"component{idx + 1}")
        comp = LinearMap(P.domain, cod, B.conj().T @ P.matrix)
        comps.append(comp)
        if B.shape[1] == 0:
            reports.append(ProjectionReport(parent.rho_squared, 0.0, True, True,
                                            tol, P.domain.dim, 0))
        else:
            reports.append(conformity_factor(comp, tol))
    return comps[0], comps[1], (reports[0], reports[1])
