"""Pointwise verification engine for the refined Kato inequalities.

The inequalities under test all share one skeleton.  A gradient
surrogate u (or v) sits in V* (x) fiber, a section value phi fixes the
distinguished covector xi0 through the pairing b_i = Re<u_i, phi>, and
the claim is

    |u|^2 + c |P(u)|^2  >=  (1 + gain) * |d|phi||^2

with the gain depending on the operator constants (rho^2, epsilon),
on the interpolation weight c, and on whether P(u) vanishes.  The Hodge
variant carries two weights (c, c_star) for the wedge and contraction
parts and takes the minimum of the two gains.  Every check returns a
KatoVerdict with the branch taken, both sides, and the margin; fuzzers
evaluate the same arithmetic vectorized over sample batches.

Infinite gains are represented by math.inf (the extended reals): they
occur exactly when rho^2 = epsilon on the vanishing branch, and force
rhs = 0 through a zero pairing, which is itself checked.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BadConstants, BadDegree, NotUnit, ZeroOperator, ZeroSection
from .linmap import LinearMap, gram_schmidt_columns, orthonormal_complement
from .projections import conformity_factor, exterior_projection, interior_projection
from .symbols import OperatorSpec, ellipticity_constant

INF = math.inf

BRANCH_NORM_FACTOR = 1e-10    # ||P(u)|| <= this * scale picks the vanishing branch
MARGIN_TOL_FACTOR = 1e-9      # margins below -this * scale count as violations
_PAIRING_ZERO_FACTOR = 1e-20  # |d|phi||^2 at or below this * scale is treated as 0


# ---------------------------------------------------------------------------
# gain formulas (exact when fed Fractions)


def _exactify(x):
    # ints ride along as Fractions so declared constants stay exact
    return Fraction(x) if isinstance(x, int) else x


def kato_gain_lemma(c, bound, vanishing: bool):
    """Interpolation gain of the two-component lemma.

    bound is an upper bound for the spectrum of the restricted map
    C C* on the second component.  Vanishing branch: 1/bound (inf when
    bound is 0); otherwise c / (1 + bound * c).  Exact for Fraction or
    int inputs.
    """
    c, bound = _exactify(c), _exactify(bound)
    if c < 0:
        raise BadConstants(f"interpolation weight c must be >= 0, got {c}")
    if bound < 0:
        raise BadConstants(f"spectral bound must be >= 0, got {bound}")
    if vanishing:
        if bound == 0:
            return INF
        return 1 / bound
    if bound == 0:
        return c
    return c / (1 + bound * c)


def kato_gain_operator(c, rho_squared, epsilon, vanishing: bool):
    """Gain for a conformal injectively elliptic operator.

    Vanishing branch: epsilon / (rho^2 - epsilon), infinite when the two
    constants coincide.  Non-vanishing: epsilon c / (1 + (rho^2 - epsilon) c).
    """
    c, rho_squared, epsilon = _exactify(c), _exactify(rho_squared), _exactify(epsilon)
    if epsilon <= 0:
        raise BadConstants(f"epsilon must be positive, got {epsilon}")
    if epsilon > rho_squared:
        raise BadConstants(f"epsilon {epsilon} exceeds rho^2 {rho_squared}")
    gap = rho_squared - epsilon
    if vanishing:
        return INF if gap == 0 else epsilon / gap
    if c < 0:
        raise BadConstants(f"interpolation weight c must be >= 0, got {c}")
    return epsilon * c / (1 + gap * c)


@dataclass(frozen=True)
class HodgeGains:
    d_gain: object
    dstar_gain: object
    overall: object


def hodge_gain_pair(c, c_star, n: int, k: int,
                    d_vanishing: bool, dstar_vanishing: bool) -> HodgeGains:
    """Pair of gains for degree-k forms in dimension n.

    Wedge side: 1/k when the derivative part vanishes, else c/(1+kc).
    Contraction side: 1/(n-k) when the codifferential part vanishes,
    else c_star/(1+(n-k)c_star).  The inequality uses the minimum.
    Degrees 0 and n are rejected: there is nothing two-sided to verify.
    """
    if k < 1 or k > n - 1:
        raise BadDegree(f"hodge gains need 1 <= k <= {n - 1}, got k={k}")
    c, c_star = _exactify(c), _exactify(c_star)
    if (not d_vanishing and c < 0) or (not dstar_vanishing and c_star < 0):
        raise BadConstants("interpolation weights must be >= 0")
    gd = Fraction(1, k) if d_vanishing else c / (1 + k * c)
    gs = Fraction(1, n - k) if dstar_vanishing else c_star / (1 + (n - k) * c_star)
    return HodgeGains(gd, gs, min(gd, gs))


def operator_constants(op: OperatorSpec):
    """(rho^2, epsilon) as floats, measured when not declared."""
    rho = op.rho_squared
    eps = op.epsilon
    if rho is None:
        rho = conformity_factor(op.full_symbol).rho_squared
    if eps is None:
        eps = ellipticity_constant(op).epsilon
    return float(rho), float(eps)


# ---------------------------------------------------------------------------
# decompositions along a covector


def _check_unit(xi0: np.ndarray) -> np.ndarray:
    xi0 = np.asarray(xi0, dtype=float)
    if abs(float(np.linalg.norm(xi0)) - 1.0) > 1e-12:
        raise NotUnit("direction covector must be unit length")
    return xi0


@dataclass(frozen=True)
class LineSplit:
    """u = xi0 (x) w plus a part with no xi0 component."""

    line: np.ndarray
    perp: np.ndarray
    xi0: np.ndarray


def decompose_line(u: np.ndarray, xi0, n: int, fiber_dim: int) -> LineSplit:
    """Orthogonal split of u in V* (x) E along the line spanned by xi0."""
    xi0 = _check_unit(xi0)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (n * fiber_dim,):
        raise ValueError("vector length does not match n * fiber_dim")
    blocks = u.reshape(n, fiber_dim)
    w = xi0 @ blocks
    line = np.einsum("i,e->ie", xi0, w).reshape(-1)
    return LineSplit(line, u - line, xi0)


@dataclass(frozen=True)
class FourBlockSplit:
    """Blocks of v in V* (x) Lambda^k (x) E along line/perp and form split.

    v11: line covector slot, form containing xi0
    v12: line covector slot, form inside the perp hyperplane
    v21: perp covector slot, form containing xi0
    v22: perp covector slot, form inside the perp hyperplane
    """

    v11: np.ndarray
    v12: np.ndarray
    v21: np.ndarray
    v22: np.ndarray
    xi0: np.ndarray

    def parts(self):
        return (self.v11, self.v12, self.v21, self.v22)


class _FormKit:
    """Cached direction blocks of the wedge/contraction symbols."""

    def __init__(self, n: int, k: int):
        if k < 1 or k > n - 1:
            raise BadDegree(f"form split needs 1 <= k <= {n - 1}, got k={k}")
        self.n, self.k = n, k
        self.dim_k = math.comb(n, k)
        self.dim_up = math.comb(n, k + 1)
        self.dim_dn = math.comb(n, k - 1)
        self.eps_k = self._blocks(exterior_projection(n, k), self.dim_k)
        self.eps_km = self._blocks(exterior_projection(n, k - 1), self.dim_dn)
        self.iota_k = self._blocks(interior_projection(n, k), self.dim_k)

    @staticmethod
    def _blocks(P: LinearMap, width: int) -> np.ndarray:
        n = P.domain.dim // width
        return np.stack([P.matrix[:, i * width:(i + 1) * width].real
                         for i in range(n)])

    def direction(self, blocks: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.tensordot(xi, blocks, axes=([0], [0]))


_FORM_KITS: dict = {}


def _form_kit(n: int, k: int) -> _FormKit:
    key = (n, k)
    if key not in _FORM_KITS:
        _FORM_KITS[key] = _FormKit(n, k)
    return _FORM_KITS[key]


def four_block_decompose(v: np.ndarray, xi0, n: int, k: int,
                         fiber_dim: int = 1) -> FourBlockSplit:
    """Split v along the covector line and the xi0-content of the form slot.

    The form-side projector onto "contains xi0" is wedge(xi0) after
    contract(xi0); together with the covector line split this produces
    four mutually orthogonal blocks whose squared norms add up to |v|^2.
    """
    xi0 = _check_unit(xi0)
    kit = _form_kit(n, k)
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (n * kit.dim_k * fiber_dim,):
        raise ValueError("vector length does not match n * C(n,k) * fiber_dim")
    V = v.reshape(n, kit.dim_k, fiber_dim)
    eps = kit.direction(kit.eps_km, xi0)
    iota = kit.direction(kit.iota_k, xi0)
    contains = eps @ iota
    w = xi0 @ V.reshape(n, -1)
    line = np.einsum("i,jf->ijf", xi0, w.reshape(kit.dim_k, fiber_dim))
    perp = V - line
    out = []
    for cov in (line, perp):
        has = np.einsum("ab,ibf->iaf", contains, cov)
        out.append(has)
        out.append(cov - has)
    v11, v12, v21, v22 = (x.reshape(-1) for x in out)
    return FourBlockSplit(v11, v12, v21, v22, xi0)


def apply_form_map(blocks: np.ndarray, v: np.ndarray, n: int,
                   fiber_dim: int) -> np.ndarray:
    """Apply a direction-blocked form symbol to v in V* (x) Lambda (x) E.

    blocks has shape (n, out_dim, in_dim); the direction slot of v is
    contracted against the block index, the fiber rides along.
    """
    width = blocks.shape[2]
    V = np.asarray(v, dtype=np.complex128).reshape(n, width, fiber_dim)
    return np.einsum("iab,ibf->af", blocks, V).reshape(-1)


def wedge_of_gradient(v: np.ndarray, n: int, k: int, fiber_dim: int = 1) -> np.ndarray:
    """epsilon-part of a gradient surrogate: the d phi stand-in."""
    return apply_form_map(_form_kit(n, k).eps_k, v, n, fiber_dim)


def contraction_of_gradient(v: np.ndarray, n: int, k: int, fiber_dim: int = 1) -> np.ndarray:
    """iota-part of a gradient surrogate: the d* phi stand-in (up to sign)."""
    return apply_form_map(_form_kit(n, k).iota_k, v, n, fiber_dim)


# ---------------------------------------------------------------------------
# spectral bounds of the restricted components (the structural lemma)


@dataclass(frozen=True)
class SpectralBounds:
    min_line_eigenvalue: float
    max_perp_eigenvalue: float
    epsilon: float
    rho_squared: float
    tolerance: float

    @property
    def satisfied(self) -> bool:
        return (self.min_line_eigenvalue >= self.epsilon - self.tolerance
                and self.max_perp_eigenvalue <= self.rho_squared - self.epsilon
                + self.tolerance)

    def to_json_dict(self) -> dict:
        return {
            "min_line_eigenvalue": self.min_line_eigenvalue,
            "max_perp_eigenvalue": self.max_perp_eigenvalue,
            "epsilon": self.epsilon,
            "rho_squared": self.rho_squared,
            "tolerance": self.tolerance,
            "satisfied": self.satisfied,
        }


def verify_spectral_bounds(op: OperatorSpec, xi0,
                           tol: float = MARGIN_TOL_FACTOR) -> SpectralBounds:
    """Eigenvalue bounds of the component of P along the image of the line.

    With F1 = P(span(xi0) (x) E) and P1 the F1-component of P, the
    restriction of P1 to the line part has spectrum >= epsilon and the
    restriction to the perpendicular part has spectrum <= rho^2 - epsilon.
    """
    xi0 = _check_unit(xi0)
    n, dE = op.base_dim, op.domain_fiber.dim
    rho2, eps = operator_constants(op)
    M = op.full_symbol.matrix
    line_embed = np.zeros((n * dE, dE))
    for e in range(dE):
        line_embed[e::dE, e] = xi0
    F1 = gram_schmidt_columns(M @ line_embed)
    P1 = F1.conj().T @ M
    W = orthonormal_complement(xi0[:, None].astype(complex), n).real
    perp_embed = np.zeros((n * dE, (n - 1) * dE))
    for j in range(n - 1):
        for e in range(dE):
            perp_embed[e::dE, j * dE + e] = W[:, j]
    T = P1 @ line_embed
    H = P1 @ perp_embed
    tt = T @ T.conj().T
    hh = H @ H.conj().T
    min_line = float(np.linalg.eigvalsh(tt)[0]) if tt.size else 0.0
    max_perp = float(np.linalg.eigvalsh(hh)[-1]) if hh.size else 0.0
    return SpectralBounds(min_line, max_perp, eps, rho2, tol)


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class KatoVerdict:
    """One pointwise inequality evaluation."""

    theorem: str                  # "foldo" or "hodge"
    branch: str                   # "vanishing" or "nonvanishing"
    c: float
    c_star: float | None
    lhs: float
    rhs: float
    margin: float
    gain: float
    scale: float
    seed: int | None = None
    corollary_margin: float | None = None

    @property
    def passed(self) -> bool:
        return self.margin >= -MARGIN_TOL_FACTOR * self.scale

    def to_json_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "branch": self.branch,
            "c": self.c,
            "c_star": self.c_star,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "gain": "inf" if math.isinf(self.gain) else self.gain,
            "scale": self.scale,
            "seed": self.seed,
            "passed": self.passed,
        }
        if self.corollary_margin is not None:
            out["corollary_margin"] = self.corollary_margin
        return out


VERDICT_CSV_COLUMNS = ("theorem", "branch", "c", "c_star", "lhs", "rhs",
                       "margin", "seed")


def verdicts_to_csv(verdicts, stream=None) -> str | None:
    """Fixed-column CSV for verdict batches; None fields become ''."""
    own = stream is None
    if own:
        stream = io.StringIO()
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(VERDICT_CSV_COLUMNS)
    for v in verdicts:
        w.writerow([
            v.theorem, v.branch, v.c,
            "" if v.c_star is None else v.c_star,
            v.lhs, v.rhs, v.margin,
            "" if v.seed is None else v.seed,
        ])
    if own:
        return stream.getvalue()
    return None


def verdicts_to_jsonl(verdicts, stream=None) -> str | None:
    own = stream is None
    if own:
        stream = io.StringIO()
    for v in verdicts:
        stream.write(json.dumps(v.to_json_dict(), sort_keys=True))
        stream.write("\n")
    if own:
        return stream.getvalue()
    return None


# ---------------------------------------------------------------------------
# the two-component key lemma


def _restricted_top_eigenvalue(C: LinearMap, sub_basis: np.ndarray) -> float:
    Chat = C.matrix @ sub_basis
    G = Chat @ Chat.conj().T
    if G.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(G)[-1])


def check_key_lemma(C: LinearMap, sub_basis: np.ndarray, u1: np.ndarray,
                    u2: np.ndarray, c: float, seed: int | None = None) -> KatoVerdict:
    """|u2|^2 + c |C(u1+u2)|^2 >= gain * |C(u1)|^2 with the branch gain.

    sub_basis holds orthonormal columns spanning the component that u2
    lives in; the spectral bound is the measured top eigenvalue of the
    restriction of C C* to that component.
    """
    u1 = np.asarray(u1, dtype=np.complex128)
    u2 = np.asarray(u2, dtype=np.complex128)
    a = _restricted_top_eigenvalue(C, sub_basis)
    scale = float(np.linalg.norm(u1) ** 2 + np.linalg.norm(u2) ** 2)
    total = C.apply(u1 + u2)
    vanishing = float(np.linalg.norm(total)) <= BRANCH_NORM_FACTOR * scale
    gain = kato_gain_lemma(c, a, vanishing)
    lhs = float(np.linalg.norm(u2) ** 2 + c * np.linalg.norm(total) ** 2)
    target = float(np.linalg.norm(C.apply(u1)) ** 2)
    if math.isinf(gain):
        rhs = 0.0 if target <= _PAIRING_ZERO_FACTOR * scale else INF
    else:
        rhs = float(gain) * target
    return KatoVerdict("key-lemma", "vanishing" if vanishing else "nonvanishing",
                       float(c), None, lhs, rhs, lhs - rhs, float(gain), scale,
                       seed)


def equality_witness(C: LinearMap, sub_basis: np.ndarray):
    """Second-component vector saturating the spectral bound.

    Returns (u2, ratio) with u2 the pullback C* y of a top eigenvector y
    of the restricted C C*, normalized, and ratio = |C(u2)|^2 / |u2|^2
    which equals the top eigenvalue up to rounding.  Raises ZeroOperator
    when the restriction is (numerically) zero.
    """
    Chat = C.matrix @ sub_basis
    G = Chat @ Chat.conj().T
    if G.size == 0 or np.linalg.norm(G, 2) <= 1e-12:
        raise ZeroOperator("restricted map is zero; no equality witness exists")
    vals, vecs = np.linalg.eigh(G)
    y = vecs[:, -1]
    u2 = sub_basis @ (Chat.conj().T @ y)
    u2 = u2 / np.linalg.norm(u2)
    ratio = float(np.linalg.norm(C.apply(u2)) ** 2)
    return u2, ratio


def matching_first_component(C: LinearMap, u2: np.ndarray) -> np.ndarray:
    """u1 with C(u1) = -C(u2), making the total image vanish exactly."""
    target = -C.apply(u2)
    u1, *_ = np.linalg.lstsq(C.matrix, target, rcond=None)
    return u1


# ---------------------------------------------------------------------------
# pointwise theorem checks


def check_operator_inequality(op: OperatorSpec, u: np.ndarray, phi: np.ndarray,
                              c: float, seed: int | None = None) -> KatoVerdict:
    """Pointwise refined Kato inequality of a first-order operator.

    u plays the full gradient of phi at one point, P(u) the operator
    value; the right side uses the norm-gradient surrogate built from
    the pairing of u against phi.
    """
    n, dE = op.base_dim, op.domain_fiber.dim
    u = np.asarray(u, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128)
    phi_norm = float(np.linalg.norm(phi))
    if phi_norm <= 1e-12:
        raise ZeroSection("inequality undefined where the section vanishes")
    rho2, eps = operator_constants(op)
    Pu = op.full_symbol.apply(u)
    scale = float(np.linalg.norm(u) ** 2)
    vanishing = float(np.linalg.norm(Pu)) <= BRANCH_NORM_FACTOR * scale
    gain = kato_gain_operator(c, rho2, eps, vanishing)
    b = np.real(u.reshape(n, dE) @ phi.conj())
    dnorm_sq = float(b @ b) / phi_norm ** 2
    lhs = scale + c * float(np.linalg.norm(Pu) ** 2)
    if math.isinf(gain):
        rhs = 0.0 if dnorm_sq <= _PAIRING_ZERO_FACTOR * max(scale, 1.0) else INF
    else:
        rhs = (1.0 + float(gain)) * dnorm_sq
    full_scale = lhs + (0.0 if math.isinf(rhs) else rhs)
    return KatoVerdict("foldo", "vanishing" if vanishing else "nonvanishing",
                       float(c), None, lhs, rhs, lhs - rhs, float(gain),
                       full_scale, seed)


def check_hodge_inequality(v: np.ndarray, phi: np.ndarray, n: int, k: int,
                           fiber_dim: int = 1, c: float = 1.0,
                           c_star: float = 1.0,
                           d_vanishing: bool | None = None,
                           dstar_vanishing: bool | None = None,
                           seed: int | None = None) -> KatoVerdict:
    """Two-sided refined Kato inequality for degree-k form coefficients.

    Checks the final inequality (gradient + weighted wedge/contraction
    terms against the norm-gradient surrogate) and, through the
    corollary_margin field, the intermediate block inequality with
    |v11|^2 + |v12|^2 on the right.  Branch flags can be forced by
    callers holding exact closedness certificates; by default they are
    detected from the wedge/contraction norms.
    """
    kit = _form_kit(n, k)
    v = np.asarray(v, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128)
    phi_norm = float(np.linalg.norm(phi))
    if phi_norm <= 1e-12:
        raise ZeroSection("inequality undefined where the section vanishes")
    scale = float(np.linalg.norm(v) ** 2)
    eps_v = apply_form_map(kit.eps_k, v, n, fiber_dim)
    iota_v = apply_form_map(kit.iota_k, v, n, fiber_dim)
    if d_vanishing is None:
        d_vanishing = float(np.linalg.norm(eps_v)) <= BRANCH_NORM_FACTOR * scale
    if dstar_vanishing is None:
        dstar_vanishing = float(np.linalg.norm(iota_v)) <= BRANCH_NORM_FACTOR * scale
    gains = hodge_gain_pair(c, c_star, n, k, d_vanishing, dstar_vanishing)
    b = np.real(v.reshape(n, -1) @ phi.conj())
    dnorm_sq = float(b @ b) / phi_norm ** 2
    bnorm = math.sqrt(float(b @ b))
    xi0 = b / bnorm if bnorm > 1e-14 * max(scale, 1.0) else _first_basis(n)
    split = four_block_decompose(v, xi0, n, k, fiber_dim)
    lhs = (scale + c * float(np.linalg.norm(eps_v) ** 2)
           + c_star * float(np.linalg.norm(iota_v) ** 2))
    rhs = (1.0 + float(gains.overall)) * dnorm_sq
    # block form of the same inequality: partial symbols, block norms right
    eps_part = apply_form_map(kit.eps_k, split.v12 + split.v21, n, fiber_dim)
    iota_part = apply_form_map(kit.iota_k, split.v11 + split.v22, n, fiber_dim)
    dvc = float(np.linalg.norm(eps_part)) <= BRANCH_NORM_FACTOR * scale
    dsc = float(np.linalg.norm(iota_part)) <= BRANCH_NORM_FACTOR * scale
    cor_gains = hodge_gain_pair(c, c_star, n, k, dvc, dsc)
    lhs_cor = (scale + c * float(np.linalg.norm(eps_part) ** 2)
               + c_star * float(np.linalg.norm(iota_part) ** 2))
    rhs_cor = (1.0 + float(cor_gains.overall)) * (
        float(np.linalg.norm(split.v11) ** 2 + np.linalg.norm(split.v12) ** 2))
    branch = "vanishing" if (d_vanishing and dstar_vanishing) else "nonvanishing"
    return KatoVerdict("hodge", branch, float(c), float(c_star), lhs, rhs,
                       lhs - rhs, float(gains.overall), lhs + rhs, seed,
                       corollary_margin=lhs_cor - rhs_cor)


def _first_basis(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[0] = 1.0
    return e


# ---------------------------------------------------------------------------
# batched margin arithmetic, shared by the fuzzers and the field runs


def batch_operator_margins(op: OperatorSpec, u: np.ndarray, phi: np.ndarray,
                           c, vanishing=None) -> dict:
    """Vectorized operator-inequality margins for row batches.

    u has one gradient surrogate per row, phi one section value; c is a
    scalar or per-row array.  vanishing overrides branch detection when
    the caller holds an exact certificate.  Returns the margin arrays
    plus the pieces needed for reporting.
    """
    n, dE = op.base_dim, op.domain_fiber.dim
    rho2, eps = operator_constants(op)
    m = u.shape[0]
    Pu = u @ op.full_symbol.matrix.T
    pu_sq = np.sum(np.abs(Pu) ** 2, axis=1)
    scale = np.sum(np.abs(u) ** 2, axis=1)
    if vanishing is None:
        vanishing = np.sqrt(pu_sq) <= BRANCH_NORM_FACTOR * scale
    else:
        vanishing = np.broadcast_to(np.asarray(vanishing, dtype=bool), (m,))
    b = np.real(np.einsum("nie,ne->ni", u.reshape(m, n, dE), phi.conj()))
    dnorm_sq = np.sum(b ** 2, axis=1) / np.sum(np.abs(phi) ** 2, axis=1)
    c = np.asarray(c, dtype=float)
    lhs = scale + c * pu_sq
    gain_vanishing = INF if rho2 == eps else eps / (rho2 - eps)
    gains = np.where(vanishing, gain_vanishing,
                     eps * c / (1.0 + (rho2 - eps) * c))
    with np.errstate(invalid="ignore"):
        rhs = (1.0 + gains) * dnorm_sq
    if math.isinf(gain_vanishing):
        zero_pair = dnorm_sq <= _PAIRING_ZERO_FACTOR * np.maximum(scale, 1.0)
        rhs = np.where(vanishing & zero_pair, 0.0, rhs)
    margin = lhs - rhs
    full_scale = lhs + np.where(np.isinf(rhs), 0.0, rhs)
    return {
        "margin": margin, "lhs": lhs, "rhs": rhs, "scale": scale,
        "full_scale": full_scale, "vanishing": vanishing, "pu_sq": pu_sq,
        "dnorm_sq": dnorm_sq, "gain_vanishing": gain_vanishing,
        "rho_squared": rho2, "epsilon": eps,
    }


def batch_hodge_margins(n: int, k: int, fiber_dim: int, v: np.ndarray,
                        phi: np.ndarray, c, c_star,
                        d_vanishing=None, dstar_vanishing=None,
                        diagnostics: bool = False) -> dict:
    """Vectorized two-sided form-inequality margins for row batches.

    Checks the final inequality and the intermediate block form; with
    diagnostics=True also returns the worst residuals of the split
    identities (Pythagoras, the two annihilation laws, dominance of the
    full symbols over their block restrictions).
    """
    kit = _form_kit(n, k)
    m = v.shape[0]
    V = v.reshape(m, n, kit.dim_k, fiber_dim)
    scale = np.sum(np.abs(v) ** 2, axis=1)
    eps_v = np.einsum("iab,nibf->naf", kit.eps_k, V)
    iota_v = np.einsum("iab,nibf->naf", kit.iota_k, V)
    eps_sq = np.sum(np.abs(eps_v) ** 2, axis=(1, 2))
    iota_sq = np.sum(np.abs(iota_v) ** 2, axis=(1, 2))
    if d_vanishing is None:
        dvan = np.sqrt(eps_sq) <= BRANCH_NORM_FACTOR * scale
    else:
        dvan = np.broadcast_to(np.asarray(d_vanishing, dtype=bool), (m,))
    if dstar_vanishing is None:
        svan = np.sqrt(iota_sq) <= BRANCH_NORM_FACTOR * scale
    else:
        svan = np.broadcast_to(np.asarray(dstar_vanishing, dtype=bool), (m,))
    Phi = phi.reshape(m, kit.dim_k * fiber_dim)
    b = np.real(np.einsum("nix,nx->ni", V.reshape(m, n, -1), Phi.conj()))
    bnorm = np.linalg.norm(b, axis=1)
    dnorm_sq = bnorm ** 2 / np.sum(np.abs(phi) ** 2, axis=1)
    xi = np.where((bnorm > 1e-14)[:, None],
                  b / np.maximum(bnorm, 1e-300)[:, None],
                  np.tile(_first_basis(n), (m, 1)))
    w = np.einsum("ni,nixf->nxf", xi, V)
    line = np.einsum("ni,nxf->nixf", xi, w)
    perp = V - line
    z_line = np.einsum("nj,jcb,nibf->nicf", xi, kit.iota_k, line)
    has_line = np.einsum("nj,jac,nicf->niaf", xi, kit.eps_km, z_line)
    z_perp = np.einsum("nj,jcb,nibf->nicf", xi, kit.iota_k, perp)
    has_perp = np.einsum("nj,jac,nicf->niaf", xi, kit.eps_km, z_perp)
    v11, v12 = has_line, line - has_line
    v21, v22 = has_perp, perp - has_perp
    sq = lambda x: np.sum(np.abs(x) ** 2, axis=(1, 2, 3))
    n11, n12, n21, n22 = sq(v11), sq(v12), sq(v21), sq(v22)
    eps_part = np.einsum("iab,nibf->naf", kit.eps_k, v12 + v21)
    iota_part = np.einsum("iab,nibf->naf", kit.iota_k, v11 + v22)
    eps_part_sq = np.sum(np.abs(eps_part) ** 2, axis=(1, 2))
    iota_part_sq = np.sum(np.abs(iota_part) ** 2, axis=(1, 2))
    c = np.asarray(c, dtype=float)
    cs = np.asarray(c_star, dtype=float)
    gd = np.where(dvan, 1.0 / k, c / (1.0 + k * c))
    gs = np.where(svan, 1.0 / (n - k), cs / (1.0 + (n - k) * cs))
    gmin = np.minimum(gd, gs)
    lhs = scale + c * eps_sq + cs * iota_sq
    rhs = (1.0 + gmin) * dnorm_sq
    margin = lhs - rhs
    dvc = np.sqrt(eps_part_sq) <= BRANCH_NORM_FACTOR * scale
    dsc = np.sqrt(iota_part_sq) <= BRANCH_NORM_FACTOR * scale
    gd_c = np.where(dvc | dvan, 1.0 / k, c / (1.0 + k * c))
    gs_c = np.where(dsc | svan, 1.0 / (n - k), cs / (1.0 + (n - k) * cs))
    lhs_cor = scale + c * eps_part_sq + cs * iota_part_sq
    rhs_cor = (1.0 + np.minimum(gd_c, gs_c)) * (n11 + n12)
    margin_cor = lhs_cor - rhs_cor
    out = {
        "margin": margin, "lhs": lhs, "rhs": rhs, "scale": scale,
        "full_scale": lhs + rhs, "margin_cor": margin_cor,
        "cor_scale": lhs_cor + rhs_cor, "d_vanishing": dvan,
        "dstar_vanishing": svan, "dnorm_sq": dnorm_sq,
        "eps_sq": eps_sq, "iota_sq": iota_sq, "gain": gmin,
    }
    if diagnostics:
        safe = np.maximum(scale, 1e-300)
        out["pythagoras_residual"] = float(np.max(
            np.abs(n11 + n12 + n21 + n22 - scale) / safe))
        dead_eps = np.einsum("iab,nibf->naf", kit.eps_k, v11)
        dead_iota = np.einsum("iab,nibf->naf", kit.iota_k, v12)
        out["block_identity_residual"] = max(
            float(np.max(np.sqrt(np.sum(np.abs(dead_eps) ** 2, axis=(1, 2))) / safe)),
            float(np.max(np.sqrt(np.sum(np.abs(dead_iota) ** 2, axis=(1, 2))) / safe)))
        out["dominance_residual"] = float(np.max(
            np.maximum(eps_part_sq - eps_sq, iota_part_sq - iota_sq) / safe))
    return out


# ---------------------------------------------------------------------------
# vectorized fuzzing


@dataclass
class FuzzReport:
    """Aggregate outcome of one fuzz batch."""

    theorem: str
    operator: str
    samples: int
    violations: int
    min_margin: float
    min_relative_margin: float
    tolerance_factor: float
    seed: int
    c_range: tuple
    branch_counts: dict
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "operator": self.operator,
            "samples": self.samples,
            "violations": self.violations,
            "min_margin": self.min_margin,
            "min_relative_margin": self.min_relative_margin,
            "tolerance_factor": self.tolerance_factor,
            "seed": self.seed,
            "c_range": list(self.c_range),
            "branch_counts": self.branch_counts,
            "passed": self.passed,
            **{k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
               for k, v in self.extras.items()},
        }


def _weights(rng, count: int, c_max: float) -> np.ndarray:
    # cubic bias toward small weights plus a slice of exact zeros;
    # both regimes of the interpolation matter
    c = c_max * rng.random(count) ** 3
    c[: max(1, count // 64)] = 0.0
    return c

def _complex_rows(rng, count: int, dim: int) -> np.ndarray:
    return (rng.standard_normal((count, dim))
            + 1j * rng.standard_normal((count, dim)))


def _null_space(M: np.ndarray) -> np.ndarray:
    u, s, vh = np.linalg.svd(M)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > 1e-12 * max(top, 1e-300)))
    return vh[rank:].conj().T


def fuzz_operator_inequality(op: OperatorSpec, samples: int, seed: int,
                             c_max: float = 1e3, c_fixed: float | None = None,
                             kernel_fraction: float = 0.25,
                             chunk: int = 20000) -> FuzzReport:
    """Batch check of the operator inequality on random data.

    A kernel_fraction slice of every chunk is resampled inside ker P so
    the vanishing branch (and its exact gain) gets exercised whenever
    the kernel is nonzero.
    """
    n, dE = op.base_dim, op.domain_fiber.dim
    null = _null_space(op.full_symbol.matrix)
    rng = np.random.default_rng(seed)
    done = 0
    violations = 0
    min_margin = INF
    min_rel = INF
    branches = {"vanishing": 0, "nonvanishing": 0}
    last = {}
    while done < samples:
        m = min(chunk, samples - done)
        u = _complex_rows(rng, m, n * dE)
        phi = _complex_rows(rng, m, dE)
        c = np.full(m, c_fixed, dtype=float) if c_fixed is not None else _weights(rng, m, c_max)
        nk = int(kernel_fraction * m) if null.shape[1] else 0
        if nk:
            g = _complex_rows(rng, nk, null.shape[1])
            u[:nk] = g @ null.T  # columns of null span ker P
        last = batch_operator_margins(op, u, phi, c)
        margin, full_scale = last["margin"], last["full_scale"]
        bad = margin < -MARGIN_TOL_FACTOR * full_scale
        violations += int(np.sum(bad))
        min_margin = min(min_margin, float(np.min(margin)))
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(full_scale > 0, margin / np.maximum(full_scale, 1e-300), 0.0)
        min_rel = min(min_rel, float(np.min(rel)))
        branches["vanishing"] += int(np.sum(last["vanishing"]))
        branches["nonvanishing"] += int(np.sum(~last["vanishing"]))
        done += m
    return FuzzReport(
        "foldo", op.name, samples, violations,
        min_margin, min_rel, MARGIN_TOL_FACTOR, seed,
        (0.0, c_max) if c_fixed is None else (c_fixed, c_fixed),
        branches,
        extras={
            "gain_vanishing": last["gain_vanishing"],
            "rho_squared": last["rho_squared"],
            "epsilon": last["epsilon"],
            "kernel_dim": int(null.shape[1]),
        },
    )


def fuzz_hodge_inequality(n: int, k: int, fiber_dim: int, samples: int,
                          seed: int, c_max: float = 1e3,
                          c_fixed: float | None = None,
                          cstar_fixed: float | None = None,
                          kernel_fraction: float = 0.2,
                          chunk: int = 10000) -> FuzzReport:
    """Batch check of both forms of the two-sided inequality.

    Every chunk contains slices resampled inside ker(wedge) and
    ker(contraction) so both vanishing branches appear with their exact
    gains 1/k and 1/(n-k).
    """
    kit = _form_kit(n, k)
    dim = n * kit.dim_k * fiber_dim
    eps_mat = np.einsum("iab,ef->aeibf", kit.eps_k,
                        np.eye(fiber_dim)).reshape(kit.dim_up * fiber_dim, dim)
    iota_mat = np.einsum("iab,ef->aeibf", kit.iota_k,
                         np.eye(fiber_dim)).reshape(kit.dim_dn * fiber_dim, dim)
    null_eps = _null_space(eps_mat)
    null_iota = _null_space(iota_mat)
    rng = np.random.default_rng(seed)
    done = violations = 0
    min_margin = min_rel = INF
    min_margin_cor = INF
    dominance_residual = -INF
    block_identity_residual = 0.0
    pythagoras_residual = 0.0
    branches = {"vanishing": 0, "nonvanishing": 0}
    while done < samples:
        m = min(chunk, samples - done)
        v = _complex_rows(rng, m, dim)
        phi = _complex_rows(rng, m, kit.dim_k * fiber_dim)
        c = np.full(m, c_fixed, dtype=float) if c_fixed is not None else _weights(rng, m, c_max)
        cs = np.full(m, cstar_fixed, dtype=float) if cstar_fixed is not None else _weights(rng, m, c_max)
        nk = int(kernel_fraction * m)
        if nk and null_eps.shape[1]:
            v[:nk] = _complex_rows(rng, nk, null_eps.shape[1]) @ null_eps.T
        if nk and null_iota.shape[1]:
            v[nk:2 * nk] = _complex_rows(rng, nk, null_iota.shape[1]) @ null_iota.T
        out = batch_hodge_margins(n, k, fiber_dim, v, phi, c, cs,
                                  diagnostics=True)
        pythagoras_residual = max(pythagoras_residual, out["pythagoras_residual"])
        block_identity_residual = max(block_identity_residual,
                                      out["block_identity_residual"])
        dominance_residual = max(dominance_residual, out["dominance_residual"])
        margin, full_scale = out["margin"], out["full_scale"]
        margin_cor, cor_scale = out["margin_cor"], out["cor_scale"]
        bad = (margin < -MARGIN_TOL_FACTOR * full_scale) | (
            margin_cor < -MARGIN_TOL_FACTOR * cor_scale)
        violations += int(np.sum(bad))
        min_margin = min(min_margin, float(np.min(margin)))
        min_margin_cor = min(min_margin_cor, float(np.min(margin_cor)))
        min_rel = min(min_rel, float(np.min(margin / np.maximum(full_scale, 1e-300))))
        van = out["d_vanishing"] & out["dstar_vanishing"]
        branches["vanishing"] += int(np.sum(van))
        branches["nonvanishing"] += int(np.sum(~van))
        done += m
    return FuzzReport(
        "hodge", f"hodge:{n}:{k}" + (f" fiber={fiber_dim}" if fiber_dim > 1 else ""),
        samples, violations, min_margin, min_rel, MARGIN_TOL_FACTOR, seed,
        (0.0, c_max) if c_fixed is None else (c_fixed, cstar_fixed),
        branches,
        extras={
            "min_margin_corollary": min_margin_cor,
            "dominance_residual": dominance_residual,
            "block_identity_residual": block_identity_residual,
            "pythagoras_residual": pythagoras_residual,
            "gain_d_vanishing": 1.0 / k,
            "gain_dstar_vanishing": 1.0 / (n - k),
        },
    )


def fuzz_key_lemma(C: LinearMap, sub_basis: np.ndarray, samples: int,
                   seed: int, c_max: float = 1e3, label: str = "restriction",
                   forced_fraction: float = 0.25,
                   chunk: int = 20000) -> FuzzReport:
    """Batch check of the two-component lemma for one restricted map.

    A forced_fraction slice gets u1 adjusted so C(u1 + u2) = 0 exactly
    (up to least squares rounding), exercising the vanishing branch.
    """
    a = _restricted_top_eigenvalue(C, sub_basis)
    dimU = C.domain.dim
    r = sub_basis.shape[1]
    pinv = np.linalg.pinv(C.matrix)
    rng = np.random.default_rng(seed)
    done = violations = 0
    min_margin = min_rel = INF
    branches = {"vanishing": 0, "nonvanishing": 0}
    while done < samples:
        m = min(chunk, samples - done)
        u1 = _complex_rows(rng, m, dimU)
        u2 = _complex_rows(rng, m, r) @ sub_basis.T  # coords -> ambient
        c = _weights(rng, m, c_max)
        nf = int(forced_fraction * m)
        if nf:
            img = (u1[:nf] + u2[:nf]) @ C.matrix.T
            u1[:nf] = u1[:nf] - img @ pinv.T
        img_total = (u1 + u2) @ C.matrix.T
        img_first = u1 @ C.matrix.T
        tot_sq = np.sum(np.abs(img_total) ** 2, axis=1)
        first_sq = np.sum(np.abs(img_first) ** 2, axis=1)
        u2_sq = np.sum(np.abs(u2) ** 2, axis=1)
        scale = np.sum(np.abs(u1) ** 2, axis=1) + u2_sq
        vanishing = np.sqrt(tot_sq) <= BRANCH_NORM_FACTOR * scale
        if a == 0:
            gains = np.where(vanishing, INF, c)
        else:
            gains = np.where(vanishing, 1.0 / a, c / (1.0 + a * c))
        lhs = u2_sq + c * tot_sq
        rhs = gains * first_sq
        if a == 0:
            rhs = np.where(vanishing & (first_sq <= _PAIRING_ZERO_FACTOR * scale),
                           0.0, rhs)
        margin = lhs - rhs
        bad = margin < -MARGIN_TOL_FACTOR * scale
        violations += int(np.sum(bad))
        min_margin = min(min_margin, float(np.min(margin)))
        min_rel = min(min_rel, float(np.min(margin / np.maximum(scale, 1e-300))))
        branches["vanishing"] += int(np.sum(vanishing))
        branches["nonvanishing"] += int(np.sum(~vanishing))
        done += m
    return FuzzReport(
        "key-lemma", label, samples, violations, min_margin, min_rel,
        MARGIN_TOL_FACTOR, seed, (0.0, c_max), branches,
        extras={"spectral_bound": a},
    )


# ---------------------------------------------------------------------------
# catalog-derived restricted maps for the key lemma


def key_lemma_setups(n: int, k: int, fiber_dim: int = 1):
    """Restriction geometries taken from the form-block structure.

    With xi0 = e_1* the four blocks align with coordinate slices, so the
    restricted maps are column selections of the wedge/contraction
    symbols.  Returns a list of (label, C, sub_basis, exact_bound).
    """
    kit = _form_kit(n, k)
    from .spaces import exterior_power  # local: avoids a cycle at import time
    labels_k = exterior_power(n, k).labels
    dim_k, dE = kit.dim_k, fiber_dim
    has1 = [j for j, lab in enumerate(labels_k) if 1 in lab]
    no1 = [j for j, lab in enumerate(labels_k) if 1 not in lab]

    def cols(i_range, form_idx):
        out = []
        for i in i_range:
            for j in form_idx:
                for e in range(dE):
                    out.append((i * dim_k + j) * dE + e)
        return out

    c12 = cols([0], no1)
    c21 = cols(range(1, n), has1)
    c11 = cols([0], has1)
    c22 = cols(range(1, n), no1)
    dim = n * dim_k * dE
    eps_mat = np.einsum("iab,ef->aeibf", kit.eps_k, np.eye(dE)).reshape(
        kit.dim_up * dE, dim)
    iota_mat = np.einsum("iab,ef->aeibf", kit.iota_k, np.eye(dE)).reshape(
        kit.dim_dn * dE, dim)
    from .spaces import fiber_space  # local import, same reason
    setups = []
    for label, mat, keep, sub, bound in (
        ("wedge-on-mixed-blocks", eps_mat, c12 + c21, c21, float(k)),
        ("contraction-on-diagonal-blocks", iota_mat, c11 + c22, c22, float(n - k)),
    ):
        U = fiber_space(len(keep), "restricted")
        Y = fiber_space(mat.shape[0], "image")
        C = LinearMap(U, Y, mat[:, keep])
        sub_basis = np.zeros((len(keep), len(sub)), dtype=complex)
        for col, amb in enumerate(sub):
            sub_basis[keep.index(amb), col] = 1.0
        setups.append((label, C, sub_basis, bound))
    return setups


def line_component_setup(op: OperatorSpec):
    """Key-lemma geometry from an operator: C = F1-component of P.

    The second component is the perp part of the domain; the exact
    spectral bound is rho^2 - epsilon.
    """
    n, dE = op.base_dim, op.domain_fiber.dim
    xi0 = _first_basis(n)
    M = op.full_symbol.matrix
    line_embed = np.zeros((n * dE, dE))
    for e in range(dE):
        line_embed[e::dE, e] = xi0
    F1 = gram_schmidt_columns(M @ line_embed)
    from .spaces import fiber_space
    C = LinearMap(op.full_symbol.domain, fiber_space(F1.shape[1], "image"),
                  F1.conj().T @ M)
    sub_basis = np.zeros((n * dE, (n - 1) * dE), dtype=complex)
    for j in range(1, n):
        for e in range(dE):
            sub_basis[j * dE + e, (j - 1) * dE + e] = 1.0
    rho2, eps = operator_constants(op)
    return f"line-component-{op.name}", C, sub_basis, rho2 - eps
