"""Field laboratory: trigonometric sections on the flat torus.

A field is a finite trigonometric polynomial on R^n / 2 pi Z^n with
values in a fixed fiber,

    f(x) = sum_m  a_m cos(m.x) + b_m sin(m.x),

held as exact coefficient tables keyed by integer frequency vectors.
Differentiation, the exterior derivative, and the codifferential act on
the coefficients, so certificates like "this form is d of something"
are exact by construction, not approximate.  Scenario runners sample
such fields on deterministic grids and feed every point through the
same batched inequality arithmetic used by the fuzzers.
"""

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import FiberMismatch, UnknownScenario, ZeroSection
from .kato import (
    MARGIN_TOL_FACTOR,
    _form_kit,
    batch_hodge_margins,
    batch_operator_margins,
    hodge_gain_pair,
    operator_constants,
)
from .spaces import exterior_power, wedge_delete, wedge_insert
from .symbols import OperatorSpec, catalog

FIELD_MARGIN_TOL_FACTOR = 1e-8   # looser than the fuzzers: points accumulate
                                 # rounding through the trig evaluation
SKIP_NORM_FACTOR = 1e-8          # |phi(x)| below this * sup|phi| is skipped
CLOSEDNESS_TOL = 1e-13
SYMBOL_CONSISTENCY_TOL = 1e-12


# ---------------------------------------------------------------------------
# trigonometric fields


def _canonical_mode(m):
    """Frequency in canonical sign: zero, or first nonzero entry positive."""
    m = tuple(int(x) for x in m)
    for x in m:
        if x > 0:
            return m, 1
        if x < 0:
            return tuple(-y for y in m), -1
    return m, 1


class TrigField:
    """Fiber-valued trigonometric polynomial with exact coefficients.

    Frequencies are stored canonically (cos is even, sin is odd), sorted,
    as an integer matrix; cosine and sine coefficient rows line up with
    them.  The sine row of the zero frequency is identically dropped.
    """

    def __init__(self, n: int, fiber_dim: int, freqs: np.ndarray,
                 cos_coeffs: np.ndarray, sin_coeffs: np.ndarray):
        self.n = n
        self.fiber_dim = fiber_dim
        self.freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, n)
        self.cos_coeffs = np.asarray(cos_coeffs, dtype=np.complex128)
        self.sin_coeffs = np.asarray(sin_coeffs, dtype=np.complex128)
        if self.cos_coeffs.shape != (len(self.freqs), fiber_dim):
            raise FiberMismatch("cosine coefficient table has the wrong shape")
        if self.sin_coeffs.shape != (len(self.freqs), fiber_dim):
            raise FiberMismatch("sine coefficient table has the wrong shape")

    @classmethod
    def from_modes(cls, n: int, fiber_dim: int, modes) -> "TrigField":
        """Build from (frequency, cos coefficient, sin coefficient) triples."""
        table: dict = {}
        for m, a, b in modes:
            key, sign = _canonical_mode(m)
            a = np.asarray(a, dtype=np.complex128).reshape(fiber_dim)
            b = np.asarray(b, dtype=np.complex128).reshape(fiber_dim)
            acc = table.setdefault(key, [np.zeros(fiber_dim, dtype=np.complex128),
                                         np.zeros(fiber_dim, dtype=np.complex128)])
            acc[0] += a
            acc[1] += sign * b
        keys = sorted(table)
        freqs = np.array(keys, dtype=np.int64).reshape(-1, n)
        cos_c = np.array([table[k][0] for k in keys]).reshape(-1, fiber_dim)
        sin_c = np.array([table[k][1] for k in keys]).reshape(-1, fiber_dim)
        for row, key in enumerate(keys):
            if all(x == 0 for x in key):
                sin_c[row] = 0.0  # sin(0) contributes nothing
        return cls(n, fiber_dim, freqs, cos_c, sin_c)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at an (N, n) array of points, shape (N, fiber_dim)."""
        X = np.asarray(points, dtype=float).reshape(-1, self.n)
        phases = X @ self.freqs.T.astype(float)
        return np.cos(phases) @ self.cos_coeffs + np.sin(phases) @ self.sin_coeffs

    def map_fiber(self, matrix: np.ndarray) -> "TrigField":
        """Apply a constant fiber map to every coefficient."""
        M = np.asarray(matrix, dtype=np.complex128)
        if M.shape[1] != self.fiber_dim:
            raise FiberMismatch("fiber map does not match the field fiber")
        return TrigField(self.n, M.shape[0], self.freqs,
                         self.cos_coeffs @ M.T, self.sin_coeffs @ M.T)

    def gradient(self) -> "TrigField":
        """Full derivative, fiber V* (x) old fiber, direction-major layout."""
        n, dF = self.n, self.fiber_dim
        K = len(self.freqs)
        cos_g = np.zeros((K, n * dF), dtype=np.complex128)
        sin_g = np.zeros((K, n * dF), dtype=np.complex128)
        for i in range(n):
            mi = self.freqs[:, i].astype(float)[:, None]
            cos_g[:, i * dF:(i + 1) * dF] = mi * self.sin_coeffs
            sin_g[:, i * dF:(i + 1) * dF] = -mi * self.cos_coeffs
        return TrigField(n, n * dF, self.freqs, cos_g, sin_g)

    def sup_norm_estimate(self) -> float:
        # coefficient-sum bound; exact enough for scale decisions
        return float(np.sum(np.linalg.norm(self.cos_coeffs, axis=1))
                     + np.sum(np.linalg.norm(self.sin_coeffs, axis=1)))


def random_field(n: int, fiber_dim: int, mode_count: int, max_freq: int,
                 rng) -> TrigField:
    """Random band-limited field; always includes the constant mode."""
    modes = [(tuple([0] * n),
              rng.standard_normal(fiber_dim) + 1j * rng.standard_normal(fiber_dim),
              np.zeros(fiber_dim))]
    seen = set()
    while len(modes) < mode_count:
        m = tuple(int(x) for x in rng.integers(-max_freq, max_freq + 1, size=n))
        key, _ = _canonical_mode(m)
        if all(x == 0 for x in key) or key in seen:
            continue
        seen.add(key)
        modes.append((key,
                      rng.standard_normal(fiber_dim) + 1j * rng.standard_normal(fiber_dim),
                      rng.standard_normal(fiber_dim) + 1j * rng.standard_normal(fiber_dim)))
    return TrigField.from_modes(n, fiber_dim, modes)


# ---------------------------------------------------------------------------
# form calculus at the coefficient level


def _split_form_fiber(f: TrigField, k: int, extra_dim: int):
    dim_k = math.comb(f.n, k)
    if f.fiber_dim != dim_k * extra_dim:
        raise FiberMismatch(
            f"fiber dim {f.fiber_dim} is not C({f.n},{k}) * {extra_dim}")
    return dim_k


def exterior_derivative(f: TrigField, k: int, extra_dim: int = 1) -> TrigField:
    """d of a degree-k form field (extra fiber factors ride along).

    Acts per frequency: the partial derivative swaps cos and sin rows
    with the frequency factor, the wedge reshuffles label slots with
    insertion signs.
    """
    n = f.n
    _split_form_fiber(f, k, extra_dim)
    labels_k = exterior_power(n, k).labels
    labels_up = exterior_power(n, k + 1).labels if k + 1 <= n else []
    pos_up = {lab: j for j, lab in enumerate(labels_up)}
    K = len(f.freqs)
    dim_up = len(labels_up)
    cos_d = np.zeros((K, dim_up * extra_dim), dtype=np.complex128)
    sin_d = np.zeros((K, dim_up * extra_dim), dtype=np.complex128)
    A = f.cos_coeffs.reshape(K, -1, extra_dim)
    B = f.sin_coeffs.reshape(K, -1, extra_dim)
    for j, lab in enumerate(labels_k):
        for i in range(1, n + 1):
            ins = wedge_insert(i, lab)
            if ins is None:
                continue
            sign, up = ins
            t = pos_up[up]
            mi = f.freqs[:, i - 1].astype(float)[:, None]
            cos_d[:, t * extra_dim:(t + 1) * extra_dim] += sign * mi * B[:, j]
            sin_d[:, t * extra_dim:(t + 1) * extra_dim] -= sign * mi * A[:, j]
    return TrigField(n, dim_up * extra_dim, f.freqs, cos_d, sin_d)


def coderivative(f: TrigField, k: int, extra_dim: int = 1) -> TrigField:
    """Codifferential of a degree-k form field: minus contraction of the
    derivative, matching the adjoint of d on the flat torus."""
    n = f.n
    _split_form_fiber(f, k, extra_dim)
    labels_k = exterior_power(n, k).labels
    labels_dn = exterior_power(n, k - 1).labels if k >= 1 else []
    pos_dn = {lab: j for j, lab in enumerate(labels_dn)}
    K = len(f.freqs)
    dim_dn = len(labels_dn)
    cos_d = np.zeros((K, dim_dn * extra_dim), dtype=np.complex128)
    sin_d = np.zeros((K, dim_dn * extra_dim), dtype=np.complex128)
    A = f.cos_coeffs.reshape(K, -1, extra_dim)
    B = f.sin_coeffs.reshape(K, -1, extra_dim)
    for j, lab in enumerate(labels_k):
        for i in lab:
            sign, down = wedge_delete(i, lab)
            t = pos_dn[down]
            mi = f.freqs[:, i - 1].astype(float)[:, None]
            cos_d[:, t * extra_dim:(t + 1) * extra_dim] -= sign * mi * B[:, j]
            sin_d[:, t * extra_dim:(t + 1) * extra_dim] += sign * mi * A[:, j]
    return TrigField(n, dim_dn * extra_dim, f.freqs, cos_d, sin_d)


def apply_operator(op: OperatorSpec, f: TrigField) -> TrigField:
    """The operator applied to a section field, at the coefficient level.

    First order with constant coefficients on the flat torus: the value
    is the full symbol contracted against the derivative of f.
    """
    if f.n != op.base_dim or f.fiber_dim != op.domain_fiber.dim:
        raise FiberMismatch(
            f"operator {op.name} expects base {op.base_dim} and fiber "
            f"{op.domain_fiber.dim}, field has ({f.n}, {f.fiber_dim})")
    grad = f.gradient()
    M = op.full_symbol.matrix
    return TrigField(f.n, M.shape[0], grad.freqs,
                     grad.cos_coeffs @ M.T, grad.sin_coeffs @ M.T)


def hodge_star_matrix(n: int, k: int) -> np.ndarray:
    """Matrix of the Hodge star from degree k to degree n-k forms."""
    labels_k = exterior_power(n, k).labels
    labels_c = exterior_power(n, n - k).labels
    pos = {lab: j for j, lab in enumerate(labels_c)}
    S = np.zeros((len(labels_c), len(labels_k)))
    full = list(range(1, n + 1))
    for j, lab in enumerate(labels_k):
        comp = tuple(i for i in full if i not in lab)
        perm = list(lab) + list(comp)
        sign = 1
        for a in range(len(perm)):          # parity by counting inversions
            for b in range(a + 1, len(perm)):
                if perm[a] > perm[b]:
                    sign = -sign
        S[pos[comp], j] = sign
    return S


# ---------------------------------------------------------------------------
# deterministic sample grids


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def sample_points(n: int, count: int) -> np.ndarray:
    """Deterministic near-uniform grid on the torus, irrational offsets."""
    q = max(2, math.ceil(count ** (1.0 / n)))
    while q ** n < count:
        q += 1
    axes = []
    for j in range(n):
        off = math.modf(_GOLDEN * (j + 1))[0]
        axes.append((np.arange(q) + off) * (2.0 * math.pi / q))
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return X[:count]


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    """A section field paired with the inequality it is meant to probe."""

    name: str
    theorem: str                 # "foldo" or "hodge"
    n: int
    k: int | None
    fiber_dim: int               # extra fiber on forms, full fiber otherwise
    section: TrigField
    operator: OperatorSpec | None = None
    d_vanishing: bool | None = None        # exact certificates, None = detect
    dstar_vanishing: bool | None = None
    notes: str = ""


@dataclass
class ScenarioReport:
    scenario: str
    theorem: str
    operator: str
    n: int
    k: int | None
    fiber_dim: int
    c: float
    c_star: float | None
    sample_points: int
    skipped_points: int
    violations: int
    min_margin: float
    min_relative_margin: float
    branch: str
    gain_bound: float
    refined_limit_constant: str | None
    closedness_residual: float | None
    symbol_residual: float
    tolerance_factor: float
    seed: int
    extras: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok = self.violations == 0
        if self.closedness_residual is not None:
            ok = ok and self.closedness_residual <= CLOSEDNESS_TOL
        return ok and self.symbol_residual <= SYMBOL_CONSISTENCY_TOL

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "theorem": self.theorem,
            "operator": self.operator,
            "n": self.n,
            "k": self.k,
            "fiber_dim": self.fiber_dim,
            "c": self.c,
            "c_star": self.c_star,
            "sample_points": self.sample_points,
            "skipped_points": self.skipped_points,
            "violations": self.violations,
            "min_margin": self.min_margin,
            "min_relative_margin": self.min_relative_margin,
            "branch": self.branch,
            "gain_bound": self.gain_bound,
            "refined_limit_constant": self.refined_limit_constant,
            "closedness_residual": self.closedness_residual,
            "symbol_residual": self.symbol_residual,
            "tolerance_factor": self.tolerance_factor,
            "seed": self.seed,
            "passed": self.passed,
            **self.extras,
        }


SCENARIO_NAMES = (
    "generic-form", "closed-form", "coclosed-form", "yang-mills-F",
    "instanton-F", "monopole-omega", "dirac-spinor", "twistor-spinor",
    "higgs-dPhi",
)


def _default_degree(n: int) -> int:
    return 1 if n == 2 else 2


def make_scenario(name: str, n: int, k: int | None = None, seed: int = 0,
                  mode_count: int = 8, max_freq: int = 3) -> Scenario:
    """Build the section field and certificates for a named scenario."""
    rng = np.random.default_rng(seed)
    if name == "generic-form":
        k = _default_degree(n) if k is None else k
        _require_degree(name, n, k)
        f = random_field(n, math.comb(n, k), mode_count, max_freq, rng)
        return Scenario(name, "hodge", n, k, 1, f,
                        notes="no certificates, both branches detected")
    if name == "closed-form":
        k = _default_degree(n) if k is None else k
        _require_degree(name, n, k)
        psi = random_field(n, math.comb(n, k - 1), mode_count, max_freq, rng)
        f = exterior_derivative(psi, k - 1)
        return Scenario(name, "hodge", n, k, 1, f, d_vanishing=True,
                        notes="section is d of a potential, closedness exact")
    if name == "coclosed-form":
        k = _default_degree(n) if k is None else k
        _require_degree(name, n, k)
        psi = random_field(n, math.comb(n, k + 1), mode_count, max_freq, rng)
        f = coderivative(psi, k + 1)
        return Scenario(name, "hodge", n, k, 1, f, dstar_vanishing=True,
                        notes="section is the codifferential of a potential")
    if name == "yang-mills-F":
        if n < 3:
            raise UnknownScenario(f"{name} needs n >= 3, got n={n}")
        a = random_field(n, n * 3, mode_count, max_freq, rng)
        f = exterior_derivative(a, 1, extra_dim=3)
        return Scenario(name, "hodge", n, 2, 3, f, d_vanishing=True,
                        notes="curvature-style 2-form with a 3-dim fiber; "
                              "the second structure identity is exact")
    if name == "instanton-F":
        if n != 4:
            raise UnknownScenario(f"{name} is a dimension-4 scenario, got n={n}")
        a = random_field(4, 4 * 3, mode_count, max_freq, rng)
        f = exterior_derivative(a, 1, extra_dim=3)
        star = hodge_star_matrix(4, 2)
        sd = np.kron((np.eye(6) + star) / 2.0, np.eye(3))
        f = f.map_fiber(sd)
        # the self-dual part of an exact form is neither closed nor
        # coclosed in general; both branches are detected pointwise
        return Scenario(name, "hodge", 4, 2, 3, f,
                        notes="self-dual part of a curvature-style 2-form")
    if name == "monopole-omega":
        if n != 3:
            raise UnknownScenario(f"{name} is a dimension-3 scenario, got n={n}")
        psi = random_field(3, 3, mode_count, max_freq, rng)
        f = coderivative(psi, 2)
        return Scenario(name, "hodge", 3, 1, 1, f, dstar_vanishing=True,
                        notes="coclosed 1-form in three dimensions")
    if name == "dirac-spinor":
        op = catalog("dirac", n)
        f = random_field(n, op.domain_fiber.dim, mode_count, max_freq, rng)
        return Scenario(name, "foldo", n, None, op.domain_fiber.dim, f,
                        operator=op)
    if name == "twistor-spinor":
        op = catalog("twistor", n)
        f = random_field(n, op.domain_fiber.dim, mode_count, max_freq, rng)
        return Scenario(name, "foldo", n, None, op.domain_fiber.dim, f,
                        operator=op)
    if name == "higgs-dPhi":
        psi = random_field(n, 1, mode_count, max_freq, rng)
        f = exterior_derivative(psi, 0)
        return Scenario(name, "hodge", n, 1, 1, f, d_vanishing=True,
                        notes="gradient 1-form of a scalar potential")
    raise UnknownScenario(f"unknown scenario '{name}'; choose from "
                          + ", ".join(SCENARIO_NAMES))


def _require_degree(name: str, n: int, k: int):
    if k < 1 or k > n - 1:
        raise UnknownScenario(f"{name} needs 1 <= k <= {n - 1}, got k={k}")


def scenario_grid(dims) -> list:
    """(name, n, k) combinations defined for the given dimensions."""
    out = []
    for n in dims:
        for name in ("generic-form", "closed-form", "coclosed-form"):
            out.append((name, n, _default_degree(n)))
        if n >= 3:
            out.append(("yang-mills-F", n, 2))
        if n == 4:
            out.append(("instanton-F", n, 2))
        if n == 3:
            out.append(("monopole-omega", n, 1))
        out.append(("dirac-spinor", n, None))
        out.append(("twistor-spinor", n, None))
        out.append(("higgs-dPhi", n, 1))
    return out


# ---------------------------------------------------------------------------
# consistency residuals


def symbol_consistency_residual(sc: Scenario, points: np.ndarray) -> float:
    """Worst pointwise gap between coefficient calculus and symbol action.

    For form scenarios: d and the codifferential evaluated from their
    coefficient tables against the wedge/contraction symbol applied to
    the evaluated gradient.  For operator scenarios: the operator applied
    at the coefficient level against the symbol on gradient values.
    Relative to the sup of the gradient.
    """
    f = sc.section
    grad_vals = f.gradient().evaluate(points)
    ref = max(float(np.max(np.linalg.norm(grad_vals, axis=1))), 1e-300)
    if sc.theorem == "hodge":
        kit = _form_kit(sc.n, sc.k)
        N = len(points)
        V = grad_vals.reshape(N, sc.n, kit.dim_k, sc.fiber_dim)
        eps_grad = np.einsum("iab,nibf->naf", kit.eps_k, V).reshape(N, -1)
        iota_grad = np.einsum("iab,nibf->naf", kit.iota_k, V).reshape(N, -1)
        d_vals = exterior_derivative(f, sc.k, sc.fiber_dim).evaluate(points)
        cod_vals = coderivative(f, sc.k, sc.fiber_dim).evaluate(points)
        r1 = float(np.max(np.linalg.norm(d_vals - eps_grad, axis=1)))
        r2 = float(np.max(np.linalg.norm(cod_vals + iota_grad, axis=1)))
        return max(r1, r2) / ref
    op_vals = apply_operator(sc.operator, f).evaluate(points)
    sym_vals = grad_vals @ sc.operator.full_symbol.matrix.T
    return float(np.max(np.linalg.norm(op_vals - sym_vals, axis=1))) / ref


def closedness_residual(sc: Scenario, points: np.ndarray) -> float | None:
    """Sup of the certified-zero derivative over the grid, or None."""
    if sc.theorem != "hodge" or (not sc.d_vanishing and not sc.dstar_vanishing):
        return None
    f = sc.section
    ref = max(f.gradient().sup_norm_estimate(), 1e-300)
    worst = 0.0
    if sc.d_vanishing:
        vals = exterior_derivative(f, sc.k, sc.fiber_dim).evaluate(points)
        worst = max(worst, float(np.max(np.linalg.norm(vals, axis=1))))
    if sc.dstar_vanishing:
        vals = coderivative(f, sc.k, sc.fiber_dim).evaluate(points)
        worst = max(worst, float(np.max(np.linalg.norm(vals, axis=1))))
    return worst / ref


# ---------------------------------------------------------------------------
# scenario runner


def _refined_limit(sc: Scenario) -> str | None:
    if sc.theorem == "hodge":
        g = min(Fraction(1, sc.k), Fraction(1, sc.n - sc.k))
        return str(1 + g)
    rho = sc.operator.rho_squared
    eps = sc.operator.epsilon
    if rho is None or eps is None or rho == eps:
        return None
    g = Fraction(eps) / (Fraction(rho) - Fraction(eps))
    return str(1 + g)


def evaluate_scenario(sc: Scenario, X: np.ndarray, c: float,
                      c_star: float) -> dict:
    """Per-point margins of a scenario on given points.

    Returns kept points, margins, the per-point tolerance scales, and
    the labeling the report needs.  Points where the section nearly
    vanishes are dropped (the surrogate is undefined there).
    """
    phi = sc.section.evaluate(X)
    grads = sc.section.gradient().evaluate(X)
    norms = np.linalg.norm(phi, axis=1)
    keep = norms > SKIP_NORM_FACTOR * float(np.max(norms))
    if not np.any(keep):
        raise ZeroSection(f"scenario {sc.name} produced a vanishing section")
    phi, grads = phi[keep], grads[keep]
    if sc.theorem == "hodge":
        out = batch_hodge_margins(sc.n, sc.k, sc.fiber_dim, grads, phi,
                                  c, c_star, d_vanishing=sc.d_vanishing,
                                  dstar_vanishing=sc.dstar_vanishing)
        margin = np.minimum(out["margin"], out["margin_cor"])
        tol_scale = np.maximum(out["full_scale"], out["cor_scale"])
        gain = float(np.min(out["gain"]))
        branch = ("vanishing" if (sc.d_vanishing or sc.dstar_vanishing)
                  else "nonvanishing")
        op_label = f"hodge:{sc.n}:{sc.k}"
        cstar_out = float(c_star)
        # per-side gains under the declared certificates; the bound in
        # force is their minimum, but each side is worth reporting
        pair = hodge_gain_pair(c, c_star, sc.n, sc.k,
                               bool(sc.d_vanishing), bool(sc.dstar_vanishing))
        side_gains = {"gain_d": float(pair.d_gain),
                      "gain_dstar": float(pair.dstar_gain)}
    else:
        out = batch_operator_margins(sc.operator, grads, phi, c)
        margin, tol_scale = out["margin"], out["full_scale"]
        gain = float(np.min(np.where(out["vanishing"], np.inf,
                                     out["epsilon"] * c
                                     / (1.0 + (out["rho_squared"] - out["epsilon"]) * c))))
        branch = "vanishing" if bool(np.all(out["vanishing"])) else "nonvanishing"
        op_label = sc.operator.name
        cstar_out = None
        side_gains = {}
    return {
        "points": X[keep], "kept": keep, "margin": margin,
        "tol_scale": tol_scale, "gain": gain, "branch": branch,
        "operator": op_label, "c_star": cstar_out,
        "skipped": int(np.sum(~keep)), "side_gains": side_gains,
    }


def run_scenario(name: str, n: int, k: int | None = None, c: float = 1.0,
                 c_star: float = 1.0, points: int = 10000, seed: int = 0,
                 mode_count: int = 8, max_freq: int = 3) -> ScenarioReport:
    """Sample a scenario on its grid and check every admissible point."""
    sc = make_scenario(name, n, k=k, seed=seed, mode_count=mode_count,
                       max_freq=max_freq)
    X = sample_points(sc.n, points)
    ev = evaluate_scenario(sc, X, c, c_star)
    margin, tol_scale = ev["margin"], ev["tol_scale"]
    gain, branch = ev["gain"], ev["branch"]
    op_label, cstar_out, skipped = ev["operator"], ev["c_star"], ev["skipped"]
    violations = int(np.sum(margin < -FIELD_MARGIN_TOL_FACTOR * tol_scale))
    min_rel = float(np.min(margin / np.maximum(tol_scale, 1e-300)))
    return ScenarioReport(
        scenario=name, theorem=sc.theorem, operator=op_label, n=sc.n, k=sc.k,
        fiber_dim=sc.fiber_dim, c=float(c), c_star=cstar_out,
        sample_points=int(len(X)), skipped_points=skipped,
        violations=violations, min_margin=float(np.min(margin)),
        min_relative_margin=min_rel, branch=branch, gain_bound=gain,
        refined_limit_constant=_refined_limit(sc),
        closedness_residual=closedness_residual(sc, X),
        symbol_residual=symbol_consistency_residual(sc, X),
        tolerance_factor=FIELD_MARGIN_TOL_FACTOR, seed=seed,
        extras={**ev["side_gains"], "notes": sc.notes},
    )
