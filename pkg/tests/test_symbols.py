from fractions import Fraction

import numpy as np
import pytest

from katolab.errors import BadDegree, UnknownName, ZeroCovector
from katolab.linmap import LinearMap
from katolab.projections import conformity_factor, conformity_report
from katolab.spaces import dual_space, fiber_space, tensor_product
from katolab.symbols import (
    OperatorSpec,
    catalog,
    ellipticity_constant,
    invariance_check,
    invariance_deviation,
    parse_op_string,
    principal_square,
    quasi_unit_covectors,
    random_unit_covectors,
    symbol_at,
    twist,
)

# frozen ellipticity constants: label -> (builder args, exact epsilon)
FROZEN_EPSILON = [
    (("connection", 3, None, 3), Fraction(1)),
    (("dirac", 2, None, None), Fraction(1)),
    (("dirac", 3, None, None), Fraction(1)),
    (("dirac", 5, None, None), Fraction(1)),
    (("twistor", 2, None, None), Fraction(1, 2)),
    (("twistor", 3, None, None), Fraction(2, 3)),
    (("twistor", 4, None, None), Fraction(3, 4)),
    (("hodge", 4, 1, None), Fraction(1, 4)),
    (("hodge", 4, 2, None), Fraction(1, 3)),
    (("hodge", 6, 2, None), Fraction(1, 5)),
    (("hodge", 5, 4, None), Fraction(1, 5)),
    (("exterior-only", 4, 1, None), Fraction(0)),
    (("exterior-only", 4, 0, None), Fraction(1)),
    (("interior-only", 4, 3, None), Fraction(0)),
    (("interior-only", 4, 4, None), Fraction(1)),
]


def _build(args):
    name, n, k, fiber_dim = args
    return catalog(name, n, k=k, fiber_dim=fiber_dim)


@pytest.mark.parametrize("args,expected", FROZEN_EPSILON)
def test_frozen_ellipticity_constants(args, expected):
    op = _build(args)
    assert op.epsilon == expected
    res = ellipticity_constant(op)
    assert res.invariant
    assert res.method == "invariant-exact"
    assert abs(res.epsilon - float(expected)) <= 1e-9


@pytest.mark.parametrize("name,n,k", [
    ("connection", 4, None), ("dirac", 3, None), ("twistor", 3, None),
    ("hodge", 4, 2), ("exterior-only", 3, 1), ("interior-only", 3, 2),
])
def test_catalog_rho_matches_measurement(name, n, k):
    op = catalog(name, n, k=k)
    rep = conformity_factor(op.full_symbol, tol=1e-10)
    assert abs(rep.rho_squared - float(op.rho_squared)) <= 1e-10 * float(op.rho_squared)


def test_epsilon_never_exceeds_rho_and_connection_saturates():
    cases = [("connection", 3, None), ("dirac", 3, None), ("twistor", 3, None),
             ("hodge", 5, 2, None)]
    for name, n, k, *_ in [c + (None,) * (4 - len(c)) for c in cases]:
        op = catalog(name, n, k=k)
        eps = ellipticity_constant(op).epsilon
        rho = conformity_factor(op.full_symbol).rho_squared
        assert eps <= rho + 1e-9
        if name == "connection":
            assert abs(eps - rho) <= 1e-9
        else:
            assert eps < rho - 1e-6


def test_symbol_at_is_linear_in_xi():
    op = catalog("dirac", 3)
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    a, b = 0.7, -1.3
    lhs = symbol_at(op, a * x + b * y).matrix
    rhs = a * symbol_at(op, x).matrix + b * symbol_at(op, y).matrix
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_symbol_at_rejects_zero():
    op = catalog("dirac", 2)
    with pytest.raises(ZeroCovector):
        symbol_at(op, np.zeros(2))


def test_unnormalized_hodge_weights_fail_conformity():
    op = catalog("hodge", 5, k=2, weights=(1.0, 1.0))
    assert op.rho_squared is None
    rep = conformity_report(op.full_symbol)
    assert rep.surjective and not rep.certified


def _axis_weighted_symbol():
    # P_xi = [[xi_1, xi_2], [-xi_2, 2 xi_1]]: injectively elliptic but
    # the spectrum of P_xi* P_xi genuinely depends on the direction;
    # columns of the full symbol are (direction, fiber) pairs
    E = fiber_space(2, "e")
    F = fiber_space(2, "f")
    dom = tensor_product((dual_space(2), E))
    m = np.zeros((2, 4), dtype=complex)
    m[0, 0] = 1.0    # xi1, e1 -> f1
    m[1, 1] = 2.0    # xi1, e2 -> f2
    m[0, 3] = 1.0    # xi2, e2 -> f1
    m[1, 2] = -1.0   # xi2, e1 -> f2
    return OperatorSpec("skewed", 2, E, F, LinearMap(dom, F, m))


def test_non_invariant_symbol_detected():
    op = _axis_weighted_symbol()
    assert not invariance_check(op)
    assert invariance_deviation(op) > 1e-3


def test_ellipticity_fallback_matches_closed_form_oracle():
    # with t = xi_1^2 the smallest eigenvalue is (2 + 3t - sqrt(5t^2 + 4t))/2,
    # minimized at t = 1/5 with value 4/5 (stationarity: 5t^2 + 4t - 1 = 0)
    op = _axis_weighted_symbol()
    t = np.linspace(0.0, 1.0, 20001)
    lam = (2.0 + 3.0 * t - np.sqrt(5.0 * t * t + 4.0 * t)) / 2.0
    oracle = 0.8
    assert abs(float(lam.min()) - oracle) <= 1e-8
    scan = min(
        float(np.linalg.eigvalsh(principal_square(op, xi))[0])
        for xi in quasi_unit_covectors(2, 500)
    )
    assert scan >= oracle - 1e-12
    res = ellipticity_constant(op, coarse_samples=512, refine_steps=30)
    assert not res.invariant
    assert res.method == "sampled-upper-bound"
    assert res.epsilon >= oracle - 1e-9          # never below the truth
    assert abs(res.epsilon - oracle) <= 1e-6     # and refined close to it


def test_sampling_refinement_is_monotone():
    op = _axis_weighted_symbol()

    def sweep_min(count):
        return min(
            float(np.linalg.eigvalsh(principal_square(op, xi))[0])
            for xi in quasi_unit_covectors(2, count)
        )

    assert sweep_min(256) <= sweep_min(64) + 1e-15


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_quasi_unit_covectors_are_unit_and_deterministic(n):
    a = quasi_unit_covectors(n, 40)
    b = quasi_unit_covectors(n, 40)
    assert np.array_equal(a, b)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)
    # nesting: a longer sweep extends the shorter one
    c = quasi_unit_covectors(n, 80)
    assert np.array_equal(c[:40], a)


def test_random_unit_covectors_seeded():
    r1 = random_unit_covectors(4, 16, np.random.default_rng(7))
    r2 = random_unit_covectors(4, 16, np.random.default_rng(7))
    assert np.array_equal(r1, r2)
    assert np.allclose(np.linalg.norm(r1, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("extra_dim", [1, 2, 3])
def test_twist_preserves_rho_and_epsilon(extra_dim):
    base = catalog("hodge", 4, k=1)
    tw = twist(base, fiber_space(extra_dim, "aux"))
    rep = conformity_factor(tw.full_symbol, tol=1e-10)
    assert abs(rep.rho_squared - 1.0) <= 1e-10
    r_base = ellipticity_constant(base)
    r_tw = ellipticity_constant(tw)
    assert abs(r_base.epsilon - r_tw.epsilon) <= 1e-10
    assert tw.domain_fiber.dim == base.domain_fiber.dim * extra_dim


def test_twist_action_factorizes():
    op = catalog("dirac", 2)
    tw = twist(op, fiber_space(2, "aux"))
    rng = np.random.default_rng(9)
    xi = rng.standard_normal(2)
    s = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    out = symbol_at(tw, xi).apply(np.kron(s, w))
    assert np.allclose(out, np.kron(symbol_at(op, xi).apply(s), w), atol=1e-12)


def test_catalog_errors():
    with pytest.raises(UnknownName):
        catalog("unknown-op", 3)
    with pytest.raises(BadDegree):
        catalog("hodge", 4, k=0)
    with pytest.raises(BadDegree):
        catalog("hodge", 4, k=4)
    with pytest.raises(BadDegree):
        catalog("exterior-only", 3, k=3)
    with pytest.raises(UnknownName):
        parse_op_string("dirac")
    with pytest.raises(UnknownName):
        parse_op_string("dirac:x")


def test_parse_op_string():
    op = parse_op_string("hodge:5:2")
    assert op.name == "hodge" and op.base_dim == 5
    con = parse_op_string("connection:3:4")
    assert con.domain_fiber.dim == 4
    assert parse_op_string("dirac:3").base_dim == 3
