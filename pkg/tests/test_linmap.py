import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from katolab.errors import NotHermitian
from katolab.linmap import (
    LinearMap,
    gram_schmidt_columns,
    hermitian_spectrum,
    identity_map,
    orthonormal_complement,
    stack_maps,
    tensor_map,
)
from katolab.spaces import direct_sum, fiber_space


def _random_map(rng, dout, din):
    m = rng.standard_normal((dout, din)) + 1j * rng.standard_normal((dout, din))
    return LinearMap(fiber_space(din, "in"), fiber_space(dout, "out"), m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_adjoint_inner_product_identity(seed, dout, din):
    # <P u, w> = <u, P* w> for all u, w; the defining property
    rng = np.random.default_rng(seed)
    P = _random_map(rng, dout, din)
    u = rng.standard_normal(din) + 1j * rng.standard_normal(din)
    w = rng.standard_normal(dout) + 1j * rng.standard_normal(dout)
    lhs = np.vdot(w, P.apply(u))
    rhs = np.vdot(P.adjoint().apply(w), u)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_compose_requires_matching_descriptors():
    rng = np.random.default_rng(0)
    A = _random_map(rng, 3, 4)
    B = _random_map(rng, 4, 2)
    with pytest.raises(ValueError):
        B.compose(A)
    # fiber tags differ even though dims agree
    C = A.compose(LinearMap(fiber_space(2, "in"), A.domain, rng.standard_normal((4, 2))))
    assert C.matrix.shape == (3, 2)


def test_matrix_is_frozen():
    P = identity_map(fiber_space(2, "x"))
    with pytest.raises(ValueError):
        P.matrix[0, 0] = 5.0


def test_hermitian_spectrum_quadratic_formula_oracle():
    # closed-form eigenvalues of [[a, b], [conj(b), d]]
    rng = np.random.default_rng(7)
    for _ in range(25):
        a, d = rng.standard_normal(2)
        b = rng.standard_normal() + 1j * rng.standard_normal()
        m = np.array([[a, b], [np.conj(b), d]])
        tr, disc = a + d, np.sqrt((a - d) ** 2 + 4 * abs(b) ** 2)
        expected = sorted([(tr - disc) / 2, (tr + disc) / 2])
        sp = hermitian_spectrum(LinearMap(fiber_space(2, "x"), fiber_space(2, "x"), m))
        assert np.allclose(sp.eigenvalues, expected, atol=1e-12)
        assert sp.residual <= 1e-12 * max(1.0, abs(tr) + disc)


def test_hermitian_spectrum_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitian):
        hermitian_spectrum(LinearMap(fiber_space(2, "x"), fiber_space(2, "x"), m))


def test_spectrum_is_ascending():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = g + g.conj().T
    sp = hermitian_spectrum(LinearMap(fiber_space(5, "x"), fiber_space(5, "x"), h))
    assert list(sp.eigenvalues) == sorted(sp.eigenvalues)


def test_gram_schmidt_orthonormal_and_deterministic():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    # duplicate a column so the rank drops to 3 at most
    m[:, 3] = 2.0 * m[:, 1]
    b1 = gram_schmidt_columns(m)
    b2 = gram_schmidt_columns(m)
    assert b1.shape == (6, 3)
    assert np.array_equal(b1, b2)
    assert np.allclose(b1.conj().T @ b1, np.eye(3), atol=1e-12)
    # same column space: projectors agree
    q, _ = np.linalg.qr(m[:, :3])
    p1 = b1 @ b1.conj().T
    p2 = q @ q.conj().T
    assert np.allclose(p1, p2, atol=1e-10)


def test_orthonormal_complement():
    rng = np.random.default_rng(13)
    b = gram_schmidt_columns(rng.standard_normal((5, 2)))
    c = orthonormal_complement(b, 5)
    assert c.shape == (5, 3)
    assert np.allclose(b.conj().T @ c, 0.0, atol=1e-12)
    full = np.hstack([b, c])
    assert np.allclose(full.conj().T @ full, np.eye(5), atol=1e-12)


def test_tensor_map_action_on_product_vectors():
    rng = np.random.default_rng(17)
    A = _random_map(rng, 2, 3)
    B = _random_map(rng, 3, 2)
    T = tensor_map(A, B)
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    out = T.apply(np.kron(u, v))
    assert np.allclose(out, np.kron(A.apply(u), B.apply(v)), atol=1e-12)


def test_stack_maps():
    rng = np.random.default_rng(19)
    A = _random_map(rng, 2, 3)
    B = LinearMap(A.domain, fiber_space(1, "z"), rng.standard_normal((1, 3)))
    cod = direct_sum((A.codomain, B.codomain))
    S = stack_maps((A, B), cod)
    assert S.matrix.shape == (3, 3)
    u = rng.standard_normal(3)
    assert np.allclose(S.apply(u)[:2], A.apply(u))
    assert np.allclose(S.apply(u)[2:], B.apply(u))
