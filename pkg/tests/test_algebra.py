import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from c3geom.algebra import (
    C,
    H,
    KC,
    KR,
    O,
    AlgebraElement,
    AlgebraError,
    Embedding,
    bilinear,
    cd_mul,
    conj,
    embed,
    extend_to_automorphism,
    from_kcoords,
    hermitian,
    k_decompose,
    kcoords,
    norm2,
    orthonormal_complete,
    random_automorphism,
)

e = AlgebraElement.basis


# Independent oracle: the doubling formula on nested pairs,
# (x + y e)(u + v e) = (x u - conj(v) y) + (v x + y conj(u)) e.
def _split(c):
    h = len(c) // 2
    return c[:h], c[h:]


def _oconj(c):
    if len(c) == 1:
        return c
    x, y = _split(c)
    return np.concatenate([_oconj(x), -y])


def _omul(a, b):
    if len(a) == 1:
        return a * b
    x, y = _split(a)
    u, v = _split(b)
    return np.concatenate([
        _omul(x, u) - _omul(_oconj(v), y),
        _omul(v, x) + _omul(y, _oconj(u)),
    ])


def _hamilton(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def elements(dim):
    return arrays(np.float64, dim, elements=st.floats(-10, 10, allow_nan=False))


def test_quaternion_units():
    assert (e(H, 1) * e(H, 2)).close(e(H, 3))
    assert (e(H, 2) * e(H, 1)).close(-e(H, 3))


def test_octonion_e4_e1():
    assert (e(O, 4) * e(O, 1)).close(-e(O, 5))
    np.testing.assert_allclose(_omul(np.eye(8)[4], np.eye(8)[1]), -np.eye(8)[5])


def test_structure_table_matches_doubling_oracle():
    for dim in (1, 2, 4, 8):
        for i in range(dim):
            for j in range(dim):
                ei, ej = np.eye(dim)[i], np.eye(dim)[j]
                np.testing.assert_array_equal(cd_mul(ei, ej), _omul(ei, ej))


@given(elements(4), elements(4))
def test_quaternions_match_hamilton(p, q):
    np.testing.assert_allclose(cd_mul(p, q), _hamilton(p, q), atol=1e-9)


@given(elements(8), elements(8))
def test_octonions_match_oracle(x, y):
    np.testing.assert_allclose(cd_mul(x, y), _omul(x, y), atol=1e-9)


def test_unit_law_and_small_identities(rng):
    x = AlgebraElement(O, rng.standard_normal(8))
    assert (AlgebraElement.one(O) * x).close(x, 1e-15)
    z = AlgebraElement(C, [1.0, 1.0])
    assert conj(z).close(AlgebraElement(C, [1.0, -1.0]))
    assert norm2(AlgebraElement(H, [1.0, 1.0, 1.0, 1.0])) == 4.0
    assert bilinear(e(O, 2), e(O, 3)) == 0.0


@given(elements(8), elements(8))
def test_composition_law(x, y):
    nx, ny = np.dot(x, x), np.dot(y, y)
    assert abs(np.dot(cd_mul(x, y), cd_mul(x, y)) - nx * ny) <= 1e-9 * (1 + nx * ny)


@given(elements(8), elements(8))
def test_alternative_and_moufang(x, y):
    scale = 1 + np.dot(x, x) * np.dot(y, y)
    np.testing.assert_allclose(cd_mul(cd_mul(x, x), y), cd_mul(x, cd_mul(x, y)), atol=1e-9 * scale)
    np.testing.assert_allclose(cd_mul(cd_mul(y, x), x), cd_mul(y, cd_mul(x, x)), atol=1e-9 * scale)
    lhs = cd_mul(cd_mul(x, y), x)
    rhs = cd_mul(x, cd_mul(y, x))
    np.testing.assert_allclose(lhs, rhs, atol=1e-8 * scale * (1 + np.dot(x, x)))


@given(elements(8), elements(8))
def test_conjugation_reverses_products(x, y):
    np.testing.assert_allclose(_oconj(cd_mul(x, y)), cd_mul(_oconj(y), _oconj(x)), atol=1e-9)


def test_octonions_are_not_associative():
    a = (e(O, 1) * e(O, 2)) * e(O, 4)
    b = e(O, 1) * (e(O, 2) * e(O, 4))
    assert a.close(-b)


def test_k_decompose_examples():
    l, p = k_decompose(AlgebraElement(O, [2, 3, 5, 0, 0, 0, 0, 0]), KC)
    assert l == 2 + 3j and p.close(5 * e(O, 2))
    l, p = k_decompose(7 * AlgebraElement.one(H), KR)
    assert l == 7 and p.close(AlgebraElement.zero(H))
    l, p = k_decompose(e(H, 2), KR)
    assert l == 0 and p.close(e(H, 2))


def _herm_oracle(x, y, field):
    # real part <x, y>; imaginary part <e1, conj(x) y> = <x e1, y>
    re = float(np.dot(x.coeffs, y.coeffs))
    if field == KR:
        return complex(re)
    return complex(re, float(np.dot(cd_mul(x.coeffs, np.eye(8)[1]), y.coeffs)))


def test_hermitian_examples():
    assert hermitian(e(O, 2), e(O, 2), KC) == 1
    assert abs(hermitian(e(O, 2), e(O, 3), KC) - (-1j)) < 1e-15
    assert abs(_herm_oracle(e(O, 2), e(O, 3), KC) - (-1j)) < 1e-15
    assert hermitian(e(O, 2), e(O, 4), KC) == 0


@given(elements(8), elements(8))
def test_hermitian_matches_oracle(x, y):
    x, y = AlgebraElement(O, x), AlgebraElement(O, y)
    for field in (KR, KC):
        assert abs(hermitian(x, y, field) - _herm_oracle(x, y, field)) <= 1e-9 * (1 + x.norm2() * y.norm2())


@given(elements(8), elements(8), st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_hermitian_sesquilinear(x, y, l):
    x, y = AlgebraElement(O, x), AlgebraElement(O, y)
    yl = y * KC.scalar(l, O)
    xl = x * KC.scalar(l, O)
    tol = 1e-8 * (1 + abs(l)) * (1 + x.norm2() + y.norm2())
    assert abs(hermitian(x, yl, KC) - hermitian(x, y, KC) * l) <= tol
    assert abs(hermitian(xl, y, KC) - l.conjugate() * hermitian(x, y, KC)) <= tol
    assert abs(hermitian(x, y, KC) - hermitian(y, x, KC).conjugate()) <= 1e-9 * (1 + x.norm2() + y.norm2())


def test_kcoords_roundtrip(rng):
    for field, tag in ((KR, H), (KR, O), (KC, O)):
        v = rng.standard_normal(field.k_dimension(tag) - 1)
        if field == KC:
            v = v + 1j * rng.standard_normal(len(v))
        np.testing.assert_allclose(kcoords(from_kcoords(v, tag, field), field), v, atol=1e-12)


def test_orthonormal_complete_examples():
    out = orthonormal_complete([], KR, H)
    assert [u.close(e(H, i)) for i, u in enumerate(out, 1)] == [True] * 3
    out = orthonormal_complete([e(H, 1)], KR)
    assert out[1].close(e(H, 2)) and out[2].close(e(H, 3))
    s = (e(H, 1) + e(H, 2)) / math.sqrt(2)
    out = orthonormal_complete([s], KR)
    for i in range(3):
        for j in range(3):
            assert abs(hermitian(out[i], out[j], KR) - (i == j)) < 1e-12


def test_embed_examples():
    phi = embed(e(H, 1), e(H, 2), e(O, 1), e(O, 2), KR)
    assert phi(e(H, 3)).close(e(O, 3))
    phi = embed(e(H, 1), e(H, 2), e(O, 2), e(O, 4), KR)
    assert phi(e(H, 3)).close(e(O, 6))
    assert phi(e(H, 3)).close(AlgebraElement(O, _omul(np.eye(8)[2], np.eye(8)[4])))
    with pytest.raises(AlgebraError):
        embed(e(H, 1), 2 * e(H, 1), e(O, 1), 2 * e(O, 1), KR)


def test_embed_rejects_mismatched_products():
    with pytest.raises(AlgebraError):
        embed(e(H, 1), e(H, 2), e(O, 1), e(O, 1), KR)


def test_extend_to_automorphism_examples(rng):
    phi = embed(e(H, 1), e(H, 2), e(O, 1), e(O, 2), KR)
    psi = extend_to_automorphism(phi, e(O, 4))
    assert psi.close(Embedding.identity(O, KR), 1e-12)
    psi = extend_to_automorphism(phi, e(O, 5))
    assert psi(e(O, 4)).close(e(O, 5))
    assert psi.multiplicativity_error(rng, 100) < 1e-12
    with pytest.raises(AlgebraError):
        extend_to_automorphism(phi, e(O, 1))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_automorphisms_are_multiplicative(seed):
    rng = np.random.default_rng(seed)
    for tag, field in ((H, KR), (O, KR), (O, KC)):
        g = random_automorphism(tag, field, rng)
        assert g.multiplicativity_error(rng, 20) < 1e-9
        assert g.norm_error() < 1e-9
