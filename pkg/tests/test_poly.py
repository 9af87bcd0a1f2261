import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropiroots.errors import DimensionMismatch, GenerationFailed, InvalidInput, ZeroPolynomial
from tropiroots.poly import (MatrixPolynomial, Polynomial, deflate_zero_roots, eval_magnitude_terms,
                             evaluate, load_json, log_abs_value, random_coeffs, random_from_roots,
                             random_matrix_poly)

from conftest import EPS, GRADED

mpmath.mp.prec = 200


def mp_eval(coeffs, z):
    acc = mpmath.mpc(0)
    for c in reversed(list(coeffs)):
        acc = acc * mpmath.mpc(z) + mpmath.mpc(c)
    return acc


def test_eval_basic():
    assert evaluate(Polynomial([-1, 0, 1]), 2) == 3
    assert evaluate(Polynomial([7 + 1j, 3, 5]), 0) == 7 + 1j


def test_eval_graded_quartic_at_one(graded):
    exact = complex(mp_eval(GRADED, 1))
    assert abs(exact - 2.00001e-25) < 1e-35
    assert abs(evaluate(graded, 1) - exact) <= 4 * EPS


def test_log_abs_value_large_argument():
    p = Polynomial([1, 0, 0, 1])
    z = 1e200
    assert math.isclose(log_abs_value(p, z), 600 * math.log(10), rel_tol=1e-14)
    assert log_abs_value(Polynomial([-1, 1]), 1.0) == -math.inf


def test_magnitude_terms_examples(graded):
    assert eval_magnitude_terms(Polynomial([-1, 0, 1]), 1.0) == (2.0, 1.0, 0)
    assert eval_magnitude_terms(Polynomial([0, 0, 1]), 2.0) == (4.0, 4.0, 2)
    s, m, j = eval_magnitude_terms(graded, 1e-15)
    assert j in (1, 3)
    assert math.isclose(m, 1e-45, rel_tol=1e-12)


def test_magnitude_terms_no_overflow():
    p = Polynomial(np.ones(101))
    s, m, j = eval_magnitude_terms(p, 1e20)
    assert s == math.inf and j == 100  # 1e2000 is not a float
    from tropiroots.poly import log_magnitude_terms
    ls, lm, _ = log_magnitude_terms(np.ones(101), 1e20)
    assert math.isclose(lm, 2000 * math.log(10), rel_tol=1e-14)
    assert ls >= lm


def test_magnitude_terms_rejects_negative_r():
    with pytest.raises(InvalidInput):
        eval_magnitude_terms(Polynomial([1, 1]), -1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e10), min_size=1, max_size=30), st.floats(0, 1e3))
def test_magnitude_sum_bounds(mags, r):
    mags[-1] = mags[-1] or 1.0
    s, m, _ = eval_magnitude_terms(np.array(mags), r)
    assert s >= m * (1 - 4 * EPS)
    assert s <= len(mags) * m * (1 + 4 * EPS)


def test_deflate_zero_roots_examples():
    q, m0 = deflate_zero_roots(Polynomial([0, 0, 1, 2]))
    assert m0 == 2 and list(q.coeffs) == [1, 2]
    q, m0 = deflate_zero_roots(Polynomial([5, 1]))
    assert m0 == 0 and list(q.coeffs) == [5, 1]
    q, m0 = deflate_zero_roots(Polynomial([0, 1e-30, 0, 1]))
    assert m0 == 1 and list(q.coeffs) == [1e-30, 0, 1]
    with pytest.raises(ZeroPolynomial):
        deflate_zero_roots(Polynomial([0, 0]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5), st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False), min_size=1, max_size=8))
def test_deflate_zero_roots_roundtrip(m, tail):
    tail[0] = tail[0] or 1.0
    p = Polynomial([0] * m + tail)
    q, m0 = deflate_zero_roots(p)
    assert m0 == m
    assert np.array_equal(np.concatenate([np.zeros(m0), q.coeffs]), p.coeffs)


def test_polynomial_validation_and_trim():
    with pytest.raises(InvalidInput):
        Polynomial([1, float("nan")])
    with pytest.raises(InvalidInput):
        Polynomial([])
    assert Polynomial([1, 2, 0, 0]).trimmed() == Polynomial([1, 2])
    with pytest.raises(ZeroPolynomial):
        Polynomial([0, 0]).trimmed()
    assert Polynomial([1, 2]).is_real() and not Polynomial([1j, 2]).is_real()


def test_json_roundtrip(tmp_path):
    p = Polynomial([1 + 2j, -3, 0.5j])
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_json()))
    assert load_json(path) == p
    P = MatrixPolynomial(np.arange(12).reshape(3, 2, 2) + 1j)
    path.write_text(json.dumps(P.to_json()))
    Q = load_json(path)
    assert isinstance(Q, MatrixPolynomial) and np.array_equal(Q.coeffs, P.coeffs)


def test_json_malformed():
    with pytest.raises(InvalidInput):
        Polynomial.from_json({"coefs": []})
    with pytest.raises(DimensionMismatch):
        MatrixPolynomial.from_json({"size": 3, "coeffs": [[[[1, 0]]]]})


def test_matrix_polynomial_checks():
    with pytest.raises(DimensionMismatch):
        MatrixPolynomial(np.zeros((2, 2, 3)))
    with pytest.raises(InvalidInput):
        MatrixPolynomial(np.array([np.eye(2), np.zeros((2, 2))]))
    P = MatrixPolynomial(np.array([-np.eye(2), np.zeros((2, 2)), np.eye(2)]))
    assert np.allclose(P(2.0), 3 * np.eye(2))
    assert MatrixPolynomial.from_scalar(Polynomial([1, 2])).size == 1


def test_random_from_roots_degree_one():
    p, z = random_from_roots(1, (0, 0), seed=3)
    assert abs(abs(z[0]) - 1) < 1e-15
    assert p.coeffs[1] == 1 and p.coeffs[0] == -z[0]


def test_random_from_roots_deterministic():
    p1, z1 = random_from_roots(50, (-20, 20), seed=11)
    p2, z2 = random_from_roots(50, (-20, 20), seed=11)
    assert p1 == p2 and np.array_equal(z1, z2)
    assert np.all(np.isfinite(p1.coeffs))


@pytest.mark.parametrize("mmax", [1, 3, 30])
def test_random_from_roots_multiplicities(mmax):
    p, z = random_from_roots(30, (-10, 10), multiplicity_max=mmax, seed=mmax)
    vals, counts = np.unique(z, return_counts=True)
    assert counts.sum() == 30 and counts.max() <= mmax
    assert p.degree == 30


def test_random_from_roots_full_multiplicity_bound():
    # with multiplicity_max = d every multiplicity in 1..d is possible
    seen = set()
    for s in range(40):
        _, z = random_from_roots(4, (0, 1), multiplicity_max=4, seed=s)
        seen.add(len(np.unique(z)))
    assert 1 in seen and seen <= {1, 2, 3, 4}


@pytest.mark.parametrize("seed", range(5))
def test_random_from_roots_residual_bound(seed):
    p, z = random_from_roots(30, (-20, 20), seed=seed)
    for zk in z:
        val = abs(mp_eval(p.coeffs, zk))
        s, _, _ = eval_magnitude_terms(p, abs(zk))
        assert val <= 1e3 * EPS * s


def test_random_generation_failure():
    with pytest.raises(GenerationFailed):
        random_from_roots(3, (200, 200), seed=0)
    with pytest.raises(GenerationFailed):
        random_coeffs(3, (320, 330), seed=0)


def test_random_coeffs():
    p = random_coeffs(2, (0, 0), seed=1)
    assert np.allclose(np.abs(p.coeffs), 1.0, rtol=0, atol=1e-15)
    assert random_coeffs(100, (-20, 20), seed=5) == random_coeffs(100, (-20, 20), seed=5)
    assert random_coeffs(20, (-20, 20), seed=5).degree == 20


def test_random_matrix_poly_norms():
    P = random_matrix_poly(3, 4, (-2, 2), seed=9)
    norms = [np.linalg.norm(c, 2) for c in P.coeffs]
    e = np.log10(norms)
    assert np.all((e >= -2 - 1e-12) & (e <= 2 + 1e-12))
    assert np.array_equal(random_matrix_poly(3, 4, seed=9).coeffs, random_matrix_poly(3, 4, seed=9).coeffs)
