import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tropiroots.xprec import XComplex, expand_from_roots, two_prod, two_sum, xadd, xdiv_real, xmul


def frac_parts(x):
    """Exact (real, imag) of an XComplex as Fractions."""
    scale = Fraction(2) ** x.exp
    return ((Fraction(x.rh) + Fraction(x.rl)) * scale, (Fraction(x.ih) + Fraction(x.il)) * scale)


def rel_err(x, exact_re, exact_im):
    re, im = frac_parts(x)
    num = abs(re - exact_re) + abs(im - exact_im)
    den = abs(exact_re) + abs(exact_im)
    return float(num / den) if den else float(num)


def test_two_sum_and_two_prod_are_error_free():
    a, b = 0.1, 1e-17
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)
    p, e = two_prod(1.0 / 3.0, 3.0000000000000004)
    assert Fraction(p) + Fraction(e) == Fraction(1.0 / 3.0) * Fraction(3.0000000000000004)


def test_xadd_keeps_bits_below_working_precision():
    x = xadd(XComplex.from_complex(1.0), XComplex.from_complex(2.0**-60))
    re, im = frac_parts(x)
    assert re == 1 + Fraction(1, 2**60) and im == 0
    assert x.to_complex() == 1.0


def test_xmul_extends_range():
    x = xmul(XComplex.from_complex(1e300), XComplex.from_complex(1e300))
    assert x.to_complex().real == math.inf
    assert math.isfinite(x.log_abs())
    assert abs(x.log_abs() / math.log(10) - 600) < 1e-12


def test_xmul_by_zero():
    assert xmul(XComplex.from_complex(3 + 4j), XComplex()).is_zero()


def test_huge_exponent_offsets():
    x = XComplex.from_pow2(0.75, 3_000_000)  # ~10**903089
    y = xmul(x, x)
    assert y.exp == 6_000_000
    assert y.mantissa()[0] == 0.5625


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e100, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e100, allow_nan=False, allow_infinity=False))
def test_xmul_xadd_relative_precision(a, b):
    xa, xb = XComplex.from_complex(a), XComplex.from_complex(b)
    ar, ai, br, bi = (Fraction(a.real), Fraction(a.imag), Fraction(b.real), Fraction(b.imag))
    # multiplication: componentwise-in-modulus bound
    p = xmul(xa, xb)
    pr, pi = ar * br - ai * bi, ar * bi + ai * br
    re, im = frac_parts(p)
    scale = (abs(ar) + abs(ai)) * (abs(br) + abs(bi))
    assert float((abs(re - pr) + abs(im - pi)) / scale) <= 2.0**-100
    s = xadd(xa, xb)
    re, im = frac_parts(s)
    scale = abs(ar) + abs(ai) + abs(br) + abs(bi)
    assert float((abs(re - (ar + br)) + abs(im - (ai + bi))) / scale) <= 2.0**-100


def test_xdiv_real():
    x = xdiv_real(XComplex.from_complex(1.0), 3.0)
    assert rel_err(x, Fraction(1, 3), Fraction(0)) < 2.0**-100


def test_expand_simple():
    _, c = expand_from_roots([1, -1], 1.0)
    assert np.array_equal(c, np.array([-1, 0, 1], dtype=complex))


def test_expand_wide_magnitudes_against_rationals():
    a, b = 1e15, 1e-15
    pairs, c = expand_from_roots([a, b], 1.0)
    fa, fb = Fraction(a), Fraction(b)
    # (z - a)(z - b) = z^2 - (a + b) z + a b
    assert rel_err(pairs[1], -(fa + fb), Fraction(0)) <= 2.0**-100
    assert rel_err(pairs[0], fa * fb, Fraction(0)) <= 2.0**-100
    re1, _ = frac_parts(pairs[1])
    assert re1 != Fraction(-a)  # the 1e-15 part survives
    assert c[0] == 1.0 and c[2] == 1.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-10, 10), st.integers(-10, 10)), min_size=1, max_size=12))
def test_expand_integer_roots_bit_exact(parts):
    roots = [complex(a, b) for a, b in parts]
    # exact Gaussian-integer expansion with Python ints
    re = [1]
    im = [0]
    for r in roots:
        nre, nim = [0] * (len(re) + 1), [0] * (len(re) + 1)
        for i in range(len(re)):
            nre[i + 1] += re[i]
            nim[i + 1] += im[i]
            nre[i] -= int(r.real) * re[i] - int(r.imag) * im[i]
            nim[i] -= int(r.real) * im[i] + int(r.imag) * re[i]
        re, im = nre, nim
    _, c = expand_from_roots(roots, 1.0)
    expected = np.array([complex(float(a), float(b)) for a, b in zip(re, im)])
    assert np.array_equal(c, expected)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 25))
def test_root_order_permutation_is_stable(seed, d):
    g = np.random.default_rng(seed)
    roots = 10.0 ** g.uniform(-8, 8, d) * np.exp(2j * np.pi * g.random(d))
    p1, _ = expand_from_roots(roots)
    p2, _ = expand_from_roots(roots[g.permutation(d)])
    # bound relative to the coefficients of prod(z + |z_k|), which dominate |p_i|
    _, bound = expand_from_roots(-np.abs(roots))
    for x, y, b in zip(p1, p2, np.abs(bound)):
        diff = xadd(x, -y)
        if not diff.is_zero():
            assert diff.log_abs() - math.log(b) <= -90 * math.log(2)


def test_to_complex_overflow_is_inf():
    x = XComplex.from_pow2(0.5, 2000)
    assert x.to_complex().real == math.inf
    assert XComplex.from_pow2(0.5, -2000).to_complex() == 0
