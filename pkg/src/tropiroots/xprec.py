"""Double-double complex arithmetic with an exponent offset.

Each part (real, imaginary) is an unevaluated sum ``hi + lo`` of two floats,
and the whole value is scaled by ``2**exp``.  The mantissa parts are kept
below 1 in modulus, so products of values far outside the float range
(10**600, 10**-900, ...) stay finite.  This is what the backward-error code
uses to rebuild ``p_d * prod(z - z_k)`` from computed roots.
"""

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
_LN2 = math.log(2.0)
# beyond this exponent gap the smaller operand is below the pair resolution
_MAX_SHIFT = 1200


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    """Requires |a| >= |b| (or a == 0)."""
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl + al * bh
    return quick_two_sum(p, e)


class XComplex:
    """Complex number ``((rh + rl) + 1j*(ih + il)) * 2**exp``."""

    __slots__ = ("rh", "rl", "ih", "il", "exp")

    def __init__(self, rh=0.0, rl=0.0, ih=0.0, il=0.0, exp=0):
        m = max(abs(rh), abs(ih))
        if m == 0.0:
            if rl != 0.0 or il != 0.0:
                # hi parts cancelled exactly; promote the low parts
                rh, rl = two_sum(rl, 0.0)
                ih, il = two_sum(il, 0.0)
                m = max(abs(rh), abs(ih))
            else:
                self.rh = self.rl = self.ih = self.il = 0.0
                self.exp = 0
                return
        k = math.frexp(m)[1]
        self.rh = math.ldexp(rh, -k)
        self.rl = math.ldexp(rl, -k)
        self.ih = math.ldexp(ih, -k)
        self.il = math.ldexp(il, -k)
        self.exp = exp + k

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"non-finite value {z!r}")
        return cls(z.real, 0.0, z.imag, 0.0, 0)

    @classmethod
    def from_pow2(cls, mantissa, exp):
        """Real value ``mantissa * 2**exp`` without forming it as a float."""
        return cls(float(mantissa), 0.0, 0.0, 0.0, int(exp))

    def is_zero(self):
        return self.rh == 0.0 and self.ih == 0.0

    @property
    def real_pair(self):
        return self.rh, self.rl

    @property
    def imag_pair(self):
        return self.ih, self.il

    def to_complex(self):
        """Round to a working-precision complex (inf on overflow)."""
        re = self.rh + self.rl
        im = self.ih + self.il
        try:
            return complex(math.ldexp(re, self.exp), math.ldexp(im, self.exp))
        except OverflowError:
            return complex(_ldexp_inf(re, self.exp), _ldexp_inf(im, self.exp))

    def mantissa(self):
        """Return (m, e) with self ~= m * 2**e and m a rounded complex, |m| < 2."""
        return complex(self.rh + self.rl, self.ih + self.il), self.exp

    def log_abs(self):
        """Natural log of the modulus; -inf for zero."""
        if self.is_zero():
            return -math.inf
        return math.log(math.hypot(self.rh + self.rl, self.ih + self.il)) + self.exp * _LN2

    def __neg__(self):
        return XComplex(-self.rh, -self.rl, -self.ih, -self.il, self.exp)

    def conjugate(self):
        return XComplex(self.rh, self.rl, -self.ih, -self.il, self.exp)

    def __add__(self, other):
        return xadd(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return xadd(self, -_coerce(other))

    def __rsub__(self, other):
        return xadd(_coerce(other), -self)

    def __mul__(self, other):
        return xmul(self, _coerce(other))

    __rmul__ = __mul__

    def __abs__(self):
        return math.exp(self.log_abs()) if not self.is_zero() else 0.0

    def __eq__(self, other):
        if not isinstance(other, XComplex):
            return NotImplemented
        return (self.rh, self.rl, self.ih, self.il, self.exp) == (
            other.rh, other.rl, other.ih, other.il, other.exp)

    def __hash__(self):
        return hash((self.rh, self.rl, self.ih, self.il, self.exp))

    def __repr__(self):
        return (f"XComplex(({self.rh!r} + {self.rl!r}) + 1j*({self.ih!r} + {self.il!r}),"
                f" exp={self.exp})")


def _ldexp_inf(x, e):
    if x == 0.0:
        return 0.0
    try:
        return math.ldexp(x, e)
    except OverflowError:
        return math.copysign(math.inf, x)


def _coerce(x):
    return x if isinstance(x, XComplex) else XComplex.from_complex(x)


def xadd(a, b):
    a, b = _coerce(a), _coerce(b)
    if b.is_zero():
        return a
    if a.is_zero():
        return b
    if a.exp < b.exp:
        a, b = b, a
    shift = b.exp - a.exp
    if shift < -_MAX_SHIFT:
        return a
    brh = math.ldexp(b.rh, shift)
    brl = math.ldexp(b.rl, shift)
    bih = math.ldexp(b.ih, shift)
    bil = math.ldexp(b.il, shift)
    rh, rl = dd_add(a.rh, a.rl, brh, brl)
    ih, il = dd_add(a.ih, a.il, bih, bil)
    return XComplex(rh, rl, ih, il, a.exp)


def xsub(a, b):
    return xadd(a, -_coerce(b))


def xmul(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.is_zero() or b.is_zero():
        return XComplex()
    # (ar + i ai)(br + i bi)
    p1h, p1l = dd_mul(a.rh, a.rl, b.rh, b.rl)
    p2h, p2l = dd_mul(a.ih, a.il, b.ih, b.il)
    p3h, p3l = dd_mul(a.rh, a.rl, b.ih, b.il)
    p4h, p4l = dd_mul(a.ih, a.il, b.rh, b.rl)
    rh, rl = dd_add(p1h, p1l, -p2h, -p2l)
    ih, il = dd_add(p3h, p3l, p4h, p4l)
    return XComplex(rh, rl, ih, il, a.exp + b.exp)


def xdiv_real(a, b):
    """Divide by a nonzero finite float, to pair precision."""
    m, e = math.frexp(b)
    out = []
    for hi, lo in ((a.rh, a.rl), (a.ih, a.il)):
        q1 = hi / m
        ph, pl = two_prod(q1, m)
        rh, rl = dd_add(hi, lo, -ph, -pl)
        q2 = rh / m
        out.extend(quick_two_sum(q1, q2))
    return XComplex(out[0], out[1], out[2], out[3], a.exp - e)


def expand_from_roots(roots, leading=1.0):
    """Coefficients of ``leading * prod(z - r)`` in ascending powers.

    Roots are multiplied in one at a time, smallest modulus first.  Returns
    ``(pairs, rounded)``: the pair-precision coefficients as ``XComplex`` and
    their working-precision roundings as a complex array (may contain inf
    when a coefficient is outside the float range).
    """
    roots = np.asarray(roots, dtype=complex).ravel()
    if not np.all(np.isfinite(roots)):
        raise ValueError("roots must be finite")
    order = np.argsort(np.abs(roots), kind="stable")
    coeffs = [XComplex.from_complex(leading)]
    for r in roots[order]:
        neg_r = XComplex.from_complex(-r)
        new = [xmul(neg_r, coeffs[0])]
        for i in range(1, len(coeffs)):
            new.append(xadd(coeffs[i - 1], xmul(neg_r, coeffs[i])))
        new.append(coeffs[-1])
        coeffs = new
    return coeffs, rounded(coeffs)


def rounded(pairs):
    return np.array([x.to_complex() for x in pairs], dtype=complex)


def log_abs_array(pairs):
    return np.array([x.log_abs() for x in pairs])
