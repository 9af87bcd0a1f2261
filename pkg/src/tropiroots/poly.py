"""Polynomial value types, evaluation kernels and random generators.

Coefficients are stored in ascending powers: ``coeffs[i]`` multiplies ``z**i``.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GenerationFailed, InvalidInput, ZeroPolynomial
from .xprec import expand_from_roots

MAX_RESAMPLE = 100
_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise InvalidInput("polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    def __len__(self):
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()!r})"

    def is_real(self):
        return not np.any(self.coeffs.imag)

    def trimmed(self):
        """Drop zero leading (highest-power) coefficients."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            raise ZeroPolynomial("all coefficients are zero")
        return Polynomial(self.coeffs[: nz[-1] + 1])

    def to_json(self):
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs.tolist()]}

    @classmethod
    def from_json(cls, obj):
        try:
            coeffs = [_parse_scalar(c) for c in obj["coeffs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed polynomial JSON: {exc}") from exc
        return cls(coeffs)


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """``P(z) = sum_i coeffs[i] z**i`` with square ``s x s`` coefficients."""

    coeffs: np.ndarray  # shape (d+1, s, s)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] < 1:
            raise DimensionMismatch(f"expected (d+1, s, s) coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coefficients must be finite")
        if not np.any(c[-1]):
            raise InvalidInput("leading matrix coefficient is zero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def size(self):
        return self.coeffs.shape[1]

    def __call__(self, lam):
        out = np.zeros((self.size, self.size), dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * lam + c
        return out

    def to_json(self):
        return {
            "size": self.size,
            "coeffs": [[[[z.real, z.imag] for z in row] for row in m.tolist()] for m in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            s = int(obj["size"])
            mats = [[[_parse_scalar(z) for z in row] for row in m] for m in obj["coeffs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed matrix polynomial JSON: {exc}") from exc
        arr = np.array(mats, dtype=complex)
        if arr.ndim != 3 or arr.shape[1:] != (s, s):
            raise DimensionMismatch(f"coefficients do not match size {s}")
        return cls(arr)

    @classmethod
    def from_scalar(cls, p):
        return cls(np.asarray(p.coeffs, dtype=complex).reshape(-1, 1, 1))


def _parse_scalar(c):
    if isinstance(c, (int, float)):
        return complex(c)
    re, im = c
    return complex(float(re), float(im))


def load_json(path):
    with open(path) as fh:
        obj = json.load(fh)
    if "size" in obj:
        return MatrixPolynomial.from_json(obj)
    return Polynomial.from_json(obj)


def evaluate(p, z):
    """Horner evaluation of ``p`` at ``z`` in working precision."""
    acc = 0j
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    return acc


def log_abs_value(p, z):
    """``log|p(z)|`` without overflow; reversed Horner for ``|z| > 1``."""
    z = complex(z)
    r = abs(z)
    if r <= 1.0:
        v = evaluate(p, z)
        return math.log(abs(v)) if v else -math.inf
    w = 1.0 / z
    acc = 0j
    for c in p.coeffs:
        acc = acc * w + c
    if acc == 0:
        return -math.inf
    return math.log(abs(acc)) + p.degree * math.log(r)


def _log_terms(mags, r):
    mags = np.asarray(mags, dtype=float)
    idx = np.arange(mags.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        logm = np.log(mags)
        if r == 0.0:
            # 0**0 == 1
            return np.where(idx == 0, logm, -np.inf)
        return logm + idx * math.log(r)


def log_magnitude_terms(mags, r):
    """Return ``(log sum_i m_i r**i, log max_i m_i r**i, argmax)``."""
    lt = _log_terms(mags, r)
    j = int(np.argmax(lt))  # first occurrence on ties
    top = lt[j]
    if top == -math.inf:
        return -math.inf, -math.inf, j
    return top + math.log(np.sum(np.exp(lt - top))), top, j


def eval_magnitude_terms(p, r):
    """Return ``(sum_i |p_i| r**i, max_i |p_i| r**i, argmax)``.

    Terms are formed as ``exp(log|p_i| + i log r)`` relative to the largest
    one, so the sum only overflows when the result itself does.
    """
    if r < 0:
        raise InvalidInput("r must be nonnegative")
    mags = np.abs(p.coeffs) if isinstance(p, Polynomial) else np.abs(np.asarray(p))
    lsum, lmax, j = log_magnitude_terms(mags, r)
    return _exp(lsum), _exp(lmax), j


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def deflate_zero_roots(p):
    """Strip the zero coefficients at the low end; returns ``(q, m0)``."""
    nz = np.flatnonzero(p.coeffs)
    if nz.size == 0:
        raise ZeroPolynomial("all coefficients are zero")
    m0 = int(nz[0])
    return Polynomial(p.coeffs[m0:]), m0


def _random_unimodular(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def _representable(c):
    a = np.abs(c)
    return bool(np.all(np.isfinite(c)) and np.all(a >= _TINY))


def random_from_roots(d, modulus_exponent_range=(-20, 20), multiplicity_max=1, seed=None):
    """Random polynomial with prescribed random roots.

    Distinct roots have modulus ``10**e`` (``e`` uniform on the range) and a
    uniform argument; each gets a multiplicity uniform on
    ``1..multiplicity_max`` (clipped to the remaining degree).  The monic
    polynomial is expanded in pair precision and rounded once.  Samples with
    coefficients outside the normal float range are redrawn.
    Returns ``(p, true_roots)``.
    """
    if d < 1:
        raise InvalidInput("degree must be at least 1")
    lo, hi = modulus_exponent_range
    if lo > hi:
        raise InvalidInput("empty exponent range")
    if multiplicity_max < 1:
        raise InvalidInput("multiplicity_max must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLE):
        roots = []
        while len(roots) < d:
            m = int(rng.integers(1, min(multiplicity_max, d - len(roots)) + 1))
            z = 10.0 ** rng.uniform(lo, hi) * _random_unimodular(rng, 1)[0]
            roots.extend([z] * m)
        roots = np.array(roots, dtype=complex)
        _, coeffs = expand_from_roots(roots, 1.0)
        if _representable(coeffs):
            return Polynomial(coeffs), roots
    raise GenerationFailed(f"no representable sample in {MAX_RESAMPLE} attempts")


def random_coeffs(d, modulus_exponent_range=(-20, 20), seed=None):
    """Random coefficients with modulus ``10**e`` and uniform argument."""
    if d < 1:
        raise InvalidInput("degree must be at least 1")
    lo, hi = modulus_exponent_range
    if lo > hi:
        raise InvalidInput("empty exponent range")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLE):
        with np.errstate(over="ignore"):  # inf is rejected below
            c = 10.0 ** rng.uniform(lo, hi, d + 1) * _random_unimodular(rng, d + 1)
        if _representable(c):
            return Polynomial(c)
    raise GenerationFailed(f"no representable sample in {MAX_RESAMPLE} attempts")


def random_matrix_poly(s, d, modulus_exponent_range=(-10, 10), seed=None):
    """Random ``s x s`` matrix polynomial whose coefficient 2-norms are ``10**e``."""
    if s < 1 or d < 1:
        raise InvalidInput("size and degree must be positive")
    lo, hi = modulus_exponent_range
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(d + 1):
        g = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
        g /= np.linalg.norm(g, 2)
        mats.append(g * 10.0 ** rng.uniform(lo, hi))
    return MatrixPolynomial(np.array(mats))
