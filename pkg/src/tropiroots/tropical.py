"""Max-times tropical polynomials: Newton polygon, tropical roots, gamma weights.

For ``tp(x) = max_i |p_i| x**i`` the tropical roots are read off the upper
convex hull of the points ``(i, log|p_i|)``.  Everything here works on
log-magnitudes or on (mantissa, binary exponent) splits, so coefficient
moduli such as 1e-60 or 1e+250 never overflow an intermediate.
"""

import io
import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

_LN2 = math.log(2.0)
_LN10 = math.log(10.0)
_COLLINEAR_TOL = 8 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class TropicalData:
    hull_indices: tuple
    roots: tuple  # ((tau, multiplicity), ...) with tau increasing
    log_roots: tuple  # natural logs of the taus
    zero_multiplicity: int = 0
    frexp_roots: tuple = ()  # ((mantissa, exponent), ...): tau = mantissa * 2**exponent

    def inverse_root_floats(self):
        """``1/tau_l`` rounded once from the (mantissa, exponent) form."""
        out = []
        for mant, e in self.frexp_roots:
            mi, ei = math.frexp(1.0 / mant)
            out.append(_ldexp(mi, ei - e))
        return np.array(out)

    @property
    def degree(self):
        return self.hull_indices[-1] - self.hull_indices[0]

    @property
    def taus(self):
        return np.array([t for t, _ in self.roots])

    @property
    def multiplicities(self):
        return np.array([m for _, m in self.roots], dtype=int)

    @property
    def expanded(self):
        """tau~_1 <= ... <= tau~_d, each tau_l repeated m_l times."""
        return np.repeat(self.taus, self.multiplicities)

    @property
    def log_expanded(self):
        return np.repeat(np.array(self.log_roots), self.multiplicities)

    def to_json(self):
        return {
            "hull_indices": list(self.hull_indices),
            "roots": [{"tau": t, "log10_tau": lt / _LN10, "multiplicity": m}
                      for (t, m), lt in zip(self.roots, self.log_roots)],
            "zero_multiplicity": self.zero_multiplicity,
        }


@dataclass(frozen=True, eq=False)
class GammaWeights:
    """gamma_i and gamma~_i, as rounded floats (may be inf) and natural logs."""

    gamma: np.ndarray
    log_gamma: np.ndarray
    gamma_tilde: np.ndarray
    log_gamma_tilde: np.ndarray
    frexp_gamma_tilde: tuple = ()  # (mantissas, exponents): exact power-of-two split of gamma~

    def to_json(self):
        return {
            "gamma": self.gamma.tolist(),
            "log10_gamma": (self.log_gamma / _LN10).tolist(),
            "gamma_tilde": self.gamma_tilde.tolist(),
        }


def _log_magnitudes(mags):
    mags = np.asarray(mags, dtype=float)
    if mags.ndim != 1 or mags.size < 2:
        raise InvalidInput("need at least two magnitudes")
    if np.any(mags < 0) or not np.all(np.isfinite(mags)):
        raise InvalidInput("magnitudes must be finite and nonnegative")
    if mags[0] == 0 or mags[-1] == 0:
        raise InvalidInput("first and last magnitudes must be nonzero")
    with np.errstate(divide="ignore"):
        return mags, np.log(mags)


def newton_polygon(magnitudes):
    """Indices of the vertices of the upper hull of ``(i, log m_i)``.

    One monotone-chain sweep over the (already sorted) abscissas.  Zero
    magnitudes sit at -inf and are never vertices; collinear points are
    dropped, so consecutive slopes strictly decrease.  Near-ties in the log
    comparison are settled exactly on the float magnitudes.
    """
    mags, y = _log_magnitudes(magnitudes)
    hull = []
    for i, yi in enumerate(y.tolist()):
        if yi == -math.inf:
            continue
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            # is a on or below the chord o -> i?
            t1 = (a - o) * (yi - y[o])
            t2 = (y[a] - y[o]) * (i - o)
            diff = t1 - t2
            if abs(diff) <= _COLLINEAR_TOL * (abs(t1) + abs(t2)):
                below = _below_exact(mags[o], mags[a], mags[i], a - o, i - o)
            else:
                below = diff >= 0
            if below:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _below_exact(mo, ma, mi, k, n):
    """``ma**n <= mo**(n-k) * mi**k`` in exact rational arithmetic."""
    mo, ma, mi = Fraction(mo), Fraction(ma), Fraction(mi)
    return ma**n <= mo ** (n - k) * mi**k


def _frexp_ratio_root(num, den, m):
    """``(num/den)**(1/m)`` as (mantissa, exponent), num, den > 0."""
    mn, en = math.frexp(num)
    md, ed = math.frexp(den)
    e = en - ed
    q, rem = divmod(e, m)
    mant = (mn / md) ** (1.0 / m)
    if rem:
        mant *= 2.0 ** (rem / m)
    mant, k = math.frexp(mant)
    return mant, q + k


def _ldexp(m, e):
    try:
        return math.ldexp(m, e)
    except OverflowError:
        return math.inf


def tropical_roots_from_magnitudes(mags):
    """Tropical roots of ``max_i mags[i] x**i``; mags[0], mags[-1] > 0."""
    mags, logm = _log_magnitudes(mags)
    hull = newton_polygon(mags)
    roots, logs, fr = [], [], []
    for a, b in zip(hull[:-1], hull[1:]):
        m = b - a
        mant, e = _frexp_ratio_root(mags[a], mags[b], m)
        roots.append((_ldexp(mant, e), m))
        logs.append(math.log(mant) + e * _LN2)
        fr.append((mant, e))
    return TropicalData(tuple(hull), tuple(roots), tuple(logs), 0, tuple(fr))


def tropical_roots(p):
    c = np.asarray(p.coeffs)
    if c.size < 2:
        raise InvalidInput("degree must be at least 1")
    return tropical_roots_from_magnitudes(np.abs(c))


def _pow_scaled(mant, e, n):
    """``(mant * 2**e)**n`` as (mantissa, exponent), 0.5 <= mant < 1."""
    out_m, out_e = 1.0, 0
    while n > 0:
        k = min(n, 900)  # 0.5**900 is still a normal float
        m2, e2 = math.frexp(mant**k)
        out_m, e3 = math.frexp(out_m * m2)
        out_e += e2 + e3 + e * k
        n -= k
    return out_m, out_e


def gammas_from_magnitudes(mags, t):
    """gamma_i = tau_l**(k_l - i) |p_{k_l}| / |p_i| on segment k_{l-1} <= i <= k_l.

    ``gamma~_i`` is the height of the Newton polygon at ``i`` (``gamma_i |p_i|``
    for nonzero coefficients, ``gamma_i`` itself for zero ones).  Vertex
    indices get gamma = 1 exactly.
    """
    mags, logm = _log_magnitudes(mags)
    d = mags.size - 1
    hull = list(t.hull_indices)
    if hull[0] != 0 or hull[-1] != d:
        raise InvalidInput("tropical data does not match the coefficient vector")
    g = np.empty(d + 1)
    lg = np.empty(d + 1)
    gt = np.empty(d + 1)
    lgt = np.empty(d + 1)
    g[0], lg[0], gt[0], lgt[0] = 1.0, 0.0, mags[0], logm[0]
    gtm = np.empty(d + 1)
    gte = np.empty(d + 1, dtype=np.int64)
    gtm[0], gte[0] = math.frexp(mags[0])
    for a, b in zip(hull[:-1], hull[1:]):
        tau_m, tau_e = _frexp_ratio_root(mags[a], mags[b], b - a)
        mb, eb = math.frexp(mags[b])
        for i in range(a + 1, b + 1):
            pm, pe = _pow_scaled(tau_m, tau_e, b - i)
            ht_m, ht_e = math.frexp(pm * mb)
            ht_e += pe + eb
            gt[i] = _ldexp(ht_m, ht_e)
            gtm[i], gte[i] = ht_m, ht_e
            lgt[i] = math.log(ht_m) + ht_e * _LN2
            if mags[i] == 0:
                g[i], lg[i] = gt[i], lgt[i]
            elif i == b:
                g[i], lg[i] = 1.0, 0.0
            else:
                mi, ei = math.frexp(mags[i])
                gm, ge = math.frexp(ht_m / mi)
                ge += ht_e - ei
                if ge <= 0 or (ge == 1 and gm == 0.5):
                    # on the hull up to rounding: gamma~_i is |p_i| itself
                    g[i], lg[i] = 1.0, 0.0
                    gt[i], lgt[i] = mags[i], logm[i]
                    gtm[i], gte[i] = mi, ei
                else:
                    g[i], lg[i] = _ldexp(gm, ge), math.log(gm) + ge * _LN2
    return GammaWeights(g, lg, gt, lgt, (gtm, gte))


def gammas(p, t):
    return gammas_from_magnitudes(np.abs(np.asarray(p.coeffs)), t)


def newton_polygon_csv(p, t, g):
    """CSV rows ``i, log10|p_i|, log10 hull height, log10 gamma_i``."""
    buf = io.StringIO()
    buf.write("i,log10_abs_p,log10_hull,log10_gamma\n")
    with np.errstate(divide="ignore"):
        logp = np.log10(np.abs(np.asarray(p.coeffs)))
    for i in range(logp.size):
        vals = (logp[i], g.log_gamma_tilde[i] / _LN10, g.log_gamma[i] / _LN10)
        buf.write(f"{i}," + ",".join(repr(float(v)) for v in vals) + "\n")
    return buf.getvalue()
