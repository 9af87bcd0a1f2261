"""Backward errors for computed polynomial roots and polynomial eigenvalues.

The global measures compare ``p`` with ``p~(z) = p_d prod (z - z^_k)``,
rebuilt in pair precision (``xprec``).  All ratios are taken between
logarithms, so coefficients like 1e-60 next to 1e+250 are handled without
overflow.  ``mu`` (the free scalar multiplying ``p~``) is fixed to 1 unless
the real-mu optimization is requested.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import LengthMismatch, NonRealInput
from .linalg import jacobi_norm2, jacobi_singular_values
from .poly import Polynomial, _log_terms, log_abs_value, log_magnitude_terms
from .tropical import gammas, tropical_roots
from .xprec import XComplex, expand_from_roots, xsub

_LN2 = math.log(2.0)
EPS = np.finfo(float).eps


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True, eq=False)
class BackwardErrorReport:
    eta_norm: float
    eta_elem_rel: float
    eta_minmax: float
    eta_minmax_opt: float = None
    mu_used: complex = 1.0
    elem_rel_index: int = None  # zero coefficient that was perturbed (eta_elem_rel = inf)
    minmax_index: int = None
    abs_p: np.ndarray = field(default=None, repr=False)
    abs_ptilde: np.ndarray = field(default=None, repr=False)
    residual: np.ndarray = field(default=None, repr=False)
    gamma_tilde: np.ndarray = field(default=None, repr=False)
    ratio: np.ndarray = field(default=None, repr=False)

    @property
    def per_coeff(self):
        return list(zip(self.residual.tolist(), self.gamma_tilde.tolist(), self.ratio.tolist()))

    def to_json(self):
        out = {
            "eta_norm": self.eta_norm,
            "eta_elem_rel": _json_float(self.eta_elem_rel),
            "eta_minmax": self.eta_minmax,
            "eta_minmax_opt": self.eta_minmax_opt,
            "mu_used": [complex(self.mu_used).real, complex(self.mu_used).imag],
            "minmax_index": self.minmax_index,
        }
        if self.elem_rel_index is not None:
            out["elem_rel_index"] = self.elem_rel_index
        return out

    def to_csv(self):
        buf = io.StringIO()
        buf.write("i,abs_p,abs_ptilde,abs_residual,gamma_tilde\n")
        for i in range(self.abs_p.size):
            vals = (self.abs_p[i], self.abs_ptilde[i], self.residual[i], self.gamma_tilde[i])
            buf.write(f"{i}," + ",".join(repr(float(v)) for v in vals) + "\n")
        return buf.getvalue()


def _json_float(x):
    # JSON has no inf; keep a signed string sentinel
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _as_poly(p):
    return p if isinstance(p, Polynomial) else Polynomial(p)


def eta_single(p, zhat, alpha):
    """``|p(z^)| / sum_i alpha_i |z^|**i`` (elementwise backward error of one root).

    The denominator is a log-sum-exp shifted by the largest ``|p_i||z^|**i``
    term, the same shift for every weight vector, so larger weights always
    give a smaller or equal result in floating point too.
    """
    p = _as_poly(p)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != p.coeffs.shape:
        raise LengthMismatch("need one weight per coefficient")
    r = abs(complex(zhat))
    lnum = log_abs_value(p, zhat)
    if lnum == -math.inf:
        return 0.0
    lt = _log_terms(alpha, r)
    _, shift, _ = log_magnitude_terms(np.abs(p.coeffs), r)
    if not math.isfinite(shift):
        shift = float(np.max(lt))
    if shift == -math.inf:
        return math.inf
    s = float(np.sum(np.exp(lt - shift)))
    if s == 0.0:
        return math.inf
    return _exp(lnum - (shift + math.log(s)))


def eta_single_rel(p, zhat):
    """Relative elementwise backward error of one root (weights ``|p_i|``)."""
    p = _as_poly(p)
    return eta_single(p, zhat, np.abs(p.coeffs))


def _residuals(p, roots):
    """Pair-precision ``p~`` and ``log|p_i - p~_i|`` with ``p~_d = p_d``."""
    roots = np.asarray(roots, dtype=complex).ravel()
    if roots.size != p.degree:
        raise LengthMismatch(f"expected {p.degree} roots, got {roots.size}")
    pairs, _ = expand_from_roots(roots, p.coeffs[-1])
    log_res = np.array([xsub(pt, pi).log_abs() for pt, pi in zip(pairs, p.coeffs.tolist())])
    log_res[-1] = -math.inf
    return pairs, log_res


def _split_abs(x):
    """``|x| = m * 2**e`` with 0.5 <= m < 1 for a pair value or a float; None for zero."""
    if isinstance(x, XComplex):
        if x.is_zero():
            return None
        mc, e0 = x.mantissa()
        m, e = math.frexp(abs(mc))
        return m, e + e0
    if x == 0:
        return None
    return math.frexp(abs(x))


def _norm2_split(splits):
    """2-norm of values given as (m, e) splits, returned as (m, e)."""
    splits = [t for t in splits if t is not None]
    if not splits:
        return None
    top = max(e for _, e in splits)
    acc = math.fsum(math.ldexp(m, e - top) ** 2 for m, e in splits)
    m, e = math.frexp(math.sqrt(acc))
    return m, e + top


def _split_ratio(num, den):
    if num is None:
        return 0.0
    if den is None:
        return math.inf
    return _ldexp_safe(num[0] / den[0], num[1] - den[1])


def _residual_splits(p, pairs):
    out = [_split_abs(xsub(pt, pi)) for pt, pi in zip(pairs, p.coeffs.tolist())]
    out[-1] = None  # leading coefficient pinned
    return out


def _norm_ratio(p, res):
    """``||p~ - p||_2 / ||p||_2``; exponents handled as integers."""
    return _split_ratio(_norm2_split(res), _norm2_split([_split_abs(float(c)) for c in np.abs(p.coeffs)]))


def eta_norm_global(p, roots):
    """``||p~ - p||_2 / ||p||_2`` with the leading coefficient pinned."""
    p = _as_poly(p)
    pairs, _ = _residuals(p, roots)
    return _norm_ratio(p, _residual_splits(p, pairs))


def eta_minmax_upper(p, roots, g=None, mu_opt=False):
    """Min-max elementwise measure at ``mu = 1``: ``max_{i<d} |p_i - p~_i| / gamma~_i``.

    Returns a full :class:`BackwardErrorReport` (normwise and relative
    elementwise errors, per-coefficient data).  ``p_0`` must be nonzero.
    """
    p = _as_poly(p)
    if g is None:
        g = gammas(p, tropical_roots(p))
    pairs, log_res = _residuals(p, roots)
    d = p.degree
    lgt = np.asarray(g.log_gamma_tilde)
    res = _residual_splits(p, pairs)
    gm, ge = g.frexp_gamma_tilde
    ratio = np.array([_split_ratio(r, (gm[i], int(ge[i]))) for i, r in enumerate(res)])
    k = int(np.argmax(ratio[:d])) if d else 0
    eta_mm = float(ratio[k]) if d else 0.0
    abs_p = np.abs(p.coeffs)
    # |p_i| as gammas() sees it, so gamma~_i >= |p_i| holds bit for bit
    rel = np.array([_split_ratio(r, _split_abs(float(c))) for r, c in zip(res, abs_p)])
    bad = np.flatnonzero((abs_p == 0) & (rel > 0))
    if bad.size:
        eta_rel, bad_idx = math.inf, int(bad[0])
    else:
        eta_rel, bad_idx = float(np.max(rel[abs_p > 0], initial=0.0)), None
    opt = None
    if mu_opt:
        opt = _minimize_real_mu(p, pairs, log_res, lgt, eta_mm)
    return BackwardErrorReport(
        eta_norm=_norm_ratio(p, res),
        eta_elem_rel=eta_rel,
        eta_minmax=eta_mm,
        eta_minmax_opt=opt,
        elem_rel_index=bad_idx,
        minmax_index=k,
        abs_p=abs_p,
        abs_ptilde=np.array([_exp(x.log_abs()) if not x.is_zero() else 0.0 for x in pairs]),
        residual=np.array([_split_ratio(r, (0.5, 1)) for r in res]),
        gamma_tilde=np.asarray(g.gamma_tilde, dtype=float),
        ratio=ratio,
    )


def _ldexp_safe(m, e):
    try:
        return math.ldexp(m, e)
    except OverflowError:
        return math.inf


def _scaled_pair(x, log_w):
    """``x / w`` for a pair value ``x`` and weight ``w = exp(log_w)``, rounded."""
    if x.is_zero():
        return 0j
    m, e = x.mantissa()
    return m * _exp_signed(e * _LN2 - log_w)


def _exp_signed(x):
    return 0.0 if x < -745.2 else _exp(x)


def _minimize_real_mu(p, pairs, log_res, lgt, upper, pin_leading=True):
    # f(1 + delta) = max_i |u_i + delta v_i| with u = (p~ - p)/gamma~, v = p~/gamma~
    u = np.array([_scaled_pair(xsub(pt, complex(pi)), lw)
                  for pt, pi, lw in zip(pairs, p.coeffs.tolist(), lgt)])
    if pin_leading:
        u[-1] = 0
    v = np.array([_scaled_pair(pt, lw) for pt, lw in zip(pairs, lgt)])

    def f(delta):
        return float(np.max(np.abs(u + delta * v)))

    # bracket mu in [1/2**k, 2**k], widened until the ends dominate the middle
    lo, hi = -0.5, 1.0
    for _ in range(60):
        f0 = f(0.0)
        if f(lo) >= f0 and f(hi) >= f0:
            break
        lo, hi = lo / 2 - 0.5, 2 * hi + 1
    for _ in range(300):
        if hi - lo <= 1e-18 * max(1.0, abs(lo), abs(hi)):
            break
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    best = min(f(0.5 * (lo + hi)), f(lo), f(hi))
    return min(best, upper)


def minmax_real_mu_from_coeffs(p, ptilde, g=None):
    """``min over real mu of max_i |p_i - mu p~_i| / gamma~_i`` for given ``p~`` coefficients."""
    p = _as_poly(p)
    pt = np.asarray(ptilde, dtype=complex).ravel()
    if pt.size != p.coeffs.size:
        raise LengthMismatch("p and p~ differ in length")
    if not p.is_real() or np.any(pt.imag):
        raise NonRealInput("real-mu optimization needs real coefficients")
    if g is None:
        g = gammas(p, tropical_roots(p))
    pairs = [XComplex.from_complex(c) for c in pt.tolist()]
    lgt = np.asarray(g.log_gamma_tilde)
    log_res = np.array([xsub(a, b).log_abs() for a, b in zip(pairs, p.coeffs.tolist())])
    upper = _exp(float(np.max(log_res - lgt)))
    return _minimize_real_mu(p, pairs, log_res, lgt, upper, pin_leading=False)


def eta_minmax_opt_real(p, roots, g=None, conj_tol=1e-6):
    """Min-max measure minimized over real ``mu``.

    Needs real ``p`` and a root set closed under conjugation: every root
    must match the conjugate of another (or itself) to relative distance
    ``conj_tol``.
    """
    p = _as_poly(p)
    if not p.is_real():
        raise NonRealInput("real-mu optimization needs real coefficients")
    if g is None:
        g = gammas(p, tropical_roots(p))
    roots = np.asarray(roots, dtype=complex).ravel()
    if roots.size and np.max(forward_errors(roots, roots.conj())) > conj_tol:
        raise NonRealInput("roots are not closed under conjugation")
    pairs, log_res = _residuals(p, roots)
    lgt = np.asarray(g.log_gamma_tilde)
    gm, ge = g.frexp_gamma_tilde
    upper = max(_split_ratio(r, (gm[i], int(ge[i]))) for i, r in enumerate(_residual_splits(p, pairs)))
    return _minimize_real_mu(p, pairs, log_res, lgt, upper)


def forward_errors(true_roots, computed):
    """Relative errors ``|z_k - z^_k| / |z_k|`` under the assignment minimizing the largest one.

    Ties in the bottleneck are broken by minimizing the error sum.  The
    result is ordered like ``true_roots``.
    """
    z = np.asarray(true_roots, dtype=complex).ravel()
    zh = np.asarray(computed, dtype=complex).ravel()
    if z.size != zh.size:
        raise LengthMismatch(f"{z.size} true roots vs {zh.size} computed")
    n = z.size
    if n == 0:
        return np.zeros(0)
    diff = np.abs(z[:, None] - zh[None, :])
    az = np.abs(z)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        E = np.where(az > 0, diff / np.where(az > 0, az, 1.0), np.where(diff == 0, 0.0, np.inf))
    levels = np.unique(E[np.isfinite(E)])
    lo, hi = 0, levels.size - 1
    feasible = None
    while lo <= hi:
        mid = (lo + hi) // 2
        m = maximum_bipartite_matching(csr_matrix(E <= levels[mid]), perm_type="column")
        if np.all(m >= 0):
            feasible = levels[mid]
            hi = mid - 1
        else:
            lo = mid + 1
    if feasible is None:
        return np.full(n, np.inf)
    allowed = E <= feasible
    big = float(np.sum(E[allowed])) * 2 + 1.0
    cost = np.where(allowed, E, big)
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(n)
    out[rows] = E[rows, cols]
    return out


@dataclass(frozen=True, eq=False)
class PevpBackwardError:
    etas: np.ndarray  # nan where excluded
    eta_max: float
    excluded: int
    large: int  # |lambda| > 1/eps (reported, not excluded)


def _log_sigma_min_at(P, lam):
    lam = complex(lam)
    r = abs(lam)
    blocks = np.asarray(P.coeffs)
    if r <= 1.0:
        M = np.zeros(blocks.shape[1:], dtype=complex)
        for c in blocks[::-1]:
            M = M * lam + c
        extra = 0.0
    else:
        w = 1.0 / lam
        M = np.zeros(blocks.shape[1:], dtype=complex)
        for c in blocks:
            M = M * w + c
        extra = P.degree * math.log(r)
    if not np.all(np.isfinite(M)):
        return math.nan
    sv = jacobi_singular_values(M)
    smin = float(sv[-1])
    return (math.log(smin) if smin > 0 else -math.inf) + extra


def matrix_coefficient_norms(P):
    return np.array([jacobi_norm2(b) for b in np.asarray(P.coeffs)])


def eta_pevp(P, lam, norms=None, use_max=False):
    """``sigma_min(P(lam)) / sum_i |lam|**i ||P_i||_2`` (``max`` in place of the sum by flag)."""
    if norms is None:
        norms = matrix_coefficient_norms(P)
    ls = _log_sigma_min_at(P, lam)
    if math.isnan(ls):
        return math.nan
    if ls == -math.inf:
        return 0.0
    lsum, lmax, _ = log_magnitude_terms(norms, abs(complex(lam)))
    return _exp(ls - (lmax if use_max else lsum))


def pevp_backward_errors(P, lambdas, norms=None, use_max=False):
    lambdas = np.asarray(lambdas, dtype=complex).ravel()
    if norms is None:
        norms = matrix_coefficient_norms(P)
    etas = np.full(lambdas.size, np.nan)
    excluded = 0
    for k, lam in enumerate(lambdas.tolist()):
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            excluded += 1
            continue
        e = eta_pevp(P, lam, norms, use_max)
        if math.isnan(e):
            excluded += 1
        else:
            etas[k] = e
    finite = etas[~np.isnan(etas)]
    large = int(np.sum(np.abs(lambdas) > 1.0 / EPS))
    return PevpBackwardError(etas, float(finite.max()) if finite.size else 0.0, excluded, large)


def eta_pevp_max(P, lambdas, norms=None, use_max=False):
    """Largest ``eta_pevp`` over the finite computed eigenvalues."""
    return pevp_backward_errors(P, lambdas, norms, use_max).eta_max
