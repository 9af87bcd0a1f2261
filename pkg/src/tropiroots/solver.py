"""End-to-end pipelines: polynomial roots, polynomial eigenvalues, gradedness check."""

import math
from dataclasses import dataclass, field

import numpy as np

from .backerr import EPS, eta_minmax_upper, pevp_backward_errors
from .errors import InvalidInput
from .linalg import hess_tri, qz_strict
from .pencil import build_block_companion, build_companion, coefficient_norms, deflate_infinity, \
    deflate_infinity_block, tropical_scale
from .poly import MatrixPolynomial, Polynomial, deflate_zero_roots
from .tropical import gammas, tropical_roots


@dataclass(frozen=True, eq=False)
class SolveResult:
    roots: np.ndarray
    report: object = None  # BackwardErrorReport for the zero-deflated polynomial
    diagnostics: dict = field(default_factory=dict)
    tropical: object = None
    gammas: object = None

    def to_json(self):
        out = {
            "roots": [[z.real, z.imag] for z in self.roots.tolist()],
            "diagnostics": self.diagnostics,
        }
        if self.tropical is not None:
            out["tropical"] = self.tropical.to_json()
        if self.report is not None:
            out["backward_error"] = self.report.to_json()
        return out


def _check_poly(p):
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    if p.degree < 1:
        raise InvalidInput("degree must be at least 1")
    if p.coeffs[-1] == 0:
        raise InvalidInput("leading coefficient is zero; trim the polynomial first")
    return p


def _schur_of_deflated(q, maxit_factor=None, accumulate=False):
    t = tropical_roots(q)
    g = gammas(q, t)
    scaled = tropical_scale(build_companion(q), t, g)
    dfl = deflate_infinity(scaled)
    H, T, Q, Z = hess_tri(dfl.A, dfl.B, accumulate=accumulate)
    schur = qz_strict(H, T, maxit_factor=maxit_factor, accumulate=accumulate, Q=Q, Z=Z)
    return t, g, scaled, dfl, schur


def solve(p, backerr=False, mu_opt=False, maxit_factor=None):
    """All roots of ``p`` by the tropically scaled companion pencil and strict QZ.

    Exact zero roots are split off first and appended at the end.  With
    ``backerr`` the report refers to the polynomial without its zero roots.
    """
    p = _check_poly(p)
    q, m0 = deflate_zero_roots(p)
    diag = {"zero_roots": m0, "iterations": 0, "infinite": 0}
    t = g = None
    if q.degree == 0:
        found = np.zeros(0, dtype=complex)
    elif q.degree == 1:
        found = np.array([-q.coeffs[0] / q.coeffs[1]])
    else:
        t, g, _, dfl, schur = _schur_of_deflated(q, maxit_factor)
        alpha, beta = schur.alpha, schur.beta
        inf_mask = beta == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            found = np.where(inf_mask, complex(np.inf), alpha / np.where(inf_mask, 1, beta))
        diag.update(iterations=schur.iterations, infinite=int(inf_mask.sum()), pencil_size=dfl.n)
    report = None
    if backerr and q.degree >= 1:
        if t is None:
            t = tropical_roots(q)
            g = gammas(q, t)
        report = eta_minmax_upper(q, found, g, mu_opt=mu_opt and q.is_real())
    roots = np.concatenate([found, np.zeros(m0, dtype=complex)])
    return SolveResult(roots, report, diag, t, g)


@dataclass(frozen=True, eq=False)
class PevpResult:
    eigenvalues: np.ndarray
    backward: object  # PevpBackwardError or None
    large: np.ndarray  # |lambda| > 1/eps
    diagnostics: dict = field(default_factory=dict)

    @property
    def eta_max(self):
        return None if self.backward is None else self.backward.eta_max

    def to_json(self):
        out = {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues.tolist()],
            "large": np.flatnonzero(self.large).tolist(),
            "diagnostics": self.diagnostics,
        }
        if self.backward is not None:
            out["eta_pevp"] = [None if math.isnan(e) else e for e in self.backward.etas.tolist()]
            out["eta_pevp_max"] = self.backward.eta_max
            out["excluded"] = self.backward.excluded
        return out


def solve_pevp(P, backerr=True, norm="2", maxit_factor=None):
    """Eigenvalues of a matrix polynomial via the scaled block companion pencil."""
    if not isinstance(P, MatrixPolynomial):
        P = MatrixPolynomial(P)
    if P.degree < 1:
        raise InvalidInput("degree must be at least 1")
    s = P.size
    blocks = np.asarray(P.coeffs)
    # zero trailing coefficients: lambda**m factor, m*s zero eigenvalues
    m0 = 0
    while not np.any(blocks[m0]):
        m0 += 1
    diag = {"zero_blocks": m0, "iterations": 0, "infinite": 0}
    if m0 == P.degree:
        found = np.zeros(0, dtype=complex)
    else:
        Pq = MatrixPolynomial(blocks[m0:])
        scaled = build_block_companion(Pq, scale=True, norm=norm)
        dfl = deflate_infinity_block(scaled)
        H, T, _, _ = hess_tri(dfl.A, dfl.B, accumulate=False)
        schur = qz_strict(H, T, maxit_factor=maxit_factor)
        alpha, beta = schur.alpha, schur.beta
        inf_mask = beta == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            found = np.where(inf_mask, complex(np.inf), alpha / np.where(inf_mask, 1, beta))
        diag.update(iterations=schur.iterations, infinite=int(inf_mask.sum()), pencil_size=dfl.n)
    lams = np.concatenate([found, np.zeros(m0 * s, dtype=complex)])
    bw = None
    if backerr:
        bw = pevp_backward_errors(P, lams, coefficient_norms(P, "2"))
    return PevpResult(lams, bw, np.abs(lams) > 1.0 / EPS, diag)


# pair-precision matrix products (Dot2 with Veltkamp splitting)

_SPLITTER = 134217729.0


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dot2_real(A, B):
    """``A @ B`` for real matrices as a (hi, lo) pair, error ~ eps**2 |A||B|."""
    n = A.shape[1]
    s = np.zeros((A.shape[0], B.shape[1]))
    c = np.zeros_like(s)
    for k in range(n):
        p, e = _two_prod(A[:, k:k + 1], B[k:k + 1, :])
        s, e2 = _two_sum(s, p)
        c += e + e2
    return _two_sum(s, c)


def _dot2_complex(A, B):
    """Complex ``A @ B`` as (hi, lo) complex pairs."""
    Ar, Ai = A.real, A.imag
    Br, Bi = B.real, B.imag
    rh, rl = _dot2_real(np.hstack([Ar, -Ai]), np.vstack([Br, Bi]))
    ih, il = _dot2_real(np.hstack([Ar, Ai]), np.vstack([Bi, Br]))
    return rh + 1j * ih, rl + 1j * il


def _triple_residual(Q, S, Z, M):
    """``Q S Z^H - M`` evaluated in pair precision, rounded once."""
    xh, xl = _dot2_complex(Q, S)
    ZH = Z.conj().T
    yh, yl = _dot2_complex(xh, ZH)
    yl = yl + xl @ ZH
    rr, er = _two_sum(yh.real, -M.real)
    ri, ei = _two_sum(yh.imag, -M.imag)
    return (rr + (er + yl.real)) + 1j * (ri + (ei + yl.imag))


@dataclass(frozen=True, eq=False)
class Assumption1Report:
    deltaA_max: float
    deltaB_col_ratios: np.ndarray
    n: int
    constant: float
    passed: bool
    deltaB_max: float = 0.0

    @property
    def deltaA_ratio(self):
        return self.deltaA_max / EPS

    def to_json(self):
        return {
            "deltaA_max": self.deltaA_max,
            "deltaA_over_eps": self.deltaA_ratio,
            "deltaB_col_ratios": self.deltaB_col_ratios.tolist(),
            "threshold": self.constant * self.n,
            "verdict": "pass" if self.passed else "fail",
        }


def check_assumption1(p, constant=100.0, maxit_factor=None):
    """Measure the backward error of QZ on the scaled, deflated pencil.

    Reports ``max |dA|`` (the scaled A has entries of modulus <= 1) and, per
    column ``j``, ``max_i |dB_ij| / (|b^_j| eps)``.  Passes when the first is
    at most ``constant * n * eps`` and every ratio at most ``constant * n``,
    ``n = d + 1`` being the companion size.  Observational only.
    """
    p = _check_poly(p)
    q, _ = deflate_zero_roots(p)
    if q.degree < 1:
        raise InvalidInput("nothing to check after removing zero roots")
    n = q.degree + 1
    if q.degree == 1:
        # the deflated pencil is 1x1 and already triangular: no rotation applied
        return Assumption1Report(0.0, np.zeros(1), n, constant, True)
    _, _, scaled, dfl, schur = _schur_of_deflated(q, maxit_factor, accumulate=True)
    dA = _triple_residual(schur.Q, schur.S, schur.Z, dfl.A)
    dB = _triple_residual(schur.Q, schur.T, schur.Z, dfl.B)
    bhat = np.abs(np.diag(scaled.B)[1:])
    col = np.abs(dB).max(axis=0)
    ratios = col / (bhat * EPS)
    dA_max = float(np.abs(dA).max())
    ok = dA_max <= constant * n * EPS and bool(np.all(ratios <= constant * n))
    return Assumption1Report(dA_max, ratios, n, constant, ok, float(col.max()))
