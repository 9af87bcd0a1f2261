"""Companion linearizations, tropical two-sided scaling, deflation at infinity.

The grade-(d+1) companion pencil of ``p`` is

    A = [[p_d, p_{d-1}, ..., p_0],      B = diag(0, 1, ..., 1)
         [1,   0,       ...,   0],
         [0,   1,       ...,   0],
         ...                     ]

and the block version replaces scalars by ``s x s`` blocks.  Scaling by
``D_l, D_r`` gives first-row moduli ``1/gamma_i`` and ``B`` diagonal
``1/tau~_d, ..., 1/tau~_1``.  The diagonals themselves are never formed:
the running products of ``1/tau~`` are carried as pair-precision values
with a binary exponent (``xprec``), and each entry is rounded once at the end.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidInput, RankDeficientLeadingBlock
from .linalg import EPS, givens, jacobi_norm2, jacobi_singular_values
from .poly import MatrixPolynomial, Polynomial
from .tropical import tropical_roots_from_magnitudes
from .xprec import XComplex, xmul

_LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class CompanionPencil:
    A: np.ndarray
    B: np.ndarray
    source: object  # Polynomial or MatrixPolynomial
    block_size: int = 1
    scaled: bool = False
    deflated: bool = False
    log_dl: np.ndarray = None  # natural logs of the D_l diagonal (one per block)
    log_dr: np.ndarray = None
    tropical: object = None
    rotation: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def degree(self):
        return self.n // self.block_size - (0 if self.deflated else 1)


def _coeff_blocks(src):
    if isinstance(src, Polynomial):
        return np.asarray(src.coeffs, dtype=complex).reshape(-1, 1, 1)
    return np.asarray(src.coeffs, dtype=complex)


def _assemble(blocks, bdiag):
    """Block companion pair from ascending coefficient blocks."""
    d = blocks.shape[0] - 1
    s = blocks.shape[1]
    n = (d + 1) * s
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, n), dtype=complex)
    for c in range(d + 1):
        A[:s, c * s:(c + 1) * s] = blocks[d - c]
    eye = np.eye(s)
    for r in range(1, d + 1):
        A[r * s:(r + 1) * s, (r - 1) * s:r * s] = eye
        B[r * s:(r + 1) * s, r * s:(r + 1) * s] = bdiag[r - 1] * eye
    return A, B


def build_companion(p):
    """Unscaled ``(d+1) x (d+1)`` companion pair of ``p``."""
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    if p.degree < 1:
        raise InvalidInput("degree must be at least 1")
    if p.coeffs[-1] == 0 or p.coeffs[0] == 0:
        raise InvalidInput("need p_0 != 0 and p_d != 0 (deflate zero roots first)")
    A, B = _assemble(_coeff_blocks(p), np.ones(p.degree))
    return CompanionPencil(A, B, p)


def coefficient_norms(P, norm="2"):
    """``||P_i||`` for each coefficient block (spectral norm by default)."""
    blocks = np.asarray(P.coeffs)
    if blocks.shape[1] == 1:
        return np.abs(blocks[:, 0, 0])
    if norm == "2":
        return np.array([jacobi_norm2(b) for b in blocks])
    if norm in ("fro", "F"):
        return np.array([np.linalg.norm(b, "fro") for b in blocks])
    raise InvalidInput(f"unknown norm {norm!r}")


def build_block_companion(P, scale=True, norm="2"):
    """Block companion pair of a matrix polynomial, tropically scaled by default.

    Tropical roots come from the coefficient norms ``||P_i||``; the scaling
    is ``D_l (x) I_s`` and ``D_r (x) I_s``.
    """
    if not isinstance(P, MatrixPolynomial):
        P = MatrixPolynomial(P)
    if P.degree < 1:
        raise InvalidInput("degree must be at least 1")
    blocks = _coeff_blocks(P)
    A, B = _assemble(blocks, np.ones(P.degree))
    c = CompanionPencil(A, B, P, block_size=P.size)
    if not scale:
        return c
    norms = coefficient_norms(P, norm)
    if norms[0] == 0 or norms[-1] == 0:
        raise InvalidInput("P_0 and P_d must be nonzero matrices")
    return tropical_scale(c, tropical_roots_from_magnitudes(norms), norms=norms)


def _scale_factors(t, lead_norm):
    """Rounded ``b^_r`` and the column factors ``D_r[c] / lead_norm`` as (mantissa, exp)."""
    inv = t.inverse_root_floats()
    if not np.all(np.isfinite(inv)) or np.any(inv == 0):
        raise InvalidInput("tropical roots outside the floating-point range; pencil not representable")
    # b^_r = 1/tau~_{d-r+1}: the largest tau first
    bhat = np.repeat(inv[::-1], t.multiplicities[::-1])
    d = bhat.size
    lm, le = math.frexp(lead_norm)
    acc = XComplex.from_pow2(1.0 / lm, -le)
    mants = np.empty(d + 1)
    exps = np.empty(d + 1, dtype=int)
    logs = np.empty(d + 1)
    for c in range(d + 1):
        if c:
            acc = xmul(acc, XComplex.from_complex(bhat[c - 1]))
        m, e = acc.mantissa()
        mants[c], exps[c] = m.real, e
        logs[c] = math.log(m.real) + e * _LN2
    return bhat, mants, exps, logs


def _ldexp_c(z, e):
    return np.ldexp(z.real, e) + 1j * np.ldexp(z.imag, e)


def tropical_scale(c, t, g=None, norms=None):
    """Two-sided tropical scaling of an unscaled (block) companion pencil.

    ``g`` is accepted for symmetry with the gamma computation; the first-row
    moduli ``1/gamma_i`` follow from ``t`` alone.
    """
    if c.scaled or c.deflated:
        raise InvalidInput("pencil is already scaled or deflated")
    blocks = _coeff_blocks(c.source)
    d = blocks.shape[0] - 1
    if t.degree != d:
        raise InvalidInput("tropical data does not match the pencil")
    if norms is None:
        norms = np.abs(blocks[:, 0, 0]) if blocks.shape[1] == 1 else coefficient_norms(c.source)
    bhat, mants, exps, logs = _scale_factors(t, float(norms[-1]))
    scaled = np.empty_like(blocks)
    for col in range(d + 1):
        scaled[d - col] = _ldexp_c(blocks[d - col] * mants[col], exps[col])
    A, B = _assemble(scaled, bhat)
    # D_r[c] = prod_{k<=c} b^_k, D_l[0] = 1/||P_d||, D_l[r] = 1/D_r[r-1]
    log_lead = math.log(norms[-1])
    log_dr = logs + log_lead
    log_dl = np.concatenate(([-log_lead], -log_dr[:-1]))
    return CompanionPencil(A, B, c.source, c.block_size, True, False, log_dl, log_dr, t)


def deflate_infinity(c):
    """Rotate rows 0-1 to expose the infinite eigenvalue; return the trailing d x d pair."""
    if c.block_size != 1:
        return deflate_infinity_block(c)
    if c.deflated:
        raise InvalidInput("pencil is already deflated")
    A = c.A.copy()
    B = c.B.copy()
    cs, sn, r = givens(A[0, 0], A[1, 0])
    for M in (A, B):
        top = M[0].copy()
        M[0] = cs * top + sn * M[1]
        M[1] = -np.conj(sn) * top + cs * M[1]
    A[1, 0] = 0
    # phase convention for the record: r real nonnegative
    rec = {"c": cs, "s": sn * np.conj(r) / abs(r), "r": abs(r)}
    return CompanionPencil(A[1:, 1:], B[1:, 1:], c.source, 1, c.scaled, True,
                           c.log_dl, c.log_dr, c.tropical, rec)


def deflate_infinity_block(c):
    """Householder QR of the first block column; return the trailing ds x ds pair."""
    if c.deflated:
        raise InvalidInput("pencil is already deflated")
    s = c.block_size
    n = c.n
    col = c.A[:, :s]
    sv = jacobi_singular_values(col)
    rank = int(np.sum(sv > sv[0] * n * EPS)) if sv[0] > 0 else 0
    if rank < s:
        raise RankDeficientLeadingBlock(rank, s)
    Qf, _ = np.linalg.qr(col, mode="complete")
    A = Qf.conj().T @ c.A
    B = Qf.conj().T @ c.B
    return CompanionPencil(A[s:, s:], B[s:, s:], c.source, s, c.scaled, True,
                           c.log_dl, c.log_dr, c.tropical, {"Q": Qf})


def dump_pencil(c, fh):
    """Write A and B as ``row col re im`` lines (1-based, nonzeros only)."""
    for name, M in (("A", c.A), ("B", c.B)):
        nz = np.argwhere(M != 0)
        fh.write(f"%%pencil {name} {M.shape[0]} {M.shape[1]} {len(nz)}\n")
        for i, j in nz:
            z = M[i, j]
            fh.write(f"{i + 1} {j + 1} {float(z.real)!r} {float(z.imag)!r}\n")


def check_dims(A, B):
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"incompatible pencil shapes {A.shape}, {B.shape}")
