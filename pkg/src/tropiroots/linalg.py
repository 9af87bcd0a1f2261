"""Dense complex kernels: Givens rotations, Hessenberg-triangular reduction,
single-shift complex QZ with strict deflation at infinity, one-sided Jacobi SVD.

The QZ iteration never sets a diagonal entry of T to zero by thresholding.
An infinite eigenvalue is produced only when a T diagonal entry is exactly
zero, so a strongly graded T (entries spanning 10**40 or more) keeps all
of its eigenvalues finite.

Rotation convention (as in LAPACK's zlartg): ``givens(f, g)`` returns real
``c`` and complex ``s`` with ``[[c, s], [-conj(s), c]] @ [f, g] = [r, 0]``.
"""

import math
import os
from dataclasses import dataclass

import numba
import numpy as np

from .errors import BothZero, DimensionMismatch, NoConvergence

EPS = np.finfo(float).eps
DEFAULT_MAXIT_FACTOR = 80
EXCEPTIONAL_SHIFT_PERIOD = 20
_SAFE_LO = 2.0**-500
_SAFE_HI = 2.0**500
_SCALE_UP = 2.0**600
_SCALE_DN = 2.0**-600
_EXCEPTIONAL_PHASE = complex(math.cos(1.0), math.sin(1.0))


@dataclass(eq=False)
class GeneralizedSchur:
    S: np.ndarray
    T: np.ndarray
    Q: np.ndarray  # None unless accumulated
    Z: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    iterations: int

    @property
    def eigpairs(self):
        return list(zip(self.alpha.tolist(), self.beta.tolist()))

    def eigenvalues(self):
        """alpha/beta; inf where beta is (structurally) zero."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.beta != 0, self.alpha / np.where(self.beta != 0, self.beta, 1), np.inf)


@numba.njit(cache=True)
def _lartg(f, g):
    if g == 0:
        return 1.0, 0j, f
    if f == 0:
        ag = abs(g)
        return 0.0, np.conj(g) / ag, complex(ag, 0.0)
    af = abs(f)
    ag = abs(g)
    big = max(af, ag)
    # rescale by an exact power of two when subnormals or overflow threaten
    if big < _SAFE_LO:
        f, g, back = f * _SCALE_UP, g * _SCALE_UP, _SCALE_DN
    elif big > _SAFE_HI:
        f, g, back = f * _SCALE_DN, g * _SCALE_DN, _SCALE_UP
    else:
        back = 1.0
    if back != 1.0:
        af = abs(f)
        ag = abs(g)
        if af == 0:
            return 0.0, np.conj(g) / ag, complex(ag * back, 0.0)
    nrm = math.hypot(af, ag)
    if af < _SAFE_LO:
        fs = f * _SCALE_UP  # phase of a subnormal f
        ph = fs / abs(fs)
    else:
        ph = f / af
    return af / nrm, ph * np.conj(g) / nrm, ph * nrm * back


def givens(a, b):
    """Rotation ``(c, s, r)`` with ``c**2 + |s|**2 = 1`` annihilating ``b``."""
    a, b = complex(a), complex(b)
    if a == 0 and b == 0:
        raise BothZero("cannot build a rotation from (0, 0)")
    c, s, r = _lartg(a, b)
    return float(c), complex(s), complex(r)


@numba.njit(cache=True)
def _rot_rows(M, i, k, c, s, lo, hi):
    # rows (i, k) <- [[c, s], [-conj(s), c]] @ rows, columns lo..hi-1
    sc = np.conj(s)
    for jc in range(lo, hi):
        x = M[i, jc]
        y = M[k, jc]
        M[i, jc] = c * x + s * y
        M[k, jc] = -sc * x + c * y


@numba.njit(cache=True)
def _rot_cols(M, i, k, c, s, lo, hi):
    # col i <- c*col_i + s*col_k ; col k <- -conj(s)*col_i + c*col_k, rows lo..hi-1
    sc = np.conj(s)
    for jr in range(lo, hi):
        x = M[jr, i]
        y = M[jr, k]
        M[jr, i] = c * x + s * y
        M[jr, k] = -sc * x + c * y


@numba.njit(cache=True)
def _acc_rows(Q, i, k, c, s):
    # Q <- Q @ G^H for a row rotation G on (i, k)
    sc = np.conj(s)
    for jr in range(Q.shape[0]):
        x = Q[jr, i]
        y = Q[jr, k]
        Q[jr, i] = c * x + sc * y
        Q[jr, k] = -s * x + c * y


@numba.njit(cache=True)
def _hess_tri_kernel(A, B, Q, Z, accumulate):
    n = A.shape[0]
    # B -> upper triangular, bottom-up Givens per column
    for j in range(n - 1):
        for i in range(n - 1, j, -1):
            if B[i, j] == 0:
                continue
            c, s, r = _lartg(B[i - 1, j], B[i, j])
            B[i - 1, j] = r
            B[i, j] = 0
            _rot_rows(B, i - 1, i, c, s, j + 1, n)
            _rot_rows(A, i - 1, i, c, s, 0, n)
            if accumulate:
                _acc_rows(Q, i - 1, i, c, s)
    # A -> upper Hessenberg, restoring B after each row rotation
    for j in range(n - 2):
        for i in range(n - 1, j + 1, -1):
            if A[i, j] == 0:
                continue
            c, s, r = _lartg(A[i - 1, j], A[i, j])
            A[i - 1, j] = r
            A[i, j] = 0
            _rot_rows(A, i - 1, i, c, s, j + 1, n)
            _rot_rows(B, i - 1, i, c, s, i - 1, n)
            if accumulate:
                _acc_rows(Q, i - 1, i, c, s)
            if B[i, i - 1] == 0:
                continue
            c, s, r = _lartg(B[i, i], B[i, i - 1])
            B[i, i] = r
            B[i, i - 1] = 0
            _rot_cols(B, i, i - 1, c, s, 0, i)
            _rot_cols(A, i, i - 1, c, s, 0, n)
            if accumulate:
                _rot_cols(Z, i, i - 1, c, s, 0, n)


def hess_tri(A, B, accumulate=True):
    """Unitary ``Q, Z`` with ``Q^H A Z = H`` Hessenberg, ``Q^H B Z = T`` triangular.

    Rotations whose target entry is already zero are skipped, so a pair that
    is already in Hessenberg-triangular form comes back with ``Q = Z = I``.
    """
    A = np.array(A, dtype=complex, order="C")
    B = np.array(B, dtype=complex, order="C")
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise DimensionMismatch(f"need square matrices of equal size, got {A.shape} and {B.shape}")
    n = A.shape[0]
    Q = np.eye(n, dtype=complex)
    Z = np.eye(n, dtype=complex)
    if n:
        _hess_tri_kernel(A, B, Q, Z, accumulate)
    return A, B, (Q if accumulate else None), (Z if accumulate else None)


@numba.njit(cache=True)
def _negligible(h, a, b, eps):
    return h == 0 or abs(h) <= eps * (abs(a) + abs(b))


@numba.njit(cache=True)
def _deflate_one(H, T, Z, ilast, ifrstm, accumulate, alpha, beta):
    tn = T[ilast, ilast]
    ab = abs(tn)
    if ab > 0:
        # standardize: make beta real nonnegative
        sg = np.conj(tn) / ab
        T[ilast, ilast] = ab
        for jr in range(ifrstm, ilast):
            T[jr, ilast] *= sg
        for jr in range(ifrstm, ilast + 1):
            H[jr, ilast] *= sg
        if accumulate:
            for jr in range(Z.shape[0]):
                Z[jr, ilast] *= sg
    alpha[ilast] = H[ilast, ilast]
    beta[ilast] = T[ilast, ilast]


@numba.njit(cache=True)
def _zero_t_at_bottom(H, T, Z, ilast, ifrstm, accumulate):
    # T[ilast, ilast] == 0: clear H[ilast, ilast-1] with a column rotation
    c, s, r = _lartg(H[ilast, ilast], H[ilast, ilast - 1])
    H[ilast, ilast] = r
    H[ilast, ilast - 1] = 0
    _rot_cols(H, ilast, ilast - 1, c, s, ifrstm, ilast)
    _rot_cols(T, ilast, ilast - 1, c, s, ifrstm, ilast)
    if accumulate:
        _rot_cols(Z, ilast, ilast - 1, c, s, 0, Z.shape[0])


@numba.njit(cache=True)
def _qz_kernel(H, T, Q, Z, accumulate, maxit, eps, period, phase):
    n = H.shape[0]
    alpha = np.zeros(n, dtype=np.complex128)
    beta = np.zeros(n, dtype=np.complex128)
    ilast = n - 1
    iiter = 0
    total = 0
    eshift = 0j
    while ilast >= 0:
        ifrstm = 0 if accumulate else ilast
        ilastm = n if accumulate else ilast + 1
        if ilast == 0 or _negligible(H[ilast, ilast - 1], H[ilast - 1, ilast - 1], H[ilast, ilast], eps):
            if ilast > 0:
                H[ilast, ilast - 1] = 0
            if not accumulate:
                ifrstm = 0
            _deflate_one(H, T, Z, ilast, ifrstm, accumulate, alpha, beta)
            ilast -= 1
            iiter = 0
            eshift = 0j
            continue
        ifirst = 0
        for j in range(ilast - 1, 0, -1):
            if _negligible(H[j, j - 1], H[j - 1, j - 1], H[j, j], eps):
                H[j, j - 1] = 0
                ifirst = j
                break
        if not accumulate:
            ifrstm = ifirst
        # structural infinite eigenvalues: exact zeros on diag(T) only
        jz = -1
        for j in range(ifirst, ilast + 1):
            if T[j, j] == 0:
                jz = j
                break
        if jz >= 0:
            if jz == ifirst:
                # zero at the top of the block: push it out with row rotations
                for jch in range(jz, ilast):
                    c, s, r = _lartg(H[jch, jch], H[jch + 1, jch])
                    H[jch, jch] = r
                    H[jch + 1, jch] = 0
                    _rot_rows(H, jch, jch + 1, c, s, jch + 1, ilastm)
                    _rot_rows(T, jch, jch + 1, c, s, jch + 1, ilastm)
                    if accumulate:
                        _acc_rows(Q, jch, jch + 1, c, s)
                    if T[jch + 1, jch + 1] != 0:
                        break
                continue
            if jz < ilast:
                # chase the zero down to T[ilast, ilast]
                for jch in range(jz, ilast):
                    c, s, r = _lartg(T[jch, jch + 1], T[jch + 1, jch + 1])
                    T[jch, jch + 1] = r
                    T[jch + 1, jch + 1] = 0
                    _rot_rows(T, jch, jch + 1, c, s, jch + 2, ilastm)
                    _rot_rows(H, jch, jch + 1, c, s, jch - 1, ilastm)
                    if accumulate:
                        _acc_rows(Q, jch, jch + 1, c, s)
                    c, s, r = _lartg(H[jch + 1, jch], H[jch + 1, jch - 1])
                    H[jch + 1, jch] = r
                    H[jch + 1, jch - 1] = 0
                    _rot_cols(H, jch, jch - 1, c, s, ifrstm, jch + 1)
                    _rot_cols(T, jch, jch - 1, c, s, ifrstm, jch)
                    if accumulate:
                        _rot_cols(Z, jch, jch - 1, c, s, 0, n)
            _zero_t_at_bottom(H, T, Z, ilast, ifrstm, accumulate)
            _deflate_one(H, T, Z, ilast, ifrstm, accumulate, alpha, beta)
            ilast -= 1
            iiter = 0
            eshift = 0j
            continue

        if total >= maxit:
            return alpha, beta, total, ilast
        iiter += 1
        total += 1

        # Wilkinson-type shift from the trailing 2x2 of H T^{-1}
        tnn = T[ilast, ilast]
        tmm = T[ilast - 1, ilast - 1]
        u12 = T[ilast - 1, ilast] / tnn
        ad11 = H[ilast - 1, ilast - 1] / tmm
        ad21 = H[ilast, ilast - 1] / tmm
        ad12 = H[ilast - 1, ilast] / tnn
        ad22 = H[ilast, ilast] / tnn
        abi22 = ad22 - u12 * ad21
        abi12 = ad12 - u12 * ad11
        if iiter % period == 0:
            # exceptional shift
            eshift = (eshift + ad21) * phase
            shift = eshift
        else:
            shift = abi22
            ctemp = np.sqrt(abi12) * np.sqrt(ad21)
            if ctemp != 0:
                x = 0.5 * (ad11 - shift)
                ax = abs(x)
                tmp = max(abs(ctemp), ax)
                y = tmp * np.sqrt((x / tmp) ** 2 + (ctemp / tmp) ** 2)
                if ax > 0:
                    xu = x / ax
                    if xu.real * y.real + xu.imag * y.imag < 0:
                        y = -y
                shift = shift - ctemp * (ctemp / (x + y))

        # single-shift implicit sweep over ifirst..ilast
        c, s, r = _lartg(H[ifirst, ifirst] - shift * T[ifirst, ifirst], H[ifirst + 1, ifirst])
        for j in range(ifirst, ilast):
            if j > ifirst:
                c, s, r = _lartg(H[j, j - 1], H[j + 1, j - 1])
                H[j, j - 1] = r
                H[j + 1, j - 1] = 0
            _rot_rows(H, j, j + 1, c, s, j, ilastm)
            _rot_rows(T, j, j + 1, c, s, j, ilastm)
            if accumulate:
                _acc_rows(Q, j, j + 1, c, s)
            c, s, r = _lartg(T[j + 1, j + 1], T[j + 1, j])
            T[j + 1, j + 1] = r
            T[j + 1, j] = 0
            _rot_cols(H, j + 1, j, c, s, ifrstm, min(j + 3, ilast + 1))
            _rot_cols(T, j + 1, j, c, s, ifrstm, j + 1)
            if accumulate:
                _rot_cols(Z, j + 1, j, c, s, 0, n)
    return alpha, beta, total, -1


def maxit_factor_from_env(default=DEFAULT_MAXIT_FACTOR):
    raw = os.environ.get("TROPIROOTS_MAXIT_FACTOR")
    if not raw:
        return default
    try:
        val = int(raw)
    except ValueError:
        return default
    return val if val > 0 else default


def qz_strict(H, T, maxit_factor=None, accumulate=False, Q=None, Z=None):
    """Generalized Schur form of a Hessenberg-triangular pair.

    ``Q`` and ``Z`` (from :func:`hess_tri`) are updated in place when given
    and ``accumulate`` is set; otherwise identity accumulators are used.
    Raises :class:`NoConvergence` after ``maxit_factor * n`` sweeps.
    """
    H = np.array(H, dtype=complex, order="C")
    T = np.array(T, dtype=complex, order="C")
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape != T.shape:
        raise DimensionMismatch(f"need square matrices of equal size, got {H.shape} and {T.shape}")
    n = H.shape[0]
    if maxit_factor is None:
        maxit_factor = maxit_factor_from_env()
    if accumulate:
        Q = np.eye(n, dtype=complex) if Q is None else np.array(Q, dtype=complex, order="C")
        Z = np.eye(n, dtype=complex) if Z is None else np.array(Z, dtype=complex, order="C")
    else:
        Q = Z = np.zeros((1, 1), dtype=complex)
    if n == 0:
        empty = np.zeros(0, dtype=complex)
        return GeneralizedSchur(H, T, Q if accumulate else None, Z if accumulate else None, empty, empty, 0)
    alpha, beta, its, stuck = _qz_kernel(H, T, Q, Z, accumulate, int(maxit_factor * n), EPS,
                                         EXCEPTIONAL_SHIFT_PERIOD, _EXCEPTIONAL_PHASE)
    if stuck >= 0:
        raise NoConvergence(int(stuck), int(its), {"maxit": int(maxit_factor * n)})
    return GeneralizedSchur(H, T, Q if accumulate else None, Z if accumulate else None,
                            alpha, beta, int(its))


def jacobi_singular_values(M, tol=None, max_sweeps=60):
    """Singular values (descending) by one-sided Jacobi rotations on columns."""
    U = np.array(M, dtype=complex)
    if U.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    if U.shape[0] < U.shape[1]:
        U = U.conj().T
    m, n = U.shape
    if n == 0:
        return np.zeros(0)
    if tol is None:
        tol = max(m, n) * EPS
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                up = U[:, p].copy()
                uq = U[:, q].copy()
                a = np.vdot(up, up).real
                b = np.vdot(uq, uq).real
                g = np.vdot(up, uq)
                ag = abs(g)
                if ag == 0 or ag <= tol * math.sqrt(a * b):
                    continue
                rotated = True
                # rotate (up, uq * conj(phase)), whose inner product is real
                uq = uq * (np.conj(g) / ag)
                zeta = (b - a) / (2.0 * ag)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1][: min(m, n)]


def jacobi_svd_sigma_min(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    if M.shape[0] == 0:
        return 0.0
    return float(jacobi_singular_values(M)[-1])


def jacobi_norm2(M):
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(jacobi_singular_values(M)[0])
