"""State-space models, transfer functions, and Gilbert realizations.

Transfer functions are computed symbolically through the
Faddeev-LeVerrier resolvent recursion, which yields the characteristic
polynomial and the matrix coefficients of adj(sI - A) in one sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientC, ShapeMismatch
from .ratcore import (
    TOL_POLE,
    RationalFunction,
    RationalMatrix,
    rmat_eval,
    to_pole_residue,
)

TOL_RANK = 1e-8


def _as_matrix(M, rows=None, cols=None):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if rows is not None and M.shape[0] != rows:
        raise ShapeMismatch(f"expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise ShapeMismatch(f"expected {cols} columns, got {M.shape[1]}")
    return M


@dataclass
class StateSpace:
    """Continuous-time linear system dx/dt = Ax + Bu, y = Cx + Du."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        self.A = _as_matrix(self.A)
        n = self.A.shape[0]
        if self.A.shape[1] != n:
            raise ShapeMismatch("A must be square")
        self.B = _as_matrix(self.B, rows=n)
        self.C = _as_matrix(self.C, cols=n)
        if self.D is None:
            self.D = np.zeros((self.C.shape[0], self.B.shape[1]))
        self.D = _as_matrix(self.D, rows=self.C.shape[0], cols=self.B.shape[1])
        if min(self.n, self.m, self.p) < 1:
            raise ShapeMismatch("state, input, and output counts must be >= 1")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


@dataclass
class PartitionedRealization:
    """State-space with the measured states first and output map [I_p 0].

    The hidden-state count h may be zero, in which case the coupling and
    hidden blocks are empty.
    """

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B1: np.ndarray
    B2: np.ndarray

    def __post_init__(self):
        self.A11 = _as_matrix(self.A11)
        p = self.A11.shape[0]
        if self.A11.shape[1] != p:
            raise ShapeMismatch("A11 must be square")
        self.A12 = np.asarray(self.A12, dtype=float).reshape(p, -1)
        h = self.A12.shape[1]
        self.A21 = np.asarray(self.A21, dtype=float).reshape(h, p)
        self.A22 = np.asarray(self.A22, dtype=float).reshape(h, h)
        self.B1 = _as_matrix(self.B1, rows=p)
        self.B2 = np.asarray(self.B2, dtype=float).reshape(h, self.B1.shape[1])

    @property
    def p(self) -> int:
        return self.A11.shape[0]

    @property
    def h(self) -> int:
        return self.A22.shape[0]

    @property
    def m(self) -> int:
        return self.B1.shape[1]

    @property
    def order(self) -> int:
        return self.p + self.h

    def assemble(self) -> StateSpace:
        """Full (A, B, [I_p 0]) system of order p + h."""
        p, h, m = self.p, self.h, self.m
        n = p + h
        A = np.zeros((n, n))
        A[:p, :p] = self.A11
        A[:p, p:] = self.A12
        A[p:, :p] = self.A21
        A[p:, p:] = self.A22
        B = np.zeros((n, m))
        B[:p] = self.B1
        B[p:] = self.B2
        C = np.hstack([np.eye(p), np.zeros((p, h))])
        return StateSpace(A, B, C)


def _resolvent(A: np.ndarray):
    """Coefficients of adj(sI - A) and char(sI - A), Faddeev-LeVerrier.

    Returns (mats, char) with adj(sI - A) = sum_k mats[k] s^(n-1-k) and
    char the ascending coefficients of det(sI - A).
    """
    n = A.shape[0]
    if n == 0:
        return [], np.array([1.0])
    N = np.eye(n)
    mats = [N]
    coeffs_desc = [1.0]
    for k in range(1, n + 1):
        AN = A @ N
        ak = -np.trace(AN) / k
        coeffs_desc.append(ak)
        N = AN + ak * np.eye(n)
        if k < n:
            mats.append(N)
    return mats, np.asarray(coeffs_desc[::-1])


def transfer_from_blocks(A, B, C, D) -> RationalMatrix:
    """C (sI - A)^(-1) B + D as a reduced rational matrix."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    C = np.asarray(C, dtype=float).reshape(-1, A.shape[0])
    D = np.atleast_2d(np.asarray(D, dtype=float))
    n = A.shape[0]
    if n == 0:
        return RationalMatrix.from_real(D)
    mats, char = _resolvent(A)
    terms = [C @ Nk @ B for Nk in mats]  # coefficient of s^(n-1-k)
    out = []
    for i in range(D.shape[0]):
        row = []
        for j in range(D.shape[1]):
            num_desc = [terms[k][i, j] for k in range(n)]
            num = np.asarray(num_desc[::-1])
            num = np.polynomial.polynomial.polyadd(num, D[i, j] * char)
            # coefficients far below the summand scale are cancellation noise
            scale = max(np.max(np.abs(num_desc)),
                        abs(D[i, j]) * np.max(np.abs(char)), 1.0)
            num = np.where(np.abs(num) > 1e-12 * scale, num, 0.0)
            row.append(RationalFunction(num, char))
        out.append(row)
    return RationalMatrix(out)


def transfer_function(ss: StateSpace) -> RationalMatrix:
    """Transfer function G(s) = C (sI - A)^(-1) B + D."""
    return transfer_from_blocks(ss.A, ss.B, ss.C, ss.D)


def output_normal_form(ss: StateSpace, tol_rank: float = TOL_RANK) -> PartitionedRealization:
    """Similarity transform to ([A], [B], [I_p 0]) preserving G.

    Uses T = [C; N] where the rows of N are an orthonormal basis of the
    complement of the row space of C.  Requires full row rank C and zero
    feedthrough.
    """
    if np.any(ss.D != 0.0):
        raise ValueError("output_normal_form requires zero feedthrough")
    p, n = ss.p, ss.n
    if p > n:
        raise ShapeMismatch("more outputs than states")
    U, sv, Vt = np.linalg.svd(ss.C)
    rank = int(np.sum(sv > tol_rank * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank < p:
        raise RankDeficientC(f"C has rank {rank} < p = {p}")
    T = np.vstack([ss.C, Vt[p:, :]])
    Tinv = np.linalg.inv(T)
    Ao = T @ ss.A @ Tinv
    Bo = T @ ss.B
    return PartitionedRealization(Ao[:p, :p], Ao[:p, p:], Ao[p:, :p], Ao[p:, p:],
                                  Bo[:p], Bo[p:])


def _matrix_rank(M: np.ndarray, tol_rank: float = TOL_RANK) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol_rank * sv[0]))


def rank_factorization(K: np.ndarray, tol_rank: float = TOL_RANK):
    """Factor K = E F with E of full column rank, deterministic signs.

    E holds left singular vectors scaled by their singular values; each
    column is flipped so that the sign of its largest-magnitude entry
    equals the sign of the dominant entry of K's dominant column.
    """
    U, sv, Vt = np.linalg.svd(K)
    r = _matrix_rank(K, tol_rank)
    E = U[:, :r] * sv[:r]
    F = Vt[:r, :].copy()
    if r == 0:
        return E, F, 0
    col_mags = np.max(np.abs(K), axis=0)
    dom_col = int(np.argmax(col_mags))
    dom_row = int(np.argmax(np.abs(K[:, dom_col])))
    want_negative = K[dom_row, dom_col] < 0
    for j in range(r):
        k = int(np.argmax(np.abs(E[:, j])))
        if (E[k, j] < 0) != want_negative:
            E[:, j] = -E[:, j]
            F[j, :] = -F[j, :]
    return E, F, r


def gilbert_realization(M: RationalMatrix, tol_pole: float = TOL_POLE,
                        tol_rank: float = TOL_RANK) -> StateSpace:
    """Minimal realization of a proper matrix with real simple poles.

    A is block diagonal with each pole repeated rank(K_i) times; B and C
    come from the rank factorizations of the residue matrices; D is the
    value at infinity.  A constant matrix has no dynamics; since a
    zero-state system cannot be represented, it gets one decoupled state.
    """
    prf = to_pole_residue(M, tol_pole)
    p, m = prf.shape
    A_blocks, B_rows, C_cols = [], [], []
    for lam, K in zip(prf.poles, prf.residues):
        E, F, r = rank_factorization(K, tol_rank)
        if r == 0:
            continue
        A_blocks.append(lam * np.eye(r))
        B_rows.append(F)
        C_cols.append(E)
    if not A_blocks:
        # no dynamics: represent the constant gain with one decoupled state
        return StateSpace(np.array([[-1.0]]), np.zeros((1, m)),
                          np.zeros((p, 1)), prf.constant)
    order = sum(b.shape[0] for b in A_blocks)
    A = np.zeros((order, order))
    at = 0
    for b in A_blocks:
        A[at:at + b.shape[0], at:at + b.shape[0]] = b
        at += b.shape[0]
    B = np.vstack(B_rows)
    C = np.hstack(C_cols)
    return StateSpace(A, B, C, prf.constant)


def mcmillan_degree(M: RationalMatrix, tol_pole: float = TOL_POLE,
                    tol_rank: float = TOL_RANK) -> int:
    """Sum of residue ranks of a proper matrix with real simple poles."""
    prf = to_pole_residue(M, tol_pole)
    return int(sum(_matrix_rank(K, tol_rank) for K in prf.residues))


def normal_rank(M: RationalMatrix, points=None, tol_rank: float = TOL_RANK) -> int:
    """Maximum evaluation rank over deterministic off-pole sample points."""
    if points is None:
        mags = [0.0]
        for row in M.entries:
            for e in row:
                r = e.poles()
                if r.size:
                    mags.append(float(np.max(np.abs(r))))
        sigma = 1.0 + max(mags)
        points = [sigma + k for k in range(1, 9)]
    return max(_matrix_rank(rmat_eval(M, s), tol_rank) for s in points)


def _eval_transfer(ss: StateSpace, s):
    """Numeric value of C (sI - A)^(-1) B + D at one point."""
    n = ss.n
    return ss.C @ np.linalg.solve(s * np.eye(n) - ss.A, ss.B) + ss.D


def is_invariant_zero(ss: StateSpace, s0, tol_rank: float = TOL_RANK) -> bool:
    """Rosenbrock rank test at the point s0.

    True iff rank [[A - s0 I, B], [C, D]] drops below n plus the normal
    rank of the transfer function, the latter estimated by evaluating
    G(s) at eight deterministic points beyond the spectral radius.
    """
    eigs = np.linalg.eigvals(ss.A)
    sigma = 1.0 + (float(np.max(np.abs(eigs))) if eigs.size else 0.0)
    nr = max(_matrix_rank(_eval_transfer(ss, sigma + k), tol_rank)
             for k in range(1, 9))
    n = ss.n
    R = np.block([[ss.A - s0 * np.eye(n), ss.B], [ss.C, ss.D]])
    return _matrix_rank(R, tol_rank) < n + nr
