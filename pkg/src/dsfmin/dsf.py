"""Dynamical structure functions of partitioned linear systems.

A dynamical structure function is the pair [Q, P] relating the Laplace
transforms of the measured outputs to themselves and to the inputs,
Y = Q Y + P U.  Q is strictly proper with a zero diagonal; P is strictly
proper.  Both are derived from a partitioned realization through the
intermediate matrices W and V.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ComplexPolesUnsupported,
    RepeatedPole,
    ShapeMismatch,
    SingularIminusQ,
)
from .ratcore import (
    S_POLY,
    TOL_EVAL,
    TOL_POLE,
    RationalFunction,
    RationalMatrix,
    limit_at_infinity,
    rmat_equal,
)
from .sslib import PartitionedRealization, gilbert_realization, transfer_from_blocks

TOL_STRUCT = 1e-9


def _check_real_simple(M: RationalMatrix, tol_pole: float, label: str):
    for i in range(M.rows):
        for j in range(M.cols):
            r = M.entries[i][j].poles()
            if not r.size:
                continue
            if np.max(np.abs(r.imag)) > tol_pole:
                raise ComplexPolesUnsupported(
                    f"{label}[{i}][{j}] has complex poles; only real poles are supported")
            re = np.sort(r.real)
            if re.size > 1 and np.min(np.diff(re)) <= tol_pole:
                raise RepeatedPole(f"{label}[{i}][{j}] has a repeated pole")


@dataclass
class DSF:
    """Dynamical structure function [Q, P] with validated invariants."""

    Q: RationalMatrix
    P: RationalMatrix
    tol_pole: float = TOL_POLE

    def __post_init__(self):
        if self.Q.rows != self.Q.cols:
            raise ShapeMismatch("Q must be square")
        if self.P.rows != self.Q.rows:
            raise ShapeMismatch("P must have as many rows as Q")
        for i in range(self.Q.rows):
            if not self.Q.entries[i][i].is_zero:
                raise ValueError(f"Q[{i}][{i}] must be identically zero")
        for label, M in (("Q", self.Q), ("P", self.P)):
            for i in range(M.rows):
                for j in range(M.cols):
                    if not M.entries[i][j].is_strictly_proper:
                        raise ValueError(f"{label}[{i}][{j}] is not strictly proper")
        _check_real_simple(self.Q, self.tol_pole, "Q")
        _check_real_simple(self.P, self.tol_pole, "P")

    @property
    def p(self) -> int:
        return self.Q.rows

    @property
    def m(self) -> int:
        return self.P.cols

    def qp(self) -> RationalMatrix:
        """The p x (p+m) block row [Q P]."""
        return RationalMatrix.hstack(self.Q, self.P)


@dataclass
class StructureLimits:
    """High-frequency limits: off-diagonal of A11 and the B1 block."""

    A11_offdiag: np.ndarray
    B1: np.ndarray


@dataclass
class BooleanStructure:
    """Nonzero pattern of [Q, P]: direct causal links among measured
    states (q_adj, zero diagonal) and from inputs (p_adj)."""

    q_adj: np.ndarray
    p_adj: np.ndarray


def compute_wv(part: PartitionedRealization):
    """Intermediate rational matrices of a partitioned realization.

    W = A11 + A12 (sI - A22)^(-1) A21 and
    V = B1  + A12 (sI - A22)^(-1) B2, sharing one resolvent of A22.
    """
    if part.h == 0:
        W = RationalMatrix.from_real(part.A11)
        V = RationalMatrix.from_real(part.B1)
        return W, V
    W = transfer_from_blocks(part.A22, part.A21, part.A12, part.A11)
    V = transfer_from_blocks(part.A22, part.B2, part.A12, part.B1)
    return W, V


def compute_dsf(part: PartitionedRealization, tol_pole: float = TOL_POLE) -> DSF:
    """Dynamical structure function of a partitioned realization.

    With R = diag(W), Q = (sI - R)^(-1)(W - R) and P = (sI - R)^(-1) V;
    since sI - R is diagonal the inverse acts row by row.  Construction
    validates the invariants, so repeated or complex poles raise.
    """
    W, V = compute_wv(part)
    p, m = part.p, part.m
    s = RationalFunction(S_POLY)
    zero = RationalFunction([0.0])
    Q_rows, P_rows = [], []
    for i in range(p):
        gap = s - W.entries[i][i]
        Q_rows.append([zero if i == j else W.entries[i][j] / gap for j in range(p)])
        P_rows.append([V.entries[i][j] / gap for j in range(m)])
    return DSF(RationalMatrix(Q_rows), RationalMatrix(P_rows), tol_pole)


def dsf_to_transfer(d: DSF) -> RationalMatrix:
    """Transfer function G = (I - Q)^(-1) P.

    Computed by closing a minimal realization of [Q P] through the
    output: with [Q P] = C (sI - A)^(-1) [By Bu], the relation
    Y = Q Y + P U gives G = C (sI - A - By C)^(-1) Bu.  This avoids the
    repeated-factor blowup of a symbolic adjugate inversion.
    """
    qp_ss = gilbert_realization(d.qp(), d.tol_pole)
    By = qp_ss.B[:, :d.p]
    Bu = qp_ss.B[:, d.p:]
    Acl = qp_ss.A + By @ qp_ss.C
    if not np.isfinite(Acl).all():
        raise SingularIminusQ("det(I - Q) is identically zero")
    return transfer_from_blocks(Acl, Bu, qp_ss.C, np.zeros((d.p, d.m)))


def structure_limits(d: DSF) -> StructureLimits:
    """High-frequency limits lim s*Q and lim s*P.

    These recover the off-diagonal of A11 and the B1 block of any
    realization consistent with the structure function.
    """
    A11_off = limit_at_infinity(d.Q.scale(S_POLY))
    np.fill_diagonal(A11_off, 0.0)
    B1 = limit_at_infinity(d.P.scale(S_POLY))
    return StructureLimits(A11_off, B1)


def boolean_structure(d: DSF, tol_struct: float = TOL_STRUCT) -> BooleanStructure:
    """Boolean adjacency of [Q, P].

    An entry counts as present when its reduced numerator has a
    coefficient above tol_struct relative to the largest numerator
    coefficient across both matrices.
    """
    def peak(M):
        return max(float(np.max(np.abs(e.num.coeffs)))
                   for row in M.entries for e in row)

    scale = max(peak(d.Q), peak(d.P))
    thr = tol_struct * scale

    def adj(M):
        out = np.zeros(M.shape, dtype=bool)
        for i in range(M.rows):
            for j in range(M.cols):
                out[i, j] = float(np.max(np.abs(M.entries[i][j].num.coeffs))) > thr
        return out

    return BooleanStructure(adj(d.Q), adj(d.P))


def consistency_check(part: PartitionedRealization, d: DSF,
                      tol_eval: float = TOL_EVAL) -> bool:
    """True iff the realization reproduces the structure function."""
    if part.p != d.p or part.m != d.m:
        raise ShapeMismatch(
            f"realization is {part.p}x{part.m}, structure function {d.p}x{d.m}")
    d2 = compute_dsf(part, d.tol_pole)
    return rmat_equal(d2.Q, d.Q, tol_eval) and rmat_equal(d2.P, d.P, tol_eval)
