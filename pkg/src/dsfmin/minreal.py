"""Minimal-order realization of a dynamical structure function.

The order of any realization consistent with [Q, P] is p plus the number
of hidden states.  Hidden states correspond to the poles of [sQ sP] that
survive multiplication by the diagonal factor N(s) = (sI - R)(s - a)^(-1)
for a constant diagonal R (a = 0 unless a pole sits at the origin).  A
pole lam_i with rank-1 residue E_i F_i is removed exactly when
N(lam_i) E_i = 0, which forces R[j, j] = lam_i on the support of E_i.
The maximal number of simultaneously removable poles is therefore the
size phi of a maximum clique in the compatibility graph of the residue
vectors, and the minimal order is p + l - phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsf import DSF, consistency_check
from .errors import (
    ConflictingAssignment,
    PoleAtZeroWithoutShift,
    ResidueRankExceedsOne,
)
from .ratcore import (
    TOL_EVAL,
    TOL_POLE,
    Polynomial,
    limit_at_infinity,
    residue_at,
    rmat_poles,
)
from .sslib import (
    TOL_RANK,
    PartitionedRealization,
    StateSpace,
    is_invariant_zero,
    rank_factorization,
)

TOL_ORTH = 1e-8
TOL_CANCEL = 1e-8
FREE_VALUE = -1.0

EDGE_RULES = ("support-disjoint", "orthogonal")


@dataclass
class GilbertData:
    """Per-pole rank-1 data of the (possibly shifted) matrix [sQ sP].

    Poles are listed in descending value; E_i is the p-vector column
    factor of residue K_i = E_i F_i and F_i the (p+m)-row factor.  When a
    pole of [Q P] sits at the origin the working factor is (s - shift)
    with shift chosen off all poles; shift is 0 otherwise.
    """

    poles: list
    E: list
    F: list
    D1: np.ndarray
    shift: float
    p: int
    m: int

    @property
    def l(self) -> int:
        return len(self.poles)


@dataclass
class CompatGraph:
    """Undirected compatibility graph over the residue vectors."""

    n: int
    edges: list  # sorted (i, j) tuples with i < j
    rule: str

    def adjacency(self):
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


@dataclass
class CliqueResult:
    cliques: list  # sorted index tuples, lexicographic order
    phi: int


@dataclass
class RStar:
    """Constant diagonal cancellation matrix with free positions.

    entries[j] is either a float (forced value) or None (free); free
    positions materialize to free_value.
    """

    entries: tuple
    free_value: float = FREE_VALUE

    def materialize(self) -> np.ndarray:
        return np.array([self.free_value if e is None else float(e)
                         for e in self.entries])

    def pattern(self) -> str:
        parts = ["a" if e is None else format(float(e), ".12g") for e in self.entries]
        return "diag{" + ", ".join(parts) + "}"


def extract_modes(d: DSF, tol_pole: float = TOL_POLE, tol_rank: float = TOL_RANK,
                  shift="auto") -> GilbertData:
    """Rank-1 residue data of the structure function.

    Builds [(s-a)Q (s-a)P] where a = 0 normally; when [Q P] has a pole
    at the origin (or a manual shift is requested) a is set off all
    poles so that the origin factor does not swallow the pole.  Each
    residue must have rank 1; the repeated-pole generalization where
    residues gain rank is not implemented.
    """
    qp = d.qp()
    poles_asc = rmat_poles(qp, tol_pole)
    max_mag = max((abs(x) for x in poles_asc), default=0.0)
    if shift == "auto":
        a = 1.0 + max_mag if any(abs(x) < tol_pole for x in poles_asc) else 0.0
    else:
        a = float(shift)
        if a == 0.0 and any(abs(x) < tol_pole for x in poles_asc):
            raise PoleAtZeroWithoutShift(
                "[Q P] has a pole at the origin; a nonzero shift is required")
        if a != 0.0 and any(abs(x - a) <= tol_pole for x in poles_asc):
            raise ValueError(f"shift {a} coincides with a pole of [Q P]")
    work = qp.scale(Polynomial([-a, 1.0]))
    poles = sorted(poles_asc, reverse=True)
    E_list, F_list = [], []
    for lam in poles:
        K = residue_at(work, lam, tol_pole)
        E, F, r = rank_factorization(K, tol_rank)
        if r > 1:
            raise ResidueRankExceedsOne(
                f"residue at pole {lam} has rank {r} > 1; shared poles whose "
                "residues stack rank are outside the implemented algorithm")
        if r == 0:
            raise ValueError(f"residue at pole {lam} vanished unexpectedly")
        Evec = E[:, 0]
        # F per the factorization convention (E^T E)^(-1) E^T K
        Frow = (Evec @ K) / float(Evec @ Evec)
        E_list.append(Evec)
        F_list.append(Frow)
    D1 = limit_at_infinity(work)
    return GilbertData(poles, E_list, F_list, D1, a, d.p, d.m)


def _support(E: np.ndarray, tol_orth: float) -> frozenset:
    scale = float(np.max(np.abs(E)))
    return frozenset(np.flatnonzero(np.abs(E) > tol_orth * scale).tolist())


def compatibility_graph(g: GilbertData, rule: str = "support-disjoint",
                        tol_orth: float = TOL_ORTH) -> CompatGraph:
    """Graph whose edges join residue vectors that can cancel together.

    rule="orthogonal" joins i, j when E_i^T E_j = 0 (within tolerance);
    rule="support-disjoint" requires the nonzero patterns of E_i and E_j
    not to overlap, which implies orthogonality and guarantees a
    conflict-free diagonal assignment.
    """
    if rule not in EDGE_RULES:
        raise ValueError(f"unknown edge rule {rule!r}; expected one of {EDGE_RULES}")
    edges = []
    if rule == "support-disjoint":
        supports = [_support(E, tol_orth) for E in g.E]
        for i in range(g.l):
            for j in range(i + 1, g.l):
                if not (supports[i] & supports[j]):
                    edges.append((i, j))
    else:
        for i in range(g.l):
            for j in range(i + 1, g.l):
                bound = tol_orth * np.linalg.norm(g.E[i]) * np.linalg.norm(g.E[j])
                if abs(float(g.E[i] @ g.E[j])) <= bound:
                    edges.append((i, j))
    return CompatGraph(g.l, edges, rule)


def _bron_kerbosch(adj, r, p, x, out):
    """Pivoted Bron-Kerbosch enumeration of maximal cliques."""
    if not p and not x:
        out.append(frozenset(r))
        return
    pivot = max(p | x, key=lambda v: len(adj[v] & p))
    for v in sorted(p - adj[pivot]):
        _bron_kerbosch(adj, r | {v}, p & adj[v], x & adj[v], out)
        p.remove(v)
        x.add(v)


def maximum_cliques(cg: CompatGraph, enumerate_all: bool = False) -> CliqueResult:
    """Maximum cliques of the compatibility graph, exact.

    An isolated node is a clique of size one, so phi >= 1 whenever the
    graph has nodes.  Cliques are returned as sorted index tuples in
    lexicographic order; without enumerate_all only the first is kept.
    """
    if cg.n == 0:
        return CliqueResult([()], 0)
    out = []
    _bron_kerbosch(cg.adjacency(), set(), set(range(cg.n)), set(), out)
    phi = max(len(c) for c in out)
    cliques = sorted(tuple(sorted(c)) for c in out if len(c) == phi)
    if not enumerate_all:
        cliques = cliques[:1]
    return CliqueResult(cliques, phi)


@dataclass
class MinimalOrder:
    l: int
    phi: int
    order: int
    hidden: int


def minimal_order(d: DSF, rule: str = "support-disjoint",
                  tol_pole: float = TOL_POLE, tol_rank: float = TOL_RANK,
                  tol_orth: float = TOL_ORTH, shift="auto") -> MinimalOrder:
    """Order p + l - phi of the smallest consistent realization."""
    g = extract_modes(d, tol_pole, tol_rank, shift)
    cg = compatibility_graph(g, rule, tol_orth)
    phi = maximum_cliques(cg).phi
    return MinimalOrder(g.l, phi, d.p + g.l - phi, g.l - phi)


def construct_rstar(g: GilbertData, clique, free_value: float = FREE_VALUE,
                    tol_orth: float = TOL_ORTH) -> RStar:
    """Diagonal cancellation matrix forced by a clique of residue vectors.

    Every nonzero component of E_i pins the matching diagonal entry to
    lam_i; positions untouched by the clique stay free.  Overlapping
    supports inside the clique (possible only under the orthogonal edge
    rule) demand two values at once and raise ConflictingAssignment.
    """
    entries = [None] * g.p
    for i in clique:
        lam = g.poles[i]
        for j in sorted(_support(g.E[i], tol_orth)):
            if entries[j] is not None and entries[j] != lam:
                raise ConflictingAssignment(
                    f"diagonal position {j} is claimed by poles {entries[j]} and "
                    f"{lam}; use the support-disjoint edge rule to avoid this")
            entries[j] = lam
    return RStar(tuple(entries), free_value)


def _n_factors(g: GilbertData, rvec: np.ndarray):
    """Vectors N(lam_i) applied entrywise: (lam_i - r_j) / (lam_i - a)."""
    out = []
    for lam in g.poles:
        if abs(lam - g.shift) < 1e-9:
            raise PoleAtZeroWithoutShift(
                f"cannot evaluate the cancellation factor at pole {lam} with shift {g.shift}")
        out.append((lam - rvec) / (lam - g.shift))
    return out


def cancellation_check(g: GilbertData, r, tol: float = TOL_CANCEL) -> list:
    """Per-pole flags: True where N(lam_i) E_i vanishes (pole removed)."""
    rvec = r.materialize() if isinstance(r, RStar) else np.asarray(r, dtype=float)
    flags = []
    for nv, E in zip(_n_factors(g, rvec), g.E):
        flags.append(bool(np.max(np.abs(nv * E)) <= tol * np.max(np.abs(E))))
    return flags


def _assemble(g: GilbertData, rvec: np.ndarray, tol_cancel: float,
              keep_cancelled: bool) -> PartitionedRealization:
    """Realization of [W V] = [R 0] + D1 + sum_i N(lam_i) K_i / (s - lam_i)."""
    p, m = g.p, g.m
    A11 = g.D1[:, :p].copy()
    np.fill_diagonal(A11, 0.0)
    A11 += np.diag(rvec)
    B1 = g.D1[:, p:].copy()
    flags = cancellation_check(g, rvec, tol_cancel)
    keep = [i for i in range(g.l) if keep_cancelled or not flags[i]]
    nvs = _n_factors(g, rvec)
    h = len(keep)
    A22 = np.diag([g.poles[i] for i in keep]) if h else np.zeros((0, 0))
    A12 = (np.column_stack([nvs[i] * g.E[i] for i in keep])
           if h else np.zeros((p, 0)))
    A21 = (np.vstack([g.F[i][:p] for i in keep]) if h else np.zeros((0, p)))
    B2 = (np.vstack([g.F[i][p:] for i in keep]) if h else np.zeros((0, m)))
    return PartitionedRealization(A11, A12, A21, A22, B1, B2)


def realize(d: DSF, r: RStar, modes: GilbertData = None,
            tol_pole: float = TOL_POLE, tol_rank: float = TOL_RANK,
            tol_cancel: float = TOL_CANCEL, shift="auto") -> PartitionedRealization:
    """Consistent realization of d for a given diagonal matrix R.

    The measured block is fixed by the high-frequency limits plus R on
    the diagonal; the hidden block keeps one state per surviving pole.
    Pass precomputed modes to avoid re-extracting them.
    """
    g = modes if modes is not None else extract_modes(d, tol_pole, tol_rank, shift)
    rvec = r.materialize() if isinstance(r, RStar) else np.asarray(r, dtype=float)
    return _assemble(g, rvec, tol_cancel, keep_cancelled=False)


@dataclass
class ZeroMatch:
    """Zero agreement between the V-subsystem and the full realization."""

    point: float
    v_zero: bool
    g_zero: bool
    expected: bool

    @property
    def ok(self) -> bool:
        return self.v_zero == self.expected and self.g_zero == self.expected


@dataclass
class RealizationReport:
    rstar: RStar
    realization: PartitionedRealization
    order: int
    cancelled_poles: list
    cancellation_flags: list
    consistent: bool
    zero_checks: list = field(default_factory=list)


@dataclass
class PipelineResult:
    gilbert: GilbertData
    graph: CompatGraph
    cliques: CliqueResult
    l: int
    phi: int
    order: int
    hidden: int
    realizations: list


def _zero_point_tests(g: GilbertData, rvec, flags, tol_rank):
    """Invariant-zero agreement at cancelled poles and a control point.

    Both tests run on the full (uncancelled) cascade, where a removed
    pole persists as an unobservable mode: the V-subsystem
    (A22, B2, A12, B1) and the assembled system lose Rosenbrock rank
    together exactly at the cancelled poles.
    """
    full = _assemble(g, rvec, TOL_CANCEL, keep_cancelled=True)
    vsub = StateSpace(full.A22, full.B2, full.A12, full.B1)
    gfull = full.assemble()
    checks = []
    for lam, flag in zip(g.poles, flags):
        if not flag:
            continue
        checks.append(ZeroMatch(lam,
                                is_invariant_zero(vsub, lam, tol_rank),
                                is_invariant_zero(gfull, lam, tol_rank),
                                expected=True))
    if g.l >= 2:
        control = 0.5 * (g.poles[0] + g.poles[1])
        checks.append(ZeroMatch(control,
                                is_invariant_zero(vsub, control, tol_rank),
                                is_invariant_zero(gfull, control, tol_rank),
                                expected=False))
    return checks


def minreal_pipeline(d: DSF, rule: str = "support-disjoint",
                     enumerate_all: bool = False, free_value: float = FREE_VALUE,
                     shift="auto", tol_pole: float = TOL_POLE,
                     tol_rank: float = TOL_RANK, tol_orth: float = TOL_ORTH,
                     tol_eval: float = TOL_EVAL,
                     zero_tests: bool = True) -> PipelineResult:
    """Full pipeline: modes, cliques, R* families, realizations, checks.

    One realization is produced per maximum clique (or just the first,
    lexicographically, when enumerate_all is off), each verified for
    consistency against the input structure function.
    """
    g = extract_modes(d, tol_pole, tol_rank, shift)
    cg = compatibility_graph(g, rule, tol_orth)
    cl = maximum_cliques(cg, enumerate_all)
    order = d.p + g.l - cl.phi
    reports = []
    for clique in cl.cliques:
        rstar = construct_rstar(g, clique, free_value, tol_orth)
        rvec = rstar.materialize()
        part = _assemble(g, rvec, TOL_CANCEL, keep_cancelled=False)
        flags = cancellation_check(g, rvec)
        cancelled = [g.poles[i] for i in range(g.l) if flags[i]]
        consistent = consistency_check(part, d, tol_eval)
        checks = _zero_point_tests(g, rvec, flags, tol_rank) if zero_tests else []
        reports.append(RealizationReport(rstar, part, part.order, cancelled,
                                         flags, consistent, checks))
    return PipelineResult(g, cg, cl, g.l, cl.phi, order, g.l - cl.phi, reports)
