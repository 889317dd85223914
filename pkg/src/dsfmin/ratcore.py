"""Real polynomials, rational functions, and rational matrices.

Coefficients are double-precision reals in ascending degree order
(``coeffs[k]`` multiplies ``s**k``).  Rational functions are kept reduced
(no common numerator/denominator roots) with a monic denominator.  Root
finding goes through the companion matrix of the monic polynomial.

Default tolerances; every operation that needs one accepts an override:

* ``TOL_ROOT``  root matching / cancellation (1e-8)
* ``TOL_POLE``  pole deduplication and realness (1e-6)
* ``TOL_EVAL``  sample-point agreement (1e-8)
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import (
    ComplexPolesUnsupported,
    EvaluationAtPole,
    ImproperMatrix,
    RepeatedPole,
    ShapeMismatch,
    SingularRationalMatrix,
    ZeroDenominator,
    ZeroPolynomial,
)

TOL_ROOT = 1e-8
TOL_POLE = 1e-6
TOL_EVAL = 1e-8

# relative floor below which trailing coefficients count as arithmetic noise
_CHOP_REL = 1e-12


class Polynomial:
    """Real polynomial with ascending coefficients.

    The highest stored coefficient is nonzero except for the zero
    polynomial, which is stored as the single coefficient ``[0.0]``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, Polynomial):
            coeffs = coeffs.coeffs
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
        nz = np.flatnonzero(c != 0.0)
        self.coeffs = np.array(c[: nz[-1] + 1]) if nz.size else np.zeros(1)

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return -1 if self.is_zero else self.coeffs.size - 1

    @property
    def lead(self) -> float:
        return float(self.coeffs[-1])

    def __call__(self, s):
        return npoly.polyval(s, self.coeffs)

    def __add__(self, other):
        other = other if isinstance(other, Polynomial) else Polynomial(other)
        return Polynomial(npoly.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        other = other if isinstance(other, Polynomial) else Polynomial(other)
        return Polynomial(npoly.polysub(self.coeffs, other.coeffs))

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.coeffs * float(other))
        other = other if isinstance(other, Polynomial) else Polynomial(other)
        return Polynomial(npoly.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def derivative(self) -> "Polynomial":
        return Polynomial(npoly.polyder(self.coeffs))

    def chop(self, rel: float = _CHOP_REL) -> "Polynomial":
        """Drop trailing coefficients that are tiny relative to the largest."""
        scale = np.max(np.abs(self.coeffs))
        if scale == 0.0:
            return Polynomial([0.0])
        keep = np.flatnonzero(np.abs(self.coeffs) > rel * scale)
        return Polynomial(self.coeffs[: keep[-1] + 1]) if keep.size else Polynomial([0.0])

    def roots(self) -> np.ndarray:
        """All complex roots via companion-matrix eigenvalues."""
        if self.is_zero:
            raise ZeroPolynomial("the zero polynomial has no well-defined roots")
        if self.degree() == 0:
            return np.zeros(0, dtype=complex)
        return np.atleast_1d(npoly.polyroots(self.coeffs))

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"


#: the indeterminate, handy for building expressions like s*Q
S_POLY = Polynomial([0.0, 1.0])


class RootSet(NamedTuple):
    real: list  # (root, multiplicity) pairs, ascending
    cplx: list  # complex roots, unpaired


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product of two polynomials."""
    return a * b


def poly_real_roots(p: Polynomial, tol_root: float = TOL_ROOT) -> RootSet:
    """Split the roots of ``p`` into real (with multiplicities) and complex.

    A root counts as real when its imaginary part is at most ``tol_root``;
    real roots closer than ``tol_root`` are merged into one root with the
    corresponding multiplicity.
    """
    r = p.roots()
    real = np.sort(r[np.abs(r.imag) <= tol_root].real)
    cplx = [complex(z) for z in r[np.abs(r.imag) > tol_root]]
    clusters = []
    for x in real:
        if clusters and x - clusters[-1][-1] <= tol_root:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return RootSet([(float(np.mean(c)), len(c)) for c in clusters], cplx)


_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


def _realify(roots):
    """Zero out imaginary parts that sit below the root resolution limit.

    Multiple real roots split into conjugate pairs with tiny imaginary
    parts; snapping them back keeps cancellation bookkeeping conjugate
    safe.
    """
    roots = np.asarray(roots, dtype=complex)
    tiny = np.abs(roots.imag) <= 8.0 * _SQRT_EPS * (1.0 + np.abs(roots))
    return np.where(tiny, roots.real.astype(complex), roots)


def _cancel_common_roots(nr, dr, tol_root):
    """Greedily pair numerator roots with nearby denominator roots.

    A multiple root is resolved by the companion eigensolver only to
    about sqrt(eps), so the pairing tolerance never drops below that
    limit regardless of the requested tol_root.
    """
    keep_n = list(nr)
    keep_d = []
    cancelled = False
    for d in dr:
        if keep_n:
            j = int(np.argmin(np.abs(np.asarray(keep_n) - d)))
            floor = 8.0 * _SQRT_EPS * (1.0 + abs(d))
            if abs(keep_n[j] - d) <= max(tol_root, floor):
                keep_n.pop(j)
                cancelled = True
                continue
        keep_d.append(d)
    return keep_n, keep_d, cancelled


def _real_coeffs(roots, imag_floor=1e-7):
    roots = sorted(roots, key=lambda z: (z.real, z.imag))  # canonical order
    c = npoly.polyfromroots(roots)
    scale = max(1.0, np.max(np.abs(c)))
    if np.max(np.abs(c.imag)) > imag_floor * scale:
        raise ValueError("non-conjugate root set produced complex coefficients")
    return c.real


class RationalFunction:
    """Reduced ratio of two real polynomials with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,), tol_root: float = TOL_ROOT):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise ZeroDenominator("denominator is the zero polynomial")
        num = num.chop()
        den = den.chop()
        if num.is_zero:
            self.num = Polynomial([0.0])
            self.den = Polynomial([1.0])
            return
        if num.degree() > 0 or den.degree() > 0:
            nr = _realify(num.roots()) if num.degree() > 0 else np.zeros(0, dtype=complex)
            dr = _realify(den.roots()) if den.degree() > 0 else np.zeros(0, dtype=complex)
            keep_n, keep_d, cancelled = _cancel_common_roots(nr, dr, tol_root)
            if cancelled:
                scale = num.lead / den.lead
                self.num = Polynomial(scale * _real_coeffs(keep_n))
                self.den = Polynomial(_real_coeffs(keep_d))
                return
        lead = den.lead
        self.num = Polynomial(num.coeffs / lead)
        self.den = Polynomial(den.coeffs / lead)

    # -- classification ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def relative_degree(self):
        """deg(den) - deg(num); infinity for the zero function."""
        if self.is_zero:
            return np.inf
        return self.den.degree() - self.num.degree()

    @property
    def is_proper(self) -> bool:
        return self.relative_degree() >= 0

    @property
    def is_strictly_proper(self) -> bool:
        return self.relative_degree() >= 1

    def poles(self) -> np.ndarray:
        """Complex roots of the (reduced) denominator."""
        if self.den.degree() == 0:
            return np.zeros(0, dtype=complex)
        return self.den.roots()

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = _as_ratfun(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        d1, d2 = self.den.coeffs, other.den.coeffs
        if d1.size == d2.size and np.allclose(d1, d2, rtol=1e-11, atol=0.0):
            # common denominator (both monic): avoid duplicating factors
            return RationalFunction(self.num + other.num, self.den)
        if self.den.degree() > 0 and other.den.degree() > 0:
            return _add_over_lcm(self, other)
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self.__add__(-_as_ratfun(other))

    def __rsub__(self, other):
        return _as_ratfun(other).__sub__(self)

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other):
        other = _as_ratfun(other)
        return _combine(self.num, other.num, self.den, other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfun(other)
        if other.is_zero:
            raise ZeroDenominator("division by the zero rational function")
        return _combine(self.num, other.den, self.den, other.num)

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def __repr__(self):
        return f"RationalFunction({self.num.coeffs.tolist()}, {self.den.coeffs.tolist()})"


def _as_ratfun(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    return RationalFunction([float(x)])


def _raw_ratfun(num: Polynomial, den: Polynomial) -> RationalFunction:
    """Wrap already-reduced parts, normalizing the denominator to monic."""
    obj = RationalFunction.__new__(RationalFunction)
    lead = den.lead
    obj.num = Polynomial(num.coeffs / lead)
    obj.den = Polynomial(den.coeffs / lead)
    return obj


def _add_over_lcm(f: RationalFunction, g: RationalFunction,
                  tol_root: float = TOL_ROOT) -> RationalFunction:
    """Sum over the least common multiple of the factored denominators.

    Shared denominator roots are counted once, so sums never manufacture
    multiple roots that a later cancellation would have to resolve.
    """
    d1r = list(_realify(f.den.roots()))
    d2r = list(_realify(g.den.roots()))
    d2_only = []
    d1_only = list(d1r)  # d1 roots not shared with d2, after pairing
    for z in d2r:
        if d1_only:
            j = int(np.argmin(np.abs(np.asarray(d1_only) - z)))
            floor = 8.0 * _SQRT_EPS * (1.0 + abs(z))
            if abs(d1_only[j] - z) <= max(tol_root, floor):
                d1_only.pop(j)
                continue
        d2_only.append(z)
    num = f.num * Polynomial(_real_coeffs(d2_only)) + \
        g.num * Polynomial(_real_coeffs(d1_only))
    den = Polynomial(_real_coeffs(d1r + d2_only))
    return RationalFunction(num, den, tol_root)


def _combine(n1: Polynomial, n2: Polynomial, d1: Polynomial, d2: Polynomial,
             tol_root: float = TOL_ROOT) -> RationalFunction:
    """Reduced product (n1 n2) / (d1 d2) of already-reduced fractions.

    Cancellation is detected on the root lists of the individual factors,
    so duplicate factors across the two fractions pair up at full root
    accuracy instead of degrading through an expanded multiple root.
    """
    if n1.is_zero or n2.is_zero:
        return RationalFunction([0.0])
    if max(n1.degree(), n2.degree(), d1.degree(), d2.degree()) == 0:
        return _raw_ratfun(n1 * (n2.lead / (d1.lead * d2.lead)), Polynomial([1.0]))
    nr = np.concatenate([_realify(p.roots()) if p.degree() > 0 else np.zeros(0, complex)
                         for p in (n1, n2)])
    dr = np.concatenate([_realify(p.roots()) if p.degree() > 0 else np.zeros(0, complex)
                         for p in (d1, d2)])
    keep_n, keep_d, cancelled = _cancel_common_roots(nr, dr, tol_root)
    if not cancelled:
        return _raw_ratfun(n1 * n2, d1 * d2)
    scale = (n1.lead * n2.lead) / (d1.lead * d2.lead)
    return _raw_ratfun(Polynomial(scale * _real_coeffs(keep_n)),
                       Polynomial(_real_coeffs(keep_d)))


def rat_reduce(num, den, tol_root: float = TOL_ROOT) -> RationalFunction:
    """Reduced rational function num/den with common roots cancelled."""
    return RationalFunction(num, den, tol_root=tol_root)


def ratfun_equal(f: RationalFunction, g: RationalFunction,
                 tol_eval: float = TOL_EVAL, sample_points=None) -> bool:
    """Equality of two rational functions.

    Cross-multiplied numerators are compared coefficient-wise first; on
    failure, agreement is checked at deterministic off-pole sample points.
    """
    a = f.num * g.den
    b = g.num * f.den
    scale = max(np.max(np.abs(a.coeffs)), np.max(np.abs(b.coeffs)), 1.0)
    if np.max(np.abs((a - b).coeffs)) <= tol_eval * scale:
        return True
    if sample_points is None:
        sample_points = _sample_points([f, g], 16)
    for s in sample_points:
        fv, gv = f(s), g(s)
        if abs(fv - gv) > tol_eval * max(1.0, abs(fv), abs(gv)):
            return False
    return True


def _sample_points(funcs, count):
    """Deterministic points s_k = sigma + k, sigma = 1 + max |pole|."""
    mags = [0.0]
    for f in funcs:
        p = f.poles()
        if p.size:
            mags.append(float(np.max(np.abs(p))))
    sigma = 1.0 + max(mags)
    return [sigma + k for k in range(1, count + 1)]


class RationalMatrix:
    """Dense matrix of reduced rational functions."""

    __slots__ = ("entries", "rows", "cols")

    def __init__(self, entries):
        if not entries or not entries[0]:
            raise ValueError("rational matrix must have at least one entry")
        cols = len(entries[0])
        for row in entries:
            if len(row) != cols:
                raise ShapeMismatch("ragged rows in rational matrix")
        self.entries = [[_as_ratfun(e) for e in row] for row in entries]
        self.rows = len(entries)
        self.cols = cols

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_real(cls, M) -> "RationalMatrix":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls([[RationalFunction([M[i, j]]) for j in range(M.shape[1])]
                    for i in range(M.shape[0])])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls.from_real(np.zeros((rows, cols)))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_real(np.eye(n))

    @classmethod
    def hstack(cls, left: "RationalMatrix", right: "RationalMatrix") -> "RationalMatrix":
        if left.rows != right.rows:
            raise ShapeMismatch("row counts differ in hstack")
        return cls([lr + rr for lr, rr in zip(left.entries, right.entries)])

    # -- access ----------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def entry(self, i: int, j: int) -> RationalFunction:
        return self.entries[i][j]

    def submatrix(self, row_idx, col_idx) -> "RationalMatrix":
        return RationalMatrix([[self.entries[i][j] for j in col_idx] for i in row_idx])

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        self._check_shape(other)
        return RationalMatrix([[a + b for a, b in zip(ra, rb)]
                               for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_shape(other)
        return RationalMatrix([[a - b for a, b in zip(ra, rb)]
                               for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self):
        return RationalMatrix([[-a for a in row] for row in self.entries])

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RationalFunction([0.0])
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return RationalMatrix(out)

    def scale(self, f) -> "RationalMatrix":
        """Entrywise multiplication by a scalar, polynomial, or rational."""
        f = _as_ratfun(f)
        return RationalMatrix([[e * f for e in row] for row in self.entries])

    def _check_shape(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch(f"shapes {self.shape} and {other.shape} differ")

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"


def _all_den_roots(M: RationalMatrix):
    """(i, j, roots) triples of denominator roots, reduced entries."""
    out = []
    for i in range(M.rows):
        for j in range(M.cols):
            out.append((i, j, M.entries[i][j].poles()))
    return out


def rmat_poles(M: RationalMatrix, tol_pole: float = TOL_POLE) -> list:
    """Distinct real poles of ``M``, ascending.

    Raises ComplexPolesUnsupported when any entry has a complex pole,
    naming the offending entries.
    """
    roots = []
    bad = []
    for i, j, r in _all_den_roots(M):
        if r.size and np.max(np.abs(r.imag)) > tol_pole:
            bad.append((i, j))
        roots.extend(r.real[np.abs(r.imag) <= tol_pole])
    if bad:
        raise ComplexPolesUnsupported(
            f"complex poles in entries {bad}; only real poles are supported")
    if not roots:
        return []
    roots = np.sort(np.asarray(roots))
    clusters = [[roots[0]]]
    for x in roots[1:]:
        if x - clusters[-1][-1] <= tol_pole:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [float(np.mean(c)) for c in clusters]


def residue_at(M: RationalMatrix, lam: float, tol_pole: float = TOL_POLE) -> np.ndarray:
    """Entrywise limit of (s - lam) * M(s) as s -> lam.

    Zero where ``lam`` is not a pole of an entry; RepeatedPole when an
    entry carries ``lam`` with multiplicity two or more.
    """
    K = np.zeros((M.rows, M.cols))
    for i, j, r in _all_den_roots(M):
        if not r.size:
            continue
        near = np.abs(r - lam) <= tol_pole
        count = int(np.sum(near))
        if count == 0:
            continue
        if count > 1:
            raise RepeatedPole(
                f"entry ({i}, {j}) has a pole of multiplicity {count} near {lam}")
        root = float(r[near][0].real)
        e = M.entries[i][j]
        K[i, j] = e.num(root) / e.den.derivative()(root)
    return K


def limit_at_infinity(M: RationalMatrix) -> np.ndarray:
    """Entrywise limit of M(s) as s -> infinity; errors if improper."""
    bad = [(i, j) for i in range(M.rows) for j in range(M.cols)
           if not M.entries[i][j].is_proper]
    if bad:
        raise ImproperMatrix(f"improper entries {bad}")
    D = np.zeros((M.rows, M.cols))
    for i in range(M.rows):
        for j in range(M.cols):
            e = M.entries[i][j]
            if not e.is_zero and e.relative_degree() == 0:
                D[i, j] = e.num.lead / e.den.lead
    return D


def to_pole_residue(M: RationalMatrix, tol_pole: float = TOL_POLE):
    """Simple-pole expansion of a proper rational matrix."""
    constant = limit_at_infinity(M)
    poles = rmat_poles(M, tol_pole)
    kept_poles, residues = [], []
    for lam in poles:
        K = residue_at(M, lam, tol_pole)
        if np.max(np.abs(K)) > 0.0:
            kept_poles.append(lam)
            residues.append(K)
    return PoleResidueForm(np.asarray(kept_poles), residues, constant)


class PoleResidueForm:
    """Sum of rank-unrestricted residue matrices over distinct real poles.

    Represents ``sum_i K_i / (s - lam_i) + D`` with ``poles`` ascending.
    """

    __slots__ = ("poles", "residues", "constant")

    def __init__(self, poles, residues, constant):
        self.poles = np.atleast_1d(np.asarray(poles, dtype=float))
        self.residues = [np.atleast_2d(np.asarray(K, dtype=float)) for K in residues]
        self.constant = np.atleast_2d(np.asarray(constant, dtype=float))
        if len(self.residues) != self.poles.size:
            raise ShapeMismatch("pole and residue counts differ")
        for K in self.residues:
            if K.shape != self.constant.shape:
                raise ShapeMismatch("residue shape differs from constant term")

    @property
    def shape(self):
        return self.constant.shape

    def __repr__(self):
        return f"PoleResidueForm(poles={self.poles.tolist()})"


def from_pole_residue(prf: PoleResidueForm) -> RationalMatrix:
    """Rational matrix ``sum_i K_i/(s - lam_i) + D``, entries reduced."""
    lams = prf.poles
    den = _real_coeffs([complex(x) for x in lams])
    partial = [_real_coeffs([complex(x) for k, x in enumerate(lams) if k != i])
               for i in range(lams.size)]
    rows, cols = prf.shape
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            num = np.asarray(prf.constant[i, j] * den)
            for k in range(lams.size):
                num = npoly.polyadd(num, prf.residues[k][i, j] * partial[k])
            row.append(RationalFunction(num, den))
        out.append(row)
    return RationalMatrix(out)


def rmat_eval(M: RationalMatrix, s0, tol_pole: float = TOL_POLE) -> np.ndarray:
    """Entrywise value of M at s0; errors when s0 sits on a pole."""
    out = np.zeros((M.rows, M.cols), dtype=complex)
    for i, j, r in _all_den_roots(M):
        if r.size and np.min(np.abs(r - s0)) <= tol_pole:
            raise EvaluationAtPole(f"s0={s0} is a pole of entry ({i}, {j})")
        out[i, j] = M.entries[i][j](s0)
    if np.max(np.abs(out.imag)) == 0.0:
        return out.real
    return out


def rmat_det(M: RationalMatrix) -> RationalFunction:
    """Determinant by cofactor expansion (small matrices only)."""
    if M.rows != M.cols:
        raise ShapeMismatch("determinant of a non-square matrix")
    n = M.rows
    if n == 1:
        return M.entries[0][0]
    acc = RationalFunction([0.0])
    cols = list(range(n))
    for j in range(n):
        minor = M.submatrix(range(1, n), [c for c in cols if c != j])
        term = M.entries[0][j] * rmat_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def rmat_inverse(M: RationalMatrix) -> RationalMatrix:
    """Adjugate-over-determinant inverse with reduced entries."""
    if M.rows != M.cols:
        raise ShapeMismatch("inverse of a non-square matrix")
    n = M.rows
    det = rmat_det(M)
    if det.is_zero:
        raise SingularRationalMatrix("determinant is identically zero")
    if n == 1:
        return RationalMatrix([[RationalFunction([1.0]) / det]])
    rows_all = list(range(n))
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = M.submatrix([r for r in rows_all if r != j],
                                [c for c in rows_all if c != i])
            cof = rmat_det(minor)
            if (i + j) % 2 == 1:
                cof = -cof
            out[i][j] = cof / det
    return RationalMatrix(out)


def rmat_equal(M1: RationalMatrix, M2: RationalMatrix,
               tol_eval: float = TOL_EVAL) -> bool:
    """Entrywise equality of two rational matrices (see ratfun_equal)."""
    if M1.shape != M2.shape:
        raise ShapeMismatch(f"shapes {M1.shape} and {M2.shape} differ")
    funcs = [e for row in M1.entries for e in row] + \
            [e for row in M2.entries for e in row]
    pts = _sample_points(funcs, 16)
    for r1, r2 in zip(M1.entries, M2.entries):
        for a, b in zip(r1, r2):
            if not ratfun_equal(a, b, tol_eval, sample_points=pts):
                return False
    return True
