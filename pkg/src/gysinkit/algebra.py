"""Finite-dimensional commutative algebras over Novikov-lattice fields.

Two presentation styles are supported: a cyclic binomial presentation
``h^m = c T^lam`` (basis 1, h, ..., h^{m-1}) and a full multiplication table.
Both can be split into idempotents: the binomial path uses exact Lagrange
interpolation at the formal roots (grouped into lattice-stable orbits when
the root exponent is off the lattice), the table path diagonalizes a generic
multiplication operator via truncated Puiseux roots of its characteristic
polynomial and regroups the rank-one projections under the lattice-fixing
twist.  Non-semisimple or ill-conditioned tables are rejected.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .novikov import DEFAULT_TRUNCATION, ExponentLattice, NovikovScalar
from .puiseux import PuiseuxPrecisionError, poly_derivative, poly_embed, poly_eval, puiseux_roots

#: Off-lattice residue larger than this aborts projection back to the base lattice.
LATTICE_DUST_TOL = 1e-7

#: Default residual tolerance for decomposition verification.
DEFAULT_VERIFY_TOL = 1e-9

#: Deterministic generic-element weight schedules for the table splitter.
_GENERIC_WEIGHTS = (
    lambda i: complex(i + 1),
    lambda i: complex(3 ** i),
    lambda i: complex(i + 1, 2 * i + 1),
)


class NonSemisimpleError(ValueError):
    """The table is not a direct sum of fields at this truncation."""


class AlgebraElement:
    """Coefficient vector over the presentation's basis."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[NovikovScalar]):
        self.coeffs = tuple(coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __add__(self, other):
        return AlgebraElement(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other):
        return AlgebraElement(a - b for a, b in zip(self.coeffs, other.coeffs))

    def scale(self, s: NovikovScalar) -> "AlgebraElement":
        return AlgebraElement(s * a for a in self.coeffs)

    def norm_inf(self) -> float:
        return max((a.norm_inf() for a in self.coeffs), default=0.0)

    def isclose(self, other, tol=1e-9) -> bool:
        return all(a.isclose(b, tol) for a, b in zip(self.coeffs, other.coeffs))

    def to_json(self) -> list:
        return [a.to_json() for a in self.coeffs]

    def __repr__(self):
        return "AlgebraElement[" + ", ".join(repr(a) for a in self.coeffs) + "]"


class CyclicPresentation:
    """Binomial cyclic algebra Lambda[h] / (h^m - c T^lam)."""

    def __init__(
        self,
        m: int,
        c: complex,
        lam,
        lattice: ExponentLattice,
        truncation=DEFAULT_TRUNCATION,
    ):
        if m < 1:
            raise ValueError("m must be >= 1")
        if c == 0:
            raise ValueError("binomial relation needs c != 0")
        self.m = int(m)
        self.c = complex(c)
        self.lam = Fraction(lam)
        if not lattice.contains(self.lam):
            raise ValueError(f"relation exponent {self.lam} off lattice")
        self.lattice = lattice
        self.truncation = Fraction(truncation)

    @property
    def dim(self) -> int:
        return self.m

    def zero_scalar(self) -> NovikovScalar:
        return NovikovScalar.zero(self.lattice, self.truncation)

    def element(self, entries) -> AlgebraElement:
        out = []
        for e in entries:
            if isinstance(e, NovikovScalar):
                out.append(e)
            else:
                out.append(
                    NovikovScalar(self.lattice, [(0, complex(e))], self.truncation)
                )
        if len(out) != self.m:
            raise ValueError("wrong coefficient count")
        return AlgebraElement(out)

    def unit(self) -> AlgebraElement:
        return self.element([1] + [0] * (self.m - 1))

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        if len(a) != self.m or len(b) != self.m:
            raise ValueError("element dimension mismatch")
        rel = NovikovScalar.monomial(self.lattice, self.c, self.lam, self.truncation)
        out = [self.zero_scalar() for _ in range(self.m)]
        for i, ai in enumerate(a.coeffs):
            if ai.is_zero(0.0):
                continue
            for j, bj in enumerate(b.coeffs):
                if bj.is_zero(0.0):
                    continue
                k = i + j
                term = ai * bj
                if k >= self.m:
                    k -= self.m
                    term = term * rel
                out[k] = out[k] + term
        return AlgebraElement(out)

    def to_json(self) -> dict:
        return {
            "type": "cyclic",
            "m": self.m,
            "c": [self.c.real, self.c.imag],
            "lambda": str(self.lam),
            "lattice_denominator": self.lattice.denominator_bound,
            "truncation": str(self.truncation),
        }


class TablePresentation:
    """Commutative associative unital algebra given by its multiplication table.

    ``products[i][j]`` is the coefficient vector of ``b_i * b_j``.
    Commutativity, associativity and the existence of a unit are checked on
    construction.
    """

    def __init__(
        self,
        products: Sequence[Sequence[Sequence[NovikovScalar]]],
        lattice: ExponentLattice,
        truncation=DEFAULT_TRUNCATION,
        check_tol: float = 1e-8,
    ):
        self.dim = len(products)
        self.lattice = lattice
        self.truncation = Fraction(truncation)
        self.products = [
            [list(products[i][j]) for j in range(self.dim)] for i in range(self.dim)
        ]
        for i in range(self.dim):
            for j in range(self.dim):
                if len(self.products[i][j]) != self.dim:
                    raise ValueError("product vectors must have length dim")
        self._validate(check_tol)
        self._unit = self._solve_unit()

    def zero_scalar(self) -> NovikovScalar:
        return NovikovScalar.zero(self.lattice, self.truncation)

    def element(self, entries) -> AlgebraElement:
        out = []
        for e in entries:
            if isinstance(e, NovikovScalar):
                out.append(e)
            else:
                out.append(NovikovScalar(self.lattice, [(0, complex(e))], self.truncation))
        if len(out) != self.dim:
            raise ValueError("wrong coefficient count")
        return AlgebraElement(out)

    def basis_element(self, i: int) -> AlgebraElement:
        return self.element([1 if j == i else 0 for j in range(self.dim)])

    def unit(self) -> AlgebraElement:
        return self._unit

    @classmethod
    def _unchecked(cls, products, lattice, truncation, unit) -> "TablePresentation":
        obj = cls.__new__(cls)
        obj.dim = len(products)
        obj.lattice = lattice
        obj.truncation = Fraction(truncation)
        obj.products = products
        obj._unit = unit
        return obj

    def on_lattice(self, lattice: ExponentLattice) -> "TablePresentation":
        """The same table with scalars re-declared on a finer lattice."""
        products = [
            [[s.on_lattice(lattice) for s in cell] for cell in row]
            for row in self.products
        ]
        unit = AlgebraElement([s.on_lattice(lattice) for s in self._unit.coeffs])
        return TablePresentation._unchecked(products, lattice, self.truncation, unit)

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        if len(a) != self.dim or len(b) != self.dim:
            raise ValueError("element dimension mismatch")
        out = [self.zero_scalar() for _ in range(self.dim)]
        for i, ai in enumerate(a.coeffs):
            if ai.is_zero(0.0):
                continue
            for j, bj in enumerate(b.coeffs):
                if bj.is_zero(0.0):
                    continue
                f = ai * bj
                for k, p in enumerate(self.products[i][j]):
                    if not p.is_zero(0.0):
                        out[k] = out[k] + f * p
        return AlgebraElement(out)

    def _validate(self, tol: float):
        m = self.dim
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(m):
                    if not self.products[i][j][k].isclose(self.products[j][i][k], tol):
                        raise ValueError(f"table not commutative at ({i},{j})")
        basis = [self.basis_element(i) for i in range(m)]
        for i in range(m):
            for j in range(m):
                ij = self.multiply(basis[i], basis[j])
                for k in range(m):
                    left = self.multiply(ij, basis[k])
                    right = self.multiply(basis[i], self.multiply(basis[j], basis[k]))
                    if not left.isclose(right, tol):
                        raise ValueError(f"table not associative at ({i},{j},{k})")

    def _solve_unit(self) -> AlgebraElement:
        # solve sum_i x_i (b_i * b_j) = b_j for all j
        m = self.dim
        rows: List[List[NovikovScalar]] = []
        rhs: List[NovikovScalar] = []
        one = NovikovScalar.one(self.lattice, self.truncation)
        zero = self.zero_scalar()
        for j in range(m):
            for k in range(m):
                rows.append([self.products[i][j][k] for i in range(m)])
                rhs.append(one if k == j else zero)
        try:
            x = solve_linear(rows, rhs)
        except ValueError as exc:
            raise ValueError(f"table has no unit element: {exc}") from exc
        return AlgebraElement(x)

    def to_json(self) -> dict:
        return {
            "type": "table",
            "dim": self.dim,
            "products": [
                [[s.to_json() for s in self.products[i][j]] for j in range(self.dim)]
                for i in range(self.dim)
            ],
            "lattice_denominator": self.lattice.denominator_bound,
            "truncation": str(self.truncation),
        }


AlgebraPresentation = (CyclicPresentation, TablePresentation)


def presentation_from_json(data: dict):
    lattice = ExponentLattice(data.get("lattice_denominator", 1))
    truncation = Fraction(data.get("truncation", DEFAULT_TRUNCATION))
    if data["type"] == "cyclic":
        re, im = data["c"]
        return CyclicPresentation(
            data["m"], complex(re, im), Fraction(data["lambda"]), lattice, truncation
        )
    if data["type"] == "table":
        products = [
            [[NovikovScalar.from_json(s) for s in cell] for cell in row]
            for row in data["products"]
        ]
        return TablePresentation(products, lattice, truncation)
    raise ValueError(f"unknown presentation type {data['type']!r}")


def multiply(p, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return p.multiply(a, b)


# ----------------------------------------------------------------------
# linear algebra over the scalar field
# ----------------------------------------------------------------------


def solve_linear(
    rows: List[List[NovikovScalar]], rhs: List[NovikovScalar]
) -> List[NovikovScalar]:
    """Solve an (over)determined linear system by valuation-pivoted elimination."""
    n_rows = len(rows)
    n_cols = len(rows[0])
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        best = None
        best_val = None
        for rr in range(r, n_rows):
            e = aug[rr][c]
            if e.is_zero():
                continue
            v = e.valuation()
            if best is None or v < best_val:
                best, best_val = rr, v
        if best is None:
            continue
        aug[r], aug[best] = aug[best], aug[r]
        inv = aug[r][c].inverse()
        aug[r] = [inv * e for e in aug[r]]
        for rr in range(n_rows):
            if rr != r and not aug[rr][c].is_zero(0.0):
                f = aug[rr][c]
                aug[rr] = [e - f * g for e, g in zip(aug[rr], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for rr in range(r, n_rows):
        if not aug[rr][n_cols].is_zero(1e-8):
            raise ValueError("inconsistent linear system")
    if len(pivots) < n_cols:
        raise ValueError("singular linear system")
    out = [None] * n_cols
    for i, c in enumerate(pivots):
        out[c] = aug[i][n_cols]
    return out  # type: ignore[return-value]


def _char_poly(M: List[List[NovikovScalar]], lattice, truncation) -> List[NovikovScalar]:
    """Monic characteristic polynomial via Faddeev-LeVerrier."""
    m = len(M)
    one = NovikovScalar.one(lattice, truncation)
    zero = NovikovScalar.zero(lattice, truncation)

    def mat_mul(A, B):
        return [
            [
                sum((A[i][t] * B[t][j] for t in range(m)), zero)
                for j in range(m)
            ]
            for i in range(m)
        ]

    def add_diag(A, s):
        return [
            [A[i][j] + s if i == j else A[i][j] for j in range(m)] for i in range(m)
        ]

    def trace(A):
        return sum((A[i][i] for i in range(m)), zero)

    coeffs = [zero] * m + [one]  # index = degree
    Mk = [row[:] for row in M]
    ck = trace(Mk).scale(-1.0)
    coeffs[m - 1] = ck
    for k in range(2, m + 1):
        Mk = mat_mul(M, add_diag(Mk, ck))
        ck = trace(Mk).scale(-1.0 / k)
        coeffs[m - k] = ck
    return coeffs


# ----------------------------------------------------------------------
# decompositions
# ----------------------------------------------------------------------


@dataclass
class IdempotentDecomposition:
    idempotents: List[AlgebraElement]
    field_factor_flags: List[bool]
    lattice: ExponentLattice

    def __len__(self):
        return len(self.idempotents)

    def to_json(self) -> dict:
        return {
            "idempotents": [e.to_json() for e in self.idempotents],
            "field_factor_flags": list(self.field_factor_flags),
            "lattice_denominator": self.lattice.denominator_bound,
        }


@dataclass
class DecompositionReport:
    sum_residual: float
    idempotency_residuals: List[float]
    orthogonality_residuals: List[Tuple[int, int, float]]
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.sum_residual <= self.tol
            and all(r <= self.tol for r in self.idempotency_residuals)
            and all(r <= self.tol for _, _, r in self.orthogonality_residuals)
        )

    @property
    def max_residual(self) -> float:
        worst = self.sum_residual
        for r in self.idempotency_residuals:
            worst = max(worst, r)
        for _, _, r in self.orthogonality_residuals:
            worst = max(worst, r)
        return worst

    def to_json(self) -> dict:
        return {
            "sum_residual": self.sum_residual,
            "idempotency_residuals": self.idempotency_residuals,
            "orthogonality_residuals": [
                {"i": i, "j": j, "residual": r} for i, j, r in self.orthogonality_residuals
            ],
            "tol": self.tol,
            "passed": self.passed,
        }


def _canonical_sort(decomp: IdempotentDecomposition) -> IdempotentDecomposition:
    def key(e: AlgebraElement):
        lead_val = None
        lead_coeff = 1.0 + 0j
        for s in e.coeffs:
            if s.terms:
                v, c = s.leading()
                if lead_val is None or v < lead_val:
                    lead_val, lead_coeff = v, c
        if lead_val is None:
            return (Fraction(0), 0, "")
        # wrap-aware quantization: angles within float dust of a full turn
        # land in the same bucket as 0
        turns = (cmath.phase(lead_coeff) / (2 * math.pi)) % 1.0
        arg_q = int(round(turns * 1e8)) % 100000000
        fingerprint = repr([s.to_json() for s in e.coeffs])
        return (lead_val, arg_q, fingerprint)

    order = sorted(range(len(decomp.idempotents)), key=lambda i: key(decomp.idempotents[i]))
    return IdempotentDecomposition(
        [decomp.idempotents[i] for i in order],
        [decomp.field_factor_flags[i] for i in order],
        decomp.lattice,
    )


def split_binomial(p: CyclicPresentation) -> IdempotentDecomposition:
    """Idempotent decomposition of Lambda[h]/(h^m - c T^lam) over its lattice.

    The m formal roots r_j = |c|^{1/m} e^{i(arg c + 2 pi j)/m} T^{lam/m} group
    into g = gcd(m, lam * d) lattice-stable orbits; each orbit sum of the
    Lagrange idempotents (1/m) sum_k (h/r_j)^k lands on the lattice and is
    the unit of one field factor.  g = 1 returns {1} (binomial irreducible
    by the Newton-polygon criterion).
    """
    m, c, lam = p.m, p.c, p.lam
    d = p.lattice.denominator_bound
    a = lam * d
    assert a.denominator == 1
    a = int(a)
    g = math.gcd(m, abs(a)) if a != 0 else m
    rho_mod = abs(c) ** (1.0 / m)
    rho_arg = cmath.phase(c) / m
    zeta = 2.0 * math.pi / m
    step = m // g  # only h^k with step | k appear in the orbit sums
    idempotents = []
    for j in range(g):
        coeffs = [p.zero_scalar() for _ in range(m)]
        for s in range(g):
            k = s * step
            # sum over the orbit of r^{-k}, nonzero only at these k:
            # (1/g) * rho^{-k} * e^{-i k (rho_arg + j zeta)} on exponent -k lam/m
            amp = (rho_mod ** (-k)) / g
            phase = -k * (rho_arg + j * zeta)
            exponent = Fraction(-k) * lam / m
            coeffs[k] = NovikovScalar.monomial(
                p.lattice, amp * cmath.exp(1j * phase), exponent, p.truncation
            )
        idempotents.append(AlgebraElement(coeffs))
    decomp = IdempotentDecomposition(idempotents, [True] * g, p.lattice)
    return _canonical_sort(decomp)


def _twist(s: NovikovScalar, base_denominator: int) -> NovikovScalar:
    """Generator of the lattice-fixing twist on a refined lattice."""
    return NovikovScalar(
        s.lattice,
        ((e, c * cmath.exp(2j * math.pi * float(e * base_denominator))) for e, c in s.terms),
        s.truncation,
    )


def _project_to_lattice(s: NovikovScalar, lattice: ExponentLattice) -> NovikovScalar:
    on = [(e, c) for e, c in s.terms if lattice.contains(e)]
    dust = max((abs(c) for e, c in s.terms if not lattice.contains(e)), default=0.0)
    if dust > LATTICE_DUST_TOL:
        raise NonSemisimpleError(
            f"orbit sum has off-lattice residue {dust:.2e}; ill-conditioned table"
        )
    return NovikovScalar(lattice, on, s.truncation)


def split_table(p: TablePresentation) -> IdempotentDecomposition:
    """Idempotent decomposition of a semisimple multiplication table.

    Diagonalizes a deterministic generic element's multiplication operator:
    Puiseux roots of its characteristic polynomial give rank-one Lagrange
    projections over a refined lattice, which are summed over orbits of the
    lattice-fixing twist to produce the idempotents over the base lattice.
    """
    m = p.dim
    if m == 1:
        return IdempotentDecomposition([p.unit()], [True], p.lattice)
    last_error: Optional[Exception] = None
    for weights in _GENERIC_WEIGHTS:
        try:
            return _split_table_once(p, [weights(i) for i in range(m)])
        except NonSemisimpleError:
            raise
        except PuiseuxPrecisionError as exc:
            last_error = exc
    raise NonSemisimpleError(
        f"no generic element separated the table at this truncation: {last_error}"
    )


def _split_table_once(p: TablePresentation, weights: List[complex]) -> IdempotentDecomposition:
    m = p.dim
    g = p.element(weights)
    basis = [p.basis_element(i) for i in range(m)]
    cols = [p.multiply(g, b) for b in basis]
    M = [[cols[j].coeffs[i] for j in range(m)] for i in range(m)]
    chi = _char_poly(M, p.lattice, p.truncation)
    roots = puiseux_roots(chi, p.truncation)
    if len(roots) != m:
        raise PuiseuxPrecisionError("root count mismatch")

    fine = p.lattice
    for r in roots:
        fine = fine.join(r.lattice)
    roots = [r.on_lattice(fine) for r in roots]
    chi_f = poly_embed(chi, fine)
    dchi_f = poly_derivative(chi_f)

    pf = p.on_lattice(fine)
    g_f = AlgebraElement([s.on_lattice(fine) for s in g.coeffs])
    g_powers = [pf.unit()]
    for _ in range(m - 1):
        g_powers.append(pf.multiply(g_powers[-1], g_f))

    def lagrange_projection(root: NovikovScalar) -> AlgebraElement:
        # q(x) = chi(x) / ((x - root) chi'(root)), evaluated at g
        quotient = []
        rem = chi_f[-1]
        for c in reversed(chi_f[:-1]):
            quotient.append(rem)
            rem = c + rem * root
        quotient.reverse()  # coefficients of chi/(x - root), degree m-1
        denom = poly_eval(dchi_f, root)
        if denom.is_zero():
            raise PuiseuxPrecisionError("repeated eigenvalue in projection")
        dinv = denom.inverse()
        acc = AlgebraElement([pf.zero_scalar() for _ in range(m)])
        for k, qk in enumerate(quotient):
            acc = acc + g_powers[k].scale(qk * dinv)
        return acc

    projections = [lagrange_projection(r) for r in roots]

    # orbit grouping under the twist fixing the base lattice
    base_d = p.lattice.denominator_bound
    assigned = [False] * m
    orbits: List[List[int]] = []
    for i in range(m):
        if assigned[i]:
            continue
        orbit = [i]
        assigned[i] = True
        current = roots[i]
        for _ in range(fine.denominator_bound // base_d):
            current = _twist(current, base_d)
            match = None
            for j in range(m):
                if not assigned[j] and current.isclose(roots[j], 1e-6 * (1 + current.norm_inf())):
                    match = j
                    break
            if match is None:
                break
            orbit.append(match)
            assigned[match] = True
            current = roots[match]
        orbits.append(orbit)

    idempotents = []
    for orbit in orbits:
        total = projections[orbit[0]]
        for i in orbit[1:]:
            total = total + projections[i]
        idempotents.append(
            AlgebraElement([_project_to_lattice(s, p.lattice) for s in total.coeffs])
        )
    decomp = IdempotentDecomposition(idempotents, [True] * len(orbits), p.lattice)
    report = verify_decomposition(p, decomp, tol=1e-6)
    if not report.passed:
        raise NonSemisimpleError(
            f"assembled idempotents fail identities (worst residual {report.max_residual:.2e})"
        )
    return _canonical_sort(decomp)


def verify_decomposition(
    p, decomp: IdempotentDecomposition, tol: float = DEFAULT_VERIFY_TOL
) -> DecompositionReport:
    """Check sum-to-one, idempotency and pairwise orthogonality residuals."""
    es = decomp.idempotents
    if not es:
        return DecompositionReport(float("inf"), [], [], tol)
    total = es[0]
    for e in es[1:]:
        total = total + e
    sum_residual = (total - p.unit()).norm_inf()
    idem = [(p.multiply(e, e) - e).norm_inf() for e in es]
    ortho = []
    for i in range(len(es)):
        for j in range(i + 1, len(es)):
            ortho.append((i, j, p.multiply(es[i], es[j]).norm_inf()))
    return DecompositionReport(sum_residual, idem, ortho, tol)
