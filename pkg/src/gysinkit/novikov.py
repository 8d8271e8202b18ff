"""Exact arithmetic in truncated Laurent / Novikov coefficient fields.

Scalars are finite formal sums ``sum a_j T^{e_j}`` with complex coefficients
and exact rational exponents constrained to a lattice ``(1/d)Z``.  ``d = 1``
gives the integer-exponent Laurent field, ``d > 1`` a fractional-exponent
subfield of the universal Novikov field.  Every scalar carries a truncation
order ``N``: terms with exponent ``>= N`` are unknown and silently dropped,
so all identities hold "up to O(T^N)".

Exponents are exact (`fractions.Fraction`); coefficients are complex floats
compared with a configurable tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Tuple, Union

#: Default truncation order for freshly constructed scalars.
DEFAULT_TRUNCATION = Fraction(10)

#: Default tolerance for coefficient comparisons.
DEFAULT_TOL = 1e-10

#: Storage hygiene: canonical form drops coefficients at or below this size.
ZERO_EPS = 1e-12

RationalLike = Union[Fraction, int, str]


class LatticeMismatchError(ValueError):
    """Raised when combining scalars declared on different exponent lattices."""


class ExponentLattice:
    """Exponent lattice (1/d)Z for a positive integer denominator bound d."""

    __slots__ = ("denominator_bound",)

    def __init__(self, denominator_bound: int = 1):
        d = int(denominator_bound)
        if d < 1:
            raise ValueError(f"lattice denominator must be >= 1, got {denominator_bound}")
        self.denominator_bound = d

    def contains(self, exponent: RationalLike) -> bool:
        return (Fraction(exponent) * self.denominator_bound).denominator == 1

    def refine(self, factor: int) -> "ExponentLattice":
        """Lattice with denominator multiplied by ``factor`` (a superset)."""
        return ExponentLattice(self.denominator_bound * int(factor))

    def join(self, other: "ExponentLattice") -> "ExponentLattice":
        """Smallest common refinement of two lattices."""
        a, b = self.denominator_bound, other.denominator_bound
        return ExponentLattice(a * b // math.gcd(a, b))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExponentLattice)
            and self.denominator_bound == other.denominator_bound
        )

    def __hash__(self) -> int:
        return hash(("ExponentLattice", self.denominator_bound))

    def __repr__(self) -> str:
        return f"ExponentLattice(1/{self.denominator_bound})"


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class NovikovScalar:
    """Immutable truncated scalar ``sum a_j T^{e_j} + O(T^N)`` on a lattice.

    ``terms`` is a tuple of ``(exponent, coefficient)`` pairs with strictly
    increasing exponents, no stored zero coefficients, and every exponent on
    the lattice and strictly below the truncation order.
    """

    __slots__ = ("lattice", "terms", "truncation")

    def __init__(
        self,
        lattice: ExponentLattice,
        terms: Iterable[Tuple[RationalLike, complex]] = (),
        truncation: RationalLike = DEFAULT_TRUNCATION,
    ):
        self.lattice = lattice
        trunc = _as_fraction(truncation)
        self.truncation = trunc
        merged: dict[Fraction, complex] = {}
        for exponent, coefficient in terms:
            e = _as_fraction(exponent)
            if not lattice.contains(e):
                raise ValueError(f"exponent {e} not on lattice (1/{lattice.denominator_bound})Z")
            merged[e] = merged.get(e, 0j) + complex(coefficient)
        canonical = tuple(
            (e, c)
            for e, c in sorted(merged.items())
            if e < trunc and abs(c) > ZERO_EPS
        )
        self.terms = canonical

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, lattice: ExponentLattice, truncation: RationalLike = DEFAULT_TRUNCATION):
        return cls(lattice, (), truncation)

    @classmethod
    def one(cls, lattice: ExponentLattice, truncation: RationalLike = DEFAULT_TRUNCATION):
        return cls(lattice, ((Fraction(0), 1.0 + 0j),), truncation)

    @classmethod
    def monomial(
        cls,
        lattice: ExponentLattice,
        coefficient: complex,
        exponent: RationalLike,
        truncation: RationalLike = DEFAULT_TRUNCATION,
    ):
        return cls(lattice, ((exponent, coefficient),), truncation)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    def is_zero(self, tol: float = DEFAULT_TOL) -> bool:
        return all(abs(c) <= tol for _, c in self.terms)

    def valuation(self):
        """Least exponent with nonzero coefficient; ``math.inf`` for zero."""
        if not self.terms:
            return math.inf
        return self.terms[0][0]

    def leading(self) -> Tuple[Fraction, complex]:
        if not self.terms:
            raise ZeroDivisionError("zero scalar has no leading term")
        return self.terms[0]

    def top_exponent(self):
        """Largest stored exponent (the downward-field degree); -inf for zero.

        Dual to valuation(): governs filtration levels, where the latest
        monomial decides when a chain enters a sublevel set.
        """
        if not self.terms:
            return -math.inf
        return self.terms[-1][0]

    def coefficient(self, exponent: RationalLike) -> complex:
        e = _as_fraction(exponent)
        for exp, c in self.terms:
            if exp == e:
                return c
        return 0j

    def norm_inf(self) -> float:
        """Largest coefficient magnitude (0.0 for the zero scalar)."""
        return max((abs(c) for _, c in self.terms), default=0.0)

    def _effective_valuation(self) -> Fraction:
        # Lower bound usable for truncation bookkeeping: a scalar that is
        # zero up to O(T^N) has valuation >= N.
        if not self.terms:
            return self.truncation
        return self.terms[0][0]

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def _check_lattice(self, other: "NovikovScalar"):
        if self.lattice != other.lattice:
            raise LatticeMismatchError(
                f"cannot combine scalars on {self.lattice} and {other.lattice}"
            )

    def __add__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        self._check_lattice(other)
        trunc = min(self.truncation, other.truncation)
        return NovikovScalar(self.lattice, self.terms + other.terms, trunc)

    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar(self.lattice, ((e, -c) for e, c in self.terms), self.truncation)

    def __sub__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "NovikovScalar":
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        self._check_lattice(other)
        trunc = min(
            self._effective_valuation() + other.truncation,
            other._effective_valuation() + self.truncation,
        )
        prod: dict[Fraction, complex] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if e < trunc:
                    prod[e] = prod.get(e, 0j) + c1 * c2
        return NovikovScalar(self.lattice, prod.items(), trunc)

    __rmul__ = __mul__

    def scale(self, factor: complex) -> "NovikovScalar":
        return NovikovScalar(
            self.lattice, ((e, c * factor) for e, c in self.terms), self.truncation
        )

    def shift(self, exponent: RationalLike) -> "NovikovScalar":
        """Multiply by the monomial T^exponent (shifts truncation too)."""
        e0 = _as_fraction(exponent)
        if not self.lattice.contains(e0):
            raise ValueError(f"shift exponent {e0} off lattice")
        return NovikovScalar(
            self.lattice,
            ((e + e0, c) for e, c in self.terms),
            self.truncation + e0,
        )

    def inverse(self) -> "NovikovScalar":
        """Multiplicative inverse up to truncation.

        Factors out the leading term c*T^v and expands the geometric series
        for the remaining 1 + u with valuation(u) > 0.  The result is known
        up to O(T^{N - 2v}).
        """
        if not self.terms:
            raise ZeroDivisionError("cannot invert the zero scalar")
        v, c = self.leading()
        # u = self / (c T^v) - 1 has positive valuation and is known to
        # O(T^{N - v}); the geometric series runs at that relative order.
        rel_trunc = self.truncation - v
        u_terms = [(e - v, coeff / c) for e, coeff in self.terms[1:]]
        u = NovikovScalar(self.lattice, u_terms, rel_trunc)
        acc = NovikovScalar.one(self.lattice, rel_trunc)
        term = NovikovScalar.one(self.lattice, rel_trunc)
        if not u.is_zero(0.0):
            step = u.valuation()
            k_max = int(math.ceil(rel_trunc / step)) + 1
            for _ in range(max(k_max, 0)):
                term = (term * u).scale(-1)
                if term.is_zero(0.0):
                    break
                acc = acc + term
        return NovikovScalar(
            self.lattice,
            ((e - v, coeff / c) for e, coeff in acc.terms),
            self.truncation - 2 * v,
        )

    def __truediv__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, n: int) -> "NovikovScalar":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = NovikovScalar.one(self.lattice, self.truncation)
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def truncate(self, order: RationalLike) -> "NovikovScalar":
        order = _as_fraction(order)
        return NovikovScalar(self.lattice, self.terms, min(order, self.truncation))

    def on_lattice(self, lattice: ExponentLattice) -> "NovikovScalar":
        """Re-declare this scalar on another (compatible) lattice."""
        return NovikovScalar(lattice, self.terms, self.truncation)

    # ------------------------------------------------------------------
    # comparisons
    # ------------------------------------------------------------------

    def isclose(self, other: "NovikovScalar", tol: float = DEFAULT_TOL) -> bool:
        """Coefficientwise comparison below the common truncation order."""
        self._check_lattice(other)
        cutoff = min(self.truncation, other.truncation)
        exps = {e for e, _ in self.terms if e < cutoff}
        exps |= {e for e, _ in other.terms if e < cutoff}
        return all(abs(self.coefficient(e) - other.coefficient(e)) <= tol for e in exps)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NovikovScalar)
            and self.lattice == other.lattice
            and self.truncation == other.truncation
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.lattice, self.truncation, self.terms))

    # ------------------------------------------------------------------
    # serialization and display
    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "lattice_denominator": self.lattice.denominator_bound,
            "truncation": str(self.truncation),
            "terms": [[str(e), [c.real, c.imag]] for e, c in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NovikovScalar":
        lattice = ExponentLattice(data["lattice_denominator"])
        terms = [(Fraction(e), complex(re, im)) for e, (re, im) in data["terms"]]
        return cls(lattice, terms, Fraction(data["truncation"]))

    @staticmethod
    def _fmt_coeff(c: complex) -> str:
        if abs(c.imag) <= ZERO_EPS:
            r = c.real
            return f"{int(r)}" if r == int(r) else f"{r:.6g}"
        return f"({c.real:.6g}{c.imag:+.6g}i)"

    def __repr__(self) -> str:
        if not self.terms:
            return f"O(T^{self.truncation})"
        parts = []
        for e, c in self.terms:
            if e == 0:
                parts.append(self._fmt_coeff(c))
            else:
                parts.append(f"{self._fmt_coeff(c)}*T^{e}")
        return " + ".join(parts) + f" + O(T^{self.truncation})"
