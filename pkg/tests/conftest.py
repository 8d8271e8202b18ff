from fractions import Fraction

from gysinkit.novikov import NovikovScalar
from gysinkit.algebra import TablePresentation


def h_squared_t_table(lattice, truncation=Fraction(10)):
    """Multiplication table of Lambda[h]/(h^2 - T) on the given lattice."""
    zero = NovikovScalar.zero(lattice, truncation)
    one = NovikovScalar.one(lattice, truncation)
    t = NovikovScalar.monomial(lattice, 1.0, 1, truncation)
    return TablePresentation(
        [[[one, zero], [zero, one]], [[zero, one], [t, zero]]], lattice, truncation
    )


def quadric_surface_table(lattice, truncation=Fraction(10)):
    """User-style quantum table for the quadric surface (product of two lines).

    Basis {1, a, b, ab} with a^2 = T and b^2 = T.
    """
    zero = NovikovScalar.zero(lattice, truncation)
    one = NovikovScalar.one(lattice, truncation)
    t = NovikovScalar.monomial(lattice, 1.0, 1, truncation)
    t2 = t * t

    def vec(**kw):
        v = [zero] * 4
        index = {"e": 0, "a": 1, "b": 2, "ab": 3}
        for k, s in kw.items():
            v[index[k]] = s
        return v

    rows = [
        [vec(e=one), vec(a=one), vec(b=one), vec(ab=one)],
        [vec(a=one), vec(e=t), vec(ab=one), vec(b=t)],
        [vec(b=one), vec(ab=one), vec(e=t), vec(a=t)],
        [vec(ab=one), vec(b=t), vec(a=t), vec(e=t2)],
    ]
    return TablePresentation(rows, lattice, truncation)


def nilpotent_table(lattice, truncation=Fraction(10)):
    """Lambda[h]/(h^2): not semisimple, must be rejected by the splitter."""
    zero = NovikovScalar.zero(lattice, truncation)
    one = NovikovScalar.one(lattice, truncation)
    return TablePresentation(
        [[[one, zero], [zero, one]], [[zero, one], [zero, zero]]], lattice, truncation
    )
