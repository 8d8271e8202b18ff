import math
import random
from fractions import Fraction

import pytest

from conftest import h_squared_t_table, nilpotent_table, quadric_surface_table
from gysinkit.novikov import ExponentLattice, NovikovScalar
from gysinkit.algebra import (
    AlgebraElement,
    CyclicPresentation,
    NonSemisimpleError,
    IdempotentDecomposition,
    presentation_from_json,
    split_binomial,
    split_table,
    verify_decomposition,
)

Z = ExponentLattice(1)
HALF = ExponentLattice(2)


def rand_element(rng, p):
    return p.element(
        [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(p.dim)]
    )


class TestMultiply:
    def test_cyclic_relation_applied(self):
        p = CyclicPresentation(2, 1.0, 1, Z)
        h = p.element([0, 1])
        hh = p.multiply(h, h)
        t = NovikovScalar.monomial(Z, 1.0, 1, p.truncation)
        assert hh.coeffs[0].isclose(t)
        assert hh.coeffs[1].is_zero()

    def test_unit_acts_trivially(self):
        rng = random.Random(3)
        p = CyclicPresentation(4, 2.0, 2, Z)
        for _ in range(10):
            a = rand_element(rng, p)
            assert p.multiply(p.unit(), a).isclose(a)

    def test_associativity_random_triples(self):
        rng = random.Random(4)
        p = CyclicPresentation(3, -1.5, 1, Z)
        for _ in range(10):
            a, b, c = (rand_element(rng, p) for _ in range(3))
            left = p.multiply(p.multiply(a, b), c)
            right = p.multiply(a, p.multiply(b, c))
            assert left.isclose(right, 1e-8)

    def test_table_unit_is_solved(self):
        tp = quadric_surface_table(Z)
        u = tp.unit()
        assert u.coeffs[0].isclose(NovikovScalar.one(Z, tp.truncation))
        for i in range(1, 4):
            assert u.coeffs[i].is_zero(1e-9)


class TestSplitBinomial:
    def test_h2_t_integer_lattice_is_one_field(self):
        d = split_binomial(CyclicPresentation(2, 1.0, 1, Z))
        assert len(d) == 1
        assert d.field_factor_flags == [True]
        p = CyclicPresentation(2, 1.0, 1, Z)
        assert d.idempotents[0].isclose(p.unit())

    def test_h2_t_half_lattice_idempotents(self):
        p = CyclicPresentation(2, 1.0, 1, HALF)
        d = split_binomial(p)
        assert len(d) == 2
        # e_pm = (1 pm T^{-1/2} h) / 2, and e^2 = e via h^2 = T
        expected = set()
        for sign in (+1, -1):
            expected.add(
                (
                    (Fraction(0), 0.5 + 0j),
                    (Fraction(-1, 2), sign * 0.5 + 0j),
                )
            )
        got = {
            (e.coeffs[0].terms[0], e.coeffs[1].terms[0]) for e in d.idempotents
        }
        assert {(a[0], round(a[1].real, 10)) for a, _ in got} == {(Fraction(0), 0.5)}
        for e in d.idempotents:
            sq = p.multiply(e, e)
            assert sq.isclose(e, 1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_cpn_splitting_dichotomy(self, n):
        one_factor = split_binomial(CyclicPresentation(n + 1, 1.0, 1, Z))
        assert len(one_factor) == 1
        full = split_binomial(
            CyclicPresentation(n + 1, 1.0, 1, ExponentLattice(n + 1))
        )
        assert len(full) == n + 1

    @staticmethod
    def lattice_roots_of_binomial(m, d, bound=12):
        """Brute-force monomial roots of x^m = T on the lattice (1/d)Z."""
        roots = []
        for p in range(-bound, bound + 1):
            exponent = Fraction(p, d)
            if m * exponent == 1:
                # leading coefficients are the m-th roots of unity
                roots.extend((exponent, j) for j in range(m))
        return roots

    @pytest.mark.parametrize("m", range(1, 7))
    @pytest.mark.parametrize("d", range(1, 7))
    def test_gcd_governed_factor_count(self, m, d):
        lat = ExponentLattice(d)
        p = CyclicPresentation(m, 1.0, 1, lat)
        decomp = split_binomial(p)
        assert len(decomp) == math.gcd(m, d)
        assert verify_decomposition(p, decomp).passed
        # cross-check against the brute-force lattice root search: complete
        # splitting happens exactly when all m roots live on the lattice
        roots = self.lattice_roots_of_binomial(m, d)
        assert (len(roots) == m) == (len(decomp) == m)
        assert (len(roots) == 0) == (len(decomp) < m)

    def test_negative_exponent_relation(self):
        # h^2 = T^{-3}: full splitting needs -3/2 on the lattice
        assert len(split_binomial(CyclicPresentation(2, 1.0, -3, Z))) == 1
        assert len(split_binomial(CyclicPresentation(2, 1.0, -3, HALF))) == 2

    def test_zero_c_rejected(self):
        with pytest.raises(ValueError):
            CyclicPresentation(2, 0.0, 1, Z)


class TestSplitTable:
    def test_diagonal_already_split(self):
        zero = NovikovScalar.zero(Z)
        one = NovikovScalar.one(Z)
        from gysinkit.algebra import TablePresentation

        tp = TablePresentation(
            [[[one, zero], [zero, zero]], [[zero, zero], [zero, one]]], Z
        )
        d = split_table(tp)
        assert len(d) == 2
        mats = sorted(
            tuple(round(s.coefficient(0).real, 9) for s in e.coeffs)
            for e in d.idempotents
        )
        assert mats == [(0.0, 1.0), (1.0, 0.0)]

    def test_matches_binomial_path(self):
        tp = h_squared_t_table(HALF)
        dt = split_table(tp)
        db = split_binomial(CyclicPresentation(2, 1.0, 1, HALF))
        assert len(dt) == len(db) == 2
        for e in dt.idempotents:
            assert any(e.isclose(f, 1e-8) for f in db.idempotents)

    def test_h2_t_integer_lattice_single_factor(self):
        tp = h_squared_t_table(Z)
        d = split_table(tp)
        assert len(d) == 1
        assert d.field_factor_flags == [True]

    def test_quadric_table_two_factors(self):
        tp = quadric_surface_table(Z)
        d = split_table(tp)
        assert len(d) == 2
        assert all(d.field_factor_flags)
        assert verify_decomposition(tp, d, tol=1e-8).passed

    def test_quadric_table_fine_lattice_four_factors(self):
        tp = quadric_surface_table(HALF)
        d = split_table(tp)
        assert len(d) == 4
        assert verify_decomposition(tp, d, tol=1e-8).passed

    def test_nilpotent_rejected(self):
        with pytest.raises(NonSemisimpleError):
            split_table(nilpotent_table(Z))

    def test_deterministic_output(self):
        tp = quadric_surface_table(Z)
        d1 = split_table(tp)
        d2 = split_table(tp)
        for a, b in zip(d1.idempotents, d2.idempotents):
            assert a.coeffs == b.coeffs


class TestVerifyDecomposition:
    def test_split_binomial_always_passes(self):
        for n in range(1, 5):
            p = CyclicPresentation(n + 1, 1.0, 1, ExponentLattice(n + 1))
            assert verify_decomposition(p, split_binomial(p)).passed

    def test_perturbed_idempotent_fails_with_matching_residual(self):
        p = CyclicPresentation(2, 1.0, 1, HALF)
        d = split_binomial(p)
        bad = list(d.idempotents)
        bump = NovikovScalar.monomial(HALF, 1e-3, 0, p.truncation)
        bad[0] = AlgebraElement([bad[0].coeffs[0] + bump, bad[0].coeffs[1]])
        report = verify_decomposition(
            p, IdempotentDecomposition(bad, d.field_factor_flags, HALF)
        )
        assert not report.passed
        assert 1e-4 < max(report.idempotency_residuals) < 1e-2

    def test_trivial_decomposition_passes(self):
        tp = quadric_surface_table(Z)
        triv = IdempotentDecomposition([tp.unit()], [True], Z)
        assert verify_decomposition(tp, triv).passed


class TestJson:
    def test_cyclic_round_trip(self):
        p = CyclicPresentation(3, 2 - 1j, Fraction(3, 2), HALF, Fraction(8))
        q = presentation_from_json(p.to_json())
        assert (q.m, q.c, q.lam) == (3, 2 - 1j, Fraction(3, 2))
        assert q.lattice == HALF and q.truncation == Fraction(8)

    def test_table_round_trip(self):
        tp = quadric_surface_table(Z)
        tq = presentation_from_json(tp.to_json())
        assert tq.dim == 4
        d = split_table(tq)
        assert len(d) == 2
