"""Acceptance suite: every criterion at its stated tolerance and runtime.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the one-line
verdict per criterion.
"""

import cmath
import math
import random
import time
from fractions import Fraction

import numpy as np

from gysinkit.algebra import CyclicPresentation, split_binomial, verify_decomposition
from gysinkit.axioms import run_axiom_suite
from gysinkit.filtered import (
    TransferParams,
    pearl_to_filtered,
    reduction_constant,
    synthetic_transfer_run,
)
from gysinkit.gysin import (
    build_lifted_complex,
    build_torus_complex,
    chain_map_report,
    connecting_class,
    verify_gysin_exactness,
)
from gysinkit.novikov import ExponentLattice, NovikovScalar
from gysinkit.superpotential import LocalSystem, builtin, find_critical_points


def report(name: str, elapsed: float, budget: float):
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.2f}s / budget {budget:.0f}s)")


#: lifted potential, base potential and kappa for each built-in pairing
PAIRS = {
    "cpn(n=2)": (("clifford_cp", 2), ("clifford_cp", 1), Fraction(1, 4)),
    "quadric(n=3)": (("gz_quadric", 3), ("gz_quadric", 2), Fraction(1, 4)),
    "cp3_q2": (("chekanov_cp3", None), ("chekanov_q2", None), Fraction(1, 2)),
}


def test_criterion_1_field_splitting_dichotomy():
    t0 = time.monotonic()
    for n in range(1, 6):
        p_int = CyclicPresentation(n + 1, 1.0, 1, ExponentLattice(1), Fraction(10))
        d_int = split_binomial(p_int)
        assert len(d_int) == 1
        rep = verify_decomposition(p_int, d_int, tol=1e-9)
        assert rep.passed and rep.max_residual < 1e-9
        p_full = CyclicPresentation(n + 1, 1.0, 1, ExponentLattice(n + 1), Fraction(10))
        d_full = split_binomial(p_full)
        assert len(d_full) == n + 1
        rep = verify_decomposition(p_full, d_full, tol=1e-9)
        assert rep.passed and rep.max_residual < 1e-9
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    report("1 field-splitting dichotomy", elapsed, 5)


def test_criterion_2_critical_point_counts_and_values():
    t0 = time.monotonic()
    # clifford: symmetry-reduced one-variable oracle z^{n+1} = 1
    for n in range(1, 5):
        res = find_critical_points(builtin("clifford_cp", n))
        points = res.nondegenerate_points()
        assert len(res) == len(points) == n + 1
        oracle_roots = np.roots([1.0] + [0.0] * n + [-1.0])
        for p in points:
            assert p.residual < 1e-10
            zeta = p.point[0]
            assert min(abs(zeta - r) for r in oracle_roots) < 1e-8
            assert all(abs(z - zeta) < 1e-8 for z in p.point)
            assert abs(p.critical_value - (n + 1) * zeta) < 1e-8
    # chekanov_q2: exhaustive 2-variable solve z2^2 = z1^2, z1^2 = 1
    oracle_points = sorted(
        (z1, z2) for z1 in (1.0, -1.0) for z2 in (z1, -z1)
    )
    res = find_critical_points(builtin("chekanov_q2"))
    assert len(res) == 4
    got_points = sorted(
        (round(p.point[0].real, 8), round(p.point[1].real, 8)) for p in res
    )
    assert got_points == oracle_points
    got_values = sorted(round(p.critical_value.real, 8) for p in res)
    assert got_values == [-4.0, 0.0, 0.0, 4.0]
    # remaining families: at least one nondegenerate point each
    for name, n in (("gz_quadric", 2), ("gz_quadric", 3), ("chekanov_cp3", None)):
        assert find_critical_points(builtin(name, n)).nondegenerate_points()
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    report("2 critical-point counts and values", elapsed, 30)


def test_criterion_3_gysin_exactness():
    t0 = time.monotonic()
    for k in range(1, 9):
        rep = verify_gysin_exactness(k, check_subspaces=(k <= 4))
        assert all(e["ok"] for e in rep.rank_identity)
        for e in rep.rank_identity:
            assert e["lifted"] == math.comb(k + 1, e["degree"])
        if k <= 4:
            assert rep.subspace_checks is not None
            assert all(e["ok"] for e in rep.subspace_checks)
    # chain-map residuals exactly zero at certified critical local systems
    for label, (lift_fam, base_fam, kappa) in PAIRS.items():
        base_W = builtin(*base_fam)
        lift_W = builtin(*lift_fam)
        rho = find_critical_points(base_W).nondegenerate_points()[0].point
        rho_t = find_critical_points(lift_W).nondegenerate_points()[0].point
        base = build_torus_complex(base_W, rho, 2 * kappa)
        lifted = build_lifted_complex(lift_W, rho_t, base)
        assert base.critical and lifted.critical
        maps = chain_map_report(base, lifted)
        assert maps.i_residual == 0.0
        assert maps.p_residual == 0.0
        assert maps.pi_zero
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    report("3 Gysin exactness", elapsed, 10)


def test_criterion_4_connecting_class_law():
    t0 = time.monotonic()
    rng = random.Random(20260810)
    for label, (lift_fam, _, kappa) in PAIRS.items():
        W_tilde = builtin(*lift_fam)
        weight = 2 * kappa
        points = find_critical_points(W_tilde).nondegenerate_points()
        assert points, label
        for p in points:
            delta = connecting_class(W_tilde, p.point, 0, weight)
            assert delta.is_zero(), f"{label}: delta nonzero at critical point"
        sampled = 0
        while sampled < 20:
            z = [
                cmath.exp(complex(rng.uniform(-0.7, 0.7), rng.uniform(-math.pi, math.pi)))
                for _ in range(W_tilde.num_vars)
            ]
            rho = LocalSystem(z)
            grad = W_tilde.log_gradient(rho)
            # generic non-critical sample: away from critical points and from
            # the measure-zero locus where only the fiber component vanishes
            if np.linalg.norm(grad) < 1e-3 or abs(grad[-1]) < 1e-6:
                continue
            delta = connecting_class(W_tilde, rho, 0, weight)
            assert not delta.is_zero(), f"{label}: delta vanished at non-critical sample"
            sampled += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    report("4 connecting-class law", elapsed, 10)


def test_criterion_5_reduction_constants():
    t0 = time.monotonic()
    for n in range(1, 11):
        assert reduction_constant(Fraction(1, 2 * n)) == Fraction(n, n + 1)
    for n in range(2, 11):
        assert reduction_constant(Fraction(1, 2 * (n - 1))) == Fraction(n - 1, n)
    assert reduction_constant(Fraction(1, 2)) == Fraction(1, 2)
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    report("5 reduction constants", elapsed, 1)


def test_criterion_6_spectral_oracle_equivalence():
    t0 = time.monotonic()
    suite = run_axiom_suite(seeds=200, zero_differential_instances=50)
    assert suite.passed
    assert suite.oracle_checked == 200
    assert suite.oracle_skipped == 0
    assert suite.oracle_failures == []
    assert suite.axiom_checked == 50
    assert suite.axiom_failures == []
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    report("6 spectral oracle equivalence", elapsed, 60)


def test_criterion_7_end_to_end_filtered_transfer():
    t0 = time.monotonic()
    kappa = Fraction(1, 6)
    W = builtin("clifford_cp", 2)
    pearl = build_torus_complex(W, LocalSystem([1.0, 1.0]), 2 * kappa)
    assert pearl.critical
    base = pearl_to_filtered(pearl, base_action=0.3)
    params = TransferParams(kappa, 1e-7, -1.0, 1.0)
    run = synthetic_transfer_run(
        base,
        {"x0": NovikovScalar.one(pearl.lattice)},
        params,
        k_max=1000,
        tol=1e-6,
    )
    assert all(run.containment), "a lifted spectral number left its window"
    assert not run.report.bound_violations  # Const = eps_prime
    assert run.report.homog_difference < 1e-6
    assert run.report.passed
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    report("7 end-to-end filtered transfer", elapsed, 30)


def test_criterion_8_numerical_derivative_checks():
    t0 = time.monotonic()
    rng = random.Random(8)
    families = [
        ("clifford_cp", 1),
        ("clifford_cp", 2),
        ("clifford_cp", 3),
        ("clifford_cp", 4),
        ("gz_quadric", 2),
        ("gz_quadric", 3),
        ("chekanov_cp3", None),
        ("chekanov_q2", None),
    ]
    h_g, h_h = 1e-5, 1e-4
    for name, n in families:
        W = builtin(name, n)
        k = W.num_vars
        for _ in range(50):
            u = [complex(rng.uniform(-0.5, 0.5), rng.uniform(-math.pi, math.pi)) for _ in range(k)]
            z = [cmath.exp(x) for x in u]
            grad = W.log_gradient(z)
            fd_g = np.zeros(k, dtype=complex)
            for j in range(k):
                up, um = list(u), list(u)
                up[j] += h_g
                um[j] -= h_g
                fd_g[j] = (
                    W.evaluate([cmath.exp(x) for x in up])
                    - W.evaluate([cmath.exp(x) for x in um])
                ) / (2 * h_g)
            assert np.linalg.norm(grad - fd_g) < 1e-6 * max(1.0, np.linalg.norm(grad))
            hess = W.log_hessian(z)
            fd_h = np.zeros((k, k), dtype=complex)
            for i in range(k):
                for j in range(k):
                    upp, upm, ump, umm = (list(u) for _ in range(4))
                    upp[i] += h_h; upp[j] += h_h
                    upm[i] += h_h; upm[j] -= h_h
                    ump[i] -= h_h; ump[j] += h_h
                    umm[i] -= h_h; umm[j] -= h_h
                    vals = [
                        W.evaluate([cmath.exp(x) for x in v])
                        for v in (upp, upm, ump, umm)
                    ]
                    fd_h[i, j] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h_h * h_h)
            assert np.linalg.norm(hess - fd_h) < 1e-5 * max(1.0, np.linalg.norm(hess))
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    report("8 numerical-derivative checks", elapsed, 10)
