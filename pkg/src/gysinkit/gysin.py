"""Pearl-type chain complexes for tori with local systems.

The base complex of a rank-k torus has one generator per subset of {1..k},
graded by cardinality; the only nonzero differentials send the singleton
generators to the bottom generator with coefficient (z_j d_j W)(rho) times
the area monomial T^w.  The circle-bundle lift doubles the basis into primed
(same degree) and double-primed (degree + 1) copies.  At a critical local
system every differential vanishes and homology equals the chain module,
which is the regime the inclusion/projection chain maps and the connecting
class are checked in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .novikov import ExponentLattice, NovikovScalar
from .superpotential import LocalSystem, SuperpotentialPoly

#: Gradient components at or below this norm are clamped to exactly zero,
#: so chain-map residuals vanish identically at certified critical systems.
DEFAULT_CRITICAL_TOL = 1e-9


class NonCriticalError(ValueError):
    """Raised when an operation only valid at critical local systems is hit."""


def _subsets_by_degree(k: int) -> List[int]:
    """All bitmask subsets of {0..k-1}, sorted by (cardinality, mask)."""
    return sorted(range(1 << k), key=lambda m: (bin(m).count("1"), m))


def _clamp(values: Sequence[complex], tol: float) -> Tuple[Tuple[complex, ...], float]:
    raw = max((abs(v) for v in values), default=0.0)
    clamped = tuple(0j if abs(v) <= tol else complex(v) for v in values)
    return clamped, raw


class TorusPearlComplex:
    """Chain model of a rank-k torus with local system.

    ``gradient[j]`` is the clamped logarithmic-gradient coefficient of the
    singleton differential d(x_{j}) = gradient[j] * T^weight * x_empty.
    """

    def __init__(
        self,
        rank: int,
        gradient: Sequence[complex],
        weight,
        lattice: Optional[ExponentLattice] = None,
        critical_tol: float = DEFAULT_CRITICAL_TOL,
    ):
        self.rank = int(rank)
        self.weight = Fraction(weight)
        self.lattice = lattice or ExponentLattice(self.weight.denominator)
        if not self.lattice.contains(self.weight):
            raise ValueError(f"weight {self.weight} off lattice")
        if len(gradient) != self.rank:
            raise ValueError("gradient length must equal the rank")
        self.gradient, self.max_residual = _clamp(gradient, critical_tol)
        self.critical = all(g == 0 for g in self.gradient)
        self.basis = _subsets_by_degree(self.rank)
        self.index = {m: i for i, m in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return 1 << self.rank

    def degree(self, mask: int) -> int:
        return bin(mask).count("1")

    def differential_entries(self) -> Dict[int, complex]:
        """Nonzero singleton differentials: generator mask -> coefficient of
        x_empty * T^weight."""
        out = {}
        for j in range(self.rank):
            if self.gradient[j] != 0:
                out[1 << j] = self.gradient[j]
        return out

    def homology_rank(self, degree: int) -> int:
        """Chain-module ranks at critical systems; degrees 0/1 otherwise."""
        if self.critical:
            return math.comb(self.rank, degree) if 0 <= degree <= self.rank else 0
        hit = any(g != 0 for g in self.gradient)
        if degree == 0:
            return 1 - (1 if hit else 0)
        if degree == 1:
            return self.rank - (1 if hit else 0)
        raise NonCriticalError(
            "homology beyond degrees 0 and 1 requires a critical local system"
        )


def build_torus_complex(
    W: SuperpotentialPoly,
    rho: LocalSystem,
    weight,
    critical_tol: float = DEFAULT_CRITICAL_TOL,
) -> TorusPearlComplex:
    """Base pearl complex of the torus with the given local system."""
    if len(rho) != W.num_vars:
        raise ValueError("local system dimension mismatch")
    grad = W.log_gradient(rho)
    return TorusPearlComplex(W.num_vars, list(grad), weight, critical_tol=critical_tol)


class LiftedPearlComplex:
    """Circle-bundle lift: generators (S, tag), tag 0 primed / 1 double-primed.

    The defined differentials are the primed singletons (lifted gradient) and
    the double-primed bottom generator (fiber gradient); everything else is
    declared zero, which is exact in the critical regime this models.
    """

    def __init__(
        self,
        base: TorusPearlComplex,
        lifted_gradient: Sequence[complex],
        fiber_gradient: complex,
        euler_number: int = 0,
        critical_tol: float = DEFAULT_CRITICAL_TOL,
    ):
        self.base = base
        k = base.rank
        if len(lifted_gradient) != k:
            raise ValueError("lifted gradient must have base rank components")
        clamped, raw = _clamp(list(lifted_gradient) + [fiber_gradient], critical_tol)
        self.gradient = clamped[:k]
        self.fiber_gradient = clamped[k]
        self.max_residual = raw
        self.euler_number = int(euler_number)
        self.critical = all(g == 0 for g in clamped)
        self.basis = [
            (mask, tag) for tag in (0, 1) for mask in base.basis
        ]
        self.basis.sort(key=lambda bt: (base.degree(bt[0]) + bt[1], bt[1], bt[0]))
        self.index = {bt: i for i, bt in enumerate(self.basis)}

    @property
    def rank(self) -> int:
        return self.base.rank + 1

    @property
    def dim(self) -> int:
        return 2 << self.base.rank

    def degree(self, gen: Tuple[int, int]) -> int:
        mask, tag = gen
        return self.base.degree(mask) + tag

    def differential_entries(self) -> Dict[Tuple[int, int], complex]:
        """Defined differentials: generator -> coefficient of (empty,') T^w."""
        out = {}
        for j in range(self.base.rank):
            if self.gradient[j] != 0:
                out[(1 << j, 0)] = self.gradient[j]
        if self.fiber_gradient != 0:
            out[(0, 1)] = self.fiber_gradient
        return out

    def homology_rank(self, degree: int) -> int:
        if not self.critical:
            raise NonCriticalError(
                "lifted homology model requires a critical lifted local system"
            )
        return math.comb(self.rank, degree) if 0 <= degree <= self.rank else 0


def build_lifted_complex(
    W_tilde: SuperpotentialPoly,
    rho_tilde: LocalSystem,
    base: TorusPearlComplex,
    euler_number: int = 0,
    critical_tol: float = DEFAULT_CRITICAL_TOL,
) -> LiftedPearlComplex:
    """Lifted complex from the (k+1)-variable potential; fiber variable last."""
    if W_tilde.num_vars != base.rank + 1:
        raise ValueError("lifted potential must have base rank + 1 variables")
    if len(rho_tilde) != W_tilde.num_vars:
        raise ValueError("lifted local system dimension mismatch")
    grad = W_tilde.log_gradient(rho_tilde)
    return LiftedPearlComplex(
        base,
        list(grad[:-1]),
        complex(grad[-1]),
        euler_number,
        critical_tol=critical_tol,
    )


# ----------------------------------------------------------------------
# chain maps
# ----------------------------------------------------------------------


@dataclass
class ChainMapReport:
    """Matrices of the inclusion/projection maps and their chain residuals."""

    i_matrix: np.ndarray
    p_matrix: np.ndarray
    i_residual: float
    p_residual: float
    pi_zero: bool
    i_rank: int
    p_rank: int


def chain_i(C: TorusPearlComplex, C_tilde: LiftedPearlComplex) -> np.ndarray:
    """Degree-0 inclusion x_S -> (S, '), as a matrix over the basis orders."""
    if C_tilde.base is not C and C_tilde.base.basis != C.basis:
        raise ValueError("lifted complex is not built over this base")
    M = np.zeros((C_tilde.dim, C.dim), dtype=np.int64)
    for col, mask in enumerate(C.basis):
        M[C_tilde.index[(mask, 0)], col] = 1
    return M

def chain_p(C_tilde: LiftedPearlComplex, C: TorusPearlComplex) -> np.ndarray:
    """Degree-(-1) projection (S,') -> 0, (S,'') -> x_S."""
    if C_tilde.base is not C and C_tilde.base.basis != C.basis:
        raise ValueError("lifted complex is not built over this base")
    M = np.zeros((C.dim, C_tilde.dim), dtype=np.int64)
    for col, (mask, tag) in enumerate(C_tilde.basis):
        if tag == 1:
            M[C.index[mask], col] = 1
    return M


def chain_map_report(C: TorusPearlComplex, C_tilde: LiftedPearlComplex) -> ChainMapReport:
    """Check that i and p intertwine the defined differentials.

    Residuals compare the coefficient of (empty,')*T^w (resp. x_empty*T^w)
    on every generator where either side is defined; both are exactly zero
    at certified critical local systems.
    """
    i_mat = chain_i(C, C_tilde)
    p_mat = chain_p(C_tilde, C)
    # i o d - d_tilde o i on base singletons: coefficients g_j vs lifted g~_j
    i_res = 0.0
    for j in range(C.rank):
        lhs = C.gradient[j]           # i(d x_j) = g_j T^w (empty,')
        rhs = C_tilde.gradient[j]     # d~(i x_j) = g~_j T^w (empty,')
        i_res = max(i_res, abs(lhs - rhs))
    # p o d_tilde - d o p on lifted generators: only (j,'') rows can differ
    p_res = 0.0
    for j in range(C.rank):
        lhs = 0j                      # p(d~ (j,'')) = p(0) = 0
        rhs = C.gradient[j]           # d(p (j,'')) = g_j T^w x_empty
        p_res = max(p_res, abs(lhs - rhs))
    # (empty,''): p(d~) = p(fiber * (empty,')) = 0 and d(p) = d(x_empty) = 0
    pi = p_mat @ i_mat
    return ChainMapReport(
        i_matrix=i_mat,
        p_matrix=p_mat,
        i_residual=i_res,
        p_residual=p_res,
        pi_zero=not pi.any(),
        i_rank=int(np.linalg.matrix_rank(i_mat)),
        p_rank=int(np.linalg.matrix_rank(p_mat)),
    )


# ----------------------------------------------------------------------
# connecting class
# ----------------------------------------------------------------------


@dataclass
class ConnectingClass:
    """Value of the connecting map on the unit: Euler part plus fiber part."""

    euler_part: int
    quantum_part: NovikovScalar

    def is_zero(self, tol: float = DEFAULT_CRITICAL_TOL) -> bool:
        return self.euler_part == 0 and self.quantum_part.is_zero(tol)

    def to_json(self) -> dict:
        return {"euler": self.euler_part, "quantum": self.quantum_part.to_json()}


def connecting_class(
    W_tilde: SuperpotentialPoly,
    rho_tilde: LocalSystem,
    euler_number: int,
    weight,
    critical_tol: float = DEFAULT_CRITICAL_TOL,
    truncation=None,
) -> ConnectingClass:
    """Connecting map on the unit: euler_number plus the fiber log-gradient
    of the lifted potential times T^weight (fiber variable last)."""
    if len(rho_tilde) != W_tilde.num_vars:
        raise ValueError("local system dimension mismatch")
    w = Fraction(weight)
    lattice = ExponentLattice(w.denominator)
    trunc = Fraction(truncation) if truncation is not None else None
    fiber = complex(W_tilde.log_gradient(rho_tilde)[-1])
    if abs(fiber) <= critical_tol:
        fiber = 0j
    if fiber != 0:
        quantum = (
            NovikovScalar.monomial(lattice, fiber, w, trunc)
            if trunc is not None
            else NovikovScalar.monomial(lattice, fiber, w)
        )
    else:
        quantum = (
            NovikovScalar.zero(lattice, trunc)
            if trunc is not None
            else NovikovScalar.zero(lattice)
        )
    return ConnectingClass(euler_part=int(euler_number), quantum_part=quantum)


# ----------------------------------------------------------------------
# exactness verification
# ----------------------------------------------------------------------


def _rref_rank(M: List[List[Fraction]]) -> int:
    """Exact rank over the rationals."""
    M = [row[:] for row in M]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if M[r][c] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        pv = M[rank][c]
        M[rank] = [x / pv for x in M[rank]]
        for r in range(rows):
            if r != rank and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass
class GysinExactnessReport:
    k: int
    rank_identity: List[dict]
    subspace_checks: Optional[List[dict]]
    pi_zero: bool

    @property
    def passed(self) -> bool:
        ok = all(entry["ok"] for entry in self.rank_identity) and self.pi_zero
        if self.subspace_checks is not None:
            ok = ok and all(entry["ok"] for entry in self.subspace_checks)
        return ok

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "rank_identity": self.rank_identity,
            "subspace_checks": self.subspace_checks,
            "p_i_composition_zero": self.pi_zero,
            "passed": self.passed,
        }


def verify_gysin_exactness(
    k: int,
    base: Optional[TorusPearlComplex] = None,
    lifted: Optional[LiftedPearlComplex] = None,
    check_subspaces: Optional[bool] = None,
) -> GysinExactnessReport:
    """Per-degree rank identity and (optionally) ker p = im i as subspaces.

    When actual complexes are supplied, both local systems must be critical;
    homology then equals the chain module and the ranks are read off the
    complexes instead of abstract binomials.
    """
    if (base is None) != (lifted is None):
        raise ValueError("supply both complexes or neither")
    if base is not None:
        if base.rank != k:
            raise ValueError("rank mismatch")
        if not base.critical or not lifted.critical:
            raise NonCriticalError(
                "exactness verification requires critical local systems"
            )
        base_rank = base.homology_rank
        lifted_rank = lifted.homology_rank
        C = base
        C_tilde = lifted
    else:
        base_rank = lambda m: math.comb(k, m) if 0 <= m <= k else 0
        lifted_rank = lambda m: math.comb(k + 1, m) if 0 <= m <= k + 1 else 0
        C = TorusPearlComplex(k, [0j] * k, Fraction(1))
        C_tilde = LiftedPearlComplex(C, [0j] * k, 0j)

    rank_identity = []
    for m in range(k + 2):
        lhs = lifted_rank(m)
        rhs = base_rank(m) + base_rank(m - 1)
        rank_identity.append({"degree": m, "lifted": lhs, "base_sum": rhs, "ok": lhs == rhs})

    if check_subspaces is None:
        check_subspaces = k <= 4
    subspace_checks = None
    report = chain_map_report(C, C_tilde)
    if check_subspaces:
        subspace_checks = []
        i_mat, p_mat = report.i_matrix, report.p_matrix
        for m in range(k + 2):
            lift_cols = [
                idx for idx, gen in enumerate(C_tilde.basis) if C_tilde.degree(gen) == m
            ]
            base_cols_m = [idx for idx, g in enumerate(C.basis) if C.degree(g) == m]
            base_rows = [idx for idx, g in enumerate(C.basis) if C.degree(g) == m - 1]
            # ker(p restricted to degree m) from the exact rational nullspace
            p_block = [[Fraction(int(p_mat[r, c])) for c in lift_cols] for r in base_rows]
            ker_basis = _nullspace(p_block, len(lift_cols))
            i_cols = [
                [Fraction(int(i_mat[r, c])) for r in lift_cols] for c in base_cols_m
            ]
            ok = _same_column_span(ker_basis, i_cols)
            subspace_checks.append({"degree": m, "ok": ok})
    return GysinExactnessReport(
        k=k,
        rank_identity=rank_identity,
        subspace_checks=subspace_checks,
        pi_zero=report.pi_zero,
    )


def _nullspace(rows: List[List[Fraction]], n_cols: int) -> List[List[Fraction]]:
    """Basis of the exact rational nullspace, as column vectors."""
    if not rows:
        basis = []
        for j in range(n_cols):
            v = [Fraction(0)] * n_cols
            v[j] = Fraction(1)
            basis.append(v)
        return basis
    M = [row[:] for row in rows]
    m = len(M)
    pivots = {}
    rank = 0
    for c in range(n_cols):
        pivot = next((r for r in range(rank, m) if M[r][c] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        pv = M[rank][c]
        M[rank] = [x / pv for x in M[rank]]
        for r in range(m):
            if r != rank and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        pivots[c] = rank
        rank += 1
        if rank == m:
            break
    basis = []
    free = [c for c in range(n_cols) if c not in pivots]
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for pc, pr in pivots.items():
            v[pc] = -M[pr][fc]
        basis.append(v)
    return basis


def _same_column_span(A: List[List[Fraction]], B: List[List[Fraction]]) -> bool:
    """Whether two sets of column vectors span the same subspace (exact)."""
    if not A and not B:
        return True
    n = len(A[0]) if A else len(B[0])
    mat_a = [[a[i] for a in A] for i in range(n)]
    mat_b = [[b[i] for b in B] for i in range(n)]
    mat_ab = [ra + rb for ra, rb in zip(mat_a, mat_b)]
    ra = _rref_rank(mat_a) if A else 0
    rb = _rref_rank(mat_b) if B else 0
    rab = _rref_rank(mat_ab) if (A or B) else 0
    return ra == rb == rab
