"""Filtered chain complexes over Novikov scalars and spectral-number transfer.

A chain ``x = sum a_i g_i`` sits at level ``max_i (action(g_i) + top(a_i))``
where ``top`` is the largest exponent of the coefficient: a chain belongs to
the sublevel set C^{<=tau} once all of its monomial content does, and
multiplying by ``T^lam`` shifts the level by exactly ``lam``.  The spectral
number of a homology class is the least level among representatives,
computed by column reduction of the boundary matrix in this non-archimedean
norm (and cross-checked against brute-force coset search in the tests).

The circle-bundle lift doubles each generator into a primed copy (same
degree) at action ``h_r0 * a + eps * h_r0 * f_min`` and a double-primed copy
(degree + 1) at action ``h_r0 * a + eps * h_r0 * f_max``, where
``h_r0 = 1/(2 kappa + 1)`` and ``r0^2 = 2 kappa/(2 kappa + 1)``.  Homogenized
spectral sequences are compared through the reduction constant
``1/(2 kappa + 1)`` with Fekete's subadditive estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .novikov import DEFAULT_TRUNCATION, ExponentLattice, NovikovScalar

Chain = Dict[str, NovikovScalar]

#: Differential entries and chain coefficients below this norm count as zero.
CHAIN_ZERO_TOL = 1e-10


class NotACycleError(ValueError):
    """The supplied representative is not closed under the differential."""


class ZeroClassError(ValueError):
    """The class vanishes in homology; it has no finite spectral number."""


class SubadditivityError(ValueError):
    """A sequence violated subadditivity beyond the configured slack."""


@dataclass(frozen=True)
class Generator:
    id: str
    degree: int
    action: float


class FilteredComplex:
    """Finite graded basis with real actions and an action-decreasing
    differential with Novikov-scalar entries."""

    def __init__(
        self,
        generators: Sequence[Union[Generator, Tuple[str, int, float]]],
        differential: Dict[str, Dict[str, NovikovScalar]],
        lattice: ExponentLattice,
        truncation=DEFAULT_TRUNCATION,
        validate: bool = True,
    ):
        gens = [
            g if isinstance(g, Generator) else Generator(g[0], int(g[1]), float(g[2]))
            for g in generators
        ]
        self.generators = list(gens)
        self.by_id = {g.id: g for g in self.generators}
        if len(self.by_id) != len(self.generators):
            raise ValueError("duplicate generator ids")
        self.lattice = lattice
        self.truncation = Fraction(truncation)
        self.differential: Dict[str, Dict[str, NovikovScalar]] = {}
        for src, row in differential.items():
            cleaned = {
                dst: s for dst, s in row.items() if not s.is_zero(CHAIN_ZERO_TOL)
            }
            if cleaned:
                self.differential[src] = cleaned
        if validate:
            self._validate()

    def _validate(self):
        for src, row in self.differential.items():
            if src not in self.by_id:
                raise ValueError(f"differential from unknown generator {src!r}")
            a_src = self.by_id[src].action
            for dst, s in row.items():
                if dst not in self.by_id:
                    raise ValueError(f"differential to unknown generator {dst!r}")
                level = self.by_id[dst].action + float(s.valuation())
                if not level < a_src - 1e-12:
                    raise ValueError(
                        f"differential entry {src!r}->{dst!r} does not strictly "
                        f"decrease action ({level} vs {a_src})"
                    )
        for src in self.differential:
            dd = self.apply_differential(self.differential[src])
            if chain_norm(dd) > 1e-8:
                raise ValueError(f"d o d != 0 starting from {src!r}")

    # ------------------------------------------------------------------
    # chains
    # ------------------------------------------------------------------

    def apply_differential(self, chain: Chain) -> Chain:
        out: Chain = {}
        for gid, coeff in chain.items():
            for dst, entry in self.differential.get(gid, {}).items():
                add = coeff * entry
                out[dst] = out[dst] + add if dst in out else add
        return {k: v for k, v in out.items() if not v.is_zero(0.0)}

    def level(self, chain: Chain) -> float:
        """Filtration level max_i (action_i + top exponent of the coefficient)."""
        best = -math.inf
        for gid, coeff in chain.items():
            if coeff.is_zero(CHAIN_ZERO_TOL):
                continue
            best = max(best, self.by_id[gid].action + float(coeff.top_exponent()))
        return best

    def _order_index(self) -> Dict[str, int]:
        order = sorted(self.generators, key=lambda g: (g.action, g.id))
        return {g.id: i for i, g in enumerate(order)}

    def _pivot(self, chain: Chain, order: Dict[str, int]) -> Optional[str]:
        best = None
        best_key = None
        for gid, coeff in chain.items():
            if coeff.is_zero(CHAIN_ZERO_TOL):
                continue
            key = (self.by_id[gid].action + float(coeff.top_exponent()), order[gid])
            if best_key is None or key > best_key:
                best, best_key = gid, key
        return best

    def _reduced_columns(self, order: Dict[str, int]) -> Dict[str, Chain]:
        """Boundary columns in fully reduced echelon form, keyed by pivot id.

        Every stored column attains its norm at its own pivot and vanishes at
        all other pivots, which makes the family orthogonal for the level
        norm; greedy reduction against it computes true coset minima.
        """
        pivots: Dict[str, Chain] = {}
        for g in sorted(self.generators, key=lambda g: (g.action, g.id)):
            col = dict(self.differential.get(g.id, {}))
            while True:
                col = {k: v for k, v in col.items() if not v.is_zero(CHAIN_ZERO_TOL)}
                if not col:
                    break
                p = self._pivot(col, order)
                if p not in pivots:
                    break
                ratio = col[p] * pivots[p][p].inverse()
                col = _chain_sub(col, _chain_scale(pivots[p], ratio))
            if not col:
                continue
            p = self._pivot(col, order)
            # clear this column at all existing pivot positions
            for q, other in pivots.items():
                if q in col and not col[q].is_zero(CHAIN_ZERO_TOL):
                    ratio = col[q] * other[q].inverse()
                    col = _chain_sub(col, _chain_scale(other, ratio))
            col = {k: v for k, v in col.items() if not v.is_zero(CHAIN_ZERO_TOL)}
            # clear older columns at the new pivot
            for q in list(pivots):
                other = pivots[q]
                if p in other and not other[p].is_zero(CHAIN_ZERO_TOL):
                    ratio = other[p] * col[p].inverse()
                    pivots[q] = {
                        k: v
                        for k, v in _chain_sub(other, _chain_scale(col, ratio)).items()
                        if not v.is_zero(CHAIN_ZERO_TOL)
                    }
            pivots[p] = col
        return pivots

    def spectral_number(self, chain: Chain) -> float:
        """Least level among representatives of the class of ``chain``.

        Raises NotACycleError for non-cycles and ZeroClassError when the
        class dies in homology.
        """
        x = {k: v for k, v in chain.items() if not v.is_zero(CHAIN_ZERO_TOL)}
        for gid in x:
            if gid not in self.by_id:
                raise ValueError(f"unknown generator {gid!r}")
        if chain_norm(self.apply_differential(x)) > 1e-8:
            raise NotACycleError("representative is not a cycle")
        order = self._order_index()
        pivots = self._reduced_columns(order)
        for q, col in pivots.items():
            if q in x and not x[q].is_zero(CHAIN_ZERO_TOL):
                ratio = x[q] * col[q].inverse()
                x = _chain_sub(x, _chain_scale(col, ratio))
        x = {k: v for k, v in x.items() if not v.is_zero(CHAIN_ZERO_TOL)}
        if not x:
            raise ZeroClassError("class is a boundary; no finite spectral number")
        return self.level(x)

    # ------------------------------------------------------------------
    # rescaling and serialization
    # ------------------------------------------------------------------

    def scale_actions(self, factor: float) -> "FilteredComplex":
        """Actions multiplied by ``factor`` >= 1 (models Hamiltonian iteration)."""
        if factor < 1:
            raise ValueError("action scaling below 1 can break the filtration")
        gens = [Generator(g.id, g.degree, g.action * factor) for g in self.generators]
        return FilteredComplex(
            gens,
            {s: dict(r) for s, r in self.differential.items()},
            self.lattice,
            self.truncation,
        )

    def to_json(self) -> dict:
        return {
            "generators": [
                {"id": g.id, "deg": g.degree, "action": g.action}
                for g in self.generators
            ],
            "differential": [
                [src, dst, s.to_json()]
                for src, row in sorted(self.differential.items())
                for dst, s in sorted(row.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict, lattice=None, truncation=DEFAULT_TRUNCATION):
        gens = [(g["id"], g["deg"], g["action"]) for g in data["generators"]]
        diff: Dict[str, Dict[str, NovikovScalar]] = {}
        inferred = lattice
        for src, dst, sj in data["differential"]:
            s = NovikovScalar.from_json(sj)
            inferred = inferred or s.lattice
            diff.setdefault(src, {})[dst] = s
        return cls(gens, diff, inferred or ExponentLattice(1), truncation)


def _chain_scale(chain: Chain, s: NovikovScalar) -> Chain:
    return {k: s * v for k, v in chain.items()}


def _chain_sub(a: Chain, b: Chain) -> Chain:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] - v if k in out else -v
    return out


def chain_norm(chain: Chain) -> float:
    return max((v.norm_inf() for v in chain.values()), default=0.0)


def verify_valuation_axiom(C: FilteredComplex, chain: Chain) -> bool:
    """For a zero-differential complex with all actions 0, the spectral number
    equals the valuation of the coefficient pattern.

    Exact for monomial coefficients, which is where the zero-Hamiltonian
    axiom is literally true in this one-convention model; multi-term
    coefficients are rejected.
    """
    if C.differential:
        raise ValueError("valuation axiom check needs a zero differential")
    if any(g.action != 0.0 for g in C.generators):
        raise ValueError("valuation axiom check needs all actions 0")
    vals = []
    for v in chain.values():
        if v.is_zero(CHAIN_ZERO_TOL):
            continue
        if len(v.terms) != 1:
            raise ValueError("valuation axiom check needs monomial coefficients")
        vals.append(float(v.valuation()))
    return C.spectral_number(chain) == max(vals)


# ----------------------------------------------------------------------
# transfer parameters and the filtration lift
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TransferParams:
    """Circle-bundle transfer constants derived from the monotonicity input.

    kappa > 0 and f_min < f_max are required; r0 is the monotone radius,
    h_r0 = 1 - r0^2 = 1/(2 kappa + 1) the filtration contraction, and
    eps_prime = eps * h_r0 * f_max the filtration shift bound.
    """

    kappa: Fraction
    epsilon: float
    f_min: float
    f_max: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.f_min < self.f_max:
            raise ValueError("need f_min < f_max")
        if self.eps_prime <= 0:
            raise ValueError("eps_prime must be positive (f_max must be > 0)")

    @property
    def h_r0(self) -> Fraction:
        return reduction_constant(self.kappa)

    @property
    def r0(self) -> float:
        return monotone_radius(self.kappa)

    @property
    def eps_prime(self) -> float:
        return self.epsilon * float(self.h_r0) * self.f_max

    def to_json(self) -> dict:
        return {
            "kappa": str(Fraction(self.kappa)),
            "epsilon": self.epsilon,
            "f_min": self.f_min,
            "f_max": self.f_max,
            "r0": self.r0,
            "h_r0": str(self.h_r0),
            "eps_prime": self.eps_prime,
        }


def reduction_constant(kappa) -> Fraction:
    """The quasimorphism reduction constant 1/(2 kappa + 1), exact."""
    kappa = Fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 1 / (2 * kappa + 1)


def monotone_radius(kappa) -> float:
    """Radius r0 with r0^2 = 2 kappa / (2 kappa + 1)."""
    kappa = Fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return math.sqrt(float(2 * kappa / (2 * kappa + 1)))


def _scale_scalar(s: NovikovScalar, factor: Fraction, lattice: ExponentLattice) -> NovikovScalar:
    return NovikovScalar(
        lattice,
        ((e * factor, c) for e, c in s.terms),
        s.truncation * factor,
    )


def lift_complex(C: FilteredComplex, params: TransferParams) -> FilteredComplex:
    """Doubled complex of the circle-bundle lift.

    Generator g of action a produces g' (same degree) at action
    h_r0 * a + eps * h_r0 * f_min and g'' (degree + 1) at action
    h_r0 * a + eps * h_r0 * f_max.  Differential entries are transported to
    both copies with exponents contracted by h_r0 (areas scale with the
    disk-bundle form), on the correspondingly refined lattice.
    """
    h = params.h_r0
    lo = params.epsilon * float(h) * params.f_min
    hi = params.epsilon * float(h) * params.f_max
    lattice = C.lattice.refine(h.denominator)
    gens: List[Generator] = []
    for g in C.generators:
        base = float(h) * g.action
        gens.append(Generator(g.id + "'", g.degree, base + lo))
        gens.append(Generator(g.id + "''", g.degree + 1, base + hi))
    diff: Dict[str, Dict[str, NovikovScalar]] = {}
    for src, row in C.differential.items():
        primed = {}
        doubled = {}
        for dst, s in row.items():
            scaled = _scale_scalar(s, h, lattice)
            primed[dst + "'"] = scaled
            doubled[dst + "''"] = scaled
        diff[src + "'"] = primed
        diff[src + "''"] = doubled
    return FilteredComplex(gens, diff, lattice, C.truncation * h)


def lift_chain(chain: Chain, params: TransferParams, tag: str = "'") -> Chain:
    """Image of a chain under the inclusion (primed copy, scaled exponents)."""
    h = params.h_r0
    out = {}
    for gid, s in chain.items():
        lattice = s.lattice.refine(h.denominator)
        out[gid + tag] = _scale_scalar(s, h, lattice)
    return out


def transfer_spectral(
    profile: Dict[str, float], params: TransferParams
) -> Dict[str, Tuple[float, float]]:
    """Predicted lifted spectral window [h_r0 c - eps', h_r0 c + eps'] per class."""
    h = float(params.h_r0)
    eps_prime = params.eps_prime
    return {
        key: (h * c - eps_prime, h * c + eps_prime) for key, c in profile.items()
    }


@dataclass
class TransferCheck:
    class_id: str
    base_spectral: float
    lifted_spectral: float
    window: Tuple[float, float]

    @property
    def inside(self) -> bool:
        lo, hi = self.window
        return lo - 1e-12 <= self.lifted_spectral <= hi + 1e-12


def verify_transfer(
    C: FilteredComplex, classes: Dict[str, Chain], params: TransferParams
) -> List[TransferCheck]:
    """Lift the complex and check each class's lifted spectral number against
    its predicted window."""
    lifted = lift_complex(C, params)
    checks = []
    for key, chain in classes.items():
        c_base = C.spectral_number(chain)
        c_lift = lifted.spectral_number(lift_chain(chain, params))
        window = transfer_spectral({key: c_base}, params)[key]
        checks.append(TransferCheck(key, c_base, c_lift, window))
    return checks


# ----------------------------------------------------------------------
# homogenization and the reduction identity
# ----------------------------------------------------------------------


@dataclass
class HomogenizationResult:
    estimate: float
    gap: float
    k_max: int

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "gap": self.gap, "k_max": self.k_max}


def homogenize(
    seq: Sequence[float], k_max: Optional[int] = None, subadditivity_slack: float = 1e-9
) -> HomogenizationResult:
    """Fekete estimate min_k c_k / k of a subadditive sequence (c_1 first).

    Verifies c_{m+n} <= c_m + c_n + slack for all pairs and returns the
    prefix minimum together with the gap c_K/K - estimate.
    """
    values = list(seq)
    if k_max is not None:
        values = values[:k_max]
    if not values:
        raise ValueError("empty sequence")
    K = len(values)
    for m in range(1, K + 1):
        for n in range(m, K - m + 1):
            excess = values[m + n - 1] - values[m - 1] - values[n - 1]
            if excess > subadditivity_slack:
                raise SubadditivityError(
                    f"c_{m + n} > c_{m} + c_{n} + slack (excess {excess:.3e})"
                )
    estimate = min(c / k for k, c in enumerate(values, start=1))
    gap = values[-1] / K - estimate
    return HomogenizationResult(estimate=estimate, gap=gap, k_max=K)


# ----------------------------------------------------------------------
# synthetic end-to-end pipeline
# ----------------------------------------------------------------------


def pearl_to_filtered(
    pearl,
    base_action: float = 0.3,
    step: Optional[float] = None,
    truncation=DEFAULT_TRUNCATION,
) -> FilteredComplex:
    """Filtered model of a torus pearl complex.

    Generators sit at action base_action + step * degree (the Morse-value
    profile); step must exceed the pearl area weight so singleton
    differentials strictly decrease the level.
    """
    w = float(pearl.weight)
    if step is None:
        step = w + 1.0
    if step <= w:
        raise ValueError("step must exceed the pearl weight")
    gens = [
        (f"x{mask}", pearl.degree(mask), base_action + step * pearl.degree(mask))
        for mask in pearl.basis
    ]
    diff: Dict[str, Dict[str, NovikovScalar]] = {}
    for mask, coeff in pearl.differential_entries().items():
        diff[f"x{mask}"] = {
            "x0": NovikovScalar.monomial(pearl.lattice, coeff, pearl.weight, truncation)
        }
    return FilteredComplex(gens, diff, pearl.lattice, truncation)


@dataclass
class SyntheticTransferRun:
    c_sigma: List[float]
    c_x: List[float]
    containment: List[bool]
    report: "ReductionIdentityReport"

    @property
    def passed(self) -> bool:
        return all(self.containment) and self.report.passed

    def to_json(self) -> dict:
        return {
            "c_sigma": self.c_sigma,
            "c_x": self.c_x,
            "containment": self.containment,
            "identity": self.report.to_json(),
            "passed": self.passed,
        }


def synthetic_transfer_run(
    base: FilteredComplex,
    unit_chain: Chain,
    params: TransferParams,
    k_max: int = 1000,
    tol: float = 1e-6,
) -> SyntheticTransferRun:
    """Iterate the base complex k-fold, lift each iterate, and check both the
    per-iterate spectral window and the homogenized reduction identity with
    Const = eps_prime."""
    c_sigma: List[float] = []
    c_x: List[float] = []
    containment: List[bool] = []
    h = float(params.h_r0)
    for k in range(1, k_max + 1):
        Ck = base.scale_actions(float(k))
        cs = Ck.spectral_number(unit_chain)
        lifted = lift_complex(Ck, params)
        cx = lifted.spectral_number(lift_chain(unit_chain, params))
        c_sigma.append(cs)
        c_x.append(cx)
        lo, hi = h * cs - params.eps_prime, h * cs + params.eps_prime
        containment.append(lo - 1e-12 <= cx <= hi + 1e-12)
    report = reduction_identity_check(
        c_sigma, c_x, params.kappa, const_bound=params.eps_prime, tol=tol
    )
    return SyntheticTransferRun(c_sigma, c_x, containment, report)


@dataclass
class ReductionIdentityReport:
    constant: Fraction
    const_bound: float
    bound_violations: List[int]
    homog_sigma: float
    homog_x: float
    tol: float

    @property
    def homog_difference(self) -> float:
        return abs(self.homog_x - float(self.constant) * self.homog_sigma)

    @property
    def passed(self) -> bool:
        return not self.bound_violations and self.homog_difference <= self.tol

    def to_json(self) -> dict:
        return {
            "constant": str(self.constant),
            "const_bound": self.const_bound,
            "bound_violations": self.bound_violations,
            "homogenized_sigma": self.homog_sigma,
            "homogenized_x": self.homog_x,
            "homogenized_difference": self.homog_difference,
            "tol": self.tol,
            "passed": self.passed,
        }


def reduction_identity_check(
    c_sigma_seq: Sequence[float],
    c_x_seq: Sequence[float],
    kappa,
    const_bound: float,
    tol: float = 1e-6,
    subadditivity_slack: Optional[float] = None,
) -> ReductionIdentityReport:
    """Bounded-difference and homogenized forms of the reduction identity.

    Checks |c_x[k] - (1/(2 kappa + 1)) c_sigma[k]| <= const_bound for every k,
    then compares the Fekete homogenizations at tolerance ``tol``.  The
    subadditivity slack for the noisy sequence defaults to 4 * const_bound.
    """
    if len(c_sigma_seq) != len(c_x_seq):
        raise ValueError("sequences must be equally long")
    r = reduction_constant(kappa)
    violations = [
        k + 1
        for k, (cs, cx) in enumerate(zip(c_sigma_seq, c_x_seq))
        if abs(cx - float(r) * cs) > const_bound + 1e-12
    ]
    slack = (
        subadditivity_slack if subadditivity_slack is not None else 4 * const_bound + 1e-9
    )
    hs = homogenize(c_sigma_seq, subadditivity_slack=slack)
    hx = homogenize(c_x_seq, subadditivity_slack=slack)
    return ReductionIdentityReport(
        constant=r,
        const_bound=const_bound,
        bound_violations=violations,
        homog_sigma=hs.estimate,
        homog_x=hx.estimate,
        tol=tol,
    )
