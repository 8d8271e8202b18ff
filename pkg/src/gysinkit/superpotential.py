"""Laurent-polynomial potentials on (C*)^k and certified critical-point search.

A potential is a finite sum of monomials ``c * z^e`` with integer exponent
vectors.  Critical points are located in logarithmic coordinates ``u = log z``
by Newton iteration on the logarithmic gradient ``(z_j d/dz_j) W``,
multistarted from a deterministic grid of arguments and moduli.  Each
converged point is certified by its residual and the determinant of the
logarithmic Hessian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

DEFAULT_NEWTON_TOL = 1e-12
DEFAULT_HESSIAN_TOL = 1e-8
DEFAULT_DEDUPE_RADIUS = 1e-6

BUILTIN_FAMILIES = ("clifford_cp", "gz_quadric", "chekanov_cp3", "chekanov_q2")


class LocalSystem:
    """A point of (C*)^k, the evaluation point for a potential."""

    __slots__ = ("point",)

    def __init__(self, point: Sequence[complex]):
        pt = tuple(complex(z) for z in point)
        if any(z == 0 for z in pt):
            raise ValueError("local system entries must be nonzero")
        self.point = pt

    def __len__(self) -> int:
        return len(self.point)

    def __iter__(self):
        return iter(self.point)

    def __getitem__(self, i):
        return self.point[i]

    def __repr__(self) -> str:
        return f"LocalSystem({list(self.point)!r})"

    def to_json(self) -> list:
        return [[z.real, z.imag] for z in self.point]

    @classmethod
    def from_json(cls, data) -> "LocalSystem":
        return cls([complex(re, im) for re, im in data])


class SuperpotentialPoly:
    """Laurent polynomial in z_1..z_k with complex coefficients."""

    __slots__ = ("num_vars", "monomials", "_E", "_C", "_EE")

    def __init__(self, num_vars: int, monomials: Iterable[Tuple[Sequence[int], complex]]):
        self.num_vars = int(num_vars)
        if self.num_vars < 1:
            raise ValueError("potential needs at least one variable")
        merged: dict[Tuple[int, ...], complex] = {}
        for exponents, coefficient in monomials:
            e = tuple(int(x) for x in exponents)
            if len(e) != self.num_vars:
                raise ValueError(f"exponent vector {e} has wrong length")
            merged[e] = merged.get(e, 0j) + complex(coefficient)
        self.monomials = tuple((e, c) for e, c in sorted(merged.items()) if c != 0)
        self._E = np.array([e for e, _ in self.monomials], dtype=float).reshape(
            len(self.monomials), self.num_vars
        )
        self._C = np.array([c for _, c in self.monomials], dtype=complex)
        self._EE = (self._E[:, :, None] * self._E[:, None, :]).reshape(
            len(self.monomials), self.num_vars * self.num_vars
        )

    # ------------------------------------------------------------------
    # pointwise evaluation
    # ------------------------------------------------------------------

    def _check_dim(self, point) -> Tuple[complex, ...]:
        pt = tuple(complex(z) for z in point)
        if len(pt) != self.num_vars:
            raise ValueError(
                f"point has {len(pt)} coordinates, potential has {self.num_vars} variables"
            )
        return pt

    def evaluate(self, point) -> complex:
        pt = self._check_dim(point)
        total = 0j
        for e, c in self.monomials:
            term = c
            for z, p in zip(pt, e):
                term *= z ** p
            total += term
        return total

    def log_gradient(self, point) -> np.ndarray:
        """Vector of (z_j d/dz_j) W at the point."""
        pt = self._check_dim(point)
        grad = np.zeros(self.num_vars, dtype=complex)
        for e, c in self.monomials:
            term = c
            for z, p in zip(pt, e):
                term *= z ** p
            for j, p in enumerate(e):
                if p:
                    grad[j] += p * term
        return grad

    def log_hessian(self, point) -> np.ndarray:
        """Matrix of (z_i d/dz_i)(z_j d/dz_j) W at the point; symmetric."""
        pt = self._check_dim(point)
        hess = np.zeros((self.num_vars, self.num_vars), dtype=complex)
        for e, c in self.monomials:
            term = c
            for z, p in zip(pt, e):
                term *= z ** p
            ev = np.array(e, dtype=float)
            hess += term * np.outer(ev, ev)
        return hess

    # ------------------------------------------------------------------
    # batched helpers in log coordinates (u = log z)
    # ------------------------------------------------------------------

    def _batch_terms(self, U: np.ndarray) -> np.ndarray:
        # U: (B, k) complex -> per-monomial values c_m * exp(<u, e_m>): (B, M)
        return np.exp(U @ self._E.T) * self._C[None, :]

    def _batch_gradient(self, U: np.ndarray) -> np.ndarray:
        return self._batch_terms(U) @ self._E

    def _batch_hessian(self, U: np.ndarray) -> np.ndarray:
        T = self._batch_terms(U)
        k = self.num_vars
        return (T @ self._EE).reshape(len(U), k, k)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vars": self.num_vars,
            "monomials": [[list(e), [c.real, c.imag]] for e, c in self.monomials],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SuperpotentialPoly":
        return cls(
            data["vars"],
            [(e, complex(re, im)) for e, (re, im) in data["monomials"]],
        )

    def __repr__(self) -> str:
        def mono(e, c):
            body = "".join(
                f"z{j + 1}^{p}" if p not in (0, 1) else (f"z{j + 1}" if p == 1 else "")
                for j, p in enumerate(e)
            )
            return f"{c:g}*{body}" if body else f"{c:g}"

        return " + ".join(mono(e, c) for e, c in self.monomials)


@dataclass(frozen=True)
class CritConfig:
    """Deterministic multistart configuration for the critical-point search.

    After ``basin_iters`` Newton steps, starts whose residual still exceeds
    ``basin_tol`` are discarded; starts captured by a basin converge
    quadratically well before that.
    """

    grid_density: int = 8
    newton_tol: float = DEFAULT_NEWTON_TOL
    max_iter: int = 50
    dedupe_radius: float = DEFAULT_DEDUPE_RADIUS
    modulus_range: Tuple[float, ...] = (0.5, 1.0, 2.0)
    hessian_tol: float = DEFAULT_HESSIAN_TOL
    basin_iters: int = 15
    basin_tol: float = 1e-3


@dataclass
class CriticalPointReport:
    """A converged critical point with its certification data."""

    point: LocalSystem
    residual: float
    critical_value: complex
    log_hessian_det: complex
    nondegenerate: bool

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "residual": self.residual,
            "critical_value": [self.critical_value.real, self.critical_value.imag],
            "log_hessian_det": [self.log_hessian_det.real, self.log_hessian_det.imag],
            "nondegenerate": self.nondegenerate,
        }


@dataclass
class CriticalSearchResult:
    """Deduplicated critical points plus multistart convergence statistics."""

    points: List[CriticalPointReport]
    stats: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def nondegenerate_points(self) -> List[CriticalPointReport]:
        return [p for p in self.points if p.nondegenerate]


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    return (x + math.pi) % (2 * math.pi) - math.pi


def _log_distance(u: np.ndarray, v: np.ndarray) -> float:
    d_re = u.real - v.real
    d_im = _wrap_angle(u.imag - v.imag)
    return float(np.sqrt(np.sum(d_re * d_re + d_im * d_im)))


def find_critical_points(
    W: SuperpotentialPoly, config: CritConfig = CritConfig()
) -> CriticalSearchResult:
    """Multistart Newton search for critical points of W on (C*)^k.

    Deterministic for a fixed config: starts are a full grid of arguments
    (grid_density-th roots of unity) times moduli per variable; converged
    points are deduplicated within dedupe_radius in log coordinates (lower
    residual wins) and canonically sorted.  Completeness is not guaranteed.
    """
    k = W.num_vars
    m = config.grid_density
    args = 2j * math.pi * np.arange(m) / m
    mods = np.log(np.array(config.modulus_range, dtype=float))
    starts_1d = (mods[:, None] + args[None, :]).ravel()  # log-coordinate grid per axis
    grids = np.meshgrid(*([starts_1d] * k), indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=-1).astype(complex)
    B = U.shape[0]

    active = np.ones(B, dtype=bool)
    with np.errstate(all="ignore"):
        for it in range(config.max_iter):
            if not active.any():
                break
            Ua = U[active]
            G = W._batch_gradient(Ua)
            res = np.linalg.norm(G, axis=1)
            bad = ~np.isfinite(res) | (np.abs(Ua.real).max(axis=1) > 50.0)
            done = ~bad & (res <= config.newton_tol)
            if it == config.basin_iters:
                bad |= ~done & (res > config.basin_tol)
            H = W._batch_hessian(Ua)
            # relative ridge: exactly singular Hessians produce huge finite
            # steps (row then diverges and is culled) instead of LU failure;
            # for well-conditioned rows the 1e-14 perturbation is roundoff
            scale = np.abs(H).reshape(len(Ua), -1).max(axis=1)
            scale = np.where(np.isfinite(scale) & (scale > 0), scale, 1.0)
            H[:, np.arange(k), np.arange(k)] += 1e-14 * scale[:, None]
            try:
                step = np.linalg.solve(H, G[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                dets = np.linalg.det(H)
                sing = ~np.isfinite(dets) | (np.abs(dets) < 1e-280)
                bad |= sing
                H[sing] = np.eye(k)
                step = np.linalg.solve(H, G[:, :, None])[:, :, 0]
            step = np.where(np.isfinite(step), step, 0.0)
            U[active] = Ua - step
            idx = np.where(active)[0]
            active[idx] = ~(done | bad)

        G_final = W._batch_gradient(U)
        residuals = np.linalg.norm(G_final, axis=1)
    ok = np.isfinite(residuals) & (residuals <= config.newton_tol)
    n_converged = int(ok.sum())

    # canonical form: wrap arguments into (-pi, pi]
    U_ok = U[ok]
    U_ok = U_ok.real + 1j * _wrap_angle(U_ok.imag)
    res_ok = residuals[ok]

    # coarse bucketing by rounded coordinates (keep each bucket's lowest
    # residual), then exact pairwise merge of the handful of buckets
    buckets: List[Tuple[np.ndarray, float]] = []
    if len(U_ok):
        key = np.round(
            np.concatenate([U_ok.real, U_ok.imag], axis=1), 8
        )
        _, inverse = np.unique(key, axis=0, return_inverse=True)
        n_buckets = int(inverse.max()) + 1
        for b in range(n_buckets):
            members = np.where(inverse == b)[0]
            i = members[np.argmin(res_ok[members])]
            buckets.append((U_ok[i], float(res_ok[i])))
        buckets.sort(key=lambda ur: (ur[1], tuple(ur[0].real), tuple(ur[0].imag)))
    reps: List[Tuple[np.ndarray, float]] = []
    for u, r in buckets:
        for j, (v, rv) in enumerate(reps):
            if _log_distance(u, v) <= config.dedupe_radius:
                if r < rv:
                    reps[j] = (u, r)
                break
        else:
            reps.append((u, r))

    reports = []
    for u, r in reps:
        z = np.exp(u)
        point = LocalSystem(z)
        H = W.log_hessian(point)
        det = complex(np.linalg.det(H))
        reports.append(
            CriticalPointReport(
                point=point,
                residual=r,
                critical_value=W.evaluate(point),
                log_hessian_det=det,
                nondegenerate=abs(det) > config.hessian_tol,
            )
        )
    reports.sort(
        key=lambda rep: tuple(
            (round(math.log(abs(z)), 8), round(cmath.phase(z), 8)) for z in rep.point
        )
    )
    stats = {
        "started": B,
        "converged": n_converged,
        "discarded": int(B - n_converged),
        "distinct": len(reports),
    }
    return CriticalSearchResult(points=reports, stats=stats)


def builtin(name: str, n: int | None = None) -> SuperpotentialPoly:
    """Built-in potentials for the standard torus families.

    clifford_cp(n):  z_1 + ... + z_n + 1/(z_1...z_n)           (n >= 1)
    gz_quadric(n):   1/z_n + z_n/z_{n-1} + ... + z_2/z_1 + 2 z_2 + z_1 z_2   (n >= 2)
    chekanov_cp3:    (1/z_3)(z_1 + z_1/z_2 + z_2/z_1 + 1/z_1) + z_3
    chekanov_q2:     z_1 + z_1/z_2 + z_2/z_1 + 1/z_1
    """
    if name == "clifford_cp":
        if n is None or n < 1:
            raise ValueError("clifford_cp requires n >= 1")
        monomials = [(tuple(1 if j == i else 0 for j in range(n)), 1.0) for i in range(n)]
        monomials.append((tuple(-1 for _ in range(n)), 1.0))
        return SuperpotentialPoly(n, monomials)
    if name == "gz_quadric":
        if n is None or n < 2:
            raise ValueError("gz_quadric requires n >= 2")

        def e(*pairs):
            v = [0] * n
            for idx, p in pairs:
                v[idx] += p
            return tuple(v)

        monomials = [(e((n - 1, -1)), 1.0)]
        for j in range(n - 1, 0, -1):  # z_{j+1}/z_j, from 1/z-chain top down
            monomials.append((e((j, 1), (j - 1, -1)), 1.0))
        monomials.append((e((1, 1)), 2.0))
        monomials.append((e((0, 1), (1, 1)), 1.0))
        return SuperpotentialPoly(n, monomials)
    if name == "chekanov_cp3":
        if n not in (None, 3):
            raise ValueError("chekanov_cp3 is a fixed 3-variable family")
        return SuperpotentialPoly(
            3,
            [
                ((1, 0, -1), 1.0),
                ((1, -1, -1), 1.0),
                ((-1, 1, -1), 1.0),
                ((-1, 0, -1), 1.0),
                ((0, 0, 1), 1.0),
            ],
        )
    if name == "chekanov_q2":
        if n not in (None, 2):
            raise ValueError("chekanov_q2 is a fixed 2-variable family")
        return SuperpotentialPoly(
            2,
            [((1, 0), 1.0), ((1, -1), 1.0), ((-1, 1), 1.0), ((-1, 0), 1.0)],
        )
    raise ValueError(f"unknown family {name!r}; choose from {BUILTIN_FAMILIES}")
