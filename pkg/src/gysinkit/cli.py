"""Batch command-line front end.

TOML config in, JSON reports out: human-readable tables go to standard
output, machine reports to the --out path.  Exit codes: 0 all checks passed,
1 a mathematical check failed, 2 usage or configuration error.  Identical
config and seeds produce byte-identical JSON reports; every report embeds
the tool version and a hash of the resolved configuration.  The environment
variable GYSINKIT_TRUNCATION overrides the default truncation order.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from . import __version__
from .algebra import (
    CyclicPresentation,
    NonSemisimpleError,
    presentation_from_json,
    split_binomial,
    split_table,
    verify_decomposition,
)
from .axioms import run_axiom_suite
from .filtered import (
    TransferParams,
    pearl_to_filtered,
    reduction_constant,
    reduction_identity_check,
    synthetic_transfer_run,
)
from .gysin import (
    build_lifted_complex,
    build_torus_complex,
    chain_map_report,
    connecting_class,
    verify_gysin_exactness,
)
from .novikov import DEFAULT_TRUNCATION, ExponentLattice, NovikovScalar
from .superpotential import (
    BUILTIN_FAMILIES,
    CritConfig,
    LocalSystem,
    SuperpotentialPoly,
    builtin,
    find_critical_points,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


#: Base/lift potentials and monotonicity constants of the built-in pairings.
PAIR_PRESETS = {
    "cpn": {
        "min_n": 2,
        "base": lambda n: ("clifford_cp", n - 1),
        "lift": lambda n: ("clifford_cp", n),
        "kappa": lambda n: Fraction(1, 2 * n),
    },
    "quadric": {
        "min_n": 3,
        "base": lambda n: ("gz_quadric", n - 1),
        "lift": lambda n: ("gz_quadric", n),
        "kappa": lambda n: Fraction(1, 2 * (n - 1)),
    },
    "cp3_q2": {
        "min_n": None,
        "base": lambda n: ("chekanov_q2", None),
        "lift": lambda n: ("chekanov_cp3", None),
        "kappa": lambda n: Fraction(1, 2),
    },
}


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def _load_toml(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def _resolve(args, toml_cfg: dict, key: str, default, cast=None):
    """Resolution order: explicit flag, TOML key, hard default."""
    value = getattr(args, key, None)
    if value is None:
        value = toml_cfg.get(key, default)
    if cast is not None and value is not None:
        value = cast(value)
    return value


def _default_truncation() -> Fraction:
    env = os.environ.get("GYSINKIT_TRUNCATION")
    if env:
        return _fraction(env)
    return DEFAULT_TRUNCATION


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _emit(command: str, config: dict, result: dict, out_path: Optional[str], lines: List[str]) -> None:
    for line in lines:
        print(line)
    config_json = json.dumps(config, sort_keys=True, separators=(",", ":"))
    envelope = {
        "tool": "gysinkit",
        "version": __version__,
        "command": command,
        "config": config,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "result": result,
    }
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(envelope, fh, sort_keys=True, indent=2)
            fh.write("\n")


# ----------------------------------------------------------------------
# crit
# ----------------------------------------------------------------------


def _potential_from_args(family, n, poly_path) -> Tuple[SuperpotentialPoly, dict]:
    if poly_path:
        data = _load_json(poly_path)
        try:
            W = SuperpotentialPoly.from_json(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential file {poly_path}: {exc}") from exc
        return W, {"poly": poly_path}
    if not family:
        raise ConfigError("need --family or --poly")
    try:
        W = builtin(family, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return W, {"family": family, "n": n}


def cmd_crit(args, toml_cfg) -> int:
    family = _resolve(args, toml_cfg, "family", None)
    n = _resolve(args, toml_cfg, "n", None, int)
    poly = _resolve(args, toml_cfg, "poly", None)
    W, desc = _potential_from_args(family, n, poly)
    moduli = _resolve(args, toml_cfg, "moduli", "0.5,1,2")
    try:
        modulus_range = tuple(float(x) for x in str(moduli).split(","))
    except ValueError as exc:
        raise ConfigError(f"bad moduli list {moduli!r}") from exc
    cfg = CritConfig(
        grid_density=_resolve(args, toml_cfg, "grid_density", 8, int),
        newton_tol=_resolve(args, toml_cfg, "newton_tol", 1e-12, float),
        max_iter=_resolve(args, toml_cfg, "max_iter", 50, int),
        dedupe_radius=_resolve(args, toml_cfg, "dedupe_radius", 1e-6, float),
        modulus_range=modulus_range,
        hessian_tol=_resolve(args, toml_cfg, "hessian_tol", 1e-8, float),
    )
    result = find_critical_points(W, cfg)
    if "family" in desc:
        label = desc["family"] + (f"(n={desc['n']})" if desc["n"] is not None else "")
    else:
        label = desc["poly"]
    lines = [
        f"critical points of {label} ({len(result)} found, "
        f"{len(result.nondegenerate_points())} nondegenerate)",
        f"{'point':<50} {'value':<24} {'residual':<10} nondeg",
    ]
    for p in result:
        pt = ", ".join(f"{z:.6g}" for z in p.point)
        lines.append(
            f"[{pt}]".ljust(50)
            + f" {p.critical_value:.6g}".ljust(25)
            + f" {p.residual:.1e}".ljust(11)
            + ("yes" if p.nondegenerate else "no")
        )
    config = {
        **desc,
        "grid_density": cfg.grid_density,
        "newton_tol": cfg.newton_tol,
        "max_iter": cfg.max_iter,
        "dedupe_radius": cfg.dedupe_radius,
        "moduli": list(cfg.modulus_range),
        "hessian_tol": cfg.hessian_tol,
    }
    payload = {
        "points": [p.to_json() for p in result],
        "stats": result.stats,
        "nondegenerate_count": len(result.nondegenerate_points()),
    }
    _emit("crit", config, payload, args.out, lines)
    return EXIT_OK if result.nondegenerate_points() else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------
# split
# ----------------------------------------------------------------------


def cmd_split(args, toml_cfg) -> int:
    truncation = _resolve(args, toml_cfg, "truncation", _default_truncation(), _fraction)
    lattice_d = _resolve(args, toml_cfg, "lattice", None, int)
    tol = _resolve(args, toml_cfg, "tol", 1e-9, float)
    cpn = _resolve(args, toml_cfg, "cpn", None, int)
    cyclic_path = _resolve(args, toml_cfg, "cyclic", None)
    table_path = _resolve(args, toml_cfg, "table", None)
    if sum(x is not None for x in (cpn, cyclic_path, table_path)) != 1:
        raise ConfigError("need exactly one of --cpn, --cyclic, --table")
    if cpn is not None:
        if cpn < 1:
            raise ConfigError("--cpn must be >= 1")
        lattice = ExponentLattice(lattice_d or 1)
        pres = CyclicPresentation(cpn + 1, 1.0, 1, lattice, truncation)
        desc = {"cpn": cpn, "lattice": lattice.denominator_bound}
    else:
        path = cyclic_path or table_path
        data = _load_json(path)
        if lattice_d is not None:
            data = dict(data)
            data["lattice_denominator"] = lattice_d
        try:
            pres = presentation_from_json(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad presentation file {path}: {exc}") from exc
        desc = {"presentation": path, "lattice": pres.lattice.denominator_bound}
    config = {**desc, "truncation": str(truncation), "tol": tol}
    try:
        decomp = (
            split_binomial(pres)
            if isinstance(pres, CyclicPresentation)
            else split_table(pres)
        )
    except NonSemisimpleError as exc:
        _emit("split", config, {"error": str(exc), "passed": False}, args.out,
              [f"splitting failed: {exc}"])
        return EXIT_CHECK_FAILED
    report = verify_decomposition(pres, decomp, tol=tol)
    lines = [
        f"{len(decomp)} field factor(s); identities "
        + ("pass" if report.passed else "FAIL")
        + f" (worst residual {report.max_residual:.2e}, tol {tol:g})"
    ]
    for i, e in enumerate(decomp.idempotents):
        lines.append(f"  e_{i}: " + ", ".join(repr(s) for s in e.coeffs))
    payload = {
        "factors": len(decomp),
        "decomposition": decomp.to_json(),
        "verification": report.to_json(),
    }
    _emit("split", config, payload, args.out, lines)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------
# gysin
# ----------------------------------------------------------------------


def _first_nondegenerate(W: SuperpotentialPoly, what: str) -> LocalSystem:
    res = find_critical_points(W)
    points = res.nondegenerate_points()
    if not points:
        raise ConfigError(f"no nondegenerate critical point found for {what}")
    return points[0].point


def cmd_gysin(args, toml_cfg) -> int:
    pair = _resolve(args, toml_cfg, "pair", None)
    n = _resolve(args, toml_cfg, "n", None, int)
    euler = _resolve(args, toml_cfg, "euler", 0, int)
    rank_sweep = _resolve(args, toml_cfg, "rank_sweep", 8, int)
    weight_arg = _resolve(args, toml_cfg, "weight", None)
    if pair:
        preset = PAIR_PRESETS.get(pair)
        if preset is None:
            raise ConfigError(f"unknown pair {pair!r}; choose from {sorted(PAIR_PRESETS)}")
        if preset["min_n"] is not None:
            if n is None or n < preset["min_n"]:
                raise ConfigError(f"pair {pair!r} needs --n >= {preset['min_n']}")
        kappa = preset["kappa"](n)
        base_family, base_n = preset["base"](n)
        lift_family, lift_n = preset["lift"](n)
        W = builtin(base_family, base_n)
        W_tilde = builtin(lift_family, lift_n)
        weight = _fraction(weight_arg) if weight_arg is not None else 2 * kappa
        desc = {"pair": pair, "n": n, "kappa": str(kappa)}
    else:
        base_path = _resolve(args, toml_cfg, "base_poly", None)
        lift_path = _resolve(args, toml_cfg, "lift_poly", None)
        if not base_path or not lift_path:
            raise ConfigError("need --pair or both --base-poly and --lift-poly")
        W = SuperpotentialPoly.from_json(_load_json(base_path))
        W_tilde = SuperpotentialPoly.from_json(_load_json(lift_path))
        weight = _fraction(weight_arg) if weight_arg is not None else Fraction(1, 2)
        desc = {"base_poly": base_path, "lift_poly": lift_path}
    if W_tilde.num_vars != W.num_vars + 1:
        raise ConfigError("lifted potential must have one more variable than the base")

    rho_path = _resolve(args, toml_cfg, "rho", None)
    rho_tilde_path = _resolve(args, toml_cfg, "rho_tilde", None)
    rho = (
        LocalSystem.from_json(_load_json(rho_path))
        if rho_path
        else _first_nondegenerate(W, "the base potential")
    )
    rho_tilde = (
        LocalSystem.from_json(_load_json(rho_tilde_path))
        if rho_tilde_path
        else _first_nondegenerate(W_tilde, "the lifted potential")
    )

    truncation = _resolve(args, toml_cfg, "truncation", _default_truncation(), _fraction)
    base = build_torus_complex(W, rho, weight)
    lifted = build_lifted_complex(W_tilde, rho_tilde, base, euler_number=euler)
    maps = chain_map_report(base, lifted)
    delta = connecting_class(W_tilde, rho_tilde, euler, weight, truncation=truncation)
    critical = base.critical and lifted.critical
    exactness_list: Optional[List[bool]] = None
    exactness_ok = False
    if critical:
        report = verify_gysin_exactness(base.rank, base, lifted)
        per_degree = [e["ok"] for e in report.rank_identity]
        if report.subspace_checks is not None:
            for i, entry in enumerate(report.subspace_checks):
                per_degree[i] = per_degree[i] and entry["ok"]
        exactness_list = per_degree
        exactness_ok = report.passed
    sweep_ok = all(
        verify_gysin_exactness(k, check_subspaces=(k <= 4)).passed
        for k in range(1, rank_sweep + 1)
    )
    checks = {
        "critical": critical,
        "exactness": exactness_ok,
        "chain_maps_commute": maps.i_residual == 0.0 and maps.p_residual == 0.0,
        "p_after_i_zero": maps.pi_zero,
        "connecting_class_zero": delta.is_zero(),
        "rank_sweep": sweep_ok,
    }
    config = {
        **desc,
        "euler": euler,
        "weight": str(weight),
        "rank_sweep": rank_sweep,
        "rho": rho.to_json(),
        "rho_tilde": rho_tilde.to_json(),
    }
    payload = {
        "k": base.rank,
        "critical": critical,
        "exactness": exactness_list,
        "connecting_class": delta.to_json(),
        "chain_residuals": {"i": maps.i_residual, "p": maps.p_residual},
        "checks": checks,
        "passed": all(checks.values()),
    }
    lines = [
        f"torus rank k = {base.rank}; critical local systems: {critical}",
        f"connecting class: euler {delta.euler_part}, quantum {delta.quantum_part!r}"
        + (" (zero)" if delta.is_zero() else " (NONZERO)"),
        f"chain residuals: i {maps.i_residual:.2e}, p {maps.p_residual:.2e}",
        f"exactness: {exactness_list}",
        f"rank identity sweep (k <= {rank_sweep}): {'pass' if sweep_ok else 'FAIL'}",
        "all checks pass" if all(checks.values()) else f"FAILED checks: "
        + ", ".join(k for k, v in checks.items() if not v),
    ]
    _emit("gysin", config, payload, args.out, lines)
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------
# reduce
# ----------------------------------------------------------------------


def cmd_reduce(args, toml_cfg) -> int:
    pair = _resolve(args, toml_cfg, "pair", None)
    n = _resolve(args, toml_cfg, "n", None, int)
    kappa_arg = _resolve(args, toml_cfg, "kappa", None)
    if pair:
        preset = PAIR_PRESETS.get(pair)
        if preset is None:
            raise ConfigError(f"unknown pair {pair!r}; choose from {sorted(PAIR_PRESETS)}")
        if preset["min_n"] is not None and (n is None or n < preset["min_n"]):
            raise ConfigError(f"pair {pair!r} needs --n >= {preset['min_n']}")
        kappa = preset["kappa"](n)
        desc = {"pair": pair, "n": n}
    elif kappa_arg is not None:
        kappa = _fraction(kappa_arg)
        if kappa <= 0:
            raise ConfigError("kappa must be positive")
        desc = {"kappa": str(kappa)}
    else:
        raise ConfigError("need --pair or --kappa")

    epsilon = _resolve(args, toml_cfg, "epsilon", 1e-7, float)
    f_min = _resolve(args, toml_cfg, "f_min", -1.0, float)
    f_max = _resolve(args, toml_cfg, "f_max", 1.0, float)
    k_max = _resolve(args, toml_cfg, "kmax", 1000, int)
    tol = _resolve(args, toml_cfg, "tol", 1e-6, float)
    constant = reduction_constant(kappa)
    params = TransferParams(kappa, epsilon, f_min, f_max)
    config = {
        **desc,
        "epsilon": epsilon,
        "f_min": f_min,
        "f_max": f_max,
        "kmax": k_max,
        "tol": tol,
    }
    lines = [
        f"reduction constant 1/(2 kappa + 1) = {constant} (kappa = {Fraction(kappa)})",
        f"monotone radius r0 = {params.r0:.12g}",
        f"eps' = {params.eps_prime:.6g}",
    ]

    c_sigma_path = _resolve(args, toml_cfg, "c_sigma", None)
    c_x_path = _resolve(args, toml_cfg, "c_x", None)
    if c_sigma_path or c_x_path:
        if not (c_sigma_path and c_x_path):
            raise ConfigError("supply both --c-sigma and --c-x or neither")
        const = _resolve(args, toml_cfg, "const", params.eps_prime, float)
        seq_s = _load_json(c_sigma_path)
        seq_x = _load_json(c_x_path)
        report = reduction_identity_check(seq_s, seq_x, kappa, const, tol)
        payload = {"constant": str(constant), "identity": report.to_json()}
        lines.append(
            "file-based identity check: " + ("pass" if report.passed else "FAIL")
        )
        _emit("reduce", {**config, "c_sigma": c_sigma_path, "c_x": c_x_path,
                         "const": const}, payload, args.out, lines)
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED

    # synthetic pipeline: rank-2 critical torus base, iterated and lifted
    truncation = _resolve(args, toml_cfg, "truncation", _default_truncation(), _fraction)
    W = builtin("clifford_cp", 2)
    pearl = build_torus_complex(W, LocalSystem([1.0, 1.0]), 2 * kappa)
    base = pearl_to_filtered(pearl, base_action=0.3, truncation=truncation)
    unit = {"x0": NovikovScalar.one(pearl.lattice)}
    run = synthetic_transfer_run(base, unit, params, k_max=k_max, tol=tol)
    payload = {
        "constant": str(constant),
        "r0": params.r0,
        "eps_prime": params.eps_prime,
        "pipeline": run.to_json(),
    }
    lines.append(
        f"synthetic pipeline over k <= {k_max}: containment "
        + ("pass" if all(run.containment) else "FAIL")
        + ", homogenized identity "
        + ("pass" if run.report.passed else "FAIL")
        + f" (difference {run.report.homog_difference:.3e})"
    )
    _emit("reduce", config, payload, args.out, lines)
    return EXIT_OK if run.passed else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------
# axioms
# ----------------------------------------------------------------------


def cmd_axioms(args, toml_cfg) -> int:
    seeds = _resolve(args, toml_cfg, "seeds", 200, int)
    if seeds <= 0:
        raise ConfigError("--seeds must be positive")
    zero_diff = _resolve(args, toml_cfg, "zero_diff", 50, int)
    negative = bool(_resolve(args, toml_cfg, "negative_control", False))
    report = run_axiom_suite(
        seeds=seeds,
        zero_differential_instances=zero_diff,
        negative_control=negative,
    )
    config = {"seeds": seeds, "zero_diff": zero_diff, "negative_control": negative}
    lines = [
        f"oracle equivalence: {report.oracle_checked} checked, "
        f"{report.oracle_skipped} skipped, {len(report.oracle_failures)} failed",
        f"valuation/shift axioms: {report.axiom_checked} checked, "
        f"{len(report.axiom_failures)} failed",
        "all pass" if report.passed else "FAILURES present",
    ]
    _emit("axioms", config, report.to_json(), args.out, lines)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gysinkit",
        description="Novikov-field algebra, torus potentials, quantum splittings, "
        "Gysin chain checks, and filtered spectral transfer",
    )
    parser.add_argument("--version", action="version", version=f"gysinkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--config", help="TOML file with defaults for this command")

    p = sub.add_parser("crit", help="critical-point search for a potential")
    common(p)
    p.add_argument("--family", choices=BUILTIN_FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--poly", help="potential JSON file")
    p.add_argument("--grid-density", dest="grid_density", type=int)
    p.add_argument("--newton-tol", dest="newton_tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--dedupe-radius", dest="dedupe_radius", type=float)
    p.add_argument("--moduli", help="comma-separated start moduli")
    p.add_argument("--hessian-tol", dest="hessian_tol", type=float)

    p = sub.add_parser("split", help="idempotent splitting of a quantum algebra")
    common(p)
    p.add_argument("--cpn", type=int, help="projective space dimension n (h^{n+1} = T)")
    p.add_argument("--cyclic", help="cyclic presentation JSON file")
    p.add_argument("--table", help="table presentation JSON file")
    p.add_argument("--lattice", type=int, help="exponent lattice denominator")
    p.add_argument("--truncation", help="truncation order (rational)")
    p.add_argument("--tol", type=float, help="verification tolerance")

    p = sub.add_parser("gysin", help="chain maps, exactness, connecting class")
    common(p)
    p.add_argument("--pair", help="preset pairing: cpn, quadric, cp3_q2")
    p.add_argument("--n", type=int)
    p.add_argument("--base-poly", dest="base_poly")
    p.add_argument("--lift-poly", dest="lift_poly")
    p.add_argument("--rho", help="base local system JSON file")
    p.add_argument("--rho-tilde", dest="rho_tilde", help="lifted local system JSON file")
    p.add_argument("--euler", type=int, help="euler number of the circle bundle")
    p.add_argument("--weight", help="pearl area weight (rational)")
    p.add_argument("--rank-sweep", dest="rank_sweep", type=int)
    p.add_argument("--truncation", help="truncation order (rational)")

    p = sub.add_parser("reduce", help="reduction constant and filtered transfer")
    common(p)
    p.add_argument("--pair", help="preset pairing: cpn, quadric, cp3_q2")
    p.add_argument("--n", type=int)
    p.add_argument("--kappa", help="monotonicity constant (rational)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--f-min", dest="f_min", type=float)
    p.add_argument("--f-max", dest="f_max", type=float)
    p.add_argument("--kmax", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--c-sigma", dest="c_sigma", help="JSON list of base spectral numbers")
    p.add_argument("--c-x", dest="c_x", help="JSON list of lifted spectral numbers")
    p.add_argument("--const", type=float, help="bounded-difference constant")
    p.add_argument("--truncation", help="truncation order (rational)")

    p = sub.add_parser("axioms", help="seeded filtered-module property suites")
    common(p)
    p.add_argument("--seeds", type=int)
    p.add_argument("--zero-diff", dest="zero_diff", type=int)
    p.add_argument("--negative-control", dest="negative_control", action="store_true",
                   default=None)

    return parser


COMMANDS = {
    "crit": cmd_crit,
    "split": cmd_split,
    "gysin": cmd_gysin,
    "reduce": cmd_reduce,
    "axioms": cmd_axioms,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        toml_cfg = _load_toml(args.config)
        return COMMANDS[args.command](args, toml_cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
