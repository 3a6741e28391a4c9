"""Command-line front end.

Subcommands: wavefunction, dof-scan, spectrum, observability, momentum-check,
verify.  All user-facing energies and lengths are SI (dimensionless columns
are included for transparency).  Exit codes: 0 ok, 1 verification failure,
2 usage/config error, 3 numerical failure.  Errors are reported as a JSON
object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import (
    Harmonic,
    InfiniteWell,
    Linear,
    PhysicalSetup,
    load_config,
    load_custom_potential_csv,
    nondimensionalize,
)
from .errors import (
    ConfigError,
    GupBicError,
    InvalidSetupError,
    PreconditionError,
    WrongPotentialError,
)
from .matcher import bound_states
from .oracle import momentum_rep_linear, wronskian
from .output import RunManifest, TOOL_VERSION, config_digest, write_csv, write_json
from .spectrum import (
    critical_beta_exponent,
    dof_scan,
    ground_analog_state,
    observability,
    well_special_energies,
)
from .verification import run_verification

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def default_setup() -> PhysicalSetup:
    """Reference configuration: electron in a 1 Angstrom half-width well, beta = 1e47."""
    return PhysicalSetup(mass=9.10956e-31, beta=1e47, potential=InfiniteWell(a=1e-10))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", default=None, help="key = value config file")
    parser.add_argument("--out", metavar="DIR", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1, metavar="N")
    parser.add_argument("--tol", type=float, default=1e-11, metavar="X", help="integration tolerance")
    parser.add_argument("--potential", choices=["well", "linear", "harmonic", "custom"], default=None)
    parser.add_argument("--mass", type=float, default=None, metavar="KG")
    parser.add_argument("--beta", type=float, default=None, metavar="B")
    parser.add_argument("--a", type=float, default=None, metavar="M", help="well half-width")
    parser.add_argument("--L", type=float, default=None, metavar="J_PER_M", help="linear slope")
    parser.add_argument("--omega", type=float, default=None, metavar="RAD_S")
    parser.add_argument("--custom-file", default=None, metavar="CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gupbic",
        description=(
            "Bound states of the fourth-order minimal-length Schroedinger equation: "
            "wavefunctions, continuous-spectrum degeneracy scans, and observability analysis."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wavefunction", help="degenerate wavefunctions at one energy")
    _add_common(p)
    p.add_argument("--k", type=int, default=None, help="special-level index (well)")
    p.add_argument("--E", type=float, default=None, metavar="J", help="energy in joules")
    p.add_argument("--grid-n", type=int, default=801, metavar="N")
    p.add_argument("--no-orthogonalize", action="store_true", help="report the raw determinant-construction pair")

    p = sub.add_parser("dof-scan", help="degrees of freedom over an energy grid")
    _add_common(p)
    p.add_argument("--e-min", type=float, default=None, metavar="J")
    p.add_argument("--e-max", type=float, default=None, metavar="J")
    p.add_argument("--n", type=int, default=200, metavar="N")

    p = sub.add_parser("spectrum", help="special energies of the infinite well")
    _add_common(p)
    p.add_argument("--k-max", type=int, default=5, metavar="K")

    p = sub.add_parser("observability", help="momentum moments and the observability ratio")
    _add_common(p)

    p = sub.add_parser("momentum-check", help="momentum-representation dimension check (linear)")
    _add_common(p)
    p.add_argument("--E", type=float, default=None, metavar="J")

    p = sub.add_parser("verify", help="run the verification battery")
    _add_common(p)

    return parser


def _setup_from_args(args) -> tuple[PhysicalSetup, str | None]:
    if args.config is not None:
        setup = load_config(args.config)
        config_path = args.config
    else:
        setup = default_setup()
        config_path = None

    overrides = {
        k: getattr(args, k)
        for k in ("potential", "mass", "beta", "a", "L", "omega")
        if getattr(args, k, None) is not None
    }
    custom_file = getattr(args, "custom_file", None)
    if not overrides and custom_file is None:
        return setup, config_path

    kind = overrides.get("potential")
    if kind is None:
        kind = setup.potential.kind
    if kind == "well":
        a = overrides.get("a", setup.potential.a if isinstance(setup.potential, InfiniteWell) else None)
        if a is None:
            raise ConfigError("well potential needs --a")
        potential = InfiniteWell(a=a)
    elif kind == "linear":
        slope = overrides.get("L", setup.potential.slope if isinstance(setup.potential, Linear) else None)
        if slope is None:
            raise ConfigError("linear potential needs --L")
        potential = Linear(slope=slope)
    elif kind == "harmonic":
        omega = overrides.get("omega", setup.potential.omega if isinstance(setup.potential, Harmonic) else None)
        if omega is None:
            raise ConfigError("harmonic potential needs --omega")
        potential = Harmonic(omega=omega)
    else:
        if custom_file is None:
            raise ConfigError("custom potential needs --custom-file CSV")
        potential = load_custom_potential_csv(custom_file)

    setup = PhysicalSetup(
        mass=overrides.get("mass", setup.mass),
        beta=overrides.get("beta", setup.beta),
        potential=potential,
        hbar=setup.hbar,
    )
    return setup, config_path


def _manifest(args, setup: PhysicalSetup, config_path: str | None) -> RunManifest:
    fallback = repr(setup)
    return RunManifest(
        command=args.command,
        config_digest=config_digest(config_path, fallback=fallback),
        argv=list(getattr(args, "_argv", sys.argv[1:])),
    )


def cmd_wavefunction(args) -> int:
    setup, config_path = _setup_from_args(args)
    if args.grid_n < 2:
        raise ConfigError(f"--grid-n must be >= 2, got {args.grid_n}")
    if (args.k is None) == (args.E is None):
        raise ConfigError("give exactly one of --k or --E")
    problem = nondimensionalize(setup)
    if args.k is not None:
        if args.k < 1:
            raise ConfigError(f"--k must be >= 1, got {args.k}")
        if not isinstance(setup.potential, InfiniteWell):
            raise ConfigError("--k selects well special levels; use --E for this potential")
        energy_si = well_special_energies(setup, args.k)[-1].energy_si
    else:
        if args.E <= 0:
            raise ConfigError(f"--E must be > 0 J, got {args.E}")
        energy_si = args.E
    e_dim = problem.energy_from_si(energy_si)

    manifest = _manifest(args, setup, config_path)
    solution = bound_states(problem, e_dim, orthogonalize=not args.no_orthogonalize)

    rows = []
    si_norm = 1.0 / math.sqrt(problem.length_scale)  # phi_SI = phi_scaled / sqrt(L_c)
    for idx, state in enumerate(solution.states, start=1):
        for lo, hi in solution.regions:
            n_pts = max(int(args.grid_n * (hi - lo) / _total_span(solution.regions)), 2)
            for x in np.linspace(lo, hi, n_pts):
                val = state.value(float(x)) * si_norm
                rows.append(
                    (problem.length_to_si(float(x)), float(x), idx, val.real, val.imag)
                )
    out = Path(args.out)
    csv_path = write_csv(out / "wavefunctions.csv", ["x_SI", "x_tilde", "state_index", "re_phi", "im_phi"], rows)
    manifest.add_output(csv_path)
    manifest.write(out)
    print(
        f"wavefunction: E = {energy_si:.6e} J (e = {e_dim:.6f}), "
        f"degeneracy {solution.degeneracy}, wrote {csv_path}"
    )
    return EXIT_OK


def _total_span(regions) -> float:
    return sum(hi - lo for lo, hi in regions)


def cmd_dof_scan(args) -> int:
    setup, config_path = _setup_from_args(args)
    if args.n < 2:
        raise ConfigError(f"--n must be >= 2, got {args.n}")
    problem = nondimensionalize(setup)
    e_max = args.e_max if args.e_max is not None else 2e-17
    e_min = args.e_min if args.e_min is not None else e_max / args.n
    if not (0.0 < e_min < e_max):
        raise ConfigError(f"need 0 < --e-min < --e-max, got {e_min}, {e_max}")
    energies = np.linspace(e_min, e_max, args.n)

    manifest = _manifest(args, setup, config_path)
    scan = dof_scan(setup, energies, threads=max(args.threads, 1), problem=problem)

    out = Path(args.out)
    csv_path = write_csv(out / "scan.csv", ["E_SI", "E_dimensionless", "dof", "label"], scan.rows())
    payload = {
        "kind": scan.kind,
        "rows": [
            {"E_SI": r[0], "E_dimensionless": r[1], "dof": r[2], "label": r[3]}
            for r in scan.rows()
        ],
        "special_marks": [
            {"k": se.k, "E_SI": se.energy_si, "E_dimensionless": se.energy_dimensionless}
            for se in scan.special_marks
        ],
        "errors": {str(k): v for k, v in scan.errors.items()},
    }
    json_path = write_json(out / "scan.json", payload)
    manifest.add_output(csv_path)
    manifest.add_output(json_path)
    manifest.write(out)

    if scan.errors:
        raise PreconditionError(
            f"{len(scan.errors)} of {args.n} scan energies failed; see scan.json"
        )
    dofs = sorted(set(scan.dof))
    print(f"dof-scan: {args.n} energies, dof values {dofs}, wrote {csv_path}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    setup, config_path = _setup_from_args(args)
    if args.k_max < 1:
        raise ConfigError(f"--k-max must be >= 1, got {args.k_max}")
    manifest = _manifest(args, setup, config_path)
    specials = well_special_energies(setup, args.k_max)
    out = Path(args.out)
    csv_path = write_csv(
        out / "special_energies.csv",
        ["k", "E_SI", "E_dimensionless"],
        [(se.k, se.energy_si, se.energy_dimensionless) for se in specials],
    )
    manifest.add_output(csv_path)
    manifest.write(out)
    print(f"spectrum: k = 1..{args.k_max}, wrote {csv_path}")
    return EXIT_OK


def cmd_observability(args) -> int:
    setup, config_path = _setup_from_args(args)
    manifest = _manifest(args, setup, config_path)
    problem, state = ground_analog_state(setup)
    result = observability(setup, state=state, problem=problem)
    critical = critical_beta_exponent(setup, state=state, problem=problem)
    payload = {
        "potential": setup.potential.kind,
        "beta": setup.beta,
        "ratio": result.ratio,
        "verdict": result.verdict.value,
        "threshold": result.threshold,
        "moments": {
            "mean_P": result.moments.mean_P,
            "delta_P": result.moments.delta_P,
            "mean_p": result.moments.mean_p,
            "delta_p": result.moments.delta_p,
        },
        "critical_beta_exponent": critical.exponent,
        "critical_beta_exponent_refined": critical.refined_exponent,
    }
    if critical.discrepancy_note:
        payload["discrepancy_note"] = critical.discrepancy_note
    out = Path(args.out)
    json_path = write_json(out / "observability.json", payload)
    manifest.add_output(json_path)
    manifest.write(out)
    print(
        f"observability: r = {result.ratio:.4g} -> {result.verdict.value}; "
        f"critical beta exponent {critical.exponent:.2f}"
    )
    return EXIT_OK


def cmd_momentum_check(args) -> int:
    setup, config_path = _setup_from_args(args)
    if not isinstance(setup.potential, Linear):
        raise ConfigError("momentum-check needs the linear potential (--potential linear --L ...)")
    problem = nondimensionalize(setup)
    energy_si = args.E if args.E is not None else problem.energy_to_si(2.0)
    if energy_si <= 0:
        raise ConfigError(f"--E must be > 0 J, got {energy_si}")
    manifest = _manifest(args, setup, config_path)
    sol = momentum_rep_linear(setup, energy_si)
    pts = np.linspace(-6.0, 6.0, 100)
    res = max(sol.ode_residual(p) for p in pts)
    w = wronskian(problem, problem.energy_from_si(energy_si), 0.8, anchor=0.8)
    payload = {
        "E_SI": energy_si,
        "E_dimensionless": problem.energy_from_si(energy_si),
        "momentum_space_dimension": sol.dimension,
        "position_space_dimension": 4,
        "position_wronskian_abs": abs(w),
        "ode_residual_max": res,
        "beta_tilde": sol.beta_tilde,
        "momentum_scale_SI": sol.momentum_scale,
    }
    out = Path(args.out)
    json_path = write_json(out / "momentum_check.json", payload)
    manifest.add_output(json_path)
    manifest.write(out)
    print(
        f"momentum-check: solution spaces 1 (momentum) vs 4 (position, |W| = {abs(w):.3g}), "
        f"ODE residual {res:.2e}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    setup, config_path = _setup_from_args(args)
    if not (1e-14 <= args.tol <= 1e-6):
        raise ConfigError(f"--tol must lie in [1e-14, 1e-6], got {args.tol}")
    manifest = _manifest(args, setup, config_path)
    checks = run_verification(setup, rtol=args.tol)
    all_passed = all(c.passed for c in checks)
    payload = {
        "all_passed": all_passed,
        "checks": [c.as_dict() for c in checks],
    }
    out = Path(args.out)
    json_path = write_json(out / "verify.json", payload)
    manifest.add_output(json_path)
    manifest.write(out)
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.measured:.3e} {c.comparison} {c.threshold:.3e}")
    print(f"verify: {'all checks passed' if all_passed else 'FAILURES PRESENT'}, wrote {json_path}")
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


_COMMANDS = {
    "wavefunction": cmd_wavefunction,
    "dof-scan": cmd_dof_scan,
    "spectrum": cmd_spectrum,
    "observability": cmd_observability,
    "momentum-check": cmd_momentum_check,
    "verify": cmd_verify,
}


def _emit_error(kind: str, message: str, code: int) -> int:
    json.dump({"error": {"type": kind, "message": message, "exit_code": code}}, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = [str(a) for a in argv]
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InvalidSetupError, WrongPotentialError) as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_USAGE)
    except GupBicError as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except OSError as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
