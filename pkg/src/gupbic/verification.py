"""Cross-checks between the closed-form/WKB machinery and the oracle integrator.

Each check returns a CheckResult with the measured number and its threshold so
reports stay machine-readable; the CLI ``verify`` command and the acceptance
suite both run these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import characteristic_roots, exact_constant_basis
from .core import (
    Harmonic,
    InfiniteWell,
    Linear,
    PhysicalSetup,
    nondimensionalize,
)
from .errors import GupBicError
from .matcher import StateFunction, solve_well
from .oracle import (
    decaying_subspace_dimension,
    integrate,
    momentum_rep_linear,
    residual,
    wronskian,
    wronskian_drift,
)

ELECTRON_MASS = 9.10956e-31
REFERENCE_HALF_WIDTH = 1e-10
REFERENCE_BETA = 1e47


def reference_well_setup(beta: float = REFERENCE_BETA) -> PhysicalSetup:
    return PhysicalSetup(mass=ELECTRON_MASS, beta=beta, potential=InfiniteWell(a=REFERENCE_HALF_WIDTH))


def beta_for_epsilon(epsilon: float, length_scale: float, hbar: float = 1.054571817e-34) -> float:
    """Invert eps = 2 (beta/3) hbar^2 / L^2."""
    return 1.5 * epsilon * length_scale**2 / hbar**2


def linear_setup_for(epsilon: float, mass: float = ELECTRON_MASS, energy_scale: float = 1e-18) -> PhysicalSetup:
    """Linear potential with the canonical scale tuned to the given E_c, eps."""
    hbar = 1.054571817e-34
    length = hbar / math.sqrt(2.0 * mass * energy_scale)
    slope = energy_scale / length
    return PhysicalSetup(
        mass=mass, beta=beta_for_epsilon(epsilon, length), potential=Linear(slope=slope)
    )


def harmonic_setup_for(epsilon: float, mass: float = ELECTRON_MASS, energy_scale: float = 1e-18) -> PhysicalSetup:
    """Harmonic oscillator with E_c = hbar*omega/2 tuned to the given E_c, eps."""
    hbar = 1.054571817e-34
    omega = 2.0 * energy_scale / hbar
    length = math.sqrt(hbar / (mass * omega))
    return PhysicalSetup(
        mass=mass, beta=beta_for_epsilon(epsilon, length), potential=Harmonic(omega=omega)
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    comparison: str = "<="
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": float(self.measured),
            "threshold": float(self.threshold),
            "comparison": self.comparison,
            **({"detail": self.detail} if self.detail else {}),
        }


def _result(name: str, measured: float, threshold: float, comparison: str = "<=", **detail) -> CheckResult:
    if comparison == "<=":
        ok = measured <= threshold
    elif comparison == ">=":
        ok = measured >= threshold
    elif comparison == "==":
        ok = measured == threshold
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return CheckResult(
        name=name, passed=ok, measured=measured, threshold=threshold,
        comparison=comparison, detail=detail,
    )


def check_wronskian_constancy(
    n_cases: int = 20, seed: int = 20240811, rtol: float = 1e-11
) -> CheckResult:
    """Abel invariant: trace A = 0, so W must be constant along x."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    kinds = ["well", "linear", "harmonic"]
    for i in range(n_cases):
        kind = kinds[i % 3]
        eps = float(10.0 ** rng.uniform(-1.6, 0.3))
        if kind == "well":
            setup = reference_well_setup(beta=beta_for_epsilon(eps, REFERENCE_HALF_WIDTH))
            e = float(rng.uniform(0.5, 8.0))
            problem = nondimensionalize(setup)
            anchor, span = 0.0, 1.0
        elif kind == "linear":
            setup = linear_setup_for(eps)
            problem = nondimensionalize(setup)
            e = float(rng.uniform(0.5, 6.0))
            anchor, span = 0.6 * e, min(1.5, 0.5 * e + 0.8)
        else:
            setup = harmonic_setup_for(eps)
            problem = nondimensionalize(setup)
            e = float(rng.uniform(0.5, 6.0))
            anchor, span = 0.0, min(1.5, math.sqrt(e))
        # keep the frame condition number within det accuracy
        mu1 = characteristic_roots(problem.epsilon, e).mu1
        span = min(span, 4.0 / mu1 + 0.2)
        xs = np.linspace(anchor - span, anchor + span, 9)
        if problem.kind == "linear":
            xs = xs[xs > 0.05]
        drift = wronskian_drift(problem, e, xs, anchor=anchor)
        worst = max(worst, drift)
    return _result("wronskian_constancy", worst, 1e-8, cases=n_cases)


def check_exact_well_oracle_agreement(
    setup: PhysicalSetup | None = None, rtol: float = 1e-11
) -> CheckResult:
    """Closed-form well solutions vs integration from identical initial data."""
    if setup is None:
        setup = reference_well_setup()
    problem = nondimensionalize(setup)
    worst = 0.0
    for e in (2.918779290241783, 1.638, 16.38):
        roots = characteristic_roots(problem.epsilon, e)
        basis = exact_constant_basis(roots)
        state = StateFunction(np.array([0.05, 0.4, 0.7, 0.55]), basis)
        traj = integrate(problem, e, state.derivatives(-1.0, order=3), -1.0, 1.0, rtol=rtol)
        xs = np.linspace(-1.0, 1.0, 201)
        scale = max(abs(state.value(x)) for x in xs)
        err = max(abs(traj.phi_at(x) - state.value(x)) for x in xs) / scale
        worst = max(worst, err)
    return _result("exact_well_oracle_agreement", worst, 1e-8)


def check_residual_exact(setup: PhysicalSetup | None = None) -> CheckResult:
    if setup is None:
        setup = reference_well_setup()
    problem = nondimensionalize(setup)
    e = 2.918779290241783
    roots = characteristic_roots(problem.epsilon, e)
    basis = exact_constant_basis(roots)
    state = StateFunction(np.array([0.2, 0.3, 0.6, 0.7]), basis)
    grid = np.linspace(-0.99, 0.99, 101)
    return _result("residual_exact_basis", residual(state, problem, e, grid), 1e-10)


def check_residual_negative_control(setup: PhysicalSetup | None = None) -> CheckResult:
    """Corrupting a solution must blow the residual up (test of the test)."""
    if setup is None:
        setup = reference_well_setup()
    problem = nondimensionalize(setup)
    e = 2.918779290241783
    roots = characteristic_roots(problem.epsilon, e)
    basis = exact_constant_basis(roots)
    kap = roots.kappa
    state = StateFunction(np.array([0.0, 0.0, math.sin(kap), math.cos(kap)]), basis)

    class Corrupted:
        def derivatives(self, x, order=3):
            d = state.derivatives(x, order=order)
            d[0] += 0.01 * x
            if order >= 1:
                d[1] += 0.01
            return d

    grid = np.linspace(-0.99, 0.99, 101)
    return _result(
        "residual_negative_control", residual(Corrupted(), problem, e, grid), 1e-2, comparison=">="
    )


def check_momentum_representation(setup: PhysicalSetup | None = None, energy_si: float | None = None) -> CheckResult:
    """First-order momentum-space solution: residual, antiderivative, dimensions."""
    if setup is None:
        setup = linear_setup_for(0.01)
    problem = nondimensionalize(setup)
    if energy_si is None:
        energy_si = problem.energy_to_si(2.0)
    sol = momentum_rep_linear(setup, energy_si)
    pts = np.linspace(-6.0, 6.0, 100)
    res = max(sol.ode_residual(p) for p in pts)
    anti = sol.phase_quadrature_check(np.linspace(-4.0, 4.0, 9))
    # finite-difference cross-check of the analytic derivative
    h = 1e-6
    fd_worst = 0.0
    for p in np.linspace(-3.0, 3.0, 11):
        fd = (sol(p + h) - sol(p - h)) / (2.0 * h)
        fd_worst = max(fd_worst, abs(fd - sol.derivative(p)) / max(abs(sol.derivative(p)), 1e-30))
    w = wronskian(problem, 2.0, 0.8, anchor=0.8)
    measured = max(res, anti)
    return _result(
        "momentum_representation",
        measured,
        1e-10,
        momentum_dimension=sol.dimension,
        position_dimension=4 if abs(w) > 1e-6 else 0,
        wronskian_abs=float(abs(w)),
        fd_derivative_agreement=fd_worst,
    )


def check_decaying_dimensions(standard: bool = False) -> CheckResult:
    """Bounded-subspace dimension: 2 per side (fourth order), 1 per side (standard)."""
    expected = 1 if standard else 2
    eps = 0.02
    results = {}
    lin = nondimensionalize(linear_setup_for(eps))
    results["linear:+inf"] = decaying_subspace_dimension(lin, 2.0, "+inf", standard=standard)
    har = nondimensionalize(harmonic_setup_for(eps))
    results["harmonic:+inf"] = decaying_subspace_dimension(har, 1.7, "+inf", standard=standard)
    results["harmonic:-inf"] = decaying_subspace_dimension(har, 1.7, "-inf", standard=standard)
    worst = max(abs(v - expected) for v in results.values())
    return _result(
        "decaying_subspace_dimension" + ("_standard" if standard else ""),
        float(worst),
        0.0,
        expected=expected,
        dimensions={k: int(v) for k, v in results.items()},
    )


def check_well_sine_recovery(setup: PhysicalSetup | None = None) -> CheckResult:
    """At the special energies one normalized state is the wall-to-wall sine."""
    from .spectrum import well_special_energies

    if setup is None:
        setup = reference_well_setup()
    problem = nondimensionalize(setup)
    worst = 0.0
    for se in well_special_energies(setup, 3):
        sol = solve_well(problem, se.energy_dimensionless)
        kap = se.k * math.pi / 2.0
        xs = np.linspace(-1.0, 1.0, 301)
        errs = []
        for st in sol.states:
            vals = np.array([st.value(x) for x in xs])
            ref = np.sin(kap * (xs + 1.0))
            sign = 1.0 if abs(np.max(vals.real + ref)) >= abs(np.max(vals.real - ref)) else -1.0
            errs.append(float(np.max(np.abs(sign * vals - ref))))
        worst = max(worst, min(errs))
    return _result("well_sine_recovery", worst, 1e-8)


def standard_harmonic_mismatch(problem, energy: float) -> float:
    """Two-sided-decay matching defect for the second-order (beta = 0) equation.

    Launches the decaying solution from each far side, meets at x = 0, and
    returns the normalized Wronskian of the two trajectories: zero exactly at
    the standard levels e = 1, 3, 5, ... (natural units), O(1) in between.
    """
    from .oracle import integrate_standard

    x_far = math.sqrt(energy) + 4.0
    r = math.sqrt(x_far**2 - energy)
    left = integrate_standard(problem, energy, [1.0, -r], x_far, 0.0)
    right = integrate_standard(problem, energy, [1.0, +r], -x_far, 0.0)
    lv, rv = left.state_at(0.0), right.state_at(0.0)
    det = lv[0] * rv[1] - rv[0] * lv[1]
    return float((det / (np.linalg.norm(lv) * np.linalg.norm(rv))).real)


def run_verification(setup: PhysicalSetup, rtol: float = 1e-11) -> list[CheckResult]:
    """The check battery for the CLI verify command."""
    checks: list[CheckResult] = []
    checks.append(check_wronskian_constancy(n_cases=9, rtol=rtol))
    checks.append(check_exact_well_oracle_agreement(rtol=rtol))
    checks.append(check_residual_exact())
    checks.append(check_residual_negative_control())
    checks.append(check_momentum_representation())
    standard_mode = setup.beta == 0.0
    try:
        checks.append(check_decaying_dimensions(standard=standard_mode))
    except GupBicError as exc:
        checks.append(
            CheckResult(
                name="decaying_subspace_dimension",
                passed=False,
                measured=math.nan,
                threshold=0.0,
                detail={"error": str(exc)},
            )
        )
    if isinstance(setup.potential, InfiniteWell) and setup.beta > 0.0:
        checks.append(check_well_sine_recovery(setup))
    return checks
