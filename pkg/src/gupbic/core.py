"""Physical setup, potentials and nondimensionalization.

The position-representation Schroedinger equation with a minimal length
(GUP deforming parameter beta, beta' = beta/3) is fourth order:

    (beta' hbar^4 / m) phi'''' - (hbar^2 / 2m) phi'' + (V - E) phi = 0.

SI magnitudes in this equation are extreme (hbar^2 ~ 1e-68), so every
numerical routine in this package works on the scaled form

    eps * phi'''' - phi'' + (v - e) phi = 0,      eps = 2 beta' hbar^2 / L_c^2,

with x = L_c * xt, E = E_c * e, E_c = hbar^2 / (2 m L_c^2).  SI units appear
only at the I/O boundary.

beta carries units of 1/momentum^2; that convention is inferred from
dimensional consistency of the deformed uncertainty relation
(beta [(dP)^2 + <P>^2] must be dimensionless) and the CLI accepts beta as the
bare number (e.g. 1e47).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import ConfigError, DomainError, InvalidSetupError

HBAR = 1.054571817e-34  # J*s

_TURNING_WINDOW_HALF_WIDTH = 0.05  # in units of L_c; see basis module


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidSetupError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class InfiniteWell:
    """V = 0 on (-a, a), hard walls outside."""

    a: float  # half-width, m

    def __post_init__(self):
        if not (_require_finite("a", self.a) > 0):
            raise InvalidSetupError(f"well half-width must be > 0, got {self.a}")

    @property
    def kind(self) -> str:
        return "well"

    def domain(self) -> tuple[float, float]:
        return (-self.a, self.a)

    def value(self, x: float) -> float:
        if not (-self.a < x < self.a):
            raise DomainError(f"x={x} outside well interior (-{self.a}, {self.a})")
        return 0.0


@dataclass(frozen=True)
class Linear:
    """V = L*x on (0, +inf), hard wall at x <= 0."""

    slope: float  # J/m

    def __post_init__(self):
        if not (_require_finite("L", self.slope) > 0):
            raise InvalidSetupError(f"linear slope must be > 0, got {self.slope}")

    @property
    def kind(self) -> str:
        return "linear"

    def domain(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def value(self, x: float) -> float:
        if x <= 0:
            raise DomainError(f"x={x} outside linear-potential domain (0, inf)")
        return self.slope * x


@dataclass(frozen=True)
class Harmonic:
    """V = 0.5 m omega^2 x^2 on all of R (mass supplied by the setup)."""

    omega: float  # rad/s

    def __post_init__(self):
        if not (_require_finite("omega", self.omega) > 0):
            raise InvalidSetupError(f"omega must be > 0, got {self.omega}")

    @property
    def kind(self) -> str:
        return "harmonic"

    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class TabulatedCustom:
    """Potential sampled at strictly increasing x (SI); monotone cubic interpolation."""

    xs: tuple[float, ...]
    vs: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if xs.size < 4 or xs.size != vs.size:
            raise InvalidSetupError("custom potential needs >= 4 (x, V) samples")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(vs)):
            raise InvalidSetupError("custom potential samples must be finite")
        if not np.all(np.diff(xs) > 0):
            raise InvalidSetupError("custom potential x samples must be strictly increasing")

    @property
    def kind(self) -> str:
        return "custom"

    def domain(self) -> tuple[float, float]:
        return (self.xs[0], self.xs[-1])


PotentialSpec = Union[InfiniteWell, Linear, Harmonic, TabulatedCustom]


@dataclass(frozen=True)
class PhysicalSetup:
    """Particle + GUP parameters + potential, all in SI."""

    mass: float  # kg
    beta: float  # 1/(kg m/s)^2
    potential: PotentialSpec
    hbar: float = HBAR

    def __post_init__(self):
        if not (_require_finite("mass", self.mass) > 0):
            raise InvalidSetupError(f"mass must be > 0, got {self.mass}")
        if not (_require_finite("beta", self.beta) >= 0):
            raise InvalidSetupError(f"beta must be >= 0, got {self.beta}")
        if not (_require_finite("hbar", self.hbar) > 0):
            raise InvalidSetupError(f"hbar must be > 0, got {self.hbar}")

    @property
    def beta_prime(self) -> float:
        # single source of truth: never stored independently
        return self.beta / 3.0

    def canonical_length_scale(self) -> float:
        """Scale that makes the dimensionless potential O(1).

        well -> a; linear -> (hbar^2 / 2mL)^(1/3) (quantum-bouncer scale);
        harmonic -> sqrt(hbar / m omega); custom -> half the sample span.
        """
        p = self.potential
        if isinstance(p, InfiniteWell):
            return p.a
        if isinstance(p, Linear):
            return (self.hbar**2 / (2.0 * self.mass * p.slope)) ** (1.0 / 3.0)
        if isinstance(p, Harmonic):
            return math.sqrt(self.hbar / (self.mass * p.omega))
        if isinstance(p, TabulatedCustom):
            return 0.5 * (p.xs[-1] - p.xs[0])
        raise InvalidSetupError(f"unknown potential {p!r}")


@dataclass(frozen=True)
class DimensionlessProblem:
    """Scaled coefficients of eps*phi'''' - phi'' + (v - e)*phi = 0.

    ``v_derivs(x)`` returns (v, v', v'', v''', v'''') at dimensionless x; the
    higher derivatives feed the WKB chain rules and the momentum-operator
    reduction.
    """

    epsilon: float
    v_derivs: Callable[[float], tuple[float, float, float, float, float]]
    length_scale: float  # m
    energy_scale: float  # J
    domain: tuple[float, float]  # dimensionless
    kind: str
    setup: PhysicalSetup = field(repr=False)

    def v(self, x: float) -> float:
        lo, hi = self.domain
        if not (lo < x < hi):
            raise DomainError(
                f"x={x} outside dimensionless domain ({lo}, {hi}); "
                "hard walls are boundary conditions, not potential values"
            )
        return self.v_derivs(x)[0]

    @property
    def momentum_scale(self) -> float:
        """p_c = hbar / L_c (SI momentum per dimensionless wavenumber unit)."""
        return self.setup.hbar / self.length_scale

    def energy_to_si(self, e: float) -> float:
        return e * self.energy_scale

    def energy_from_si(self, energy: float) -> float:
        return energy / self.energy_scale

    def length_to_si(self, x: float) -> float:
        return x * self.length_scale

    def length_from_si(self, x: float) -> float:
        return x / self.length_scale


def nondimensionalize(setup: PhysicalSetup, length_scale: float | None = None) -> DimensionlessProblem:
    """Rescale the fourth-order equation to dimensionless form.

    eps = 2 (beta/3) hbar^2 / L_c^2 and E_c = hbar^2 / (2 m L_c^2) exactly.
    """
    if length_scale is None:
        length_scale = setup.canonical_length_scale()
    length_scale = _require_finite("length_scale", length_scale)
    if length_scale <= 0:
        raise InvalidSetupError(f"length_scale must be > 0, got {length_scale}")

    hbar, m = setup.hbar, setup.mass
    epsilon = 2.0 * setup.beta_prime * hbar**2 / length_scale**2
    e_scale = hbar**2 / (2.0 * m * length_scale**2)
    p = setup.potential

    if isinstance(p, InfiniteWell):
        lo, hi = -p.a / length_scale, p.a / length_scale

        def v_derivs(x: float):
            return (0.0, 0.0, 0.0, 0.0, 0.0)

    elif isinstance(p, Linear):
        slope = p.slope * length_scale / e_scale
        lo, hi = 0.0, math.inf

        def v_derivs(x: float, _s=slope):
            return (_s * x, _s, 0.0, 0.0, 0.0)

    elif isinstance(p, Harmonic):
        curv = 0.5 * m * p.omega**2 * length_scale**2 / e_scale
        lo, hi = -math.inf, math.inf

        def v_derivs(x: float, _c=curv):
            return (_c * x * x, 2.0 * _c * x, 2.0 * _c, 0.0, 0.0)

    elif isinstance(p, TabulatedCustom):
        from scipy.interpolate import PchipInterpolator

        xs = np.asarray(p.xs) / length_scale
        vs = np.asarray(p.vs) / e_scale
        spline = PchipInterpolator(xs, vs)
        d1 = spline.derivative(1)
        d2 = spline.derivative(2)
        lo, hi = xs[0], xs[-1]

        def v_derivs(x: float, _s=spline, _d1=d1, _d2=d2):
            # cubic pieces: 3rd derivative piecewise constant, 4th is zero
            d3 = float(_s.derivative(3)(x))
            return (float(_s(x)), float(_d1(x)), float(_d2(x)), d3, 0.0)

    else:
        raise InvalidSetupError(f"unknown potential {p!r}")

    return DimensionlessProblem(
        epsilon=epsilon,
        v_derivs=v_derivs,
        length_scale=length_scale,
        energy_scale=e_scale,
        domain=(lo, hi),
        kind=p.kind,
        setup=setup,
    )


def potential_value(problem: DimensionlessProblem, x: float) -> float:
    """Dimensionless potential at dimensionless x (domain-checked)."""
    return problem.v(x)


# --- configuration files -----------------------------------------------------

_CONFIG_KEYS = {"mass", "beta", "potential", "a", "L", "omega", "custom_file", "hbar"}
_POTENTIAL_ALIASES = {
    "well": "well",
    "infinite_well": "well",
    "infinitewell": "well",
    "linear": "linear",
    "harmonic": "harmonic",
    "custom": "custom",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def load_custom_potential_csv(path: str | Path) -> TabulatedCustom:
    """Two-column CSV `x,V` in SI; a header row is permitted."""
    rows: list[tuple[float, float]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{path}: line {lineno}: expected 'x,V', got {raw!r}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ConfigError(f"{path}: line {lineno}: non-numeric sample {raw!r}") from None
    try:
        return TabulatedCustom(xs=tuple(x for x, _ in rows), vs=tuple(v for _, v in rows))
    except InvalidSetupError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def setup_from_entries(entries: dict[str, str], base_dir: str | Path = ".") -> PhysicalSetup:
    """Build a PhysicalSetup from parsed config entries."""

    def need(key: str) -> str:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}")
        return entries[key]

    def as_float(key: str, raw: str) -> float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: not a number: {raw!r}") from None

    kind_raw = need("potential").lower()
    if kind_raw not in _POTENTIAL_ALIASES:
        raise ConfigError(f"unknown potential {kind_raw!r}")
    kind = _POTENTIAL_ALIASES[kind_raw]

    try:
        if kind == "well":
            potential: PotentialSpec = InfiniteWell(a=as_float("a", need("a")))
        elif kind == "linear":
            potential = Linear(slope=as_float("L", need("L")))
        elif kind == "harmonic":
            potential = Harmonic(omega=as_float("omega", need("omega")))
        else:
            potential = load_custom_potential_csv(Path(base_dir) / need("custom_file"))

        return PhysicalSetup(
            mass=as_float("mass", need("mass")),
            beta=as_float("beta", need("beta")),
            potential=potential,
            hbar=as_float("hbar", entries.get("hbar", repr(HBAR))),
        )
    except InvalidSetupError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> PhysicalSetup:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return setup_from_entries(parse_config_text(text), base_dir=path.parent)
