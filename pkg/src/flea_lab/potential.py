"""Potential family, flea perturbation, adiabatic ramp, and Agmon distances.

Everything here is pure and immutable. Conventions: H = -hbar^2 d^2/dx^2 + V
(mass 1/2); the double well is V(x) = lambda/4 (x^2 - a^2)^2 with a = omega/sqrt(lambda),
so V(0) = omega^2 a^2 / 4 and V''(+-a) = 2 omega^2. The harmonic well is
V = omega^2 x^2 / 4, which oscillates classically at angular frequency omega and
has quantum level spacing hbar*omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FleaCoversMinimum, NegativePotentialRegion
from .quadrature import adaptive_simpson

KINDS = ("harmonic", "anharmonic", "double_well")


@dataclass(frozen=True)
class PotentialSpec:
    """Parametric potential. `lam` is the quartic coupling (JSON key "lambda")."""

    kind: str = "double_well"
    omega: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.omega <= 0 or self.lam <= 0:
            raise ValueError("omega and lambda must be positive")

    @property
    def a(self) -> float:
        """Location of the double-well minima, omega/sqrt(lambda)."""
        return self.omega / math.sqrt(self.lam)

    @property
    def barrier_height(self) -> float:
        """V(0) for the double well: lambda a^4 / 4 = omega^2 a^2 / 4."""
        return 0.25 * self.lam * self.a**4

    def v(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            return 0.25 * self.omega**2 * x**2
        if self.kind == "anharmonic":
            return 0.25 * self.omega**2 * x**2 + 0.25 * self.lam * x**4
        return 0.25 * self.lam * (x**2 - self.a**2) ** 2

    def v_prime(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            return 0.5 * self.omega**2 * x
        if self.kind == "anharmonic":
            return 0.5 * self.omega**2 * x + self.lam * x**3
        return self.lam * x * (x**2 - self.a**2)

    def v_double_prime(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            return 0.5 * self.omega**2 * np.ones_like(x)
        if self.kind == "anharmonic":
            return 0.5 * self.omega**2 + 3.0 * self.lam * x**2
        return self.lam * (3.0 * x**2 - self.a**2)

    def zeros(self) -> tuple[float, ...]:
        """Zeros of V, where sqrt(V) has a kink (quadrature split points)."""
        if self.kind == "double_well":
            return (-self.a, self.a)
        return (0.0,)


@dataclass(frozen=True)
class FleaSpec:
    """Compactly supported smooth bump: d * exp(1/c^2 - 1/(c^2 - (x-b)^2)) on |x-b| < c."""

    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("flea half-width c must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return (self.b - self.c, self.b + self.c)

    def delta_v(self, x):
        x = np.asarray(x, dtype=float)
        z = x - self.b
        out = np.zeros_like(z)
        inside = np.abs(z) < self.c
        # The exponent diverges to -inf at the support edge; exp underflows to 0
        # smoothly, which is exactly the C-infinity matching we want.
        with np.errstate(divide="ignore", over="ignore"):
            zi = z[inside]
            out[inside] = self.d * np.exp(1.0 / self.c**2 - 1.0 / (self.c**2 - zi**2))
        return out

    def delta_v_prime(self, x):
        """Derivative of the bump; 0 outside the support, smooth at the edges."""
        x = np.asarray(x, dtype=float)
        z = x - self.b
        out = np.zeros_like(z)
        inside = np.abs(z) < self.c
        with np.errstate(divide="ignore", over="ignore"):
            zi = z[inside]
            u = self.c**2 - zi**2
            out[inside] = (
                self.d
                * np.exp(1.0 / self.c**2 - 1.0 / u)
                * (-2.0 * zi / (u * u))
            )
        return out


@dataclass(frozen=True)
class RampSpec:
    """Half-sine switching profile of duration T."""

    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("ramp duration T must be positive")

    def factor(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= self.T:
            return 1.0
        return math.sin(0.5 * math.pi * t / self.T)


@dataclass(frozen=True)
class FleaClassification:
    d_v: float
    d_v_prime: float
    d_v_double_prime: float
    case: str  # "edge" | "bump" | "invalid"


@dataclass(frozen=True)
class FleaSizeReport:
    satisfied: bool
    ratio: float
    threshold: float


def eval_potential(spec: PotentialSpec, x, flea: FleaSpec | None = None, ramp: RampSpec | None = None, t: float = 0.0):
    """V(x) plus the (possibly ramped) flea at time t.

    No flea: bare V. Flea without ramp: the flea is fully on (static perturbed
    potential). Flea with ramp: scaled by sin(pi t / 2T), clamped to [0, 1].
    """
    if ramp is not None and flea is None:
        raise ValueError("a ramp without a flea has nothing to switch on")
    v = spec.v(x)
    if flea is None:
        return v
    s = 1.0 if ramp is None else ramp.factor(t)
    if s == 0.0:
        return v
    return v + s * flea.delta_v(x)


def agmon_distance(spec: PotentialSpec, y: float, z: float, tol: float = 1e-10) -> float:
    """|integral_y^z sqrt(V)| by adaptive Simpson, split at the zeros of V."""
    if y == z:
        return 0.0
    lo, hi = (y, z) if y < z else (z, y)
    xs = np.linspace(lo, hi, 513)
    vmin = float(np.min(spec.v(xs)))
    if vmin < -1e-12:
        raise NegativePotentialRegion(f"V reaches {vmin:.3e} on [{lo}, {hi}]")

    def integrand(x: float) -> float:
        return math.sqrt(max(float(spec.v(x)), 0.0))

    pts = [lo] + [p for p in sorted(spec.zeros()) if lo < p < hi] + [hi]
    total = 0.0
    for aa, bb in zip(pts[:-1], pts[1:]):
        total += adaptive_simpson(integrand, aa, bb, tol=tol)
    return abs(total)


def _distance_to_support(spec: PotentialSpec, point: float, flea: FleaSpec) -> float:
    lo, hi = flea.support
    if lo <= point <= hi:
        return 0.0
    return agmon_distance(spec, point, lo if point < lo else hi)


def classify_flea(spec: PotentialSpec, flea: FleaSpec) -> FleaClassification:
    """Agmon-distance case analysis of a single flea on the double well.

    d_V' = 2 min over the two minima of the Agmon distance to the support,
    d_V'' = 2 max; edge means d_V' < d_V < d_V'', bump means d_V' < d_V'' < d_V.
    Anything else (symmetric placement, too-distant flea) is invalid.
    """
    if spec.kind != "double_well":
        raise ValueError("flea classification requires a double well")
    a = spec.a
    lo, hi = flea.support
    if lo < -a < hi or lo < a < hi:
        raise FleaCoversMinimum(f"flea support ({lo}, {hi}) covers a minimum at +-{a}")
    d_v = agmon_distance(spec, -a, a)
    d_left = _distance_to_support(spec, -a, flea)
    d_right = _distance_to_support(spec, a, flea)
    d_prime = 2.0 * min(d_left, d_right)
    d_dprime = 2.0 * max(d_left, d_right)
    # Symmetric placements give d' = d'' up to quadrature roundoff; call them invalid
    # rather than trusting a 1e-16 inequality.
    scale = max(d_dprime, d_v, 1e-300)
    if (d_dprime - d_prime) / scale < 1e-12:
        case = "invalid"
    elif d_prime < d_v < d_dprime:
        case = "edge"
    elif d_prime < d_dprime < d_v:
        case = "bump"
    else:
        case = "invalid"
    return FleaClassification(d_v=d_v, d_v_prime=d_prime, d_v_double_prime=d_dprime, case=case)


def flea_size_check(
    spec: PotentialSpec, flea: FleaSpec, hbar: float, ratio_threshold: float = 100.0
) -> FleaSizeReport:
    """Is |d| >> e^{-d_V/hbar}? Computed in logs so small hbar cannot overflow."""
    d_v = agmon_distance(spec, -spec.a, spec.a) if spec.kind == "double_well" else agmon_distance(
        spec, 0.0, 0.0
    )
    if flea.d == 0.0:
        return FleaSizeReport(satisfied=False, ratio=0.0, threshold=ratio_threshold)
    log_ratio = math.log(abs(flea.d)) + d_v / hbar
    ratio = math.exp(log_ratio) if log_ratio < 700.0 else math.inf
    return FleaSizeReport(
        satisfied=log_ratio >= math.log(ratio_threshold), ratio=ratio, threshold=ratio_threshold
    )


def to_config(spec: PotentialSpec, flea: FleaSpec | None = None, ramp: RampSpec | None = None) -> dict:
    """Serialize to the JSON config block {omega, lambda, kind, flea{b,c,d}, ramp{T}}."""
    block: dict = {"kind": spec.kind, "omega": spec.omega, "lambda": spec.lam}
    if flea is not None:
        block["flea"] = {"b": flea.b, "c": flea.c, "d": flea.d}
    if ramp is not None:
        block["ramp"] = {"T": ramp.T}
    return block


def from_config(block: dict) -> tuple[PotentialSpec, FleaSpec | None, RampSpec | None]:
    spec = PotentialSpec(
        kind=block.get("kind", "double_well"),
        omega=float(block.get("omega", 1.0)),
        lam=float(block.get("lambda", 1.0)),
    )
    flea = None
    if block.get("flea") is not None:
        fb = block["flea"]
        flea = FleaSpec(b=float(fb["b"]), c=float(fb["c"]), d=float(fb["d"]))
    ramp = None
    if block.get("ramp") is not None:
        ramp = RampSpec(T=float(block["ramp"]["T"]))
    return spec, flea, ramp
