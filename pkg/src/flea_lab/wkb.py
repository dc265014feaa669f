"""Semiclassical (WKB) quantization for generic double wells.

The machinery here treats an arbitrary double-well profile ``W = V + bump``
with four turning points at energy ``E``.  Phase integrals over the two
classically allowed regions and the barrier feed a quantization condition
whose two solution branches give the split level pair; the ratio of the
exterior WKB amplitudes (``D1/C4``) measures which well the state lives in.

All phase integrals use an endpoint-regularizing substitution
``x = x_t +/- s**2`` so the integrand of ``sqrt(|E - W|)`` is smooth at the
turning points, then hand the smooth pieces to the adaptive Simpson rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import loggamma

from .errors import (
    LevelAboveBarrier,
    NoBracket,
    PoleProximity,
    WrongTopology,
)
from .potential import FleaSpec, PotentialSpec, eval_potential
from .quadrature import adaptive_simpson

__all__ = [
    "TurningPoints",
    "WkbActions",
    "WkbLevels",
    "turning_points",
    "actions",
    "phi_tilde",
    "quantization_residual",
    "solve_levels",
    "localization_ratio_wkb",
    "connection_matrices",
    "barrier_matrix",
    "d1_c4_chain",
    "d1_c4_closed_form",
]


@dataclass(frozen=True)
class TurningPoints:
    """The four classical turning points x1 < x2 < x3 < x4 at a given energy."""

    x1: float
    x2: float
    x3: float
    x4: float
    energy: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)


@dataclass(frozen=True)
class WkbActions:
    """Phase integrals of one energy: well phases, barrier action, barrier phase."""

    theta1: float  # (1/hbar) * integral of p over the left allowed region
    theta2: float  # (1/hbar) * integral of p over the right allowed region
    bigk: float  # (1/hbar) * integral of |p| over the barrier
    phi: float  # barrier phase correction phi~(K)
    energy: float
    points: TurningPoints

    @property
    def delta(self) -> float:
        """Phase asymmetry between the wells (zero for a symmetric well)."""
        return self.theta1 - self.theta2


@dataclass(frozen=True)
class WkbLevels:
    """A split level pair solved from the two-branch quantization condition."""

    n: int
    e_minus: float
    e_plus: float
    actions_minus: WkbActions
    actions_plus: WkbActions
    ratio_minus: float
    ratio_plus: float

    @property
    def splitting(self) -> float:
        return self.e_plus - self.e_minus


def _w_callable(spec: PotentialSpec, flea: FleaSpec | None):
    """Total potential W(x) (bump fully on) as a scalar/array callable."""

    def w(x):
        return eval_potential(spec, np.asarray(x, dtype=float), flea=flea)

    return w


def _scan_halfwidth(spec: PotentialSpec, flea: FleaSpec | None, energy: float) -> float:
    if spec.kind == "double_well":
        outer = math.sqrt(spec.a**2 + 2.0 * math.sqrt(energy / spec.lam))
    elif spec.kind == "harmonic":
        outer = 2.0 * math.sqrt(energy) / spec.omega
    else:  # anharmonic: the harmonic bound overshoots, which is fine
        outer = 2.0 * math.sqrt(energy) / spec.omega
    half = 1.1 * outer + 0.5
    if flea is not None:
        lo, hi = flea.support
        half = max(half, abs(lo) + 0.5, abs(hi) + 0.5)
    return half


def turning_points(
    spec: PotentialSpec,
    energy: float,
    flea: FleaSpec | None = None,
    scan_points: int = 8001,
) -> TurningPoints:
    """Locate the four roots of W(x) = E for a double-well profile.

    Scans a symmetric interval wide enough to contain the outermost roots,
    brackets every sign change of W - E, and polishes each with Brent's
    method.  Raises WrongTopology when the number of crossings is not four
    (energy above the barrier, below both wells, or a bump-induced extra
    pocket at this energy).
    """
    if energy <= 0.0:
        raise WrongTopology(f"energy {energy} is not above the well minima")
    w = _w_callable(spec, flea)
    half = _scan_halfwidth(spec, flea, energy)
    xs = np.linspace(-half, half, scan_points)
    f = w(xs) - energy
    sign_change = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    if len(sign_change) != 4:
        raise WrongTopology(
            f"expected 4 turning points at energy {energy}, found "
            f"{len(sign_change)} crossings"
        )
    roots = []
    for i in sign_change:
        root = brentq(lambda x: w(x) - energy, xs[i], xs[i + 1], xtol=1e-13, rtol=8.9e-16)
        roots.append(float(root))
    roots.sort()
    return TurningPoints(roots[0], roots[1], roots[2], roots[3], energy)


def _phase_integral(w, lo: float, hi: float, energy: float, allowed: bool, tol: float) -> float:
    """integral of sqrt(|E - W|) over [lo, hi] with turning points at both ends.

    Splits at the midpoint and substitutes x = lo + s^2 (resp. x = hi - s^2)
    so the square-root vanishing at each endpoint becomes a smooth integrand.
    """
    mid = 0.5 * (lo + hi)

    def diff(x):
        v = energy - w(x)
        if not allowed:
            v = -v
        return max(v, 0.0)

    def left(s):
        return 2.0 * s * math.sqrt(diff(lo + s * s))

    def right(s):
        return 2.0 * s * math.sqrt(diff(hi - s * s))

    span = math.sqrt(mid - lo)
    return adaptive_simpson(left, 0.0, span, tol=tol) + adaptive_simpson(
        right, 0.0, math.sqrt(hi - mid), tol=tol
    )


def phi_tilde(bigk: float) -> float:
    """Barrier phase correction: arg Gamma(1/2 + iK/pi) + K/pi - (K/pi) ln(K/pi).

    Vanishes in both limits K -> 0 and K -> infinity.
    """
    if bigk < 0.0:
        raise ValueError(f"barrier action must be nonnegative, got {bigk}")
    e = bigk / math.pi
    if e == 0.0:  # includes subnormal K whose division underflows to zero
        return 0.0
    return float(loggamma(0.5 + 1j * e).imag) + e - e * math.log(e)


def actions(
    spec: PotentialSpec,
    energy: float,
    hbar: float,
    flea: FleaSpec | None = None,
    tol: float = 1e-11,
) -> WkbActions:
    """Evaluate the three phase integrals and barrier phase at one energy."""
    pts = turning_points(spec, energy, flea=flea)
    w = _w_callable(spec, flea)
    theta1 = _phase_integral(w, pts.x1, pts.x2, energy, True, tol) / hbar
    theta2 = _phase_integral(w, pts.x3, pts.x4, energy, True, tol) / hbar
    bigk = _phase_integral(w, pts.x2, pts.x3, energy, False, tol) / hbar
    return WkbActions(theta1, theta2, bigk, phi_tilde(bigk), energy, pts)


def quantization_residual(act: WkbActions) -> float:
    """Residual of sqrt(1 + e^{-2K}) = cos(theta1-theta2)/cos(theta1+theta2-pi+phi).

    Zero at quantized energies.  Raises PoleProximity when the cosine in the
    denominator is too small to divide through reliably.
    """
    denom = math.cos(act.theta1 + act.theta2 - math.pi + act.phi)
    if abs(denom) < 1e-8:
        raise PoleProximity(
            f"quantization denominator cos(...) = {denom:.3e} at energy "
            f"{act.energy}; residual form is singular here"
        )
    return math.sqrt(1.0 + math.exp(-2.0 * act.bigk)) - math.cos(act.delta) / denom


def _alpha(act: WkbActions) -> float:
    """Half-gap angle arccos[cos(delta) / sqrt(1 + e^{-2K})] in [0, pi]."""
    c = math.cos(act.delta) / math.sqrt(1.0 + math.exp(-2.0 * act.bigk))
    return math.acos(min(1.0, max(-1.0, c)))


def _branch_mismatch(act: WkbActions, n: int, branch: str) -> float:
    """Signed distance from the pole-free branch condition.

    The quantization condition is equivalent to
    theta1 + theta2 + phi = (2n+1) pi -/+ alpha, which has no poles and is
    monotone enough in energy to bracket and bisect.
    """
    total = act.theta1 + act.theta2 + act.phi
    target = (2 * n + 1) * math.pi
    if branch == "minus":
        target -= _alpha(act)
    elif branch == "plus":
        target += _alpha(act)
    else:
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    return total - target


def _barrier_top(spec: PotentialSpec, flea: FleaSpec | None) -> float:
    a = spec.a if spec.kind == "double_well" else 1.0
    xs = np.linspace(-a, a, 4001)
    return float(np.max(eval_potential(spec, xs, flea=flea)))


def solve_levels(
    spec: PotentialSpec,
    hbar: float,
    n: int = 0,
    flea: FleaSpec | None = None,
    scan_size: int = 160,
) -> WkbLevels:
    """Solve the two quantization branches for the n-th split level pair.

    Scans the energy window below the barrier top for a sign change of each
    branch condition, then polishes with Brent's method.  Raises
    LevelAboveBarrier when a branch has no root below the barrier (the level
    escapes the four-turning-point regime) and NoBracket when the scan finds
    no sign change despite the endpoint values admitting one.
    """
    if spec.kind != "double_well":
        raise WrongTopology(f"double-well potential required, got {spec.kind!r}")
    top = _barrier_top(spec, flea)
    e_lo = 1e-4 * top
    e_hi = 0.999 * top

    energies = np.linspace(e_lo, e_hi, scan_size)
    cache: dict[float, WkbActions] = {}

    def act_at(e: float) -> WkbActions:
        if e not in cache:
            cache[e] = actions(spec, e, hbar, flea=flea)
        return cache[e]

    def solve_branch(branch: str) -> float:
        f_prev = None
        e_prev = None
        for e in energies:
            try:
                f = _branch_mismatch(act_at(float(e)), n, branch)
            except WrongTopology:
                f_prev, e_prev = None, None
                continue
            if f_prev is not None and f_prev < 0.0 <= f:
                root = brentq(
                    lambda x: _branch_mismatch(act_at(float(x)), n, branch),
                    e_prev,
                    float(e),
                    xtol=1e-14,
                    rtol=8.9e-16,
                )
                return float(root)
            f_prev, e_prev = f, float(e)
        if f_prev is not None and f_prev < 0.0:
            raise LevelAboveBarrier(
                f"branch {branch!r} of pair n={n} has no root below the "
                f"barrier top {top:.6g} at hbar={hbar}"
            )
        raise NoBracket(
            f"no bracketing interval for branch {branch!r} of pair n={n} "
            f"in ({e_lo:.3g}, {e_hi:.6g})"
        )

    e_minus = solve_branch("minus")
    e_plus = solve_branch("plus")
    act_minus = actions(spec, e_minus, hbar, flea=flea)
    act_plus = actions(spec, e_plus, hbar, flea=flea)
    return WkbLevels(
        n=n,
        e_minus=e_minus,
        e_plus=e_plus,
        actions_minus=act_minus,
        actions_plus=act_plus,
        ratio_minus=localization_ratio_wkb(act_minus, "minus"),
        ratio_plus=localization_ratio_wkb(act_plus, "plus"),
    )


def localization_ratio_wkb(act: WkbActions, branch: str) -> float:
    """Exterior amplitude ratio D1/C4 for one branch of a level pair.

    Closed form sin(delta) e^K -/+ sqrt(sin^2(delta) e^{2K} + 1), where the
    lower level ('minus' branch) takes the + root and the upper level
    ('plus' branch) the - root, evaluated in cancellation-free form.  For
    delta in [(2m-1) pi, (2m+1) pi] with m odd the ratio flips sign.

    Large ratio -> weight on the left well; near-zero -> right well;
    -/+ 1 at delta = 0 -> even/odd symmetric states.
    """
    x = math.sin(act.delta) * math.exp(min(act.bigk, 700.0))
    if branch == "minus":
        value = x + math.hypot(x, 1.0) if x >= 0.0 else 1.0 / (math.hypot(x, 1.0) - x)
    elif branch == "plus":
        value = -1.0 / (x + math.hypot(x, 1.0)) if x >= 0.0 else x - math.hypot(x, 1.0)
    else:
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    m = math.floor((act.delta + math.pi) / (2.0 * math.pi))
    return -value if m % 2 else value


def d1_c4_closed_form(delta: float, bigk: float, branch: str) -> float:
    """Closed-form D1/C4 from raw (delta, K) without a potential behind them."""
    fake = WkbActions(delta, 0.0, bigk, phi_tilde(bigk), 0.0, TurningPoints(0, 0, 0, 0, 0))
    return localization_ratio_wkb(fake, branch)


def connection_matrices() -> dict[str, np.ndarray]:
    """Turning-point connection matrices for WKB coefficients.

    Keys: 'left_to_allowed' maps (C, D) forbidden-side coefficients at a
    left-hand turning point to (A, B) on the allowed side;
    'left_to_forbidden' is its inverse pair, and 'right_*' the analogues at
    a right-hand turning point.  Each pair multiplies to the identity.
    """
    q = math.sqrt(0.5) * (1.0 + 1.0j)  # e^{i pi/4}
    return {
        "left_to_allowed": q * np.array([[0.5, -1.0j], [-0.5j, 1.0]]),
        "left_to_forbidden": np.conj(q) * np.array([[1.0, 1.0j], [0.5j, 0.5]]),
        "right_to_allowed": q * np.array([[1.0, -0.5j], [-1.0j, 0.5]]),
        "right_to_forbidden": np.conj(q) * np.array([[0.5, 0.5j], [1.0j, 1.0]]),
    }


def barrier_matrix(bigk: float, phi: float) -> np.ndarray:
    """Transfer matrix across the barrier (unit determinant)."""
    root = math.sqrt(1.0 + math.exp(2.0 * bigk))
    ek = math.exp(bigk)
    return np.array(
        [
            [root * np.exp(-1j * phi), 1j * ek],
            [-1j * ek, root * np.exp(1j * phi)],
        ]
    )


def d1_c4_chain(theta1: float, theta2: float, bigk: float, phi: float) -> tuple[complex, complex]:
    """D1/C4 via the full connection chain, as two expressions.

    Starting from a decaying tail on each side, propagating through the
    turning points and across the barrier yields two expressions for D1/C4
    (one per matrix row); they agree exactly when (theta1, theta2, K)
    satisfy the quantization condition, so their difference doubles as a
    quantization residual for tests.
    """
    root = math.sqrt(1.0 + math.exp(2.0 * bigk))
    ek = math.exp(bigk)
    first = 1j * (
        root * np.exp(-1j * (theta1 + theta2 + phi)) + ek * np.exp(-1j * (theta1 - theta2))
    )
    second = -1j * (
        root * np.exp(1j * (theta1 + theta2 + phi)) + ek * np.exp(1j * (theta1 - theta2))
    )
    return complex(first), complex(second)
