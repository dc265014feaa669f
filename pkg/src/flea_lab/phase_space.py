"""Phase-space representations: coherent states, Husimi functions, disk masses.

The Husimi function is chi(p, q) = |<Phi_{p,q}, psi>|^2 with Phi_{p,q} the
standard coherent-state window renormalized on the finite box, so chi is
pointwise nonnegative with self-overlap peak 1.  The Liouville measure
dp dq / (2 pi hbar) lives in the PhaseGrid quadrature weights; with it, chi
integrates to 1 up to box/window truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import OverlappingDisks
from .spectral import WaveFunction

__all__ = [
    "PhaseGrid",
    "default_phase_grid",
    "coherent_state",
    "HusimiField",
    "husimi",
    "berezin_expectation",
    "ClassicalMeasureSummary",
    "classical_limit_summary",
]


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform rectangular grid in (p, q) with Liouville quadrature weights.

    The weights carry the measure dp dq / (2 pi hbar), so summing a Husimi
    field against them approximates its phase-space probability mass.
    """

    p_min: float
    p_max: float
    n_p: int
    q_min: float
    q_max: float
    n_q: int
    hbar: float

    def __post_init__(self) -> None:
        if self.p_max <= self.p_min or self.q_max <= self.q_min:
            raise ValueError("phase-space window must have positive extent")
        if self.n_p < 2 or self.n_q < 2:
            raise ValueError("phase grid needs at least 2 nodes per axis")
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")

    @cached_property
    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @cached_property
    def q_axis(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid cell weights times 1/(2 pi hbar), shape (n_p, n_q).

        They sum exactly to (p_max - p_min) * (q_max - q_min) / (2 pi hbar).
        """
        wp = np.full(self.n_p, self.dp)
        wp[0] *= 0.5
        wp[-1] *= 0.5
        wq = np.full(self.n_q, self.dq)
        wq[0] *= 0.5
        wq[-1] *= 0.5
        return np.outer(wp, wq) / (2.0 * np.pi * self.hbar)


def default_phase_grid(a: float, hbar: float, n_p: int = 201, n_q: int = 201) -> PhaseGrid:
    """Window p in [-2, 2], q in [-2a, 2a] sized to hold both wells."""
    return PhaseGrid(-2.0, 2.0, n_p, -2.0 * a, 2.0 * a, n_q, hbar)


def coherent_state(grid, hbar: float, p: float, q: float) -> WaveFunction:
    """Minimum-uncertainty wave packet centered at phase point (p, q).

    (pi hbar)^{-1/4} exp(-i p q / 2 hbar) exp(i p x / hbar)
    exp(-(x - q)^2 / 2 hbar), renormalized on the spatial box.
    """
    x = grid.points
    values = (
        (np.pi * hbar) ** -0.25
        * np.exp(-1j * p * q / (2.0 * hbar))
        * np.exp(1j * p * x / hbar)
        * np.exp(-((x - q) ** 2) / (2.0 * hbar))
    )
    return WaveFunction.from_values(grid, hbar, values)


@dataclass(frozen=True)
class HusimiField:
    """Husimi function sampled on a phase grid; values indexed [i_p, i_q]."""

    phase_grid: PhaseGrid
    hbar: float
    values: np.ndarray

    def integral(self) -> float:
        return float(np.sum(self.values * self.phase_grid.weights))

    def centroid(self) -> tuple[float, float]:
        """Husimi-weighted mean phase point (<p>, <q>)."""
        w = self.values * self.phase_grid.weights
        total = float(np.sum(w))
        p_mean = float(np.sum(w * self.phase_grid.p_axis[:, None])) / total
        q_mean = float(np.sum(w * self.phase_grid.q_axis[None, :])) / total
        return (p_mean, q_mean)


def husimi(psi: WaveFunction, phase_grid: PhaseGrid) -> HusimiField:
    """Husimi function of a box wave function on the given phase grid.

    Vectorized per q-column: the p-dependence of the coherent-state overlap
    is a single Fourier-like matrix applied to the Gaussian-windowed state,
    and the box normalization of the window depends on q only.
    """
    hbar = psi.hbar
    if abs(hbar - phase_grid.hbar) > 1e-12 * hbar:
        raise ValueError(
            f"state has hbar={hbar} but the phase grid was built for "
            f"hbar={phase_grid.hbar}"
        )
    x = psi.grid.points
    h = psi.grid.h
    amp = psi.amplitudes
    p_axis = phase_grid.p_axis
    q_axis = phase_grid.q_axis
    # conj(Phi) carries exp(-i p x / hbar); (p,q)-dependent global phases drop
    # out of |.|^2 and are omitted.
    phases = np.exp(-1j * np.outer(p_axis, x) / hbar)
    values = np.empty((phase_grid.n_p, phase_grid.n_q))
    for j, q in enumerate(q_axis):
        window = np.exp(-((x - q) ** 2) / (2.0 * hbar))
        norm_sq = float(np.sum(window * window)) * h  # box norm^2 of the window
        overlap = phases @ (window * amp * h)
        values[:, j] = (np.abs(overlap) ** 2) / norm_sq
    return HusimiField(phase_grid, hbar, values)


def berezin_expectation(psi: WaveFunction, f, phase_grid: PhaseGrid) -> float:
    """Phase-space average of a classical observable against the Husimi function.

    ``f`` is a callable f(p, q) accepting broadcast arrays, or a precomputed
    array shaped like the Husimi values.
    """
    field = husimi(psi, phase_grid)
    if callable(f):
        pp = phase_grid.p_axis[:, None]
        qq = phase_grid.q_axis[None, :]
        samples = np.broadcast_to(np.asarray(f(pp, qq), dtype=float), field.values.shape)
    else:
        samples = np.asarray(f, dtype=float)
        if samples.shape != field.values.shape:
            raise ValueError(
                f"observable array shape {samples.shape} does not match "
                f"phase grid shape {field.values.shape}"
            )
    return float(np.sum(field.values * samples * phase_grid.weights))


@dataclass(frozen=True)
class ClassicalMeasureSummary:
    """Husimi mass inside disks around the two wells, plus what is left over."""

    mass_left: float
    mass_right: float
    remainder: float
    total: float
    radius: float


def classical_limit_summary(field: HusimiField, a: float, radius: float | None = None) -> ClassicalMeasureSummary:
    """Husimi mass captured by disks of the given radius around (p, q) = (0, -/+ a).

    Raises OverlappingDisks when the two disks intersect (radius >= a).
    """
    if radius is None:
        radius = min(a / 2.0, 0.5)
    if 2.0 * radius >= 2.0 * a:
        raise OverlappingDisks(
            f"disks of radius {radius} around (0, -/+{a}) overlap; shrink the radius"
        )
    pp = field.phase_grid.p_axis[:, None]
    qq = field.phase_grid.q_axis[None, :]
    w = field.values * field.phase_grid.weights
    in_left = pp**2 + (qq + a) ** 2 <= radius**2
    in_right = pp**2 + (qq - a) ** 2 <= radius**2
    mass_left = float(np.sum(w[in_left]))
    mass_right = float(np.sum(w[in_right]))
    total = float(np.sum(w))
    return ClassicalMeasureSummary(
        mass_left=mass_left,
        mass_right=mass_right,
        remainder=total - mass_left - mass_right,
        total=total,
        radius=radius,
    )
