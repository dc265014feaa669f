"""Grid discretization, eigenpairs, splitting, and localization observables.

Second-order central differences with Dirichlet walls. All quadrature uses
uniform weight h per interior node, i.e. the trapezoidal rule on the closed box
with the implicit zero boundary values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure
from .potential import FleaSpec, PotentialSpec, eval_potential


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 interior points")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be below x_max")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n + 1)

    @cached_property
    def points(self) -> np.ndarray:
        """Interior nodes; the walls carry Dirichlet zeros and are not stored."""
        return np.linspace(self.x_min, self.x_max, self.n + 2)[1:-1]


def default_grid(spec: PotentialSpec, flea: FleaSpec | None = None, n: int = 4000) -> Grid:
    """Symmetric box keeping walls far from both the wells and the flea.

    Double well: half-width max(3a, |b|+c+2). Other kinds get a fixed generous box
    (their states are centered at the origin).
    """
    if spec.kind == "double_well":
        half = 3.0 * spec.a
    else:
        half = 6.0 / math.sqrt(spec.omega)
    if flea is not None:
        half = max(half, abs(flea.b) + flea.c + 2.0)
    return Grid(x_min=-half, x_max=half, n=n)


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    grid: Grid
    hbar: float
    diag: np.ndarray
    off: np.ndarray

    def norm_bound(self) -> float:
        """Row-sum upper bound for ||H||, used to scale residual tolerances."""
        pad = np.concatenate(([0.0], np.abs(self.off)))
        pad2 = np.concatenate((np.abs(self.off), [0.0]))
        return float(np.max(np.abs(self.diag) + pad + pad2))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out


def assemble_hamiltonian(grid: Grid, hbar: float, v_values: np.ndarray) -> TridiagonalHamiltonian:
    """diag = 2 hbar^2/h^2 + V_i, off-diagonal = -hbar^2/h^2."""
    v_values = np.asarray(v_values, dtype=float)
    if v_values.shape != (grid.n,):
        raise ValueError("potential values must match the grid")
    k = hbar**2 / grid.h**2
    diag = 2.0 * k + v_values
    off = np.full(grid.n - 1, -k)
    return TridiagonalHamiltonian(grid=grid, hbar=hbar, diag=diag, off=off)


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    hbar: float
    amplitudes: np.ndarray  # complex, unit L2 norm under h-weight quadrature

    @classmethod
    def from_values(cls, grid: Grid, hbar: float, values: np.ndarray) -> "WaveFunction":
        amp = np.asarray(values, dtype=complex)
        nrm = math.sqrt(float(np.sum(np.abs(amp) ** 2)) * grid.h)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero function")
        return cls(grid=grid, hbar=hbar, amplitudes=amp / nrm)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) * self.grid.h)

    def inner(self, other: "WaveFunction") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.h)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mass_split(self) -> tuple[float, float]:
        """(mass at x<0, mass at x>0); a node at exactly 0 is shared half/half."""
        x = self.grid.points
        rho = self.density() * self.grid.h
        left = float(np.sum(rho[x < 0]))
        right = float(np.sum(rho[x > 0]))
        on_axis = float(np.sum(rho[x == 0]))
        return left + 0.5 * on_axis, right + 0.5 * on_axis

    def value_at(self, x: float) -> complex:
        """Linear interpolation between the bracketing nodes (walls are zero)."""
        pts = self.grid.points
        if x <= self.grid.x_min or x >= self.grid.x_max:
            return 0.0
        amp = self.amplitudes
        i = int(np.searchsorted(pts, x))
        if i == 0:
            lo_x, lo_v = self.grid.x_min, 0.0
            hi_x, hi_v = pts[0], amp[0]
        elif i == len(pts):
            lo_x, lo_v = pts[-1], amp[-1]
            hi_x, hi_v = self.grid.x_max, 0.0
        else:
            lo_x, lo_v = pts[i - 1], amp[i - 1]
            hi_x, hi_v = pts[i], amp[i]
        w = (x - lo_x) / (hi_x - lo_x)
        return complex((1.0 - w) * lo_v + w * hi_v)


@dataclass(frozen=True)
class Spectrum:
    hbar: float
    eigenvalues: np.ndarray
    states: tuple[WaveFunction, ...]


def _sign_normalize(grid: Grid, vec: np.ndarray) -> np.ndarray:
    """Make integral of psi over x>0 nonnegative; tie broken on x<0."""
    x = grid.points
    s_right = float(np.sum(vec[x > 0])) * grid.h
    if abs(s_right) > 1e-12:
        return vec if s_right > 0 else -vec
    s_left = float(np.sum(vec[x < 0])) * grid.h
    return vec if s_left >= 0 else -vec


def lowest_eigenpairs(h_op: TridiagonalHamiltonian, k: int) -> Spectrum:
    """k smallest eigenpairs via LAPACK bisection + inverse iteration."""
    n = h_op.grid.n
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    try:
        w, v = eigh_tridiagonal(h_op.diag, h_op.off, select="i", select_range=(0, k - 1))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    tol = 1e-9 * h_op.norm_bound()
    states = []
    for i in range(k):
        vi = v[:, i]
        res = float(np.linalg.norm(h_op.matvec(vi) - w[i] * vi))
        if res > tol:
            raise ConvergenceFailure(
                f"eigenpair {i} residual {res:.3e} exceeds {tol:.3e}", index=i
            )
        vi = _sign_normalize(h_op.grid, vi)
        states.append(WaveFunction.from_values(h_op.grid, h_op.hbar, vi))
    return Spectrum(hbar=h_op.hbar, eigenvalues=np.array(w), states=tuple(states))


def solve_spectrum(
    spec: PotentialSpec,
    hbar: float,
    k: int = 2,
    grid: Grid | None = None,
    flea: FleaSpec | None = None,
    n: int = 4000,
) -> Spectrum:
    """Assemble-and-solve convenience wrapper (flea, if given, fully switched on)."""
    if grid is None:
        grid = default_grid(spec, flea, n=n)
    v = eval_potential(spec, grid.points, flea=flea)
    return lowest_eigenpairs(assemble_hamiltonian(grid, hbar, v), k)


def splitting(spec: PotentialSpec, hbar: float, grid: Grid | None = None, n: int = 4000) -> float:
    """Delta = E_1 - E_0 of the unperturbed double well."""
    if spec.kind != "double_well":
        raise ValueError("splitting is defined for the double well")
    spectrum = solve_spectrum(spec, hbar, k=2, grid=grid, n=n)
    return float(spectrum.eigenvalues[1] - spectrum.eigenvalues[0])


def tunneling_time(hbar: float, delta: float) -> float:
    return 2.0 * math.pi * hbar / delta


def auto_refine_n(
    spec: PotentialSpec,
    flea: FleaSpec | None = None,
    hbar: float = 0.2,
    start_n: int = 4000,
    rel_tol: float = 0.01,
    max_n: int = 64000,
) -> int:
    """Double n until the splitting at the probe hbar moves by < rel_tol."""
    n = start_n
    prev = splitting(spec, hbar, grid=default_grid(spec, flea, n=n))
    while n * 2 <= max_n:
        cur = splitting(spec, hbar, grid=default_grid(spec, flea, n=2 * n))
        if abs(cur - prev) <= rel_tol * abs(prev):
            return n
        n *= 2
        prev = cur
    return n


def localized_combinations(spectrum: Spectrum) -> tuple[WaveFunction, WaveFunction]:
    """(psi_plus, psi_minus) = (psi0 +- psi1)/sqrt(2), renormalized.

    With the sign convention of lowest_eigenpairs, psi_plus concentrates on x > 0.
    """
    if len(spectrum.states) < 2:
        raise ValueError("need at least two states")
    s0, s1 = spectrum.states[0], spectrum.states[1]
    plus = WaveFunction.from_values(
        s0.grid, s0.hbar, (s0.amplitudes + s1.amplitudes) / math.sqrt(2.0)
    )
    minus = WaveFunction.from_values(
        s0.grid, s0.hbar, (s0.amplitudes - s1.amplitudes) / math.sqrt(2.0)
    )
    return plus, minus


@dataclass(frozen=True)
class LocalizationReport:
    ratio: float  # psi(a) / psi(-a), signed (real eigenfunctions)
    mass_left: float
    mass_right: float


def localization_ratio(psi: WaveFunction, spec: PotentialSpec) -> LocalizationReport:
    if spec.kind != "double_well":
        raise ValueError("localization ratio is defined for the double well")
    a = spec.a
    if not (psi.grid.x_min < -a and a < psi.grid.x_max):
        raise ValueError("grid does not contain both minima")
    num = psi.value_at(a).real
    den = psi.value_at(-a).real
    left, right = psi.mass_split()
    ratio = math.inf if den == 0.0 else num / den
    return LocalizationReport(ratio=ratio, mass_left=left, mass_right=right)
