"""Time-dependent propagation of box wave functions.

The propagator is Crank-Nicolson with the Hamiltonian evaluated at the step
midpoint, which keeps the scheme second order for the ramped perturbation
and norm-preserving to solver roundoff.  Each step solves one tridiagonal
system via a banded LU factorization.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import StepRejected, UnclassifiedOutcome
from .potential import FleaSpec, PotentialSpec, RampSpec, eval_potential
from .spectral import Grid, WaveFunction, default_grid, solve_spectrum

__all__ = [
    "PropagationConfig",
    "TrajectoryPoint",
    "Trajectory",
    "propagate",
    "adiabatic_fidelity",
    "BornTally",
    "born_ensemble",
]


@dataclass(frozen=True)
class PropagationConfig:
    """Step size, final time, and the times at which snapshots are kept."""

    dt: float
    t_end: float
    snapshots: tuple[float, ...] = ()
    norm_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.dt == 0.0:
            raise ValueError("dt must be nonzero")
        if self.t_end * self.dt <= 0.0:
            raise ValueError("t_end must have the same sign as dt")
        for t in self.snapshots:
            if not (min(0.0, self.t_end) <= t <= max(0.0, self.t_end)):
                raise ValueError(f"snapshot time {t} outside [0, {self.t_end}]")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class TrajectoryPoint:
    """State and scalar observables recorded at one snapshot time."""

    t: float
    psi: WaveFunction
    p_left: float
    p_right: float
    norm: float
    energy: float


@dataclass(frozen=True)
class Trajectory:
    points: tuple[TrajectoryPoint, ...]
    config: PropagationConfig

    @property
    def final(self) -> TrajectoryPoint:
        return self.points[-1]

    def norm_drift(self) -> float:
        """Largest deviation of any recorded norm from the initial norm."""
        norms = [pt.norm for pt in self.points]
        return max(abs(n - norms[0]) for n in norms)


def _ramp_factor(ramp: RampSpec | None, t: float) -> float:
    if ramp is None:
        return 1.0
    return ramp.factor(t)


def propagate(
    psi0: WaveFunction,
    spec: PotentialSpec,
    config: PropagationConfig,
    flea: FleaSpec | None = None,
    ramp: RampSpec | None = None,
) -> Trajectory:
    """Evolve a state under V (+ optionally ramped flea) with Crank-Nicolson.

    Snapshots are recorded at the step boundary nearest each requested time;
    the initial and final states are always recorded.  A per-step norm check
    raises StepRejected if the solver update moves the norm by more than
    ``config.norm_tol`` relative (Crank-Nicolson keeps it at roundoff, so a
    trigger means the linear solve went bad, not mere discretization error).
    """
    if ramp is not None:
        if flea is None:
            raise ValueError("a ramp schedule requires a flea to ramp")
        if config.dt <= 0.0:
            raise ValueError("ramped propagation requires positive dt")
        if config.dt > ramp.T / 1000.0:
            raise ValueError(
                f"dt={config.dt} too coarse for ramp time {ramp.T}; "
                f"need dt <= T/1000"
            )
    grid = psi0.grid
    hbar = psi0.hbar
    x = grid.points
    v0 = eval_potential(spec, x)
    dv = eval_potential(spec, x, flea=flea) - v0 if flea is not None else None
    k = hbar * hbar / (grid.h * grid.h)
    dt = config.dt
    n_steps = config.n_steps

    snap_steps: dict[int, float] = {}
    for t_req in config.snapshots:
        snap_steps[int(round(t_req / dt))] = t_req

    psi = psi0.amplitudes.astype(complex).copy()
    h = grid.h
    n = x.size
    ab = np.empty((3, n), dtype=complex)
    alpha = 1j * dt / (2.0 * hbar)
    off = alpha * (-k)

    def observables(step: int) -> TrajectoryPoint:
        t = step * dt
        vt = v0 if dv is None else v0 + _ramp_factor(ramp, t) * dv
        norm_sq = float(np.sum(np.abs(psi) ** 2)) * h
        hpsi = (2.0 * k + vt) * psi
        hpsi[:-1] += -k * psi[1:]
        hpsi[1:] += -k * psi[:-1]
        energy = float(np.real(np.vdot(psi, hpsi))) * h / norm_sq
        density = np.abs(psi) ** 2
        left = float(np.sum(density[x < 0.0])) * h
        right = float(np.sum(density[x > 0.0])) * h
        on_zero = density[x == 0.0]
        if on_zero.size:
            half = 0.5 * float(np.sum(on_zero)) * h
            left += half
            right += half
        state = WaveFunction(grid, hbar, psi.copy())
        return TrajectoryPoint(
            t=t,
            psi=state,
            p_left=left / norm_sq,
            p_right=right / norm_sq,
            norm=float(np.sqrt(norm_sq)),
            energy=energy,
        )

    points = [observables(0)]  # the initial point is always kept
    norm_prev = points[0].norm

    for step in range(1, n_steps + 1):
        t_mid = (step - 0.5) * dt
        vt = v0 if dv is None else v0 + _ramp_factor(ramp, t_mid) * dv
        diag = 1.0 + alpha * (2.0 * k + vt)
        rhs = (1.0 - alpha * (2.0 * k + vt)) * psi
        rhs[:-1] -= off * psi[1:]
        rhs[1:] -= off * psi[:-1]
        ab[0, 1:] = off
        ab[1, :] = diag
        ab[2, :-1] = off
        psi = solve_banded((1, 1), ab, rhs)
        norm_now = float(np.sqrt(np.sum(np.abs(psi) ** 2) * h))
        if abs(norm_now - norm_prev) > config.norm_tol * max(norm_prev, 1e-300):
            raise StepRejected(
                f"norm moved from {norm_prev:.12g} to {norm_now:.12g} in step "
                f"{step} (t={step * dt:.6g}); the tridiagonal solve is suspect"
            )
        norm_prev = norm_now
        if step in snap_steps or step == n_steps:
            points.append(observables(step))

    return Trajectory(points=tuple(points), config=config)


def adiabatic_fidelity(trajectory: Trajectory, target: WaveFunction) -> float:
    """|<target, psi(t_end)>|^2 against a unit-normalized target state."""
    final = trajectory.final.psi
    overlap = target.inner(final)
    return float(abs(overlap) ** 2) / (trajectory.final.norm**2)


@dataclass(frozen=True)
class BornTally:
    """Classified outcomes of a family of ramped-flea runs."""

    outcomes: tuple[str, ...]
    threshold: float
    members: tuple[FleaSpec, ...] = field(default=(), repr=False)

    @property
    def left(self) -> int:
        return sum(1 for o in self.outcomes if o == "left")

    @property
    def right(self) -> int:
        return sum(1 for o in self.outcomes if o == "right")

    @property
    def unclassified(self) -> int:
        return sum(1 for o in self.outcomes if o == "unclassified")


def _classify(p_left: float, p_right: float, threshold: float) -> str:
    if p_left >= threshold:
        return "left"
    if p_right >= threshold:
        return "right"
    return "unclassified"


def born_ensemble(
    spec: PotentialSpec,
    fleas: tuple[FleaSpec, ...],
    ramp: RampSpec,
    config: PropagationConfig,
    hbar: float,
    n: int = 4000,
    threshold: float = 0.8,
    grid: Grid | None = None,
    threads: int = 1,
) -> BornTally:
    """Ramp each flea of a family onto the same initial ground state.

    All members share one grid (sized for the widest flea) and the
    unperturbed ground state as the initial condition; each run is
    classified left/right by final well occupation against ``threshold``.
    Emits an UnclassifiedOutcome warning when no member crosses it.
    """
    if grid is None:
        widest = max(fleas, key=lambda f: abs(f.b) + f.c)
        grid = default_grid(spec, flea=widest, n=n)
    spectrum = solve_spectrum(spec, hbar, k=1, grid=grid)
    psi0 = spectrum.states[0]

    def run(flea: FleaSpec) -> str:
        traj = propagate(psi0, spec, config, flea=flea, ramp=ramp)
        return _classify(traj.final.p_left, traj.final.p_right, threshold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = tuple(pool.map(run, fleas))
    else:
        outcomes = tuple(run(f) for f in fleas)

    if outcomes and all(o == "unclassified" for o in outcomes):
        warnings.warn(
            f"no ensemble member crossed the classification threshold "
            f"{threshold}",
            UnclassifiedOutcome,
            stacklevel=2,
        )
    return BornTally(outcomes=outcomes, threshold=threshold, members=tuple(fleas))
