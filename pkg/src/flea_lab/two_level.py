"""Two-level reduction of the perturbed double well.

Basis convention: index 0 is the left-localized state, index 1 the
right-localized one.  The unperturbed Hamiltonian is -(Delta/2) sigma_x, so
the even combination (1, 1)/sqrt(2) is the ground state at -Delta/2 and the
splitting between the doublet levels is exactly Delta.  A perturbation that
raises one well by delta adds delta to that well's diagonal entry.

Includes the exact sudden-quench propagator, a fixed-step RK4 integrator for
cross-checks, and two stochastic perturbation models (white-noise Brownian
phase kicks and Poisson sign flips) with a closed-form dephasing average for
validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NormBlowup

__all__ = [
    "TwoLevelModel",
    "Eigensystem",
    "ground_doublet",
    "p_left",
    "p_right",
    "quench_evolution",
    "closed_form_p_left",
    "integrate_quench",
    "brownian_ensemble",
    "brownian_path",
    "dephasing_p_left",
    "poisson_path",
    "poisson_ensemble",
]

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class TwoLevelModel:
    """Doublet with splitting delta_split and a flea of strength delta_flea.

    ``side`` says which well the flea raises.  ``delta_flea`` may be
    negative (a well-deepening flea).
    """

    delta_split: float
    delta_flea: float
    side: str
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.delta_split <= 0.0:
            raise ValueError(f"splitting must be positive, got {self.delta_split}")
        if self.hbar <= 0.0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")

    def hamiltonian(self) -> np.ndarray:
        h = -0.5 * self.delta_split * _SIGMA_X
        if self.side == "left":
            h = h + np.diag([self.delta_flea, 0.0]).astype(complex)
        else:
            h = h + np.diag([0.0, self.delta_flea]).astype(complex)
        return h

    @property
    def rabi_energy(self) -> float:
        """Energy gap sqrt(delta^2 + Delta^2) between the perturbed levels."""
        return math.hypot(self.delta_flea, self.delta_split)

    def eigensystem(self) -> "Eigensystem":
        """Closed-form perturbed doublet, continuous through delta_flea = 0."""
        delta = self.delta_flea
        r = self.rabi_energy
        norm = math.sqrt(2.0 * r * (r + delta))
        if self.side == "left":
            ground = np.array([self.delta_split, delta + r], dtype=complex) / norm
            excited = np.array([delta + r, -self.delta_split], dtype=complex) / norm
        else:
            ground = np.array([delta + r, self.delta_split], dtype=complex) / norm
            excited = np.array([self.delta_split, -(delta + r)], dtype=complex) / norm
        return Eigensystem(
            e_minus=0.5 * (delta - r),
            e_plus=0.5 * (delta + r),
            ground=ground,
            excited=excited,
        )


@dataclass(frozen=True)
class Eigensystem:
    e_minus: float
    e_plus: float
    ground: np.ndarray
    excited: np.ndarray

    @property
    def splitting(self) -> float:
        return self.e_plus - self.e_minus


def ground_doublet() -> tuple[np.ndarray, np.ndarray]:
    """Unperturbed (even ground, odd excited) pair."""
    even = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    odd = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)
    return even, odd


def p_left(state: np.ndarray) -> float:
    return float(abs(state[..., 0]) ** 2)


def p_right(state: np.ndarray) -> float:
    return float(abs(state[..., 1]) ** 2)


def _pauli_split(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Decompose a Hermitian 2x2 as c0*I + h_vec . sigma."""
    c0 = 0.5 * float(np.real(h[0, 0] + h[1, 1]))
    hx = float(np.real(h[0, 1]))
    hy = -float(np.imag(h[0, 1]))
    hz = 0.5 * float(np.real(h[0, 0] - h[1, 1]))
    return c0, np.array([hx, hy, hz])


def quench_evolution(model: TwoLevelModel, psi0: np.ndarray, t: float) -> np.ndarray:
    """Exact evolution exp(-i H t / hbar) psi0 for the time-independent model."""
    c0, hv = _pauli_split(model.hamiltonian())
    r = float(np.linalg.norm(hv))
    phase = np.exp(-1j * c0 * t / model.hbar)
    if r == 0.0:
        return phase * np.asarray(psi0, dtype=complex)
    n = hv / r
    n_sigma = n[0] * _SIGMA_X + n[1] * np.array([[0, -1j], [1j, 0]]) + n[2] * _SIGMA_Z
    angle = r * t / model.hbar
    u = phase * (math.cos(angle) * np.eye(2) - 1j * math.sin(angle) * n_sigma)
    return u @ np.asarray(psi0, dtype=complex)


def closed_form_p_left(model: TwoLevelModel, t) -> np.ndarray:
    """Left-well occupation after a sudden quench from the even doublet ground.

    P_L(t) = 1/2 +/- (delta Delta / 2 R^2) [cos(R t / hbar) - 1], with the +
    sign for a flea on the left well and - for the right, R the Rabi energy.
    """
    t = np.asarray(t, dtype=float)
    delta = model.delta_flea
    big_delta = model.delta_split
    r_sq = delta**2 + big_delta**2
    amp = 0.5 * delta * big_delta / r_sq
    if model.side == "right":
        amp = -amp
    return 0.5 + amp * (np.cos(np.sqrt(r_sq) * t / model.hbar) - 1.0)


def integrate_quench(
    model: TwoLevelModel,
    psi0: np.ndarray,
    t_end: float,
    dt: float,
    record_every: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step RK4 integration of the quench dynamics.

    Returns (times, states, p_left) sampled every ``record_every`` steps
    (the initial and final states are always included).  Exists as an
    independent cross-check of the exact propagator.
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("dt and t_end must be positive")
    n_steps = int(round(t_end / dt))
    a = -1j / model.hbar * model.hamiltonian()
    psi = np.asarray(psi0, dtype=complex).copy()
    times = [0.0]
    states = [psi.copy()]
    for step in range(1, n_steps + 1):
        k1 = a @ psi
        k2 = a @ (psi + 0.5 * dt * k1)
        k3 = a @ (psi + 0.5 * dt * k2)
        k4 = a @ (psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            states.append(psi.copy())
    ts = np.array(times)
    st = np.array(states)
    return ts, st, np.abs(st[:, 0]) ** 2


def _drift_matrix(model: TwoLevelModel, noise: float) -> np.ndarray:
    """Deterministic part of the white-noise model: -(i/hbar) H0 - noise^2/2."""
    return (
        1j * model.delta_split / (2.0 * model.hbar) * _SIGMA_X
        - 0.5 * noise**2 * np.eye(2)
    )


def _check_step_size(noise: float, dt: float) -> None:
    """Reject step sizes whose expected norm correction breaches 1e-3."""
    expected = 0.5 * noise**2 * dt
    if expected >= 1e-3:
        raise NormBlowup(
            f"expected per-step norm correction {expected:.2e} >= 1e-3; "
            f"reduce dt for noise amplitude {noise}"
        )


def brownian_ensemble(
    model: TwoLevelModel,
    psi0: np.ndarray,
    dt: float,
    t_end: float,
    n_paths: int,
    seed: int,
    noise: float | None = None,
    record_every: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Euler-Maruyama paths of the white-noise flea, renormalized each step.

    The state obeys d Phi = [-(i/hbar) H0 - noise^2/2] Phi dt
    - i noise sigma_z Phi dB.  ``noise`` defaults to the model's flea
    strength.  Returns (times, mean left occupation, final states).  Raises
    NormBlowup when dt is too coarse for the noise amplitude (expected
    per-step norm correction noise^2 dt / 2 must stay below 1e-3), or if a
    step norm actually explodes.
    """
    if noise is None:
        noise = model.delta_flea
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("dt and t_end must be positive")
    _check_step_size(noise, dt)
    rng = np.random.default_rng(seed)
    n_steps = int(round(t_end / dt))
    states = np.tile(np.asarray(psi0, dtype=complex), (n_paths, 1))
    drift_t = _drift_matrix(model, noise).T
    sqrt_dt = math.sqrt(dt)
    times = [0.0]
    means = [float(np.mean(np.abs(states[:, 0]) ** 2))]
    flip = np.array([1.0, -1.0])
    for step in range(1, n_steps + 1):
        db = rng.normal(0.0, sqrt_dt, size=(n_paths, 1))
        states = states + dt * (states @ drift_t) - 1j * noise * db * (states * flip)
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > 0.5):
            raise NormBlowup(
                f"step norm exploded at step {step}; reduce dt for "
                f"noise amplitude {noise}"
            )
        states /= norms[:, None]
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            means.append(float(np.mean(np.abs(states[:, 0]) ** 2)))
    return np.array(times), np.array(means), states


def brownian_path(
    model: TwoLevelModel,
    psi0: np.ndarray,
    dt: float,
    t_end: float,
    seed: int,
    noise: float | None = None,
    record_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Single white-noise trajectory; returns (times, states)."""
    if noise is None:
        noise = model.delta_flea
    _check_step_size(noise, dt)
    rng = np.random.default_rng(seed)
    n_steps = int(round(t_end / dt))
    psi = np.asarray(psi0, dtype=complex).copy()
    drift = _drift_matrix(model, noise)
    sqrt_dt = math.sqrt(dt)
    flip = np.array([1.0, -1.0])
    times = [0.0]
    states = [psi.copy()]
    for step in range(1, n_steps + 1):
        db = rng.normal(0.0, sqrt_dt)
        psi = psi + dt * (drift @ psi) - 1j * noise * db * (psi * flip)
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > 0.5:
            raise NormBlowup(
                f"step norm exploded at step {step}; reduce dt for "
                f"noise amplitude {noise}"
            )
        psi /= norm
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            states.append(psi.copy())
    return np.array(times), np.array(states)


def dephasing_p_left(model: TwoLevelModel, t, rate: float | None = None) -> np.ndarray:
    """Ensemble-averaged left occupation for a left-localized initial state.

    Averaging the white-noise model gives a dephasing channel with rate
    gamma = 2 noise^2 (for the Poisson model, gamma = 2 * jump rate); the
    population difference then solves a damped oscillator with frequency
    Delta/hbar, giving a closed form to validate the sampled ensembles.
    """
    t = np.asarray(t, dtype=float)
    gamma = 2.0 * (model.delta_flea**2 if rate is None else rate)
    omega = model.delta_split / model.hbar
    half = 0.5 * gamma
    if omega > half:
        om = math.sqrt(omega**2 - half**2)
        rz = np.exp(-half * t) * (np.cos(om * t) + (half / om) * np.sin(om * t))
    elif omega < half:
        om = math.sqrt(half**2 - omega**2)
        rz = np.exp(-half * t) * (np.cosh(om * t) + (half / om) * np.sinh(om * t))
    else:
        rz = np.exp(-half * t) * (1.0 + half * t)
    return 0.5 * (1.0 + rz)


def _rotation(model: TwoLevelModel, tau: float) -> np.ndarray:
    """Exact free propagator between jumps: exp(+i Delta tau sigma_x / 2 hbar)."""
    angle = 0.5 * model.delta_split * tau / model.hbar
    return math.cos(angle) * np.eye(2, dtype=complex) + 1j * math.sin(angle) * _SIGMA_X


def poisson_path(
    model: TwoLevelModel,
    psi0: np.ndarray,
    rate: float,
    t_end: float,
    seed: int,
    record_dt: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Event-driven trajectory of the Poisson flea.

    Between jumps the state rotates exactly under the unperturbed
    Hamiltonian; at each Poisson arrival it picks up a sigma_z flip.
    Returns (grid times, states on the grid, jump times).
    """
    if rate < 0.0 or record_dt <= 0.0 or t_end <= 0.0:
        raise ValueError("rate must be >= 0 and record_dt, t_end positive")
    rng = np.random.default_rng(seed)
    psi = np.asarray(psi0, dtype=complex).copy()
    n_grid = int(round(t_end / record_dt))
    times = np.arange(n_grid + 1) * record_dt
    states = np.empty((n_grid + 1, 2), dtype=complex)
    states[0] = psi
    jumps: list[float] = []
    t = 0.0
    next_jump = rng.exponential(1.0 / rate) if rate > 0.0 else math.inf
    for i in range(1, n_grid + 1):
        t_next = times[i]
        while next_jump <= t_next:
            psi = _rotation(model, next_jump - t) @ psi
            psi = _SIGMA_Z @ psi
            psi /= np.linalg.norm(psi)
            t = next_jump
            jumps.append(t)
            next_jump = t + rng.exponential(1.0 / rate)
        psi = _rotation(model, t_next - t) @ psi
        t = t_next
        states[i] = psi
    return times, states, np.array(jumps)


def poisson_ensemble(
    model: TwoLevelModel,
    psi0: np.ndarray,
    rate: float,
    t_end: float,
    n_paths: int,
    seed: int,
    record_dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean left occupation over independent Poisson-flea trajectories."""
    acc = None
    times = None
    for k in range(n_paths):
        times, states, _ = poisson_path(model, psi0, rate, t_end, seed + k, record_dt)
        pl = np.abs(states[:, 0]) ** 2
        acc = pl if acc is None else acc + pl
    return times, acc / n_paths
