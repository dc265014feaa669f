"""Classical-mechanics baselines: orbits, barrier-hopping rates, passage times.

Hamiltonian convention H = p^2 + V(q) (mass 1/2), matching the quantum
operator -hbar^2 d^2/dx^2 + V.  Hamilton's equations are q' = 2p,
p' = -V'(q); the overdamped noisy particle instead follows the gradient
flow dx = -V'(x) dt + sqrt(2 eps) dW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoTransitions
from .potential import FleaSpec, PotentialSpec

try:  # optional compiled kernel for the passage-time sampler
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

__all__ = [
    "leapfrog",
    "classical_energy",
    "eyring_kramers_time",
    "PassageTimes",
    "langevin_first_passages",
]


def _force(spec: PotentialSpec, flea: FleaSpec | None, q: np.ndarray) -> np.ndarray:
    f = -spec.v_prime(q)
    if flea is not None:
        f = f - flea.delta_v_prime(q)
    return f


def classical_energy(spec: PotentialSpec, p, q, flea: FleaSpec | None = None):
    """H = p^2 + V(q) (+ flea bump), conserved along leapfrog orbits."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = spec.v(q)
    if flea is not None:
        v = v + flea.delta_v(q)
    return p * p + v


def leapfrog(
    spec: PotentialSpec,
    p0: float,
    q0: float,
    dt: float,
    n_steps: int,
    flea: FleaSpec | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kick-drift-kick integration of q' = 2p, p' = -V'(q).

    Returns (times, momenta, positions) including the initial point; the
    scheme is symplectic, so the energy error stays bounded at O(dt^2).
    """
    if dt == 0.0 or n_steps < 1:
        raise ValueError("dt must be nonzero and n_steps >= 1")
    ps = np.empty(n_steps + 1)
    qs = np.empty(n_steps + 1)
    ps[0], qs[0] = p0, q0
    p, q = float(p0), float(q0)
    for i in range(1, n_steps + 1):
        p += 0.5 * dt * float(_force(spec, flea, np.asarray(q)))
        q += 2.0 * p * dt
        p += 0.5 * dt * float(_force(spec, flea, np.asarray(q)))
        ps[i], qs[i] = p, q
    return np.arange(n_steps + 1) * dt, ps, qs


def eyring_kramers_time(spec: PotentialSpec, epsilon: float) -> float:
    """Mean barrier-crossing time of the overdamped dynamics at temperature eps.

    2 pi / sqrt(V''(min) |V''(top)|) * exp(V(top)/eps) for the double well,
    asymptotically exact as eps -> 0.
    """
    if spec.kind != "double_well":
        raise ValueError("the crossing-time formula applies to the double well")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    curv_min = float(spec.v_double_prime(spec.a))
    curv_top = abs(float(spec.v_double_prime(0.0)))
    return 2.0 * math.pi / math.sqrt(curv_min * curv_top) * math.exp(
        spec.barrier_height / epsilon
    )


@dataclass(frozen=True)
class PassageTimes:
    """First-arrival times of the overdamped paths that made it across."""

    times: np.ndarray
    n_paths: int
    dt: float
    t_max: float

    @property
    def n_arrived(self) -> int:
        return int(self.times.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.times))


if _HAVE_NUMBA:

    @_njit(cache=False)
    def _passage_kernel(
        seed: int,
        x0: float,
        arrival: float,
        dt: float,
        noise: float,
        lam: float,
        a_sq: float,
        has_flea: bool,
        fb: float,
        fc: float,
        fd: float,
        max_steps: int,
    ) -> float:  # pragma: no cover - compiled
        np.random.seed(seed)
        x = x0
        for step in range(max_steps):
            force = -lam * x * (x * x - a_sq)
            if has_flea:
                z = x - fb
                if abs(z) < fc:
                    u = fc * fc - z * z
                    force -= fd * math.exp(1.0 / (fc * fc) - 1.0 / u) * (
                        -2.0 * z / (u * u)
                    )
            x += force * dt + noise * np.random.normal()
            if x > arrival:
                return (step + 1) * dt
        return -1.0


def _passages_numpy(
    spec: PotentialSpec,
    flea: FleaSpec | None,
    epsilon: float,
    n_paths: int,
    seed: int,
    dt: float,
    x0: float,
    arrival: float,
    max_steps: int,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = np.full(n_paths, x0)
    t_hit = np.full(n_paths, -1.0)
    alive = np.ones(n_paths, dtype=bool)
    noise = math.sqrt(2.0 * epsilon * dt)
    for step in range(max_steps):
        if not np.any(alive):
            break
        # Draw for every path each step so the stream (and hence each path)
        # is independent of how many have already arrived.
        dw = rng.standard_normal(n_paths)
        xa = x[alive]
        x[alive] = xa + _force(spec, flea, xa) * dt + noise * dw[alive]
        hit = alive & (x > arrival)
        t_hit[hit] = (step + 1) * dt
        alive &= ~hit
    return t_hit


def langevin_first_passages(
    spec: PotentialSpec,
    epsilon: float,
    n_paths: int,
    seed: int,
    dt: float = 5e-3,
    t_max: float | None = None,
    flea: FleaSpec | None = None,
    x0: float | None = None,
    arrival: float | None = None,
    min_arrivals: int = 10,
) -> PassageTimes:
    """Sample first passages from the left well to the right over the barrier.

    Euler-Maruyama on dx = -V'(x) dt + sqrt(2 eps) dW from x0 (default: the
    left minimum) until x exceeds ``arrival`` (default: a - 0.1).  Path k
    uses seed ``seed + k``, so runs with fleas supported beyond the arrival
    line reproduce the no-flea times bit for bit.  Raises NoTransitions when
    fewer than ``min_arrivals`` paths arrive within t_max.
    """
    if spec.kind != "double_well":
        raise ValueError("passage sampling is defined for the double well")
    if x0 is None:
        x0 = -spec.a
    if arrival is None:
        arrival = spec.a - 0.1
    if t_max is None:
        t_max = 50.0 * eyring_kramers_time(spec, epsilon)
    max_steps = int(math.ceil(t_max / dt))
    noise = math.sqrt(2.0 * epsilon * dt)

    if _HAVE_NUMBA and spec.kind == "double_well":
        lam = spec.lam
        a_sq = spec.a**2
        has_flea = flea is not None
        fb, fc, fd = (flea.b, flea.c, flea.d) if flea is not None else (0.0, 1.0, 0.0)
        hits = np.array(
            [
                _passage_kernel(
                    seed + k, x0, arrival, dt, noise, lam, a_sq, has_flea, fb, fc, fd, max_steps
                )
                for k in range(n_paths)
            ]
        )
    else:
        hits = _passages_numpy(
            spec, flea, epsilon, n_paths, seed, dt, x0, arrival, max_steps
        )

    times = hits[hits > 0.0]
    if times.size < min_arrivals:
        raise NoTransitions(
            f"only {times.size} of {n_paths} paths crossed within t_max={t_max:.3g}"
        )
    return PassageTimes(times=np.sort(times), n_paths=n_paths, dt=dt, t_max=t_max)
