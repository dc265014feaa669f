"""Two-level reduction: closed-form spectra, quench law, stochastic fleas."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flea_lab import (
    NormBlowup,
    TwoLevelModel,
    brownian_ensemble,
    brownian_path,
    closed_form_p_left,
    dephasing_p_left,
    ground_doublet,
    integrate_quench,
    p_left,
    p_right,
    poisson_ensemble,
    poisson_path,
    quench_evolution,
)

LEFT = np.array([1.0, 0.0], dtype=complex)
RIGHT = np.array([0.0, 1.0], dtype=complex)


def finite(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# model and eigensystem


def test_model_validation():
    with pytest.raises(ValueError):
        TwoLevelModel(delta_split=-1.0, delta_flea=0.1, side="left")
    with pytest.raises(ValueError):
        TwoLevelModel(delta_split=1.0, delta_flea=0.1, side="up")
    with pytest.raises(ValueError):
        TwoLevelModel(delta_split=1.0, delta_flea=0.1, side="left", hbar=0.0)


def test_unperturbed_eigensystem():
    model = TwoLevelModel(delta_split=0.8, delta_flea=0.0, side="left")
    eig = model.eigensystem()
    assert eig.e_minus == pytest.approx(-0.4)
    assert eig.e_plus == pytest.approx(0.4)
    even, odd = ground_doublet()
    assert abs(abs(np.vdot(eig.ground, even)) - 1.0) < 1e-12
    assert abs(abs(np.vdot(eig.excited, odd)) - 1.0) < 1e-12


def test_dominant_left_flea_grounds_on_the_right():
    model = TwoLevelModel(delta_split=0.01, delta_flea=1.0, side="left")
    eig = model.eigensystem()
    assert p_right(eig.ground) > 0.9999
    assert p_left(eig.excited) > 0.9999


def test_dominant_right_flea_grounds_on_the_left():
    model = TwoLevelModel(delta_split=0.01, delta_flea=1.0, side="right")
    eig = model.eigensystem()
    assert p_left(eig.ground) > 0.9999


@given(finite(-5.0, 5.0), finite(0.05, 3.0))
def test_gap_is_rabi_energy(delta, big_delta):
    for side in ("left", "right"):
        model = TwoLevelModel(delta_split=big_delta, delta_flea=delta, side=side)
        eig = model.eigensystem()
        assert eig.splitting == pytest.approx(math.hypot(delta, big_delta), rel=1e-12)


@given(finite(-5.0, 5.0), finite(0.05, 3.0))
def test_eigensystem_solves_the_hamiltonian(delta, big_delta):
    model = TwoLevelModel(delta_split=big_delta, delta_flea=delta, side="right")
    h = model.hamiltonian()
    eig = model.eigensystem()
    for vec, energy in ((eig.ground, eig.e_minus), (eig.excited, eig.e_plus)):
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(h @ vec - energy * vec) < 1e-12 * (1.0 + abs(energy))
    assert abs(np.vdot(eig.ground, eig.excited)) < 1e-12


def test_eigenvector_continuity_at_zero_flea():
    even, _ = ground_doublet()
    gaps = []
    for k in range(10):
        delta = 0.2 / 2**k
        model = TwoLevelModel(delta_split=1.0, delta_flea=delta, side="left")
        gaps.append(float(np.linalg.norm(model.eigensystem().ground - even)))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 2e-4


# ---------------------------------------------------------------------------
# quench dynamics


def test_stationary_ground_state_keeps_half_occupation():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    even, _ = ground_doublet()
    for t in (0.0, 0.7, 3.1, 20.0):
        state = quench_evolution(model, even, t)
        assert p_left(state) == pytest.approx(0.5, abs=1e-12)
        assert closed_form_p_left(model, t) == pytest.approx(0.5, abs=1e-12)


@given(finite(-2.0, 2.0), finite(0.1, 2.0), finite(0.0, 30.0))
def test_exact_propagator_matches_cosine_law(delta, big_delta, t):
    even, _ = ground_doublet()
    for side in ("left", "right"):
        model = TwoLevelModel(delta_split=big_delta, delta_flea=delta, side=side)
        state = quench_evolution(model, even, t)
        assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-12)
        assert p_left(state) == pytest.approx(
            float(closed_form_p_left(model, t)), abs=1e-10
        )
        assert p_left(state) + p_right(state) == pytest.approx(1.0, abs=1e-12)


def test_rk4_integrator_matches_closed_form():
    model = TwoLevelModel(delta_split=0.5, delta_flea=0.35, side="right", hbar=0.7)
    even, _ = ground_doublet()
    t_end = 100.0 * model.hbar / model.delta_split
    ts, states, pl = integrate_quench(model, even, t_end, dt=1e-3, record_every=1000)
    assert np.max(np.abs(pl - closed_form_p_left(model, ts))) < 1e-10
    assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)) < 1e-10


def test_integrate_quench_validation_and_recording():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    even, _ = ground_doublet()
    with pytest.raises(ValueError):
        integrate_quench(model, even, -1.0, 0.01)
    with pytest.raises(ValueError):
        integrate_quench(model, even, 1.0, 0.0)
    ts, states, _ = integrate_quench(model, even, 1.0, 0.01, record_every=25)
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(1.0)
    assert len(ts) == len(states)


def test_freezing_amplitude_vanishes_for_dominant_flea():
    """sup_t |P_L - 1/2| = delta*Delta/(delta^2+Delta^2) -> 0 as Delta -> 0."""
    delta = 0.1
    amps = []
    for hbar in (0.5, 0.2, 0.1, 0.05):
        big_delta = math.exp(-(2.0 / 3.0) / hbar)
        model = TwoLevelModel(delta_split=big_delta, delta_flea=delta, side="right")
        ts = np.linspace(0.0, 50.0, 2001)
        sup = float(np.max(np.abs(closed_form_p_left(model, ts) - 0.5)))
        amp = delta * big_delta / (delta**2 + big_delta**2)
        assert sup <= amp + 1e-12
        amps.append(amp)
    assert all(a > b for a, b in zip(amps, amps[1:]))


# ---------------------------------------------------------------------------
# white-noise flea


def test_brownian_seeded_bitwise_reproducibility():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.4, side="left")
    a = brownian_path(model, LEFT, 1e-3, 1.0, seed=42)
    b = brownian_path(model, LEFT, 1e-3, 1.0, seed=42)
    assert np.array_equal(a[1], b[1])
    c = brownian_path(model, LEFT, 1e-3, 1.0, seed=43)
    assert not np.array_equal(c[1], b[1])


def test_brownian_rejects_coarse_steps():
    model = TwoLevelModel(delta_split=1.0, delta_flea=2.0, side="left")
    with pytest.raises(NormBlowup):
        brownian_path(model, LEFT, 1e-3, 1.0, seed=0)  # noise^2 dt / 2 = 2e-3
    with pytest.raises(NormBlowup):
        brownian_ensemble(model, LEFT, 1e-3, 1.0, n_paths=4, seed=0)


def test_brownian_zero_noise_is_rabi_oscillation():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    ts, states = brownian_path(model, LEFT, 1e-4, 3.0, seed=7, record_every=100)
    pl = np.abs(states[:, 0]) ** 2
    assert np.max(np.abs(pl - np.cos(0.5 * ts) ** 2)) < 2e-3  # Euler is O(dt)
    assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)) < 1e-12


def test_brownian_ensemble_matches_dephasing_average():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.6, side="left")
    ts, means, finals = brownian_ensemble(
        model, LEFT, dt=1e-3, t_end=4.0, n_paths=10_000, seed=1234, record_every=50
    )
    closed = dephasing_p_left(model, ts)
    final_samples = np.abs(finals[:, 0]) ** 2
    stderr = float(np.std(final_samples, ddof=1)) / math.sqrt(len(final_samples))
    assert abs(means[-1] - closed[-1]) < 3.0 * stderr + 2e-3  # 3 sigma + O(dt) bias
    assert np.max(np.abs(means - closed)) < 0.02
    assert np.max(np.abs(np.linalg.norm(finals, axis=1) - 1.0)) < 1e-12


def test_strong_noise_freezes_the_initial_state():
    """Zeno-like regime: dominant noise pins P_L near 1 while the noiseless
    dynamics swings all the way to 0."""
    model = TwoLevelModel(delta_split=1.0, delta_flea=3.0, side="left")
    ts, means, _ = brownian_ensemble(
        model, LEFT, dt=2e-4, t_end=2.0, n_paths=500, seed=99, record_every=100
    )
    assert float(np.min(means)) > 0.85
    closed = dephasing_p_left(model, ts)
    assert np.max(np.abs(means - closed)) < 0.05
    # the noiseless baseline, followed through a full Rabi half-period,
    # empties the left well completely
    long_ts = np.linspace(0.0, 4.0, 401)
    assert float(np.min(np.cos(0.5 * long_ts) ** 2)) < 1e-3


# ---------------------------------------------------------------------------
# poisson flea


def test_poisson_zero_rate_is_exact_rabi():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    ts, states, jumps = poisson_path(model, LEFT, rate=0.0, t_end=6.0, seed=3,
                                     record_dt=0.05)
    assert len(jumps) == 0
    pl = np.abs(states[:, 0]) ** 2
    assert np.max(np.abs(pl - np.cos(0.5 * ts) ** 2)) < 1e-12


def test_sigma_z_jump_action():
    sigma_z = np.diag([1.0, -1.0]).astype(complex)
    kept = sigma_z @ LEFT
    assert abs(abs(np.vdot(kept, LEFT)) - 1.0) < 1e-15  # (1,0) fixed up to phase
    even, odd = ground_doublet()
    flipped = sigma_z @ even
    assert abs(abs(np.vdot(flipped, odd)) - 1.0) < 1e-15  # (1,1) -> (1,-1)


def test_poisson_path_jump_statistics_and_norms():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    ts, states, jumps = poisson_path(model, LEFT, rate=5.0, t_end=4.0, seed=11,
                                     record_dt=0.1)
    assert 5 <= len(jumps) <= 45  # ~Poisson(20)
    assert np.all(np.diff(jumps) > 0.0)
    assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)) < 1e-12
    again = poisson_path(model, LEFT, rate=5.0, t_end=4.0, seed=11, record_dt=0.1)
    assert np.array_equal(states, again[1])


def test_poisson_validation():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    with pytest.raises(ValueError):
        poisson_path(model, LEFT, rate=-1.0, t_end=1.0, seed=0, record_dt=0.1)
    with pytest.raises(ValueError):
        poisson_path(model, LEFT, rate=1.0, t_end=1.0, seed=0, record_dt=0.0)


def test_high_jump_rate_suppresses_oscillation():
    model = TwoLevelModel(delta_split=1.0, delta_flea=0.0, side="left")
    ts, mean_hi = poisson_ensemble(model, LEFT, rate=20.0, t_end=3.0, n_paths=400,
                                   seed=17, record_dt=0.05)
    # rate -> 0 baseline swings to zero occupation; high rate stays pinned
    assert float(np.min(np.cos(0.5 * ts) ** 2)) < 0.05
    assert float(np.min(mean_hi)) > 0.6
    closed = dephasing_p_left(model, ts, rate=20.0)
    assert np.max(np.abs(mean_hi - closed)) < 0.05
