"""End-to-end acceptance gate: eleven numbered checks, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line.  The
expensive members (criteria 7-10) dominate the runtime (a few minutes total);
criterion 7's trajectory is shared with criterion 9 through a module fixture.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from flea_lab import (
    FleaSpec,
    Grid,
    PhaseGrid,
    PotentialSpec,
    PropagationConfig,
    RampSpec,
    TwoLevelModel,
    adiabatic_fidelity,
    born_ensemble,
    closed_form_p_left,
    coherent_state,
    default_grid,
    eyring_kramers_time,
    ground_doublet,
    husimi,
    integrate_quench,
    langevin_first_passages,
    leapfrog,
    localization_ratio,
    propagate,
    solve_levels,
    solve_spectrum,
)
from flea_lab.wkb import d1_c4_closed_form

from conftest import cached_spectrum

D_V = 2.0 / 3.0  # barrier Agmon distance of the standard well
COLLAPSE_FLEA = (0.25, 0.35, 0.3)


def report(num: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:02d}: {detail}")
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="module")
def fig6_run():
    """The reference dynamical-collapse trajectory, shared by criteria 7 and 9."""
    spec = PotentialSpec("double_well", 0.06, 1.15e-4)
    hbar = 0.3
    flea = FleaSpec(7.5, 0.5, 0.3)
    grid = default_grid(spec, flea=flea, n=4000)
    psi0 = solve_spectrum(spec, hbar, k=1, grid=grid).states[0]
    config = PropagationConfig(
        dt=0.01, t_end=800.0, snapshots=(200.0, 400.0, 600.0)
    )
    trajectory = propagate(psi0, spec, config, flea=flea, ramp=RampSpec(800.0))
    target = solve_spectrum(spec, hbar, k=1, grid=grid, flea=flea).states[0]
    return spec, hbar, trajectory, target


def test_criterion_01_splitting_exponent(standard_well):
    hbars = (0.5, 0.4, 0.3, 0.25, 0.2)
    deltas = []
    for hbar in hbars:
        ev = cached_spectrum("double_well", 1.0, 1.0, hbar).eigenvalues
        deltas.append(float(ev[1] - ev[0]))
    slope, _ = np.polyfit([1.0 / h for h in hbars], np.log(deltas), 1)
    deviation = abs(slope - (-D_V)) / D_V
    report(
        1,
        deviation < 0.10,
        f"log-splitting slope {slope:.4f} vs -2/3 (off by {100 * deviation:.1f}%, "
        f"tolerance 10%)",
    )


def test_criterion_02_static_collapse_thresholds():
    masses = {}
    for hbar in (0.5, 0.01):
        gs = cached_spectrum(
            "double_well", 1.0, 1.0, hbar, flea=COLLAPSE_FLEA
        ).states[0]
        masses[hbar] = max(gs.mass_split())
    ok = masses[0.01] > 0.999 and 0.5 < masses[0.5] < 0.95
    report(
        2,
        ok,
        f"dominant-well mass {masses[0.01]:.6f} at hbar=0.01 (> 0.999) and "
        f"{masses[0.5]:.4f} at hbar=0.5 (inside (0.5, 0.95))",
    )


def test_criterion_03_opposite_localization(standard_well):
    spectrum = cached_spectrum("double_well", 1.0, 1.0, 0.01, flea=COLLAPSE_FLEA)
    gs_l, gs_r = spectrum.states[0].mass_split()
    ex_l, ex_r = spectrum.states[1].mass_split()
    r0 = localization_ratio(spectrum.states[0], standard_well).ratio
    r1 = localization_ratio(spectrum.states[1], standard_well).ratio
    opposite = (gs_l > gs_r) != (ex_l > ex_r)
    signs = (abs(r0) < 1.0) != (abs(r1) < 1.0)
    report(
        3,
        opposite and signs,
        f"ground mass L/R {gs_l:.4f}/{gs_r:.4f} vs excited {ex_l:.4f}/{ex_r:.4f}; "
        f"ratios {r0:.2e} / {r1:.2e} on opposite sides of 1",
    )


def test_criterion_04_wkb_vs_grid(standard_well):
    errs = []
    for hbar in (0.2, 0.15, 0.1):
        pair = solve_levels(standard_well, hbar)
        ev = cached_spectrum("double_well", 1.0, 1.0, hbar).eigenvalues
        errs.append(
            max(
                abs(pair.e_minus - float(ev[0])) / abs(float(ev[0])),
                abs(pair.e_plus - float(ev[1])) / abs(float(ev[1])),
            )
        )
    ok = errs[1] < 0.05 and errs[0] > errs[1] > errs[2]
    report(
        4,
        ok,
        "max relative error at hbar=(0.2, 0.15, 0.1) = "
        f"({errs[0]:.4f}, {errs[1]:.4f}, {errs[2]:.4f}); < 5% at 0.15 and decreasing",
    )


def test_criterion_05_branch_ratio_cases():
    exact = (
        abs(d1_c4_closed_form(0.0, 3.0, "minus") - 1.0) < 1e-12
        and abs(d1_c4_closed_form(0.0, 3.0, "plus") + 1.0) < 1e-12
        and abs(d1_c4_closed_form(math.pi, 3.0, "minus") + 1.0) < 1e-6
        and abs(d1_c4_closed_form(math.pi, 3.0, "plus") - 1.0) < 1e-6
    )
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        delta = float(rng.uniform(-math.pi, math.pi))
        bigk = float(rng.uniform(0.1, 25.0))
        product = d1_c4_closed_form(delta, bigk, "minus") * d1_c4_closed_form(
            delta, bigk, "plus"
        )
        worst = max(worst, abs(product + 1.0))
    report(
        5,
        exact and worst < 1e-10,
        f"delta=0 -> (+1,-1), delta=pi -> (-1,+1); worst |product+1| over 100 "
        f"random (delta, K) = {worst:.2e} (tolerance 1e-10)",
    )


def test_criterion_06_two_level_quench():
    model = TwoLevelModel(delta_split=0.5, delta_flea=0.35, side="left", hbar=0.7)
    even, _ = ground_doublet()
    t_end = 100.0 * model.hbar / model.delta_split
    ts, _, p_num = integrate_quench(model, even, t_end, dt=1e-3, record_every=1000)
    max_err = float(np.max(np.abs(p_num - closed_form_p_left(model, ts))))

    amps = []
    sup_ok = True
    for hbar in (0.5, 0.2, 0.1, 0.05):
        delta_split = math.exp(-D_V / hbar)
        m = TwoLevelModel(
            delta_split=delta_split, delta_flea=0.1, side="left", hbar=hbar
        )
        amp = m.delta_flea * m.delta_split / (m.delta_flea**2 + m.delta_split**2)
        amps.append(amp)
        grid_t = np.linspace(0.0, 4.0 * math.pi * hbar / m.rabi_energy, 2001)
        sup = float(np.max(np.abs(closed_form_p_left(m, grid_t) - 0.5)))
        sup_ok = sup_ok and sup <= amp + 1e-12
    monotone = all(a > b for a, b in zip(amps, amps[1:]))
    report(
        6,
        max_err <= 1e-10 and monotone and sup_ok,
        f"integrator vs closed form max |err| = {max_err:.2e} (<= 1e-10); freezing "
        f"amplitudes {', '.join(f'{a:.3e}' for a in amps)} strictly decreasing",
    )


def test_criterion_07_dynamical_collapse(fig6_run):
    _, _, trajectory, target = fig6_run
    p_left = trajectory.final.p_left
    fidelity = adiabatic_fidelity(trajectory, target)
    report(
        7,
        p_left > 0.9 and fidelity > 0.9,
        f"P_L(800) = {p_left:.4f} and adiabatic fidelity = {fidelity:.4f} "
        f"(both > 0.9)",
    )


def test_criterion_08_born_ensemble():
    spec = PotentialSpec("double_well", 0.06, 1.15e-4)
    base = FleaSpec(7.0, 0.5, 0.15)
    family = (
        base,
        FleaSpec(-base.b, base.c, base.d),
        FleaSpec(base.b, base.c, -base.d),
        FleaSpec(-base.b, base.c, -base.d),
    )
    config = PropagationConfig(dt=0.01, t_end=800.0)
    tally = born_ensemble(
        spec, family, RampSpec(800.0), config, hbar=0.3, n=4000, threads=4
    )
    report(
        8,
        tally.left == 2 and tally.right == 2 and tally.unclassified == 0,
        f"outcomes {tally.outcomes} -> {tally.left} left / {tally.right} right "
        f"(need exactly 2/2)",
    )


def test_criterion_09_unitarity_and_husimi_fields(fig6_run):
    spec, hbar, trajectory, _ = fig6_run
    drift = trajectory.norm_drift()
    a = spec.a
    window = PhaseGrid(-2.5, 2.5, 201, -2.5 * a, 2.5 * a, 201, hbar)
    worst_deficit = 0.0
    min_value = math.inf
    for point in trajectory.points:
        field = husimi(point.psi, window)
        worst_deficit = max(worst_deficit, abs(field.integral() - 1.0))
        min_value = min(min_value, float(np.min(field.values)))
    ok = drift < 1e-7 and min_value >= 0.0 and worst_deficit < 1e-6
    report(
        9,
        ok,
        f"norm drift {drift:.2e} (< 1e-7); {len(trajectory.points)} Husimi fields: "
        f"min {min_value:.1e} >= 0, worst |integral-1| = {worst_deficit:.2e} (< 1e-6)",
    )


def test_criterion_10_crossing_times(standard_well):
    epsilon = standard_well.barrier_height / 8.0
    formula = eyring_kramers_time(standard_well, epsilon)
    bare = langevin_first_passages(standard_well, epsilon, 256, seed=2024)
    ratio = bare.mean / formula
    flea = FleaSpec(1.5, 0.2, 0.05)
    with_flea = langevin_first_passages(
        standard_well, epsilon, 256, seed=2024, flea=flea
    )
    identical = bool(np.array_equal(bare.times, with_flea.times))
    ok = (
        abs(formula - 13244.047379994603) < 1e-9
        and bare.n_arrived >= 200
        and 0.5 < ratio < 2.0
        and identical
    )
    report(
        10,
        ok,
        f"{bare.n_arrived} transitions, mean {bare.mean:.0f} vs formula "
        f"{formula:.0f} (ratio {ratio:.3f}, need within factor 2); flea run "
        f"bit-identical: {identical}",
    )


def test_criterion_11_egorov_centroids(standard_well):
    _, ps, qs = leapfrog(standard_well, 0.0, 1.2, 1e-4, 10000)
    p_cl, q_cl = float(ps[-1]), float(qs[-1])
    errors = {}
    for hbar in (0.05, 0.01):
        grid = Grid(-3.0, 3.0, 4000)
        psi0 = coherent_state(grid, hbar, 0.0, 1.2)
        trajectory = propagate(
            psi0, standard_well, PropagationConfig(dt=1e-3, t_end=1.0)
        )
        window = PhaseGrid(p_cl - 1.0, p_cl + 1.0, 121, q_cl - 1.5, q_cl + 1.5,
                           121, hbar)
        cp, cq = husimi(trajectory.final.psi, window).centroid()
        errors[hbar] = float(math.hypot(cp - p_cl, cq - q_cl))
    report(
        11,
        errors[0.01] < errors[0.05],
        f"centroid error vs classical point: {errors[0.01]:.4f} at hbar=0.01 < "
        f"{errors[0.05]:.4f} at hbar=0.05",
    )
