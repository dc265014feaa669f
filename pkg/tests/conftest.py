"""Shared fixtures and a cached eigensolver for the test suite."""

from __future__ import annotations

from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from flea_lab import FleaSpec, Grid, PotentialSpec, default_grid, solve_spectrum

settings.register_profile(
    "flea-lab",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("flea-lab")


@lru_cache(maxsize=96)
def cached_spectrum(kind, omega, lam, hbar, k=2, n=4000, flea=None, half=None):
    """Solve and memoize a spectrum; ``flea`` is a (b, c, d) tuple or None."""
    spec = PotentialSpec(kind, omega, lam)
    fl = FleaSpec(*flea) if flea is not None else None
    if half is not None:
        grid = Grid(-float(half), float(half), n)
    else:
        grid = default_grid(spec, flea=fl, n=n)
    return solve_spectrum(spec, hbar, k=k, grid=grid, flea=fl)


@pytest.fixture(scope="session")
def standard_well():
    """The omega = lambda = 1 double well (minima at +-1, barrier 1/4)."""
    return PotentialSpec("double_well", 1.0, 1.0)
