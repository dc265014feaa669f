"""Command-line front end: config resolution, subcommand dispatch, artifacts.

Every run writes into ``out/<run-id>/`` where the run id is derived from the
resolved config, so identical configs land in identical paths with
byte-identical CSV/JSON artifacts.  All floats in CSV files are serialized
with 17 significant digits (round-trip exact for doubles).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from pathlib import Path

import numpy as np

from . import __version__
from .classical_baseline import (
    classical_energy,
    eyring_kramers_time,
    langevin_first_passages,
    leapfrog,
)
from .dynamics import PropagationConfig, adiabatic_fidelity, born_ensemble, propagate
from .errors import ConfigError, FleaLabError
from .phase_space import (
    PhaseGrid,
    classical_limit_summary,
    coherent_state,
    default_phase_grid,
    husimi,
)
from .potential import KINDS, FleaSpec, PotentialSpec, RampSpec, classify_flea, flea_size_check
from .spectral import (
    default_grid,
    localization_ratio,
    localized_combinations,
    solve_spectrum,
    splitting,
    tunneling_time,
)
from .svg import heatmap, line_plot
from .two_level import (
    TwoLevelModel,
    brownian_ensemble,
    brownian_path,
    closed_form_p_left,
    dephasing_p_left,
    ground_doublet,
    integrate_quench,
    poisson_ensemble,
    poisson_path,
)
from .wkb import actions as wkb_actions
from .wkb import solve_levels

SUBCOMMANDS = (
    "spectrum",
    "husimi",
    "collapse-static",
    "evolve",
    "born",
    "two-level",
    "wkb",
    "classical",
    "sweep",
)

_DEFAULTS: dict = {
    "hbar": 0.5,
    "seed": 12345,
    "threads": None,  # resolved from env/cpu below
    "out_dir": "out",
    "grid": {"n": 4000, "half_width": None},
    "potential": {"kind": "double_well", "omega": 1.0, "lambda": 1.0, "flea": None, "ramp": None},
    "propagation": {"dt": None, "t_end": 100.0, "snapshots": []},
    "phase_grid": {"n_p": 201, "n_q": 201},
    "husimi": {"state": "ground", "p0": 0.0, "q0": None, "radius": None},
    "born": {"threshold": 0.8},
    "spectrum": {"k": 2},
    "two_level": {
        "delta_split": 1.0,
        "delta_flea": 1.0,
        "side": "left",
        "model": "quench",
        "t_end": 30.0,
        "dt": 0.001,
        "n_paths": 400,
        "rate": 1.0,
        "noise": None,
        "record_every": 10,
    },
    "wkb": {"pair_index": 0, "compare": True},
    "classical": {
        "mode": "passages",
        "epsilon": None,
        "n_paths": 200,
        "dt": 0.005,
        "t_max": None,
        "p0": 0.0,
        "q0": 1.2,
        "t_end": 20.0,
        "orbit_dt": 0.001,
    },
    "sweep": {"param": None, "values": [], "target": None},
}


def _f17(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_f17(v) for v in row])
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# config validation


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_config(document: dict) -> dict:
    """Fill defaults and cross-check a config document.

    Collects every problem (JSON-pointer path + message) instead of failing
    on the first, then raises ConfigError with the aggregate list.
    """
    issues: list[tuple[str, str]] = []
    resolved = deepcopy(_DEFAULTS)

    def complain(pointer: str, msg: str) -> None:
        issues.append((pointer, msg))

    def merge(dst: dict, src: dict, pointer: str, defaults: dict) -> None:
        for key, value in src.items():
            here = f"{pointer}/{key}"
            if key not in defaults:
                complain(here, "unknown key")
                continue
            base = defaults[key]
            if isinstance(base, dict) and isinstance(value, dict):
                merge(dst[key], value, here, base)
            else:
                dst[key] = deepcopy(value)

    if not isinstance(document, dict):
        raise ConfigError([("", "config document must be a JSON object")])
    # 'flea' and 'ramp' default to None, so merge() cannot recurse into them;
    # they are validated wholesale below.
    merge(resolved, document, "", _DEFAULTS)

    def num(pointer: str, value, positive: bool = False, allow_none: bool = False) -> None:
        if value is None and allow_none:
            return
        if not _is_num(value):
            complain(pointer, f"expected a number, got {value!r}")
        elif positive and value <= 0:
            complain(pointer, f"must be positive, got {value}")

    num("/hbar", resolved["hbar"], positive=True)
    if not isinstance(resolved["seed"], int) or isinstance(resolved["seed"], bool):
        complain("/seed", f"expected an integer, got {resolved['seed']!r}")
    if resolved["threads"] is not None and (
        not isinstance(resolved["threads"], int) or resolved["threads"] < 1
    ):
        complain("/threads", f"expected a positive integer, got {resolved['threads']!r}")

    g = resolved["grid"]
    if not isinstance(g["n"], int) or g["n"] < 16:
        complain("/grid/n", f"expected an integer >= 16, got {g['n']!r}")
    num("/grid/half_width", g["half_width"], positive=True, allow_none=True)

    pot = resolved["potential"]
    if pot["kind"] not in KINDS:
        complain("/potential/kind", f"must be one of {KINDS}, got {pot['kind']!r}")
    num("/potential/omega", pot["omega"], positive=True)
    num("/potential/lambda", pot["lambda"], positive=True)
    flea = pot.get("flea")
    if flea is not None:
        if not isinstance(flea, dict):
            complain("/potential/flea", "expected an object {b, c, d}")
            flea = None
        else:
            for key in ("b", "c", "d"):
                if key not in flea:
                    complain(f"/potential/flea/{key}", "missing")
                else:
                    num(f"/potential/flea/{key}", flea[key], positive=(key == "c"))
            for key in flea:
                if key not in ("b", "c", "d"):
                    complain(f"/potential/flea/{key}", "unknown key")
    ramp = pot.get("ramp")
    if ramp is not None:
        if not isinstance(ramp, dict) or "T" not in ramp:
            complain("/potential/ramp", "expected an object {T}")
            ramp = None
        else:
            num("/potential/ramp/T", ramp["T"], positive=True)

    prop = resolved["propagation"]
    num("/propagation/dt", prop["dt"], positive=True, allow_none=True)
    num("/propagation/t_end", prop["t_end"], positive=True)
    snaps = prop["snapshots"]
    if not isinstance(snaps, list) or not all(_is_num(s) for s in snaps):
        complain("/propagation/snapshots", "expected a list of numbers")
    else:
        prop["snapshots"] = sorted(float(s) for s in snaps)
        if _is_num(prop["t_end"]):
            for i, s in enumerate(prop["snapshots"]):
                if not 0.0 <= s <= prop["t_end"]:
                    complain(
                        f"/propagation/snapshots/{i}",
                        f"snapshot {s} outside [0, {prop['t_end']}]",
                    )

    pg = resolved["phase_grid"]
    for key in ("n_p", "n_q"):
        if not isinstance(pg[key], int) or pg[key] < 2:
            complain(f"/phase_grid/{key}", f"expected an integer >= 2, got {pg[key]!r}")

    hz = resolved["husimi"]
    if hz["state"] not in ("ground", "coherent"):
        complain("/husimi/state", f"must be 'ground' or 'coherent', got {hz['state']!r}")
    num("/husimi/p0", hz["p0"])
    num("/husimi/q0", hz["q0"], allow_none=True)
    num("/husimi/radius", hz["radius"], positive=True, allow_none=True)

    num("/born/threshold", resolved["born"]["threshold"], positive=True)

    tl = resolved["two_level"]
    num("/two_level/delta_split", tl["delta_split"], positive=True)
    num("/two_level/delta_flea", tl["delta_flea"])
    if tl["side"] not in ("left", "right"):
        complain("/two_level/side", f"must be 'left' or 'right', got {tl['side']!r}")
    if tl["model"] not in ("quench", "brownian", "poisson"):
        complain("/two_level/model", f"unknown model {tl['model']!r}")
    num("/two_level/t_end", tl["t_end"], positive=True)
    num("/two_level/dt", tl["dt"], positive=True)
    num("/two_level/rate", tl["rate"])
    num("/two_level/noise", tl["noise"], allow_none=True)
    if not isinstance(tl["n_paths"], int) or tl["n_paths"] < 1:
        complain("/two_level/n_paths", f"expected a positive integer, got {tl['n_paths']!r}")
    if not isinstance(tl["record_every"], int) or tl["record_every"] < 1:
        complain(
            "/two_level/record_every",
            f"expected a positive integer, got {tl['record_every']!r}",
        )

    wk = resolved["wkb"]
    if not isinstance(wk["pair_index"], int) or wk["pair_index"] < 0:
        complain("/wkb/pair_index", f"expected an integer >= 0, got {wk['pair_index']!r}")

    cl = resolved["classical"]
    if cl["mode"] not in ("passages", "orbit"):
        complain("/classical/mode", f"must be 'passages' or 'orbit', got {cl['mode']!r}")
    num("/classical/epsilon", cl["epsilon"], positive=True, allow_none=True)
    num("/classical/dt", cl["dt"], positive=True)
    num("/classical/t_max", cl["t_max"], positive=True, allow_none=True)
    num("/classical/orbit_dt", cl["orbit_dt"], positive=True)
    num("/classical/t_end", cl["t_end"], positive=True)
    num("/classical/p0", cl["p0"])
    num("/classical/q0", cl["q0"])
    if not isinstance(cl["n_paths"], int) or cl["n_paths"] < 1:
        complain("/classical/n_paths", f"expected a positive integer, got {cl['n_paths']!r}")

    # --- cross-field checks (only meaningful if the pieces parsed) ---
    if not issues:
        spec, flea_spec, ramp_spec = _potential_from(resolved)
        if ramp_spec is not None and flea_spec is None:
            complain("/potential/ramp", "a ramp requires a flea to switch on")
        if ramp_spec is not None:
            dt = prop["dt"] if prop["dt"] is not None else min(0.01, ramp_spec.T / 2000.0)
            if dt > ramp_spec.T / 1000.0:
                complain("/propagation/dt", f"dt must be <= T/1000 = {ramp_spec.T / 1000.0:g}")
        if flea_spec is not None:
            half = g["half_width"]
            if half is None:
                half = default_grid(spec, flea=flea_spec, n=max(g["n"], 16)).x_max
            lo, hi = flea_spec.support
            if lo <= -half or hi >= half:
                complain(
                    "/potential/flea",
                    f"flea support ({lo:g}, {hi:g}) must lie inside the box "
                    f"(-{half:g}, {half:g})",
                )
            if spec.kind == "double_well" and (lo < -spec.a < hi or lo < spec.a < hi):
                complain(
                    "/potential/flea",
                    f"flea support ({lo:g}, {hi:g}) covers a well minimum at +-{spec.a:g}",
                )
        if spec.kind == "double_well" and hz["radius"] is not None and hz["radius"] >= spec.a:
            complain(
                "/husimi/radius",
                f"disks of radius {hz['radius']:g} around q = +-{spec.a:g} overlap",
            )

    if issues:
        raise ConfigError(issues)
    return resolved


def _potential_from(cfg: dict) -> tuple[PotentialSpec, FleaSpec | None, RampSpec | None]:
    pot = cfg["potential"]
    spec = PotentialSpec(kind=pot["kind"], omega=float(pot["omega"]), lam=float(pot["lambda"]))
    flea = None
    if pot.get("flea") is not None:
        fd = pot["flea"]
        flea = FleaSpec(b=float(fd["b"]), c=float(fd["c"]), d=float(fd["d"]))
    ramp = None
    if pot.get("ramp") is not None:
        ramp = RampSpec(T=float(pot["ramp"]["T"]))
    return spec, flea, ramp


# ---------------------------------------------------------------------------
# artifact helpers


def _run_id(subcommand: str, cfg: dict) -> str:
    digest = hashlib.sha256(
        json.dumps({"subcommand": subcommand, "config": cfg}, sort_keys=True).encode()
    ).hexdigest()
    return f"{subcommand}-{digest[:10]}"


def _out_dir(subcommand: str, cfg: dict) -> Path:
    path = Path(cfg["out_dir"]) / _run_id(subcommand, cfg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(out: Path, subcommand: str, cfg: dict, outputs: list[Path]) -> Path:
    payload = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": cfg["seed"],
        "threads": cfg["threads"],
        "config": cfg,
        "outputs": sorted(str(p.relative_to(out)) for p in outputs),
    }
    return _write_json(out / "manifest.json", payload)


def _density_svg(out: Path, name: str, grid, states: list, labels: list[str], title: str) -> Path:
    series = [(grid.points, np.abs(s.amplitudes) ** 2, lab) for s, lab in zip(states, labels)]
    return line_plot(out / name, series, title=title, x_label="x", y_label="|psi|^2")


# ---------------------------------------------------------------------------
# subcommand runners (each returns the list of artifact paths)


def _cmd_spectrum(cfg: dict, out: Path) -> list[Path]:
    spec, flea, _ = _potential_from(cfg)
    hbar = cfg["hbar"]
    k = max(2, int(cfg["spectrum"]["k"]))
    grid = _grid_from(cfg, spec, flea)
    spectrum = solve_spectrum(spec, hbar, k=k, grid=grid, flea=flea)
    delta = spectrum.eigenvalues[1] - spectrum.eigenvalues[0]
    report = localization_ratio(spectrum.states[0], spec)
    summary = {
        "hbar": hbar,
        "E0": float(spectrum.eigenvalues[0]),
        "E1": float(spectrum.eigenvalues[1]),
        "delta": float(delta),
        "ratio": report.ratio if math.isfinite(report.ratio) else None,
        "mass_left": report.mass_left,
        "mass_right": report.mass_right,
        "eigenvalues": [float(e) for e in spectrum.eigenvalues],
        "splitting": float(delta),
        "tunneling_time": tunneling_time(hbar, float(delta)) if delta > 0 else None,
        "grid_n": grid.n,
        "box_half_width": grid.x_max,
    }
    outputs = [_write_json(out / "spectrum.json", summary)]
    outputs.append(
        _write_csv(
            out / "eigenvalues.csv",
            ["index", "eigenvalue"],
            enumerate(float(e) for e in spectrum.eigenvalues),
        )
    )
    rows = zip(
        grid.points,
        *[spectrum.states[i].amplitudes.real for i in range(k)],
    )
    outputs.append(
        _write_csv(out / "states.csv", ["x"] + [f"psi{i}" for i in range(k)], rows)
    )
    outputs.append(
        _density_svg(
            out,
            "states.svg",
            grid,
            list(spectrum.states[:2]),
            ["ground", "excited"],
            f"hbar={hbar:g}: E0={spectrum.eigenvalues[0]:.6g}, splitting={delta:.3e}",
        )
    )
    return outputs


def _grid_from(cfg: dict, spec: PotentialSpec, flea: FleaSpec | None):
    from .spectral import Grid

    n = cfg["grid"]["n"]
    half = cfg["grid"]["half_width"]
    if half is not None:
        return Grid(-float(half), float(half), n)
    return default_grid(spec, flea=flea, n=n)


def _cmd_husimi(cfg: dict, out: Path) -> list[Path]:
    spec, flea, _ = _potential_from(cfg)
    hbar = cfg["hbar"]
    grid = _grid_from(cfg, spec, flea)
    hz = cfg["husimi"]
    if hz["state"] == "coherent":
        q0 = hz["q0"] if hz["q0"] is not None else (spec.a if spec.kind == "double_well" else 0.0)
        psi = coherent_state(grid, hbar, float(hz["p0"]), float(q0))
    else:
        psi = solve_spectrum(spec, hbar, k=1, grid=grid, flea=flea).states[0]
    a = spec.a if spec.kind == "double_well" else 1.0
    pgrid = default_phase_grid(a, hbar, cfg["phase_grid"]["n_p"], cfg["phase_grid"]["n_q"])
    field = husimi(psi, pgrid)
    summary = {
        "hbar": hbar,
        "integral": field.integral(),
        "centroid_p": field.centroid()[0],
        "centroid_q": field.centroid()[1],
        "min_value": float(np.min(field.values)),
    }
    if spec.kind == "double_well":
        disks = classical_limit_summary(field, spec.a, hz["radius"])
        summary["disk_mass_left"] = disks.mass_left
        summary["disk_mass_right"] = disks.mass_right
        summary["disk_radius"] = disks.radius
    outputs = [_write_json(out / "husimi.json", summary)]
    outputs.append(
        _write_json(
            out / "husimi_matrix.json",
            {
                "p_axis": [float(p) for p in pgrid.p_axis],
                "q_axis": [float(q) for q in pgrid.q_axis],
                "values": [[float(v) for v in row] for row in field.values],
            },
        )
    )
    rows = (
        (p, q, field.values[ip, iq])
        for ip, p in enumerate(pgrid.p_axis)
        for iq, q in enumerate(pgrid.q_axis)
    )
    outputs.append(_write_csv(out / "husimi.csv", ["p", "q", "chi"], rows))
    outputs.append(
        heatmap(
            out / "husimi.svg",
            pgrid.q_axis,
            pgrid.p_axis,
            field.values,
            title=f"Husimi function, hbar={hbar:g}",
            x_label="q",
            y_label="p",
        )
    )
    return outputs


def _cmd_collapse_static(cfg: dict, out: Path) -> list[Path]:
    spec, flea, _ = _potential_from(cfg)
    if flea is None:
        raise ConfigError([("/potential/flea", "collapse-static requires a flea")])
    hbar = cfg["hbar"]
    grid = _grid_from(cfg, spec, flea)
    bare = solve_spectrum(spec, hbar, k=2, grid=grid)
    perturbed = solve_spectrum(spec, hbar, k=2, grid=grid, flea=flea)
    cls = classify_flea(spec, flea)
    size = flea_size_check(spec, flea, hbar)
    gs_left, gs_right = perturbed.states[0].mass_split()
    ex_left, ex_right = perturbed.states[1].mass_split()
    summary = {
        "hbar": hbar,
        "case": cls.case,
        "d_v": cls.d_v,
        "d_v_prime": cls.d_v_prime,
        "d_v_double_prime": cls.d_v_double_prime,
        "size_check_satisfied": size.satisfied,
        "bare_splitting": float(bare.eigenvalues[1] - bare.eigenvalues[0]),
        "perturbed_splitting": float(perturbed.eigenvalues[1] - perturbed.eigenvalues[0]),
        "ground_mass_left": gs_left,
        "ground_mass_right": gs_right,
        "excited_mass_left": ex_left,
        "excited_mass_right": ex_right,
        "ground_ratio": localization_ratio(perturbed.states[0], spec).ratio,
        "excited_ratio": localization_ratio(perturbed.states[1], spec).ratio,
    }
    outputs = [_write_json(out / "collapse.json", summary)]
    rows = zip(
        grid.points,
        bare.states[0].amplitudes.real,
        perturbed.states[0].amplitudes.real,
        perturbed.states[1].amplitudes.real,
    )
    outputs.append(
        _write_csv(out / "states.csv", ["x", "psi0_bare", "psi0_flea", "psi1_flea"], rows)
    )
    outputs.append(
        _density_svg(
            out,
            "collapse.svg",
            grid,
            [bare.states[0], perturbed.states[0]],
            ["no flea", "with flea"],
            f"static collapse at hbar={hbar:g} (mass L/R = {gs_left:.4f}/{gs_right:.4f})",
        )
    )
    return outputs


def _cmd_evolve(cfg: dict, out: Path) -> list[Path]:
    spec, flea, ramp = _potential_from(cfg)
    if flea is None or ramp is None:
        raise ConfigError(
            [("/potential", "evolve requires both a flea and a ramp {T}")]
        )
    hbar = cfg["hbar"]
    grid = _grid_from(cfg, spec, flea)
    prop = cfg["propagation"]
    dt = prop["dt"] if prop["dt"] is not None else min(0.01, ramp.T / 2000.0)
    config = PropagationConfig(dt=float(dt), t_end=float(prop["t_end"]), snapshots=tuple(prop["snapshots"]))
    psi0 = solve_spectrum(spec, hbar, k=1, grid=grid).states[0]
    trajectory = propagate(psi0, spec, config, flea=flea, ramp=ramp)
    target = solve_spectrum(spec, hbar, k=1, grid=grid, flea=flea).states[0]
    fidelity = adiabatic_fidelity(trajectory, target)
    final = trajectory.final
    summary = {
        "hbar": hbar,
        "dt": float(dt),
        "t_end": config.t_end,
        "final_p_left": final.p_left,
        "final_p_right": final.p_right,
        "adiabatic_fidelity": fidelity,
        "norm_drift": trajectory.norm_drift(),
    }
    outputs = [_write_json(out / "evolve.json", summary)]
    outputs.append(
        _write_csv(
            out / "trajectory.csv",
            ["t", "p_left", "p_right", "norm", "energy"],
            ((pt.t, pt.p_left, pt.p_right, pt.norm, pt.energy) for pt in trajectory.points),
        )
    )
    a = spec.a if spec.kind == "double_well" else 1.0
    pgrid = default_phase_grid(a, hbar, cfg["phase_grid"]["n_p"], cfg["phase_grid"]["n_q"])
    for pt in trajectory.points:
        tag = f"t{pt.t:g}".replace(".", "p").replace("-", "m")
        outputs.append(
            _density_svg(
                out,
                f"density-{tag}.svg",
                grid,
                [pt.psi],
                [f"t={pt.t:g}"],
                f"|psi|^2 at t={pt.t:g} (P_L={pt.p_left:.4f})",
            )
        )
        field = husimi(pt.psi, pgrid)
        outputs.append(
            heatmap(
                out / f"husimi-{tag}.svg",
                pgrid.q_axis,
                pgrid.p_axis,
                field.values,
                title=f"Husimi at t={pt.t:g}",
                x_label="q",
                y_label="p",
            )
        )
        outputs.append(
            _write_csv(
                out / f"state-{tag}.csv",
                ["x", "re_psi", "im_psi", "density"],
                zip(
                    grid.points,
                    pt.psi.amplitudes.real,
                    pt.psi.amplitudes.imag,
                    np.abs(pt.psi.amplitudes) ** 2,
                ),
            )
        )
    return outputs


def _cmd_born(cfg: dict, out: Path) -> list[Path]:
    spec, flea, ramp = _potential_from(cfg)
    if flea is None or ramp is None:
        raise ConfigError([("/potential", "born requires both a flea and a ramp {T}")])
    hbar = cfg["hbar"]
    prop = cfg["propagation"]
    dt = prop["dt"] if prop["dt"] is not None else min(0.01, ramp.T / 2000.0)
    config = PropagationConfig(dt=float(dt), t_end=float(prop["t_end"]), snapshots=())
    family = (
        flea,
        FleaSpec(b=-flea.b, c=flea.c, d=flea.d),
        FleaSpec(b=flea.b, c=flea.c, d=-flea.d),
        FleaSpec(b=-flea.b, c=flea.c, d=-flea.d),
    )
    tally = born_ensemble(
        spec,
        family,
        ramp,
        config,
        hbar,
        n=cfg["grid"]["n"],
        threshold=float(cfg["born"]["threshold"]),
        threads=cfg["threads"] or 1,
    )
    summary = {
        "hbar": hbar,
        "threshold": tally.threshold,
        "left": tally.left,
        "right": tally.right,
        "unclassified": tally.unclassified,
        "outcomes": list(tally.outcomes),
    }
    outputs = [_write_json(out / "born.json", summary)]
    outputs.append(
        _write_csv(
            out / "members.csv",
            ["b", "c", "d", "outcome"],
            ((m.b, m.c, m.d, o) for m, o in zip(family, tally.outcomes)),
        )
    )
    return outputs


def _cmd_two_level(cfg: dict, out: Path) -> list[Path]:
    tl = cfg["two_level"]
    model = TwoLevelModel(
        delta_split=float(tl["delta_split"]),
        delta_flea=float(tl["delta_flea"]),
        side=tl["side"],
        hbar=cfg["hbar"],
    )
    even, _ = ground_doublet()
    outputs: list[Path] = []
    if tl["model"] == "quench":
        ts, path_states, p_num = integrate_quench(
            model, even, float(tl["t_end"]), float(tl["dt"]), record_every=tl["record_every"]
        )
        path_times = ts
        p_exact = closed_form_p_left(model, ts)
        summary = {
            "model": "quench",
            "freezing_amplitude": float(
                model.delta_flea * model.delta_split / model.rabi_energy**2
            ),
            "max_abs_error_vs_closed_form": float(np.max(np.abs(p_num - p_exact))),
            "min_p_left": float(np.min(p_exact)),
        }
        rows = zip(ts, p_num, p_exact)
        header = ["t", "p_left_rk4", "p_left_exact"]
        series = [(ts, p_num, "integrated"), (ts, p_exact, "closed form")]
    elif tl["model"] == "brownian":
        left = np.array([1.0, 0.0], dtype=complex)
        ts, mean_pl, _ = brownian_ensemble(
            model,
            left,
            float(tl["dt"]),
            float(tl["t_end"]),
            int(tl["n_paths"]),
            cfg["seed"],
            noise=tl["noise"],
            record_every=tl["record_every"],
        )
        path_times, path_states = brownian_path(
            model,
            left,
            float(tl["dt"]),
            float(tl["t_end"]),
            cfg["seed"],
            noise=tl["noise"],
            record_every=tl["record_every"],
        )
        oracle = dephasing_p_left(model, ts) if tl["noise"] is None else dephasing_p_left(
            model, ts, rate=float(tl["noise"]) ** 2
        )
        summary = {
            "model": "brownian",
            "n_paths": tl["n_paths"],
            "max_abs_dev_from_dephasing": float(np.max(np.abs(mean_pl - oracle))),
        }
        rows = zip(ts, mean_pl, oracle)
        header = ["t", "mean_p_left", "dephasing_closed_form"]
        series = [(ts, mean_pl, "ensemble"), (ts, oracle, "dephasing")]
    else:  # poisson
        left = np.array([1.0, 0.0], dtype=complex)
        record_dt = float(tl["dt"]) * tl["record_every"]
        ts, mean_pl = poisson_ensemble(
            model, left, float(tl["rate"]), float(tl["t_end"]), int(tl["n_paths"]), cfg["seed"], record_dt
        )
        path_times, path_states, _ = poisson_path(
            model, left, float(tl["rate"]), float(tl["t_end"]), cfg["seed"], record_dt
        )
        oracle = dephasing_p_left(model, ts, rate=float(tl["rate"]))
        summary = {
            "model": "poisson",
            "rate": tl["rate"],
            "n_paths": tl["n_paths"],
            "max_abs_dev_from_dephasing": float(np.max(np.abs(mean_pl - oracle))),
        }
        rows = zip(ts, mean_pl, oracle)
        header = ["t", "mean_p_left", "dephasing_closed_form"]
        series = [(ts, mean_pl, "ensemble"), (ts, oracle, "dephasing")]
    outputs.append(_write_json(out / "two_level.json", summary))
    outputs.append(_write_csv(out / "p_left.csv", header, rows))
    path_states = np.asarray(path_states)
    outputs.append(
        _write_csv(
            out / "path.csv",
            ["t", "re_c_minus", "im_c_minus", "re_c_plus", "im_c_plus", "p_left"],
            zip(
                path_times,
                path_states[:, 0].real,
                path_states[:, 0].imag,
                path_states[:, 1].real,
                path_states[:, 1].imag,
                np.abs(path_states[:, 0]) ** 2,
            ),
        )
    )
    outputs.append(
        line_plot(
            out / "p_left.svg",
            series,
            title=f"two-level {tl['model']}: delta={model.delta_flea:g}, Delta={model.delta_split:g}",
            x_label="t",
            y_label="P_L",
        )
    )
    return outputs


def _cmd_wkb(cfg: dict, out: Path) -> list[Path]:
    spec, flea, _ = _potential_from(cfg)
    hbar = cfg["hbar"]
    pair = solve_levels(spec, hbar, n=int(cfg["wkb"]["pair_index"]), flea=flea)
    mid = wkb_actions(spec, 0.5 * (pair.e_minus + pair.e_plus), hbar, flea=flea)
    summary = {
        "hbar": hbar,
        "n": pair.n,
        "E_minus": pair.e_minus,
        "E_plus": pair.e_plus,
        "theta_minus": pair.actions_minus.theta1,
        "theta_plus": pair.actions_plus.theta1,
        "K": mid.bigk,
        "phi_tilde": mid.phi,
        "delta": mid.delta,
        "d1_over_c4_minus": pair.ratio_minus,
        "d1_over_c4_plus": pair.ratio_plus,
        "splitting": pair.splitting,
    }
    if cfg["wkb"]["compare"]:
        grid = _grid_from(cfg, spec, flea)
        spectrum = solve_spectrum(spec, hbar, k=2 * (pair.n + 1), grid=grid, flea=flea)
        e0 = float(spectrum.eigenvalues[2 * pair.n])
        e1 = float(spectrum.eigenvalues[2 * pair.n + 1])
        summary["grid_e_minus"] = e0
        summary["grid_e_plus"] = e1
        summary["rel_error_e_minus"] = abs(pair.e_minus - e0) / abs(e0)
        summary["rel_error_e_plus"] = abs(pair.e_plus - e1) / abs(e1)
        summary["rel_error_splitting"] = abs(pair.splitting - (e1 - e0)) / abs(e1 - e0)
    outputs = [_write_json(out / "wkb.json", summary)]
    return outputs


def _cmd_classical(cfg: dict, out: Path) -> list[Path]:
    spec, flea, _ = _potential_from(cfg)
    cl = cfg["classical"]
    outputs: list[Path] = []
    if cl["mode"] == "orbit":
        n_steps = int(round(float(cl["t_end"]) / float(cl["orbit_dt"])))
        ts, ps, qs = leapfrog(
            spec, float(cl["p0"]), float(cl["q0"]), float(cl["orbit_dt"]), n_steps, flea=flea
        )
        energy = classical_energy(spec, ps, qs, flea=flea)
        summary = {
            "mode": "orbit",
            "p0": cl["p0"],
            "q0": cl["q0"],
            "energy_drift": float(np.max(np.abs(energy - energy[0]))),
        }
        outputs.append(_write_json(out / "classical.json", summary))
        outputs.append(
            _write_csv(out / "orbit.csv", ["t", "p", "q", "energy"], zip(ts, ps, qs, energy))
        )
        outputs.append(
            line_plot(
                out / "orbit.svg",
                [(qs, ps, "orbit")],
                title=f"phase-space orbit from (p,q)=({cl['p0']:g},{cl['q0']:g})",
                x_label="q",
                y_label="p",
            )
        )
    else:
        epsilon = cl["epsilon"]
        if epsilon is None:
            epsilon = spec.barrier_height / 8.0
        passages = langevin_first_passages(
            spec,
            float(epsilon),
            int(cl["n_paths"]),
            cfg["seed"],
            dt=float(cl["dt"]),
            t_max=cl["t_max"],
            flea=flea,
        )
        formula = eyring_kramers_time(spec, float(epsilon))
        stderr = (
            float(np.std(passages.times, ddof=1) / math.sqrt(passages.n_arrived))
            if passages.n_arrived > 1
            else None
        )
        summary = {
            "mode": "passages",
            "epsilon": float(epsilon),
            "n_paths": passages.n_paths,
            "n_arrived": passages.n_arrived,
            "mean": passages.mean,
            "stderr": stderr,
            "ek_prediction": formula,
            "ratio": passages.mean / formula,
        }
        outputs.append(_write_json(out / "classical.json", summary))
        outputs.append(
            _write_csv(out / "passages.csv", ["passage_time"], ((t,) for t in passages.times))
        )
    return outputs


_RUNNERS = {
    "spectrum": _cmd_spectrum,
    "husimi": _cmd_husimi,
    "collapse-static": _cmd_collapse_static,
    "evolve": _cmd_evolve,
    "born": _cmd_born,
    "two-level": _cmd_two_level,
    "wkb": _cmd_wkb,
    "classical": _cmd_classical,
}


def _cmd_sweep(cfg: dict, out: Path) -> list[Path]:
    sw = cfg["sweep"]
    param, values, target = sw["param"], sw["values"], sw["target"]
    if target not in _RUNNERS:
        raise ConfigError([("/sweep/target", f"must be one of {sorted(_RUNNERS)}")])
    if not values:
        raise ConfigError([("/sweep/values", "need at least one value")])
    pointer = param.split(".") if param else []
    if not pointer:
        raise ConfigError([("/sweep/param", "missing parameter name")])

    def member_config(value: float) -> dict:
        member = deepcopy(cfg)
        node = member
        for key in pointer[:-1]:
            node = node[key]
        node[pointer[-1]] = value
        return member

    def run_member(idx_value: tuple[int, float]) -> tuple[float, dict]:
        idx, value = idx_value
        member = member_config(value)
        sub_out = out / f"member-{idx:03d}"
        sub_out.mkdir(parents=True, exist_ok=True)
        _RUNNERS[target](member, sub_out)
        summary = json.loads((sub_out / _SUMMARY_FILE[target]).read_text())
        return value, summary

    threads = cfg["threads"] or 1
    items = list(enumerate(values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_member, items))
    else:
        results = [run_member(item) for item in items]

    keys = sorted(
        {k for _, summary in results for k, v in summary.items() if _is_num(v)}
    )
    rows = [[value] + [summary.get(k, "") for k in keys] for value, summary in results]
    outputs = [_write_csv(out / "sweep.csv", [param] + keys, rows)]

    sweep_summary: dict = {"param": param, "values": list(values), "target": target}
    if param == "hbar" and target == "spectrum":
        hbars = np.array([v for v, _ in results], dtype=float)
        deltas = np.array([s["splitting"] for _, s in results], dtype=float)
        slope, intercept = np.polyfit(1.0 / hbars, np.log(deltas), 1)
        sweep_summary["log_splitting_slope"] = float(slope)
        sweep_summary["log_splitting_intercept"] = float(intercept)
        outputs.append(
            line_plot(
                out / "splitting.svg",
                [(1.0 / hbars, deltas, "splitting")],
                title=f"splitting vs 1/hbar (slope {slope:.4f})",
                x_label="1/hbar",
                y_label="splitting",
                log_y=True,
            )
        )
    outputs.append(_write_json(out / "sweep.json", sweep_summary))
    return outputs


_SUMMARY_FILE = {
    "spectrum": "spectrum.json",
    "husimi": "husimi.json",
    "collapse-static": "collapse.json",
    "evolve": "evolve.json",
    "born": "born.json",
    "two-level": "two_level.json",
    "wkb": "wkb.json",
    "classical": "classical.json",
}


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flea-lab",
        description="Double-well eigenproblem laboratory: spectra, Husimi "
        "functions, flea perturbations, collapse dynamics, and classical baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON config file (flags win over file)")
    common.add_argument("--out", type=str, help="output root directory (default: out)")
    common.add_argument("--seed", type=int, help="RNG seed (env fallback FLEA_LAB_SEED)")
    common.add_argument("--threads", type=int, help="worker pool size (env fallback FLEA_LAB_THREADS)")
    common.add_argument("--hbar", type=float)
    common.add_argument("--n", type=int, help="spatial grid points")
    common.add_argument("--half-width", type=float, help="box half-width override")
    common.add_argument("--kind", choices=KINDS)
    common.add_argument("--omega", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--b", type=float, help="flea center")
    common.add_argument("--c", type=float, help="flea half-width")
    common.add_argument("--d", type=float, help="flea strength")
    common.add_argument("--ramp-t", dest="ramp_t", type=float, help="ramp duration T")
    common.add_argument("--dt", type=float)
    common.add_argument("--t-end", dest="t_end", type=float)
    common.add_argument("--snapshots", type=str, help="comma-separated snapshot times")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("spectrum", parents=[common]).add_argument("--k", type=int, help="levels to solve")
    p_h = sub.add_parser("husimi", parents=[common])
    p_h.add_argument("--state", choices=("ground", "coherent"))
    p_h.add_argument("--p0", type=float)
    p_h.add_argument("--q0", type=float)
    p_h.add_argument("--radius", type=float, help="classical disk radius")
    sub.add_parser("collapse-static", parents=[common])
    sub.add_parser("evolve", parents=[common])
    p_b = sub.add_parser("born", parents=[common])
    p_b.add_argument("--threshold", type=float)
    p_t = sub.add_parser("two-level", parents=[common])
    p_t.add_argument("--model", choices=("quench", "brownian", "poisson"))
    p_t.add_argument("--delta", type=float, help="flea strength delta")
    p_t.add_argument("--big-delta", dest="big_delta", type=float, help="splitting Delta")
    p_t.add_argument("--side", choices=("left", "right"))
    p_t.add_argument("--rate", type=float, help="Poisson jump rate")
    p_t.add_argument("--noise", type=float, help="Brownian noise amplitude")
    p_t.add_argument("--paths", type=int, help="ensemble size")
    p_w = sub.add_parser("wkb", parents=[common])
    p_w.add_argument("--pair-index", dest="pair_index", type=int)
    p_w.add_argument("--no-compare", action="store_true", help="skip the eigensolver cross-check")
    p_c = sub.add_parser("classical", parents=[common])
    p_c.add_argument("--mode", choices=("passages", "orbit"))
    p_c.add_argument("--epsilon", type=float)
    p_c.add_argument("--paths", type=int)
    p_c.add_argument("--p0", type=float)
    p_c.add_argument("--q0", type=float)
    p_s = sub.add_parser("sweep", parents=[common])
    p_s.add_argument("--param", type=str, help="config path to sweep, e.g. hbar")
    p_s.add_argument("--values", type=str, help="comma-separated values")
    p_s.add_argument("target", choices=sorted(_RUNNERS), help="subcommand to run per value")
    return parser


def _apply_flags(document: dict, args: argparse.Namespace) -> dict:
    doc = deepcopy(document)

    def setd(path: list[str], value) -> None:
        if value is None:
            return
        node = doc
        for key in path[:-1]:
            node = node.setdefault(key, {})
            if node is None:
                return
        node[path[-1]] = value

    setd(["hbar"], getattr(args, "hbar", None))
    setd(["out_dir"], getattr(args, "out", None))
    setd(["seed"], getattr(args, "seed", None))
    setd(["threads"], getattr(args, "threads", None))
    setd(["grid", "n"], getattr(args, "n", None))
    setd(["grid", "half_width"], getattr(args, "half_width", None))
    setd(["potential", "kind"], getattr(args, "kind", None))
    setd(["potential", "omega"], getattr(args, "omega", None))
    setd(["potential", "lambda"], getattr(args, "lam", None))
    flea_flags = {k: getattr(args, k, None) for k in ("b", "c", "d")}
    if any(v is not None for v in flea_flags.values()):
        flea = doc.setdefault("potential", {}).get("flea") or {}
        for k, v in flea_flags.items():
            if v is not None:
                flea[k] = v
        doc["potential"]["flea"] = flea
    if getattr(args, "ramp_t", None) is not None:
        doc.setdefault("potential", {})["ramp"] = {"T": args.ramp_t}
    setd(["propagation", "dt"], getattr(args, "dt", None))
    setd(["propagation", "t_end"], getattr(args, "t_end", None))
    if getattr(args, "snapshots", None):
        doc.setdefault("propagation", {})["snapshots"] = [
            float(s) for s in args.snapshots.split(",") if s.strip()
        ]
    setd(["spectrum", "k"], getattr(args, "k", None))
    setd(["husimi", "state"], getattr(args, "state", None))
    setd(["husimi", "radius"], getattr(args, "radius", None))
    setd(["born", "threshold"], getattr(args, "threshold", None))
    setd(["two_level", "model"], getattr(args, "model", None))
    setd(["two_level", "delta_flea"], getattr(args, "delta", None))
    setd(["two_level", "delta_split"], getattr(args, "big_delta", None))
    setd(["two_level", "side"], getattr(args, "side", None))
    setd(["two_level", "rate"], getattr(args, "rate", None))
    setd(["two_level", "noise"], getattr(args, "noise", None))
    setd(["wkb", "pair_index"], getattr(args, "pair_index", None))
    if getattr(args, "no_compare", False):
        doc.setdefault("wkb", {})["compare"] = False
    if args.subcommand == "classical":
        setd(["classical", "mode"], getattr(args, "mode", None))
        setd(["classical", "epsilon"], getattr(args, "epsilon", None))
        setd(["classical", "n_paths"], getattr(args, "paths", None))
        setd(["classical", "p0"], getattr(args, "p0", None))
        setd(["classical", "q0"], getattr(args, "q0", None))
    elif args.subcommand == "two-level":
        setd(["two_level", "n_paths"], getattr(args, "paths", None))
    elif args.subcommand == "husimi":
        setd(["husimi", "p0"], getattr(args, "p0", None))
        setd(["husimi", "q0"], getattr(args, "q0", None))
    if args.subcommand == "sweep":
        setd(["sweep", "param"], getattr(args, "param", None))
        setd(["sweep", "target"], getattr(args, "target", None))
        if getattr(args, "values", None):
            doc.setdefault("sweep", {})["values"] = [
                float(s) for s in args.values.split(",") if s.strip()
            ]
    return doc


def _env_defaults(cfg: dict) -> None:
    if cfg["threads"] is None:
        env = os.environ.get("FLEA_LAB_THREADS")
        cfg["threads"] = int(env) if env else (os.cpu_count() or 1)
    if "FLEA_LAB_SEED" in os.environ and cfg["seed"] == _DEFAULTS["seed"]:
        cfg["seed"] = int(os.environ["FLEA_LAB_SEED"])


def run(argv: list[str]) -> int:
    """Parse argv, run the subcommand, write artifacts; return the exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        document = {}
        if args.config:
            document = json.loads(Path(args.config).read_text())
        document = _apply_flags(document, args)
        cfg = validate_config(document)
        _env_defaults(cfg)
    except ConfigError as err:
        for pointer, msg in err.issues:
            print(f"config error at {pointer or '/'}: {msg}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    out = _out_dir(args.subcommand, cfg)
    try:
        if args.subcommand == "sweep":
            outputs = _cmd_sweep(cfg, out)
        else:
            outputs = _RUNNERS[args.subcommand](cfg, out)
    except ConfigError as err:
        for pointer, msg in err.issues:
            print(f"config error at {pointer or '/'}: {msg}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (FleaLabError, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    manifest = _manifest(out, args.subcommand, cfg, outputs)
    print(f"wrote {len(outputs) + 1} artifacts under {out}")
    print(f"manifest: {manifest}")
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
