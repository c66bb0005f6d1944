"""Scenario runner and parameter sweep.

Every run writes its artifacts atomically (temporary file, then rename), so
a reader never sees a half-written CSV.  Numbers are written in shortest
round-trip form; two runs with the same configuration produce identical bytes
regardless of the thread count.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from ..coefficients import Constant, DriftKind, PowerPerturbation
from ..dynamics import (
    LONG_HORIZON,
    IntegrationError,
    energy_lower_bound,
    evolve,
    gronwall_tail_bound,
)
from ..scattering import (
    ProfileError,
    antiphase_time,
    best_free_fit,
    diagonalize,
    diagonalize_series,
    discrepancy_certificate,
    discrepancy_series,
    equipartition_bound,
    equipartition_defect,
    extract_profile,
    cross_term_bound,
    reconstruct_free,
    running_wave_speed,
    speed_sampling_step,
    time_average_cross,
    undiagonalize,
)
from .config import PRNG_NAME, Scenario, load_scenario

__all__ = [
    "PHASE_COLUMNS",
    "REPORT_SCHEMA",
    "SERIES_COLUMNS",
    "RunReport",
    "SweepResult",
    "format_number",
    "run_scenario",
    "sweep",
]

log = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "D", "F", "y_gap", "c_est")
PHASE_COLUMNS = ("a", "p", "drift_kind", "D_final", "witness_sup")

WITNESS_FRACTION = 0.9
WAVE_SPEED_TOL = 1e-2
# relative integrator error allowed on top of a-priori bounds
ENERGY_BUDGET = 1e-8
FREEZE_TOL = 1e-8

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "scenario": {"type": "string"},
        "kind": {"type": "string"},
        "drift": {
            "type": "object",
            "properties": {
                "kind": {"enum": [k.value for k in DriftKind]},
                "f_inf": {"type": ["number", "null"]},
                "certificate": {"type": "string"},
            },
            "required": ["kind", "f_inf", "certificate"],
            "additionalProperties": False,
        },
        "scalars": {"type": "object", "additionalProperties": {"type": "number"}},
        "flags": {"type": "object", "additionalProperties": {"enum": ["pass", "fail"]}},
        "csv_paths": {"type": "array", "items": {"type": "string"}},
        "seed": {"type": ["integer", "null"]},
        "prng": {"type": "string"},
    },
    "required": ["scenario", "kind", "drift", "scalars", "flags", "csv_paths", "seed", "prng"],
    "additionalProperties": False,
}


def format_number(x) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_number(v) for v in row))
    return "\n".join(lines) + "\n"


@dataclass
class RunReport:
    scenario: str
    kind: str
    drift: dict
    scalars: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    csv_paths: list = field(default_factory=list)
    seed: int | None = None
    prng: str = PRNG_NAME

    def __post_init__(self):
        bad = [k for k, v in self.scalars.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite scalars in report: {bad}")

    @property
    def passed(self) -> bool:
        return all(v == "pass" for v in self.flags.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        jsonschema.validate(d, REPORT_SCHEMA)
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _flag(ok) -> str:
    return "pass" if bool(ok) else "fail"


def _fine_grid(t_end, step, extra=()):
    n = max(1, math.ceil(t_end / step))
    grid = np.linspace(0.0, t_end, n + 1)
    if extra:
        grid = np.union1d(grid, np.asarray(extra, dtype=float))
    return grid


def _witness(scn: Scenario, candidate, t0, t_end, threads):
    """``sup D`` against ``candidate`` over ``[t0, t_end]``."""
    h = speed_sampling_step(scn.spectrum, scn.c)
    times = _fine_grid(t_end, h, (t0,))
    traj = evolve(scn.spectrum, scn.initial, scn.c, scn.b, times, scn.integrator, threads)
    D = discrepancy_series(traj, candidate)
    return float(np.max(D[times >= t0]))


def _is_zero(profile) -> bool:
    return isinstance(profile, Constant) and profile.value_ == 0.0


def run_scenario(config, out_dir, threads: int = 1) -> RunReport:
    """Run one scenario and write ``timeseries.csv`` and ``report.json``.

    Parameters
    ----------
    config : str, Path or Scenario
    out_dir : str or Path
        Artifacts go to ``out_dir / scenario.name``.
    threads : int
        Modes integrated concurrently.  Does not affect output bytes.
    """
    scn = config if isinstance(config, Scenario) else load_scenario(config)
    if scn.kind == "verify":
        # invariant tolerances sit near 1e-10, below what the defaults hold
        # over long horizons
        cfg = scn.integrator
        scn = replace(scn, integrator=replace(
            cfg, rel_tol=min(cfg.rel_tol, LONG_HORIZON.rel_tol),
            abs_tol=min(cfg.abs_tol, LONG_HORIZON.abs_tol)))
    spectrum, c, b = scn.spectrum, scn.c, scn.b
    drift = c.classify_drift()
    c_inf = c.limit
    t_max = scn.t_max
    scalars, flags = {}, {}

    profile = extract_profile(scn.initial, c, b, spectrum, scn.profile_tol, scn.integrator,
                              threads=threads)
    y0_norm = diagonalize(scn.initial, 0.0, c, spectrum).norm()

    # the time series needs finely spaced samples for the wave-speed quadrature
    step = speed_sampling_step(spectrum, c)
    per = max(1, math.ceil((t_max / (scn.samples - 1)) / step))
    fine = np.linspace(0.0, t_max, (scn.samples - 1) * per + 1)
    traj = evolve(spectrum, scn.initial, c, b, fine, scn.integrator, threads)
    rows = np.arange(scn.samples) * per

    if drift.convergent and scn.kind != "necessity":
        free = reconstruct_free(profile, drift, c_inf, spectrum)
    else:
        # fit at the nearest sample; the candidate is exact there by construction
        i_fit = int(np.argmin(np.abs(fine - scn.fit_time)))
        free = best_free_fit(traj.state(i_fit), fine[i_fit], c_inf, spectrum)

    D = discrepancy_series(traj, free)
    F = traj.energies()
    Y1, Y2 = diagonalize_series(traj)
    y_gap = np.sqrt(np.cumsum(np.abs(Y1 - profile.y1) ** 2 + np.abs(Y2 - profile.y2) ** 2,
                              axis=1)[:, -1])
    c_est = running_wave_speed(traj)

    out = Path(out_dir) / scn.name
    series_path = out / "timeseries.csv"
    table = zip(fine[rows], D[rows], F[rows], y_gap[rows], c_est[rows])
    _atomic_write(series_path, _csv(SERIES_COLUMNS, table))

    i_tenth = int(np.searchsorted(fine, t_max / 10.0))
    scalars.update({
        "D_t_max": float(D[-1]),
        "D_tenth": float(D[i_tenth]),
        "energy_initial": float(F[0]),
        "energy_min": float(F.min()),
        "profile_norm": profile.norm(),
        "eps_tail": profile.eps_tail,
        "t_trunc": profile.t_trunc,
        "y0_norm": y0_norm,
    })
    if math.isfinite(c_est[-1]):
        scalars["wave_speed_estimate"] = float(c_est[-1])
    if drift.convergent:
        scalars["f_inf"] = drift.f_inf
        for label, T in (("tenth", t_max / 10.0), ("t_max", t_max)):
            scalars[f"equipartition_defect_{label}"] = equipartition_defect(free, T, spectrum)
        scalars["equipartition_bound"] = equipartition_bound(free, spectrum)

    if scn.kind == "sufficiency":
        flags["drift_convergent"] = _flag(drift.convergent)
        flags["D_decreases"] = _flag(D[-1] < D[i_tenth])
        if drift.convergent:
            cert = discrepancy_certificate(profile, c, b, spectrum, t_max, y0_norm)
            scalars["certificate_t_max"] = cert
            flags["D_within_certificate"] = _flag(D[-1] <= cert + profile.eps_tail)
    elif scn.kind == "necessity":
        flags["drift_divergent"] = _flag(drift.kind in (DriftKind.DIVERGENT_TO_INFINITY,
                                                        DriftKind.DIVERGENT_TO_MINUS_INFINITY))
        t_star = antiphase_time(c, scn.fit_time, spectrum, scn.witness_max_time)
        if t_star is not None:
            scalars["antiphase_time"] = t_star
            sup = _witness(scn, free, scn.fit_time, t_star, threads)
            scalars["witness_sup"] = sup
            flags["witness"] = _flag(sup >= WITNESS_FRACTION * profile.norm())
        else:
            flags["witness"] = "fail"
    elif scn.kind == "wave_speed":
        flags["drift_convergent"] = _flag(drift.convergent)
        flags["wave_speed"] = _flag(abs(c_est[-1] - c_inf) <= WAVE_SPEED_TOL)
        if drift.convergent:
            flags["equipartition"] = _flag(
                t_max * scalars["equipartition_defect_t_max"] <= scalars["equipartition_bound"])
    elif scn.kind == "verify":
        lb = energy_lower_bound(F[0], c, b)
        scalars["energy_lower_bound"] = lb
        flags["energy_lower_bound"] = _flag(F.min() >= lb * (1 - ENERGY_BUDGET))
        y0 = diagonalize(scn.initial, 0.0, c, spectrum)
        dy = np.sqrt(np.cumsum(np.abs(Y1 - y0.y1) ** 2 + np.abs(Y2 - y0.y2) ** 2,
                               axis=1)[:, -1])
        bounds = np.array([gronwall_tail_bound(y0_norm, c, b, 0.0, t) for t in fine[rows]])
        flags["gronwall_bound"] = _flag(np.all(dy[rows] <= bounds + ENERGY_BUDGET * y0_norm))
        back = undiagonalize(diagonalize(traj.state(-1), t_max, c, spectrum), t_max, c, spectrum)
        gap = (back - traj.state(-1)).norm()
        flags["diagonal_round_trip"] = _flag(gap <= 1e-13 * max(1.0, traj.state(-1).norm()))
        flags["nontrivial_profile"] = _flag(profile.norm() > 0 or y0_norm == 0)
        if c.is_constant() and _is_zero(b):
            scalars["freeze_gap"] = float(dy.max())
            flags["freeze"] = _flag(dy.max() <= FREEZE_TOL)
        if c.is_constant() and isinstance(b, Constant) and b.value_ >= 0:
            rise = np.diff(F).max() if F.size > 1 else 0.0
            flags["damped_monotone"] = _flag(rise <= 1e-10 * F[0])
        if drift.convergent:
            tac = [abs(time_average_cross(free, T, spectrum)) * T for T in (1.0, 10.0, 100.0)]
            flags["cross_term_decay"] = _flag(max(tac) <= cross_term_bound(free, spectrum) * (1 + 1e-12))
    elif scn.kind == "profile":
        flags["profile_certified"] = _flag(profile.eps_tail <= scn.profile_tol)
        flags["nontrivial_profile"] = _flag(profile.norm() > 0 or y0_norm == 0)

    report = RunReport(scenario=scn.name, kind=scn.kind, drift=drift.to_dict(),
                       scalars=scalars, flags=flags, csv_paths=[str(series_path)],
                       seed=scn.seed)
    _atomic_write(out / "report.json", report.to_json())
    return report


@dataclass
class SweepResult:
    rows: list
    errors: dict
    table_path: str

    @property
    def ok(self) -> bool:
        return not self.errors


def _sweep_cell(scn: Scenario, a: float, p: float):
    c = PowerPerturbation(scn.c.limit, a, p)
    spectrum, b = scn.spectrum, scn.b
    drift = c.classify_drift()
    t0 = min(scn.fit_time, scn.t_max)
    t_star = antiphase_time(c, t0, spectrum, scn.witness_max_time) \
        if not drift.convergent else None
    w_end = t_star if t_star is not None else scn.t_max
    t_end = max(scn.t_max, w_end)
    times = _fine_grid(t_end, speed_sampling_step(spectrum, c), (t0, scn.t_max))
    traj = evolve(spectrum, scn.initial, c, b, times, scn.integrator)
    i_fit = int(np.searchsorted(times, t0))
    i_end = int(np.searchsorted(times, scn.t_max))
    candidate = best_free_fit(traj.state(i_fit), t0, c.limit, spectrum)
    if drift.convergent:
        profile = extract_profile(scn.initial, c, b, spectrum, scn.profile_tol, scn.integrator)
        free = reconstruct_free(profile, drift, c.limit, spectrum)
    else:
        free = candidate
    D = discrepancy_series(traj, free)
    Dw = discrepancy_series(traj, candidate) if free is not candidate else D
    window = (times >= t0) & (times <= w_end)
    cell = {
        "a": a, "p": p, "drift": drift.to_dict(),
        "D_final": float(D[i_end]),
        "witness_sup": float(Dw[window].max()),
        "witness_end": float(w_end),
    }
    return drift.kind.value, cell


def sweep(config, out_dir, threads: int = 1) -> SweepResult:
    """Run every ``(amplitude, exponent)`` cell of the scenario's grid.

    The speed profile of each cell is ``PowerPerturbation(c_inf, a, p)`` with
    ``c_inf`` from the base scenario.  Cells run concurrently; the table is
    assembled in grid order (amplitude outer, exponent inner).  A failing cell
    is reported with NaN entries and does not stop the others.
    """
    scn = config if isinstance(config, Scenario) else load_scenario(config)
    if not scn.grid:
        raise ValueError("scenario has no 'grid' section")
    cells = [(float(a), float(p)) for a in scn.grid["amplitude"] for p in scn.grid["exponent"]]
    out = Path(out_dir) / scn.name

    def run(idx):
        a, p = cells[idx]
        try:
            kind, cell = _sweep_cell(scn, a, p)
            err = None
        except (IntegrationError, ProfileError, ValueError, FloatingPointError) as exc:
            log.warning("sweep cell a=%r p=%r failed: %s", a, p, exc)
            kind = PowerPerturbation(scn.c.limit, a, p).classify_drift().kind.value \
                if a >= 0 else "error"
            cell = {"a": a, "p": p, "error": str(exc)}
            err = str(exc)
        _atomic_write(out / "cells" / f"cell_{idx:04d}.json",
                      json.dumps(cell, indent=2, sort_keys=True) + "\n")
        return kind, cell, err

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(cells))))
    else:
        results = [run(i) for i in range(len(cells))]

    rows, errors = [], {}
    for idx, ((a, p), (kind, cell, err)) in enumerate(zip(cells, results)):
        if err is not None:
            errors[idx] = err
        rows.append((a, p, kind, cell.get("D_final", math.nan), cell.get("witness_sup", math.nan)))
    table_path = out / "phase_table.csv"
    _atomic_write(table_path, _csv(PHASE_COLUMNS, rows))
    return SweepResult(rows=rows, errors=errors, table_path=str(table_path))

