"""Run a (psi, alpha) sweep and write CSV files plus a JSON manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..oracle import oracle_substitution_solve
from ..pkpd import assemble_system, bis, schnider_params
from ..solver import LinearFracSystem, solve_piecewise
from ..special import DEFAULT_POLICY
from .config import ScenarioConfig, _slug

log = logging.getLogger(__name__)

CSV_HEADER = "t,y1,y2,y3,y4,BIS"
BIS_BAND = (40.0, 60.0)
NONNEG_TOL = 1e-9
MANIFEST_NAME = "manifest.json"


@dataclass
class RunRecord:
    psi: str
    alpha: float
    csv: str | None = None
    sha256: str | None = None
    status: str = "ok"
    error: str | None = None
    bis_final: float | None = None
    bis_min: float | None = None
    band: str | None = None  # below / within / above the 40-60 band at the final time
    deviates_from_band: bool | None = None
    min_state: float | None = None
    oracle_max_rel_discrepancy: float | None = None


@dataclass
class RunManifest:
    library_version: str
    truncation_policy: dict
    parameters: dict
    runs: list = field(default_factory=list)
    groups: list = field(default_factory=list)
    plots: list = field(default_factory=list)
    out_dir: Path | None = None

    @property
    def failed(self) -> list:
        return [r for r in self.runs if r.status != "ok"]

    def to_json(self) -> str:
        data = {
            "library_version": self.library_version,
            "truncation_policy": self.truncation_policy,
            "parameters": self.parameters,
            "runs": [asdict(r) for r in self.runs],
            "groups": self.groups,
            "plots": self.plots,
            "failed_runs": len(self.failed),
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def write(self) -> Path:
        path = Path(self.out_dir) / MANIFEST_NAME
        path.write_text(self.to_json())
        return path


def format_row(values) -> str:
    return ",".join(f"{v:.12g}" for v in values)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_name(psi_desc: str, alpha: float) -> str:
    return f"run_psi-{_slug(psi_desc)}_alpha-{alpha:g}"


def _band(value: float) -> str:
    lo, hi = BIS_BAND
    if value < lo:
        return "below"
    if value > hi:
        return "above"
    return "within"


def _simulate(cfg: ScenarioConfig, A, B, psi, alpha: float, grid, oracle_check: bool):
    sys = LinearFracSystem(A, B, alpha, psi, a=cfg.schedule.start, policy=DEFAULT_POLICY)
    traj = solve_piecewise(sys, cfg.schedule, grid)
    discrepancy = None
    if oracle_check:
        ref = oracle_substitution_solve(sys, cfg.schedule, steps=4000, grid=grid)
        scale = np.maximum(np.max(np.abs(ref.states), axis=0), 1e-300)
        discrepancy = float(np.max(np.abs(traj.states - ref.states) / scale))
    return traj, discrepancy


def run_sweep(cfg: ScenarioConfig, out_dir=None, oracle_check: bool = False) -> RunManifest:
    """Solve every (psi, alpha) pair, write one CSV per run, group CSVs and the manifest.

    A failing run is recorded in the manifest and does not stop the others.
    """
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        params = schnider_params(cfg.patient)
    for w in caught:
        log.warning("%s", w.message)
    A, B = assemble_system(params)
    grid = cfg.grid()

    manifest = RunManifest(
        library_version=__version__,
        truncation_policy=asdict(DEFAULT_POLICY),
        parameters=cfg.echo(),
        out_dir=out,
    )
    manifest.parameters["pkpd"] = {k: float(v) for k, v in asdict(params).items()}

    bis_curves = {}
    state_curves = {}
    pairs = sorted(((p, a) for p in cfg.psi_list for a in cfg.alpha_list), key=lambda pa: (pa[0].descriptor(), pa[1]))
    for psi, alpha in pairs:
        desc = psi.descriptor()
        rec = RunRecord(psi=desc, alpha=alpha)
        manifest.runs.append(rec)
        try:
            traj, rec.oracle_max_rel_discrepancy = _simulate(cfg, A, B, psi, alpha, grid, oracle_check)
            states = traj.states
            if not np.all(np.isfinite(states)):
                raise ArithmeticError("non-finite state values")
            rec.min_state = float(np.min(states))
            if rec.min_state < -NONNEG_TOL:
                raise ArithmeticError(f"state went negative ({rec.min_state:.3e})")
            curve = bis(np.clip(states[:, 3], 0.0, None), cfg.bis)
        except Exception as exc:  # one failed run must not abort the sweep
            rec.status = "failed"
            rec.error = f"{type(exc).__name__}: {exc}"
            log.error("run psi=%s alpha=%g failed: %s", desc, alpha, rec.error)
            continue
        name = run_name(desc, alpha) + ".csv"
        path = out / name
        with path.open("w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for t, y, b in zip(grid, states, curve):
                fh.write(format_row((t, *y, b)) + "\n")
        rec.csv = name
        rec.sha256 = sha256_file(path)
        rec.bis_final = float(curve[-1])
        rec.bis_min = float(np.min(curve))
        rec.band = _band(rec.bis_final)
        rec.deviates_from_band = rec.band != "within"
        bis_curves[(desc, alpha)] = curve
        state_curves[(desc, alpha)] = states

    for group in cfg.groups:
        members = [(p, a) for p in group.psis for a in group.alphas]
        done = [m for m in members if m in bis_curves]
        entry = {"name": group.name, "runs": [run_name(p, a) for p, a in members], "files": []}
        if done:
            labels = [f"psi={p} alpha={a:g}" for p, a in done]
            bis_name = f"group_{group.name}_bis.csv"
            with (out / bis_name).open("w", newline="") as fh:
                fh.write(",".join(["t"] + [f'"{lab}"' for lab in labels]) + "\n")
                for i, t in enumerate(grid):
                    fh.write(format_row([t] + [bis_curves[m][i] for m in done]) + "\n")
            st_name = f"group_{group.name}_states.csv"
            with (out / st_name).open("w", newline="") as fh:
                cols = ["t"] + [f'"y{c + 1} {lab}"' for c in range(4) for lab in labels]
                fh.write(",".join(cols) + "\n")
                for i, t in enumerate(grid):
                    fh.write(format_row([t] + [state_curves[m][i, c] for c in range(4) for m in done]) + "\n")
            entry["files"] = [
                {"file": bis_name, "sha256": sha256_file(out / bis_name)},
                {"file": st_name, "sha256": sha256_file(out / st_name)},
            ]
        manifest.groups.append(entry)

    manifest.write()
    return manifest
