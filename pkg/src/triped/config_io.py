"""Config files, run manifests, and bit-stable output serialization.

Config files are flat ``key = value`` text under ``[section]`` headers —
diff-friendly for sweep studies.  ``#`` starts a comment.  All angles in
files are **degrees** (keys end in ``_deg``); everything internal is
radians.  An empty file is the fully documented default configuration: the
reference gait on the 25-degree slope.  A ``[sweep]`` section turns the file
into a sweep specification whose other sections form the base
configuration.

Serialization writes every float with 17 significant digits, so parsing the
emitted text reproduces the exact double.  Degrees are chosen per angle so
that converting back to radians is bit-exact whenever such a degree value
exists — it always does for configs that came from a file, making
``parse(emit(config)) == config`` on the file-expressible space.

Every run directory gets a ``manifest.json`` naming the tool version, the
resolved configuration (canonical text + digest), and the digests of every
output file; the data files are keyed to their manifest by the shared run
directory and by the run id embedded in the JSON outputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analysis import PeriodicOrbit, SweepSample
from .control import max_static_incline
from .errors import ConfigParseError, ConfigValidationError
from .params import (ControllerConfig, ControllerGains, GaitTargets,
                     RobotParams, SimConfig, SweepSpec)
from .simulate import GaitSummary

#: Exact column contract of the trajectory file.
TRAJECTORY_HEADER = "t,q1,q2,q3,dq1,dq2,dq3,u1,u2,eta1,eta2,wI1,wI2,zdelta,step"


class StaticStabilityWarning(UserWarning):
    """A configured slope exceeds the static-stability bound (walking may
    still succeed dynamically; the configuration is accepted)."""


def _g17(x: float) -> str:
    return f"{x:.17g}"


def _degrees_exact(radians_value: float) -> float:
    """Degrees whose conversion back to radians is bit-exact when possible.

    ``degrees`` and ``radians`` are not exact inverses in floating point;
    searching a few neighboring degree doubles recovers the one that maps
    back exactly whenever the radian value is expressible from degrees at
    all (always true for values that were parsed from a file).
    """
    d = math.degrees(radians_value)
    if math.radians(d) == radians_value:
        return d
    up = down = d
    for _ in range(4):
        up = math.nextafter(up, math.inf)
        if math.radians(up) == radians_value:
            return up
        down = math.nextafter(down, -math.inf)
        if math.radians(down) == radians_value:
            return down
    return d


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_FLOAT, _ANGLE, _INT, _BOOL, _STR = "float", "angle", "int", "bool", "str"

#: section -> key -> value kind.  The single source of truth for the format.
_SCHEMA: dict[str, dict[str, str]] = {
    "plant": {k: _FLOAT for k in ("leg_mass", "hip_mass", "torso_mass",
                                  "leg_length", "torso_length", "gravity")},
    "controller": {
        "kp": _FLOAT, "kd": _FLOAT, "ki": _FLOAT,
        "lambda_assumed_deg": _ANGLE,
        "error_weighting": _STR, "integrator_reset": _STR,
        "det_floor": _FLOAT,
        **{f"model_{k}": _FLOAT for k in ("leg_mass", "hip_mass", "torso_mass",
                                          "leg_length", "torso_length",
                                          "gravity")},
    },
    "targets": {"q1_switch_deg": _ANGLE, "q3_ref_deg": _ANGLE},
    "sim": {
        "lambda_true_deg": _ANGLE, "n_steps": _INT,
        "rel_tol": _FLOAT, "abs_tol": _FLOAT, "max_step_time": _FLOAT,
        "delta": _FLOAT, "scuff_tol": _FLOAT, "sample_dt": _FLOAT,
        "strict_scuff": _BOOL,
    },
    "initial": {"q1_deg": _ANGLE, "q2_deg": _ANGLE, "q3_deg": _ANGLE,
                "dq1": _FLOAT, "dq2": _FLOAT, "dq3": _FLOAT},
    "sweep": {"axis": _STR, "rel_min": _FLOAT, "rel_max": _FLOAT,
              "n_samples": _INT},
}


def _convert(kind: str, raw: str):
    if kind == _STR:
        return raw.strip()
    if kind == _BOOL:
        return _parse_bool(raw)
    if kind == _INT:
        return int(raw.strip(), 10)
    value = float(raw)
    return math.radians(value) if kind == _ANGLE else value


def parse_config_text(text: str, source: str = "<string>"):
    """Parse config text into a :class:`SimConfig` or :class:`SweepSpec`.

    Raises:
        ConfigParseError: malformed line, unknown section/key, bad value,
            duplicate key.
        ConfigValidationError: well-formed but violates an invariant.
    """
    values: dict[str, dict[str, object]] = {name: {} for name in _SCHEMA}
    seen_sections: set[str] = set()
    section: str | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigParseError(
                    f"unknown section [{section}] in {source}",
                    line_no=line_no)
            seen_sections.add(section)
            continue
        if "=" not in line:
            raise ConfigParseError(
                f"expected 'key = value' in {source}: {line!r}",
                line_no=line_no)
        if section is None:
            raise ConfigParseError(
                f"key outside any [section] in {source}: {line!r}",
                line_no=line_no)
        key, _, raw_value = line.partition("=")
        key = key.strip().lower()
        if key not in _SCHEMA[section]:
            raise ConfigParseError(
                f"unknown key {key!r} in section [{section}] of {source}",
                line_no=line_no, key=key)
        if key in values[section]:
            raise ConfigParseError(
                f"duplicate key {key!r} in section [{section}] of {source}",
                line_no=line_no, key=key)
        try:
            values[section][key] = _convert(_SCHEMA[section][key], raw_value)
        except ValueError as exc:
            raise ConfigParseError(
                f"bad value for {key!r} in {source}: {exc}",
                line_no=line_no, key=key) from exc
    return _build_config(values, sweep="sweep" in seen_sections)


def parse_config(path) -> SimConfig | SweepSpec:
    """Parse a config file; empty file = the documented default setup."""
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def _build_config(values: dict[str, dict[str, object]],
                  sweep: bool) -> SimConfig | SweepSpec:
    plant = replace(RobotParams(), **values["plant"])

    ctrl_in = dict(values["controller"])
    gains = ControllerGains(kp=ctrl_in.pop("kp", 1500.0),
                            kd=ctrl_in.pop("kd", 1250.0),
                            ki=ctrl_in.pop("ki", 120.0))
    model_overrides = {k[len("model_"):]: ctrl_in.pop(k)
                       for k in list(ctrl_in) if k.startswith("model_")}
    # The controller's model deliberately defaults to the nominal robot, not
    # to the configured plant: mismatch studies perturb the plant only.
    model = replace(RobotParams(), **model_overrides)
    targets = GaitTargets(
        q1_switch=values["targets"].get("q1_switch_deg", math.radians(15.0)),
        q3_ref=values["targets"].get("q3_ref_deg", math.radians(105.0)))
    controller = ControllerConfig(
        gains=gains, model=model,
        incline_assumed=ctrl_in.pop("lambda_assumed_deg", math.radians(25.0)),
        targets=targets,
        error_weighting=ctrl_in.pop("error_weighting", "raw"),
        integrator_reset=ctrl_in.pop("integrator_reset", "carry"),
        det_floor=ctrl_in.pop("det_floor", 1e-6))

    sim_in = dict(values["sim"])
    init_in = values["initial"]
    base_state = SimConfig().initial_state
    initial_state = (
        init_in.get("q1_deg", base_state[0]),
        init_in.get("q2_deg", base_state[1]),
        init_in.get("q3_deg", base_state[2]),
        init_in.get("dq1", base_state[3]),
        init_in.get("dq2", base_state[4]),
        init_in.get("dq3", base_state[5]),
    )
    cfg = SimConfig(
        plant=plant,
        incline_true=sim_in.pop("lambda_true_deg", math.radians(25.0)),
        controller=controller,
        initial_state=initial_state,
        **sim_in)
    cfg.validate()
    _warn_static_stability(cfg)
    if not sweep:
        return cfg
    sweep_in = values["sweep"]
    rel_range = (sweep_in.get("rel_min", -0.5), sweep_in.get("rel_max", 0.5))
    spec = SweepSpec(axis=sweep_in.get("axis", "all_masses"),
                     rel_range=rel_range,
                     n_samples=sweep_in.get("n_samples", 5),
                     base=cfg)
    spec.validate()
    return spec


def _warn_static_stability(cfg: SimConfig) -> None:
    checks = (
        ("lambda_true_deg", cfg.incline_true, max_static_incline(cfg.plant)),
        ("lambda_assumed_deg", cfg.controller.incline_assumed,
         max_static_incline(cfg.controller.model)),
    )
    for key, incline, bound in checks:
        if abs(incline) > bound:
            warnings.warn(
                f"{key} = {math.degrees(incline):.2f} deg exceeds the "
                f"static-stability bound {math.degrees(bound):.2f} deg; no "
                "standing equilibrium exists there (dynamic walking may "
                "still succeed)", StaticStabilityWarning, stacklevel=3)


def write_config(config: SimConfig | SweepSpec) -> str:
    """Canonical text for a configuration; inverse of the parser."""
    if isinstance(config, SweepSpec):
        cfg, spec = config.base, config
    else:
        cfg, spec = config, None
    p, c, t = cfg.plant, cfg.controller, cfg.controller.targets
    x0 = cfg.initial_state
    lines = [
        "[plant]",
        *(f"{k} = {_g17(getattr(p, k))}" for k in _SCHEMA["plant"]),
        "",
        "[controller]",
        f"kp = {_g17(c.gains.kp)}",
        f"kd = {_g17(c.gains.kd)}",
        f"ki = {_g17(c.gains.ki)}",
        f"lambda_assumed_deg = {_g17(_degrees_exact(c.incline_assumed))}",
        f"error_weighting = {c.error_weighting}",
        f"integrator_reset = {c.integrator_reset}",
        f"det_floor = {_g17(c.det_floor)}",
        *(f"model_{k} = {_g17(getattr(c.model, k))}"
          for k in _SCHEMA["plant"]),
        "",
        "[targets]",
        f"q1_switch_deg = {_g17(_degrees_exact(t.q1_switch))}",
        f"q3_ref_deg = {_g17(_degrees_exact(t.q3_ref))}",
        "",
        "[sim]",
        f"lambda_true_deg = {_g17(_degrees_exact(cfg.incline_true))}",
        f"n_steps = {cfg.n_steps}",
        f"rel_tol = {_g17(cfg.rel_tol)}",
        f"abs_tol = {_g17(cfg.abs_tol)}",
        f"max_step_time = {_g17(cfg.max_step_time)}",
        f"delta = {_g17(cfg.delta)}",
        f"scuff_tol = {_g17(cfg.scuff_tol)}",
        f"sample_dt = {_g17(cfg.sample_dt)}",
        f"strict_scuff = {'true' if cfg.strict_scuff else 'false'}",
        "",
        "[initial]",
        f"q1_deg = {_g17(_degrees_exact(x0[0]))}",
        f"q2_deg = {_g17(_degrees_exact(x0[1]))}",
        f"q3_deg = {_g17(_degrees_exact(x0[2]))}",
        f"dq1 = {_g17(x0[3])}",
        f"dq2 = {_g17(x0[4])}",
        f"dq3 = {_g17(x0[5])}",
    ]
    if spec is not None:
        lines += [
            "",
            "[sweep]",
            f"axis = {spec.axis}",
            f"rel_min = {_g17(spec.rel_range[0])}",
            f"rel_max = {_g17(spec.rel_range[1])}",
            f"n_samples = {spec.n_samples}",
        ]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Run manifests and output emission
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    """Identity card of one run: version, resolved config, input digest."""

    run_id: str
    version: str
    created: str
    config_text: str
    config_digest: str
    input_digest: str | None = None
    seed: int | None = None


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def make_manifest(config: SimConfig | SweepSpec, input_text: str | None = None,
                  seed: int | None = None) -> RunManifest:
    """Build the manifest for a resolved configuration.

    ``seed`` is recorded for provenance only; the dynamics are
    deterministic and nothing consumes it yet.
    """
    from . import __version__
    config_text = write_config(config)
    digest = _sha256(config_text.encode())
    return RunManifest(
        run_id=digest[:16],
        version=__version__,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        config_text=config_text,
        config_digest=digest,
        input_digest=None if input_text is None else _sha256(input_text.encode()),
        seed=seed)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_manifest(outdir: Path, manifest: RunManifest,
                    files: dict[str, Path]) -> Path:
    path = outdir / "manifest.json"
    payload = {
        "run_id": manifest.run_id,
        "version": manifest.version,
        "created": manifest.created,
        "config_digest": manifest.config_digest,
        "input_digest": manifest.input_digest,
        "seed": manifest.seed,
        "config": manifest.config_text.splitlines(),
        "outputs": {name: _sha256(p.read_bytes())
                    for name, p in sorted(files.items())},
    }
    _write_json(path, payload)
    return path


def emit_outputs(summary: GaitSummary, manifest: RunManifest,
                 outdir) -> dict[str, Path]:
    """Write the gait run's data files; returns name -> path.

    Files: ``trajectory.csv`` (sampled states, torques, controller
    internals), ``steps.json`` (per-step records), ``step_times.csv`` and
    ``phase.csv`` (plot-ready projections), ``manifest.json``.  Identical
    runs produce byte-identical data files; only the manifest timestamp
    varies.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}

    rows = [TRAJECTORY_HEADER]
    for traj in summary.trajectories:
        for i in range(len(traj.t)):
            cells = [traj.t[i], *traj.q[i], *traj.dq[i], *traj.u[i],
                     *traj.eta[i], *traj.omega_I[i], traj.zdelta[i]]
            rows.append(",".join(_g17(c) for c in cells)
                        + f",{traj.step_index}")
    files["trajectory.csv"] = outdir / "trajectory.csv"
    files["trajectory.csv"].write_text("\n".join(rows) + "\n", encoding="utf-8")

    record_payload = []
    for r in summary.records:
        record_payload.append({
            "step_index": r.step_index,
            "t_start": _jsonable(r.t_start),
            "t_end": _jsonable(r.t_end),
            "step_time": _jsonable(r.step_time),
            "x_post_impact": _jsonable(r.x_post_impact),
            "x_pre_impact": _jsonable(r.x_pre_impact),
            "z_delta_at_impact": _jsonable(r.z_delta_at_impact),
            "min_foot_clearance": _jsonable(r.min_foot_clearance),
            "impulse": _jsonable(r.impulse),
            "liftoff_normal_velocity": _jsonable(r.liftoff_normal_velocity),
            "impact_energy_loss": _jsonable(r.impact_energy_loss),
            "min_abs_det_input": _jsonable(r.min_abs_det_input),
            "scuffed": r.scuffed,
            "aborted": r.aborted,
            "abort_reason": r.abort_reason,
        })
    files["steps.json"] = outdir / "steps.json"
    _write_json(files["steps.json"], {
        "run_id": manifest.run_id,
        "aborted": summary.aborted,
        "abort_reason": summary.abort_reason,
        "completed_steps": summary.completed_steps,
        "records": record_payload,
    })

    lines = ["step,t_start,t_end,step_time,zdelta"]
    for r in summary.records:
        if r.aborted:
            continue
        lines.append(f"{r.step_index},{_g17(r.t_start)},{_g17(r.t_end)},"
                     f"{_g17(r.step_time)},{_g17(r.z_delta_at_impact)}")
    files["step_times.csv"] = outdir / "step_times.csv"
    files["step_times.csv"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["t,q1,dq1,dq3,step"]
    for traj in summary.trajectories:
        for i in range(len(traj.t)):
            lines.append(f"{_g17(traj.t[i])},{_g17(traj.q[i, 0])},"
                         f"{_g17(traj.dq[i, 0])},{_g17(traj.dq[i, 2])},"
                         f"{traj.step_index}")
    files["phase.csv"] = outdir / "phase.csv"
    files["phase.csv"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    files["manifest.json"] = _write_manifest(outdir, manifest, files)
    return files


def emit_sweep_outputs(samples: list[SweepSample], manifest: RunManifest,
                       outdir) -> dict[str, Path]:
    """Write the sweep table (`sweep.csv`, `sweep.json`, `manifest.json`)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}

    lines = ["index,axis,value,completed_steps,aborted,converged,"
             "step_time,rho_hat,worst_z_delta"]
    for s in samples:
        lines.append(
            f"{s.index},{s.axis},{_g17(s.value)},{s.completed_steps},"
            f"{str(s.aborted).lower()},{str(s.converged).lower()},"
            f"{_g17(s.step_time)},{_g17(s.rho_hat)},{_g17(s.worst_z_delta)}")
    files["sweep.csv"] = outdir / "sweep.csv"
    files["sweep.csv"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    files["sweep.json"] = outdir / "sweep.json"
    _write_json(files["sweep.json"], {
        "run_id": manifest.run_id,
        "samples": [{
            "index": s.index, "axis": s.axis, "value": _jsonable(s.value),
            "completed_steps": s.completed_steps, "aborted": s.aborted,
            "abort_reason": s.abort_reason, "converged": s.converged,
            "step_time": _jsonable(s.step_time),
            "rho_hat": _jsonable(s.rho_hat),
            "worst_z_delta": _jsonable(s.worst_z_delta),
        } for s in samples],
    })
    files["manifest.json"] = _write_manifest(outdir, manifest, files)
    return files


def emit_orbit_outputs(orbit: PeriodicOrbit, manifest: RunManifest,
                       outdir) -> dict[str, Path]:
    """Write the periodic-orbit result (`orbit.json`, `manifest.json`)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}
    files["orbit.json"] = outdir / "orbit.json"
    _write_json(files["orbit.json"], {
        "run_id": manifest.run_id,
        "x_star": _jsonable(orbit.x_star),
        "omega_I_star": _jsonable(orbit.omega_I_star),
        "step_time": _jsonable(orbit.step_time),
        "rho_hat": _jsonable(orbit.rho_hat),
        "iterations": orbit.iterations,
        "distances": _jsonable(orbit.distances),
    })
    files["manifest.json"] = _write_manifest(outdir, manifest, files)
    return files
