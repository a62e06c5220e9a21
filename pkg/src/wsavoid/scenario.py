"""Scenario file parsing/validation and trajectory/field CSV export.

Scenario files are line-oriented: ``[section]`` headers, ``key = value``
pairs, 3-vectors written ``(x, y, z)``, ``#`` comments.  Sections are
``[workspace] [obstacle] [ds] [flow] [integrator] [starts]``; the starts
section holds one bare vector per line.  Unknown sections and keys are
rejected.  The two CSV formats written here are stable interfaces:

* trajectory: header ``t,x,y,z,vx,vy,vz,mode,gamma_o,gamma_w``
* field:      header ``x,y,z,vx,vy,vz,mode``

Reals are printed with 9 significant digits, mode tokens are
``free|combined|intersect`` (plus ``invalid`` for out-of-domain field rows),
and a missing obstacle leaves ``gamma_o`` empty.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, replace
from typing import Optional, TextIO, Union

import numpy as np

from .errors import InvalidInput, ParseError, ScenarioWarning, ValidationError
from .flow import (
    FlowParams,
    LinearAttractor,
    Mode,
    OriginalDs,
    ScaledRadial,
    SignPreference,
)
from .geometry import Superquadric, Vec3, as_vec3, gamma
from .integrator import FIELD_INVALID, FieldSamples, IntegratorConfig, Trajectory

_START_SLACK = 1e-9

MODE_TOKENS = {
    int(Mode.FREE): "free",
    int(Mode.COMBINED): "combined",
    int(Mode.INTERSECT): "intersect",
    FIELD_INVALID: "invalid",
}
_TOKEN_MODES = {v: k for k, v in MODE_TOKENS.items()}

_SECTION_KEYS = {
    "workspace": {"center", "axes", "power"},
    "obstacle": {"center", "axes", "power", "margin"},
    "ds": {"type", "target", "gain", "row1", "row2", "row3"},
    "flow": {"v_th", "sign_pref", "beta1", "beta2", "lambda_w", "eps_weight", "baseline"},
    "integrator": {"dt", "max_steps", "goal_tol", "guard", "record_stride"},
    "starts": set(),
}

_VEC_RE = re.compile(
    r"^\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)$"
)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete simulation description."""

    workspace: Superquadric
    ds: OriginalDs
    starts: list
    obstacle: Optional[Superquadric] = None
    flow: FlowParams = FlowParams()
    modulation: "ModulationParams" = None  # filled in __post_init__
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self):
        from .modulation import ModulationParams

        if self.modulation is None:
            object.__setattr__(self, "modulation", ModulationParams())
        object.__setattr__(self, "starts", [as_vec3(s) for s in self.starts])
        if not self.starts:
            raise ValidationError("starts", "at least one start point required")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _parse_vec(text: str, line: int) -> Vec3:
    m = _VEC_RE.match(text.strip())
    if not m:
        raise ParseError(line, f"expected a vector '(x, y, z)', got {text!r}")
    try:
        return np.array([float(m.group(i)) for i in (1, 2, 3)])
    except ValueError:
        raise ParseError(line, f"non-numeric vector component in {text!r}") from None


def _parse_float(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(line, f"expected a number, got {text!r}") from None


def _parse_int(text: str, field: str, line: int) -> int:
    value = _parse_float(text, line)
    if value != int(value):
        raise ValidationError(field, "must be an integer")
    return int(value)


def _parse_bool(text: str, line: int) -> bool:
    if text == "on":
        return True
    if text == "off":
        return False
    raise ParseError(line, f"expected 'on' or 'off', got {text!r}")


def _split_sections(text: str):
    """Raw section/key extraction; values stay as (string, line) pairs."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTION_KEYS:
                raise ParseError(lineno, f"unknown section [{name}]")
            if name in sections:
                raise ParseError(lineno, f"duplicate section [{name}]")
            sections[name] = [] if name == "starts" else {}
            current = name
            continue
        if current is None:
            raise ParseError(lineno, "content before any [section] header")
        if current == "starts":
            sections["starts"].append((line, lineno))
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTION_KEYS[current]:
            raise ParseError(lineno, f"unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ParseError(lineno, f"duplicate key {key!r} in [{current}]")
        sections[current][key] = (value, lineno)
    return sections


def _apply_overrides(sections: dict, overrides: dict) -> None:
    for dotted, value in overrides.items():
        if "." not in dotted:
            raise ValidationError(dotted, "override keys use 'section.key' form")
        section, key = dotted.split(".", 1)
        if section not in _SECTION_KEYS or section == "starts":
            raise ValidationError(dotted, "unknown override section")
        if key not in _SECTION_KEYS[section]:
            raise ValidationError(dotted, "unknown override key")
        sections.setdefault(section, {})[key] = (str(value), 0)


def _take(section: dict, key: str):
    return section.get(key, (None, 0))


def _build_body(section: dict, name: str, allow_margin: bool) -> Superquadric:
    for required in ("center", "axes"):
        if required not in section:
            raise ValidationError(f"{name}.{required}", "missing required key")
    center = _parse_vec(*section["center"])
    axes = _parse_vec(*section["axes"])
    if not np.all(np.isfinite(axes)) or not np.all(axes > 0.0):
        raise ValidationError(f"{name}.axes", "must be positive")
    power_text, power_line = _take(section, "power")
    power = 1 if power_text is None else _parse_int(power_text, f"{name}.power", power_line)
    if power < 1:
        raise ValidationError(f"{name}.power", "must be >= 1")
    margin = 0.0
    if allow_margin:
        margin_text, margin_line = _take(section, "margin")
        if margin_text is not None:
            margin = _parse_float(margin_text, margin_line)
            if not math.isfinite(margin) or margin < 0.0:
                raise ValidationError(f"{name}.margin", "must be >= 0")
    try:
        return Superquadric(center=center, axes=axes, power=power, margin=margin)
    except InvalidInput as exc:
        raise ValidationError(name, str(exc)) from None


def _build_ds(section: dict) -> OriginalDs:
    type_text, _ = _take(section, "type")
    if type_text is None:
        raise ValidationError("ds.type", "missing required key")
    target_text, target_line = _take(section, "target")
    target = (
        np.zeros(3) if target_text is None else _parse_vec(target_text, target_line)
    )
    if type_text == "radial":
        for key in ("row1", "row2", "row3"):
            if key in section:
                raise ValidationError(f"ds.{key}", "only valid for type = linear")
        gain_text, gain_line = _take(section, "gain")
        gain = 1.0 if gain_text is None else _parse_float(gain_text, gain_line)
        if not (math.isfinite(gain) and gain > 0.0):
            raise ValidationError("ds.gain", "must be positive")
        return ScaledRadial(gain=gain, target=target)
    if type_text == "linear":
        if "gain" in section:
            raise ValidationError("ds.gain", "only valid for type = radial")
        rows = []
        for key in ("row1", "row2", "row3"):
            row_text, row_line = _take(section, key)
            rows.append(
                np.eye(3)[len(rows)] if row_text is None else _parse_vec(row_text, row_line)
            )
        try:
            return LinearAttractor(gain_matrix=np.stack(rows), target=target)
        except InvalidInput as exc:
            raise ValidationError("ds.gain_matrix", str(exc)) from None
    raise ValidationError("ds.type", "must be 'radial' or 'linear'")


def _build_flow(section: dict):
    from .modulation import ModulationParams

    kwargs = {}
    for key in ("v_th", "beta1", "beta2"):
        text, line = _take(section, key)
        if text is not None:
            kwargs[key] = _parse_float(text, line)
    text, line = _take(section, "sign_pref")
    if text is not None:
        if text not in ("along", "opposite"):
            raise ValidationError("flow.sign_pref", "must be 'along' or 'opposite'")
        kwargs["sign_pref"] = SignPreference(text)
    text, line = _take(section, "baseline")
    if text is not None:
        kwargs["baseline"] = _parse_bool(text, line)
    try:
        flow = FlowParams(**kwargs)
    except InvalidInput as exc:
        raise ValidationError("flow", str(exc)) from None

    mod_kwargs = {}
    for key in ("lambda_w", "eps_weight"):
        text, line = _take(section, key)
        if text is not None:
            mod_kwargs[key] = _parse_float(text, line)
    try:
        modulation = ModulationParams(**mod_kwargs)
    except InvalidInput as exc:
        raise ValidationError("flow", str(exc)) from None
    return flow, modulation


def _build_integrator(section: dict) -> IntegratorConfig:
    kwargs = {}
    for key in ("dt", "goal_tol"):
        text, line = _take(section, key)
        if text is not None:
            kwargs[key] = _parse_float(text, line)
    for key in ("max_steps", "record_stride"):
        text, line = _take(section, key)
        if text is not None:
            kwargs[key] = _parse_int(text, f"integrator.{key}", line)
    text, line = _take(section, "guard")
    if text is not None:
        kwargs["guard"] = _parse_bool(text, line)
    try:
        return IntegratorConfig(**kwargs)
    except InvalidInput as exc:
        raise ValidationError("integrator", str(exc)) from None


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    """Parse scenario text into a fully validated :class:`Scenario`.

    ``overrides`` maps dotted keys (``flow.sign_pref``) to replacement value
    strings applied before validation.  Raises :class:`ParseError` for syntax
    problems and :class:`ValidationError` for semantic ones; warns (category
    :class:`ScenarioWarning`) when the target is unreachable.
    """
    sections = _split_sections(text)
    if overrides:
        _apply_overrides(sections, overrides)

    for required in ("workspace", "ds", "starts"):
        if required not in sections:
            raise ValidationError(required, "missing required section")

    workspace = _build_body(sections["workspace"], "workspace", allow_margin=False)
    obstacle = (
        _build_body(sections["obstacle"], "obstacle", allow_margin=True)
        if "obstacle" in sections
        else None
    )
    ds = _build_ds(sections["ds"])
    flow, modulation = _build_flow(sections.get("flow", {}))
    integrator = _build_integrator(sections.get("integrator", {}))

    starts = []
    for i, (text_i, line_i) in enumerate(sections["starts"]):
        point = _parse_vec(text_i, line_i)
        if gamma(workspace, point) > 1.0 + _START_SLACK:
            raise ValidationError(f"starts[{i}]", "outside workspace")
        if obstacle is not None and gamma(obstacle, point) < 1.0 - _START_SLACK:
            raise ValidationError(f"starts[{i}]", "inside obstacle")
        starts.append(point)
    if not starts:
        raise ValidationError("starts", "at least one start point required")

    if gamma(workspace, ds.target) > 1.0:
        warnings.warn(
            "target lies outside the workspace; trajectories cannot reach it",
            ScenarioWarning,
            stacklevel=2,
        )
    if obstacle is not None and gamma(obstacle, ds.target) < 1.0:
        warnings.warn(
            "target lies inside the obstacle; trajectories cannot reach it",
            ScenarioWarning,
            stacklevel=2,
        )

    return Scenario(
        workspace=workspace,
        obstacle=obstacle,
        ds=ds,
        flow=flow,
        modulation=modulation,
        integrator=integrator,
        starts=starts,
    )


def load_scenario(path, overrides: dict | None = None) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read(), overrides)


# ---------------------------------------------------------------------------
# Canonical scenario text
# ---------------------------------------------------------------------------

def _fmt_vec(v) -> str:
    return f"({v[0]!r}, {v[1]!r}, {v[2]!r})"


def format_scenario(sc: Scenario) -> str:
    """Canonical text for ``sc``: fixed section/key order, all defaults
    explicit, floats in shortest round-trip form (parse-of-format is exact)."""
    lines = ["[workspace]"]
    lines.append(f"center = {_fmt_vec(sc.workspace.center)}")
    lines.append(f"axes = {_fmt_vec(sc.workspace.axes)}")
    lines.append(f"power = {sc.workspace.power}")
    if sc.obstacle is not None:
        lines += [
            "",
            "[obstacle]",
            f"center = {_fmt_vec(sc.obstacle.center)}",
            f"axes = {_fmt_vec(sc.obstacle.axes)}",
            f"power = {sc.obstacle.power}",
            f"margin = {sc.obstacle.margin!r}",
        ]
    lines += ["", "[ds]"]
    if isinstance(sc.ds, ScaledRadial):
        lines.append("type = radial")
        lines.append(f"gain = {sc.ds.gain!r}")
    else:
        lines.append("type = linear")
        for i in range(3):
            lines.append(f"row{i + 1} = {_fmt_vec(sc.ds.gain_matrix[i])}")
    lines.append(f"target = {_fmt_vec(sc.ds.target)}")
    lines += [
        "",
        "[flow]",
        f"v_th = {sc.flow.v_th!r}",
        f"sign_pref = {sc.flow.sign_pref.value}",
        f"beta1 = {sc.flow.beta1!r}",
        f"beta2 = {sc.flow.beta2!r}",
        f"lambda_w = {sc.modulation.lambda_w!r}",
        f"eps_weight = {sc.modulation.eps_weight!r}",
        f"baseline = {'on' if sc.flow.baseline else 'off'}",
        "",
        "[integrator]",
        f"dt = {sc.integrator.dt!r}",
        f"max_steps = {sc.integrator.max_steps}",
        f"goal_tol = {sc.integrator.goal_tol!r}",
        f"guard = {'on' if sc.integrator.guard else 'off'}",
        f"record_stride = {sc.integrator.record_stride}",
        "",
        "[starts]",
    ]
    lines += [_fmt_vec(s) for s in sc.starts]
    return "\n".join(lines) + "\n"


def write_scenario(sc: Scenario, sink) -> None:
    _write_text(sink, format_scenario(sc))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _write_text(sink, text: str) -> None:
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


TRAJECTORY_HEADER = "t,x,y,z,vx,vy,vz,mode,gamma_o,gamma_w"
FIELD_HEADER = "x,y,z,vx,vy,vz,mode"


def write_trajectory(traj: Trajectory, sink) -> None:
    """Write a trajectory CSV (see module docstring for the exact format)."""
    rows = [TRAJECTORY_HEADER]
    for i in range(len(traj)):
        go = _fmt(traj.gamma_o[i]) if traj.has_obstacle else ""
        rows.append(
            ",".join(
                (
                    _fmt(traj.t[i]),
                    _fmt(traj.xi[i, 0]),
                    _fmt(traj.xi[i, 1]),
                    _fmt(traj.xi[i, 2]),
                    _fmt(traj.v[i, 0]),
                    _fmt(traj.v[i, 1]),
                    _fmt(traj.v[i, 2]),
                    MODE_TOKENS[int(traj.mode[i])],
                    go,
                    _fmt(traj.gamma_w[i]),
                )
            )
        )
    _write_text(sink, "\n".join(rows) + "\n")


def write_field(field: FieldSamples, sink) -> None:
    """Write a field-sweep CSV; out-of-domain rows carry mode ``invalid``."""
    rows = [FIELD_HEADER]
    for i in range(len(field.xi)):
        rows.append(
            ",".join(
                (
                    _fmt(field.xi[i, 0]),
                    _fmt(field.xi[i, 1]),
                    _fmt(field.xi[i, 2]),
                    _fmt(field.v[i, 0]),
                    _fmt(field.v[i, 1]),
                    _fmt(field.v[i, 2]),
                    MODE_TOKENS[int(field.mode[i])],
                )
            )
        )
    _write_text(sink, "\n".join(rows) + "\n")


def _read_lines(source) -> list[str]:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    return [line for line in text.split("\n") if line]


def read_trajectory(source) -> dict:
    """Parse a trajectory CSV back into arrays (gamma_o is NaN when empty)."""
    lines = _read_lines(source)
    if lines[0] != TRAJECTORY_HEADER:
        raise ParseError(1, f"bad trajectory header: {lines[0]!r}")
    n = len(lines) - 1
    out = {
        "t": np.empty(n),
        "xi": np.empty((n, 3)),
        "v": np.empty((n, 3)),
        "mode": np.empty(n, dtype=np.int64),
        "gamma_o": np.empty(n),
        "gamma_w": np.empty(n),
    }
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 10:
            raise ParseError(i + 2, f"expected 10 fields, got {len(parts)}")
        out["t"][i] = float(parts[0])
        out["xi"][i] = [float(p) for p in parts[1:4]]
        out["v"][i] = [float(p) for p in parts[4:7]]
        out["mode"][i] = _TOKEN_MODES[parts[7]]
        out["gamma_o"][i] = float(parts[8]) if parts[8] else np.nan
        out["gamma_w"][i] = float(parts[9])
    return out


def read_field(source) -> dict:
    """Parse a field CSV back into arrays."""
    lines = _read_lines(source)
    if lines[0] != FIELD_HEADER:
        raise ParseError(1, f"bad field header: {lines[0]!r}")
    n = len(lines) - 1
    out = {
        "xi": np.empty((n, 3)),
        "v": np.empty((n, 3)),
        "mode": np.empty(n, dtype=np.int64),
    }
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 7:
            raise ParseError(i + 2, f"expected 7 fields, got {len(parts)}")
        out["xi"][i] = [float(p) for p in parts[0:3]]
        out["v"][i] = [float(p) for p in parts[3:6]]
        out["mode"][i] = _TOKEN_MODES[parts[6]]
    return out
