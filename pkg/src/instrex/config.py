"""Structured-text configuration (INI-style key/value sections).

Every key is optional; anything omitted keeps the built-in default.
Schema: docs/config.md.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace

from .channel import ChannelConfig
from .mechanism import InterfaceParams, LatchParams, ToleranceEnvelope
from .operators import OperatorParams, expert_params, novice_params
from .pose import Pose
from .scene import SceneConfig
from .session import MechanismConfig


class ConfigError(ValueError):
    pass


@dataclass
class SimSetup:
    scene: SceneConfig = field(default_factory=SceneConfig)
    mech: MechanismConfig = field(default_factory=MechanismConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    expert: OperatorParams = field(default_factory=expert_params)
    novice: OperatorParams = field(default_factory=novice_params)

    def operator(self, label: str) -> OperatorParams:
        if label == "expert":
            return self.expert
        if label == "novice":
            return self.novice
        raise ConfigError(f"unknown operator {label!r}")


def _parse_pose(text: str) -> Pose:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 6:
        raise ConfigError(f"a pose needs 6 comma-separated numbers, got {text!r}")
    return Pose(*parts)


def _apply(section, obj, converters=None):
    """Overlay a config section onto a frozen dataclass."""
    converters = converters or {}
    known = {f.name: f.type for f in fields(obj)}
    updates = {}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} for {type(obj).__name__}")
        if key in converters:
            updates[key] = converters[key](raw)
        else:
            cur = getattr(obj, key)
            if isinstance(cur, bool):
                updates[key] = raw.lower() in ("1", "true", "yes")
            elif isinstance(cur, int) and not isinstance(cur, bool):
                updates[key] = int(raw)
            elif isinstance(cur, float):
                updates[key] = float(raw)
            else:
                updates[key] = raw
    return replace(obj, **updates) if updates else obj


def load_config(path: str | None) -> SimSetup:
    setup = SimSetup()
    if path is None:
        return setup
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")

    try:
        if parser.has_section("scene"):
            sec = dict(parser["scene"])
            conv = {"home": _parse_pose}
            bay0 = sec.pop("bay0", None)
            bay1 = sec.pop("bay1", None)
            instruments = sec.pop("instruments", None)
            scene = _apply(sec, setup.scene, conv)
            bays = list(scene.bay_poses)
            if bay0 is not None:
                bays[0] = _parse_pose(bay0)
            if bay1 is not None:
                bays[1] = _parse_pose(bay1)
            ins = scene.instruments
            if instruments is not None:
                # e.g. "instr-0:0, instr-1:1"; empty string = none stowed
                ins = tuple(
                    (name.strip(), int(bay))
                    for name, bay in (p.split(":") for p in
                                      instruments.split(",") if p.strip()))
            setup.scene = replace(scene, bay_poses=(bays[0], bays[1]),
                                  instruments=ins)
        if parser.has_section("latch"):
            setup.mech.latch = _apply(parser["latch"], setup.mech.latch)
        if parser.has_section("interface"):
            setup.mech.interface = _apply(parser["interface"],
                                          setup.mech.interface)
        if parser.has_section("envelope"):
            setup.mech.envelope = _apply(parser["envelope"],
                                         setup.mech.envelope)
        if parser.has_section("channel"):
            setup.channel = _apply(parser["channel"], setup.channel)
        if parser.has_section("operator.expert"):
            setup.expert = _apply(parser["operator.expert"], setup.expert)
        if parser.has_section("operator.novice"):
            setup.novice = _apply(parser["operator.novice"], setup.novice)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc

    extra = set(parser.sections()) - {
        "scene", "latch", "interface", "envelope", "channel",
        "operator.expert", "operator.novice"}
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")
    return setup


def dump_operator(params: OperatorParams) -> str:
    """Serialize operator params back to the config text form."""
    lines = [f"[operator.{params.label}]"]
    for f in fields(params):
        if f.name == "label":
            continue
        lines.append(f"{f.name} = {getattr(params, f.name)}")
    return "\n".join(lines) + "\n"
