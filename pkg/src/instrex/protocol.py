"""Wire protocol: newline-delimited UTF-8 JSON frames.

One frame = one JSON object per line, LF-terminated. The "type" field
selects the message: "hello" opens a session, "cmd" streams pose commands
master-to-slave, "state" streams scene/phase updates back, "err" reports
protocol violations. Unknown fields are ignored on read. The WebSocket
bridge carries the identical JSON objects, one per text message.

Schema reference: docs/protocol.md.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .pose import Pose


class EncodeError(ValueError):
    """Message failed validation before encoding."""


@dataclass
class FrameError:
    """A malformed frame; carries the offending line, does not poison the stream."""

    line: bytes
    reason: str


@dataclass
class Hello:
    session_id: str
    task: str = "cycle"
    seed: int = 0
    ok: bool | None = None  # set on the server's acknowledgment

    def to_json(self) -> dict:
        d = {"type": "hello", "session_id": self.session_id,
             "task": self.task, "seed": self.seed}
        if self.ok is not None:
            d["ok"] = self.ok
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Hello":
        return cls(str(d["session_id"]), str(d.get("task", "cycle")),
                   int(d.get("seed", 0)), d.get("ok"))


@dataclass
class PoseCommand:
    seq: int
    session_id: str = ""
    client_time_ms: float = 0.0
    delta: Pose = field(default_factory=Pose)
    axial_feed: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.axial_feed) or not math.isfinite(self.client_time_ms):
            raise EncodeError("non-finite command field")

    @property
    def moved(self) -> bool:
        d = self.delta
        return (self.axial_feed != 0.0 or d.x != 0.0 or d.y != 0.0
                or d.z != 0.0 or d.pitch != 0.0 or d.yaw != 0.0
                or d.roll != 0.0)

    def to_json(self) -> dict:
        return {"type": "cmd", "seq": self.seq, "session_id": self.session_id,
                "client_time_ms": self.client_time_ms,
                "delta": self.delta.to_dict(), "axial_feed": self.axial_feed}

    @classmethod
    def from_json(cls, d: dict) -> "PoseCommand":
        return cls(seq=int(d["seq"]), session_id=str(d.get("session_id", "")),
                   client_time_ms=float(d.get("client_time_ms", 0.0)),
                   delta=Pose.from_dict(d["delta"]),
                   axial_feed=float(d.get("axial_feed", 0.0)))


@dataclass
class StateUpdate:
    seq: int  # last applied command seq (0 before any command)
    sim_time: float
    arm_tip: Pose
    phase: str
    failure_mode: str | None = None
    bays: list[dict] = field(default_factory=list)
    instruments: list[dict] = field(default_factory=list)
    events_since_last: list[dict] = field(default_factory=list)
    base_stable: bool = True

    def to_json(self) -> dict:
        return {"type": "state", "seq": self.seq, "sim_time": self.sim_time,
                "arm_tip": self.arm_tip.to_dict(), "phase": self.phase,
                "failure_mode": self.failure_mode, "bays": self.bays,
                "instruments": self.instruments,
                "events_since_last": self.events_since_last,
                "base_stable": self.base_stable}

    @classmethod
    def from_json(cls, d: dict) -> "StateUpdate":
        return cls(seq=int(d["seq"]), sim_time=float(d["sim_time"]),
                   arm_tip=Pose.from_dict(d["arm_tip"]), phase=str(d["phase"]),
                   failure_mode=d.get("failure_mode"),
                   bays=list(d.get("bays", [])),
                   instruments=list(d.get("instruments", [])),
                   events_since_last=list(d.get("events_since_last", [])),
                   base_stable=bool(d.get("base_stable", True)))


@dataclass
class ErrorFrame:
    code: str
    message: str

    def to_json(self) -> dict:
        return {"type": "err", "code": self.code, "message": self.message}

    @classmethod
    def from_json(cls, d: dict) -> "ErrorFrame":
        return cls(str(d["code"]), str(d["message"]))


Message = Hello | PoseCommand | StateUpdate | ErrorFrame

_TYPES = {"hello": Hello, "cmd": PoseCommand, "state": StateUpdate,
          "err": ErrorFrame}


def encode(msg: Message) -> bytes:
    """One LF-terminated JSON line; rejects non-finite numbers."""
    try:
        text = json.dumps(msg.to_json(), allow_nan=False,
                          separators=(",", ":"))
    except ValueError as exc:
        raise EncodeError(f"unencodable message: {exc}") from exc
    return text.encode("utf-8") + b"\n"


def decode(buffer: bytes) -> tuple[list[Message | FrameError], bytes]:
    """Split a byte buffer into complete frames.

    Returns all complete frames in order (malformed lines become
    FrameError entries) plus the unconsumed tail, which may hold a
    partial frame.
    """
    out: list[Message | FrameError] = []
    while True:
        nl = buffer.find(b"\n")
        if nl < 0:
            return out, buffer
        line, buffer = buffer[:nl], buffer[nl + 1:]
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            if not isinstance(d, dict):
                raise ValueError("frame is not a JSON object")
            out.append(_TYPES[d["type"]].from_json(d))
        except KeyError as exc:
            out.append(FrameError(line, f"missing field {exc}"))
        except (ValueError, TypeError) as exc:
            out.append(FrameError(line, str(exc)))
