import json

import pytest
from hypothesis import given, strategies as st

from instrex.pose import Pose
from instrex.protocol import (EncodeError, ErrorFrame, FrameError, Hello,
                              PoseCommand, StateUpdate, decode, encode)

mm = st.floats(-500, 500, allow_nan=False, allow_infinity=False)
deg = st.floats(-179.9, 180, allow_nan=False, allow_infinity=False)

poses = st.builds(Pose, x=mm, y=mm, z=mm, pitch=deg, yaw=deg, roll=deg)
commands = st.builds(
    PoseCommand,
    seq=st.integers(1, 10**9),
    session_id=st.text(st.characters(codec="ascii", categories=("L", "N")),
                       max_size=12),
    client_time_ms=st.floats(0, 1e9, allow_nan=False, allow_infinity=False),
    delta=poses,
    axial_feed=mm,
)
states = st.builds(
    StateUpdate,
    seq=st.integers(0, 10**9),
    sim_time=st.floats(0, 1e6, allow_nan=False, allow_infinity=False),
    arm_tip=poses,
    phase=st.sampled_from(["attach_idle", "aligning", "feeding", "locked"]),
    failure_mode=st.none() | st.just("base_slippage"),
    base_stable=st.booleans(),
)


def test_encode_is_one_json_line():
    raw = encode(PoseCommand(seq=1))
    assert raw.endswith(b"\n") and raw.count(b"\n") == 1
    d = json.loads(raw)
    assert d["type"] == "cmd" and d["seq"] == 1
    assert d["delta"] == {"x": 0.0, "y": 0.0, "z": 0.0,
                          "pitch": 0.0, "yaw": 0.0, "roll": 0.0}


@given(commands)
def test_command_round_trip(msg):
    out, rest = decode(encode(msg))
    assert rest == b"" and out == [msg]


@given(states)
def test_state_round_trip(msg):
    out, rest = decode(encode(msg))
    assert rest == b"" and out == [msg]


def test_hello_and_error_round_trip():
    for msg in (Hello("s1", "cycle", 42), Hello("s1", "attach", 7, ok=True),
                ErrorFrame("seq_gap", "expected 2")):
        assert decode(encode(msg))[0] == [msg]


def test_non_finite_rejected():
    with pytest.raises(EncodeError):
        PoseCommand(seq=1, axial_feed=float("inf"))
    with pytest.raises(ValueError):
        encode(StateUpdate(seq=0, sim_time=0.0,
                           arm_tip=Pose(), phase="x",
                           bays=[{"v": float("nan")}]))


def test_partial_frame_held_back():
    full = encode(PoseCommand(seq=1))
    half = encode(PoseCommand(seq=2))[:-5]
    out, rest = decode(full + half)
    assert len(out) == 1 and rest == half


def test_two_complete_frames():
    buf = encode(PoseCommand(seq=1)) + encode(PoseCommand(seq=2))
    out, rest = decode(buf)
    assert [m.seq for m in out] == [1, 2] and rest == b""


def test_garbage_line_is_isolated():
    buf = (encode(PoseCommand(seq=1)) + b"{not json}\n"
           + encode(PoseCommand(seq=2)))
    out, rest = decode(buf)
    assert rest == b""
    assert isinstance(out[0], PoseCommand)
    assert isinstance(out[1], FrameError) and out[1].line == b"{not json}"
    assert isinstance(out[2], PoseCommand)


def test_unknown_fields_ignored():
    d = json.loads(encode(PoseCommand(seq=3)))
    d["future_field"] = {"nested": 1}
    out, _ = decode(json.dumps(d).encode() + b"\n")
    assert out == [PoseCommand(seq=3)]


def test_missing_type_field():
    out, _ = decode(b'{"seq": 1}\n')
    assert isinstance(out[0], FrameError)


def test_blank_lines_skipped():
    buf = b"\n  \n" + encode(PoseCommand(seq=1)) + b"\n"
    out, rest = decode(buf)
    assert out == [PoseCommand(seq=1)] and rest == b""


def test_moved_property():
    assert not PoseCommand(seq=1).moved
    assert PoseCommand(seq=1, axial_feed=0.1).moved
    assert PoseCommand(seq=1, delta=Pose(yaw=0.5)).moved
