"""End-to-end session tests over real sockets (ephemeral ports)."""

import asyncio
import base64
import hashlib
import os

import pytest

from instrex.channel import ChannelConfig
from instrex.config import SimSetup
from instrex.protocol import (ErrorFrame, Hello, PoseCommand, StateUpdate,
                              decode, encode)
from instrex.server import WS_PATH, ExchangeServer, ServerConfig

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class TcpClient:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self._buf = b""
        self._pending = []

    @classmethod
    async def connect(cls, port):
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        return cls(reader, writer)

    async def send(self, msg):
        self.writer.write(encode(msg))
        await self.writer.drain()

    async def recv(self, timeout=5.0):
        while not self._pending:
            chunk = await asyncio.wait_for(self.reader.read(65536), timeout)
            if not chunk:
                return None
            self._buf += chunk
            msgs, self._buf = decode(self._buf)
            self._pending.extend(msgs)
        return self._pending.pop(0)

    async def recv_until(self, pred, timeout=5.0, limit=2000):
        for _ in range(limit):
            msg = await self.recv(timeout)
            if msg is None:
                return None
            if pred(msg):
                return msg
        raise AssertionError("condition not met within frame limit")

    async def close(self):
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class WsClient:
    """Client-side counterpart of the server's minimal WebSocket endpoint."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, port, path=WS_PATH):
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        key = base64.b64encode(os.urandom(16)).decode()
        writer.write(
            f"GET {path} HTTP/1.1\r\n"
            f"Host: 127.0.0.1:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n\r\n".encode())
        await writer.drain()
        response = await asyncio.wait_for(reader.readuntil(b"\r\n\r\n"), 5.0)
        status = response.split(b"\r\n", 1)[0]
        if b"101" not in status:
            writer.close()
            raise ConnectionError(status.decode("latin-1"))
        expect = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest())
        assert expect in response
        return cls(reader, writer)

    async def send(self, msg):
        payload = encode(msg).rstrip(b"\n")
        mask = os.urandom(4)
        n = len(payload)
        header = bytes([0x81])  # FIN + text
        if n < 126:
            header += bytes([0x80 | n])
        else:
            header += bytes([0x80 | 126]) + n.to_bytes(2, "big")
        masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        self.writer.write(header + mask + masked)
        await self.writer.drain()

    async def recv(self, timeout=5.0):
        while True:
            head = await asyncio.wait_for(self.reader.readexactly(2), timeout)
            opcode = head[0] & 0x0F
            length = head[1] & 0x7F
            if length == 126:
                length = int.from_bytes(await self.reader.readexactly(2), "big")
            elif length == 127:
                length = int.from_bytes(await self.reader.readexactly(8), "big")
            payload = await self.reader.readexactly(length)
            if opcode == 0x8:
                return None
            if opcode in (0x1, 0x2):
                msgs, _ = decode(payload + b"\n")
                return msgs[0]

    async def close(self):
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass


async def started_server(setup=None):
    server = ExchangeServer(ServerConfig(tcp_port=0, ws_port=0,
                                         setup=setup or SimSetup()))
    await server.start()
    return server


def run(coro):
    return asyncio.run(asyncio.wait_for(coro, 30.0))


def test_hello_and_command_echo():
    async def scenario():
        server = await started_server()
        client = await TcpClient.connect(server.tcp_port)
        try:
            await client.send(Hello("tok", "attach", seed=1))
            ack = await client.recv()
            assert isinstance(ack, Hello) and ack.ok is True
            first = await client.recv_until(
                lambda m: isinstance(m, StateUpdate))
            assert first.phase == "attach_idle"
            assert first.bays and first.instruments
            await client.send(PoseCommand(seq=1, session_id="tok"))
            echoed = await client.recv_until(
                lambda m: isinstance(m, StateUpdate) and m.seq == 1)
            assert echoed.phase == "attach_idle"  # zero delta: no movement
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_sim_time_nondecreasing_and_quantized():
    async def scenario():
        server = await started_server()
        client = await TcpClient.connect(server.tcp_port)
        try:
            await client.send(Hello("t", "attach"))
            times = []
            while len(times) < 30:
                msg = await client.recv()
                if isinstance(msg, StateUpdate):
                    times.append(msg.sim_time)
            assert times == sorted(times)
            for t in times:
                assert round(t / 0.01) * 0.01 == pytest.approx(t)
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_seq_gap_terminates_session():
    async def scenario():
        server = await started_server()
        client = await TcpClient.connect(server.tcp_port)
        try:
            await client.send(Hello("tok", "attach"))
            await client.recv()  # hello ack
            await client.send(PoseCommand(seq=1, session_id="tok"))
            await client.send(PoseCommand(seq=3, session_id="tok"))
            err = await client.recv_until(lambda m: isinstance(m, ErrorFrame))
            assert err.code == "seq_gap"
            # connection drains to EOF after the error frame
            while await client.recv() is not None:
                pass
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_bad_session_token_rejected():
    async def scenario():
        server = await started_server()
        client = await TcpClient.connect(server.tcp_port)
        try:
            await client.send(Hello("tok", "attach"))
            await client.recv()
            await client.send(PoseCommand(seq=1, session_id="intruder"))
            err = await client.recv_until(lambda m: isinstance(m, ErrorFrame))
            assert err.code == "bad_session"
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_first_frame_must_be_hello():
    async def scenario():
        server = await started_server()
        client = await TcpClient.connect(server.tcp_port)
        try:
            await client.send(PoseCommand(seq=1))
            err = await client.recv_until(lambda m: isinstance(m, ErrorFrame))
            assert err.code == "expected_hello"
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_concurrent_sessions_are_independent():
    async def scenario():
        server = await started_server()
        a = await TcpClient.connect(server.tcp_port)
        b = await TcpClient.connect(server.tcp_port)
        try:
            await a.send(Hello("a", "attach"))
            await b.send(Hello("b", "detach"))
            await a.recv()
            await b.recv()
            # drive session a only; session b must stay untouched
            for seq in range(1, 11):
                await a.send(PoseCommand(seq=seq, session_id="a",
                                         axial_feed=2.0))
            moved = await a.recv_until(
                lambda m: isinstance(m, StateUpdate) and m.seq == 10)
            assert moved.phase == "aligning"
            still = await b.recv_until(lambda m: isinstance(m, StateUpdate))
            assert still.phase == "carrying" and still.seq == 0
            home = SimSetup().scene.home
            assert still.arm_tip == home
        finally:
            await a.close()
            await b.close()
            await server.stop()
    run(scenario())


def test_websocket_transport_same_schema():
    async def scenario():
        server = await started_server()
        client = await WsClient.connect(server.ws_port)
        try:
            await client.send(Hello("ws", "attach", seed=2))
            ack = await client.recv()
            assert isinstance(ack, Hello) and ack.ok is True
            state = await client.recv()
            while not isinstance(state, StateUpdate):
                state = await client.recv()
            assert state.phase == "attach_idle"
            await client.send(PoseCommand(seq=1, session_id="ws",
                                          axial_feed=1.0))
            while not (isinstance(state, StateUpdate) and state.seq == 1):
                state = await client.recv()
            assert state.phase == "aligning"
        finally:
            await client.close()
            await server.stop()
    run(scenario())


def test_websocket_rejects_wrong_path():
    async def scenario():
        server = await started_server()
        try:
            with pytest.raises(ConnectionError):
                await WsClient.connect(server.ws_port, path="/nope")
        finally:
            await server.stop()
    run(scenario())


def test_latency_injection_delays_round_trip():
    async def scenario():
        setup = SimSetup()
        setup.channel = ChannelConfig(base_latency_ms=50.0, seed=0)
        server = await started_server(setup)
        client = await TcpClient.connect(server.tcp_port)
        loop = asyncio.get_running_loop()
        try:
            await client.send(Hello("t", "attach"))
            await client.recv()
            latest = await client.recv_until(
                lambda m: isinstance(m, StateUpdate))
            sent = loop.time()
            await client.send(PoseCommand(seq=1, session_id="t",
                                          axial_feed=1.0))
            await client.recv_until(
                lambda m: isinstance(m, StateUpdate) and m.seq == 1)
            rtt = loop.time() - sent
            # 50 ms each way plus at most a few ticks of loop scheduling
            assert rtt >= 0.099
        finally:
            await client.close()
            await server.stop()
    run(scenario())
