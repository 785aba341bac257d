"""Master-slave streaming server.

One session per connection. Inbound pose commands and outbound state
updates each pass through a latency injector; within a session all
application happens on a fixed-rate tick loop, so commands apply on the
tick they become available and at most one command is consumed per tick.

Two transports carry the same JSON frames: raw TCP (one LF-terminated
line per frame, default port 7431) and a WebSocket bridge (one frame per
text message, default port 7432, path /session).
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import logging
from dataclasses import dataclass, field

from .channel import ChannelConfig, LatencyInjector
from .config import SimSetup
from .protocol import (ErrorFrame, FrameError, Hello, PoseCommand,
                       StateUpdate, decode, encode)
from .session import ExchangeSession

log = logging.getLogger("instrex.server")

DEFAULT_TCP_PORT = 7431
DEFAULT_WS_PORT = 7432
WS_PATH = "/session"
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    tcp_port: int = DEFAULT_TCP_PORT
    ws_port: int = DEFAULT_WS_PORT
    setup: SimSetup = field(default_factory=SimSetup)


class _Transport:
    """Line/message framing abstraction over a stream pair."""

    def __init__(self, reader: asyncio.StreamReader,
                 writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    async def recv(self):
        """Next decoded frame (or FrameError), None on EOF."""
        raise NotImplementedError

    async def send(self, msg) -> None:
        raise NotImplementedError

    async def close(self) -> None:
        try:
            self.writer.close()
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class _TcpTransport(_Transport):
    def __init__(self, reader, writer):
        super().__init__(reader, writer)
        self._buf = b""
        self._pending: list = []

    async def recv(self):
        while not self._pending:
            chunk = await self.reader.read(65536)
            if not chunk:
                return None
            self._buf += chunk
            msgs, self._buf = decode(self._buf)
            self._pending.extend(msgs)
        return self._pending.pop(0)

    async def send(self, msg) -> None:
        self.writer.write(encode(msg))
        await self.writer.drain()


class _WsTransport(_Transport):
    """Minimal RFC 6455 server endpoint: text, ping/pong and close frames."""

    async def handshake(self) -> bool:
        request = await self.reader.readuntil(b"\r\n\r\n")
        lines = request.decode("latin-1").split("\r\n")
        parts = lines[0].split()
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if (len(parts) < 2 or parts[0] != "GET" or parts[1] != WS_PATH
                or key is None
                or "websocket" not in headers.get("upgrade", "").lower()):
            self.writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            await self.writer.drain()
            return False
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        self.writer.write(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\n"
            b"Connection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept.encode() + b"\r\n\r\n")
        await self.writer.drain()
        return True

    async def _read_frame(self):
        head = await self.reader.readexactly(2)
        fin_opcode, len_byte = head
        opcode = fin_opcode & 0x0F
        masked = bool(len_byte & 0x80)
        length = len_byte & 0x7F
        if length == 126:
            length = int.from_bytes(await self.reader.readexactly(2), "big")
        elif length == 127:
            length = int.from_bytes(await self.reader.readexactly(8), "big")
        mask = await self.reader.readexactly(4) if masked else b""
        payload = await self.reader.readexactly(length)
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return opcode, payload

    def _write_frame(self, opcode: int, payload: bytes) -> None:
        header = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header += bytes([n])
        elif n < 1 << 16:
            header += bytes([126]) + n.to_bytes(2, "big")
        else:
            header += bytes([127]) + n.to_bytes(8, "big")
        self.writer.write(header + payload)

    async def recv(self):
        while True:
            try:
                opcode, payload = await self._read_frame()
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            if opcode == 0x8:  # close
                return None
            if opcode == 0x9:  # ping
                self._write_frame(0xA, payload)
                await self.writer.drain()
                continue
            if opcode in (0x1, 0x2):
                msgs, rest = decode(payload.rstrip(b"\n") + b"\n")
                if rest or not msgs:
                    return FrameError(payload, "not a single JSON frame")
                return msgs[0]

    async def send(self, msg) -> None:
        self._write_frame(0x1, encode(msg).rstrip(b"\n"))
        await self.writer.drain()


class _Session:
    def __init__(self, transport: _Transport, setup: SimSetup):
        self.transport = transport
        self.setup = setup
        self.queue: list[tuple[float, PoseCommand]] = []
        self.closed = asyncio.Event()
        self.expected_seq = 1

    async def run(self) -> None:
        msg = await self.transport.recv()
        if not isinstance(msg, Hello):
            await self._bail("expected_hello", "first frame must be hello")
            return
        try:
            session = ExchangeSession(msg.task, self.setup.scene,
                                      self.setup.mech)
        except ValueError as exc:
            await self._bail("bad_task", str(exc))
            return
        ch = self.setup.channel
        seeded = ChannelConfig(ch.base_latency_ms, ch.jitter_ms,
                               ch.drop_rate, ch.seed ^ msg.seed)
        inbound = LatencyInjector(seeded, "cmd")
        outbound = LatencyInjector(seeded, "state")
        await self.transport.send(Hello(session_id=msg.session_id,
                                        task=msg.task, seed=msg.seed, ok=True))
        reader = asyncio.ensure_future(self._read_loop(msg.session_id, inbound))
        try:
            await self._tick_loop(session, outbound)
        finally:
            reader.cancel()
            await self.transport.close()

    async def _bail(self, code: str, message: str) -> None:
        try:
            await self.transport.send(ErrorFrame(code, message))
        except (ConnectionError, OSError):
            pass
        await self.transport.close()
        self.closed.set()

    async def _read_loop(self, session_id: str,
                         inbound: LatencyInjector) -> None:
        loop = asyncio.get_running_loop()
        while True:
            msg = await self.transport.recv()
            if msg is None:
                self.closed.set()
                return
            if isinstance(msg, FrameError):
                await self.transport.send(
                    ErrorFrame("bad_frame", msg.reason))
                continue
            if not isinstance(msg, PoseCommand):
                continue
            if msg.session_id and msg.session_id != session_id:
                await self._bail("bad_session", "unknown session token")
                return
            if msg.seq != self.expected_seq:
                await self._bail(
                    "seq_gap",
                    f"expected seq {self.expected_seq}, got {msg.seq}")
                return
            self.expected_seq += 1
            release = inbound.schedule(loop.time())
            if release is not None:
                self.queue.append((release, msg))

    async def _tick_loop(self, session: ExchangeSession,
                         outbound: LatencyInjector) -> None:
        loop = asyncio.get_running_loop()
        dt = session.scene.config.dt
        out_queue: asyncio.Queue = asyncio.Queue()
        sender = asyncio.ensure_future(self._send_loop(out_queue))

        def emit(update: StateUpdate) -> None:
            release = outbound.schedule(loop.time())
            if release is not None:
                out_queue.put_nowait((release, update))

        # announce the initial scene so clients can render before commanding
        emit(session.state_update([], full=True))
        next_tick = loop.time()
        try:
            while not self.closed.is_set():
                next_tick += dt
                delay = next_tick - loop.time()
                if delay > 0:
                    try:
                        await asyncio.wait_for(self.closed.wait(),
                                               timeout=delay)
                        break
                    except asyncio.TimeoutError:
                        pass
                now = loop.time()
                cmd = None
                if self.queue and self.queue[0][0] <= now:
                    cmd = self.queue.pop(0)[1]
                events = session.step(cmd)
                emit(session.state_update(events, full=True))
        finally:
            sender.cancel()
        # teardown: flush a final update
        try:
            await self.transport.send(session.state_update([], full=True))
        except (ConnectionError, OSError):
            pass

    async def _send_loop(self, out_queue: asyncio.Queue) -> None:
        """Single sender preserves the release order of state updates."""
        loop = asyncio.get_running_loop()
        while True:
            release, update = await out_queue.get()
            wait = release - loop.time()
            if wait > 0:
                await asyncio.sleep(wait)
            try:
                await self.transport.send(update)
            except (ConnectionError, OSError):
                self.closed.set()
                return


class ExchangeServer:
    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self._servers: list[asyncio.base_events.Server] = []

    async def start(self) -> None:
        cfg = self.config
        self._servers = [
            await asyncio.start_server(self._handle_tcp, cfg.host,
                                       cfg.tcp_port),
            await asyncio.start_server(self._handle_ws, cfg.host,
                                       cfg.ws_port),
        ]
        log.info("listening tcp=%s:%d ws=%s:%d%s", cfg.host, self.tcp_port,
                 cfg.host, self.ws_port, WS_PATH)

    @property
    def tcp_port(self) -> int:
        return self._servers[0].sockets[0].getsockname()[1]

    @property
    def ws_port(self) -> int:
        return self._servers[1].sockets[0].getsockname()[1]

    async def stop(self) -> None:
        for srv in self._servers:
            srv.close()
            await srv.wait_closed()
        self._servers = []

    async def serve_forever(self) -> None:
        await self.start()
        await asyncio.gather(*(s.serve_forever() for s in self._servers))

    async def _handle_tcp(self, reader, writer) -> None:
        await self._run_session(_TcpTransport(reader, writer))

    async def _handle_ws(self, reader, writer) -> None:
        transport = _WsTransport(reader, writer)
        try:
            if not await transport.handshake():
                await transport.close()
                return
        except (asyncio.IncompleteReadError, ConnectionError):
            return
        await self._run_session(transport)

    async def _run_session(self, transport: _Transport) -> None:
        try:
            await _Session(transport, self.config.setup).run()
        except (ConnectionError, OSError, asyncio.IncompleteReadError):
            pass
        except Exception:
            log.exception("session crashed")
            await transport.close()


def serve_session(config: ServerConfig | None = None) -> None:
    """Run the server until interrupted (CLI entry point)."""
    async def _main():
        server = ExchangeServer(config)
        await server.serve_forever()

    asyncio.run(_main())
