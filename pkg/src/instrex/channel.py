"""Latency/jitter/drop injection with a hard in-order guarantee.

The injector assigns each frame a release time; release times are clamped
to be nondecreasing so delayed frames never overtake earlier ones.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class ChannelConfig:
    base_latency_ms: float = 0.0
    jitter_ms: float = 0.0  # half-width of a uniform perturbation
    drop_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latency and jitter must be >= 0")
        if not 0.0 <= self.drop_rate < 1.0:
            raise ValueError("drop_rate must be in [0, 1)")


class LatencyInjector:
    """One direction of an impaired channel.

    Deterministic for a given (config.seed, label); the label keeps the
    two directions of a session decorrelated.
    """

    def __init__(self, config: ChannelConfig, label: str = ""):
        self.config = config
        self._rng = random.Random(f"{config.seed}:{label}")
        self._last_release = float("-inf")

    def schedule(self, now_s: float) -> float | None:
        """Release time (seconds) for a frame sent at now_s; None = dropped."""
        cfg = self.config
        if cfg.drop_rate > 0.0 and self._rng.random() < cfg.drop_rate:
            return None
        delay_ms = cfg.base_latency_ms
        if cfg.jitter_ms > 0.0:
            delay_ms += self._rng.uniform(-cfg.jitter_ms, cfg.jitter_ms)
        release = now_s + max(0.0, delay_ms) / 1000.0
        if release < self._last_release:
            release = self._last_release
        self._last_release = release
        return release


def inject_latency(config: ChannelConfig,
                   frames: Iterable[tuple[float, T]],
                   label: str = "") -> list[tuple[float, T]]:
    """Apply the injector to a timed frame stream.

    frames are (send_time_s, payload) in send order; returns
    (release_time_s, payload) for the surviving frames, still in send
    order (which by the in-order clamp is also release order).
    """
    inj = LatencyInjector(config, label)
    out: list[tuple[float, T]] = []
    for t, payload in frames:
        release = inj.schedule(t)
        if release is not None:
            out.append((release, payload))
    return out
