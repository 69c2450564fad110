"""Packet generation and TTL-ordered per-class buffers.

All packets of a class share one time-to-live, so remaining-TTL order is
arrival order. Each buffer keeps a FIFO per owner; the class-wide order is
recovered from the head-of-line arrival slots.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig


@dataclass
class Packet:
    owner: int
    size_bytes: int
    arrival_slot: int
    ttl_ms: float
    remaining_bits: float = -1.0

    def __post_init__(self):
        if self.size_bytes <= 0 or self.ttl_ms <= 0:
            raise ValueError("packet size and ttl must be positive")
        if self.remaining_bits < 0:
            self.remaining_bits = 8.0 * self.size_bytes

    def age_ms(self, now: int, tti_ms: float) -> float:
        return (now - self.arrival_slot) * tti_ms


class Buffer:
    def __init__(self, tti_ms: float):
        self.tti_ms = tti_ms
        self._queues: dict[int, deque[Packet]] = {}
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def __bool__(self) -> bool:
        return self._count > 0

    def push(self, packet: Packet) -> None:
        q = self._queues.setdefault(packet.owner, deque())
        if q and q[-1].arrival_slot > packet.arrival_slot:
            raise ValueError("packets must be pushed in arrival order")
        q.append(packet)
        self._count += 1

    def extend(self, packets) -> None:
        for p in packets:
            self.push(p)

    def owners(self) -> list[int]:
        return list(self._queues)

    def has(self, owner: int) -> bool:
        return owner in self._queues

    def queue(self, owner: int) -> list[Packet]:
        return list(self._queues.get(owner, ()))

    def packets(self) -> list[Packet]:
        """Every buffered packet, ascending remaining TTL (ties by owner)."""
        return sorted(
            (p for q in self._queues.values() for p in q),
            key=lambda p: (p.arrival_slot, p.owner),
        )

    def backlog_bits(self, owner: int) -> float:
        return sum(p.remaining_bits for p in self._queues.get(owner, ()))

    def head_owners(self, k: int | None = None) -> list[int]:
        """Owners ordered by their head-of-line packet's remaining TTL."""
        keys = ((q[0].arrival_slot, owner) for owner, q in self._queues.items())
        if k is None:
            return [o for _, o in sorted(keys)]
        return [o for _, o in heapq.nsmallest(k, keys)]

    def serve(self, owner: int, bits: float, now: int) -> list[tuple[Packet, float]]:
        """Drain up to ``bits`` from ``owner``'s queue, FIFO.

        Returns ``(packet, delay_ms)`` for every completed packet; a partly
        served head keeps its remaining bits.
        """
        if bits < 0:
            raise ValueError("bits must be nonnegative")
        q = self._queues.get(owner)
        done = []
        while q and bits > 0:
            head = q[0]
            if bits >= head.remaining_bits:
                bits -= head.remaining_bits
                head.remaining_bits = 0.0
                q.popleft()
                self._count -= 1
                done.append((head, head.age_ms(now, self.tti_ms)))
            else:
                head.remaining_bits -= bits
                bits = 0.0
        if q is not None and not q:
            del self._queues[owner]
        return done

    def expire(self, now: int) -> list[Packet]:
        """Remove packets whose age strictly exceeds their TTL."""
        dropped = []
        for owner in list(self._queues):
            q = self._queues[owner]
            while q and q[0].age_ms(now, self.tti_ms) > q[0].ttl_ms:
                dropped.append(q.popleft())
            if not q:
                del self._queues[owner]
        self._count -= len(dropped)
        return dropped


def serve(buffer: Buffer, user: int, bits_served: float, now: int):
    return buffer, buffer.serve(user, bits_served, now)


def expire(buffer: Buffer, now: int):
    return buffer, buffer.expire(now)


def generate_cue_arrivals(cfg: ScenarioConfig, slot: int, rng: np.random.Generator) -> list[Packet]:
    """Poisson(C / tau_c) packets per slot, each at a distinct random CUE."""
    if slot < 0:
        raise ValueError("slot must be >= 0")
    C = cfg.num_cues
    if C == 0:
        return []
    k = min(int(rng.poisson(cfg.lambda_cue)), C)
    if k == 0:
        return []
    owners = np.sort(rng.choice(C, size=k, replace=False))
    return [Packet(int(c), cfg.packet_bytes_cue, slot, cfg.ttl_cue_ms) for c in owners]


def vue_offsets(cfg: ScenarioConfig) -> np.ndarray:
    V = cfg.num_vue_pairs
    return (np.arange(V) * cfg.vue_period_slots) // max(V, 1)


def generate_vue_arrivals(cfg: ScenarioConfig, slot: int, rng: np.random.Generator | None = None) -> list[Packet]:
    """Periodic VUE packets, one per pair every ``vue_period_slots``, staggered by index.

    ``rng`` is accepted for interface symmetry; the process is deterministic.
    """
    if slot < 0:
        raise ValueError("slot must be >= 0")
    fire = np.flatnonzero((slot - vue_offsets(cfg)) % cfg.vue_period_slots == 0)
    return [Packet(int(v), cfg.packet_bytes_vue, slot, cfg.ttl_vue_ms) for v in fire]
