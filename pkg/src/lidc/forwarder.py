"""Per-node forwarding engine: FIB longest-prefix match, PIT aggregation,
LRU content store with freshness, and pluggable multi-cluster selection.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

from .names import Name, to_uri
from .wire import DataPacket, Interest

NO_ROUTE_CONTENT = b"type=no-route"


@dataclass(frozen=True)
class NextHop:
    face_id: int
    cost: int


class Fib:
    """Prefix -> next-hop table; at most one entry per exact prefix, hops sorted by (cost, face)."""

    def __init__(self) -> None:
        self.entries: dict[Name, list[NextHop]] = {}

    def register(self, prefix: Name, face_id: int, cost: int) -> None:
        if cost < 0:
            raise ValueError("cost must be non-negative")
        hops = [h for h in self.entries.get(prefix, []) if h.face_id != face_id]
        hops.append(NextHop(face_id, cost))
        hops.sort(key=lambda h: (h.cost, h.face_id))
        self.entries[prefix] = hops

    def unregister(self, prefix: Name, face_id: int) -> None:
        hops = [h for h in self.entries.get(prefix, []) if h.face_id != face_id]
        if hops:
            self.entries[prefix] = hops
        else:
            self.entries.pop(prefix, None)

    def clear(self) -> None:
        self.entries.clear()

    def lpm(self, name: Name) -> tuple[Name, list[NextHop]] | None:
        """Longest-prefix match: the matching prefix with the most components."""
        for k in range(len(name), -1, -1):
            prefix = name.prefix(k)
            hops = self.entries.get(prefix)
            if hops:
                return prefix, hops
        return None


@dataclass
class PitEntry:
    in_faces: set[int] = field(default_factory=set)
    nonces: set[int] = field(default_factory=set)
    expiry: int = 0


class Pit:
    def __init__(self) -> None:
        self.entries: dict[Name, PitEntry] = {}

    def expire(self, now: int) -> list[Name]:
        """Remove entries with expiry <= now; names returned in expiry order."""
        dead = sorted(
            (e.expiry, name) for name, e in self.entries.items() if e.expiry <= now
        )
        for _, name in dead:
            del self.entries[name]
        return [name for _, name in dead]


class ContentStore:
    """LRU cache of Data packets; entries answer only while fresh."""

    def __init__(self, capacity: int = 64) -> None:
        self.capacity = capacity
        self.entries: OrderedDict[Name, tuple[DataPacket, int]] = OrderedDict()

    def get(self, name: Name, now: int) -> DataPacket | None:
        hit = self.entries.get(name)
        if hit is None:
            return None
        data, inserted_at = hit
        if now - inserted_at > data.freshness_ms:
            return None
        self.entries.move_to_end(name)
        return data

    def insert(self, data: DataPacket, now: int) -> None:
        if self.capacity <= 0:
            return
        self.entries[data.name] = (data, now)
        self.entries.move_to_end(data.name)
        while len(self.entries) > self.capacity:
            self.entries.popitem(last=False)

    def __len__(self) -> int:
        return len(self.entries)


class Strategy:
    """Picks one next hop among the faces announcing a prefix; deterministic."""

    name = "strategy"

    def choose(self, prefix: Name, hops: list[NextHop]) -> NextHop:
        raise NotImplementedError


class BestCost(Strategy):
    """Minimum cost, ties toward the lowest face id (hops arrive pre-sorted)."""

    name = "best-cost"

    def choose(self, prefix: Name, hops: list[NextHop]) -> NextHop:
        return min(hops, key=lambda h: (h.cost, h.face_id))


class RoundRobin(Strategy):
    """Cycles through the next hops of each prefix in (cost, face) order."""

    name = "round-robin"

    def __init__(self) -> None:
        self.counters: dict[Name, int] = {}

    def choose(self, prefix: Name, hops: list[NextHop]) -> NextHop:
        # a cost-0 hop is the local producer; bouncing past it would loop
        if hops[0].cost == 0:
            return hops[0]
        i = self.counters.get(prefix, 0)
        self.counters[prefix] = i + 1
        return hops[i % len(hops)]


STRATEGIES = {"best-cost": BestCost, "round-robin": RoundRobin}


@dataclass(frozen=True)
class ForwardInterest:
    face: int
    interest: Interest


@dataclass(frozen=True)
class DeliverData:
    face: int
    data: DataPacket


Emission = ForwardInterest | DeliverData


class Forwarder:
    def __init__(
        self,
        node_id: str,
        cs_capacity: int = 64,
        strategy: Strategy | None = None,
    ) -> None:
        self.node_id = node_id
        self.fib = Fib()
        self.pit = Pit()
        self.cs = ContentStore(cs_capacity)
        self.strategy = strategy or BestCost()
        self.cs_hits = 0
        self.cs_misses = 0
        self.loop_drops = 0
        self.no_route = 0
        self.unsolicited = 0
        self.pit_timeouts = 0

    def on_interest(self, in_face: int, interest: Interest, now: int) -> list[Emission]:
        cached = self.cs.get(interest.name, now)
        if cached is not None:
            self.cs_hits += 1
            return [DeliverData(in_face, cached)]
        self.cs_misses += 1

        entry = self.pit.entries.get(interest.name)
        if entry is not None:
            if interest.nonce in entry.nonces:
                self.loop_drops += 1
                return []
            entry.in_faces.add(in_face)
            entry.nonces.add(interest.nonce)
            entry.expiry = max(entry.expiry, now + interest.lifetime_ms)
            return []

        match = self.fib.lpm(interest.name)
        if match is None:
            self.no_route += 1
            nack = DataPacket.build(interest.name, NO_ROUTE_CONTENT, freshness_ms=0)
            return [DeliverData(in_face, nack)]
        prefix, hops = match
        hop = self.strategy.choose(prefix, hops)
        self.pit.entries[interest.name] = PitEntry(
            in_faces={in_face},
            nonces={interest.nonce},
            expiry=now + interest.lifetime_ms,
        )
        return [ForwardInterest(hop.face_id, interest)]

    def on_data(self, in_face: int, data: DataPacket, now: int) -> list[Emission]:
        entry = self.pit.entries.pop(data.name, None)
        if entry is None:
            self.unsolicited += 1
            return []
        self.cs.insert(data, now)
        return [DeliverData(face, data) for face in sorted(entry.in_faces)]

    def on_timeout(self, now: int) -> list[Name]:
        expired = self.pit.expire(now)
        self.pit_timeouts += len(expired)
        return expired

    def report(self) -> str:
        """Human-readable FIB/PIT/CS dump for the CLI inspect command."""
        lines = [f"node={self.node_id} strategy={self.strategy.name}", "fib:"]
        for prefix in sorted(self.fib.entries):
            hops = " ".join(
                f"face={h.face_id},cost={h.cost}" for h in self.fib.entries[prefix]
            )
            lines.append(f"  {to_uri(prefix)} {hops}")
        lines.append("pit:")
        for name in sorted(self.pit.entries):
            e = self.pit.entries[name]
            faces = ",".join(str(f) for f in sorted(e.in_faces))
            lines.append(f"  {to_uri(name)} in_faces={faces} expiry={e.expiry}")
        lines.append(f"cs: size={len(self.cs)} capacity={self.cs.capacity}")
        for name, (data, at) in self.cs.entries.items():
            lines.append(
                f"  {to_uri(name)} bytes={len(data.content)} inserted_at={at}"
                f" freshness_ms={data.freshness_ms}"
            )
        lines.append(
            f"counters: cs_hits={self.cs_hits} cs_misses={self.cs_misses}"
            f" loop_drops={self.loop_drops} no_route={self.no_route}"
            f" unsolicited={self.unsolicited} pit_timeouts={self.pit_timeouts}"
        )
        return "\n".join(lines)
