"""Deterministic discrete-event overlay simulator.

Wires clients, routers, and clusters (gateway + orchestrator + data lake per
cluster node) over latency-weighted links. Events execute in (timestamp, seq)
order; FIBs are recomputed globally from announcements by shortest path over
link latencies. Identical (topology, workload, seed) gives identical logs.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field

from .cluster import (
    Cluster,
    ClusterResources,
    TraceTable,
    default_app_registry,
    default_trace,
)
from .datalake import DataLake, DatasetManifest
from .forwarder import (
    DeliverData,
    ForwardInterest,
    Forwarder,
    Strategy,
    STRATEGIES,
)
from .gateway import Gateway, JobStatus, ValidationRegistry
from .names import (
    COMPUTE_PREFIX,
    DATA_PREFIX,
    STATUS_PREFIX,
    Name,
    is_prefix_of,
    parse_uri,
    to_uri,
)
from .wire import (
    DataPacket,
    Interest,
    TT_DATA,
    TT_INTEREST,
    decode_data,
    decode_interest,
    encode_data,
    encode_interest,
    packet_type,
)

FACE_APP = 0  # client application / cluster gateway
FACE_DATALAKE = 1  # cluster-internal data-lake face
FIRST_LINK_FACE = 2


class ConfigError(ValueError):
    pass


@dataclass
class NodeDef:
    node_id: str
    kind: str  # client | router | cluster
    cpu: int | None = None
    mem: int | None = None
    apps: tuple[str, ...] = ()
    cs_capacity: int = 64


@dataclass
class LinkDef:
    a: str
    b: str
    latency_ms: int


@dataclass
class Topology:
    nodes: list[NodeDef] = field(default_factory=list)
    links: list[LinkDef] = field(default_factory=list)
    announcements: list[tuple[str, str]] = field(default_factory=list)


def parse_topology(text: str) -> Topology:
    """Line-oriented config: node/link/announce statements, '#' comments."""
    topo = Topology()
    ids: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "node":
                if len(parts) < 3:
                    raise ConfigError("node needs an id and a kind")
                node_id, kind = parts[1], parts[2]
                if node_id in ids:
                    raise ConfigError(f"duplicate node id {node_id!r}")
                if kind not in ("client", "router", "cluster"):
                    raise ConfigError(f"unknown node kind {kind!r}")
                node = NodeDef(node_id, kind)
                for opt in parts[3:]:
                    key, sep, value = opt.partition("=")
                    if not sep:
                        raise ConfigError(f"bad node option {opt!r}")
                    if key == "cpu":
                        node.cpu = int(value)
                    elif key == "mem":
                        node.mem = int(value)
                    elif key == "apps":
                        node.apps = tuple(value.split(","))
                    elif key == "cs":
                        node.cs_capacity = int(value)
                    else:
                        raise ConfigError(f"unknown node option {key!r}")
                if kind == "cluster" and (node.cpu is None or node.mem is None):
                    raise ConfigError("cluster nodes need cpu=<n> and mem=<n>")
                ids.add(node_id)
                topo.nodes.append(node)
            elif parts[0] == "link":
                if len(parts) != 4:
                    raise ConfigError("link needs: link <a> <b> <latency_ms>")
                a, b, lat = parts[1], parts[2], int(parts[3])
                if a not in ids or b not in ids:
                    raise ConfigError(f"link references unknown node {a!r} or {b!r}")
                if a == b:
                    raise ConfigError("self links are not allowed")
                if lat < 0:
                    raise ConfigError("latency_ms must be non-negative")
                topo.links.append(LinkDef(a, b, lat))
            elif parts[0] == "announce":
                if len(parts) != 3:
                    raise ConfigError("announce needs: announce <node> <prefix>")
                if parts[1] not in ids:
                    raise ConfigError(f"announce references unknown node {parts[1]!r}")
                parse_uri(parts[2])
                topo.announcements.append((parts[1], parts[2]))
            else:
                raise ConfigError(f"unknown statement {parts[0]!r}")
        except (ValueError, ConfigError) as exc:
            if isinstance(exc, ConfigError) and str(exc).startswith("line "):
                raise
            raise ConfigError(f"line {lineno}: {exc}") from None
    # every cluster must announce at least the compute or the data namespace
    announced = {n for n, _ in topo.announcements}
    for node in topo.nodes:
        if node.kind == "cluster" and node.node_id not in announced:
            raise ConfigError(
                f"cluster {node.node_id!r} announces neither compute nor data"
            )
    return topo


# Event kinds ---------------------------------------------------------------


@dataclass(frozen=True)
class PacketArrival:
    node_id: str
    face: int
    raw: bytes
    via: tuple[str, str] | None  # link endpoints, None for injections


@dataclass(frozen=True)
class JobStart:
    cluster_id: str
    job_id: str


@dataclass(frozen=True)
class JobCompletion:
    cluster_id: str
    job_id: str


@dataclass(frozen=True)
class PitTimeout:
    node_id: str


@dataclass(frozen=True)
class ScriptAction:
    index: int  # resolved by the scenario runner


Event = PacketArrival | JobStart | JobCompletion | PitTimeout | ScriptAction


@dataclass
class FetchTask:
    """Client-side reassembly: manifest first, then segments in order."""

    base: Name
    manifest: DatasetManifest | None = None
    segments: list[bytes] = field(default_factory=list)
    done: bool = False
    error: str | None = None
    payload: bytes | None = None


class ClientNode:
    def __init__(self, node_id: str, seed: int, cs_capacity: int, strategy: Strategy):
        self.node_id = node_id
        self.forwarder = Forwarder(node_id, cs_capacity, strategy)
        self.rng = random.Random(
            int.from_bytes(hashlib.sha256(f"{seed}|{node_id}".encode()).digest()[:8], "big")
        )
        self.inbox: dict[Name, DataPacket] = {}
        self.sent_at: dict[Name, int] = {}
        self.fetch_waiting: dict[Name, FetchTask] = {}


class RouterNode:
    def __init__(self, node_id: str, cs_capacity: int, strategy: Strategy):
        self.node_id = node_id
        self.forwarder = Forwarder(node_id, cs_capacity, strategy)


class ClusterNode:
    def __init__(
        self,
        node_id: str,
        cs_capacity: int,
        strategy: Strategy,
        cpu: int,
        mem: int,
        apps: tuple[str, ...],
        trace: TraceTable,
        validators: ValidationRegistry | None,
        hooks,
    ):
        self.node_id = node_id
        self.forwarder = Forwarder(node_id, cs_capacity, strategy)
        self.lake = DataLake()
        self.cluster = Cluster(
            node_id,
            ClusterResources(cpu_total=cpu, mem_total_gb=mem),
            default_app_registry(list(apps), trace),
            self.lake,
        )
        self.gateway = Gateway(self.cluster, hooks, validators)


SimNode = ClientNode | RouterNode | ClusterNode


class Simulation:
    def __init__(
        self,
        topology: Topology,
        seed: int = 0,
        strategy: str = "best-cost",
        trace: TraceTable | None = None,
        validators: ValidationRegistry | None = None,
    ) -> None:
        self.seed = seed
        self.strategy_name = strategy
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {strategy!r}")
        self.clock = 0
        self._seq = 0
        self._heap: list[tuple[int, int, Event]] = []
        self.log: list[str] = []
        self.trace = trace or default_trace()
        self._validators = validators
        self.nodes: dict[str, SimNode] = {}
        self.links: dict[tuple[str, str], int] = {}
        self.faces: dict[str, dict[int, str]] = {}  # node -> face -> peer
        self.peer_faces: dict[str, dict[str, int]] = {}  # node -> peer -> face
        self._next_face: dict[str, int] = {}
        self.announcements: list[tuple[str, Name]] = []
        self.capture: list[bytes] = []
        self.scenario_runner = None

        for node in topology.nodes:
            self._add_node(node)
        for link in topology.links:
            self._add_link(link.a, link.b, link.latency_ms)
        for node_id, prefix in topology.announcements:
            self._add_announcement(node_id, prefix)
        self.recompute_fibs()

    # -- construction -------------------------------------------------------

    def _new_strategy(self) -> Strategy:
        return STRATEGIES[self.strategy_name]()

    def _add_node(self, node: NodeDef) -> None:
        if node.kind == "client":
            self.nodes[node.node_id] = ClientNode(
                node.node_id, self.seed, node.cs_capacity, self._new_strategy()
            )
        elif node.kind == "router":
            self.nodes[node.node_id] = RouterNode(
                node.node_id, node.cs_capacity, self._new_strategy()
            )
        else:
            self.nodes[node.node_id] = ClusterNode(
                node.node_id,
                node.cs_capacity,
                self._new_strategy(),
                node.cpu,
                node.mem,
                node.apps,
                self.trace,
                self._validators,
                self,
            )
        self.faces[node.node_id] = {}
        self.peer_faces[node.node_id] = {}
        self._next_face[node.node_id] = FIRST_LINK_FACE

    def _add_link(self, a: str, b: str, latency_ms: int) -> None:
        key = (min(a, b), max(a, b))
        if key in self.links:
            raise ConfigError(f"duplicate link {a}-{b}")
        if a not in self.nodes or b not in self.nodes:
            raise ConfigError(f"link references unknown node {a!r} or {b!r}")
        self.links[key] = latency_ms
        for x, y in ((a, b), (b, a)):
            face = self._next_face[x]
            self._next_face[x] += 1
            self.faces[x][face] = y
            self.peer_faces[x][y] = face

    def _add_announcement(self, node_id: str, prefix: str) -> None:
        if node_id not in self.nodes:
            raise ConfigError(f"announce references unknown node {node_id!r}")
        if not isinstance(self.nodes[node_id], ClusterNode):
            raise ConfigError(f"only clusters announce prefixes, {node_id!r} is not one")
        self.announcements.append((node_id, parse_uri(prefix)))

    # -- routing -------------------------------------------------------------

    def _adjacency(self) -> dict[str, list[tuple[str, int]]]:
        adj: dict[str, list[tuple[str, int]]] = {n: [] for n in self.nodes}
        for (a, b), lat in self.links.items():
            adj[a].append((b, lat))
            adj[b].append((a, lat))
        for n in adj:
            adj[n].sort()
        return adj

    def _dijkstra(self, source: str, adj) -> dict[str, int]:
        dist = {source: 0}
        heap = [(0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, 1 << 62):
                continue
            for v, w in adj[u]:
                nd = d + w
                if nd < dist.get(v, 1 << 62):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    def effective_announcements(self) -> list[tuple[str, Name]]:
        """Announcing the compute prefix implies serving the status prefix too."""
        out = []
        for node_id, prefix in self.announcements:
            out.append((node_id, prefix))
            if prefix == COMPUTE_PREFIX:
                out.append((node_id, STATUS_PREFIX))
        return out

    def recompute_fibs(self) -> None:
        """Global, instantaneous FIB rebuild from announcements (no convergence model)."""
        adj = self._adjacency()
        for node in self.nodes.values():
            node.forwarder.fib.clear()
        best: dict[tuple[str, Name, int], int] = {}
        for announcer, prefix in sorted(
            self.effective_announcements(), key=lambda x: (x[0], x[1])
        ):
            internal_face = (
                FACE_DATALAKE if is_prefix_of(DATA_PREFIX, prefix) else FACE_APP
            )
            key = (announcer, prefix, internal_face)
            best[key] = min(best.get(key, 0), 0)
            dist = self._dijkstra(announcer, adj)
            for node_id in self.nodes:
                if node_id == announcer or node_id not in dist:
                    continue
                candidates = [
                    (dist[peer] + lat, peer)
                    for peer, lat in adj[node_id]
                    if peer in dist
                ]
                if not candidates:
                    continue
                _, via = min(candidates)
                face = self.peer_faces[node_id][via]
                key = (node_id, prefix, face)
                cost = dist[node_id]
                best[key] = min(best.get(key, cost), cost)
        for (node_id, prefix, face), cost in sorted(
            best.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
        ):
            self.nodes[node_id].forwarder.fib.register(prefix, face, cost)

    # -- event machinery -----------------------------------------------------

    def now(self) -> int:
        return self.clock

    def schedule(self, at: int, event: Event) -> None:
        if at < self.clock:
            at = self.clock
        heapq.heappush(self._heap, (at, self._seq, event))
        self._seq += 1

    def schedule_job_start(self, cluster_id: str, job_id: str, delay_ms: int) -> None:
        self.schedule(self.clock + delay_ms, JobStart(cluster_id, job_id))

    def schedule_job_completion(self, cluster_id: str, job_id: str, delay_ms: int) -> None:
        self.schedule(self.clock + delay_ms, JobCompletion(cluster_id, job_id))

    def log_kv(self, tag: str, **fields: object) -> None:
        parts = [f"t={self.clock}", tag]
        parts.extend(f"{k}={v}" for k, v in fields.items())
        self.log.append(" ".join(parts))

    def pending_events(self) -> int:
        return len(self._heap)

    def run_until(self, t_end: int) -> None:
        """Process events with timestamp <= t_end; the clock lands on t_end."""
        while self._heap and self._heap[0][0] <= t_end:
            at, _, event = heapq.heappop(self._heap)
            self.clock = at
            self._dispatch(event)
        self.clock = max(self.clock, t_end)

    def advance(self, delta_ms: int) -> None:
        self.run_until(self.clock + delta_ms)

    def run_to_quiescence(self, limit: int | None = None) -> None:
        """Drain the event queue completely (the clock follows the events)."""
        steps = 0
        while self._heap:
            at, _, event = heapq.heappop(self._heap)
            self.clock = at
            self._dispatch(event)
            steps += 1
            if limit is not None and steps >= limit:
                raise RuntimeError("event limit exceeded")

    # -- injection -------------------------------------------------------------

    def inject_request(self, client_id: str, interest: Interest, at: int | None = None) -> None:
        client = self._client(client_id)
        at = self.clock if at is None else max(at, self.clock)
        raw = encode_interest(interest)
        client.sent_at[interest.name] = at
        self.log_kv("inject", node=client_id, name=to_uri(interest.name),
                    nonce=f"{interest.nonce:08x}")
        self.schedule(at, PacketArrival(client_id, FACE_APP, raw, None))

    def make_interest(self, client_id: str, name: Name, lifetime_ms: int = 4000) -> Interest:
        client = self._client(client_id)
        return Interest(name, client.rng.getrandbits(32), lifetime_ms)

    def _client(self, client_id: str) -> ClientNode:
        node = self.nodes.get(client_id)
        if not isinstance(node, ClientNode):
            raise ConfigError(f"{client_id!r} is not a client node")
        return node

    def start_fetch(self, client_id: str, base: Name, at: int | None = None) -> FetchTask:
        """Begin a manifest+segments fetch; progress is driven by Data arrivals."""
        client = self._client(client_id)
        task = FetchTask(base)
        manifest_name = base.child(b"manifest")
        client.fetch_waiting[manifest_name] = task
        self.inject_request(client_id, self.make_interest(client_id, manifest_name), at)
        return task

    # -- dispatch ---------------------------------------------------------------

    def _dispatch(self, event: Event) -> None:
        if isinstance(event, PacketArrival):
            self._on_packet(event)
        elif isinstance(event, JobStart):
            self._on_job_start(event)
        elif isinstance(event, JobCompletion):
            self._on_job_completion(event)
        elif isinstance(event, PitTimeout):
            self._on_pit_timeout(event)
        elif isinstance(event, ScriptAction):
            runner = getattr(self, "scenario_runner", None)
            if runner is not None:
                runner.execute(event.index)

    def _on_packet(self, ev: PacketArrival) -> None:
        node = self.nodes.get(ev.node_id)
        if node is None:
            self.log_kv("drop", node=ev.node_id, reason="node-removed")
            return
        if ev.via is not None and ev.via not in self.links:
            self.log_kv("drop", node=ev.node_id, reason="link-removed")
            return
        kind = packet_type(ev.raw)
        if kind == TT_INTEREST:
            interest = decode_interest(ev.raw)
            self.log_kv("arrival", node=ev.node_id, face=ev.face, kind="interest",
                        name=to_uri(interest.name), nonce=f"{interest.nonce:08x}")
            before = len(node.forwarder.cs)
            hits_before = node.forwarder.cs_hits
            loops_before = node.forwarder.loop_drops
            noroute_before = node.forwarder.no_route
            emissions = node.forwarder.on_interest(ev.face, interest, self.clock)
            if node.forwarder.cs_hits > hits_before:
                self.log_kv("cache-hit", node=ev.node_id, name=to_uri(interest.name))
            else:
                self.log_kv("cache-miss", node=ev.node_id, name=to_uri(interest.name))
            if node.forwarder.loop_drops > loops_before:
                self.log_kv("drop", node=ev.node_id, reason="loop",
                            name=to_uri(interest.name))
            if node.forwarder.no_route > noroute_before:
                self.log_kv("no-route", node=ev.node_id, name=to_uri(interest.name))
            self._process_emissions(node, emissions)
            entry = node.forwarder.pit.entries.get(interest.name)
            if entry is not None:
                self.schedule(entry.expiry, PitTimeout(ev.node_id))
        elif kind == TT_DATA:
            data = decode_data(ev.raw)
            self.log_kv("arrival", node=ev.node_id, face=ev.face, kind="data",
                        name=to_uri(data.name), size=len(data.content))
            unsolicited_before = node.forwarder.unsolicited
            emissions = node.forwarder.on_data(ev.face, data, self.clock)
            if node.forwarder.unsolicited > unsolicited_before:
                self.log_kv("drop", node=ev.node_id, reason="unsolicited",
                            name=to_uri(data.name))
            self._process_emissions(node, emissions)
        else:
            self.log_kv("drop", node=ev.node_id, reason="unknown-packet-type")

    def _process_emissions(self, node: SimNode, emissions) -> None:
        for emission in emissions:
            if isinstance(emission, ForwardInterest):
                self._emit_interest(node, emission.face, emission.interest)
            else:
                self._emit_data(node, emission.face, emission.data)

    def _emit_interest(self, node: SimNode, face: int, interest: Interest) -> None:
        peer = self.faces[node.node_id].get(face)
        if peer is not None:
            self._transmit(node.node_id, peer, encode_interest(interest))
            self.log_kv("forward", node=node.node_id, face=face,
                        name=to_uri(interest.name), nonce=f"{interest.nonce:08x}")
            return
        # internal face: hand the Interest to the local application
        if isinstance(node, ClusterNode):
            if face == FACE_APP:
                reply = node.gateway.handle_interest(interest, self.clock)
            elif face == FACE_DATALAKE:
                try:
                    reply = node.lake.serve(interest.name)
                except Exception as exc:
                    reply = DataPacket.build(
                        interest.name, f"type=error\nmessage={exc}".encode(), 0
                    )
            else:
                self.log_kv("drop", node=node.node_id, reason="dead-face")
                return
            self.log_kv("local-reply", node=node.node_id, face=face,
                        name=to_uri(reply.name), size=len(reply.content))
            self._process_emissions(
                node, node.forwarder.on_data(face, reply, self.clock)
            )
        else:
            # an Interest surfacing at a client app face has nowhere to go
            self.log_kv("drop", node=node.node_id, reason="dead-face")

    def _emit_data(self, node: SimNode, face: int, data: DataPacket) -> None:
        peer = self.faces[node.node_id].get(face)
        if peer is not None:
            self._transmit(node.node_id, peer, encode_data(data))
            self.log_kv("deliver", node=node.node_id, face=face,
                        name=to_uri(data.name), size=len(data.content))
            return
        if isinstance(node, ClientNode) and face == FACE_APP:
            self.log_kv("deliver", node=node.node_id, face=face,
                        name=to_uri(data.name), size=len(data.content))
            self._client_receive(node, data)
        # data surfacing at a cluster's internal faces is dropped silently

    def _transmit(self, src: str, dst: str, raw: bytes) -> None:
        key = (min(src, dst), max(src, dst))
        latency = self.links[key]
        self.capture.append(raw)
        face = self.peer_faces[dst][src]
        self.schedule(self.clock + latency, PacketArrival(dst, face, raw, key))

    # -- client behaviour --------------------------------------------------------

    def _client_receive(self, client: ClientNode, data: DataPacket) -> None:
        sent = client.sent_at.pop(data.name, None)
        if sent is not None:
            self.log_kv("response", client=client.node_id, name=to_uri(data.name),
                        latency_ms=self.clock - sent)
        client.inbox[data.name] = data
        task = client.fetch_waiting.pop(data.name, None)
        if task is not None:
            self._advance_fetch(client, task, data)

    def _advance_fetch(self, client: ClientNode, task: FetchTask, data: DataPacket) -> None:
        if data.content.startswith(b"type="):
            task.error = data.content.decode(errors="replace").split("\n", 1)[0][5:]
            task.done = True
            return
        if task.manifest is None:
            try:
                task.manifest = DatasetManifest.from_text(data.content.decode())
            except Exception as exc:
                task.error = f"bad manifest: {exc}"
                task.done = True
                return
            if task.manifest.segment_count == 0:
                self._finish_fetch(task)
                return
            self._request_segment(client, task, 0)
            return
        task.segments.append(data.content)
        if len(task.segments) == task.manifest.segment_count:
            self._finish_fetch(task)
        else:
            self._request_segment(client, task, len(task.segments))

    def _request_segment(self, client: ClientNode, task: FetchTask, index: int) -> None:
        seg_name = task.base.child(b"seg=%d" % index)
        client.fetch_waiting[seg_name] = task
        self.inject_request(client.node_id, self.make_interest(client.node_id, seg_name))

    def _finish_fetch(self, task: FetchTask) -> None:
        payload = b"".join(task.segments)
        task.done = True
        if hashlib.sha256(payload).digest() != task.manifest.digest:
            task.error = "digest-mismatch"
            return
        if len(payload) != task.manifest.stored_size:
            task.error = "size-mismatch"
            return
        task.payload = payload

    # -- orchestration events ------------------------------------------------------

    def _cluster(self, cluster_id: str) -> ClusterNode | None:
        node = self.nodes.get(cluster_id)
        return node if isinstance(node, ClusterNode) else None

    def _on_job_start(self, ev: JobStart) -> None:
        node = self._cluster(ev.cluster_id)
        if node is None:
            return  # cluster departed before the job could start
        job = node.gateway.jobs.get(ev.job_id)
        if job is None:
            return
        node.cluster.try_start(job, self.clock, self)

    def _on_job_completion(self, ev: JobCompletion) -> None:
        node = self._cluster(ev.cluster_id)
        if node is None:
            return
        job = node.gateway.jobs.get(ev.job_id)
        if job is None:
            return
        node.cluster.finish(job, self.clock, self)

    def _on_pit_timeout(self, ev: PitTimeout) -> None:
        node = self.nodes.get(ev.node_id)
        if node is None:
            return
        for name in node.forwarder.on_timeout(self.clock):
            self.log_kv("pit-expire", node=ev.node_id, name=to_uri(name))

    # -- topology changes -----------------------------------------------------------

    def apply_topology_change(self, change: "TopologyChange") -> None:
        change.apply(self)
        self.log_kv("topo", change=change.describe())
        self.recompute_fibs()


@dataclass(frozen=True)
class AddCluster:
    node_id: str
    cpu: int
    mem: int
    apps: tuple[str, ...] = ("BLAST",)

    def apply(self, sim: Simulation) -> None:
        if self.node_id in sim.nodes:
            raise ConfigError(f"node {self.node_id!r} already exists")
        sim._add_node(NodeDef(self.node_id, "cluster", self.cpu, self.mem, self.apps))

    def describe(self) -> str:
        return f"add-cluster:{self.node_id}"


@dataclass(frozen=True)
class RemoveCluster:
    node_id: str

    def apply(self, sim: Simulation) -> None:
        node = sim.nodes.get(self.node_id)
        if not isinstance(node, ClusterNode):
            raise ConfigError(f"{self.node_id!r} is not a cluster")
        node.cluster.fail_all(sim.clock, sim, "cluster departed")
        del sim.nodes[self.node_id]
        for key in [k for k in sim.links if self.node_id in k]:
            del sim.links[key]
        for peer in list(sim.peer_faces[self.node_id]):
            face = sim.peer_faces[peer].pop(self.node_id, None)
            if face is not None:
                sim.faces[peer].pop(face, None)
        del sim.faces[self.node_id]
        del sim.peer_faces[self.node_id]
        del sim._next_face[self.node_id]
        sim.announcements = [(n, p) for n, p in sim.announcements if n != self.node_id]

    def describe(self) -> str:
        return f"remove-cluster:{self.node_id}"


@dataclass(frozen=True)
class AddLink:
    a: str
    b: str
    latency_ms: int

    def apply(self, sim: Simulation) -> None:
        if self.a not in sim.nodes or self.b not in sim.nodes:
            raise ConfigError(f"add-link references unknown node {self.a!r} or {self.b!r}")
        sim._add_link(self.a, self.b, self.latency_ms)

    def describe(self) -> str:
        return f"add-link:{self.a}-{self.b}"


@dataclass(frozen=True)
class RemoveLink:
    a: str
    b: str

    def apply(self, sim: Simulation) -> None:
        key = (min(self.a, self.b), max(self.a, self.b))
        if key not in sim.links:
            raise ConfigError(f"no link {self.a}-{self.b}")
        del sim.links[key]
        for x, y in ((self.a, self.b), (self.b, self.a)):
            face = sim.peer_faces[x].pop(y, None)
            if face is not None:
                sim.faces[x].pop(face, None)

    def describe(self) -> str:
        return f"remove-link:{self.a}-{self.b}"


@dataclass(frozen=True)
class AddAnnouncement:
    node_id: str
    prefix: str

    def apply(self, sim: Simulation) -> None:
        sim._add_announcement(self.node_id, self.prefix)

    def describe(self) -> str:
        return f"announce:{self.node_id}:{self.prefix}"


TopologyChange = AddCluster | RemoveCluster | AddLink | RemoveLink | AddAnnouncement
