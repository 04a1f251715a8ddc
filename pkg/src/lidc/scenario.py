"""Workload scripts: timed submit/status/fetch/publish actions and topology
changes, replayed deterministically against a Simulation.

Job references use "@<n>" for the n-th submit in the script (1-based); job ids
are derived from (name, nonce) and resolved when the action executes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import SYNTHETIC_PAYLOAD_BYTES, pseudo_bytes
from .gateway import make_job_id
from .names import Name, STATUS_PREFIX, parse_uri, to_uri
from .sim import (
    AddAnnouncement,
    AddCluster,
    AddLink,
    ClusterNode,
    ConfigError,
    RemoveCluster,
    RemoveLink,
    Simulation,
)


@dataclass(frozen=True)
class Submit:
    at: int
    client: str
    uri: str


@dataclass(frozen=True)
class Status:
    at: int
    client: str
    job_ref: int  # @n


@dataclass(frozen=True)
class Fetch:
    at: int
    client: str
    target: str  # "@n" or a URI


@dataclass(frozen=True)
class Publish:
    at: int
    cluster: str
    uri: str
    size: int


@dataclass(frozen=True)
class Change:
    at: int
    change: object


Action = Submit | Status | Fetch | Publish | Change


def _job_ref(token: str, lineno: int) -> int:
    if not token.startswith("@") or not token[1:].isdigit() or int(token[1:]) < 1:
        raise ConfigError(f"line {lineno}: expected a job reference like @1, got {token!r}")
    return int(token[1:])


def parse_scenario(text: str) -> tuple[list[Action], int | None]:
    """Returns the action list and an optional explicit end time."""
    actions: list[Action] = []
    end: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "end":
                end = int(parts[1])
                continue
            if parts[0] != "at":
                raise ConfigError(f"expected 'at <ms> ...', got {parts[0]!r}")
            at = int(parts[1])
            verb = parts[2]
            args = parts[3:]
            if verb == "submit":
                client, uri = args
                parse_uri(uri)
                actions.append(Submit(at, client, uri))
            elif verb == "status":
                client, ref = args
                actions.append(Status(at, client, _job_ref(ref, lineno)))
            elif verb == "fetch":
                client, target = args
                if not target.startswith("@"):
                    parse_uri(target)
                else:
                    _job_ref(target, lineno)
                actions.append(Fetch(at, client, target))
            elif verb == "publish":
                cluster, uri, size_opt = args
                key, sep, value = size_opt.partition("=")
                if key != "size" or not sep:
                    raise ConfigError("publish needs size=<bytes>")
                actions.append(Publish(at, cluster, uri, int(value)))
            elif verb == "remove-cluster":
                actions.append(Change(at, RemoveCluster(args[0])))
            elif verb == "add-cluster":
                node_id = args[0]
                opts = dict(opt.split("=", 1) for opt in args[1:])
                actions.append(
                    Change(
                        at,
                        AddCluster(
                            node_id,
                            cpu=int(opts["cpu"]),
                            mem=int(opts["mem"]),
                            apps=tuple(opts.get("apps", "BLAST").split(",")),
                        ),
                    )
                )
            elif verb == "add-link":
                actions.append(Change(at, AddLink(args[0], args[1], int(args[2]))))
            elif verb == "remove-link":
                actions.append(Change(at, RemoveLink(args[0], args[1])))
            elif verb == "announce":
                parse_uri(args[1])
                actions.append(Change(at, AddAnnouncement(args[0], args[1])))
            else:
                raise ConfigError(f"unknown action {verb!r}")
        except ConfigError as exc:
            if str(exc).startswith("line "):
                raise
            raise ConfigError(f"line {lineno}: {exc}") from None
        except (ValueError, IndexError, KeyError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return actions, end


class ScenarioRunner:
    """Executes parsed actions as simulator events at their scripted times."""

    def __init__(self, sim: Simulation, actions: list[Action]):
        self.sim = sim
        self.actions = actions
        self.job_ids: dict[int, str] = {}  # submit ordinal -> job id
        self._submit_count = 0

    def schedule_all(self) -> None:
        from .sim import ScriptAction

        self.sim.scenario_runner = self
        for index, action in enumerate(self.actions):
            self.sim.schedule(action.at, ScriptAction(index))

    def execute(self, index: int) -> None:
        action = self.actions[index]
        sim = self.sim
        if isinstance(action, Submit):
            name = parse_uri(action.uri)
            interest = sim.make_interest(action.client, name)
            self._submit_count += 1
            self.job_ids[self._submit_count] = make_job_id(name, interest.nonce)
            sim.inject_request(action.client, interest)
        elif isinstance(action, Status):
            job_id = self._resolve(action.job_ref)
            name = STATUS_PREFIX.child(job_id.encode())
            sim.inject_request(action.client, sim.make_interest(action.client, name))
        elif isinstance(action, Fetch):
            base = self._fetch_target(action.target)
            sim.start_fetch(action.client, base)
        elif isinstance(action, Publish):
            node = sim.nodes.get(action.cluster)
            if not isinstance(node, ClusterNode):
                raise ConfigError(f"{action.cluster!r} is not a cluster")
            name = parse_uri(action.uri)
            payload = pseudo_bytes(
                to_uri(name).encode(), min(action.size, SYNTHETIC_PAYLOAD_BYTES)
            )
            node.lake.publish(name, payload, declared_size=action.size)
            sim.log_kv("publish", cluster=action.cluster, name=action.uri,
                       size=action.size)
        elif isinstance(action, Change):
            sim.apply_topology_change(action.change)

    def _resolve(self, ref: int) -> str:
        if ref not in self.job_ids:
            raise ConfigError(f"job reference @{ref} precedes its submit")
        return self.job_ids[ref]

    def _fetch_target(self, target: str) -> Name:
        if target.startswith("@"):
            from .names import RESULTS_PREFIX

            return RESULTS_PREFIX.child(self._resolve(int(target[1:])).encode())
        return parse_uri(target)


def run_scenario(
    sim: Simulation, actions: list[Action], end: int | None = None
) -> ScenarioRunner:
    """Schedule every action and drive the simulation to completion."""
    runner = ScenarioRunner(sim, actions)
    runner.schedule_all()
    if end is not None:
        sim.run_until(end)
    else:
        sim.run_to_quiescence()
    return runner
