"""lidc command line: client operations against a persistent simulated overlay,
plus scenario running, metrics, and node inspection.

Exit codes: 0 success, 2 usage/parse errors, 3 not found, 4 integrity failure.
"""

from __future__ import annotations

import os
import pickle
import sys

import click

from . import metrics as metrics_mod
from .cluster import load_trace
from .datalake import DATA_PREFIX
from .names import (
    ComputeSpec,
    Name,
    NameGrammarError,
    STATUS_PREFIX,
    build_compute_name,
    is_prefix_of,
    parse_uri,
)
from .scenario import parse_scenario, run_scenario
from .sim import ClusterNode, ConfigError, Simulation, parse_topology
from .wire import write_capture

_SIM_FILE = "sim.pickle"
_LOG_FILE = "events.log"
_METRICS_FILE = "metrics.txt"

EXIT_NOT_FOUND = 3
EXIT_INTEGRITY = 4


class Session:
    """Simulator state persisted under --store across CLI invocations."""

    def __init__(self, sim: Simulation, store: str | None):
        self.sim = sim
        self.store = store

    @classmethod
    def open(cls, topology: str | None, seed: int, store: str | None,
             trace: str | None = None) -> "Session":
        if store:
            path = os.path.join(store, _SIM_FILE)
            if os.path.exists(path):
                with open(path, "rb") as fh:
                    return cls(pickle.load(fh), store)
        if topology is None:
            raise click.UsageError("no existing session in --store; --topology is required")
        with open(topology) as fh:
            topo = parse_topology(fh.read())
        kwargs = {}
        if trace:
            with open(trace) as fh:
                kwargs["trace"] = load_trace(fh.read())
        return cls(Simulation(topo, seed=seed, **kwargs), store)

    def save(self) -> None:
        if not self.store:
            return
        os.makedirs(self.store, exist_ok=True)
        with open(os.path.join(self.store, _SIM_FILE), "wb") as fh:
            pickle.dump(self.sim, fh)
        with open(os.path.join(self.store, _LOG_FILE), "w") as fh:
            fh.write("\n".join(self.sim.log) + ("\n" if self.sim.log else ""))
        with open(os.path.join(self.store, _METRICS_FILE), "w") as fh:
            fh.write(metrics_mod.recompute_from_log(self.sim.log).format())


def _default_client(sim: Simulation) -> str:
    from .sim import ClientNode

    for node_id, node in sim.nodes.items():
        if isinstance(node, ClientNode):
            return node_id
    raise click.UsageError("topology has no client node")


def _exchange(sim: Simulation, client_id: str, name: Name, timeout_ms: int = 60_000):
    """Inject one Interest and run until its response lands (or times out)."""
    interest = sim.make_interest(client_id, name)
    sim.inject_request(client_id, interest)
    client = sim.nodes[client_id]
    deadline = sim.clock + timeout_ms
    while sim.pending_events() and name not in client.inbox:
        if sim._heap[0][0] > deadline:
            break
        sim.run_until(sim._heap[0][0])
    return client.inbox.pop(name, None), interest


@click.group()
@click.option("--topology", type=click.Path(exists=True, dir_okay=False),
              help="Topology file (required when starting a new session).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--store", type=click.Path(file_okay=False),
              help="Session directory; state persists across invocations.")
@click.option("--trace", type=click.Path(exists=True, dir_okay=False),
              help="Override the bundled runtime trace file.")
@click.pass_context
def main(ctx: click.Context, topology: str | None, seed: int, store: str | None,
         trace: str | None) -> None:
    """Name-based compute placement over a simulated multi-cluster overlay."""
    ctx.obj = {"topology": topology, "seed": seed, "store": store, "trace": trace}


def _session(ctx: click.Context) -> Session:
    o = ctx.obj
    try:
        return Session.open(o["topology"], o["seed"], o["store"], o["trace"])
    except ConfigError as exc:
        raise click.UsageError(str(exc))


@main.command()
@click.option("--app", required=True)
@click.option("--mem", required=True, type=int)
@click.option("--cpu", required=True, type=int)
@click.option("--param", "params", multiple=True, metavar="K=V")
@click.option("--data", "data_uris", multiple=True, metavar="URI")
@click.option("--client", "client_id", default=None)
@click.option("--advance-ms", type=int, default=0,
              help="Advance simulated time before submitting.")
@click.pass_context
def submit(ctx, app, mem, cpu, params, data_uris, client_id, advance_ms):
    """Submit a compute job; prints job_id=<id>."""
    if mem < 1:
        raise click.UsageError("mem must be >= 1")
    if cpu < 1:
        raise click.UsageError("cpu must be >= 1")
    param_map = {}
    for p in params:
        key, sep, value = p.partition("=")
        if not sep:
            raise click.UsageError(f"--param needs k=v, got {p!r}")
        param_map[key] = value
    try:
        datasets = [parse_uri(u) for u in data_uris]
        spec = ComputeSpec.make(app, mem, cpu, param_map, datasets)
        name = build_compute_name(spec)
    except NameGrammarError as exc:
        raise click.UsageError(str(exc))
    session = _session(ctx)
    sim = session.sim
    sim.advance(advance_ms)
    client = client_id or _default_client(sim)
    reply, _ = _exchange(sim, client, name)
    session.save()
    if reply is None:
        click.echo("error=no response", err=True)
        sys.exit(EXIT_NOT_FOUND)
    if reply.content.startswith(b"type="):
        click.echo(f"error={reply.content.decode(errors='replace')}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    click.echo(f"job_id={reply.content.decode()}")


@main.command()
@click.argument("job_id")
@click.option("--client", "client_id", default=None)
@click.option("--advance-ms", type=int, default=0)
@click.pass_context
def status(ctx, job_id, client_id, advance_ms):
    """Query a job's status; prints the gateway's record verbatim."""
    session = _session(ctx)
    sim = session.sim
    sim.advance(advance_ms)
    client = client_id or _default_client(sim)
    name = STATUS_PREFIX.child(job_id.encode())
    reply, _ = _exchange(sim, client, name)
    session.save()
    if reply is None or reply.content.startswith(b"type="):
        click.echo("error=no response", err=True)
        sys.exit(EXIT_NOT_FOUND)
    click.echo(reply.content.decode())


@main.command()
@click.argument("uri")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--client", "client_id", default=None)
@click.option("--advance-ms", type=int, default=0)
@click.pass_context
def fetch(ctx, uri, out, client_id, advance_ms):
    """Fetch a dataset: reassemble all segments, verify the manifest digest."""
    try:
        base = parse_uri(uri)
    except NameGrammarError as exc:
        raise click.UsageError(str(exc))
    session = _session(ctx)
    sim = session.sim
    sim.advance(advance_ms)
    client = client_id or _default_client(sim)
    task = sim.start_fetch(client, base)
    deadline = sim.clock + 120_000
    while sim.pending_events() and not task.done:
        if sim._heap[0][0] > deadline:
            break
        sim.run_until(sim._heap[0][0])
    session.save()
    if not task.done or (task.error and task.error != "digest-mismatch"):
        click.echo(f"error={task.error or 'no response'}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    if task.error == "digest-mismatch":
        click.echo("error=digest-mismatch", err=True)
        sys.exit(EXIT_INTEGRITY)
    with open(out, "wb") as fh:
        fh.write(task.payload)
    click.echo(f"wrote={out} bytes={len(task.payload)}"
               f" declared_size={task.manifest.declared_size}")


@main.command()
@click.argument("uri")
@click.option("--file", "path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--node", "node_id", default=None,
              help="Target cluster (default: first cluster announcing the data prefix).")
@click.option("--declared-size", type=int, default=None)
@click.pass_context
def publish(ctx, uri, path, node_id, declared_size):
    """Load a local file into a cluster's data lake."""
    try:
        name = parse_uri(uri)
    except NameGrammarError as exc:
        raise click.UsageError(str(exc))
    session = _session(ctx)
    sim = session.sim
    if node_id is None:
        for nid, prefix in sim.announcements:
            if is_prefix_of(DATA_PREFIX, prefix) or is_prefix_of(prefix, DATA_PREFIX):
                node_id = nid
                break
    node = sim.nodes.get(node_id)
    if not isinstance(node, ClusterNode):
        raise click.UsageError(f"{node_id!r} is not a cluster node")
    with open(path, "rb") as fh:
        payload = fh.read()
    from .datalake import DataLakeError

    try:
        manifest = node.lake.publish(name, payload, declared_size)
    except DataLakeError as exc:
        raise click.UsageError(str(exc))
    sim.log_kv("publish", cluster=node_id, name=uri, size=manifest.declared_size)
    session.save()
    click.echo(f"published={uri} segments={manifest.segment_count}")


@main.group()
def sim():
    """Scenario running, metrics, and node inspection."""


@sim.command("run")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--capture", "capture_path", type=click.Path(dir_okay=False),
              help="Also write every link packet to a capture file.")
@click.pass_context
def sim_run(ctx, scenario, capture_path):
    """Run a workload script to completion; write the event log and metrics."""
    session = _session(ctx)
    with open(scenario) as fh:
        try:
            actions, end = parse_scenario(fh.read())
        except ConfigError as exc:
            raise click.UsageError(f"{scenario}: {exc}")
    runner = run_scenario(session.sim, actions, end)
    session.save()
    if capture_path:
        write_capture(capture_path, session.sim.capture)
    m = metrics_mod.recompute_from_log(session.sim.log)
    click.echo(m.format(), nl=False)
    for ordinal in sorted(runner.job_ids):
        click.echo(f"job @{ordinal} id={runner.job_ids[ordinal]}")


@sim.command("metrics")
@click.pass_context
def sim_metrics(ctx):
    """Print metrics recomputed from the session's event log."""
    session = _session(ctx)
    click.echo(metrics_mod.recompute_from_log(session.sim.log).format(), nl=False)


@sim.command("inspect")
@click.argument("node_id")
@click.pass_context
def sim_inspect(ctx, node_id):
    """Dump a node's FIB/PIT/content-store state."""
    session = _session(ctx)
    node = session.sim.nodes.get(node_id)
    if node is None:
        click.echo(f"error=no such node {node_id!r}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    click.echo(node.forwarder.report())


if __name__ == "__main__":
    main()
