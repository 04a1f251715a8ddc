"""Mock cluster orchestration: resource accounting, named service endpoints,
application registry with pluggable duration models, and FIFO job queueing.
"""

from __future__ import annotations

import csv
import hashlib
import io
import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Protocol

from .datalake import DataLake, NotFound
from .names import ComputeSpec, to_uri

DATA_LAKE_SERVICE = "dl-nfd.ndnk8s.svc.cluster.local"
SYNTHETIC_PAYLOAD_BYTES = 64 * 1024

_SERVICE_NAME_RE = re.compile(
    r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?\.[a-z0-9]([a-z0-9-]*[a-z0-9])?\.svc\.cluster\.local$"
)


class CapacityExceeded(Exception):
    """The spec can never fit on this cluster."""


@dataclass
class ClusterResources:
    cpu_total: int
    mem_total_gb: int
    cpu_used: int = 0
    mem_used_gb: int = 0

    def can_ever_fit(self, spec: ComputeSpec) -> bool:
        return spec.cpu <= self.cpu_total and spec.mem_gb <= self.mem_total_gb

    def fits_now(self, spec: ComputeSpec) -> bool:
        return (
            self.cpu_used + spec.cpu <= self.cpu_total
            and self.mem_used_gb + spec.mem_gb <= self.mem_total_gb
        )

    def reserve(self, spec: ComputeSpec) -> None:
        assert self.fits_now(spec), "reserve would overcommit"
        self.cpu_used += spec.cpu
        self.mem_used_gb += spec.mem_gb

    def release(self, spec: ComputeSpec) -> None:
        assert self.cpu_used >= spec.cpu and self.mem_used_gb >= spec.mem_gb, (
            "release underflow"
        )
        self.cpu_used -= spec.cpu
        self.mem_used_gb -= spec.mem_gb


class ServiceRegistry:
    """Exact-match lookup of DNS-style service names."""

    def __init__(self) -> None:
        self.services: dict[str, object] = {}

    def register(self, dns_name: str, handler: object) -> None:
        if not _SERVICE_NAME_RE.match(dns_name):
            raise ValueError(f"bad service name {dns_name!r}")
        self.services[dns_name] = handler

    def resolve(self, dns_name: str) -> object | None:
        return self.services.get(dns_name)


@dataclass(frozen=True)
class Linear:
    """Duration grows with input size: max(floor_s, seconds_per_mb * input_mb)."""

    seconds_per_mb: float = 1.0
    floor_s: float = 1.0

    def lookup(self, spec: ComputeSpec, input_bytes: int) -> tuple[float, int | None]:
        return max(self.floor_s, self.seconds_per_mb * input_bytes / 1_000_000), None


@dataclass(frozen=True)
class TraceTable:
    """Measured (srr, mem_gb, cpu) -> (runtime_s, output_bytes); misses fall back to Linear."""

    rows: tuple[tuple[tuple[str, int, int], tuple[int, int]], ...]
    fallback: Linear = Linear()

    def lookup(self, spec: ComputeSpec, input_bytes: int) -> tuple[float, int | None]:
        srr = spec.param("srr")
        if srr is not None:
            for key, value in self.rows:
                if key == (srr, spec.mem_gb, spec.cpu):
                    return float(value[0]), value[1]
        return self.fallback.lookup(spec, input_bytes)


DurationModel = Linear | TraceTable


def load_trace(text: str, fallback: Linear | None = None) -> TraceTable:
    """Parse the trace file format: header then srr,mem_gb,cpu,runtime_s,output_bytes."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for row in reader:
        rows.append(
            (
                (row["srr"], int(row["mem_gb"]), int(row["cpu"])),
                (int(row["runtime_s"]), int(row["output_bytes"])),
            )
        )
    return TraceTable(tuple(rows), fallback or Linear())


def default_trace() -> TraceTable:
    text = resources.files("lidc").joinpath("data/table1_trace.csv").read_text()
    return load_trace(text)


def pseudo_bytes(seed: bytes, n: int) -> bytes:
    """First n bytes of a deterministic SHA-256 counter stream."""
    out = bytearray()
    counter = 0
    while len(out) < n:
        out.extend(hashlib.sha256(seed + counter.to_bytes(8, "big")).digest())
        counter += 1
    return bytes(out[:n])


def blast_execute(spec: ComputeSpec, input_bytes: bytes) -> bytes:
    """Deterministic stand-in for the alignment job: a seeded pseudo-report."""
    seed = hashlib.sha256(
        b"blast|"
        + (spec.param("srr") or "").encode()
        + b"|"
        + hashlib.sha256(input_bytes).digest()
    ).digest()
    return pseudo_bytes(seed, SYNTHETIC_PAYLOAD_BYTES)


def generic_execute(spec: ComputeSpec, input_bytes: bytes) -> bytes:
    seed = hashlib.sha256(
        spec.app.encode() + b"|" + hashlib.sha256(input_bytes).digest()
    ).digest()
    return pseudo_bytes(seed, SYNTHETIC_PAYLOAD_BYTES)


@dataclass
class AppEntry:
    execute: Callable[[ComputeSpec, bytes], bytes]
    duration: DurationModel


class AppRegistry:
    def __init__(self) -> None:
        self.apps: dict[str, AppEntry] = {}

    def register(self, app: str, entry: AppEntry) -> None:
        self.apps[app] = entry

    def get(self, app: str) -> AppEntry | None:
        return self.apps.get(app)


def default_app_registry(apps: list[str], trace: TraceTable | None = None) -> AppRegistry:
    registry = AppRegistry()
    for app in apps:
        if app == "BLAST":
            registry.register(app, AppEntry(blast_execute, trace or default_trace()))
        else:
            registry.register(app, AppEntry(generic_execute, Linear()))
    return registry


class SimHooks(Protocol):
    """Event-loop services the cluster and gateway need."""

    def schedule_job_start(self, cluster_id: str, job_id: str, delay_ms: int) -> None: ...

    def schedule_job_completion(self, cluster_id: str, job_id: str, delay_ms: int) -> None: ...

    def log_kv(self, tag: str, **fields: object) -> None: ...


class Cluster:
    """One cluster: resources, app/service registries, a local lake, and a FIFO
    job queue with head-of-line blocking."""

    def __init__(
        self,
        node_id: str,
        resources_: ClusterResources,
        apps: AppRegistry,
        lake: DataLake,
    ) -> None:
        self.node_id = node_id
        self.resources = resources_
        self.apps = apps
        self.lake = lake
        self.services = ServiceRegistry()
        self.services.register(DATA_LAKE_SERVICE, lake)
        self.queue: deque = deque()  # JobRecord FIFO, head-of-line blocking
        self._declared: dict[str, int | None] = {}
        self._inputs: dict[str, bytes] = {}
        self.gateway = None  # set by the gateway on construction

    def admit(self, spec: ComputeSpec) -> str:
        """'admitted' reserves resources; 'queued' leaves the job Pending."""
        if not self.resources.can_ever_fit(spec):
            raise CapacityExceeded(
                f"cpu={spec.cpu} mem={spec.mem_gb} exceeds cluster capacity"
            )
        if self.resources.fits_now(spec):
            self.resources.reserve(spec)
            return "admitted"
        return "queued"

    def try_start(self, job, now: int, hooks: SimHooks) -> None:
        """Admission decision for a Pending job (from its start event or the queue)."""
        from .gateway import JobStatus

        if job.status is not JobStatus.PENDING:
            return
        try:
            if self.queue:
                # jobs already waiting keep priority: new arrivals go behind them
                if not self.resources.can_ever_fit(job.spec):
                    raise CapacityExceeded(
                        f"cpu={job.spec.cpu} mem={job.spec.mem_gb}"
                        " exceeds cluster capacity"
                    )
                outcome = "queued"
            else:
                outcome = self.admit(job.spec)
        except CapacityExceeded as exc:
            job.to_failed(now, str(exc))
            hooks.log_kv("job", cluster=self.node_id, id=job.job_id,
                         status=job.status.value, error=str(exc))
            return
        if outcome == "queued":
            self.queue.append(job)
            hooks.log_kv("queued", cluster=self.node_id, id=job.job_id)
            return
        self._begin(job, now, hooks)

    def _begin(self, job, now: int, hooks: SimHooks) -> None:
        """Resources already reserved: gather inputs, start the run."""
        entry = self.apps.get(job.spec.app)
        if entry is None:
            self._abort(job, now, hooks, f"unknown application {job.spec.app!r}")
            return
        inputs = bytearray()
        input_size = 0
        for dataset in job.spec.datasets:
            try:
                manifest = self.lake.get_manifest(dataset)
            except NotFound:
                self._abort(job, now, hooks, f"dataset not found: {to_uri(dataset)}")
                return
            input_size += manifest.declared_size
            inputs.extend(self.lake.datasets[dataset][1])
        duration_s, declared = entry.duration.lookup(job.spec, input_size)
        self._declared[job.job_id] = declared
        self._inputs[job.job_id] = bytes(inputs)
        job.to_running(now)
        hooks.log_kv("job", cluster=self.node_id, id=job.job_id, status=job.status.value)
        self._log_resources(hooks)
        hooks.schedule_job_completion(self.node_id, job.job_id, int(round(duration_s * 1000)))

    def _abort(self, job, now: int, hooks: SimHooks, error: str) -> None:
        self.resources.release(job.spec)
        job.to_failed(now, error)
        hooks.log_kv("job", cluster=self.node_id, id=job.job_id,
                     status=job.status.value, error=error)
        self._log_resources(hooks)

    def finish(self, job, now: int, hooks: SimHooks) -> None:
        """Completion event fired: execute the stand-in app, publish, release."""
        from .gateway import JobStatus

        if job.status is not JobStatus.RUNNING:
            return
        entry = self.apps.get(job.spec.app)
        output = entry.execute(job.spec, self._inputs.pop(job.job_id, b""))
        declared = self._declared.pop(job.job_id, None)
        self.gateway.on_job_completion(job.job_id, output, declared, now)
        hooks.log_kv("job", cluster=self.node_id, id=job.job_id,
                     status=job.status.value,
                     **({"error": job.error} if job.error else {}))
        self.resources.release(job.spec)
        self._log_resources(hooks)
        self.drain_queue(now, hooks)

    def fail_all(self, now: int, hooks: SimHooks, error: str) -> None:
        """Cluster departure: every non-terminal job fails."""
        from .gateway import JobStatus

        for job in list(self.gateway.jobs.values()):
            if job.status is JobStatus.RUNNING:
                self.resources.release(job.spec)
                self._declared.pop(job.job_id, None)
                self._inputs.pop(job.job_id, None)
            if job.status in (JobStatus.PENDING, JobStatus.RUNNING):
                job.to_failed(now, error)
                hooks.log_kv("job", cluster=self.node_id, id=job.job_id,
                             status=job.status.value, error=error)
        self.queue.clear()

    def drain_queue(self, now: int, hooks: SimHooks) -> None:
        """Admit queued jobs in FIFO order while the head fits (no backfill)."""
        from .gateway import JobStatus

        while self.queue:
            head = self.queue[0]
            if head.status is not JobStatus.PENDING:
                self.queue.popleft()
                continue
            if not self.resources.fits_now(head.spec):
                break
            self.queue.popleft()
            self.resources.reserve(head.spec)
            self._begin(head, now, hooks)

    def _log_resources(self, hooks: SimHooks) -> None:
        hooks.log_kv(
            "resources",
            cluster=self.node_id,
            cpu_used=self.resources.cpu_used,
            mem_used=self.resources.mem_used_gb,
        )
