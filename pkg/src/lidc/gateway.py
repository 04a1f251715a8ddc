"""Cluster ingress: classifies Interests by prefix, validates and submits
compute jobs, answers status queries, and proxies data-lake requests.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .cluster import Cluster, DATA_LAKE_SERVICE, SimHooks
from .datalake import DataLake, DataLakeError
from .names import (
    ComputeRequest,
    ComputeSpec,
    DataRequest,
    Name,
    NameGrammarError,
    RESULTS_PREFIX,
    StatusRequest,
    build_compute_name,
    classify_request,
    to_uri,
)
from .wire import DataPacket, Interest

START_DELAY_MS = 500  # Pending -> Running latency, "the application is starting"

_SRR_RE = re.compile(r"^SRR\d+$")


class JobStatus(Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    COMPLETED = "Completed"
    FAILED = "Failed"


_TRANSITIONS = {
    JobStatus.PENDING: {JobStatus.RUNNING, JobStatus.FAILED},
    JobStatus.RUNNING: {JobStatus.COMPLETED, JobStatus.FAILED},
    JobStatus.COMPLETED: set(),
    JobStatus.FAILED: set(),
}


class InvalidTransition(Exception):
    pass


def make_job_id(compute_name: Name, nonce: int) -> str:
    """First 8 bytes, hex, of the digest over (canonical name || nonce)."""
    h = hashlib.sha256(to_uri(compute_name).encode() + nonce.to_bytes(4, "big"))
    return h.digest()[:8].hex()


@dataclass
class JobRecord:
    job_id: str
    spec: ComputeSpec
    status: JobStatus
    submitted_at: int
    started_at: int | None = None
    finished_at: int | None = None
    result_name: Name | None = None
    error: str | None = None

    def _move(self, to: JobStatus) -> None:
        if to not in _TRANSITIONS[self.status]:
            raise InvalidTransition(f"{self.status.value} -> {to.value}")
        self.status = to

    def to_running(self, now: int) -> None:
        self._move(JobStatus.RUNNING)
        self.started_at = now

    def to_completed(self, now: int, result_name: Name) -> None:
        self._move(JobStatus.COMPLETED)
        self.finished_at = now
        self.result_name = result_name

    def to_failed(self, now: int, error: str) -> None:
        self._move(JobStatus.FAILED)
        self.finished_at = now
        self.error = error


Validator = Callable[[ComputeSpec], str | None]


class ValidationRegistry:
    """At most one application-specific check per app; absent apps pass."""

    def __init__(self) -> None:
        self.plugins: dict[str, Validator] = {}

    def register(self, app: str, check: Validator) -> None:
        self.plugins[app] = check

    def validate(self, spec: ComputeSpec) -> str | None:
        check = self.plugins.get(spec.app)
        return check(spec) if check is not None else None


def blast_validator(spec: ComputeSpec) -> str | None:
    srr = spec.param("srr")
    if srr is None:
        return "missing SRR_ID"
    if not _SRR_RE.match(srr):
        return f"invalid SRR_ID {srr!r}"
    return None


def default_validators() -> ValidationRegistry:
    registry = ValidationRegistry()
    registry.register("BLAST", blast_validator)
    return registry


def _control_data(name: Name, kind: str, message: str | None = None) -> DataPacket:
    lines = [f"type={kind}"]
    if message is not None:
        lines.append(f"message={message}")
    return DataPacket.build(name, "\n".join(lines).encode(), freshness_ms=0)


class Gateway:
    """Decision-maker in front of one cluster's orchestrator and data lake."""

    def __init__(
        self,
        cluster: Cluster,
        hooks: SimHooks,
        validators: ValidationRegistry | None = None,
        start_delay_ms: int = START_DELAY_MS,
    ) -> None:
        self.cluster = cluster
        self.hooks = hooks
        self.validators = validators or default_validators()
        self.start_delay_ms = start_delay_ms
        self.jobs: dict[str, JobRecord] = {}
        cluster.gateway = self

    def handle_interest(self, interest: Interest, now: int) -> DataPacket:
        try:
            request = classify_request(interest.name)
        except NameGrammarError as exc:
            return _control_data(interest.name, "error", str(exc))
        if isinstance(request, ComputeRequest):
            job_id = self.submit_job(request.spec, interest.nonce, now)
            return DataPacket.build(interest.name, job_id.encode(), freshness_ms=0)
        if isinstance(request, StatusRequest):
            return self.query_status(request.job_id, interest.name)
        # Data requests are proxied toward the data-lake service endpoint.
        lake = self.cluster.services.resolve(DATA_LAKE_SERVICE)
        assert isinstance(lake, DataLake)
        try:
            return lake.serve(request.name)
        except DataLakeError as exc:
            return _control_data(interest.name, "error", str(exc))

    def submit_job(self, spec: ComputeSpec, nonce: int, now: int) -> str:
        """Create the job record and hand it to the orchestrator; validation
        failures become queryable Failed records, never synchronous errors."""
        name = build_compute_name(spec)
        job_id = make_job_id(name, nonce)
        existing = self.jobs.get(job_id)
        if existing is not None:
            return job_id  # same name+nonce resubmission, e.g. a looped Interest
        job = JobRecord(job_id, spec, JobStatus.PENDING, submitted_at=now)
        self.jobs[job_id] = job
        self.hooks.log_kv("placement", cluster=self.cluster.node_id, job=job_id,
                          name=to_uri(name))
        error = self.validators.validate(spec)
        if error is not None:
            job.to_failed(now, error)
            self.hooks.log_kv("job", cluster=self.cluster.node_id, id=job_id,
                              status=job.status.value, error=error)
            return job_id
        self.hooks.log_kv("job", cluster=self.cluster.node_id, id=job_id,
                          status=job.status.value)
        self.hooks.schedule_job_start(self.cluster.node_id, job_id, self.start_delay_ms)
        return job_id

    def query_status(self, job_id: str, reply_name: Name) -> DataPacket:
        """Read-only status record; unknown ids answer status=unknown."""
        job = self.jobs.get(job_id)
        if job is None:
            text = "status=unknown"
        elif job.status is JobStatus.COMPLETED:
            text = f"status=Completed\nresult={to_uri(job.result_name)}"
        elif job.status is JobStatus.FAILED:
            text = f"status=Failed\nerror={job.error}"
        else:
            text = f"status={job.status.value}"
        return DataPacket.build(reply_name, text.encode(), freshness_ms=0)

    def on_job_completion(
        self, job_id: str, output: bytes, declared_size: int | None, now: int
    ) -> Name | None:
        """Publish the output under /ndn/k8s/data/results/<job_id>; Running only."""
        job = self.jobs.get(job_id)
        if job is None or job.status is not JobStatus.RUNNING:
            return None
        result_name = RESULTS_PREFIX.child(job_id.encode())
        try:
            self.cluster.lake.publish(result_name, output, declared_size)
        except (DataLakeError, ValueError) as exc:
            job.to_failed(now, f"publish failed: {exc}")
            return None
        job.to_completed(now, result_name)
        return result_name
