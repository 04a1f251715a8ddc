"""Placement and forwarding metrics, recomputable from the raw event log.

Every counter reported here can be re-derived from the log lines the
simulator emits; the consistency tests assert live counters == recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Metrics:
    jobs_submitted: int = 0
    jobs_completed: int = 0
    jobs_failed: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    no_route: int = 0
    pit_timeouts: int = 0
    cluster_jobs: dict[str, int] = field(default_factory=dict)
    placements: dict[str, str] = field(default_factory=dict)  # request name -> cluster
    latencies: list[tuple[str, int]] = field(default_factory=list)

    def format(self) -> str:
        lines = [
            f"jobs_submitted={self.jobs_submitted}",
            f"jobs_completed={self.jobs_completed}",
            f"jobs_failed={self.jobs_failed}",
            f"cache_hits={self.cache_hits}",
            f"cache_misses={self.cache_misses}",
            f"no_route={self.no_route}",
            f"pit_timeouts={self.pit_timeouts}",
        ]
        for cluster in sorted(self.cluster_jobs):
            lines.append(f"cluster_jobs.{cluster}={self.cluster_jobs[cluster]}")
        for name in sorted(self.placements):
            lines.append(f"placement name={name} cluster={self.placements[name]}")
        for name, ms in self.latencies:
            lines.append(f"latency name={name} ms={ms}")
        return "\n".join(lines) + "\n"


def _fields(line: str) -> dict[str, str]:
    out = {}
    for token in line.split(" "):
        key, sep, value = token.partition("=")
        if sep:
            out[key] = value
    return out


def _tag(line: str) -> str | None:
    parts = line.split(" ")
    return parts[1] if len(parts) > 1 and "=" not in parts[1] else None


def recompute_from_log(lines: list[str]) -> Metrics:
    """Independent counter reconstruction from the event log text."""
    m = Metrics()
    terminal: dict[str, str] = {}
    job_cluster: dict[str, str] = {}
    for line in lines:
        tag = _tag(line)
        if tag is None:
            continue
        f = _fields(line)
        if tag == "cache-hit":
            m.cache_hits += 1
        elif tag == "cache-miss":
            m.cache_misses += 1
        elif tag == "no-route":
            m.no_route += 1
        elif tag == "pit-expire":
            m.pit_timeouts += 1
        elif tag == "placement":
            m.jobs_submitted += 1
            m.placements[f["name"]] = f["cluster"]
            job_cluster[f["job"]] = f["cluster"]
        elif tag == "job":
            if f["status"] in ("Completed", "Failed"):
                terminal[f["id"]] = f["status"]
        elif tag == "response":
            m.latencies.append((f["name"], int(f["latency_ms"])))
    for job_id, status in terminal.items():
        if status == "Completed":
            m.jobs_completed += 1
            cluster = job_cluster.get(job_id)
            if cluster is not None:
                m.cluster_jobs[cluster] = m.cluster_jobs.get(cluster, 0) + 1
        else:
            m.jobs_failed += 1
    return m


def collect_from_sim(sim) -> Metrics:
    """Live counters straight from node/forwarder/gateway state."""
    from .gateway import JobStatus
    from .sim import ClusterNode

    m = Metrics()
    for node in sim.nodes.values():
        fw = node.forwarder
        m.cache_hits += fw.cs_hits
        m.cache_misses += fw.cs_misses
        m.no_route += fw.no_route
        m.pit_timeouts += fw.pit_timeouts
        if isinstance(node, ClusterNode):
            for job in node.gateway.jobs.values():
                m.jobs_submitted += 1
                if job.status is JobStatus.COMPLETED:
                    m.jobs_completed += 1
                    m.cluster_jobs[node.node_id] = (
                        m.cluster_jobs.get(node.node_id, 0) + 1
                    )
                elif job.status is JobStatus.FAILED:
                    m.jobs_failed += 1
    # placements and latencies are log-derived facts
    derived = recompute_from_log(sim.log)
    m.placements = derived.placements
    m.latencies = derived.latencies
    return m
