import hashlib
import itertools
import random

import pytest

from lidc.cluster import Cluster, ClusterResources, default_app_registry
from lidc.datalake import DataLake
from lidc.gateway import (
    Gateway,
    InvalidTransition,
    JobRecord,
    JobStatus,
    blast_validator,
    make_job_id,
)
from lidc.names import ComputeSpec, build_compute_name, parse_uri, to_uri
from lidc.wire import Interest


class _Hooks:
    def __init__(self):
        self.starts = []
        self.completions = []
        self.log = []

    def schedule_job_start(self, cluster_id, job_id, delay_ms):
        self.starts.append((cluster_id, job_id, delay_ms))

    def schedule_job_completion(self, cluster_id, job_id, delay_ms):
        self.completions.append((cluster_id, job_id, delay_ms))

    def log_kv(self, tag, **fields):
        self.log.append((tag, fields))


def make_gateway():
    hooks = _Hooks()
    cluster = Cluster(
        "clusterA",
        ClusterResources(8, 16),
        default_app_registry(["BLAST", "OTHER"]),
        DataLake(),
    )
    return Gateway(cluster, hooks), hooks


def spec(app="BLAST", mem=4, cpu=2, **params):
    return ComputeSpec.make(app, mem, cpu, params)


class TestJobId:
    def test_oracle_recomputation(self):
        # oracle: sha256 over the canonical URI bytes then the 4-byte nonce
        name = build_compute_name(spec(srr="SRR2931415"))
        want = hashlib.sha256(
            to_uri(name).encode() + (7).to_bytes(4, "big")
        ).hexdigest()[:16]
        assert make_job_id(name, 7) == want

    def test_format(self):
        jid = make_job_id(build_compute_name(spec(srr="SRR1")), 0)
        assert len(jid) == 16
        assert all(c in "0123456789abcdef" for c in jid)

    def test_uniqueness_over_many_submissions(self):
        rng = random.Random(51)
        seen = set()
        for i in range(10_000):
            s = spec(app=rng.choice(["BLAST", "OTHER"]),
                     mem=rng.randint(1, 64), cpu=rng.randint(1, 64),
                     srr=f"SRR{rng.randrange(1_000)}")
            seen.add(make_job_id(build_compute_name(s), rng.getrandbits(32)))
        assert len(seen) == 10_000

    def test_nonce_distinguishes_identical_specs(self):
        name = build_compute_name(spec(srr="SRR1"))
        assert make_job_id(name, 1) != make_job_id(name, 2)


class TestTransitions:
    def test_exhaustive_transition_matrix(self):
        allowed = {
            (JobStatus.PENDING, JobStatus.RUNNING),
            (JobStatus.PENDING, JobStatus.FAILED),
            (JobStatus.RUNNING, JobStatus.COMPLETED),
            (JobStatus.RUNNING, JobStatus.FAILED),
        }
        movers = {
            JobStatus.RUNNING: lambda j: j.to_running(1),
            JobStatus.COMPLETED: lambda j: j.to_completed(1, parse_uri("/ndn/k8s/data/results/x")),
            JobStatus.FAILED: lambda j: j.to_failed(1, "boom"),
        }
        for src, dst in itertools.product(JobStatus, JobStatus):
            if dst is JobStatus.PENDING:
                continue
            job = JobRecord("x", spec(srr="SRR1"), src, submitted_at=0)
            if (src, dst) in allowed:
                movers[dst](job)
                assert job.status is dst
            else:
                with pytest.raises(InvalidTransition):
                    movers[dst](job)

    def test_timestamps_recorded(self):
        job = JobRecord("x", spec(srr="SRR1"), JobStatus.PENDING, submitted_at=5)
        job.to_running(10)
        assert job.started_at == 10
        job.to_completed(20, parse_uri("/ndn/k8s/data/results/x"))
        assert job.finished_at == 20


class TestValidation:
    def test_blast_validator(self):
        assert blast_validator(spec()) == "missing SRR_ID"
        assert blast_validator(spec(srr="notanid")) == "invalid SRR_ID 'notanid'"
        assert blast_validator(spec(srr="SRR2931415")) is None

    def test_validation_failure_becomes_failed_record(self):
        gw, hooks = make_gateway()
        jid = gw.submit_job(spec(), nonce=1, now=0)
        job = gw.jobs[jid]
        assert job.status is JobStatus.FAILED
        assert job.error == "missing SRR_ID"
        assert hooks.starts == []
        record = gw.query_status(jid, parse_uri("/ndn/k8s/status/x")).content.decode()
        assert record == "status=Failed\nerror=missing SRR_ID"

    def test_unvalidated_app_passes(self):
        gw, hooks = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        assert gw.jobs[jid].status is JobStatus.PENDING
        assert hooks.starts == [("clusterA", jid, 500)]


class TestStatusQueries:
    def test_exact_texts_per_state(self):
        gw, _ = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        name = parse_uri("/ndn/k8s/status/" + jid)

        def text():
            return gw.query_status(jid, name).content.decode()

        assert text() == "status=Pending"
        job = gw.jobs[jid]
        job.to_running(10)
        assert text() == "status=Running"
        job.to_completed(20, parse_uri("/ndn/k8s/data/results/" + jid))
        assert text() == f"status=Completed\nresult=/ndn/k8s/data/results/{jid}"

    def test_unknown_id(self):
        gw, _ = make_gateway()
        d = gw.query_status("deadbeefdeadbeef", parse_uri("/ndn/k8s/status/x"))
        assert d.content == b"status=unknown"
        assert d.freshness_ms == 0

    def test_query_is_read_only(self):
        gw, hooks = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        before = (gw.jobs[jid].status, len(hooks.starts), len(hooks.log))
        for _ in range(5):
            gw.query_status(jid, parse_uri("/ndn/k8s/status/" + jid))
        assert (gw.jobs[jid].status, len(hooks.starts), len(hooks.log)) == before


class TestSubmission:
    def test_resubmission_same_nonce_is_idempotent(self):
        gw, hooks = make_gateway()
        a = gw.submit_job(spec(app="OTHER"), nonce=9, now=0)
        b = gw.submit_job(spec(app="OTHER"), nonce=9, now=5)
        assert a == b
        assert len(gw.jobs) == 1
        assert len(hooks.starts) == 1

    def test_start_scheduled_with_delay(self):
        gw, hooks = make_gateway()
        jid = gw.submit_job(spec(srr="SRR2931415"), nonce=1, now=0)
        assert hooks.starts == [("clusterA", jid, 500)]


class TestCompletion:
    def test_publishes_result_and_completes(self):
        gw, _ = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        job = gw.jobs[jid]
        job.to_running(10)
        result = gw.on_job_completion(jid, b"output", None, 100)
        assert result == parse_uri("/ndn/k8s/data/results/" + jid)
        assert job.status is JobStatus.COMPLETED
        assert gw.cluster.lake.get_segment(result, 0) == b"output"

    def test_zero_byte_output_still_publishes(self):
        gw, _ = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        gw.jobs[jid].to_running(10)
        result = gw.on_job_completion(jid, b"", None, 100)
        assert result is not None
        assert gw.cluster.lake.get_manifest(result).segment_count == 0

    def test_ignored_unless_running(self):
        gw, _ = make_gateway()
        jid = gw.submit_job(spec(), nonce=1, now=0)  # fails validation
        assert gw.on_job_completion(jid, b"x", None, 100) is None
        assert gw.jobs[jid].status is JobStatus.FAILED
        assert gw.on_job_completion("nosuchjob", b"x", None, 100) is None

    def test_publish_failure_fails_job(self):
        gw, _ = make_gateway()
        jid = gw.submit_job(spec(app="OTHER"), nonce=1, now=0)
        job = gw.jobs[jid]
        job.to_running(10)
        # a larger stored payload than declared_size is a publish error
        assert gw.on_job_completion(jid, b"abcdef", 2, 100) is None
        assert job.status is JobStatus.FAILED
        assert job.error.startswith("publish failed:")


class TestHandleInterest:
    def test_compute_interest_returns_job_id(self):
        gw, _ = make_gateway()
        name = build_compute_name(spec(srr="SRR2931415"))
        d = gw.handle_interest(Interest(name, nonce=3), now=0)
        assert d.content.decode() == make_job_id(name, 3)
        assert d.freshness_ms == 0

    def test_status_interest(self):
        gw, _ = make_gateway()
        d = gw.handle_interest(
            Interest(parse_uri("/ndn/k8s/status/deadbeefdeadbeef"), nonce=1), now=0
        )
        assert d.content == b"status=unknown"

    def test_data_interest_proxied_to_lake(self):
        gw, _ = make_gateway()
        gw.cluster.lake.publish(parse_uri("/ndn/k8s/data/x"), b"payload")
        d = gw.handle_interest(
            Interest(parse_uri("/ndn/k8s/data/x/seg=0"), nonce=1), now=0
        )
        assert d.content == b"payload"

    def test_missing_dataset_yields_error_payload(self):
        gw, _ = make_gateway()
        d = gw.handle_interest(
            Interest(parse_uri("/ndn/k8s/data/x/manifest"), nonce=1), now=0
        )
        assert d.content.decode().startswith("type=error\nmessage=")

    def test_bogus_name_yields_error_payload(self):
        gw, _ = make_gateway()
        d = gw.handle_interest(
            Interest(parse_uri("/ndn/k8s/compute/app=BLAST"), nonce=1), now=0
        )
        assert d.content.decode().startswith("type=error\nmessage=")
        assert d.freshness_ms == 0
