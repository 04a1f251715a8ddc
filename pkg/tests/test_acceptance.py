"""Acceptance gate: one test per criterion, each printing a pass line."""

import random
import string
import time

from click.testing import CliRunner

from lidc.cli import main as cli_main
from lidc.forwarder import Fib
from lidc.gateway import JobStatus, make_job_id
from lidc.names import (
    ComputeSpec,
    Name,
    build_compute_name,
    is_prefix_of,
    parse_compute_component,
    build_compute_component,
    parse_uri,
    to_uri,
)
from lidc.sim import RemoveCluster, Simulation, parse_topology
from lidc.wire import (
    DataPacket,
    Interest,
    WireError,
    decode_data,
    decode_interest,
    encode_data,
    encode_interest,
)

from conftest import scenario_path

TOPO = scenario_path("two_cluster.topo")
BLAST_URI = "/ndn/k8s/compute/app=BLAST&cpu=2&mem=4&srr=SRR2931415"


def _ok(n, detail):
    print(f"ACCEPTANCE {n} PASS: {detail}")


def _cli(args):
    return CliRunner().invoke(cli_main, args)


def test_acceptance_1_end_to_end_workflow(tmp_path):
    started = time.monotonic()
    base = ["--topology", TOPO, "--seed", "1", "--store", str(tmp_path / "s")]
    r = _cli(base + ["submit", "--app", "BLAST", "--mem", "4", "--cpu", "2",
                     "--param", "srr=SRR2931415"])
    assert r.exit_code == 0 and r.output.startswith("job_id=")
    jid = r.output.strip().split("=", 1)[1]

    seen = [_cli(base + ["status", jid]).output.strip()]
    seen.append(_cli(base + ["status", jid, "--advance-ms", "2000"]).output.strip())
    r = _cli(base + ["status", jid, "--advance-ms", "29400000"])
    lines = r.output.strip().splitlines()
    seen.append(lines[0])
    assert seen == ["status=Pending", "status=Running", "status=Completed"]
    result_uri = lines[1].split("=", 1)[1]

    out = tmp_path / "result.bin"
    r = _cli(base + ["fetch", result_uri, "--out", str(out)])
    assert r.exit_code == 0 and out.stat().st_size > 0
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    _ok(1, f"submit/status/fetch workflow, job {jid}, {elapsed:.2f}s wall-clock")


def test_acceptance_2_location_independence(two_cluster_topology):
    wire_bytes = []
    placed_on = []
    for failover in (False, True):
        sim = Simulation(parse_topology(two_cluster_topology), seed=9)
        if failover:
            sim.apply_topology_change(RemoveCluster("clusterA"))
        name = parse_uri(BLAST_URI)
        interest = sim.make_interest("client1", name)
        wire_bytes.append(encode_interest(interest))
        sim.inject_request("client1", interest)
        sim.run_to_quiescence()
        jid = make_job_id(name, interest.nonce)
        for cid in ("clusterA", "clusterB"):
            node = sim.nodes.get(cid)
            if node is not None and jid in node.gateway.jobs:
                assert node.gateway.jobs[jid].status is JobStatus.COMPLETED
                placed_on.append(cid)
    assert wire_bytes[0] == wire_bytes[1]
    assert placed_on == ["clusterA", "clusterB"]
    _ok(2, "identical request bytes completed on clusterA, then clusterB after removal")


def test_acceptance_3_trace_replay(two_cluster_topology):
    # 8h9m50s=29390s, 8h7m10s=29230s, 24h16m12s=87372s, 24h2m47s=86567s
    rows = [
        ("SRR2931415", 4, 2, 29_390, 941_000_000),
        ("SRR2931415", 4, 4, 29_230, 941_000_000),
        ("SRR5139395", 4, 2, 87_372, 2_710_000_000),
        ("SRR5139395", 6, 2, 86_567, 2_710_000_000),
    ]
    for srr, mem, cpu, runtime_s, declared in rows:
        sim = Simulation(parse_topology(two_cluster_topology), seed=2)
        uri = f"/ndn/k8s/compute/app=BLAST&cpu={cpu}&mem={mem}&srr={srr}"
        name = parse_uri(uri)
        interest = sim.make_interest("client1", name)
        sim.inject_request("client1", interest)
        sim.run_to_quiescence()
        job = sim.nodes["clusterA"].gateway.jobs[make_job_id(name, interest.nonce)]
        assert job.status is JobStatus.COMPLETED
        assert job.finished_at - job.started_at == runtime_s * 1000
        manifest = sim.nodes["clusterA"].lake.get_manifest(job.result_name)
        assert manifest.declared_size == declared
    _ok(3, "all four trace rows reproduce runtime and output size exactly")


def test_acceptance_4_lpm_oracle():
    rng = random.Random(1004)
    alphabet = [b"a", b"b", b"c", b"d"]

    def rand_name(max_len):
        return Name(tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_len))))

    checked = 0
    for _ in range(50):
        fib = Fib()
        prefixes = []
        for _ in range(rng.randint(1, 25)):
            p = rand_name(4)
            fib.register(p, rng.randint(0, 9), rng.randint(0, 99))
            prefixes.append(p)
        for _ in range(20):
            name = rand_name(6)
            best = None
            for p in prefixes:
                if is_prefix_of(p, name) and (best is None or len(p) > len(best)):
                    best = p
            got = fib.lpm(name)
            assert (got[0] if got else None) == best
            checked += 1
    assert checked == 1_000
    _ok(4, f"{checked} randomized lookups agree with the brute-force scan")


def test_acceptance_5_pit_aggregation():
    lines = ["node r router", "node srv cluster cpu=8 mem=16 apps=BLAST"]
    lines += [f"node c{i} client" for i in range(10)]
    lines += [f"link c{i} r 5" for i in range(10)]
    lines += ["link r srv 5", "announce srv /ndn/k8s/data"]
    sim = Simulation(parse_topology("\n".join(lines)), seed=3)
    name = parse_uri("/ndn/k8s/data/shared/seg=0")
    sim.nodes["srv"].lake.publish(parse_uri("/ndn/k8s/data/shared"), b"payload")
    for i in range(10):
        sim.inject_request(f"c{i}", sim.make_interest(f"c{i}", name))
    sim.run_to_quiescence()
    uri = to_uri(name)
    upstream = sum(
        1 for l in sim.log if " forward " in l and "node=r " in l and f"name={uri}" in l
    )
    delivered = sum(
        1 for l in sim.log if " response " in l and f"name={uri}" in l
    )
    assert upstream == 1
    assert delivered == 10
    for i in range(10):
        assert sim.nodes[f"c{i}"].inbox[name].content == b"payload"
    _ok(5, "10 aggregated Interests: 1 upstream forward, 10 Data deliveries")


def test_acceptance_6_result_caching(two_cluster_topology):
    topo = two_cluster_topology + "\nnode client2 client\nlink client2 r1 5\n"
    sim = Simulation(parse_topology(topo), seed=4)
    name = parse_uri(BLAST_URI)
    interest = sim.make_interest("client1", name)
    sim.inject_request("client1", interest)
    sim.run_to_quiescence()
    jid = make_job_id(name, interest.nonce)
    seg = parse_uri(f"/ndn/k8s/data/results/{jid}/seg=0")

    sim.inject_request("client1", sim.make_interest("client1", seg))
    sim.run_to_quiescence()
    hits_before = sim.nodes["r1"].forwarder.cs_hits
    upstream_before = sum(1 for l in sim.log if "arrival node=cluster" in l)

    sim.inject_request("client2", sim.make_interest("client2", seg))
    sim.run_to_quiescence()
    assert sim.nodes["r1"].forwarder.cs_hits - hits_before == 1
    upstream_delta = sum(1 for l in sim.log if "arrival node=cluster" in l) - upstream_before
    assert upstream_delta == 0
    assert sim.nodes["client2"].inbox[seg] == sim.nodes["client1"].inbox[seg]
    _ok(6, "second fetch served from the router cache, zero upstream packets")


def test_acceptance_7_round_trip_properties():
    rng = random.Random(1007)
    tokens = string.ascii_letters + string.digits + "_.+-"

    def rand_token():
        return "".join(rng.choice(tokens) for _ in range(rng.randint(1, 8)))

    count = 0
    for _ in range(2_500):  # Names
        name = Name(tuple(
            bytes(rng.randrange(256) for _ in range(rng.randint(1, 12)))
            for _ in range(rng.randint(0, 5))
        ))
        assert parse_uri(to_uri(name)) == name
        count += 1
    for _ in range(2_500):  # ComputeSpecs
        params = {}
        for _ in range(rng.randint(0, 4)):
            key = rand_token()
            if key not in ("app", "cpu", "data", "mem"):
                params[key] = rand_token()
        spec = ComputeSpec.make(rand_token(), rng.randint(1, 64), rng.randint(1, 64),
                                params)
        assert parse_compute_component(build_compute_component(spec)) == spec
        count += 1
    for _ in range(2_500):  # Interests
        i = Interest(
            Name((bytes(rng.randrange(256) for _ in range(rng.randint(1, 8))),)),
            rng.getrandbits(32), rng.randint(1, 1 << 20),
        )
        assert decode_interest(encode_interest(i)) == i
        count += 1
    corrupt_checked = 0
    for _ in range(2_500):  # DataPackets, plus single-byte corruption
        d = DataPacket.build(
            Name((bytes(rng.randrange(256) for _ in range(rng.randint(1, 8))),)),
            bytes(rng.randrange(256) for _ in range(rng.randint(0, 32))),
            rng.randint(0, 1 << 30),
        )
        raw = encode_data(d)
        assert decode_data(raw) == d
        count += 1
        mutated = bytearray(raw)
        pos = rng.randrange(len(mutated))
        mutated[pos] = (mutated[pos] + rng.randint(1, 255)) % 256
        try:
            got = decode_data(bytes(mutated))
        except WireError:
            corrupt_checked += 1
        else:
            assert got != d, "corrupted packet silently accepted"
            corrupt_checked += 1
    assert count >= 10_000 and corrupt_checked == 2_500
    _ok(7, f"{count} round trips plus {corrupt_checked} corruption probes")


def test_acceptance_8_resource_ledger():
    topo_lines = ["node client1 client", "node r router", "link client1 r 5"]
    caps = {"cl0": (8, 16), "cl1": (12, 24), "cl2": (6, 12)}
    for cid, (cpu, mem) in caps.items():
        topo_lines += [
            f"node {cid} cluster cpu={cpu} mem={mem} apps=BLAST",
            f"link r {cid} 5",
            f"announce {cid} /ndn/k8s/compute",
            f"announce {cid} /ndn/k8s/data",
        ]
    sim = Simulation(parse_topology("\n".join(topo_lines)), seed=8,
                     strategy="round-robin")
    rng = random.Random(1008)
    at = 0
    for i in range(200):
        # unknown (srr, mem, cpu) rows fall back to short linear runtimes
        uri = (f"/ndn/k8s/compute/app=BLAST&cpu={rng.randint(1, 14)}"
               f"&mem={rng.randint(1, 30)}&srr=SRR{900_000 + i}")
        sim.inject_request("client1", sim.make_interest("client1", parse_uri(uri)),
                           at=at)
        at += rng.randint(0, 400)
        sim.run_until(at)
    sim.run_to_quiescence()

    # replay the ledger from the log alone
    job_spec: dict[str, ComputeSpec] = {}
    job_cluster: dict[str, str] = {}
    histories: dict[str, list[str]] = {}
    usage = {cid: [0, 0] for cid in caps}
    reserved: set[str] = set()
    snapshots_checked = 0
    for line in sim.log:
        parts = line.split(" ")
        tag = parts[1]
        f = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
        if tag == "placement":
            spec = parse_compute_component(parse_uri(f["name"]).components[-1])
            job_spec[f["job"]] = spec
            job_cluster[f["job"]] = f["cluster"]
            histories[f["job"]] = []
        elif tag == "job":
            jid = f["id"]
            histories[jid].append(f["status"])
            cid = job_cluster[jid]
            if f["status"] == "Running":
                usage[cid][0] += job_spec[jid].cpu
                usage[cid][1] += job_spec[jid].mem_gb
                reserved.add(jid)
            elif f["status"] in ("Completed", "Failed") and jid in reserved:
                usage[cid][0] -= job_spec[jid].cpu
                usage[cid][1] -= job_spec[jid].mem_gb
                reserved.discard(jid)
        elif tag == "resources":
            cid = f["cluster"]
            assert usage[cid] == [int(f["cpu_used"]), int(f["mem_used"])]
            snapshots_checked += 1
        for cid, (cpu_cap, mem_cap) in caps.items():
            assert usage[cid][0] <= cpu_cap and usage[cid][1] <= mem_cap

    assert len(histories) == 200
    assert snapshots_checked > 100
    valid_paths = {
        ("Pending", "Running", "Completed"),
        ("Pending", "Running", "Failed"),
        ("Pending", "Failed"),
    }
    statuses = [tuple(h) for h in histories.values()]
    assert all(s in valid_paths for s in statuses)
    completed = sum(1 for s in statuses if s[-1] == "Completed")
    failed = 200 - completed
    assert completed > 0 and failed > 0  # the workload exercises both outcomes
    # live ledger drained back to zero
    for cid in caps:
        node = sim.nodes[cid]
        assert node.cluster.resources.cpu_used == 0
        assert node.cluster.resources.mem_used_gb == 0
    _ok(8, f"200-job replayed ledger matched {snapshots_checked} snapshots,"
           f" {completed} completed / {failed} failed")


def test_acceptance_9_determinism(two_cluster_topology, tmp_path):
    for scn in ("fig5_workflow.scn", "failover.scn", "trace_replay.scn"):
        outputs = []
        for run_idx in range(2):
            store = tmp_path / f"{scn}.{run_idx}"
            r = _cli(["--topology", TOPO, "--seed", "5", "--store", str(store),
                      "sim", "run", scenario_path(scn)])
            assert r.exit_code == 0, r.output
            outputs.append(
                (
                    (store / "events.log").read_bytes(),
                    (store / "metrics.txt").read_bytes(),
                    r.output,
                )
            )
        assert outputs[0] == outputs[1], scn
    _ok(9, "all three bundled scenarios byte-identical across repeated runs")
