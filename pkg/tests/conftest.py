"""Shared builders for hand-made substrates and requests."""

from __future__ import annotations

import pytest

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def record_criterion(name: str, ok: bool):
    ACCEPTANCE_RESULTS.append((name, bool(ok)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(("PASS  " if ok else "FAIL  ") + name)

from vdcembed.paths import enumerate_paths
from vdcembed.state import EmbeddingState
from vdcembed.topology import (
    Link,
    ResourceVector,
    Server,
    SubstrateNetwork,
    Switch,
    VLink,
    VSwitch,
    VdcRequest,
    Vm,
    build_fat_tree,
)


def make_rack_net(n_servers=2, cores=8, mem=16384, switch_mem=100, link_bw=1000):
    """One edge switch with n servers under it; the smallest viable substrate."""
    switches = {"e0": Switch("e0", "edge", ResourceVector(switch_memory=switch_mem))}
    servers = {}
    links = {}
    for i in range(n_servers):
        sid = f"s{i}"
        servers[sid] = Server(sid, ResourceVector(cpu_cores=cores, memory_mb=mem))
        links[f"l{i}"] = Link(f"l{i}", "e0", sid, link_bw, 1)
    return SubstrateNetwork(servers=servers, switches=switches, links=links, k_arity=0)


def star_request(
    rid,
    n_vms=1,
    cores=1,
    mem=256,
    vswitch_mem=10,
    vlink_bw=10,
    arrival=0.0,
    duration=10.0,
    latency_bound=None,
    locality=None,
):
    """One edge vSwitch with n VMs hanging off it."""
    vms = {f"vm{i}": Vm(f"vm{i}", ResourceVector(cpu_cores=cores, memory_mb=mem)) for i in range(n_vms)}
    vswitches = {"vs0": VSwitch("vs0", True, ResourceVector(switch_memory=vswitch_mem))}
    vlinks = {
        f"vl{i}": VLink(f"vl{i}", "vs0", f"vm{i}", vlink_bw) for i in range(n_vms)
    }
    return VdcRequest(
        id=rid,
        vms=vms,
        vswitches=vswitches,
        vlinks=vlinks,
        arrival_time=arrival,
        duration=duration,
        latency_bound=latency_bound,
        locality=locality,
    )


def chain_request(rid, n_vswitches=2, vms_per_switch=1, cores=1, mem=256,
                  vswitch_mem=10, vlink_bw=10, arrival=0.0, duration=10.0,
                  latency_bound=None, locality=None):
    """A path of vSwitches; the two endpoint vSwitches are edge and carry VMs."""
    assert n_vswitches >= 2
    vswitches = {}
    vlinks = {}
    vms = {}
    for i in range(n_vswitches):
        is_edge = i in (0, n_vswitches - 1)
        vswitches[f"vs{i}"] = VSwitch(f"vs{i}", is_edge, ResourceVector(switch_memory=vswitch_mem))
    ln = 0
    for i in range(n_vswitches - 1):
        vlinks[f"vl{ln}"] = VLink(f"vl{ln}", f"vs{i}", f"vs{i + 1}", vlink_bw)
        ln += 1
    vm_no = 0
    for vs in ("vs0", f"vs{n_vswitches - 1}"):
        for _ in range(vms_per_switch):
            vid = f"vm{vm_no}"
            vms[vid] = Vm(vid, ResourceVector(cpu_cores=cores, memory_mb=mem))
            vlinks[f"vl{ln}"] = VLink(f"vl{ln}", vs, vid, vlink_bw)
            ln += 1
            vm_no += 1
    return VdcRequest(
        id=rid,
        vms=vms,
        vswitches=vswitches,
        vlinks=vlinks,
        arrival_time=arrival,
        duration=duration,
        latency_bound=latency_bound,
        locality=locality,
    )


@pytest.fixture(scope="session")
def k2_net():
    return build_fat_tree(2)


@pytest.fixture(scope="session")
def k2_table(k2_net):
    return enumerate_paths(k2_net)


@pytest.fixture(scope="session")
def k4_net():
    return build_fat_tree(4)


@pytest.fixture(scope="session")
def k4_table(k4_net):
    return enumerate_paths(k4_net)


@pytest.fixture
def k2_state(k2_net, k2_table):
    return EmbeddingState(k2_net, k2_table)


@pytest.fixture
def k4_state(k4_net, k4_table):
    return EmbeddingState(k4_net, k4_table)
