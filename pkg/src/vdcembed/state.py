"""Authoritative embedding state: mappings, residual tracking, feasibility checks."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    AuditError,
    CommitRejectedError,
    FormatError,
    InvalidParameterError,
    PathLookupError,
    UnknownElementError,
)
from .paths import PathTable
from .topology import (
    ResourceVector,
    SubstrateNetwork,
    VdcRequest,
    dump_requests,
    dump_substrate,
    load_requests,
    load_substrate,
    sum_vectors,
)

MODE_STRICT = "strict"
MODE_ALLOW_CAPACITY = "allow-capacity-violations"


@dataclass(frozen=True)
class Violation:
    """One broken rule; capacity breaches carry the overflow amount."""

    rule: str
    element: str
    structural: bool
    overflow: ResourceVector = ResourceVector()
    detail: str = ""

    def __str__(self):
        extra = f" over={self.overflow}" if not self.structural else ""
        note = f" ({self.detail})" if self.detail else ""
        return f"[{self.rule}] {self.element}{extra}{note}"


@dataclass(frozen=True)
class Assignment:
    """Where one request's elements live on the substrate.

    vlink_map values are (node_a_image, node_b_image, path_index) keys into
    the path table; switch-VM links use the single-edge adjacency entry.
    """

    request_id: str
    vm_map: dict[str, str]
    vswitch_map: dict[str, str]
    vlink_map: dict[str, tuple[str, str, int]]

    def host_of(self, element_id: str) -> str | None:
        if element_id in self.vm_map:
            return self.vm_map[element_id]
        return self.vswitch_map.get(element_id)


@dataclass(frozen=True)
class AggregateResiduals:
    """Substrate-wide free capacity: (servers, switch memory, bandwidth)."""

    servers: ResourceVector
    switch_memory: int
    bandwidth: int


class EmbeddingState:
    """Single-writer record of all active assignments plus residual resources."""

    def __init__(self, net: SubstrateNetwork, table: PathTable):
        self.net = net
        self.table = table
        self.active: dict[str, Assignment] = {}
        self.requests: dict[str, VdcRequest] = {}
        self.residual_servers: dict[str, ResourceVector] = {
            s.id: s.capacity for s in net.servers.values()
        }
        self.residual_switches: dict[str, int] = {
            s.id: s.capacity.switch_memory for s in net.switches.values()
        }
        self.residual_links: dict[str, int] = {l.id: l.bandwidth for l in net.links.values()}
        self.down: set[str] = set()
        self.version = 0

    # -- usage accounting ---------------------------------------------------

    def _usage_of(self, req: VdcRequest, a: Assignment):
        """Per-element loads one assignment adds: (servers, switches, links)."""
        srv: dict[str, ResourceVector] = {}
        sw: dict[str, int] = {}
        ln: dict[str, int] = {}
        for vm_id, pm in a.vm_map.items():
            srv[pm] = srv.get(pm, ResourceVector()) + req.vms[vm_id].demand
        for vs_id, ps in a.vswitch_map.items():
            sw[ps] = sw.get(ps, 0) + req.vswitches[vs_id].demand.switch_memory
        for vl_id, (pa, pb, n) in a.vlink_map.items():
            recs = self.table.get(pa, pb)
            if not 0 <= n < len(recs):
                continue  # reported as unknown-path by check_assignment
            bw = req.vlinks[vl_id].bandwidth
            for eid in recs[n].edges:
                ln[eid] = ln.get(eid, 0) + bw
        return srv, sw, ln

    def residual_vectors(self) -> AggregateResiduals:
        """Componentwise sums of per-element residuals (down elements excluded)."""
        servers = sum_vectors(
            rv for sid, rv in self.residual_servers.items() if sid not in self.down
        )
        switch_mem = sum(v for sid, v in self.residual_switches.items() if sid not in self.down)
        bw = sum(v for lid, v in self.residual_links.items() if lid not in self.down)
        return AggregateResiduals(servers, switch_mem, bw)

    # -- feasibility --------------------------------------------------------

    def check_assignment(
        self, req: VdcRequest, a: Assignment, mode: str = MODE_STRICT
    ) -> list[Violation]:
        """Check one proposed assignment against this state.

        Structural breaches are hard findings in both modes. Capacity breaches
        are reported with quantified overflow amounts; in strict mode any
        finding blocks a commit, in allow-capacity-violations mode the caller
        may carry capacity findings forward as a violation ledger.
        """
        if mode not in (MODE_STRICT, MODE_ALLOW_CAPACITY):
            raise InvalidParameterError(f"unknown check mode {mode!r}")
        out: list[Violation] = []

        for vm_id, pm in a.vm_map.items():
            if vm_id not in req.vms:
                raise UnknownElementError(f"vm {vm_id} not in request {req.id}")
            if pm not in self.net.servers:
                raise UnknownElementError(f"server {pm} not in substrate")
        for vs_id, ps in a.vswitch_map.items():
            if vs_id not in req.vswitches:
                raise UnknownElementError(f"vswitch {vs_id} not in request {req.id}")
            if ps not in self.net.switches:
                raise UnknownElementError(f"switch {ps} not in substrate")
        for vl_id in a.vlink_map:
            if vl_id not in req.vlinks:
                raise UnknownElementError(f"vlink {vl_id} not in request {req.id}")

        for vm_id in req.vms:
            if vm_id not in a.vm_map:
                out.append(Violation("unmapped-element", vm_id, True))
        for vs_id in req.vswitches:
            if vs_id not in a.vswitch_map:
                out.append(Violation("unmapped-element", vs_id, True))
        for vl_id in req.vlinks:
            if vl_id not in a.vlink_map:
                out.append(Violation("unmapped-element", vl_id, True))

        used_switches: dict[str, str] = {}
        for vs_id, ps in a.vswitch_map.items():
            if ps in used_switches:
                out.append(
                    Violation(
                        "vswitch-collision",
                        ps,
                        True,
                        detail=f"{used_switches[ps]} and {vs_id}",
                    )
                )
            used_switches[ps] = vs_id
            vs = req.vswitches[vs_id]
            if vs.is_edge and self.net.switches[ps].tier != "edge":
                out.append(Violation("edge-tier", vs_id, True, detail=f"on {ps}"))

        down_links: set[str] = set()
        for vl_id, (pa, pb, n) in a.vlink_map.items():
            vl = req.vlinks[vl_id]
            img_a = a.host_of(vl.a)
            img_b = a.host_of(vl.b)
            try:
                rec = self.table.path(pa, pb, n)
            except PathLookupError:
                out.append(Violation("unknown-path", vl_id, True, detail=f"({pa},{pb},{n})"))
                continue
            down_links.update(eid for eid in rec.edges if eid in self.down)
            if (img_a, img_b) != (pa, pb):
                out.append(
                    Violation(
                        "endpoint-mismatch",
                        vl_id,
                        True,
                        detail=f"path ({pa},{pb}) vs images ({img_a},{img_b})",
                    )
                )
            if req.latency_bound is not None and rec.delay > req.latency_bound:
                out.append(
                    Violation(
                        "latency-bound",
                        vl_id,
                        True,
                        detail=f"delay {rec.delay} > {req.latency_bound}",
                    )
                )

        if req.locality:
            for vm_id, allowed in req.locality.items():
                pm = a.vm_map.get(vm_id)
                if pm is not None and pm not in allowed:
                    out.append(Violation("locality", vm_id, True, detail=f"on {pm}"))

        for element in list(a.vm_map.values()) + list(a.vswitch_map.values()):
            if element in self.down:
                out.append(Violation("element-down", element, True))
        for lid in sorted(down_links):
            out.append(Violation("element-down", lid, True))

        srv, sw, ln = self._usage_of(req, a)
        for pm, load in srv.items():
            limit = self.residual_servers[pm] if pm not in self.down else ResourceVector()
            over = load.overflow_over(limit)
            if not over.is_zero:
                out.append(Violation("server-capacity", pm, False, overflow=over))
        for ps, load in sw.items():
            limit = self.residual_switches[ps] if ps not in self.down else 0
            if load > limit:
                out.append(
                    Violation(
                        "switch-capacity",
                        ps,
                        False,
                        overflow=ResourceVector(switch_memory=load - limit),
                    )
                )
        for lid, load in ln.items():
            limit = self.residual_links[lid] if lid not in self.down else 0
            if load > limit:
                out.append(
                    Violation(
                        "link-capacity",
                        lid,
                        False,
                        overflow=ResourceVector(bandwidth=load - limit),
                    )
                )
        return out

    # -- mutation -------------------------------------------------------------

    def commit(self, req: VdcRequest, a: Assignment):
        """Admit an assignment; strict violations reject it and leave state unchanged."""
        violations = self.check_assignment(req, a, MODE_STRICT)
        if violations:
            raise CommitRejectedError(violations)
        srv, sw, ln = self._usage_of(req, a)
        for pm, load in srv.items():
            self.residual_servers[pm] = self.residual_servers[pm] - load
        for ps, load in sw.items():
            self.residual_switches[ps] -= load
        for lid, load in ln.items():
            self.residual_links[lid] -= load
        self.active[req.id] = a
        self.requests[req.id] = req
        self.version += 1

    def release(self, request_id: str):
        """Drop an active request and credit its resources back."""
        if request_id not in self.active:
            raise UnknownElementError(f"request {request_id} is not active")
        a = self.active.pop(request_id)
        req = self.requests.pop(request_id)
        srv, sw, ln = self._usage_of(req, a)
        for pm, load in srv.items():
            self.residual_servers[pm] = self.residual_servers[pm] + load
        for ps, load in sw.items():
            self.residual_switches[ps] += load
        for lid, load in ln.items():
            self.residual_links[lid] += load
        self.version += 1
        return a

    def mark_down(self, element_ids) -> None:
        """Strip failed elements from the usable substrate."""
        for eid in element_ids:
            if not (self.net.has_node(eid) or eid in self.net.links):
                raise UnknownElementError(f"unknown substrate element {eid}")
            self.down.add(eid)
        self.version += 1

    # -- consistency --------------------------------------------------------

    def _residuals_from_scratch(self):
        srv = {s.id: s.capacity for s in self.net.servers.values()}
        sw = {s.id: s.capacity.switch_memory for s in self.net.switches.values()}
        ln = {l.id: l.bandwidth for l in self.net.links.values()}
        for rid, a in self.active.items():
            u_srv, u_sw, u_ln = self._usage_of(self.requests[rid], a)
            for pm, load in u_srv.items():
                srv[pm] = srv[pm] - load
            for ps, load in u_sw.items():
                sw[ps] -= load
            for lid, load in u_ln.items():
                ln[lid] -= load
        return srv, sw, ln

    def audit(self):
        """Re-derive residuals from scratch and re-check every active assignment.

        Raises AuditError on any mismatch or violation; used by simulation
        self-checks and tests.
        """
        srv, sw, ln = self._residuals_from_scratch()
        if srv != self.residual_servers:
            raise AuditError("server residuals drifted from fold-from-scratch values")
        if sw != self.residual_switches:
            raise AuditError("switch residuals drifted from fold-from-scratch values")
        if ln != self.residual_links:
            raise AuditError("link residuals drifted from fold-from-scratch values")
        for rv in srv.values():
            if not rv.nonnegative:
                raise AuditError(f"negative server residual: {rv}")
        if min(sw.values(), default=0) < 0 or min(ln.values(), default=0) < 0:
            raise AuditError("negative switch/link residual")
        for rid, a in self.active.items():
            probe = EmbeddingState(self.net, self.table)
            probe.down = set(self.down)
            for other_id, other in self.active.items():
                if other_id != rid:
                    probe.commit(self.requests[other_id], other)
            bad = probe.check_assignment(self.requests[rid], a, MODE_STRICT)
            if bad:
                raise AuditError(f"active request {rid} fails re-check: {bad[0]}")

    def snapshot_version(self) -> int:
        return self.version


def write_snapshot(state: EmbeddingState) -> str:
    """Dump substrate, active requests, and assign records as one text blob."""
    parts = ["snapshot 1", dump_substrate(state.net).rstrip("\n")]
    parts.append(dump_requests(state.requests.values()).rstrip("\n"))
    for rid in state.active:
        a = state.active[rid]
        for vm_id, pm in a.vm_map.items():
            parts.append(f"assign vm {rid} {vm_id} {pm}")
        for vs_id, ps in a.vswitch_map.items():
            parts.append(f"assign vswitch {rid} {vs_id} {ps}")
        for vl_id, (pa, pb, n) in a.vlink_map.items():
            parts.append(f"assign vlink {rid} {vl_id} {pa} {pb} {n}")
    for eid in sorted(state.down):
        parts.append(f"down {eid}")
    return "\n".join(parts) + "\n"


def read_snapshot(text: str, table_factory) -> EmbeddingState:
    """Rebuild a state from a snapshot dump.

    table_factory(net) supplies the path table (it is derived data, not
    serialized). Assignments are re-committed, so a corrupt snapshot fails
    loudly instead of silently desynchronizing residuals.
    """
    lines = text.splitlines()
    if not lines or lines[0].split() != ["snapshot", "1"]:
        raise FormatError("bad snapshot header")
    sub_lines, req_lines, assign_lines, down_lines = [], [], [], []
    for raw in lines[1:]:
        if not raw.strip():
            continue
        kind = raw.split(None, 1)[0]
        if kind in ("substrate", "server", "switch", "link"):
            sub_lines.append(raw)
        elif kind in ("requests", "request", "vm", "vswitch", "vlink", "meta"):
            req_lines.append(raw)
        elif kind == "assign":
            assign_lines.append(raw)
        elif kind == "down":
            down_lines.append(raw)
        else:
            raise FormatError(f"unknown snapshot record: {raw!r}")

    net = load_substrate("\n".join(sub_lines))
    requests = load_requests("\n".join(req_lines)) if len(req_lines) > 1 else []
    state = EmbeddingState(net, table_factory(net))

    by_request: dict[str, dict[str, dict]] = {}
    for raw in assign_lines:
        parts = raw.split()
        kind, rid = parts[1], parts[2]
        slot = by_request.setdefault(rid, {"vm": {}, "vswitch": {}, "vlink": {}})
        if kind == "vm":
            slot["vm"][parts[3]] = parts[4]
        elif kind == "vswitch":
            slot["vswitch"][parts[3]] = parts[4]
        elif kind == "vlink":
            slot["vlink"][parts[3]] = (parts[4], parts[5], int(parts[6]))
        else:
            raise FormatError(f"bad assign record: {raw!r}")

    req_by_id = {r.id: r for r in requests}
    for rid, slot in by_request.items():
        if rid not in req_by_id:
            raise FormatError(f"assign records for unknown request {rid}")
        state.commit(
            req_by_id[rid],
            Assignment(rid, slot["vm"], slot["vswitch"], slot["vlink"]),
        )
    if down_lines:
        state.mark_down(raw.split()[1] for raw in down_lines)
    state.version = 0
    return state
