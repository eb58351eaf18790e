"""Online embedding: greedy placement that may overflow, then bounded swap repair.

The greedy stage places elements in the order VMs, switches, links. VM groups
(the VMs under one edge vSwitch) must land inside a single rack because a
switch-VM virtual link always maps onto the one physical edge between a server
and its edge switch, so the greedy unit for VMs is the rack choice per group.
Capacity overflows are allowed and recorded; the repair stage then relocates
already-mapped elements away from the overflowing hosts, a bounded number of
times, preferring the cheapest sufficient incumbent and the nearest target.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import CommitRejectedError
from .state import Assignment, EmbeddingState, MODE_ALLOW_CAPACITY, Violation
from .topology import ResourceVector, VdcRequest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TempMapping:
    """A structurally valid but possibly overflowing placement of one request."""

    assignment: Assignment
    ledger: tuple[Violation, ...]
    swap_budget: int

    @property
    def clean(self) -> bool:
        return not self.ledger


@dataclass(frozen=True)
class SwapMove:
    """One relocation of an already-mapped element to make room for another."""

    kind: str  # vm-swap | vswitch-swap | vlink-reroute
    moved_request: str
    moved_element: str
    old_host: str
    new_host: str
    displaced_by: str  # request id whose placement needed the room


@dataclass(frozen=True)
class StructuralFailure:
    reason: str


@dataclass(frozen=True)
class RepairFailure:
    reason: str
    remaining_violation: float


@dataclass(frozen=True)
class OnlineResult:
    assignment: Assignment
    moves: tuple[SwapMove, ...]
    incumbent_updates: dict[str, Assignment]

    @property
    def migrations(self) -> list[SwapMove]:
        return [m for m in self.moves if m.kind in ("vm-swap", "vswitch-swap")]


def _norm(load: ResourceVector, cap: ResourceVector) -> float:
    """Scalar size of a load relative to a capacity, for deterministic ranking."""
    total = 0.0
    if cap.cpu_cores:
        total += load.cpu_cores / cap.cpu_cores
    if cap.memory_mb:
        total += load.memory_mb / cap.memory_mb
    if cap.switch_memory:
        total += load.switch_memory / cap.switch_memory
    if cap.bandwidth:
        total += load.bandwidth / cap.bandwidth
    return total


def _violation_total(state: EmbeddingState, ledger) -> float:
    total = 0.0
    for v in ledger:
        if v.element in state.net.servers:
            cap = state.net.servers[v.element].capacity
        elif v.element in state.net.switches:
            cap = state.net.switches[v.element].capacity
        else:
            cap = ResourceVector(bandwidth=state.net.links[v.element].bandwidth)
        total += _norm(v.overflow, cap)
    return total


def compute_fragments(state: EmbeddingState):
    """Connected components of the substrate restricted to elements with
    strictly positive residual on every capacity dimension they carry.

    Returns a list of (node id set, link id set, residual triple) ordered by
    descending free capacity then smallest member id.
    """
    net = state.net
    alive_nodes = set()
    for sid, rv in state.residual_servers.items():
        if sid not in state.down and rv.cpu_cores > 0 and rv.memory_mb > 0:
            alive_nodes.add(sid)
    for sid, mem in state.residual_switches.items():
        if sid not in state.down and mem > 0:
            alive_nodes.add(sid)
    alive_links = {
        lid
        for lid, bw in state.residual_links.items()
        if bw > 0
        and lid not in state.down
        and net.links[lid].a in alive_nodes
        and net.links[lid].b in alive_nodes
    }
    seen: set[str] = set()
    fragments = []
    for start in sorted(alive_nodes):
        if start in seen:
            continue
        nodes = {start}
        links = set()
        frontier = [start]
        seen.add(start)
        while frontier:
            cur = frontier.pop()
            for nxt, lid in net.adjacency[cur]:
                if lid not in alive_links:
                    continue
                links.add(lid)
                if nxt not in seen:
                    seen.add(nxt)
                    nodes.add(nxt)
                    frontier.append(nxt)
        servers = ResourceVector()
        switch_mem = 0
        for nid in nodes:
            if nid in net.servers:
                servers = servers + state.residual_servers[nid]
            else:
                switch_mem += state.residual_switches[nid]
        bw = sum(state.residual_links[lid] for lid in links)
        fragments.append((nodes, links, (servers, switch_mem, bw)))
    fragments.sort(
        key=lambda f: (
            -f[2][0].cpu_cores,
            -f[2][0].memory_mb,
            -f[2][2],
            -f[2][1],
            min(f[0]),
        )
    )
    return fragments


def _vm_groups(req: VdcRequest) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for vm_id in req.vms:
        groups.setdefault(req.vm_parent(vm_id), []).append(vm_id)
    return groups


def _vm_link_of(req: VdcRequest, vm_id: str):
    for vl in req.vlinks.values():
        if vm_id in (vl.a, vl.b):
            return vl
    return None


def greedy_temp_map(
    state: EmbeddingState, req: VdcRequest, allowed: tuple[set, set] | None = None
) -> TempMapping | StructuralFailure:
    """Place every element of a request, tolerating capacity overflows.

    allowed optionally restricts placement to a (node ids, link ids) fragment.
    Deterministic: all choices resolve ties by element id.
    """
    net = state.net
    table = state.table
    allowed_nodes, allowed_links = allowed if allowed else (None, None)

    def node_ok(nid):
        if nid in state.down:
            return False
        return allowed_nodes is None or nid in allowed_nodes

    def link_ok(lid):
        if lid in state.down:
            return False
        return allowed_links is None or lid in allowed_links

    groups = _vm_groups(req)
    group_order = sorted(
        groups,
        key=lambda g: (
            not any(req.locality and vm in req.locality for vm in groups[g]),
            -sum(req.vms[v].demand.cpu_cores for v in groups[g]),
            -sum(req.vms[v].demand.memory_mb for v in groups[g]),
            g,
        ),
    )
    edge_switches = sorted(
        s for s in net.switches if net.switches[s].tier == "edge" and node_ok(s)
    )

    vm_map: dict[str, str] = {}
    vswitch_map: dict[str, str] = {}
    used_switches: set[str] = set()
    extra_server_load: dict[str, ResourceVector] = {}
    extra_link_load: dict[str, int] = {}

    def server_score(sid):
        free = state.residual_servers[sid] - extra_server_load.get(sid, ResourceVector())
        cap = net.servers[sid].capacity
        return _norm(free, cap)

    def place_group(vm_ids, rack_switch, commit):
        """Greedy in-rack placement; returns overflow scalar or None if impossible."""
        servers = [s for s in sorted(net.servers_under(rack_switch)) if node_ok(s)]
        if not servers:
            return None
        local_load: dict[str, ResourceVector] = {}
        local_link: dict[str, int] = {}
        placement = {}
        total_overflow = 0.0
        order = sorted(
            vm_ids,
            key=lambda v: (-req.vms[v].demand.cpu_cores, -req.vms[v].demand.memory_mb, v),
        )
        for vm_id in order:
            demand = req.vms[vm_id].demand
            pool = servers
            if req.locality and vm_id in req.locality:
                pool = [s for s in servers if s in req.locality[vm_id]]
                if not pool:
                    return None
            vlink = _vm_link_of(req, vm_id)
            best = None
            for sid in pool:
                base_free = state.residual_servers[sid] - extra_server_load.get(
                    sid, ResourceVector()
                )
                free = base_free - local_load.get(sid, ResourceVector())
                over = demand.overflow_over(free)
                score = _norm(over, net.servers[sid].capacity)
                lid = net.link_between(rack_switch, sid)
                if vlink is not None and lid is not None:
                    link_free = (
                        state.residual_links[lid]
                        - extra_link_load.get(lid, 0)
                        - local_link.get(lid, 0)
                    )
                    bw_over = max(0, vlink.bandwidth - link_free)
                    score += bw_over / net.links[lid].bandwidth
                free_after = free - demand
                key = (score, -_norm(free_after, net.servers[sid].capacity), sid)
                if best is None or key < best[0]:
                    best = (key, sid, lid)
            key, sid, lid = best
            placement[vm_id] = sid
            local_load[sid] = local_load.get(sid, ResourceVector()) + demand
            if vlink is not None and lid is not None:
                local_link[lid] = local_link.get(lid, 0) + vlink.bandwidth
            total_overflow += key[0]
        if commit:
            for vm_id, sid in placement.items():
                vm_map[vm_id] = sid
            for sid, load in local_load.items():
                extra_server_load[sid] = (
                    extra_server_load.get(sid, ResourceVector()) + load
                )
            for lid, bw in local_link.items():
                extra_link_load[lid] = extra_link_load.get(lid, 0) + bw
        return total_overflow

    for vs_id in group_order:
        candidates = [s for s in edge_switches if s not in used_switches]
        scored = []
        for rack in candidates:
            overflow = place_group(groups[vs_id], rack, commit=False)
            if overflow is None:
                continue
            rack_free = sum(server_score(s) for s in net.servers_under(rack) if node_ok(s))
            mem_free = state.residual_switches[rack]
            vs_demand = req.vswitches[vs_id].demand.switch_memory
            mem_over = max(0, vs_demand - mem_free) / net.switches[rack].capacity.switch_memory
            scored.append((overflow + mem_over, -rack_free, rack))
        if not scored:
            return StructuralFailure(f"no rack can host vm group of {vs_id}")
        scored.sort()
        rack = scored[0][2]
        place_group(groups[vs_id], rack, commit=True)
        vswitch_map[vs_id] = rack
        used_switches.add(rack)

    # edge vswitches without VMs still need an edge-tier home
    for vs_id in sorted(req.vswitches):
        vs = req.vswitches[vs_id]
        if vs.is_edge and vs_id not in vswitch_map:
            candidates = [s for s in edge_switches if s not in used_switches]
            if not candidates:
                return StructuralFailure(f"no edge switch left for {vs_id}")
            best = min(
                candidates,
                key=lambda s: (
                    max(0, vs.demand.switch_memory - state.residual_switches[s]),
                    s,
                ),
            )
            vswitch_map[vs_id] = best
            used_switches.add(best)

    neighbor_map: dict[str, list[str]] = {vs: [] for vs in req.vswitches}
    for vl in req.vlinks.values():
        if vl.a in req.vswitches and vl.b in req.vswitches:
            neighbor_map[vl.a].append(vl.b)
            neighbor_map[vl.b].append(vl.a)

    for vs_id in sorted(req.vswitches):
        if vs_id in vswitch_map:
            continue
        vs = req.vswitches[vs_id]
        candidates = [
            s for s in sorted(net.switches) if node_ok(s) and s not in used_switches
        ]
        if not candidates:
            return StructuralFailure(f"no switch left for {vs_id}")
        scored = []
        for sid in candidates:
            mem_free = state.residual_switches[sid]
            over = max(0, vs.demand.switch_memory - mem_free)
            over_norm = over / net.switches[sid].capacity.switch_memory
            hop_sum = sum(
                net.hop_distance(sid, vswitch_map[nb])
                for nb in neighbor_map[vs_id]
                if nb in vswitch_map
            )
            scored.append((over_norm, hop_sum, sid))
        scored.sort()
        vswitch_map[vs_id] = scored[0][2]
        used_switches.add(scored[0][2])

    vlink_map: dict[str, tuple[str, str, int]] = {}
    path_load: dict[str, int] = dict(extra_link_load)
    for vl_id in sorted(req.vlinks):
        vl = req.vlinks[vl_id]
        img_a = vm_map.get(vl.a) or vswitch_map.get(vl.a)
        img_b = vm_map.get(vl.b) or vswitch_map.get(vl.b)
        recs = table.get(img_a, img_b)
        is_vm_link = vl.a in req.vms or vl.b in req.vms
        best = None
        for n, rec in enumerate(recs):
            if is_vm_link and len(rec.edges) != 1:
                continue
            if req.latency_bound is not None and rec.delay > req.latency_bound:
                continue
            if any(not link_ok(e) for e in rec.edges):
                continue
            if any(node in state.down for node in rec.nodes):
                continue
            over = 0.0
            for eid in rec.edges:
                free = state.residual_links[eid] - path_load.get(eid, 0)
                over += max(0, vl.bandwidth - free) / net.links[eid].bandwidth
            key = (over, n)
            if best is None or key < best[0]:
                best = (key, n, rec)
        if best is None:
            return StructuralFailure(f"no admissible path for {vl_id} ({img_a}->{img_b})")
        _, n, rec = best
        vlink_map[vl_id] = (img_a, img_b, n)
        for eid in rec.edges:
            path_load[eid] = path_load.get(eid, 0) + vl.bandwidth

    assignment = Assignment(req.id, vm_map, vswitch_map, vlink_map)
    findings = state.check_assignment(req, assignment, MODE_ALLOW_CAPACITY)
    structural = [v for v in findings if v.structural]
    if structural:
        return StructuralFailure(f"unexpected structural finding: {structural[0]}")
    ledger = tuple(v for v in findings if not v.structural)
    return TempMapping(assignment, ledger, swap_budget=len(ledger))


def _clone_state(state: EmbeddingState) -> EmbeddingState:
    clone = EmbeddingState.__new__(EmbeddingState)
    clone.net = state.net
    clone.table = state.table
    clone.active = dict(state.active)
    clone.requests = dict(state.requests)
    clone.residual_servers = dict(state.residual_servers)
    clone.residual_switches = dict(state.residual_switches)
    clone.residual_links = dict(state.residual_links)
    clone.down = set(state.down)
    clone.version = state.version
    return clone


def _reroute_vlink(probe, rid, vl_id, avoid_link, extra_load):
    """A replacement path for one committed vlink that skips a congested link.

    Returns the new (a, b, n) key or None. extra_load maps link id -> planned
    additional bandwidth (the incoming request's tentative usage).
    """
    req = probe.requests[rid]
    a = probe.active[rid]
    vl = req.vlinks[vl_id]
    pa, pb, old_n = a.vlink_map[vl_id]
    recs = probe.table.get(pa, pb)
    old_edges = set(recs[old_n].edges)
    for n, rec in enumerate(recs):
        if n == old_n or avoid_link in rec.edges:
            continue
        if req.latency_bound is not None and rec.delay > req.latency_bound:
            continue
        ok = True
        for eid in rec.edges:
            credit = vl.bandwidth if eid in old_edges else 0
            free = probe.residual_links[eid] + credit - extra_load.get(eid, 0)
            if eid in probe.down or free < vl.bandwidth:
                ok = False
                break
        if ok:
            return (pa, pb, n)
    return None


def _relocate_vm(probe, rid, vm_id, forbidden_server, extra_srv, extra_lnk):
    """A rack-local replacement server for one committed VM, nearest first.

    The parent vSwitch stays put, so only servers under the same edge switch
    qualify. extra_* carry the incoming request's tentative loads.
    """
    req = probe.requests[rid]
    a = probe.active[rid]
    old_server = a.vm_map[vm_id]
    rack = probe.net.edge_switch_of(old_server)
    demand = req.vms[vm_id].demand
    vlink = _vm_link_of(req, vm_id)
    options = []
    for sid in sorted(probe.net.servers_under(rack)):
        if sid in (forbidden_server, old_server) or sid in probe.down:
            continue
        if req.locality and vm_id in req.locality and sid not in req.locality[vm_id]:
            continue
        free = probe.residual_servers[sid] - extra_srv.get(sid, ResourceVector())
        if not demand.le(free):
            continue
        lid = probe.net.link_between(rack, sid)
        if vlink is not None and lid is not None:
            link_free = probe.residual_links[lid] - extra_lnk.get(lid, 0)
            if vlink.bandwidth > link_free or lid in probe.down:
                continue
        options.append((probe.net.hop_distance(old_server, sid), sid, lid))
    if not options:
        return None
    options.sort()
    _, sid, lid = options[0]
    new_vm_map = dict(a.vm_map)
    new_vm_map[vm_id] = sid
    new_vlink_map = dict(a.vlink_map)
    if vlink is not None:
        pa, pb, _ = a.vlink_map[vlink.id]
        new_pa = sid if pa == old_server else pa
        new_pb = sid if pb == old_server else pb
        new_vlink_map[vlink.id] = (new_pa, new_pb, 0)
    return Assignment(rid, new_vm_map, a.vswitch_map, new_vlink_map), sid


def swap_repair(
    state: EmbeddingState, req: VdcRequest, temp: TempMapping, max_swaps: int
):
    """Clear a temp mapping's capacity overflows by relocating incumbents.

    Works on a scratch copy; on success returns (assignment, moves,
    incumbent_updates) that are jointly strictly feasible against the input
    state. On failure the input state is untouched and the best remaining
    violation total is reported.
    """
    probe = _clone_state(state)
    assignment_box = [temp.assignment]
    moves: list[SwapMove] = []
    incumbent_updates: dict[str, Assignment] = {}
    best_remaining = _violation_total(state, temp.ledger)

    for _ in range(max(max_swaps, 0) + 1):
        assignment = assignment_box[0]
        findings = [
            v
            for v in probe.check_assignment(req, assignment, MODE_ALLOW_CAPACITY)
            if not v.structural
        ]
        remaining = _violation_total(probe, findings)
        best_remaining = min(best_remaining, remaining)
        if not findings:
            try:
                probe.commit(req, assignment)
            except CommitRejectedError as err:
                return RepairFailure(f"final feasibility check failed: {err}", remaining)
            return OnlineResult(assignment, tuple(moves), incumbent_updates)
        if len(moves) >= max_swaps:
            return RepairFailure("swap budget exhausted", best_remaining)

        srv_extra, sw_extra, ln_extra = probe._usage_of(req, assignment)
        findings.sort(key=lambda v: (_violation_total(probe, [v]), v.element))
        progressed = False
        for violation in findings:
            host = violation.element
            need = violation.overflow
            if host in probe.net.servers:
                move = _repair_server(
                    probe, req, host, need, srv_extra, ln_extra, moves, incumbent_updates
                )
            elif host in probe.net.switches:
                move = _repair_switch(
                    probe, req, host, need, sw_extra, ln_extra, moves, incumbent_updates
                )
            else:
                move = _repair_link(
                    probe, req, assignment_box, host, need, ln_extra, moves, incumbent_updates
                )
            if move:
                progressed = True
                break
        if not progressed:
            return RepairFailure("no incumbent relocation clears the overflow", best_remaining)
    return RepairFailure("swap budget exhausted", best_remaining)


def _incumbents_on(probe, kind, host, exclude_request):
    out = []
    for rid, a in probe.active.items():
        if rid == exclude_request:
            continue
        mapping = a.vm_map if kind == "vm" else a.vswitch_map
        for elem, where in mapping.items():
            if where == host:
                out.append((rid, elem))
    return out


def _swap_in(probe, rid, new_assignment) -> bool:
    """Replace one incumbent's assignment on the probe; restore on rejection."""
    req_obj = probe.requests[rid]
    old = probe.release(rid)
    try:
        probe.commit(req_obj, new_assignment)
        return True
    except CommitRejectedError:
        probe.commit(req_obj, old)
        return False


def _repair_server(probe, req, host, need, srv_extra, ln_extra, moves, incumbent_updates):
    """Move the cheapest sufficient incumbent VM off an overflowing server."""
    candidates = []
    for rid, vm_id in _incumbents_on(probe, "vm", host, req.id):
        demand = probe.requests[rid].vms[vm_id].demand
        covers = demand.cpu_cores >= need.cpu_cores and demand.memory_mb >= need.memory_mb
        size = _norm(demand, probe.net.servers[host].capacity)
        # cheapest sufficient incumbent first; else the largest partial relief
        candidates.append((not covers, size if covers else -size, rid, vm_id))
    candidates.sort()
    for _, _, rid, vm_id in candidates:
        relocated = _relocate_vm(probe, rid, vm_id, host, srv_extra, ln_extra)
        if relocated is None:
            continue
        new_assignment, target = relocated
        if not _swap_in(probe, rid, new_assignment):
            continue
        moves.append(SwapMove("vm-swap", rid, vm_id, host, target, req.id))
        incumbent_updates[rid] = new_assignment
        logger.debug("swap: vm %s/%s %s -> %s", rid, vm_id, host, target)
        return True
    return False


def _repair_switch(probe, req, host, need, sw_extra, ln_extra, moves, incumbent_updates):
    """Move the cheapest sufficient incumbent vSwitch off an overflowing switch."""
    candidates = []
    for rid, vs_id in _incumbents_on(probe, "vswitch", host, req.id):
        vs = probe.requests[rid].vswitches[vs_id]
        covers = vs.demand.switch_memory >= need.switch_memory
        candidates.append((not covers, vs.demand.switch_memory, rid, vs_id))
    candidates.sort()
    for _, _, rid, vs_id in candidates:
        new_assignment, target = _relocate_vswitch(probe, rid, vs_id, host, sw_extra, ln_extra)
        if new_assignment is None or not _swap_in(probe, rid, new_assignment):
            continue
        moves.append(SwapMove("vswitch-swap", rid, vs_id, host, target, req.id))
        incumbent_updates[rid] = new_assignment
        logger.debug("swap: vswitch %s/%s %s -> %s", rid, vs_id, host, target)
        return True
    return False


def _relocate_vswitch(probe, rid, vs_id, forbidden, sw_extra, ln_extra):
    """New home for an internal incumbent vSwitch, nearest first; edge
    vSwitch moves would drag their whole VM group along and are not attempted."""
    inc_req = probe.requests[rid]
    a = probe.active[rid]
    vs = inc_req.vswitches[vs_id]
    if vs.is_edge:
        return None, None
    old_host = a.vswitch_map[vs_id]
    used = set(a.vswitch_map.values())
    options = []
    for sid in sorted(probe.net.switches):
        if sid == forbidden or sid in used or sid in probe.down:
            continue
        free = probe.residual_switches[sid] - sw_extra.get(sid, 0)
        if vs.demand.switch_memory > free:
            continue
        options.append((probe.net.hop_distance(old_host, sid), sid))
    options.sort()
    for _, sid in options:
        new_vswitch_map = dict(a.vswitch_map)
        new_vswitch_map[vs_id] = sid
        new_vlink_map = dict(a.vlink_map)
        ok = True
        planned: dict[str, int] = {}
        for vl in inc_req.vlinks.values():
            if vs_id not in (vl.a, vl.b):
                continue
            other = vl.b if vl.a == vs_id else vl.a
            other_img = a.vm_map.get(other) or new_vswitch_map.get(other)
            pa = sid if vl.a == vs_id else other_img
            pb = sid if vl.b == vs_id else other_img
            old_key = a.vlink_map[vl.id]
            old_edges = set(probe.table.get(old_key[0], old_key[1])[old_key[2]].edges)
            picked = None
            for n, rec in enumerate(probe.table.get(pa, pb)):
                if inc_req.latency_bound is not None and rec.delay > inc_req.latency_bound:
                    continue
                feasible = True
                for eid in rec.edges:
                    credit = vl.bandwidth if eid in old_edges else 0
                    free = (
                        probe.residual_links[eid]
                        + credit
                        - ln_extra.get(eid, 0)
                        - planned.get(eid, 0)
                    )
                    if eid in probe.down or free < vl.bandwidth:
                        feasible = False
                        break
                if feasible:
                    picked = (pa, pb, n)
                    for eid in rec.edges:
                        planned[eid] = planned.get(eid, 0) + vl.bandwidth
                    break
            if picked is None:
                ok = False
                break
            new_vlink_map[vl.id] = picked
        if ok:
            return Assignment(rid, a.vm_map, new_vswitch_map, new_vlink_map), sid
    return None, None


def _repair_link(probe, req, assignment_box, host, need, ln_extra, moves, incumbent_updates):
    """Re-route the smallest sufficient incumbent vlink off a congested link,
    or failing that, re-route the incoming request's own tentative vlink."""
    candidates = []
    for rid, a in probe.active.items():
        if rid == req.id:
            continue
        for vl_id, key in a.vlink_map.items():
            recs = probe.table.get(key[0], key[1])
            if host in recs[key[2]].edges:
                bw = probe.requests[rid].vlinks[vl_id].bandwidth
                covers = bw >= need.bandwidth
                candidates.append((not covers, bw if covers else -bw, rid, vl_id))
    candidates.sort()
    for _, _, rid, vl_id in candidates:
        new_key = _reroute_vlink(probe, rid, vl_id, host, ln_extra)
        if new_key is None:
            continue
        a = probe.active[rid]
        new_vlink_map = dict(a.vlink_map)
        new_vlink_map[vl_id] = new_key
        new_assignment = Assignment(rid, a.vm_map, a.vswitch_map, new_vlink_map)
        if not _swap_in(probe, rid, new_assignment):
            continue
        moves.append(SwapMove("vlink-reroute", rid, vl_id, host, host, req.id))
        incumbent_updates[rid] = new_assignment
        logger.debug("swap: vlink %s/%s rerouted off %s", rid, vl_id, host)
        return True

    # fall back to moving the tentative mapping's own vlink off this link
    assignment = assignment_box[0]
    own = []
    for vl_id, key in assignment.vlink_map.items():
        recs = probe.table.get(key[0], key[1])
        if host in recs[key[2]].edges:
            own.append((req.vlinks[vl_id].bandwidth, vl_id))
    own.sort(reverse=True)
    for _, vl_id in own:
        vl = req.vlinks[vl_id]
        pa, pb, old_n = assignment.vlink_map[vl_id]
        recs = probe.table.get(pa, pb)
        old_edges = set(recs[old_n].edges)
        for n, rec in enumerate(recs):
            if n == old_n or host in rec.edges:
                continue
            if req.latency_bound is not None and rec.delay > req.latency_bound:
                continue
            feasible = True
            for eid in rec.edges:
                credit = vl.bandwidth if eid in old_edges else 0
                free = probe.residual_links[eid] + credit - ln_extra.get(eid, 0)
                if eid in probe.down or free < vl.bandwidth:
                    feasible = False
                    break
            if feasible:
                new_vlink_map = dict(assignment.vlink_map)
                new_vlink_map[vl_id] = (pa, pb, n)
                assignment_box[0] = Assignment(
                    req.id, assignment.vm_map, assignment.vswitch_map, new_vlink_map
                )
                moves.append(SwapMove("vlink-reroute", req.id, vl_id, host, host, req.id))
                logger.debug("swap: own vlink %s rerouted off %s", vl_id, host)
                return True
    return False


@dataclass
class OnlinePolicy:
    swap_ceiling: int = 8


def try_online_embed(
    state: EmbeddingState, req: VdcRequest, policy: OnlinePolicy | None = None
):
    """Greedy-then-repair online embedding against a read-only state.

    Fragments with enough free capacity are tried first (largest first); a
    clean fragment placement needs no swaps. Otherwise the whole substrate is
    mapped greedily and repaired within the swap budget. Failure leaves the
    state untouched.
    """
    policy = policy or OnlinePolicy()
    srv_need, sw_need, bw_need = req.demand_totals()
    agg = state.residual_vectors()
    if not (
        srv_need.le(agg.servers)
        and sw_need <= agg.switch_memory
        and bw_need <= agg.bandwidth
    ):
        return RepairFailure("aggregate residual below request demand", 0.0)

    for nodes, links, (frag_srv, frag_sw, frag_bw) in compute_fragments(state):
        if not (srv_need.le(frag_srv) and sw_need <= frag_sw and bw_need <= frag_bw):
            continue
        temp = greedy_temp_map(state, req, allowed=(nodes, links))
        if isinstance(temp, TempMapping) and temp.clean:
            probe = _clone_state(state)
            try:
                probe.commit(req, temp.assignment)
            except CommitRejectedError:
                continue
            return OnlineResult(temp.assignment, (), {})

    temp = greedy_temp_map(state, req)
    if isinstance(temp, StructuralFailure):
        return temp
    if temp.clean:
        probe = _clone_state(state)
        try:
            probe.commit(req, temp.assignment)
            return OnlineResult(temp.assignment, (), {})
        except CommitRejectedError as err:
            return RepairFailure(f"clean mapping failed strict check: {err}", 0.0)
    budget = min(len(temp.ledger), policy.swap_ceiling)
    return swap_repair(state, req, temp, budget)
