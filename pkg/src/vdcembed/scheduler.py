"""Event-driven orchestration: pending queue, thresholds, mode pick, simulation.

The drain loop realizes the outer embedding procedure: at every wake-up the
thresholds are recomputed from the smallest and largest pending request,
resources at or above the large threshold trigger a batch solve, the band
between the two thresholds is handled by the online embedder, and anything
below the small threshold waits for departures. Pending requests expire after
a configurable patience and count as rejected.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .batch_solver import SolveBudget, build_mip, extract_assignments, solve_exact
from .errors import CommitRejectedError, ConfigError, InvalidParameterError
from .metrics import TraceRecord
from .online_search import (
    OnlinePolicy,
    OnlineResult,
    compute_fragments,
    try_online_embed,
)
from .paths import PathTable, enumerate_paths
from .state import Assignment, EmbeddingState
from .topology import (
    ResourceVector,
    SubstrateNetwork,
    VdcRequest,
    WorkloadConfig,
    generate_vdc_request,
    sum_vectors,
)

MODE_BATCH = "batch"
MODE_ONLINE = "online"
MODE_DEFER = "defer"

RUN_HYBRID = "hybrid"
RUN_BATCH_ONLY = "batch-only"
RUN_ONLINE_ONLY = "online-only"
RUN_MODES = (RUN_HYBRID, RUN_BATCH_ONLY, RUN_ONLINE_ONLY)


@dataclass(frozen=True)
class DemandTriple:
    """Aggregate demand or residual split into server/switch/link parts."""

    servers: ResourceVector
    switch_memory: int
    bandwidth: int

    def covers(self, other: "DemandTriple") -> bool:
        return (
            other.servers.le(self.servers)
            and other.switch_memory <= self.switch_memory
            and other.bandwidth <= self.bandwidth
        )


@dataclass(frozen=True)
class Thresholds:
    smallest: DemandTriple
    largest: DemandTriple


def request_triple(req: VdcRequest) -> DemandTriple:
    srv, swm, bw = req.demand_totals()
    return DemandTriple(srv, swm, bw)


def request_size(req: VdcRequest) -> float:
    """Scalar size used for priority and smallest/largest ranking:
    total VM cores plus total bandwidth demand in Gbps."""
    srv, _, bw = req.demand_totals()
    return srv.cpu_cores + bw / 1000.0


@dataclass
class PendingEntry:
    request: VdcRequest
    arrival_seq: int
    expiry: float
    accepted_before: bool = False

    @property
    def size(self) -> float:
        return request_size(self.request)


class PendingQueue:
    """Deterministically prioritized waiting requests."""

    def __init__(self):
        self.entries: dict[str, PendingEntry] = {}

    def __len__(self):
        return len(self.entries)

    def add(self, entry: PendingEntry):
        self.entries[entry.request.id] = entry

    def remove(self, request_id: str) -> PendingEntry | None:
        return self.entries.pop(request_id, None)

    def ordered(self) -> list[PendingEntry]:
        # soonest expiry first, then biggest, then longest incumbency, then arrival
        return sorted(
            self.entries.values(),
            key=lambda e: (e.expiry, -e.size, -e.request.duration, e.arrival_seq),
        )

    def expired(self, now: float) -> list[PendingEntry]:
        return [e for e in self.ordered() if e.expiry <= now]


def compute_thresholds(queue: PendingQueue) -> Thresholds | None:
    """Demand triples of the smallest and largest pending request, or None
    (the no-pending signal) on an empty queue."""
    if not len(queue):
        return None
    by_size = sorted(queue.entries.values(), key=lambda e: (e.size, e.request.id))
    return Thresholds(
        smallest=request_triple(by_size[0].request),
        largest=request_triple(by_size[-1].request),
    )


def select_mode(residuals, thresholds: Thresholds) -> str:
    """Batch when residuals cover the largest pending request on every
    component; online when they cover at least the smallest; defer otherwise."""
    res = DemandTriple(residuals.servers, residuals.switch_memory, residuals.bandwidth)
    if res.covers(thresholds.largest):
        return MODE_BATCH
    if res.covers(thresholds.smallest):
        return MODE_ONLINE
    return MODE_DEFER


@dataclass(frozen=True)
class SimEvent:
    """One exogenous event; processed in (time, seq) order."""

    time: float
    seq: int
    kind: str  # arrival | departure | failure | scale_up
    request: VdcRequest | None = None
    request_id: str = ""
    elements: tuple[str, ...] = ()
    deltas: tuple[tuple[str, ResourceVector], ...] = ()


@dataclass(frozen=True)
class PolicyConfig:
    """Tunables for the scheduler and the two embedders."""

    switch_penalty_divisor: Fraction = Fraction(2)
    swap_ceiling: int = 8
    batch_width: int = 8
    patience: float = 50.0
    batch_min_pending: int = 2
    solver_node_limit: int = 20000
    solver_wall_ms: int = 0
    remap_limit: int = 0  # how many recent actives a batch may remap; 0 = all
    vm_move_weighting: bool = True

    def policy_hash(self) -> str:
        blob = repr(
            (
                str(self.switch_penalty_divisor),
                self.swap_ceiling,
                self.batch_width,
                self.patience,
                self.batch_min_pending,
                self.solver_node_limit,
                self.solver_wall_ms,
                self.remap_limit,
                self.vm_move_weighting,
            )
        )
        return hashlib.sha1(blob.encode()).hexdigest()[:12]


def parse_policy_config(text: str) -> PolicyConfig:
    """Flat key=value policy file; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        try:
            if key == "f":
                values["switch_penalty_divisor"] = Fraction(val)
            elif key in ("swap_ceiling", "batch_width", "batch_min_pending",
                         "solver_node_limit", "solver_wall_ms", "remap_limit"):
                values[key] = int(val)
            elif key == "patience":
                values[key] = float(val)
            elif key == "vm_move_weighting":
                if val not in ("true", "false"):
                    raise ValueError(val)
                values[key] = val == "true"
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"line {lineno}: bad value {val!r} for {key}") from None
    policy = PolicyConfig(**values)
    if policy.switch_penalty_divisor <= 0:
        raise ConfigError("f must be positive")
    if policy.patience <= 0:
        raise ConfigError("patience must be positive")
    return policy


class Simulation:
    """Single-writer event loop around one EmbeddingState."""

    def __init__(
        self,
        net: SubstrateNetwork,
        table: PathTable,
        policy: PolicyConfig,
        run_mode: str = RUN_HYBRID,
        audit_every: int = 0,
    ):
        if run_mode not in RUN_MODES:
            raise InvalidParameterError(f"unknown run mode {run_mode!r}")
        self.state = EmbeddingState(net, table)
        self.policy = policy
        self.run_mode = run_mode
        self.audit_every = audit_every
        self.queue = PendingQueue()
        self.records: list[TraceRecord] = []
        self.seq = 0
        self.clock = 0.0
        self.status: dict[str, str] = {}  # pending | accepted | rejected | expired
        self.accept_order: list[str] = []
        self.departures: list[tuple[float, int, str]] = []
        self.events_processed = 0
        self._capacity = self.state.residual_vectors()

    # -- trace ----------------------------------------------------------------

    def emit(self, kind: str, time: float, /, **fields):
        rec = TraceRecord(
            time,
            self.seq,
            kind,
            tuple((k, str(v)) for k, v in fields.items()),
        )
        self.seq += 1
        self.records.append(rec)
        return rec

    def _sample_utilization(self, now: float):
        agg = self.state.residual_vectors()
        cap = self._capacity
        cpu = 1.0 - agg.servers.cpu_cores / cap.servers.cpu_cores
        sw = 1.0 - agg.switch_memory / cap.switch_memory
        bw = 1.0 - agg.bandwidth / cap.bandwidth
        self.emit("util", now, cpu=f"{cpu:.6f}", switch=f"{sw:.6f}", bw=f"{bw:.6f}")

    # -- bookkeeping ----------------------------------------------------------

    def _schedule_departure(self, req: VdcRequest, now: float):
        heapq.heappush(self.departures, (now + req.duration, self.seq, req.id))

    def _accept(self, req: VdcRequest, now: float, via: str):
        self.queue.remove(req.id)
        first_time = self.status.get(req.id) != "accepted"
        self.status[req.id] = "accepted"
        if req.id not in self.accept_order:
            self.accept_order.append(req.id)
        if first_time:
            self.emit("accept", now, request=req.id, vms=len(req.vms), via=via)
            self._schedule_departure(req, now)
        else:
            self.emit("reembed", now, request=req.id, via=via)

    def _record_migration(self, now: float, kind: str, rid: str, element: str, old, new):
        self.emit(
            "migration", now, kind=kind, request=rid, element=element, old=old, new=new
        )

    def _expire_due(self, now: float):
        for entry in self.queue.expired(now):
            rid = entry.request.id
            self.queue.remove(rid)
            if entry.accepted_before:
                self.emit("dropped", now, request=rid)
            else:
                self.status[rid] = "expired"
                self.emit("reject", now, request=rid, reason="expired")

    def _structurally_impossible(self, req: VdcRequest) -> str | None:
        net = self.state.net
        down = self.state.down
        alive_edge = [
            s for s in net.switches if net.switches[s].tier == "edge" and s not in down
        ]
        edge_needed = sum(1 for vs in req.vswitches.values() if vs.is_edge)
        if edge_needed > len(alive_edge):
            return "more-edge-vswitches-than-edge-switches"
        if len(req.vswitches) > len(net.switches) - len(down & set(net.switches)):
            return "more-vswitches-than-switches"
        total_srv = sum_vectors(s.capacity for s in net.servers.values() if s.id not in down)
        total_swm = sum(s.capacity.switch_memory for s in net.switches.values() if s.id not in down)
        total_bw = sum(l.bandwidth for l in net.links.values() if l.id not in down)
        srv, swm, bw = req.demand_totals()
        if not srv.le(total_srv) or swm > total_swm or bw > total_bw:
            return "demand-exceeds-substrate"
        biggest_server = max(
            (net.servers[s].capacity for s in net.servers if s not in self.state.down),
            key=lambda rv: (rv.cpu_cores, rv.memory_mb),
            default=ResourceVector(),
        )
        for vm in req.vms.values():
            if not vm.demand.le(biggest_server):
                return "vm-exceeds-any-server"
        return None

    # -- embedding passes -------------------------------------------------------

    def _apply_online(self, req: VdcRequest, result: OnlineResult, now: float):
        for rid, update in result.incumbent_updates.items():
            req_obj = self.state.requests[rid]
            self.state.release(rid)
            self.state.commit(req_obj, update)
            for move in result.moves:
                if move.moved_request == rid and move.kind in ("vm-swap", "vswitch-swap"):
                    self._record_migration(
                        now,
                        "vm" if move.kind == "vm-swap" else "vswitch",
                        rid,
                        move.moved_element,
                        move.old_host,
                        move.new_host,
                    )
                elif move.moved_request == rid:
                    self._record_migration(now, "vlink", rid, move.moved_element, "-", "-")
        self.state.commit(req, result.assignment)

    def _online_pass(self, now: float) -> bool:
        policy = OnlinePolicy(swap_ceiling=self.policy.swap_ceiling)
        for entry in self.queue.ordered():
            req = entry.request
            result = try_online_embed(self.state, req, policy)
            if isinstance(result, OnlineResult):
                self._apply_online(req, result, now)
                self._accept(req, now, via=MODE_ONLINE)
                self.emit("decision", now, mode=MODE_ONLINE, request=req.id, outcome="accept")
                return True
            self.emit("decision", now, mode=MODE_ONLINE, request=req.id, outcome="fail")
        return False

    def _batch_candidates(self) -> list[VdcRequest]:
        agg = self.state.residual_vectors()
        budget = DemandTriple(agg.servers, agg.switch_memory, agg.bandwidth)
        spent = DemandTriple(ResourceVector(), 0, 0)
        out = []
        for entry in self.queue.ordered():
            need = request_triple(entry.request)
            merged = DemandTriple(
                spent.servers + need.servers,
                spent.switch_memory + need.switch_memory,
                spent.bandwidth + need.bandwidth,
            )
            if not budget.covers(merged):
                break
            out.append(entry.request)
            spent = merged
            if len(out) >= self.policy.batch_width:
                break
        return out

    def _remappable(self) -> list[str]:
        active = [rid for rid in self.accept_order if rid in self.state.active]
        if self.policy.remap_limit > 0:
            active = active[-self.policy.remap_limit :]
        return active

    def _batch_pass(self, now: float) -> bool:
        candidates = self._batch_candidates()
        if not candidates:
            return False
        # the stand-alone MIP baseline re-places actives with no regard for
        # their previous hosts; the hybrid's batch calls stay migration-aware
        model = build_mip(
            self.state,
            candidates,
            remappable=self._remappable(),
            switch_penalty_divisor=self.policy.switch_penalty_divisor,
            vm_move_weighting=self.policy.vm_move_weighting,
            migration_aware=self.run_mode != RUN_BATCH_ONLY,
        )
        budget = SolveBudget(self.policy.solver_node_limit, self.policy.solver_wall_ms)
        sol = solve_exact(model, budget)
        if sol.status == "no-solution":
            self.emit("decision", now, mode=MODE_BATCH, batch=len(candidates), outcome="no-solution")
            return False
        plan = extract_assignments(sol, self.state)
        by_id = {req.id: req for req in model.requests}
        for rid in plan.releases:
            self.state.release(rid)
        for req, a in plan.commits:
            self.state.commit(req, a)
        for move in plan.migrations:
            self._record_migration(
                now, move.kind, move.request_id, move.element_id, move.old_host, move.new_host
            )
        accepted = 0
        for req in candidates:
            if sol.embedded.get(req.id) is not None:
                self._accept(req, now, via=MODE_BATCH)
                accepted += 1
        for rid in plan.requeue:
            # the solver un-embedded an active request: back to the queue
            self.queue.add(
                PendingEntry(
                    by_id[rid],
                    arrival_seq=self.seq,
                    expiry=now + self.policy.patience,
                    accepted_before=True,
                )
            )
            self.emit("unembedded", now, request=rid)
        self.emit(
            "decision",
            now,
            mode=MODE_BATCH,
            batch=len(candidates),
            outcome=f"accepted-{accepted}",
            objective=str(sol.objective),
            optimal=str(sol.optimal).lower(),
        )
        return accepted > 0

    def _fragmented_above(self, thresholds: Thresholds) -> bool:
        """True when no single fragment covers the largest pending request
        even though the aggregate does (the compaction trigger)."""
        for _, _, (srv, swm, bw) in compute_fragments(self.state):
            frag = DemandTriple(srv, swm, bw)
            if frag.covers(thresholds.largest):
                return False
        return True

    def _effective_mode(self, thresholds: Thresholds) -> str:
        agg = self.state.residual_vectors()
        mode = select_mode(agg, thresholds)
        if self.run_mode == RUN_ONLINE_ONLY:
            return MODE_ONLINE if mode != MODE_DEFER else MODE_DEFER
        if self.run_mode == RUN_BATCH_ONLY:
            return MODE_BATCH if mode == MODE_BATCH else MODE_DEFER
        if (
            mode == MODE_BATCH
            and len(self.queue) < self.batch_min_pending()
            and not self._fragmented_above(thresholds)
        ):
            return MODE_ONLINE
        return mode

    def batch_min_pending(self) -> int:
        return max(1, self.policy.batch_min_pending)

    def _drain(self, now: float):
        rounds = 2 * len(self.queue) + 4  # hard stop against requeue ping-pong
        while rounds > 0:
            rounds -= 1
            self._expire_due(now)
            if not len(self.queue):
                return
            thresholds = compute_thresholds(self.queue)
            mode = self._effective_mode(thresholds)
            if mode == MODE_DEFER:
                self.emit("decision", now, mode=MODE_DEFER, pending=len(self.queue))
                return
            if mode == MODE_ONLINE:
                if not self._online_pass(now):
                    return
            else:
                progressed = self._batch_pass(now)
                if not progressed:
                    if self.run_mode == RUN_HYBRID and self._online_pass(now):
                        continue
                    return

    # -- event handlers ---------------------------------------------------------

    def handle_arrival(self, req: VdcRequest, now: float):
        self.emit("arrival", now, request=req.id, vms=len(req.vms), size=f"{request_size(req):.3f}")
        reason = self._structurally_impossible(req)
        if reason is not None:
            self.status[req.id] = "rejected"
            self.emit("reject", now, request=req.id, reason=reason)
            return
        self.status[req.id] = "pending"
        self.queue.add(
            PendingEntry(req, arrival_seq=self.seq, expiry=req.arrival_time + self.policy.patience)
        )
        self._drain(now)

    def handle_departure(self, request_id: str, now: float):
        if request_id in self.state.active:
            self.state.release(request_id)
            self.emit("departure", now, request=request_id)
            self._drain(now)
        else:
            # the request was un-embedded and still waiting; its incumbency is over
            if self.queue.remove(request_id) is not None:
                self.emit("dropped", now, request=request_id)

    def handle_failure(self, elements: tuple[str, ...], now: float):
        self.state.mark_down(elements)
        self.emit("failure", now, elements=",".join(sorted(elements)))
        displaced = []
        for rid in list(self.state.active):
            if self._touches_down(rid):
                displaced.append(rid)
        for rid in displaced:
            if not self._repair_displaced(rid, now):
                req = self.state.requests[rid]
                self.state.release(rid)
                self.queue.add(
                    PendingEntry(
                        req,
                        arrival_seq=self.seq,
                        expiry=now + self.policy.patience,
                        accepted_before=True,
                    )
                )
                self.emit("displaced", now, request=rid, outcome="requeued")
        self._drain(now)

    def _touches_down(self, rid: str) -> bool:
        a = self.state.active[rid]
        down = self.state.down
        if any(h in down for h in a.vm_map.values()):
            return True
        if any(h in down for h in a.vswitch_map.values()):
            return True
        for key in a.vlink_map.values():
            rec = self.state.table.path(*key)
            if any(e in down for e in rec.edges) or any(n in down for n in rec.nodes):
                return True
        return False

    def _repair_displaced(self, rid: str, now: float) -> bool:
        """Move only the elements sitting on failed hardware, keeping the rest."""
        state = self.state
        req = state.requests[rid]
        a = state.active[rid]
        down = state.down
        new_vm = dict(a.vm_map)
        new_vs = dict(a.vswitch_map)
        new_vl = dict(a.vlink_map)
        moved: list[tuple[str, str, str, str]] = []

        for vs_id, host in a.vswitch_map.items():
            if host in down:
                return False  # switch loss relocates the vswitch; fall back to requeue
        for vm_id, host in a.vm_map.items():
            if host not in down:
                continue
            rack = state.net.edge_switch_of(host)
            demand = req.vms[vm_id].demand
            vlink = next(vl for vl in req.vlinks.values() if vm_id in (vl.a, vl.b))
            target = None
            for sid in sorted(state.net.servers_under(rack)):
                if sid in down or sid == host:
                    continue
                planned = sum_vectors(
                    req.vms[v].demand for v, s in new_vm.items() if s == sid and v != vm_id
                )
                free = state.residual_servers[sid] - planned
                lid = state.net.link_between(rack, sid)
                if demand.le(free) and lid not in down:
                    target = sid
                    break
            if target is None:
                return False
            new_vm[vm_id] = target
            moved.append(("vm", vm_id, host, target))
            pa, pb, _ = a.vlink_map[vlink.id]
            new_vl[vlink.id] = (
                target if pa == host else pa,
                target if pb == host else pb,
                0,
            )
            moved.append(("vlink", vlink.id, "-", "-"))
        for vl_id, key in a.vlink_map.items():
            if new_vl[vl_id] != key:
                continue
            rec = state.table.path(*key)
            if not (any(e in down for e in rec.edges) or any(n in down for n in rec.nodes)):
                continue
            pa, pb, old_n = key
            vl = req.vlinks[vl_id]
            picked = None
            for n, alt in enumerate(state.table.get(pa, pb)):
                if n == old_n:
                    continue
                if any(e in down for e in alt.edges) or any(nd in down for nd in alt.nodes):
                    continue
                if req.latency_bound is not None and alt.delay > req.latency_bound:
                    continue
                picked = n
                break
            if picked is None:
                return False
            new_vl[vl_id] = (pa, pb, picked)
            moved.append(("vlink", vl_id, "-", "-"))

        candidate = Assignment(rid, new_vm, new_vs, new_vl)
        probe_req = state.requests[rid]
        state.release(rid)
        try:
            state.commit(probe_req, candidate)
        except CommitRejectedError:
            # already released; requeue instead of restoring a broken mapping
            self._requeue_after_failed_repair(probe_req, now)
            return True
        for kind, element, old, new in moved:
            self._record_migration(now, kind, rid, element, old, new)
        self.emit("displaced", now, request=rid, outcome="repaired")
        return True

    def _requeue_after_failed_repair(self, req: VdcRequest, now: float):
        self.queue.add(
            PendingEntry(
                req,
                arrival_seq=self.seq,
                expiry=now + self.policy.patience,
                accepted_before=True,
            )
        )
        self.emit("displaced", now, request=req.id, outcome="requeued")

    def handle_scale_up(self, request_id: str, deltas, now: float):
        if request_id not in self.state.active:
            self.emit("scale_up", now, request=request_id, outcome="not-active")
            return
        state = self.state
        req = state.requests[request_id]
        new_vms = dict(req.vms)
        for vm_id, extra in deltas:
            if vm_id not in new_vms:
                self.emit("scale_up", now, request=request_id, outcome="unknown-vm")
                return
            new_vms[vm_id] = replace(new_vms[vm_id], demand=new_vms[vm_id].demand + extra)
        scaled = replace(req, vms=new_vms)
        a = state.active[request_id]
        state.release(request_id)
        try:
            state.commit(scaled, a)
            self.emit("scale_up", now, request=request_id, outcome="in-place")
            return
        except CommitRejectedError:
            pass
        # pin unchanged elements, let the scaled VMs move within their racks
        scaled_ids = {vm_id for vm_id, _ in deltas}
        locality = {}
        for vm_id in scaled.vms:
            if vm_id in scaled_ids:
                rack = state.net.edge_switch_of(a.vm_map[vm_id])
                locality[vm_id] = frozenset(state.net.servers_under(rack))
            else:
                locality[vm_id] = frozenset({a.vm_map[vm_id]})
        pinned = replace(scaled, locality=locality)
        result = try_online_embed(state, pinned, OnlinePolicy(self.policy.swap_ceiling))
        if isinstance(result, OnlineResult):
            self._apply_online(pinned, result, now)
            # store without the synthetic pins so later checks use real constraints
            state.requests[request_id] = scaled
            for vm_id in scaled_ids:
                if result.assignment.vm_map[vm_id] != a.vm_map[vm_id]:
                    self._record_migration(
                        now, "vm", request_id, vm_id,
                        a.vm_map[vm_id], result.assignment.vm_map[vm_id],
                    )
            self.emit("scale_up", now, request=request_id, outcome="relocated")
        else:
            state.commit(req, a)  # reinstate the unscaled request
            self.emit("scale_up", now, request=request_id, outcome="rejected")

    # -- event loop --------------------------------------------------------------

    def process(self, event: SimEvent):
        # malformed events are rejected before the clock moves
        if event.kind not in ("arrival", "departure", "failure", "scale_up"):
            raise InvalidParameterError(f"unknown event kind {event.kind!r}")
        if event.time < self.clock:
            raise InvalidParameterError(
                f"event at {event.time} behind clock {self.clock}"
            )
        if event.kind == "arrival" and event.request is None:
            raise InvalidParameterError("arrival event carries no request")
        self.clock = event.time
        if event.kind == "arrival":
            self.handle_arrival(event.request, event.time)
        elif event.kind == "departure":
            self.handle_departure(event.request_id, event.time)
        elif event.kind == "failure":
            self.handle_failure(event.elements, event.time)
        else:
            self.handle_scale_up(event.request_id, event.deltas, event.time)
        self._sample_utilization(event.time)
        self.events_processed += 1
        if self.audit_every and self.events_processed % self.audit_every == 0:
            self.state.audit()


def run_simulation(
    net: SubstrateNetwork,
    workload: WorkloadConfig,
    policy: PolicyConfig,
    run_mode: str = RUN_HYBRID,
    lam: float | None = None,
    seed: int | None = None,
    table: PathTable | None = None,
    extra_events: tuple[SimEvent, ...] = (),
    audit_every: int = 0,
) -> list[TraceRecord]:
    """One full event-driven run; returns the trace (aggregate() folds it)."""
    workload.validate()
    lam = workload.arrival_rate if lam is None else lam
    seed = workload.seed if seed is None else seed
    horizon = workload.horizon
    table = table if table is not None else enumerate_paths(net)

    sim = Simulation(net, table, policy, run_mode, audit_every=audit_every)
    sim.emit(
        "run_start",
        0.0,
        lam=f"{lam:g}",
        seed=seed,
        k=net.k_arity,
        policy=policy.policy_hash(),
        mode=run_mode,
    )

    arrivals: list[SimEvent] = []
    if lam > 0:
        rng = random.Random(f"{seed}/arrivals")
        t = 0.0
        i = 0
        while True:
            t += rng.expovariate(lam / 100.0)
            if t > horizon:
                break
            req = generate_vdc_request(workload, t, f"{seed}/req/{i}")
            req = replace(req, id=f"r{i}")
            arrivals.append(SimEvent(time=t, seq=i, kind="arrival", request=req))
            i += 1

    heap: list[tuple[float, int, int, SimEvent]] = []
    order = 0
    for ev in arrivals:
        heapq.heappush(heap, (ev.time, 0, order, ev))
        order += 1
    for ev in extra_events:
        if ev.time <= horizon:
            heapq.heappush(heap, (ev.time, 1, order, ev))
            order += 1

    while heap or sim.departures:
        next_dep = sim.departures[0] if sim.departures else None
        next_ev = heap[0] if heap else None
        if next_ev is None or (next_dep is not None and next_dep[0] <= next_ev[0]):
            dep_time, _, rid = heapq.heappop(sim.departures)
            if dep_time > horizon:
                continue
            sim.process(SimEvent(time=dep_time, seq=0, kind="departure", request_id=rid))
        else:
            _, _, _, ev = heapq.heappop(heap)
            sim.process(ev)

    sim.emit("run_end", horizon, events=sim.events_processed)
    return sim.records
