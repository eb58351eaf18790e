"""Batch embedding as a pure binary program, solved exactly by branch-and-bound.

The model places a set of requests (optionally re-deciding already-active
ones) with an objective of embedded-request count minus normalized migration
distances. Products of placement variables are linearized with the standard
binary product relaxation, so the model stays a pure 0/1 program and the
search needs no LP machinery: bounds are combinatorial, feasibility is kept
by incremental row-interval propagation with trail-based undo.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParameterError, StaleSnapshotError
from .paths import PathTable
from .state import Assignment, EmbeddingState
from .topology import ResourceVector, VdcRequest

KIND_Z = "z"
KIND_X = "x"
KIND_W = "w"
KIND_Y = "y"


@dataclass(frozen=True)
class VarInfo:
    """Decision variable metadata; maps model indices back to domain objects."""

    kind: str
    request_id: str
    element_id: str = ""
    host_a: str = ""
    host_b: str = ""
    path_n: int = -1

    @property
    def name(self) -> str:
        if self.kind == KIND_Z:
            return f"z({self.request_id})"
        if self.kind == KIND_Y:
            return f"y({self.request_id},{self.element_id},{self.host_a},{self.host_b},{self.path_n})"
        return f"{self.kind}({self.request_id},{self.element_id},{self.host_a})"


@dataclass
class SolveBudget:
    """Search limits; node_limit bounds decisions, wall_ms is a safety valve.

    Determinism is guaranteed for node-limited solves; a binding wall-clock
    limit can stop at run-dependent points.
    """

    node_limit: int = 200_000
    wall_ms: int = 0  # 0 disables the clock check


@dataclass(frozen=True)
class MigrationMove:
    kind: str  # vm | vswitch
    request_id: str
    element_id: str
    old_host: str
    new_host: str
    hops: int


class MipModel:
    """Binary variables, linear rows, and an exact scaled-integer objective."""

    def __init__(self, state_version: int):
        self.state_version = state_version
        self.vars: list[VarInfo] = []
        self.var_index: dict[tuple, int] = {}
        self.row_vars: list[list[int]] = []
        self.row_coefs: list[list[int]] = []
        self.row_rhs: list[int] = []
        self.row_eq: list[bool] = []
        self.row_label: list[str] = []
        self.obj_coef: list[int] = []  # scaled by obj_scale
        self.obj_scale: int = 1
        self.requests: list[VdcRequest] = []
        self.z_of_request: list[int] = []
        self.remappable: dict[str, Assignment] = {}
        self.penalized: list[list[list[int]]] = []  # per request: per element: var idxs
        self.branch_order: list[int] = []
        self.switch_penalty_divisor = Fraction(2)
        self.net = None  # set by build_mip; used for hop distances

    # -- construction helpers -------------------------------------------------

    def _new_var(self, info: VarInfo, key: tuple) -> int:
        idx = len(self.vars)
        self.vars.append(info)
        self.var_index[key] = idx
        self.obj_coef.append(0)
        return idx

    def _new_row(self, vars_, coefs, rhs: int, eq: bool, label: str):
        self.row_vars.append(list(vars_))
        self.row_coefs.append(list(coefs))
        self.row_rhs.append(rhs)
        self.row_eq.append(eq)
        self.row_label.append(label)

    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def num_constraints(self) -> int:
        return len(self.row_rhs)

    def vars_of_kind(self, kind: str) -> list[int]:
        return [i for i, v in enumerate(self.vars) if v.kind == kind]

    def objective_value(self, one_vars) -> Fraction:
        scaled = sum(self.obj_coef[v] for v in one_vars)
        return Fraction(scaled, self.obj_scale)

    def export_text(self) -> str:
        """Objective plus one constraint row per line, for external cross-checks."""
        terms = []
        for i, c in enumerate(self.obj_coef):
            if c:
                frac = Fraction(c, self.obj_scale)
                terms.append(f"{'+' if frac > 0 else '-'}{abs(frac)} {self.vars[i].name}")
        lines = ["maximize: " + " ".join(terms)]
        for r in range(self.num_constraints):
            row = " ".join(
                f"{'+' if c > 0 else '-'}{abs(c)} {self.vars[v].name}"
                for v, c in zip(self.row_vars[r], self.row_coefs[r])
            )
            sense = "=" if self.row_eq[r] else "<="
            lines.append(f"{self.row_label[r]}: {row} {sense} {self.row_rhs[r]}")
        lines.append("binary: " + " ".join(v.name for v in self.vars))
        return "\n".join(lines) + "\n"


def _usable_path(rec, down: set[str], latency_bound: int | None) -> bool:
    if latency_bound is not None and rec.delay > latency_bound:
        return False
    if down:
        if any(e in down for e in rec.edges):
            return False
        if any(n in down for n in rec.nodes):
            return False
    return True


def build_mip(
    snapshot: EmbeddingState,
    candidates: list[VdcRequest],
    remappable: list[str] | None = None,
    table: PathTable | None = None,
    switch_penalty_divisor: Fraction | float | int = Fraction(2),
    vm_move_weighting: bool = True,
    migration_aware: bool = True,
) -> MipModel:
    """Encode batch embedding of candidates (plus re-decided actives) as a 0/1 program.

    Capacities consumed by active requests outside the remappable set are
    pre-subtracted from the right-hand sides; remappable requests' usage is
    credited back because their placement is being re-decided.

    migration_aware=False drops the move-distance penalty terms and the
    keep-current-host search preference; it models a plain maximize-embeddings
    program that re-places actives with no regard for their previous hosts.
    """
    if not candidates:
        raise InvalidParameterError("candidate set must be nonempty")
    f = Fraction(switch_penalty_divisor)
    if f <= 0:
        raise InvalidParameterError(f"switch penalty divisor must be > 0, got {f}")
    table = table if table is not None else snapshot.table
    net = snapshot.net
    down = snapshot.down
    remappable = list(remappable or [])
    for rid in remappable:
        if rid not in snapshot.active:
            raise InvalidParameterError(f"remappable request {rid} is not active")

    model = MipModel(snapshot.version)
    model.net = net
    model.switch_penalty_divisor = f
    model.remappable = {rid: snapshot.active[rid] for rid in remappable}
    # actives branch first so the initial dive keeps them put and only then
    # slots the new candidates into the remaining room
    requests = [snapshot.requests[rid] for rid in remappable] + list(candidates)
    model.requests = requests

    # rhs: residuals plus credited-back usage of remappable actives
    rhs_srv: dict[str, ResourceVector] = dict(snapshot.residual_servers)
    rhs_sw: dict[str, int] = dict(snapshot.residual_switches)
    rhs_ln: dict[str, int] = dict(snapshot.residual_links)
    for rid in remappable:
        u_srv, u_sw, u_ln = snapshot._usage_of(snapshot.requests[rid], snapshot.active[rid])
        for pm, load in u_srv.items():
            rhs_srv[pm] = rhs_srv[pm] + load
        for ps, load in u_sw.items():
            rhs_sw[ps] += load
        for lid, load in u_ln.items():
            rhs_ln[lid] += load

    # objective scaling: S = diameter * max-remappable-vm-memory * numerator(f)
    diameter = net.diameter()
    max_mem = 1
    if vm_move_weighting and migration_aware:
        for rid in remappable:
            for vm in snapshot.requests[rid].vms.values():
                max_mem = max(max_mem, vm.demand.memory_mb)
    scale = diameter * max_mem * f.numerator
    model.obj_scale = scale

    servers_alive = [s for s in net.servers if s not in down]
    switches_alive = [s for s in net.switches if s not in down]
    edge_alive = [s for s in switches_alive if net.switches[s].tier == "edge"]

    def ordered_hosts(pool: list[str], current: str | None) -> list[str]:
        if not migration_aware or current is None or current not in pool:
            return sorted(pool)
        return [current] + sorted(h for h in pool if h != current)

    link_rows: dict[str, list[tuple[int, int]]] = {}  # link id -> (var, bw)

    for req in requests:
        old = model.remappable.get(req.id)
        zi = model._new_var(VarInfo(KIND_Z, req.id), (KIND_Z, req.id))
        model.z_of_request.append(zi)
        model.obj_coef[zi] = scale
        order_block = [zi]
        penalized_elements: list[list[int]] = []

        x_cands: dict[str, list[tuple[str, int]]] = {}
        for vs_id, vs in req.vswitches.items():
            pool = edge_alive if vs.is_edge else switches_alive
            cur = old.vswitch_map.get(vs_id) if old else None
            cands = []
            for host in ordered_hosts(pool, cur):
                vi = model._new_var(
                    VarInfo(KIND_X, req.id, vs_id, host), (KIND_X, req.id, vs_id, host)
                )
                cands.append((host, vi))
                if old is not None and migration_aware:
                    hops = net.hop_distance(cur, host)
                    if hops:
                        # vswitch move: hops/(diameter*f) scaled by S
                        model.obj_coef[vi] = -hops * f.denominator * max_mem
            x_cands[vs_id] = cands
            model._new_row(
                [vi for _, vi in cands] + [zi],
                [1] * len(cands) + [-1],
                0,
                True,
                f"place_vswitch[{req.id}/{vs_id}]",
            )
            order_block.extend(vi for _, vi in cands)
            if old is not None and migration_aware:
                penalized_elements.append([vi for _, vi in cands])

        w_cands: dict[str, list[tuple[str, int]]] = {}
        for vm_id, vm in req.vms.items():
            pool = servers_alive
            if req.locality and vm_id in req.locality:
                pool = [s for s in pool if s in req.locality[vm_id]]
            cur = old.vm_map.get(vm_id) if old else None
            cands = []
            for host in ordered_hosts(pool, cur):
                vi = model._new_var(
                    VarInfo(KIND_W, req.id, vm_id, host), (KIND_W, req.id, vm_id, host)
                )
                cands.append((host, vi))
                if old is not None and migration_aware:
                    hops = net.hop_distance(cur, host)
                    if hops:
                        weight = vm.demand.memory_mb if vm_move_weighting else max_mem
                        # vm move: (mem/maxmem)*(hops/diameter) scaled by S
                        model.obj_coef[vi] = -weight * hops * f.numerator
            w_cands[vm_id] = cands
            model._new_row(
                [vi for _, vi in cands] + [zi],
                [1] * len(cands) + [-1],
                0,
                True,
                f"place_vm[{req.id}/{vm_id}]",
            )
            order_block.extend(vi for _, vi in cands)
            if old is not None and migration_aware:
                penalized_elements.append([vi for _, vi in cands])

        # one vswitch of a request per physical switch
        per_switch: dict[str, list[int]] = {}
        for vs_id, cands in x_cands.items():
            for host, vi in cands:
                per_switch.setdefault(host, []).append(vi)
        for host in sorted(per_switch):
            vis = per_switch[host]
            if len(vis) > 1:
                model._new_row(vis, [1] * len(vis), 1, False, f"switch_once[{req.id}/{host}]")

        for vl_id, vl in req.vlinks.items():
            bw = vl.bandwidth
            end_kind = (
                "vm" if vl.a in req.vms else "vs",
                "vm" if vl.b in req.vms else "vs",
            )
            cands_a = w_cands[vl.a] if end_kind[0] == "vm" else x_cands[vl.a]
            cands_b = w_cands[vl.b] if end_kind[1] == "vm" else x_cands[vl.b]
            y_all: list[int] = []
            for host_a, va in cands_a:
                for host_b, vb in cands_b:
                    if host_a == host_b:
                        continue
                    recs = table.get(host_a, host_b)
                    if "vm" in end_kind:
                        # switch-vm links ride the single physical edge below the switch
                        recs = [r for r in recs[:1] if len(r.edges) == 1]
                    pair_y: list[int] = []
                    for n, rec in enumerate(recs):
                        if not _usable_path(rec, down, req.latency_bound):
                            continue
                        yi = model._new_var(
                            VarInfo(KIND_Y, req.id, vl_id, host_a, host_b, n),
                            (KIND_Y, req.id, vl_id, host_a, host_b, n),
                        )
                        pair_y.append(yi)
                        for eid in rec.edges:
                            link_rows.setdefault(eid, []).append((yi, bw))
                    if pair_y:
                        y_all.extend(pair_y)
                        tag = f"{req.id}/{vl_id}/{host_a}/{host_b}"
                        model._new_row(
                            pair_y + [va], [1] * len(pair_y) + [-1], 0, False, f"link_a[{tag}]"
                        )
                        model._new_row(
                            pair_y + [vb], [1] * len(pair_y) + [-1], 0, False, f"link_b[{tag}]"
                        )
                        model._new_row(
                            [va, vb] + pair_y,
                            [1, 1] + [-1] * len(pair_y),
                            1,
                            False,
                            f"link_c[{tag}]",
                        )
            model._new_row(
                y_all + [zi],
                [1] * len(y_all) + [-1],
                0,
                True,
                f"route_vlink[{req.id}/{vl_id}]",
            )
            order_block.extend(y_all)

        model.penalized.append(penalized_elements)
        model.branch_order.extend(order_block)

    # capacity rows
    for sid in servers_alive:
        rhs = rhs_srv[sid]
        for attr, take in (("cpu", lambda d: d.cpu_cores), ("mem", lambda d: d.memory_mb)):
            vis, coefs = [], []
            for req in requests:
                for vm_id, vm in req.vms.items():
                    vi = model.var_index.get((KIND_W, req.id, vm_id, sid))
                    if vi is not None:
                        vis.append(vi)
                        coefs.append(take(vm.demand))
            if vis:
                bound = rhs.cpu_cores if attr == "cpu" else rhs.memory_mb
                model._new_row(vis, coefs, bound, False, f"server_{attr}[{sid}]")
    for sid in switches_alive:
        vis, coefs = [], []
        for req in requests:
            for vs_id, vs in req.vswitches.items():
                vi = model.var_index.get((KIND_X, req.id, vs_id, sid))
                if vi is not None:
                    vis.append(vi)
                    coefs.append(vs.demand.switch_memory)
        if vis:
            model._new_row(vis, coefs, rhs_sw[sid], False, f"switch_mem[{sid}]")
    for lid, entries in sorted(link_rows.items()):
        model._new_row(
            [vi for vi, _ in entries],
            [bw for _, bw in entries],
            rhs_ln[lid],
            False,
            f"link_bw[{lid}]",
        )
    return model


@dataclass
class BatchSolution:
    """Result of one batch solve: per-request placements plus search stats."""

    model: MipModel
    embedded: dict[str, Assignment | None]
    objective: Fraction | None
    migrations: list[MigrationMove]
    nodes: int
    wall_ms: float
    optimal: bool
    status: str  # optimal | incumbent | no-solution

    def stats_lines(self) -> list[str]:
        return [
            f"status={self.status}",
            f"objective={self.objective if self.objective is not None else 'none'}",
            f"embedded={sum(1 for a in self.embedded.values() if a is not None)}",
            f"nodes={self.nodes}",
            f"wall_ms={self.wall_ms:.1f}",
            f"optimal={str(self.optimal).lower()}",
            f"vars={self.model.num_vars}",
            f"constraints={self.model.num_constraints}",
        ]


class _Search:
    """Iterative DFS over binary variables with row-interval propagation.

    Row state keeps [lo, hi] achievable sums given current fixings; a fix
    updates touched rows in O(1) each and conflicts are detected immediately.
    Forcing scans run only when a row gets tight enough to possibly force.
    """

    def __init__(self, model: MipModel):
        self.m = model
        n = model.num_vars
        self.values = [-1] * n
        self.var_rows: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.row_lo = []
        self.row_hi = []
        self.row_maxabs = []
        for r in range(model.num_constraints):
            lo = hi = 0
            maxabs = 0
            for v, c in zip(model.row_vars[r], model.row_coefs[r]):
                self.var_rows[v].append((r, c))
                if c > 0:
                    hi += c
                else:
                    lo += c
                maxabs = max(maxabs, abs(c))
            self.row_lo.append(lo)
            self.row_hi.append(hi)
            self.row_maxabs.append(maxabs)
        self.trail: list[int] = []
        self.obj_acc = 0

    def _fix(self, v: int, val: int) -> bool:
        values = self.values
        if values[v] != -1:
            return values[v] == val
        values[v] = val
        self.trail.append(v)
        self.obj_acc += self.m.obj_coef[v] * val
        lo, hi, rhs, eq = self.row_lo, self.row_hi, self.m.row_rhs, self.m.row_eq
        ok = True
        for r, c in self.var_rows[v]:
            if c > 0:
                hi[r] -= c
            else:
                lo[r] -= c
            if val:
                lo[r] += c
                hi[r] += c
            if lo[r] > rhs[r] or (eq[r] and hi[r] < rhs[r]):
                ok = False
        return ok

    def _propagate(self, queue: list[int]) -> bool:
        """Forcing pass; queue holds rows to scan. Returns False on conflict."""
        values = self.values
        m = self.m
        lo, hi, rhs, eq = self.row_lo, self.row_hi, m.row_rhs, m.row_eq
        while queue:
            r = queue.pop()
            if lo[r] > rhs[r] or (eq[r] and hi[r] < rhs[r]):
                return False
            if (rhs[r] - lo[r]) >= self.row_maxabs[r] and not (
                eq[r] and (hi[r] - rhs[r]) < self.row_maxabs[r]
            ):
                continue
            for v, c in zip(m.row_vars[r], m.row_coefs[r]):
                if values[v] != -1:
                    continue
                if c > 0:
                    bad1 = lo[r] + c > rhs[r]
                    bad0 = eq[r] and hi[r] - c < rhs[r]
                else:
                    bad1 = eq[r] and hi[r] + c < rhs[r]
                    bad0 = lo[r] - c > rhs[r]
                if bad1 and bad0:
                    return False
                if bad1 or bad0:
                    if not self._fix(v, 0 if bad1 else 1):
                        return False
                    for r2, _ in self.var_rows[v]:
                        if (rhs[r2] - lo[r2]) < self.row_maxabs[r2] or (
                            eq[r2] and (hi[r2] - rhs[r2]) < self.row_maxabs[r2]
                        ):
                            queue.append(r2)
        return True

    def decide(self, v: int, val: int) -> bool:
        mark = len(self.trail)
        if not self._fix(v, val):
            self.undo_to(mark)
            return False
        queue = []
        lo, hi, rhs, eq = self.row_lo, self.row_hi, self.m.row_rhs, self.m.row_eq
        for r, _ in self.var_rows[v]:
            if (rhs[r] - lo[r]) < self.row_maxabs[r] or (
                eq[r] and (hi[r] - rhs[r]) < self.row_maxabs[r]
            ):
                queue.append(r)
        if not self._propagate(queue):
            self.undo_to(mark)
            return False
        return True

    def undo_to(self, mark: int):
        values = self.values
        lo, hi = self.row_lo, self.row_hi
        while len(self.trail) > mark:
            v = self.trail.pop()
            val = values[v]
            values[v] = -1
            self.obj_acc -= self.m.obj_coef[v] * val
            for r, c in self.var_rows[v]:
                if val:
                    lo[r] -= c
                    hi[r] -= c
                if c > 0:
                    hi[r] += c
                else:
                    lo[r] += c

    def upper_bound(self) -> int:
        """Scaled objective bound for any completion of the current fixing."""
        ub = self.obj_acc
        values = self.values
        coef = self.m.obj_coef
        scale = self.m.obj_scale
        for u, zi in enumerate(self.m.z_of_request):
            zv = values[zi]
            if zv == 0:
                continue
            pend = 0
            for elem_vars in self.m.penalized[u]:
                placed = False
                best = None
                for vi in elem_vars:
                    s = values[vi]
                    if s == 1:
                        placed = True
                        break
                    if s == -1 and (best is None or coef[vi] > best):
                        best = coef[vi]
                if not placed and best is not None:
                    pend += best
            if zv == 1:
                ub += pend
            else:
                ub += max(0, scale + pend)
        return ub


def solve_exact(model: MipModel, budget: SolveBudget | None = None) -> BatchSolution:
    """Depth-first branch-and-bound; provably optimal when the search finishes.

    Variable order is static (per request: embed flag, then vSwitch, VM, and
    path variables, each with its preferred host first), value 1 is tried
    before 0, and bounds no better than the incumbent are pruned, so the
    search is deterministic for a given model and node budget.
    """
    budget = budget or SolveBudget()
    start = time.perf_counter()
    search = _Search(model)
    order = model.branch_order
    values = search.values

    best_values: list[int] | None = None
    best_scaled: int | None = None
    nodes = 0
    exhausted = True

    def find_free(p: int) -> int:
        while p < len(order) and values[order[p]] != -1:
            p += 1
        return p

    # frames: [order position, values left to try, trail mark before the decision]
    stack: list[list] = []
    p0 = find_free(0)
    if p0 == len(order):
        best_scaled = search.obj_acc
        best_values = list(values)
    else:
        stack.append([p0, [1, 0], len(search.trail)])

    while stack:
        if nodes >= budget.node_limit:
            exhausted = False
            break
        if budget.wall_ms and nodes % 128 == 0:
            if (time.perf_counter() - start) * 1000.0 > budget.wall_ms:
                exhausted = False
                break
        frame = stack[-1]
        pos, vals, mark = frame
        search.undo_to(mark)
        if not vals:
            stack.pop()
            continue
        if best_scaled is not None and search.upper_bound() <= best_scaled:
            stack.pop()
            continue
        val = vals.pop(0)
        nodes += 1
        if search.decide(order[pos], val):
            nxt = find_free(pos + 1)
            if nxt == len(order):
                scaled = search.obj_acc
                if best_scaled is None or scaled > best_scaled:
                    best_scaled = scaled
                    best_values = list(values)
            else:
                stack.append([nxt, [1, 0], len(search.trail)])

    wall = (time.perf_counter() - start) * 1000.0

    if best_values is None:
        return BatchSolution(model, {}, None, [], nodes, wall, False, "no-solution")

    embedded: dict[str, Assignment | None] = {}
    for req in model.requests:
        embedded[req.id] = None
    one_vars = [i for i, v in enumerate(best_values) if v == 1]
    by_request: dict[str, dict] = {
        req.id: {"vm": {}, "vs": {}, "vl": {}, "z": False} for req in model.requests
    }
    for i in one_vars:
        info = model.vars[i]
        slot = by_request[info.request_id]
        if info.kind == KIND_Z:
            slot["z"] = True
        elif info.kind == KIND_W:
            slot["vm"][info.element_id] = info.host_a
        elif info.kind == KIND_X:
            slot["vs"][info.element_id] = info.host_a
        elif info.kind == KIND_Y:
            slot["vl"][info.element_id] = (info.host_a, info.host_b, info.path_n)
    for req in model.requests:
        slot = by_request[req.id]
        if slot["z"]:
            embedded[req.id] = Assignment(req.id, slot["vm"], slot["vs"], slot["vl"])

    migrations: list[MigrationMove] = []
    for rid, old in model.remappable.items():
        new = embedded.get(rid)
        if new is None:
            continue
        for vm_id, old_pm in old.vm_map.items():
            new_pm = new.vm_map[vm_id]
            if new_pm != old_pm:
                migrations.append(
                    MigrationMove("vm", rid, vm_id, old_pm, new_pm, _hops(model, old_pm, new_pm))
                )
        for vs_id, old_ps in old.vswitch_map.items():
            new_ps = new.vswitch_map[vs_id]
            if new_ps != old_ps:
                migrations.append(
                    MigrationMove(
                        "vswitch", rid, vs_id, old_ps, new_ps, _hops(model, old_ps, new_ps)
                    )
                )

    objective = Fraction(best_scaled, model.obj_scale)
    status = "optimal" if exhausted else "incumbent"
    return BatchSolution(model, embedded, objective, migrations, nodes, wall, exhausted, status)


def _hops(model: MipModel, a: str, b: str) -> int:
    return model.net.hop_distance(a, b)


@dataclass
class CommitPlan:
    """Releases and commits that realize a batch solution on the live state."""

    releases: list[str]
    commits: list[tuple[VdcRequest, Assignment]]
    requeue: list[str]  # remappable actives the solution un-embedded
    migrations: list[MigrationMove]


def extract_assignments(sol: BatchSolution, state: EmbeddingState) -> CommitPlan:
    """Turn a solution into an apply-able plan against the state it was built from."""
    if sol.model.state_version != state.version:
        raise StaleSnapshotError(
            f"state version {state.version} != model version {sol.model.state_version}"
        )
    releases: list[str] = []
    commits: list[tuple[VdcRequest, Assignment]] = []
    requeue: list[str] = []
    by_id = {req.id: req for req in sol.model.requests}
    for rid, old in sol.model.remappable.items():
        new = sol.embedded.get(rid)
        if new is None:
            releases.append(rid)
            requeue.append(rid)
        elif new != old:
            releases.append(rid)
            commits.append((by_id[rid], new))
    for req in sol.model.requests:
        if req.id in sol.model.remappable:
            continue
        a = sol.embedded.get(req.id)
        if a is not None:
            commits.append((req, a))
    return CommitPlan(releases, commits, requeue, list(sol.migrations))
