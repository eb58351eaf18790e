"""Thresholds, mode selection, event handling, and full simulation runs."""

import random

import pytest

from conftest import star_request
from vdcembed.errors import ConfigError
from vdcembed.metrics import aggregate, serialize_trace
from vdcembed.paths import enumerate_paths
from vdcembed.scheduler import (
    MODE_BATCH,
    MODE_DEFER,
    MODE_ONLINE,
    PendingEntry,
    PendingQueue,
    PolicyConfig,
    SimEvent,
    Simulation,
    compute_thresholds,
    parse_policy_config,
    request_size,
    run_simulation,
    select_mode,
)
from vdcembed.state import Assignment
from vdcembed.topology import ResourceVector, WorkloadConfig, build_fat_tree


def pend(req, seq=0, expiry=100.0):
    return PendingEntry(req, arrival_seq=seq, expiry=expiry)


class TestThresholds:
    def test_single_request_collapses(self):
        q = PendingQueue()
        q.add(pend(star_request("r0", n_vms=2)))
        thr = compute_thresholds(q)
        assert thr.smallest == thr.largest

    def test_two_requests_split(self):
        q = PendingQueue()
        q.add(pend(star_request("small", n_vms=5, cores=2), seq=0))
        q.add(pend(star_request("large", n_vms=20, cores=2), seq=1))
        thr = compute_thresholds(q)
        assert thr.smallest.servers.cpu_cores == 10
        assert thr.largest.servers.cpu_cores == 40

    def test_empty_queue_signals_idle(self):
        assert compute_thresholds(PendingQueue()) is None


class TestSelectMode:
    def residuals(self, cpu, mem=10**6, swm=10**6, bw=10**6):
        from vdcembed.state import AggregateResiduals

        return AggregateResiduals(ResourceVector(cpu_cores=cpu, memory_mb=mem), swm, bw)

    def thresholds(self, small_cpu, large_cpu):
        q = PendingQueue()
        q.add(pend(star_request("s", n_vms=small_cpu, cores=1, mem=1, vlink_bw=5), 0))
        q.add(pend(star_request("l", n_vms=large_cpu, cores=1, mem=1, vlink_bw=5), 1))
        return compute_thresholds(q)

    def test_branches(self):
        thr = self.thresholds(10, 40)
        assert select_mode(self.residuals(100), thr) == MODE_BATCH
        assert select_mode(self.residuals(39), thr) == MODE_ONLINE
        assert select_mode(self.residuals(9), thr) == MODE_DEFER

    def test_boundary_at_smallest_is_online(self):
        q = PendingQueue()
        small = star_request("s", n_vms=2, cores=5, mem=100, vlink_bw=10)
        big = star_request("l", n_vms=20, cores=5, mem=100, vlink_bw=10)
        q.add(pend(small, 0))
        q.add(pend(big, 1))
        thr = compute_thresholds(q)
        from vdcembed.state import AggregateResiduals

        exact_t1 = AggregateResiduals(
            thr.smallest.servers, thr.smallest.switch_memory, thr.smallest.bandwidth
        )
        assert select_mode(exact_t1, thr) == MODE_ONLINE

    def test_matches_branch_conditions_on_fuzz(self):
        rng = random.Random(808)
        for _ in range(400):
            def triple():
                from vdcembed.scheduler import DemandTriple

                return DemandTriple(
                    ResourceVector(
                        cpu_cores=rng.randint(0, 50), memory_mb=rng.randint(0, 50)
                    ),
                    rng.randint(0, 50),
                    rng.randint(0, 50),
                )

            small, large = sorted(
                [triple(), triple()],
                key=lambda t: (
                    t.servers.cpu_cores + t.servers.memory_mb + t.switch_memory + t.bandwidth
                ),
            )
            from vdcembed.scheduler import Thresholds
            from vdcembed.state import AggregateResiduals

            thr = Thresholds(small, large)
            res_triple = triple()
            res = AggregateResiduals(
                res_triple.servers, res_triple.switch_memory, res_triple.bandwidth
            )
            got = select_mode(res, thr)
            ge_large = res_triple.covers(large)
            ge_small = res_triple.covers(small)
            if ge_large:
                assert got == MODE_BATCH
            elif ge_small:
                assert got == MODE_ONLINE
            else:
                assert got == MODE_DEFER


class TestPriorityOrder:
    def test_ordering_key(self):
        q = PendingQueue()
        urgent = star_request("urgent", n_vms=1, duration=10.0)
        big = star_request("big", n_vms=9, duration=10.0)
        long_lived = star_request("long", n_vms=1, duration=99.0)
        q.add(PendingEntry(urgent, arrival_seq=2, expiry=5.0))
        q.add(PendingEntry(big, arrival_seq=1, expiry=50.0))
        q.add(PendingEntry(long_lived, arrival_seq=0, expiry=50.0))
        ordered = [e.request.id for e in q.ordered()]
        assert ordered[0] == "urgent"  # soonest expiry first
        assert ordered[1] == "big"  # then larger size
        assert ordered[2] == "long"


class TestSimulationSteps:
    def make_sim(self, policy=None, mode="hybrid"):
        net = build_fat_tree(4)
        table = enumerate_paths(net)
        return Simulation(net, table, policy or PolicyConfig(), run_mode=mode)

    def test_departure_restores_capacity(self):
        sim = self.make_sim()
        req = star_request("r0", n_vms=2, duration=5.0)
        sim.process(SimEvent(0.0, 0, "arrival", request=req))
        assert "r0" in sim.state.active
        before = sim.state.residual_vectors()
        sim.process(SimEvent(5.0, 1, "departure", request_id="r0"))
        after = sim.state.residual_vectors()
        assert after == sim._capacity
        assert before != after

    def test_batch_invoked_once_with_prefix(self):
        policy = PolicyConfig(batch_width=8, batch_min_pending=2)
        sim = self.make_sim(policy)
        for i in range(3):
            req = star_request(f"r{i}", n_vms=2)
            sim.queue.add(PendingEntry(req, arrival_seq=i, expiry=100.0))
            sim.status[req.id] = "pending"
        sim._drain(0.0)
        batch_decisions = [r for r in sim.records if r.kind == "decision" and r.get("mode") == "batch"]
        assert len(batch_decisions) == 1
        assert batch_decisions[0].get("batch") == "3"
        assert len(sim.state.active) == 3

    def test_unembeddable_stays_pending(self):
        policy = PolicyConfig(batch_min_pending=1)
        sim = self.make_sim(policy)
        # 9-core vms cannot fit an 8-core server: structurally impossible, rejected on arrival
        impossible = star_request("big", n_vms=1, cores=9)
        sim.process(SimEvent(0.0, 0, "arrival", request=impossible))
        assert sim.status["big"] == "rejected"

    def test_batch_leftover_remains_pending(self):
        # two pending, room for one: batch embeds one, the other stays queued
        from conftest import make_rack_net

        net = make_rack_net(n_servers=1, cores=8)
        table = enumerate_paths(net)
        sim = Simulation(net, table, PolicyConfig(batch_min_pending=1), run_mode="batch-only")
        for i, cores in enumerate((5, 5)):
            req = star_request(f"r{i}", cores=cores, duration=40.0)
            sim.queue.add(PendingEntry(req, arrival_seq=i, expiry=60.0))
            sim.status[req.id] = "pending"
        sim._drain(0.0)
        assert len(sim.state.active) == 1
        assert len(sim.queue) == 1
        leftover = next(iter(sim.queue.entries))
        assert sim.status[leftover] == "pending"

    def test_departure_triggers_pending_reattempt(self):
        from conftest import make_rack_net

        net = make_rack_net(n_servers=1, cores=8)
        table = enumerate_paths(net)
        sim = Simulation(net, table, PolicyConfig(), run_mode="online-only")
        first = star_request("first", cores=8, duration=10.0)
        sim.process(SimEvent(0.0, 0, "arrival", request=first))
        assert "first" in sim.state.active
        blocked = star_request("blocked", cores=8, duration=10.0)
        sim.process(SimEvent(1.0, 1, "arrival", request=blocked))
        assert sim.status["blocked"] == "pending"
        sim.process(SimEvent(10.0, 2, "departure", request_id="first"))
        assert "blocked" in sim.state.active
        assert sim.status["blocked"] == "accepted"

    def test_failure_displaces_exactly_hosted_vms(self):
        sim = self.make_sim()
        req = star_request("r0", n_vms=2, duration=90.0)
        sim.state.commit(
            req,
            Assignment(
                "r0",
                {"vm0": "s0", "vm1": "s0"},
                {"vs0": "e0_0"},
                {"vl0": ("e0_0", "s0", 0), "vl1": ("e0_0", "s0", 0)},
            ),
        )
        sim.status["r0"] = "accepted"
        sim.accept_order.append("r0")
        sim.process(SimEvent(1.0, 0, "failure", elements=("s0",)))
        migrations = [r for r in sim.records if r.kind == "migration"]
        vm_moves = [r for r in migrations if r.get("kind") == "vm"]
        assert sorted(m.get("element") for m in vm_moves) == ["vm0", "vm1"]
        assert all(m.get("old") == "s0" and m.get("new") == "s1" for m in vm_moves)
        vlink_moves = [r for r in migrations if r.get("kind") == "vlink"]
        assert len(vlink_moves) == 2
        sim.state.audit()

    def test_scale_up_in_place_then_relocation(self):
        sim = self.make_sim()
        req = star_request("r0", n_vms=1, cores=4, duration=90.0)
        sim.state.commit(
            req, Assignment("r0", {"vm0": "s0"}, {"vs0": "e0_0"}, {"vl0": ("e0_0", "s0", 0)})
        )
        sim.status["r0"] = "accepted"
        sim.accept_order.append("r0")
        filler = star_request("fill", n_vms=1, cores=3, duration=90.0)
        sim.state.commit(
            filler, Assignment("fill", {"vm0": "s0"}, {"vs0": "e0_0"}, {"vl0": ("e0_0", "s0", 0)})
        )
        # +1 core still fits on s0 (4 + 1 + 3 = 8)
        sim.process(
            SimEvent(
                1.0, 1, "scale_up", request_id="r0",
                deltas=(("vm0", ResourceVector(cpu_cores=1)),),
            )
        )
        assert sim.records[-2].kind == "scale_up"
        assert sim.records[-2].get("outcome") == "in-place"
        assert sim.state.requests["r0"].vms["vm0"].demand.cpu_cores == 5
        # another +1 overflows s0; the vm must move to the rack sibling s1
        sim.process(
            SimEvent(
                2.0, 2, "scale_up", request_id="r0",
                deltas=(("vm0", ResourceVector(cpu_cores=1)),),
            )
        )
        outcome = next(r for r in reversed(sim.records) if r.kind == "scale_up")
        assert outcome.get("outcome") == "relocated"
        assert sim.state.active["r0"].vm_map["vm0"] == "s1"
        assert sim.state.requests["r0"].vms["vm0"].demand.cpu_cores == 6
        assert sim.state.requests["r0"].locality is None  # pins were synthetic
        sim.state.audit()

    def test_clock_rejects_past_events(self):
        sim = self.make_sim()
        sim.process(SimEvent(5.0, 0, "arrival", request=star_request("r0")))
        from vdcembed.errors import InvalidParameterError

        with pytest.raises(InvalidParameterError):
            sim.process(SimEvent(1.0, 1, "arrival", request=star_request("r1")))

    def test_malformed_event_leaves_clock_unchanged(self):
        sim = self.make_sim()
        sim.process(SimEvent(5.0, 0, "arrival", request=star_request("r0")))
        from vdcembed.errors import InvalidParameterError

        with pytest.raises(InvalidParameterError):
            sim.process(SimEvent(9.0, 1, "eclipse"))
        assert sim.clock == 5.0

    def test_pending_expires_into_rejection(self):
        from conftest import make_rack_net

        net = make_rack_net(n_servers=1, cores=8)
        table = enumerate_paths(net)
        sim = Simulation(net, table, PolicyConfig(patience=20.0), run_mode="online-only")
        sim.process(SimEvent(0.0, 0, "arrival", request=star_request("r0", cores=8, duration=90.0)))
        sim.process(SimEvent(1.0, 1, "arrival", request=star_request("r1", cores=8, duration=90.0)))
        assert sim.status["r1"] == "pending"
        # any later wake-up past the deadline expires it
        sim.process(SimEvent(30.0, 2, "arrival", request=star_request("r2", cores=1, duration=5.0)))
        assert sim.status["r1"] == "expired"
        rejects = [r for r in sim.records if r.kind == "reject"]
        assert any(r.get("request") == "r1" and r.get("reason") == "expired" for r in rejects)


class TestRun:
    def setup_method(self):
        self.net = build_fat_tree(4)
        self.table = enumerate_paths(self.net)
        self.policy = PolicyConfig(batch_width=3, solver_node_limit=400, remap_limit=3)

    def workload(self, lam=4.0, horizon=200.0, seed=11):
        return WorkloadConfig(
            vm_count=(2, 8),
            vswitch_count=(2, 3),
            arrival_rate=lam,
            horizon=horizon,
            seed=seed,
        )

    def test_zero_arrivals(self):
        rec = run_simulation(
            self.net, self.workload(lam=0.0), self.policy, table=self.table
        )
        rep = aggregate(rec)
        assert rep.rows[0].arrivals == 0
        assert rep.rows[0].rate is None
        assert rep.rows[0].vm_migrations == 0

    def test_single_tiny_request_accepted(self):
        cfg = self.workload(lam=1.0, horizon=120.0, seed=5)
        rec = run_simulation(self.net, cfg, self.policy, table=self.table)
        rep = aggregate(rec)
        assert rep.rows[0].arrivals >= 1
        assert rep.rows[0].rate == 1.0

    def test_same_seed_identical_trace(self):
        cfg = self.workload()
        a = run_simulation(self.net, cfg, self.policy, table=self.table)
        b = run_simulation(self.net, cfg, self.policy, table=self.table)
        assert serialize_trace(a) == serialize_trace(b)

    def test_clock_monotone_and_identity(self):
        for mode in ("hybrid", "batch-only", "online-only"):
            rec = run_simulation(
                self.net,
                self.workload(lam=8.0, horizon=250.0, seed=23),
                self.policy,
                run_mode=mode,
                table=self.table,
                audit_every=25,
            )
            times = [r.time for r in rec]
            assert times == sorted(times)
            arrivals = {r.get("request") for r in rec if r.kind == "arrival"}
            accepted = {r.get("request") for r in rec if r.kind == "accept"}
            rejected = {r.get("request") for r in rec if r.kind == "reject"}
            assert accepted.isdisjoint(rejected)
            assert accepted | rejected <= arrivals
            # everything else is still pending at the horizon: fine, but the
            # three disjoint outcome bins plus pending must cover all arrivals
            pending = arrivals - accepted - rejected
            assert len(arrivals) == len(accepted) + len(rejected) + len(pending)

    def test_failure_event_inside_full_run(self):
        from vdcembed.scheduler import SimEvent

        cfg = self.workload(lam=6.0, horizon=200.0, seed=51)
        failure = SimEvent(time=80.0, seq=0, kind="failure", elements=("s0", "l1"))
        rec = run_simulation(
            self.net,
            cfg,
            self.policy,
            table=self.table,
            extra_events=(failure,),
            audit_every=1,
        )
        kinds = {r.kind for r in rec}
        assert "failure" in kinds
        # after the failure no later acceptance may touch the dead elements
        failed_at = next(r.seq for r in rec if r.kind == "failure")
        for r in rec:
            if r.kind == "migration" and r.seq > failed_at:
                assert r.get("new") not in ("s0", "l1")

    def test_migrations_match_state_history(self):
        rec = run_simulation(
            self.net,
            self.workload(lam=9.0, horizon=300.0, seed=37),
            self.policy,
            run_mode="batch-only",
            table=self.table,
            audit_every=20,
        )
        migs = [r for r in rec if r.kind == "migration" and r.get("kind") == "vm"]
        for m in migs:
            assert m.get("old") != m.get("new")


class TestPolicyConfig:
    def test_parse_round_trip(self):
        text = "f=1/2\nswap_ceiling=4\nbatch_width=6\npatience=30\nvm_move_weighting=false\n"
        pol = parse_policy_config(text)
        from fractions import Fraction

        assert pol.switch_penalty_divisor == Fraction(1, 2)
        assert pol.swap_ceiling == 4
        assert pol.batch_width == 6
        assert pol.patience == 30.0
        assert pol.vm_move_weighting is False

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_policy_config("nonsense=1\n")

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            parse_policy_config("f=0\n")
        with pytest.raises(ConfigError):
            parse_policy_config("patience=-1\n")

    def test_hash_stable(self):
        assert PolicyConfig().policy_hash() == PolicyConfig().policy_hash()
        assert PolicyConfig().policy_hash() != PolicyConfig(batch_width=2).policy_hash()
