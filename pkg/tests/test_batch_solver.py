"""Batch solver: model shape, exactness against exhaustive enumeration, plans."""

import random
from fractions import Fraction

import pytest

from conftest import chain_request, make_rack_net, star_request
from oracles import best_joint_objective, hop_distance_bfs, recheck_embedding
from vdcembed.batch_solver import (
    KIND_W,
    KIND_X,
    KIND_Y,
    KIND_Z,
    SolveBudget,
    build_mip,
    extract_assignments,
    solve_exact,
)
from vdcembed.errors import InvalidParameterError, StaleSnapshotError
from vdcembed.paths import enumerate_paths
from vdcembed.state import EmbeddingState


def fresh_state(net):
    return EmbeddingState(net, enumerate_paths(net))


def apply_plan(state, plan):
    for rid in plan.releases:
        state.release(rid)
    for req, a in plan.commits:
        state.commit(req, a)


class TestBuildMip:
    def test_variable_counts_single_star_on_k2(self, k2_state):
        req = star_request("r0", n_vms=1)
        model = build_mip(k2_state, [req])
        assert len(model.vars_of_kind(KIND_Z)) == 1
        assert len(model.vars_of_kind(KIND_W)) == 2  # every server
        assert len(model.vars_of_kind(KIND_X)) == 2  # edge switches only
        assert len(model.vars_of_kind(KIND_Y)) == 2  # one per rack adjacency
        assert model.num_constraints > 0

    def test_zero_latency_bound_forces_unembedded(self, k2_state):
        req = chain_request("r0", n_vswitches=2, vms_per_switch=1, latency_bound=0)
        model = build_mip(k2_state, [req])
        assert model.vars_of_kind(KIND_Y) == []
        sol = solve_exact(model)
        assert sol.optimal
        assert sol.embedded["r0"] is None
        assert sol.objective == 0

    def test_pinning_constraint_verbatim(self, k2_state):
        req = star_request("r0", locality={"vm0": frozenset({"s1"})})
        model = build_mip(k2_state, [req])
        w_vars = model.vars_of_kind(KIND_W)
        assert len(w_vars) == 1
        assert model.vars[w_vars[0]].host_a == "s1"
        # the placement row degenerates to w - z = 0
        row = model.row_label.index("place_vm[r0/vm0]")
        assert sorted(model.row_coefs[row]) == [-1, 1]
        assert model.row_rhs[row] == 0 and model.row_eq[row]
        sol = solve_exact(model)
        assert sol.embedded["r0"].vm_map["vm0"] == "s1"

    def test_empty_candidates_rejected(self, k2_state):
        with pytest.raises(InvalidParameterError):
            build_mip(k2_state, [])

    def test_nonpositive_divisor_rejected(self, k2_state):
        with pytest.raises(InvalidParameterError):
            build_mip(k2_state, [star_request("r0")], switch_penalty_divisor=0)

    def test_export_round_trip_evaluation(self, k2_state):
        req = star_request("r0", n_vms=2)
        model = build_mip(k2_state, [req])
        text = model.export_text()
        lines = text.strip().splitlines()
        assert lines[0].startswith("maximize: ")
        assert lines[-1].startswith("binary: ")
        # every constraint line parses and the solved point satisfies it
        sol = solve_exact(model)
        ones = {
            model.vars[i].name
            for i in range(model.num_vars)
            if _var_value(model, sol, i) == 1
        }
        for line in lines[1:-1]:
            label, _, body = line.partition(": ")
            tokens = body.split()
            sense_idx = next(i for i, t in enumerate(tokens) if t in ("<=", "="))
            rhs = int(tokens[sense_idx + 1])
            total = Fraction(0)
            for coef_tok, name in zip(tokens[:sense_idx:2], tokens[1:sense_idx:2]):
                if name in ones:
                    total += Fraction(coef_tok)
            if tokens[sense_idx] == "=":
                assert total == rhs, label
            else:
                assert total <= rhs, label


def _var_value(model, sol, idx):
    info = model.vars[idx]
    a = sol.embedded.get(info.request_id)
    if info.kind == KIND_Z:
        return 1 if a is not None else 0
    if a is None:
        return 0
    if info.kind == KIND_W:
        return 1 if a.vm_map.get(info.element_id) == info.host_a else 0
    if info.kind == KIND_X:
        return 1 if a.vswitch_map.get(info.element_id) == info.host_a else 0
    return 1 if a.vlink_map.get(info.element_id) == (info.host_a, info.host_b, info.path_n) else 0


class TestSolveExact:
    def test_trivial_fit(self, k2_state):
        req = star_request("r0")
        sol = solve_exact(build_mip(k2_state, [req]))
        assert sol.status == "optimal" and sol.optimal
        assert sol.objective == 1
        plan = extract_assignments(sol, k2_state)
        apply_plan(k2_state, plan)
        k2_state.audit()

    def test_two_requests_one_server(self):
        net = make_rack_net(n_servers=1, cores=8)
        state = fresh_state(net)
        reqs = [star_request("r0", cores=5), star_request("r1", cores=5)]
        sol = solve_exact(build_mip(state, reqs))
        assert sol.optimal
        assert sol.objective == 1
        placed = [rid for rid, a in sol.embedded.items() if a is not None]
        assert len(placed) == 1

    def test_budget_zero_gives_no_solution(self, k2_state):
        model = build_mip(k2_state, [star_request("r0")])
        sol = solve_exact(model, SolveBudget(node_limit=0))
        assert sol.status == "no-solution"
        assert sol.objective is None and not sol.optimal

    def test_deterministic(self, k2_state):
        reqs = [star_request("r0", n_vms=2), star_request("r1", n_vms=2, cores=2)]
        sols = [solve_exact(build_mip(k2_state, reqs)) for _ in range(2)]
        assert sols[0].embedded == sols[1].embedded
        assert sols[0].nodes == sols[1].nodes
        assert sols[0].objective == sols[1].objective

    def _random_tiny_request(self, rng, rid):
        shape = rng.choice(["star", "star", "chain"])
        if shape == "star":
            return star_request(
                rid,
                n_vms=rng.randint(1, 2),
                cores=rng.randint(1, 5),
                mem=rng.choice([256, 8000, 12000]),
                vswitch_mem=rng.randint(5, 60),
                vlink_bw=rng.choice([10, 400, 800]),
            )
        return chain_request(
            rid,
            n_vswitches=2,
            vms_per_switch=1,
            cores=rng.randint(1, 5),
            vswitch_mem=rng.randint(5, 60),
            vlink_bw=rng.choice([10, 400, 800]),
            latency_bound=rng.choice([None, None, 4, 2]),
        )

    def test_matches_enumeration_oracle(self, k2_net, k2_table):
        rng = random.Random(20240)
        for trial in range(40):
            state = EmbeddingState(k2_net, k2_table)
            reqs = [self._random_tiny_request(rng, f"r{i}") for i in range(rng.randint(1, 3))]
            model = build_mip(state, reqs)
            sol = solve_exact(model)
            assert sol.optimal, f"trial {trial} not exhausted"
            expect = best_joint_objective(k2_net, k2_table, reqs)
            assert sol.objective == expect, f"trial {trial}"
            plan = extract_assignments(sol, state)
            apply_plan(state, plan)
            placed = [(state.requests[r], state.active[r]) for r in state.active]
            assert recheck_embedding(k2_net, k2_table, placed) == []

    def test_monotone_in_candidates(self, k2_net, k2_table):
        rng = random.Random(77)
        for trial in range(10):
            state = EmbeddingState(k2_net, k2_table)
            reqs = [self._random_tiny_request(rng, f"r{i}") for i in range(3)]
            prev = None
            for upto in range(1, 4):
                sol = solve_exact(build_mip(state, reqs[:upto]))
                assert sol.optimal
                if prev is not None:
                    assert sol.objective >= prev
                prev = sol.objective

    def test_linearization_fidelity(self, k2_state):
        reqs = [chain_request("r0", n_vswitches=2, vms_per_switch=1)]
        model = build_mip(k2_state, reqs)
        sol = solve_exact(model)
        a = sol.embedded["r0"]
        assert a is not None
        req = reqs[0]
        # for every vlink and candidate host pair, sum_n y == product of the
        # endpoint indicators when recomputed nonlinearly from the solution
        for i in range(model.num_vars):
            info = model.vars[i]
            if info.kind != KIND_Y:
                continue
            vl = req.vlinks[info.element_id]
            end_a = (
                1 if a.host_of(vl.a) == info.host_a else 0
            )
            end_b = 1 if a.host_of(vl.b) == info.host_b else 0
            y_val = _var_value(model, sol, i)
            if y_val == 1:
                assert end_a * end_b == 1
        for vl_id, vl in req.vlinks.items():
            pair_sums = {}
            for i in range(model.num_vars):
                info = model.vars[i]
                if info.kind == KIND_Y and info.element_id == vl_id:
                    key = (info.host_a, info.host_b)
                    pair_sums[key] = pair_sums.get(key, 0) + _var_value(model, sol, i)
            for (ha, hb), total in pair_sums.items():
                product = (1 if a.host_of(vl.a) == ha else 0) * (
                    1 if a.host_of(vl.b) == hb else 0
                )
                assert total == product, (vl_id, ha, hb)


class TestMigrationAwareness:
    def test_stay_put_when_room(self, k2_net, k2_table):
        state = EmbeddingState(k2_net, k2_table)
        r0 = star_request("r0", cores=2)
        sol0 = solve_exact(build_mip(state, [r0]))
        apply_plan(state, extract_assignments(sol0, state))
        old = state.active["r0"]

        r1 = star_request("r1", cores=2)
        sol = solve_exact(build_mip(state, [r1], remappable=["r0"]))
        assert sol.objective == 2  # both embedded, nobody moved
        assert sol.migrations == []
        assert sol.embedded["r0"] == old

    def test_migration_unlocks_placement_and_is_priced(self):
        # two servers under one switch; r0 splits across both, r1 needs a full server
        net = make_rack_net(n_servers=2, cores=4)
        state = fresh_state(net)
        # heterogeneous memories make the light vm cheap to move, so migrating
        # it is strictly better than leaving the newcomer out
        from vdcembed.topology import ResourceVector, Vm

        r0 = star_request(
            "r0",
            n_vms=2,
            cores=2,
            locality={"vm0": frozenset({"s0"}), "vm1": frozenset({"s1"})},
        )
        vms = dict(r0.vms)
        vms["vm0"] = Vm("vm0", ResourceVector(cpu_cores=2, memory_mb=128))
        vms["vm1"] = Vm("vm1", ResourceVector(cpu_cores=2, memory_mb=8192))
        object.__setattr__(r0, "vms", vms)
        sol0 = solve_exact(build_mip(state, [r0]))
        apply_plan(state, extract_assignments(sol0, state))
        assert len(set(state.active["r0"].vm_map.values())) == 2
        # drop the pins so the re-solve may consolidate r0
        unpinned = star_request("r0", n_vms=2, cores=2)
        object.__setattr__(unpinned, "vms", vms)
        state.requests["r0"] = unpinned
        r1 = star_request("r1", n_vms=1, cores=4)
        sol = solve_exact(build_mip(state, [r1], remappable=["r0"]))
        assert sol.embedded["r1"] is not None
        assert len(sol.migrations) == 1
        move = sol.migrations[0]
        assert move.kind == "vm"
        assert move.element_id == "vm0"  # the light one moves
        assert move.hops == hop_distance_bfs(net, move.old_host, move.new_host)
        # objective identity: embedded count minus priced moves
        expect = Fraction(2)
        diameter = net.diameter()
        for mv in sol.migrations:
            weight = Fraction(
                state.requests["r0"].vms[mv.element_id].demand.memory_mb,
                max(
                    vm.demand.memory_mb for vm in state.requests["r0"].vms.values()
                ),
            )
            expect -= weight * Fraction(mv.hops, diameter)
        assert sol.objective == expect

    def test_matches_oracle_with_migration_context(self, k2_net, k2_table):
        rng = random.Random(3999)
        for trial in range(12):
            state = EmbeddingState(k2_net, k2_table)
            r0 = star_request("r0", n_vms=rng.randint(1, 2), cores=rng.randint(1, 4))
            sol0 = solve_exact(build_mip(state, [r0]))
            if sol0.embedded["r0"] is None:
                continue
            apply_plan(state, extract_assignments(sol0, state))
            old = state.active["r0"]
            r1 = star_request("r1", n_vms=1, cores=rng.randint(1, 6))
            f = Fraction(2)
            model = build_mip(state, [r1], remappable=["r0"], switch_penalty_divisor=f)
            sol = solve_exact(model)
            assert sol.optimal
            max_mem = max(vm.demand.memory_mb for vm in r0.vms.values())
            weights = {
                vm_id: Fraction(vm.demand.memory_mb, max_mem)
                for vm_id, vm in r0.vms.items()
            }
            expect = best_joint_objective(
                k2_net, k2_table, [r1, r0], migration={"r0": (old, weights)}, f=f
            )
            assert sol.objective == expect, f"trial {trial}"

    def test_unembedded_active_requeued(self):
        # one server; with the 5-core active in place neither 4-core candidate
        # fits, without it both do, so dropping it strictly wins
        net = make_rack_net(n_servers=1, cores=8)
        state = fresh_state(net)
        r0 = star_request("r0", cores=5)
        apply_plan(state, extract_assignments(solve_exact(build_mip(state, [r0])), state))
        r1 = star_request("r1", cores=4)
        r2 = star_request("r2", cores=4)
        sol = solve_exact(build_mip(state, [r1, r2], remappable=["r0"]))
        assert sol.optimal
        assert sol.embedded["r0"] is None  # dropping one to embed two wins
        plan = extract_assignments(sol, state)
        assert plan.requeue == ["r0"]
        apply_plan(state, plan)
        assert set(state.active) == {"r1", "r2"}
        state.audit()

    def test_stale_snapshot_detected(self, k2_state):
        model = build_mip(k2_state, [star_request("r0")])
        sol = solve_exact(model)
        k2_state.commit(
            star_request("other"),
            sol.embedded["r0"].__class__(
                "other", {"vm0": "s1"}, {"vs0": "e1_0"}, {"vl0": ("e1_0", "s1", 0)}
            ),
        )
        with pytest.raises(StaleSnapshotError):
            extract_assignments(sol, k2_state)
