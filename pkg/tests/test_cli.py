"""CLI subcommands, exit codes, and file outputs."""

import os

import pytest

from vdcembed.cli import main
from vdcembed.metrics import read_acceptance_csv
from vdcembed.topology import load_requests, load_substrate


WORKLOAD = """\
vm_count=2:6
vswitch_count=2:3
arrival_rate=4
horizon=120
seed=9
"""

POLICY = """\
f=2
batch_width=3
solver_node_limit=400
remap_limit=3
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "workload.cfg").write_text(WORKLOAD)
    (tmp_path / "policy.cfg").write_text(POLICY)
    return tmp_path


class TestGenTopology:
    def test_k4(self, workdir, capsys):
        assert main(["gen-topology", "--k", "4", "--out", "dc.txt"]) == 0
        net = load_substrate((workdir / "dc.txt").read_text())
        assert len(net.servers) == 16
        assert len(net.switches) == 20

    def test_odd_k_exits_one(self, workdir, capsys):
        assert main(["gen-topology", "--k", "3", "--out", "dc.txt"]) == 1
        assert "even" in capsys.readouterr().err

    def test_rerun_identical(self, workdir, capsys):
        assert main(["gen-topology", "--k", "6", "--out", "dc.txt"]) == 0
        first = (workdir / "dc.txt").read_text()
        main(["gen-topology", "--k", "6", "--out", "dc.txt"])
        assert (workdir / "dc.txt").read_text() == first


class TestGenWorkload:
    def test_deterministic(self, workdir):
        assert main(["gen-workload", "--config", "workload.cfg", "--out", "a.req"]) == 0
        assert main(["gen-workload", "--config", "workload.cfg", "--out", "b.req"]) == 0
        assert (workdir / "a.req").read_text() == (workdir / "b.req").read_text()
        reqs = load_requests((workdir / "a.req").read_text())
        assert reqs
        assert all(r.arrival_time <= 120 for r in reqs)

    def test_zero_horizon_empty(self, workdir):
        (workdir / "zero.cfg").write_text("horizon=0\nseed=1\n")
        assert main(["gen-workload", "--config", "zero.cfg", "--out", "z.req"]) == 0
        assert load_requests((workdir / "z.req").read_text()) == []

    def test_missing_config(self, workdir, capsys):
        assert main(["gen-workload", "--config", "nope.cfg", "--out", "x.req"]) == 1
        assert "nope.cfg" in capsys.readouterr().err


class TestRun:
    def test_run_and_determinism(self, workdir):
        main(["gen-topology", "--k", "4", "--out", "dc.txt"])
        args = [
            "run",
            "--substrate", "dc.txt",
            "--workload", "workload.cfg",
            "--policy", "policy.cfg",
            "--mode", "hybrid",
            "--seed", "3",
            "--out", "out1",
        ]
        assert main(args) == 0
        args[-1] = "out2"
        assert main(args) == 0
        for name in ("acceptance.csv", "migrations.csv", "utilization.csv", "trace.log"):
            a = (workdir / "out1" / name).read_bytes()
            b = (workdir / "out2" / name).read_bytes()
            assert a == b, name

    def test_lambda_sweep_rows(self, workdir):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        (workdir / "tiny.cfg").write_text(
            "vm_count=1:2\nvswitch_count=1:1\nhorizon=60\nseed=2\narrival_rate=2\n"
        )
        code = main(
            [
                "run",
                "--substrate", "dc2.txt",
                "--workload", "tiny.cfg",
                "--mode", "online-only",
                "--lambdas", "1:10",
                "--out", "sweep",
            ]
        )
        assert code == 0
        rows = read_acceptance_csv((workdir / "sweep" / "acceptance.csv").read_text())
        assert [r[0] for r in rows] == [float(v) for v in range(1, 11)]

    def test_baseline_modes(self, workdir):
        main(["gen-topology", "--k", "4", "--out", "dc.txt"])
        for mode in ("batch-only", "online-only"):
            code = main(
                [
                    "run",
                    "--substrate", "dc.txt",
                    "--workload", "workload.cfg",
                    "--policy", "policy.cfg",
                    "--mode", mode,
                    "--seed", "5",
                    "--out", f"out_{mode}",
                ]
            )
            assert code == 0
            assert (workdir / f"out_{mode}" / "acceptance.csv").exists()

    def test_env_override_for_out(self, workdir, monkeypatch):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        (workdir / "tiny.cfg").write_text(
            "vm_count=1:1\nvswitch_count=1:1\nhorizon=30\nseed=2\narrival_rate=2\n"
        )
        monkeypatch.setenv("VDCEMBED_OUT", str(workdir / "env_out"))
        main(
            [
                "run",
                "--substrate", "dc2.txt",
                "--workload", "tiny.cfg",
                "--mode", "online-only",
                "--out", "ignored",
            ]
        )
        assert (workdir / "env_out" / "acceptance.csv").exists()
        assert not (workdir / "ignored").exists()


class TestSolve:
    def write_requests(self, workdir, text):
        (workdir / "reqs.txt").write_text(text)

    def test_trivial_fit(self, workdir, capsys):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        self.write_requests(
            workdir,
            "requests 1\n"
            "request r0\n"
            "vm vm0 1 256\n"
            "vswitch vs0 edge 10\n"
            "vlink vl0 vs0 vm0 5\n"
            "meta 0.0 10.0 -\n",
        )
        code = main(
            ["solve", "--substrate", "dc2.txt", "--requests", "reqs.txt", "--out", "sol.txt"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "objective 1.0000" in out
        assert "1 embedded of 1" in out
        sol_text = (workdir / "sol.txt").read_text()
        assert "embedded r0 1" in sol_text

    def test_infeasible_is_valid_answer(self, workdir, capsys):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        self.write_requests(
            workdir,
            "requests 1\n"
            "request r0\n"
            "vm vm0 99 256\n"
            "vswitch vs0 edge 10\n"
            "vlink vl0 vs0 vm0 5\n"
            "meta 0.0 10.0 -\n",
        )
        code = main(["solve", "--substrate", "dc2.txt", "--requests", "reqs.txt"])
        out = capsys.readouterr().out
        assert code == 0
        assert "0 embedded of 1" in out

    def test_budget_exhausted_exit_code(self, workdir, capsys):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        self.write_requests(
            workdir,
            "requests 1\n"
            "request r0\n"
            "vm vm0 1 256\n"
            "vswitch vs0 edge 10\n"
            "vlink vl0 vs0 vm0 5\n"
            "meta 0.0 10.0 -\n",
        )
        code = main(
            [
                "solve",
                "--substrate", "dc2.txt",
                "--requests", "reqs.txt",
                "--node-limit", "0",
            ]
        )
        assert code == 3


class TestValidate:
    def test_valid_inputs(self, workdir, capsys):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        assert main(["validate", "--substrate", "dc2.txt"]) == 0
        assert "ok" in capsys.readouterr().out

    def test_capacity_violation_listed(self, workdir, capsys):
        main(["gen-topology", "--k", "2", "--out", "dc2.txt"])
        (workdir / "reqs.txt").write_text(
            "requests 1\n"
            "request r0\n"
            "vm vm0 9 256\n"
            "vswitch vs0 edge 10\n"
            "vlink vl0 vs0 vm0 5\n"
            "meta 0.0 10.0 -\n"
        )
        (workdir / "asg.txt").write_text(
            "assignments 1\n"
            "embedded r0 1\n"
            "assign vm r0 vm0 s0\n"
            "assign vswitch r0 vs0 e0_0\n"
            "assign vlink r0 vl0 e0_0 s0 0\n"
        )
        code = main(
            [
                "validate",
                "--substrate", "dc2.txt",
                "--requests", "reqs.txt",
                "--assignment", "asg.txt",
            ]
        )
        err = capsys.readouterr().err
        assert code == 2
        assert "server-capacity" in err and "s0" in err

    def test_missing_file(self, workdir, capsys):
        assert main(["validate", "--substrate", "ghost.txt"]) == 1
        assert "ghost.txt" in capsys.readouterr().err
