"""End-to-end CLI behavior: subcommands, exit codes, determinism."""

import json

import pytest

from mannafair.cli import main
from mannafair.harness import parse_certificate, parse_instance


def run(argv):
    return main(argv)


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert (
        run(
            [
                "gen", "--family", "random", "--n", "3", "--m", "5",
                "--seed", "3", "-o", str(path),
            ]
        )
        == 0
    )
    return path


class TestGen:
    def test_families(self, tmp_path):
        for args in (
            ["--family", "identical-chores", "--n", "4"],
            ["--family", "paired-goods", "--n", "4"],
            ["--family", "partition", "--set", "1,1,2,4"],
            ["--family", "random", "--n", "2", "--m", "4", "--seed", "1"],
        ):
            out = tmp_path / "out.json"
            assert run(["gen", *args, "-o", str(out)]) == 0
            parse_instance(out.read_text())

    def test_partition_allocation_output(self, tmp_path):
        inst_out = tmp_path / "p.json"
        alloc_out = tmp_path / "pa.json"
        assert (
            run(
                [
                    "gen", "--family", "partition", "--set", "1,1",
                    "-o", str(inst_out), "--alloc-out", str(alloc_out),
                ]
            )
            == 0
        )
        doc = json.loads(alloc_out.read_text())
        assert doc["bundles"][0] == [1, 2]

    def test_missing_parameters_is_input_error(self, tmp_path):
        out = tmp_path / "x.json"
        assert run(["gen", "--family", "random", "-o", str(out)]) == 3

    def test_odd_partition_sum_is_input_error(self, tmp_path):
        out = tmp_path / "x.json"
        assert (
            run(["gen", "--family", "partition", "--set", "1,2", "-o", str(out)])
            == 3
        )


class TestSolveAndVerify:
    def test_efr_pipeline(self, tmp_path, inst_file):
        cert = tmp_path / "cert.json"
        assert (
            run(["solve", "--algo", "efr", "-i", str(inst_file), "-o", str(cert)])
            == 0
        )
        assert run(["verify", "--cert", str(cert), "-i", str(inst_file)]) == 0

    def test_ef1_then_decide_and_check_po(self, tmp_path, inst_file):
        alloc = tmp_path / "alloc.json"
        assert (
            run(["solve", "--algo", "ef1", "-i", str(inst_file), "-o", str(alloc)])
            == 0
        )
        assert (
            run(["decide-efr", "-i", str(inst_file), "--alloc", str(alloc), "--k", "2"])
            == 0
        )
        assert run(["check-po", "-i", str(inst_file), "--alloc", str(alloc)]) in (0, 1)

    def test_goods_solver_rejects_mixed_input(self, tmp_path, inst_file):
        cert = tmp_path / "cert.json"
        assert (
            run(["solve", "--algo", "goods", "-i", str(inst_file), "-o", str(cert)])
            == 3
        )

    def test_goods_solver_with_extension(self, tmp_path):
        inst = tmp_path / "goods.json"
        cert = tmp_path / "cert.json"
        run(
            [
                "gen", "--family", "random", "--n", "4", "--m", "6",
                "--seed", "5", "--chore-prob", "0", "-o", str(inst),
            ]
        )
        assert (
            run(
                [
                    "solve", "--algo", "goods", "--extend-round-robin",
                    "-i", str(inst), "-o", str(cert),
                ]
            )
            == 0
        )
        assert run(["verify", "--cert", str(cert), "-i", str(inst)]) == 0

    def test_invalid_certificate_exits_one(self, tmp_path, inst_file):
        cert = tmp_path / "cert.json"
        run(["solve", "--algo", "efr", "-i", str(inst_file), "-o", str(cert)])
        doc = json.loads(cert.read_text())
        doc["realloc_set"] = []
        if doc["witnesses"][0] == doc["base"]:
            # make at least one witness differ from the base
            doc["witnesses"][0][0], doc["witnesses"][0][1] = (
                doc["witnesses"][0][1],
                doc["witnesses"][0][0],
            )
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert run(["verify", "--cert", str(bad), "-i", str(inst_file)]) == 1

    def test_fixed_n_solver(self, tmp_path):
        inst = tmp_path / "two.json"
        cert = tmp_path / "cert.json"
        run(
            [
                "gen", "--family", "random", "--n", "2", "--m", "4",
                "--seed", "9", "-o", str(inst),
            ]
        )
        assert (
            run(["solve", "--algo", "fixed-n", "-i", str(inst), "-o", str(cert)])
            == 0
        )
        parsed = parse_certificate(
            cert.read_text(), parse_instance(inst.read_text())
        )
        assert len(parsed.realloc_set) <= 1


class TestExitCodes:
    def test_missing_file_is_input_error(self, tmp_path):
        assert (
            run(
                [
                    "solve", "--algo", "efr",
                    "-i", str(tmp_path / "nope.json"),
                    "-o", str(tmp_path / "out.json"),
                ]
            )
            == 3
        )

    def test_malformed_json_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert (
            run(
                [
                    "solve", "--algo", "efr", "-i", str(bad),
                    "-o", str(tmp_path / "out.json"),
                ]
            )
            == 3
        )

    def test_budget_exceeded_exit(self, tmp_path, inst_file):
        alloc = tmp_path / "alloc.json"
        run(["solve", "--algo", "ef1", "-i", str(inst_file), "-o", str(alloc)])
        assert (
            run(
                [
                    "decide-efr", "-i", str(inst_file), "--alloc", str(alloc),
                    "--k", "5", "--budget", "1",
                ]
            )
            == 2
        )

    def test_usage_error_maps_to_input_error(self):
        assert run(["solve", "--algo", "efr"]) == 3
        assert run(["bogus"]) == 3


class TestDeterminism:
    def test_all_commands_byte_identical_on_rerun(self, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        first.mkdir()
        second.mkdir()
        for base in (first, second):
            inst = base / "inst.json"
            run(
                [
                    "gen", "--family", "random", "--n", "3", "--m", "5",
                    "--seed", "17", "-o", str(inst),
                ]
            )
            for algo in ("ef1", "efr"):
                run(
                    [
                        "solve", "--algo", algo, "-i", str(inst),
                        "-o", str(base / f"{algo}.json"),
                    ]
                )
            run(["perturb", "-i", str(inst), "-o", str(base / "pert.json")])
        for name in ("inst.json", "ef1.json", "efr.json", "pert.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
