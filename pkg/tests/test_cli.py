import json
import subprocess
import sys
from pathlib import Path

from posetlump.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestPosetCommands:
    def test_check_echoes_canonical_form(self, capsys):
        code, out = run_cli(capsys, "poset", "check", str(DATA / "fibered6.json"))
        assert code == 0
        assert out["n"] == 6
        assert [1, 2] in out["covers"]

    def test_fibered_recipe(self, capsys):
        code, out = run_cli(
            capsys, "poset", "fibered", str(DATA / "fibered6.json"), "--remove", "2,3,4"
        )
        assert code == 0
        assert out == {
            "fibered": True,
            "S": [5, 6],
            "fibers": {"5": [2, 3], "6": [4]},
            "chains": {"2": [2, 5], "3": [3, 5], "4": [4, 6]},
        }

    def test_fibered_negative(self, capsys):
        code, out = run_cli(
            capsys, "poset", "fibered", str(DATA / "fibered6.json"), "--remove", "1,2,3,4"
        )
        assert code == 0
        assert out["fibered"] is False
        assert out["candidates"] == [5, 6]

    def test_antichains(self, capsys):
        code, out = run_cli(capsys, "poset", "antichains", str(DATA / "fork3.json"))
        assert code == 0
        assert out["antichains"] == [[], [1], [2], [3], [1, 2]]

    def test_ancestrals(self, capsys):
        code, out = run_cli(capsys, "poset", "ancestrals", str(DATA / "fork3.json"))
        assert code == 0
        assert out["per_element"]["3"]["A"] == [1, 2]
        assert [1, 2, 3] in out["ancestral_subsets"]


class TestChainCommands:
    def test_insect_fork_matrix(self, capsys):
        code, out = run_cli(capsys, "chain", "insect", str(DATA / "fork3.json"), "-q", "2")
        assert code == 0
        assert out["rows"][0][0] == "7/20"  # 28/80 reduced
        assert out["radices"] == [2, 2, 2]

    def test_insect_coefficients(self, capsys):
        code, out = run_cli(
            capsys, "chain", "insect", str(DATA / "fork3.json"), "-q", "2", "--coefficients"
        )
        assert code == 0
        assert out["weights"]["{1,2}"] == "1/2"
        assert out["alphas"]["{1}<{}"] == "2/5"

    def test_crested_uniform(self, capsys):
        code, out = run_cli(
            capsys,
            "chain",
            "crested",
            str(DATA / "chain3.json"),
            "--weights",
            "1/7,4/21,2/3",
            "-q",
            "2",
        )
        assert code == 0
        assert out["rows"][0][0] == "67/168"


class TestLumpCommands:
    def test_verify_demo(self, capsys):
        code, out = run_cli(
            capsys,
            "lump",
            "verify",
            str(DATA / "demo_chain4.json"),
            str(DATA / "demo_partition4.json"),
        )
        assert code == 0
        assert out == {"lumpable": True, "lumped": [["1/2", "1/2"], ["1/2", "1/2"]]}

    def test_verify_witness(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"dim": 4, "parts": [[0, 2], [1], [3]]}))
        code, out = run_cli(
            capsys, "lump", "verify", str(DATA / "demo_chain4.json"), str(bad)
        )
        assert code == 0
        assert out["lumpable"] is False
        assert out["witness"]["sum_x"] == "5/12"

    def test_apply_not_lumpable_is_domain_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"dim": 4, "parts": [[0, 2], [1], [3]]}))
        code, out = run_cli(
            capsys, "lump", "apply", str(DATA / "demo_chain4.json"), str(bad)
        )
        assert code == 1
        assert out["error"] == "NotLumpable"
        assert out["witness"]["x"] == 0

    def test_delete(self, capsys, tmp_path):
        chain = tmp_path / "tree.json"
        code, out = run_cli(capsys, "chain", "insect", str(DATA / "chain3.json"), "-q", "2")
        chain.write_text(json.dumps(out))
        code, out = run_cli(capsys, "lump", "delete", str(chain), "--remove", "1")
        assert code == 0
        assert out["partition"]["parts"][0] == [0, 4]
        assert out["lumped"]["rows"][0][0] == "5/12"  # (1/3 . 1/4 + 2/3 . 1/2)

    def test_product(self, capsys, tmp_path):
        code, chain = run_cli(
            capsys, "chain", "crested", str(DATA / "chain3.json"),
            "--weights", "1/7,4/21,2/3", "-q", "2",
        )
        cpath = tmp_path / "chain.json"
        cpath.write_text(json.dumps(chain))
        spec = {"partitions": [
            {"dim": 2, "parts": [[0, 1]]},
            {"dim": 2, "parts": [[0], [1]]},
            {"dim": 2, "parts": [[0, 1]]},
        ]}
        spath = tmp_path / "spec.json"
        spath.write_text(json.dumps(spec))
        code, out = run_cli(capsys, "lump", "product", str(cpath), str(spath))
        assert code == 0
        assert len(out["partition"]["parts"]) == 2

    def test_generalized(self, capsys, tmp_path):
        code, chain = run_cli(
            capsys, "chain", "crested", str(DATA / "chain3.json"),
            "--weights", "1/7,4/21,2/3", "-q", "2",
        )
        cpath = tmp_path / "chain.json"
        cpath.write_text(json.dumps(chain))
        spec = {
            "poset": {"n": 3, "covers": [[1, 2], [2, 3]]},
            "elements": {
                "1": {"base": [[0], [1]]},
                "2": {"table": {"(0)": [[0], [1]], "(1)": [[0, 1]]}},
                "3": {"table": {
                    "(0,0)": [[0], [1]],
                    "(0,1)": [[0, 1]],
                    "(1,0)": [[0], [1]],
                }},
            },
        }
        spath = tmp_path / "spec.json"
        spath.write_text(json.dumps(spec))
        code, out = run_cli(capsys, "lump", "generalized", str(cpath), str(spath))
        assert code == 0
        assert out["partition"]["parts"] == [[0], [1], [2, 3], [4, 6], [5, 7]]

    def test_orbit(self, capsys, tmp_path):
        group = {
            "poset": {"n": 1, "covers": []},
            "q": 2,
            "generators": [[{"element": 1, "table": {"()": [1, 0]}}]],
        }
        gpath = tmp_path / "group.json"
        gpath.write_text(json.dumps(group))
        chain = tmp_path / "u2.json"
        chain.write_text(json.dumps({"dim": 2, "radices": [2], "rows": [["1/2", "1/2"], ["1/2", "1/2"]]}))
        code, out = run_cli(capsys, "lump", "orbit", str(chain), str(gpath))
        assert code == 0
        assert out["lumped"]["rows"] == [["1"]]


class TestSpectrumCommand:
    def test_pipe_insect_to_spectrum(self, tmp_path):
        script = (
            f"{sys.executable} -m posetlump.cli chain insect {DATA / 'fork3.json'} -q 2"
            f" | {sys.executable} -m posetlump.cli spectrum -"
        )
        proc = subprocess.run(
            script, shell=True, capture_output=True, text=True, check=True
        )
        out = json.loads(proc.stdout)
        values = [e["value"] for e in out["eigenvalues"]]
        mults = [e["multiplicity"] for e in out["eigenvalues"]]
        assert mults == [1, 2, 1, 4]
        assert abs(float(values[1]) - 0.65) < 1e-9

    def test_exact_check(self, capsys, tmp_path):
        code, tree = run_cli(capsys, "chain", "insect", str(DATA / "chain3.json"), "-q", "2")
        chain = tmp_path / "tree.json"
        chain.write_text(json.dumps(tree))
        code, out = run_cli(capsys, "spectrum", str(chain), "--exact-check", "2,3")
        assert code == 0
        assert out["exact_check"]["matches"] is True


class TestGroupCommands:
    def test_reconstruct_and_orbits_round_trip(self, capsys, tmp_path):
        part = tmp_path / "spheres.json"
        part.write_text(
            json.dumps({"dim": 8, "parts": [[0], [1], [2, 3], [4, 5, 6, 7]]})
        )
        code, gens = run_cli(capsys, "group", "reconstruct", str(part), "-q", "2", "-n", "3")
        assert code == 0
        gpath = tmp_path / "group.json"
        gpath.write_text(json.dumps(gens))
        code, out = run_cli(capsys, "group", "orbits", str(gpath))
        assert code == 0
        assert out["parts"] == [[0], [1], [2, 3], [4, 5, 6, 7]]

    def test_induced(self, capsys, tmp_path):
        code, tree = run_cli(capsys, "chain", "insect", str(DATA / "chain3.json"), "-q", "2")
        chain = tmp_path / "tree.json"
        chain.write_text(json.dumps(tree))
        part = tmp_path / "spheres.json"
        part.write_text(json.dumps({"dim": 8, "parts": [[0], [1], [2, 3], [4, 5, 6, 7]]}))
        code, out = run_cli(
            capsys,
            "group",
            "induced",
            str(chain),
            str(part),
            "--poset",
            str(DATA / "chain3.json"),
            "-q",
            "2",
        )
        assert code == 0
        assert out == {"group_induced": True}


class TestSearchCommand:
    def test_search_with_classification(self, capsys, tmp_path):
        code, out = run_cli(
            capsys,
            "chain",
            "crested",
            str(DATA / "antichain2.json"),
            "--weights",
            "1/2,1/2",
            "-q",
            "3",
        )
        chain = tmp_path / "half.json"
        chain.write_text(json.dumps(out))
        code, out = run_cli(
            capsys,
            "search",
            "lumpings",
            str(chain),
            "--classify",
            "--poset",
            str(DATA / "antichain2.json"),
            "-q",
            "3",
        )
        assert code == 0
        assert out["count"] == 66
        assert out["group_induced_count"] == 42


class TestErrorPaths:
    def test_malformed_json_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        code, out = run_cli(capsys, "poset", "check", str(bad))
        assert code == 2
        assert out["error"] == "MalformedInput"

    def test_redundant_covers_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n": 3, "covers": [[1, 2], [2, 3], [1, 3]]}))
        code, out = run_cli(capsys, "poset", "check", str(bad))
        assert code == 2
        assert out["error"] == "RedundantCovers"
        assert "transitive reduction" in out["detail"]

    def test_byte_identical_reruns(self, tmp_path):
        cmd = [
            sys.executable,
            "-m",
            "posetlump.cli",
            "--seed",
            "7",
            "chain",
            "insect",
            str(DATA / "fork3.json"),
            "-q",
            "2",
        ]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert a == b

    def test_output_file_round_trip(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code = main(
            ["--output", str(target), "poset", "check", str(DATA / "fork3.json")]
        )
        assert code == 0
        from posetlump.poset import Poset

        assert Poset.from_json(json.loads(target.read_text())).n == 3
