import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qcopy import cli, qsim, storage
from qcopy.streams import block_counts, derive_seed, run_blocks


def _block_probe(rng, count, first):
    return first, count, float(rng.random())


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def minted(tmp_path, capsys):
    code, _, _ = run(["mint", "--n", 8, "--l", 4, "--seed", 42, "--out", tmp_path / "disk"], capsys)
    assert code == 0
    return tmp_path / "disk"


class TestMint:
    def test_files_and_schema(self, minted):
        doc = json.loads((minted / "medium.json").read_text())
        assert doc["n"] == 8 and doc["l"] == 4
        assert len(doc["data"]) == 8 and len(doc["keys"][3]) == 4
        medium = storage.load_medium(minted / "medium.json")
        sec = storage.load_secrets(minted / "secrets.json", medium)
        assert sec.n == 8

    def test_byte_identical(self, tmp_path, capsys):
        for d in ("a", "b"):
            run(["mint", "--seed", 3, "--out", tmp_path / d], capsys)
        for name in ("medium.json", "secrets.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_explicit_bits(self, tmp_path, capsys):
        code, _, _ = run(["mint", "--bits", "0110", "--out", tmp_path], capsys)
        assert code == 0
        assert json.loads((tmp_path / "secrets.json").read_text())["bits"] == [0, 1, 1, 0]

    @pytest.mark.parametrize("argv", [["--n", 0], ["--l", 0], ["--l", 33], ["--seed", -1]])
    def test_bad_arguments(self, tmp_path, argv):
        with pytest.raises(SystemExit) as exc:
            cli.main(["mint", *map(str, argv), "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_bad_bits(self, tmp_path, capsys):
        code, _, err = run(["mint", "--bits", "012", "--out", tmp_path], capsys)
        assert code == 2 and "error" in err


class TestDecrypt:
    def test_recovers_bits(self, minted, capsys):
        code, out, _ = run(["decrypt", minted / "medium.json", "--secrets", minted / "secrets.json",
                            "--trials", 2000, "--seed", 1], capsys)
        doc = json.loads(out)
        bits = json.loads((minted / "secrets.json").read_text())["bits"]
        assert code == 0
        for ok, got, want in zip(doc["success"], doc["decoded_bits"], bits):
            assert got == (want if ok else None)
        expected = (15 / 16) ** 8
        assert abs(doc["all_success_fraction"] - expected) <= 3 * math.sqrt(expected * (1 - expected) / 2000)
        assert doc["exact_recovery_fraction"] == doc["all_success_fraction"]

    def test_single_slot_half(self, tmp_path, capsys):
        run(["mint", "--n", 1, "--l", 1, "--seed", 5, "--out", tmp_path], capsys)
        code, out, _ = run(["decrypt", tmp_path / "medium.json", "--trials", 10_000], capsys)
        p = json.loads(out)["success_fraction"][0]
        assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / 10_000)

    def test_corrupted_amplitude(self, minted, capsys):
        doc = json.loads((minted / "medium.json").read_text())
        doc["keys"][0][0][0][0] = 5.0
        (minted / "bad.json").write_text(json.dumps(doc))
        code, _, err = run(["decrypt", minted / "bad.json"], capsys)
        assert code == 2 and "norm" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["decrypt", tmp_path / "nope.json"], capsys)
        assert code == 2


class TestVerify:
    def test_genuine(self, minted, capsys):
        code, out, _ = run(["verify", minted / "medium.json", "--secrets", minted / "secrets.json"],
                           capsys)
        assert code == 0
        assert json.loads(out) == {"accepted": True, "tests_run": 16, "first_rejection_index": None}

    def test_orthogonal_hash_rejected(self, minted, capsys):
        medium = storage.load_medium(minted / "medium.json")
        fake = qsim.rotation_z(np.pi) @ medium.hash_state
        storage.save_medium(medium.replace(hash_state=fake), minted / "fake.json")
        code, out, _ = run(["verify", minted / "fake.json", "--m", 16, "--seed", 2], capsys)
        doc = json.loads(out)
        assert code == 1 and not doc["accepted"]
        assert doc["tests_run"] == doc["first_rejection_index"] + 1

    def test_rate(self, minted, capsys):
        code, out, _ = run(["verify", minted / "medium.json", "--trials", 500], capsys)
        assert code == 0 and json.loads(out)["acceptance_rate"] == 1.0


class TestAttack:
    def test_outputs(self, minted, tmp_path, capsys):
        code, out, _ = run(["attack", minted / "medium.json", "--secrets", minted / "secrets.json",
                            "--trials", 5000, "--out", tmp_path / "pirate"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert len(doc["per_position_pass"]) == 8
        storage.load_medium(tmp_path / "pirate" / "pirated_medium.json")
        lines = (tmp_path / "pirate" / "attack_stats.csv").read_text().splitlines()
        assert lines[0] == "theta,theta_star,p_analytic,p_empirical,trials,stderr"
        assert len(lines) == 10 and lines[-1].startswith("# seed=0 trials=5000")

    def test_degenerate_medium(self, tmp_path, capsys):
        run(["mint", "--n", 3, "--seed", 1, "--out", tmp_path], capsys)
        sec = json.loads((tmp_path / "secrets.json").read_text())
        sec["thetas"][1] = 0.0
        (tmp_path / "secrets.json").write_text(json.dumps(sec))
        code, out, _ = run(["attack", tmp_path / "medium.json", "--secrets", tmp_path / "secrets.json",
                            "--trials", 2000, "--out", tmp_path / "p", "--format", "json"], capsys)
        assert code == 0
        assert json.loads(out)["degenerate_positions"] == [1]
        rows = json.loads((tmp_path / "p" / "attack_stats.json").read_text())["rows"]
        assert rows[1]["p_empirical"] == 1.0

    def test_needs_secrets(self, minted, capsys):
        code, _, err = run(["attack", minted / "medium.json"], capsys)
        assert code == 2 and "--secrets" in err


class TestCurves:
    def test_files(self, tmp_path, capsys):
        code, _, _ = run(["curves", "--trials", 2000, "--out", tmp_path], capsys)
        assert code == 0
        dec = (tmp_path / "decryption_curve.csv").read_text().splitlines()
        assert dec[0] == "l,p_success_analytic,p_success_empirical,stderr"
        assert len(dec) == 14
        swap = (tmp_path / "swap_curve.csv").read_text().splitlines()
        assert swap[0] == "overlap_angle,p0_analytic,p0_empirical,stderr" and len(swap) == 22
        dist = (tmp_path / "distance_curve.csv").read_text().splitlines()
        assert dist[0] == "theta_delta,gate_distance,swap_p0"
        first = dist[1].split(",")
        assert float(first[1]) == 0.0 and float(first[2]) == 1.0


class TestDeterminism:
    def test_jobs_do_not_change_output(self, tmp_path, capsys):
        outs = []
        for jobs in (1, 3):
            out = tmp_path / f"j{jobs}"
            run(["curves", "--trials", 9000, "--jobs", jobs, "--out", out, "--seed", 7], capsys)
            outs.append({p.name: p.read_bytes() for p in out.iterdir()})
        assert outs[0] == outs[1]

    def test_run_blocks_independent_of_jobs(self):
        one = run_blocks(_block_probe, 5, 10_000, jobs=1, block_size=1000)
        many = run_blocks(_block_probe, 5, 10_000, jobs=4, block_size=1000)
        assert one == many
        assert [c for _, c, _ in one] == block_counts(10_000, 1000)

    def test_derive_seed(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(1, 3)

    def test_module_entry_point(self, tmp_path):
        cmd = [sys.executable, "-m", "qcopy", "mint", "--seed", "9", "--out", str(tmp_path)]
        first = subprocess.run(cmd, capture_output=True, check=True).stdout
        second = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert first == second
