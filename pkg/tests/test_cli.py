import json

import pytest

from app.imageio import save_image
from main import run_cli

from .conftest import KEY_HEX


@pytest.fixture
def image_file(tmp_path, small_image):
    path = tmp_path / "plain.ppm"
    save_image(small_image, path)
    return path


def _values(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


class TestCrypt:
    @pytest.mark.parametrize("variant, mode", [("A", "ofb"), ("B", "cbc"), ("E", "cfb"), ("D", "ctr")])
    def test_encrypt_then_decrypt(self, tmp_path, image_file, variant, mode):
        cipher, restored = tmp_path / "image.cbs", tmp_path / "restored.ppm"
        args = ["--key", KEY_HEX, "--variant", variant, "--mode", mode]
        assert run_cli(["encrypt", *args, "--in", str(image_file), "--out", str(cipher)]) == 0
        assert run_cli(["decrypt", "--key", KEY_HEX, "--in", str(cipher), "--out", str(restored)]) == 0
        assert restored.read_bytes() == image_file.read_bytes()

    def test_key_file(self, tmp_path, image_file):
        key_file = tmp_path / "secret.key"
        key_file.write_bytes(bytes.fromhex(KEY_HEX))
        cipher, restored = tmp_path / "image.cbs", tmp_path / "restored.ppm"
        assert run_cli(["encrypt", "--key-file", str(key_file), "--in", str(image_file), "--out", str(cipher)]) == 0
        assert run_cli(["decrypt", "--key", KEY_HEX, "--in", str(cipher), "--out", str(restored)]) == 0
        assert restored.read_bytes() == image_file.read_bytes()

    def test_export(self, tmp_path, image_file, capsys):
        assert run_cli(["export", "--in", str(image_file), "--out", str(tmp_path / "bits.bin")]) == 0
        assert capsys.readouterr().out == f"bits={64 * 64 * 3 * 8}\n"


class TestAnalysis:
    def test_analyze_with_comparison(self, tmp_path, image_file, capsys):
        cipher = tmp_path / "image.cbs"
        run_cli(["encrypt", "--key", KEY_HEX, "--in", str(image_file), "--out", str(cipher)])
        capsys.readouterr()
        assert run_cli(["analyze", "--in", str(cipher), "--cmp", str(image_file)]) == 0
        values = _values(capsys.readouterr().out)
        assert float(values["npcr"]) > 99.0
        assert float(values["entropy.r"]) > 7.9
        assert "chi2.critical" in values

    def test_json_report_file(self, tmp_path, image_file, capsys):
        report = tmp_path / "stats.json"
        assert run_cli(["analyze", "--in", str(image_file), "--json", "--report", str(report), "--permutation"]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert json.loads(report.read_text()) == printed
        assert "perm.standard.it3.h.r" in printed
        assert "perm.arnold.it5.v.b" in printed

    def test_channel_flip(self, image_file, capsys):
        argv = ["channel", "--flip", "20,17,1", "--mode", "cbc", "--in", str(image_file)]
        assert run_cli(argv) == 0
        values = _values(capsys.readouterr().out)
        assert values["ep.blocks"] == "2"
        assert values["ep.mode"] == "cbc"

    def test_channel_ecb_override(self, image_file, capsys):
        assert run_cli(["channel", "--mode", "ecb", "--pe", "0.01", "--in", str(image_file), "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ep.mode"] == "ecb"
        assert "ep.ph" in report

    @pytest.mark.slow
    def test_channel_default_image(self, capsys):
        assert run_cli(["channel", "--flip", "20,17,1", "--mode", "cbc"]) == 0
        assert _values(capsys.readouterr().out)["ep.blocks"] == "2"

    def test_key_sensitivity(self, image_file, capsys):
        assert run_cli(["keysens", "--in", str(image_file), "--key-bit", "3"]) == 0
        assert float(_values(capsys.readouterr().out)["npcr"]) > 99.0

    def test_plaintext_sensitivity(self, image_file, capsys):
        assert run_cli(["ptsens", "--in", str(image_file), "--mode", "ofb"]) == 0
        assert _values(capsys.readouterr().out)["blocks"] == "1"


class TestDebug:
    def test_orbit_dump(self, capsys):
        assert run_cli(["orbit-dump", "--key", KEY_HEX, "--count", "4"]) == 0
        words = capsys.readouterr().out.split()
        assert len(words) == 4
        assert all(len(word) == 8 for word in words)


class TestErrors:
    def test_bad_key(self, tmp_path, image_file, capsys):
        argv = ["encrypt", "--key", "abc", "--in", str(image_file), "--out", str(tmp_path / "x.cbs")]
        assert run_cli(argv) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_key(self, tmp_path, image_file):
        assert run_cli(["encrypt", "--in", str(image_file), "--out", str(tmp_path / "x.cbs")]) == 2

    def test_missing_file(self, tmp_path):
        argv = ["encrypt", "--key", KEY_HEX, "--in", str(tmp_path / "absent.ppm"), "--out", str(tmp_path / "x.cbs")]
        assert run_cli(argv) == 1

    def test_invalid_rounds(self, tmp_path, image_file):
        argv = ["encrypt", "--key", KEY_HEX, "--rounds", "5", "--in", str(image_file), "--out", str(tmp_path / "x.cbs")]
        assert run_cli(argv) == 2

    @pytest.mark.parametrize("count", ["-1", "many"])
    def test_bad_orbit_count(self, count):
        assert run_cli(["orbit-dump", "--key", KEY_HEX, "--count", count]) == 2

    def test_unknown_command(self):
        assert run_cli(["shred"]) == 2

    def test_bad_flip(self):
        assert run_cli(["channel", "--flip", "1,2"]) == 2

    def test_corrupt_container(self, tmp_path):
        cipher = tmp_path / "image.cbs"
        cipher.write_bytes(b"CBS1" + bytes(10))
        assert run_cli(["decrypt", "--key", KEY_HEX, "--in", str(cipher), "--out", str(tmp_path / "out.ppm")]) == 1
