import json
import struct
import types

import numpy as np
import pytest

from primerace import cache, cli
from primerace.zeros import MAGIC


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture()
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(cache.ENV_CACHE_DIR, str(tmp_path / "cache"))
    return tmp_path


def test_race_small_limit_summary(in_tmp, capsys):
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 100) == 0
    out = capsys.readouterr().out
    assert "delta=+2" in out
    assert "delta2=-3" in out
    csv = (in_tmp / "race_q4_a3_b1_L100.csv").read_text().splitlines()
    assert csv[0] == "x,delta_norm,delta2_norm,sigma"
    row = csv[1].split(",")
    assert int(row[0]) == 100
    assert float(row[1]) == pytest.approx(0.9210340371976183)
    assert float(row[2]) == pytest.approx(-0.9046421471642973)
    assert float(row[3]) == pytest.approx(-0.4836081099666788)


def test_race_writes_manifest(in_tmp):
    run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 100, "--out", "r.csv")
    man = json.loads((in_tmp / "r.csv.manifest.json").read_text())
    assert man["command"] == "race"
    assert man["parameters"]["limit"] == 100
    assert man["backend"] in ("numba", "numpy")
    assert man["outputs"] == ["r.csv"]
    assert man["finished"] >= man["started"]


def test_race_rejects_equal_residues(in_tmp, capsys):
    assert run_cli("race", "--q", 4, "--a", 1, "--b", 1, "--limit", 1000) == 2
    assert "distinct" in capsys.readouterr().err


def test_race_rejects_non_coprime(in_tmp, capsys):
    assert run_cli("race", "--q", 4, "--a", 2, "--b", 1, "--limit", 1000) == 2
    assert "coprime" in capsys.readouterr().err


def test_race_positive_window_near_first_crossing(in_tmp):
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1,
                   "--limit", "1e5", "--out", "r.csv") == 0
    data = np.genfromtxt(in_tmp / "r.csv", delimiter=",", names=True)
    pos = data["x"][data["delta2_norm"] > 0]
    # the only positive checkpoint of the default grid sits inside the
    # first lead window, right at the crossing found by signchange
    assert pos.size == 1
    nearest = data["x"][np.argmin(np.abs(data["x"] - 26747))]
    assert pos[0] == nearest


def test_race_cache_roundtrip_and_resume(in_tmp, capsys):
    args = ("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 30000, "--out", "a.csv")
    assert run_cli(*args) == 0
    first = (in_tmp / "a.csv").read_text()
    cache_files = list((in_tmp / "cache").glob("counts_q4_L30000_*.bin"))
    assert len(cache_files) == 1

    # truncate the completion counter to fake an interrupted run
    raw = cache_files[0]
    with open(raw, "r+b") as fh:
        fh.seek(cache._PRE.size)
        (m,) = struct.unpack("<I", fh.read(4))
        fh.seek(cache._PRE.size + 4 + 4 * m)
        fh.write(struct.pack("<I", 3))
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 30000,
                   "--out", "b.csv") == 0
    assert "resuming" in capsys.readouterr().err
    assert (in_tmp / "b.csv").read_text() == first

    # and a warm hit reproduces it again without resuming
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 30000,
                   "--out", "c.csv") == 0
    assert (in_tmp / "c.csv").read_text() == first


def test_race_corrupt_cache_is_rebuilt(in_tmp, capsys):
    args = ("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 20000, "--out", "a.csv")
    assert run_cli(*args) == 0
    first = (in_tmp / "a.csv").read_text()
    path = next((in_tmp / "cache").glob("counts_q4_L20000_*.bin"))
    blob = bytearray(path.read_bytes())
    blob[0] ^= 0xFF
    path.write_bytes(blob)
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 20000,
                   "--out", "b.csv") == 0
    assert "ignoring cache" in capsys.readouterr().err
    assert (in_tmp / "b.csv").read_text() == first


def test_race_no_cache_flag(in_tmp):
    assert run_cli("race", "--q", 4, "--a", 3, "--b", 1, "--limit", 5000,
                   "--no-cache", "--out", "a.csv") == 0
    assert not (in_tmp / "cache").exists()


def test_zeros_empty_section_below_first_zero(in_tmp, capsys):
    assert run_cli("zeros", "--q", 4, "--T", 5) == 0
    path = in_tmp / "zeros_q4_chi1_T5.txt"
    lines = path.read_text().splitlines()
    assert lines[0] == MAGIC
    assert lines[1] == "q=4 chi=1 height=5.0"
    assert len(lines) == 2
    assert (in_tmp / "zeros_q4_chi1_T5.txt.manifest.json").exists()


def test_zeros_then_density_ingestion(in_tmp, capsys):
    assert run_cli("zeros", "--q", 4, "--T", 60, "--out-dir", "z") == 0
    capsys.readouterr()
    code = run_cli(
        "density", "--q", 4, "--a", 3, "--b", 1, "--samples", 50000,
        "--zeros", in_tmp / "z" / "zeros_q4_chi1_T60.txt", "--out", "d.csv",
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "delta lead density" in out
    assert "delta2 lead density" in out
    rows = (in_tmp / "d.csv").read_text().splitlines()
    assert rows[0] == "q,a,b,which,T,samples,seed,value,ci_half_width,tail_sigma"
    assert len(rows) == 3
    for row in rows[1:]:
        fields = row.split(",")
        assert fields[4] == "60"
        assert 0.0 < float(fields[7]) < 1.0


def test_density_unsupported_modulus_exit_2(in_tmp, capsys):
    assert run_cli("density", "--q", 5, "--a", 2, "--b", 1,
                   "--samples", 1000) == 2
    assert "ingest" in capsys.readouterr().err


def test_density_bad_zero_file_exit_3(in_tmp, capsys):
    bad = in_tmp / "bad.txt"
    bad.write_text("NOT A ZERO FILE\n")
    assert run_cli("density", "--q", 4, "--a", 3, "--b", 1,
                   "--zeros", bad, "--samples", 1000) == 3
    assert "line 1" in capsys.readouterr().err


def test_density_missing_zero_file_exit_3(in_tmp, capsys):
    assert run_cli("density", "--q", 4, "--a", 3, "--b", 1,
                   "--zeros", in_tmp / "nope.txt", "--samples", 1000) == 3


def test_density_seed_reproducibility(in_tmp, capsys):
    run_cli("zeros", "--q", 4, "--T", 40, "--out-dir", "z")
    zf = in_tmp / "z" / "zeros_q4_chi1_T40.txt"
    for name in ("e1.csv", "e2.csv"):
        run_cli("density", "--q", 4, "--a", 3, "--b", 1, "--samples", 40000,
                "--seed", 777, "--zeros", zf, "--out", name)
    assert (in_tmp / "e1.csv").read_text() == (in_tmp / "e2.csv").read_text()
    man = json.loads((in_tmp / "e2.csv.manifest.json").read_text())
    assert man["seed"] == 777
    assert man["rng"] == "philox4x64"


def test_signchange_finds_the_crossing(in_tmp, capsys):
    assert run_cli("signchange", "--q", 4, "--a", 3, "--b", 1,
                   "--which", "delta2-positive", "--limit", 30000) == 0
    assert capsys.readouterr().out.strip() == "26747"
    rows = (in_tmp / "signchange_q4_a3_b1_delta2-positive.csv").read_text().splitlines()
    assert rows[1] == "4,3,1,delta2-positive,30000,26747"


def test_signchange_none_case(in_tmp, capsys):
    assert run_cli("signchange", "--q", 4, "--a", 3, "--b", 1,
                   "--which", "delta2-positive", "--limit", 1000) == 0
    assert capsys.readouterr().out.strip() == "none"


def test_unknown_flag_is_usage_error(in_tmp):
    assert run_cli("compare", "--q", 4, "--a", 3, "--b", 1, "--limit", 100,
                   "--frobnicate") == 2


def test_compare_end_to_end(in_tmp, capsys):
    code = run_cli("compare", "--q", 4, "--a", 3, "--b", 1, "--limit", "1e5",
                   "--T0", 40, "--grid", 50, "--out", "cmp.csv")
    assert code == 0
    out = capsys.readouterr().out
    assert "rms misfit" in out
    header = (in_tmp / "cmp.csv").read_text().splitlines()[0]
    assert header == ("x,measured_delta_norm,predicted_delta_norm,"
                      "measured_delta2_norm,predicted_delta2_norm")
    data = np.genfromtxt(in_tmp / "cmp.csv", delimiter=",", names=True)
    assert data.size == 50
    assert np.isfinite(data["predicted_delta_norm"]).all()


def test_internal_errors_map_to_exit_4(monkeypatch, capsys):
    parser = cli.build_parser()

    def boom(args):
        raise RuntimeError("invariant violated")

    monkeypatch.setattr(parser, "parse_args",
                        lambda argv: types.SimpleNamespace(func=boom))
    monkeypatch.setattr(cli, "build_parser", lambda: parser)
    assert cli.main(["race"]) == 4
    assert "internal error" in capsys.readouterr().err


def test_usage_exit_code_from_argparse(capsys):
    assert cli.main(["race", "--q", "4"]) == 2  # missing required args
    assert cli.main(["no-such-command"]) == 2
    assert cli.main(["--version"]) == 0
