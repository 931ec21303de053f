import json

import pytest

from zerowindow import __version__
from zerowindow.cli import dyadic_ladder, main


def _load(path):
    return json.loads(path.read_text())


def test_dyadic_ladder():
    assert dyadic_ladder(1000, 200) == [250, 500, 1000]
    assert dyadic_ladder(1000, 0) == [1000]


def test_bounds_outputs(tmp_path, capsys):
    assert main(["bounds", "--sigma", "1", "--out", str(tmp_path)]) == 0
    doc = _load(tmp_path / "bounds.json")
    assert doc["version"] == __version__
    assert doc["config"]["command"] == "bounds"
    assert doc["result"]["upper"] == pytest.approx(3.7011016504, abs=1e-9)
    csv_lines = (tmp_path / "bounds.csv").read_text().splitlines()
    assert csv_lines[0].startswith("# zerowindow") and csv_lines[1].startswith("r,sigma")
    assert "upper bound" in capsys.readouterr().out


def test_density_and_replay(tmp_path, family_file):
    out = tmp_path / "a"
    args = ["density", "--family", str(family_file), "--R", "80", "--ladder-min", "40", "--out", str(out)]
    assert main(args) == 0
    first = _load(out / "density.json")
    assert [r["R"] for r in first["result"]["ladder"]] == [40, 80]
    assert (out / "density_convergence.csv").exists()
    again = tmp_path / "b"
    assert main(["--replay", str(out / "density.json"), "--out", str(again)]) == 0
    assert _load(again / "density.json")["result"] == first["result"]


def test_optimize_and_sieve(tmp_path, family_file):
    assert main(["optimize", "--out", str(tmp_path), "--format", "json"]) == 0
    opt = _load(tmp_path / "optimize.json")["result"]["optimum"]
    assert opt["coefficients"][0] == pytest.approx(-0.233428, abs=2e-3)
    assert not (tmp_path / "candidates.csv").exists()
    assert main(["sieve", "--family", str(family_file), "--R", "50", "--out", str(tmp_path)]) == 0
    assert _load(tmp_path / "sieve.json")["result"]["members"][0] == 51


def test_simulate_seed_controls_output(tmp_path):
    base = ["simulate", "--N", "10", "--samples", "50", "--format", "json"]
    main(base + ["--seed", "1", "--out", str(tmp_path / "a")])
    main(base + ["--seed", "1", "--out", str(tmp_path / "b")])
    main(base + ["--seed", "2", "--out", str(tmp_path / "c")])
    a, b, c = (_load(tmp_path / d / "simulate.json")["result"] for d in "abc")
    assert a == b and a != c


def test_cache_build_and_use(tmp_path, family_file):
    path = tmp_path / "t.bin"
    assert main(["cache", "build", "--family", str(family_file), "--path", str(path), "--R", "40",
                 "--prime-limit", "100", "--out", str(tmp_path)]) == 0
    assert main(["cache", "verify", "--family", str(family_file), "--path", str(path), "--out", str(tmp_path)]) == 0
    assert main(["density", "--family", str(family_file), "--R", "40", "--normalization", "local",
                 "--cache", str(path), "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv", [
    ["density", "--R", "10"],
    ["density", "--family", "missing.json", "--R", "10"],
    ["bounds", "--sigma", "1", "--tau", "3"],
    ["simulate", "--N", "3"],
    ["cache", "build", "--family", "x.json", "--path", "c.bin"],
])
def test_config_errors_exit_1(tmp_path, argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv + ["--out", str(tmp_path)])
        raise SystemExit(code)
    assert exc.value.code == 1


def test_unsievable_family_exits_1(tmp_path):
    fam = tmp_path / "f.json"
    fam.write_text(json.dumps({"A": ["1"], "B": ["0", "1"], "B_square": 4}))
    assert main(["sieve", "--family", str(fam), "--R", "100", "--out", str(tmp_path)]) == 1
