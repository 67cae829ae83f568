import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fdkrein.cli import main


def write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def read_solution(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows, np.array([complex(float(r["re"]), float(r["im"])) for r in rows])


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_solve1d_with_check(tmp_path):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 8}, "bc": {"type": "dirichlet"}, "seed": 3})
    out = tmp_path / "sol.csv"
    assert main(["solve1d", "--config", cfg, "--out", str(out), "--check"]) == 0
    rows, x = read_solution(out)
    assert list(rows[0]) == ["x", "re", "im", "oracle_re", "oracle_im"]
    oracle = np.array([complex(float(r["oracle_re"]), float(r["oracle_im"])) for r in rows])
    assert np.abs(x - oracle).max() < 1e-10
    side = json.loads((tmp_path / "sol.json").read_text())
    assert side["boundary_system_size"] == 2
    assert side["base_applies"] == 2
    assert side["residual"] < 1e-12
    assert side["oracle_rel_err"] < 1e-10


def test_solve2d_inline_rhs_and_holes(tmp_path):
    rhs = [[float(i), -1.0] for i in range(24)]
    cfg = write(tmp_path / "p.json", {
        "geometry": {"dim": 2, "n": 5, "m": 5},
        "lambda": [0.5, 0.5],
        "bc": {"type": "third_kind", "k": 0},
        "holes": [{"point": [2, 2], "alpha": [0.25, 0.25, 0.25, [0.25, 0]]}],
        "rhs": rhs,
    })
    out = tmp_path / "h.csv"
    assert main(["solve2d", "--config", cfg, "--out", str(out), "--check"]) == 0
    rows, _ = read_solution(out)
    assert len(rows) == 24
    assert ("2", "2") not in {(r["x"], r["y"]) for r in rows}
    side = json.loads((tmp_path / "h.json").read_text())
    assert side["boundary_system_size"] == 17
    assert side["boundary_system_sizes"] == [16, 1]
    assert side["oracle_rel_err"] < 1e-10


def test_rhs_from_csv_file(tmp_path):
    (tmp_path / "f.csv").write_text("re,im\n" + "".join(f"{i},0\n" for i in range(6)))
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 6}, "rhs": "f.csv"})
    assert main(["solve1d", "--config", cfg, "--out", str(tmp_path / "o.csv"), "--check"]) == 0
    side = json.loads((tmp_path / "o.json").read_text())
    assert side["oracle_rel_err"] < 1e-10


def test_output_is_byte_identical_for_same_seed(tmp_path):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 2, "n": 6, "m": 4}, "bc": {"type": "third_kind", "k": [0.3, 0.1]}})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["solve2d", "--config", cfg, "--out", str(a), "--seed", "42"])
    main(["solve2d", "--config", cfg, "--out", str(b), "--seed", "42"])
    assert a.read_bytes() == b.read_bytes()
    main(["solve2d", "--config", cfg, "--out", str(b), "--seed", "43"])
    assert a.read_bytes() != b.read_bytes()


def test_check_command(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 2, "n": 4, "m": 4}, "bc": {"type": "third_kind", "k": 0.3}})
    assert main(["check", "--config", cfg]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["boundary_system_size"] == 12
    assert report["max_rel_discrepancy"] < 1e-10


def test_check_refuses_above_cap(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 2, "n": 8, "m": 8}, "cap": 50})
    assert main(["check", "--config", cfg]) == 1
    err = error_of(capsys)
    assert "cap" in err["message"] and "64" in err["message"]


def test_spectrum_error_exit_2(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 8}, "lambda": -2, "bc": {"type": "periodic"}})
    assert main(["solve1d", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 2
    assert error_of(capsys)["error"] == "LambdaOnSpectrum"
    assert not (tmp_path / "o.csv").exists()


def test_singular_boundary_system_exit_2(tmp_path, capsys):
    n = 8
    # lambda is an eigenvalue of the zero-ghost operator but not of the periodic one
    a = np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    lam = float(np.linalg.eigvalsh(a)[-1])
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": n}, "lambda": lam, "bc": {"type": "third_kind", "k": 0}})
    assert main(["solve1d", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 2
    assert error_of(capsys)["error"] == "SingularBoundarySystem"


@pytest.mark.parametrize("text,needle", [
    ('{"geometry": {"dim": 1,', "line"),
    ('{"geometry": {"dim": 3, "n": 4}}', "geometry"),
    ('{"geometry": {"dim": 1, "n": 4}, "color": 1}', "color"),
    ('{"geometry": {"dim": 1, "n": 4, "m": 3}}', "1D"),
    ('{"geometry": {"dim": 2, "n": 4}, "bc": {"type": "third_kind"}}', "k"),
    ('{"geometry": {"dim": 1, "n": 4}, "rhs": [1, 2]}', "rhs"),
    ('[1, 2]', "object"),
])
def test_config_errors_exit_1(tmp_path, capsys, text, needle):
    cfg = write(tmp_path / "p.json", text)
    code = main(["solve1d" if '"dim": 1' in text else "solve2d", "--config", cfg, "--out", str(tmp_path / "o.csv")])
    assert code == 1
    err = error_of(capsys)
    assert needle in err["message"]


def test_wrong_dimension_command(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 2, "n": 4}})
    assert main(["solve1d", "--config", cfg]) == 1


def test_missing_config_file_exit_3(tmp_path, capsys):
    assert main(["solve1d", "--config", str(tmp_path / "nope.json")]) == 3
    assert error_of(capsys)["error"] == "FileNotFoundError"


def test_unwritable_output_exit_3(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 4}})
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["solve1d", "--config", cfg, "--out", str(blocker / "o.csv")]) == 3


def test_converge_command(tmp_path):
    cfg = write(tmp_path / "c.json", {"M_list": [8, 16], "truncation": 256, "quad_points": 1024})
    out = tmp_path / "conv.csv"
    assert main(["converge", "--config", cfg, "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["M"] for r in rows] == ["8", "16"]
    assert float(rows[1]["e_M"]) < float(rows[0]["e_M"])


def test_converge_phi_variants(tmp_path, capsys):
    for phi in ("constant", {"mode": 2}):
        cfg = write(tmp_path / "c.json", {"M_list": [4, 8], "truncation": 32, "quad_points": 128, "phi": phi})
        assert main(["converge", "--config", cfg, "--out", "-"]) == 0
    assert capsys.readouterr().out.startswith("M,h,e_M")


def test_bench_command(tmp_path):
    cfg = write(tmp_path / "b.json", {"sizes": [4, 8], "repeats": 2, "build_repeats": 1, "dense_cap": 20})
    out = tmp_path / "bench.csv"
    assert main(["bench", "--config", cfg, "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["boundary_size"] == "12"
    assert rows[0]["dense_ms_median"] != ""
    assert rows[1]["dense_ms_median"] == ""


def test_seed_range(tmp_path, capsys):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 4}})
    assert main(["solve1d", "--config", cfg, "--seed", str(2**64)]) == 1


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path / "p.json", {"geometry": {"dim": 1, "n": 4}})
    proc = subprocess.run([sys.executable, "-m", "fdkrein", "solve1d", "--config", cfg, "--out", "-"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "x,re,im"
