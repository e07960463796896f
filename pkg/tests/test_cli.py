import json
from pathlib import Path

import pytest

from conftest import needs_solver
from kobon import cli
from kobon.published import tan_form
from kobon.straighten import induced_table, parse_lines, tan_to_lineset
from kobon.table import format_table

DATA = Path(cli.__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_row_and_files(capsys, tmp_path):
    cnf_path = tmp_path / "f.cnf"
    man = tmp_path / "m.json"
    code, out, _ = run(capsys, "gen", "-n", 5, "-o", cnf_path, "--manifest", man)
    assert code == 0
    assert out.split("\n")[1].split() == ["5", "-", "-", "-", "200", "2200"]
    assert cnf_path.read_text().startswith("p cnf 200 2200")
    data = json.loads(man.read_text())
    assert all(Path(p).exists() for paths in data["artifacts"].values() for p in paths)
    assert "total" in data["timings"] and data["config"]["n"] == 5


def test_gen_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    run(capsys, "gen", "-n", 7, "-L", "3,6", "-o", a)
    run(capsys, "gen", "-n", 7, "-L", "3,6", "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_gen_families(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "-n", 9, "-o", tmp_path / "x.cnf", "--families")
    assert code == 0 and "family    1" in out


@pytest.mark.parametrize("argv", [
    ["gen", "-n", "15", "-R", "4"],
    ["gen", "-n", "2"],
    ["gen", "-n", "7", "-L", "9"],
    ["gen", "-n", "7", "-L", "x"],
    ["frobnicate"],
])
def test_usage_errors(capsys, tmp_path, argv):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(argv + ["-o", str(tmp_path / "y.cnf")] if argv[0] == "gen" else argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_missing_solver_is_backend_error(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("KOBON_SOLVER", str(tmp_path / "nope"))
    code, _, err = run(capsys, "enumerate", "-n", 5, "--solver", tmp_path / "nope")
    assert code == 4 and "solver" in err


def test_enumerate_embedded(capsys, tmp_path):
    code, out, _ = run(capsys, "enumerate", "-n", 5, "--embedded", "-o", tmp_path)
    assert code == 0 and "1 table(s), exhaustive" in out
    assert (tmp_path / "n5_001.table").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["tables"] == 1 and man["exhaustive"]


@needs_solver
def test_enumerate_external(capsys):
    code, out, _ = run(capsys, "enumerate", "-n", 7, "-L", "3,6")
    assert code == 0 and "1 table(s), exhaustive, 11894 clauses" in out


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", DATA / "fig4_1.table")
    assert code == 0 and "valid 13-line" in out
    bad = tmp_path / "bad.table"
    bad.write_text("[[2,3],[3,1],[2,1]]\n")
    code, out, _ = run(capsys, "validate", bad)
    assert code == 6 and "consistency" in out
    bad.write_text("[[2,3],[3,1],[2,")
    code, _, err = run(capsys, "validate", bad)
    assert code == 6 and "syntax" in err


def test_count(capsys):
    code, out, _ = run(capsys, "count", DATA / "c27_2.table")
    assert code == 0 and out.strip() == "225"
    code, out, _ = run(capsys, "count", DATA / "fig1a.table", "--list")
    assert out.split("\n")[:2] == ["1", "1 2 3"]


def test_straighten_and_render(capsys, tmp_path):
    coords = tmp_path / "c.txt"
    code, _, err = run(capsys, "straighten", DATA / "fig4_1.table", "-o", coords,
                       "--manifest", tmp_path / "s.json")
    assert code == 0 and err.startswith("satisfied")
    assert parse_lines(coords.read_text()).n == 13
    svg = tmp_path / "a.svg"
    code, _, _ = run(capsys, "render", coords, DATA / "fig4_1.table", "-o", svg,
                     "--fisheye", "auto", "--zoom", 2, "--labels")
    assert code == 0 and svg.read_text().count("<polygon") == 47
    # coordinates that do not realize the table
    code, _, _ = run(capsys, "render", coords, DATA / "fig4_2.table", "-o", svg)
    assert code == 5


def test_straighten_failure(capsys):
    code, _, err = run(capsys, "straighten", DATA / "fig4_1.table", "--restarts", 1,
                       "--ineq-eps", 5, "--ineq-max", 6)
    assert code == 5 and err.startswith("NOT satisfied")


def test_straighten_tan_form(capsys, tmp_path):
    m, c = tan_form("A1")
    path = tmp_path / "a1.table"
    path.write_text(format_table(induced_table(tan_to_lineset(m, c))))
    code, out, _ = run(capsys, "straighten", path, "--tan-form", "A1")
    assert code == 0 and "# y = m_i (x - c_i)" in out
    code, out, _ = run(capsys, "straighten", path, "--tan-form", "0,tan-1,eps,-eps,tan1")
    assert code == 0


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mirror": True}))
    code, out, _ = run(capsys, "--config", cfg, "gen", "-n", 5, "-o", tmp_path / "m.cnf")
    assert code == 0 and out.split("\n")[1].split()[1] == "M"
    cfg.write_text(json.dumps({"n": 7}))
    code, out, _ = run(capsys, "--config", cfg, "gen", "-n", 5, "-o", tmp_path / "m.cnf")
    assert out.split("\n")[1].split()[0] == "5"


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, _ = run(capsys, "count", tmp_path / "absent.table")
    assert code == 2
