import csv
import io

import pytest

from treewalk import cli
from treewalk.config import ConfigError, dump_config, load_config, parse_config
from treewalk.validate import Check

BUNDLED = ("nn3", "w1", "w2", "w3", "f2")

NN3_TEXT = """[group]
involutions = a b c
free =

[measure]
a = 1/3
b = 1/3
c = 1/3

[options]
tol = 1e-12
"""


def run(argv, capsys=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


class TestConfig:
    def test_bundled_nn3(self):
        cfg = load_config("nn3")
        assert cfg.group.valence == 3
        assert cfg.measure.range_k == 1
        assert cfg.tol == 1e-12

    @pytest.mark.parametrize("name", BUNDLED)
    def test_round_trip(self, name):
        cfg = load_config(name)
        text = dump_config(cfg)
        again = parse_config(text, name)
        assert again == cfg
        assert dump_config(again) == text

    def test_free_factor_with_inverse(self):
        cfg = parse_config("[group]\nfree = s t\n[measure]\ns = 1/2\nt^ = 1/4\nst = 1/4\n")
        g = cfg.group
        assert cfg.measure.weight(g.parse("t^")) == cfg.measure.weight(g.parse("st")) == 0.25
        assert parse_config(dump_config(cfg)) == cfg

    def test_not_stochastic(self):
        text = NN3_TEXT.replace("c = 1/3", "c = 0.333")
        with pytest.raises(ConfigError, match="measure not stochastic"):
            parse_config(text)

    def test_valence(self):
        text = NN3_TEXT.replace("involutions = a b c", "involutions = a b")
        text = text.replace("c = 1/3\n", "")
        with pytest.raises(ConfigError, match="valence < 3"):
            parse_config(text)

    @pytest.mark.parametrize("text,needle", [
        ("junk\n[group]\n", "line"),
        ("[measure]\na = 1\n", "missing \\[group\\]"),
        ("[group]\ninvolutions = a b c\n[measure]\na = x\n", "bad weight"),
        ("[group]\ninvolutions = a b c\n[measure]\nd = 1\n", "bad word"),
        (NN3_TEXT + "nmax = many\n", "bad option"),
    ])
    def test_parse_errors(self, text, needle):
        with pytest.raises(ConfigError, match=needle):
            parse_config(text)

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/walk.ini")

    def test_overrides(self, tmp_path):
        path = tmp_path / "walk.ini"
        path.write_text(NN3_TEXT)
        cfg = load_config(path).with_overrides(tol=1e-9, seed=None)
        assert cfg.tol == 1e-9 and cfg.seed == 0 and cfg.name == "walk"


class TestCommands:
    def test_radius(self, tmp_path):
        target = tmp_path / "r.csv"
        code, out, _ = run(["radius", "--config", "nn3", "--csv", str(target)])
        assert code == 0
        assert out.startswith("R = 1.06066017177982")
        rows = list(csv.reader(io.StringIO(target.read_text())))
        assert rows[0] == ["quantity", "value", "tolerance"]
        assert dict((r[0], float(r[1])) for r in rows[1:])["R"] == pytest.approx(1.0606601717798)

    def test_digraph_dot(self, tmp_path):
        target = tmp_path / "out.dot"
        code, out, _ = run(["digraph", "--config", "w3", "--dot", str(target)])
        assert code == 0 and "components = 5" in out
        text = target.read_text()
        assert "subgraph cluster_scc4 {\n    style=bold;" in text
        assert 'o1 [label="(aba,ab)"];' in text

    def test_xi_and_psi(self):
        code, out, _ = run(["xi", "--config", "nn3"])
        assert code == 0 and "2: (ba,b)" in out
        code, out, _ = run(["psi", "--config", "nn3", "--dump"])
        assert "J[2] = 1/3 + 1/3*J[0]*J[2] + 1/3*J[1]*J[2]" in out
        code, out, _ = run(["psi", "--config", "w3"])
        assert out.splitlines()[:2] == ["orbits = 16", "monomials = 52"]

    def test_classify(self):
        code, out, _ = run(["classify", "--config", "w3"])
        assert code == 0
        assert "0: (aba,a) finite(3) scc0" in out
        assert "1: (aba,ab) infinite scc4 sink" in out

    def test_cavern(self, tmp_path):
        code, out, _ = run(["cavern", "--heights", "2,3,2,3,1"])
        assert code == 0 and out.startswith("[0,4]\n  [1,2]\n  [2,4]\n    [3,4]\n")
        code, out, _ = run(["cavern", "--config", "nn3", "--path", "ba,bab,ba,b"])
        assert code == 0 and 'i1_2 [label="[1,2] (bab,ba)_b"];' in out
        code, _, err = run(["cavern", "--heights", "3,2,1"])
        assert code == 2 and "cavern function" in err
        code, _, _ = run(["cavern"])
        assert code == 2

    def test_green(self, tmp_path):
        target = tmp_path / "g.csv"
        code, out, _ = run(["green", "--config", "nn3", "--z", "1", "--x", "e", "--csv",
                            str(target)])
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["z", "x", "y", "G", "F"]
        assert float(rows[1][3]) == pytest.approx(2.0) and float(rows[1][4]) == 1.0
        assert target.read_text() == out

    def test_green_complex(self):
        code, out, _ = run(["green", "--config", "nn3", "--z", "0.5,0.5", "--x", "a"])
        assert code == 0 and "j" in out.splitlines()[1]

    def test_spectral_and_derivatives(self):
        code, out, _ = run(["spectral", "--config", "w3"])
        assert code == 0 and "block scc4 sink" in out
        code, out, _ = run(["spectral", "--config", "nn3", "--z=-1.0,0.3"])
        assert code == 0
        code, out, _ = run(["derivatives", "--config", "nn3"])
        assert code == 0 and "r_second = -2.12132034355964" in out

    def test_asymptotics_csv(self, tmp_path):
        target = tmp_path / "a.csv"
        code, out, _ = run(["asymptotics", "--config", "nn3", "--nmax", "2000", "--csv",
                            str(target)])
        assert code == 0 and "C_pred = 9.57461472963" in out
        rows = list(csv.reader(io.StringIO(target.read_text())))
        assert rows[0] == ["n", "p_n", "fit_residual"]
        assert all(int(r[0]) % 2 == 0 for r in rows[1:])

    @pytest.mark.parametrize("name", ["nn3", "w1", "w2", "w3"])
    def test_validate(self, name):
        code, out, _ = run(["validate", "--config", name])
        assert code == 0
        assert out.strip().splitlines()[-1] == "# 16/16 checks passed"
        assert "sink_unique" in out and "FAIL" not in out


class TestExitCodes:
    def test_config_errors(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text(NN3_TEXT.replace("c = 1/3", "c = 0.333"))
        code, _, err = run(["radius", "--config", str(bad)])
        assert code == 2 and "measure not stochastic" in err
        code, _, err = run(["radius", "--config", "nope"])
        assert code == 2

    def test_unknown_command(self):
        code, _, _ = run(["frobnicate"])
        assert code == 2
        with pytest.raises(ConfigError):
            cli.dispatch("frobnicate", load_config("nn3"), None)

    def test_computation_error(self, tmp_path):
        path = tmp_path / "tight.ini"
        path.write_text(NN3_TEXT + "r_max = 0.5\n")
        code, _, err = run(["radius", "--config", str(path)])
        assert code == 1 and "computation error" in err

    def test_invariant_violation(self, monkeypatch):
        monkeypatch.setattr(cli, "run_checks",
                            lambda cfg: [Check("sink_unique", False, "forced")])
        code, out, err = run(["validate", "--config", "nn3"])
        assert code == 3 and "FAIL" in out and "sink_unique" in err


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "treewalk", "xi", "--config", "nn3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("# 6 orbits")


@pytest.mark.parametrize("argv", [["radius", "--config", "w2"],
                                  ["digraph", "--config", "w3"],
                                  ["validate", "--config", "nn3", "--seed", "4"]])
def test_deterministic_output(argv):
    assert run(argv) == run(argv)


def test_deterministic_dot(tmp_path):
    a, b = tmp_path / "a.dot", tmp_path / "b.dot"
    run(["digraph", "--config", "w2", "--dot", str(a)])
    run(["digraph", "--config", "w2", "--dot", str(b)])
    assert a.read_bytes() == b.read_bytes()
