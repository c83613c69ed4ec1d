import json
import subprocess
import sys

import numpy as np
import pytest

from fasthsic.cli import build_parser, load_sample, main
from fasthsic import InputError


def write_csv(path, rows):
    path.write_text("\n".join(",".join(str(v) for v in r) for r in rows) + "\n")
    return str(path)


@pytest.fixture
def pair(tmp_path, rng):
    x = rng.normal(size=(30, 3))
    y = x[:, :1] ** 2 + 0.1 * rng.normal(size=(30, 1))
    return write_csv(tmp_path / "x.csv", x), write_csv(tmp_path / "y.csv", y)


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestLoadSample:
    def test_vector(self, tmp_path):
        s = load_sample(write_csv(tmp_path / "a.csv", [[0, 1], [1, 0], [2, 2]]))
        assert (s.n, s.data.shape[1]) == (3, 2)

    def test_functional_first_row_grid(self, tmp_path):
        s = load_sample(write_csv(tmp_path / "f.csv", [[0, 0.5, 1], [1, 1, 1]]), "functional")
        assert s.n == 1 and s.data.shape[1] == 3
        np.testing.assert_array_equal(s.data, [[1, 1, 1]])

    def test_non_increasing_grid(self, tmp_path):
        with pytest.raises(InputError, match="strictly increasing"):
            load_sample(write_csv(tmp_path / "f.csv", [[0, 0.5, 0.5], [1, 1, 1]]), "functional")

    def test_uniform_grid(self, tmp_path):
        s = load_sample(write_csv(tmp_path / "f.csv", [[1, 2, 3], [4, 5, 6]]), "functional", "uniform")
        assert s.n == 2
        np.testing.assert_array_equal(s.grid, [0, 0.5, 1])

    def test_header_skipped(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("a,b\n1,2\n3,4\n")
        assert load_sample(str(p), header=True).n == 2

    def test_ragged_rows_located(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(InputError, match=":2:"):
            load_sample(str(p))

    def test_bad_cell_located(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(InputError, match=":2:2"):
            load_sample(str(p))

    def test_non_finite(self, tmp_path):
        p = tmp_path / "n.csv"
        p.write_text("1,2\n3,nan\n")
        with pytest.raises(InputError, match="non-finite"):
            load_sample(str(p))


class TestTestCommand:
    def test_self_dependence_detected(self, tmp_path, rng, capsys):
        f = write_csv(tmp_path / "x.csv", rng.normal(size=(12, 2)))
        code, out, _ = run(capsys, ["test", "--x", f, "--y", f])
        assert code == 0
        assert json.loads(out)["p_value"] < 0.05

    @pytest.mark.parametrize("method", ["new", "gamma", "perm"])
    def test_json_fields(self, pair, capsys, method):
        code, out, _ = run(capsys, ["test", "--x", pair[0], "--y", pair[1], "--method", method])
        res = json.loads(out)
        assert code == 0
        assert {"method", "statistic", "p_value", "n", "hsic_estimate", "reject", "alpha"} <= set(res)
        assert 0 <= res["p_value"] <= 1 and res["n"] == 30

    def test_perm_repeatable(self, pair, capsys):
        argv = ["test", "--x", pair[0], "--y", pair[1], "--method", "perm", "--perms", "200", "--seed", "17"]
        outs = {run(capsys, argv)[1] for _ in range(2)}
        outs.add(run(capsys, argv + ["--threads", "3"])[1])
        assert len(outs) == 1

    def test_csv_and_text(self, pair, capsys):
        _, out, _ = run(capsys, ["test", "--x", pair[0], "--y", pair[1], "--format", "csv"])
        header, row = out.strip().splitlines()
        assert "detail.beta0" in header.split(",") and len(row.split(",")) >= len(header.split(","))
        _, out, _ = run(capsys, ["test", "--x", pair[0], "--y", pair[1], "--format", "text"])
        assert "p-value:" in out

    def test_fixed_width(self, pair, capsys):
        _, out, _ = run(capsys, ["test", "--x", pair[0], "--y", pair[1], "--width-x", "2.5"])
        assert json.loads(out)["sigma2_x"] == 2.5

    def test_unpaired(self, tmp_path, rng, capsys):
        a = write_csv(tmp_path / "a.csv", rng.normal(size=(10, 2)))
        b = write_csv(tmp_path / "b.csv", rng.normal(size=(11, 2)))
        code, _, err = run(capsys, ["test", "--x", a, "--y", b])
        assert code == 2 and "paired" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, ["test", "--x", str(tmp_path / "nope.csv"), "--y", str(tmp_path / "nope.csv")])
        assert code == 2

    def test_constant_sample_is_degenerate(self, tmp_path, rng, capsys):
        a = write_csv(tmp_path / "a.csv", np.ones((10, 2)))
        b = write_csv(tmp_path / "b.csv", rng.normal(size=(10, 2)))
        code, _, err = run(capsys, ["test", "--x", a, "--y", b])
        assert code == 3 and err

    @pytest.mark.parametrize("extra", [["--bogus"], ["--alpha", "1.5"], ["--perms", "0"],
                                       ["--width-x", "-1"], ["--seed", "-3"]])
    def test_bad_flags_exit_two(self, pair, extra):
        with pytest.raises(SystemExit) as exc:
            main(["test", "--x", pair[0], "--y", pair[1], *extra])
        assert exc.value.code == 2

    def test_help_lists_every_flag(self):
        parser = build_parser()
        sub = parser._subparsers._group_actions[0].choices
        for name, p in sub.items():
            text = p.format_help()
            for action in p._actions:
                for opt in action.option_strings:
                    assert opt in text
                if action.option_strings and action.dest != "help":
                    assert action.help


class TestSimulateCommand:
    def spec(self, tmp_path, scenarios, **extra):
        p = tmp_path / "study.json"
        p.write_text(json.dumps({"scenarios": scenarios, **extra}))
        return str(p)

    def test_single_run(self, tmp_path, capsys):
        f = self.spec(tmp_path, [{"design": "sim2_null", "n": 10, "p": 3, "rho": 0.5}])
        code, out, _ = run(capsys, ["simulate", "--spec", f, "--runs", "1"])
        assert code == 0
        assert json.loads(out)["records"][0]["empirical_rate"] in (0.0, 1.0)

    def test_identical_scenarios_identical_rows(self, tmp_path, capsys):
        sc = {"design": "sim3", "f": "cube", "m": 2, "n": 15, "k": 21}
        f = self.spec(tmp_path, [sc, sc], methods=["new", "gamma"])
        code, out, _ = run(capsys, ["simulate", "--spec", f, "--runs", "20", "--format", "csv"])
        rows = out.strip().splitlines()[1:]
        assert code == 0 and len(rows) == 4
        assert rows[0] == rows[2] and rows[1] == rows[3]

    def test_thread_count_does_not_change_output(self, tmp_path, capsys):
        f = self.spec(tmp_path, [{"design": "sim2_null", "n": 15, "p": 4, "rho": 0.3}], runs=10)
        outs = {run(capsys, ["simulate", "--spec", f, "--threads", str(t)])[1] for t in (1, 2, 3)}
        assert len(outs) == 1

    def test_bad_spec(self, tmp_path, capsys):
        assert run(capsys, ["simulate", "--spec", self.spec(tmp_path, [{"design": "x"}])])[0] == 2
        p = tmp_path / "broken.json"
        p.write_text("{")
        assert run(capsys, ["simulate", "--spec", str(p)])[0] == 2
        assert run(capsys, ["simulate", "--spec", self.spec(tmp_path, [], extra=1)])[0] == 2

    @pytest.mark.slow
    def test_tabled_size(self, tmp_path, capsys):
        f = self.spec(tmp_path, [{"design": "sim2_null", "n": 100, "p": 100, "rho": 0.5}])
        code, out, _ = run(capsys, ["simulate", "--spec", f, "--runs", "2000"])
        rate = json.loads(out)["records"][0]["empirical_rate"]
        sd = np.sqrt(0.0549 * (1 - 0.0549) / 2000)
        assert code == 0 and abs(rate - 0.0549) <= 3 * sd


def test_module_entry_point(pair):
    proc = subprocess.run([sys.executable, "-m", "fasthsic", "test", "--x", pair[0], "--y", pair[1],
                           "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and "HSIC estimate" in proc.stdout
