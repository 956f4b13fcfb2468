"""CLI tests: spec validation, exit-code contract, CSV schema, determinism."""

import json
import math

import numpy as np

from ellipcf import cli
from ellipcf import elliptical


def write_spec(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def normal_spec(n=2, mu=None, sigma=None):
    return {
        "schema": 1,
        "kind": "elliptical",
        "n": n,
        "mu": mu or [0.0] * n,
        "sigma": sigma or [float(i == j) for i in range(n) for j in range(n)],
        "generator": {"family": "normal"},
    }


def parse_result_csv(text):
    """Reference parser: '#' comments, one header, float cells with a
    trailing method column when present."""
    comments, header, rows = [], None, []
    for line in text.splitlines():
        if line.startswith("#"):
            comments.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return comments, header, rows


class TestEval:
    def test_unit_at_origin(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[0.0,0.0]]}'])
        assert rc == 0
        comments, header, rows = parse_result_csv(capsys.readouterr().out)
        assert header == ["t1", "t2", "re", "im", "abs_err", "method"]
        assert float(rows[0][2]) == 1.0 and float(rows[0][3]) == 0.0

    def test_cauchy_value(self, tmp_path, capsys):
        obj = normal_spec()
        obj["generator"] = {"family": "generalized_t", "params": {"s": 1.0, "m": 1}}
        spec = write_spec(tmp_path, "c.json", obj)
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[2.0,0.0]]}'])
        assert rc == 0
        _, _, rows = parse_result_csv(capsys.readouterr().out)
        assert abs(float(rows[0][2]) - math.exp(-2.0)) < 1e-12
        assert float(rows[0][3]) == 0.0

    def test_asymmetric_sigma_exit_2(self, tmp_path, capsys):
        obj = normal_spec(sigma=[1.0, 0.5, 0.0, 1.0])
        spec = write_spec(tmp_path, "bad.json", obj)
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[1.0,0.0]]}'])
        assert rc == 2
        assert "sigma" in capsys.readouterr().err

    def test_unknown_field_exit_2(self, tmp_path, capsys):
        obj = normal_spec()
        obj["sigma_scale"] = 2.0
        spec = write_spec(tmp_path, "u.json", obj)
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[1.0,0.0]]}'])
        assert rc == 2
        assert "sigma_scale" in capsys.readouterr().err

    def test_unknown_generator_param_exit_2(self, tmp_path, capsys):
        obj = normal_spec()
        obj["generator"] = {"family": "kotz", "params": {"N": 1.0, "r": 0.5, "s": 1.0, "q": 3}}
        spec = write_spec(tmp_path, "k.json", obj)
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[1.0,0.0]]}'])
        assert rc == 2
        assert "params.q" in capsys.readouterr().err

    def test_missing_schema_version(self, tmp_path, capsys):
        obj = normal_spec()
        del obj["schema"]
        spec = write_spec(tmp_path, "s.json", obj)
        rc = cli.main(["eval", "--spec", spec, "--grid", '{"kind":"list","points":[[1.0,0.0]]}'])
        assert rc == 2
        assert "schema" in capsys.readouterr().err

    def test_axis_grid(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        grid = '{"kind":"axis","index":1,"start":0.0,"stop":2.0,"num":5}'
        rc = cli.main(["eval", "--spec", spec, "--grid", grid])
        assert rc == 0
        _, _, rows = parse_result_csv(capsys.readouterr().out)
        assert len(rows) == 5
        assert float(rows[-1][1]) == 2.0
        assert abs(float(rows[-1][2]) - math.exp(-2.0)) < 1e-12

    def test_grid_from_file(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        gridfile = tmp_path / "grid.json"
        gridfile.write_text('{"kind":"list","points":[[1.0,0.0]]}')
        rc = cli.main(["eval", "--spec", spec, "--grid", f"@{gridfile}"])
        assert rc == 0

    def test_hankel_unavailable_for_skew_normal(self, tmp_path, capsys):
        obj = {
            "schema": 1, "kind": "skew_normal", "n": 1,
            "mu": [0.0], "sigma": [1.0], "alpha": [2.0],
        }
        spec = write_spec(tmp_path, "sn.json", obj)
        rc = cli.main([
            "eval", "--spec", spec, "--routes", "hankel",
            "--grid", '{"kind":"list","points":[[1.0]]}',
        ])
        assert rc == 2

    def test_mc_count_floor(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "eval", "--spec", spec, "--routes", "mc", "--mc-count", "100",
            "--grid", '{"kind":"list","points":[[1.0,0.0]]}',
        ])
        assert rc == 2
        assert "mc_count" in capsys.readouterr().err

    def test_numeric_failure_exit_3_names_grid_point(self, tmp_path, capsys, monkeypatch):
        from ellipcf import quadrature
        from ellipcf.errors import ConvergenceError

        def broken(gen, n, u, ctl=None):
            raise ConvergenceError("synthetic quadrature breakdown")

        monkeypatch.setattr(elliptical, "phi_hankel", broken)
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "eval", "--spec", spec, "--routes", "hankel",
            "--grid", '{"kind":"list","points":[[1.5,0.0]]}',
        ])
        assert rc == 3
        err = capsys.readouterr().err
        assert "1.5" in err and "numeric failure" in err

    def test_closed_unavailable_exit_2(self, tmp_path, capsys):
        obj = normal_spec()
        obj["generator"] = {"family": "kotz", "params": {"N": 2.0, "r": 0.5, "s": 0.75}}
        spec = write_spec(tmp_path, "k.json", obj)
        rc = cli.main([
            "eval", "--spec", spec, "--routes", "closed",
            "--grid", '{"kind":"list","points":[[1.0,0.0]]}',
        ])
        assert rc == 2


class TestCompare:
    def test_closed_vs_hankel_normal(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "closed,hankel",
            "--grid", '{"kind":"axis","index":0,"start":0.1,"stop":5.0,"num":8}',
        ])
        assert rc == 0
        comments, header, rows = parse_result_csv(capsys.readouterr().out)
        assert any("summary closed-hankel" in c for c in comments)
        assert header[-1] == "dev_closed_hankel"

    def test_closed_vs_mc_within_band(self, tmp_path, capsys):
        obj = normal_spec()
        obj["generator"] = {"family": "pearson_ii", "params": {"m": 1.0}}
        spec = write_spec(tmp_path, "p.json", obj)
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "closed,mc",
            "--mc-count", "200000", "--seed", "11",
            "--grid", '{"kind":"list","points":[[0.5,0.0],[1.0,0.5],[2.0,0.0]]}',
        ])
        assert rc == 0

    def test_needs_two_routes(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "closed",
            "--grid", '{"kind":"list","points":[[1.0,0.0]]}',
        ])
        assert rc == 2

    def test_corrupted_closed_form_exit_4(self, tmp_path, capsys, monkeypatch):
        # corrupt the closed form: the triangulation must catch it
        real = elliptical.closed_form_generator

        def corrupted(gen, n, q):
            return real(gen, n, q) + 1e-3

        monkeypatch.setattr(elliptical, "closed_form_generator", corrupted)
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "closed,hankel",
            "--grid", '{"kind":"list","points":[[1.0,0.0]]}',
        ])
        assert rc == 4
        assert "tolerance exceedance" in capsys.readouterr().err

    def test_tolerance_override(self, tmp_path, capsys):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "closed,hankel",
            "--tol", "closed-hankel=1e-16",
            "--grid", '{"kind":"list","points":[[1.0,0.0]]}',
        ])
        assert rc == 4  # machine-level deviations exceed an impossible bar

    def test_smu_kind_triangulates(self, tmp_path, capsys):
        obj = {
            "schema": 1, "kind": "smu", "n": 2,
            "mu": [0.0, 0.0], "sigma": [1.0, 0.0, 0.0, 1.0],
            "generator": {"family": "kotz", "params": {"N": 1.0, "r": 0.5, "s": 0.75}},
        }
        spec = write_spec(tmp_path, "smu.json", obj)
        rc = cli.main([
            "compare", "--spec", spec, "--routes", "hankel,mc",
            "--mc-count", "200000", "--seed", "3",
            "--grid", '{"kind":"list","points":[[0.5,0.0],[1.5,0.0]]}',
        ])
        assert rc == 0


class TestSample:
    def test_deterministic_bytes(self, tmp_path):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["sample", "--spec", spec, "--count", "5000", "--seed", "5",
                         "--out", str(out1)]) == 0
        assert cli.main(["sample", "--spec", spec, "--count", "5000", "--seed", "5",
                         "--workers", "8", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_ball_norms(self, tmp_path):
        obj = normal_spec()
        obj["generator"] = {"family": "uniform_ball"}
        spec = write_spec(tmp_path, "b.json", obj)
        out = tmp_path / "ball.csv"
        assert cli.main(["sample", "--spec", spec, "--count", "2000", "--seed", "1",
                         "--out", str(out)]) == 0
        comments, header, rows = parse_result_csv(out.read_text())
        data = np.array([[float(v) for v in row] for row in rows])
        assert np.linalg.norm(data, axis=1).max() <= 1.0
        assert any("spec_sha256=" in c for c in comments)

    def test_skew_normal_positive_skew(self, tmp_path):
        obj = {
            "schema": 1, "kind": "skew_normal", "n": 1,
            "mu": [0.0], "sigma": [1.0], "alpha": [5.0],
        }
        spec = write_spec(tmp_path, "sn.json", obj)
        out = tmp_path / "sn.csv"
        assert cli.main(["sample", "--spec", spec, "--count", "50000", "--seed", "2",
                         "--out", str(out)]) == 0
        _, _, rows = parse_result_csv(out.read_text())
        x = np.array([float(r[0]) for r in rows])
        assert ((x - x.mean()) ** 3).mean() / x.std() ** 3 > 0.5

    def test_rank_deficient_unsamplable_exit_2(self, tmp_path, capsys):
        obj = normal_spec(sigma=[1.0, 0.0, 0.0, 0.0])
        spec = write_spec(tmp_path, "r.json", obj)
        rc = cli.main(["sample", "--spec", spec, "--count", "1000", "--seed", "1"])
        assert rc == 2

    def test_lsm_and_smsn_kinds_sample(self, tmp_path):
        lsm = {
            "schema": 1, "kind": "lsm", "n": 2,
            "mu": [0.0, 0.0], "gamma": [1.0, 0.0],
            "sigma": [1.0, 0.0, 0.0, 1.0],
            "generator": {"family": "normal"},
            "mixing": {"kind": "finite_discrete", "points": [0.5, 2.0], "weights": [0.5, 0.5]},
        }
        smsn = {
            "schema": 1, "kind": "smsn", "n": 1,
            "mu": [0.0], "sigma": [1.0], "alpha": [2.0],
            "mixing": {"kind": "inverse_gamma", "shape": 2.5, "scale": 2.5},
        }
        for name, obj in (("lsm.json", lsm), ("smsn.json", smsn)):
            spec = write_spec(tmp_path, name, obj)
            out = tmp_path / (name + ".csv")
            assert cli.main(["sample", "--spec", spec, "--count", "2000", "--seed", "4",
                             "--out", str(out)]) == 0


class TestCompareDeterminism:
    def test_compare_bytes_stable_across_workers(self, tmp_path):
        spec = write_spec(tmp_path, "n.json", normal_spec())
        outs = []
        for w, name in ((1, "w1.csv"), (8, "w8.csv")):
            out = tmp_path / name
            rc = cli.main([
                "compare", "--spec", spec, "--routes", "closed,hankel,mc",
                "--mc-count", "100000", "--seed", "17", "--workers", str(w),
                "--grid", '{"kind":"axis","index":0,"start":0.2,"stop":2.0,"num":6}',
                "--out", str(out),
            ])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
