import json
import math

import numpy as np
import pytest
from PIL import Image

from padic_nagumo.cli import (
    PANELS,
    HeatMap,
    RunConfig,
    export_csv,
    export_json,
    export_png,
    heatmap_from,
    main,
    parse_config,
    read_csv,
)
from padic_nagumo.errors import ConfigError
from padic_nagumo.solver import Trajectory

LEFT_TEXT = """
# diffusion only
p = 3
alpha = 0.2
gamma = 1
beta = 0
pd_terms =
reaction = false
initial = gauss:4:100
j_min = -20
j_max = 20
"""

RIGHT_TEXT = """
p = 3
alpha = 0.2
gamma = 1
beta = 0.7
m = 3
pd_terms = 1:0.1
initial = gauss:4:100
"""

SMALL = """
p = 3
gamma = 1
alpha = 0.2
beta = 0.7
pd_terms = 1:0.1
initial = gauss:4:100
j_min = -4
j_max = 4
tail_depth = 10
dt = 0.001
t_end = 0.01
"""


class TestParse:
    def test_left(self):
        cfg = parse_config(LEFT_TEXT)
        assert (cfg.p, cfg.alpha, cfg.gamma, cfg.beta, cfg.reaction) == (3, 0.2, 1.0, 0.0, False)
        assert cfg.pd_terms == () and (cfg.j_min, cfg.j_max) == (-20, 20)
        f0 = cfg.initial_field()
        assert f0.value_on_shell(0) == pytest.approx(4 * math.exp(-0.01))

    def test_right(self):
        cfg = parse_config(RIGHT_TEXT)
        assert cfg.pd_terms == ((1.0, 0.1),) and cfg.m == 3 and cfg.beta == 0.7
        assert cfg.model_params().delta == 0.1

    def test_ball_initial(self):
        cfg = parse_config("p=5\ngamma=1\nalpha=1\ninitial=ball:-2\nj_min=-3\nj_max=3\n")
        f0 = cfg.initial_field()
        assert f0.value_on_shell(-2) == 1.0 and f0.value_on_shell(-1) == 0.0

    @pytest.mark.parametrize(
        "text,needle",
        [
            ("p=3\ngamma=1\nalpha = -1\ninitial=gauss:4:100\n", "line 3"),
            ("p=3\ngamma=1\nalpha=1\ninitial=gauss:4:100\ncolour=red\n", "line 5"),
            ("p=3\ngamma=1\nalpha=1\nalpha=2\ninitial=gauss:4:100\n", "line 4"),
            ("p=3\ngamma=1\nalpha=abc\ninitial=gauss:4:100\n", "line 3"),
            ("p=3\ngamma=1\nalpha=1\ninitial=wave:1\n", "line 4"),
            ("p=3\ngamma=1\nalpha=1\n", "initial"),
            ("p=4\ngamma=1\nalpha=1\ninitial=gauss:4:100\n", "line 1"),
            ("p=3\ngamma=1\nalpha=1\ninitial=gauss:4:100\nmethod=rk4\n", "line 5"),
            ("p=3\ngamma=1\nalpha=1\ninitial=gauss:4:100\njust text\n", "line 5"),
            ("p=3\ngamma=1\nalpha=1\ninitial=gauss:4:100\ndt=0\n", "line 5"),
        ],
    )
    def test_errors_name_line(self, text, needle):
        with pytest.raises(ConfigError, match=needle):
            parse_config(text)

    def test_round_trip(self):
        for text in (LEFT_TEXT, RIGHT_TEXT):
            once = parse_config(text).serialize()
            assert parse_config(once).serialize() == once
            assert parse_config(once) == parse_config(text)

    def test_panel_presets_validate(self):
        for cfg in PANELS.values():
            assert parse_config(cfg.serialize()) == cfg


def make_traj(n_frames=4, window=(-2, 2)):
    from padic_nagumo.radial import RadialField

    frames = [RadialField.from_values(3, window[0], np.arange(window[1] - window[0] + 1) * (k + 1.0) / 7)
              for k in range(n_frames)]
    t = np.arange(n_frames) * 0.1
    z = np.linspace(1, 2, n_frames)
    return Trajectory(t, frames, z, z, z, z, np.full(n_frames, np.nan), blowup=None, error_budget=1e-9)


class TestExport:
    def test_heatmap_axes(self):
        hm = heatmap_from(make_traj(), -2, 2)
        assert list(hm.ord_axis) == [-2, -1, 0, 1, 2]
        np.testing.assert_allclose(hm.time_axis, [0.1, 0.2, 0.3])
        # row ord = 2 is shell j = -2, the inner ball
        assert hm.values[-1, 0] == make_traj().snapshots[1].ball_value

    def test_heatmap_shape_check(self):
        with pytest.raises(ValueError):
            HeatMap([0, 1], [0.0], np.zeros((3, 1)))

    def test_csv_shape_and_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        hm = HeatMap(np.arange(-20, 21), np.arange(1, 301) * 0.01, rng.normal(size=(41, 300)) * 10.0 ** rng.integers(-30, 30, (41, 300)))
        path = tmp_path / "h.csv"
        export_csv(hm, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 42
        assert all(len(line.split(",")) == 301 for line in lines)
        assert lines[0].startswith("ord,t=0.01,t=0.02,")
        back = read_csv(path)
        assert np.array_equal(back.values, hm.values)
        assert np.array_equal(back.time_axis, hm.time_axis)
        assert np.array_equal(back.ord_axis, hm.ord_axis)

    def test_png_zero_is_black(self, tmp_path):
        path = tmp_path / "z.png"
        export_png(HeatMap([0, 1], [0.1, 0.2, 0.3], np.zeros((2, 3))), path, scale=4)
        img = Image.open(path)
        assert img.mode == "L" and img.size == (12, 8)
        assert np.asarray(img).max() == 0

    def test_png_orientation_and_saturation(self, tmp_path):
        vals = np.array([[0.0, 1.0], [2.0, 1e9]])
        path = tmp_path / "s.png"
        export_png(HeatMap([-1, 0], [0.1, 0.2], vals), path, threshold=4.0, scale=1)
        px = np.asarray(Image.open(path))
        np.testing.assert_array_equal(px, [[0, 64], [128, 255]])

    def test_json(self, tmp_path):
        tr = make_traj()
        tr.blowup = (0.25, 0.2500001)
        path = tmp_path / "s.json"
        export_json(tr, None, path, {"p": 3})
        data = json.loads(path.read_text())
        assert data["G_value"] == [None] * 4
        assert data["blowup"] == {"t_lo": 0.25, "t_hi": 0.2500001}
        assert data["sup_norm"] == list(tr.sup_norm)
        assert data["existence_estimate"] is None and data["params"] == {"p": 3}
        for key in ("times", "sup_norm", "l2_norm", "hs_norm", "mass", "G_value", "blowup", "error_budget"):
            assert key in data


class TestMain:
    def test_simulate(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(SMALL)
        out = tmp_path / "out"
        assert main(["simulate", str(cfg), "--out", str(out)]) == 0
        assert {p.name for p in out.iterdir()} == {"heatmap.csv", "heatmap.png", "summary.json"}
        data = json.loads((out / "summary.json").read_text())
        assert len(data["times"]) == 11 and data["blowup"] is None
        assert data["params"]["pd_terms"] == [[1.0, 0.1]]
        assert "modulus" in data["ode_blowup"]
        hm = read_csv(out / "heatmap.csv")
        assert hm.values.shape == (9, 10)

    def test_missing_file(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "nope.cfg")]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("p=3\ngamma=1\nalpha=-1\ninitial=gauss:4:100\n")
        assert main(["simulate", str(cfg)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_unwritable_out(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(SMALL)
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["simulate", str(cfg), "--out", str(blocker / "sub")]) == 2

    def test_estimate(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(SMALL)
        assert main(["estimate-existence", str(cfg), "--M", "2"]) == 0
        out = capsys.readouterr().out
        assert "T = " in out and "contraction_constant" in out

    def test_check_invariants(self, capsys):
        assert main(["check-invariants", "--seed", "3", "--fraction", "0.02"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 10 and all(line.startswith("PASS") for line in lines)

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])
