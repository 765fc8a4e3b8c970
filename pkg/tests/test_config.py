import warnings
from pathlib import Path

import numpy as np
import pytest
import yaml

from relcavity.config import ConfigError, ConfigWarning, dump_config, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def base(**changes):
    data = {
        "geometry": {"L": 1.0, "h": 1e-4},
        "modes": [1, 2],
        "repetitions": 5,
        "trajectory": {"sample": {"tau": 0.25, "t": 0.4, "y": 1.0, "epsilon": 1}},
    }
    data.update(changes)
    return data


class TestLoad:
    def test_period_sweep_config_has_no_warnings(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            cfg = load_config(CONFIGS / "period_sweep.yaml")
        assert cfg.warnings == []
        assert cfg.geometry.h == 1e-4
        assert (cfg.modes.k, cfg.modes.kp, cfg.repetitions) == (1, 2, 5)
        assert cfg.sweep["tau"].values()[-1] == pytest.approx(2 / 3)
        assert len(cfg.sweep["t"].values()) == 64

    def test_segment_config(self):
        cfg = load_config(CONFIGS / "segments.yaml")
        assert cfg.trajectory().segments[2].h_signed == -1e-4

    def test_defaults_filled(self):
        cfg = parse_config(base())
        assert cfg.n_max == 40
        assert cfg.quad_tol == 1e-12
        assert cfg.workers == 1

    def test_walls_geometry(self):
        cfg = parse_config(base(geometry={"walls": [9999.5, 10000.5]}))
        assert cfg.geometry.h == pytest.approx(1e-4)

    def test_dump_round_trip(self):
        cfg = parse_config(base())
        again = parse_config(yaml.safe_load(dump_config(cfg)))
        assert again.physics_hash() == cfg.physics_hash()

    def test_hash_ignores_output_and_workers(self):
        a = parse_config(base(numerics={"workers": 1}, output={"dir": "a"}))
        b = parse_config(base(numerics={"workers": 8}, output={"dir": "b"}))
        c = parse_config(base(repetitions=6))
        assert a.physics_hash() == b.physics_hash() != c.physics_hash()


class TestRejections:
    def test_equal_modes_name_invariant(self):
        with pytest.raises(ConfigError, match="mode pair invariant"):
            parse_config(base(modes=[2, 2]))

    @pytest.mark.parametrize("where, data", [
        ("top level", base(extra=1)),
        ("geometry", base(geometry={"L": 1.0, "hh": 1e-4})),
        ("sample", base(trajectory={"sample": {"tau": 0.1, "tt": 0.2}})),
        ("numerics", base(numerics={"nmax": 40})),
    ])
    def test_unknown_keys(self, where, data):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(data)

    @pytest.mark.parametrize("data", [
        base(geometry={"L": -1.0, "h": 1e-4}),
        base(geometry={"L": 1.0, "h": 2.5}),
        base(geometry={"walls": [1.0, 2.0], "L": 1.0}),
        base(modes=[1]),
        base(modes=[0, 2]),
        base(repetitions=0),
        base(repetitions=1.5),
        base(trajectory={}),
        base(trajectory={"sample": {"tau": 0.1, "t": 0.1, "epsilon": 2}}),
        base(trajectory={"segments": [{"kind": "glide", "duration": 1.0}]}),
        base(trajectory={"segments": []}),
        base(numerics={"n_max": 3}),
        base(numerics={"quad_tol": 0}),
        base(sweep={"tau": {"start": 0.5, "stop": 0.1, "num": 4}}),
        base(sweep={"tau": {"start": 0.0, "num": 4}}),
        base(output={"heatmap": "yes"}),
        base(geometry={"L": "one"}),
    ])
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_large_h_warns(self):
        with pytest.warns(ConfigWarning, match="perturbative validity"):
            cfg = parse_config(base(geometry={"L": 1.0, "h": 0.5}))
        assert cfg.geometry.h == 0.5

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("geometry: {L: 1.0\nmodes: [1, 2]\n")
        with pytest.raises(ConfigError, match="line"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nope.yaml")


def test_axis_inclusive():
    cfg = parse_config(base(sweep={"t": {"start": 0.0, "stop": 1.0, "num": 5}}))
    np.testing.assert_allclose(cfg.sweep["t"].values(), [0, 0.25, 0.5, 0.75, 1.0])
