import math

import pytest

from kolmodamp.config import PRESETS, parse, preset, serialize
from kolmodamp.errors import ConfigError

MINIMAL = """
[grid]
n = 16
box_len = 16.0
[model]
nu = 1.0
ell0 = 1.0
dt = 0.5
t_end = 10.0
[force]
ell = 2.0
[averaging]
burn_in = 2000
window = 100
"""


class TestParse:
    def test_defaults(self):
        cfg = parse(MINIMAL)
        assert cfg.mode == "damped-default"
        assert cfg.model.alpha == 1.0
        assert cfg.model.kappa == pytest.approx(0.05)
        assert cfg.force.amplitude == 1.0
        assert cfg.initial.kind == "zero"

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_round_trip(self, name):
        cfg = parse(preset(name))
        text = serialize(cfg)
        again = parse(text)
        assert again == cfg
        assert serialize(again) == text
        assert again.digest() == cfg.digest()

    def test_layering_over_preset(self):
        cfg = parse("[model]\nt_end = 10.0\n", base=preset("smoke"))
        assert cfg.model.t_end == 10.0
        assert cfg.grid.n == 16

    def test_float_repr_exact(self):
        cfg = parse(MINIMAL.replace("dt = 0.5", "dt = 0.1"))
        assert "dt = 0.1\n" in serialize(cfg)
        assert parse(serialize(cfg)).model.dt == 0.1

    def test_with_ell(self):
        cfg = parse(preset("sweep"))
        assert cfg.sweep == (3.0, 6.0, 12.0, 24.0)
        sub = cfg.with_ell(12.0)
        assert sub.force.ell == 12.0 and sub.sweep == ()


class TestRejects:
    """Every invalid input names the offending field."""

    @pytest.mark.parametrize(
        "patch,field",
        [
            ("[model]\nalpha = 2.0\n", "model.alpha"),
            ("[grid]\nwidth = 3\n", "grid.width"),
            ("[bogus]\nx = 1\n", "bogus"),
            ("[run]\nmode = turbulent\n", "run.mode"),
            ("[force]\nell = 3.0\n", "force.ell"),
            ("[averaging]\nburn_in = 10\n", "averaging.burn_in"),
            ("[model]\ndelta = 0.1\n", "model.delta"),
        ],
    )
    def test_field_named(self, patch, field):
        with pytest.raises(ConfigError) as ei:
            parse(patch, base=MINIMAL)
        assert ei.value.field == field
        assert str(ei.value).startswith(field)

    def test_custom_needs_alpha_kappa(self):
        with pytest.raises(ConfigError):
            parse("[run]\nmode = damped-custom\n", base=MINIMAL)

    def test_classical_alpha_zero(self):
        with pytest.raises(ConfigError):
            parse("[run]\nmode = classical\n[model]\nalpha = 1.0\n", base=MINIMAL)
        cfg = parse("[run]\nmode = classical\n", base=MINIMAL)
        assert cfg.model.alpha == 0.0 and cfg.model.beta == 0.0

    def test_mollified_needs_delta(self):
        with pytest.raises(ConfigError):
            parse("[run]\nmode = mollified\n", base=MINIMAL)
        cfg = parse("[run]\nmode = mollified\n[model]\ndelta = 0.2\n", base=MINIMAL)
        assert cfg.model.delta == 0.2

    def test_bad_number(self):
        with pytest.raises(ConfigError) as ei:
            parse("[model]\nnu = fast\n", base=MINIMAL)
        assert ei.value.field == "model.nu"

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset("laptop")

    def test_sweep_points_must_tile(self):
        with pytest.raises(ConfigError):
            parse("[sweep]\nells = 5 6 12 24\n", base=preset("sweep"))


def test_desk_horizon_covers_twenty_decay_times():
    cfg = parse(preset("desk"))
    assert cfg.model.t_end >= 20 / cfg.model.beta * (1 - 1e-12)
    assert math.isclose(cfg.grid.box_len, 32 * cfg.model.theta * cfg.model.ell0)
