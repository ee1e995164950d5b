import pytest

from mfgspectral.config import (
    ConfigError,
    ExperimentSettings,
    dumps_config,
    load_config,
    loads_config,
    parse_config,
)
from mfgspectral.hamiltonian import example_quartic
from mfgspectral.solver import delta_g_threshold

MINIMAL = """
[problem]
d = 1
m0.kind = dirac
m0.locations = 0.0

[hamiltonian]
name = example-quartic

[payoff]
kind = smoothing
delta_g = 0.05
"""

CUSTOM = """
[problem]
d = 2
T = 0.5
alpha = 0.25
m0.kind = dirac_sum
m0.locations = 0.0, 0.0; 1.0, 2.0
m0.weights = 0.25, 0.75

[hamiltonian]
name = mine
f1 = 2,0:1.0; 0,2:1.0
g1 = 0,0:1.0
f2 = 0,0:1.0
g2 = 1,0:2.0 | 0,1:2.0
f1.constants = 1, 2, 1, 1
g1.constants = 1, 0, 0, 0
f2.constants = 1, 0, 0, 0
g2.constants = 2, 1, 1, 0

[payoff]
kind = truncation
n = 1
delta_g = 0.001

[solver]
K = 4
N_t = 8
upsilon = plain

[experiment]
eps = 0.5, 0.25
protocols = density
trials = 150
"""


def test_minimal_config_gets_defaults():
    cfg, exp = loads_config(MINIMAL)
    assert (cfg.K, cfg.N_t, cfg.tol, cfg.max_iter) == (16, 128, 1e-10, 200)
    assert cfg.hamiltonian == example_quartic(1)
    assert exp == ExperimentSettings()


def test_custom_config_round_trips():
    cfg, exp = loads_config(CUSTOM)
    assert cfg.hamiltonian.name == "mine" and cfg.upsilon == "plain"
    assert exp.trials == 150 and exp.eps == (0.5, 0.25)
    again = loads_config(dumps_config(cfg, exp))
    assert again == (cfg, exp)


def test_density_config_round_trips():
    text = MINIMAL.replace("m0.kind = dirac\nm0.locations = 0.0", "m0.kind = band_limited_density\nm0.coefficients = 0:1; 1:0.3-0.1j; -1:0.3+0.1j")
    cfg, _ = loads_config(text)
    assert cfg.m0.coeff_table[(1,)] == 0.3 - 0.1j
    assert loads_config(dumps_config(cfg))[0] == cfg


def test_auto_payoff_scale():
    cfg, _ = loads_config(MINIMAL.replace("delta_g = 0.05", "delta_g = auto:0.5").replace("[payoff]", "[solver]\nK = 6\nN_t = 16\n\n[payoff]"))
    threshold = delta_g_threshold(cfg.with_delta_g(0.05))
    assert cfg.payoff.delta_g == pytest.approx(0.5 * threshold, rel=1e-8)


@pytest.mark.parametrize(
    "edit, message",
    [
        (("d = 1", "d = 1\ncolour = red"), "unknown key"),
        (("[payoff]", "[extra]\nx = 1\n[payoff]"), "unknown section"),
        (("delta_g = 0.05", ""), "missing required key payoff.delta_g"),
        (("[problem]", "[problem]\nalpha = 1.0"), "α∈\\[0,1\\)"),
        (("[problem]", "[problem]\nT = -1"), "T must be positive"),
        (("m0.locations = 0.0", "m0.locations = 0.0\nm0.weights = -1"), "weights must be strictly positive"),
        (("delta_g = 0.05", "delta_g = abc"), "expected float"),
        (("name = example-quartic", "name = example-quartic\nf1 = 2:1.0"), "takes no further keys"),
        (("d = 1", "d = 1\nd = 2"), "unparseable"),
    ],
)
def test_invalid_configs_are_rejected(edit, message):
    with pytest.raises(ConfigError, match=message):
        loads_config(MINIMAL.replace(*edit, 1))


def test_custom_hamiltonian_requires_all_polynomials():
    with pytest.raises(ConfigError, match="hamiltonian.g2"):
        loads_config(CUSTOM.replace("g2 = 1,0:2.0 | 0,1:2.0\n", ""))


def test_file_loading(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL)
    assert parse_config(path) == load_config(path)[0]
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.ini")
