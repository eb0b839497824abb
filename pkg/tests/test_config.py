import json

import pytest

from epsn.config import Tolerance, load_config, parse_config
from epsn.errors import ConfigError


def _exp(**kw):
    e = {"name": "a", "kind": "complexity", "system": {"kind": "doubling"}, "eps": [0.1], "n": [1, 2]}
    e.update(kw)
    return e


def _cfg(*exps, **kw):
    c = {"schema": 1, "seed": 7, "experiments": list(exps)}
    c.update(kw)
    return c


def test_minimal_config():
    cfg = parse_config(_cfg(_exp()))
    (e,) = cfg.experiments
    assert e.seed == 7 and e.n == (1, 2) and e.eps == (0.1,)
    assert e.resolution == 2000 and e.tolerances == {}


def test_n_range_and_overrides():
    e = parse_config(_cfg(_exp(n={"start": 2, "stop": 10, "step": 4}, seed=3,
                               tolerances={"q_last": {"tol": 0.04}}))).experiments[0]
    assert e.n == (2, 6, 10) and e.seed == 3
    assert e.tolerances["q_last"] == Tolerance(0.04)


def test_tolerance_semantics():
    assert Tolerance(0.05).passes(0.05) and not Tolerance(0.05).passes(0.051)
    assert Tolerance(0.1, target=1.0).passes(1.09)
    assert Tolerance(0.01, target=2.0, relative=True).passes(2.019)
    assert not Tolerance(0.01, target=2.0, relative=True).passes(2.03)


@pytest.mark.parametrize("data,path", [
    (_cfg(_exp(eps=[0.0])), "$.experiments[0].eps[0]"),
    (_cfg(_exp(eps=[1.5])), "$.experiments[0].eps[0]"),
    (_cfg(_exp(bogus=1)), "$.experiments[0]"),
    (_cfg(_exp(), extra=True), "$"),
    (_cfg(_exp(kind="plot")), "$.experiments[0].kind"),
    (_cfg(_exp(resolution=0)), "$.experiments[0].resolution"),
    (_cfg(_exp(n={"start": 5, "stop": 2})), "$.experiments[0].n"),
    (_cfg(_exp(system={"kind": "iet", "a": [0, 0.4, 1], "c": [0.6, -0.3]})),
     "$.experiments[0].system"),
    (_cfg(_exp(), _exp()), "$.experiments[1].name"),
    (_cfg(_exp(name="verify")), "$.experiments[0].name"),
    (_cfg(_exp(name="../x")), "$.experiments[0].name"),
    ({"schema": 2, "seed": 1, "experiments": []}, "$.schema"),
    ({"schema": 1, "experiments": []}, "$"),
])
def test_config_errors_carry_a_field_path(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_cfg()))
    assert load_config(good).experiments == ()
