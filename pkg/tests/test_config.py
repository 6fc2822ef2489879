import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import rationals
from g2forge import config, family
from g2forge.exterior import KForm, blades


def test_parse_scalar():
    assert config.parse_scalar("3/8") == Fraction(3, 8)
    assert config.parse_scalar("4/2") == 2 and isinstance(config.parse_scalar("4/2"), int)
    assert config.parse_scalar(5) == 5
    assert config.parse_scalar(0.25) == 0.25 and isinstance(config.parse_scalar(0.25), float)
    assert config.parse_scalar("0.25") == Fraction(1, 4)
    assert config.parse_scalar("sqrt(15)/8") == pytest.approx(15**0.5 / 8)
    assert config.parse_scalar("-sqrt(2)") == pytest.approx(-(2**0.5))
    assert config.parse_scalar("3/8", config.FLOAT) == 0.375
    for bad in ("x", "1/0", True, None, [1]):
        with pytest.raises(config.ConfigError):
            config.parse_scalar(bad)


def test_format_scalar():
    assert config.format_scalar(Fraction(-11, 8)) == "-11/8"
    assert config.format_scalar(Fraction(4, 2)) == "2"
    assert config.format_scalar(0.5) == "0.5"


forms = st.integers(0, 7).flatmap(
    lambda k: st.dictionaries(st.sampled_from(blades(k)), rationals | st.floats(-10, 10),
                              max_size=6).map(lambda d: KForm(k, d)))


@given(forms)
def test_form_json_roundtrip(a):
    text = json.dumps(config.form_to_json(a))
    assert config.form_from_json(json.loads(text)) == a


def test_form_from_json_errors():
    with pytest.raises(config.ConfigError):
        config.form_from_json({"degree": 2, "coeffs": {"123": "1"}})
    with pytest.raises(config.ConfigError):
        config.form_from_json({"coeffs": {}})


def test_builtin_shorthand():
    inst = config.parse_builtin("gs:1/4")
    assert inst.spec == family.gs(Fraction(1, 4))
    assert config.parse_builtin("sa:0.75").spec == family.sa(Fraction(3, 4))
    assert config.parse_builtin("fr").spec == family.fr()
    assert not config.parse_builtin("gs:0.25", config.FLOAT).spec.is_exact()
    for bad in ("gs", "xx:1", "gs:abc"):
        with pytest.raises(config.ConfigError):
            config.parse_builtin(bad)


def test_family_config():
    spec = family.gs(Fraction(1, 4))
    obj = {"kind": "family", "A1": config.matrix_to_json(spec.A1), "A": config.matrix_to_json(spec.A),
           "B": config.matrix_to_json(spec.B), "C": config.matrix_to_json(spec.C)}
    assert config.load_config(obj).algebra == spec.algebra
    obj["B"] = [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    with pytest.raises(config.DomainError):
        config.load_config(obj)
    del obj["C"]
    with pytest.raises(config.ConfigError):
        config.load_config(obj)
    with pytest.raises(config.ConfigError):
        config.load_config({"kind": "family", "A1": [[0]], "A": [], "B": [], "C": []})


def test_structure_constants_config():
    inst = config.load_config({"kind": "structure-constants", "c": [[1, 2, 3, "1/2"]]})
    assert inst.algebra.bracket(1, 2) == {3: Fraction(1, 2)} and inst.spec is None
    with pytest.raises(config.DomainError):
        config.load_config({"kind": "structure-constants", "c": [[1, 2, 3, 1], [3, 4, 5, 1]]})
    with pytest.raises(config.ConfigError):
        config.load_config({"kind": "structure-constants", "c": [[1, 2, 3]]})
    with pytest.raises(config.ConfigError):
        config.load_config({"kind": "structure-constants", "c": [[1, 9, 3, 1]]})


def test_builtin_config_and_errors():
    assert config.load_config({"kind": "builtin", "name": "sa", "param": "1/2"}).spec == family.sa(Fraction(1, 2))
    assert config.load_config({"kind": "builtin", "name": "fr"}).spec == family.fr()
    for bad in ({"kind": "builtin"}, {"kind": "builtin", "name": "gs"}, {"kind": "nope"}, [], {}):
        with pytest.raises(config.ConfigError):
            config.load_config(bad)


def test_resolve_instance(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"kind": "builtin", "name": "gs", "param": "0"}))
    assert config.resolve_instance(str(path)).spec == family.gs(0)
    assert config.resolve_instance('{"kind": "builtin", "name": "fr"}').spec == family.fr()
    assert config.resolve_instance("sa:1").spec == family.sa(1)
    with pytest.raises(config.ConfigError):
        config.resolve_instance(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(config.ConfigError):
        config.resolve_instance(str(bad))


def test_dumps_is_deterministic():
    assert config.dumps({"b": 1, "a": [2]}) == config.dumps({"a": [2], "b": 1})
