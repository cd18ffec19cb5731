import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drivenpair.config import (
    ConfigError,
    build_config,
    format_complex,
    parse_complex,
    parse_text,
    read_flat,
)
from drivenpair.hilbert import PRESETS, AtomicPreparation

BASE = {"mode": "analytic", "params.g_over_k": "0.5", "prep": "gg"}


def cfg(**kw):
    flat = dict(BASE)
    flat.update({k.replace("__", "."): v for k, v in kw.items()})
    return build_config(flat)


def test_parse_text_comments_and_errors():
    flat = parse_text("# header\nmode = analytic  # trailing\n\nparams.g = 1\n")
    assert flat == {"mode": "analytic", "params.g": "1"}
    with pytest.raises(ConfigError, match=":2:"):
        parse_text("mode = analytic\nnonsense\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError, match="empty key"):
        parse_text(" = 3\n")


def test_complex_forms():
    assert parse_complex("0.6+0.8j") == 0.6 + 0.8j
    assert parse_complex("1@0") == 1
    assert parse_complex(" 2 @ 1.5707963267948966") == pytest.approx(2j, abs=1e-15)
    with pytest.raises(ValueError):
        parse_complex("abc")


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_complex_round_trip(z):
    assert parse_complex(format_complex(z)) == z


@pytest.mark.parametrize("label", PRESETS)
def test_presets(label):
    c = cfg(prep=label)
    assert np.array_equal(c.prep.c, AtomicPreparation.preset(label).c)


def test_invalid_prep_names_presets():
    with pytest.raises(ConfigError) as exc:
        cfg(prep="bell")
    for name in PRESETS:
        assert name in str(exc.value)


def test_explicit_coefficients():
    flat = {k: v for k, v in BASE.items() if k != "prep"}
    flat.update({"prep.c1": "0.6", "prep.c3": "0.8@0.5"})
    c = build_config(flat)
    assert c.prep.c[2] == pytest.approx(cmath.rect(0.8, 0.5))
    flat["prep.c3"] = "0.9"
    with pytest.raises(ConfigError, match="normalized"):
        build_config(flat)
    flat["prep"] = "gg"
    with pytest.raises(ConfigError, match="either"):
        build_config(flat)


def test_parameter_styles():
    assert cfg().params.g / cfg().params.k == 0.5
    p = build_config({"mode": "mcwf", "prep": "phi-", "params.omega_tilde": "20", "params.k_tilde": "1"}).params
    assert (p.g, p.k, p.omega_drive, p.gamma) == (1.0, 1.0, 20.0, 0.0)
    with pytest.raises(ConfigError, match="mix"):
        cfg(params__g="1", params__k="2")
    with pytest.raises(ConfigError, match="missing model"):
        build_config({"mode": "analytic", "prep": "gg"})
    with pytest.raises(ConfigError, match="invalid parameters"):
        cfg(params__g_over_k="-1")


@pytest.mark.parametrize("key,value,msg", [
    ("mode", "plot", "mode"),
    ("time.t_end", "0", "strictly increasing"),
    ("time.n_points", "1", "strictly increasing"),
    ("time.n_points", "2.5", "int"),
    ("time.unit", "s", "kt or gt"),
    ("outputs", "purity_whole, bogus", "bogus"),
    ("oracle.generator", "exact", "generator"),
    ("wigner.outcome", "xx", "outcome"),
    ("n_max", "1", "n_max"),
    ("colour", "red", "unknown keys"),
])
def test_schema_errors(key, value, msg):
    with pytest.raises(ConfigError, match=msg):
        cfg(**{key.replace(".", "__"): value})


def test_default_outputs_and_time_grid():
    c = cfg(time__t_end="4", time__n_points="5")
    assert c.outputs == ("purity_whole", "purity_field", "purity_atoms", "mean_photon_number", "P_e")
    assert np.allclose(c.times * c.params.k, [0, 1, 2, 3, 4])
    g = cfg(time__unit="gt", time__t_end="4", time__n_points="5")
    assert np.allclose(g.times * g.params.g, [0, 1, 2, 3, 4])


def test_flat_round_trip():
    flat = dict(BASE, **{"outputs": "P_ee, eof", "n_max": "12", "compare.tol": "1e-7"})
    flat.pop("prep")
    flat.update({"prep.c1": "0.6", "prep.c4": "0.8j", "prep.label": "mixed"})
    c = build_config(flat)
    again = build_config(c.flat())
    assert again.flat() == c.flat()
    assert np.array_equal(again.prep.c, c.prep.c)
    assert again.params == c.params


def test_json_sidecar_is_read(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"config": {"mode": "analytic", "params.g_over_k": 0.5, "prep": "gg"}, "version": "0"}')
    assert build_config(read_flat(p)).prep.label == "gg"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        read_flat(p)


def test_figure_mode_needs_id():
    with pytest.raises(ConfigError, match="figure.id"):
        build_config({"mode": "figure"})
    assert build_config({"mode": "figure", "figure.id": "fig2"}).figure == {"id": "fig2"}
