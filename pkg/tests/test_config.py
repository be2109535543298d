"""Configuration files and coefficient expressions."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from svmart.config import ConfigError, load_config, parse_config, parse_expression
from svmart.scale import scale_function

HESTON_TEXT = """\
# Heston variance
model = heston
kappa = 1
theta = 1
xi = 2
rho = -0.5   # leverage
x0 = 1
"""

CUSTOM_TEXT = """\
drift = 0.5 * (1 - x)
diffusion = sqrt(x)
exponent = sqrt(x)
left = 0
right = inf
x0 = 1
rho = -0.5
"""


def test_builtin_config():
    cfg = parse_config(HESTON_TEXT)
    assert cfg.model_id == "heston"
    assert cfg.spec.correlation == -0.5
    assert cfg.spec.interval == (0.0, math.inf)
    assert cfg.spec.descriptor.as_dict()["xi"] == 2.0


def test_custom_config_matches_expressions():
    spec = parse_config(CUSTOM_TEXT).spec
    x = np.array([0.25, 1.0, 4.0])
    np.testing.assert_allclose(spec.mu(x), 0.5 * (1 - x))
    np.testing.assert_allclose(spec.sigma(x), np.sqrt(x))
    assert spec.descriptor is None


def test_expression_grammar():
    f = parse_expression("2^3 + exp(0) - abs(-x) / sqrt(4) + log(e) * pi ** 0")
    assert float(f(np.array(2.0))) == pytest.approx(8 + 1 - 1 + 1)
    assert f(np.ones(3)).shape == (3,)
    assert float(parse_expression("-x")(np.array(3.0))) == -3.0


@pytest.mark.parametrize("text,col,fragment", [
    ("x + y", 5, "unknown name 'y'"),
    ("sin(x)", 1, "unknown function 'sin'"),
    ("exp(x, 2)", 1, "exactly one argument"),
    ("x % 2", 1, "unsupported operator"),
    ("'a'", 1, "unsupported literal"),
    ("x if x else 1", 1, "unsupported syntax"),
])
def test_expression_errors_carry_columns(text, col, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_expression(text, line=3)
    assert exc.value.line == 3
    assert exc.value.column == col
    assert fragment in exc.value.message


def test_syntax_errors_are_located():
    with pytest.raises(ConfigError, match="syntax error") as exc:
        parse_config("drift = 1 +\n", "m.cfg")
    assert exc.value.line == 1 and exc.value.column >= 9


def test_caret_columns_point_into_the_original_text():
    with pytest.raises(ConfigError) as exc:
        parse_expression("x^2 + y")
    assert exc.value.column == 7


@pytest.mark.parametrize("text,line,col,fragment", [
    ("model = heston\nkappa = 1\ntheta = 1\nxi = 2\nrho = 0\nfoo = 1\n", 6, 1, "unknown key 'foo'"),
    ("model = heston\nkappa = 1\nkappa = 2\n", 3, 1, "duplicate key"),
    ("model = nope\n", 1, 9, "unknown model"),
    ("model = heston\n  kappa\n", 2, 3, "expected 'key = value'"),
    ("drift = sin(x)\n", 1, 9, "unknown function"),
    ("model = heston\nkappa = x\ntheta = 1\nxi = 2\nrho = 0\n", 2, 9, "may not depend on x"),
    ("model = heston\nkappa =\n", 2, 8, "missing value"),
])
def test_config_errors_carry_locations(text, line, col, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "m.cfg")
    assert (exc.value.line, exc.value.column) == (line, col)
    assert fragment in exc.value.message
    assert str(exc.value).startswith(f"m.cfg:{line}:{col}: ")


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("model = heston\nkappa = 1\n", "missing parameters: theta, xi, rho"),
    ("drift = x\n", "missing keys"),
    ("model = heston\nkappa = 1\ntheta = 1\nxi = -2\nrho = 0\n", "xi"),
])
def test_config_errors_without_location(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_builtin_rejects_expression_keys():
    with pytest.raises(ConfigError, match="cannot be combined"):
        parse_config(HESTON_TEXT + "drift = x\n")


def test_load_config(tmp_path):
    path = tmp_path / "h.cfg"
    path.write_text(HESTON_TEXT)
    assert load_config(path).model_id == "heston"
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


def test_custom_and_builtin_agree():
    text = "drift = 1 - x\ndiffusion = 2 * sqrt(x)\nexponent = sqrt(x)\nleft = 0\nright = inf\nx0 = 1\n"
    custom = parse_config(text).spec
    builtin = parse_config(HESTON_TEXT.replace("rho = -0.5", "rho = 0")).spec
    for x in (0.3, 2.5):
        assert scale_function(custom, x) == pytest.approx(scale_function(builtin, x), rel=1e-9)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_affine_expressions_evaluate_exactly(a, b):
    f = parse_expression(f"{a!r} * x + ({b!r})")
    x = np.array([0.0, 1.0, -2.5])
    np.testing.assert_array_equal(f(x), a * x + b)
