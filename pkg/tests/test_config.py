from __future__ import annotations

import numpy as np
import pytest

from anagen.config import (
    SuiteConfig,
    apply_tolerance_overrides,
    config_from_text,
    load_config,
    parse_complex,
    parse_element,
    parse_group,
    parse_tolerance,
    read_pairs,
)
from anagen.errors import ConfigInvalid, ParseError
from anagen.group_models import DiagonalGroup, EmbeddedCornerGroup, ImplementedGroup


@pytest.mark.parametrize(
    "text, value",
    [("1", 1), ("-2.5", -2.5), ("i", 1j), ("-i", -1j), ("1+2i", 1 + 2j), ("0.5-1j", 0.5 - 1j), (" 3 - i ", 3 - 1j), ("1e-3i", 1e-3j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        parse_complex("1+2x")
    assert exc.value.position == 3
    with pytest.raises(ParseError) as exc:
        parse_group("integer(4)")
    assert exc.value.position == 7
    with pytest.raises(ParseError) as exc:
        parse_group("diagonal[0, 1, zz]")
    assert exc.value.position == 15
    with pytest.raises(ParseError) as exc:
        parse_group("integer[4")
    assert exc.value.position == 9
    with pytest.raises(ParseError):
        parse_group("sphere[3]")
    with pytest.raises(ParseError):
        parse_element("delta[9]", parse_group("integer[4]"))


def test_parse_group_kinds():
    g = parse_group("integer[4]")
    assert isinstance(g, DiagonalGroup) and np.array_equal(g.exponents, [0, 1, 2, 3])
    assert np.array_equal(parse_group("integer[3, 1]").exponents, [1, 2, 3])
    assert np.array_equal(parse_group("diagonal[0, 1.5, -2]").exponents, [0, 1.5, -2])
    assert isinstance(parse_group("corner[3]"), EmbeddedCornerGroup)
    assert isinstance(parse_group("implemented[0, 1]"), ImplementedGroup)
    m = parse_group("modular[0.5, 0.5]")
    x = np.arange(4.0).reshape(2, 2)
    np.testing.assert_allclose(m.apply(1.3, x), x, atol=1e-14)


def test_parse_element_kinds():
    g = parse_group("integer[3]")
    np.testing.assert_array_equal(parse_element("delta[1]", g), [0, 1, 0])
    np.testing.assert_array_equal(parse_element("ones", g), [1, 1, 1])
    np.testing.assert_array_equal(parse_element("vec[1, 2i, -1]", g), [1, 2j, -1])
    h = parse_group("implemented[0, 1]")
    np.testing.assert_array_equal(parse_element("unit[0, 1]", h), [[0, 1], [0, 0]])
    with pytest.raises(ParseError):
        parse_element("unit[0, 1]", g)
    with pytest.raises(ParseError):
        parse_element("vec[1, 2]", g)


def test_read_pairs_comments_and_repeats():
    pairs = read_pairs("# header\nz = -i\nz = 1-0.5i   # trailing\ndims = 2, 3\n\ntol = criterion=1e-7\n")
    assert pairs == {"z": ["-i", "1-0.5i"], "dims": ["2", "3"], "tol": ["criterion=1e-7"]}
    with pytest.raises(ConfigInvalid):
        read_pairs("no equals sign here")


def test_config_from_text():
    cfg = config_from_text("seed = 7\ndims = 2\ndims = 5\nz = -i\nn = 0.5, 1\nformat = CSV\ntol = kms=1e-8\n")
    assert cfg.seed == 7 and cfg.dims == (2, 5) and cfg.z_values == (-1j,)
    assert cfg.n_values == (0.5, 1.0) and cfg.format == "csv"
    assert cfg.tolerances.kms == 1e-8
    assert config_from_text("") == SuiteConfig()


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        SuiteConfig(dims=())
    with pytest.raises(ConfigInvalid):
        config_from_text("dims = 65")
    with pytest.raises(ConfigInvalid):
        config_from_text("z = 1 + 4.5i")
    with pytest.raises(ConfigInvalid):
        config_from_text("colour = red")
    with pytest.raises(ConfigInvalid):
        config_from_text("format = xml")
    with pytest.raises(ConfigInvalid):
        config_from_text("seed = many")
    with pytest.raises(ConfigInvalid):
        load_config("/nonexistent/anagen.cfg")


def test_tolerance_overrides():
    assert parse_tolerance("kms = 1e-12") == ("kms", 1e-12)
    for bad in ("kms", "nope=1", "kms=abc", "kms=-1", "kms=inf"):
        with pytest.raises(ConfigInvalid):
            parse_tolerance(bad)
    cfg = apply_tolerance_overrides(SuiteConfig(), ["weak_pairing=1e-2", "markov=1e-9"])
    assert cfg.tolerances.weak_pairing == 1e-2 and cfg.tolerances.markov == 1e-9
    assert SuiteConfig().tolerances.weak_pairing == 1e-6
