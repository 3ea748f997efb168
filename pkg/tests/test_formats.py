import json

import numpy as np
import pytest

from ogk import formats
from ogk import groupoid as gm
from ogk import ideals as idl
from ogk.errors import ConfigError
from ogk.orlicz import Section


@pytest.mark.parametrize("gid", gm.ZOO_IDS)
def test_groupoid_roundtrip(gid, tmp_path):
    g = gm.from_id(gid)
    p = tmp_path / "g.json"
    p.write_text(json.dumps(formats.groupoid_to_dict(g)))
    back = formats.load_groupoid(str(p))
    assert np.array_equal(back.r, g.r) and np.array_equal(back.d, g.d) and np.array_equal(back.inv, g.inv)
    assert back.product == g.product and back.units == g.units
    assert gm.validate_groupoid(back).valid


def test_groupoid_rejects_bad_ids():
    d = formats.groupoid_to_dict(gm.pair_groupoid(2))
    d["r"][0] = 9
    with pytest.raises(ConfigError):
        formats.groupoid_from_dict(d)
    with pytest.raises(ConfigError):
        formats.groupoid_from_dict({"elements": 2})


def test_haar_roundtrip(tmp_path):
    g = gm.from_id("bundle:Z2,Z3")
    h = gm.haar_from_density(g, [2.0, 0.5])
    p = tmp_path / "h.json"
    p.write_text(json.dumps(formats.haar_to_dict(g, h)))
    assert np.array_equal(formats.load_haar(str(p), g).weights, h.weights)
    assert np.array_equal(formats.load_haar("counting", g).weights, np.ones(5))


def test_section_roundtrip_complex(tmp_path):
    g = gm.from_id("pair:2")
    s = Section(g, np.array([1 + 2j, 3.0, -1j, 0.5]))
    p = tmp_path / "s.json"
    p.write_text(json.dumps(formats.section_to_dict(s)))
    assert np.array_equal(formats.load_section(str(p), g).values, s.values)


def test_section_plain_numbers_are_real():
    g = gm.from_id("pair:2")
    s = formats.section_from_dict({"0": [1, 2], "3": [3, 4]}, g)
    assert s.values.dtype == float and s.values.tolist() == [1.0, 2.0, 3.0, 4.0]


@pytest.mark.parametrize("data", [{"1": [1, 2]}, {"0": [1]}, {"0": [[1, 2, 3], 1]}, {"0": "x"}])
def test_section_errors(data):
    with pytest.raises(ConfigError):
        formats.section_from_dict(data, gm.pair_groupoid(2))


def test_subbundle_roundtrip():
    g = gm.from_id("transform:S3")
    sub = idl.random_subbundle(g, np.random.default_rng(0))
    back = formats.subbundle_from_dict(formats.subbundle_to_dict(sub), g)
    assert back.dims == sub.dims
    for u in g.units:
        P = sub.bases[u] @ sub.bases[u].conj().T
        Q = back.bases[u] @ back.bases[u].conj().T
        assert np.allclose(P, Q, atol=1e-12)


def test_missing_file():
    with pytest.raises(ConfigError):
        formats.load_groupoid("/nonexistent/g.json")
