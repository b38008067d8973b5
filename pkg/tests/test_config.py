import copy

import pytest

from wishart_gff.config import ConfigError, load_config, validate

BASE = {
    "seed": 3,
    "distribution": {"kind": "real_gaussian"},
    "geometry": {"kind": "corner", "mu": 1.0, "nu": 1.0, "levels": [0.5, 1.0]},
    "statistics": [{"label": "a", "degree": 1, "level": 0.5}, {"label": "b", "coeffs": [0, 0, 1]}],
    "simulation": {"L": [20], "replicates": 40, "batches": 10},
}


def with_(path, value):
    raw = copy.deepcopy(BASE)
    node = raw
    for p in path[:-1]:
        node = node[p]
    node[path[-1]] = value
    return raw


def test_valid_config_properties():
    cfg = validate(BASE)
    assert cfg.threshold == 4.0 and cfg.reference == "analytic" and cfg.batches == 10
    defs = cfg.statistics
    assert defs[0].coeffs == (0.0, 1.0) and defs[0].rho == ((0.5, 1.0),)
    assert defs[1].rho == ((1.0, 1.0),)
    g = cfg.pair_geometry(0.5, 1.0)
    assert (g.mu12, g.nu12) == (0.5, 0.5)
    assert cfg.pair_geometry(0.5, 1.0, 20).mu1 == 0.5


@pytest.mark.parametrize("path,value,msg", [
    (("simulation", "replicates"), 19, "twice the batch count"),
    (("distribution", "kind"), "cauchy", "distribution/kind"),
    (("geometry", "mu"), 0.5, "mu >= nu"),
    (("geometry", "levels"), [0.01, 1.0], "empty corner"),
    (("statistics",), [{"label": "a", "degree": 1, "level": 0.7}], "unknown level"),
    (("statistics",), [{"label": "a", "degree": 1, "coeffs": [0, 1]}], "exactly one of degree or coeffs"),
    (("statistics",), [{"label": "a", "degree": 1, "rho": [[0.5, 0.3], [1.0, 0.3]]}], "sum to 1"),
    (("seed",), -1, "seed"),
    (("extra",), 1, "Additional properties"),
])
def test_invalid_configs(path, value, msg):
    with pytest.raises(ConfigError, match=msg):
        validate(with_(path, value))


def test_submatrix_geometry_contour_condition():
    raw = copy.deepcopy(BASE)
    raw["geometry"] = {"kind": "submatrices", "blocks": [{"rows": [0, 1], "cols": [0, 1]},
                                                         {"rows": [0, 2], "cols": [0, 2]}]}
    raw["statistics"] = [{"label": "a", "degree": 1, "level": 0}, {"label": "b", "degree": 1, "level": 1}]
    cfg = validate(raw)
    assert cfg.blocks(20)[1].shape == (40, 40)
    assert cfg.pair_geometry(0, 1).c == pytest.approx(0.5)


def test_overrides_revalidate():
    cfg = validate(BASE)
    new = cfg.with_overrides(seed=9, L=[10, 30], threshold=2.5, out="x")
    assert (new.seed, new.L_schedule, new.threshold, new.output_dir) == (9, [10, 30], 2.5, "x")
    assert cfg.seed == 3
    with pytest.raises(ConfigError, match="twice"):
        cfg.with_overrides(batches=30)


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("seed = [")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
