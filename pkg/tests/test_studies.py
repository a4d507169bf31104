import json

import pytest

from perispec.errors import ConfigError, InvalidParameter
from perispec.studies import (
    StudyConfig,
    StudyTable,
    asymptotic_validation,
    default_grid,
    local_limit_sweep,
    regularity_study,
    rerun,
    temporal_consistency_check,
)


def test_csv_rendering():
    t = StudyTable("demo", "h", [1.0, 2.0], {"residual": [1 / 3, 0.25]}, {"kind": "forced"})
    assert t.to_csv() == (
        "# study_kind: demo\n"
        '# kind: "forced"\n'
        "h,residual\n"
        "1,0.33333333333333331\n"
        "2,0.25\n"
    )
    assert t.column("h") == (1.0, 2.0)
    assert t.rows() == [(1.0, 1 / 3), (2.0, 0.25)]


def test_table_json_round_trip():
    t = StudyTable("demo", "h", [1.0, 2.0], {"a": [0.1, 0.2]}, {"config": {"x": 1}})
    back = StudyTable.from_json(t.to_json())
    assert back.to_csv() == t.to_csv()


def test_table_validation():
    with pytest.raises(InvalidParameter):
        StudyTable("demo", "h", [1.0], {"a": [1.0]})
    with pytest.raises(InvalidParameter):
        StudyTable("demo", "h", [1.0, 2.0], {"a": [1.0]})
    with pytest.raises(InvalidParameter):
        StudyTable("demo", "h", [1.0, 2.0], {"a": [1.0, float("nan")]})


def test_config_strict():
    with pytest.raises(ConfigError):
        StudyConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        StudyConfig.from_dict({"data": "noise"})
    c = StudyConfig.from_dict({"n": 2, "K": 4})
    assert StudyConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c


def test_default_grids():
    assert default_grid("delta_to_zero", 2) == tuple(2.0**-j for j in range(7))
    assert default_grid("beta_to_np2", 1)[-1] == pytest.approx(3 - 2**-7)


def test_multiplier_sweep_decreases():
    cfg = StudyConfig(n=2, beta=2.0, K=2)
    t = local_limit_sweep("multiplier", "delta_to_zero", cfg)
    err = t.column("error")
    assert all(a > b for a, b in zip(err, err[1:]))


def test_solution_sweep_metadata():
    cfg = StudyConfig(n=1, K=8, grid=(0.5, 0.25, 0.125))
    t = local_limit_sweep("equilibrium", "delta_to_zero", cfg)
    assert t.metadata["norm_index"] == pytest.approx(1.0)
    err = t.column("error")
    assert err[0] > err[1] > err[2]


def test_sweep_rejects_unknown():
    with pytest.raises(ConfigError):
        local_limit_sweep("heat", "delta_to_zero", StudyConfig())
    with pytest.raises(ConfigError):
        local_limit_sweep("multiplier", "sideways", StudyConfig())


def test_asymptotic_validation_small():
    t = asymptotic_validation(StudyConfig(beta=0.0, lambda_star=2.0, radii=(50.0, 100.0)))
    assert t.metadata["better_lambda1_form"] == "as_sum"
    assert t.metadata["lambda12_coefficient_degenerate"]
    with pytest.raises(InvalidParameter):
        asymptotic_validation(StudyConfig(radii=(100.0, 1000.0)))


def test_regularity_gain():
    t = regularity_study("equilibrium", StudyConfig(n=1, K=64, beta_values=(0.0, 2.0)))
    assert t.column("predicted_gain") == (0.0, 1.0)
    gap = t.column("exponent_gap")
    assert abs(gap[1]) < 0.2


def test_temporal_check_zero_data():
    t = temporal_consistency_check("forced", StudyConfig(data="zero"))
    assert t.column("residual") == (0.0, 0.0, 0.0)
    with pytest.raises(ConfigError):
        temporal_consistency_check("equilibrium", StudyConfig())


def test_temporal_order_two():
    t = temporal_consistency_check("homogeneous", StudyConfig(K=8))
    r = t.column("residual")
    assert 3.5 < r[0] / r[1] < 4.5 and 3.5 < r[1] / r[2] < 4.5


def test_rerun_is_byte_identical():
    cfg = StudyConfig(n=1, K=8, grid=(0.5, 0.25))
    for table in (local_limit_sweep("forced", "delta_to_zero", cfg),
                  temporal_consistency_check("forced", cfg),
                  regularity_study("equilibrium", StudyConfig(K=32))):
        again = rerun(StudyTable.from_json(table.to_json()))
        assert again.to_csv() == table.to_csv()
