"""Data-generating process, determinism and study aggregation."""

import numpy as np
import pytest
from dataclasses import replace

from pleiomr import (
    ScenarioConfig,
    ValidationError,
    generate_replicate,
    preset_scenario,
    run_study,
    scenario_from_file,
)
from pleiomr.simulate import analysis_dataset


def _tiny(scenario=1, **kw):
    """A fast configuration for structural tests (small n)."""
    base = dict(n=2000, rng_seed=42)
    base.update(kw)
    return preset_scenario(scenario, **base)


def test_preset_scenarios():
    s1 = preset_scenario(1)
    assert (s1.p, s1.k) == (10, 8)
    assert s1.beta_x_range == (0.15, 0.3)
    assert s1.beta_w_range == (-0.2, 0.4)
    assert s1.n == 20_000 and s1.maf == 0.3
    assert s1.delta_range == (-0.2, 0.3)
    assert s1.gamma_x == 1.0 and s1.gamma_y == 1.0
    assert s1.gamma_w_value == pytest.approx(1.0 / 8)
    s2 = preset_scenario(2)
    assert (s2.p, s2.k) == (10, 12)
    s3 = preset_scenario(3)
    assert (s3.p, s3.k) == (80, 70)
    assert s3.beta_x_range == (0.05, 0.12)
    s4 = preset_scenario(4)
    assert (s4.p, s4.k) == (80, 90)
    assert s4.beta_x_range == (0.05, 0.12)
    assert s4.beta_w_range == s3.beta_w_range
    with pytest.raises(ValidationError):
        preset_scenario(5)


def test_scenario_config_validation():
    with pytest.raises(ValidationError):
        ScenarioConfig(p=1, k=2, beta_x_range=(0.1, 0.2), beta_w_range=(0.1, 0.2))
    with pytest.raises(ValidationError):
        ScenarioConfig(p=5, k=2, beta_x_range=(0.3, 0.2), beta_w_range=(0.1, 0.2))
    with pytest.raises(ValidationError):
        ScenarioConfig(p=5, k=2, beta_x_range=(0.1, 0.2), beta_w_range=(0.1, 0.2),
                       n_pleiotropic=3)
    with pytest.raises(ValidationError):
        ScenarioConfig(p=5, k=2, beta_x_range=(0.1, 0.2), beta_w_range=(0.1, 0.2),
                       sparsity_regime="nope")


def test_generate_replicate_determinism():
    cfg = _tiny(1, n_pleiotropic=2)
    r1 = generate_replicate(cfg, 3)
    r2 = generate_replicate(cfg, 3)
    assert r1.datasets[0].equals(r2.datasets[0])
    assert r1.datasets[1].equals(r2.datasets[1])
    r3 = generate_replicate(cfg, 4)
    assert not r1.datasets[0].equals(r3.datasets[0])


def test_replicate_structure():
    cfg = _tiny(1, n_pleiotropic=2, n_datasets=3)
    rep = generate_replicate(cfg, 0)
    assert len(rep.datasets) == 3
    assert rep.true_pleiotropic == ("W1", "W2")
    for d in rep.datasets:
        assert d.p == cfg.p and d.k == cfg.k
    assert 0.0 < rep.r2_x < 1.0


def test_analysis_dataset_mixes_the_two_samples():
    rep = generate_replicate(_tiny(1, n_pleiotropic=1), 0)
    d = analysis_dataset(rep)
    np.testing.assert_array_equal(d.beta_x, rep.datasets[0].beta_x)
    np.testing.assert_array_equal(d.beta_w, rep.datasets[0].beta_w)
    np.testing.assert_array_equal(d.beta_y, rep.datasets[1].beta_y)
    np.testing.assert_array_equal(d.se_y, rep.datasets[1].se_y)


def test_variant_effects_regime_zeroes_columns():
    cfg = _tiny(1, n_pleiotropic=2, sparsity_regime="variant_effects", n=500)
    from pleiomr.simulate import _draw_parameters

    rng = np.random.default_rng(0)
    beta_x, beta_w, delta = _draw_parameters(cfg, rng)
    assert np.all(delta != 0.0)
    assert np.all(beta_w[:, 2:] == 0.0)
    assert np.any(beta_w[:, :2] != 0.0)


def test_outcome_effects_regime_zeroes_deltas():
    cfg = _tiny(1, n_pleiotropic=2, n=500)
    from pleiomr.simulate import _draw_parameters

    rng = np.random.default_rng(0)
    _, _, delta = _draw_parameters(cfg, rng)
    assert np.all(delta[2:] == 0.0)
    assert np.all(delta[:2] != 0.0)


def test_run_study_thread_invariance():
    cfg = _tiny(1, n_pleiotropic=1, n=1500)
    methods = ("ivw", "oracle")
    r1 = run_study(cfg, methods, 4, n_jobs=1)
    r2 = run_study(cfg, methods, 4, n_jobs=2)
    for m in methods:
        a, b = r1.row(m), r2.row(m)
        assert a == b


def test_run_study_aggregates():
    cfg = _tiny(1, n_pleiotropic=1, n=1500, theta=0.2)
    report = run_study(cfg, ("ivw", "oracle"), 6)
    assert report.n_reps == 6
    row = report.row("ivw")
    assert row.n_used == 6 and row.n_failed == 0
    assert 0.0 <= row.coverage <= 1.0
    assert 0.0 <= row.power <= 1.0
    assert row.sd >= 0.0
    with pytest.raises(KeyError):
        report.row("nope")


def test_run_study_method_validation():
    cfg = _tiny(4, n=500)  # k = 90 > p = 80
    with pytest.raises(ValidationError):
        run_study(cfg, ("mv_all",), 1)
    with pytest.raises(ValidationError):
        run_study(cfg, ("three_sample_a",), 1)  # needs n_datasets=3
    with pytest.raises(ValidationError):
        run_study(cfg, ("bogus",), 1)
    with pytest.raises(ValidationError):
        run_study(cfg, (), 1)
    with pytest.raises(ValidationError):
        run_study(cfg, ("ivw",), 0)


def test_null_model_ivw_unbiased():
    # no causal effect and no pleiotropy: IVW centers on zero
    cfg = preset_scenario(1, theta=0.0, n_pleiotropic=0, n=4000, rng_seed=9)
    report = run_study(cfg, ("ivw",), 60)
    row = report.row("ivw")
    assert abs(row.mean) < 0.02
    assert 0.85 <= row.coverage <= 1.0


def test_report_csv(tmp_path):
    cfg = _tiny(1, n_pleiotropic=1, n=1500)
    report = run_study(cfg, ("ivw",), 3)
    out = tmp_path / "report.csv"
    report.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "method,mean,sd,mean_se,coverage,power"
    assert lines[1].startswith("ivw,")
    meta = report.metadata()
    assert meta["n_reps"] == 3
    assert meta["scenario"]["p"] == 10


def test_scenario_from_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(
        "# comment line\n"
        "scenario = 1\n"
        "theta = 0.0  # overrides\n"
        "n = 1234\n"
        "n_pleiotropic = 2\n"
        "beta_w_range = -0.1, 0.2\n",
        encoding="utf-8",
    )
    cfg = scenario_from_file(path)
    assert cfg.p == 10 and cfg.theta == 0.0 and cfg.n == 1234
    assert cfg.n_pleiotropic == 2
    assert cfg.beta_w_range == (-0.1, 0.2)


def test_scenario_from_file_rejects_unknown_key(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("scenario = 1\nwhatever = 3\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        scenario_from_file(path)


def test_scenario_from_file_without_preset(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(
        "p = 12\nk = 3\nbeta_x_range = 0.1,0.3\nbeta_w_range = -0.2,0.4\nn = 800\n",
        encoding="utf-8",
    )
    cfg = scenario_from_file(path)
    assert (cfg.p, cfg.k, cfg.n) == (12, 3, 800)
