import math

import numpy as np
import pytest

import turbdisp


def test_constants():
    assert turbdisp.c_alpha(1.5, 3) == pytest.approx(8 * math.pi, rel=1e-12)
    assert turbdisp.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_kolmogorov_exponents():
    p = turbdisp.make_params_direct(4 / 3, 1 / 3, 1.0, 1.0, 1.0, 1e-3, 3)
    e = turbdisp.exponents(p)
    assert e["p"] == pytest.approx(3.0, abs=1e-12)
    assert 2 * e["eta"] == pytest.approx(4 / 3, abs=1e-12)
    assert turbdisp.regime(p)["kolmogorov"]


def test_parameter_bounds_raise():
    with pytest.raises(ValueError):
        turbdisp.make_params_direct(2.5, 0.3, 1.0, 1.0, 1.0, 1e-3, 2)


def test_field_is_incompressible_and_deterministic():
    p = turbdisp.make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 0.01, 3)
    a = turbdisp.synthesize(p, 64, seed=7)
    b = turbdisp.synthesize(p, 64, seed=7)
    a.advance(0.1)
    b.advance(0.1)
    np.testing.assert_array_equal(a.increment([0.3, -0.2, 0.1]), b.increment([0.3, -0.2, 0.1]))
    assert a.incompressibility_residual() < 1e-12
    assert a.time == pytest.approx(0.1)


def test_oracle_closed_form():
    p = turbdisp.make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 2)
    o = turbdisp.KraichnanOracle(p)
    x = [0.6, 0.8]
    np.testing.assert_allclose(o.gamma1(x, x), o.gamma1_closed(x), rtol=1e-3)


def test_brownian_pairs_and_fit():
    p = turbdisp.make_params_direct(1.2, 0.45, 0.0, 1.0, 1.0, 0.01, 2)
    o = turbdisp.KraichnanOracle(p, kappa0=1.0)
    times = [0.0] + list(np.geomspace(0.01, 10.0, 30))
    t, pos, m = turbdisp.simulate_limit_pairs(o, [0.01, 0.0], 400, seed=3, times=times)
    assert pos.shape == (400, 31, 2)
    fit = turbdisp.fit_power_law(m["t"], m["y"], 1.0, 10.0, m["se"])
    assert fit["exponent"] == pytest.approx(1.0, abs=0.05)


def test_presets_validate_and_refuse(tmp_path):
    assert "kraichnan-limit" in turbdisp.presets()
    ini = turbdisp.preset_ini("kraichnan-limit")
    report = turbdisp.validate(ini)
    assert report["audit"]["pass"]
    with pytest.raises(turbdisp.ConfigError):
        turbdisp.validate("[run]\npreset = nonsense\n")
    bad = ini.replace("k_cut_wavenumber = 0.8", "k_cut_wavenumber = 4")
    with pytest.raises(turbdisp.ConstraintViolation):
        turbdisp.run(bad, tmp_path / "refused")
    assert not (tmp_path / "refused").exists()


def test_run_writes_record(tmp_path):
    ini = turbdisp.preset_ini("boundary").replace("n_pairs = 400", "n_pairs = 60")
    rec = turbdisp.run(ini, tmp_path, threads=1)
    assert rec["preset"] == "boundary"
    assert (tmp_path / "run_record.json").exists()
    assert any(f.endswith(".csv") for f in rec["files"])
