import math

import numpy as np
import pytest

import nestlab


def test_spec_constants():
    sg = nestlab.build_spec("sg")
    assert sg.M == 3
    assert sg.rho == pytest.approx(5 / 3, rel=1e-10)
    v = nestlab.build_spec("vicsek")
    assert v.d_w == pytest.approx(math.log(15) / math.log(3), rel=1e-10)
    with pytest.raises(nestlab.UsageError):
        nestlab.build_spec("carpet")


def test_mesh_weights_sum_to_one():
    pts, w = nestlab.mesh("sg", 3)
    assert pts.shape == (42, 2)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_harmonic_energy_is_level_independent():
    b = [1.0, 0.0, 0.0, 0.0]
    e1 = nestlab.harmonic_energy("vicsek", 1, b)
    assert nestlab.harmonic_energy("vicsek", 4, b) == pytest.approx(e1, rel=1e-8)


def test_heat_kernel_is_symmetric():
    p = nestlab.heat_kernel("sg", 3, 0.05)
    assert np.allclose(p, p.T, atol=1e-10 * np.abs(p).max())
    lam = nestlab.eigenvalues("sg", 3)
    assert abs(lam[0]) < 1e-8 * lam[-1]


def test_truncation_bound_passes():
    (rep,) = nestlab.run_check("truncation", "vicsek", 4, 2.0)
    assert rep["hard"] and rep["hard_ok"] and rep["pass"]
    assert "truncation" in nestlab.check_names()


def test_run_config(tmp_path):
    cfg = "[fractal]\nname = vicsek\nlevel = 3\n[checks]\nnames = coarea\n"
    status, table = nestlab.run_config(cfg, str(tmp_path))
    assert status == 0
    assert "coarea" in table
    assert (tmp_path / "report.json").exists()
    assert nestlab.config_hash(cfg) == nestlab.config_hash(cfg + "[output]\ndir = elsewhere\n")
    with pytest.raises(nestlab.ParseError):
        nestlab.run_config("[fractal]\nwat = 1\n")
