import json
import math
import os

import numpy as np
import pytest

import prandtl_robin as pr

CONFIG_DIR = os.environ.get("PRANDTL_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


def small_grid():
    return pr.GridSpec(11, 32, 161, 0.5, 2.0, 8.0)


def test_field_round_trip():
    g = small_grid()
    a = np.random.default_rng(0).standard_normal((g.n_t, g.n_x, g.n_y))
    f = pr.Field(g, a)
    assert f.shape == a.shape
    assert np.array_equal(f.to_numpy(), a)
    assert f.trace().shape == (g.n_t, g.n_x, 1)


def test_shape_mismatch_raises():
    g = small_grid()
    with pytest.raises(pr.StructuralError):
        pr.Field(g, np.zeros((g.n_t, g.n_x, g.n_y + 1)))
    with pytest.raises(ValueError):
        pr.GridSpec(2, 32, 161, 0.5, 2.0, 8.0)


def test_norm_of_decaying_mode():
    g = small_grid()
    t, x, y = np.meshgrid(
        np.linspace(0, g.t_max, g.n_t), np.arange(g.n_x) * g.dx, np.linspace(0, g.y_max, g.n_y), indexing="ij"
    )
    f = pr.Field(g, np.exp(-y) * np.sin(math.pi * x))
    # ||e^{-y} sin(pi x)||_{L2} over [0,T]x[0,2)x[0,8] is sqrt(T/2)
    assert pr.norm_A(f, 0, 0.0) == pytest.approx(math.sqrt(g.t_max / 2.0), rel=1e-3)
    assert pr.norm_A(f, 1, 1.0) > pr.norm_A(f, 0, 1.0)
    assert pr.norm_A(pr.Field(g, -2.0 * f.to_numpy()), 1, 1.0) == pytest.approx(2.0 * pr.norm_A(f, 1, 1.0))


def test_smoothing_shrinks_high_modes():
    g = pr.GridSpec(33, 64, 129, 2.0, 2.0, 4.0)
    _, x, _ = np.meshgrid(
        np.linspace(0, g.t_max, g.n_t), np.arange(g.n_x) * g.dx, np.linspace(0, g.y_max, g.n_y), indexing="ij"
    )
    hi = pr.Field(g, np.sin(8 * math.pi * x))
    lo = pr.Field(g, np.sin(math.pi * x))
    s_hi = pr.smooth_S(hi, 4.0).max_abs()
    s_lo = pr.smooth_S(lo, 4.0).max_abs()
    assert s_hi < 0.5 * s_lo


def test_canonical_shear_margins():
    g = pr.GridSpec(11, 4, 401, 0.5, 2.0, 20.0)
    shear = pr.canonical_shear(g, 1.0, 1.0)
    m = pr.check_monotonicity(shear)
    assert m.all_positive()
    assert shear.u_s.shape == (g.n_t, 1, g.n_y)
    assert shear.delta_s > 0.0


def test_kernel_shear_accepts_python_callable():
    g = pr.GridSpec(6, 4, 201, 0.5, 2.0, 20.0)
    shear = pr.kernel_shear(lambda y: math.exp(-y), 1.0, g)
    assert np.all(np.diff(shear.u_s[0, 0, :]) >= 0.0)


def test_experiment_tags():
    assert set(pr.experiment_tags()) == {
        "shear",
        "mollify",
        "linearized-mms",
        "nash-moser",
        "stability",
        "dirichlet-limit",
        "norms-audit",
    }


def test_norms_audit_runs(tmp_path):
    man = pr.run_experiment("norms-audit", os.path.join(CONFIG_DIR, "norms_audit.json"), tmp_path)
    assert man["status"] == "pass"
    assert (tmp_path / "manifest.json").exists()
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == "pass"


def test_bad_config_raises():
    with pytest.raises(pr.ConfigError):
        pr.run_experiment("shear", {"iteration": {"theta0": 2}}, "unused")
