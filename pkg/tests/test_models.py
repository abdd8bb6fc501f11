import numpy as np
import pytest

from fourframes import curvature as C
from fourframes import forms as F
from fourframes import hermitian as H
from fourframes import jets as J
from fourframes import models as M


def points(inst, n, seed=3):
    return inst.chart.inset(0.05).scale(np.random.default_rng(seed).random((n, 4)))


def closed(form, s):
    return np.abs(F.d_arr(form.at(s), form.degree).value).max()


def test_gibbons_hawking_trivial_potential_is_flat():
    zero = lambda x: x[0] * 0.0
    inst = M.model_gibbons_hawking(lambda x: x[0] * 0.0 + 1.0, lambda x: (zero(x), zero(x), zero(x)))
    s = inst.sample(points(inst, 20))
    assert np.abs(C.geometry(inst.metric, s).riemann.value).max() == 0.0
    for name in ("omega_J1", "omega_J2", "omega_J3", "omega_I1", "omega_I2", "omega_I3"):
        assert closed(inst.form(name), s) == 0.0


def test_gibbons_hawking_linear_forms():
    inst = M.build("gibbons-hawking", {"a": 0.5, "b": 1.0})
    s = inst.sample(points(inst, 50))
    assert closed(inst.form("omega_I1"), s) <= 1e-12
    assert closed(inst.form("omega_I2"), s) <= 1e-12
    d3 = F.d_arr(inst.form("omega_I3").at(s), 2).value
    assert np.abs(d3[:, F.basis(3).index((1, 2, 3))] - 1.0).max() <= 1e-12


def test_gibbons_hawking_point_source():
    inst = M.build("gibbons-hawking", {"potential": "point", "b": 1.0})
    s = inst.sample(points(inst, 100))
    assert M.monopole_residual(inst.extras["U"], inst.extras["Theta"], s) <= 1e-10
    geo = C.geometry(inst.metric, s)
    for k in (1, 2, 3):
        assert np.abs(geo.nabla2(inst.form(f"omega_J{k}").tensor_at(s)).value).max() <= 1e-8
    frame = F.FiveFrame([inst.form(k) for k in inst.frame])
    assert frame.residuals(inst.metric, s)["closed"].max() > 1e-3


def test_gibbons_hawking_preconditions():
    with pytest.raises(M.ModelError):
        M.build("gibbons-hawking", {"a": -5.0, "b": 0.0})  # U = -5 y < 0
    bad_theta = lambda x: (x[0] * 0.0, x[0] * 0.0, x[0] * 0.0)
    with pytest.raises(M.ModelError):
        M.model_gibbons_hawking(lambda x: x[2] + 1.0, bad_theta)
    M.model_gibbons_hawking(lambda x: x[2] * x[2] + 1.0, bad_theta, strict=False)


def test_nil3_pullback_isometry():
    nil = M.build("nil3")
    gh = M.build("gibbons-hawking", {"a": 1.0, "b": 0.0})
    pts = points(nil, 100)
    g_nil = nil.metric.at(nil.sample(pts)).value
    q = M.nil3_to_gh(pts)
    g_gh = gh.metric.at(J.Sample(q, 1)).value
    Jm = M.nil3_jacobian(pts)
    pulled = np.einsum("nai,nab,nbj->nij", Jm, g_gh, Jm)
    assert np.abs(pulled - g_nil).max() <= 1e-9
    # the substitution is a diffeomorphism onto its image with t = (2/3) y^(3/2)
    assert np.allclose((2.0 / 3.0) * q[:, 2] ** 1.5, pts[:, 0])


def test_nil3_printed_variant_is_not_ricci_flat():
    inst = M.build("nil3", {"variant": "printed"})
    geo = C.geometry(inst.metric, inst.sample(points(inst, 20)))
    assert np.abs(geo.ricci.value).max() > 1e-3


def test_nil3_kappa_nowhere_zero():
    inst = M.build("nil3")
    kappa = H.conformal_scalar(inst.structure, inst.sample(points(inst, 200)))
    assert np.abs(kappa).min() > 1e-3


def test_ak4_zero_is_flat_kaehler():
    inst = M.build("ak4", {"w": "zero"})
    s = inst.sample(points(inst, 50))
    h = inst.structure.at(s)
    assert np.abs(h.geo.riemann.value).max() == 0.0
    assert np.abs(H.tensor_max(h.eta)).max() == 0.0
    assert H.holonomy_rank(inst.structure, None, s).rank == 0


def test_ak4_preconditions():
    with pytest.raises(M.ModelError):
        M.build("ak4", {"alpha": 1.0})
    big = lambda x: (x[0] * 0.0 + 1.2, x[0] * 0.0)
    with pytest.raises(M.ModelError):
        M.model_ak4(big)
    with pytest.raises(M.ModelError):
        M.model_ak4(M.AK4_W["nonholo"], flags=("holomorphic_in_sigma",))


def test_ak4_exponent():
    assert M.ak4_exponent(-3.0) == 0.5
    assert M.ak4_exponent(3.0) == 2.0


def test_frame_rotations():
    rot = M.build("gibbons-hawking", {"frame": "rotated"})
    twisted = M.build("gibbons-hawking", {"frame": "twisted"})
    R = M.FRAME_ROTATION[0]
    assert np.allclose(R @ R.T, np.eye(3))
    s = rot.sample(points(rot, 100))
    res = F.FiveFrame([rot.form(k) for k in rot.frame]).residuals(rot.metric, s)
    assert max(v.max() for v in res.values()) <= 1e-8
    res = F.FiveFrame([twisted.form(k) for k in twisted.frame]).residuals(twisted.metric, s)
    assert res["closed"].max() > 1e-3
    assert max(res["gram"].max(), res["wedge"].max()) <= 1e-8


def test_parameters():
    assert M.parse_params("gibbons-hawking", {"a": "2"})["a"] == 2.0
    with pytest.raises(M.ModelError):
        M.parse_params("gibbons-hawking", {"c": 1})
    with pytest.raises(M.ModelError):
        M.parse_params("gibbons-hawking", {"a": "x"})
    with pytest.raises(M.ModelError):
        M.parse_params("ak4", {"w": "spiral"})
    with pytest.raises(M.ModelError):
        M.build("klein-bottle")
    assert set(M.MODEL_IDS) == set(M.PARAM_SPECS) == set(M.VARIANT_NOTES)


@pytest.mark.parametrize("model_id", M.MODEL_IDS)
def test_metrics_positive_definite(model_id):
    inst = M.build(model_id)
    g = inst.metric.at(inst.sample(points(inst, 200))).value
    assert np.all(np.linalg.eigvalsh(g) > 0)
    assert np.array_equal(g, g.transpose(0, 2, 1))


def test_sample_outside_chart_rejected():
    inst = M.build("nil3")
    with pytest.raises(J.PointOutsideDomainError):
        inst.sample(np.array([[-1.0, 0.0, 0.0, 0.0]]))
