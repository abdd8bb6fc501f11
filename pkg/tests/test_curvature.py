import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fourframes import curvature as C
from fourframes import jets as J
from fourframes import models as M
from fourframes.forms import MetricField

RNG_POINTS = np.random.default_rng(11)


def conformal_flat(f):
    """``exp(2 f) delta`` for a callable ``f`` on coordinate jets."""
    return MetricField(lambda x: J.exp(f(x) * 2.0)[..., None, None] * np.eye(4), name="conformal")


def sphere():
    """Unit round 4-sphere in stereographic coordinates."""
    return conformal_flat(lambda x: J.log(2.0 / (1.0 + sum(x[i] * x[i] for i in range(4)))))


def model_points(inst, n, seed=11):
    return inst.chart.inset(0.05).scale(np.random.default_rng(seed).random((n, 4)))


def test_euclidean_christoffels_vanish():
    gam = C.christoffels(MetricField.euclidean(), (0.1, 0.2, 0.3, 0.4))
    assert np.all(gam.coeffs == 0.0)


def test_conformal_christoffels():
    f = lambda x: x[0] * 0.3 + x[1] * x[2] * 0.2 + J.sin(x[3]) * 0.1
    g = conformal_flat(f)
    p = np.array([0.2, -0.3, 0.5, 0.1])
    df = np.array([0.3, 0.2 * p[2], 0.2 * p[1], 0.1 * np.cos(p[3])])
    d = np.eye(4)
    ref = np.einsum("ki,j->kij", d, df) + np.einsum("kj,i->kij", d, df) - np.einsum("ij,k->kij", d, df)
    assert np.allclose(C.christoffels(g, p).value[0], ref, atol=1e-13)
    assert np.allclose(oracles.fd_christoffel(g, p, 1e-5), ref, atol=1e-8)


def test_sphere_sign_anchor():
    geo = C.CurvatureBundle(sphere()).at(np.random.default_rng(0).uniform(-0.8, 0.8, (5, 4)))
    assert np.allclose(geo.scalar.value, 12.0)
    assert np.allclose(geo.ricci.value, 3.0 * geo.g.value)
    M6 = geo.operator_matrix(geo.riemann)
    assert np.allclose(M6, np.eye(6)[None], atol=1e-12)
    Wp, Wm = C.weyl_split(C.CurvatureBundle(sphere()), np.zeros((1, 4)) + 0.3)
    assert np.abs(Wp).max() < 1e-12 and np.abs(Wm).max() < 1e-12


def test_flat_operator_is_zero():
    assert np.all(C.riemann_operator(MetricField.euclidean(), (0, 0, 0, 0)) == 0.0)


def test_nil3_ricci_flat_and_metric():
    inst = M.build("nil3")
    pts = model_points(inst, 200)
    geo = C.geometry(inst.metric, inst.sample(pts))
    assert np.abs(geo.ricci.value).max() <= 1e-8
    assert geo.metricity().max() <= 1e-9


def test_gh_linear_is_selfdual():
    inst = M.build("gibbons-hawking", {"a": 1.0, "b": 0.0})
    _, Wm = C.weyl_split(C.CurvatureBundle(inst.metric), model_points(inst, 200))
    assert np.abs(Wm).max() <= 1e-8


def test_nil3_omega_I_eigenform_of_wplus():
    inst = M.build("nil3")
    s = inst.sample(model_points(inst, 100))
    h = inst.structure.at(s)
    geo = h.geo
    lhs = geo.weyl_half(h.omega, +1)
    assert np.abs((lhs - h.omega * (h.kappa / 6.0)[..., None, None]).value).max() <= 1e-8
    assert np.abs(h.kappa.value).min() > 0.0


@pytest.mark.parametrize("model_id, params", [("nil3", {}), ("ak4", {}), ("gibbons-hawking", {"potential": "point", "b": 1.0})])
def test_first_bianchi_symmetry(model_id, params):
    inst = M.build(model_id, params)
    geo = C.geometry(inst.metric, inst.sample(model_points(inst, 50)))
    M6 = geo.operator_matrix(geo.riemann)
    assert np.abs(M6 - M6.transpose(0, 2, 1)).max() <= 1e-9
    bianchi = geo.riemann + geo.riemann.permute(1, 2, 0, 3) + geo.riemann.permute(2, 0, 1, 3)
    assert np.abs(bianchi.value).max() <= 1e-9


@pytest.mark.parametrize("model_id, params", [("nil3", {}), ("ak4", {"w": "mixed"})])
def test_scalar_from_sectional_curvatures(model_id, params):
    inst = M.build(model_id, params)
    geo = C.geometry(inst.metric, inst.sample(model_points(inst, 30)))
    g, Rc = geo.g.value, geo.riemann.value
    # orthonormal frame e = L^-T from g = L L^T
    E = np.linalg.inv(np.linalg.cholesky(g)).transpose(0, 2, 1)
    R_on = np.einsum("nia,njb,nkc,nld,nijkl->nabcd", E, E, E, E, Rc)
    sect = sum(R_on[:, a, b, a, b] for a in range(4) for b in range(a + 1, 4))
    assert np.abs(2 * sect - geo.scalar.value).max() <= 1e-9


def test_conformal_flat_weyl_vanishes():
    g = conformal_flat(lambda x: x[0] * x[1] * 0.3 + x[2] * 0.2)
    Wp, Wm = C.weyl_split(C.CurvatureBundle(g), np.random.default_rng(4).uniform(-1, 1, (10, 4)))
    assert np.abs(Wp).max() <= 1e-12 and np.abs(Wm).max() <= 1e-12


ORACLE_MODELS = [
    ("flat-family", {}),
    ("gibbons-hawking", {}),
    ("gibbons-hawking", {"potential": "point", "b": 1.0}),
    ("nil3", {}),
    ("ak4", {}),
    ("ak4", {"w": "mixed"}),
]


@pytest.mark.parametrize("model_id, params", ORACLE_MODELS)
def test_riemann_matches_finite_differences(model_id, params):
    inst = M.build(model_id, params)
    pts = model_points(inst, 10)
    Rj = C.geometry(inst.metric, inst.sample(pts)).riemann.value
    for q, R in zip(pts, Rj):
        assert np.abs(oracles.fd_riemann(inst.metric, q) - R).max() <= 1e-5


@pytest.mark.parametrize("model_id, params", ORACLE_MODELS)
def test_metric_first_derivatives_match_differences(model_id, params):
    inst = M.build(model_id, params)
    for q in model_points(inst, 5):
        jet = inst.metric.at(inst.sample(q[None]))
        grad = np.moveaxis(jet.grad().value[0], -1, 0)
        fd = oracles.central_gradient(lambda r: oracles.metric_values(inst.metric, r)[0], q)
        scale = np.maximum(np.abs(fd), 1.0)
        assert (np.abs(grad - fd) / scale).max() <= 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_weyl_is_traceless(seed):
    inst = M.build("ak4", {"w": "nonholo"})
    geo = C.geometry(inst.metric, inst.sample(model_points(inst, 3, seed)))
    W = geo.weyl
    tr = J.einsum("ia,ijab->jb", geo.ginv, W)
    assert np.abs(tr.value).max() <= 1e-10
