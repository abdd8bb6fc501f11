import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourframes import curvature as C
from fourframes import hermitian as H
from fourframes import jets as J
from fourframes import models as M
from fourframes.forms import DifferentialForm, MetricField


def state(model_id, params=None, n=40, seed=0, order=3):
    inst = M.build(model_id, params or {})
    pts = inst.chart.inset(0.05).scale(np.random.default_rng(seed).random((n, 4)))
    return inst, inst.structure.at(inst.sample(pts, order))


def mx(t):
    return float(np.max(H.tensor_max(t)))


def e(i, j):
    return DifferentialForm.coordinate(i, j)


def test_structure_from_quaternionic_pair():
    E = MetricField.euclidean()
    s = J.Sample(np.zeros((1, 4)))
    kahler = (e(0, 1) + e(2, 3)).at(s).value
    # w5 = w4(I., .) with omega_I = g(I., .): I e0 = -A4 A5 e0 = -e1
    st_ = H.structure_from_pair(E, e(0, 2) + e(3, 1), e(0, 3) + e(1, 2), sample=s)
    assert np.allclose(st_.omega_I.at(s).value, -kahler)
    st_ = H.structure_from_pair(E, e(0, 3) + e(1, 2), e(0, 2) + e(3, 1), sample=s)
    assert np.allclose(st_.omega_I.at(s).value, kahler)


def test_structure_from_gibbons_hawking_pair():
    inst = M.build("gibbons-hawking", {"a": 1.0, "b": 0.0})
    s = inst.sample(inst.chart.inset(0.05).scale(np.random.default_rng(1).random((50, 4))))
    st_ = H.structure_from_pair(inst.metric, inst.form("omega_I1"), inst.form("omega_I2"), sample=s)
    h = st_.at(s)
    overlap = h.pair(h.omega, inst.form("omega_I3").tensor_at(s)) * 0.5
    assert np.abs(np.abs(overlap.value) - 1.0).max() <= 1e-9
    assert mx(h.nijenhuis) <= 1e-8


def test_structure_from_bad_pair_rejected():
    E = MetricField.euclidean()
    with pytest.raises(H.StructureError):
        H.structure_from_pair(E, e(0, 1) + e(2, 3), e(0, 1) + e(2, 3), sample=J.Sample(np.zeros((1, 4))))


def test_flat_kaehler_is_trivial():
    inst, h = state("flat-family", {"mode": "kahler"})
    assert mx(h.eta) == 0.0
    assert mx(h.rtilde) == 0.0
    assert mx(h.gamma1) == 0.0
    assert np.all(H.conformal_scalar(inst.structure, inst.sample(np.zeros((1, 4)))) == 0.0)


@pytest.mark.parametrize("model_id, params", [("nil3", {}), ("ak4", {}), ("flat-family", {}), ("gibbons-hawking", {})])
def test_canonical_connection_is_metric_and_hermitian(model_id, params):
    _, h = state(model_id, params)
    assert mx(h.nabla_tilde_metric()) <= 1e-9
    assert mx(h.nabla_tilde_endo(h.I)) <= 1e-9
    gt = h.gamma_tilde
    assert mx(gt - gt.permute(0, 2, 1) - h.torsion) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_twisted_differential(seed):
    _, h = state("nil3", n=5, seed=seed)
    c = np.random.default_rng(seed).standard_normal((4, 4))
    x = h.sample.x
    alpha = J.stack([J.sin(sum(x[k] * c[i, k] for k in range(4))) for i in range(4)], axis=-1)
    cov = alpha.grad().swapaxes(-1, -2) - J.einsum("kij,k->ij", h.gamma_tilde, alpha)
    d_tilde = cov - cov.swapaxes(-1, -2)
    T_alpha = J.einsum("kij,k->ij", h.torsion, alpha)
    assert mx(d_tilde - (H.d1(alpha) - T_alpha)) <= 1e-8


def test_hermitian_torsion_formula():
    _, h = state("nil3")
    g, I = h.geo.g, h.I
    eta = h.eta_form()
    for i in range(4):
        Ub = g[:, i, :]
        IUb = J.einsum("k,kb->b", I[:, :, i], g)
        rhs = (H.wedge11(Ub, h.theta) + H.wedge11(IUb, h.I_theta)) * 0.25
        assert mx(eta[:, i] - rhs) <= 1e-8
    zeta = H.raise1(h.theta, h.geo.ginv)
    assert mx(h.eta_form(zeta)) <= 1e-8
    assert mx(h.eta_form(J.einsum("kj,j->k", I, zeta))) <= 1e-8


def test_almost_kaehler_torsion_symmetry():
    _, h = state("ak4", {"w": "nonholo"})
    I, eta = h.I, h.eta
    rot = J.einsum("ikm,mj->ikj", J.einsum("li,lkm->ikm", I, eta), I)
    assert mx(rot + eta) <= 1e-8
    assert mx(H.d2(h.omega)) <= 1e-12
    assert mx(h.nijenhuis) > 1e-3


def test_curvature_routes_agree():
    for model_id, params in [("nil3", {}), ("ak4", {"w": "mixed"})]:
        _, h = state(model_id, params)
        assert mx(h.rtilde - h.rtilde_split[0]) <= 1e-7


def test_nil3_canonical_curvature():
    _, h = state("nil3", n=100)
    target = H.outer(H.d1(h.I_theta), h.omega) * -0.25
    assert mx(h.rtilde - target.truncate(h.rtilde.order)) <= 1e-7
    assert mx(h.geo.project(h.d_theta, +1)) <= 1e-8
    assert mx(h.theta_norm2 + h.kappa / 3.0) <= 1e-8


def test_gibbons_hawking_canonical_curvature():
    _, h = state("gibbons-hawking", {"a": 1.0, "b": 0.0}, n=100)
    assert mx(h.rtilde - H.outer(h.gamma1, h.omega) * 0.5) <= 1e-7


def test_chern_form_closed_and_gauge():
    inst, h = state("ak4", {"w": "mixed"}, order=4)
    c = H.canonical_curvature(inst.structure, None, h.sample)
    assert mx(H.d2(H.chern_form(c))) <= 1e-7
    gs = inst.gauge(0).at(h.sample)
    assert mx(h.gamma1.truncate(2) + H.d1(gs.b).truncate(2)) <= 1e-7


def test_flat_family_gauge_forms():
    inst, h = state("flat-family", {"mode": "dependent"})
    s = h.sample
    phi, psi = inst.extras["phi"].at(s), inst.extras["psi"].at(s)
    # the gauge 1-forms of this structure are (-d phi, sin(phi) d psi, cos(phi) d psi)
    dphi, dpsi = phi.grad(), psi.grad()
    assert mx(H.wedge11(dphi, dpsi)) <= 1e-12
    assert mx(h.rtilde) <= 1e-8
    assert mx(h.eta) > 1e-2
    geo = h.geo

    def conn(wa, wb):
        num = J.einsum("iab,ab->i", geo.nabla2(wa), C.raise_both(wb, geo.ginv)) * 0.5
        return num / h.pair(wb, wb)[..., None]

    w1, w2 = inst.form("omega_I1").tensor_at(s), inst.form("omega_I2").tensor_at(s)
    assert mx(conn(h.omega, w1) + dphi) <= 1e-8
    assert mx(conn(w1, w2) - dpsi * J.sin(phi)[..., None]) <= 1e-8
    assert mx(conn(h.omega, w2) - dpsi * J.cos(phi)[..., None]) <= 1e-8


def test_hermitian_gauge_relations():
    inst, h = state("nil3")
    for seed in (0, 1):
        gs = inst.gauge(seed).at(h.sample)
        assert mx(gs.c + h.act1(gs.a)) <= 1e-8
        assert mx(h.theta - H.act1(gs.I1, gs.a) * 2.0) <= 1e-8


def test_almost_kaehler_gauge_relation():
    inst, h = state("ak4", {"w": "nonholo"})
    gs = inst.gauge(0).at(h.sample)
    assert mx(gs.c - h.act1(gs.a)) <= 1e-8


def test_negative_kaehler_weyl_spectrum():
    inst, h = state("ak4")
    _, Wm = C.weyl_split(C.CurvatureBundle(inst.metric), h.sample.points)
    s = h.geo.scalar.value
    ref = np.sort(np.stack([s / 6, -s / 12, -s / 12], axis=1), axis=1)
    assert np.abs(np.linalg.eigvalsh(Wm) - ref).max() <= 1e-8


def test_holonomy_ranks():
    inst, h = state("flat-family", {"mode": "kahler"})
    assert H.holonomy_rank(inst.structure, None, h.sample).rank == 0
    inst, h = state("gibbons-hawking", {"a": 1.0, "b": 0.0}, n=200)
    est = H.holonomy_rank(inst.structure, None, h.sample)
    assert est.rank == 1 and est.f0_norm.max() <= 1e-7
    inst, h = state("ak4", n=200)
    est = H.holonomy_rank(inst.structure, None, h.sample)
    assert est.rank == 1 and est.f0_norm.min() > 1e-3
    inst, h = state("flat-family", {"mode": "independent"}, n=20)
    assert H.holonomy_rank(inst.structure, None, h.sample).rank >= 1
    with pytest.raises(ValueError):
        H.holonomy_rank(inst.structure, None, h.sample.subset(slice(0, 5)))
