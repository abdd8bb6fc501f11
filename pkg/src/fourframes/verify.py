"""Check registry and the sampled-residual verifier.

Every check maps a model to a nonnegative residual per sample point; a check passes
when the largest residual is at most its tolerance. Checks declare the model tags they
need (see :func:`fourframes.models.build`), the jet order they evaluate at and whether
they depend on a local gauge, in which case both gauge seeds are evaluated and the
pointwise maximum is kept.

Free constants are fitted first by least squares over all sampled points and the
residual is taken afterwards; fitted values are reported with the check.

Conventions are those of :mod:`fourframes.hermitian`: 2-forms are paired with
``<A, B> = (1/2) A_ab B^ab`` (so ``|omega_I|^2 = 2``), ``R(F) = (1/2) F^ij R_ij..``
and ``I`` acts on forms by pullback.
"""

from __future__ import annotations

import fnmatch
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import curvature as C
from . import forms as F
from . import hermitian as H
from . import jets as J
from . import models as M
from .jets import NDIM

TOL_FIRST = 1e-8  # identities using at most two derivatives of the data
TOL_CURV = 1e-7  # canonical-curvature (order three) identities
TOL_SVD = 1e-6  # relative singular-value threshold for rank decisions
GAUGE_SEEDS = (0, 1)
INSET = 0.05
SVD_THRESHOLD = TOL_SVD

EVAL_ERRORS = (J.JetError, H.GaugeError, H.StructureError, FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError)


class CheckConfigError(ValueError):
    """Unknown or inapplicable check, or a bad tolerance override."""


class EvaluationError(RuntimeError):
    """A residual could not be evaluated; ``points`` lists offending chart points."""

    def __init__(self, check_id, message, points):
        self.check_id = check_id
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        coords = "; ".join("(" + ", ".join(f"{v:.6g}" for v in p) + ")" for p in self.points[:5])
        super().__init__(f"{check_id}: {message} at {coords}")


@dataclass(frozen=True)
class CheckSpec:
    id: str
    anchor: str
    residual: Callable = field(repr=False)
    default_tol: float = TOL_FIRST
    requires: frozenset = frozenset({"metric"})
    order: int = J.DEFAULT_ORDER
    gauge: bool = False
    kind: str = "identity"
    negative_control: str | None = None
    aliases: tuple = ()
    note: str = ""

    def applies(self, inst):
        return self.requires <= inst.tags


# ---------------------------------------------------------------------------
# evaluation context


class Context:
    """Samples, structures and gauges of one model on one point set, built on demand."""

    def __init__(self, inst, points):
        self.inst = inst
        self.points = points
        self._samples = {}
        self._gauges = {}
        self._cache = {}

    def __len__(self):
        return len(self.points)

    def sample(self, order=J.DEFAULT_ORDER):
        if order not in self._samples:
            self._samples[order] = J.Sample(self.points, order, self.inst.chart)
        return self._samples[order]

    def h(self, order=J.DEFAULT_ORDER):
        return self.inst.structure.at(self.sample(order))

    def geo(self, order=J.DEFAULT_ORDER):
        return C.geometry(self.inst.metric, self.sample(order))

    def form(self, label, order=J.DEFAULT_ORDER):
        return self.inst.named_forms[label].tensor_at(self.sample(order))

    def cached(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def gauges(self, order=J.DEFAULT_ORDER):
        """Gauge states for every seed that is non-degenerate over the sample."""
        if order not in self._gauges:
            states, err = [], None
            for seed in GAUGE_SEEDS:
                gs = self.inst.gauge(seed).at(self.sample(order))
                try:
                    gs.I1
                except H.GaugeError as e:
                    err = e
                    continue
                states.append(gs)
            if not states:
                raise err
            self._gauges[order] = states
        return self._gauges[order]


def _pm(t):
    return H.tensor_max(t)


def _worst(*parts):
    return np.max(np.stack([np.asarray(p, dtype=float) for p in parts]), axis=0)


def _over_gauges(ctx, fn, order=J.DEFAULT_ORDER):
    return _worst(*[fn(gs) for gs in ctx.gauges(order)])


def _scal(x):
    """Scalar jet as a multiplier of 2-form tensors."""
    return x[..., None, None]


# ---------------------------------------------------------------------------
# frames, forms and the q-pairing


def _frame_residuals(ctx):
    def compute():
        frame = F.FiveFrame([ctx.inst.named_forms[k] for k in ctx.inst.frame])
        return frame.residuals(ctx.inst.metric, ctx.sample(1))

    return ctx.cached("frame", compute)


def r_frame_gram(ctx):
    return _frame_residuals(ctx)["gram"]


def r_frame_wedge(ctx):
    return _frame_residuals(ctx)["wedge"]


def r_frame_closed(ctx):
    return _frame_residuals(ctx)["closed"]


def r_q_signature(ctx):
    geo = ctx.geo()
    B = geo.twoform_basis
    q = 0.25 * np.einsum("abcd,nAab,nBcd->nAB", F.levi_civita(), B, B) / geo.vol.value[:, None, None]
    return np.abs(q - np.diag([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])).max(axis=(1, 2))


def r_hodge_involution(ctx):
    geo = ctx.geo()
    ginv, vol = geo.ginv.truncate(0), geo.vol.truncate(0)
    n = len(ctx)
    out = np.zeros(n)
    for k in range(F.ncomp(2)):
        a = J.Jet.constant(np.broadcast_to(np.eye(F.ncomp(2))[k], (n, F.ncomp(2))), 0)
        twice = F.hodge_arr(F.hodge_arr(a, 2, ginv, vol), 2, ginv, vol)
        out = np.maximum(out, _pm(twice - a))
    return out


def r_lee_form(ctx):
    h = ctx.h()
    return _pm(H.d2(h.omega) - H.wedge12(h.theta, h.omega))


# ---------------------------------------------------------------------------
# canonical connection and its curvature


def r_eq28(ctx):
    h = ctx.h()
    s = h.geo.scalar
    base = h.gamma1 - h.rho_I - h.wplus_omega + h.omega * _scal(s / 6.0)
    return _over_gauges(ctx, lambda gs: _pm(base - gs.phi))


def _curvC2_rhs(geo, gamma1, omega):
    g = geo.g
    half_id = C.h_wedge_g(g * 0.5, g)  # the identity of Lambda^2 as a curvature tensor
    idm = geo.project(half_id, -1)
    ric0m = geo.project(C.h_wedge_g(geo.ricci0, g), -1)
    wm = geo.project(geo.weyl, -1)
    return wm + idm * (geo.scalar / 12.0)[..., None, None, None, None] + ric0m * 0.5, H.outer(gamma1, omega) * 0.5


def r_lemma_curvC2(ctx):
    h = ctx.h()
    asd, kahler = _curvC2_rhs(h.geo, h.gamma1, h.omega)
    return _pm(h.rtilde - asd - kahler)


def r_comp_curv(ctx):
    h = ctx.h()
    return _pm(h.rtilde - h.rtilde_split[0])


def r_bracket_torsion(ctx):
    h = ctx.h()
    bracket = h.rtilde_split[1]["bracket"]  # [i, j, k, a] = [eta_i, eta_j]^k_a
    return _over_gauges(ctx, lambda gs: _pm(bracket - J.einsum("ij,ka->ijka", gs.phi, h.I) * 0.5))


def r_chern_closed(ctx):
    return _pm(H.d2(ctx.h().gamma1))


def r_chern_gauge(ctx):
    h = ctx.h()
    return _over_gauges(ctx, lambda gs: _pm(h.gamma1 + H.d1(gs.b)))


def r_gauge_expansion(ctx):
    return _over_gauges(ctx, lambda gs: _worst(*gs.residuals().values()))


def r_canonical_connection(ctx):
    h = ctx.h()
    return _worst(_pm(h.nabla_tilde_metric()), _pm(h.nabla_tilde_endo(h.I)))


# ---------------------------------------------------------------------------
# Hermitian identities


def r_integrable(ctx):
    return _pm(ctx.h().nijenhuis)


def r_hgau(ctx):
    h = ctx.h()
    return _over_gauges(ctx, lambda gs: _worst(_pm(gs.c + h.act1(gs.a)), _pm(h.theta - H.act1(gs.I1, gs.a) * 2.0)))


def _phi_formula(h):
    return (H.wedge11(h.theta, h.I_theta) + h.omega * _scal(h.theta_norm2)) * 0.25


def r_phi(ctx):
    h = ctx.h()
    rhs = _phi_formula(h)
    return _over_gauges(ctx, lambda gs: _pm(gs.phi - rhs))


def r_ks(ctx):
    h = ctx.h()
    return _pm(h.kappa - h.geo.scalar + h.codiff_theta * 3.0 + h.theta_norm2 * 1.5)


def r_wplus(ctx):
    h = ctx.h()
    geo = h.geo
    wp = geo.project(geo.weyl, +1)
    idp = geo.project(C.h_wedge_g(geo.g * 0.5, geo.g), +1)
    k = h.kappa[..., None, None, None, None]
    rhs = (H.outer(h.omega, h.omega) * 0.5 - idp * (1.0 / 3.0)) * k * 0.25
    rhs = rhs - (H.outer(h.psi, h.omega) + H.outer(h.omega, h.psi)) * 0.25
    return _pm(wp - rhs)


def r_eq29(ctx):
    h = ctx.h()
    rhs = h.rho_I - h.omega * _scal(h.codiff_theta * 0.5) + H.wedge11(h.theta, h.I_theta) * 0.25 - h.psi * 0.5
    return _pm(h.gamma1 - rhs)


def r_prop42(ctx):
    h = ctx.h()
    return _pm(h.rtilde + H.outer(H.d1(h.I_theta), h.omega) * 0.25)


# ---------------------------------------------------------------------------
# selfdual Ricci-flat Hermitian structures


def _cube_roots(kappa):
    """Real ``kappa^(-1/3)`` and ``kappa^(2/3)`` for a nowhere-zero ``kappa``."""
    k2 = kappa * kappa
    return kappa * J.power(k2, -2.0 / 3.0), J.power(k2, 1.0 / 3.0)


def r_class5_i(ctx):
    h = ctx.h()
    return _pm(h.wplus_omega - h.omega * _scal(h.kappa / 6.0))


def r_class5_ii(ctx):
    h = ctx.h()
    _, k23 = _cube_roots(h.kappa)
    return _worst(
        _pm(h.theta * h.kappa[..., None] + h.kappa.grad() * (2.0 / 3.0)),
        _pm(H.d2(h.omega * _scal(k23))),
        _pm(h.nijenhuis),
    )


def _killing_data(ctx):
    """``X^flat = I d(kappa^(-1/3))`` and ``X`` at order four."""

    def compute():
        h = ctx.h(4)
        f, k23 = _cube_roots(h.kappa)
        xflat = h.act1(f.grad())
        x = H.raise1(xflat, h.geo.ginv)
        return h, xflat, x, k23

    return ctx.cached("killing", compute)


def r_class5_iii(ctx):
    h, xflat, x, k23 = _killing_data(ctx)
    geo = h.geo
    nab = geo.nabla1(xflat)
    ix_omega = J.einsum("i,ij->j", x, h.omega)
    lie = H.d1(ix_omega) + J.einsum("i,ijk->jk", x, H.d2(h.omega))
    ix_kahler = J.einsum("i,ij->j", x, h.omega * _scal(k23))
    return _worst(_pm(nab + nab.swapaxes(-1, -2)), _pm(lie), _pm(H.d1(ix_kahler)))


def r_class5_iv(ctx):
    h, xflat, _, k23 = _killing_data(ctx)
    dplus = h.geo.project(H.d1(xflat), +1)
    return _pm(dplus + h.omega * _scal(k23 / 12.0))


def r_theta_kappa(ctx):
    h = ctx.h()
    return _pm(h.theta_norm2 + h.kappa / 3.0)


def r_omegaJ_closed(ctx):
    h = ctx.h()
    wj = h.omega + H.wedge11(h.theta, h.I_theta) * _scal(2.0 / h.theta_norm2)
    return _worst(_pm(H.d2(wj)), _pm(h.geo.project(wj, +1)), _pm(h.pair(wj, wj) - 2.0))


def r_triholomorphic(ctx):
    h, xflat, _, k23 = _killing_data(ctx)
    f, _ = _cube_roots(h.kappa)
    return _worst(
        _pm(h.geo.project(H.d1(xflat), -1)),
        _pm(xflat - h.I_theta * (f * 0.5)[..., None]),
        _pm(h.d_theta),
    )


def r_nil3_isometry(ctx):
    pts = ctx.points
    gh = M.build("gibbons-hawking", {"a": 1.0, "b": 0.0})
    s = J.Sample(M.nil3_to_gh(pts), 1)
    jac = M.nil3_jacobian(pts)
    pull = lambda t: np.einsum("nai,nab,nbj->nij", jac, t, jac)
    out = np.abs(pull(gh.metric.at(s).value) - ctx.geo().g.value).max(axis=(1, 2))
    for k in (1, 2, 3):
        for lab in (f"omega_J{k}", f"omega_I{k}"):
            diff = pull(gh.named_forms[lab].tensor_at(s).value) - ctx.form(lab).value
            out = np.maximum(out, np.abs(diff).max(axis=(1, 2)))
    return out


# ---------------------------------------------------------------------------
# hyperKaehler metrics and Gibbons-Hawking


def r_ricci_flat(ctx):
    return _pm(ctx.geo().ricci)


def r_selfdual(ctx):
    geo = ctx.geo()
    return np.abs(geo.operator_matrix(geo.weyl)[:, 3:, 3:]).max(axis=(1, 2))


def r_hk_parallel(ctx):
    geo = ctx.geo()
    parts = []
    for lab in ctx.inst.frame[:3]:
        w = ctx.form(lab)
        parts += [_pm(geo.nabla2(w)), _pm(geo.project(w, +1))]
    return _worst(*parts)


def r_hol_vhk(ctx):
    h = ctx.h()
    return _worst(r_ricci_flat(ctx), r_selfdual(ctx), _pm(h.rtilde - H.outer(h.gamma1, h.omega) * 0.5))


def r_gh_monopole(ctx):
    inst = ctx.inst
    s = ctx.sample()
    parts = [M.monopole_defect(inst.extras["U"], inst.extras["Theta"], s)]
    parts += [_pm(H.d2(ctx.form(f"omega_J{k}"))) for k in (1, 2, 3)]
    return _worst(*parts)


def r_gh_dI3(ctx):
    a = ctx.inst.params["a"]
    target = np.zeros((NDIM,) * 3)
    eps = F.levi_civita()[0]  # eps[i, j, k] over (1, 2, 3) = (x, y, z)
    target[1:, 1:, 1:] = 2.0 * a * eps[1:, 1:, 1:]
    return _pm(H.d2(ctx.form("omega_I3")) - target)


# ---------------------------------------------------------------------------
# small holonomy


def r_flat_gen(ctx):
    inst, h = ctx.inst, ctx.h()
    s = ctx.sample()
    phi, psi = inst.extras["phi"].at(s), inst.extras["psi"].at(s)
    dphi, dpsi = phi.grad(), psi.grad()
    geo = h.geo
    w1, w2 = ctx.form("omega_I1"), ctx.form("omega_I2")

    def conn(wa, wb):
        # coefficient of w_b in D w_a, as a 1-form
        num = J.einsum("iab,ab->i", geo.nabla2(wa), C.raise_both(wb, geo.ginv)) * 0.5
        return num / h.pair(wb, wb)[..., None]

    phi_form = inst.gauge("model").at(s).phi
    return _worst(
        _pm(h.rtilde),
        _pm(phi_form),
        _pm(H.wedge11(dpsi, dphi)),
        _pm(conn(h.omega, w1) + dphi),
        _pm(conn(w1, w2) - dpsi * J.sin(phi)[..., None]),
        _pm(conn(h.omega, w2) - dpsi * J.cos(phi)[..., None]),
    )


def r_holonomy(ctx):
    h = ctx.h()
    sv = np.linalg.svd(h.geo.operator_matrix(h.rtilde), compute_uv=False)
    top = sv.max()
    fitted = {"rank": 0}
    if top == 0.0:
        return np.zeros(len(ctx)), fitted
    fitted["rank"] = int((sv > SVD_THRESHOLD * top).sum(axis=1).max())
    if fitted["rank"] == 1 and 6 * len(ctx) >= 40:
        est = H.holonomy_rank(ctx.inst.structure, None, ctx.sample(), SVD_THRESHOLD)
        fitted["alpha"] = float(np.mean(est.alpha))
        fitted["f0_norm_min"] = float(est.f0_norm.min())
        fitted["f0_norm_max"] = float(est.f0_norm.max())
    return sv[:, 1] / top, fitted


def r_almost_kahler(ctx):
    h = ctx.h()
    I, eta = h.I, h.eta
    rot = J.einsum("ikm,mj->ikj", J.einsum("li,lkm->ikm", I, eta), I)
    return _worst(_pm(H.d2(h.omega)), _pm(rot + eta))


def _omega_J(ctx, order=J.DEFAULT_ORDER):
    return ctx.form("omega_J", order)


def r_J_kahler(ctx):
    h = ctx.h()
    wj = _omega_J(ctx)
    Je = h.endo(wj)
    sq = H.compose(Je, Je) + np.eye(NDIM)
    return _worst(_pm(h.geo.nabla2(wj)), _pm(sq), _pm(h.geo.project(wj, +1)))


def _ak4_fit(ctx):
    """``rho^J`` and the least-squares ``alpha`` in ``gamma1 = alpha rho^J``."""

    def compute():
        h = ctx.h()
        rho = h.rho_of(h.endo(_omega_J(ctx)))
        num = float(np.sum(h.pair(h.gamma1, rho).value))
        den = float(np.sum(h.pair(rho, rho).value))
        alpha = num / den if den > 1e-24 else None
        return rho, alpha

    return ctx.cached("ak4_fit", compute)


def _alpha_fitted(alpha):
    return {"alpha": alpha}


def r_prop_1dimhol(ctx):
    h = ctx.h()
    geo = h.geo
    wj = _omega_J(ctx)
    rho, alpha = _ak4_fit(ctx)
    al = 0.0 if alpha is None else alpha
    asd, _ = _curvC2_rhs(geo, h.gamma1, h.omega)
    curv_ka = asd - H.outer(rho, wj) * 0.5
    clean = h.rtilde - H.outer(rho * 0.5, h.omega * al + wj)
    return _worst(_pm(curv_ka), _pm(clean), _pm(h.gamma1 - rho * al)), _alpha_fitted(alpha)


def r_tak_rels(ctx):
    h = ctx.h()
    geo = h.geo
    wi, wj = h.omega, _omega_J(ctx)
    rho, alpha = _ak4_fit(ctx)
    al = 0.0 if alpha is None else alpha
    s, kap = geo.scalar, h.kappa
    mu = h.pair(rho, wi) * 0.5
    phi1 = rho - wj * _scal(s / 4.0) - wi * _scal(mu)
    phi2 = h.wplus_omega - wi * _scal(kap / 6.0)
    coeff_i = mu * al - s / 12.0 - kap / 6.0
    coeff_j = s * (al / 4.0) - mu

    def second(gs):
        a = gs.a
        return _pm(H.wedge11(a, h.act1(a)) - wi * _scal(coeff_i) - wj * _scal(coeff_j))

    res = _worst(_pm(phi2 - phi1 * al), _over_gauges(ctx, second))
    return res, _alpha_fitted(alpha)


def _s_pm(ctx):
    h = ctx.h()
    wi, wj = h.omega, _omega_J(ctx)
    rho, _ = _ak4_fit(ctx)
    wp, wm = (wi - wj) * 0.5, (wi + wj) * 0.5
    s_plus = h.pair(h.geo.operator(h.rtilde, wp), wp) * 2.0
    s_minus = h.pair(h.geo.operator(h.rtilde, wm), wm) * 2.0
    return h, rho, wp, wm, s_plus, s_minus


def r_tak_splus(ctx):
    h, rho, wp, wm, s_plus, s_minus = _s_pm(ctx)
    return _worst(_pm(s_plus + h.pair(h.gamma1 - rho, wp)), _pm(s_minus - h.pair(h.gamma1 + rho, wm)))


def r_tak_splus_derived(ctx):
    h, rho, wp, wm, s_plus, s_minus = _s_pm(ctx)
    return _worst(_pm(s_plus - h.pair(h.gamma1 - rho, wp)), _pm(s_minus - h.pair(h.gamma1 + rho, wm)))


def r_tak_kappa(ctx):
    h = ctx.h()
    return _over_gauges(ctx, lambda gs: _pm(h.kappa - h.geo.scalar - H.norm2_1(gs.a, h.geo.ginv) * 6.0))


def _w_parts(ctx):
    s = ctx.sample()
    p, q = ctx.inst.extras["w"](s.x)
    n = 1.0 - p * p - q * q
    # |d|w||^2 = |p dp + q dq|^2 / |w|^2
    v = p.grad() * p[..., None] + q.grad() * q[..., None]
    dmod2 = H.norm2_1(v, ctx.geo().ginv) / (p * p + q * q)
    return n, dmod2


def _a_norm_residual(ctx, factor):
    h = ctx.h()
    n, dmod2 = _w_parts(ctx)
    target = dmod2 / (n * n) * factor
    return _over_gauges(ctx, lambda gs: _pm(H.norm2_1(gs.a, h.geo.ginv) - target))


def r_tak_a_norm(ctx):
    return _a_norm_residual(ctx, 0.5)


def r_tak_a_norm_derived(ctx):
    return _a_norm_residual(ctx, 4.0)


def _log_laplacian_residual(ctx, factor):
    h = ctx.h()
    s = ctx.sample()
    n, _ = _w_parts(ctx)
    df = J.log(n).grad()
    z = df[..., 0] * 0.0
    # I_Sigma acts by pullback with I d/dt = d/du, so I_Sigma (f_t dt + f_u du) = f_u dt - f_t du
    isdf = J.stack([z, z, df[..., 3], -df[..., 2]], axis=-1)
    lam2 = ctx.inst.extras["lam2"](s.x)
    dt, du = M._dx(s.x, 2), M._dx(s.x, 3)
    omega_sigma = H.wedge11(dt, du) * _scal(lam2)
    return _over_gauges(
        ctx, lambda gs: _pm(H.d1(isdf) - omega_sigma * _scal(H.norm2_1(gs.a, h.geo.ginv) * factor))
    )


def r_tak_log_laplacian(ctx):
    return _log_laplacian_residual(ctx, 8.0)


def r_tak_log_laplacian_derived(ctx):
    return _log_laplacian_residual(ctx, 1.0)


def _sigma_scalar(ctx, exponent):
    """Scalar curvature of ``(1 - |w|^2)^exponent g_Sigma`` on the ``(t, u)`` slice."""
    s = ctx.sample()
    n, _ = _w_parts(ctx)
    lam2 = ctx.inst.extras["lam2"](s.x)
    lf = J.log(n) * exponent + J.log(lam2)
    lap = lf.partial(2).partial(2) + lf.partial(3).partial(3)
    conf = J.power(n, exponent) * lam2
    return _pm(lap / conf)


def r_tak_case_iii_flat(ctx):
    _, alpha = _ak4_fit(ctx)
    return _sigma_scalar(ctx, 1.0 / (4.0 * (alpha - 1.0))), _alpha_fitted(alpha)


def r_tak_case_iii_flat_derived(ctx):
    _, alpha = _ak4_fit(ctx)
    return _sigma_scalar(ctx, (1.0 + alpha) / (1.0 - alpha)), _alpha_fitted(alpha)


def r_tak_case_iii_scalar(ctx):
    h = ctx.h()
    _, alpha = _ak4_fit(ctx)
    s = h.geo.scalar
    res = _over_gauges(ctx, lambda gs: _pm(s * ((alpha - 1.0) / 2.0) - H.norm2_1(gs.a, h.geo.ginv)))
    return res, _alpha_fitted(alpha)


# ---------------------------------------------------------------------------
# registry


def _req(*tags):
    return frozenset(tags)


_LIT = "literal constant; evaluates the identity as stated, see the _derived companion"

REGISTRY = (
    CheckSpec("frame_gram", "<omega_i, omega_j> = delta_ij, i, j = 1..5", r_frame_gram, TOL_FIRST, _req("frame"), 1),
    CheckSpec(
        "frame_wedge",
        "omega_i ^ omega_j = -+delta_ij omega_5 ^ omega_5 (three anti-selfdual, two selfdual)",
        r_frame_wedge,
        TOL_FIRST,
        _req("frame"),
        1,
    ),
    CheckSpec(
        "frame_closed",
        "d omega_k = 0, k = 1..5 (closed 5-frame)",
        r_frame_closed,
        TOL_FIRST,
        _req("frame"),
        1,
        negative_control="gibbons-hawking frame=twisted",
    ),
    CheckSpec(
        "q_signature",
        "alpha ^ beta = q(alpha, beta) vol; q has signature (3, 3), positive on Lambda+",
        r_q_signature,
        TOL_FIRST,
    ),
    CheckSpec("hodge_involution", "** = 1 on 2-forms; Lambda2 = Lambda+ (+) Lambda-", r_hodge_involution, TOL_FIRST),
    CheckSpec(
        "lee_form_defining",
        "d omega_I = theta ^ omega_I",
        r_lee_form,
        TOL_FIRST,
        _req("structure"),
    ),
    CheckSpec(
        "eq28",
        "gamma1 = rho^I + W+(omega_I) + Phi - (s/6) omega_I, Phi = a ^ c",
        r_eq28,
        TOL_CURV,
        _req("structure"),
        gauge=True,
    ),
    CheckSpec(
        "lemma_curvC2",
        "R~ = W- + (s/12) Id_Lambda- + (1/2) Ric0^- + (1/2) gamma1 (x) omega_I",
        r_lemma_curvC2,
        TOL_CURV,
        _req("structure"),
    ),
    CheckSpec(
        "comp_curv_crosscheck",
        "R~(X,Y) = R(X,Y) - d~eta(X,Y) + [eta_X, eta_Y] - eta_{T_X Y}",
        r_comp_curv,
        TOL_CURV,
        _req("structure"),
    ),
    CheckSpec(
        "bracket_torsion",
        "[eta_X, eta_Y] = (1/2) Phi(X, Y) I",
        r_bracket_torsion,
        TOL_FIRST,
        _req("structure"),
        gauge=True,
    ),
    CheckSpec("chern_closed", "d gamma1 = 0", r_chern_closed, TOL_CURV, _req("structure")),
    CheckSpec("chern_gauge", "gamma1 = -db", r_chern_gauge, TOL_CURV, _req("structure"), gauge=True),
    CheckSpec(
        "gauge_expansion",
        "DI = a (x) I2 + c (x) I1; D~I1 = -b (x) I2; I1 I = -I I1, I1^2 = -1",
        r_gauge_expansion,
        TOL_FIRST,
        _req("structure"),
        gauge=True,
    ),
    CheckSpec(
        "canonical_connection",
        "D~ = D + eta with eta = (1/2)(DI)I satisfies D~g = 0, D~I = 0",
        r_canonical_connection,
        TOL_FIRST,
        _req("structure"),
    ),
    CheckSpec("I_integrable", "N_I = 0 (Hermitian)", r_integrable, TOL_FIRST, _req("hermitian")),
    CheckSpec("eq_hgau", "c = -Ia, theta = 2 I1 a", r_hgau, TOL_FIRST, _req("hermitian"), gauge=True),
    CheckSpec(
        "eq_phi",
        "Phi = (1/4)(theta ^ I theta + |theta|^2 omega_I)",
        r_phi,
        TOL_FIRST,
        _req("hermitian"),
        gauge=True,
    ),
    CheckSpec("eq_ks", "kappa - s = -3 d*theta - (3/2)|theta|^2", r_ks, TOL_FIRST, _req("hermitian")),
    CheckSpec(
        "eq_wplus",
        "W+ = (kappa/4)((1/2) omega_I (x) omega_I - (1/3) Id_Lambda+) - (1/4) Psi (x) omega_I - (1/4) omega_I (x) Psi, "
        "Psi = d+theta(I., .)",
        r_wplus,
        TOL_FIRST,
        _req("hermitian"),
    ),
    CheckSpec(
        "eq29",
        "gamma1 = rho^I - (1/2)(d*theta) omega_I + (1/4) theta ^ I theta - (1/2) Psi",
        r_eq29,
        TOL_CURV,
        _req("hermitian"),
    ),
    CheckSpec(
        "prop42",
        "closed 5-frame <=> R~ = -(1/4) d(I theta) (x) omega_I",
        r_prop42,
        TOL_CURV,
        _req("hermitian", "hk"),
        aliases=("prop42_curvature_characterization",),
    ),
    CheckSpec(
        "prop_class5_i",
        "W+(omega_I) = (kappa/6) omega_I",
        r_class5_i,
        TOL_FIRST,
        _req("hermitian", "hk", "nonflat"),
    ),
    CheckSpec(
        "prop_class5_ii",
        "kappa theta + (2/3) d kappa = 0 and (kappa^(2/3) g, I) Kaehler",
        r_class5_ii,
        TOL_CURV,
        _req("hermitian", "hk", "nonflat"),
    ),
    CheckSpec(
        "prop_class5_iii",
        "X = I grad(kappa^(-1/3)) is a Hamiltonian Killing field",
        r_class5_iii,
        TOL_CURV,
        _req("hermitian", "hk", "nonflat"),
        order=4,
        note="X^flat = I d(kappa^(-1/3)) with I acting by pullback and the real cube root",
    ),
    CheckSpec(
        "prop_class5_iv",
        "d+X^flat = -(1/12) kappa^(2/3) omega_I",
        r_class5_iv,
        TOL_CURV,
        _req("hermitian", "hk", "nonflat"),
        order=4,
        note="same X^flat as prop_class5_iii",
    ),
    CheckSpec(
        "thm1_theta_kappa",
        "|theta|^2 = -kappa/3",
        r_theta_kappa,
        TOL_FIRST,
        _req("hermitian", "hk", "nonflat"),
    ),
    CheckSpec(
        "thm1_omegaJ_closed",
        "omega_J = omega_I + 2|theta|^-2 theta ^ I theta is closed and anti-selfdual",
        r_omegaJ_closed,
        TOL_CURV,
        _req("hermitian", "hk", "nonflat"),
    ),
    CheckSpec(
        "thm1_triholomorphic",
        "X^flat = (1/2) kappa^(-1/3) I theta, d-X^flat = 0, d theta = 0",
        r_triholomorphic,
        TOL_CURV,
        _req("hermitian", "hk", "nonflat"),
        order=4,
    ),
    CheckSpec(
        "nil3_gh_isometry",
        "dt^2 + y(s1^2 + s2^2) + s3^2/y = pullback of U = y Gibbons-Hawking through t = (2/3) y^(3/2)",
        r_nil3_isometry,
        1e-9,
        _req("nil3"),
        negative_control="nil3 variant=printed",
    ),
    CheckSpec("ricci_flat", "Ric = 0", r_ricci_flat, TOL_FIRST, _req("hk"), negative_control="nil3 variant=printed"),
    CheckSpec("selfdual", "W- = 0", r_selfdual, TOL_FIRST, _req("hk")),
    CheckSpec(
        "hk_parallel",
        "D omega_Jk = 0 for the anti-selfdual triple",
        r_hk_parallel,
        TOL_FIRST,
        _req("hk"),
    ),
    CheckSpec(
        "hol_vhk",
        "Ric = 0 and W- = 0 <=> R~ = (1/2) gamma1 (x) omega_I",
        r_hol_vhk,
        TOL_CURV,
        _req("hk"),
    ),
    CheckSpec(
        "gh_monopole",
        "d Theta = *_3 dU and d omega_Jk = 0",
        r_gh_monopole,
        TOL_FIRST,
        _req("gibbons-hawking"),
        negative_control="gibbons-hawking potential=nonharmonic",
    ),
    CheckSpec(
        "gh_dI3",
        "U = ay + b: d omega_I3 = 2a dx^dy^dz",
        r_gh_dI3,
        1e-12,
        _req("gh_linear"),
    ),
    CheckSpec(
        "flat_gen",
        "R~ = 0 <=> dpsi ^ dphi = 0 for omega_I = s1 cos(phi) cos(psi) + s2 cos(phi) sin(psi) + s3 sin(phi); "
        "gauge connection forms (-dphi, sin(phi) dpsi, cos(phi) dpsi)",
        r_flat_gen,
        TOL_FIRST,
        _req("flat-family"),
        negative_control="flat-family mode=independent",
        note="connection forms are <D omega_A, omega_B>/|omega_B|^2 for (I, I1), (I1, I2), (I, I2)",
    ),
    CheckSpec(
        "holonomy_rank_bound",
        "dim hol~ <= 1: R~ = gamma (x) F, F = F0 + alpha omega_I",
        r_holonomy,
        TOL_SVD,
        _req("small_hol"),
        note="residual is the second singular value of R~ relative to the largest",
    ),
    CheckSpec(
        "almost_kahler",
        "d omega_I = 0 and eta_{IX} IY = -eta_X Y",
        r_almost_kahler,
        TOL_FIRST,
        _req("almost_kahler"),
    ),
    CheckSpec(
        "J_kahler",
        "(g, J) Kaehler, omega_J = -(i/2) dz ^ dzbar + omega_Sigma",
        r_J_kahler,
        TOL_FIRST,
        _req("omega_J"),
        negative_control="ak4 w=nonholo",
    ),
    CheckSpec(
        "prop_1dimhol",
        "W- + (s/12) Id_Lambda- + (1/2) Ric0^- = (1/2) rho^J (x) omega_J; gamma1 = alpha rho^J; "
        "R~ = (rho^J/2) (x) (alpha omega_I + omega_J)",
        r_prop_1dimhol,
        TOL_CURV,
        _req("kahler_J"),
    ),
    CheckSpec(
        "tak_rels",
        "phi2 = alpha phi1; a ^ Ia = (alpha mu - s/12 - kappa/6) omega_I + (alpha s/4 - mu) omega_J, "
        "rho^J = (s/4) omega_J + mu omega_I + phi1, W+(omega_I) = (kappa/6) omega_I + phi2",
        r_tak_rels,
        TOL_CURV,
        _req("kahler_J"),
        gauge=True,
    ),
    CheckSpec(
        "tak_splus",
        "-s+ = <gamma1 - rho^J, omega+>, s- = <gamma1 + rho^J, omega->, s_pm = 2<R~(omega_pm), omega_pm>",
        r_tak_splus,
        TOL_CURV,
        _req("kahler_J"),
        kind="literal",
        note=_LIT,
    ),
    CheckSpec(
        "tak_splus_derived",
        "s+ = <gamma1 - rho^J, omega+>, s- = <gamma1 + rho^J, omega->",
        r_tak_splus_derived,
        TOL_CURV,
        _req("kahler_J"),
        kind="derived",
    ),
    CheckSpec(
        "tak_kappa",
        "kappa = s + 6|a|^2",
        r_tak_kappa,
        TOL_FIRST,
        _req("almost_kahler"),
        gauge=True,
    ),
    CheckSpec(
        "tak_a_norm",
        "|a|^2 = |d|w||^2 / (2(1 - |w|^2)^2)",
        r_tak_a_norm,
        TOL_FIRST,
        _req("ak4_holo"),
        gauge=True,
        kind="literal",
        note=_LIT,
    ),
    CheckSpec(
        "tak_a_norm_derived",
        "|a|^2 = 4|d|w||^2 / (1 - |w|^2)^2",
        r_tak_a_norm_derived,
        TOL_FIRST,
        _req("ak4_holo"),
        gauge=True,
        kind="derived",
    ),
    CheckSpec(
        "tak_log_laplacian",
        "(d I_Sigma d) ln(1 - |w|^2) = 8|a|^2 omega_Sigma",
        r_tak_log_laplacian,
        TOL_FIRST,
        _req("ak4_holo"),
        gauge=True,
        kind="literal",
        note=_LIT,
    ),
    CheckSpec(
        "tak_log_laplacian_derived",
        "(d I_Sigma d) ln(1 - |w|^2) = |a|^2 omega_Sigma",
        r_tak_log_laplacian_derived,
        TOL_FIRST,
        _req("ak4_holo"),
        gauge=True,
        kind="derived",
    ),
    CheckSpec(
        "tak_case_iii_scalar",
        "((alpha - 1)/2) s = |a|^2 for w = w(Sigma)",
        r_tak_case_iii_scalar,
        TOL_CURV,
        _req("ak4_holo"),
        gauge=True,
    ),
    CheckSpec(
        "tak_case_iii_flat",
        "(1 - |w|^2)^(1/(4(alpha - 1))) g_Sigma is flat",
        r_tak_case_iii_flat,
        TOL_FIRST,
        _req("ak4_holo"),
        kind="literal",
        note=_LIT,
    ),
    CheckSpec(
        "tak_case_iii_flat_derived",
        "(1 - |w|^2)^((1 + alpha)/(1 - alpha)) g_Sigma is flat",
        r_tak_case_iii_flat_derived,
        TOL_FIRST,
        _req("ak4_holo"),
        kind="derived",
    ),
)

_BY_ID = {c.id: c for c in REGISTRY}
_ALIASES = {a: c.id for c in REGISTRY for a in c.aliases}


def registry():
    """The full shipped check registry."""
    return list(REGISTRY)


def get(check_id):
    key = _ALIASES.get(check_id, check_id)
    if key not in _BY_ID:
        raise CheckConfigError(f"unknown check {check_id!r}")
    return _BY_ID[key]


def applicable(inst):
    return [c for c in REGISTRY if c.applies(inst)]


def expected_ids(inst, failures=()):
    """Applicable checks minus the documented failures of this configuration."""
    return [c.id for c in applicable(inst) if c.id not in set(failures)]


def select(inst, pattern="all"):
    """Resolve ``"all"``, a glob or a comma-separated list of ids/globs to applicable checks.

    Globs silently skip checks that do not apply; explicitly named checks must apply.
    """
    if pattern in (None, "", "all"):
        return applicable(inst)
    chosen = []
    for part in (p.strip() for p in pattern.split(",")):
        if not part:
            continue
        if any(ch in part for ch in "*?["):
            hits = [c for c in REGISTRY if fnmatch.fnmatchcase(c.id, part)]
            if not hits:
                raise CheckConfigError(f"no check matches {part!r}")
            hits = [c for c in hits if c.applies(inst)]
            if not hits:
                raise CheckConfigError(f"no check matching {part!r} applies to model {inst.id}")
        else:
            c = get(part)
            if not c.applies(inst):
                missing = ", ".join(sorted(c.requires - inst.tags))
                raise CheckConfigError(f"check {c.id} does not apply to model {inst.id} (needs {missing})")
            hits = [c]
        chosen += [c for c in hits if c not in chosen]
    return chosen


# ---------------------------------------------------------------------------
# sampling and reports


def sample_points(chart, n, seed):
    """``n`` scrambled Sobol points in the chart box shrunk by 5% on every side."""
    if n < 1:
        raise CheckConfigError("n_samples must be at least 1")
    m = max(0, math.ceil(math.log2(n)))
    u = qmc.Sobol(NDIM, scramble=True, seed=seed).random_base2(m)[:n]
    box = chart.inset(INSET)
    return box.lo + u * (box.hi - box.lo)


@dataclass
class CheckResult:
    id: str
    anchor: str
    samples: int
    max_residual: float
    tol: float
    passed: bool
    fitted_constants: dict | None = None

    def as_dict(self):
        d = {
            "id": self.id,
            "anchor": self.anchor,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "pass": self.passed,
        }
        if self.fitted_constants:
            d["fitted_constants"] = self.fitted_constants
        return d


@dataclass
class VerificationReport:
    model: str
    params: dict
    seed: int
    jet_order: int
    checks: list
    timestamp: str | None = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        d = {
            "model": self.model,
            "params": self.params,
            "seed": self.seed,
            "jet_order": self.jet_order,
            "checks": [c.as_dict() for c in self.checks],
        }
        if self.timestamp is not None:
            d["timestamp"] = self.timestamp
        return d

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_text(self):
        params = ", ".join(f"{k}={v}" for k, v in self.params.items())
        lines = [f"model {self.model} ({params})  seed {self.seed}  jet order {self.jet_order}"]
        if self.timestamp is not None:
            lines.append(f"timestamp {self.timestamp}")
        width = max([len(c.id) for c in self.checks] + [5])
        lines.append(f"{'check':<{width}}  {'samples':>7}  {'max_residual':>12}  {'tol':>8}  result")
        for c in self.checks:
            res = "nan" if c.max_residual is None else f"{c.max_residual:.3e}"
            line = f"{c.id:<{width}}  {c.samples:>7}  {res:>12}  {c.tol:>8.1e}  {'PASS' if c.passed else 'FAIL'}"
            if c.fitted_constants:
                line += "  " + ", ".join(f"{k}={_fmt(v)}" for k, v in c.fitted_constants.items())
            lines.append(line)
        n_pass = sum(c.passed for c in self.checks)
        lines.append(f"{n_pass}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _clean_fitted(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (float, np.floating)):
            v = float(v)
            out[k] = v if math.isfinite(v) else None
        elif isinstance(v, (int, np.integer)):
            out[k] = int(v)
        else:
            out[k] = v
    return out


def _evaluate(spec, ctx):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = spec.residual(ctx)
    fitted = None
    if isinstance(out, tuple):
        out, fitted = out
    return np.asarray(out, dtype=float).reshape(-1), fitted


def _locate(spec, inst, points, limit=5):
    """Points at which the check fails to evaluate on its own or gives non-finite values."""
    bad = []
    for p in points:
        try:
            r, _ = _evaluate(spec, Context(inst, p[None, :]))
            ok = np.all(np.isfinite(r))
        except Exception:
            ok = False
        if not ok:
            bad.append(p)
            if len(bad) >= limit:
                break
    return np.array(bad) if bad else points[:1]


def resolve_tolerances(tol_overrides, checks):
    """Map check id -> tolerance from ``None``, a number (all checks) or an ``id -> value`` map."""
    tols = {c.id: c.default_tol for c in checks}
    if tol_overrides is None:
        return tols
    if isinstance(tol_overrides, (int, float)):
        if not float(tol_overrides) >= 0.0:
            raise CheckConfigError("tolerance must be nonnegative")
        return {k: float(tol_overrides) for k in tols}
    for key, val in tol_overrides.items():
        c = get(key)
        if c.id not in tols:
            raise CheckConfigError(f"tolerance given for check {key!r} which is not selected")
        val = float(val)
        if not val >= 0.0:
            raise CheckConfigError(f"tolerance for {key} must be nonnegative")
        tols[c.id] = val
    return tols


def run_checks(inst, checks=None, n_samples=200, seed=42, tol_overrides=None, timestamp=None):
    """Evaluate ``checks`` (ids, specs or ``None`` for all applicable) on ``inst``."""
    if checks is None:
        specs = applicable(inst)
    else:
        specs = [c if isinstance(c, CheckSpec) else get(c) for c in checks]
    for c in specs:
        if not c.applies(inst):
            raise CheckConfigError(f"check {c.id} does not apply to model {inst.id}")
    tols = resolve_tolerances(tol_overrides, specs)
    points = sample_points(inst.chart, int(n_samples), int(seed))
    ctx = Context(inst, points)
    results = []
    for spec in specs:
        try:
            r, fitted = _evaluate(spec, ctx)
        except EVAL_ERRORS as e:
            raise EvaluationError(spec.id, f"{type(e).__name__}: {e}", _locate(spec, inst, points)) from e
        if r.shape != (len(points),):
            raise EvaluationError(spec.id, f"residual has shape {r.shape}", points[:1])
        if not np.all(np.isfinite(r)):
            raise EvaluationError(spec.id, "non-finite residual", points[~np.isfinite(r)])
        worst = float(r.max())
        tol = tols[spec.id]
        results.append(
            CheckResult(spec.id, spec.anchor, len(points), worst, tol, worst <= tol, _clean_fitted(fitted) if fitted else None)
        )
    order = max([c.order for c in specs], default=J.DEFAULT_ORDER)
    return VerificationReport(inst.id, dict(inst.params), int(seed), order, results, timestamp)
