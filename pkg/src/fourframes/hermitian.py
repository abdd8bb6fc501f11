"""Almost Hermitian structures and their canonical Hermitian connection.

Index conventions (all arrays are jets with a leading point axis):

* endomorphisms ``A[k, a] = A^k_a``; 2-forms ``F[a, b]`` with ``F(X, Y) = g(A X, Y)``
* ``nabla_I[i, k, j] = (D_i I)^k_j`` and ``eta[i, k, j] = (eta_i)^k_j``
* curvature tensors ``R[i, j, a, b]``: the 2-form ``R(d_i, d_j)`` in the last pair
* ``I`` acts on forms by pulling back, ``(I alpha)(X) = alpha(I X)`` and
  ``(I F)(X, Y) = F(I X, I Y)``; note ``(I X)^flat = -I(X^flat)``

Pairings of 2-forms follow ``tensor_pair`` (``|omega_I|^2 = 2``), the normalization
under which ``gamma1 = <R~, omega_I>`` and ``R~ = (1/2) gamma1 (x) omega_I`` agree.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import curvature as C
from . import forms as F
from . import jets as J
from .jets import NDIM


class StructureError(ValueError):
    """Input 2-forms do not define an orthogonal almost complex structure."""


class GaugeError(ValueError):
    """No gauge seed has a usable projection onto the anti-invariant forms."""


# ---------------------------------------------------------------------------
# small tensor helpers


def d1(alpha):
    """``(d alpha)_ij = d_i alpha_j - d_j alpha_i`` for a 1-form tensor."""
    g = alpha.grad().swapaxes(-1, -2)
    return g - g.swapaxes(-1, -2)


def d2(F2):
    """Exterior derivative of a 2-form tensor, as a 3-form tensor."""
    g = F2.grad()  # [a, b, i] = d_i F_ab
    return g.permute(2, 0, 1) + g.permute(1, 2, 0) + g


def wedge11(a, b):
    t = J.einsum("i,j->ij", a, b)
    return t - t.swapaxes(-1, -2)


def wedge12(a, F2):
    """``(a ^ F)_ijk = a_i F_jk + a_j F_ki + a_k F_ij`` for a 1-form and a 2-form tensor."""
    t = J.einsum("i,jk->ijk", a, F2)
    return t + t.permute(1, 2, 0) + t.permute(2, 0, 1)


def act1(I, alpha):
    return J.einsum("k,kj->j", alpha, I)


def act2(I, F2):
    return J.einsum("ad,db->ab", J.einsum("cd,ca->ad", F2, I), I)


def compose(A, B):
    return J.einsum("kl,la->ka", A, B)


def trace_prod(A, B):
    """``tr(A B)`` for matrices in the trailing two slots."""
    return J.einsum("kl,lk->", A, B)


def norm2_1(alpha, ginv):
    return J.einsum("i,i->", J.einsum("ij,j->i", ginv, alpha), alpha)


def raise1(alpha, ginv):
    return J.einsum("ij,j->i", ginv, alpha)


def outer(a, b):
    """``(a (x) b)[i, j, a, b] = a_ij b_ab``."""
    return J.einsum("ij,ab->ijab", a, b)


def tensor_max(t):
    """Per-point max absolute value of a jet tensor's order-0 part."""
    v = t.value if isinstance(t, J.Jet) else np.asarray(t)
    return np.abs(v).reshape(v.shape[0], -1).max(axis=1)


# ---------------------------------------------------------------------------


class AlmostHermitianStructure:
    """Metric plus orthogonal almost complex structure ``I`` given by ``omega_I = g(I., .)``."""

    def __init__(self, g, omega_I, name=None):
        if omega_I.degree != 2:
            raise F.DegreeError("omega_I must be a 2-form")
        self.g = g
        self.omega_I = omega_I
        self.name = name

    def at(self, sample):
        return sample.cached((self, "state"), lambda: HermitianState(self, sample))

    # convenience point-level evaluators
    def I(self, sample):
        return self.at(sample).I

    def theta(self, sample):
        return self.at(sample).theta


def structure_from_pair(g, w4, w5, sample=None, tol=1e-8):
    """Structure ``I`` with ``w5(X, Y) = w4(I X, Y)``; optionally validated on ``sample``."""

    def omega(s):
        ginv = g.inverse_at(s)
        A4 = C.endo_of_form(w4.tensor_at(s), ginv)
        A5 = C.endo_of_form(w5.tensor_at(s), ginv)
        # w5 = w4(I., .) means A5 = A4 I, hence I = A4^{-1} A5 = -A4 A5 for A4^2 = -1
        I = -compose(A4, A5)
        return F.from_tensor(C.form_of_endo(I, g.at(s)), 2)

    s = AlmostHermitianStructure(g, F.form_from_array(2, omega, g.domain, "omega_I"))
    if sample is not None:
        ginv = g.inverse_at(sample)
        a, b = w4.at(sample), w5.at(sample)
        G = [0.5 * F.inner_arr(x, y, 2, ginv).value for x, y in ((a, a), (b, b), (a, b))]
        if max(np.abs(G[0] - 1).max(), np.abs(G[1] - 1).max(), np.abs(G[2]).max()) > tol:
            raise StructureError("pair is not orthonormal")
        res = s.at(sample).structure_residuals()
        if max(res["I2"].max(), res["compat"].max()) > tol:
            raise StructureError("resulting I is not an orthogonal complex structure; check orientation")
    return s


class HermitianState:
    """All structure-level quantities of an almost Hermitian structure on one sample."""

    def __init__(self, structure, sample):
        self.structure = structure
        self.sample = sample
        self.geo = C.geometry(structure.g, sample)

    # -- basic fields -------------------------------------------------------
    @cached_property
    def omega(self):
        return self.structure.omega_I.tensor_at(self.sample)

    @cached_property
    def I(self):
        return C.endo_of_form(self.omega, self.geo.ginv)

    def endo(self, F2):
        return C.endo_of_form(F2, self.geo.ginv)

    def form(self, A):
        return C.form_of_endo(A, self.geo.g)

    def act1(self, alpha):
        return act1(self.I, alpha)

    def act2(self, F2):
        return act2(self.I, F2)

    def pair(self, A, B):
        return self.geo.pair(A, B)

    def structure_residuals(self):
        I = self.I.truncate(0)
        g = self.geo.g.truncate(0)
        I2 = compose(I, I).value + np.eye(NDIM)
        gII = J.einsum("ka,kb->ab", J.einsum("kl,la->ka", g, I), I).value - g.value
        sd = self.omega.truncate(0) - self.geo.star(self.omega.truncate(0))
        return {"I2": tensor_max(I2), "compat": tensor_max(gII), "sd": tensor_max(sd)}

    # -- intrinsic torsion and canonical connection ------------------------
    @cached_property
    def nabla_I(self):
        gam = self.geo.christoffel
        dI = self.I.grad().permute(2, 0, 1)  # [i, k, j] = d_i I^k_j
        return dI + J.einsum("kil,lj->ikj", gam, self.I) - J.einsum("kl,lij->ikj", self.I, gam)

    @cached_property
    def eta(self):
        return J.einsum("ikl,lj->ikj", self.nabla_I, self.I) * 0.5

    @cached_property
    def torsion(self):
        """``T[k, i, j] = (T_{d_i} d_j)^k = (eta_i)^k_j - (eta_j)^k_i``."""
        e = self.eta.permute(1, 0, 2)  # [k, i, j]
        return e - e.permute(0, 2, 1)

    @cached_property
    def gamma_tilde(self):
        """Connection coefficients of ``D~ = D + eta``: ``[k, i, j]``."""
        return self.geo.christoffel + self.eta.permute(1, 0, 2)

    def nabla_tilde_endo(self, A):
        """``(D~_i A)^k_j`` for an endomorphism field ``A``."""
        gt = self.gamma_tilde
        dA = A.grad().permute(2, 0, 1)
        return dA + J.einsum("kil,lj->ikj", gt, A) - J.einsum("kl,lij->ikj", A, gt)

    def nabla_tilde_metric(self):
        g = self.geo.g
        dg = g.grad().permute(2, 0, 1)  # [i, a, b]
        gt = self.gamma_tilde
        return dg - J.einsum("kia,kb->iab", gt, g) - J.einsum("kib,ak->iab", gt, g)

    @cached_property
    def rtilde(self):
        """Canonical curvature from the connection coefficients (route A)."""
        return C.curvature_of_connection(self.gamma_tilde, self.geo.g)

    @cached_property
    def rtilde_split(self):
        """Canonical curvature term by term: ``R - d~eta + [eta, eta] - eta_T`` (route B)."""
        geo, eta, gt = self.geo, self.eta, self.gamma_tilde
        R_end = J.einsum("ijab,bk->ijka", geo.riemann, geo.ginv)
        deta = eta.grad()  # [i, k, j, m] = d_m (eta_i)^k_j
        D = (
            deta.permute(3, 0, 1, 2)
            + J.einsum("kml,ilj->mikj", gt, eta)
            - J.einsum("ikl,lmj->mikj", eta, gt)
            - J.einsum("lmi,lkj->mikj", gt, eta)
        )
        d_eta = D - D.permute(1, 0, 2, 3)
        eta_eta = J.einsum("mkl,ilj->mikj", eta, eta)
        bracket = eta_eta - eta_eta.permute(1, 0, 2, 3)
        eta_T = J.einsum("lmi,lkj->mikj", self.torsion, eta)
        Rt_end = R_end - d_eta + bracket - eta_T
        terms = {"d_eta": d_eta, "bracket": bracket, "eta_T": eta_T}
        return J.einsum("ijka,kb->ijab", Rt_end, geo.g), terms

    def eta_form(self, vec=None):
        """``eta_i`` as 2-forms ``[i, a, b]``, or ``eta_X`` for a vector field ``X``."""
        e = J.einsum("ika,kb->iab", self.eta, self.geo.g)
        if vec is None:
            return e
        return J.einsum("i,iab->ab", vec, e)

    @cached_property
    def nijenhuis(self):
        """``N^k_ij = I^l_i d_l I^k_j - I^l_j d_l I^k_i - I^k_l (d_i I^l_j - d_j I^l_i)``."""
        I = self.I
        dI = I.grad()  # [k, j, l] = d_l I^k_j
        t1 = J.einsum("li,kjl->kij", I, dI)
        curl = dI.permute(0, 2, 1) - dI  # [k, i, j] = d_i I^k_j - d_j I^k_i
        return t1 - t1.permute(0, 2, 1) - J.einsum("kl,lij->kij", I, curl)

    # -- Chern form, Lee form and friends -----------------------------------
    @cached_property
    def gamma1(self):
        return J.einsum("ijab,ab->ij", self.rtilde, C.raise_both(self.omega, self.geo.ginv)) * 0.5

    @cached_property
    def theta(self):
        return F.lee_form_arr(F.from_tensor(self.omega, 2))

    @cached_property
    def I_theta(self):
        return self.act1(self.theta)

    @cached_property
    def theta_norm2(self):
        return norm2_1(self.theta, self.geo.ginv)

    @cached_property
    def codiff_theta(self):
        """``d*theta = -g^ij (d_i theta_j - Gamma^k_ij theta_k)``."""
        th = self.theta
        cov = th.grad().swapaxes(-1, -2) - J.einsum("kij,k->ij", self.geo.christoffel, th)
        return -J.einsum("ij,ij->", self.geo.ginv, cov)

    @cached_property
    def ricci_inv(self):
        """``Ric' = (Ric + Ric(I., I.)) / 2``."""
        ric = self.geo.ricci
        return (ric + self.act2(ric)) * 0.5

    @cached_property
    def rho_I(self):
        """``rho^I(X, Y) = Ric'(I X, Y)``."""
        return J.einsum("ca,cb->ab", self.I, self.ricci_inv)

    def rho_of(self, K):
        """Ricci form ``Ric'(K X, Y)`` for another structure ``K`` (endomorphism)."""
        ric = self.geo.ricci
        ricK = (ric + act2(K, ric)) * 0.5
        return J.einsum("ca,cb->ab", K, ricK)

    @cached_property
    def wplus_omega(self):
        return self.geo.weyl_half(self.omega, +1)

    @cached_property
    def kappa(self):
        return self.pair(self.wplus_omega, self.omega) * 3.0

    @cached_property
    def d_theta(self):
        return d1(self.theta)

    @cached_property
    def psi(self):
        """``Psi = d+theta(I., .)``."""
        dplus = self.geo.project(self.d_theta, +1)
        return J.einsum("ca,cb->ab", self.I, dplus)

    def projection_11(self, F2):
        return (F2 + self.act2(F2)) * 0.5

    def projection_2(self, F2):
        return (F2 - self.act2(F2)) * 0.5


# ---------------------------------------------------------------------------
# gauges


SEEDS = (((0, 2), (3, 1)), ((0, 3), (1, 2)))


def _seed_tensor(k, n, order):
    (a, b), (c, d) = SEEDS[k]
    t = np.zeros((NDIM, NDIM))
    t[a, b], t[b, a] = 1.0, -1.0
    t[c, d], t[d, c] = 1.0, -1.0
    return J.Jet.constant(np.broadcast_to(t, (n, NDIM, NDIM)), order)


class LocalGauge:
    """Local gauge ``I1`` for a structure: from a seed 2-form or an explicit ``omega_I1``.

    ``seed`` is 0 (``e02 + e31``), 1 (``e03 + e12``) or ``"auto"`` (first seed, falling
    back to the second when its anti-invariant projection is shorter than ``min_norm``).
    """

    def __init__(self, structure, omega_I1=None, seed="auto", min_norm=1e-3):
        self.structure = structure
        self.omega_I1 = omega_I1
        self.seed = seed
        self.min_norm = min_norm

    def at(self, sample):
        return sample.cached((self, "gauge"), lambda: GaugeState(self, sample))


def local_gauge(structure, region=None, seed="auto"):
    """Gauge from the default seeds; ``region`` (a sample) validates it up front."""
    gauge = LocalGauge(structure, seed=seed)
    if region is not None:
        gauge.at(region).I1
    return gauge


class GaugeState:
    def __init__(self, gauge, sample):
        self.gauge = gauge
        self.sample = sample
        self.h = gauge.structure.at(sample)

    @cached_property
    def seed_used(self):
        return self._build()[1]

    @cached_property
    def I1(self):
        return self._build()[0]

    def _build(self):
        h = self.h
        if self.gauge.omega_I1 is not None:
            return h.endo(self.gauge.omega_I1.tensor_at(self.sample)), None
        seeds = (0, 1) if self.gauge.seed == "auto" else (int(self.gauge.seed),)
        n, order = len(self.sample), h.omega.order
        for k in seeds:
            proj = h.projection_2(_seed_tensor(k, n, order))
            sq = (h.pair(proj, proj) * 0.5).value.min()
            if sq >= self.gauge.min_norm**2:
                w1 = proj / J.sqrt(h.pair(proj, proj) * 0.5)[..., None, None]
                return h.endo(w1), k
        raise GaugeError(f"gauge seed(s) {seeds} degenerate over the region")

    @cached_property
    def I2(self):
        return compose(self.I1, self.h.I)

    @cached_property
    def omega_I1(self):
        return self.h.form(self.I1)

    @cached_property
    def omega_I2(self):
        return self.h.form(self.I2)

    @cached_property
    def a(self):
        return -J.einsum("ikl,lk->i", self.h.nabla_I, self.I2) * 0.25

    @cached_property
    def c(self):
        return -J.einsum("ikl,lk->i", self.h.nabla_I, self.I1) * 0.25

    @cached_property
    def nabla_tilde_I1(self):
        return self.h.nabla_tilde_endo(self.I1)

    @cached_property
    def b(self):
        return J.einsum("ikl,lk->i", self.nabla_tilde_I1, self.I2) * 0.25

    @cached_property
    def phi(self):
        return wedge11(self.a, self.c)

    def residuals(self):
        h, I1, I2 = self.h, self.I1, self.I2
        anti = compose(I1, h.I) + compose(h.I, I1)
        sq = compose(I1, I1) + np.eye(NDIM)
        gtot = h.nabla_I - (J.einsum("i,kj->ikj", self.a, I2) + J.einsum("i,kj->ikj", self.c, I1))
        bout = self.nabla_tilde_I1 + J.einsum("i,kj->ikj", self.b, I2)
        return {
            "anticommute": tensor_max(anti),
            "square": tensor_max(sq),
            "gtot": tensor_max(gtot),
            "bout": tensor_max(bout),
        }


# ---------------------------------------------------------------------------
# curvature of the canonical connection


class CanonicalCurvature:
    """Canonical-connection curvature data on one sample (both routes exposed)."""

    def __init__(self, state, gauge_state=None):
        self.h = state
        self.gs = gauge_state

    @property
    def rtilde(self):
        return self.h.rtilde

    @property
    def rtilde_split(self):
        return self.h.rtilde_split[0]

    @property
    def gamma1(self):
        return self.h.gamma1

    @property
    def phi(self):
        return self.gs.phi

    @property
    def psi(self):
        return self.h.psi

    @property
    def rhoI(self):
        return self.h.rho_I

    def rhoJ(self, J_endo):
        return self.h.rho_of(J_endo)


def intrinsic_torsion(s, p):
    return s.at(_sample(s, p)).eta


def canonical_curvature(s, gauge, p):
    sample = _sample(s, p)
    return CanonicalCurvature(s.at(sample), gauge.at(sample) if gauge is not None else None)


def chern_form(c):
    return c.gamma1


def conformal_scalar(s, p):
    return s.at(_sample(s, p)).kappa.value


def _sample(s, p):
    if isinstance(p, J.Sample):
        return p
    return J.Sample(np.atleast_2d(np.asarray(p, dtype=float)), J.DEFAULT_ORDER, s.g.domain)


# ---------------------------------------------------------------------------
# holonomy


class HolonomyEstimate:
    """Numerical rank of the canonical curvature images and, for rank one, its generator."""

    def __init__(self, rank, singular_values, generator=None, alpha=None, f0_norm=None, alpha_ratio=None):
        self.rank = rank
        self.singular_values = singular_values
        self.generator = generator
        self.alpha = alpha
        self.f0_norm = f0_norm
        self.alpha_ratio = alpha_ratio

    def __repr__(self):
        return f"HolonomyEstimate(rank={self.rank}, alpha={self.alpha})"


def holonomy_rank(s, gauge, points, threshold=1e-6):
    """Rank of the span of ``R~(F)`` over 2-forms ``F`` and sample points.

    Images at one point are expanded in that point's orthonormal 2-form basis; each
    point contributes the singular values of its 6x6 image matrix and the rank is the
    largest count above ``threshold`` times the overall largest singular value.
    For rank one the unit generator ``F`` (per point, up to sign) is split as
    ``F = F0 + alpha omega_I``; ``alpha_ratio = alpha |omega_I| / |F0|`` is the
    coefficient of ``omega_I`` once ``F0`` is scaled to the length of ``omega_I``.
    """
    sample = points if isinstance(points, J.Sample) else _sample(s, points)
    if 6 * len(sample) < 40:
        raise ValueError("holonomy_rank needs at least 40 (point, 2-form) arguments")
    h = s.at(sample)
    M = h.geo.operator_matrix(h.rtilde)  # [n, A, C] = <R~(e_A), e_C>
    _, sv, vt = np.linalg.svd(M)
    top = sv.max()
    if top == 0.0:
        return HolonomyEstimate(0, sv)
    ranks = (sv > threshold * top).sum(axis=1)
    rank = int(ranks.max())
    if rank != 1:
        return HolonomyEstimate(rank, sv)
    B = h.geo.twoform_basis
    Fvec = np.einsum("nc,ncab->nab", vt[:, 0, :], B)
    om = h.omega.value
    ginv0 = h.geo.ginv.value
    pair = lambda x, y: 0.5 * np.einsum("nab,nia,njb,nij->n", x, ginv0, ginv0, y)
    sign = np.where(pair(Fvec, om) < 0, -1.0, 1.0)
    Fvec = Fvec * sign[:, None, None]
    alpha = pair(Fvec, om) / pair(om, om)
    F0 = Fvec - alpha[:, None, None] * om
    f0 = np.sqrt(np.maximum(pair(F0, F0), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(f0 > 0, alpha * np.sqrt(pair(om, om)) / f0, np.inf)
    return HolonomyEstimate(1, sv, Fvec, alpha, f0, ratio)
