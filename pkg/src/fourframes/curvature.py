"""Levi-Civita connection and the curvature decomposition of a 4-metric.

Sign convention: the curvature endomorphism is ``R(X,Y) = -[D_X, D_Y] + D_[X,Y]``
and is stored covariantly as ``Rc[i, j, a, b] = g(R(d_i, d_j) d_a, d_b)``, i.e.
``R(d_i, d_j)`` viewed as the 2-form ``Rc[i, j]``. With this sign the unit
round sphere has ``Rc = g_ia g_jb - g_ib g_ja``, Ricci ``3g`` and ``s = 12``.

The curvature operator on 2-forms is ``R(F) = (1/2) F^ij R(d_i, d_j)``. Under the
pairing ``tensor_inner`` it is symmetric, and the unit sphere gives the identity.
Endomorphisms ``A`` and 2-forms ``alpha`` are identified by
``alpha(X, Y) = g(A X, Y)``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import forms as F
from . import jets as J
from .jets import NDIM


# ---------------------------------------------------------------------------
# endomorphism / 2-form helpers (array level)


def endo_of_form(omega_t, ginv):
    """``A^k_a = omega_ab g^bk`` for a 2-form tensor ``omega_t[..., a, b]``."""
    return J.einsum("ab,bk->ka", omega_t, ginv)


def form_of_endo(A, g):
    """``alpha_ab = A^k_a g_kb``."""
    return J.einsum("ka,kb->ab", A, g)


def raise_both(Ft, ginv):
    """``F^ab = g^ai F_ij g^jb``."""
    return J.einsum("ib,jb->ij", J.einsum("ia,ab->ib", ginv, Ft), ginv)


def apply_operator(Rc, Ft, ginv):
    """``R(F)_ab = (1/2) F^ij Rc_ijab`` for a 2-form tensor ``Ft``."""
    return J.einsum("ij,ijab->ab", raise_both(Ft, ginv), Rc) * 0.5


def tensor_pair(At, Bt, ginv):
    """``(1/2) A_ab B^ab`` on 2-form tensors."""
    return J.einsum("ij,ij->", At, raise_both(Bt, ginv)) * 0.5


def star_tensor(Ft, ginv, vol):
    return F.to_tensor(F.hodge_arr(F.from_tensor(Ft, 2), 2, ginv, vol), 2)


def curvature_of_connection(gamma, g):
    """Covariant curvature ``Rc[i,j,a,b]`` of the connection ``D_i d_j = gamma[k,i,j] d_k``."""
    dgam = gamma.grad()  # dgam[k, j, a, i] = d_i gamma^k_ja
    first = dgam.permute(0, 2, 3, 1)  # [k, a, i, j] = d_i gamma^k_ja
    quad = J.einsum("kil,lja->kaij", gamma, gamma)
    usual = first - first.swapaxes(-1, -2) + quad - quad.swapaxes(-1, -2)
    return -J.einsum("kaij,kb->ijab", usual, g)


def h_wedge_g(h, g):
    """``(h ^ g)(X, Y) = hX ^ Y + X ^ hY`` as a covariant 4-tensor."""
    hg = J.einsum("ia,jb->ijab", h, g)
    gh = J.einsum("ia,jb->ijab", g, h)
    t = hg + gh
    return t - t.swapaxes(-1, -2)


# ---------------------------------------------------------------------------


class Geometry:
    """Levi-Civita data of a metric on a sample; obtain through :func:`geometry`."""

    def __init__(self, metric, sample):
        self.metric = metric
        self.sample = sample

    @cached_property
    def g(self):
        return self.metric.at(self.sample)

    @cached_property
    def ginv(self):
        return self.metric.inverse_at(self.sample)

    @cached_property
    def vol(self):
        return self.metric.volume_at(self.sample)

    @cached_property
    def christoffel(self):
        """``gamma[k, i, j]`` = Γ^k_ij."""
        dg = self.g.grad()  # dg[a, b, c] = d_c g_ab
        # lower[l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        lower = (dg.permute(1, 2, 0) + dg.permute(1, 0, 2) - dg.permute(2, 0, 1)) * 0.5
        return J.einsum("kl,lij->kij", self.ginv, lower)

    @cached_property
    def riemann(self):
        """Covariant curvature ``Rc[i, j, a, b]``."""
        return curvature_of_connection(self.christoffel, self.g)

    @cached_property
    def ricci(self):
        return J.einsum("ia,ijab->jb", self.ginv.truncate(self.riemann.order), self.riemann)

    @cached_property
    def scalar(self):
        return J.einsum("jb,jb->", self.ginv.truncate(self.ricci.order), self.ricci)

    @cached_property
    def ricci0(self):
        return self.ricci - self.g * (self.scalar * 0.25)[..., None, None]

    @cached_property
    def reduced_ricci(self):
        """``h = (Ric0 + (s/12) g) / 2``."""
        return (self.ricci0 + self.g * (self.scalar / 12.0)[..., None, None]) * 0.5

    @cached_property
    def weyl(self):
        return self.riemann - h_wedge_g(self.reduced_ricci, self.g)

    def star(self, Ft):
        return star_tensor(Ft, self.ginv, self.vol)

    def project(self, Ft, sign):
        """Selfdual (``sign=+1``) or anti-selfdual part of a 2-form tensor.

        Extra tensor slots in front of the 2-form pair are allowed.
        """
        extra = Ft.ndim - 3
        idx = (slice(None),) + (None,) * extra
        st = star_tensor(Ft, self.ginv[idx], self.vol[idx])
        return (Ft + st * float(sign)) * 0.5

    def operator(self, Rc, Ft):
        return apply_operator(Rc, Ft, self.ginv)

    def pair(self, At, Bt):
        return tensor_pair(At, Bt, self.ginv)

    def weyl_half(self, Ft, sign):
        """``W^{+}(F)`` or ``W^{-}(F)``."""
        return self.operator(self.weyl, self.project(Ft, sign))

    def nabla1(self, alpha):
        """``(D_i alpha)_j`` for a 1-form tensor, as ``[i, j]``."""
        return alpha.grad().swapaxes(-1, -2) - J.einsum("kij,k->ij", self.christoffel, alpha)

    def nabla2(self, Ft):
        """``(D_i F)_ab`` for a covariant 2-tensor, as ``[i, a, b]``."""
        gam = self.christoffel
        return Ft.grad().permute(2, 0, 1) - J.einsum("kia,kb->iab", gam, Ft) - J.einsum("kib,ak->iab", gam, Ft)

    def metricity(self):
        """Max of ``|D g|`` from the Christoffels (identically zero for Levi-Civita)."""
        dg = self.g.grad()  # [a, b, i]
        gam = self.christoffel
        t = dg - J.einsum("kia,kb->abi", gam, self.g) - J.einsum("kib,ak->abi", gam, self.g)
        return np.abs(t.value).max(axis=(1, 2, 3))

    # -- orthonormal 2-form bases (values only) -----------------------------
    @cached_property
    def twoform_basis(self):
        """``(npoints, 6, 4, 4)`` orthonormal 2-forms: three selfdual then three anti-selfdual."""
        ginv0 = J.Jet(self.ginv.value[..., None])
        vol0 = J.Jet(self.vol.value[..., None])
        seeds = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))]
        out = []
        for sign in (1.0, -1.0):
            vecs = []
            for (a, b), (c, d) in seeds:
                t = np.zeros((NDIM, NDIM))
                t[a, b], t[b, a] = 1.0, -1.0
                t[c, d] += sign
                t[d, c] -= sign
                Ft = J.Jet.constant(np.broadcast_to(t, self.g.shape), 0)
                Ft = (Ft + star_tensor(Ft, ginv0, vol0) * sign) * 0.5
                for v in vecs:
                    Ft = Ft - v * tensor_pair(Ft, v, ginv0)[..., None, None]
                Ft = Ft / J.sqrt(tensor_pair(Ft, Ft, ginv0))[..., None, None]
                vecs.append(Ft)
            out.extend(vecs)
        return np.stack([v.value for v in out], axis=1)

    def operator_matrix(self, Rc):
        """6x6 matrix ``M[A, B] = <R(e_A), e_B>`` in :attr:`twoform_basis`."""
        B = self.twoform_basis
        ginv0 = self.ginv.value
        Rc0 = Rc.value
        Bu = np.einsum("nia,njb,nkab->nkij", ginv0, ginv0, B)
        img = 0.5 * np.einsum("nkij,nijab->nkab", Bu, Rc0)
        return 0.5 * np.einsum("nkab,nlab->nkl", img, Bu)


def geometry(metric, sample):
    return sample.cached((metric, "geometry"), lambda: Geometry(metric, sample))


# ---------------------------------------------------------------------------
# point-level API


def _sample(g, p, order=J.DEFAULT_ORDER):
    return J.Sample(np.atleast_2d(np.asarray(p, dtype=float)), order, g.domain)


def christoffels(g, p):
    """Christoffel symbols ``Γ^k_ij`` at points ``p`` as jets (two orders below the metric)."""
    return geometry(g, _sample(g, p)).christoffel


def riemann_operator(g, p):
    """Curvature operator on 2-forms as ``(npoints, 6, 6)`` matrices (SD block first)."""
    geo = geometry(g, _sample(g, p))
    return geo.operator_matrix(geo.riemann)


class CurvatureBundle:
    """Curvature decomposition of a metric, evaluated lazily at points."""

    def __init__(self, metric):
        self.metric = metric

    def at(self, p):
        return geometry(self.metric, _sample(self.metric, p))

    def riemann(self, p):
        return self.at(p).riemann.value

    def ricci(self, p):
        return self.at(p).ricci.value

    def scalar_s(self, p):
        return self.at(p).scalar.value

    def ricci0(self, p):
        return self.at(p).ricci0.value

    def h(self, p):
        return self.at(p).reduced_ricci.value


def weyl_split(bundle, p):
    """``(W+, W-)`` as ``(npoints, 3, 3)`` blocks in the orthonormal SD/ASD bases."""
    geo = bundle.at(p)
    M = geo.operator_matrix(geo.weyl)
    return M[:, :3, :3], M[:, 3:, 3:]
