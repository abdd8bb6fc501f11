"""Exterior algebra on a 4-dimensional chart.

A degree-``k`` form is stored by its ``C(4, k)`` independent components in the
coordinate basis, ordered lexicographically (for 2-forms: 01, 02, 03, 12, 13, 23),
with ``alpha = sum_{I increasing} alpha_I dx^I``. Wedge products use the
determinant convention, ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``.

Two pairings on 2-forms are used. :func:`form_inner` is normalised so that a
Kähler form ``e01 + e23`` of an orthonormal coframe has unit length; this is the
pairing of the frame conditions. :func:`tensor_inner` is twice that (every
``e^i ^ e^j`` is a unit vector) and is the pairing under which the curvature
operator of the unit sphere is the identity on 2-forms.

Everything ending in ``_arr`` works on jet arrays at a :class:`~fourframes.jets.Sample`
(leading axis = sample points); the other functions build lazy fields.
"""

from __future__ import annotations

import functools
import math
from itertools import combinations, permutations

import numpy as np

from . import jets as J
from .jets import NDIM, Field, Jet, ScalarJetField


class SingularMetricError(J.JetError):
    pass


class DegreeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# combinatorial tables


@functools.lru_cache(maxsize=None)
def basis(k):
    return tuple(combinations(range(NDIM), k))


def ncomp(k):
    return len(basis(k))


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
            elif seq[i] == seq[j]:
                return 0
    return sign


@functools.lru_cache(maxsize=None)
def levi_civita():
    eps = np.zeros((NDIM,) * NDIM)
    for p in permutations(range(NDIM)):
        eps[p] = _perm_sign(p)
    return eps


@functools.lru_cache(maxsize=None)
def expand_table(k):
    """``(C(4,k), 4, ..., 4)`` array mapping components to the full antisymmetric tensor."""
    E = np.zeros((ncomp(k),) + (NDIM,) * k)
    for c, idx in enumerate(basis(k)):
        for p in permutations(range(k)):
            E[(c,) + tuple(idx[i] for i in p)] = _perm_sign(p)
    return E


@functools.lru_cache(maxsize=None)
def wedge_table(ka, kb):
    """Gather indices and signed scatter matrix for the wedge of degrees ``ka`` and ``kb``."""
    kc = ka + kb
    if kc > NDIM:
        raise DegreeError(f"wedge of degrees {ka} and {kb} exceeds 4")
    ia, ib, rows = [], [], []
    pos = {I: n for n, I in enumerate(basis(kc))}
    for a, A in enumerate(basis(ka)):
        for b, B in enumerate(basis(kb)):
            s = _perm_sign(A + B)
            if s:
                ia.append(a)
                ib.append(b)
                rows.append((pos[tuple(sorted(A + B))], s))
    S = np.zeros((len(rows), ncomp(kc)))
    for p, (c, s) in enumerate(rows):
        S[p, c] = s
    return np.array(ia, dtype=np.intp), np.array(ib, dtype=np.intp), S


@functools.lru_cache(maxsize=None)
def d_table(k):
    """``D[a, i, c]`` with ``(d alpha)_c = sum D[a, i, c] d_i alpha_a``."""
    D = np.zeros((ncomp(k), NDIM, ncomp(k + 1)))
    pos = {I: n for n, I in enumerate(basis(k))}
    for c, I in enumerate(basis(k + 1)):
        for m, i in enumerate(I):
            rest = I[:m] + I[m + 1 :]
            D[pos[rest], i, c] = (-1) ** m
    return D


# ---------------------------------------------------------------------------
# array-level operations


def to_tensor(comp, k):
    """Components ``(..., C(4,k))`` to the full antisymmetric tensor ``(..., 4, ..., 4)``."""
    if k == 0:
        return comp[..., 0]
    letters = "ijkl"[:k]
    return J.einsum(f"a,a{letters}->{letters}", comp, expand_table(k))


def from_tensor(T, k):
    if k == 0:
        return J.stack([T], axis=-1)
    return J.stack([T[(Ellipsis,) + I] for I in basis(k)], axis=-1)


def wedge_arr(a, ka, b, kb):
    ia, ib, S = wedge_table(ka, kb)
    prod = a[..., ia] * b[..., ib]
    return J.einsum("p,pc->c", prod, S)


def d_arr(a, k):
    if k >= NDIM:
        raise DegreeError("no 5-forms on a 4-manifold")
    return J.einsum("ai,aic->c", a.grad(), d_table(k))


def _raise_one(T, ginv, k, m):
    letters = "abcd"[:k]
    out = letters[:m] + "z" + letters[m + 1 :]
    return J.einsum(f"z{letters[m]},{letters}->{out}", ginv, T)


def hodge_arr(a, k, ginv, vol):
    """Hodge star of a degree-``k`` component array; ``vol`` is the signed ``sqrt(det g)``."""
    if k == 0:
        return J.stack([a[..., 0] * vol], axis=-1)
    T = to_tensor(a, k)
    for m in range(k):
        T = _raise_one(T, ginv, k, m)
    src = "abcd"[:k]
    rest = "efgh"[: NDIM - k]
    full = J.einsum(f"{src},{src}{rest}->{rest}", T, levi_civita()) * (1.0 / math.factorial(k))
    out = from_tensor(full, NDIM - k)
    return out * vol[..., None]


def inner_arr(a, b, k, ginv):
    """Standard pairing ``(1/k!) a_I b^I`` (coordinate ``dx^I`` unit for Euclidean g)."""
    if k == 0:
        return a[..., 0] * b[..., 0]
    T = to_tensor(b, k)
    for m in range(k):
        T = _raise_one(T, ginv, k, m)
    letters = "abcd"[:k]
    return J.einsum(f"{letters},{letters}->", to_tensor(a, k), T) * (1.0 / math.factorial(k))


# ---------------------------------------------------------------------------
# field types


class DifferentialForm(Field):
    """Degree-``k`` form; ``at(sample)`` gives jets of shape ``(npoints, C(4,k))``."""

    def __init__(self, degree, fn, domain=None, name=None, of_sample=False):
        if degree not in range(NDIM + 1):
            raise DegreeError(f"degree {degree} outside 0..4")
        super().__init__(fn, (ncomp(degree),), domain, name, of_sample)
        self.degree = degree

    @classmethod
    def from_components(cls, degree, comps, domain=None, name=None):
        """Build from a mapping ``{(i, j): field or callable or number}`` or a full sequence."""
        if not isinstance(comps, dict):
            comps = dict(zip(basis(degree), comps))
        slots = {tuple(sorted(k)): (v, _perm_sign(k)) for k, v in comps.items()}

        def fn(x):
            order = x[0].order
            parts = []
            for I in basis(degree):
                if I not in slots:
                    parts.append(0.0)
                    continue
                v, s = slots[I]
                if isinstance(v, Field):
                    raise TypeError("use of_sample construction for field-valued components")
                val = v(x) if callable(v) else v
                parts.append(val * s if isinstance(val, Jet) else float(val) * s)
            if not any(isinstance(p, Jet) for p in parts):
                return J.Jet.constant(np.asarray(parts, dtype=float), order, (len(x[0]), len(parts)))
            n = len(x[0])
            parts = [p if isinstance(p, Jet) else J.Jet.constant(np.full(n, p), order) for p in parts]
            return J.stack(parts, axis=-1)

        return cls(degree, fn, domain, name)

    @classmethod
    def coordinate(cls, *indices, domain=None):
        """``dx^{i1} ^ ... ^ dx^{ik}`` with the sign of the given index order."""
        return cls.from_components(len(indices), {tuple(indices): 1.0}, domain, "d" + "".join(f"x{i}" for i in indices))

    @property
    def components(self):
        """The ``C(4,k)`` components as scalar fields."""
        return tuple(ScalarJetField.wrap(self[i]) for i in range(ncomp(self.degree)))

    def tensor_at(self, sample):
        return to_tensor(self.at(sample), self.degree)

    def __add__(self, other):
        _same_degree(self, other)
        return DifferentialForm(self.degree, lambda s: self.at(s) + other.at(s), self.domain, of_sample=True)

    def __sub__(self, other):
        _same_degree(self, other)
        return DifferentialForm(self.degree, lambda s: self.at(s) - other.at(s), self.domain, of_sample=True)

    def __neg__(self):
        return DifferentialForm(self.degree, lambda s: -self.at(s), self.domain, of_sample=True)

    def __mul__(self, f):
        """Multiply by a number or a scalar field."""
        if isinstance(f, Field):
            return DifferentialForm(self.degree, lambda s: self.at(s) * f.at(s)[:, None], self.domain, of_sample=True)
        return DifferentialForm(self.degree, lambda s: self.at(s) * float(f), self.domain, of_sample=True)

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)


def _same_degree(a, b):
    if a.degree != b.degree:
        raise DegreeError(f"degrees {a.degree} and {b.degree} differ")


def form_from_array(degree, fn, domain=None, name=None):
    """Form whose evaluator maps a sample to its component jets."""
    return DifferentialForm(degree, fn, domain, name, of_sample=True)


class MetricField(Field):
    """Symmetric positive-definite metric; ``orientation`` is +1 for ``dx0^dx1^dx2^dx3``."""

    def __init__(self, fn, domain=None, name=None, orientation=1, of_sample=False):
        super().__init__(fn, (NDIM, NDIM), domain, name, of_sample)
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.orientation = orientation

    @classmethod
    def from_entries(cls, entries, domain=None, name=None, orientation=1):
        """From a 4x4 nested sequence of callables/numbers; the upper triangle is used."""

        def fn(x):
            rows = []
            for i in range(NDIM):
                row = []
                for j in range(NDIM):
                    v = entries[min(i, j)][max(i, j)]
                    row.append(v(x) if callable(v) else v)
                rows.append(row)
            n = len(x[0])
            rows = [[v if isinstance(v, Jet) else J.Jet.constant(np.full(n, float(v)), x[0].order) for v in r] for r in rows]
            return J.stack([J.stack(r, axis=-1) for r in rows], axis=-2)

        return cls(fn, domain, name, orientation)

    @classmethod
    def euclidean(cls, domain=None):
        return cls(lambda x: np.eye(NDIM), domain, "euclidean")

    def with_orientation(self, orientation):
        m = MetricField(self.fn, self.domain, self.name, orientation, self.of_sample)
        return m

    @property
    def entries(self):
        return tuple(tuple(ScalarJetField.wrap(self[i, j]) for j in range(NDIM)) for i in range(NDIM))

    def _evaluate(self, sample):
        g = super()._evaluate(sample)
        return (g + g.T) * 0.5

    def inverse_at(self, sample):
        def compute():
            g = self.at(sample)
            g0 = g.value
            # Cholesky doubles as the positive-definiteness check
            try:
                np.linalg.cholesky(g0)
            except np.linalg.LinAlgError:
                bad = np.where([not _is_pd(m) for m in g0])[0]
                raise SingularMetricError(
                    f"metric not positive definite at {sample.points[bad[0]].tolist()}"
                ) from None
            return J.inv(g)

        return sample.cached((self, "inv"), compute)

    def volume_at(self, sample):
        """Signed volume density ``orientation * sqrt(det g)``."""
        return sample.cached((self, "vol"), lambda: J.sqrt(J.det(self.at(sample))) * float(self.orientation))


def _is_pd(m):
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


# ---------------------------------------------------------------------------
# field-level operations


def wedge(a, b):
    if a.degree + b.degree > NDIM:
        raise DegreeError(f"wedge of degrees {a.degree} and {b.degree} exceeds 4")
    return form_from_array(a.degree + b.degree, lambda s: wedge_arr(a.at(s), a.degree, b.at(s), b.degree), a.domain)


def exterior_derivative(a):
    if a.degree >= NDIM:
        raise DegreeError("no 5-forms on a 4-manifold")
    return form_from_array(a.degree + 1, lambda s: d_arr(a.at(s), a.degree), a.domain, f"d({a.name})")


def hodge_star(g, a):
    return form_from_array(
        NDIM - a.degree, lambda s: hodge_arr(a.at(s), a.degree, g.inverse_at(s), g.volume_at(s)), a.domain
    )


def sd_asd_project(g, a):
    """Split a 2-form into its selfdual and anti-selfdual parts."""
    if a.degree != 2:
        raise DegreeError("selfdual splitting is defined on 2-forms")
    star = hodge_star(g, a)
    plus = form_from_array(2, lambda s: (a.at(s) + star.at(s)) * 0.5, a.domain)
    minus = form_from_array(2, lambda s: (a.at(s) - star.at(s)) * 0.5, a.domain)
    return plus, minus


def codifferential(g, a):
    """``delta = - * d *`` (valid in all degrees in dimension four)."""
    if a.degree < 1:
        raise DegreeError("codifferential of a function vanishes")
    return -hodge_star(g, exterior_derivative(hodge_star(g, a)))


def _points_sample(fields, p):
    p = np.atleast_2d(np.asarray(p, dtype=float))
    dom = next((f.domain for f in fields if f.domain is not None), None)
    return J.Sample(p, J.DEFAULT_ORDER, dom)


def form_inner(g, a, b, p):
    """Pointwise inner product of 2-forms with the unit-Kähler-form normalisation."""
    s = _points_sample([a, b, g], p)
    val = 0.5 * inner_arr(a.at(s), b.at(s), 2, g.inverse_at(s)).value
    return val[0] if val.shape == (1,) else val


def tensor_inner_arr(a, b, ginv):
    """2-form pairing ``(1/2) a_ij b^ij`` (twice :func:`form_inner`)."""
    return inner_arr(a, b, 2, ginv)


def q_pairing(a, b, p):
    """Coefficient of ``a ^ b`` against ``dx0^dx1^dx2^dx3``."""
    s = _points_sample([a, b], p)
    val = wedge_arr(a.at(s), 2, b.at(s), 2)[..., 0].value
    return val[0] if val.shape == (1,) else val


def q_matrix():
    """6x6 Gram matrix of ``q`` on the coordinate 2-form basis."""
    Q = np.zeros((6, 6))
    for i, A in enumerate(basis(2)):
        for j, B in enumerate(basis(2)):
            Q[i, j] = _perm_sign(A + B)
    return Q


def wedge_operator_arr(omega):
    """Matrix ``L[c, i]`` of ``theta -> theta ^ omega`` from 1-forms to 3-forms."""
    ia, ib, S = wedge_table(1, 2)
    rows = []
    for i in range(NDIM):
        sel = ia == i
        rows.append(J.einsum("p,pc->c", omega[..., ib[sel]], S[sel]))
    return J.stack(rows, axis=-1)


def lee_form_arr(omega):
    L = wedge_operator_arr(omega)
    if np.any(np.abs(np.linalg.det(L.value)) < 1e-14):
        raise SingularMetricError("2-form is degenerate; wedge with it is not invertible on 1-forms")
    return J.einsum("ic,c->i", J.inv(L), d_arr(omega, 2))


def lee_form(g, omega_I):
    """The 1-form ``theta`` with ``d omega_I = theta ^ omega_I``."""
    return form_from_array(1, lambda s: lee_form_arr(omega_I.at(s)), omega_I.domain, "lee")


class FiveFrame:
    """Five 2-forms ordered with three anti-selfdual forms first."""

    def __init__(self, omega):
        if len(omega) != 5 or any(w.degree != 2 for w in omega):
            raise ValueError("a 5-frame is five 2-forms")
        self.omega = tuple(omega)

    SIGNS = (-1.0, -1.0, -1.0, 1.0, 1.0)

    def gram_arr(self, g, sample):
        ginv = g.inverse_at(sample)
        w = [f.at(sample) for f in self.omega]
        G = np.empty((len(sample), 5, 5))
        for i in range(5):
            for j in range(i, 5):
                G[:, i, j] = G[:, j, i] = 0.5 * inner_arr(w[i], w[j], 2, ginv).value
        return G

    def wedge_arr(self, sample):
        """``q(w_i, w_j)`` relative to ``w5 ^ w5``: should equal ``eps_i delta_ij``."""
        w = [f.at(sample) for f in self.omega]
        Q = np.empty((len(sample), 5, 5))
        for i in range(5):
            for j in range(i, 5):
                Q[:, i, j] = Q[:, j, i] = wedge_arr(w[i], 2, w[j], 2)[..., 0].value
        return Q / Q[:, 4:5, 4:5]

    def residuals(self, g, sample):
        """Per-point maxima of the Gram, wedge and closedness defects."""
        gram = np.abs(self.gram_arr(g, sample) - np.eye(5)).max(axis=(1, 2))
        wed = np.abs(self.wedge_arr(sample) - np.diag(self.SIGNS)).max(axis=(1, 2))
        closed = np.max([np.abs(d_arr(f.at(sample), 2).coeffs[..., 0]).max(axis=-1) for f in self.omega], axis=0)
        return {"gram": gram, "wedge": wed, "closed": closed}
