"""Truncated multivariate Taylor jets in four variables.

A :class:`Jet` stores Taylor coefficients ``c[alpha] = d^alpha f / alpha!`` for all
multi-indices ``|alpha| <= order`` on its last axis; every leading axis is a
plain array axis (sample points, tensor slots). Coefficients are laid out in
graded lexicographic order, so the order-``k`` prefix of any coefficient block
is itself a valid order-``k`` jet and truncation is a slice. Modules exchange
raw coefficient blocks in this layout.

Arithmetic is exact on truncated coefficients: a product of order-``k`` jets
reproduces the order-``k`` Taylor polynomial of the product of the underlying
functions. Differentiating drops the order by one.

The truncated product runs in a compiled kernel (``_jetcore``) when it is
importable; otherwise the numpy kernels in ``_kernels`` are used. Setting
``FOURFRAMES_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import functools
import math
import os
from itertools import product

import numpy as np

NDIM = 4
DEFAULT_ORDER = 3

if os.environ.get("FOURFRAMES_PURE_PYTHON"):
    from . import _kernels as _backend
else:
    try:
        from . import _jetcore as _backend
    except ImportError:  # extension not built
        from . import _kernels as _backend

BACKEND = "compiled" if _backend.__name__.endswith("_jetcore") else "numpy"


class JetError(ValueError):
    pass


class OrderExhaustedError(JetError):
    """More derivatives were requested than the jet order carries."""


class JetDomainError(JetError):
    """An analytic function was applied outside its domain at order zero."""


class NonFiniteJetError(JetError):
    """A field produced NaN or infinite coefficients."""


class PointOutsideDomainError(JetError):
    pass


def set_backend(name):
    """Switch the product kernel (``"compiled"`` or ``"numpy"``); returns the previous name."""
    global _backend, BACKEND
    previous = BACKEND
    if name == "compiled":
        from . import _jetcore as mod
    elif name == "numpy":
        from . import _kernels as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    _backend, BACKEND = mod, name
    return previous


# ---------------------------------------------------------------------------
# multi-index tables


@functools.lru_cache(maxsize=None)
def multi_indices(order):
    """All multi-indices of degree <= order, graded, lexicographically descending within a degree."""
    out = []
    for deg in range(order + 1):
        same = [a for a in product(range(deg + 1), repeat=NDIM) if sum(a) == deg]
        out.extend(sorted(same, reverse=True))
    return tuple(out)


def ncoef(order):
    return math.comb(order + NDIM, NDIM)


_ORDER_OF = {ncoef(k): k for k in range(12)}


@functools.lru_cache(maxsize=None)
def index_of(order):
    return {a: i for i, a in enumerate(multi_indices(order))}


@functools.lru_cache(maxsize=None)
def pair_table(order):
    """Index pairs ``(i, j) -> k`` with ``alpha_i + alpha_j = alpha_k``, sorted by ``k``."""
    idx = index_of(order)
    mis = multi_indices(order)
    rows = []
    for i, a in enumerate(mis):
        for j, b in enumerate(mis):
            s = tuple(x + y for x, y in zip(a, b))
            if sum(s) <= order:
                rows.append((idx[s], i, j))
    rows.sort()
    pk = np.array([r[0] for r in rows], dtype=np.intp)
    pi = np.array([r[1] for r in rows], dtype=np.intp)
    pj = np.array([r[2] for r in rows], dtype=np.intp)
    starts = np.searchsorted(pk, np.arange(ncoef(order))).astype(np.intp)
    return pi, pj, pk, starts


@functools.lru_cache(maxsize=None)
def partial_table(order, axis):
    """Source indices and factors turning an order-``order`` jet into its ``axis`` derivative."""
    if order < 1:
        raise OrderExhaustedError("cannot differentiate an order-0 jet")
    idx = index_of(order)
    src, fac = [], []
    for a in multi_indices(order - 1):
        up = list(a)
        up[axis] += 1
        src.append(idx[tuple(up)])
        fac.append(a[axis] + 1.0)
    return np.array(src, dtype=np.intp), np.array(fac)


# ---------------------------------------------------------------------------
# the jet array


class Jet:
    """Array of truncated Taylor jets; ``coeffs`` has shape ``(*shape, ncoef(order))``."""

    __slots__ = ("coeffs", "base")
    __array_priority__ = 1000

    def __init__(self, coeffs, base=None):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 0 or c.shape[-1] not in _ORDER_OF:
            raise ValueError(f"last axis of length {c.shape[-1:]} is not a jet coefficient count")
        self.coeffs = c
        self.base = base

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order=DEFAULT_ORDER, shape=None):
        value = np.asarray(value, dtype=float)
        if shape is not None:
            value = np.broadcast_to(value, shape)
        c = np.zeros(value.shape + (ncoef(order),))
        c[..., 0] = value
        return cls(c)

    @classmethod
    def variable(cls, values, axis, order=DEFAULT_ORDER):
        """Coordinate jet ``x^axis`` expanded about ``values``."""
        values = np.asarray(values, dtype=float)
        c = np.zeros(values.shape + (ncoef(order),))
        c[..., 0] = values
        if order >= 1:
            c[..., 1 + axis] = 1.0
        return cls(c)

    # -- basic properties -------------------------------------------------
    @property
    def order(self):
        return _ORDER_OF[self.coeffs.shape[-1]]

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        return self.coeffs[..., 0]

    def __len__(self):
        return self.shape[0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order})"

    def derivative(self, alpha):
        """Partial derivative ``d^alpha`` at the expansion point (not a Taylor coefficient)."""
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) > self.order:
            raise OrderExhaustedError(f"derivative of degree {sum(alpha)} from an order-{self.order} jet")
        k = index_of(self.order)[alpha]
        return self.coeffs[..., k] * math.prod(math.factorial(a) for a in alpha)

    def coefficient(self, alpha):
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise OrderExhaustedError(f"coefficient of degree {sum(alpha)} from an order-{self.order} jet")
        return self.coeffs[..., index_of(self.order)[alpha]]

    def truncate(self, order):
        if order > self.order:
            raise OrderExhaustedError(f"cannot raise order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.coeffs[..., : ncoef(order)])

    def partial(self, axis):
        src, fac = partial_table(self.order, axis)
        return Jet(self.coeffs[..., src] * fac)

    def grad(self):
        """Coordinate gradient; the new trailing axis indexes the derivative direction."""
        return stack([self.partial(i) for i in range(NDIM)], axis=-1)

    def check_finite(self, what="jet"):
        if not np.all(np.isfinite(self.coeffs)):
            raise NonFiniteJetError(f"non-finite Taylor coefficients in {what}")
        return self

    # -- array manipulation -------------------------------------------------
    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            pos = next(n for n, i in enumerate(idx) if i is Ellipsis)
            used = sum(1 for i in idx if i is not None and i is not Ellipsis)
            idx = idx[:pos] + (slice(None),) * (self.ndim - used) + idx[pos + 1 :]
        return Jet(self.coeffs[idx + (slice(None),)])

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.coeffs.reshape(tuple(shape) + (self.coeffs.shape[-1],)))

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        axes = tuple(a % self.ndim for a in axes)
        return Jet(self.coeffs.transpose(axes + (self.ndim,)))

    def permute(self, *axes):
        """Reorder the trailing ``len(axes)`` tensor slots; leading axes stay put."""
        k = len(axes)
        lead = tuple(range(self.ndim - k))
        return Jet(self.coeffs.transpose(lead + tuple(self.ndim - k + a for a in axes) + (self.ndim,)))

    def swapaxes(self, a, b):
        return Jet(np.swapaxes(self.coeffs, a % self.ndim, b % self.ndim))

    @property
    def T(self):
        return self.swapaxes(-1, -2)

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(self.ndim))
        if isinstance(axis, int):
            axis = (axis,)
        return Jet(self.coeffs.sum(axis=tuple(a % self.ndim for a in axis)))

    def broadcast_to(self, shape):
        return Jet(np.broadcast_to(self.coeffs, tuple(shape) + self.coeffs.shape[-1:]))

    def copy(self):
        return Jet(self.coeffs.copy())

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self):
        return Jet(-self.coeffs)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(self.coeffs.shape[-1], other.coeffs.shape[-1])
            return Jet(self.coeffs[..., :n] + other.coeffs[..., :n])
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.array(np.broadcast_to(self.coeffs, shape + self.coeffs.shape[-1:]))
        c[..., 0] += other
        return Jet(c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return _mul(self, other)
        return Jet(self.coeffs * np.asarray(other, dtype=float)[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return _mul(self, other.reciprocal())
        return Jet(self.coeffs / np.asarray(other, dtype=float)[..., None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        e = float(exponent)
        if e == int(e) and 0 <= e <= 8:
            n = int(e)
            if n == 0:
                return Jet.constant(np.ones(self.shape), self.order)
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        if e == int(e) and e < 0:
            return (self ** (-e)).reciprocal()
        return power(self, e)

    def reciprocal(self):
        a0 = self.value
        if np.any(a0 == 0):
            raise JetDomainError("division by a jet with zero constant term")
        inv = 1.0 / a0
        return self._compose([(-1.0) ** m * inv ** (m + 1) for m in range(self.order + 1)])

    def _compose(self, taylor):
        """Apply a univariate function given its Taylor coefficients at the constant term."""
        h = self.coeffs.copy()
        h[..., 0] = 0.0
        h = Jet(h)
        out = Jet.constant(taylor[self.order], self.order)
        for m in range(self.order - 1, -1, -1):
            out = out * h + taylor[m]
        return out


def _flat_pair(a, b, order):
    n = ncoef(order)
    shape = np.broadcast_shapes(a.shape, b.shape)
    A = np.ascontiguousarray(np.broadcast_to(a.coeffs[..., :n], shape + (n,))).reshape(-1, n)
    B = np.ascontiguousarray(np.broadcast_to(b.coeffs[..., :n], shape + (n,))).reshape(-1, n)
    return A, B, shape


def _mul(a, b):
    order = min(a.order, b.order)
    A, B, shape = _flat_pair(a, b, order)
    pi, pj, pk, starts = pair_table(order)
    out = _backend.mul(A, B, pi, pj, pk, starts, ncoef(order))
    return Jet(np.asarray(out).reshape(shape + (ncoef(order),)))


# ---------------------------------------------------------------------------
# analytic functions (accept jets or plain numbers)


def _series(x, name, taylor_fn, domain_ok=None):
    if not isinstance(x, Jet):
        return getattr(np, name)(x)
    a0 = x.value
    if domain_ok is not None and not np.all(domain_ok(a0)):
        raise JetDomainError(f"{name} applied outside its domain")
    return x._compose(taylor_fn(a0, x.order))


def exp(x):
    return _series(x, "exp", lambda a, k: [np.exp(a) / math.factorial(m) for m in range(k + 1)])


def log(x):
    def coeffs(a, k):
        return [np.log(a)] + [(-1.0) ** (m + 1) / (m * a**m) for m in range(1, k + 1)]

    return _series(x, "log", coeffs, lambda a: a > 0)


def power(x, e):
    """``x**e`` for a real exponent; non-integer exponents need a positive base."""
    if not isinstance(x, Jet):
        return np.power(x, e)

    def coeffs(a, k):
        out = []
        for m in range(k + 1):
            binom = math.prod(e - j for j in range(m)) / math.factorial(m)
            out.append(binom * a ** (e - m))
        return out

    ok = None if float(e) == int(e) else (lambda a: a > 0)
    return _series(x, "power", coeffs, ok)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return power(x, 0.5)


def sin(x):
    def coeffs(a, k):
        cyc = [np.sin(a), np.cos(a), -np.sin(a), -np.cos(a)]
        return [cyc[m % 4] / math.factorial(m) for m in range(k + 1)]

    return _series(x, "sin", coeffs)


def cos(x):
    def coeffs(a, k):
        cyc = [np.cos(a), -np.sin(a), -np.cos(a), np.sin(a)]
        return [cyc[m % 4] / math.factorial(m) for m in range(k + 1)]

    return _series(x, "cos", coeffs)


def arctan(x):
    def coeffs(a, k):
        # derivatives of atan via d/da (1 + a^2)^-1 expanded symbolically up to order 3
        u = 1.0 / (1.0 + a * a)
        d = [np.arctan(a), u, -2 * a * u**2, (6 * a * a - 2) * u**3]
        d4 = 24 * a * (1 - a * a) * u**4
        d.append(d4)
        if k > 4:
            raise OrderExhaustedError("arctan jets are implemented up to order 4")
        return [d[m] / math.factorial(m) for m in range(k + 1)]

    return _series(x, "arctan", coeffs)


# ---------------------------------------------------------------------------
# tensor operations on jet arrays


def stack(jets, axis=0):
    """Stack jets (or plain numbers) along a new leading-shape axis."""
    orders = [j.order for j in jets if isinstance(j, Jet)]
    if not orders:
        raise ValueError("stack needs at least one Jet")
    order = min(orders)
    shapes = [j.shape if isinstance(j, Jet) else np.shape(j) for j in jets]
    shape = np.broadcast_shapes(*shapes)
    blocks = []
    for j in jets:
        if not isinstance(j, Jet):
            j = Jet.constant(j, order)
        blocks.append(np.broadcast_to(j.coeffs[..., : ncoef(order)], shape + (ncoef(order),)))
    ndim = len(shape) + 1
    ax = axis if axis >= 0 else axis + ndim
    return Jet(np.stack(blocks, axis=ax))


def as_jet(x, order, shape=()):
    if isinstance(x, Jet):
        return x
    return Jet.constant(np.broadcast_to(np.asarray(x, dtype=float), shape), order)


def einsum(spec, a, b=None):
    """Contract jet arrays like :func:`numpy.einsum` over trailing axes.

    Letters describe the trailing axes of each operand; any further leading axes
    broadcast like numpy's ``...``. One operand may be a plain array.
    """
    ins, out = spec.replace(" ", "").split("->")
    if b is None:
        c = np.einsum(f"...{ins}z->...{out}z", a.coeffs)
        return Jet(c)
    sa, sb = ins.split(",")
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        if isinstance(a, Jet):
            return Jet(np.einsum(f"...{sa}z,...{sb}->...{out}z", a.coeffs, np.asarray(b, dtype=float)))
        return Jet(np.einsum(f"...{sa},...{sb}z->...{out}z", np.asarray(a, dtype=float), b.coeffs))
    if len(set(sa)) != len(sa) or len(set(sb)) != len(sb):
        raise ValueError("repeated letters inside one jet operand are not supported")
    order = min(a.order, b.order)
    n = ncoef(order)
    A = a.coeffs[..., :n]
    B = b.coeffs[..., :n]
    la, lb = a.ndim - len(sa), b.ndim - len(sb)
    lead = np.broadcast_shapes(a.shape[:la], b.shape[:lb])
    size = {}
    for s, arr, l in ((sa, A, la), (sb, B, lb)):
        for c, d in zip(s, arr.shape[l:-1]):
            if size.setdefault(c, d) != d:
                raise ValueError(f"size mismatch for index {c!r}")
    # indices private to one operand and absent from the output are summed first
    drop_a = [c for c in sa if c not in sb and c not in out]
    if drop_a:
        A = A.sum(axis=tuple(la + sa.index(c) for c in drop_a))
        sa = "".join(c for c in sa if c not in drop_a)
    drop_b = [c for c in sb if c not in sa and c not in out]
    if drop_b:
        B = B.sum(axis=tuple(lb + sb.index(c) for c in drop_b))
        sb = "".join(c for c in sb if c not in drop_b)
    batch = [c for c in out if c in sa and c in sb]
    contr = [c for c in sa if c in sb and c not in out]
    left = [c for c in sa if c not in sb]
    right = [c for c in sb if c not in sa]
    nl = len(lead)

    def arrange(arr, s, l, middle, last):
        perm = list(range(l)) + [l + s.index(c) for c in batch + middle + last] + [arr.ndim - 1]
        arr = arr.transpose(perm)
        target = lead + tuple(size[c] for c in batch + middle + last) + (n,)
        pad = (1,) * (nl - l)
        arr = arr.reshape(pad + arr.shape)
        arr = np.broadcast_to(arr, target)
        nb = int(np.prod(lead + tuple(size[c] for c in batch), dtype=int))
        m1 = int(np.prod([size[c] for c in middle], dtype=int))
        m2 = int(np.prod([size[c] for c in last], dtype=int))
        return np.ascontiguousarray(arr).reshape(nb, m1, m2, n)

    A2 = arrange(A, sa, la, left, contr)
    B2 = arrange(B, sb, lb, contr, right)
    pi, pj, pk, starts = pair_table(order)
    res = np.asarray(_backend.bmm(A2, B2, pi, pj, pk, starts, n))
    res = res.reshape(lead + tuple(size[c] for c in batch + left + right) + (n,))
    cur = batch + left + right
    perm = list(range(nl)) + [nl + cur.index(c) for c in out] + [res.ndim - 1]
    return Jet(res.transpose(perm))


def matmul(a, b):
    return einsum("ij,jk->ik", a, b)


def inv(m):
    """Inverse of a jet matrix (trailing two axes) via the truncated Neumann series."""
    m0inv = np.linalg.inv(m.value)
    if m.order == 0:
        return Jet(m0inv[..., None])
    h = m - m.value
    x = -einsum("ij,jk->ik", m0inv, h)
    term = Jet.constant(m0inv, m.order)
    total = term
    for _ in range(m.order):
        term = einsum("ij,jk->ik", x, term)
        total = total + term
    return total


def det(m):
    """Determinant of a jet matrix via ``det(m0) * exp(tr log(1 + m0^-1 h))``."""
    m0 = m.value
    d0 = np.linalg.det(m0)
    if m.order == 0:
        return Jet(d0[..., None])
    x = einsum("ij,jk->ik", np.linalg.inv(m0), m - m0)
    tr_log = Jet.constant(np.zeros(m.shape[:-2]), m.order)
    power_ = x
    for k in range(1, m.order + 1):
        tr_log = tr_log + einsum("ii->", power_) * ((-1.0) ** (k + 1) / k)
        if k < m.order:
            power_ = einsum("ij,jk->ik", power_, x)
    return exp(tr_log) * d0


# ---------------------------------------------------------------------------
# fields on a chart


class Box:
    """Axis-aligned coordinate box ``lo <= x <= hi``."""

    def __init__(self, lo, hi, labels=("x0", "x1", "x2", "x3")):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != (NDIM,) or self.hi.shape != (NDIM,) or np.any(self.hi <= self.lo):
            raise ValueError("box needs four increasing intervals")
        self.labels = tuple(labels)

    def inset(self, frac=0.05):
        pad = frac * (self.hi - self.lo)
        return Box(self.lo + pad, self.hi - pad, self.labels)

    def contains(self, points):
        p = np.atleast_2d(points)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)

    def scale(self, unit):
        """Map points of the unit cube into the box."""
        return self.lo + np.asarray(unit) * (self.hi - self.lo)

    def as_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(), "labels": list(self.labels)}

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Sample:
    """A batch of chart points with their coordinate jets and a per-batch result cache.

    The cache only memoizes pure field evaluations, so it never changes results.
    """

    def __init__(self, points, order=DEFAULT_ORDER, domain=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != NDIM:
            raise ValueError("points must have four coordinates")
        if domain is not None:
            bad = ~domain.contains(pts)
            if np.any(bad):
                raise PointOutsideDomainError(f"point {pts[bad][0].tolist()} lies outside {domain}")
        self.points = pts
        self.order = order
        self.x = tuple(Jet.variable(pts[:, i], i, order) for i in range(NDIM))
        self._cache = {}

    def __len__(self):
        return len(self.points)

    def cached(self, key, compute):
        try:
            return self._cache[key]
        except KeyError:
            val = self._cache[key] = compute()
            return val

    def subset(self, idx):
        return Sample(self.points[idx], self.order)


class Field:
    """Tensor-valued field on a chart.

    ``fn`` receives the four coordinate jets of a :class:`Sample` and returns a jet
    (or a constant) of shape ``(npoints, *shape)``. With ``of_sample=True`` it
    receives the sample itself, which lets derived fields reuse cached inputs.
    """

    def __init__(self, fn, shape=(), domain=None, name=None, of_sample=False):
        self.fn = fn
        self.shape = tuple(shape)
        self.domain = domain
        self.name = name
        self.of_sample = of_sample

    def at(self, sample):
        return sample.cached(self, lambda: self._evaluate(sample))

    def _evaluate(self, sample):
        res = self.fn(sample if self.of_sample else sample.x)
        target = (len(sample),) + self.shape
        if not isinstance(res, Jet):
            return Jet.constant(np.broadcast_to(np.asarray(res, dtype=float), target), sample.order)
        if res.shape != target:
            res = res.broadcast_to(target)
        return res.check_finite(self.name or "field")

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        sub = np.empty(self.shape)[idx].shape
        parent = self
        return Field(lambda s: parent.at(s)[(slice(None),) + idx], sub, self.domain, of_sample=True)

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, shape={self.shape})"


class ScalarJetField(Field):
    def __init__(self, fn, domain=None, name=None, of_sample=False):
        super().__init__(fn, (), domain, name, of_sample)

    @classmethod
    def constant(cls, value, domain=None):
        return cls(lambda x: float(value), domain, name=f"const({value})")

    @classmethod
    def coordinate(cls, axis, domain=None):
        return cls(lambda x: x[axis], domain, name=f"x{axis}")

    @classmethod
    def wrap(cls, field):
        return cls(lambda s: field.at(s), field.domain, field.name, of_sample=True)


def jet_eval(f, p, order=DEFAULT_ORDER):
    """Taylor coefficients of field ``f`` at the single point ``p``."""
    sample = Sample(np.asarray(p, dtype=float)[None, :], order, f.domain)
    out = f.at(sample)[0]
    out.base = np.asarray(p, dtype=float)
    return out


def partial(f, i):
    """The field ``df/dx^i``; its jets carry one order less than ``f``'s."""
    if i not in range(NDIM):
        raise ValueError(f"axis {i} out of range")
    return ScalarJetField(lambda s: f.at(s).partial(i), f.domain, f"d{i}({f.name})", of_sample=True)
