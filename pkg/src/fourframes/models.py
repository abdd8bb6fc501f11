"""Model geometries: flat family, Gibbons-Hawking, R+ x Nil3 and the almost-Kaehler ak4 family.

Each constructor returns a :class:`ModelInstance` holding the metric, its named
forms, the almost Hermitian structure under study and the ids of the checks the
model is expected to pass. Models are addressed by string id through
:func:`build`, with parameters given as a ``name -> value`` map.

Named forms
-----------
=================  ===========================================================
label              meaning
=================  ===========================================================
sigma_1..3         parallel selfdual basis (flat family) or Nil3 coframe 1-forms
tau_1..3           parallel anti-selfdual basis (flat family)
omega_I            Kaehler form of the structure under study
omega_I1, omega_I2 explicit gauge pair with ``omega_I2 = g(I1 I ., .)`` up to sign
omega_J1..3        hyperKaehler triple (anti-selfdual)
omega_I3           third selfdual Gibbons-Hawking form
omega_J            negative Kaehler form (ak4)
theta_mono         monopole 1-form of a Gibbons-Hawking model
frame_1..5         rotated 5-frame (Gibbons-Hawking with ``frame`` other than standard)
=================  ===========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import forms as F
from . import hermitian as H
from . import jets as J
from .jets import Box, NDIM

EPS_MONOPOLE = 1e-10


class ModelError(ValueError):
    """Invalid model id, parameters or a violated model precondition."""


@dataclass
class ModelInstance:
    id: str
    params: dict
    chart: Box
    metric: F.MetricField
    named_forms: dict
    expected: list
    structure: H.AlmostHermitianStructure | None = None
    gauge_form: F.DifferentialForm | None = None
    frame: tuple | None = None
    extras: dict = field(default_factory=dict)
    tags: frozenset = frozenset()

    def form(self, label):
        return self.named_forms[label]

    def gauge(self, seed="auto"):
        """Explicit gauge when the model ships one, otherwise a seeded gauge."""
        if self.gauge_form is not None and seed == "model":
            return H.LocalGauge(self.structure, omega_I1=self.gauge_form)
        return H.LocalGauge(self.structure, seed=seed)

    def sample(self, points, order=J.DEFAULT_ORDER):
        return J.Sample(points, order, self.chart)


# ---------------------------------------------------------------------------
# construction helpers


def _zeros(x):
    return J.Jet.constant(np.zeros(len(x[0])), x[0].order)


def _ones(x):
    return J.Jet.constant(np.ones(len(x[0])), x[0].order)


def _one_form(x, comps):
    """Stack four components (jets or numbers) into a ``(N, 4)`` 1-form jet."""
    return J.stack([c if isinstance(c, J.Jet) else _ones(x) * float(c) for c in comps], axis=-1)


def _dx(x, i):
    return _one_form(x, [1.0 if k == i else 0.0 for k in range(NDIM)])


def _two_form(fn, domain, name):
    """2-form from ``fn(x) -> tensor jet (N, 4, 4)``."""
    return F.form_from_array(2, lambda s: F.from_tensor(fn(s.x), 2), domain, name)


def _metric_from_coframe(fn, domain, name, orientation=1):
    """Metric ``sum_k c_k e_k (x) e_k`` from ``fn(x) -> [(c_k, e_k), ...]``."""

    def metric(x):
        total = None
        for coeff, e in fn(x):
            t = J.einsum("i,j->ij", e, e) * coeff[..., None, None]
            total = t if total is None else total + t
        return total

    return F.MetricField(metric, domain, name, orientation)


def _check_orientation(metric, form, chart, asd=True):
    """Flip the chart orientation once if ``form`` has the wrong duality, then re-validate."""
    pts = _probe_points(chart)
    for m in (metric, metric.with_orientation(-metric.orientation)):
        s = J.Sample(pts, 1, chart)
        a = form.at(s)
        st = F.hodge_arr(a, 2, m.inverse_at(s), m.volume_at(s))
        target = -a if asd else a
        if np.abs((st - target).value).max() < 1e-9:
            return m
    raise ModelError(f"{form.name} is neither selfdual nor anti-selfdual on the chart")


def _probe_points(chart, n=5):
    u = np.linspace(0.1, 0.9, n)[:, None] * np.ones((1, NDIM))
    u = (u + np.arange(NDIM)[None, :] * 0.137) % 1.0
    return chart.lo + u * (chart.hi - chart.lo)


# ---------------------------------------------------------------------------
# flat family


FLAT_MODES = {
    "kahler": (lambda x: 0.3 + _zeros(x), lambda x: 0.7 + _zeros(x)),
    "dependent": (
        lambda x: (x[0] + x[2] * 0.5) * 0.8,
        lambda x: J.sin((x[0] + x[2] * 0.5) * 0.8) * 0.6 + 0.2,
    ),
    "independent": (lambda x: x[0] * 0.8, lambda x: x[1] * 0.9),
}


def model_flat_family(phi, psi, mode=None, domain=None):
    """Euclidean metric with ``omega_I = s1 cos(phi) cos(psi) + s2 cos(phi) sin(psi) + s3 sin(phi)``.

    ``phi`` and ``psi`` are callables on coordinate jets (or :class:`ScalarJetField`).
    """
    chart = domain or Box([-1.0] * 4, [1.0] * 4)
    phi_f = phi if isinstance(phi, J.Field) else J.ScalarJetField(phi, chart, "phi")
    psi_f = psi if isinstance(psi, J.Field) else J.ScalarJetField(psi, chart, "psi")
    g = F.MetricField.euclidean(chart)

    def sig(k, sign=1.0):
        t = np.zeros((NDIM, NDIM))
        (a, b), (c, d) = (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))[k]
        t[a, b], t[b, a], t[c, d], t[d, c] = 1.0, -1.0, sign, -sign
        return np.array([t[i, j] for i, j in F.basis(2)])

    S = [sig(k) for k in range(3)]
    T = [sig(k, -1.0) for k in range(3)]

    def combo(coeffs):
        def fn(s):
            cs = coeffs(phi_f.at(s), psi_f.at(s))
            return sum((c[:, None] * S[k] for k, c in enumerate(cs)), start=0 * cs[0][:, None])

        return fn

    def wI(p, q):
        return (J.cos(p) * J.cos(q), J.cos(p) * J.sin(q), J.sin(p))

    def wI1(p, q):
        return (J.sin(p) * J.cos(q), J.sin(p) * J.sin(q), -J.cos(p))

    def wI2(p, q):
        return (-J.sin(q), J.cos(q), 0.0 * p)

    named = {f"sigma_{k + 1}": F.DifferentialForm(2, (lambda k: lambda x: S[k])(k), chart, f"sigma_{k + 1}") for k in range(3)}
    for k in range(3):
        named[f"tau_{k + 1}"] = F.DifferentialForm(2, (lambda k: lambda x: T[k])(k), chart, f"tau_{k + 1}")
    named["omega_I"] = F.form_from_array(2, combo(wI), chart, "omega_I")
    named["omega_I1"] = F.form_from_array(2, combo(wI1), chart, "omega_I1")
    named["omega_I2"] = F.form_from_array(2, combo(wI2), chart, "omega_I2")
    structure = H.AlmostHermitianStructure(g, named["omega_I"], "flat-family")
    expected = []
    return ModelInstance(
        "flat-family",
        {"mode": mode},
        chart,
        g,
        named,
        list(expected),
        structure,
        gauge_form=named["omega_I1"],
        frame=("tau_1", "tau_2", "tau_3", "omega_I1", "omega_I2"),
        extras={"phi": phi_f, "psi": psi_f},
        tags=frozenset({"metric", "structure", "flat-family", "flat", "hk", "small_hol"}),
    )


# ---------------------------------------------------------------------------
# Gibbons-Hawking


def _gh_linear(a, b):
    U = lambda x: x[2] * a + b
    Theta = lambda x: (x[3] * (a / 2), _zeros(x), -x[1] * (a / 2))
    return U, Theta


def _gh_point(a, b):
    def U(x):
        r = J.sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
        return a / r + b

    def Theta(x):
        X, Y, Z = x[1], x[2], x[3]
        rho2 = X * X + Y * Y
        r = J.sqrt(rho2 + Z * Z)
        f = (1.0 - Z / r) / rho2 * a
        return (Y * f, -X * f, _zeros(x))

    return U, Theta


def _gh_nonharmonic(a, b):
    U = lambda x: x[2] * x[2] * a + b + 1.0
    Theta = lambda x: (x[3] * (a / 2), _zeros(x), -x[1] * (a / 2))
    return U, Theta


GH_POTENTIALS = {"linear": _gh_linear, "point": _gh_point, "nonharmonic": _gh_nonharmonic}


def model_gibbons_hawking(U, Theta, domain=None, strict=True, name="gibbons-hawking", params=None):
    """Gibbons-Hawking metric ``U (dx^2 + dy^2 + dz^2) + (du + Theta)^2 / U`` on the chart ``(u, x, y, z)``.

    ``U(x)`` returns a scalar jet and ``Theta(x)`` the ``(dx, dy, dz)`` components of the
    monopole 1-form, both as functions of the four coordinate jets. With ``strict`` the
    positivity of ``U`` and the monopole equation ``d Theta = *_3 dU`` are checked.
    """
    chart = domain or Box([-1.0, -1.0, 0.5, -1.0], [1.0, 1.0, 2.0, 1.0], ("u", "x", "y", "z"))

    def e0(x):
        tx, ty, tz = Theta(x)
        return _one_form(x, [1.0, tx, ty, tz])

    def coframe(x):
        u = U(x)
        return [(1.0 / u, e0(x))] + [(u, _dx(x, i)) for i in (1, 2, 3)]

    g = _metric_from_coframe(coframe, chart, name)

    def gh_form(pair_a, pair_b, sign):
        # U dx^a ^ dx^b + sign * dx^c ^ (du + Theta)
        (i, j), k = pair_a, pair_b

        def fn(x):
            return H.wedge11(_dx(x, i), _dx(x, j)) * U(x)[..., None, None] + H.wedge11(_dx(x, k), e0(x)) * sign

        return fn

    layout = {1: ((2, 3), 1), 2: ((1, 2), 3), 3: ((3, 1), 2)}
    named = {}
    for k, (ij, c) in layout.items():
        named[f"omega_J{k}"] = _two_form(gh_form(ij, c, 1.0), chart, f"omega_J{k}")
        named[f"omega_I{k}"] = _two_form(gh_form(ij, c, -1.0), chart, f"omega_I{k}")
    named["theta_mono"] = F.form_from_array(1, lambda s: e0(s.x) - _dx(s.x, 0), chart, "theta_mono")
    s = J.Sample(_probe_points(chart, 9), 2, chart)
    if np.any(U(s.x).value <= 0):
        raise ModelError("U must be positive on the chart")
    g = _check_orientation(g, named["omega_J1"], chart, asd=True)

    if strict:
        mono = monopole_residual(U, Theta, s)
        if mono > EPS_MONOPOLE:
            raise ModelError(f"monopole equation violated (residual {mono:.2e})")

    structure = H.structure_from_pair(g, named["omega_I1"], named["omega_I2"])
    frame = ("omega_J1", "omega_J2", "omega_J3", "omega_I1", "omega_I2")
    tags = frozenset({"metric", "structure", "gibbons-hawking", "frame"})
    inst = ModelInstance(name, dict(params or {}), chart, g, named, [], structure, frame=frame, tags=tags)
    inst.extras["U"] = U
    inst.extras["Theta"] = Theta
    return inst


def monopole_defect(U, Theta, sample):
    """Per-point max of ``|d Theta - *_3 dU|`` in the flat ``(x, y, z)`` metric."""
    x = sample.x
    th = _one_form(x, (0.0,) + tuple(Theta(x)))
    dth = H.d1(th)
    dU = U(x).grad()
    star = [(2, 3, 1), (3, 1, 2), (1, 2, 3)]  # *dx = dy^dz, *dy = dz^dx, *dz = dx^dy
    return np.max([np.abs((dth[:, i, j] - dU[:, k]).value) for i, j, k in star], axis=0)


def monopole_residual(U, Theta, sample):
    return float(monopole_defect(U, Theta, sample).max())


# ---------------------------------------------------------------------------
# R+ x Nil3


def nil3_y(t):
    return J.power(t * 1.5, 2.0 / 3.0)


def model_nil3(domain=None, variant="corrected"):
    """Metric ``dt^2 + y (s1^2 + s2^2) + s3^2 / y`` with ``y = (3t/2)^(2/3)`` on ``(t, x1, x2, x3)``.

    ``s1 = dx1``, ``s2 = dx2``, ``s3 = dx3 + x1 dx2``. This is the pullback of the
    Gibbons-Hawking metric with ``U = y`` through ``t = (2/3) y^(3/2)``, ``z = x1``,
    ``x = x2``, ``u = x3 + x1 x2 / 2``. ``variant="printed"`` swaps in the coefficients
    ``(2t/3)^(3/2)`` and ``(2t/3)^(-2/3)``, which is not Ricci-flat (negative control).
    """
    chart = domain or Box([0.5, -1.0, -1.0, -1.0], [2.0, 1.0, 1.0, 1.0], ("t", "x1", "x2", "x3"))

    def sig(x):
        s1 = _dx(x, 1)
        s2 = _dx(x, 2)
        s3 = _one_form(x, [0.0, 0.0, x[1], 1.0])
        return s1, s2, s3

    def coeffs(x):
        t = x[0]
        if variant == "printed":
            return J.power(t * (2.0 / 3.0), 1.5), J.power(t * (2.0 / 3.0), -2.0 / 3.0)
        y = nil3_y(t)
        return y, 1.0 / y

    if variant not in ("corrected", "printed"):
        raise ModelError(f"unknown nil3 variant {variant!r}")

    def coframe(x):
        s1, s2, s3 = sig(x)
        a, b = coeffs(x)
        return [(_ones(x), _dx(x, 0)), (a, s1), (a, s2), (b, s3)]

    g = _metric_from_coframe(coframe, chart, "nil3")

    def make(k, sign):
        def fn(x):
            s1, s2, s3 = sig(x)
            dt = _dx(x, 0)
            y = nil3_y(x[0])
            yh = J.sqrt(y)[..., None, None]
            if k == 1:
                return H.wedge11(dt, s1) * yh + H.wedge11(s2, s3) * sign
            if k == 2:
                return -H.wedge11(dt, s2) * yh + H.wedge11(s1, s3) * sign
            return H.wedge11(s1, s2) * y[..., None, None] + H.wedge11(dt, s3) / yh * sign

        return fn

    named = {}
    for k in (1, 2, 3):
        named[f"omega_J{k}"] = _two_form(make(k, 1.0), chart, f"omega_J{k}")
        named[f"omega_I{k}"] = _two_form(make(k, -1.0), chart, f"omega_I{k}")
    for k, lab in enumerate(("sigma_1", "sigma_2", "sigma_3")):
        named[lab] = F.form_from_array(1, (lambda k: lambda s: sig(s.x)[k])(k), chart, lab)
    if variant == "printed":
        # the forms belong to the corrected metric; keep its orientation
        g = g.with_orientation(-1)
    else:
        g = _check_orientation(g, named["omega_J1"], chart, asd=True)
    structure = H.structure_from_pair(g, named["omega_I1"], named["omega_I2"])
    frame = ("omega_J1", "omega_J2", "omega_J3", "omega_I1", "omega_I2")
    p = {"variant": variant}
    return ModelInstance("nil3", p, chart, g, named, [], structure, frame=frame, tags=frozenset(_tags("nil3", p)))


def nil3_to_gh(points):
    """Map Nil3 chart points ``(t, x1, x2, x3)`` to Gibbons-Hawking points ``(u, x, y, z)``."""
    t, x1, x2, x3 = np.asarray(points, dtype=float).T
    y = (1.5 * t) ** (2.0 / 3.0)
    return np.stack([x3 + 0.5 * x1 * x2, x2, y, x1], axis=-1)


def nil3_jacobian(points):
    """``d(u, x, y, z) / d(t, x1, x2, x3)`` at the given points, shape ``(N, 4, 4)``."""
    t, x1, x2, _ = np.asarray(points, dtype=float).T
    n = len(t)
    Jm = np.zeros((n, 4, 4))
    Jm[:, 0, 1], Jm[:, 0, 2], Jm[:, 0, 3] = 0.5 * x2, 0.5 * x1, 1.0
    Jm[:, 1, 2] = 1.0
    Jm[:, 2, 0] = (1.5 * t) ** (-1.0 / 3.0)
    Jm[:, 3, 1] = 1.0
    return Jm


# ---------------------------------------------------------------------------
# almost-Kaehler ak4 family


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _cpoly(coeffs, z):
    """``sum_k c_k z^k`` for complex ``c_k`` and a complex jet pair ``z``."""
    out = (z[0] * 0.0 + coeffs[-1].real, z[0] * 0.0 + coeffs[-1].imag)
    for c in reversed(coeffs[:-1]):
        out = _cmul(out, z)
        out = (out[0] + c.real, out[1] + c.imag)
    return out


AK4_COEFFS = (0.05 + 0.1j, 0.3, 0.1 - 0.08j)

AK4_W = {
    # w(z, zbar_sigma) with z = x + iy and zbar_sigma = t - iu, so that I_Sigma dw = i dw
    "zero": lambda x: (_zeros(x), _zeros(x)),
    "holo": lambda x: _cpoly(AK4_COEFFS, (x[2], -x[3])),
    "mixed": lambda x: ((x[0] + x[2]) * 0.2 + 0.05, (x[1] - x[3]) * 0.2),
    "nonholo": lambda x: (x[2] * 0.3 + 0.05, x[3] * 0.15),
}


def ak4_exponent(alpha):
    """Exponent ``e`` with ``g_Sigma = (1 - |w|^2)^e (dt^2 + du^2)`` giving holonomy ``alpha omega_I + omega_J``."""
    if abs(alpha - 1.0) < 1e-12:
        raise ModelError("alpha = 1 is not attained by any w = w(Sigma)")
    return (1.0 + alpha) / (alpha - 1.0)


def model_ak4(w, lam2=None, domain=None, flags=(), name="ak4", params=None):
    """Almost-Kaehler metric on ``(x, y, t, u)``.

    ``g = |dz - w dzbar|^2 / (1 - |w|^2) + lam2 (dt^2 + du^2)``,
    ``omega_I = dx^dy + lam2 dt^du``, ``omega_J = -dx^dy + lam2 dt^du``.
    ``w(x)`` returns ``(Re w, Im w)`` jets and ``lam2(x)`` the conformal factor of
    ``g_Sigma`` (default 1). With ``"holomorphic_in_sigma"`` in ``flags`` the
    condition ``I_Sigma d_Sigma w = i d_Sigma w`` is checked; with forms acted on by
    pullback and ``omega_Sigma = lam2 dt^du`` it says that ``w`` is a holomorphic
    function of ``t - iu``, which is exactly what makes ``(g, J)`` Kaehler.
    """
    chart = domain or Box([-1.0] * 4, [1.0] * 4, ("x", "y", "t", "u"))
    lam2 = lam2 or (lambda x: _ones(x))

    def coframe_metric(x):
        p, q = w(x)
        n = 1.0 - p * p - q * q
        # dz - w dzbar = (1 - w) dx + i (1 + w) dy
        gxx = ((1.0 - p) * (1.0 - p) + q * q) / n
        gyy = ((1.0 + p) * (1.0 + p) + q * q) / n
        gxy = q * (-2.0) / n
        l2 = lam2(x)
        z = _zeros(x)
        rows = [[gxx, gxy, z, z], [gxy, gyy, z, z], [z, z, l2, z], [z, z, z, l2]]
        return J.stack([J.stack(r, axis=-1) for r in rows], axis=-2)

    g = F.MetricField(coframe_metric, chart, name)

    def kform(sign):
        def fn(x):
            return H.wedge11(_dx(x, 0), _dx(x, 1)) * sign + H.wedge11(_dx(x, 2), _dx(x, 3)) * lam2(x)[..., None, None]

        return fn

    named = {"omega_I": _two_form(kform(1.0), chart, "omega_I"), "omega_J": _two_form(kform(-1.0), chart, "omega_J")}
    s = J.Sample(_probe_points(chart, 9), 1, chart)
    p, q = w(s.x)
    if np.any(p.value**2 + q.value**2 >= 1.0):
        raise ModelError("|w| must stay below 1 on the chart")
    if "holomorphic_in_sigma" in flags:
        cr = max(
            np.abs((p.partial(2) + q.partial(3)).value).max(),
            np.abs((p.partial(3) - q.partial(2)).value).max(),
        )
        if cr > 1e-9:
            raise ModelError(f"w is not holomorphic in the Sigma variable (residual {cr:.2e})")
    structure = H.AlmostHermitianStructure(g, named["omega_I"], name)
    tags = {"metric", "structure", "ak4", "omega_J", "almost_kahler"}
    if "holomorphic_in_sigma" in flags:
        tags |= {"kahler_J", "small_hol"}
    inst = ModelInstance(name, dict(params or {}), chart, g, named, [], structure, tags=frozenset(tags))
    inst.extras["w"] = w
    inst.extras["lam2"] = lam2
    return inst


# ---------------------------------------------------------------------------
# registry


MODEL_IDS = ("flat-family", "gibbons-hawking", "nil3", "ak4")

PARAM_SPECS = {
    "flat-family": {"mode": ("dependent", ("kahler", "dependent", "independent"))},
    "gibbons-hawking": {
        "a": (1.0, None),
        "b": (0.0, None),
        "potential": ("linear", tuple(GH_POTENTIALS)),
        "frame": ("standard", ("standard", "rotated", "twisted")),
    },
    "nil3": {"variant": ("corrected", ("corrected", "printed"))},
    "ak4": {"w": ("holo", tuple(AK4_W)), "alpha": (-3.0, None)},
}

VARIANT_NOTES = {
    "flat-family": "mode=kahler (constant phi, psi), dependent (psi = f(phi)), independent (phi = 0.8 x0, psi = 0.9 x1)",
    "gibbons-hawking": "potential=linear (U = a y + b), point (U = a/r + b, Dirac-string Theta), nonharmonic (control); "
    "frame=standard, rotated (constant O(3) x U(1)), twisted (U(1) angle u, control)",
    "nil3": "variant=corrected (Ricci-flat pullback of U = y), printed (control coefficients)",
    "ak4": "w=holo (w(t - iu), g_Sigma = (1-|w|^2)^((1+alpha)/(alpha-1)) flat), mixed (w = 0.2(z + t - iu) + 0.05, flat g_Sigma), zero, nonholo (control); alpha != 1",
}


def parse_params(model_id, params):
    """Fill defaults, coerce numbers and reject unknown names or values."""
    if model_id not in PARAM_SPECS:
        raise ModelError(f"unknown model {model_id!r}; choose from {', '.join(MODEL_IDS)}")
    spec = PARAM_SPECS[model_id]
    extra = set(params) - set(spec)
    if extra:
        raise ModelError(f"unknown parameter(s) for {model_id}: {', '.join(sorted(extra))}")
    out = {}
    for key, (default, choices) in spec.items():
        val = params.get(key, default)
        if choices is None:
            try:
                val = float(val)
            except (TypeError, ValueError):
                raise ModelError(f"parameter {key} must be a number, got {val!r}") from None
            if not math.isfinite(val):
                raise ModelError(f"parameter {key} must be finite")
        elif val not in choices:
            raise ModelError(f"parameter {key} must be one of {', '.join(choices)}, got {val!r}")
        out[key] = val
    return out


def build(model_id, params=None):
    """Construct a registered model from its id and a parameter map."""
    p = parse_params(model_id, dict(params or {}))
    if model_id == "flat-family":
        phi, psi = FLAT_MODES[p["mode"]]
        inst = model_flat_family(phi, psi, mode=p["mode"])
    elif model_id == "gibbons-hawking":
        U, Theta = GH_POTENTIALS[p["potential"]](p["a"], p["b"])
        strict = p["potential"] != "nonharmonic"
        inst = model_gibbons_hawking(U, Theta, strict=strict, params=p)
        if p["frame"] != "standard":
            rotate_frame(inst, twisted=p["frame"] == "twisted")
    elif model_id == "nil3":
        inst = model_nil3(variant=p["variant"])
    else:
        w = AK4_W[p["w"]]
        lam2 = None
        if p["w"] == "holo":
            expo = ak4_exponent(p["alpha"])

            def lam2(x, w=w, expo=expo):
                pr, qi = w(x)
                return J.power(1.0 - pr * pr - qi * qi, expo)

        flags = ("holomorphic_in_sigma",) if p["w"] in ("holo", "mixed", "zero") else ()
        inst = model_ak4(w, lam2, flags=flags, params=p)
    inst.params = p
    inst.tags = frozenset(_tags(model_id, p))
    from . import verify  # deferred: verify depends on this module

    inst.expected = verify.expected_ids(inst, expected_failures(model_id, p))
    return inst


def expected_failures(model_id, p):
    """Applicable checks that a configuration is known to fail.

    These are the negative controls and the checks that evaluate literal constants
    shown to be inconsistent (each has a passing ``_derived`` companion).
    """
    if model_id == "flat-family":
        return {"flat_gen"} if p["mode"] == "independent" else set()
    if model_id == "gibbons-hawking":
        out = set()
        if p["frame"] == "twisted" or p["potential"] != "linear":
            out.add("frame_closed")
        if p["potential"] == "nonharmonic":
            out.add("gh_monopole")
        return out
    if model_id == "nil3":
        if p["variant"] == "printed":
            return {"frame_gram", "ricci_flat", "selfdual", "hk_parallel", "hol_vhk", "nil3_gh_isometry"}
        return set()
    return {
        "holo": {"tak_a_norm", "tak_log_laplacian", "tak_case_iii_flat"},
        "mixed": {"tak_splus"},
        "zero": set(),
        "nonholo": {"J_kahler"},
    }[p["w"]]


def _tags(model_id, p):
    """Capabilities and structural claims of a built model; checks select on these."""
    tags = {"metric", "structure", model_id}
    if model_id == "flat-family":
        tags |= {"flat", "hk", "small_hol"}
        if p["mode"] == "kahler":
            tags |= {"frame", "hermitian", "almost_kahler"}
    elif model_id == "gibbons-hawking":
        tags |= {"frame"}
        if p["potential"] != "nonharmonic":
            tags |= {"hk", "gh_harmonic", "small_hol"}
            if p["a"] != 0.0:
                tags.add("nonflat")
        if p["potential"] == "linear":
            tags |= {"hermitian", "gh_linear"}
    elif model_id == "nil3":
        if p["variant"] == "printed":
            # the forms belong to the corrected metric, so I is not even orthogonal here;
            # only the metric-level claims are tested (and fail)
            return {"metric", "nil3", "frame", "hk"}
        tags |= {"frame", "hermitian", "hk", "nonflat", "small_hol"}
    else:
        tags |= {"omega_J", "almost_kahler", "ak4"}
        if p["w"] != "nonholo":
            tags |= {"kahler_J", "small_hol"}
        if p["w"] == "holo":
            tags.add("ak4_holo")
    return tags


FRAME_ROTATION = (
    np.array([[0.36, 0.48, -0.8], [-0.8, 0.6, 0.0], [0.48, 0.64, 0.6]]),
    0.7,
)


def rotate_frame(inst, twisted=False):
    """Replace the 5-frame by a constant ``O(3) x U(1)`` rotation of it.

    With ``twisted`` the ``U(1)`` angle is the coordinate ``x0`` instead of a constant,
    which destroys closedness.
    """
    R, angle = FRAME_ROTATION
    old = [inst.named_forms[k] for k in inst.frame]

    def combo(row, k):
        def fn(s):
            w = [f.at(s) for f in old]
            if k < 3:
                return sum((w[j] * float(row[j]) for j in range(3)), start=w[0] * 0.0)
            t = s.x[0] if twisted else J.Jet.constant(np.full(len(s), angle), s.order)
            c, sn = J.cos(t)[..., None], J.sin(t)[..., None]
            return w[3] * c - w[4] * sn if k == 3 else w[3] * sn + w[4] * c

        return fn

    names = []
    for k in range(5):
        name = f"frame_{k + 1}"
        inst.named_forms[name] = F.form_from_array(2, combo(R[k] if k < 3 else None, k), inst.chart, name)
        names.append(name)
    inst.frame = tuple(names)
