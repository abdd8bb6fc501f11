import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourframes import forms as F
from fourframes import jets as J
from fourframes import models as M
from fourframes import verify as V

CONFIGS = [
    ("flat-family", {"mode": "kahler"}),
    ("flat-family", {"mode": "dependent"}),
    ("flat-family", {"mode": "independent"}),
    ("gibbons-hawking", {}),
    ("gibbons-hawking", {"frame": "rotated"}),
    ("gibbons-hawking", {"frame": "twisted"}),
    ("gibbons-hawking", {"potential": "point"}),
    ("gibbons-hawking", {"potential": "point", "b": 1.0}),
    ("gibbons-hawking", {"potential": "nonharmonic"}),
    ("nil3", {}),
    ("nil3", {"variant": "printed"}),
    ("ak4", {"w": "holo"}),
    ("ak4", {"w": "mixed"}),
    ("ak4", {"w": "zero"}),
    ("ak4", {"w": "nonholo"}),
]

MANDATORY = """frame_gram frame_wedge frame_closed q_signature hodge_involution lee_form_defining eq28 eq29
eq_ks eq_phi eq_wplus lemma_curvC2 comp_curv_crosscheck chern_closed chern_gauge prop42 prop_class5_i
prop_class5_ii prop_class5_iii prop_class5_iv thm1_theta_kappa thm1_omegaJ_closed flat_gen hol_vhk
prop_1dimhol tak_rels tak_splus tak_kappa tak_a_norm tak_log_laplacian holonomy_rank_bound""".split()


def test_registry_contents():
    reg = V.registry()
    ids = [c.id for c in reg]
    assert len(reg) >= 28
    assert len(set(ids)) == len(ids)
    assert all(c.anchor.strip() for c in reg)
    for name in MANDATORY:
        assert V.get(name).id in ids
    assert V.get("prop42_curvature_characterization").id == "prop42"
    with pytest.raises(V.CheckConfigError):
        V.get("no_such_check")


def test_literal_checks_have_derived_companions():
    for c in V.registry():
        if c.kind == "literal" and c.id != "tak_splus":
            assert V.get(c.id + "_derived").kind == "derived"
    assert V.get("tak_splus_derived").kind == "derived"


def test_negative_controls_fire():
    controls = [c for c in V.registry() if c.negative_control]
    assert len(controls) >= 4
    for c in controls:
        model_id, _, rest = c.negative_control.partition(" ")
        params = dict(kv.split("=") for kv in rest.split())
        inst = M.build(model_id, params)
        rep = V.run_checks(inst, [c.id], n_samples=64, seed=1)
        assert rep.checks[0].max_residual > 1e-3, c.id


@pytest.mark.parametrize("model_id, params", CONFIGS, ids=[f"{m}-{'-'.join(map(str, p.values())) or 'default'}" for m, p in CONFIGS])
def test_model_manifest(model_id, params):
    inst = M.build(model_id, params)
    rep = V.run_checks(inst, inst.expected, n_samples=200, seed=42)
    assert [c.id for c in rep.checks if not c.passed] == []
    documented = sorted(set(V.expected_ids(inst)) - set(inst.expected))
    if documented:
        rep = V.run_checks(inst, documented, n_samples=200, seed=42)
        assert [c.id for c in rep.checks if c.passed] == []


def test_flat_kaehler_full_suite_tiny_residuals():
    rep = V.run_checks(M.build("flat-family", {"mode": "kahler"}))
    assert rep.passed
    assert max(c.max_residual for c in rep.checks if c.id != "holonomy_rank_bound") <= 1e-10


def test_prop42_alias_on_nil3():
    inst = M.build("nil3")
    rep = V.run_checks(inst, ["prop42_curvature_characterization"])
    assert rep.checks[0].id == "prop42" and rep.checks[0].max_residual <= 1e-7


def test_J_kahler_negative_control():
    rep = V.run_checks(M.build("ak4", {"w": "nonholo"}), ["J_kahler"])
    assert not rep.passed and rep.checks[0].max_residual > 1e-3


def test_fitted_constants_reported():
    rep = V.run_checks(M.build("ak4"), ["prop_1dimhol", "tak_rels", "holonomy_rank_bound"])
    fitted = {c.id: c.fitted_constants for c in rep.checks}
    assert fitted["prop_1dimhol"]["alpha"] == pytest.approx(-3.0, abs=1e-8)
    assert fitted["holonomy_rank_bound"]["rank"] == 1
    assert fitted["tak_rels"]["alpha"] == pytest.approx(-3.0, abs=1e-8)


def test_report_is_deterministic():
    inst = M.build("ak4", {"w": "mixed"})
    a = V.run_checks(inst, None, 50, 3).to_json()
    b = V.run_checks(M.build("ak4", {"w": "mixed"}), None, 50, 3).to_json()
    assert a == b
    d = json.loads(a)
    assert list(d) == ["model", "params", "seed", "jet_order", "checks"]
    assert set(d["checks"][0]) >= {"id", "anchor", "samples", "max_residual", "tol", "pass"}


def test_seed_changes_points():
    box = M.build("nil3").chart
    p1, p2 = V.sample_points(box, 20, 1), V.sample_points(box, 20, 2)
    assert not np.allclose(p1, p2)
    assert np.array_equal(p1, V.sample_points(box, 20, 1))
    inner = box.inset(V.INSET)
    assert np.all(inner.contains(p1))


MONO_INST = M.build("ak4", {"w": "mixed"})
MONO_CHECKS = ["tak_splus", "tak_kappa", "eq28", "J_kahler"]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(min_value=1e-16, max_value=1.0), min_size=2, max_size=4))
def test_tolerance_monotonicity(tols):
    tols = sorted(tols, reverse=True)
    passed = [{c.id for c in V.run_checks(MONO_INST, MONO_CHECKS, 16, 0, t).checks if c.passed} for t in tols]
    for loose, tight in zip(passed, passed[1:]):
        assert tight <= loose



def test_selection():
    inst = M.build("gibbons-hawking")
    assert [c.id for c in V.select(inst, "frame_*")] == ["frame_gram", "frame_wedge", "frame_closed"]
    assert [c.id for c in V.select(inst, "eq28,frame_gram,eq28")] == ["eq28", "frame_gram"]
    assert len(V.select(inst, "all")) == len(V.applicable(inst))
    with pytest.raises(V.CheckConfigError):
        V.select(inst, "nope")
    with pytest.raises(V.CheckConfigError):
        V.select(inst, "tak_*")  # nothing of that family applies
    with pytest.raises(V.CheckConfigError):
        V.select(inst, "J_kahler")


def test_tolerance_overrides():
    inst = M.build("ak4", {"w": "nonholo"})
    rep = V.run_checks(inst, ["J_kahler"], 16, 0, {"J_kahler": 10.0})
    assert rep.passed and rep.checks[0].tol == 10.0
    with pytest.raises(V.CheckConfigError):
        V.run_checks(inst, ["J_kahler"], 16, 0, {"eq28": 1.0})
    with pytest.raises(V.CheckConfigError):
        V.run_checks(inst, ["J_kahler"], 16, 0, -1.0)


def degenerate_model():
    chart = J.Box([-1.0] * 4, [1.0] * 4)
    g = F.MetricField(lambda x: J.stack([x[0] * 0.0 + 1.0] * 3 + [x[0]], axis=-1)[..., None] * np.eye(4), chart)
    return M.ModelInstance("degenerate", {}, chart, g, {}, [], tags=frozenset({"metric"}))


def test_evaluation_error_carries_points():
    inst = degenerate_model()
    with pytest.raises(V.EvaluationError) as err:
        V.run_checks(inst, ["hodge_involution"], 20, 0)
    assert err.value.points.shape[1] == 4
    assert np.all(err.value.points[:, 0] <= 0.0)
    assert "(" in str(err.value)


def test_gauge_checks_use_both_seeds():
    inst = M.build("nil3")
    ctx = V.Context(inst, V.sample_points(inst.chart, 16, 0))
    assert len(ctx.gauges()) == len(V.GAUGE_SEEDS)
