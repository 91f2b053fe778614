import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ofwpep import model
from ofwpep.model import (MultiRoundSchedule, ParamSchedule, ProblemSetting, preset,
                          preset_anytime, preset_hazan, preset_ofw_new, validate)


def test_problem_setting_validation():
    ProblemSetting(1, 1.0, 1.0)
    for bad in [(0, 1, 1), (3, 0, 1), (3, 1, -1), (3, float("nan"), 1)]:
        with pytest.raises(ValueError):
            ProblemSetting(*bad)


def test_ofw_new_small_horizon():
    sch = preset_ofw_new(3, 1, 1)
    assert sch.eta[1, 1] == pytest.approx(0.5)
    assert sch.eta[2, 1] == sch.eta[2, 2] == pytest.approx(0.5)
    assert sch.gamma[2, 1] == 1.0
    assert sch.gamma[3, 1] == 0.0
    assert sch.gamma[3, 2] == 1.0


def test_ofw_new_powers_of_two():
    sch = preset_ofw_new(48, 1, 1)
    assert sch.eta[5, 3] == pytest.approx(1 / 16, rel=1e-14)
    assert sch.gamma[2, 1] == pytest.approx(0.25, rel=1e-14)
    sch = preset_ofw_new(12, 2, 4)
    assert sch.eta[1, 1] == pytest.approx(4 ** -0.75, rel=1e-14)
    assert sch.gamma[2, 1] == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("T", [3, 5, 12, 30])
def test_ofw_new_matches_unrolled_recursion(T):
    # unrolling x_{t+1} = (1 - s) x_t + s v_t from x_1 gives weight s (1-s)^{t-1-k} on v_k
    _, sig = model.ofw_scalars(T, 1.0, 1.0)
    sch = preset_ofw_new(T)
    for t in range(2, T + 1):
        for k in range(1, t):
            assert sch.gamma[t, k] == pytest.approx(sig * (1 - sig) ** (t - 1 - k), abs=1e-15)
    np.testing.assert_array_equal(sch.beta[:, :], sch.gamma[:T, :])


def test_hazan_alg27_clamps():
    sch = preset_hazan(4, variant="alg27")
    assert sch.gamma[2, 1] == 1.0
    assert sch.gamma[3, 2] == 1.0
    assert sch.gamma[3, 1] == 0.0


def test_hazan_thm44_recursion():
    sch = preset_hazan(4, variant="thm44")
    assert sch.gamma[2, 1] == pytest.approx(1 / math.sqrt(2))
    assert sch.gamma[3, 2] == pytest.approx(1 / math.sqrt(3))
    assert sch.gamma[3, 1] == pytest.approx((1 / math.sqrt(2)) * (1 - 1 / math.sqrt(3)))
    assert sch.gamma[3, 1] == pytest.approx(0.2989, abs=1e-4)


@pytest.mark.parametrize("variant", ["thm44", "alg27"])
def test_hazan_eta_value(variant):
    sch = preset_hazan(16, 1.0, 1.0, variant)
    mask = np.tril(np.ones((16, 16), dtype=bool))
    mask[0] = False
    mask[:, 0] = False
    np.testing.assert_allclose(sch.eta[mask], 1 / 16)


def test_anytime_ofw_new_sigmas():
    sch = preset_anytime("ofw-new", 5)
    sig = sch.meta["sigma_steps"]
    assert sig[0] == 1.0 and sig[2] == 1.0
    assert sig[3] == pytest.approx(math.sqrt(3) / 2)
    # gamma recursion with per-step sigma
    assert sch.gamma[5, 4] == pytest.approx(math.sqrt(3) / 2)


def test_anytime_ofw_new_agrees_on_last_row():
    T = 3
    a = preset_anytime("ofw-new", T)
    f = preset_ofw_new(T)
    eta_T, sig_T = model.ofw_scalars(T, 1.0, 1.0)
    assert a.meta["eta_steps"][T - 1] == pytest.approx(eta_T)
    assert a.meta["sigma_steps"][T - 1] == pytest.approx(sig_T)
    assert a.eta[1, 1] != pytest.approx(f.eta[1, 1])
    assert a.eta[2, 1] != pytest.approx(f.eta[2, 1])


def test_anytime_hazan_eta():
    sch = preset_anytime("hazan-alg27", 4)
    assert sch.eta[2, 1] == pytest.approx(1 / (2 * 2 ** 0.75))
    assert sch.eta[2, 2] == pytest.approx(1 / (2 * 2 ** 0.75))


@pytest.mark.parametrize("name", model.PRESETS)
def test_presets_are_hull_safe(name):
    for T in (2, 3, 6):
        sch = preset(name, T)
        rep = validate(sch)
        assert rep.ok, rep.violations
        assert rep.hull_safe
        g = sch.gamma
        assert g.min() >= -1e-12
        assert g.sum(axis=1).max() <= 1 + 1e-12


def test_validate_flags_overfull_row():
    sch = preset_ofw_new(5)
    g = sch.gamma.copy()
    g[2, 1] = 1.5
    rep = validate(sch.replace(gamma=g))
    assert not rep.hull_safe
    assert any("row 2" in s for s in rep.hull_issues)


def test_validate_flags_negative_entry():
    sch = preset_ofw_new(5)
    g = sch.gamma.copy()
    g[3, 1] = -0.1
    rep = validate(sch.replace(gamma=g))
    assert not rep.hull_safe
    assert any("gamma[3,1]" in s for s in rep.hull_issues)


def test_validate_index_range_and_nonfinite():
    sch = ParamSchedule.empty(4)
    eta = sch.eta.copy()
    eta[1, 2] = 1.0  # s > t
    beta = sch.beta.copy()
    beta[2, 1] = np.inf
    rep = validate(sch.replace(eta=eta, beta=beta))
    assert rep.violations and rep.nonfinite
    assert not rep.ok


@settings(max_examples=30, deadline=None)
@given(T=st.integers(1, 40), cL=st.floats(0.1, 10), cD=st.floats(0.1, 10))
def test_dimensional_homogeneity(T, cL, cD):
    base = preset_ofw_new(T, 1.0, 1.0)
    sc = preset_ofw_new(T, cL, cD)
    np.testing.assert_allclose(sc.eta, (cD / cL) * base.eta, rtol=1e-12)
    np.testing.assert_array_equal(sc.gamma, base.gamma)
    np.testing.assert_array_equal(sc.beta, base.beta)


@pytest.mark.parametrize("name", model.PRESETS)
def test_json_round_trip(name, tmp_path):
    sch = preset(name, 5)
    path = tmp_path / "s.json"
    model.save_schedule(sch, path)
    back = model.load_schedule(path)
    np.testing.assert_array_equal(back.eta, sch.eta)
    np.testing.assert_array_equal(back.beta, sch.beta)
    np.testing.assert_array_equal(back.gamma, sch.gamma)
    d = json.loads(path.read_text())
    assert [len(r) for r in d["eta"]] == [1, 2, 3, 4]
    assert [len(r) for r in d["beta"]] == [0, 1, 2, 3]
    assert [len(r) for r in d["gamma"]] == [0, 1, 2, 3, 4]


def test_json_rejects_ragged_mismatch():
    d = preset_ofw_new(3).to_json_dict()
    d["eta"][1] = [1.0]
    with pytest.raises(ValueError):
        ParamSchedule.from_json_dict(d)


def test_schedule_arrays_are_read_only():
    sch = preset_ofw_new(4)
    with pytest.raises(ValueError):
        sch.eta[1, 1] = 3.0


def test_multiround_lex_discipline():
    sch = preset_ofw_new(4).to_multiround()
    assert sch.r == 1 and sch.n_atoms == 3
    assert sch.lex_violations() == []
    beta = sch.beta.copy()
    beta[1, 2] = 0.3  # atom 1 referring to atom 2
    bad = MultiRoundSchedule(sch.T, sch.r, sch.eta, beta, sch.gamma, {})
    assert bad.lex_violations()


def test_multiround_json_round_trip():
    sch = preset_hazan(4).to_multiround()
    back = MultiRoundSchedule.from_json_dict(json.loads(json.dumps(sch.to_json_dict())))
    np.testing.assert_array_equal(back.gamma, sch.gamma)
    assert back.atom_time(3) == 3


def test_b3_table_range():
    with pytest.raises(ValueError):
        preset("hazan-b3-opt", 7)
    sch = preset("hazan-b3-opt", 2)
    assert sch.gamma[2, 1] == pytest.approx(0.5)
    assert sch.eta[1, 1] == 1.0


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("nope", 3)
