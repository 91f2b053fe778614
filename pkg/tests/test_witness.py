import numpy as np
import pytest

from ofwpep import pep, witness
from ofwpep.model import ParamSchedule, ProblemSetting, preset
from ofwpep.witness import WorstCase, audit, extract, worst_case_T1


def _solved(name, T, L=1.0, D=1.0):
    st = ProblemSetting(T, L, D)
    sch = preset(name, T, L, D)
    return sch, st, pep.tight_bound(sch, st)


def test_identity_gram():
    wc = extract(np.eye(4), pep.pep_basis(2))
    assert wc.d == 4
    P = np.vstack([wc.grads, wc.atoms, wc.x_star])
    np.testing.assert_allclose(P @ P.T, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(P, axis=1), 1.0)


def test_rank_one_gram(rng):
    q = rng.standard_normal(6)
    wc = extract(np.outer(q, q), pep.pep_basis(3))
    assert wc.d == 1
    np.testing.assert_allclose(wc.gram(), np.outer(q, q), atol=1e-12)


def test_indefinite_rejected():
    G = np.eye(4)
    G[0, 0] = -0.5
    with pytest.raises(ValueError):
        extract(G, pep.pep_basis(2))


def test_basis_size_mismatch():
    with pytest.raises(ValueError):
        extract(np.eye(5), pep.pep_basis(2))


def test_gram_reconstruction():
    _, _, res = _solved("hazan-thm44", 5)
    wc = extract(res, pep.pep_basis(5))
    G = res.gram
    assert np.linalg.norm(wc.gram() - G) <= 1e-6 * (1 + np.linalg.norm(G))


def test_two_round_table_case():
    sch, st, res = _solved("hazan-b3-opt", 2)
    wc = extract(res, pep.pep_basis(2))
    np.testing.assert_allclose(np.linalg.norm(wc.grads, axis=1), 1.0, atol=1e-6)
    rep = audit(wc, sch, st, objective=res.value)
    assert rep.passed, rep.checks
    assert rep.regret == pytest.approx(1.7321, abs=5e-3)


@pytest.mark.parametrize("name,T", [("ofw-new", 4), ("hazan-alg27", 5), ("anytime-ofw-new", 6),
                                    ("zero", 3)])
def test_closed_loop(name, T):
    sch, st, res = _solved(name, T)
    wc = extract(res, pep.pep_basis(T))
    rep = audit(wc, sch, st, objective=res.value)
    assert rep.passed, rep.failures
    assert abs(rep.regret - res.value) <= 1e-4 * (1 + abs(res.value))
    assert rep.regret <= res.certified_upper + 1e-4


def test_corrupted_atom_fails_lmo_check():
    sch, st, res = _solved("ofw-new", 4)
    wc = extract(res, pep.pep_basis(4))
    atoms = wc.atoms.copy()
    # move v_1 by 0.1 D against its own search direction's minimizing side
    direction = sch.eta[1, 1] * wc.grads[0]
    atoms[0] = atoms[0] + 0.1 * direction / np.linalg.norm(direction)
    bad = WorstCase(wc.grads, atoms, wc.x_star)
    rep = audit(bad, sch, st, objective=res.value)
    assert not rep.checks["lmo_consistency"]["ok"]
    assert not rep.passed


def test_zero_gram_degenerate():
    sch = preset("ofw-new", 3)
    st = ProblemSetting(3)
    wc = extract(np.zeros((6, 6)), pep.pep_basis(3))
    rep = audit(wc, sch, st, objective=0.0)
    assert rep.passed
    assert rep.regret == 0.0


@pytest.mark.parametrize("L,D", [(1.0, 1.0), (2.0, 3.0)])
def test_single_round(L, D):
    st = ProblemSetting(1, L, D)
    wc = worst_case_T1(st)
    rep = audit(wc, ParamSchedule.empty(1), st, objective=L * D)
    assert rep.passed
    assert rep.regret == pytest.approx(L * D)


def test_replay_other_schedule_lower_bounds():
    sch, st, res = _solved("ofw-new", 4)
    wc = extract(res, pep.pep_basis(4))
    other = preset("hazan-alg27", 4)
    _, reg = witness.replay(wc, other)
    assert reg <= pep.tight_bound(other, st).value + 1e-4


def test_audit_size_mismatch():
    sch, st, res = _solved("ofw-new", 4)
    wc = extract(res, pep.pep_basis(4))
    rep = audit(wc, preset("ofw-new", 3), ProblemSetting(3))
    assert not rep.passed


def test_json_round_trip(tmp_path):
    _, _, res = _solved("ofw-new", 3)
    wc = extract(res, pep.pep_basis(3))
    path = tmp_path / "w.json"
    wc.save(path)
    back = WorstCase.load(path)
    np.testing.assert_array_equal(back.grads, wc.grads)
    np.testing.assert_array_equal(back.points(), wc.points())
    assert back.spectrum["retained"] == wc.d


def test_multiround_witness():
    st = ProblemSetting(3)
    prob = pep.build_joint_opt(3, st, rounds=2)
    rec = pep.recover_params(prob, prob.solve())
    res = pep.tight_bound(rec.schedule, st)
    wc = extract(res, pep.pep_basis(3, 2))
    assert wc.atoms.shape[0] == 4
    rep = audit(wc, rec.schedule, st, objective=res.value)
    assert rep.passed, rep.failures
