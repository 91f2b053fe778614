"""Randomized invariant checks shared by the unit tests and the acceptance run.

Every function runs ``trials`` seeded experiments and returns the largest
violation beyond the stated tolerance (``<= 0`` means the invariant held
everywhere).
"""

import numpy as np

from ofwpep import bounds
from ofwpep import simulate as sim
from ofwpep.model import ofw_scalars, preset
from ofwpep.simulate import Domain


def _random_grads(rng, T, d, L):
    g = rng.standard_normal((T, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * L * rng.random((T, 1))


def _coupled(rng, T, d, L, D):
    dom = Domain.ball(rng.standard_normal(d), D / 2.0)
    x1 = dom.sample(rng)[0]
    grads = _random_grads(rng, T, d, L)
    eta, sigma = ofw_scalars(T, L, D)
    ofw = sim.run_ofw_fixed(eta, sigma, dom, x1, grads)
    ftrl = sim.run_ftrl(eta, dom, x1, grads)
    return dom, ofw, ftrl, eta


def ftrl_step_violation(trials=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        T, d = int(rng.integers(2, 30)), int(rng.integers(1, 5))
        L, D = rng.uniform(0.2, 3.0, 2)
        eta = rng.uniform(0.05, 2.0) * D / L
        dom = Domain.ball(rng.standard_normal(d), D / 2.0)
        y1 = dom.sample(rng)[0]
        tr = sim.run_ftrl(eta, dom, y1, _random_grads(rng, T, d, L))
        for t in range(1, T + 1):
            inc = bounds.potential_psi(t, tr, eta) - bounds.potential_psi(t - 1, tr, eta)
            budget = 0.5 * eta * float(tr.grads[t - 1] @ tr.grads[t - 1])
            worst = max(worst, inc - budget)
    return worst - 1e-9


def lemma1_step_violation(trials=100, seed=1):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        T, d = int(rng.integers(3, 40)), int(rng.integers(1, 5))
        L, D = rng.uniform(0.2, 3.0, 2)
        _, ofw, ftrl, eta = _coupled(rng, T, d, L, D)
        cg, cv, _ = bounds.lemma1_coefficients(T, L, D)
        for t in range(1, T + 1):
            inc = bounds.potential_phi(t, ofw, ftrl, eta) - bounds.potential_phi(t - 1, ofw, ftrl, eta)
            g = ofw.grads[t - 1]
            xv = ofw.x[t - 1] - ofw.v[t - 1]
            worst = max(worst, inc - cg * float(g @ g) - cv * float(xv @ xv))
    return worst - 1e-8


def translation_violation(trials=100, seed=2):
    rng = np.random.default_rng(seed)
    worst = 0.0
    names = ("ofw-new", "hazan-thm44", "hazan-alg27", "anytime-ofw-new")
    for i in range(trials):
        T, d = int(rng.integers(2, 12)), int(rng.integers(1, 5))
        kind = i % 3
        if kind == 0:
            dom = Domain.ball(rng.standard_normal(d), rng.uniform(0.2, 2))
        elif kind == 1:
            lo = rng.standard_normal(d)
            dom = Domain.box(lo, lo + rng.uniform(0.1, 2, d))
        else:
            dom = Domain.hull(rng.standard_normal((int(rng.integers(2, 7)), d)))
        c = rng.standard_normal(d) * 10
        x1, x_star = dom.sample(rng, 2)
        grads = rng.standard_normal((T, d))
        sch = preset(names[i % len(names)], T)
        a = sim.run_general(sch, dom, x1, grads)
        b = sim.run_general(sch, dom.translate(c), x1 + c, grads)
        worst = max(worst,
                    np.abs(a.dirs - b.dirs).max(initial=0.0) / 1e-10,
                    np.abs(a.played + c - b.played).max() / 1e-9,
                    abs(sim.regret(a, x_star) - sim.regret(b, x_star + c)) / 1e-9)
    return worst - 1.0  # ratios to the tolerances, shifted so that <= 0 passes


def lmo_violation(trials=100, seed=3):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for i in range(trials):
        d = int(rng.integers(1, 6))
        kind = i % 4
        if kind == 0:
            dom = Domain.ball(rng.standard_normal(d), rng.uniform(0.1, 3))
        elif kind == 1:
            lo = rng.standard_normal(d)
            dom = Domain.box(lo, lo + rng.uniform(0.0, 2, d))
        elif kind == 2:
            dom = Domain.simplex(d)
        else:
            dom = Domain.hull(rng.standard_normal((int(rng.integers(1, 8)), d)))
        g = rng.standard_normal(d)
        v = dom.lmo(g)
        U = dom.sample(rng, 100)
        worst = max(worst, float(np.max(g @ v - U @ g)) - 1e-9)
    return worst


def hull_membership_violation(trials=100, seed=4):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    names = ("ofw-new", "hazan-thm44", "hazan-alg27", "anytime-ofw-new", "anytime-hazan-alg27")
    for i in range(trials):
        T, d = int(rng.integers(2, 20)), int(rng.integers(1, 5))
        kind = i % 3
        if kind == 0:
            dom = Domain.hull(rng.standard_normal((int(rng.integers(2, 8)), d)))
        elif kind == 1:
            dom = Domain.simplex(d + 1)
        else:
            dom = Domain.ball(rng.standard_normal(d), rng.uniform(0.1, 2))
        x1 = dom.sample(rng)[0]
        tr = sim.run_general(preset(names[i % len(names)], T), dom, x1,
                             rng.standard_normal((T, dom.d)))
        worst = max(worst, max(dom.residual(x) for x in tr.played) - 1e-8)
    return worst


ALL = {
    "ftrl_potential_step": ftrl_step_violation,
    "lemma1_step": lemma1_step_violation,
    "translation_equivariance": translation_violation,
    "lmo_optimality": lmo_violation,
    "hull_membership": hull_membership_violation,
}
