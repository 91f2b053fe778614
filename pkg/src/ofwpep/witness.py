"""Explicit adversarial instances recovered from solved Gram matrices, and their audit."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import MultiRoundSchedule, ParamSchedule, ProblemSetting
from .pep import atom_labels, pep_basis
from .simulate import Domain, Trace, run_general, run_multiround, regret, sup_regret

PSD_TOL = 1e-6
LMO_TOL = 1e-6
NORM_TOL = 1e-6


@dataclass
class WorstCase:
    """Gradients, oracle atoms and comparator in ``R^d``; ``x_1`` is the origin.

    The domain is the convex hull of ``x_1``, the atoms and ``x_*``.
    """

    grads: np.ndarray
    atoms: np.ndarray
    x_star: np.ndarray
    r: int = 1
    spectrum: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.grads.shape[0]

    @property
    def d(self):
        return self.grads.shape[1]

    @property
    def x1(self):
        return np.zeros(self.d)

    def points(self):
        return np.vstack([self.x1[None, :], self.atoms.reshape(-1, self.d), self.x_star[None, :]])

    def domain(self) -> Domain:
        return Domain.hull(self.points())

    def gram(self):
        P = np.vstack([self.grads, self.atoms.reshape(-1, self.d), self.x_star[None, :]])
        return P @ P.T

    def to_json_dict(self):
        return {"T": self.T, "r": self.r, "d": self.d, "grads": self.grads.tolist(),
                "atoms": self.atoms.tolist(), "x_star": self.x_star.tolist(),
                "x1": self.x1.tolist(), "hull": self.points().tolist(), "spectrum": self.spectrum}

    @classmethod
    def from_json_dict(cls, d):
        dim = int(d["d"])
        return cls(np.asarray(d["grads"], dtype=float).reshape(-1, dim),
                   np.asarray(d["atoms"], dtype=float).reshape(-1, dim),
                   np.asarray(d["x_star"], dtype=float).ravel(), int(d.get("r", 1)),
                   d.get("spectrum", {}))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _gram_of(solution):
    if isinstance(solution, np.ndarray):
        return solution
    for attr in ("gram", "Z"):
        G = getattr(solution, attr, None)
        if G is not None:
            return np.asarray(G)
    raise TypeError("cannot find a Gram matrix in the given solution")


def extract(solution, basis=None, rank_tol=1e-7, T=None, r=1) -> WorstCase:
    """Factor a solved Gram matrix into explicit vectors.

    ``basis`` (or ``T`` and ``r``) must describe the lifted coordinates in the
    order used by :mod:`ofwpep.pep`: gradients, atoms, ``x_*``.
    """
    G = _gram_of(solution)
    G = 0.5 * (G + G.T)
    n = G.shape[0]
    if basis is None:
        if T is None:
            raise ValueError("need a basis or a horizon")
        basis = pep_basis(T, r)
    if basis.dim != n:
        raise ValueError("basis and Gram matrix sizes differ")
    labels = list(basis.labels)
    T = sum(1 for lab in labels if lab.startswith("g_"))
    n_atoms = n - T - 1
    if T > 1:
        r = n_atoms // (T - 1)
    if labels != list(pep_basis(T, r).labels):
        raise ValueError("basis labels do not follow the gradient/atom/comparator layout")
    w, U = np.linalg.eigh(G)
    wmax = max(float(w[-1]), 0.0)
    if w[0] < -PSD_TOL * max(1.0, wmax):
        raise ValueError(f"Gram matrix is indefinite (min eigenvalue {w[0]:.3e})")
    keep = w > rank_tol * wmax if wmax > 0 else np.zeros(n, dtype=bool)
    if not np.any(keep):
        P = np.zeros((1, n))
    else:
        P = np.sqrt(w[keep])[:, None] * U[:, keep].T
        P = P[::-1]  # leading direction first
    cols = P.T
    spectrum = {"eigenvalues": w[::-1].tolist(), "retained": int(keep.sum()), "rank_tol": rank_tol}
    return WorstCase(cols[:T].copy(), cols[T:T + n_atoms].copy(), cols[T + n_atoms].copy(), r, spectrum)


@dataclass
class AuditReport:
    checks: dict
    regret: float
    objective: float | None
    replay_trace: Trace | None = None

    @property
    def passed(self):
        return all(c["ok"] for c in self.checks.values())

    @property
    def failures(self):
        return [k for k, c in self.checks.items() if not c["ok"]]

    def to_dict(self):
        return {"passed": self.passed, "regret": self.regret, "objective": self.objective,
                "checks": self.checks}


def _as_mr(schedule):
    return schedule if isinstance(schedule, MultiRoundSchedule) else schedule.to_multiround()


def _directions(wc: WorstCase, sch: MultiRoundSchedule):
    A = sch.n_atoms
    out = np.zeros((A, wc.d))
    for a in range(1, A + 1):
        t = sch.atom_time(a)
        out[a - 1] = sch.eta[a, 1:t + 1] @ wc.grads[:t] + sch.beta[a, 1:a] @ wc.atoms[: a - 1]
    return out


def audit(wc: WorstCase, schedule, setting: ProblemSetting, objective=None,
          lmo_tol=LMO_TOL) -> AuditReport:
    """Feasibility, oracle consistency and replay of an extracted instance.

    The oracle check tolerance is relative to ``max(1, ||dir|| D)``; the replay
    uses the same tolerance to break ties toward the recorded atoms.  Never raises
    on a failed check.
    """
    sch = _as_mr(schedule)
    checks = {}
    if sch.T != wc.T or sch.n_atoms != wc.atoms.shape[0]:
        checks["sizes"] = {"ok": False, "detail": "schedule and witness sizes differ"}
        return AuditReport(checks, float("nan"), objective)
    L, D = setting.L, setting.D
    norms = np.linalg.norm(wc.grads, axis=1)
    checks["gradient_norms"] = {"ok": bool(np.all(norms <= L + NORM_TOL)),
                                "max": float(norms.max(initial=0.0))}
    pts = wc.points()
    diffs = pts[:, None, :] - pts[None, :, :]
    diam = float(np.sqrt((diffs ** 2).sum(-1)).max())
    checks["diameter"] = {"ok": bool(diam <= D + NORM_TOL), "max": diam}

    dirs = _directions(wc, sch)
    worst = 0.0
    worst_at = None
    for a in range(sch.n_atoms):
        scale = max(1.0, float(np.linalg.norm(dirs[a])) * D)
        gaps = (wc.atoms[a] - pts) @ dirs[a] / scale
        k = int(np.argmax(gaps))
        if gaps[k] > worst:
            worst, worst_at = float(gaps[k]), (a + 1, k)
    checks["lmo_consistency"] = {"ok": bool(worst <= lmo_tol), "max_violation": worst,
                                 "at": worst_at}

    dom = wc.domain()
    # ties are broken toward the recorded atoms, relative to each direction's scale
    tie = lmo_tol * max(1.0, float(np.abs(dirs).max(initial=0.0)) * D * np.sqrt(wc.d))
    try:
        tr = run_multiround(sch, dom, wc.x1, wc.grads, prefer=list(wc.atoms), tie_tol=tie)
    except ValueError as exc:
        checks["replay"] = {"ok": False, "detail": str(exc)}
        return AuditReport(checks, float("nan"), objective)
    dev = float(np.abs(tr.v - wc.atoms).max(initial=0.0))
    checks["replay_atoms"] = {"ok": bool(dev <= 1e-9), "max_deviation": dev}
    reg = regret(tr, wc.x_star)
    if objective is not None:
        tol = 1e-4 * (1.0 + abs(objective))
        checks["replay_regret"] = {"ok": bool(abs(reg - objective) <= tol), "regret": reg,
                                   "objective": objective, "tolerance": tol}
    return AuditReport(checks, reg, objective, tr)


def replay(wc: WorstCase, schedule):
    """Run a (possibly different) schedule on the witness instance.

    Returns the trace and the largest regret over the witness domain.
    """
    dom = wc.domain()
    if isinstance(schedule, ParamSchedule):
        tr = run_general(schedule, dom, wc.x1, wc.grads)
    else:
        tr = run_multiround(schedule, dom, wc.x1, wc.grads)
    return tr, sup_regret(tr, dom)


def worst_case_T1(setting: ProblemSetting) -> WorstCase:
    """One-round instance: the played point is ``x_1`` whatever the algorithm does."""
    return WorstCase(np.array([[setting.L]]), np.zeros((0, 1)), np.array([-setting.D]), 1,
                     {"analytic": True})


__all__ = ["WorstCase", "AuditReport", "extract", "audit", "replay", "worst_case_T1", "atom_labels"]
