"""Gram-lifted semidefinite programs for the worst-case regret of online Frank-Wolfe schemes.

All builders place ``x_1`` at the origin.  The lifted coordinates are the
gradients ``g_1..g_T``, the oracle atoms (in lexicographic order) and the
comparator ``x_*``.  Symmetric outer products follow ``u . v = (u v' + v u')/2``.

Two kinds of problems are emitted:

* :class:`GramSdp` -- ``maximize tr(C G)`` over Gram matrices ``G >= 0`` subject
  to ``tr(A_i G) <= b_i`` (or ``=``).  Solving it also yields the Lagrange
  multipliers, so primal value, dual value and certified bound come together.
* :class:`LmiSdp` -- ``minimize c'x`` subject to ``F0 + sum_i x_i F_i >= 0`` and
  linear side constraints.  Dual-side problems (fixed-schedule duals, the joint
  parameter optimization, the one-step potential design) are of this type.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .model import MultiRoundSchedule, ParamSchedule, ProblemSetting

ZERO_TOL = 1e-14


def sym(u, v):
    """Symmetric outer product."""
    return 0.5 * (np.outer(u, v) + np.outer(v, u))


@dataclass(frozen=True)
class GramBasis:
    labels: tuple

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be unique")

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def e(self, label):
        out = np.zeros(self.dim)
        out[self.index(label)] = 1.0
        return out

    def zero(self):
        return np.zeros(self.dim)


@dataclass
class GramConstraint:
    matrix: np.ndarray
    rhs: float
    sense: str  # "<=" or "="
    tag: str  # lipschitz | diameter | boundary | linkage
    name: str


# ---------------------------------------------------------------------------
# results


@dataclass
class PepResult:
    """Outcome of solving a Gram SDP or an LMI problem."""

    value: float
    primal_value: float | None
    dual_value: float | None
    status: str
    gram: np.ndarray | None
    multipliers: dict
    certified_upper: float | None
    solution: sdp.SdpSolution
    meta: dict = field(default_factory=dict)

    @property
    def gap(self):
        if self.primal_value is None or self.dual_value is None:
            return None
        return self.dual_value - self.primal_value

    def summary(self):
        return {"value": self.value, "primal": self.primal_value, "dual": self.dual_value,
                "gap": self.gap, "status": self.status, "certified_upper": self.certified_upper,
                "iterations": self.solution.iterations, "residuals": self.solution.residuals}


def _certified(c, x, F0, F, nonneg, trace_bound):
    """Upper bound valid for every primal Gram matrix with trace <= trace_bound."""
    if trace_bound is None:
        return None
    x = x.copy()
    x[nonneg] = np.maximum(x[nonneg], 0.0)
    S = F0 + np.tensordot(x, F, axes=1)
    lmin = float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])
    return float(c @ x) + max(0.0, -lmin) * trace_bound


# ---------------------------------------------------------------------------
# problem containers


@dataclass
class GramSdp:
    basis: GramBasis
    objective: np.ndarray
    constraints: list
    direction: str = "max"
    meta: dict = field(default_factory=dict)

    def counts(self):
        out = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out

    def evaluate(self, G):
        return float(np.sum(self.objective * G))

    def violations(self, G):
        out = {}
        for c in self.constraints:
            lhs = float(np.sum(c.matrix * G))
            out[c.name] = lhs - c.rhs if c.sense == "<=" else abs(lhs - c.rhs)
        return out

    def to_lmi(self, prune=True):
        """Lagrangian form ``min b'y  s.t.  sum y_i A_i - C >= 0`` (``C`` negated for min)."""
        keep = []
        for c in self.constraints:
            if prune and c.sense == "<=" and np.abs(c.matrix).max() <= ZERO_TOL and c.rhs >= 0:
                continue
            keep.append(c)
        sgn = 1.0 if self.direction == "max" else -1.0
        n = self.basis.dim
        F = np.array([c.matrix for c in keep]).reshape(len(keep), n, n)
        lmi = sdp.LmiProblem(np.array([c.rhs for c in keep]), -sgn * self.objective, F,
                             np.array([c.sense == "<=" for c in keep]))
        return lmi, keep

    def solve(self, tol=1e-8, max_iter=150) -> PepResult:
        lmi, keep = self.to_lmi()
        if not keep:
            # only G = 0 type problems reach here; the objective must be <= 0 on the PSD cone
            lmax = float(np.linalg.eigvalsh(self.objective)[-1])
            if lmax > 0:
                raise ValueError("unbounded Gram SDP (no active constraints)")
            sol = sdp.SdpSolution(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0), 0, 0, 0.0,
                                  0.0, "optimal", 0, {"primal": 0.0, "dual": 0.0, "gap": 0.0})
            return PepResult(0.0, 0.0, 0.0, "optimal", np.zeros((self.basis.dim,) * 2), {}, 0.0, sol)
        sol = sdp.solve(lmi.to_cone(), tol=tol, max_iter=max_iter)
        Z = sol.Z
        sgn = 1.0 if self.direction == "max" else -1.0
        primal = float(np.sum(self.objective * Z))
        dual = sgn * float(sol.primal_objective)
        mult = {c.name: float(v) for c, v in zip(keep, sol.x)}
        cert = _certified(lmi.c, sol.x, lmi.F0, lmi.F, lmi.nonneg, self.meta.get("trace_bound"))
        if cert is not None and self.direction != "max":
            cert = None
        return PepResult(primal, primal, dual, sol.status, Z, mult, cert, sol,
                         {"basis": list(self.basis.labels)})

    def to_json_dict(self, tol=0.0):
        def entries(M):
            i, j = np.nonzero(np.triu(np.abs(M) > tol))
            return [[int(a), int(b), float(M[a, b])] for a, b in zip(i, j)]

        return {
            "dim": self.basis.dim,
            "basis": list(self.basis.labels),
            "direction": self.direction,
            "objective": entries(self.objective),
            "constraints": [{"entries": entries(c.matrix), "rhs": c.rhs, "sense": c.sense,
                             "tag": c.tag, "name": c.name} for c in self.constraints],
        }

    @classmethod
    def from_json_dict(cls, d):
        n = d["dim"]

        def mat(entries):
            M = np.zeros((n, n))
            for i, j, v in entries:
                M[i, j] = v
                M[j, i] = v
            return M

        cons = [GramConstraint(mat(c["entries"]), float(c["rhs"]), c["sense"], c.get("tag", ""),
                               c.get("name", f"c{k}")) for k, c in enumerate(d["constraints"])]
        labels = d.get("basis") or [f"e{i}" for i in range(n)]
        return cls(GramBasis(tuple(labels)), mat(d["objective"]), cons, d.get("direction", "max"))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)


@dataclass
class LmiSdp:
    """``minimize c'x  s.t.  F0 + sum x_i F_i >= 0``, sign and linear constraints.

    ``blocks`` maps block names to index arrays into ``x``.
    """

    basis: GramBasis
    names: list
    c: np.ndarray
    F0: np.ndarray
    F: np.ndarray
    nonneg: np.ndarray
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    blocks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def lmi(self):
        return sdp.LmiProblem(self.c, self.F0, self.F, self.nonneg, self.A_in, self.b_in,
                              self.A_eq, self.b_eq)

    def slack(self, x):
        return self.F0 + np.tensordot(x, self.F, axes=1)

    def solve(self, tol=1e-8, max_iter=150) -> PepResult:
        lmi = self.lmi()
        sol = sdp.solve(lmi.to_cone(), tol=tol, max_iter=max_iter)
        mult = {name: float(v) for name, v in zip(self.names, sol.x)}
        cert = _certified(self.c, sol.x, self.F0, self.F, self.nonneg, self.meta.get("trace_bound"))
        # the PSD multiplier of the LMI is a primal Gram matrix; its value is -tr(F0 Z)
        # when the F_i carry no constant part, which holds for the fixed-schedule duals
        Z = sol.Z
        primal = -float(np.sum(self.F0 * Z)) if self.meta.get("gram_primal", False) else None
        return PepResult(float(sol.primal_objective), primal, float(sol.primal_objective), sol.status,
                         Z, mult, cert, sol, {"x": sol.x})

    def block(self, x, name):
        return x[self.blocks[name]]


# ---------------------------------------------------------------------------
# fixed-schedule problems


def _as_multiround(schedule):
    if isinstance(schedule, MultiRoundSchedule):
        return schedule
    if isinstance(schedule, ParamSchedule):
        return schedule.to_multiround()
    raise TypeError("expected a ParamSchedule or MultiRoundSchedule")


def atom_labels(T, r):
    if r == 1:
        return [f"v_{t}" for t in range(1, T)]
    return [f"v_{t},{k}" for t in range(1, T) for k in range(1, r + 1)]


def pep_basis(T, r=1):
    return GramBasis(tuple([f"g_{t}" for t in range(1, T + 1)] + atom_labels(T, r) + ["x_*"]))


class _Geometry:
    """Coordinates of the lifted quantities for a given schedule."""

    def __init__(self, sch: MultiRoundSchedule):
        self.sch = sch
        T, r, A = sch.T, sch.r, sch.n_atoms
        self.T, self.r, self.A = T, r, A
        self.basis = pep_basis(T, r)
        n = self.basis.dim
        I = np.eye(n)
        self.g = [None] + [I[t - 1] for t in range(1, T + 1)]
        self.v = [None] + [I[T + a - 1] for a in range(1, A + 1)]
        self.xstar = I[T + A]
        self.x1 = np.zeros(n)
        self.vlabels = [None] + atom_labels(T, r)

    def direction(self, a):
        sch = self.sch
        t = sch.atom_time(a)
        d = np.zeros(self.basis.dim)
        for s in range(1, t + 1):
            d += sch.eta[a, s] * self.g[s]
        for b in range(1, a):
            d += sch.beta[a, b] * self.v[b]
        return d

    def iterate(self, t):
        x = np.zeros(self.basis.dim)
        for b in range(1, self.A + 1):
            x += self.sch.gamma[t, b] * self.v[b]
        return x

    def objective(self):
        C = np.zeros((self.basis.dim,) * 2)
        for t in range(1, self.T + 1):
            C += sym(self.g[t], self.iterate(t) - self.xstar)
        return C

    def points(self, with_iterates):
        pts = [("x_1", self.x1)] + [(self.vlabels[a], self.v[a]) for a in range(1, self.A + 1)]
        pts.append(("x_*", self.xstar))
        if with_iterates:
            for t in range(2, self.T + 1):
                pts.append((f"x_{t}", self.iterate(t)))
        return pts


def _fixed_constraints(sch: MultiRoundSchedule, setting: ProblemSetting, relaxed=False):
    geo = _Geometry(sch)
    if sch.T != setting.T:
        raise ValueError(f"schedule horizon {sch.T} differs from setting horizon {setting.T}")
    with_iterates = not sch.hull_safe
    L2, D2 = setting.L ** 2, setting.D ** 2
    cons = []
    for t in range(1, geo.T + 1):
        cons.append(GramConstraint(np.outer(geo.g[t], geo.g[t]), L2, "<=", "lipschitz", f"lip[g_{t}]"))
    pts = geo.points(with_iterates)
    for (la, pa), (lb, pb) in itertools.combinations(pts, 2):
        d = pa - pb
        if np.abs(d).max() <= ZERO_TOL:
            continue
        cons.append(GramConstraint(np.outer(d, d), D2, "<=", "diameter", f"diam[{la},{lb}]"))
    for a in range(1, geo.A + 1):
        dir_a = geo.direction(a)
        va = geo.v[a]
        if relaxed:
            opp = [(geo.vlabels[b], geo.v[b]) for b in range(a + 1, geo.A + 1)] + [("x_*", geo.xstar)]
        else:
            opp = [(lab, p) for lab, p in pts if lab != geo.vlabels[a]]
        for lab, u in opp:
            if np.abs(va - u).max() <= ZERO_TOL:
                continue
            cons.append(GramConstraint(sym(dir_a, va - u), 0.0, "<=", "boundary",
                                       f"brd[{geo.vlabels[a]},{lab}]"))
    return geo, cons


def trace_bound(setting: ProblemSetting, n_points):
    """Upper bound on tr(G): every gradient has norm <= L and every point is within D of x_1."""
    return setting.T * setting.L ** 2 + n_points * setting.D ** 2


def build_primal(schedule, setting: ProblemSetting) -> GramSdp:
    """Worst-case regret of a fixed schedule as a Gram SDP (maximize)."""
    sch = _as_multiround(schedule)
    geo, cons = _fixed_constraints(sch, setting)
    return GramSdp(geo.basis, geo.objective(), cons, "max",
                   {"T": sch.T, "r": sch.r, "hull_safe": sch.hull_safe,
                    "trace_bound": trace_bound(setting, geo.A + 1)})


def _dual_from_constraints(geo, cons, setting, kind):
    n = geo.basis.dim
    names = [c.name for c in cons]
    F = np.array([c.matrix for c in cons]).reshape(len(cons), n, n)
    c = np.array([c.rhs for c in cons])
    return LmiSdp(geo.basis, names, c, -geo.objective(), F, np.ones(len(cons), dtype=bool),
                  meta={"kind": kind, "T": geo.T, "r": geo.r, "gram_primal": True,
                        "tags": [k.tag for k in cons],
                        "trace_bound": trace_bound(setting, geo.A + 1)})


def build_dual(schedule, setting: ProblemSetting) -> LmiSdp:
    """Lagrange dual of :func:`build_primal`: minimize the weighted bounds subject to
    ``S = sum lambda_i A_i - C >= 0``."""
    sch = _as_multiround(schedule)
    geo, cons = _fixed_constraints(sch, setting)
    cons = [k for k in cons if not (k.sense == "<=" and np.abs(k.matrix).max() <= ZERO_TOL)]
    return _dual_from_constraints(geo, cons, setting, "dual")


def build_relaxed_dual(schedule, setting: ProblemSetting) -> LmiSdp:
    """Dual keeping only boundary multipliers of each atom against later atoms and ``x_*``."""
    sch = _as_multiround(schedule)
    geo, cons = _fixed_constraints(sch, setting, relaxed=True)
    cons = [k for k in cons if not (k.sense == "<=" and np.abs(k.matrix).max() <= ZERO_TOL)]
    return _dual_from_constraints(geo, cons, setting, "relaxed-dual")


def tight_bound(schedule, setting: ProblemSetting, tol=1e-8) -> PepResult:
    """Solve the primal (and with it the dual) for one schedule."""
    return build_primal(schedule, setting).solve(tol=tol)


# ---------------------------------------------------------------------------
# joint optimization of the schedule


def build_joint_opt(T, setting: ProblemSetting, beta_zero=False, rounds=1) -> LmiSdp:
    """Linear SDP over the reparametrized schedule and the multipliers.

    Variables: ``B[a, s]`` (coefficient of ``g_s . v_a``, ``s <= time(a)``),
    ``C[a, b]`` (coefficient of ``v_b . v_a``, ``b < a``), ``gamma[t, b]``,
    ``lip[t]`` and ``diam[{u, w}]``; atom ``A+1`` is ``x_*`` (time ``T``).
    """
    if T < 2:
        raise ValueError("joint optimization needs T >= 2")
    if setting.T != T:
        raise ValueError("setting horizon differs from T")
    r = int(rounds)
    if r < 1:
        raise ValueError("rounds must be positive")
    A = (T - 1) * r
    basis = pep_basis(T, r)
    n = basis.dim
    I = np.eye(n)
    g = [None] + [I[t - 1] for t in range(1, T + 1)]
    v = [None] + [I[T + a - 1] for a in range(1, A + 2)]  # v[A+1] is x_*
    time = [None] + [(a - 1) // r + 1 for a in range(1, A + 1)] + [T]
    labels = [None] + atom_labels(T, r) + ["x_*"]

    names, mats, cost, nonneg = [], [], [], []
    blocks = {}

    def add(name, M, cst, nn):
        names.append(name)
        mats.append(M)
        cost.append(cst)
        nonneg.append(nn)
        return len(names) - 1

    bidx = {}
    for a in range(1, A + 2):
        for s in range(1, time[a] + 1):
            bidx[a, s] = add(f"B[{labels[a]},g_{s}]", sym(g[s], v[a]), 0.0, False)
    cidx = {}
    if not beta_zero:
        for a in range(2, A + 2):
            for b in range(1, a):
                cidx[a, b] = add(f"C[{labels[a]},{labels[b]}]", sym(v[b], v[a]), 0.0, False)
    gidx = {}
    for t in range(2, T + 1):
        for b in range(1, (t - 1) * r + 1):
            gidx[t, b] = add(f"gamma[{t},{labels[b]}]", -sym(g[t], v[b]), 0.0, True)
    lidx = [add(f"lip[g_{t}]", np.outer(g[t], g[t]), setting.L ** 2, True) for t in range(1, T + 1)]
    pts = [("x_1", np.zeros(n))] + [(labels[a], v[a]) for a in range(1, A + 2)]
    didx = []
    for (la, pa), (lb, pb) in itertools.combinations(pts, 2):
        d = pa - pb
        didx.append(add(f"diam[{la},{lb}]", np.outer(d, d), setting.D ** 2, True))
    blocks = {"B": np.array(list(bidx.values()), dtype=int),
              "C": np.array(list(cidx.values()), dtype=int),
              "gamma": np.array(list(gidx.values()), dtype=int),
              "lip": np.array(lidx, dtype=int), "diam": np.array(didx, dtype=int)}

    q = len(names)
    F0 = np.zeros((n, n))
    for t in range(1, T + 1):
        F0 += sym(g[t], v[A + 1])
    F = np.array(mats)

    eq_rows = []
    for s in range(1, T + 1):
        row = np.zeros(q)
        for (a, ss), k in bidx.items():
            if ss == s:
                row[k] = 1.0
        eq_rows.append(row)
    for b in range(1, A + 1):
        if beta_zero:
            break
        row = np.zeros(q)
        for (a, bb), k in cidx.items():
            if bb == b:
                row[k] = 1.0
        eq_rows.append(row)
    in_rows = []
    for t in range(2, T + 1):
        row = np.zeros(q)
        for (tt, b), k in gidx.items():
            if tt == t:
                row[k] = 1.0
        in_rows.append(row)
    A_eq = np.array(eq_rows).reshape(-1, q)
    A_in = np.array(in_rows).reshape(-1, q)
    meta = {"kind": "joint-opt", "T": T, "r": r, "beta_zero": bool(beta_zero), "setting": setting,
            "bidx": bidx, "cidx": cidx, "gidx": gidx,
            "trace_bound": trace_bound(setting, A + 1)}
    return LmiSdp(basis, names, np.array(cost), F0, F, np.array(nonneg, dtype=bool),
                  A_in, np.ones(A_in.shape[0]), A_eq, np.zeros(A_eq.shape[0]), blocks, meta)


@dataclass
class RecoveredParams:
    """Schedule recovered from an optimal reparametrized point."""

    schedule: object
    eta: np.ndarray
    beta: np.ndarray
    lambda_brd: np.ndarray
    method: str
    undefined_rows: list
    residual: float
    gamma: np.ndarray

    def to_dict(self):
        return {"method": self.method, "undefined_rows": self.undefined_rows,
                "residual": self.residual, "min_lambda_brd": float(np.min(self.lambda_brd, initial=0.0)),
                "schedule": self.schedule.to_json_dict()}


def _unpack_joint(problem: LmiSdp, x):
    m = problem.meta
    T, r = m["T"], m["r"]
    A = (T - 1) * r
    B = np.zeros((A + 2, T + 1))
    C = np.zeros((A + 2, A + 2))
    G = np.zeros((T + 1, A + 1))
    for (a, s), k in m["bidx"].items():
        B[a, s] = x[k]
    for (a, b), k in m["cidx"].items():
        C[a, b] = x[k]
    for (t, b), k in m["gidx"].items():
        G[t, b] = x[k]
    return T, r, A, B, C, G


def _reparam_residual(T, r, B, C, eta, beta, lam):
    """Max deviation of the change-of-variables equations for given (eta, beta, lambda)."""
    A = (T - 1) * r
    time = [0] + [(a - 1) // r + 1 for a in range(1, A + 1)] + [T]
    Lam = lam.sum(axis=1)
    res = 0.0
    for a in range(1, A + 2):
        for s in range(1, time[a] + 1):
            val = (eta[a, s] if a <= A else 0.0) * Lam[a]
            val -= sum(eta[j, s] * lam[j, a] for j in range(1, a) if time[j] >= s)
            res = max(res, abs(val - B[a, s]))
        for b in range(1, a):
            val = (beta[a, b] if a <= A else 0.0) * Lam[a]
            val -= sum(beta[j, b] * lam[j, a] for j in range(b + 1, a))
            res = max(res, abs(val - C[a, b]))
    return res


def recover_params(problem: LmiSdp, result: PepResult, method="auto", tol=1e-9) -> RecoveredParams:
    """Invert the change of variables.

    ``method="unit-eta"`` fixes every gradient weight to 1 and reads the
    boundary multipliers off consecutive differences of ``B`` (one-call rounds
    only).  ``method="uniform"`` fixes every boundary multiplier to 1 and
    solves for the weights; it always yields nonnegative multipliers.  ``auto``
    tries the first and falls back to the second when a multiplier is
    negative or a row is undefined.
    """
    x = result.meta["x"]
    T, r, A, B, C, Gm = _unpack_joint(problem, x)
    time = [0] + [(a - 1) // r + 1 for a in range(1, A + 1)] + [T]
    undefined = []
    if method in ("auto", "unit-eta") and r == 1:
        eta = np.zeros((A + 2, T + 1))
        beta = np.zeros((A + 2, A + 2))
        lam = np.zeros((A + 2, A + 2))
        for t in range(1, A + 1):
            eta[t, 1:t + 1] = 1.0
        for t in range(2, A + 2):
            for s in range(1, t):
                lam[s, t] = B[t, s + 1] - B[t, s]
        for t in range(2, A + 1):
            if abs(B[t, t]) < tol:
                undefined.append(t)
                continue
            for s in range(1, t):
                acc = C[t, s] + sum(beta[j, s] * lam[j, t] for j in range(s + 1, t))
                beta[t, s] = acc / B[t, t]
        ok = not undefined and lam[1:, 1:].min(initial=0.0) >= -1e-8
        if ok or method == "unit-eta":
            res = _reparam_residual(T, r, B, C, eta, beta, lam)
            return _finish(T, r, A, eta, beta, lam, Gm, "unit-eta", undefined, res, problem)
    # uniform multipliers
    lam = np.zeros((A + 2, A + 2))
    for a in range(1, A + 1):
        lam[a, a + 1:A + 2] = 1.0
    Lam = lam.sum(axis=1)
    eta = np.zeros((A + 2, T + 1))
    beta = np.zeros((A + 2, A + 2))
    for a in range(1, A + 1):
        for s in range(1, time[a] + 1):
            eta[a, s] = (B[a, s] + sum(eta[j, s] for j in range(1, a) if time[j] >= s)) / Lam[a]
        for b in range(1, a):
            beta[a, b] = (C[a, b] + sum(beta[j, b] for j in range(b + 1, a))) / Lam[a]
    res = _reparam_residual(T, r, B, C, eta, beta, lam)
    return _finish(T, r, A, eta, beta, lam, Gm, "uniform", [], res, problem)


def _finish(T, r, A, eta, beta, lam, Gm, method, undefined, res, problem):
    gamma = np.clip(Gm, 0.0, None)
    meta = {"name": f"joint-opt{'-beta0' if problem.meta['beta_zero'] else ''}"
                    f"{'' if r == 1 else f'-r{r}'}",
            "recovery": method, "T": T, "r": r}
    if r == 1:
        sch = ParamSchedule(T, eta[:T, :T], beta[:T, :T], gamma[:, :T], meta)
    else:
        sch = MultiRoundSchedule(T, r, eta[:A + 1, :], beta[:A + 1, :A + 1], gamma, meta)
    return RecoveredParams(sch, eta, beta, lam, method, undefined, float(res), gamma)


# ---------------------------------------------------------------------------
# one-step potential design


POT_LABELS = ("g_t", "G_t-1", "x_t", "v_t", "y_t", "y_t+1")


def build_potential_design(eta, sigma, setting: ProblemSetting) -> LmiSdp:
    """Joint search for potential parameters ``(a, b)`` and multipliers certifying
    ``phi_t - phi_{t-1} <= value`` for one generic step of the fixed algorithm."""
    if not (0.0 < sigma <= 1.0):
        raise ValueError("sigma must lie in (0, 1]")
    if eta <= 0:
        raise ValueError("eta must be positive")
    basis = GramBasis(POT_LABELS)
    I = np.eye(6)
    g, G, xt, vt, yt, yn = I
    x1 = np.zeros(6)
    xn = sigma * vt + (1.0 - sigma) * xt

    A0 = sym(g, xt - yn) + sym(G, yt - yn) + (0.5 / eta) * (np.outer(yt, yt) - np.outer(yn, yn))
    Aa = np.outer(xn - yn, xn - yn) - np.outer(xt - yt, xt - yt)
    Ab = (eta * (sym(G + g, xn - yn) - sym(G, xt - yt))
          + 0.5 * (np.outer(xn, xn) - np.outer(yn, yn) - np.outer(xt, xt) + np.outer(yt, yt)))

    names, mats, cost, nonneg = [], [], [], []

    def add(name, M, cst):
        names.append(name)
        mats.append(M)
        cost.append(cst)
        nonneg.append(True)

    add("a", -Aa, 0.0)
    add("b", -Ab, 0.0)
    add("lip[g_t]", np.outer(g, g), setting.L ** 2)
    pts = [("x_1", x1), ("x_t", xt), ("v_t", vt), ("y_t", yt), ("y_t+1", yn)]
    for (la, pa), (lb, pb) in itertools.combinations(pts, 2):
        add(f"diam[{la},{lb}]", np.outer(pa - pb, pa - pb), setting.D ** 2)
    dirs = {"v_t": eta * (G + g) + xt, "y_t": eta * G + yt, "y_t+1": eta * (G + g) + yn}
    pmap = dict(pts)
    for lab in ("v_t", "y_t", "y_t+1"):
        w = pmap[lab]
        for lu, u in pts:
            if lu == lab:
                continue
            add(f"brd[{lab},{lu}]", sym(dirs[lab], w - u), 0.0)
    return LmiSdp(basis, names, np.array(cost), -A0, np.array(mats), np.array(nonneg),
                  meta={"kind": "potential-design", "eta": eta, "sigma": sigma,
                        "trace_bound": None})


def solve_potential_design(eta, sigma, setting, tol=1e-7):
    prob = build_potential_design(eta, sigma, setting)
    return prob, prob.solve(tol=tol)
