"""Problem settings and coefficient schedules for online Frank-Wolfe schemes.

A schedule fixes the coefficients of the general oblivious scheme

    dir_t   = sum_{s<=t} eta[t,s] g_s + sum_{s<t} beta[t,s] (v_s - x_1)
    v_t     = argmin_{v in K} <dir_t, v>
    x_{t+1} = x_1 + sum_{s<=t} gamma[t+1,s] (v_s - x_1)

Arrays are stored dense and 1-based: ``eta[t, s]`` and ``beta[t, s]`` have
shape ``(T, T)`` and only rows ``1..T-1`` are meaningful; ``gamma`` has shape
``(T+1, T)`` with rows ``2..T``.  Index 0 is padding and always zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

HULL_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSetting:
    T: int
    L: float = 1.0
    D: float = 1.0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.T}")
        if not (self.L > 0 and self.D > 0 and math.isfinite(self.L) and math.isfinite(self.D)):
            raise ValueError("L and D must be positive and finite")


def _check_T(T):
    if int(T) != T or T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T}")
    return int(T)


@dataclass(frozen=True)
class ParamSchedule:
    """Triangular coefficients of one algorithm instance (see module docstring)."""

    T: int
    eta: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        T = _check_T(self.T)
        for name, shape in (("eta", (T, T)), ("beta", (T, T)), ("gamma", (T + 1, T))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls, T, meta=None):
        T = _check_T(T)
        return cls(T, np.zeros((T, T)), np.zeros((T, T)), np.zeros((T + 1, T)), dict(meta or {}))

    @property
    def hull_safe(self) -> bool:
        return validate(self).hull_safe

    def replace(self, **kw):
        d = dict(T=self.T, eta=self.eta, beta=self.beta, gamma=self.gamma, meta=dict(self.meta))
        d.update(kw)
        return ParamSchedule(**d)

    def to_multiround(self) -> "MultiRoundSchedule":
        """The same algorithm seen as a one-oracle-call-per-round schedule."""
        T = self.T
        A = T - 1
        eta = np.zeros((A + 1, T + 1))
        beta = np.zeros((A + 1, A + 1))
        gamma = np.zeros((T + 1, A + 1))
        eta[1:, 1:T] = self.eta[1:, 1:]
        beta[1:, 1:] = self.beta[1:, 1:]
        gamma[:, 1:] = self.gamma[:, 1:]
        return MultiRoundSchedule(T, 1, eta, beta, gamma, dict(self.meta))

    # --- JSON ---------------------------------------------------------
    def to_json_dict(self):
        T = self.T
        return {
            "T": T,
            "eta": [self.eta[t, 1:t + 1].tolist() for t in range(1, T)],
            "beta": [self.beta[t, 1:t].tolist() for t in range(1, T)],
            "gamma": [self.gamma[t, 1:t].tolist() for t in range(1, T + 1)],
            "meta": _jsonable(self.meta),
        }

    @classmethod
    def from_json_dict(cls, d):
        T = _check_T(d["T"])
        sch = cls.empty(T, d.get("meta", {}))
        eta = np.zeros((T, T))
        beta = np.zeros((T, T))
        gamma = np.zeros((T + 1, T))
        rows = d.get("eta", [])
        if len(rows) != max(T - 1, 0):
            raise ValueError("eta must have T-1 rows")
        for t, row in enumerate(rows, start=1):
            if len(row) != t:
                raise ValueError(f"eta row {t} must have {t} entries")
            eta[t, 1:t + 1] = row
        rows = d.get("beta", [])
        if len(rows) != max(T - 1, 0):
            raise ValueError("beta must have T-1 rows")
        for t, row in enumerate(rows, start=1):
            if len(row) != t - 1:
                raise ValueError(f"beta row {t} must have {t - 1} entries")
            beta[t, 1:t] = row
        rows = d.get("gamma", [])
        if len(rows) != T:
            raise ValueError("gamma must have T rows")
        for t, row in enumerate(rows, start=1):
            if len(row) != t - 1:
                raise ValueError(f"gamma row {t} must have {t - 1} entries")
            gamma[t, 1:t] = row
        return sch.replace(eta=eta, beta=beta, gamma=gamma)


@dataclass(frozen=True)
class MultiRoundSchedule:
    """Schedule with ``r`` oracle calls per round.

    Atoms ``v_{t,k}`` (t = 1..T-1, k = 1..r) are numbered in lexicographic
    order, ``a = (t-1) r + k``.  ``eta[a, s]`` multiplies ``g_s`` (s <= t),
    ``beta[a, b]`` multiplies ``v_b - x_1`` (b < a) and ``gamma[t, b]`` builds
    ``x_t`` from the atoms of earlier rounds.  Shapes: eta ``(A+1, T+1)``,
    beta ``(A+1, A+1)``, gamma ``(T+1, A+1)`` with ``A = (T-1) r``.
    """

    T: int
    r: int
    eta: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        T = _check_T(self.T)
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("r must be a positive integer")
        A = (T - 1) * self.r
        for name, shape in (("eta", (A + 1, T + 1)), ("beta", (A + 1, A + 1)), ("gamma", (T + 1, A + 1))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_atoms(self):
        return (self.T - 1) * self.r

    def atom_time(self, a):
        return (a - 1) // self.r + 1

    def atom_label(self, a):
        return (self.atom_time(a), (a - 1) % self.r + 1)

    def lex_violations(self, tol=0.0):
        """Entries referencing atoms or gradients not yet available."""
        out = []
        A = self.n_atoms
        for a in range(1, A + 1):
            t = self.atom_time(a)
            bad = np.nonzero(np.abs(self.eta[a, t + 1:]) > tol)[0]
            out += [("eta", a, int(t + 1 + b)) for b in bad]
            bad = np.nonzero(np.abs(self.beta[a, a:]) > tol)[0]
            out += [("beta", a, int(a + b)) for b in bad]
        for t in range(0, self.T + 1):
            first_bad = (t - 1) * self.r + 1 if t >= 1 else 1
            bad = np.nonzero(np.abs(self.gamma[t, max(first_bad, 1):]) > tol)[0]
            out += [("gamma", t, int(max(first_bad, 1) + b)) for b in bad]
        return out

    @property
    def hull_safe(self):
        g = self.gamma[2:, 1:]
        return bool(np.all(g >= -HULL_TOL) and np.all(g.sum(axis=1) <= 1 + HULL_TOL))

    def to_json_dict(self):
        return {"T": self.T, "r": self.r, "eta": self.eta.tolist(), "beta": self.beta.tolist(),
                "gamma": self.gamma.tolist(), "meta": _jsonable(self.meta)}

    @classmethod
    def from_json_dict(cls, d):
        return cls(int(d["T"]), int(d["r"]), np.array(d["eta"]), np.array(d["beta"]),
                   np.array(d["gamma"]), d.get("meta", {}))


# ---------------------------------------------------------------------------
# presets


def ofw_scalars(T, L, D):
    """Step size and mixing weight of the fixed-horizon algorithm."""
    eta = (D / (2.0 * L)) * (3.0 / T) ** 0.75
    sigma = min(1.0, math.sqrt(3.0 / T))
    return eta, sigma


def _fw_schedule(T, etas, sigmas, meta):
    """Schedule of ``dir_t = eta_t G_t + (x_t - x_1)``, ``x_{t+1} = (1-sigma_t) x_t + sigma_t v_t``.

    ``etas[t]`` and ``sigmas[t]`` are indexed from 1.
    """
    eta = np.zeros((T, T))
    beta = np.zeros((T, T))
    gamma = np.zeros((T + 1, T))
    for t in range(1, T):
        eta[t, 1:t + 1] = etas[t]
        beta[t, 1:t] = gamma[t, 1:t]
        gamma[t + 1, 1:t] = (1.0 - sigmas[t]) * gamma[t, 1:t]
        gamma[t + 1, t] = sigmas[t]
    meta = dict(meta)
    meta["eta_steps"] = [float(etas[t]) for t in range(1, T + 1)]
    meta["sigma_steps"] = [float(sigmas[t]) for t in range(1, T + 1)]
    return ParamSchedule(T, eta, beta, gamma, meta)


def preset_ofw_new(T, L=1.0, D=1.0) -> ParamSchedule:
    T = _check_T(T)
    eta, sigma = ofw_scalars(T, L, D)
    etas = [0.0] + [eta] * T
    sigmas = [0.0] + [sigma] * T
    return _fw_schedule(T, etas, sigmas, {"name": "ofw-new", "L": L, "D": D, "eta": eta, "sigma": sigma})


def _hazan_weight(t, variant):
    if variant == "thm44":
        return 1.0 / math.sqrt(t)
    if variant == "alg27":
        return min(1.0, 2.0 / math.sqrt(t))
    raise ValueError(f"unknown variant {variant!r}")


def preset_hazan(T, L=1.0, D=1.0, variant="alg27") -> ParamSchedule:
    """Textbook online Frank-Wolfe; ``x_{t+1}`` mixes in ``v_t`` with weight
    ``1/sqrt(t+1)`` (thm44) or ``min(1, 2/sqrt(t+1))`` (alg27)."""
    T = _check_T(T)
    eta = D / (2.0 * L * T ** 0.75)
    etas = [0.0] + [eta] * T
    sigmas = [0.0] + [_hazan_weight(t + 1, variant) for t in range(1, T + 1)]
    return _fw_schedule(T, etas, sigmas, {"name": f"hazan-{variant}", "L": L, "D": D, "eta": eta})


def preset_anytime(base, T, L=1.0, D=1.0) -> ParamSchedule:
    """Horizon-free variant: every ``T`` inside the scalar parameters becomes the current ``t``."""
    T = _check_T(T)
    base = base.replace("-", "_")
    etas, sigmas = [0.0], [0.0]
    if base == "ofw_new":
        for t in range(1, T + 1):
            e, s = ofw_scalars(t, L, D)
            etas.append(e)
            sigmas.append(s)
    elif base == "hazan_alg27":
        for t in range(1, T + 1):
            etas.append(D / (2.0 * L * t ** 0.75))
            sigmas.append(_hazan_weight(t + 1, "alg27"))
    else:
        raise ValueError(f"unknown anytime base {base!r}")
    meta = {"name": f"anytime-{base.replace('_', '-')}", "L": L, "D": D,
            "substitution": "T replaced by the current step t in eta and sigma; beta follows gamma"}
    return _fw_schedule(T, etas, sigmas, meta)


def preset_zero(T) -> ParamSchedule:
    return ParamSchedule.empty(T, {"name": "zero"})


# Optimized coefficients for L = D = 1 with eta = 1 (gamma rows t = 2..T, beta rows t = 2..T-1).
B3_VALUES = {2: 1.7321, 3: 2.3421, 4: 2.9029, 5: 3.4217, 6: 3.917}
B3_GAMMA = {
    2: [[0.5]],
    3: [[0.5], [0.3118, 0.3764]],
    4: [[0.5], [0.3133, 0.3734], [0.1843, 0.2197, 0.4116]],
    5: [[0.5], [0.3067, 0.3866], [0.2124, 0.2677, 0.3075], [0.1201, 0.1514, 0.1739, 0.4345]],
    6: [[0.5], [0.3068, 0.3863], [0.2101, 0.2646, 0.3151], [0.1406, 0.177, 0.2108, 0.3309],
        [0.0784, 0.0985, 0.1174, 0.1842, 0.4432]],
}
B3_BETA = {
    2: [],
    3: [[-0.1099]],
    4: [[0.1961], [-0.4249, 0.1465]],
    5: [[0.5649], [-0.2595, 0.212], [-0.6282, -0.253, 0.3473]],
    6: [[0.5856], [-0.0481, 0.4808], [-0.5053, -0.0949, 0.3922], [-0.7675, -0.4251, -0.001, 0.3876]],
}


def preset_b3_table(T, L=1.0, D=1.0) -> ParamSchedule:
    """Published optimized coefficients for T = 2..6 (beta rescaled by L/D)."""
    T = _check_T(T)
    if T not in B3_GAMMA:
        raise ValueError("tabulated coefficients exist only for T = 2..6")
    eta = np.zeros((T, T))
    beta = np.zeros((T, T))
    gamma = np.zeros((T + 1, T))
    for t in range(1, T):
        eta[t, 1:t + 1] = 1.0
    for i, row in enumerate(B3_BETA[T]):
        t = i + 2
        beta[t, 1:t] = np.asarray(row) * (L / D)
    for i, row in enumerate(B3_GAMMA[T]):
        t = i + 2
        gamma[t, 1:t] = row
    return ParamSchedule(T, eta, beta, gamma, {"name": "hazan-b3-opt", "L": L, "D": D,
                                               "table_value": B3_VALUES[T] * L * D})


PRESETS = ("ofw-new", "hazan-thm44", "hazan-alg27", "anytime-ofw-new", "anytime-hazan-alg27",
           "zero", "hazan-b3-opt")


def preset(name, T, L=1.0, D=1.0) -> ParamSchedule:
    """Look up a preset by its command-line name."""
    if name == "ofw-new":
        return preset_ofw_new(T, L, D)
    if name in ("hazan-thm44", "hazan-alg27"):
        return preset_hazan(T, L, D, name.split("-")[1])
    if name in ("anytime-ofw-new", "anytime-hazan-alg27"):
        return preset_anytime(name[len("anytime-"):], T, L, D)
    if name == "zero":
        return preset_zero(T)
    if name == "hazan-b3-opt":
        return preset_b3_table(T, L, D)
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list
    nonfinite: list
    hull_safe: bool
    hull_issues: list

    @property
    def ok(self):
        return not self.violations and not self.nonfinite

    def to_dict(self):
        return {"ok": self.ok, "hull_safe": self.hull_safe, "violations": self.violations,
                "nonfinite": self.nonfinite, "hull_issues": self.hull_issues}


def _allowed_masks(T):
    t = np.arange(T)[:, None]
    s = np.arange(T)[None, :]
    eta_ok = (t >= 1) & (t <= T - 1) & (s >= 1) & (s <= t)
    beta_ok = (t >= 1) & (t <= T - 1) & (s >= 1) & (s < t)
    tg = np.arange(T + 1)[:, None]
    gamma_ok = (tg >= 2) & (s >= 1) & (s < tg)
    return eta_ok, beta_ok, gamma_ok


def validate(schedule: ParamSchedule) -> ValidationReport:
    T = schedule.T
    masks = _allowed_masks(T)
    violations, nonfinite = [], []
    for name, mask in zip(("eta", "beta", "gamma"), masks):
        arr = getattr(schedule, name)
        for t, s in zip(*np.nonzero(~np.isfinite(arr))):
            nonfinite.append(f"{name}[{t},{s}]")
        for t, s in zip(*np.nonzero((arr != 0) & ~mask)):
            violations.append(f"{name}[{t},{s}] outside the triangular index range")
    hull_issues = []
    g = schedule.gamma
    for t in range(2, T + 1):
        row = g[t, 1:t]
        for s in np.nonzero(row < -HULL_TOL)[0]:
            hull_issues.append(f"gamma[{t},{s + 1}] = {row[s]:.6g} < 0")
        if row.sum() > 1 + HULL_TOL:
            hull_issues.append(f"row {t} of gamma sums to {row.sum():.6g} > 1")
    return ValidationReport(violations, nonfinite, not hull_issues and not nonfinite, hull_issues)


# ---------------------------------------------------------------------------
# io


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def load_schedule(path):
    with open(path) as fh:
        d = json.load(fh)
    if "r" in d:
        return MultiRoundSchedule.from_json_dict(d)
    return ParamSchedule.from_json_dict(d)


def save_schedule(schedule, path):
    with open(path, "w") as fh:
        json.dump(schedule.to_json_dict(), fh, indent=1)
