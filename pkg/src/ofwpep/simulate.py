"""Replay online Frank-Wolfe schemes and FTRL against explicit linear losses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls
from scipy.spatial.distance import pdist

from .model import MultiRoundSchedule, ParamSchedule

KINDS = ("ball", "box", "simplex", "hull")


class Domain:
    """A compact convex set with a linear minimization oracle.

    ``ball``: ``center``, ``radius``.  ``box``: ``lower``, ``upper``.
    ``simplex``: the probability simplex in dimension ``d``.
    ``hull``: convex hull of the rows of ``vertices``.
    """

    def __init__(self, kind, *, center=None, radius=None, lower=None, upper=None, d=None,
                 vertices=None):
        if kind not in KINDS:
            raise ValueError(f"unknown domain kind {kind!r}")
        self.kind = kind
        if kind == "ball":
            self.center = np.asarray(center, dtype=float).ravel()
            self.radius = float(radius)
            if self.radius < 0:
                raise ValueError("radius must be nonnegative")
            self.d = self.center.size
        elif kind == "box":
            self.lower = np.asarray(lower, dtype=float).ravel()
            self.upper = np.asarray(upper, dtype=float).ravel()
            if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
                raise ValueError("box bounds are inconsistent")
            self.d = self.lower.size
        elif kind == "simplex":
            self.d = int(d)
            if self.d < 1:
                raise ValueError("simplex dimension must be positive")
        else:
            V = np.atleast_2d(np.asarray(vertices, dtype=float))
            if V.size == 0:
                raise ValueError("hull needs at least one vertex")
            self.vertices = V
            self.d = V.shape[1]

    # convenience constructors
    @classmethod
    def ball(cls, center, radius):
        return cls("ball", center=center, radius=radius)

    @classmethod
    def box(cls, lower, upper):
        return cls("box", lower=lower, upper=upper)

    @classmethod
    def simplex(cls, d):
        return cls("simplex", d=d)

    @classmethod
    def hull(cls, vertices):
        return cls("hull", vertices=vertices)

    def __repr__(self):
        return f"Domain({self.kind}, d={self.d})"

    @property
    def vertex_array(self):
        if self.kind == "simplex":
            return np.eye(self.d)
        if self.kind == "hull":
            return self.vertices
        raise AttributeError("only polytopes expose a vertex list")

    def lmo(self, direction, prefer=None, tie_tol=0.0):
        """A minimizer of ``<direction, v>``.

        Ties go to the lowest index (coordinate-wise lower bound for boxes).
        If ``prefer`` is given and attains the minimum up to ``tie_tol`` it is
        returned instead.
        """
        g = np.asarray(direction, dtype=float).ravel()
        if g.size != self.d:
            raise ValueError(f"direction has dimension {g.size}, domain has {self.d}")
        if not np.all(np.isfinite(g)):
            raise ValueError("direction must be finite")
        if self.kind == "ball":
            n = np.linalg.norm(g)
            v = self.center.copy() if n == 0 else self.center - self.radius * g / n
            best = float(g @ v)
        elif self.kind == "box":
            v = np.where(g < 0, self.upper, self.lower)
            best = float(g @ v)
        else:
            V = self.vertex_array
            vals = V @ g
            i = int(np.argmin(vals))
            v = V[i].copy()
            best = float(vals[i])
        if prefer is not None:
            p = np.asarray(prefer, dtype=float).ravel()
            if float(g @ p) <= best + tie_tol:
                return p.copy()
        return v

    def diameter(self):
        if self.kind == "ball":
            return 2.0 * self.radius
        if self.kind == "box":
            return float(np.linalg.norm(self.upper - self.lower))
        if self.kind == "simplex":
            return float(np.sqrt(2.0)) if self.d > 1 else 0.0
        if self.vertices.shape[0] < 2:
            return 0.0
        return float(pdist(self.vertices).max())

    def project(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if self.kind == "ball":
            r = x - self.center
            n = np.linalg.norm(r)
            return x.copy() if n <= self.radius else self.center + r * (self.radius / n)
        if self.kind == "box":
            return np.clip(x, self.lower, self.upper)
        if self.kind == "simplex":
            u = np.sort(x)[::-1]
            css = np.cumsum(u) - 1.0
            k = np.nonzero(u - css / np.arange(1, x.size + 1) > 0)[0][-1]
            return np.maximum(x - css[k] / (k + 1.0), 0.0)
        lam = self._hull_weights(x)
        return lam @ self.vertices

    def _hull_weights(self, x):
        V = self.vertices
        scale = max(1.0, np.abs(V).max(), np.abs(x).max())
        w = 1e4 * scale
        M = np.vstack([V.T, w * np.ones(V.shape[0])])
        rhs = np.concatenate([x, [w]])
        lam, _ = nnls(M, rhs, maxiter=50 * V.shape[0] + 100)
        s = lam.sum()
        return lam / s if s > 0 else lam

    def residual(self, x):
        """Euclidean distance from ``x`` to the domain."""
        x = np.asarray(x, dtype=float).ravel()
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=1e-8):
        return self.residual(x) <= tol

    def translate(self, c):
        c = np.asarray(c, dtype=float).ravel()
        if self.kind == "ball":
            return Domain.ball(self.center + c, self.radius)
        if self.kind == "box":
            return Domain.box(self.lower + c, self.upper + c)
        return Domain.hull(self.vertex_array + c)

    def sample(self, rng, n=1):
        """Random points of the domain (not uniform for polytopes)."""
        if self.kind == "ball":
            z = rng.standard_normal((n, self.d))
            z /= np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
            rad = self.radius * rng.random((n, 1)) ** (1.0 / self.d)
            return self.center + rad * z
        if self.kind == "box":
            return self.lower + (self.upper - self.lower) * rng.random((n, self.d))
        V = self.vertex_array
        lam = rng.dirichlet(np.ones(V.shape[0]), size=n)
        return lam @ V

    def to_dict(self):
        if self.kind == "ball":
            return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
        if self.kind == "box":
            return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        if self.kind == "simplex":
            return {"kind": "simplex", "d": self.d}
        return {"kind": "hull", "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop("kind"), **d)


@dataclass
class Trace:
    """One run.  Row ``i`` of ``x`` is the iterate ``x_{i+1}``; likewise for ``v`` and ``dirs``.

    ``x`` may hold one row more than the horizon (the unplayed ``x_{T+1}``);
    only the first ``T`` rows are played.
    """

    x: np.ndarray
    v: np.ndarray
    dirs: np.ndarray
    grads: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.grads.shape[0]

    @property
    def played(self):
        return self.x[: self.T]

    @property
    def losses(self):
        return np.einsum("ij,ij->i", self.grads, self.played)

    def to_dict(self):
        return {"x": self.x.tolist(), "v": self.v.tolist(), "dirs": self.dirs.tolist(),
                "grads": self.grads.tolist(), "losses": self.losses.tolist(), "meta": self.meta}


def _grads(grads, T=None, d=None):
    g = np.atleast_2d(np.asarray(grads, dtype=float))
    if T is not None and g.shape[0] != T:
        raise ValueError(f"expected {T} gradients, got {g.shape[0]}")
    if d is not None and g.shape[1] != d:
        raise ValueError(f"gradients have dimension {g.shape[1]}, domain has {d}")
    return g


def run_general(schedule: ParamSchedule, domain: Domain, x1, grads, prefer=None,
                tie_tol=0.0) -> Trace:
    """Run the general oblivious scheme.  ``prefer[t-1]`` (optional) is the atom to
    return from the oracle at step ``t`` whenever it ties."""
    T = schedule.T
    x1 = np.asarray(x1, dtype=float).ravel()
    if x1.size != domain.d:
        raise ValueError("x1 dimension does not match the domain")
    g = _grads(grads, T, domain.d)
    d = domain.d
    x = np.zeros((T, d))
    v = np.zeros((max(T - 1, 0), d))
    dirs = np.zeros((max(T - 1, 0), d))
    x[0] = x1
    dv = np.zeros_like(v)  # v_s - x_1
    for t in range(1, T):
        dir_t = schedule.eta[t, 1:t + 1] @ g[:t] + schedule.beta[t, 1:t] @ dv[: t - 1]
        p = None if prefer is None else prefer[t - 1]
        v[t - 1] = domain.lmo(dir_t, prefer=p, tie_tol=tie_tol)
        dv[t - 1] = v[t - 1] - x1
        dirs[t - 1] = dir_t
        x[t] = x1 + schedule.gamma[t + 1, 1:t + 1] @ dv[:t]
    return Trace(x, v, dirs, g, {"algorithm": "general", "schedule": schedule.meta.get("name")})


def run_ofw_fixed(eta, sigma, domain: Domain, x1, grads) -> Trace:
    """Literal fixed-parameter online Frank-Wolfe.

    ``eta`` and ``sigma`` may be scalars or length-``T`` sequences (per-step
    values).  The trace holds ``v_1..v_T`` and ``x_1..x_{T+1}``.
    """
    x1 = np.asarray(x1, dtype=float).ravel()
    g = _grads(grads, d=domain.d)
    T = g.shape[0]
    etas = np.broadcast_to(np.asarray(eta, dtype=float), (T,))
    sigmas = np.broadcast_to(np.asarray(sigma, dtype=float), (T,))
    if np.any(sigmas < 0) or np.any(sigmas > 1):
        raise ValueError("sigma must lie in [0, 1]")
    d = domain.d
    x = np.zeros((T + 1, d))
    v = np.zeros((T, d))
    dirs = np.zeros((T, d))
    x[0] = x1
    G = np.zeros(d)
    for t in range(T):
        G = G + g[t]
        dirs[t] = etas[t] * G + (x[t] - x1)
        v[t] = domain.lmo(dirs[t])
        x[t + 1] = (1.0 - sigmas[t]) * x[t] + sigmas[t] * v[t]
    return Trace(x, v, dirs, g, {"algorithm": "ofw-fixed"})


def run_ftrl(eta, domain: Domain, y1, grads) -> Trace:
    """FTRL with quadratic regularizer centred at ``y1``; holds ``y_1..y_{T+1}``."""
    if domain.kind not in ("ball", "box"):
        raise ValueError("FTRL replay supports ball and box domains only")
    if eta <= 0:
        raise ValueError("eta must be positive")
    y1 = np.asarray(y1, dtype=float).ravel()
    g = _grads(grads, d=domain.d)
    T = g.shape[0]
    y = np.zeros((T + 1, domain.d))
    y[0] = y1
    G = np.cumsum(g, axis=0)
    for t in range(T):
        y[t + 1] = domain.project(y1 - eta * G[t])
    return Trace(y, np.zeros((0, domain.d)), np.zeros((0, domain.d)), g,
                 {"algorithm": "ftrl", "eta": float(eta)})


def run_multiround(schedule: MultiRoundSchedule, domain: Domain, x1, grads, prefer=None,
                   tie_tol=0.0) -> Trace:
    """Run the scheme with ``r`` oracle calls per round, atoms in lexicographic order."""
    bad = schedule.lex_violations()
    if bad:
        raise ValueError(f"schedule references future quantities: {bad[:5]}")
    T, r, A = schedule.T, schedule.r, schedule.n_atoms
    x1 = np.asarray(x1, dtype=float).ravel()
    g = _grads(grads, T, domain.d)
    d = domain.d
    x = np.zeros((T, d))
    v = np.zeros((A, d))
    dirs = np.zeros((A, d))
    dv = np.zeros((A, d))
    x[0] = x1
    for a in range(1, A + 1):
        t = schedule.atom_time(a)
        dir_a = schedule.eta[a, 1:t + 1] @ g[:t] + schedule.beta[a, 1:a] @ dv[: a - 1]
        p = None if prefer is None else prefer[a - 1]
        v[a - 1] = domain.lmo(dir_a, prefer=p, tie_tol=tie_tol)
        dv[a - 1] = v[a - 1] - x1
        dirs[a - 1] = dir_a
        if a % r == 0:
            x[t] = x1 + schedule.gamma[t + 1, 1:a + 1] @ dv[:a]
    return Trace(x, v, dirs, g, {"algorithm": "multiround", "r": r})


def regret(trace: Trace, x_star) -> float:
    x_star = np.asarray(x_star, dtype=float).ravel()
    return float(np.sum(trace.grads * (trace.played - x_star)))


def best_comparator(trace: Trace, domain: Domain):
    """The comparator maximizing the regret: a minimizer of the cumulative linear loss."""
    return domain.lmo(trace.grads.sum(axis=0))


def sup_regret(trace: Trace, domain: Domain) -> float:
    return regret(trace, best_comparator(trace, domain))


def gradient_sequence(seed, d, T, L=1.0, distribution="uniform-on-sphere"):
    """Seeded gradients drawn uniformly from the sphere of radius ``L``."""
    if distribution != "uniform-on-sphere":
        raise ValueError(f"unsupported distribution {distribution!r}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((T, d))
    n = np.linalg.norm(z, axis=1, keepdims=True)
    return L * z / np.where(n > 0, n, 1.0)


def load_gradients(path):
    with open(path) as fh:
        d = json.load(fh)
    if isinstance(d, dict) and "seed" in d:
        return gradient_sequence(d["seed"], d["d"], d["T"], d.get("L", 1.0),
                                 d.get("distribution", "uniform-on-sphere"))
    if isinstance(d, dict):
        d = d["g"]
    return np.atleast_2d(np.asarray(d, dtype=float))


def save_trace(trace: Trace, path):
    with open(path, "w") as fh:
        json.dump(trace.to_dict(), fh)
