"""Dense primal-dual interior-point solver for small conic programs.

Problems are handled in the inequality form

    minimize    c'x
    subject to  G x + s = h,   A x = b,   s in K

with K the product of a nonnegative orthant (first ``n_lin`` rows of G) and
one positive semidefinite cone of order ``n_psd`` (remaining rows, stored as
scaled half-vectorizations).  The associated dual is

    maximize    -h'z - b'y
    subject to  G'z + A'y + c = 0,   z in K.

The method is a Nesterov-Todd scaled path-following scheme with Mehrotra
predictor-corrector steps.  Everything is dense; summation order is fixed by
numpy/BLAS on a given machine, so identical inputs give identical iterates.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


class SolverError(RuntimeError):
    """Raised when the iteration produces non-finite numbers."""


# ---------------------------------------------------------------------------
# symmetric matrix vectorization


@functools.lru_cache(maxsize=64)
def _tri(n):
    i, j = np.triu_indices(n)
    w = np.where(i == j, 1.0, SQRT2)
    for arr in (i, j, w):
        arr.setflags(write=False)
    return i, j, w


def svec(M, check=True):
    """Scaled half-vectorization of a symmetric matrix (off-diagonals times sqrt 2)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("svec expects a square matrix")
    if check and not np.allclose(M, M.T, rtol=0.0, atol=1e-12):
        raise ValueError("svec expects a symmetric matrix")
    i, j, w = _tri(M.shape[0])
    return M[i, j] * w


def smat(v, n=None):
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    if n is None:
        n = int(round((math.sqrt(8 * v.size + 1) - 1) / 2))
    if n * (n + 1) // 2 != v.size:
        raise ValueError(f"vector of length {v.size} is not a half-vectorization")
    i, j, w = _tri(n)
    M = np.zeros((n, n))
    vals = v / w
    M[i, j] = vals
    M[j, i] = vals
    return M


def _svec_batch(Ms):
    i, j, w = _tri(Ms.shape[-1])
    return Ms[..., i, j] * w


def _smat_batch(V, n):
    i, j, w = _tri(n)
    out = np.zeros(V.shape[:-1] + (n, n))
    vals = V / w
    out[..., i, j] = vals
    out[..., j, i] = vals
    return out


def sym_dim(n):
    return n * (n + 1) // 2


# ---------------------------------------------------------------------------
# problem containers


@dataclass
class ConeProblem:
    """Cone program ``min c'x  s.t.  Gx + s = h, Ax = b, s in R+^n_lin x S+^n_psd``."""

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    n_lin: int
    n_psd: int
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        self.h = np.asarray(self.h, dtype=float).ravel()
        q = self.c.size
        if self.A is None:
            self.A = np.zeros((0, q))
            self.b = np.zeros(0)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, q)
        self.b = np.asarray(self.b, dtype=float).ravel()
        rows = self.n_lin + sym_dim(self.n_psd)
        if self.G.shape != (rows, q):
            raise ValueError(f"G has shape {self.G.shape}, expected {(rows, q)}")
        if self.h.size != rows:
            raise ValueError("h does not match the cone dimension")
        if self.A.shape[0] != self.b.size:
            raise ValueError("A and b disagree")

    @property
    def n_var(self):
        return self.c.size

    @property
    def degree(self):
        return self.n_lin + self.n_psd

    def to_dict(self):
        return {
            "c": self.c.tolist(), "G": self.G.tolist(), "h": self.h.tolist(),
            "n_lin": self.n_lin, "n_psd": self.n_psd,
            "A": self.A.tolist(), "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        q = len(d["c"])
        A = np.asarray(d.get("A", []), dtype=float).reshape(-1, q)
        return cls(d["c"], d["G"], d["h"], int(d["n_lin"]), int(d["n_psd"]),
                   A, np.asarray(d.get("b", []), dtype=float))


@dataclass
class LmiProblem:
    """``min c'x  s.t.  F0 + sum_i x_i F_i >= 0 (PSD)``, sign constraints, linear rows.

    ``nonneg`` flags variables constrained to be >= 0.  ``ineq`` rows read
    ``A_in x <= b_in`` and ``eq`` rows ``A_eq x = b_eq``.
    """

    c: np.ndarray
    F0: np.ndarray
    F: np.ndarray  # (q, n, n)
    nonneg: np.ndarray
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        q = self.c.size
        self.F0 = np.asarray(self.F0, dtype=float)
        n = self.F0.shape[0]
        self.F = np.asarray(self.F, dtype=float).reshape(q, n, n)
        self.nonneg = np.asarray(self.nonneg, dtype=bool).ravel()
        if self.A_in is None:
            self.A_in, self.b_in = np.zeros((0, q)), np.zeros(0)
        if self.A_eq is None:
            self.A_eq, self.b_eq = np.zeros((0, q)), np.zeros(0)
        self.A_in = np.asarray(self.A_in, dtype=float).reshape(-1, q)
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, q)
        self.b_in = np.asarray(self.b_in, dtype=float).ravel()
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()

    @property
    def n(self):
        return self.F0.shape[0]

    def slack(self, x):
        return self.F0 + np.tensordot(x, self.F, axes=1)

    def to_cone(self):
        q = self.c.size
        sign_rows = -np.eye(q)[self.nonneg]
        G_lin = np.vstack([sign_rows, self.A_in])
        h_lin = np.concatenate([np.zeros(sign_rows.shape[0]), self.b_in])
        G_psd = -_svec_batch(self.F).T
        h_psd = svec(self.F0, check=False)
        return ConeProblem(self.c, np.vstack([G_lin, G_psd]), np.concatenate([h_lin, h_psd]),
                           G_lin.shape[0], self.n, self.A_eq, self.b_eq)


def primal_form(C, As, rhs, senses, maximize=True):
    """Turn ``max tr(C X) s.t. tr(A_i X) (<= | =) b_i, X >= 0`` into its Lagrangian LMI.

    The LMI reads ``min b'y  s.t.  sum y_i A_i - C >= 0`` with ``y_i >= 0`` on the
    inequality rows; the PSD multiplier of that LMI is the primal matrix X.
    For ``maximize=False`` the objective is negated first.
    """
    C = np.asarray(C, dtype=float)
    sgn = 1.0 if maximize else -1.0
    As = np.asarray(As, dtype=float).reshape(-1, C.shape[0], C.shape[0])
    nonneg = np.array([s in ("<=", "le") for s in senses], dtype=bool)
    return LmiProblem(np.asarray(rhs, dtype=float), -sgn * C, As, nonneg)


@dataclass
class SdpSolution:
    """Solver output.

    ``x`` are the variables of the inequality form, ``s`` the cone slack,
    ``z`` the cone multiplier and ``y`` the equality multipliers.  For an
    LMI ``F0 + sum x_i F_i >= 0`` the PSD part of ``z`` (:attr:`Z`) is the
    matrix of the Lagrangian primal.
    """

    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    y: np.ndarray
    n_lin: int
    n_psd: int
    primal_objective: float
    dual_objective: float
    status: str
    iterations: int
    residuals: dict
    meta: dict = field(default_factory=dict)

    @property
    def S(self):
        return smat(self.s[self.n_lin:], self.n_psd) if self.n_psd else np.zeros((0, 0))

    @property
    def Z(self):
        return smat(self.z[self.n_lin:], self.n_psd) if self.n_psd else np.zeros((0, 0))

    @property
    def z_lin(self):
        return self.z[: self.n_lin]

    @property
    def s_lin(self):
        return self.s[: self.n_lin]

    @property
    def gap(self):
        return self.primal_objective - self.dual_objective

    def to_dict(self):
        return {
            "status": self.status,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "iterations": self.iterations,
            "residuals": self.residuals,
            "meta": self.meta,
            "x": self.x.tolist(), "s": self.s.tolist(), "z": self.z.tolist(), "y": self.y.tolist(),
            "n_lin": self.n_lin, "n_psd": self.n_psd,
        }


# ---------------------------------------------------------------------------
# cone arithmetic (vectors split as [lin | svec(psd)])


class _Cone:
    def __init__(self, n_lin, n_psd):
        self.ml = n_lin
        self.n = n_psd
        self.e = np.concatenate([np.ones(n_lin), svec(np.eye(n_psd))])
        self.degree = n_lin + n_psd

    def split(self, u):
        return u[: self.ml], smat(u[self.ml:], self.n) if self.n else None

    def join(self, ul, U):
        if self.n:
            return np.concatenate([ul, svec(U, check=False)])
        return np.asarray(ul, dtype=float)

    def min_eig(self, u):
        ul, U = self.split(u)
        vals = []
        if self.ml:
            vals.append(ul.min())
        if self.n:
            vals.append(np.linalg.eigvalsh(U)[0])
        return min(vals) if vals else 0.0


class _Scaling:
    """Nesterov-Todd scaling point for the current (s, z)."""

    def __init__(self, cone, s, z):
        self.cone = cone
        sl, S = cone.split(s)
        zl, Z = cone.split(z)
        self.w = np.sqrt(sl / zl) if cone.ml else np.zeros(0)
        self.lam_lin = np.sqrt(sl * zl) if cone.ml else np.zeros(0)
        if cone.n:
            Ls = np.linalg.cholesky(S)
            Lz = np.linalg.cholesky(Z)
            U, sv, Vt = np.linalg.svd(Lz.T @ Ls)
            self.R = Ls @ Vt.T / np.sqrt(sv)
            self.Rinv = (Vt @ sla.solve_triangular(Ls, np.eye(cone.n), lower=True)) * np.sqrt(sv)[:, None]
            self.lam_psd = sv
        else:
            self.R = self.Rinv = np.zeros((0, 0))
            self.lam_psd = np.zeros(0)

    @property
    def lam(self):
        return self.cone.join(self.lam_lin, np.diag(self.lam_psd))

    # W^{-T} u
    def scale_inv_t(self, u):
        ul, U = self.cone.split(u)
        out_l = ul / self.w if self.cone.ml else ul
        if self.cone.n:
            return self.cone.join(out_l, self.Rinv @ U @ self.Rinv.T)
        return out_l

    # W^{-1} u
    def scale_inv(self, u):
        ul, U = self.cone.split(u)
        out_l = ul / self.w if self.cone.ml else ul
        if self.cone.n:
            return self.cone.join(out_l, self.Rinv.T @ U @ self.Rinv)
        return out_l

    # W' u
    def scale_t(self, u):
        ul, U = self.cone.split(u)
        out_l = ul * self.w if self.cone.ml else ul
        if self.cone.n:
            return self.cone.join(out_l, self.R @ U @ self.R.T)
        return out_l

    def scale_columns(self, Gl, Gmats):
        """W^{-T} applied to every column of G (lin rows, PSD column matrices)."""
        parts = []
        if self.cone.ml:
            parts.append(Gl / self.w[:, None])
        if self.cone.n:
            M = self.Rinv @ Gmats @ self.Rinv.T
            parts.append(_svec_batch(M).T)
        return np.vstack(parts)

    def lam_prod(self, u):
        """lambda o u."""
        ul, U = self.cone.split(u)
        out_l = self.lam_lin * ul
        if self.cone.n:
            lp = self.lam_psd
            return self.cone.join(out_l, 0.5 * (lp[:, None] + lp[None, :]) * U)
        return out_l

    def lam_div(self, u):
        """Solve lambda o x = u for x."""
        ul, U = self.cone.split(u)
        out_l = ul / self.lam_lin if self.cone.ml else ul
        if self.cone.n:
            lp = self.lam_psd
            return self.cone.join(out_l, 2.0 * U / (lp[:, None] + lp[None, :]))
        return out_l

    def max_step(self, d):
        """Largest alpha with lambda + alpha d in the cone (inf if unbounded)."""
        dl, Dm = self.cone.split(d)
        amax = np.inf
        if self.cone.ml:
            neg = dl < 0
            if np.any(neg):
                amax = min(amax, float(np.min(-self.lam_lin[neg] / dl[neg])))
        if self.cone.n:
            r = 1.0 / np.sqrt(self.lam_psd)
            e = np.linalg.eigvalsh(r[:, None] * Dm * r[None, :])[0]
            if e < 0:
                amax = min(amax, -1.0 / e)
        return amax


def _cone_prod(cone, u, v):
    ul, U = cone.split(u)
    vl, V = cone.split(v)
    out_l = ul * vl
    if cone.n:
        return cone.join(out_l, 0.5 * (U @ V + V @ U))
    return out_l


# ---------------------------------------------------------------------------
# equilibration


def _equilibrate(prob, n_pass=12):
    """Ruiz scaling: column scales for x, row scales for the linear rows,
    one scalar for the PSD block, row scales for equalities."""
    q = prob.n_var
    ml = prob.n_lin
    G = prob.G.copy()
    A = prob.A.copy()
    dcol = np.ones(q)
    drow = np.ones(G.shape[0])
    deq = np.ones(A.shape[0])
    for _ in range(n_pass):
        M = np.vstack([G, A]) if A.size else G
        cn = np.max(np.abs(M), axis=0) if M.size else np.ones(q)
        cn = np.where(cn > 0, cn, 1.0)
        fc = 1.0 / np.sqrt(cn)
        G *= fc
        A *= fc
        dcol *= fc
        rn = np.max(np.abs(G), axis=1) if q else np.ones(G.shape[0])
        fr = np.ones(G.shape[0])
        if ml:
            r = rn[:ml]
            fr[:ml] = 1.0 / np.sqrt(np.where(r > 0, r, 1.0))
        if G.shape[0] > ml:
            blk = rn[ml:].max()
            fr[ml:] = 1.0 / math.sqrt(blk if blk > 0 else 1.0)
        G *= fr[:, None]
        drow *= fr
        if A.shape[0]:
            an = np.max(np.abs(A), axis=1)
            fe = 1.0 / np.sqrt(np.where(an > 0, an, 1.0))
            A *= fe[:, None]
            deq *= fe
    scaled = ConeProblem(prob.c * dcol, G, prob.h * drow, prob.n_lin, prob.n_psd, A, prob.b * deq)
    return scaled, dcol, drow, deq


# ---------------------------------------------------------------------------
# main loop


def _kkt_factor(H, A, reg):
    q = H.shape[0]
    Hr = H + reg * np.eye(q)
    try:
        cf = sla.cho_factor(Hr, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        Hr = H + (reg + 1e-8 * max(1.0, np.abs(np.diag(H)).max())) * np.eye(q)
        cf = sla.cho_factor(Hr, lower=True, check_finite=False)
    if A.shape[0] == 0:
        return cf, None, None
    HiAt = sla.cho_solve(cf, A.T, check_finite=False)
    Sc = A @ HiAt
    Sc = 0.5 * (Sc + Sc.T)
    try:
        sf = {"cho": sla.cho_factor(Sc + 1e-14 * np.trace(Sc) / max(1, Sc.shape[0]) * np.eye(Sc.shape[0]),
                                    lower=True, check_finite=False)}
    except np.linalg.LinAlgError:
        sf = {"lu": sla.lu_factor(Sc, check_finite=False)}
    return cf, HiAt, sf


def _kkt_solve(fac, A, r1, r2):
    """Solve [H A'; A 0][dx; dy] = [r1; r2]."""
    cf, HiAt, sf = fac
    u = sla.cho_solve(cf, r1, check_finite=False)
    if HiAt is None:
        return u, np.zeros(0)
    rhs = A @ u - r2
    if "lu" in sf:
        dy = sla.lu_solve(sf["lu"], rhs, check_finite=False)
    else:
        dy = sla.cho_solve(sf["cho"], rhs, check_finite=False)
    dx = u - HiAt @ dy
    return dx, dy


def solve(problem: ConeProblem, tol: float = 1e-8, max_iter: int = 100,
          equilibrate: bool = True, verbose: bool = False, n_refine: int = 2,
          stall_limit: int = 5) -> SdpSolution:
    """Solve a :class:`ConeProblem`.

    Stops when primal residual, dual residual and relative gap are all
    below ``tol``.  If the budget runs out the last iterate is returned with
    status ``max_iter``; diverging residuals give ``infeasible-suspected``.
    """
    if not (1e-12 <= tol <= 1e-2):
        raise ValueError("tol must lie in [1e-12, 1e-2]")
    orig = problem
    if equilibrate:
        problem, dcol, drow, deq = _equilibrate(problem)
    else:
        dcol = np.ones(problem.n_var)
        drow = np.ones(problem.G.shape[0])
        deq = np.ones(problem.A.shape[0])

    c, G, h, A, b = problem.c, problem.G, problem.h, problem.A, problem.b
    q = c.size
    cone = _Cone(problem.n_lin, problem.n_psd)
    ml, n = cone.ml, cone.n
    Gl = G[:ml]
    Gmats = _smat_batch(G[ml:].T, n) if n else None

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, np.linalg.norm(h))

    # starting point: least-norm slack and multiplier
    H0 = G.T @ G
    reg0 = 1e-12 * max(1.0, np.trace(H0) / max(q, 1))
    fac = _kkt_factor(H0, A, reg0)
    x, y = _kkt_solve(fac, A, G.T @ h, b)
    s = h - G @ x
    xd, yd = _kkt_solve(fac, A, -c, np.zeros(A.shape[0]))
    z = G @ xd
    y = yd
    for vec in (s, z):
        t_ = -cone.min_eig(vec)
        nrm = np.linalg.norm(vec)
        if t_ >= -1e-8 * max(nrm, 1.0):
            vec += (1.0 + t_) * cone.e

    status = "max_iter"
    it = 0
    pres = dres = relgap = np.inf
    best = None
    stall = 0
    for it in range(max_iter + 1):
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s)) and np.all(np.isfinite(z))):
            raise SolverError(f"non-finite iterate at iteration {it}")
        rx = -(c + A.T @ y + G.T @ z)
        ry = b - A @ x
        rz = h - G @ x - s
        gap = float(s @ z)
        mu = gap / cone.degree if cone.degree else 0.0
        pcost = float(c @ x)
        dcost = float(-h @ z - b @ y)
        pres = max(np.linalg.norm(ry) / resy0, np.linalg.norm(rz) / resz0)
        dres = np.linalg.norm(rx) / resx0
        relgap = abs(gap) / max(1.0, abs(pcost), abs(dcost))
        if verbose:
            log.info("it %3d pcost %+.9e dcost %+.9e gap %.2e pres %.2e dres %.2e",
                     it, pcost, dcost, gap, pres, dres)
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or score < best[0]:
            best = (score, x.copy(), s.copy(), z.copy(), y.copy(), it)
        if pres <= tol and dres <= tol and relgap <= tol:
            status = "optimal"
            break
        if it == max_iter:
            break
        if stall >= stall_limit:
            break
        if it > 5 and (pres > 1e8 or dres > 1e8):
            status = "infeasible-suspected"
            break

        try:
            W = _Scaling(cone, s, z)
        except np.linalg.LinAlgError:
            status = "infeasible-suspected" if score > 1e-3 else "max_iter"
            break
        lam = W.lam
        Gs = W.scale_columns(Gl, Gmats)
        H = Gs.T @ Gs
        reg = 1e-13 * max(1.0, np.abs(np.diag(H)).max())
        fac = _kkt_factor(H, A, reg)
        Wrz = W.scale_inv_t(rz)

        def reduced(e1, e2, e3, e4):
            # solves A'dy + Gs'dz = e1, A dx = e2, Gs dx + ds = e3, ds + dz = e4
            t_ = e3 - e4
            dx, dy = _kkt_solve(fac, A, e1 + Gs.T @ t_, e2)
            dz_t = Gs @ dx - t_
            return dx, dy, e4 - dz_t, dz_t

        def newton(rs):
            lrs = W.lam_div(rs)
            dx, dy, ds_t, dz_t = reduced(rx, ry, Wrz, lrs)
            for _ in range(n_refine):
                e1 = rx - A.T @ dy - Gs.T @ dz_t
                e2 = ry - A @ dx
                e3 = Wrz - Gs @ dx - ds_t
                e4 = lrs - ds_t - dz_t
                cx, cy, cs, cz = reduced(e1, e2, e3, e4)
                dx, dy, ds_t, dz_t = dx + cx, dy + cy, ds_t + cs, dz_t + cz
            return dx, dy, ds_t, dz_t

        lamsq = W.lam_prod(lam)
        dx, dy, ds_t, dz_t = newton(-lamsq)
        a_s = W.max_step(ds_t)
        a_z = W.max_step(dz_t)
        step = min(1.0, a_s, a_z)
        dsdz = float(ds_t @ dz_t)
        sigma = min(1.0, max(0.0, 1.0 - step + dsdz / max(gap, 1e-300) * step ** 2)) ** 3

        rs = -lamsq - _cone_prod(cone, ds_t, dz_t) + sigma * mu * cone.e
        dx, dy, ds_t, dz_t = newton(rs)
        a_s = W.max_step(ds_t)
        a_z = W.max_step(dz_t)
        step = min(1.0, 0.99 * a_s, 0.99 * a_z)

        ds = W.scale_t(ds_t)
        dz = W.scale_inv(dz_t)
        x = x + step * dx
        y = y + step * dy
        s = s + step * ds
        z = z + step * dz

    if status != "optimal" and best is not None:
        score, x, s, z, y, _ = best
        if score <= tol:
            status = "optimal"

    # undo equilibration
    x_o = x * dcol
    s_o = s / drow
    z_o = z * drow
    y_o = y * deq
    rx = orig.c + orig.A.T @ y_o + orig.G.T @ z_o
    ry = orig.b - orig.A @ x_o
    rz = orig.h - orig.G @ x_o - s_o
    pcost = float(orig.c @ x_o)
    dcost = float(-orig.h @ z_o - orig.b @ y_o)
    gap = float(s_o @ z_o)
    residuals = {
        "primal": float(max(np.linalg.norm(ry) / max(1.0, np.linalg.norm(orig.b)),
                            np.linalg.norm(rz) / max(1.0, np.linalg.norm(orig.h)))),
        "dual": float(np.linalg.norm(rx) / max(1.0, np.linalg.norm(orig.c))),
        "gap": float(abs(gap) / max(1.0, abs(pcost), abs(dcost))),
    }
    return SdpSolution(x_o, s_o, z_o, y_o, orig.n_lin, orig.n_psd, pcost, dcost, status, it,
                       residuals, {"method": "nt-ipm-mehrotra", "tol": tol,
                                   "equilibrated": equilibrate,
                                   "summation_order": "dense numpy/BLAS, fixed column order"})


def solve_lmi(problem: LmiProblem, tol: float = 1e-8, max_iter: int = 100) -> SdpSolution:
    return solve(problem.to_cone(), tol=tol, max_iter=max_iter)


# ---------------------------------------------------------------------------
# independent re-check


@dataclass
class CertReport:
    checks: dict
    passed: bool
    upper_bound: float | None = None

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks, "upper_bound": self.upper_bound}


def certify(solution: SdpSolution, problem: ConeProblem, tol: float = 1e-6) -> CertReport:
    """Recompute residuals and cone memberships from the raw data.

    Nothing from the solver besides the returned point is reused.  A check
    entry is ``(value, ok)``.
    """
    cone = _Cone(problem.n_lin, problem.n_psd)
    x, s, z, y = solution.x, solution.s, solution.z, solution.y
    checks = {}
    rz = problem.h - problem.G @ x - s
    ry = problem.b - problem.A @ x
    rx = problem.c + problem.A.T @ y + problem.G.T @ z
    pr = max(np.abs(rz).max(initial=0.0), np.abs(ry).max(initial=0.0))
    dr = np.abs(rx).max(initial=0.0)
    checks["primal_residual"] = (float(pr), bool(pr <= tol * max(1.0, np.abs(problem.h).max(initial=0))))
    checks["dual_residual"] = (float(dr), bool(dr <= tol * max(1.0, np.abs(problem.c).max(initial=0))))
    # slack recomputed straight from x; this is what an LMI certificate needs
    s_direct = problem.h - problem.G @ x
    me_s = cone.min_eig(s_direct)
    me_z = cone.min_eig(z)
    checks["slack_in_cone"] = (float(me_s), bool(me_s >= -tol))
    checks["multiplier_in_cone"] = (float(me_z), bool(me_z >= -tol))
    pc = float(problem.c @ x)
    dc = float(-problem.h @ z - problem.b @ y)
    rel = abs(pc - dc) / max(1.0, abs(pc), abs(dc))
    checks["relative_gap"] = (float(rel), bool(rel <= max(tol, 1e-6)))
    passed = all(ok for _, ok in checks.values())
    return CertReport(checks, passed, pc)
