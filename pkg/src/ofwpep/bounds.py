"""Closed-form regret bounds, potentials and the sum-of-squares step of the
potential-based analysis of fixed-parameter online Frank-Wolfe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ofw_scalars
from .simulate import Trace

C34 = 3.0 ** 0.75

NOT_APPLICABLE = None
"""Returned by :func:`theorem1_bound` when the horizon is below 3."""


def ofw_params(T, L=1.0, D=1.0):
    """``(eta, sigma)`` of the fixed-horizon algorithm."""
    if T < 1:
        raise ValueError("T must be positive")
    return ofw_scalars(T, L, D)


def theorem1_bound(T, L=1.0, D=1.0):
    """``4 L D T^{3/4} / 3^{3/4}``, or :data:`NOT_APPLICABLE` for ``T < 3``."""
    if T < 3:
        return NOT_APPLICABLE
    return 4.0 * L * D * T ** 0.75 / C34


def lemma1_coefficients(T, L=1.0, D=1.0):
    """Per-step weights of ``||g_t||^2`` and ``||x_t - v_t||^2`` and the weight of ``||x* - x_1||^2``."""
    cg = 2.0 * D / (L * C34 * T ** 0.25)
    cv = L / (D * C34 * T ** 0.25)
    cx = L * T ** 0.75 / (D * C34)
    return cg, cv, cx


def theorem1_refined(trace: Trace, x_star, L=1.0, D=1.0):
    """Data-dependent three-term bound evaluated on a run of the fixed algorithm.

    The trace must contain ``v_1..v_T`` (as produced by ``run_ofw_fixed``).
    """
    T = trace.T
    if T < 3:
        return NOT_APPLICABLE
    if trace.v.shape[0] < T:
        raise ValueError("trace must contain v_1..v_T")
    cg, cv, cx = lemma1_coefficients(T, L, D)
    x1 = trace.x[0]
    sg = float(np.sum(trace.grads ** 2))
    sv = float(np.sum((trace.played - trace.v[:T]) ** 2))
    return cg * sg + cv * sv + cx * float(np.sum((np.asarray(x_star) - x1) ** 2))


def ftrl_bound(T, L, D, eta):
    if eta <= 0:
        raise ValueError("eta must be positive")
    return 0.5 * eta * L * L * T + D * D / (2.0 * eta)


# ---------------------------------------------------------------------------
# potentials


def _check_coupled(ofw: Trace, ftrl: Trace):
    if ofw.grads.shape != ftrl.grads.shape or not np.array_equal(ofw.grads, ftrl.grads):
        raise ValueError("the two traces must share their gradient sequence")


def potential_family(t, ofw: Trace, ftrl: Trace, eta, a, b):
    """Parametric potential at step ``t`` (``0 <= t <= T``).

    ``ofw.x`` and ``ftrl.x`` need rows up to ``t+1``; ``ofw.x[0]`` is ``x_1``.
    """
    _check_coupled(ofw, ftrl)
    x, y, g = ofw.x, ftrl.x, ofw.grads
    x1 = x[0]
    xn, yn = x[t], y[t]  # x_{t+1}, y_{t+1}
    lin = float(np.sum(g[:t] * (x[:t] - yn)))
    Gt = g[:t].sum(axis=0)
    dxy = xn - yn
    val = lin + a * float(dxy @ dxy) + b * eta * float(Gt @ dxy)
    val += 0.5 * b * (float((xn - x1) @ (xn - x1)) - float((yn - x1) @ (yn - x1)))
    val -= float((yn - x1) @ (yn - x1)) / (2.0 * eta)
    return val


def potential_phi(t, ofw: Trace, ftrl: Trace, eta):
    """Potential of the fixed-parameter analysis: the family at ``a = 1/(6 eta)``, ``b = 0``."""
    _check_coupled(ofw, ftrl)
    x, y, g = ofw.x, ftrl.x, ofw.grads
    x1 = x[0]
    xn, yn = x[t], y[t]
    return (float(np.sum(g[:t] * (x[:t] - yn)))
            + float((xn - yn) @ (xn - yn)) / (6.0 * eta)
            - float((yn - x1) @ (yn - x1)) / (2.0 * eta))


def potential_psi(t, ftrl: Trace, eta):
    y, g = ftrl.x, ftrl.grads
    yn = y[t]
    return float(np.sum(g[:t] * (y[:t] - yn))) - float((yn - y[0]) @ (yn - y[0])) / (2.0 * eta)


# ---------------------------------------------------------------------------
# proof parameters and the sum-of-squares step


@dataclass(frozen=True)
class ProofParams:
    eta: float
    sigma: float
    a: float
    lambda_g: float
    lam: float | None = None

    def __post_init__(self):
        for k in ("eta", "sigma", "a", "lambda_g"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be nonnegative")
        if self.sigma > 1:
            raise ValueError("sigma must not exceed 1")

    def to_dict(self):
        return {"eta": self.eta, "sigma": self.sigma, "a": self.a, "lambda_g": self.lambda_g,
                "lambda": self.lam}


def optimal_proof_params(T, L=1.0, D=1.0) -> ProofParams:
    """Parameters for which the potential argument yields the closed-form constant ``4 / 3^{3/4}``.

    ``sigma`` is clamped at 1 (it only binds at ``T = 3``, where it equals 1 anyway).
    """
    if T < 3:
        raise ValueError("the potential argument needs T >= 3")
    eta = D * C34 / (2.0 * L * T ** 0.75)
    sigma = min(1.0, math.sqrt(3.0 / T))
    a = 1.0 / (6.0 * eta)
    lambda_g = 2.0 * a * sigma ** 2 * D ** 2 / L ** 2
    return ProofParams(eta, sigma, a, lambda_g)


def regret_upper_from_proof(T, L, D, proof: ProofParams):
    return (D * D / (2.0 * proof.eta) + proof.lambda_g * L * L * T
            + proof.a * proof.sigma ** 2 * D * D * T)


def per_step_budget(proof: ProofParams, L=1.0, D=1.0):
    """Bound on one potential increment implied by the proof parameters."""
    return proof.lambda_g * L * L + proof.a * proof.sigma ** 2 * D * D


@dataclass
class SosCertificate:
    feasible: bool
    conditions: dict
    coefficients: tuple
    discriminant: float
    conservative_discriminant: float
    lambda_interval: tuple | None
    lam: float | None
    schur_matrix: np.ndarray | None
    schur_min_eig: float | None

    def to_dict(self):
        return {
            "feasible": self.feasible,
            "conditions": self.conditions,
            "coefficients": list(self.coefficients),
            "discriminant": self.discriminant,
            "conservative_discriminant": self.conservative_discriminant,
            "lambda_interval": None if self.lambda_interval is None else list(self.lambda_interval),
            "lambda": self.lam,
            "schur_matrix": None if self.schur_matrix is None else self.schur_matrix.tolist(),
            "schur_min_eig": self.schur_min_eig,
        }


def sos_quadratic(eta, sigma, a, lambda_g):
    """Coefficients ``(c2, c1, c0)`` with ``c2 l^2 + c1 l + c0 <= 0`` iff the 2x2 Schur
    condition holds at multiplier ``l`` (given the diagonal conditions)."""
    q = 2.0 * a * sigma - 1.0 / (4.0 * lambda_g)
    c2 = a * sigma / (2.0 * lambda_g)
    c1 = -(q / eta - a / (2.0 * lambda_g))
    c0 = (1.0 - 2.0 * sigma) * a * a + a / (4.0 * lambda_g) - q / (2.0 * eta)
    return c2, c1, c0


def schur_matrix(eta, sigma, a, lambda_g, lam):
    """Gram matrix of the quadratic form in ``(y_t - y_{t+1}, x_t - y_{t+1})`` that must be PSD."""
    p = (1.0 + 2.0 * lam) / (2.0 * eta) + a - lam * lam / (4.0 * lambda_g)
    off = -(a + lam / (4.0 * lambda_g))
    q = 2.0 * a * sigma - 1.0 / (4.0 * lambda_g)
    return np.array([[p, off], [off, q]])


def sos_certificate(eta, sigma, a, lambda_g, L=1.0, D=1.0) -> SosCertificate:
    """Check that the remainder of the one-step argument is a sum of squares.

    The quadratic is written exactly; the discriminant from the variant whose
    constant term is replaced by ``a^2`` is reported as well but not used for
    the decision (it is zero at the optimal parameters).
    """
    for name, val in (("eta", eta), ("sigma", sigma), ("lambda_g", lambda_g), ("L", L), ("D", D)):
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    if a < 0:
        raise ValueError("a must be nonnegative")
    c2, c1, c0 = sos_quadratic(eta, sigma, a, lambda_g)
    q = 2.0 * a * sigma - 1.0 / (4.0 * lambda_g)
    lin = -c1
    disc = c1 * c1 - 4.0 * c2 * c0
    disc_cons = c1 * c1 - 4.0 * c2 * a * a
    conds = {"diagonal": bool(q >= 0), "linear_coefficient": bool(lin >= 0),
             "discriminant": bool(disc >= 0)}
    interval = lam = M = me = None
    if c2 > 0 and disc >= 0:
        r = math.sqrt(disc)
        lo, hi = (-c1 - r) / (2 * c2), (-c1 + r) / (2 * c2)
        if hi >= 0:
            interval = (max(0.0, lo), hi)
            lam = 0.5 * (interval[0] + interval[1])
            M = schur_matrix(eta, sigma, a, lambda_g, lam)
            me = float(np.linalg.eigvalsh(M)[0])
    feasible = bool(all(conds.values()) and interval is not None and me is not None and me >= -1e-10)
    return SosCertificate(feasible, conds, (c2, c1, c0), disc, disc_cons, interval, lam, M, me)
