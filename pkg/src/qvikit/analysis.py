"""Constant estimation and monotonicity checks.

Two computation styles live here. Linear maps get spectral answers
(operator norms by power iteration, pair-monotonicity moduli by a symmetric
eigenvalue solve). Everything else is estimated by seeded sampling, and the
estimators are one-sided by construction: a sampled Lipschitz constant is a
lower bound on the true one, a sampled pair modulus is an upper bound on the
true infimum. Callers that need safe step sizes must apply safety factors,
which is what the solvers module does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SamplingError


@dataclass(frozen=True)
class SamplingPlan:
    """Seeded plan for pair-sampling estimators.

    Pairs are drawn in the box [lo, hi]^n: roughly half with both points
    uniform (captures global behaviour), half with the second point a small
    offset of the first (captures local slopes). Pairs closer than
    ``min_separation`` are rejected.
    """

    seed: int
    count: int = 10_000
    lo: float = -10.0
    hi: float = 10.0
    min_separation: float = 1e-6

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("count must be at least 2")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")


def sample_pairs(plan, dim):
    """Materialize the plan's point pairs in dimension ``dim``."""
    rng = np.random.default_rng(plan.seed)
    pairs = []
    for _ in range(plan.count):
        x = rng.uniform(plan.lo, plan.hi, dim)
        if rng.uniform() < 0.5:
            y = rng.uniform(plan.lo, plan.hi, dim)
        else:
            u = rng.normal(size=dim)
            nu = np.linalg.norm(u)
            if nu == 0.0:
                continue
            y = np.clip(x + 1e-3 * (plan.hi - plan.lo) * u / nu, plan.lo, plan.hi)
        if np.linalg.norm(x - y) >= plan.min_separation:
            pairs.append((x, y))
    if not pairs:
        raise SamplingError("sampling plan produced no usable pairs")
    return pairs


def power_lambda_max(matvec, n, tol=1e-10, max_iter=100_000):
    """Largest eigenvalue of a symmetric PSD operator given as a matvec.

    Runs power iteration from two deterministic starts (all ones, and
    1..n) and keeps the larger Rayleigh quotient; the second start covers
    the unlucky case of the first being orthogonal to the top eigenvector.
    """
    best = 0.0
    for start in (np.ones(n), np.arange(1.0, n + 1.0)):
        u = start / np.linalg.norm(start)
        lam = 0.0
        for _ in range(max_iter):
            w = matvec(u)
            lam_new = float(u @ w)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                lam_new = 0.0
                break
            u = w / nw
            if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
                lam = lam_new
                break
            lam = lam_new
        best = max(best, lam)
    return best


def operator_norm(M):
    """Largest singular value of a square matrix, relative accuracy 1e-10."""
    M = np.asarray(M, float)
    lam = power_lambda_max(lambda u: M.T @ (M @ u), M.shape[0])
    return float(np.sqrt(max(lam, 0.0)))


def pair_modulus_linear(A1, A2):
    """Strong-monotonicity modulus of the linear pair (A1, A2).

    This is the smallest eigenvalue of the symmetric part of A1^T A2; a
    positive result certifies <A1 x - A1 y, A2 x - A2 y> >= gamma |x - y|^2.
    """
    A1 = np.asarray(A1, float)
    A2 = np.asarray(A2, float)
    if A1.shape != A2.shape or A1.shape[0] != A1.shape[1]:
        raise ValueError("matrices must be square and share a dimension")
    S = (A1.T @ A2 + A2.T @ A1) / 2.0
    return float(np.linalg.eigvalsh(S)[0])


def _field_dim(field, dim):
    if dim is not None:
        return dim
    field_dim = getattr(field, "dim", None)
    if field_dim is None:
        raise ValueError("pass dim= for plain-callable fields")
    return field_dim


def sample_pair_modulus(f, w, plan, dim=None):
    """Sampled pair modulus: min over pairs of <df, dw> / |dx|^2.

    Upper bound on the true infimum (every sampled ratio is at least it),
    deterministic given the plan's seed.
    """
    dim = _field_dim(f, dim)
    best = np.inf
    for x, y in sample_pairs(plan, dim):
        num = float(np.dot(np.asarray(f(x)) - np.asarray(f(y)),
                           np.asarray(w(x)) - np.asarray(w(y))))
        best = min(best, num / float(np.dot(x - y, x - y)))
    return best


def sample_lipschitz(f, plan, dim=None):
    """Sampled Lipschitz constant: max over pairs of |df| / |dx|.

    Lower bound on the true constant, deterministic given the seed.
    """
    dim = _field_dim(f, dim)
    best = 0.0
    for x, y in sample_pairs(plan, dim):
        ratio = float(np.linalg.norm(np.asarray(f(x)) - np.asarray(f(y)))
                      / np.linalg.norm(x - y))
        best = max(best, ratio)
    return best


@dataclass(frozen=True)
class PseudoReport:
    checked: int
    violations: int
    witnesses: tuple

    @property
    def ok(self):
        return self.violations == 0


def check_pseudo_pair(f, w, plan, dim=None, slack=1e-12):
    """Sampled pseudo-monotonicity check for the pair (f, w).

    For each ordered pair (a, b): if <f(a), w(b)-w(a)> >= -slack then
    <f(b), w(b)-w(a)> >= -slack must hold too. Zero violations is evidence,
    not proof. Up to ten witness pairs are kept for inspection.
    """
    dim = _field_dim(f, dim)
    checked = 0
    violations = 0
    witnesses = []
    for x, y in sample_pairs(plan, dim):
        fx, fy = np.asarray(f(x), float), np.asarray(f(y), float)
        wx, wy = np.asarray(w(x), float), np.asarray(w(y), float)
        for a, b, fa, fb, wa, wb in ((x, y, fx, fy, wx, wy),
                                     (y, x, fy, fx, wy, wx)):
            checked += 1
            d = wb - wa
            if float(np.dot(fa, d)) >= -slack and float(np.dot(fb, d)) < -slack:
                violations += 1
                if len(witnesses) < 10:
                    witnesses.append((a.copy(), b.copy()))
    return PseudoReport(checked, violations, tuple(witnesses))


def composition_modulus_bound(gamma, l):
    """Strong-monotonicity modulus gamma/(1+l)^2 inherited by f o (Id-v)^{-1}."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if l < 0:
        raise ValueError("l must be nonnegative")
    return gamma / (1.0 + l) ** 2
