"""Strategies for applying (Id - v)^{-1}.

The moving-set iteration needs x = (Id - v)^{-1}(y) once per step, so the
inverse is a first-class object built ahead of time. Four strategies cover
the shapes of v that actually occur:

  LinearExact        v(x) = V x, solve (I - V) x = y by LU factorization
  PicardContraction  any v with Lipschitz constant l < 1, iterate x <- y + v(x)
  Semilinear         v(x) = A x + g(x), iterate x <- (I-A)^{-1}(y + g(x));
                     works when |(I-A)^{-1}| L_g < 1 even if |A| is huge
  ScalarBracket      dim 1, x - v(x) monotone, bisection on a bracket

Every invert call verifies |x - v(x) - y| <= inner_tol a posteriori, which
turns the well-definedness of the inverse from a hypothesis into a runtime
contract.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .analysis import SamplingPlan, power_lambda_max, sample_pairs
from .errors import (
    BracketingFailure,
    ConfigError,
    NoConvergence,
    SingularLinearPart,
)


def _checked_lu(A, what):
    with warnings.catch_warnings():
        # scipy warns on exact zero pivots; the check below raises instead.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=True)
    d = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or d.min() <= A.shape[0] * np.finfo(float).eps * d.max():
        raise SingularLinearPart(f"{what} is numerically singular")
    return lu, piv


def _verify(spec, x, vx, y):
    res = float(np.linalg.norm(x - vx - y))
    if not res <= spec.inner_tol:
        raise NoConvergence(
            f"inverse residual {res:.3e} exceeds inner_tol {spec.inner_tol:.1e}",
            res,
        )
    return x


@dataclass(eq=False)
class LinearExact:
    """Inverse of Id - v for linear v(x) = V x."""

    V: np.ndarray
    inner_tol: float = 1e-12
    max_inner: int = 100_000

    def __post_init__(self):
        self.V = np.asarray(self.V, float)
        n = self.V.shape[0]
        if self.V.shape != (n, n):
            raise ValueError("V must be square")
        self._A = np.eye(n) - self.V
        self._lu = _checked_lu(self._A, "I - V")

    def v(self, x):
        return self.V @ x

    def invert(self, y, inner_log=None):
        y = np.asarray(y, float)
        x = lu_solve(self._lu, y)
        # One iterative-refinement pass keeps the residual at rounding level
        # even for ill-scaled V.
        x = x + lu_solve(self._lu, y - self._A @ x)
        return _verify(self, x, self.V @ x, y)

    def lipschitz(self):
        def matvec(u):
            return lu_solve(self._lu, lu_solve(self._lu, u), trans=1)

        return float(np.sqrt(power_lambda_max(matvec, self.V.shape[0])))


@dataclass(eq=False)
class PicardContraction:
    """Inverse via the fixed-point iteration x <- y + v(x), for l < 1."""

    v_map: object  # callable displacement, Lipschitz constant l
    l: float
    inner_tol: float = 1e-12
    max_inner: int = 100_000

    def __post_init__(self):
        if not 0.0 <= self.l < 1.0:
            raise ConfigError(f"declared contraction l={self.l} must be < 1")

    def v(self, x):
        return np.asarray(self.v_map(x), float)

    def invert(self, y, inner_log=None):
        y = np.asarray(y, float)
        x = y.copy()
        for _ in range(self.max_inner):
            xn = y + self.v(x)
            step = float(np.linalg.norm(xn - x))
            if inner_log is not None:
                inner_log.append(step)
            x = xn
            if step <= self.inner_tol:
                break
        return _verify(self, x, self.v(x), y)

    def lipschitz(self):
        return 1.0 / (1.0 - self.l)


@dataclass(eq=False)
class Semilinear:
    """Inverse for v(x) = A x + g(x), preconditioned by (I - A)^{-1}.

    The plain Picard iteration diverges when |A| >= 1, but the equivalent
    fixed point x = (I-A)^{-1}(y + g(x)) contracts with factor
    |(I-A)^{-1}| L_g, checked against the declared Lipschitz bound l_g.
    """

    A: np.ndarray
    g: object  # callable remainder
    l_g: float
    inner_tol: float = 1e-12
    max_inner: int = 100_000
    inv_norm: float = field(init=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, float)
        n = self.A.shape[0]
        self._M = np.eye(n) - self.A
        self._lu = _checked_lu(self._M, "I - A")

        def matvec(u):
            return lu_solve(self._lu, lu_solve(self._lu, u), trans=1)

        self.inv_norm = float(np.sqrt(power_lambda_max(matvec, n)))
        self.contraction = self.inv_norm * self.l_g
        if self.contraction >= 1.0:
            raise ConfigError(
                f"semilinear contraction factor {self.contraction:.3f} is not < 1"
            )

    def v(self, x):
        return self.A @ x + np.asarray(self.g(x), float)

    def invert(self, y, inner_log=None):
        y = np.asarray(y, float)
        # Stop on a step small enough that the g-increment bound keeps the
        # final residual under inner_tol even when l_g > 1.
        step_tol = 0.5 * self.inner_tol / max(1.0, self.l_g)
        x = lu_solve(self._lu, y)
        for _ in range(self.max_inner):
            xn = lu_solve(self._lu, y + np.asarray(self.g(x), float))
            step = float(np.linalg.norm(xn - x))
            if inner_log is not None:
                inner_log.append(step)
            x = xn
            if step <= step_tol:
                break
        return _verify(self, x, self.v(x), y)

    def lipschitz(self):
        return self.inv_norm / (1.0 - self.contraction)


@dataclass(eq=False)
class ScalarBracket:
    """Bisection inverse for one-dimensional v with monotone x - v(x)."""

    v_map: object
    bracket: tuple
    direction: str = "decreasing"  # slope sign of x - v(x) on the bracket
    inner_tol: float = 1e-12
    max_inner: int = 100_000

    def __post_init__(self):
        a, b = self.bracket
        if not a < b:
            raise ValueError("bracket must satisfy a < b")
        if self.direction not in ("increasing", "decreasing"):
            raise ValueError("direction must be 'increasing' or 'decreasing'")

    def v(self, x):
        return np.asarray(self.v_map(np.atleast_1d(np.asarray(x, float))), float)

    def _w(self, t):
        return t - float(self.v(np.array([t]))[0])

    def invert(self, y, inner_log=None):
        target = float(np.asarray(y, float).ravel()[0])
        a, b = float(self.bracket[0]), float(self.bracket[1])
        ga = self._w(a) - target
        gb = self._w(b) - target
        if ga == 0.0:
            return np.array([a])
        if gb == 0.0:
            return np.array([b])
        if np.sign(ga) == np.sign(gb):
            raise BracketingFailure(
                f"x - v(x) - y has no sign change on [{a}, {b}]: "
                f"endpoints {ga:.3e}, {gb:.3e}"
            )
        gm = np.inf
        mid = a
        for _ in range(self.max_inner):
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break  # interval cannot shrink further in floats
            gm = self._w(mid) - target
            if inner_log is not None:
                inner_log.append(abs(gm))
            if abs(gm) <= self.inner_tol:
                return np.array([mid])
            if np.sign(gm) == np.sign(ga):
                a, ga = mid, gm
            else:
                b = mid
        raise NoConvergence(
            f"bisection stalled at residual {abs(gm):.3e} "
            f"(inner_tol {self.inner_tol:.1e})",
            abs(gm),
        )

    def lipschitz(self, seed=0, count=10_000):
        a, b = float(self.bracket[0]), float(self.bracket[1])
        plan = SamplingPlan(seed=seed, count=count, lo=a, hi=b)
        best = 0.0
        for x1, x2 in sample_pairs(plan, 1):
            dw = self._w(float(x1[0])) - self._w(float(x2[0]))
            if abs(dw) < 1e-12:
                continue
            best = max(best, abs(float(x1[0]) - float(x2[0])) / abs(dw))
        return best


InverseSpec = LinearExact | PicardContraction | Semilinear | ScalarBracket


def invert(spec, y, inner_log=None):
    """Apply (Id - v)^{-1} to y under the given strategy.

    The result always satisfies |x - v(x) - y| <= spec.inner_tol; failure to
    reach that raises NoConvergence with the achieved residual.
    """
    return spec.invert(y, inner_log=inner_log)


def lipschitz_of_inverse(spec):
    """Lipschitz constant of (Id - v)^{-1} for the strategy at hand.

    Exact for LinearExact (largest singular value of (I-V)^{-1}), the
    standard bounds 1/(1-l) and |(I-A)^{-1}|/(1 - |(I-A)^{-1}| L_g) for the
    contraction strategies, and a seeded sampled estimate (a lower bound)
    for ScalarBracket.
    """
    return spec.lipschitz()
