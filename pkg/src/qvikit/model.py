"""Problem model for quasi-variational inequalities with a translated set.

A problem asks for x* with 0 in f(x*) + N_{K(x*)}(x*) where the constraint
set moves by translation, K(x) = C + v(x). Pulling the translation out turns
it into a fixed-set variational inequality in y = x - v(x):

    0 in T(y*) + N_C(y*),  T = f o (Id - v)^{-1},  x* = (Id - v)^{-1}(y*).

Types here are immutable values; all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as edsl
from .errors import ConfigError, EvalError
from .inverse import invert


def as_vector(values, dim=None):
    """Coerce to a finite 1-D float array, optionally checking the length."""
    x = np.atleast_1d(np.asarray(values, float))
    if x.ndim != 1:
        raise ValueError(f"expected a vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    if dim is not None and x.size != dim:
        raise ValueError(f"expected dimension {dim}, got {x.size}")
    return x


@dataclass(frozen=True)
class WholeSpace:
    dim: int


@dataclass(frozen=True)
class NonnegativeOrthant:
    dim: int


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", as_vector(self.lower))
        object.__setattr__(self, "upper", as_vector(self.upper))
        if self.lower.size != self.upper.size:
            raise ValueError("box bounds must share a dimension")
        if not np.all(self.lower <= self.upper):
            raise ValueError("box needs lower <= upper componentwise")

    @property
    def dim(self):
        return self.lower.size


ConvexSet = WholeSpace | NonnegativeOrthant | Box


def project(cset, z):
    """Euclidean projection onto the set; exact for all three variants."""
    z = np.asarray(z, float)
    if z.shape != (cset.dim,):
        raise ValueError(f"dimension mismatch: point {z.shape} vs set ({cset.dim},)")
    if isinstance(cset, WholeSpace):
        return z.copy()
    if isinstance(cset, NonnegativeOrthant):
        return np.maximum(z, 0.0)
    return np.clip(z, cset.lower, cset.upper)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Map R^n -> R^n, either n expression ASTs or split as matrix + remainder.

    The split form evaluates to matrix @ x + remainder(x) and is what makes
    spectral analysis possible; fields without a linear split fall back to
    sampling estimators.
    """

    dim: int
    components: tuple | None = None
    matrix: np.ndarray | None = None
    remainder: tuple | None = None
    declared_lipschitz: float | None = None

    def __post_init__(self):
        if (self.components is None) == (self.matrix is None):
            raise ValueError("give either components or a matrix (split form)")
        if self.matrix is not None:
            M = np.asarray(self.matrix, float)
            if M.shape != (self.dim, self.dim):
                raise ValueError(f"matrix must be {self.dim}x{self.dim}")
            if not np.all(np.isfinite(M)):
                raise ValueError("matrix entries must be finite")
            object.__setattr__(self, "matrix", M)

    @classmethod
    def from_exprs(cls, texts, dim, declared_lipschitz=None):
        comps = tuple(edsl.parse(t, dim) for t in texts)
        if len(comps) != dim:
            raise ValueError(f"need {dim} component expressions, got {len(comps)}")
        return cls(dim, components=comps, declared_lipschitz=declared_lipschitz)

    @classmethod
    def from_matrix(cls, M, remainder_texts=None, declared_lipschitz=None):
        M = np.asarray(M, float)
        dim = M.shape[0]
        rem = None
        if remainder_texts is not None:
            rem = tuple(edsl.parse(t, dim) for t in remainder_texts)
            if len(rem) != dim:
                raise ValueError(f"need {dim} remainder expressions, got {len(rem)}")
        return cls(dim, matrix=M, remainder=rem,
                   declared_lipschitz=declared_lipschitz)

    @classmethod
    def zero(cls, dim):
        return cls.from_matrix(np.zeros((dim, dim)))

    def _eval_asts(self, asts, x):
        out = np.empty(self.dim)
        for i, ast in enumerate(asts):
            try:
                out[i] = edsl.eval_expr(ast, x)
            except EvalError as exc:
                raise EvalError(f"component {i + 1}: {exc}") from exc
        return out

    def __call__(self, x):
        x = np.asarray(x, float)
        if x.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: {x.shape} vs ({self.dim},)")
        if self.matrix is not None:
            out = self.matrix @ x
            if self.remainder is not None:
                out = out + self._eval_asts(self.remainder, x)
            return out
        return self._eval_asts(self.components, x)


@dataclass(frozen=True)
class FuncField:
    """Callable adapter so composed maps fit wherever a field is expected."""

    dim: int
    fn: object

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, float)), float)


@dataclass(frozen=True)
class Constant:
    """A named constant with its provenance: declared, spectral, or sampled."""

    value: float
    source: str

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("stored constants must be strictly positive")
        if self.source not in ("declared", "spectral", "sampled"):
            raise ValueError(f"unknown source {self.source!r}")


@dataclass(frozen=True)
class ProblemConstants:
    """Optional Lipschitz/monotonicity constants attached to a problem.

    L: Lipschitz constant of f; l: of v; l_tilde: of (Id-v)^{-1};
    gamma: strong pair-monotonicity modulus of (f, Id-v); mu: strong
    monotonicity modulus of f alone.
    """

    L: Constant | None = None
    l: Constant | None = None
    l_tilde: Constant | None = None
    gamma: Constant | None = None
    mu: Constant | None = None

    def require(self, name):
        c = getattr(self, name)
        if c is None:
            raise ConfigError(
                f"constant {name!r} is not available: declare it on the problem "
                "or allow sampling"
            )
        return c.value

    def get(self, name):
        c = getattr(self, name)
        return None if c is None else c.value


@dataclass(frozen=True, eq=False)
class QviProblem:
    name: str
    dim: int
    f: VectorField
    v: VectorField
    inverse: object  # InverseSpec matching v
    set: ConvexSet
    constants: ProblemConstants = ProblemConstants()

    def __post_init__(self):
        dims = {self.dim, self.f.dim, self.v.dim, self.set.dim}
        if dims != {self.dim}:
            raise ValueError(f"dimension mismatch across problem parts: {dims}")


def project_moving(problem, base, z):
    """Projection onto the moved set K(base) = C + v(base).

    Uses proj_{C+t}(z) = t + proj_C(z - t) with t = v(base).
    """
    t = problem.v(np.asarray(base, float))
    return t + project(problem.set, np.asarray(z, float) - t)


def to_vi(problem):
    """Fixed-set variational-inequality form: the map T = f o (Id-v)^{-1} and C."""
    T = FuncField(problem.dim,
                  lambda y: problem.f(invert(problem.inverse, y)))
    return T, problem.set


def natural_residual(problem, x, h):
    """Fixed-point residual |y - proj_C(y - h f(x))| with y = x - v(x).

    Zero exactly at solutions, for any fixed h > 0; this is the stopping
    quantity all solvers report.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, float)
    y = x - problem.v(x)
    return float(np.linalg.norm(y - project(problem.set, y - h * problem.f(x))))
