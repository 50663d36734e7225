"""Seminorms and growth functions, with numerical property verification.

Two ingredients of the integrand ``exp(-f(p(x)) + alpha*q(x)^2)`` live here:

* :class:`Seminorm` -- non-negative, absolutely homogeneous, subadditive
  functionals on finite coordinate vectors.  Supported shapes are
  matrix-induced norms ``v -> ||A v||_2``, weighted lattice norms
  ``v -> (w * sum |v_i|^s)^(1/s)`` with ``s >= 1``, and opaque custom
  evaluators.
* :class:`GrowthFunction` -- scalar functions required to be continuous,
  submultiplicative (``f(xy) <= f(x) f(y)``), positive away from zero and
  growing strictly faster than ``x^2`` near zero (``f(x)/x^2 -> 0``).

None of the properties are proven symbolically.  Checkers sample grids or
random probes and return a :class:`PropertyReport` with a witness on
failure, so a bad input is diagnosed rather than silently accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError

# Numerical-rank cutoff (relative to the largest singular value) used when
# extracting ker(A), and the threshold below which q is considered to vanish
# on that kernel.  Standard numerical-rank practice; fixtures rely on them.
KERNEL_RANK_CUTOFF = 1e-10
KERNEL_VANISH_TOL = 1e-8

# Multiplicative slack for floating-point comparisons in property checks.
CHECK_REL_SLACK = 1e-9


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of a sampled property check."""

    name: str
    passed: bool
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True, eq=False)
class Seminorm:
    """Seminorm on R^d with a declared structure.

    ``lipschitz`` is a constant L with ``p(v) <= L ||v||_2``; it is computed
    for matrix and lattice kinds and must be declared for custom ones (it may
    be None when unknown).
    """

    kind: str  # "matrix" | "lattice_power" | "custom"
    matrix: np.ndarray | None = None
    power: float | None = None
    weight: float | None = None
    func: Callable[[np.ndarray], float] | None = None
    lipschitz: float | None = None

    @staticmethod
    def from_matrix(a) -> "Seminorm":
        """p(v) = ||A v||_2 for an m x d real matrix A."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("matrix seminorm needs a 2-d array")
        lip = float(np.linalg.svd(a, compute_uv=False)[0]) if a.size else 0.0
        return Seminorm(kind="matrix", matrix=a, lipschitz=lip)

    @staticmethod
    def l2(dim: int) -> "Seminorm":
        """Euclidean norm on R^dim."""
        return Seminorm.from_matrix(np.eye(dim))

    @staticmethod
    def lattice(power: float, weight: float, dim_hint: int | None = None) -> "Seminorm":
        """p(v) = (weight * sum |v_i|^power)^(1/power).

        ``power >= 1`` and ``weight > 0`` are required; anything else is not a
        seminorm.  For power < 2 the Lipschitz constant depends on the vector
        length, so it is computed from ``dim_hint`` when given.
        """
        if power < 1:
            raise ValueError(f"lattice_power needs s >= 1, got {power}")
        if weight <= 0:
            raise ValueError(f"lattice_power needs weight > 0, got {weight}")
        lip = weight ** (1.0 / power)
        if power < 2:
            lip = None if dim_hint is None else lip * dim_hint ** (1 / power - 0.5)
        return Seminorm(kind="lattice_power", power=float(power), weight=float(weight),
                        lipschitz=lip)

    @staticmethod
    def custom(func: Callable[[np.ndarray], float], lipschitz: float | None = None) -> "Seminorm":
        return Seminorm(kind="custom", func=func, lipschitz=lipschitz)

    @property
    def dim(self) -> int | None:
        """Required input length, or None when any length is accepted."""
        return self.matrix.shape[1] if self.kind == "matrix" else None

    def __call__(self, v) -> float:
        return float(self.batch(np.asarray(v, dtype=float)[None, :])[0])

    def batch(self, vs: np.ndarray) -> np.ndarray:
        """Evaluate on an (m, d) array of row vectors."""
        vs = np.asarray(vs, dtype=float)
        if vs.ndim != 2:
            raise DimensionMismatchError("batch evaluation expects an (m, d) array")
        if self.kind == "matrix":
            if vs.shape[1] != self.matrix.shape[1]:
                raise DimensionMismatchError(
                    f"seminorm expects length {self.matrix.shape[1]}, got {vs.shape[1]}")
            return np.linalg.norm(vs @ self.matrix.T, axis=1)
        if self.kind == "lattice_power":
            s = self.power
            return (self.weight * np.abs(vs) ** s @ np.ones(vs.shape[1])) ** (1.0 / s)
        return np.array([float(self.func(v)) for v in vs])


def eval_seminorm(p: Seminorm, v) -> float:
    """Value of the seminorm at a single vector."""
    return p(v)


@dataclass(frozen=True, eq=False)
class GrowthFunction:
    """Scalar growth function f on [0, inf).

    Kinds: ``power`` is f(x) = x^exponent with exponent = 2 + eps > 2;
    ``log_power`` is f(x) = x^2 ln(a + x) with a >= e (submultiplicative but
    *without* the super-quadratic gap -- the checker catches this); ``custom``
    wraps an arbitrary evaluator.
    """

    kind: str  # "power" | "log_power" | "custom"
    exponent: float | None = None
    a: float | None = None
    func: Callable | None = None

    @staticmethod
    def power(eps: float) -> "GrowthFunction":
        if eps <= 0:
            raise ValueError(f"power growth needs eps > 0, got {eps}")
        return GrowthFunction(kind="power", exponent=2.0 + float(eps))

    @staticmethod
    def log_power(a: float) -> "GrowthFunction":
        if a < np.e:
            raise ValueError(f"log_power needs a >= e, got {a}")
        return GrowthFunction(kind="log_power", a=float(a))

    @staticmethod
    def custom(func: Callable) -> "GrowthFunction":
        return GrowthFunction(kind="custom", func=func)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            out = x ** self.exponent
        elif self.kind == "log_power":
            out = x * x * np.log(self.a + x)
        else:
            out = np.asarray(self.func(x), dtype=float)
        return float(out) if out.ndim == 0 else out


def _probe_vectors(dim: int, count: int, key: int) -> np.ndarray:
    rng = np.random.default_rng(key)
    return rng.standard_normal((count, dim))


def check_seminorm_axioms(p: Seminorm, dim: int, probes: int = 32, key: int = 0) -> PropertyReport:
    """Sampled check of homogeneity and the triangle inequality.

    Scale factors always include t = 2 so quadratic impostors produce the
    canonical witness.  Returns the first violating (t, v) or (v, w) pair.
    """
    vs = _probe_vectors(dim, probes, key)
    ws = _probe_vectors(dim, probes, key + 1)
    scalars = [2.0, -1.0, 0.5, -3.25]
    zero = p(np.zeros(dim))
    if not np.isfinite(zero) or abs(zero) > KERNEL_VANISH_TOL:
        return PropertyReport("seminorm_axioms", False, witness=np.zeros(dim),
                              detail=f"p(0) = {zero!r}, expected 0")
    for v in vs:
        pv = p(v)
        if not np.isfinite(pv) or pv < 0:
            return PropertyReport("seminorm_axioms", False, witness=v,
                                  detail=f"p(v) = {pv!r} not finite non-negative")
        for t in scalars:
            lhs, rhs = p(t * v), abs(t) * pv
            tol = CHECK_REL_SLACK * (abs(rhs) + 1.0)
            if abs(lhs - rhs) > tol:
                return PropertyReport("seminorm_axioms", False, witness=(t, v),
                                      detail=f"homogeneity fails at t={t}: {lhs} != {rhs}")
    for v, w in zip(vs, ws):
        lhs, rhs = p(v + w), p(v) + p(w)
        if lhs > rhs + CHECK_REL_SLACK * (rhs + 1.0):
            return PropertyReport("seminorm_axioms", False, witness=(v, w),
                                  detail=f"triangle inequality fails: {lhs} > {rhs}")
    return PropertyReport("seminorm_axioms", True)


_DEFAULT_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 0.0625, 16.0, 0.001, 100.0)


def check_submultiplicative(f: GrowthFunction, grid=_DEFAULT_GRID) -> PropertyReport:
    """Verify f(xy) <= f(x) f(y) (1 + slack) on all grid pairs."""
    pts = [float(x) for x in grid]
    for x in pts:
        for y in pts:
            fxy, bound = f(x * y), f(x) * f(y)
            if not np.isfinite(fxy):
                return PropertyReport("submultiplicative", False, witness=(x, y),
                                      detail=f"f({x * y}) not finite")
            if fxy > bound * (1.0 + CHECK_REL_SLACK) + 1e-300:
                return PropertyReport("submultiplicative", False, witness=(x, y),
                                      detail=f"f({x}*{y})={fxy} > f({x})*f({y})={bound}")
    return PropertyReport("submultiplicative", True)


# Dyadic grid 2^-1 .. 2^-40 for the gap check; past 2^-40 the ratio f(x)/x^2
# is no longer meaningful in double precision.
SUPERQUAD_DEPTH = 40
SUPERQUAD_TOL = 1e-6


def check_superquadratic(f: GrowthFunction) -> PropertyReport:
    """Check f(x) > 0 for x > 0 and the gap f(x)/x^2 -> 0 at 0.

    The ratio is evaluated on x = 2^-k, k = 1..40.  Passing requires positive
    values throughout, a non-increasing tail, and decay of the ratio: either
    the final ratio is below ``SUPERQUAD_TOL`` or it is at most half the
    ratio twenty levels up (a slow power x^(2+eps) with tiny eps thins out
    geometrically in k long before it reaches the absolute threshold).
    """
    ks = np.arange(1, SUPERQUAD_DEPTH + 1)
    xs = 2.0 ** (-ks)
    fx = np.asarray(f(xs), dtype=float)
    if np.any(~np.isfinite(fx)) or np.any(fx <= 0.0):
        bad = int(np.argmax(~np.isfinite(fx) | (fx <= 0.0)))
        return PropertyReport("superquadratic_gap", False, witness=xs[bad],
                              detail=f"f({xs[bad]}) = {fx[bad]!r}, expected positive")
    ratios = fx / xs ** 2
    tail = ratios[-10:]
    if np.any(np.diff(tail) > CHECK_REL_SLACK * tail[:-1]):
        return PropertyReport("superquadratic_gap", False, witness=ratios[-10:],
                              detail="ratio f(x)/x^2 not non-increasing near 0")
    if ratios[-1] <= SUPERQUAD_TOL or ratios[-1] <= 0.5 * ratios[-21]:
        return PropertyReport("superquadratic_gap", True)
    return PropertyReport("superquadratic_gap", False, witness=float(ratios[-1]),
                          detail=f"f(x)/x^2 -> {ratios[-1]:.3e} at x = 2^-40, no decay to 0")


def _kernel_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of a matrix (rows of result)."""
    if a.size == 0:
        return np.eye(a.shape[1])
    _, s, vt = np.linalg.svd(a)
    cutoff = KERNEL_RANK_CUTOFF * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return vt[rank:]


def kernel_compatibility(p: Seminorm, q: Seminorm) -> PropertyReport:
    """Decide whether ker(p) is contained in ker(q).

    This is the finite-dimensional surrogate for injectivity of the natural
    map between the completions by p+q and by p; when it fails, the balancing
    supremum is infinite.  Matrix p with matrix or lattice q is decidable;
    lattice p (s >= 1, weight > 0) has trivial kernel, hence is always
    compatible.  Custom evaluators are reported undecidable rather than
    guessed.  ``witness`` carries a kernel vector of p with q(witness) > 0
    in the incompatible case.
    """
    if p.kind == "lattice_power":
        return PropertyReport("kernel_compatibility", True, detail="compatible: ker p = {0}")
    if p.kind != "matrix":
        return PropertyReport("kernel_compatibility", True, witness=None,
                              detail="undecidable: p has no matrix structure")
    basis = _kernel_basis(p.matrix)
    if basis.shape[0] == 0:
        return PropertyReport("kernel_compatibility", True, detail="compatible: ker p = {0}")
    if q.kind == "custom":
        return PropertyReport("kernel_compatibility", True, witness=None,
                              detail="undecidable: q has no matrix structure")
    for b in basis:
        if q.kind == "lattice_power":
            qb = q(b)
        else:
            if q.matrix.shape[1] != b.shape[0]:
                raise DimensionMismatchError("p and q act on different dimensions")
            qb = q(b)
        if qb > KERNEL_VANISH_TOL:
            return PropertyReport("kernel_compatibility", False, witness=b,
                                  detail=f"incompatible: q = {qb} on a kernel vector of p")
    return PropertyReport("kernel_compatibility", True, detail="compatible")


def compatibility_verdict(report: PropertyReport) -> str:
    """Collapse a kernel report to 'compatible' | 'incompatible' | 'undecidable'."""
    if not report.passed:
        return "incompatible"
    return "undecidable" if report.detail.startswith("undecidable") else "compatible"
