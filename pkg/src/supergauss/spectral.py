"""Spectral representation of the Gaussian measure.

The measure is carried entirely by a factorized embedding: standard Gaussian
coordinates ``x`` in R^n are scaled by a square-summable eigenvalue sequence
``lambda`` (the Hilbert-Schmidt factor) and pushed through a compact map ``K``
into the domain of the seminorms,

    v = K(lambda * x).

Everything downstream -- integrands, certificates, tail bounds -- is a
function of ``lambda`` and of seminorms composed with ``K``.  This module
owns the eigenvalue bookkeeping (ordering, capping below 1/2, summability
with declared asymptotic tails), the compact maps, the embedding, and keyed
standard-Gaussian sampling.

Infinite tails are never truncated silently: a sequence may declare a decay
family (``power`` or ``exponential``) and the summation helpers return the
truncated sum and a closed-form tail bound separately.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError
from .seminorms import (GrowthFunction, PropertyReport, Seminorm,
                        check_seminorm_axioms, check_submultiplicative,
                        check_superquadratic, compatibility_verdict,
                        kernel_compatibility)

# Eigenvalues are capped at 0.7 in magnitude (0.49 < 1/2 squared), keeping a
# strict margin below 1/2 so divisions by (1 - lambda^2) stay well-conditioned.
HALF_CAP = 0.7


@dataclass(frozen=True)
class DecayFamily:
    """Declared asymptotic envelope |lambda_n| <= bound(n) for n beyond the list."""

    family: str  # "power" | "exponential"
    c: float
    gamma: float | None = None  # power:       c * n^(-gamma)
    r: float | None = None      # exponential: c * r^n

    @staticmethod
    def power(c: float, gamma: float) -> "DecayFamily":
        return DecayFamily(family="power", c=float(c), gamma=float(gamma))

    @staticmethod
    def exponential(c: float, r: float) -> "DecayFamily":
        return DecayFamily(family="exponential", c=float(c), r=float(r))


@dataclass(frozen=True)
class TailSum:
    """A truncated sum together with an analytic bound on its infinite tail."""

    truncated: float
    tail: float
    finite: bool

    @property
    def total(self) -> float:
        return self.truncated + self.tail if self.finite else float("inf")


@dataclass(frozen=True, eq=False)
class EigenSequence:
    """Eigenvalues of the Hilbert-Schmidt factor, largest magnitude first.

    Exact zeros are dropped at construction; they contribute nothing to any
    sum or integrand and several downstream formulas are undefined for them.
    """

    values: np.ndarray
    decay: DecayFamily | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", vals[vals != 0.0])

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def is_descending(self) -> bool:
        mags = np.abs(self.values)
        return bool(np.all(mags[:-1] >= mags[1:] - 1e-15)) if len(self) > 1 else True

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self) else 0.0


def _power_tail(c: float, gamma: float, start: int, log_weight: bool) -> float:
    """Bound on sum_{n > start} c^2 n^(-2g) [ln(n+1)], by explicit terms plus
    an integral estimate from X = start + 64 (where the summand is decreasing)."""
    if gamma <= 0.5:
        return float("inf")
    a = 2.0 * gamma - 1.0
    x0 = start + 64
    ns = np.arange(start + 1, x0 + 1, dtype=float)
    terms = c * c * ns ** (-2.0 * gamma)
    if log_weight:
        terms = terms * np.log(ns + 1.0)
    explicit = float(np.sum(terms))
    if log_weight:
        # ln(n+1) <= ln 2 + ln n for n >= 1; integrate the majorant by parts.
        lx = np.log(x0)
        integral = c * c * x0 ** (-a) * ((np.log(2.0) + lx) / a + 1.0 / (a * a))
    else:
        integral = c * c * x0 ** (-a) / a
    return explicit + integral


def _exponential_tail(c: float, r: float, start: int, log_weight: bool) -> float:
    if not 0.0 < r < 1.0:
        return float("inf")
    r2 = r * r
    if not log_weight:
        return c * c * r2 ** (start + 1) / (1.0 - r2)
    total, n = 0.0, start + 1
    while True:
        term = c * c * r2 ** n * np.log(n + 1.0)
        total += term
        # ln(m+1) <= ln(n+1) (1 + (m-n)) for m > n >= 1 gives a geometric
        # remainder once the terms are negligible.
        if term < 1e-18 * total or n > start + 100_000:
            rem = c * c * r2 ** n * np.log(n + 2.0) * (r2 / (1 - r2) + r2 / (1 - r2) ** 2)
            return total + rem
        n += 1


def _tail_bound(lam: EigenSequence, log_weight: bool) -> float:
    if lam.decay is None:
        return 0.0
    d, start = lam.decay, len(lam)
    if d.family == "power":
        return _power_tail(d.c, d.gamma, max(start, 1), log_weight)
    if d.family == "exponential":
        return _exponential_tail(d.c, d.r, start, log_weight)
    raise ValueError(f"unknown decay family {d.family!r}")


def hs_sum(lam: EigenSequence) -> TailSum:
    """sum lambda_n^2 over the listed values, plus a declared-tail bound."""
    truncated = float(np.sum(lam.values ** 2))
    tail = _tail_bound(lam, log_weight=False)
    return TailSum(truncated, tail if np.isfinite(tail) else 0.0, np.isfinite(tail))


def log_weighted_sum(lam: EigenSequence) -> TailSum:
    """sum lambda_n^2 ln(n+1), plus a declared-tail bound.

    This is the summability hypothesis for convergence of the projection
    scheme; ``finite=False`` signals that the declared family diverges.
    """
    n = np.arange(1, len(lam) + 1, dtype=float)
    truncated = float(np.sum(lam.values ** 2 * np.log(n + 1.0)))
    tail = _tail_bound(lam, log_weight=True)
    return TailSum(truncated, tail if np.isfinite(tail) else 0.0, np.isfinite(tail))


def _real_fourier_matrix(n: int) -> np.ndarray:
    """Orthogonal real Fourier synthesis matrix on a periodic lattice of n sites.

    Columns are the constant mode, then interleaved cos/sin pairs, with the
    alternating (Nyquist) mode last for even n.
    """
    j = np.arange(n)
    cols = [np.full(n, 1.0 / np.sqrt(n))]
    for k in range(1, (n - 1) // 2 + 1):
        ang = 2.0 * np.pi * k * j / n
        cols.append(np.sqrt(2.0 / n) * np.cos(ang))
        cols.append(np.sqrt(2.0 / n) * np.sin(ang))
    if n % 2 == 0:
        cols.append((-1.0) ** j / np.sqrt(n))
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class CompactMap:
    """The compact factor K applied after the eigenvalue scaling.

    ``identity`` passes coordinates through unchanged; ``matrix`` multiplies
    by a dense matrix (inputs shorter than its width are zero-padded, matching
    the finite-dimensional projections); ``fourier`` is the orthogonal real
    Fourier synthesis on n sites.
    """

    kind: str  # "identity" | "matrix" | "fourier"
    matrix: np.ndarray | None = None
    op_norm: float = 1.0

    @staticmethod
    def identity() -> "CompactMap":
        return CompactMap(kind="identity")

    @staticmethod
    def from_matrix(m, op_norm: float | None = None) -> "CompactMap":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2:
            raise ValueError("compact map needs a 2-d matrix")
        if op_norm is None:
            op_norm = float(np.linalg.svd(m, compute_uv=False)[0]) if m.size else 0.0
        return CompactMap(kind="matrix", matrix=m, op_norm=op_norm)

    @staticmethod
    def fourier(n: int) -> "CompactMap":
        return CompactMap(kind="fourier", matrix=_real_fourier_matrix(n), op_norm=1.0)

    @property
    def n_in(self) -> int | None:
        return None if self.kind == "identity" else self.matrix.shape[1]

    @property
    def n_out(self) -> int | None:
        return None if self.kind == "identity" else self.matrix.shape[0]

    def apply_batch(self, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        if self.kind == "identity":
            return us
        n_in = self.matrix.shape[1]
        if us.shape[1] > n_in:
            raise DimensionMismatchError(
                f"compact map accepts length <= {n_in}, got {us.shape[1]}")
        if us.shape[1] < n_in:
            us = np.pad(us, ((0, 0), (0, n_in - us.shape[1])))
        return us @ self.matrix.T

    def apply(self, u) -> np.ndarray:
        return self.apply_batch(np.asarray(u, dtype=float)[None, :])[0]


def rescale_half_cap(lam: EigenSequence, k: CompactMap,
                     mode: str = "per_coordinate") -> tuple[EigenSequence, CompactMap]:
    """Cap |lambda_n| at 0.7, absorbing the inverse scale into the compact map.

    Per coordinate, t_n = min(1, 0.7/|lambda_n|); the returned pair satisfies
    K'(lambda' * x) = K(lambda * x) exactly.  ``mode="uniform"`` applies one
    global factor t = min(1, 0.7/max|lambda|) instead, which keeps a scalar
    multiple of an orthogonal map orthogonal-up-to-scale.

    Identity when nothing exceeds the cap (the 0.49 boundary is inclusive).
    """
    if len(lam) == 0 or lam.max_abs <= HALF_CAP:
        return lam, k
    mags = np.abs(lam.values)
    if mode == "uniform":
        t = np.full(len(lam), min(1.0, HALF_CAP / lam.max_abs))
    elif mode == "per_coordinate":
        t = np.minimum(1.0, HALF_CAP / mags)
    else:
        raise ValueError(f"unknown rescale mode {mode!r}")
    new_lam = EigenSequence(lam.values * t, decay=lam.decay)
    inv = 1.0 / t
    if k.kind == "identity":
        new_k = CompactMap.from_matrix(np.diag(inv), op_norm=float(np.max(inv)))
    else:
        m = k.matrix[:, : len(t)] * inv
        if k.matrix.shape[1] > len(t):
            m = np.hstack([m, k.matrix[:, len(t):]])
        new_k = CompactMap.from_matrix(m)
    return new_lam, new_k


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """The measure-and-integrand bundle.

    The integrand is exp(-f(p(v)) + alpha * q(v)^2) with v = K(lambda * x).
    ``f``/``p`` may both be None, disabling the growth term (pure-Gaussian
    sanity regime).  ``alpha = 0`` is allowed here for oracle limits; the CLI
    enforces strictly positive alpha on user configurations.
    """

    lam: EigenSequence
    K: CompactMap
    p: Seminorm | None
    q: Seminorm
    f: GrowthFunction | None
    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if (self.f is None) != (self.p is None):
            raise ValueError("growth function and seminorm p must be disabled together")

    @property
    def dim(self) -> int:
        return len(self.lam)

    @property
    def out_dim(self) -> int:
        return self.dim if self.K.kind == "identity" else self.K.n_out

    def check_dimensions(self) -> None:
        """Structural consistency; raises DimensionMismatchError."""
        if self.K.kind != "identity" and self.K.n_in < self.dim:
            raise DimensionMismatchError(
                f"K accepts length {self.K.n_in} < {self.dim} eigenvalues")
        for name, s in (("p", self.p), ("q", self.q)):
            if s is not None and s.dim is not None and s.dim != self.out_dim:
                raise DimensionMismatchError(
                    f"seminorm {name} expects length {s.dim}, K outputs {self.out_dim}")


def embed_batch(model: SpectralModel, xs: np.ndarray) -> np.ndarray:
    """Map rows of standard-Gaussian coordinates to seminorm-domain vectors."""
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[1]
    if n > model.dim:
        raise DimensionMismatchError(f"got {n} coordinates, model has {model.dim}")
    us = xs * model.lam.values[:n]
    if model.K.kind == "identity" and n < model.dim:
        us = np.pad(us, ((0, 0), (0, model.dim - n)))
    return model.K.apply_batch(us)


def embed(model: SpectralModel, x) -> np.ndarray:
    """v = K(lambda * x) for a single coordinate vector of length n <= N."""
    return embed_batch(model, np.asarray(x, dtype=float)[None, :])[0]


def sample_standard(n: int, stream_key: tuple[int, int]) -> np.ndarray:
    """n i.i.d. standard normal coordinates for a (seed, chunk_id) stream key.

    Counter-based (Philox) keying: the draw is bit-reproducible for a fixed
    key no matter which worker executes it or in which order.
    """
    return gaussian_chunk(stream_key, (n,))


def gaussian_chunk(stream_key: tuple[int, int], shape: Sequence[int]) -> np.ndarray:
    seed, chunk = stream_key
    key = np.array([np.uint64(seed), np.uint64(chunk)], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(shape)


@dataclass(frozen=True)
class ValidationReport:
    """Pass/fail ledger for the model hypotheses, one entry per check."""

    checks: tuple[PropertyReport, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[PropertyReport]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> PropertyReport:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_model(model: SpectralModel, probes: int = 24, key: int = 0) -> ValidationReport:
    """Check every hypothesis the estimates and certificates rely on.

    Structural problems (dimension mismatches) raise immediately; property
    failures are recorded in the report, not thrown.
    """
    model.check_dimensions()
    checks: list[PropertyReport] = []

    lam = model.lam
    checks.append(PropertyReport(
        "descending_order", lam.is_descending,
        detail="" if lam.is_descending else "eigenvalues not in descending magnitude"))

    capped = lam.max_abs ** 2 < 0.5
    checks.append(PropertyReport(
        "half_cap", capped,
        detail="" if capped else
        f"max lambda^2 = {lam.max_abs ** 2:.4g} >= 1/2; apply rescale_half_cap"))

    hs = hs_sum(lam)
    checks.append(PropertyReport(
        "hs_summable", hs.finite,
        detail="" if hs.finite else "sum lambda_n^2 diverges for the declared family"))
    logw = log_weighted_sum(lam)
    checks.append(PropertyReport(
        "log_weighted_summable", logw.finite,
        detail="" if logw.finite else
        "sum lambda_n^2 ln(n+1) diverges for the declared family"))

    dim = model.out_dim
    for name, s in (("p", model.p), ("q", model.q)):
        if s is None:
            continue
        rep = check_seminorm_axioms(s, dim, probes=probes, key=key)
        checks.append(PropertyReport(f"seminorm_axioms_{name}", rep.passed,
                                     witness=rep.witness, detail=rep.detail))

    if model.p is not None:
        kc = kernel_compatibility(model.p, model.q)
        verdict = compatibility_verdict(kc)
        checks.append(PropertyReport("kernel_compatibility", verdict != "incompatible",
                                     witness=kc.witness, detail=kc.detail))

    if model.f is not None:
        checks.append(check_submultiplicative(model.f))
        checks.append(check_superquadratic(model.f))

    zero_out = model.K.apply(np.zeros(model.dim))
    k_ok = bool(np.all(zero_out == 0.0))
    detail = "" if k_ok else "K(0) != 0"
    if k_ok and model.dim:
        xs = gaussian_chunk((key, 2 ** 32 - 1), (probes, model.dim))
        norms = np.linalg.norm(model.K.apply_batch(xs), axis=1)
        bound = model.K.op_norm * np.linalg.norm(xs, axis=1)
        k_ok = bool(np.all(norms <= bound * (1 + 1e-9) + 1e-12))
        detail = "" if k_ok else "||Kx|| exceeds op_norm * ||x|| on a probe"
    checks.append(PropertyReport("compact_map", k_ok, detail=detail))

    return ValidationReport(tuple(checks))


def drop_decay(lam: EigenSequence) -> EigenSequence:
    """The same listed values with no declared tail."""
    return replace(lam, decay=None)
