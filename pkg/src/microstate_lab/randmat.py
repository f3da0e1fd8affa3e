"""Seeded random matrix models: Haar unitaries, GUE, operator-norm balls,
and discretized unitary Brownian motion.

Streams are counter-based (Philox keyed by a 64-bit root seed and a 64-bit
stream id), so a ``RandomSeed`` fully determines a generator's output and
distinct stream ids give independent streams. ``RandomSeed.split`` derives
child streams deterministically, which keeps parallel experiments
reproducible regardless of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SamplingBudgetError
from .linalg import HermitianMatrix, UnitaryMatrix

_MASK64 = (1 << 64) - 1
DEFAULT_REJECTION_CAP = 1_000_000

__all__ = [
    "RandomSeed",
    "BrownianConfig",
    "haar_unitary",
    "haar_special_unitary",
    "gue_hermitian",
    "uniform_opnorm_ball",
    "brownian_unitary",
    "DEFAULT_REJECTION_CAP",
]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RandomSeed:
    """A (root seed, stream id) pair identifying one reproducible stream."""

    root: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.root & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, *indices: int) -> "RandomSeed":
        """Derive an independent child stream from integer indices."""
        s = self.stream & _MASK64
        for k in indices:
            s = _splitmix64(s ^ _splitmix64(k & _MASK64))
        return RandomSeed(self.root, s)


def as_seed(seed) -> RandomSeed:
    if isinstance(seed, RandomSeed):
        return seed
    if isinstance(seed, (int, np.integer)):
        return RandomSeed(int(seed))
    raise InvalidInputError(f"expected a RandomSeed or integer, got {type(seed).__name__}")


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return as_seed(seed).generator()


@dataclass(frozen=True)
class BrownianConfig:
    """Parameters of one discretized Brownian path on the unitary group."""

    N: int
    t: float
    steps: int
    seed: RandomSeed

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError(f"N must be >= 1, got {self.N}")
        if self.t < 0:
            raise InvalidInputError(f"time must be nonnegative, got {self.t}")
        if self.steps < 1:
            raise InvalidInputError(f"steps must be >= 1, got {self.steps}")


# ---------------------------------------------------------------------------
# Raw (ndarray) samplers; the public wrappers validate and type the results.
# ---------------------------------------------------------------------------


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a complex Ginibre matrix with the R-diagonal phases absorbed,
    which makes the law exactly Haar."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _haar_special_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    u = _haar_unitary(n, rng)
    det = np.linalg.det(u)
    # Principal branch of det^(-1/N); any fixed branch yields Haar on SU(N)
    # because central rotations preserve it.
    return u * np.exp(-1j * np.angle(det) / n) * (abs(det) ** (-1.0 / n))


def _gue(n: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(n)
    return (g + g.conj().T) / 2.0


def _frobenius_ball(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample from {A self-adjoint : ||A||_F <= radius}.

    Direction uniform on the sphere in dimension N^2, radius scaled by
    u^(1/N^2); the coordinates are an orthonormal basis of the self-adjoint
    matrices under the Frobenius inner product.
    """
    dim = n * n
    diag = rng.standard_normal(n)
    re = rng.standard_normal((n, n))
    im = rng.standard_normal((n, n))
    a = np.diag(diag).astype(complex)
    iu = np.triu_indices(n, k=1)
    a[iu] = (re[iu] + 1j * im[iu]) / math.sqrt(2.0)
    a = a + np.triu(a, k=1).conj().T
    norm = math.sqrt(np.sum(np.abs(np.diag(a)) ** 2) + 2.0 * np.sum(np.abs(a[iu]) ** 2))
    if norm == 0.0:
        return np.zeros((n, n), dtype=complex)
    r = radius * rng.random() ** (1.0 / dim)
    return a * (r / norm)


def _uniform_opnorm_ball(
    n: int, radius: float, rng: np.random.Generator, max_attempts: int
) -> tuple[np.ndarray, int]:
    frob_radius = radius * math.sqrt(n)
    for attempt in range(1, max_attempts + 1):
        a = _frobenius_ball(n, frob_radius, rng)
        if np.max(np.abs(np.linalg.eigvalsh(a))) <= radius:
            return a, attempt
    raise SamplingBudgetError(
        f"no operator-norm ball sample within {max_attempts} attempts (N={n}, R={radius})",
        stats={"attempts": max_attempts, "N": n, "R": radius},
    )


# ---------------------------------------------------------------------------
# Public samplers
# ---------------------------------------------------------------------------


def haar_unitary(n: int, seed) -> UnitaryMatrix:
    """One Haar-distributed unitary on U(N)."""
    if n < 1:
        raise InvalidInputError(f"N must be >= 1, got {n}")
    return UnitaryMatrix(_haar_unitary(n, _as_generator(seed)))


def haar_special_unitary(n: int, seed) -> UnitaryMatrix:
    """One Haar-distributed special unitary (determinant 1)."""
    if n < 1:
        raise InvalidInputError(f"N must be >= 1, got {n}")
    return UnitaryMatrix(_haar_special_unitary(n, _as_generator(seed)))


def gue_hermitian(n: int, seed) -> HermitianMatrix:
    """A GUE matrix normalized so that E tr_N H^2 = 1 (semicircle radius 2)."""
    if n < 1:
        raise InvalidInputError(f"N must be >= 1, got {n}")
    return HermitianMatrix(_gue(n, _as_generator(seed)))


def uniform_opnorm_ball(
    n: int, radius: float, seed, max_attempts: int = DEFAULT_REJECTION_CAP
) -> tuple[HermitianMatrix, int]:
    """Lebesgue-uniform sample from the operator-norm ball of radius R,
    by rejection from the enclosing Frobenius ball of radius R*sqrt(N).

    Returns the sample together with the number of attempts used.
    """
    if n < 1:
        raise InvalidInputError(f"N must be >= 1, got {n}")
    if not radius > 0:
        raise InvalidInputError(f"radius must be positive, got {radius}")
    a, attempts = _uniform_opnorm_ball(n, radius, _as_generator(seed), max_attempts)
    return HermitianMatrix(a), attempts


def _brownian_unitary(n: int, t: float, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Product of exact exponentials exp(i sqrt(t/steps) H_k) with independent
    GUE increments; stays exactly unitary, and the Ito drift -t/2 of the first
    moment emerges from the exponential's second-order term.

    The increments' eigenproblems are batched; one path costs steps + 1
    matrix products plus one stacked eigh call.
    """
    if t == 0.0:
        return np.eye(n, dtype=complex)
    scale = math.sqrt(t / steps)
    g = (rng.standard_normal((steps, n, n)) + 1j * rng.standard_normal((steps, n, n))) / math.sqrt(n)
    h = (g + np.conj(np.swapaxes(g, 1, 2))) / 2.0
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(1j * scale * vals)
    v = np.eye(n, dtype=complex)
    for k in range(steps):
        v = (vecs[k] * phases[k]) @ (vecs[k].conj().T @ v)
    return v


def brownian_unitary(config: BrownianConfig) -> UnitaryMatrix:
    """Simulate unitary Brownian motion at time t on U(N).

    At fixed N the law converges (steps -> infinity) to the heat-kernel
    Brownian motion whose normalized-trace moments approach the free unitary
    Brownian motion's as N grows; the first moment is exp(-t/2) up to
    O(t * t/steps) discretization bias and O(1/N^2) finite-size corrections.
    """
    rng = config.seed.generator()
    return UnitaryMatrix(_brownian_unitary(config.N, config.t, config.steps, rng))
