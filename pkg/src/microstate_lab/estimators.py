"""Monte Carlo estimators for Haar and Lebesgue volumes of microstate sets.

Hit probabilities of orbital microstate sets under product Haar measure,
Lebesgue volumes of matricial microstate sets against a closed-form
reference ball, uniform sampling from microstate sets, a sup-over-bases
search, and the Fubini cross-check that ties them together.

Every estimate is a finite-(N, m, delta, R) proxy and carries its full
parameters; no convergence claim is embedded in the numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import FeasibilityError, InvalidInputError
from .laws import MAX_DEGREE, Letter, NCLaw, law_deviation, scan_word_deviations
from .linalg import (
    HermitianMatrix,
    HermitianTuple,
    UnitaryMatrix,
    UnitaryTuple,
    p_norm,
    truncate_spectrum,
)
from .microstates import MicrostateParams, microstate_membership, _is_orbital_hit
from .randmat import (
    DEFAULT_REJECTION_CAP,
    RandomSeed,
    _frobenius_ball,
    _haar_special_unitary,
    _haar_unitary,
    _uniform_opnorm_ball,
)

__all__ = [
    "VolumeEstimate",
    "BaseTupleStrategy",
    "BestBaseResult",
    "FubiniReport",
    "TruncationReport",
    "diagonal_base",
    "orbital_hit_probability",
    "best_base_search",
    "lebesgue_volume_estimate",
    "sample_uniform_microstates",
    "fubini_check",
    "truncation_check",
    "derive_truncation_parameters",
    "frobenius_ball_log_volume",
]

UNITARY_SAMPLERS = ("haar", "su_scalar")


@dataclass(frozen=True)
class VolumeEstimate:
    """A Monte Carlo estimate of a probability or volume.

    ``log_measure`` is log(p_hat * reference measure), -inf at zero hits;
    ``p_upper95`` is the rule-of-three one-sided bound when hits = 0, so
    thin sets stay comparable.
    """

    hits: int
    samples: int
    p_hat: float
    stderr: float
    log_measure: float
    log_measure_per_N2: float
    p_upper95: float
    log_reference: float = 0.0
    chi_proxy: float | None = None
    note: str = ""

    @classmethod
    def from_counts(
        cls,
        hits: int,
        samples: int,
        N: int,
        log_reference: float = 0.0,
        chi_correction: float | None = None,
        note: str = "",
    ) -> "VolumeEstimate":
        if samples < 1:
            raise InvalidInputError(f"sample count must be >= 1, got {samples}")
        p = hits / samples
        stderr = math.sqrt(p * (1.0 - p) / samples)
        if hits == 0:
            log_measure = -math.inf
            upper = min(1.0, 3.0 / samples)
        else:
            log_measure = math.log(p) + log_reference
            upper = min(1.0, p + 1.96 * stderr)
        per_n2 = log_measure / (N * N)
        chi = None if chi_correction is None else per_n2 + chi_correction
        return cls(hits, samples, p, stderr, log_measure, per_n2, upper, log_reference, chi, note)

    @classmethod
    def exact_zero(cls, samples: int, N: int, note: str) -> "VolumeEstimate":
        """A structurally empty set: probability exactly zero, not censored."""
        return cls(0, samples, 0.0, 0.0, -math.inf, -math.inf, 0.0, 0.0, None, note)

    def to_json(self) -> dict:
        def clean(x):
            return None if x is None or not math.isfinite(x) else x

        return {
            "hits": self.hits,
            "samples": self.samples,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "log_measure": clean(self.log_measure),
            "log_per_N2": clean(self.log_measure_per_N2),
            "p_upper95": self.p_upper95,
            "log_reference": self.log_reference,
            "chi_proxy": clean(self.chi_proxy),
            "note": self.note,
        }


@dataclass(frozen=True)
class BaseTupleStrategy:
    """How base tuples for orbital estimates are produced.

    fixed: explicit tuples, one per group.
    diagonalized: deterministic diagonal matrices with eigenvalues at the
        quantiles (k - 1/2)/N of each group's spectral distribution; only
        available for single-variable groups.
    best_of_random: ``count`` candidates drawn uniformly from the marginal
        microstate sets; all candidates' scores are recorded.
    """

    kind: str
    tuples: tuple | None = None
    quantiles: tuple | None = None
    count: int = 1

    @staticmethod
    def fixed(tuples: Sequence[HermitianTuple]) -> "BaseTupleStrategy":
        return BaseTupleStrategy("fixed", tuples=tuple(tuples))

    @staticmethod
    def diagonalized(quantiles: Sequence[Callable[[float], float]]) -> "BaseTupleStrategy":
        return BaseTupleStrategy("diagonalized", quantiles=tuple(quantiles))

    @staticmethod
    def best_of_random(count: int) -> "BaseTupleStrategy":
        if count < 1:
            raise InvalidInputError(f"candidate count must be >= 1, got {count}")
        return BaseTupleStrategy("best_of_random", count=count)


def diagonal_base(quantile: Callable[[float], float], N: int) -> HermitianMatrix:
    """Diagonal matrix with eigenvalues at the quantiles (k - 1/2)/N."""
    vals = [float(quantile((k - 0.5) / N)) for k in range(1, N + 1)]
    return HermitianMatrix(np.diag(vals))


def _draw_unitaries(n_groups: int, N: int, rng, sampler: str):
    if sampler == "haar":
        return [_haar_unitary(N, rng) for _ in range(n_groups)]
    if sampler == "su_scalar":
        out = []
        for _ in range(n_groups):
            zeta = np.exp(2j * math.pi * rng.random())
            out.append(zeta * _haar_special_unitary(N, rng))
        return out
    raise InvalidInputError(f"unknown unitary sampler {sampler!r}; choose from {UNITARY_SAMPLERS}")


def _marginal_reports(base, law: NCLaw, params: MicrostateParams):
    reports = []
    for i, group in enumerate(base):
        marginal = law.restrict_groups([i + 1])
        reports.append(microstate_membership([group], marginal, params))
    return reports


def _sample_orbital_hits(
    base_arrays,
    law: NCLaw,
    params: MicrostateParams,
    samples: int,
    seed: RandomSeed,
    sampler: str = "haar",
    keep_hits: bool = False,
):
    """Count Haar-sampled orbital hits; optionally keep the hit unitaries."""
    rng = seed.generator()
    n_groups = len(base_arrays)
    mask = np.zeros(samples, dtype=bool)
    hit_points = [] if keep_hits else None
    for k in range(samples):
        us = _draw_unitaries(n_groups, params.N, rng, sampler)
        if _is_orbital_hit(base_arrays, us, law, params):
            mask[k] = True
            if keep_hits:
                hit_points.append(UnitaryTuple([UnitaryMatrix(u) for u in us]))
    return int(mask.sum()), mask, hit_points


def orbital_hit_probability(
    base,
    law: NCLaw,
    params: MicrostateParams,
    samples: int,
    seed: RandomSeed,
    sampler: str = "haar",
) -> VolumeEstimate:
    """Fraction of independent Haar unitary tuples whose conjugation of the
    base is a joint microstate (no norm cut-off on the orbital side).

    The reference measure is the product Haar probability, so
    ``log_measure_per_N2`` is the finite-N orbital volume proxy. If some
    base group fails its own marginal microstate test at (m, delta, R) the
    orbital set is empty and the estimate is an exact zero, without
    sampling.
    """
    if samples < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {samples}")
    base = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in base]
    reports = _marginal_reports(base, law, params)
    bad = [i + 1 for i, r in enumerate(reports) if not r.member]
    if bad:
        return VolumeEstimate.exact_zero(
            samples, params.N,
            note=f"empty orbital set: group(s) {bad} fail their marginal microstate test",
        )
    hits, _, _ = _sample_orbital_hits(
        [t.arrays() for t in base], law, params, samples, seed, sampler
    )
    return VolumeEstimate.from_counts(hits, samples, params.N)


@dataclass(frozen=True)
class BestBaseResult:
    """Outcome of the sup-over-base-tuples search."""

    best_base: tuple
    best_index: int
    estimate: VolumeEstimate
    candidate_estimates: tuple


def resolve_base_candidates(
    strategy: BaseTupleStrategy,
    law: NCLaw,
    params: MicrostateParams,
    seed: RandomSeed,
    max_attempts: int = 100_000,
):
    """Materialize the strategy's candidate bases (one list entry per
    candidate, each a tuple of HermitianTuple, one per group)."""
    if strategy.kind == "fixed":
        if not strategy.tuples:
            raise InvalidInputError("fixed strategy carries no tuples")
        return [tuple(strategy.tuples)]
    if strategy.kind == "diagonalized":
        if strategy.quantiles is None or len(strategy.quantiles) != law.n_groups:
            raise InvalidInputError(
                f"diagonalized strategy needs {law.n_groups} quantile functions"
            )
        if any(law.r(i + 1) != 1 for i in range(law.n_groups)):
            raise InvalidInputError("diagonalized bases require single-variable groups")
        base = tuple(
            HermitianTuple([diagonal_base(q, params.N)]) for q in strategy.quantiles
        )
        return [base]
    if strategy.kind == "best_of_random":
        marginals = [law.restrict_groups([i + 1]) for i in range(law.n_groups)]
        candidates = []
        for j in range(strategy.count):
            candidates.append(
                tuple(
                    sample_uniform_microstates(
                        marginals, params, seed.split(j, 0), max_attempts=max_attempts
                    )
                )
            )
        return candidates
    raise InvalidInputError(f"unknown strategy kind {strategy.kind!r}")


def best_base_search(
    strategy: BaseTupleStrategy,
    law: NCLaw,
    params: MicrostateParams,
    samples: int,
    seed: RandomSeed,
    sampler: str = "haar",
) -> BestBaseResult:
    """Maximize the orbital volume proxy over the strategy's candidate bases.

    Candidate j always consumes the same derived streams regardless of how
    many candidates there are, so enlarging ``count`` never changes earlier
    candidates' scores and the running maximum is monotone in the count.
    """
    candidates = resolve_base_candidates(strategy, law, params, seed)
    feasible = []
    for j, base in enumerate(candidates):
        reports = _marginal_reports(base, law, params)
        if all(r.member for r in reports):
            feasible.append((j, base))
    if not feasible:
        raise FeasibilityError(
            f"none of {len(candidates)} candidate bases passes its marginal microstate test",
            stats={
                "candidates": len(candidates),
                "strategy": strategy.kind,
                "N": params.N,
                "m": params.m,
                "delta": params.delta,
            },
        )
    estimates = []
    best = None
    for j, base in feasible:
        est = orbital_hit_probability(base, law, params, samples, seed.split(j, 1), sampler)
        estimates.append(est)
        if best is None or est.log_measure_per_N2 > best[2].log_measure_per_N2:
            best = (j, base, est)
    return BestBaseResult(best[1], best[0], best[2], tuple(estimates))


def frobenius_ball_log_volume(N: int, radius: float) -> float:
    """log of the Lebesgue volume of {A self-adjoint : ||A||_F <= radius},
    a Euclidean ball in dimension N^2."""
    d = N * N
    unit = (d / 2.0) * math.log(math.pi) - math.lgamma(d / 2.0 + 1.0)
    return unit + d * math.log(radius)


def lebesgue_volume_estimate(
    law: NCLaw,
    params: MicrostateParams,
    samples: int,
    seed: RandomSeed,
) -> VolumeEstimate:
    """Lebesgue volume of the matricial microstate set of a law.

    Samples each matrix uniformly from the Frobenius ball of radius
    R*sqrt(N) (whose volume is the closed-form reference), counts
    acceptance into the microstate set at (N, m, delta, R), and also
    reports the free-entropy proxy
    (1/N^2) log measure + (sum_i r(i)/2) log N.
    """
    if law.n_unitaries != 0:
        raise InvalidInputError("Lebesgue volumes are defined for self-adjoint families")
    if math.isinf(params.R):
        raise InvalidInputError("Lebesgue volume estimation needs a finite norm cut-off")
    if samples < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {samples}")
    if params.m > law.max_degree:
        raise InvalidInputError(f"law covers degree {law.max_degree}, params ask for m={params.m}")
    rng = seed.generator()
    N = params.N
    total_r = sum(law.r(i + 1) for i in range(law.n_groups))
    log_reference = total_r * frobenius_ball_log_volume(N, params.R * math.sqrt(N))
    chi_correction = (total_r / 2.0) * math.log(N)

    hits = 0
    frob_radius = params.R * math.sqrt(N)
    for _ in range(samples):
        mats = {}
        ok = True
        for i in range(law.n_groups):
            for j in range(law.r(i + 1)):
                a = _frobenius_ball(N, frob_radius, rng)
                if ok and np.max(np.abs(np.linalg.eigvalsh(a))) > params.R:
                    ok = False
                mats[Letter.x(i + 1, j + 1)] = a
        if not ok:
            continue
        dev, _ = scan_word_deviations(mats, law, params.m, stop_beyond=params.delta)
        if dev < params.delta:
            hits += 1
    est = VolumeEstimate.from_counts(
        hits, samples, N, log_reference=log_reference, chi_correction=chi_correction
    )
    if hits == 0:
        est = VolumeEstimate(
            est.hits, est.samples, est.p_hat, est.stderr, est.log_measure,
            est.log_measure_per_N2, est.p_upper95, est.log_reference, est.chi_proxy,
            note="zero hits: sampling budget too small or the set is too thin",
        )
    return est


def sample_uniform_microstates(
    marginal_laws: Sequence[NCLaw],
    params: MicrostateParams,
    seed: RandomSeed,
    max_attempts: int = 100_000,
) -> list[HermitianTuple]:
    """One tuple per group, each Lebesgue-uniform on that group's microstate
    set: rejection from per-matrix uniform operator-norm-ball draws until the
    group passes its membership test. Groups are independent.
    """
    if math.isinf(params.R):
        raise InvalidInputError("uniform microstate sampling needs a finite norm cut-off")
    rng = seed.generator()
    out = []
    stats = {}
    for i, marginal in enumerate(marginal_laws):
        if marginal.n_groups != 1 or marginal.n_unitaries != 0:
            raise InvalidInputError(f"marginal law {i + 1} must describe exactly one group")
        r = marginal.r(1)
        accepted = None
        attempts = 0
        while attempts < max_attempts:
            attempts += 1
            mats = [
                _uniform_opnorm_ball(params.N, params.R, rng, DEFAULT_REJECTION_CAP)[0]
                for _ in range(r)
            ]
            letter_mats = {Letter.x(1, j + 1): m for j, m in enumerate(mats)}
            dev, _ = scan_word_deviations(letter_mats, marginal, params.m, stop_beyond=params.delta)
            if dev < params.delta:
                accepted = mats
                break
        stats[f"group_{i + 1}_attempts"] = attempts
        if accepted is None:
            stats["failed_group"] = i + 1
            raise FeasibilityError(
                f"group {i + 1}: no microstate within {max_attempts} attempts "
                f"(N={params.N}, m={params.m}, delta={params.delta}, R={params.R})",
                stats=stats,
            )
        out.append(HermitianTuple([HermitianMatrix(m) for m in accepted]))
    return out


@dataclass(frozen=True)
class FubiniReport:
    """Both sides of the orbital/matricial Fubini identity with their errors.

    lhs: joint hit fraction over (Haar unitaries) x (uniform ball tuples).
    rhs: mean orbital hit probability over uniform-microstate bases times
    the product of per-group ball acceptance fractions. The identity is
    exact; only Monte Carlo error separates the sides.
    """

    lhs: VolumeEstimate
    lambda_fractions: tuple
    inner_means: tuple
    base_count: int
    inner_samples: int
    mean_inner: float
    rhs: float
    rhs_stderr: float
    z: float

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs.to_json(),
            "lambda_fractions": [e.to_json() for e in self.lambda_fractions],
            "inner_means": list(self.inner_means),
            "base_count": self.base_count,
            "inner_samples": self.inner_samples,
            "mean_inner": self.mean_inner,
            "rhs": self.rhs,
            "rhs_stderr": self.rhs_stderr,
            "z": self.z,
        }


def fubini_check(
    marginal_laws: Sequence[NCLaw],
    joint_law: NCLaw,
    params: MicrostateParams,
    outer_samples: int,
    inner_samples: int,
    seed: RandomSeed,
    n_bases: int | None = None,
    max_attempts: int = 200_000,
) -> FubiniReport:
    """Monte Carlo check of the disintegration identity

        P(joint hit under Haar x uniform-on-balls)
          = prod_i P(group i ball sample is a microstate)
            * E[orbital hit probability | bases uniform on microstate sets].

    LHS and RHS use independent streams; the report carries both with a
    combined standard error and the z-score of their difference.
    """
    if outer_samples < 1 or inner_samples < 1:
        raise InvalidInputError("outer and inner sample counts must be >= 1")
    if math.isinf(params.R):
        raise InvalidInputError("the Fubini check needs a finite norm cut-off")
    if len(marginal_laws) != joint_law.n_groups:
        raise InvalidInputError(
            f"{len(marginal_laws)} marginals given, joint law has {joint_law.n_groups} groups"
        )
    for i, marginal in enumerate(marginal_laws):
        dev, _ = law_deviation(joint_law.restrict_groups([i + 1]), marginal, params.m)
        if dev > 1e-9:
            raise InvalidInputError(
                f"marginal {i + 1} disagrees with the joint law's restriction (deviation {dev:.3e})"
            )

    N = params.N
    n_groups = joint_law.n_groups
    if n_bases is None:
        n_bases = max(8, outer_samples // inner_samples)

    # LHS: joint sampling of unitaries and ball tuples. Ball samples have
    # operator norm <= R and conjugation preserves it, so the cut-off part
    # of membership holds by construction and only moments are scanned.
    rng_lhs = seed.split(1).generator()
    lhs_hits = 0
    for _ in range(outer_samples):
        mats = {}
        for i in range(n_groups):
            u = _haar_unitary(N, rng_lhs)
            uh = u.conj().T
            for j in range(joint_law.r(i + 1)):
                a = _uniform_opnorm_ball(N, params.R, rng_lhs, DEFAULT_REJECTION_CAP)[0]
                mats[Letter.x(i + 1, j + 1)] = u @ a @ uh
        dev, _ = scan_word_deviations(mats, joint_law, params.m, stop_beyond=params.delta)
        if dev < params.delta:
            lhs_hits += 1
    lhs = VolumeEstimate.from_counts(lhs_hits, outer_samples, N)

    # RHS phase 1: per-group ball acceptance fractions, pooling accepted
    # tuples as uniform-microstate bases.
    fractions = []
    pools = []
    for i, marginal in enumerate(marginal_laws):
        rng_i = seed.split(2, i).generator()
        r = marginal.r(1)
        accepts = 0
        pool = []
        for _ in range(outer_samples):
            mats = [
                _uniform_opnorm_ball(N, params.R, rng_i, DEFAULT_REJECTION_CAP)[0]
                for _ in range(r)
            ]
            letter_mats = {Letter.x(1, j + 1): m for j, m in enumerate(mats)}
            dev, _ = scan_word_deviations(letter_mats, marginal, params.m, stop_beyond=params.delta)
            if dev < params.delta:
                accepts += 1
                if len(pool) < n_bases:
                    pool.append(tuple(mats))
        extra = 0
        while len(pool) < n_bases and extra < max_attempts:
            extra += 1
            mats = [
                _uniform_opnorm_ball(N, params.R, rng_i, DEFAULT_REJECTION_CAP)[0]
                for _ in range(r)
            ]
            letter_mats = {Letter.x(1, j + 1): m for j, m in enumerate(mats)}
            dev, _ = scan_word_deviations(letter_mats, marginal, params.m, stop_beyond=params.delta)
            if dev < params.delta:
                pool.append(tuple(mats))
        fractions.append(VolumeEstimate.from_counts(accepts, outer_samples, N))
        pools.append(pool)

    usable = min(len(p) for p in pools)
    if usable == 0:
        # No feasible base: the microstate sets are effectively unreachable,
        # so the product side is zero as well.
        rhs = 0.0
        rhs_stderr = 0.0
        inner_means: tuple = ()
        mean_inner = 0.0
    else:
        inner_qs = []
        for b in range(usable):
            base_arrays = [pools[i][b] for i in range(n_groups)]
            hits, _, _ = _sample_orbital_hits(
                base_arrays, joint_law, params, inner_samples, seed.split(3, b)
            )
            inner_qs.append(hits / inner_samples)
        inner_means = tuple(inner_qs)
        mean_inner = float(np.mean(inner_qs))
        prod_p = 1.0
        rel_var = 0.0
        degenerate = False
        for est in fractions:
            prod_p *= est.p_hat
            if est.p_hat > 0:
                rel_var += (est.stderr / est.p_hat) ** 2
            else:
                degenerate = True
        between = float(np.var(inner_qs, ddof=1)) / usable if usable > 1 else 0.0
        within = sum(q * (1.0 - q) / inner_samples for q in inner_qs) / usable**2
        var_mean_inner = max(between, within)
        rhs = prod_p * mean_inner
        if degenerate or rhs == 0.0:
            rhs_stderr = prod_p * math.sqrt(var_mean_inner) if prod_p > 0 else 0.0
        else:
            rhs_stderr = rhs * math.sqrt(rel_var + var_mean_inner / mean_inner**2)

    denom = math.sqrt(lhs.stderr**2 + rhs_stderr**2)
    diff = lhs.p_hat - rhs
    if denom == 0.0:
        z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        z = diff / denom
    return FubiniReport(
        lhs=lhs,
        lambda_fractions=tuple(fractions),
        inner_means=inner_means,
        base_count=usable,
        inner_samples=inner_samples,
        mean_inner=mean_inner,
        rhs=rhs,
        rhs_stderr=rhs_stderr,
        z=z,
    )


# ---------------------------------------------------------------------------
# Operator-norm truncation probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationParameters:
    """Derived cut-off relation parameters for a fixed (m, delta, rho, R)."""

    rho: float
    L: float
    bound: float  # delta / (2 m L^(m-1))
    delta_prime: float
    m_prime: int  # even, chosen so the tail estimate beats the bound


def derive_truncation_parameters(rho: float, params: MicrostateParams) -> TruncationParameters:
    """Pick (m', delta') so that any member at (m', delta') has its spectrum
    tail beyond R so light that clamping moves every m-norm by less than
    delta / (2 m L^(m-1)), with L = max((rho^(2m) + 1)^(1/2m), R)."""
    m, delta, R = params.m, params.delta, params.R
    if math.isinf(R):
        raise InvalidInputError("truncation analysis needs a finite norm cut-off")
    if not R > rho:
        raise InvalidInputError(f"cut-off R={R} must exceed the generator norm bound rho={rho}")
    L = max((rho ** (2 * m) + 1.0) ** (1.0 / (2 * m)), R)
    bound = delta / (2.0 * m * L ** (m - 1))
    delta_prime = 0.8 * min(1.0, delta / 2.0)
    m_prime = max(m, 2)
    if m_prime % 2:
        m_prime += 1
    while m_prime <= MAX_DEGREE:
        tail = R * ((rho / R) ** m_prime + delta_prime / R**m_prime) ** (1.0 / m)
        if tail < bound:
            return TruncationParameters(rho, L, bound, delta_prime, m_prime)
        m_prime += 2
    raise FeasibilityError(
        f"no even degree up to {MAX_DEGREE} satisfies the truncation tail estimate "
        f"(m={m}, delta={delta}, rho={rho}, R={R}); widen delta or R",
        stats={"m": m, "delta": delta, "rho": rho, "R": R},
    )


@dataclass(frozen=True)
class TruncationReport:
    """Outcome of the truncation probe on constructed high-degree members."""

    samples: int
    members: int
    perturbed: int
    gap_violations: int
    chain_violations: int
    implication_violations: int
    max_gap: float
    max_truncated_deviation: float
    parameters: TruncationParameters

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "members": self.members,
            "perturbed": self.perturbed,
            "gap_violations": self.gap_violations,
            "chain_violations": self.chain_violations,
            "implication_violations": self.implication_violations,
            "max_gap": self.max_gap,
            "max_truncated_deviation": self.max_truncated_deviation,
            "rho": self.parameters.rho,
            "L": self.parameters.L,
            "bound": self.parameters.bound,
            "delta_prime": self.parameters.delta_prime,
            "m_prime": self.parameters.m_prime,
        }


def truncation_check(
    marginal: NCLaw,
    params: MicrostateParams,
    samples: int,
    seed: RandomSeed,
    quantile,
) -> TruncationReport:
    """Verify the spectral cut-off estimates on constructed members.

    Each sample is a single matrix built from the marginal's quantile
    diagonal with a few eigenvalues pushed just beyond R (conjugated by a
    Haar unitary), sized so membership at (m', delta') holds by
    construction. The probe then checks that

      * the m-norm gap between the matrix and its clamped version stays
        below delta / (2 m L^(m-1)),
      * the gap also respects the moment-tail estimate
        R (tr_N A^m' / R^m')^(1/m), and
      * membership at (m', delta') implies membership of the clamped matrix
        at (m, delta, R).
    """
    if samples < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {samples}")
    if marginal.n_groups != 1 or marginal.r(1) != 1 or marginal.n_unitaries != 0:
        raise InvalidInputError("the truncation probe works on single-variable marginals")
    if quantile is None:
        raise InvalidInputError("the truncation probe needs the marginal's quantile function")
    derived = derive_truncation_parameters(marginal.rho(Letter.x(1, 1)), params)
    if marginal.max_degree < derived.m_prime:
        raise InvalidInputError(
            f"marginal law covers degree {marginal.max_degree}, probe needs {derived.m_prime}"
        )
    N, m = params.N, params.m
    m_prime, delta_prime = derived.m_prime, derived.delta_prime
    R = params.R
    height = 0.05 * R
    targets = np.array(
        [marginal.moment(tuple([Letter.x(1, 1)] * l)).real for l in range(1, m_prime + 1)]
    )
    base_vals = np.array([float(quantile((k - 0.5) / N)) for k in range(1, N + 1)])

    def spectral_deviation(vals):
        dev = 0.0
        for l in range(1, m_prime + 1):
            dev = max(dev, abs(float(np.mean(vals**l)) - targets[l - 1]))
        return dev

    dev0 = spectral_deviation(base_vals)
    shift = (R + height) ** m_prime + derived.rho**m_prime
    budget = 0.9 * delta_prime - dev0
    c_allowed = max(0, int(budget * N / shift)) if budget > 0 else 0

    rng = seed.generator()
    members = perturbed = 0
    gap_violations = chain_violations = implication_violations = 0
    max_gap = 0.0
    max_trunc_dev = 0.0
    params_prime = MicrostateParams(N, m_prime, delta_prime, math.inf)
    params_cut = MicrostateParams(N, m, params.delta, R)
    law_m = marginal.restrict_degree(m) if marginal.max_degree > m else marginal
    law_mp = marginal.restrict_degree(m_prime) if marginal.max_degree > m_prime else marginal

    for _ in range(samples):
        vals = base_vals.copy()
        c = int(rng.integers(0, min(2, c_allowed) + 1))
        if c:
            pos = rng.choice(N, size=c, replace=False)
            signs = rng.choice([-1.0, 1.0], size=c)
            vals[pos] = signs * (R + height * rng.random(c))
            perturbed += 1
        if spectral_deviation(vals) >= delta_prime:
            raise AssertionError("constructed spectrum leaves the membership window")
        u = _haar_unitary(N, rng)
        a = HermitianMatrix(u @ np.diag(vals) @ u.conj().T)
        group = HermitianTuple([a])
        if not microstate_membership([group], law_mp, params_prime).member:
            continue
        members += 1
        truncated = truncate_spectrum(a, R)
        gap = p_norm(HermitianMatrix(a.mat - truncated.mat), m)
        max_gap = max(max_gap, gap)
        if not gap < derived.bound:
            gap_violations += 1
        tail = R * max(float(np.mean(vals**m_prime)), 0.0) ** (1.0 / m) / R ** (m_prime / m)
        if gap > tail + 1e-12:
            chain_violations += 1
        rep = microstate_membership([HermitianTuple([truncated])], law_m, params_cut)
        max_trunc_dev = max(max_trunc_dev, rep.max_deviation)
        if not rep.member:
            implication_violations += 1

    return TruncationReport(
        samples=samples,
        members=members,
        perturbed=perturbed,
        gap_violations=gap_violations,
        chain_violations=chain_violations,
        implication_violations=implication_violations,
        max_gap=max_gap,
        max_truncated_deviation=max_trunc_dev,
        parameters=derived,
    )
