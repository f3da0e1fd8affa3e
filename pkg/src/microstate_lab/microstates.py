"""Membership tests for matricial and orbital microstate sets.

A tuple of matrices is a microstate for a target law at parameters
(N, m, delta, R) when every matrix has operator norm at most R and every
word of degree at most m deviates from the target moment by strictly less
than delta in modulus. Orbital membership conjugates base tuples by sampled
unitaries first and drops the norm cut-off. All functions here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError
from .laws import (
    Letter,
    NCLaw,
    Word,
    empirical_law,
    format_word,
    free_product_law,
    law_deviation,
    letter_matrices,
    scan_word_deviations,
)
from .linalg import HermitianTuple, UnitaryTuple, op_norm

# Absorbs floating-point drift from conjugation in norm cut-off comparisons.
NORM_SLACK = 1e-12

__all__ = [
    "MicrostateParams",
    "MembershipReport",
    "FreenessReport",
    "microstate_membership",
    "orbital_membership",
    "presence_membership",
    "freeness_report",
    "NORM_SLACK",
]


@dataclass(frozen=True)
class MicrostateParams:
    """The tuple (N, m, delta, R) governing membership; R may be infinite."""

    N: int
    m: int
    delta: float
    R: float = math.inf

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError(f"N must be >= 1, got {self.N}")
        if self.m < 1:
            raise InvalidInputError(f"degree bound must be >= 1, got {self.m}")
        if not self.delta > 0:
            raise InvalidInputError(f"delta must be positive, got {self.delta}")
        if not self.R > 0:
            raise InvalidInputError(f"norm cut-off must be positive, got {self.R}")

    def without_cutoff(self) -> "MicrostateParams":
        return replace(self, R=math.inf)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    max_deviation: float
    worst_word: Word | None
    norm_violations: tuple
    norm_slack_used: bool = False

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "max_deviation": self.max_deviation,
            "worst_word": None if self.worst_word is None else format_word(self.worst_word),
            "norm_violations": [list(v) for v in self.norm_violations],
            "norm_slack_used": self.norm_slack_used,
        }


def _check_shapes(tuples, law: NCLaw, params: MicrostateParams):
    if len(tuples) != law.n_groups:
        raise InvalidInputError(f"{len(tuples)} groups given, law declares {law.n_groups}")
    for i, group in enumerate(tuples):
        if len(group) != law.r(i + 1):
            raise InvalidInputError(
                f"group {i + 1} has {len(group)} matrices, law declares {law.r(i + 1)}"
            )
        if group.n != params.N:
            raise InvalidInputError(f"group {i + 1} has size {group.n}, params say N={params.N}")


def _norm_check(tuples, radius: float):
    violations = []
    slack_used = False
    if math.isinf(radius):
        return (), False
    for i, group in enumerate(tuples):
        for j, mat in enumerate(group):
            v = op_norm(mat)
            if v > radius + NORM_SLACK:
                violations.append((i + 1, j + 1, v))
            elif v > radius:
                slack_used = True
    return tuple(violations), slack_used


def microstate_membership(
    tuples, law: NCLaw, params: MicrostateParams
) -> MembershipReport:
    """Test whether self-adjoint tuples are matricial microstates for a law.

    Membership requires every operator norm <= R (strict, with a 1e-12
    slack for floating-point drift; R = infinity skips the check) and every
    word of degree <= m within strictly less than delta of the target.
    Ties at exactly delta are non-members.
    """
    if law.n_unitaries != 0:
        raise InvalidInputError("law declares unitary generators; use presence_membership")
    tuples = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in tuples]
    _check_shapes(tuples, law, params)
    if params.m > law.max_degree:
        raise InvalidInputError(f"law covers degree {law.max_degree}, params ask for m={params.m}")
    violations, slack_used = _norm_check(tuples, params.R)
    dev, worst = scan_word_deviations(letter_matrices(tuples), law, params.m)
    member = not violations and dev < params.delta
    return MembershipReport(member, dev, worst, violations, slack_used)


def orbital_membership(
    base, unitaries: UnitaryTuple, law: NCLaw, params: MicrostateParams
) -> MembershipReport:
    """Conjugate each base group by its unitary and test joint membership
    without a norm cut-off (orbital sets never carry one)."""
    base = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in base]
    if len(unitaries) != len(base):
        raise InvalidInputError(f"{len(base)} groups need {len(base)} unitaries, got {len(unitaries)}")
    if unitaries.n != params.N:
        raise InvalidInputError(f"unitaries have size {unitaries.n}, params say N={params.N}")
    conjugated = _conjugate_arrays([t.arrays() for t in base], unitaries.arrays())
    return _membership_on_arrays(conjugated, law, params.without_cutoff())


def _conjugate_arrays(groups, u_mats):
    out = []
    for mats, u in zip(groups, u_mats):
        uh = u.conj().T
        out.append(tuple(u @ m @ uh for m in mats))
    return out


def _membership_on_arrays(groups, law: NCLaw, params: MicrostateParams) -> MembershipReport:
    if len(groups) != law.n_groups or any(
        len(g) != law.r(i + 1) for i, g in enumerate(groups)
    ):
        raise InvalidInputError("tuple shapes do not match the law's alphabet")
    if params.m > law.max_degree:
        raise InvalidInputError(f"law covers degree {law.max_degree}, params ask for m={params.m}")
    violations = ()
    slack_used = False
    if not math.isinf(params.R):
        vio = []
        for i, g in enumerate(groups):
            for j, m in enumerate(g):
                v = float(np.linalg.norm(m, 2))
                if v > params.R + NORM_SLACK:
                    vio.append((i + 1, j + 1, v))
                elif v > params.R:
                    slack_used = True
        violations = tuple(vio)
    mats = {}
    for i, g in enumerate(groups):
        for j, m in enumerate(g):
            mats[Letter.x(i + 1, j + 1)] = m
    dev, worst = scan_word_deviations(mats, law, params.m)
    member = not violations and dev < params.delta
    return MembershipReport(member, dev, worst, violations, slack_used)


def _is_orbital_hit(base_arrays, u_mats, law: NCLaw, params: MicrostateParams) -> bool:
    """Fast boolean orbital test with early exit; same verdict as
    orbital_membership but without the full report."""
    mats = {}
    for i, (group, u) in enumerate(zip(base_arrays, u_mats)):
        uh = u.conj().T
        for j, m in enumerate(group):
            mats[Letter.x(i + 1, j + 1)] = u @ m @ uh
    dev, _ = scan_word_deviations(mats, law, params.m, stop_beyond=params.delta)
    return dev < params.delta


def presence_membership(
    tuples,
    presence: UnitaryTuple | None,
    law: NCLaw,
    params: MicrostateParams,
) -> MembershipReport:
    """Membership of self-adjoint tuples together with presence unitaries.

    All mixed words in the variables and the unitary letters (exponents
    +-1) of degree <= m are checked against the law within delta. The norm
    cut-off applies to the self-adjoint variables only. With no unitary
    generators this is exactly ``microstate_membership``.
    """
    s = 0 if presence is None else len(presence)
    if law.n_unitaries != s:
        raise InvalidInputError(f"law declares {law.n_unitaries} unitary generators, got {s}")
    tuples = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in tuples]
    _check_shapes(tuples, law, params)
    if presence is not None and presence.n != params.N:
        raise InvalidInputError(f"presence unitaries have size {presence.n}, params say N={params.N}")
    if params.m > law.max_degree:
        raise InvalidInputError(f"law covers degree {law.max_degree}, params ask for m={params.m}")
    violations, slack_used = _norm_check(tuples, params.R)
    dev, worst = scan_word_deviations(letter_matrices(tuples, presence), law, params.m)
    member = not violations and dev < params.delta
    return MembershipReport(member, dev, worst, violations, slack_used)


@dataclass(frozen=True)
class FreenessReport:
    free: bool
    deviation: float
    worst_word: Word | None


def freeness_report(tuple_groups, m: int, delta: float) -> FreenessReport:
    """Operational (m, delta)-freeness test.

    Each group's empirical marginal law is computed, the free product of
    the marginals is formed, and the joint empirical law is compared to it
    over all words of degree <= m; the groups count as free when the worst
    deviation is strictly below delta. The achieved deviation is reported so
    results can be re-thresholded later.
    """
    groups = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in tuple_groups]
    if not groups:
        raise InvalidInputError("need at least one group")
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    marginals = [empirical_law([g], max_degree=m) for g in groups]
    target = free_product_law(marginals, m)
    joint = empirical_law(groups, max_degree=m)
    dev, worst = law_deviation(joint, target, m)
    return FreenessReport(dev < delta, dev, worst)
