"""Covering and packing numbers on finite clouds of unitary tuples.

The ambient metric space is the set of n-tuples of N x N unitaries with the
distance sqrt(sum_i ||U_i - V_i||^2) in the normalized 2-norm. Clouds are
finite samples (typically orbital-microstate hits); all counts here are
cloud-relative, with ball centers restricted to cloud points, and are
reported together with the sample size so their proxy status stays
explicit.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FeasibilityError, InvalidInputError
from .estimators import BaseTupleStrategy, _marginal_reports, resolve_base_candidates, _sample_orbital_hits
from .laws import NCLaw
from .linalg import UnitaryTuple, d2_distance
from .microstates import MicrostateParams
from .randmat import RandomSeed

EXACT_SOLVER_CAP = 15

__all__ = [
    "PointCloud",
    "PackingProfile",
    "ProfileRow",
    "greedy_packing",
    "greedy_covering",
    "exact_cover_pack",
    "packing_profile",
    "EXACT_SOLVER_CAP",
]


class PointCloud:
    """A nonempty finite set of unitary tuples sharing one shape."""

    __slots__ = ("points", "provenance", "_dists")

    def __init__(self, points: Sequence[UnitaryTuple], provenance: str = ""):
        pts = tuple(points)
        if not pts:
            raise InvalidInputError("a point cloud needs at least one point")
        shapes = {(len(p), p.n) for p in pts}
        if len(shapes) != 1:
            raise InvalidInputError(f"points must share one shape, got {sorted(shapes)}")
        self.points = pts
        self.provenance = provenance
        self._dists = None

    def __len__(self):
        return len(self.points)

    @property
    def n_groups(self) -> int:
        return len(self.points[0])

    @property
    def n_dim(self) -> int:
        return self.points[0].n

    def distance_matrix(self) -> np.ndarray:
        if self._dists is None:
            k = len(self.points)
            d = np.zeros((k, k))
            for a in range(k):
                for b in range(a + 1, k):
                    d[a, b] = d[b, a] = d2_distance(self.points[a], self.points[b])
            self._dists = d
        return self._dists


def _as_dists(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.distance_matrix()
    return np.asarray(cloud, dtype=float)


def greedy_packing(cloud, epsilon: float) -> tuple[int, tuple[int, ...]]:
    """Greedy maximal set of centers with pairwise distance > 2*epsilon.

    The count is a valid lower bound for the cloud's maximum packing number
    and, by maximality, the selected centers form a 2*epsilon-cover of the
    cloud. Scan order is the cloud order, so results are deterministic.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    d = _as_dists(cloud)
    centers = []
    for k in range(d.shape[0]):
        if all(d[k, c] > 2.0 * epsilon for c in centers):
            centers.append(k)
    return len(centers), tuple(centers)


def greedy_covering(cloud, epsilon: float) -> tuple[int, tuple[int, ...]]:
    """Greedy set cover by epsilon-balls centered at cloud points.

    The count is an upper bound on the cloud's minimum covering number and
    stays within the classical (1 + ln size) factor of it. Ties are broken
    toward the lowest point index.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    d = _as_dists(cloud)
    k = d.shape[0]
    covered = np.zeros(k, dtype=bool)
    balls = d <= epsilon
    centers = []
    while not covered.all():
        gains = balls[:, ~covered].sum(axis=1)
        best = int(np.argmax(gains))  # argmax returns the first max: lowest index
        if gains[best] == 0:
            raise AssertionError("uncoverable point; every point covers itself")
        centers.append(best)
        covered |= balls[best]
    return len(centers), tuple(centers)


def exact_cover_pack(cloud, epsilon: float) -> tuple[int, int]:
    """Exact minimum cover and maximum packing by exhaustive subset search,
    with ball centers restricted to the cloud's points."""
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    d = _as_dists(cloud)
    k = d.shape[0]
    if k > EXACT_SOLVER_CAP:
        raise InvalidInputError(f"exact solver caps at {EXACT_SOLVER_CAP} points, got {k}")
    full = (1 << k) - 1
    cover_mask = []
    conflict = []
    for a in range(k):
        cm = 0
        fm = 0
        for b in range(k):
            if d[a, b] <= epsilon:
                cm |= 1 << b
            if b != a and d[a, b] <= 2.0 * epsilon:
                fm |= 1 << b
        cover_mask.append(cm)
        conflict.append(fm)

    best_cover = k
    best_pack = 1
    for subset in range(1, 1 << k):
        size = subset.bit_count()
        union = 0
        ok_pack = True
        s = subset
        while s:
            a = (s & -s).bit_length() - 1
            s &= s - 1
            union |= cover_mask[a]
            if conflict[a] & subset:
                ok_pack = False
        if union == full and size < best_cover:
            best_cover = size
        if ok_pack and size > best_pack:
            best_pack = size
    return best_cover, best_pack


@dataclass(frozen=True)
class ProfileRow:
    epsilon: float
    K_upper: int
    P_lower: int
    K_exact: int | None
    P_exact: int | None
    log_K_per_N2: float
    log_P_per_N2: float


@dataclass(frozen=True)
class PackingProfile:
    """Cloud-relative covering/packing counts over an epsilon grid.

    ``delta_slope`` columns report (1/N^2) log K over |log eps| with the
    usual -n offset of the orbital dimension proxy already applied.
    """

    rows: tuple
    n_dim: int
    n_groups: int
    cloud_size: int
    samples: int
    provenance: str = ""

    def delta_slopes(self) -> list[tuple[float, float, float]]:
        out = []
        for row in self.rows:
            denom = abs(math.log(row.epsilon))
            if denom == 0:
                out.append((row.epsilon, math.nan, math.nan))
                continue
            out.append(
                (
                    row.epsilon,
                    row.log_K_per_N2 / denom - self.n_groups,
                    row.log_P_per_N2 / denom - self.n_groups,
                )
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epsilon,K_upper,P_lower,K_exact,P_exact,log_K_per_N2,log_P_per_N2\n")
        for r in self.rows:
            ke = "" if r.K_exact is None else r.K_exact
            pe = "" if r.P_exact is None else r.P_exact
            buf.write(
                f"{r.epsilon!r},{r.K_upper},{r.P_lower},{ke},{pe},"
                f"{r.log_K_per_N2!r},{r.log_P_per_N2!r}\n"
            )
        return buf.getvalue()


def profile_from_cloud(
    cloud: PointCloud, epsilons: Sequence[float], samples: int, exact_cap: int = EXACT_SOLVER_CAP
) -> PackingProfile:
    """Greedy (and, for small clouds, exact) counts per epsilon."""
    if not epsilons:
        raise InvalidInputError("need at least one epsilon")
    n2 = cloud.n_dim**2
    rows = []
    dists = cloud.distance_matrix()
    for eps in sorted(epsilons, reverse=True):
        k_up, _ = greedy_covering(dists, eps)
        p_low, centers = greedy_packing(dists, eps)
        if np.max(dists[:, list(centers)].min(axis=1)) > 2.0 * eps:
            raise AssertionError("greedy packing centers must form a 2-epsilon cover")
        if len(cloud) <= exact_cap:
            k_ex, p_ex = exact_cover_pack(dists, eps)
        else:
            k_ex = p_ex = None
        rows.append(
            ProfileRow(
                epsilon=float(eps),
                K_upper=k_up,
                P_lower=p_low,
                K_exact=k_ex,
                P_exact=p_ex,
                log_K_per_N2=math.log(k_up) / n2,
                log_P_per_N2=math.log(p_low) / n2,
            )
        )
    return PackingProfile(
        rows=tuple(rows),
        n_dim=cloud.n_dim,
        n_groups=cloud.n_groups,
        cloud_size=len(cloud),
        samples=samples,
        provenance=cloud.provenance,
    )


def packing_profile(
    law: NCLaw,
    params: MicrostateParams,
    strategy: BaseTupleStrategy,
    epsilons: Sequence[float],
    samples: int,
    seed: RandomSeed,
    exact_cap: int = EXACT_SOLVER_CAP,
) -> PackingProfile:
    """Sample Haar unitary tuples, keep the orbital-microstate hits as a
    cloud, and tabulate its covering/packing counts over the epsilon grid.

    With several candidate bases the one with the most hits wins (ties to
    the earliest), matching the sup over bases in the dimension proxy.
    """
    if samples < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {samples}")
    candidates = resolve_base_candidates(strategy, law, params, seed)
    best = None
    for j, base in enumerate(candidates):
        if not all(r.member for r in _marginal_reports(base, law, params)):
            continue
        hits, _, points = _sample_orbital_hits(
            [t.arrays() for t in base], law, params, samples, seed.split(j, 1),
            keep_hits=True,
        )
        if best is None or hits > best[0]:
            best = (hits, j, points)
    if best is None:
        raise FeasibilityError(
            "no candidate base passes its marginal microstate test",
            stats={"candidates": len(candidates)},
        )
    hits, j, points = best
    if hits == 0:
        raise FeasibilityError(
            f"no orbital hits in {samples} samples; the cloud is empty",
            stats={"samples": samples, "candidate": j},
        )
    cloud = PointCloud(points, provenance=f"orbital hits, candidate {j}, {samples} samples")
    return profile_from_cloud(cloud, epsilons, samples, exact_cap)
