"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every tolerance is pinned here, taken from the project's contract; run with
``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

import math
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from microstate_lab.estimators import (
    BaseTupleStrategy,
    best_base_search,
    fubini_check,
    lebesgue_volume_estimate,
    orbital_hit_probability,
    truncation_check,
)
from microstate_lab.laws import (
    free_product_law,
    quantile_from_spec,
    two_point_law,
)
from microstate_lab.linalg import UnitaryTuple
from microstate_lab.metric import PointCloud, exact_cover_pack
from microstate_lab.microstates import MicrostateParams, _is_orbital_hit
from microstate_lab.estimators import diagonal_base
from microstate_lab.linalg import HermitianTuple
from microstate_lab.randmat import RandomSeed, _brownian_unitary, haar_unitary

Q_SYM = quantile_from_spec("two_point(1,-1,0.5)")


def report(idx, name, ok, detail):
    print(f"ACCEPTANCE {idx} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {idx} ({name}) failed: {detail}"


def sym_marginal(degree):
    return two_point_law(1.0, -1.0, 0.5, degree)


def sym_base(n):
    return HermitianTuple([diagonal_base(Q_SYM, n)])


def test_criterion_1_fubini_identity():
    marginals = [sym_marginal(3), sym_marginal(3)]
    joint = free_product_law(marginals, 3)
    params = MicrostateParams(3, 3, 0.3, 1.5)
    rep = fubini_check(marginals, joint, params, outer_samples=10_000,
                       inner_samples=1_000, seed=RandomSeed(20250801))
    ok = abs(rep.z) <= 3
    report(1, "Fubini identity", ok,
           f"lhs={rep.lhs.p_hat:.5f}+-{rep.lhs.stderr:.5f} "
           f"rhs={rep.rhs:.5f}+-{rep.rhs_stderr:.5f} z={rep.z:.3f}")


def test_criterion_2_single_group_orbital_triviality():
    est = orbital_hit_probability(
        [sym_base(8)], sym_marginal(3), MicrostateParams(8, 3, 0.2, 1.5),
        samples=1_000, seed=RandomSeed(202),
    )
    ok = est.hits == 1_000 and est.p_hat == 1.0
    report(2, "single-group orbital triviality", ok,
           f"hits={est.hits}/1000 p={est.p_hat}")


def test_criterion_3_asymptotic_freeness_trend():
    joint = free_product_law([sym_marginal(3), sym_marginal(3)], 3)
    strategy = BaseTupleStrategy.diagonalized([Q_SYM, Q_SYM])
    rows = []
    for k, n in enumerate((4, 8, 16, 32)):
        params = MicrostateParams(n, 3, 0.2, 1.5)
        res = best_base_search(strategy, joint, params, 400, RandomSeed(303).split(k))
        rows.append((n, res.estimate.p_hat, res.estimate.stderr))
    nondecreasing = all(
        rows[i + 1][1] >= rows[i][1] - 2 * math.hypot(rows[i][2], rows[i + 1][2])
        for i in range(len(rows) - 1)
    )
    final_ok = rows[-1][1] >= 0.5
    detail = " ".join(f"N={n}:p={p:.3f}" for n, p, _ in rows)
    report(3, "asymptotic-freeness trend", nondecreasing and final_ok, detail)


def test_criterion_4_packing_covering_chain():
    seed = RandomSeed(404)
    rows = violations = 0
    for c in range(100):
        rng = np.random.default_rng(c)
        size = int(rng.integers(5, 13))
        n_groups = int(rng.integers(1, 3))
        n_dim = int(rng.integers(2, 4))
        pts = [
            UnitaryTuple([haar_unitary(n_dim, seed.split(c, k, i)) for i in range(n_groups)])
            for k in range(size)
        ]
        cloud = PointCloud(pts)
        d = cloud.distance_matrix()
        positive = d[d > 0]
        for q in (0.15, 0.35, 0.6):
            eps = float(np.quantile(positive, q)) / 4
            p1 = exact_cover_pack(cloud, eps)[1]
            k2 = exact_cover_pack(cloud, 2 * eps)[0]
            p4 = exact_cover_pack(cloud, 4 * eps)[1]
            rows += 1
            if not (p1 >= k2 >= p4):
                violations += 1
    report(4, "packing/covering chain", violations == 0,
           f"{rows} rows over 100 clouds, {violations} violations")


def test_criterion_5_truncation():
    marginal = sym_marginal(12)
    params = MicrostateParams(64, 1, 1.0, 1.25)
    rep = truncation_check(marginal, params, samples=100, seed=RandomSeed(505), quantile=Q_SYM)
    ok = (
        rep.members == 100
        and rep.perturbed > 0
        and rep.gap_violations == 0
        and rep.chain_violations == 0
        and rep.implication_violations == 0
    )
    report(5, "truncation estimates", ok,
           f"members={rep.members}/100 perturbed={rep.perturbed} "
           f"max_gap={rep.max_gap:.2e} bound={rep.parameters.bound:.2e} "
           f"m'={rep.parameters.m_prime} delta'={rep.parameters.delta_prime}")


def _brownian_stats(args):
    n, t, paths, steps, seed_stream = args
    rng = RandomSeed(606, seed_stream).generator()
    eye = np.eye(n)
    traces = []
    ratios = []
    for _ in range(paths):
        v = _brownian_unitary(n, t, steps, rng)
        traces.append(np.trace(v).real / n)
        ratios.append(float(np.linalg.norm(v - eye, 2)) / math.sqrt(t))
    return t, float(np.mean(traces)), float(np.mean(ratios))


def test_criterion_6_brownian_first_moment():
    n, paths, steps = 64, 200, 200
    moment_tasks = [(n, t, paths, steps, k) for k, t in enumerate((0.25, 0.5, 1.0))]
    envelope_tasks = [(n, t, 100, steps, 10 + k) for k, t in enumerate((0.01, 0.1, 1.0))]
    with ProcessPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(_brownian_stats, moment_tasks + envelope_tasks))
    moment_rows = results[:3]
    envelope_rows = results[3:]
    moment_ok = all(abs(m - math.exp(-t / 2)) <= 0.02 for t, m, _ in moment_rows)
    envelope_ok = all(r <= 3.0 for _, _, r in envelope_rows)
    detail = " ".join(
        f"t={t}:err={abs(m - math.exp(-t / 2)):.4f}" for t, m, _ in moment_rows
    ) + " | ratios " + " ".join(f"t={t}:{r:.2f}" for t, _, r in envelope_rows)
    report(6, "Brownian first moment", moment_ok and envelope_ok, detail)


def test_criterion_7_volume_calibration():
    import sympy as sp

    # Independent closed forms: eigenvalue integrals of the squared
    # Vandermonde over the cube, times (2 pi)^(N(N-1)/2) / prod_j j!.
    x, y, z = sp.symbols("x y z", real=True)
    i1 = sp.Integer(2)
    i2 = sp.integrate((x - y) ** 2, (x, -1, 1), (y, -1, 1))
    i3 = sp.integrate(((x - y) * (x - z) * (y - z)) ** 2, (x, -1, 1), (y, -1, 1), (z, -1, 1))
    closed = {}
    for n, integral in ((1, i1), (2, i2), (3, i3)):
        c = (2 * math.pi) ** (n * (n - 1) / 2) / math.prod(
            math.factorial(j) for j in range(1, n + 1)
        )
        closed[n] = math.log(c * float(integral))

    law = two_point_law(0.0, 0.0, 0.5, 1)
    radius = 1.0
    rows = []
    ok = True
    for n, samples in ((1, 20_000), (2, 40_000), (3, 60_000)):
        params = MicrostateParams(n, 1, 1e6, radius)
        est = lebesgue_volume_estimate(law, params, samples, RandomSeed(707).split(n))
        rel = est.stderr / est.p_hat if est.p_hat else math.inf
        gap = abs(est.log_measure - closed[n])
        tol = max(3 * rel, 1e-12)
        rows.append(f"N={n}:gap={gap:.4f},3sigma={tol:.4f}")
        ok = ok and gap <= tol

    # N = 1 interval case: measure is exactly 2 min(delta, R).
    for delta in (0.3, 2.0):
        params = MicrostateParams(1, 1, delta, radius)
        est = lebesgue_volume_estimate(law, params, 20_000, RandomSeed(708).split(int(10 * delta)))
        target = math.log(2 * min(delta, radius))
        rel = est.stderr / est.p_hat
        tol = max(3 * rel, 1e-12)
        gap = abs(est.log_measure - target)
        rows.append(f"interval(delta={delta}):gap={gap:.4f}")
        ok = ok and gap <= tol
    report(7, "volume calibration", ok, " ".join(rows))


def test_criterion_8_subfamily_subadditivity():
    marginals = [sym_marginal(2)] * 3
    joint = free_product_law(marginals, 2)
    params = MicrostateParams(16, 2, 0.4)
    base = [sym_base(16) for _ in range(3)]
    base_arrays = [t.arrays() for t in base]
    sub_groups = ((1, 2), (3,))
    sub_laws = [joint.restrict_groups(g) for g in sub_groups]

    from microstate_lab.randmat import _haar_unitary

    rng = RandomSeed(808).generator()
    hits = checked = failures = 0
    samples = 10_000
    for _ in range(samples):
        us = [_haar_unitary(16, rng) for _ in range(3)]
        if not _is_orbital_hit(base_arrays, us, joint, params):
            continue
        hits += 1
        for groups, sub_law in zip(sub_groups, sub_laws):
            checked += 1
            sub_base = [base_arrays[i - 1] for i in groups]
            sub_us = [us[i - 1] for i in groups]
            if not _is_orbital_hit(sub_base, sub_us, sub_law, params):
                failures += 1
    ok = hits >= samples * 0.9 and failures == 0
    report(8, "subfamily subadditivity", ok,
           f"hits={hits}/{samples} subfamily checks={checked} failures={failures}")


def test_criterion_9_su_pushforward():
    joint = free_product_law([sym_marginal(3), sym_marginal(3)], 3)
    base = [sym_base(8), sym_base(8)]
    params = MicrostateParams(8, 3, 0.2, 1.5)
    a = orbital_hit_probability(base, joint, params, 2_000, RandomSeed(909), sampler="haar")
    b = orbital_hit_probability(base, joint, params, 2_000, RandomSeed(910), sampler="su_scalar")
    denom = math.hypot(a.stderr, b.stderr)
    z = 0.0 if denom == 0 else (a.p_hat - b.p_hat) / denom
    ok = abs(z) <= 3
    report(9, "SU(N) pushforward", ok,
           f"haar p={a.p_hat:.4f} su p={b.p_hat:.4f} z={z:.3f}")


def test_criterion_10_determinism(tmp_path):
    config = tmp_path / "det.toml"
    config.write_text("""
experiment = "orbital-volume"
marginals = ["two_point(1,-1,0.5)", "two_point(1,-1,0.5)"]
N = [4, 6, 8]
m = 3
delta = 0.25
R = 1.5
strategy = "diagonalized"
samples = 60
seed = 42
""")
    outputs = []
    for workers in (1, 3):
        out = tmp_path / f"records_{workers}.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "microstate_lab.cli",
             "--config", str(config), "--workers", str(workers), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(b"\n".join(sorted(out.read_bytes().splitlines())))
    ok = outputs[0] == outputs[1]
    report(10, "determinism across worker counts", ok,
           f"{len(outputs[0].splitlines())} records, byte-identical={ok}")
