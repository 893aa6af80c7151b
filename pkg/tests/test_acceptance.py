"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py`` for just the summary lines.
"""

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import exact_oracle as exact  # noqa: E402
from frame_complete.majorization import entrywise_leq  # noqa: E402
from frame_complete.oracle import (  # noqa: E402
    GammaSampler,
    audit_structure,
    brute_force_min,
    majorization_violations,
    sample_gamma,
)
from frame_complete.potentials import eval_vector, parse_potential  # noqa: E402
from frame_complete.solver import ProblemData, feasible_case_spectrum, optimal_spectrum  # noqa: E402
from frame_complete.spectral import eigh_ascending, frame_operator  # noqa: E402
from frame_complete.synthesis import complete, schur_horn  # noqa: E402

SEED = 42
POTENTIALS = ("fp", "pow:4", "exp")


# collected for the terminal summary (pytest captures prints)
SUMMARY = []


def announce(number, title, ok, detail):
    line = f"criterion {number:>2} [{title}]: {'PASS' if ok else 'FAIL'}  {detail}"
    SUMMARY.append(line)
    print(line, flush=True)
    return ok


def fsum_majorized(x, y, atol):
    """x majorized by y, partial sums with math.fsum."""
    xs, ys = sorted(x, reverse=True), sorted(y, reverse=True)
    for i in range(1, len(xs) + 1):
        if math.fsum(xs[:i]) > math.fsum(ys[:i]) + atol:
            return False
    return abs(math.fsum(xs) - math.fsum(ys)) <= atol


# -- 1 ---------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(SEED)
    pds = []
    while len(pds) < 100:
        d = int(rng.integers(1, 9))
        k = d + int(rng.integers(0, 6))
        lam = rng.uniform(0, 5, d)
        a = rng.uniform(0.5, 1.5, k) * rng.uniform(1, 8)
        t = math.fsum(lam) + math.fsum(a)
        if t / d < lam.max():
            continue
        # keep pairs where the norms are also majorized by t/d - lam
        if not fsum_majorized(list(a), list(t / d - lam), 1e-12 * t):
            continue
        pds.append(ProblemData(lam, a))
    start = time.perf_counter()
    results = [optimal_spectrum(pd) for pd in pds]
    elapsed = time.perf_counter() - start
    err = 0.0
    for pd, nu in zip(pds, results):
        target = (math.fsum(pd.lam) + math.fsum(pd.a)) / pd.d
        err = max(err, float(np.max(np.abs(nu.flatten() - target))))
        err = max(err, float(np.max(np.abs(feasible_case_spectrum(pd).result - target))))
    ok = err <= 1e-12 and elapsed < 0.010 and all(nu.p == 1 for nu in results)
    return announce(1, "uniform branch", ok, f"100 instances, max error {err:.1e}, solver time {elapsed * 1e3:.2f} ms")


# -- 2 ---------------------------------------------------------------------


def criterion_2():
    rng = np.random.default_rng(SEED + 1)
    worst_trace, worst_exact, bad = 0.0, 0.0, 0
    count = 0
    while count < 100:
        d = int(rng.integers(2, 9))
        k = d + int(rng.integers(0, 5))
        lam = np.sort(rng.exponential(2.0, d))
        a = rng.exponential(0.5, k) + 0.05
        t = math.fsum(lam) + math.fsum(a)
        if t / d >= lam.max():
            continue
        count += 1
        pd = ProblemData(lam, a)
        fs = feasible_case_spectrum(pd)
        s = fs.cut_index
        q = (math.fsum(pd.a) + math.fsum(pd.lam[:s])) / s
        bracket = pd.lam[s - 1] <= q + 1e-12 * t and q < pd.lam[s]
        if not (bracket and not fs.uniform and entrywise_leq(pd.lam, fs.result + 1e-12 * t)):
            bad += 1
        worst_trace = max(worst_trace, abs(math.fsum(fs.result) - t))
        ref, _ = exact.feasible_nu(list(pd.lam), list(pd.a))
        worst_exact = max(worst_exact, float(np.max(np.abs(fs.result - np.array([float(x) for x in ref])))))
    ok = bad == 0 and worst_trace <= 1e-9 and worst_exact <= 1e-9
    return announce(
        2,
        "bracketed branch",
        ok,
        f"100 instances, {bad} bracketing failures, trace error {worst_trace:.1e}, "
        f"distance to exact reference {worst_exact:.1e}",
    )


# -- 3 and 4 -----------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def oracle_runs(count=100):
    rng = np.random.default_rng(SEED + 2)
    runs = []
    start = time.perf_counter()
    while len(runs) < count:
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, 7))
        lam = rng.uniform(0, 4, d) * (rng.random(d) < 0.8)
        if np.sum(lam == 0) > k:
            continue
        a = rng.uniform(0.1, 3, k)
        pd = ProblemData(lam, a)
        nu = optimal_spectrum(pd).flatten()
        per_f = {}
        for name in POTENTIALS:
            f = parse_potential(name)
            per_f[name] = brute_force_min(pd, f, budget=2000, seed=SEED)
        extra = [r.gamma for r in per_f.values()]
        gammas = np.array(sample_gamma(GammaSampler(pd.a, pd.d, SEED, 10_000), extra=extra))
        violations = majorization_violations(nu, pd.lam, gammas)
        runs.append((pd, nu, per_f, gammas.shape[0], violations.size))
    return runs, time.perf_counter() - start


def criterion_3():
    runs, elapsed = oracle_runs()
    worst_excess, total_viol, min_samples = -math.inf, 0, math.inf
    for pd, nu, per_f, n_samples, n_viol in runs:
        for name, res in per_f.items():
            ours = eval_vector(parse_potential(name), nu)
            worst_excess = max(worst_excess, ours - res.value)
        total_viol += n_viol
        min_samples = min(min_samples, n_samples)
    ok = worst_excess <= 1e-6 and total_viol == 0 and min_samples >= 10_000 and elapsed <= 300
    return announce(
        3,
        "oracle agreement",
        ok,
        f"{len(runs)} instances x {len(POTENTIALS)} potentials, max F(solver) - F(oracle) = {worst_excess:.1e}, "
        f"{total_viol} majorization violations in >= {min_samples} samples each, {elapsed:.1f} s",
    )


def criterion_4():
    runs, _ = oracle_runs()
    worst_pair, worst_solver = 0.0, 0.0
    for pd, nu, per_f, _, _ in runs:
        mins = {name: np.sort(res.nu) for name, res in per_f.items()}
        names = list(mins)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                worst_pair = max(worst_pair, float(np.max(np.abs(mins[names[i]] - mins[names[j]]))))
            worst_solver = max(worst_solver, float(np.max(np.abs(mins[names[i]] - np.sort(nu)))))
    ok = worst_pair <= 1e-3 and worst_solver <= 1e-3
    return announce(
        4,
        "potential independence",
        ok,
        f"max pairwise argmin distance {worst_pair:.1e}, max distance to solver {worst_solver:.1e}",
    )


# -- 5 ---------------------------------------------------------------------


def criterion_5():
    pd = ProblemData([0, 0, 10], [6, 1, 1])
    nu = optimal_spectrum(pd)
    structure = nu.block_ends[0] == 1 and nu.constants[0] == 6 and nu.constants[-1] == 2
    desc = nu.descending().tolist() == [10, 6, 2]
    certified = True
    for name in POTENTIALS:
        res = brute_force_min(pd, parse_potential(name), budget=2000, seed=SEED)
        certified &= bool(np.max(np.abs(np.sort(res.nu)[::-1] - [10, 6, 2])) <= 1e-3)
        certified &= eval_vector(parse_potential(name), nu.flatten()) <= res.value + 1e-6
    gammas = np.array(sample_gamma(GammaSampler(pd.a, pd.d, SEED, 10_000)))
    certified &= majorization_violations(nu.flatten(), pd.lam, gammas).size == 0
    ok = structure and desc and certified
    return announce(
        5,
        "worked instance",
        ok,
        f"blocks {nu.blocks()}, nu desc {nu.descending().tolist()}, oracle certified: {certified}",
    )


# -- 6 and 8 -----------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def completions(count=200):
    rng = np.random.default_rng(SEED + 3)
    out = []
    while len(out) < count:
        d = int(rng.integers(1, 7))
        k = int(rng.integers(1, 9))
        n0 = int(rng.integers(max(0, d - k), d + 4))
        F0 = rng.standard_normal((n0, d))
        if rng.random() < 0.5:
            F0 = F0 + 1j * rng.standard_normal((n0, d))
        a = rng.uniform(0.1, 3, k)
        if n0 and rng.random() < 0.3:
            a = np.round(a)  # repeated norms
            a[a == 0] = 1.0
        G, nu = complete(F0, a, dim=d)
        out.append((F0, a, G, nu))
    return out


def criterion_6():
    worst = dict(norms=0.0, operator=0.0, spectrum=0.0, commutator=0.0)
    for F0, a, G, nu in completions():
        d = G.shape[1]
        S0, SG = frame_operator(F0, d), frame_operator(G)
        eig0 = eigh_ascending(S0)
        target = eig0.vectors @ np.diag(nu.mu()) @ eig0.vectors.conj().T
        spec = eigh_ascending(S0 + SG).values[::-1]
        worst["norms"] = max(worst["norms"], float(np.max(np.abs(np.sum(np.abs(G) ** 2, axis=1) - a))))
        worst["operator"] = max(worst["operator"], float(np.max(np.abs(SG - target))))
        worst["spectrum"] = max(worst["spectrum"], float(np.max(np.abs(spec - nu.descending()))))
        worst["commutator"] = max(worst["commutator"], float(np.max(np.abs(S0 @ SG - SG @ S0))))
    ok = worst["norms"] <= 1e-10 and all(worst[key] <= 1e-8 for key in ("operator", "spectrum", "commutator"))
    detail = ", ".join(f"{key} {val:.1e}" for key, val in worst.items())
    return announce(6, "synthesis fidelity", ok, f"200 completions, max errors: {detail}")


def criterion_8():
    rng = np.random.default_rng(SEED + 4)
    passed = caught = controls = 0
    for F0, a, G, nu in completions():
        d = G.shape[1]
        passed += audit_structure(F0, G, dim=d).passed
        # in dimension 1 every completion is optimal, so noise gives no negative control
        if d < 2:
            continue
        controls += 1
        noisy = G + 1e-3 * np.sqrt(a.max()) * rng.standard_normal(G.shape)
        caught += not audit_structure(F0, noisy, dim=d).passed
    n = len(completions())
    ok = passed == n and caught == controls and controls >= 100
    return announce(
        8,
        "structural audit",
        ok,
        f"{passed}/{n} optimal completions pass, {caught}/{controls} noisy controls (d >= 2) rejected",
    )


# -- 7 ---------------------------------------------------------------------


def criterion_7():
    rng = np.random.default_rng(SEED + 5)
    worst_spec = worst_diag = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        spec = rng.exponential(1.0, n) * (rng.random(n) < 0.8)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        diag = np.diag(Q @ np.diag(spec) @ Q.T).copy()
        M, _ = schur_horn(diag, spec)
        got = np.sort(np.linalg.eigvalsh(M))[::-1]
        worst_spec = max(worst_spec, float(np.max(np.abs(got - np.sort(spec)[::-1]))))
        worst_diag = max(worst_diag, float(np.max(np.abs(np.diag(M) - diag))))
    ok = worst_spec <= 1e-8 and worst_diag <= 1e-10
    return announce(7, "Schur-Horn", ok, f"200 pairs, spectrum error {worst_spec:.1e}, diagonal error {worst_diag:.1e}")


# -- 9 ---------------------------------------------------------------------


def criterion_9():
    rng = np.random.default_rng(SEED + 6)
    tails = heads = 0
    for _ in range(50):
        k = int(rng.integers(1, 6))
        d = k + int(rng.integers(1, 6))
        lam = rng.exponential(2.0, d)
        lam[: int(rng.integers(0, k + 1))] = 0.0
        pd = ProblemData(lam, rng.uniform(0.1, 3, k))
        flat = optimal_spectrum(pd).flatten()
        tails += np.array_equal(flat[k:], pd.lam[k:])
        heads += np.array_equal(flat[:k], optimal_spectrum(ProblemData(pd.lam[:k], pd.a)).flatten())
    ok = tails == 50 and heads == 50
    return announce(9, "d > k reduction", ok, f"tails identical {tails}/50, heads identical {heads}/50")


# -- 10 --------------------------------------------------------------------


def criterion_10():
    rng = np.random.default_rng(SEED + 7)
    d = 1000
    cases = {
        "random": ProblemData(rng.exponential(1.0, d), rng.exponential(1.0, d) + 0.01),
        "steep norms": ProblemData(np.zeros(d), np.linspace(2.0, 1.0, d)),
        "feasible": ProblemData(rng.uniform(0, 1, d), rng.uniform(1, 1.1, d)),
    }
    worst = 0.0
    s_stars = []
    for pd in cases.values():
        optimal_spectrum(pd)
        for _ in range(5):
            start = time.perf_counter()
            nu = optimal_spectrum(pd)
            worst = max(worst, time.perf_counter() - start)
        s_stars.append(nu.s_star)
    ok = worst < 0.100
    return announce(10, "performance", ok, f"d = k = 1000, worst of 15 runs {worst * 1e3:.1f} ms, s* in {s_stars}")


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
