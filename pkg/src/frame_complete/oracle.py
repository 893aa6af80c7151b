"""Independent checks of optimal completions.

Nothing here calls the block-average solver.  The brute-force minimizer
searches the admissible spectra of the added vectors directly: sorted
nonnegative vectors ``gamma`` of length ``d`` that majorize the norms ``a``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from scipy.optimize import minimize

from .majorization import DEFAULT_TOL, as_vector
from .potentials import PotentialSpec, eval_vector
from .spectral import as_sequence, eigh_ascending, frame_operator

__all__ = [
    "GammaSampler",
    "OracleResult",
    "StructureReport",
    "thread_count",
    "minimal_gamma",
    "gamma_members",
    "sample_gamma",
    "brute_force_min",
    "majorization_violations",
    "check_majorization_min",
    "audit_structure",
]

MAX_ORACLE_DIM = 8
MIX_ANCHORS = 24


def thread_count() -> int:
    """Worker threads for the oracle, capped by ``FRAME_COMPLETE_THREADS``."""
    try:
        n = int(os.environ.get("FRAME_COMPLETE_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


@dataclass(frozen=True)
class GammaSampler:
    norms: np.ndarray
    d: int
    seed: int = 42
    count: int = 100


def minimal_gamma(a, d) -> np.ndarray:
    """A point of the admissible set close to its majorization bottom.

    With ``k <= d`` this is ``a`` itself padded with zeros.  With ``k > d``
    the smallest ``k - d + 1`` norms are merged into the last entry.
    """
    a = np.sort(as_vector(a))[::-1]
    if a.size <= d:
        return np.concatenate([a, np.zeros(d - a.size)])
    return np.sort(np.concatenate([a[: d - 1], [a[d - 1 :].sum()]]))[::-1]


def gamma_members(a, gammas, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Row-wise test that each row of ``gammas`` majorizes ``a`` (both zero-padded)."""
    a = np.sort(as_vector(a))[::-1]
    g = np.sort(np.atleast_2d(np.asarray(gammas, dtype=float)), axis=1)[:, ::-1]
    n = max(a.size, g.shape[1])
    a = np.concatenate([a, np.zeros(n - a.size)])
    g = np.hstack([g, np.zeros((g.shape[0], n - g.shape[1]))])
    atol = tol * max(1.0, float(a.sum()))
    ok = np.all(np.cumsum(a) <= np.cumsum(g, axis=1) + atol, axis=1)
    ok &= np.abs(g.sum(axis=1) - a.sum()) <= atol
    ok &= np.all(g >= -atol, axis=1)
    return ok


def _reverse_transfers(rng, base, size, moves=3):
    """Push mass from smaller to larger entries; the result majorizes ``base``."""
    g = np.tile(base, (size, 1))
    d = base.size
    if d < 2:
        return g
    rows = np.arange(size)
    for _ in range(moves):
        g = np.sort(g, axis=1)[:, ::-1]
        i = rng.integers(0, d - 1, size)
        j = i + 1 + (rng.random(size) * (d - 1 - i)).astype(int)
        amount = rng.random(size) ** 2 * g[rows, j]
        g[rows, i] += amount
        g[rows, j] -= amount
    return np.sort(g, axis=1)[:, ::-1]


def sample_gamma(gs: GammaSampler, extra=()) -> List[np.ndarray]:
    """``count`` admissible spectra for the added vectors, deterministic in ``seed``.

    The first entry is :func:`minimal_gamma`; ``extra`` points are included
    next when admissible.  The rest mixes rejection samples from the
    trace simplex, reverse transfers from the minimal point, and convex
    combinations of accepted points (the admissible set is convex).
    """
    a = np.sort(as_vector(gs.norms))[::-1]
    d, total = int(gs.d), float(a.sum())
    rng = np.random.default_rng(gs.seed)
    base = minimal_gamma(a, d)
    top = np.zeros(d)
    top[0] = total
    out = [base]
    for e in extra:
        e = np.sort(np.asarray(e, dtype=float))[::-1]
        if e.size == d and gamma_members(a, e)[0]:
            out.append(e)
    if gs.count <= len(out):
        return out[: max(gs.count, 1)]
    need = gs.count - len(out)
    pool = []
    got = 0
    for _ in range(50):
        if got >= need:
            break
        batch = max(64, need)
        simplex = np.sort(rng.dirichlet(np.ones(d), batch) * total, axis=1)[:, ::-1]
        simplex = simplex[gamma_members(a, simplex)]
        pushed = _reverse_transfers(rng, base, batch)
        # a few dozen anchors are plenty; the weight matrix is batch x anchors
        anchors = np.vstack([np.array(out), top[None, :], simplex[:MIX_ANCHORS], pushed[:MIX_ANCHORS]])
        w = rng.dirichlet(np.full(anchors.shape[0], 0.3), batch)
        mixed = w @ anchors
        # pull some mixtures toward the minimal point, where optima live
        shrink = rng.random((batch, 1)) ** 3
        near = shrink * mixed + (1 - shrink) * base
        cand = np.vstack([simplex, pushed, mixed, near])
        cand = cand[rng.permutation(cand.shape[0])]
        cand = np.sort(cand, axis=1)[:, ::-1]
        cand = cand[gamma_members(a, cand)]
        pool.append(cand)
        got += cand.shape[0]
    pool = np.vstack(pool)[:need] if pool else np.zeros((0, d))
    return out + [row for row in pool]


@dataclass
class OracleResult:
    """Best point found by :func:`brute_force_min`.

    Unpacks as ``(gamma, value)``.  ``nu`` is ``lam + gamma`` in the solver's
    index order; ``runner_up_gap`` is the gap between the two best distinct
    sampled values (sampling can falsify uniqueness, never certify it).
    """

    gamma: np.ndarray
    value: float
    nu: np.ndarray
    runner_up_gap: float
    evaluated: int

    def __iter__(self):
        yield self.gamma
        yield self.value


def _objective(f, lam):
    def F(g):
        return eval_vector(f, lam + np.maximum(np.sort(g)[::-1], 0.0))

    return F


def _pair_descent(F, a, gamma, step, floor):
    """Greedy transfers gamma_i -= eps, gamma_j += eps while F decreases."""
    d = gamma.size
    best = F(gamma)
    eps = step
    while eps >= floor and d > 1:
        improved = False
        for i in range(d):
            for j in range(d):
                if i == j or gamma[i] < eps:
                    continue
                trial = gamma.copy()
                trial[i] -= eps
                trial[j] += eps
                trial = np.sort(trial)[::-1]
                if not gamma_members(a, trial)[0]:
                    continue
                val = F(trial)
                if val < best:
                    gamma, best, improved = trial, val, True
        if not improved:
            eps /= 2
    return gamma, best


def _polish(F, a, gamma):
    """Local solve of the convex program over the admissible polytope."""
    d = gamma.size
    A = np.cumsum(np.concatenate([a, np.zeros(max(0, d - a.size))]))[:d]
    total = float(a.sum())
    cons = [{"type": "eq", "fun": lambda g: np.sum(g) - total}]
    if d > 1:
        cons.append({"type": "ineq", "fun": lambda g: g[:-1] - g[1:]})
        cons.append({"type": "ineq", "fun": lambda g: np.cumsum(g)[:-1] - A[:-1]})
    res = minimize(
        lambda g: eval_vector_safe(F, g),
        gamma,
        method="SLSQP",
        bounds=[(0.0, None)] * d,
        constraints=cons,
        options={"ftol": 1e-14, "maxiter": 500},
    )
    g = np.sort(np.maximum(res.x, 0.0))[::-1]
    g *= total / g.sum() if g.sum() > 0 else 1.0
    return g


def eval_vector_safe(F, g):
    val = F(g)
    return val if np.isfinite(val) else 1e300


def brute_force_min(pd, f: PotentialSpec, budget: int = 2000, seed: int = 42, polish: bool = True) -> OracleResult:
    """Minimize ``F(lam + gamma)`` over admissible ``gamma`` by search.

    Samples ``budget`` admissible points (always including the minimal one),
    refines the best few with pairwise mass transfers whose step halves down
    to 1e-7 of the total, and finally polishes with a local constrained solve.
    The value is an upper bound on the true minimum.
    """
    lam = pd.lam
    d = lam.size
    a = pd.a
    F = _objective(f, lam)
    gammas = sample_gamma(GammaSampler(a, d, seed, max(1, budget + 1)))
    values = np.array([F(g) for g in gammas])
    order = np.lexsort((np.arange(values.size), values))
    distinct = np.unique(values[np.isfinite(values)])
    gap = float(distinct[1] - distinct[0]) if distinct.size > 1 else float("inf")
    if budget <= 0:
        g = gammas[order[0]]
        return OracleResult(g, float(values[order[0]]), lam + g, gap, len(gammas))

    total = float(a.sum())
    starts = [gammas[i] for i in order[: min(4, order.size)]]

    def refine(g):
        g, _ = _pair_descent(F, a, g.copy(), 0.1 * total / d, 1e-7 * max(1.0, total))
        if polish:
            p = _polish(F, a, g)
            if gamma_members(a, p)[0] and F(p) <= F(g):
                g = p
        return g, F(g)

    workers = min(thread_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(refine, starts))
    else:
        results = [refine(g) for g in starts]
    # reduction in candidate order keeps the answer independent of scheduling
    best_g, best_v = min(results, key=lambda gv: gv[1])
    return OracleResult(best_g, float(best_v), lam + best_g, gap, len(gammas))


def majorization_violations(nu_desc, lam, gammas, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Indexes of sampled ``gamma`` with ``nu`` not majorized by ``(lam_asc + gamma_desc)``."""
    nu = np.sort(np.asarray(nu_desc, dtype=float))[::-1]
    lam = np.sort(np.asarray(lam, dtype=float))
    G = np.sort(np.atleast_2d(np.asarray(gammas, dtype=float)), axis=1)[:, ::-1]
    X = np.sort(lam[None, :] + G, axis=1)[:, ::-1]
    atol = tol * max(1.0, float(nu.sum()))
    ok = np.all(np.cumsum(nu) <= np.cumsum(X, axis=1) + atol, axis=1)
    ok &= np.abs(X.sum(axis=1) - nu.sum()) <= atol
    return np.nonzero(~ok)[0]


def check_majorization_min(nu, pd, samples: int = 1000, seed: int = 42, tol: float = DEFAULT_TOL) -> bool:
    """Spot check that ``nu`` is majorized by every sampled admissible spectrum."""
    flat = np.asarray(nu.flatten(), dtype=float)
    gammas = sample_gamma(GammaSampler(pd.a, pd.d, seed, samples))
    return majorization_violations(flat, pd.lam, np.array(gammas), tol).size == 0


@dataclass
class StructureReport:
    """Outcome of :func:`audit_structure`.

    ``J`` lists groups of added vectors by 1-based position in
    descending-norm order (``row_order`` maps positions to input rows);
    ``K`` lists groups of eigenvalue indexes of the initial operator.
    """

    constants: List[float]
    J: List[List[int]]
    K: List[List[int]]
    row_order: List[int]
    residuals: List[float]
    cluster_margin: float
    norm_gap_margin: float
    ranks: List[int]
    commutator: float
    partition_ok: bool
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]


def _clusters(values, rel=1e-6):
    """Group descending values whose consecutive gaps are within ``rel``."""
    order = np.argsort(-values, kind="stable")
    groups = []
    for idx in order:
        v = values[idx]
        if groups and values[groups[-1][-1]] - v <= rel * max(1.0, abs(values[groups[-1][-1]])):
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def audit_structure(F0, G, tol: float = 1e-8, dim=None) -> StructureReport:
    """Check the geometry that every optimal completion ``(F0, G)`` must have.

    Six checks, reported by name:

    ``eigenvectors``
        each added vector is an eigenvector of the completed frame operator;
    ``decreasing_constants``
        the eigenvalue groups are tight and strictly separated;
    ``consecutive_blocks``
        sorted by decreasing norm, the groups appear in decreasing eigenvalue;
    ``norm_gaps``
        norms across groups differ by at least the eigenvalue gap;
    ``independence``
        every group but the last is linearly independent;
    ``commute``
        the frame operators of ``F0`` and ``G`` commute.

    Tolerances scale with ``max(1, max |S_F|)``.
    """
    G = as_sequence(G, dim)
    d = G.shape[1]
    F0 = as_sequence(F0, d)
    S0 = frame_operator(F0, d)
    SG = frame_operator(G)
    SF = S0 + SG
    scale = max(1.0, float(np.max(np.abs(SF))))
    atol = tol * scale

    norms2 = np.sum(np.abs(G) ** 2, axis=1)
    row_order = [int(i) for i in np.argsort(-norms2, kind="stable")]
    Gs = G[row_order]
    a = norms2[row_order]

    image = Gs @ SF.T
    rho = np.real(np.sum(image * Gs.conj(), axis=1)) / a
    resid = np.linalg.norm(image - rho[:, None] * Gs, axis=1) / np.sqrt(a)
    groups = _clusters(rho)
    consts = [float(np.mean(rho[g])) for g in groups]
    spreads = [float(np.ptp(rho[g])) for g in groups]
    gaps = [consts[i] - consts[i + 1] for i in range(len(consts) - 1)]
    cluster_margin = float(min(gaps)) if gaps else float("inf")

    label = np.empty(len(rho), dtype=int)
    for j, g in enumerate(groups):
        label[g] = j
    J = [sorted(int(i) + 1 for i in g) for g in groups]

    norm_margin = float("inf")
    for i in range(len(groups)):
        for r in range(i + 1, len(groups)):
            slack = a[groups[i]].min() - a[groups[r]].max() - (consts[i] - consts[r])
            norm_margin = min(norm_margin, float(slack))

    ranks = []
    for g in groups:
        block = Gs[g]
        sv = np.linalg.svd(block, compute_uv=False)
        ranks.append(int(np.sum(sv > 1e-8 * max(1.0, sv[0]))))

    commutator = float(np.max(np.abs(S0 @ SG - SG @ S0)))

    lam = eigh_ascending(S0).values
    mu = eigh_ascending(SG).values[::-1]
    mu = np.where(mu > atol, mu, 0.0)
    nu = lam + mu
    s_F = int(np.sum(mu > 0))
    K = []
    for c in consts:
        K.append([i + 1 for i in range(s_F) if abs(nu[i] - c) <= 1e-6 * max(1.0, abs(c))])
    covered = sorted(i for block in K for i in block)
    partition_ok = covered == list(range(1, s_F + 1))

    checks = {
        "eigenvectors": bool(np.all(resid <= atol)),
        "decreasing_constants": all(s <= atol for s in spreads) and all(g > atol for g in gaps),
        "consecutive_blocks": bool(np.all(np.diff(label) >= 0)),
        "norm_gaps": norm_margin >= -atol,
        "independence": all(rk == len(g) for rk, g in zip(ranks[:-1], groups[:-1])),
        "commute": commutator <= atol,
    }
    return StructureReport(
        constants=consts,
        J=J,
        K=K,
        row_order=row_order,
        residuals=[float(x) for x in resid],
        cluster_margin=cluster_margin,
        norm_gap_margin=norm_margin,
        ranks=ranks,
        commutator=commutator,
        partition_ok=partition_ok,
        checks=checks,
    )
