"""Optimal spectra of frame completions with prescribed norms.

Given the ascending spectrum ``lam`` of the frame operator of an initial
sequence and the descending squared norms ``a`` of the vectors to add, the
solver returns the spectrum that every optimal completion shares, for every
strictly convex potential.  The answer is built from two kinds of running
averages over prefix sums:

* final averages ``Q[j, r] = (sum(a[j:]) + sum(lam[j:r])) / (r - j)`` which
  produce the spectrum of the feasible (single block) case;
* initial averages ``P[j, r] = mean(lam[i] + a[i] for i in j..r)`` which
  produce the leading blocks when the full pair is not feasible.

Indexes in the public functions are 1-based to match the usual statement of
the block structure; arrays are 0-based internally.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import List

import numpy as np

from .majorization import DEFAULT_TOL, as_vector, majorizes

__all__ = [
    "SolverInconsistency",
    "ProblemData",
    "FeasibleSpectrum",
    "BlockSpectrum",
    "final_average",
    "initial_average",
    "feasible_case_spectrum",
    "feasible_spectrum_general",
    "mu_of",
    "is_feasible",
    "is_feasible_index",
    "min_feasible_index",
    "optimal_spectrum",
]


TIE_TOL = 1e-12
# indexes probed one at a time before switching to batched scans
SCALAR_PROBES = 4


class SolverInconsistency(RuntimeError):
    """An invariant that holds in exact arithmetic failed numerically."""


@dataclass(frozen=True)
class ProblemData:
    """Initial data of a completion problem.

    ``lam`` is sorted ascending and ``norms`` descending on construction; the
    arguments as given are kept in ``lam_input`` and ``norms_input``.
    ``tol`` is relative: comparisons use ``atol = tol * max(1, t)``.
    """

    lam_input: np.ndarray
    norms_input: np.ndarray
    tol: float = DEFAULT_TOL
    lam: np.ndarray = field(init=False, repr=False)
    a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = as_vector(self.lam_input)
        a = as_vector(self.norms_input)
        if np.any(lam < 0):
            raise ValueError("eigenvalues of the initial frame operator must be nonnegative")
        if np.any(a <= 0):
            raise ValueError("prescribed norms must be strictly positive")
        zeros = int(np.sum(lam == 0))
        if zeros > a.size:
            raise ValueError(
                f"{a.size} prescribed norms cannot complete a sequence whose frame "
                f"operator has {zeros} zero eigenvalues (need d - rank <= k)"
            )
        object.__setattr__(self, "lam_input", lam)
        object.__setattr__(self, "norms_input", a)
        object.__setattr__(self, "lam", np.sort(lam))
        object.__setattr__(self, "a", np.sort(a)[::-1].copy())

    @classmethod
    def from_frame(cls, F0, norms, dim=None, tol=DEFAULT_TOL):
        from .spectral import eigh_ascending, frame_operator

        lam = eigh_ascending(frame_operator(F0, dim)).values
        return cls(lam, norms, tol)

    @property
    def d(self) -> int:
        return self.lam.size

    @property
    def k(self) -> int:
        return self.a.size

    @property
    def m(self) -> int:
        return self.d - self.k

    @cached_property
    def t(self) -> float:
        return float(self.lam.sum() + self.a.sum())

    @cached_property
    def h(self) -> np.ndarray:
        n = min(self.d, self.k)
        return self.lam[:n] + self.a[:n]

    @property
    def atol(self) -> float:
        return self.tol * max(1.0, self.t)

    @property
    def tie_tol(self) -> float:
        # rounding level of the prefix sums; coarser tie detection picks wrong indexes
        return TIE_TOL * max(1.0, self.t)

    def truncated(self, s: int) -> "ProblemData":
        """The pair with the first ``s`` entries of both vectors removed."""
        return ProblemData(self.lam[s:], self.a[s:], self.tol)

    def head(self) -> "ProblemData":
        """The pair restricted to the first ``k`` eigenvalues (when d > k)."""
        return ProblemData(self.lam[: self.k], self.a, self.tol)


@dataclass(frozen=True)
class FeasibleSpectrum:
    """Spectrum of the feasible case: ``(c, ..., c, lam[s], ..., lam[d-1])``.

    ``cut_index`` is the number of leading entries raised to ``constant``; it
    equals ``d`` in the uniform case.
    """

    cut_index: int
    constant: float
    result: np.ndarray

    @property
    def uniform(self) -> bool:
        return self.cut_index == self.result.size


@dataclass(frozen=True)
class BlockSpectrum:
    """Optimal spectrum as constant blocks followed by untouched eigenvalues.

    ``block_ends`` holds the 1-based ends ``s_1 < ... < s_p`` and
    ``constants`` the values ``c_1 > ... > c_p``.  ``flatten()`` lists the
    spectrum in the same index order as ``lam``, so ``flatten() - lam`` is the
    spectrum of the added vectors' frame operator.
    """

    block_ends: List[int]
    constants: List[float]
    tail: np.ndarray
    lam: np.ndarray
    s_star: int = 0
    diagnostics: List[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.constants)

    @property
    def feasible(self) -> bool:
        return self.p == 1

    def flatten(self) -> np.ndarray:
        parts, start = [], 0
        for end, c in zip(self.block_ends, self.constants):
            parts.append(np.full(end - start, float(c)))
            start = end
        parts.append(np.asarray(self.tail, dtype=float))
        return np.concatenate(parts)

    def descending(self) -> np.ndarray:
        return np.sort(self.flatten())[::-1]

    def ascending(self) -> np.ndarray:
        return np.sort(self.flatten())

    def mu(self) -> np.ndarray:
        mu = self.flatten() - self.lam
        # entries that should vanish come out as rounding noise
        mu[np.abs(mu) <= 1e-12 * max(1.0, float(np.max(np.abs(self.lam), initial=0.0)))] = 0.0
        return mu

    def blocks(self):
        """``[(start, end, constant), ...]`` with 1-based inclusive index ranges."""
        out, start = [], 0
        for end, c in zip(self.block_ends, self.constants):
            out.append((start + 1, end, c))
            start = end
        return out


def _prefix(x):
    out = np.zeros(x.size + 1)
    x.cumsum(out=out[1:])
    return out


def _check_square_case(pd):
    if pd.k < pd.d:
        raise ValueError(f"requires k >= d (got d={pd.d}, k={pd.k})")


def final_average(pd: ProblemData, j: int, r: int) -> float:
    """Final average Q_{j,r} = (a_{j+1} + ... + a_k + lam_{j+1} + ... + lam_r) / (r - j)."""
    _check_square_case(pd)
    if not 0 <= j < r <= pd.d:
        raise IndexError(f"need 0 <= j < r <= d, got j={j}, r={r}, d={pd.d}")
    return float((pd.a[j:].sum() + pd.lam[j:r].sum()) / (r - j))


def initial_average(pd: ProblemData, j: int, r: int) -> float:
    """Initial average P_{j,r}: mean of lam_i + a_i over j <= i <= r (1-based)."""
    n = min(pd.d, pd.k)
    if not 1 <= j <= r <= n:
        raise IndexError(f"need 1 <= j <= r <= {n}, got j={j}, r={r}")
    return float(pd.h[j - 1 : r].mean())


class _Sums:
    """Prefix sums shared by every truncation of one problem (k >= d).

    The methods take an array of truncation indexes ``ss`` and evaluate all of
    them at once.
    """

    def __init__(self, pd):
        self.pd = pd
        self.L = _prefix(pd.lam)
        self.A = _prefix(pd.a)
        self.atol = pd.atol
        self.tie_tol = pd.tie_tol
        self._cuts = {}

    @cached_property
    def H(self):
        return _prefix(self.pd.h)

    def feasible_cuts(self, ss):
        """(r, c) of the feasible spectrum of each pair truncated at ``s`` in ``ss``.

        ``r`` is the absolute (1-based) index of the last raised entry, ``c`` the
        constant.  The uniform branch returns ``r = d``.
        """
        pd, L, A = self.pd, self.L, self.A
        d, k, lam = pd.d, pd.k, pd.lam
        ss = np.asarray(ss, dtype=int)
        a_rest = A[k] - A[ss]
        c_uniform = (L[d] - L[ss] + a_rest) / (d - ss)
        uniform = c_uniform >= lam[d - 1]
        r_out = np.full(ss.size, d)
        c_out = c_uniform.copy()
        rows = np.nonzero(~uniform)[0]
        if rows.size:
            sr = ss[rows]
            R = np.arange(sr.min() + 1, d)
            valid = R[None, :] > sr[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                Q = (a_rest[rows, None] + L[R][None, :] - L[sr][:, None]) / (R[None, :] - sr[:, None])
            Q = np.where(valid, Q, np.inf)
            qmin = Q.min(axis=1)
            ties = Q <= (qmin + self.tie_tol)[:, None]
            last = ties.shape[1] - 1 - np.argmax(ties[:, ::-1], axis=1)
            r_star = R[last]
            c = Q[np.arange(rows.size), last]
            bad = ~((lam[r_star - 1] <= c + self.atol) & (c < lam[r_star] + self.atol))
            if np.any(bad):
                i = int(np.nonzero(bad)[0][0])
                j = int(r_star[i])
                raise SolverInconsistency(
                    f"bracketing failed at s={j}: lam_s={lam[j - 1]!r}, "
                    f"Q_s={c[i]!r}, lam_s+1={lam[j]!r}"
                )
            r_out[rows] = r_star
            c_out[rows] = c
        return r_out, c_out

    def feasible(self, ss):
        """Whether ``a[s:]`` is majorized by the mu of each truncated pair."""
        pd, L, A = self.pd, self.L, self.A
        ss = np.asarray(ss, dtype=int)
        r, c = self.feasible_cuts(ss)
        self._cuts.update(zip(ss.tolist(), zip(r.tolist(), c.tolist())))
        J = np.arange(ss.min() + 1, pd.k + 1)[None, :]
        s_, r_, c_ = ss[:, None], r[:, None], c[:, None]
        a_cum = A[J] - A[s_]
        upto = np.minimum(J, r_)
        mu_cum = (upto - s_) * c_ - (L[upto] - L[s_])
        ok = (a_cum <= mu_cum + self.atol) | (J <= s_)
        return np.all(ok, axis=1)

    # single-index versions: same formulas on 1-d slices, far fewer numpy calls

    def cut(self, s):
        if s in self._cuts:
            return self._cuts[s]
        pd, L = self.pd, self.L
        d, lam = pd.d, pd.lam
        a_rest = float(self.A[pd.k] - self.A[s])
        c = (float(L[d] - L[s]) + a_rest) / (d - s)
        r = d
        if c < lam[d - 1]:
            Q = (a_rest + L[s + 1 : d] - L[s]) / np.arange(1, d - s)
            qmin = Q.min()
            last = int(np.flatnonzero(Q <= qmin + self.tie_tol)[-1])
            r, c = s + 1 + last, float(Q[last])
            if not (lam[r - 1] <= c + self.atol and c < lam[r] + self.atol):
                raise SolverInconsistency(
                    f"bracketing failed at s={r}: lam_s={lam[r - 1]!r}, Q_s={c!r}, lam_s+1={lam[r]!r}"
                )
        self._cuts[s] = (r, c)
        return r, c

    def index_feasible(self, s):
        pd, L, A = self.pd, self.L, self.A
        r, c = self.cut(s)
        J = np.arange(s + 1, pd.k + 1)
        upto = np.minimum(J, r)
        mu_cum = (upto - s) * c - (L[upto] - L[s])
        return bool((A[s + 1 :] - A[s] <= mu_cum + self.atol).all())


def feasible_case_spectrum(pd: ProblemData) -> FeasibleSpectrum:
    """Spectrum of the feasible case for ``k >= d``.

    Either the uniform vector ``(t/d) 1_d`` when ``t/d >= max(lam)``, or
    ``(Q_s 1_s, lam_{s+1}, ..., lam_d)`` with ``s`` the largest minimizer of
    the final averages ``Q_{0,w}``.
    """
    _check_square_case(pd)
    r, c = _Sums(pd).cut(0)
    result = np.concatenate([np.full(r, c), pd.lam[r:]])
    return FeasibleSpectrum(cut_index=r, constant=float(c), result=result)


def feasible_spectrum_general(pd: ProblemData) -> np.ndarray:
    """Feasible-case spectrum for any ``k``; when ``d > k`` the last ``d - k``
    eigenvalues are carried over unchanged."""
    if pd.k >= pd.d:
        return feasible_case_spectrum(pd).result
    head = feasible_case_spectrum(pd.head()).result
    return np.concatenate([head, pd.lam[pd.k :]])


def mu_of(pd: ProblemData) -> np.ndarray:
    mu = feasible_spectrum_general(pd) - pd.lam
    return np.maximum(mu, 0.0)


def is_feasible(pd: ProblemData) -> bool:
    """True iff the norms are majorized by ``mu_of(pd)``."""
    if pd.k >= pd.d:
        return _Sums(pd).index_feasible(0)
    return majorizes(pd.a, mu_of(pd), pd.atol)


def is_feasible_index(pd: ProblemData, s: int) -> bool:
    """Feasibility of the pair truncated after its first ``s`` entries."""
    _check_square_case(pd)
    if not 0 <= s <= pd.d - 1:
        raise IndexError(f"need 0 <= s <= d - 1, got s={s}, d={pd.d}")
    return _Sums(pd).index_feasible(s)


def _min_feasible(sums: _Sums) -> int:
    # growing chunks keep the common small-s* case cheap
    d = sums.pd.d
    for s in range(min(d, SCALAR_PROBES)):
        if sums.index_feasible(s):
            return s
    start, size = SCALAR_PROBES, SCALAR_PROBES
    while start < d:
        ss = np.arange(start, min(d, start + size))
        hits = np.nonzero(sums.feasible(ss))[0]
        if hits.size:
            return int(ss[hits[0]])
        start += size
        size = min(2 * size, 64)
    raise SolverInconsistency("no feasible index found, even the last one")


def min_feasible_index(pd: ProblemData) -> int:
    """Least ``s`` in ``0..d-1`` whose truncated pair is feasible."""
    _check_square_case(pd)
    return _min_feasible(_Sums(pd))


def _initial_blocks(H, tie):
    """Block ends of the leading blocks, given prefix sums ``H[0..s*]``.

    Starting after the previous end, each block ends at the largest index
    maximizing the running average of ``h``.  Those ends are the vertices of
    the least concave majorant of the points ``(i, H[i])``, which a single
    monotone-chain pass finds; collinear points are dropped so ties resolve to
    the largest index.
    """
    hull = [0]
    for i in range(1, len(H)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (H[b] - H[a]) / (b - a) > (H[i] - H[b]) / (i - b) + tie:
                break
            hull.pop()
        hull.append(i)
    return hull[1:]


def _solve_square(pd: ProblemData) -> BlockSpectrum:
    sums = _Sums(pd)
    atol, tie = sums.atol, sums.tie_tol
    s_star = _min_feasible(sums)
    ends, consts = [], []
    if s_star:
        H = sums.H
        ends = _initial_blocks(H[: s_star + 1], tie)
        consts = [float((H[e] - H[b]) / (e - b)) for b, e in zip([0] + ends[:-1], ends)]
    notes = []
    r_last, c_last = sums.cut(s_star)
    ends.append(int(r_last))
    consts.append(float(c_last))
    for i in range(1, len(consts)):
        gap = consts[i - 1] - consts[i]
        if gap <= tie:
            raise SolverInconsistency(
                f"block constants not strictly decreasing: c_{i}={consts[i - 1]!r}, "
                f"c_{i + 1}={consts[i]!r}"
            )
        if gap <= 10 * atol:
            notes.append(f"block constants c_{i} and c_{i + 1} within 10*tol")
    return BlockSpectrum(
        block_ends=ends,
        constants=consts,
        tail=pd.lam[r_last:].copy(),
        lam=pd.lam.copy(),
        s_star=s_star,
        diagnostics=notes,
    )


def optimal_spectrum(pd: ProblemData) -> BlockSpectrum:
    """The optimal completion spectrum, as blocks (s_j, c_j) plus an untouched tail.

    The result does not depend on the convex potential being minimized, so the
    function takes none.  For ``d > k`` the problem is solved on the first
    ``k`` eigenvalues and the rest are appended to the tail unchanged.
    """
    if pd.k >= pd.d:
        return _solve_square(pd)
    inner = _solve_square(pd.head())
    return BlockSpectrum(
        block_ends=inner.block_ends,
        constants=inner.constants,
        tail=np.concatenate([inner.tail, pd.lam[pd.k :]]),
        lam=pd.lam.copy(),
        s_star=inner.s_star,
        diagnostics=inner.diagnostics,
    )
