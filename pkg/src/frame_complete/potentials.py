"""Convex potentials of frames, evaluated through the spectrum of S_F."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .spectral import eigh_ascending, frame_operator

__all__ = ["PotentialSpec", "parse_potential", "eval_vector", "eval_frame", "check_convexity"]

KINDS = ("frame_potential", "mse_extended", "exponential", "power", "custom")


@dataclass(frozen=True)
class PotentialSpec:
    """A convex function f on [0, inf) inducing P_f(F) = tr f(S_F).

    ``power`` uses ``exponent`` (> 1); ``custom`` uses ``func``, which must be
    vectorized over numpy arrays and is trusted to be convex.
    """

    kind: str
    exponent: Optional[float] = None
    func: Optional[Callable] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "power" and (self.exponent is None or not self.exponent > 1):
            raise ValueError("power potential needs an exponent p > 1")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom potential needs a function")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "power":
            return f"pow:{self.exponent:g}"
        return {"frame_potential": "fp", "mse_extended": "mse", "exponential": "exp"}.get(
            self.kind, "custom"
        )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "frame_potential":
            return x**2
        if self.kind == "mse_extended":
            with np.errstate(divide="ignore"):
                return np.where(x > 0, 1.0 / np.where(x > 0, x, 1.0), np.inf)
        if self.kind == "exponential":
            return np.exp(x)
        if self.kind == "power":
            return x**self.exponent
        return np.asarray(self.func(x), dtype=float)


def parse_potential(name: str) -> PotentialSpec:
    """Build a potential from its CLI name: ``fp``, ``mse``, ``exp`` or ``pow:<p>``."""
    key = name.strip().lower()
    if key == "fp":
        return PotentialSpec("frame_potential")
    if key == "mse":
        return PotentialSpec("mse_extended")
    if key == "exp":
        return PotentialSpec("exponential")
    if key.startswith("pow:"):
        try:
            p = float(key[4:])
        except ValueError:
            raise ValueError(f"bad exponent in potential name {name!r}") from None
        return PotentialSpec("power", exponent=p)
    raise ValueError(f"unknown potential {name!r} (expected fp, mse, exp or pow:<p>)")


def eval_vector(f: PotentialSpec, gamma) -> float:
    """Sum of f over the entries of ``gamma``; may be ``inf`` for the MSE."""
    g = np.asarray(gamma, dtype=float).reshape(-1)
    if np.any(g < 0):
        raise ValueError("potential arguments must be nonnegative")
    return float(np.sum(f(g)))


def eval_frame(f: PotentialSpec, F, dim=None) -> float:
    lam = eigh_ascending(frame_operator(F, dim)).values
    return eval_vector(f, lam)


def check_convexity(f: PotentialSpec, upper: float = 10.0, samples: int = 200, seed: int = 0) -> bool:
    """Midpoint-convexity spot check on random pairs in [0, upper]."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, upper, samples)
    y = rng.uniform(0, upper, samples)
    fx, fy, fm = f(x), f(y), f((x + y) / 2)
    lhs = fm
    rhs = (fx + fy) / 2
    finite = np.isfinite(rhs)
    return bool(np.all(lhs[finite] <= rhs[finite] + 1e-9 * (1 + np.abs(rhs[finite]))))
