"""Majorization-optimal completions of finite frames with prescribed norms.

Given a sequence ``F0`` in C^d and squared norms ``a``, find vectors ``G``
with those norms so that the spectrum of ``S_{F0} + S_G`` is majorized by
every other achievable spectrum.  That spectrum minimizes every convex
potential ``tr f(S_F)`` at once.

>>> from frame_complete import ProblemData, optimal_spectrum
>>> optimal_spectrum(ProblemData([0, 0, 10], [6, 1, 1])).descending().tolist()
[10.0, 6.0, 2.0]
"""

from .majorization import majorizes, strictly_majorizes, submajorizes
from .oracle import audit_structure, brute_force_min, check_majorization_min
from .potentials import PotentialSpec, eval_frame, eval_vector, parse_potential
from .solver import (
    BlockSpectrum,
    ProblemData,
    SolverInconsistency,
    is_feasible,
    min_feasible_index,
    optimal_spectrum,
)
from .spectral import ConvergenceError, eigh_ascending, frame_operator, gram
from .synthesis import complete, design_sequence, schur_horn

__version__ = "0.1.0"

__all__ = [
    "BlockSpectrum",
    "ConvergenceError",
    "PotentialSpec",
    "ProblemData",
    "SolverInconsistency",
    "audit_structure",
    "brute_force_min",
    "check_majorization_min",
    "complete",
    "design_sequence",
    "eigh_ascending",
    "eval_frame",
    "eval_vector",
    "frame_operator",
    "gram",
    "is_feasible",
    "majorizes",
    "min_feasible_index",
    "optimal_spectrum",
    "parse_potential",
    "schur_horn",
    "strictly_majorizes",
    "submajorizes",
]
