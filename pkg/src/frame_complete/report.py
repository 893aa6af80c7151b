"""JSON documents read and written by the command line tool.

One schema serves every subcommand.  Input keys (all optional):
``lambda``, ``norms``, ``vectors``, ``basis``, ``dim``, ``potential``,
``seed``, ``budget``, ``tol``.  Vectors are lists of rows; each entry is a
real number or an ``[re, im]`` pair.
"""

import csv
import io
import json
import math

import numpy as np

from .solver import BlockSpectrum

__all__ = [
    "round_sig",
    "encode_vectors",
    "decode_vectors",
    "spectrum_report",
    "spectrum_from_report",
    "dumps",
    "vectors_to_csv",
    "text_report",
]

JSON_DIGITS = 12
TEXT_DIGITS = 6


def round_sig(x, digits=JSON_DIGITS):
    """Round to ``digits`` significant digits; non-finite values become strings."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(f"{x:.{digits}g}")


def _num_list(v, digits=JSON_DIGITS):
    return [round_sig(x, digits) for x in np.asarray(v, dtype=float).reshape(-1)]


def encode_vectors(V, digits=JSON_DIGITS):
    V = np.atleast_2d(np.asarray(V))
    if np.iscomplexobj(V) and np.any(V.imag):
        return [[[round_sig(z.real, digits), round_sig(z.imag, digits)] for z in row] for row in V]
    return [_num_list(np.real(row), digits) for row in V]


def decode_vectors(rows, dim=None):
    """Parse a list of vectors; raises ``ValueError`` on ragged or malformed input."""
    if rows is None:
        return None
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)):
            raise ValueError(f"vector {i} is not a list")
        entries = []
        for x in row:
            if isinstance(x, (list, tuple)):
                if len(x) != 2:
                    raise ValueError(f"vector {i}: complex entries must be [re, im] pairs")
                entries.append(complex(float(x[0]), float(x[1])))
            else:
                entries.append(complex(float(x), 0.0))
        parsed.append(entries)
    lengths = {len(r) for r in parsed}
    if len(lengths) > 1:
        raise ValueError(f"vectors have mismatched dimensions {sorted(lengths)}")
    if not parsed:
        if dim is None:
            raise ValueError("empty vector list needs a dimension")
        return np.zeros((0, int(dim)))
    if dim is not None and lengths != {int(dim)}:
        raise ValueError(f"vectors have dimension {lengths.pop()}, expected {dim}")
    arr = np.array(parsed, dtype=complex)
    return arr.real.copy() if not np.any(arr.imag) else arr


def spectrum_report(pd, nu: BlockSpectrum, seed=None) -> dict:
    flat = nu.flatten()
    doc = {
        "lambda": _num_list(pd.lam),
        "norms": _num_list(pd.a),
        "norms_input": _num_list(pd.norms_input),
        "d": pd.d,
        "k": pd.k,
        "m": pd.m,
        "t": round_sig(pd.t),
        "tol": pd.tol,
        "feasible": nu.feasible,
        "s_star": nu.s_star,
        "p": nu.p,
        "block_ends": [int(e) for e in nu.block_ends],
        "constants": _num_list(nu.constants),
        "tail": _num_list(nu.tail),
        "nu": _num_list(flat),
        "nu_ascending": _num_list(np.sort(flat)),
        "nu_descending": _num_list(np.sort(flat)[::-1]),
        "mu": _num_list(nu.mu()),
        "diagnostics": list(nu.diagnostics),
    }
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def spectrum_from_report(doc) -> BlockSpectrum:
    """Rebuild the block spectrum stored in a report."""
    return BlockSpectrum(
        block_ends=[int(e) for e in doc["block_ends"]],
        constants=[float(c) for c in doc["constants"]],
        tail=np.asarray(doc["tail"], dtype=float),
        lam=np.asarray(doc["lambda"], dtype=float),
        s_star=int(doc.get("s_star", 0)),
        diagnostics=list(doc.get("diagnostics", [])),
    )


def _plain(x):
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return round_sig(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, default=_plain)


def vectors_to_csv(V) -> str:
    V = np.atleast_2d(np.asarray(V))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    is_complex = np.iscomplexobj(V) and np.any(V.imag)
    for row in V:
        if is_complex:
            writer.writerow([f"{z.real:.12g}{z.imag:+.12g}j" for z in row])
        else:
            writer.writerow([f"{x:.12g}" for x in np.real(row)])
    return buf.getvalue()


def _fmt(v):
    return "(" + ", ".join(f"{x:.{TEXT_DIGITS}g}" for x in np.asarray(v, dtype=float)) + ")"


def text_report(doc) -> str:
    lines = [
        f"d = {doc['d']}, k = {doc['k']}, t = {doc['t']:.{TEXT_DIGITS}g}",
        f"lambda (ascending)   {_fmt(doc['lambda'])}",
        f"norms (descending)   {_fmt(doc['norms'])}",
        f"feasible: {'yes' if doc['feasible'] else 'no'}   s* = {doc['s_star']}   p = {doc['p']}",
    ]
    start = 0
    for end, c in zip(doc["block_ends"], doc["constants"]):
        lines.append(f"  block {start + 1}..{end}: c = {c:.{TEXT_DIGITS}g}")
        start = end
    if doc["tail"]:
        lines.append(f"  untouched tail       {_fmt(doc['tail'])}")
    lines += [
        f"nu (block order)     {_fmt(doc['nu'])}",
        f"nu (descending)      {_fmt(doc['nu_descending'])}",
        f"mu                   {_fmt(doc['mu'])}",
    ]
    for note in doc.get("diagnostics", []):
        lines.append(f"note: {note}")
    if "seed" in doc:
        lines.append(f"seed: {doc['seed']}")
    return "\n".join(lines)
