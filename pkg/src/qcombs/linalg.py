"""Dense linear algebra helpers for multi-wire operators.

Everything here works on plain numpy arrays.  Multi-wire operators are
square matrices whose rows and columns are understood as tensor products
of wire indices, leftmost wire slowest (big-endian), matching np.kron.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices (left factor slowest)."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def max_entangled(d: int) -> np.ndarray:
    """Unnormalized maximally entangled vector sum_i |ii> on a d*d space."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return v


def partial_trace(m: np.ndarray, dims: list[int] | tuple[int, ...], keep) -> np.ndarray:
    """Trace out all wires except ``keep``.

    Parameters
    ----------
    m : square matrix on the tensor product of wires with sizes ``dims``.
    dims : wire dimensions, leftmost slowest.
    keep : iterable of wire indices to retain, in their original order.

    Returns the reduced matrix on the kept wires, ordered as in ``dims``.
    """
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices out of range for {n} wires")
    t = m.reshape(dims + dims)
    # Trace the discarded wires starting from the rightmost so that the
    # axis numbers of the wires still to process stay valid.
    traced = 0
    for w in reversed(range(n)):
        if w in keep:
            continue
        t = np.trace(t, axis1=w, axis2=w + n - traced)
        traced += 1
    d_keep = prod(dims[k] for k in keep)
    return t.reshape(d_keep, d_keep)


def permute_wires(m: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder the wires of a square operator.

    ``perm`` gives the new order of the old wires: wire ``i`` of the result
    is wire ``perm[i]`` of the input.
    """
    dims = list(dims)
    perm = list(perm)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of range({n})")
    t = m.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    d = prod(dims)
    return t.reshape(d, d)


def permutation_matrix(dims, perm) -> np.ndarray:
    """Unitary sending |j_0 .. j_{n-1}> to |j_{perm[0]} .. j_{perm[n-1]}>.

    Conjugating by this matrix agrees with :func:`permute_wires`.
    """
    dims = list(dims)
    perm = list(perm)
    n = len(dims)
    d = prod(dims)
    t = np.eye(d).reshape(dims + dims)
    return t.transpose(perm + list(range(n, 2 * n))).reshape(d, d)


def embed(op: np.ndarray, dims, targets) -> np.ndarray:
    """Extend ``op`` acting on the wires ``targets`` by identity elsewhere.

    ``targets`` lists the wires op acts on, in the order op expects them.
    The result carries the wires in their original order.
    """
    dims = list(dims)
    targets = list(targets)
    rest = [i for i in range(len(dims)) if i not in targets]
    big = tensor(op, np.eye(prod(dims[i] for i in rest) if rest else 1))
    cur = targets + rest
    cur_dims = [dims[i] for i in cur]
    perm = [cur.index(i) for i in range(len(dims))]
    return permute_wires(big, cur_dims, perm)


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(np.linalg.norm(m), 1.0)
    return np.linalg.norm(m - m.conj().T) <= tol * scale


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive semidefiniteness check."""

    is_psd: bool
    min_eigenvalue: float


def psd_check(m: np.ndarray, tol: float = 1e-9) -> PsdReport:
    """Check positivity of a Hermitian matrix up to a trace-relative slack.

    Eigenvalues are allowed to dip below zero by ``tol`` times the trace
    scale before the matrix is declared non-positive.
    """
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    lo = float(eigs[0])
    scale = max(abs(float(np.trace(m).real)), 1.0)
    return PsdReport(is_psd=lo >= -tol * scale, min_eigenvalue=lo)


def trace_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False).sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the difference."""
    return 0.5 * trace_norm(a - b)


def choi_to_superop(choi: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Reshuffle a Choi matrix on (out, in) wires into a superoperator.

    The superoperator S acts on row-major vectorized matrices,
    vec(E(rho)) = S vec(rho).
    """
    t = choi.reshape(d_out, d_in, d_out, d_in)
    return t.transpose(0, 2, 1, 3).reshape(d_out * d_out, d_in * d_in)


def superop_to_choi(s: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Inverse reshuffle of :func:`choi_to_superop`."""
    t = s.reshape(d_out, d_out, d_in, d_in)
    return t.transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)
