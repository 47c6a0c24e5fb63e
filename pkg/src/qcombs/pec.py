"""Quasi-probability cancellation of correlated noise.

The noise comb, viewed as one channel from all slot inputs to all slot
outputs, is inverted in the Pauli transfer representation.  The inverse
is expanded over tensor products of a fixed set of implementable
operations, one factor per tooth, giving quasi-probability weights
alpha.  Running the noisy process with the sampled operations inserted
and reweighting by sign recovers noiseless expectation values at a
sampling cost controlled by gamma = sum |alpha|.

Insertion convention: the operation attached to tooth m acts right
after that tooth fires, so it opens slot m, and the operation of the
final tooth is applied to the output state just before measurement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import log2

import numpy as np

from .channels import (
    Channel,
    apply,
    compose,
    from_kraus,
    tensor_channels,
    to_ptm,
    unitary_channel,
)
from .combs import Comb, apply_comb, choi_channel
from .linalg import partial_trace, permute_wires, psd_check

PTM_CONDITION_CUTOFF = 1e10
SINGULAR_VALUE_FLOOR = 1e-10
ALPHA_CLEAN = 1e-12


class SingularNoiseError(ValueError):
    """The noise channel cannot be inverted reliably."""


@dataclass(frozen=True)
class BasisOpSet:
    """An indexed family of insertable operations with their names."""

    ops: tuple[Channel, ...]
    names: tuple[str, ...]
    n_qubits: int

    def __post_init__(self):
        if len(self.ops) != len(self.names):
            raise ValueError("need one name per operation")
        d = 2**self.n_qubits
        for op in self.ops:
            if op.d_in != d or op.d_out != d:
                raise ValueError("operation dimension does not match n_qubits")

    def __len__(self):
        return len(self.ops)


def _rotation(axis) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    s = n[0] * x + n[1] * y + n[2] * z
    return (np.eye(2) - 1j * s) / np.sqrt(2)


_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "minus": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "plus_i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "minus_i": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def _reset_channel(state: np.ndarray) -> Channel:
    """Discard the input and prepare the given pure state."""
    kraus = [np.outer(state, e) for e in np.eye(2)]
    return from_kraus(kraus)


def _projection_channel(state: np.ndarray) -> Channel:
    """Keep only the component along the given pure state."""
    return from_kraus([np.outer(state, state.conj())], require_tp=False)


@lru_cache(maxsize=None)
def default_basis(n_qubits: int = 1) -> BasisOpSet:
    """The standard sixteen single-qubit operations, tensored for n > 1.

    Ten unitaries (Pauli frame plus quarter turns about the axis and
    face diagonals of the Bloch sphere), three resets and three
    projective selections.  The resets prepare |0>, |+> and |+i>; the
    selections keep |1>, |-> and |-i>.  Mixing state preparations with
    selections is what makes the stacked transfer matrices full rank:
    either family alone leaves the set rank deficient.
    """
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    singles = [
        ("id", unitary_channel(np.eye(2))),
        ("x", unitary_channel(x)),
        ("y", unitary_channel(y)),
        ("z", unitary_channel(z)),
        ("rx", unitary_channel(_rotation([1, 0, 0]))),
        ("ry", unitary_channel(_rotation([0, 1, 0]))),
        ("rz", unitary_channel(_rotation([0, 0, 1]))),
        ("ryz", unitary_channel(_rotation([0, 1, 1]))),
        ("rzx", unitary_channel(_rotation([1, 0, 1]))),
        ("rxy", unitary_channel(_rotation([1, 1, 0]))),
        ("reset_0", _reset_channel(_STATES["0"])),
        ("reset_plus", _reset_channel(_STATES["plus"])),
        ("reset_plus_i", _reset_channel(_STATES["plus_i"])),
        ("select_1", _projection_channel(_STATES["1"])),
        ("select_minus", _projection_channel(_STATES["minus"])),
        ("select_minus_i", _projection_channel(_STATES["minus_i"])),
    ]
    if n_qubits == 1:
        return BasisOpSet(
            ops=tuple(op for _, op in singles),
            names=tuple(name for name, _ in singles),
            n_qubits=1,
        )
    ops, names = [], []
    for combo in itertools.product(range(16), repeat=n_qubits):
        op = singles[combo[0]][1]
        name = singles[combo[0]][0]
        for c in combo[1:]:
            op = tensor_channels(op, singles[c][1])
            name += "," + singles[c][0]
        ops.append(op)
        names.append(name)
    return BasisOpSet(ops=tuple(ops), names=tuple(names), n_qubits=n_qubits)


@dataclass(frozen=True)
class BasisReport:
    rank: int
    condition_number: float


def _ptm_stack(basis: BasisOpSet) -> np.ndarray:
    """Rows are the flattened transfer matrices of the basis operations."""
    return np.array([to_ptm(op).reshape(-1) for op in basis.ops])


def verify_basis_completeness(basis: BasisOpSet) -> BasisReport:
    """Check that the operations are physical and span all maps.

    Every operation must be completely positive and trace
    non-increasing, and the stacked transfer matrices must have full
    rank so that arbitrary inverses can be expanded.  Raises ValueError
    when any of that fails.
    """
    d = 2**basis.n_qubits
    for name, op in zip(basis.names, basis.ops):
        if not psd_check(op.choi).is_psd:
            raise ValueError(f"operation {name} is not completely positive")
        red = partial_trace(op.choi, [d, d], keep=[1])
        excess = psd_check(np.eye(d) - red)
        if not excess.is_psd:
            raise ValueError(f"operation {name} increases the trace")
    w = _ptm_stack(basis)
    svals = np.linalg.svd(w, compute_uv=False)
    rank = int(np.sum(svals > 1e-9 * svals[0]))
    if rank < len(basis):
        raise ValueError(
            f"operation set spans only {rank} of {len(basis)} directions"
        )
    return BasisReport(rank=rank, condition_number=float(svals[0] / svals[-1]))


@dataclass(frozen=True)
class QuasiProbDecomposition:
    """Expansion of an inverse noise map over per-tooth operations.

    ``alpha`` has one axis per tooth, each of length len(basis), and
    sums against tensor products of basis operations to the inverse
    transfer matrix.  ``gamma`` is the total quasi-probability weight.
    """

    alpha: np.ndarray
    gamma: float
    residual: float
    ptm_condition_number: float
    basis: BasisOpSet
    teeth: int
    n_qubits: int


def decompose_inverse(comb: Comb, basis: BasisOpSet | None = None) -> QuasiProbDecomposition:
    """Quasi-probability weights cancelling the comb's channel form.

    The comb is read as one channel from all inputs to all outputs, its
    transfer matrix is inverted, and the inverse is expanded over tensor
    products of basis operations by solving one linear system per tooth
    axis.  Raises SingularNoiseError when the noise is too close to
    singular for the inverse to mean anything.
    """
    n = int(log2(comb.d_sys))
    if 2**n != comb.d_sys:
        raise ValueError("quasi-probability expansion needs qubit systems")
    basis = basis or default_basis(n)
    r = to_ptm(choi_channel(comb))
    svals = np.linalg.svd(r, compute_uv=False)
    if svals[-1] < SINGULAR_VALUE_FLOOR * svals[0]:
        raise SingularNoiseError(
            f"noise transfer matrix is singular (smallest singular value "
            f"{svals[-1]:.3e})"
        )
    cond = float(svals[0] / svals[-1])
    if cond > PTM_CONDITION_CUTOFF:
        raise SingularNoiseError(
            f"noise transfer matrix condition number {cond:.3e} exceeds "
            f"{PTM_CONDITION_CUTOFF:.0e}"
        )
    r_inv = np.linalg.solve(r, np.eye(r.shape[0]))

    q = 4**n
    m_teeth = comb.teeth
    t = r_inv.reshape((q,) * (2 * m_teeth))
    order = [ax for m in range(m_teeth) for ax in (m, m + m_teeth)]
    y = t.transpose(order).reshape((q * q,) * m_teeth)

    w = _ptm_stack(basis)
    alpha = y
    for ax in range(m_teeth):
        moved = np.moveaxis(alpha, ax, 0)
        flat = moved.reshape(len(basis), -1)
        solved = np.linalg.solve(w.T, flat)
        alpha = np.moveaxis(solved.reshape(moved.shape), 0, ax)

    peak = np.abs(alpha).max()
    if peak > 0:
        alpha = np.where(np.abs(alpha) < ALPHA_CLEAN * peak, 0.0, alpha)

    recon = alpha
    for ax in range(m_teeth):
        moved = np.moveaxis(recon, ax, 0)
        flat = moved.reshape(len(basis), -1)
        recon = np.moveaxis((w.T @ flat).reshape(moved.shape), 0, ax)
    residual = float(np.linalg.norm(recon - y))

    return QuasiProbDecomposition(
        alpha=alpha,
        gamma=float(np.abs(alpha).sum()),
        residual=residual,
        ptm_condition_number=cond,
        basis=basis,
        teeth=m_teeth,
        n_qubits=n,
    )


def _insertion_ops(decomp: QuasiProbDecomposition, insertion: str) -> list[Channel]:
    if insertion == "plain":
        return list(decomp.basis.ops)
    if insertion == "transpose":
        d = 2**decomp.n_qubits
        return [
            Channel(choi=permute_wires(op.choi, [d, d], [1, 0]), d_in=d, d_out=d)
            for op in decomp.basis.ops
        ]
    raise ValueError(f"unknown insertion convention {insertion!r}")


def _term_values(
    comb: Comb,
    decomp: QuasiProbDecomposition,
    layers,
    rho: np.ndarray,
    observable: np.ndarray,
    insertion: str,
) -> np.ndarray:
    """Expectation value of every insertion pattern.

    Patterns sharing their slot operations reuse one comb contraction;
    only the final operation differs, and it acts on the small output
    state.
    """
    ops = _insertion_ops(decomp, insertion)
    layers = list(layers)
    if len(layers) != comb.teeth - 1:
        raise ValueError(f"expected {comb.teeth - 1} ideal slot channels")
    n_ops = len(ops)
    values = np.zeros((n_ops,) * comb.teeth)
    for combo in itertools.product(range(n_ops), repeat=comb.teeth - 1):
        dressed = [compose(layers[m], ops[combo[m]]) for m in range(comb.teeth - 1)]
        state = apply_comb(comb, dressed, rho)
        for last in range(n_ops):
            final = apply(ops[last], state)
            values[combo + (last,)] = np.trace(observable @ final).real
    return values


def pec_correct_exact(
    comb: Comb,
    decomp: QuasiProbDecomposition,
    layers,
    rho: np.ndarray,
    observable: np.ndarray,
    *,
    insertion: str = "plain",
) -> float:
    """Deterministically reweighted expectation value.

    Sums alpha against the expectation values of every insertion
    pattern; with the decomposition of the comb's inverse this cancels
    the noise exactly, up to the numerical residual of the expansion.
    """
    values = _term_values(comb, decomp, layers, rho, observable, insertion)
    return float(np.sum(decomp.alpha * values))


def pec_sample(
    comb: Comb,
    decomp: QuasiProbDecomposition,
    layers,
    rho: np.ndarray,
    observable: np.ndarray,
    shots: int,
    rng: np.random.Generator | None = None,
    *,
    insertion: str = "plain",
) -> tuple[float, float]:
    """Monte Carlo estimate of the corrected expectation value.

    Insertion patterns are drawn with probability |alpha|/gamma and the
    measured values are reweighted by gamma and the pattern sign.
    Returns the estimate and its standard error.
    """
    if shots < 2:
        raise ValueError("need at least two shots for an error estimate")
    rng = rng or np.random.default_rng()
    values = _term_values(comb, decomp, layers, rho, observable, insertion)
    flat_alpha = decomp.alpha.reshape(-1)
    flat_values = values.reshape(-1)
    probs = np.abs(flat_alpha)
    total = probs.sum()
    probs = probs / total
    counts = rng.multinomial(shots, probs)
    shot_values = decomp.gamma * np.sign(flat_alpha) * flat_values
    estimate = float(np.dot(counts, shot_values) / shots)
    second = float(np.dot(counts, shot_values**2) / shots)
    var = max(second - estimate**2, 0.0) * shots / (shots - 1)
    return estimate, float(np.sqrt(var / shots))
