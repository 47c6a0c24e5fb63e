"""Virtual purification of noise channels and noise combs.

Two independent copies of the noise run side by side on a main and an
ancilla register while a control qubit, prepared in |+>, conditionally
swaps the registers around every noise segment.  The ancilla starts
maximally mixed and is depolarized in every slot, which wipes out all
cross terms except those where both copies picked the same error.  An X
measurement of the control then gives access to the error-squared
("virtual") state as a difference of outcome branches, at the cost of a
signal shrinking with the purity of the error distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    Channel,
    apply,
    apply_channel_on,
    completely_depolarizing,
)
from .combs import EnvModel
from .linalg import embed, partial_trace, permutation_matrix, tensor
from .pauli import label_index, pauli_basis
from .twirl import PauliDiagTable


@dataclass(frozen=True)
class VcpResult:
    """Outcome of one purification run.

    ``virtual_state`` is the difference of the X-outcome branches over
    their probability gap; ``physical_state`` is the branch conditioned
    on the + outcome.
    """

    virtual_state: np.ndarray
    physical_state: np.ndarray
    p_plus: float
    p_minus: float

    @property
    def p_gap(self) -> float:
        """p_plus - p_minus, the collision probability of the errors."""
        return self.p_plus - self.p_minus


def _cswap(d: int) -> np.ndarray:
    swap = permutation_matrix([d, d], [1, 0])
    return tensor(np.diag([1.0, 0.0]), np.eye(d * d)) + tensor(
        np.diag([0.0, 1.0]), swap
    )


def _branches(tau: np.ndarray, d: int) -> VcpResult:
    """Split the control-plus-main state into X-measurement branches."""
    four = tau.reshape(2, d, 2, d)
    t00, t01 = four[0, :, 0, :], four[0, :, 1, :]
    t10, t11 = four[1, :, 0, :], four[1, :, 1, :]
    sig_plus = 0.5 * (t00 + t11 + t01 + t10)
    sig_minus = 0.5 * (t00 + t11 - t01 - t10)
    p_plus = float(np.trace(sig_plus).real)
    p_minus = float(np.trace(sig_minus).real)
    gap = p_plus - p_minus
    if abs(gap) < 1e-12:
        raise ValueError("outcome probabilities coincide; no virtual state")
    return VcpResult(
        virtual_state=(sig_plus - sig_minus) / gap,
        physical_state=sig_plus / p_plus,
        p_plus=p_plus,
        p_minus=p_minus,
    )


def vcp_channel(noise: Channel, rho: np.ndarray, copies: int = 2) -> VcpResult:
    """Purify a single noise channel acting once on a state.

    The control conditionally swaps main and ancilla before and after
    one application of the noise to each register.
    """
    if copies != 2:
        raise ValueError("only the two-copy protocol is implemented")
    d = noise.d_in
    if noise.d_out != d:
        raise ValueError("noise must preserve the system dimension")
    if rho.shape != (d, d):
        raise ValueError("state dimension does not match the noise")
    dims = [2, d, d]
    state = tensor(np.full((2, 2), 0.5, dtype=complex), rho, np.eye(d) / d)
    cswap = _cswap(d)
    state = cswap @ state @ cswap.conj().T
    state = apply_channel_on(state, dims, [1], noise)
    state = apply_channel_on(state, dims, [2], noise)
    state = cswap @ state @ cswap.conj().T
    tau = partial_trace(state, dims, keep=[0, 1])
    return _branches(tau, d)


def vcp_comb(
    copy1: EnvModel, copy2: EnvModel, layers, rho: np.ndarray
) -> VcpResult:
    """Purify a correlated noise process given two dilated copies.

    Both copies keep their own environment for the whole run.  The slot
    channels act on the main register while the ancilla is depolarized,
    and the conditional swaps bracket every tooth.
    """
    if copy1.d_sys != copy2.d_sys or copy1.teeth != copy2.teeth:
        raise ValueError("the two copies must describe the same process shape")
    d = copy1.d_sys
    if rho.shape != (d, d):
        raise ValueError("state dimension does not match the process")
    layers = list(layers)
    if len(layers) != copy1.teeth - 1:
        raise ValueError(f"expected {copy1.teeth - 1} slot channels")
    dims = [2, d, d, copy1.d_env, copy2.d_env]
    state = tensor(
        np.full((2, 2), 0.5, dtype=complex),
        rho,
        np.eye(d) / d,
        copy1.env_init,
        copy2.env_init,
    )
    cswap = embed(_cswap(d), dims, [0, 1, 2])
    scrambler = completely_depolarizing(d)
    state = cswap @ state @ cswap.conj().T
    for m in range(copy1.teeth):
        u1 = embed(copy1.interactions[m], dims, [1, 3])
        u2 = embed(copy2.interactions[m], dims, [2, 4])
        state = u2 @ u1 @ state @ u1.conj().T @ u2.conj().T
        state = cswap @ state @ cswap.conj().T
        if m < len(layers):
            state = apply_channel_on(state, dims, [1], layers[m])
            state = apply_channel_on(state, dims, [2], scrambler)
            state = cswap @ state @ cswap.conj().T
    tau = partial_trace(state, dims, keep=[0, 1])
    return _branches(tau, d)


def _weighted_pauli_action(weights, table: PauliDiagTable, layers, rho):
    singles = pauli_basis(table.n_qubits)
    out = np.zeros_like(rho, dtype=complex)
    for key, w in weights.items():
        cur = rho
        for m, lbl in enumerate(key):
            g = singles[label_index(lbl)]
            cur = g @ cur @ g
            if m < len(layers):
                cur = apply(layers[m], cur)
        out += w * cur
    return out


def reference_purified(
    table: PauliDiagTable, layers, rho: np.ndarray, which: str = "virtual"
) -> np.ndarray:
    """Closed-form purified states for correlated Pauli noise.

    The virtual state squares every weight of the error table and
    renormalizes; the physical (+ branch) state mixes the raw and the
    squared weights.
    """
    layers = list(layers)
    if len(layers) != table.teeth - 1:
        raise ValueError(f"expected {table.teeth - 1} slot channels")
    p2 = sum(p * p for p in table.probs.values())
    if which == "virtual":
        weights = {k: p * p / p2 for k, p in table.probs.items()}
    elif which == "physical":
        weights = {k: (p + p * p) / (1.0 + p2) for k, p in table.probs.items()}
    else:
        raise ValueError(f"unknown target {which!r}")
    return _weighted_pauli_action(weights, table, layers, rho)
