"""Multi-time quantum processes (combs) and their channel forms.

A comb with M teeth over a system of dimension d is a positive operator
on the 2M wires (in_1, out_1, ..., in_M, out_M), all of size d, obeying
the causality hierarchy

    Tr_out_m [ C^(m) ] = C^(m-1) (x) I_in_m ,   C^(0) = 1,

where C^(m) is the reduction to the first m teeth.  The teeth describe
what the process does between the points where an experimenter may act;
inserting channels into the M-1 slots closes the comb into an ordinary
channel from in_1 to out_M.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, apply_channel_on, random_density_matrix, random_unitary
from .linalg import (
    embed,
    max_entangled,
    partial_trace,
    permute_wires,
    psd_check,
    tensor,
)
from .pauli import chi_from_choi


@dataclass(frozen=True, eq=False)
class Comb:
    """A deterministic quantum process with ``teeth`` interventions slots.

    ``choi_op`` lives on wires (in_1, out_1, ..., in_M, out_M), leftmost
    slowest, every wire of dimension ``d_sys``.
    """

    choi_op: np.ndarray
    teeth: int
    d_sys: int

    def __post_init__(self):
        d = self.d_sys ** (2 * self.teeth)
        if self.choi_op.shape != (d, d):
            raise ValueError(
                f"comb operator shape {self.choi_op.shape} does not match "
                f"{self.teeth} teeth of dimension {self.d_sys}"
            )

    @property
    def wire_dims(self) -> list[int]:
        return [self.d_sys] * (2 * self.teeth)


@dataclass(frozen=True)
class EnvModel:
    """System-environment dilation of a correlated noise process.

    The environment starts in ``env_init`` and the joint unitary
    ``interactions[m]`` acts on (system, environment) before the m-th
    slot, with the system as the slower wire.
    """

    d_sys: int
    d_env: int
    env_init: np.ndarray
    interactions: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "interactions", tuple(np.asarray(u, dtype=complex) for u in self.interactions))
        object.__setattr__(self, "env_init", np.asarray(self.env_init, dtype=complex))
        if self.env_init.shape != (self.d_env, self.d_env):
            raise ValueError("environment state has the wrong shape")
        if abs(np.trace(self.env_init) - 1.0) > 1e-9:
            raise ValueError("environment state must have unit trace")
        d = self.d_sys * self.d_env
        for u in self.interactions:
            if u.shape != (d, d):
                raise ValueError("interaction unitary has the wrong shape")
            if not np.allclose(u.conj().T @ u, np.eye(d), atol=1e-9):
                raise ValueError("interaction is not unitary")

    @property
    def teeth(self) -> int:
        return len(self.interactions)


def comb_from_env_model(model: EnvModel, validate: bool = True) -> Comb:
    """Choi operator of the process generated by an environment dilation.

    Each tooth is fed half of an unnormalized maximally entangled pair;
    the carrier halves interact with the environment in sequence and the
    environment is traced out at the end.
    """
    d, de, m_teeth = model.d_sys, model.d_env, model.teeth
    bell = np.outer(max_entangled(d), max_entangled(d).conj())
    full = tensor(*([bell] * m_teeth), model.env_init)
    dims = [d] * (2 * m_teeth) + [de]
    for m in range(m_teeth):
        u = embed(model.interactions[m], dims, [2 * m + 1, 2 * m_teeth])
        full = u @ full @ u.conj().T
    choi_op = partial_trace(full, dims, keep=range(2 * m_teeth))
    comb = Comb(choi_op=choi_op, teeth=m_teeth, d_sys=d)
    if validate:
        report = validate_comb(comb)
        if not report.passes:
            raise ValueError(f"constructed comb fails validation: {report}")
    return comb


def markovian_comb(tooth_channels) -> Comb:
    """Comb whose teeth are independent channels with no memory.

    No causality validation is performed, so ill-formed tooth maps can
    be used to probe :func:`validate_comb`.
    """
    chois = []
    d = tooth_channels[0].d_in
    for ch in tooth_channels:
        if ch.d_in != d or ch.d_out != d:
            raise ValueError("tooth channels must share the system dimension")
        chois.append(permute_wires(ch.choi, [d, d], [1, 0]))
    return Comb(choi_op=tensor(*chois), teeth=len(chois), d_sys=d)


@dataclass(frozen=True)
class CombValidationReport:
    passes: bool
    psd_ok: bool
    min_eigenvalue: float
    per_level_residuals: tuple[float, ...] = field(default_factory=tuple)

    def __str__(self):
        res = ", ".join(f"{r:.2e}" for r in self.per_level_residuals)
        return (
            f"psd={self.psd_ok} (min eig {self.min_eigenvalue:.3e}), "
            f"causality residuals [{res}], passes={self.passes}"
        )


def validate_comb(comb: Comb, tol: float = 1e-9) -> CombValidationReport:
    """Check positivity and the trace hierarchy of a comb operator.

    The residual at level m measures, relative to the operator norm
    scale, how far Tr_out_m[C^(m)] is from C^(m-1) (x) I.
    """
    d = comb.d_sys
    rep = psd_check(comb.choi_op, tol=tol)
    herm_ok = np.linalg.norm(comb.choi_op - comb.choi_op.conj().T) <= tol * max(
        np.linalg.norm(comb.choi_op), 1.0
    )
    residuals = []
    cur = comb.choi_op
    for m in range(comb.teeth, 0, -1):
        dims = [d] * (2 * m)
        traced = partial_trace(cur, dims, keep=range(2 * m - 1))
        lower = partial_trace(traced, [d] * (2 * m - 1), keep=range(2 * m - 2)) / d
        # At the bottom the reduction must be exactly the identity, which
        # also pins the overall normalization Tr = d**teeth.
        expected = tensor(lower, np.eye(d)) if m > 1 else np.eye(d)
        diff = np.linalg.norm(traced - expected) / max(np.linalg.norm(traced), 1.0)
        residuals.append(float(diff))
        cur = lower
    residuals.reverse()
    passes = bool(herm_ok and rep.is_psd and all(r <= tol for r in residuals))
    return CombValidationReport(
        passes=passes,
        psd_ok=rep.is_psd,
        min_eigenvalue=rep.min_eigenvalue,
        per_level_residuals=tuple(residuals),
    )


def choi_channel(comb: Comb) -> Channel:
    """The comb viewed as one channel from all inputs to all outputs.

    Input register m is in_m and output register m is out_m, register 1
    slowest on both sides.  This map forgets the causal ordering; it is
    the form on which Pauli twirling and quasi-probability decompositions
    operate.
    """
    m_teeth = comb.teeth
    order = [2 * m + 1 for m in range(m_teeth)] + [2 * m for m in range(m_teeth)]
    choi = permute_wires(comb.choi_op, comb.wire_dims, order)
    d_tot = comb.d_sys**m_teeth
    return Channel(choi=choi, d_in=d_tot, d_out=d_tot)


def slot_channel(comb: Comb) -> Channel:
    """Channel form with the final output leading the output registers.

    Output registers are ordered (out_M, out_1, ..., out_{M-1}), so
    register 1 maps in_1 to the comb's terminal output and register m>1
    maps in_m to the output of the preceding tooth.  Equals the cyclic
    relabeling of :func:`choi_channel`.
    """
    m_teeth = comb.teeth
    outs = [2 * m_teeth - 1] + [2 * m + 1 for m in range(m_teeth - 1)]
    order = outs + [2 * m for m in range(m_teeth)]
    choi = permute_wires(comb.choi_op, comb.wire_dims, order)
    d_tot = comb.d_sys**m_teeth
    return Channel(choi=choi, d_in=d_tot, d_out=d_tot)


def comb_choi_state(comb: Comb) -> np.ndarray:
    """Choi matrix of the channel form; its trace is d_sys**teeth."""
    return choi_channel(comb).choi


def comb_chi(comb: Comb) -> np.ndarray:
    """Process matrix of the channel form over the multi-qubit Pauli basis."""
    return chi_from_choi(comb_choi_state(comb))


def _check_layers(comb: Comb, layers) -> list[Channel]:
    layers = list(layers)
    if len(layers) != comb.teeth - 1:
        raise ValueError(f"expected {comb.teeth - 1} slot channels, got {len(layers)}")
    for ch in layers:
        if ch.d_in != comb.d_sys or ch.d_out != comb.d_sys:
            raise ValueError("slot channel dimension does not match the comb")
    return layers


def apply_comb(comb: Comb, layers, rho: np.ndarray) -> np.ndarray:
    """Close the comb with slot channels and an input state.

    ``layers[m]`` is inserted between out_{m+1} and in_{m+2} (zero
    based), and the returned density matrix lives on the final output
    wire.
    """
    layers = _check_layers(comb, layers)
    d = comb.d_sys
    if rho.shape != (d, d):
        raise ValueError("input state dimension does not match the comb")
    m_teeth = comb.teeth
    plugs = [rho.T]
    plug_wires = ["in1"]
    for m, ch in enumerate(layers, start=1):
        plugs.append(ch.choi.T)
        plug_wires += [f"in{m + 1}", f"out{m}"]
    plugs.append(np.eye(d))
    plug_wires.append(f"out{m_teeth}")
    sigma = tensor(*plugs)
    canonical = [w for m in range(1, m_teeth + 1) for w in (f"in{m}", f"out{m}")]
    perm = [plug_wires.index(w) for w in canonical]
    sigma = permute_wires(sigma, [d] * (2 * m_teeth), perm)
    prod = comb.choi_op @ sigma
    return partial_trace(prod, comb.wire_dims, keep=[2 * m_teeth - 1])


def output_channel(comb: Comb, layers) -> Channel:
    """The in_1 to out_M channel obtained by fixing the slot contents."""
    layers = _check_layers(comb, layers)
    d = comb.d_sys
    m_teeth = comb.teeth
    plugs = [np.eye(d)]
    plug_wires = ["in1"]
    for m, ch in enumerate(layers, start=1):
        plugs.append(ch.choi.T)
        plug_wires += [f"in{m + 1}", f"out{m}"]
    plugs.append(np.eye(d))
    plug_wires.append(f"out{m_teeth}")
    sigma = tensor(*plugs)
    canonical = [w for m in range(1, m_teeth + 1) for w in (f"in{m}", f"out{m}")]
    perm = [plug_wires.index(w) for w in canonical]
    sigma = permute_wires(sigma, [d] * (2 * m_teeth), perm)
    prod = comb.choi_op @ sigma
    reduced = partial_trace(prod, comb.wire_dims, keep=[0, 2 * m_teeth - 1])
    choi = permute_wires(reduced, [d, d], [1, 0])
    return Channel(choi=choi, d_in=d, d_out=d)


def simulate_env_model(model: EnvModel, layers, rho: np.ndarray) -> np.ndarray:
    """Direct density-matrix simulation of the dilated dynamics.

    This bypasses the comb machinery entirely: the joint system plus
    environment state is evolved unitary by unitary, slot channels act
    on the system wire in between, and the environment is discarded at
    the end.
    """
    layers = list(layers)
    if len(layers) != model.teeth - 1:
        raise ValueError(f"expected {model.teeth - 1} slot channels")
    dims = [model.d_sys, model.d_env]
    state = tensor(rho, model.env_init)
    for m, u in enumerate(model.interactions):
        state = u @ state @ u.conj().T
        if m < len(layers):
            state = apply_channel_on(state, dims, [0], layers[m])
    return partial_trace(state, dims, keep=[0])


def random_env_model(
    teeth: int,
    n_sys_qubits: int = 1,
    n_env_qubits: int = 1,
    rng: np.random.Generator | None = None,
    interaction_strength: float | None = None,
) -> EnvModel:
    """Random dilation with Haar interactions, or weak ones when a
    strength is given (unitaries exp(-i s H) with H a unit-norm random
    Hermitian)."""
    rng = rng or np.random.default_rng()
    d_sys, d_env = 2**n_sys_qubits, 2**n_env_qubits
    d = d_sys * d_env
    interactions = []
    for _ in range(teeth):
        if interaction_strength is None:
            interactions.append(random_unitary(d, rng))
        else:
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            h = (g + g.conj().T) / 2
            h /= np.linalg.norm(h, 2)
            w, v = np.linalg.eigh(h)
            u = v @ np.diag(np.exp(-1j * interaction_strength * w)) @ v.conj().T
            interactions.append(u)
    return EnvModel(
        d_sys=d_sys,
        d_env=d_env,
        env_init=random_density_matrix(d_env, rng),
        interactions=tuple(interactions),
    )
