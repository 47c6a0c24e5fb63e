"""Tests for the quasi-probability noise cancellation."""

import numpy as np
import pytest

from qcombs.channels import (
    Channel,
    apply,
    completely_depolarizing,
    depolarizing_channel,
    from_kraus,
    identity_channel,
    pauli_channel,
    random_channel,
    unitary_channel,
)
from qcombs.combs import comb_from_env_model, markovian_comb, random_env_model
from qcombs.pauli import pauli_basis
from qcombs.pec import (
    BasisOpSet,
    SingularNoiseError,
    _reset_channel,
    _rotation,
    _STATES,
    decompose_inverse,
    default_basis,
    pec_correct_exact,
    pec_sample,
    verify_basis_completeness,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def ideal_value(layers, rho, observable):
    cur = rho
    for layer in layers:
        cur = apply(layer, cur)
    return np.trace(observable @ cur).real


# ---------------------------------------------------------------------------
# operation basis


def test_default_basis_is_complete():
    basis = default_basis(1)
    assert len(basis) == 16
    assert len(set(basis.names)) == 16
    report = verify_basis_completeness(basis)
    assert report.rank == 16
    assert report.condition_number < 20


def test_default_basis_two_qubits():
    basis = default_basis(2)
    assert len(basis) == 256
    assert "id,x" in basis.names
    report = verify_basis_completeness(basis)
    assert report.rank == 256


def test_unitaries_and_resets_alone_are_rank_deficient():
    # Ten single-qubit unitaries plus trace-preserving resets to all six
    # axis states stall at rank 13: every trace-preserving map fixes the
    # first transfer-matrix row, which freezes three directions.  This is
    # why the shipped basis trades three resets for projective selections.
    ops = [
        unitary_channel(np.eye(2)),
        unitary_channel(X),
        unitary_channel(np.array([[0, -1j], [1j, 0]], dtype=complex)),
        unitary_channel(Z),
        unitary_channel(_rotation([1, 0, 0])),
        unitary_channel(_rotation([0, 1, 0])),
        unitary_channel(_rotation([0, 0, 1])),
        unitary_channel(_rotation([0, 1, 1])),
        unitary_channel(_rotation([1, 0, 1])),
        unitary_channel(_rotation([1, 1, 0])),
    ] + [_reset_channel(_STATES[k]) for k in ("0", "1", "plus", "minus", "plus_i", "minus_i")]
    basis = BasisOpSet(ops=tuple(ops), names=tuple(str(i) for i in range(16)), n_qubits=1)
    with pytest.raises(ValueError, match="spans only 13"):
        verify_basis_completeness(basis)


def test_basis_rejects_unphysical_operations():
    bad_choi = np.diag([1.0, 1.0, 1.0, -0.5]).astype(complex)
    non_cp = BasisOpSet(
        ops=(Channel(choi=bad_choi, d_in=2, d_out=2),),
        names=("bad",),
        n_qubits=1,
    )
    with pytest.raises(ValueError, match="not completely positive"):
        verify_basis_completeness(non_cp)

    amplified = from_kraus([np.sqrt(2) * np.eye(2)], require_tp=False)
    too_big = BasisOpSet(ops=(amplified,), names=("big",), n_qubits=1)
    with pytest.raises(ValueError, match="increases the trace"):
        verify_basis_completeness(too_big)


def test_basis_op_set_validation():
    with pytest.raises(ValueError, match="one name per"):
        BasisOpSet(ops=(identity_channel(2),), names=(), n_qubits=1)
    with pytest.raises(ValueError, match="dimension"):
        BasisOpSet(ops=(identity_channel(4),), names=("id",), n_qubits=1)


# ---------------------------------------------------------------------------
# decomposition structure


def test_identity_comb_decomposes_to_itself():
    comb = markovian_comb([identity_channel(2), identity_channel(2)])
    decomp = decompose_inverse(comb)
    assert decomp.gamma == 1.0
    assert np.count_nonzero(decomp.alpha) == 1
    assert decomp.alpha[0, 0] == pytest.approx(1.0)
    assert decomp.residual < 1e-12


def test_pauli_unitary_comb_has_unit_gamma():
    # X then Z noise is undone by X then Z again, a single pattern with
    # weight one, so cancellation is free.
    comb = markovian_comb([unitary_channel(X), unitary_channel(Z)])
    decomp = decompose_inverse(comb)
    assert decomp.gamma == pytest.approx(1.0, abs=1e-12)
    assert np.count_nonzero(decomp.alpha) == 1
    names = decomp.basis.names
    idx = np.argwhere(decomp.alpha != 0.0)[0]
    assert (names[idx[0]], names[idx[1]]) == ("x", "z")


def test_depolarizing_gamma_frozen():
    one = decompose_inverse(markovian_comb([depolarizing_channel(0.2)]))
    assert one.gamma == pytest.approx(1.375, abs=1e-12)
    assert np.count_nonzero(one.alpha) == 4

    two = decompose_inverse(
        markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.2)])
    )
    assert two.gamma == pytest.approx(1.890625, abs=1e-12)
    assert np.count_nonzero(two.alpha) == 16


def test_uncorrelated_noise_gives_product_alpha():
    one = decompose_inverse(markovian_comb([depolarizing_channel(0.2)]))
    two = decompose_inverse(
        markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.2)])
    )
    outer = np.multiply.outer(one.alpha, one.alpha)
    assert np.allclose(two.alpha, outer, atol=1e-12)


def test_alpha_shape_tracks_teeth():
    comb = markovian_comb([depolarizing_channel(0.1)] * 3)
    decomp = decompose_inverse(comb)
    assert decomp.alpha.shape == (16, 16, 16)
    assert decomp.teeth == 3


def test_gamma_never_below_one():
    rng = np.random.default_rng(41)
    for _ in range(10):
        model = random_env_model(teeth=2, rng=rng, interaction_strength=0.4)
        decomp = decompose_inverse(comb_from_env_model(model))
        assert decomp.gamma >= 1.0 - 1e-12


def test_residual_is_small():
    rng = np.random.default_rng(43)
    model = random_env_model(teeth=2, rng=rng, interaction_strength=0.5)
    decomp = decompose_inverse(comb_from_env_model(model))
    assert decomp.residual < 1e-10


def test_singular_noise_is_rejected():
    with pytest.raises(SingularNoiseError):
        decompose_inverse(markovian_comb([completely_depolarizing(2)]))
    with pytest.raises(SingularNoiseError):
        decompose_inverse(
            markovian_comb([depolarizing_channel(1.0 - 1e-12), identity_channel(2)])
        )


def test_non_qubit_comb_is_rejected():
    comb = markovian_comb([identity_channel(3)])
    with pytest.raises(ValueError, match="qubit"):
        decompose_inverse(comb)


def test_explicit_basis_is_used():
    comb = markovian_comb([depolarizing_channel(0.2)])
    basis = default_basis(1)
    decomp = decompose_inverse(comb, basis=basis)
    assert decomp.basis is basis


# ---------------------------------------------------------------------------
# exact correction


def test_exact_correction_cancels_markovian_noise():
    comb = markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.3)])
    decomp = decompose_inverse(comb)
    rng = np.random.default_rng(47)
    layer = random_channel(2, rng=rng)
    rho = np.array([[0.8, 0.1 - 0.2j], [0.1 + 0.2j, 0.2]])
    for obs in (Z, X):
        got = pec_correct_exact(comb, decomp, [layer], rho, obs)
        assert got == pytest.approx(ideal_value([layer], rho, obs), abs=1e-10)


def test_exact_correction_cancels_correlated_noise():
    rng = np.random.default_rng(53)
    for _ in range(5):
        model = random_env_model(teeth=2, rng=rng, interaction_strength=0.5)
        comb = comb_from_env_model(model)
        decomp = decompose_inverse(comb)
        layer = random_channel(2, rng=rng)
        rho = np.diag([0.65, 0.35]).astype(complex)
        got = pec_correct_exact(comb, decomp, [layer], rho, Z)
        assert got == pytest.approx(ideal_value([layer], rho, Z), abs=1e-8)


def test_exact_correction_single_tooth():
    comb = markovian_comb([pauli_channel({"I": 0.8, "Y": 0.2})])
    decomp = decompose_inverse(comb)
    rho = np.array([[0.7, 0.3], [0.3, 0.3]], dtype=complex)
    got = pec_correct_exact(comb, decomp, [], rho, X)
    assert got == pytest.approx(np.trace(X @ rho).real, abs=1e-12)


def test_transpose_insertion_breaks_cancellation():
    # The wire-swapped variant exists as a foil: with it the corrected
    # value drifts from the ideal one, pinning down the orientation of
    # the inserted operations.
    rng = np.random.default_rng(59)
    model = random_env_model(teeth=2, rng=rng, interaction_strength=0.7)
    comb = comb_from_env_model(model)
    decomp = decompose_inverse(comb)
    layer = random_channel(2, rng=rng)
    rho = np.diag([0.9, 0.1]).astype(complex)
    ideal = ideal_value([layer], rho, Z)
    plain = pec_correct_exact(comb, decomp, [layer], rho, Z)
    flipped = pec_correct_exact(comb, decomp, [layer], rho, Z, insertion="transpose")
    assert plain == pytest.approx(ideal, abs=1e-8)
    assert abs(flipped - ideal) > 1e-3


def test_unknown_insertion_rejected():
    comb = markovian_comb([depolarizing_channel(0.2)])
    decomp = decompose_inverse(comb)
    with pytest.raises(ValueError, match="insertion"):
        pec_correct_exact(comb, decomp, [], np.eye(2) / 2, Z, insertion="sideways")


def test_layer_count_checked():
    comb = markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.2)])
    decomp = decompose_inverse(comb)
    with pytest.raises(ValueError, match="slot"):
        pec_correct_exact(comb, decomp, [], np.eye(2) / 2, Z)


# ---------------------------------------------------------------------------
# sampling


def test_sampling_is_deterministic_given_seed():
    comb = markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.2)])
    decomp = decompose_inverse(comb)
    layer = identity_channel(2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    a = pec_sample(comb, decomp, [layer], rho, Z, shots=500, rng=np.random.default_rng(7))
    b = pec_sample(comb, decomp, [layer], rho, Z, shots=500, rng=np.random.default_rng(7))
    assert a == b


def test_sampling_estimates_the_exact_value():
    comb = markovian_comb([depolarizing_channel(0.2), depolarizing_channel(0.2)])
    decomp = decompose_inverse(comb)
    layer = identity_channel(2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    truth = pec_correct_exact(comb, decomp, [layer], rho, Z)
    assert truth == pytest.approx(1.0, abs=1e-10)
    estimate, err = pec_sample(
        comb, decomp, [layer], rho, Z, shots=20000, rng=np.random.default_rng(11)
    )
    assert err > 0
    assert abs(estimate - truth) < 6 * err


def test_sampling_error_shrinks_with_shots():
    comb = markovian_comb([depolarizing_channel(0.3), depolarizing_channel(0.3)])
    decomp = decompose_inverse(comb)
    layer = identity_channel(2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    _, err_small = pec_sample(
        comb, decomp, [layer], rho, Z, shots=200, rng=np.random.default_rng(3)
    )
    _, err_big = pec_sample(
        comb, decomp, [layer], rho, Z, shots=20000, rng=np.random.default_rng(3)
    )
    assert err_big < err_small / 5


def test_sampling_needs_two_shots():
    comb = markovian_comb([depolarizing_channel(0.2)])
    decomp = decompose_inverse(comb)
    with pytest.raises(ValueError, match="shots"):
        pec_sample(comb, decomp, [], np.eye(2) / 2, Z, shots=1)
