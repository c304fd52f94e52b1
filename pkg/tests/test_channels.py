import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_nogo.bounds import trace_distance, trace_norm
from bosonic_nogo.channels import (
    ChannelSpec,
    apply_agn,
    apply_channel,
    apply_kraus,
    apply_loss,
    commutation_defect,
    loss_kraus,
)
from bosonic_nogo.errors import CutoffHeadroomInsufficient, InvalidNoiseVariance, InvalidTransmittance
from bosonic_nogo.fock import (
    DensityMatrix,
    FockCutoff,
    coherent_state,
    mean_photon_number,
    number_state,
    qidc_state,
    squeezed_vacuum,
    tensor,
    thermal_state,
    vacuum,
)
from bosonic_nogo.phase_space import default_grid, q_function, state_from_p, wigner_function
from oracles import agn_by_loss_and_amplifier, loss_single_mode, thermal_diagonal


def low_state(rng, dim, occupied):
    """Random mixed state supported on the lowest ``occupied`` levels."""
    g = rng.normal(size=(occupied, occupied)) + 1j * rng.normal(size=(occupied, occupied))
    small = g @ g.conj().T
    data = np.zeros((dim, dim), dtype=complex)
    data[:occupied, :occupied] = small / np.trace(small).real
    return DensityMatrix(data, FockCutoff((dim,)))


def test_channel_spec_validation():
    with pytest.raises(InvalidTransmittance):
        ChannelSpec([1.2], [0.0])
    with pytest.raises(InvalidNoiseVariance):
        ChannelSpec([0.5], [-0.1])


def test_loss_kraus_cases():
    ks = loss_kraus(1.0, 6)
    assert len(ks.operators) == 1 and np.array_equal(ks.operators[0], np.eye(6))
    assert loss_kraus(0.3, 30).completeness_defect < 1e-8
    assert np.allclose(apply_loss(number_state(2, 6), 0.0).data, vacuum(6).data, atol=1e-15)
    out = apply_loss(number_state(1, 6), 0.5)
    assert np.allclose(np.diag(out.data)[:2].real, [0.5, 0.5], atol=1e-15)
    with pytest.raises(InvalidTransmittance):
        loss_kraus(-0.1, 4)


def test_loss_maps_coherent_to_coherent():
    out = apply_loss(coherent_state(1.2 - 0.4j, 40), 0.6)
    target = coherent_state(math.sqrt(0.6) * (1.2 - 0.4j), 40)
    assert trace_distance(out, target) < 1e-8
    assert np.allclose(apply_loss(squeezed_vacuum(0.4, 30), 1.0).data, squeezed_vacuum(0.4, 30).data, atol=1e-12)


def test_loss_transfer_matches_kraus_reference():
    rng = np.random.default_rng(3)
    rho = low_state(rng, 12, 12)
    ref = loss_single_mode(rho.data, 0.37)
    assert np.max(np.abs(apply_loss(rho, 0.37).data - ref)) < 1e-14
    ops = loss_kraus(0.37, 12).operators
    assert np.max(np.abs(apply_kraus(rho, ops).data - ref)) < 1e-14


def test_agn_examples():
    rho = coherent_state(1.0, 40)
    assert np.allclose(apply_agn(rho, 0.0).data, rho.data)
    th = apply_agn(vacuum(30), 1.0)
    assert np.allclose(np.diag(th.data).real, thermal_diagonal(1.0, 30), atol=1e-6)
    out = apply_agn(rho, 0.5)
    assert mean_photon_number(out) - mean_photon_number(rho) == pytest.approx(0.5, abs=1e-6)


def test_agn_against_amplifier_oracle():
    for rho in (coherent_state(0.8j, 60), squeezed_vacuum(0.5, 60), number_state(3, 60)):
        for N in (0.1, 0.8, 2.0):
            out = apply_agn(rho, N)
            assert np.max(np.abs(out.data - agn_by_loss_and_amplifier(rho.data, N))) < 1e-12


def test_agn_hermite_rule_converges_to_default():
    rho = coherent_state(1.0, 40)
    exact = apply_agn(rho, 0.5)
    approx = apply_agn(rho, 0.5, rule="hermite", order=21)
    assert trace_distance(exact, approx) < 1e-6


def test_agn_headroom_guard():
    with pytest.raises(CutoffHeadroomInsufficient):
        apply_agn(number_state(5, 10), 2.0)
    with pytest.raises(InvalidNoiseVariance):
        apply_agn(vacuum(10), -1.0)


def test_agn_multimode_acts_per_mode():
    a, b = coherent_state(0.5, 32), thermal_state(0.3, 32)
    joint = apply_agn(tensor(a, b), [0.4, 0.9])
    separate = tensor(apply_agn(a, 0.4), apply_agn(b, 0.9))
    assert np.max(np.abs(joint.data - separate.data)) < 1e-13


def test_agn_provenance_flag():
    assert apply_agn(number_state(1, 30), 1.0).classical
    assert not apply_agn(number_state(1, 30), 0.5).classical
    assert apply_channel(number_state(1, 30), ChannelSpec([0.3], [0.3])).classical


def test_commutation_examples():
    rho = number_state(1, 60)
    assert commutation_defect(rho, 1.0, 0.7) < 1e-10
    assert commutation_defect(rho, 0.4, 0.0) < 1e-10
    assert commutation_defect(rho, 0.5, 0.8) < 1e-6


def test_commutation_on_two_modes():
    rho = qidc_state(0.3, 26)
    lhs = apply_loss(apply_agn(rho, [0.6, 0.2]), [0.5, 0.8])
    rhs = apply_agn(apply_loss(rho, [0.5, 0.8]), [0.3, 0.16])
    assert trace_norm(lhs.data - rhs.data) < 1e-6


def test_lemma1_reconstruction():
    for rho in (number_state(1, 40), squeezed_vacuum(0.5, 40)):
        q = q_function(rho, default_grid(rho))
        rebuilt = state_from_p(q.with_values(q.values, "P"), 40)
        assert trace_distance(rebuilt, apply_agn(rho, 1.0)) < 1e-5


def test_lemma2_reconstruction():
    # truncation ripples make W dip below zero in the far field (-2e-8 at
    # cutoff 40, -7e-12 at 60); at 80 they sit under the -1e-12 P tolerance
    rho = squeezed_vacuum(0.5, 80)
    w = wigner_function(rho, default_grid(rho))
    rebuilt = state_from_p(w.with_values(w.values, "P"), 80)
    assert trace_distance(rebuilt, apply_agn(rho, 0.5)) < 1e-5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0), st.floats(0.0, 1.5))
def test_channel_invariants(seed, kappa, N):
    rng = np.random.default_rng(seed)
    rho = low_state(rng, 60, 6)
    lossy = apply_loss(rho, kappa)
    assert abs(lossy.trace - rho.trace) < 1e-8
    assert mean_photon_number(lossy) == pytest.approx(kappa * mean_photon_number(rho), abs=1e-8)
    noisy = apply_agn(rho, N)
    assert abs(noisy.trace - rho.trace) < 1e-8
    assert noisy.min_eigenvalue() > -1e-9
    purity_in = np.trace(rho.data @ rho.data).real
    assert np.trace(noisy.data @ noisy.data).real <= purity_in + 1e-9
    assert noisy.trace + noisy.leakage == pytest.approx(1.0, abs=1e-12)


def test_headroom_rule_alone_does_not_bound_trace_loss():
    # 34 free levels against the 13 the rule asks for, yet more than 1e-8 escapes;
    # the loss is recorded as leakage rather than renormalized away
    rho = low_state(np.random.default_rng(0), 40, 6)
    out = apply_agn(rho, 1.5)
    assert out.leakage > 1e-8
    assert out.trace + out.leakage == pytest.approx(1.0, abs=1e-12)
