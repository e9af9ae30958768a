import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanholo.discrete import ChannelSequence, holonomy, overlap
from chanholo.errors import BadBasis, NotCyclic, NotMaximalKraus
from chanholo.kraus import choi, random_channel, zoo
from chanholo.matcore import dag, haar_unitary, matrix_sqrt_posdef
from chanholo.uhlmann import (
    DensitySequence,
    UhlmannAmplitude,
    amplitude_from_rep,
    channel_from_uhlmann,
    channel_vs_uhlmann,
    maximally_entangled,
    uhlmann_holonomy,
)

from conftest import random_sequence, random_state, seeds


def test_requires_maximal_kraus_number():
    with pytest.raises(NotMaximalKraus):
        amplitude_from_rep(zoo("identity"))


def test_bad_basis():
    with pytest.raises(BadBasis):
        amplitude_from_rep(random_channel(2, 4, 0), basis=2 * np.eye(4))


@given(seeds)
@settings(max_examples=30)
def test_amplitude_purifies_choi(seed):
    rep = random_channel(2, 4, seed)
    w = amplitude_from_rep(rep)
    assert np.linalg.norm(w.rho - choi(rep).matrix) < 1e-10
    assert np.linalg.eigvalsh(w.rho)[0] > 0


def test_amplitude_overlap_is_scaled_channel_overlap(rng):
    a, b = random_channel(2, 4, rng), random_channel(2, 4, rng)
    f = haar_unitary(4, rng)
    wa, wb = amplitude_from_rep(a, f).matrix, amplitude_from_rep(b, f).matrix
    assert np.allclose(dag(wb) @ wa, f @ overlap(b, a) @ dag(f) / 2, atol=1e-12)


def test_constant_states_give_identity(rng):
    rho = random_state(rng, 4)
    w = UhlmannAmplitude(matrix_sqrt_posdef(rho))
    assert np.allclose(uhlmann_holonomy(DensitySequence([rho] * 3), [w] * 3), np.eye(4), atol=1e-12)


def test_commuting_ping_pong_gives_identity(rng):
    v = haar_unitary(3, rng)
    r1 = v @ np.diag([0.5, 0.3, 0.2]) @ dag(v)
    r2 = v @ np.diag([0.1, 0.6, 0.3]) @ dag(v)
    states = [r1, r2, r1]
    amps = [UhlmannAmplitude(matrix_sqrt_posdef(r) @ haar_unitary(3, rng)) for r in states[:2]]
    amps.append(amps[0])
    u = uhlmann_holonomy(DensitySequence(states), amps)
    assert np.allclose(u, np.eye(3), atol=1e-10)


def test_not_cyclic(rng):
    rho = random_state(rng, 2)
    w = matrix_sqrt_posdef(rho)
    amps = [UhlmannAmplitude(w), UhlmannAmplitude(w), UhlmannAmplitude(w @ haar_unitary(2, rng))]
    with pytest.raises(NotCyclic):
        uhlmann_holonomy(DensitySequence([rho, rho]), amps)


def test_unfaithful_state_rejected():
    with pytest.raises(ValueError):
        DensitySequence([np.diag([1.0, 0.0])])


@given(seeds)
@settings(max_examples=25)
def test_uhlmann_holonomy_unitary_and_basis_invariant(seed):
    rng = np.random.default_rng(seed)
    states = [random_state(rng, 4) for _ in range(3)]
    amps = [UhlmannAmplitude(matrix_sqrt_posdef(r) @ haar_unitary(4, rng)) for r in states]
    u = uhlmann_holonomy(DensitySequence(states), amps)
    assert np.allclose(dag(u) @ u, np.eye(4), atol=1e-10)
    seq = random_sequence(rng, 3, 2, 4)
    b1, b2 = haar_unitary(4, rng), haar_unitary(4, rng)
    assert np.allclose(channel_from_uhlmann(seq, b1), channel_from_uhlmann(seq, b2), atol=1e-8)


def test_constant_sequence_bridge():
    rep = random_channel(2, 4, 9)
    seq = ChannelSequence([rep] * 3)
    assert np.allclose(channel_from_uhlmann(seq), np.eye(4), atol=1e-10)
    assert channel_vs_uhlmann(seq) < 1e-10


@given(seeds, st.integers(1, 5))
@settings(max_examples=40)
def test_bridge_random_sequences(seed, n):
    seq = random_sequence(np.random.default_rng(seed), n, 2, 4)
    assert channel_vs_uhlmann(seq) < 1e-8


@given(seeds)
@settings(max_examples=20)
def test_bridge_independent_of_entangled_state(seed):
    rng = np.random.default_rng(seed)
    seq = random_sequence(rng, 3, 2, 4)
    psi = maximally_entangled(2, haar_unitary(2, rng))
    assert np.allclose(channel_from_uhlmann(seq, psi=psi), holonomy(seq), atol=1e-8)
    assert np.allclose(channel_from_uhlmann(seq, haar_unitary(4, rng), psi), holonomy(seq), atol=1e-8)
