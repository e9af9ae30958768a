import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanholo.discrete import ChannelSequence, are_parallel, holonomy, overlap, parallel_gauge
from chanholo.errors import CompletionFailure
from chanholo.interferometer import (
    Dilation,
    ancilla_cross_operator,
    ancilla_parallelity_residual,
    detection_probability,
    detection_probability_circuit,
    detection_probability_closed,
    dilate,
    final_gluing,
    isometry_unitary_family,
    operational_parallel_transport,
    optimal_ancilla_unitary,
    random_search_ancilla_unitary,
    smooth_ancilla_transport,
    transported_cross_operators,
)
from chanholo.kraus import SZ, KrausRep, choi, random_channel, zoo
from chanholo.matcore import dag, haar_unitary, phi

from conftest import random_sequence, random_state, seeds


@st.composite
def dk(draw):
    d = draw(st.integers(1, 3))
    return d, draw(st.integers(1, min(4, d * d)))


def test_unitary_channel_dilation():
    u = haar_unitary(2, np.random.default_rng(0))
    dil = dilate(KrausRep([u]))
    assert dil.dim_a == 1
    assert np.allclose(dil.unitary, u)


def test_phase_flip_dilation():
    rep = zoo("phase_flip", 0.5)
    dil = dilate(rep)
    assert np.allclose(dag(dil.unitary) @ dil.unitary, np.eye(4), atol=1e-12)
    assert choi(dil.kraus()).distance(choi(rep)) < 1e-12
    rho = random_state(np.random.default_rng(1), 2)
    assert np.allclose(dil.apply(rho), rep.apply(rho), atol=1e-12)


@given(dk(), seeds)
@settings(max_examples=30)
def test_dilation_reproduces_kraus_and_ancilla_gauge(shape, seed):
    d, k = shape
    rng = np.random.default_rng(seed)
    rep = random_channel(d, k, rng)
    dil = dilate(rep)
    assert np.allclose(dil.kraus().ops, rep.ops, atol=1e-12)
    moved = dil.with_ancilla_unitary(haar_unitary(k, rng))
    assert choi(moved.kraus()).distance(choi(rep)) < 1e-10


def test_non_trace_preserving_rejected():
    with pytest.raises(CompletionFailure):
        dilate(KrausRep([2 * np.eye(2)]))


def test_identical_arms_interfere_fully():
    dil = dilate(random_channel(2, 3, 4))
    v = haar_unitary(3, np.random.default_rng(2))
    assert detection_probability(dil, dil, v, v) == pytest.approx(1.0)
    assert np.allclose(optimal_ancilla_unitary(dil, dil, v), v, atol=1e-12)


def test_orthogonal_arms_give_one_half():
    one = np.eye(1)
    p = detection_probability(dilate(KrausRep([np.eye(2)])), dilate(KrausRep([SZ])), one, one)
    assert p == pytest.approx(0.5)


@given(dk(), seeds)
@settings(max_examples=30)
def test_closed_form_matches_circuit(shape, seed):
    d, k = shape
    rng = np.random.default_rng(seed)
    d0, d1 = dilate(random_channel(d, k, rng)), dilate(random_channel(d, k, rng))
    v0, v1 = haar_unitary(k, rng), haar_unitary(k, rng)
    rho = random_state(rng, d)
    assert detection_probability_closed(d0, d1, v0, v1, rho) == pytest.approx(
        detection_probability_circuit(d0, d1, v0, v1, rho), abs=1e-12
    )


@pytest.mark.parametrize("seed", range(3))
def test_random_search_never_beats_closed_form(seed):
    rng = np.random.default_rng(seed)
    d0, d1 = dilate(random_channel(2, 3, rng)), dilate(random_channel(2, 3, rng))
    v0 = haar_unitary(3, rng)
    p_opt = detection_probability(d0, d1, v0, optimal_ancilla_unitary(d0, d1, v0))
    _, p_search = random_search_ancilla_unitary(d0, d1, v0, iters=10000, seed=seed)
    assert p_search <= p_opt + 1e-6
    assert p_search > p_opt - 1e-3


def test_cross_operator_is_reordered_overlap(rng):
    a, b = random_channel(2, 3, rng), random_channel(2, 3, rng)
    m = ancilla_cross_operator(dilate(a), dilate(b))
    assert np.allclose(m, overlap(b, a).T / 2, atol=1e-12)
    run = operational_parallel_transport(ChannelSequence([a, b]))
    assert np.allclose(run.unitaries[1], phi(overlap(b, a).T), atol=1e-12)


def test_constant_sequence_transport_is_trivial():
    rep = random_channel(2, 2, 3)
    run = operational_parallel_transport(ChannelSequence([rep] * 4))
    for u in run.unitaries:
        assert np.allclose(u, np.eye(2), atol=1e-12)
    fg = final_gluing(ChannelSequence([rep] * 4))
    assert np.allclose(fg.gluing.c, np.eye(2), atol=1e-10)


@given(dk(), st.integers(2, 5), seeds)
@settings(max_examples=30)
def test_transport_matches_parallel_gauge(shape, n, seed):
    d, k = shape
    seq = random_sequence(np.random.default_rng(seed), n, d, k)
    run = operational_parallel_transport(seq)
    par, _ = parallel_gauge(seq)
    reps = run.kraus_reps()
    for r, p in zip(reps, par):
        assert np.allclose(r.ops, p.ops, atol=1e-10)
    for a, b in zip(reps[:-1], reps[1:]):
        assert are_parallel(b, a, tol=1e-9)
    for m in transported_cross_operators(run):
        assert np.allclose(m, dag(m), atol=1e-10)
        assert np.linalg.eigvalsh(0.5 * (m + dag(m)))[0] > 0
    for rec in run.records:
        assert 0.5 <= rec.probability <= 1.0 + 1e-12


@given(dk(), st.integers(1, 5), seeds)
@settings(max_examples=30)
def test_gluing_matrix_is_the_holonomy(shape, n, seed):
    d, k = shape
    seq = random_sequence(np.random.default_rng(seed), n, d, k)
    fg = final_gluing(seq)
    c = fg.gluing.c
    assert fg.fit_residual < 1e-10
    assert np.allclose(c, holonomy(seq), atol=1e-9)
    assert np.allclose(c @ dag(c), np.eye(k), atol=1e-9)
    assert fg.gluing.contraction_excess() < 1e-9


def test_gluing_reproduces_interferometer_channel(rng):
    seq = random_sequence(rng, 4, 2, 2)
    fg = final_gluing(seq)
    sigma = random_state(rng, 4)
    assert np.allclose(fg.gluing.apply(sigma), fg.channel(sigma), atol=1e-12)


def test_gluing_gauge_sweep(rng):
    seq = random_sequence(rng, 4, 2, 3)
    fg = final_gluing(seq)
    sigmas = [random_state(rng, 4) for _ in range(20)]
    for _ in range(5):
        gauges = [haar_unitary(3, rng) for _ in range(4)]
        fg2 = final_gluing(seq.regauged(gauges))
        v1 = gauges[0]
        assert np.allclose(fg2.gluing.c, dag(v1) @ fg.gluing.c @ v1, atol=1e-9)
        for s in sigmas:
            assert np.allclose(fg2.gluing.apply(s), fg.gluing.apply(s), atol=1e-10)


def test_smooth_ancilla_transport_constant_family():
    u0 = dilate(random_channel(2, 2, 1)).unitary
    us = smooth_ancilla_transport(lambda s: u0, np.linspace(0, 1, 11), 2, 2, udot=lambda s: np.zeros_like(u0))
    for u in us:
        assert np.allclose(u, np.eye(2))


def test_smooth_ancilla_transport_parallel_and_consistent():
    ufam, udot = isometry_unitary_family(2, 2, seed=3)
    res = []
    for n in (100, 200):
        grid = np.linspace(0, 1, n + 1)
        us = smooth_ancilla_transport(ufam, grid, 2, 2, udot)
        res.append(ancilla_parallelity_residual(ufam, us, grid, 2, 2))
        for u in us:
            assert np.allclose(dag(u) @ u, np.eye(2), atol=1e-10)
    assert res[1] < 0.6 * res[0]
    # against the operational transport of the sampled Kraus sequence
    errs = []
    for n in (200, 400):
        grid = np.linspace(0, 1, n + 1)
        us = smooth_ancilla_transport(ufam, grid, 2, 2, udot)
        run = operational_parallel_transport(ChannelSequence(Dilation(2, 2, ufam(s)).kraus() for s in grid))
        smooth_end = Dilation(2, 2, ufam(1.0)).with_ancilla_unitary(us[-1]).kraus()
        errs.append(np.linalg.norm(smooth_end.ops - run.kraus_reps()[-1].ops))
    assert errs[1] < 1e-5
    assert errs[1] < 0.5 * errs[0]
