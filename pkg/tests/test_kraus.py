import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanholo.errors import BadArity, DimensionMismatch, ParamOutOfRange, UnknownName
from chanholo.kraus import (
    I2,
    SPLUS,
    SX,
    SZ,
    KrausRep,
    canonical_rep,
    choi,
    gauge_transform,
    random_channel,
    rep_from_json,
    rep_to_json,
    same_channel,
    sequence_from_json,
    validate,
    zoo,
)
from chanholo.matcore import haar_unitary
from chanholo.uhlmann import maximally_entangled

from conftest import random_state, seeds

dims = st.integers(1, 3)


@st.composite
def channels(draw):
    d = draw(dims)
    k = draw(st.integers(1, d * d))
    return random_channel(d, k, draw(seeds))


def test_identity_channel_validates():
    r = validate(zoo("identity"))
    assert r.trace_preserving and r.kraus_number_ok
    assert zoo("identity").k == 1


def test_phase_flip_validates():
    rep = zoo("phase_flip", 0.3)
    r = validate(rep)
    assert r.trace_preserving and r.kraus_number_ok and rep.k == 2


def test_linearly_dependent_ops_flagged():
    r = validate(KrausRep([I2 / np.sqrt(2), I2 / np.sqrt(2)]))
    assert r.trace_preserving
    assert not r.kraus_number_ok
    assert r.gram_rank == 1


@pytest.mark.parametrize("p", [0.0, 0.25, 0.36, 0.5, 1.0])
def test_amplitude_damping_as_written_is_trace_preserving(p):
    rep = zoo("amplitude_damping", p, drop_zero=False)
    assert rep.tp_residual() < 1e-14
    assert np.allclose(rep[1], 0.5 * np.sqrt(p) * SPLUS)


def test_named_operator_forms():
    pf = 0.3
    rep = zoo("bit_flip", pf)
    assert np.allclose(rep[0], np.sqrt(1 - pf) * I2)
    assert np.allclose(rep[1], np.sqrt(pf) * SX)
    r = np.sqrt(1 - 0.36)
    g = zoo("amplitude_damping", 0.36)
    assert g.k == 2
    assert np.allclose(g[0], 0.5 * (1 + r) * I2 + 0.5 * (1 - r) * SZ)


def test_degenerate_probability_drops_zero_operator():
    rep = zoo("phase_flip", 0.0)
    assert rep.k == 1
    assert np.allclose(rep[0], I2)
    assert zoo("phase_flip", 0.0, drop_zero=False).k == 2


def test_zoo_errors():
    with pytest.raises(UnknownName):
        zoo("nonsense", 0.1)
    with pytest.raises(BadArity):
        zoo("bit_flip")
    with pytest.raises(ParamOutOfRange):
        zoo("bit_flip", 1.5)


def test_gauge_identity_and_phase():
    rep = zoo("depolarizing", 0.4)
    same = gauge_transform(rep, np.eye(rep.k))
    assert np.array_equal(same.ops, rep.ops)
    u = zoo("unitary", haar_unitary(2, np.random.default_rng(1)))
    shifted = gauge_transform(u, np.exp(0.7j))
    assert np.allclose(shifted[0], np.exp(0.7j) * u[0])


def test_gauge_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gauge_transform(zoo("phase_flip", 0.3), np.eye(3))


@given(channels(), seeds)
def test_gauge_transform_keeps_channel(rep, seed):
    u = haar_unitary(rep.k, np.random.default_rng(seed))
    g = gauge_transform(rep, u)
    assert choi(g).distance(choi(rep)) < 1e-10
    rho = random_state(np.random.default_rng(seed), rep.dim)
    assert np.allclose(g.apply(rho), rep.apply(rho), atol=1e-12)


def test_choi_examples():
    c = choi(zoo("identity"))
    psi = maximally_entangled(2)
    assert np.allclose(c.matrix, np.outer(psi, psi.conj()))
    assert np.allclose(choi(zoo("depolarizing", 1.0)).matrix, np.eye(4) / 4)
    c = choi(zoo("phase_flip", 0.5))
    assert c.rank() == 2
    assert np.allclose(np.sort(c.eigenvalues())[::-1], [0.5, 0.5, 0, 0], atol=1e-14)


def test_canonical_rep_of_identity_is_identity():
    rep = canonical_rep(choi(zoo("identity")))
    assert rep.k == 1
    assert np.allclose(rep[0], I2)


@given(channels())
@settings(max_examples=50)
def test_canonical_rep_round_trip(rep):
    c = choi(rep)
    back = canonical_rep(c)
    assert back.k == rep.k
    assert choi(back).distance(c) < 1e-10
    assert same_channel(back, rep)


@given(st.integers(1, 3), seeds)
def test_random_channel_kraus_number(d, seed):
    k = 1 + seed % (d * d)
    rep = random_channel(d, k, seed)
    v = validate(rep)
    assert v.trace_preserving and v.kraus_number_ok and rep.k == k
    assert np.array_equal(random_channel(d, k, seed).ops, rep.ops)


def test_random_channel_shapes():
    u = random_channel(2, 1, 3)
    assert np.allclose(u[0].conj().T @ u[0], I2)
    full = random_channel(2, 4, 3)
    assert choi(full).rank() == 4
    with pytest.raises(BadArity):
        random_channel(2, 5, 0)


@given(channels())
@settings(max_examples=25)
def test_json_round_trip(rep):
    text = json.dumps(rep_to_json(rep))
    back = rep_from_json(json.loads(text))
    assert np.array_equal(back.ops, rep.ops)
    seq = sequence_from_json({"channels": [rep_to_json(rep)] * 2})
    assert len(seq) == 2 and np.array_equal(seq[1].ops, rep.ops)


def test_json_dimension_check():
    obj = rep_to_json(zoo("phase_flip", 0.2))
    obj["dim"] = 3
    with pytest.raises(DimensionMismatch):
        rep_from_json(obj)


def test_ops_are_read_only():
    rep = zoo("phase_flip", 0.2)
    with pytest.raises(ValueError):
        rep.ops[0, 0, 0] = 5
