import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rblab import channels as ch
from rblab import clifford as cl
from rblab.errors import ContractError, DomainError

import oracles

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(d=st.sampled_from([2, 4]), seed=seeds)
def test_representation_round_trips(d, seed):
    s = ch.random_channel(d, np.random.default_rng(seed))
    np.testing.assert_allclose(ch.choi_to_super(ch.super_to_choi(s)), s, atol=1e-12)
    np.testing.assert_allclose(ch.kraus_to_super(ch.super_to_kraus(s)), s, atol=1e-10)
    assert ch.is_cptp(s)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_kraus_convention_matches_oracle(seed):
    kraus = oracles.random_kraus(2, np.random.default_rng(seed))
    np.testing.assert_allclose(ch.kraus_to_super(kraus), oracles.kraus_superop(kraus),
                               atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_apply_matches_kraus_action(seed):
    rng = np.random.default_rng(seed)
    kraus = oracles.random_kraus(2, rng)
    rho = ch.random_density(2, rng)
    direct = sum(k @ rho @ k.conj().T for k in kraus)
    np.testing.assert_allclose(ch.apply(ch.kraus_to_super(kraus), rho), direct, atol=1e-13)


@pytest.mark.parametrize("p,probs,fid", [
    (0.9, [0.925, 0.025, 0.025, 0.025], 0.95),
    (1.0, [1.0, 0.0, 0.0, 0.0], 1.0),
    (0.0, [0.25, 0.25, 0.25, 0.25], 0.5),
])
def test_depolarizing_examples(p, probs, fid):
    s = ch.depolarizing(p, 2)
    np.testing.assert_allclose(ch.pauli_probabilities(s), probs, atol=1e-14)
    assert ch.average_fidelity(s) == pytest.approx(fid, abs=1e-14)
    assert ch.depolarizing_parameter(s) == pytest.approx(p, abs=1e-14)
    assert ch.error_rate(s) == pytest.approx(1 - fid, abs=1e-14)


@pytest.mark.parametrize("p", [-0.5, 1.01])
def test_depolarizing_domain(p):
    with pytest.raises(DomainError):
        ch.depolarizing(p, 2)


def test_depolarizing_lower_edge_is_cptp():
    assert ch.is_cptp(ch.depolarizing(-1 / 3, 2))


def test_amplitude_damping_is_cptp_but_not_unital():
    s = ch.amplitude_damping(0.2)
    assert ch.is_cptp(s)
    assert not ch.is_pauli_channel(s)
    out = ch.apply(s, np.eye(2) / 2)
    assert out[0, 0].real == pytest.approx(0.6)


@pytest.mark.parametrize("d", [2, 4])
def test_twirl_is_depolarizing_with_same_fidelity(d, rng):
    s = ch.random_channel(d, rng)
    t = ch.twirl_exact(s, cl.clifford_group(int(np.log2(d))))
    p = ch.depolarizing_parameter(s)
    np.testing.assert_allclose(t, ch.depolarizing(p, d), atol=1e-12)
    assert ch.average_fidelity(t) == pytest.approx(ch.average_fidelity(s), abs=1e-13)


def test_twirl_matches_dense_oracle(rng):
    s = ch.random_channel(2, rng)
    np.testing.assert_allclose(ch.twirl_exact(s, cl.clifford_group(1)),
                               oracles.twirl(s, oracles.single_qubit_cliffords()), atol=1e-12)


def test_twirl_rejects_partial_group(rng):
    with pytest.raises(ContractError):
        ch.twirl_exact(np.eye(4), cl.clifford_group(1).elements[:5])


@pytest.mark.parametrize("q", [[0.7, 0.1, 0.1, 0.1], [0.5, 0.0, 0.5, 0.0]])
def test_pauli_channel_round_trip(q):
    s = ch.pauli_channel_to_super(q)
    assert ch.is_pauli_channel(s)
    np.testing.assert_allclose(ch.pauli_probabilities(s), q, atol=1e-14)
    chi = ch.chi_matrix(s)
    np.testing.assert_allclose(chi, np.diag(q), atol=1e-14)
    assert ch.chi00(s) == pytest.approx(q[0])


def test_pauli_channel_validation():
    with pytest.raises(ContractError):
        ch.pauli_channel([0.5, 0.6, 0, 0])
    with pytest.raises(ContractError):
        ch.pauli_channel([1.2, -0.2, 0, 0])


def test_not_cp_detected():
    transpose = np.eye(4)[[0, 2, 1, 3]]
    assert ch.is_trace_preserving(transpose)
    assert not ch.is_completely_positive(transpose)
    with pytest.raises(ContractError):
        ch.check_cptp(transpose)


def test_compose_and_adjoint(rng):
    a, b = ch.random_channel(2, rng), ch.random_channel(2, rng)
    rho = ch.random_density(2, rng)
    np.testing.assert_allclose(ch.apply(ch.compose(a, b), rho), ch.apply(a, ch.apply(b, rho)),
                               atol=1e-13)
    e = ch.random_density(2, rng)
    lhs = np.trace(e @ ch.apply(a, rho))
    rhs = np.trace(ch.apply(ch.adjoint(a), e) @ rho)
    assert lhs == pytest.approx(rhs, abs=1e-13)


@pytest.mark.parametrize("kind", ["super", "kraus", "pauli"])
def test_json_round_trip(kind):
    s = ch.depolarizing(0.8, 2) if kind == "pauli" else ch.amplitude_damping(0.3)
    obj = json.loads(json.dumps(ch.channel_to_json(s, kind)))
    np.testing.assert_allclose(ch.channel_from_json(obj), s, atol=1e-12)


def test_check_density_rejects_bad_state():
    with pytest.raises(ContractError):
        ch.check_density(np.diag([1.2, -0.2]))


@pytest.mark.parametrize("p", [0.98, 0.9, 0.5])
def test_pauli_error_probability_from_r(p):
    s = ch.depolarizing(p, 2)
    assert ch.pauli_error_rate(ch.error_rate(s)) == pytest.approx(
        1 - ch.pauli_probabilities(s)[0], abs=1e-14)
