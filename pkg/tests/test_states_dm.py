import numpy as np
import pytest

from qnetsim.engine import make_rng
from qnetsim.errors import CapacityError
from qnetsim.states import DmState, bell_pair, depolarizing, gate, init_plus, init_zeros


def test_bell_dm_is_outer_product_of_ket():
    dm = bell_pair("dm")
    ket = bell_pair("ket").vector
    np.testing.assert_allclose(dm.matrix, np.outer(ket, ket.conj()), atol=1e-12)


def test_dm_stays_physical_under_random_circuits(rng):
    from conftest import random_clifford_ops

    for _ in range(20):
        n = int(rng.integers(1, 5))
        st = init_plus(n, "dm")
        for g in random_clifford_ops(rng, n, 20):
            st.apply_gate(g)
        assert st.trace_error() < 1e-9
        assert st.hermiticity_error() < 1e-9
        eigs = np.linalg.eigvalsh(st.matrix)
        assert eigs.min() > -1e-9


def test_depolarize_p0_is_identity():
    st = init_plus(1, "dm")
    before = st.matrix.copy()
    st.depolarize(0, 0.0)
    np.testing.assert_allclose(st.matrix, before, atol=1e-15)


def test_depolarize_p1_fully_mixes():
    st = init_plus(1, "dm")
    st.depolarize(0, 1.0)
    np.testing.assert_allclose(st.matrix, np.eye(2) / 2, atol=1e-12)


def test_depolarize_half_gives_three_quarters_fidelity():
    st = init_plus(1, "dm")
    st.depolarize(0, 0.5)
    assert st.fidelity(init_plus(1, "ket")) == pytest.approx(0.75, abs=1e-12)


def test_depolarize_acts_on_one_qubit_of_many():
    st = bell_pair("dm")
    st.depolarize(1, 1.0)
    # Bob's side fully mixed; Alice's marginal still I/2, state = I/4
    np.testing.assert_allclose(st.matrix, np.eye(4) / 4, atol=1e-12)


def test_apply_noise_validates_probability():
    st = init_plus(1, "dm")
    with pytest.raises(ValueError):
        st.depolarize(0, 1.5)
    with pytest.raises(ValueError):
        depolarizing(-0.1)


def test_partial_trace_discard_always_allowed():
    st = bell_pair("dm")
    st.discard(0)
    assert st.n == 1
    np.testing.assert_allclose(st.matrix, np.eye(2) / 2, atol=1e-12)


def test_measure_and_remove_matches_collapse():
    rng = make_rng(0, "m")
    st = bell_pair("dm")
    o = st.measure_remove(0, "Z", rng)
    assert st.n == 1
    expected = np.zeros((2, 2))
    expected[o, o] = 1
    np.testing.assert_allclose(st.matrix, expected, atol=1e-12)


def test_capacity_guard():
    with pytest.raises(CapacityError):
        init_zeros(16, "dm")


def test_fidelity_between_dm_states():
    a = init_plus(1, "dm")
    b = init_plus(1, "dm")
    assert a.fidelity(b) == pytest.approx(1.0, abs=1e-12)
