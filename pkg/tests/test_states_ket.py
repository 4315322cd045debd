import numpy as np
import pytest

from qnetsim.engine import make_rng
from qnetsim.errors import CapacityError, EntangledDiscardError
from qnetsim.states import (
    ClusterSpec,
    KetState,
    bell_pair,
    gate,
    init_plus,
    init_zeros,
    prepare_cluster,
)

S2 = 1 / np.sqrt(2)


def test_init_plus_single_qubit_amplitudes():
    st = init_plus(1, "ket")
    np.testing.assert_allclose(st.vector, [S2, S2], atol=1e-12)


def test_init_plus_three_qubits_uniform():
    st = init_plus(3, "ket")
    np.testing.assert_allclose(st.vector, np.full(8, 1 / np.sqrt(8)), atol=1e-12)


def test_bell_pair_amplitudes():
    st = bell_pair("ket")
    np.testing.assert_allclose(st.vector, [S2, 0, 0, S2], atol=1e-12)


def test_h_on_zero_gives_plus():
    st = init_zeros(1, "ket")
    st.apply_gate(gate("H", 0))
    np.testing.assert_allclose(st.vector, [S2, S2], atol=1e-12)


def test_cz_on_plus_plus_gives_two_qubit_cluster():
    st = init_plus(2, "ket")
    st.apply_gate(gate("CZ", 0, 1))
    np.testing.assert_allclose(st.vector, [0.5, 0.5, 0.5, -0.5], atol=1e-12)


def test_x_flips_zero():
    st = init_zeros(1, "ket")
    st.apply_gate(gate("X", 0))
    np.testing.assert_allclose(st.vector, [0, 1], atol=1e-12)


def test_gate_target_out_of_range():
    st = init_plus(2, "ket")
    with pytest.raises(IndexError):
        st.apply_gate(gate("H", 2))


def test_measure_plus_is_unbiased():
    rng = make_rng(0, "born")
    ones = 0
    for _ in range(10_000):
        st = init_plus(1, "ket")
        ones += st.measure(0, "Z", rng)
    assert abs(ones / 10_000 - 0.5) < 0.02


def test_bell_outcomes_always_correlated():
    rng = make_rng(1, "bell")
    for _ in range(200):
        st = bell_pair("ket")
        assert st.measure(0, "Z", rng) == st.measure(1, "Z", rng)


def test_y_eigenstate_measures_deterministically():
    # |y+> = S H |0> is the +1 eigenstate of Y
    st = init_zeros(1, "ket")
    st.apply_gate(gate("H", 0))
    st.apply_gate(gate("S", 0))
    assert st.measure(0, "Y") == 0


def test_invalid_basis_rejected():
    st = init_plus(1, "ket")
    with pytest.raises(ValueError):
        st.measure(0, "Q", make_rng(0, "x"))


def test_tensor_zero_with_one():
    a = init_zeros(1, "ket")
    b = init_zeros(1, "ket")
    b.apply_gate(gate("X", 0))
    joint = a.tensor(b)
    # little-endian: first factor is qubit 0, so |0> (x) |1> peaks at index 2
    np.testing.assert_allclose(joint.vector, [0, 0, 1, 0], atol=1e-12)


def test_tensor_dimension_bookkeeping():
    joint = init_plus(2, "ket").tensor(init_plus(3, "ket"))
    assert joint.n == 5


def test_discard_after_measurement_leaves_partner_value():
    rng = make_rng(3, "d")
    st = bell_pair("ket")
    outcome = st.measure(0, "Z", rng)
    st.discard(0)
    assert st.n == 1
    expected = np.zeros(2)
    expected[outcome] = 1
    np.testing.assert_allclose(np.abs(st.vector), expected, atol=1e-9)


def test_discard_only_qubit_gives_empty_state():
    st = init_plus(1, "ket")
    st.measure(0, "Z", make_rng(0, "z"))
    st.discard(0)
    assert st.n == 0


def test_discard_entangled_rejected():
    with pytest.raises(EntangledDiscardError):
        bell_pair("ket").discard(0)


def test_fidelity_identical_and_orthogonal():
    plus = init_plus(1, "ket")
    assert plus.fidelity(init_plus(1, "ket")) == pytest.approx(1.0, abs=1e-12)
    zero = init_zeros(1, "ket")
    one = init_zeros(1, "ket")
    one.apply_gate(gate("X", 0))
    assert zero.fidelity(one) == pytest.approx(0.0, abs=1e-12)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        init_plus(1, "ket").fidelity(init_plus(2, "ket"))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        init_plus(31, "ket")
    # configurable
    st = init_plus(4, "ket", max_qubits=4)
    with pytest.raises(CapacityError):
        st.tensor(init_plus(1, "ket", max_qubits=4))


def test_prepare_cluster_1x2_amplitudes():
    st = prepare_cluster(ClusterSpec(1, 2), "ket")
    np.testing.assert_allclose(st.vector, [0.5, 0.5, 0.5, -0.5], atol=1e-12)


def test_prepare_cluster_edge_counts():
    assert len(list(ClusterSpec(2, 2).edges())) == 4
    assert len(list(ClusterSpec(1, 1).edges())) == 0
    # |E| = R(C-1) + C(R-1)
    assert len(list(ClusterSpec(3, 5).edges())) == 3 * 4 + 5 * 2


def test_prepare_cluster_1x1_is_plus():
    st = prepare_cluster(ClusterSpec(1, 1), "ket")
    np.testing.assert_allclose(st.vector, [S2, S2], atol=1e-12)


def test_evaluate_all_zeros():
    st = init_zeros(3, "ket")
    assert st.evaluate_all(make_rng(0, "e")) == "000"


def test_evaluate_all_bell_is_correlated():
    rng = make_rng(4, "e")
    for _ in range(100):
        bits = bell_pair("ket").evaluate_all(rng)
        assert bits in ("00", "11")


def test_evaluate_all_two_qubit_cluster_uniform():
    # amplitudes [1/2, 1/2, 1/2, -1/2]: all four outcomes equally likely
    rng = make_rng(5, "e")
    counts = {}
    for _ in range(4000):
        bits = prepare_cluster(ClusterSpec(1, 2), "ket").evaluate_all(rng)
        counts[bits] = counts.get(bits, 0) + 1
    assert set(counts) == {"00", "01", "10", "11"}
    for v in counts.values():
        assert abs(v / 4000 - 0.25) < 0.03


def test_normalization_preserved_by_random_circuits(rng):
    from conftest import random_clifford_ops

    for _ in range(30):
        n = int(rng.integers(1, 6))
        st = init_plus(n, "ket")
        for g in random_clifford_ops(rng, n, 25):
            st.apply_gate(g)
            assert st.norm_error() < 1e-9
        if st.n:
            st.measure(int(rng.integers(st.n)), "Z", rng)
            assert st.norm_error() < 1e-9
