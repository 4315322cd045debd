"""Backend-equivalence properties: the three representations must agree on
every observable quantity for Clifford circuits."""
import numpy as np
import pytest

from conftest import random_clifford_ops
from qnetsim.engine import make_rng
from qnetsim.states import gate, init_plus, init_zeros, snap_probability
from qnetsim.states.gates import BASIS_TO_Z


def rotated_prob(state, qubit, basis):
    probe = state.copy()
    for kind in BASIS_TO_Z[basis][0]:
        probe.apply_gate(gate(kind, qubit))
    return probe.z_prob_one(qubit)


def test_backend_equivalence_on_random_circuits():
    rng = make_rng(77, "equiv")
    for trial in range(120):
        n = int(rng.integers(1, 9))
        ops = random_clifford_ops(rng, n, int(rng.integers(1, 40)))
        ket = init_zeros(n, "ket")
        dm = init_zeros(n, "dm")
        stab = init_zeros(n, "stab")
        for g in ops:
            for st in (ket, dm, stab):
                st.apply_gate(g)
        for _ in range(int(rng.integers(1, 5))):
            q = int(rng.integers(n))
            basis = str(rng.choice(["X", "Y", "Z"]))
            pk = rotated_prob(ket, q, basis)
            pd = rotated_prob(dm, q, basis)
            ps = rotated_prob(stab, q, basis)
            # ket and dm agree to float precision
            assert abs(pk - pd) < 1e-9
            # stabilizer probabilities are exactly 0, 1/2, or 1
            assert ps in (0.0, 0.5, 1.0)
            assert snap_probability(pk) == ps
            draws = [make_rng(trial, f"{q}{basis}") for _ in range(3)]
            outcomes = {
                ket.measure(q, basis, draws[0]),
                dm.measure(q, basis, draws[1]),
                stab.measure(q, basis, draws[2]),
            }
            assert len(outcomes) == 1
        assert abs(stab.fidelity(ket) - 1) < 1e-9
        assert abs(dm.fidelity(ket) - 1) < 1e-9


def test_depolarizing_unraveling_reproduces_exact_map():
    """Trajectory average over ket runs matches the dm channel at p=0.5."""
    p = 0.5
    rng = make_rng(123, "unravel")
    reference = init_plus(1, "ket")
    total = 0.0
    trials = 100_000
    for _ in range(trials):
        st = init_plus(1, "ket")
        st.depolarize(0, p, rng)
        total += st.fidelity(reference)
    exact = init_plus(1, "dm")
    exact.depolarize(0, p)
    assert exact.fidelity(reference) == pytest.approx(0.75, abs=1e-12)
    assert abs(total / trials - 0.75) < 0.01


def test_erasure_draw_statistics():
    from qnetsim.states import erase_qubit_event

    rng = make_rng(5, "erase")
    assert not any(erase_qubit_event(rng, 0.0) for _ in range(100))
    assert all(erase_qubit_event(rng, 1.0) for _ in range(100))
    losses = sum(erase_qubit_event(rng, 0.5) for _ in range(10_000))
    assert abs(losses / 10_000 - 0.5) < 0.02


def test_backend_mismatch_rejected():
    from qnetsim.errors import BackendMismatchError

    with pytest.raises(BackendMismatchError):
        init_plus(1, "ket").tensor(init_plus(1, "stab"))
