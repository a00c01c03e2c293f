import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csent import qmat, states
from csent.errors import DomainError, NormalizationError, NotPSDError, ShapeError
from csent.qmat import Layout
from csent.states import MultipartiteState

import oracles


def test_validation_errors():
    lay = states.TWO_QUBITS
    with pytest.raises(NotPSDError, match="PSD"):
        MultipartiteState(np.diag([0.6, 0.5, 0.0, -0.1]), lay)
    with pytest.raises(NormalizationError):
        MultipartiteState(np.eye(4) / 2, lay)
    with pytest.raises(DomainError):
        MultipartiteState(np.triu(np.ones((4, 4))) / 4, lay)
    with pytest.raises(ShapeError):
        MultipartiteState(np.eye(3) / 3, lay)


def test_dimension_cap():
    lay = Layout.of(("a", 16, "A"), ("b", 17, "B"))
    with pytest.raises(ShapeError):
        MultipartiteState(np.eye(272) / 272, lay, check=False)


def test_schmidt_reconstructs():
    psi = qmat.random_pure(6, seed=1)
    sf = states.schmidt(psi, (2, 3))
    assert np.allclose(sf.reconstruct(), psi)
    assert np.all(np.diff(sf.coefficients) <= 0)
    assert abs(np.sum(sf.coefficients ** 2) - 1) < 1e-14
    with pytest.raises(NormalizationError):
        states.schmidt(2 * psi, (2, 3))


def test_bell_schmidt_coefficients():
    sf = states.schmidt(states.BELL["phi+"])
    assert np.allclose(sf.coefficients, [2 ** -0.5, 2 ** -0.5])


def test_werner_matches_reference_and_ppt_threshold():
    for p in (0.0, 0.2, 1 / 3, 0.5, 0.9):
        rho = states.werner(p)
        assert np.max(np.abs(rho.matrix - oracles.singlet_werner(p))) < 1e-15
        # partial transpose spectrum {(1+p)/4 x3, (1-3p)/4} by explicit index loops
        pt = oracles.partial_transpose_loops(rho.matrix, 2, 2)
        assert abs(np.linalg.eigvalsh(pt).min() - (1 - 3 * p) / 4) < 1e-14
        res = states.is_ppt(rho)
        assert abs(res.min_eigenvalue - (1 - 3 * p) / 4) < 1e-14
        assert res.ppt == (p <= 1 / 3 + 1e-12)


def test_partial_transpose_matches_loops():
    rho = qmat.random_density(6, seed=2)
    assert np.array_equal(states.partial_transpose(rho, 2, 3), oracles.partial_transpose_loops(rho, 2, 3))


def test_concurrence_werner_and_wootters_oracle():
    assert abs(states.concurrence_2q(states.werner(2 / 3)) - 0.5) < 1e-12
    assert states.concurrence_2q(states.werner(0.3)) == 0.0
    assert abs(states.concurrence_2q(states.bell_state()) - 1) < 1e-12
    for seed in range(20):
        rho = states.random_mixed_state(seed=seed)
        assert abs(states.concurrence_2q(rho) - oracles.wootters_concurrence(rho.matrix)) < 1e-9


def test_closed_form_bures_anchor():
    assert abs(states.bures_entanglement_2q_closed_form(1.0) - (2 - np.sqrt(2))) < 1e-15
    assert states.bures_entanglement_2q_closed_form(0.0) == 0.0
    assert abs(states.bures_entanglement_2q_closed_form(0.3) - oracles.bures_closed_form(0.3)) < 1e-15


def test_make_cc_errors_and_diagonal():
    with pytest.raises(DomainError):
        states.make_cc(np.eye(2), np.eye(2), [[0.5, 0.6], [0.0, -0.1]])
    with pytest.raises(DomainError):
        states.make_cc(np.eye(2), np.eye(2), [[0.5, 0.6], [0.0, 0.0]])
    rho = states.make_cc(np.eye(2), np.eye(2), [[0.25, 0.25], [0.5, 0.0]])
    assert np.allclose(rho.matrix, np.diag([0.25, 0.25, 0.5, 0.0]))


def test_separable_states_are_ppt():
    for seed in range(10):
        assert states.is_ppt(states.random_separable_state(seed=seed)).ppt


def test_purify_marginal():
    rho = states.random_mixed_state(rank=3, seed=4)
    psi, lay = states.purify(rho)
    assert lay.dims == (2, 2, 3)
    back, _ = qmat.partial_trace(np.outer(psi, psi.conj()), lay, ["r"])
    assert np.max(np.abs(back - rho.matrix)) < 1e-13


def test_local_unitary_and_ancilla():
    rho = states.random_mixed_state(seed=1)
    ua, ub = qmat.random_unitary(2, 1), qmat.random_unitary(2, 2)
    out = rho.local_unitary(ua, ub)
    assert np.allclose(out.matrix, np.kron(ua, ub) @ rho.matrix @ np.kron(ua, ub).conj().T)
    ext = rho.with_ancilla("anc", 3, "B")
    assert ext.dims == (2, 6)
    assert np.allclose(ext.ptrace(["anc"]).matrix, rho.matrix)


def test_as_bipartite_groups_parties():
    lay = Layout.of(("a", 2, "A"), ("b", 2, "B"), ("c", 2, "A"))
    rho = MultipartiteState(qmat.random_density(8, seed=0), lay)
    bp = rho.as_bipartite()
    assert bp.layout.dims == (4, 2)
    m, _ = qmat.permute(rho.matrix, lay, ["a", "c", "b"])
    assert np.array_equal(bp.matrix, m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_random_states_valid(seed, rank):
    rho = states.random_mixed_state(rank=rank, seed=seed)
    assert rho.rank() == rank
    states.validate_density(rho.matrix)
