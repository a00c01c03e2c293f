import numpy as np
import pytest

from csent import cse, ent, optimize, qmat, states
from csent.discord import _factor, geometric_discord
from csent.errors import DomainError, UnsupportedKindError
from csent.states import MultipartiteState

import oracles

E_BELL = 2 - np.sqrt(2)


def _fd_check(fun, x):
    _, g = fun(x)
    fd = optimize.central_difference(lambda xs: np.array([fun(v)[0] for v in xs]), x)
    return float(np.max(np.abs(g - fd)))


def test_pure_bures_entanglement_anchors():
    assert abs(ent.pure_bures_entanglement(states.BELL["phi+"]) - E_BELL) < 1e-15
    assert abs(oracles.pure_bures_entanglement_grid(states.BELL["phi+"]) - E_BELL) < 1e-12
    assert ent.pure_bures_entanglement(np.array([0, 0, 1, 0])) == 0.0
    psi = states.schmidt_family(np.pi / 6)
    assert abs(ent.pure_bures_entanglement(psi) - oracles.pure_bures_entanglement_grid(psi)) < 1e-4
    with pytest.raises(DomainError):
        ent.pure_bures_entanglement(states.werner(0.5))


def test_pure_hs_discord_matches_optimizer():
    psi = states.random_pure_state(seed=3)
    assert abs(ent.pure_hs_discord(psi) - geometric_discord(psi, "hs").value) < 1e-6


def test_separable_gradient_matches_central_differences():
    rho = states.random_mixed_state(seed=5)
    b = _factor(rho.matrix)
    fun = ent._separable_value_and_grad(b, 16, 2, 2)
    x = np.random.default_rng(0).standard_normal(2 * 16 * 4)
    assert _fd_check(fun, x) < 1e-6


@pytest.mark.parametrize("mode", ["roof", "cse_bures", "hs"])
def test_roof_gradients_match_central_differences(mode):
    rho = states.random_mixed_state(rank=3, seed=6)
    b = _factor(rho.matrix)
    fun = ent._roof_value_and_grad(b, 3, 9, 2, 2, mode)
    x = np.random.default_rng(1).standard_normal(2 * 27)
    assert _fd_check(fun, x) < 1e-6


def test_roof_ansatz_reconstructs_state():
    rho = states.random_mixed_state(rank=3, seed=8)
    b = _factor(rho.matrix)
    x = np.random.default_rng(2).standard_normal(2 * 27)
    ans = ent.RoofAnsatz(9, 3, x, b, (2, 2))
    w = ans.mixing()
    assert np.allclose(w @ w.conj().T, np.eye(3), atol=1e-12)
    assert np.max(np.abs(ans.decomposition().density() - rho.matrix)) < 1e-10


def test_separable_ansatz_is_a_state():
    x = np.random.default_rng(3).standard_normal(2 * 4 * 4)
    ans = ent.SeparableAnsatz(4, 2, 2, x)
    sigma = ans.state()
    assert abs(np.trace(sigma) - 1) < 1e-10
    assert states.is_ppt(MultipartiteState(sigma, states.TWO_QUBITS)).ppt
    assert abs(ans.weights.sum() - 1) < 1e-12


def test_bures_entanglement_examples():
    sep = states.random_separable_state(seed=1)
    assert ent.bures_entanglement(sep).value <= 1e-4
    assert abs(ent.bures_entanglement(states.bell_state()).value - E_BELL) < 5e-3
    c = (3 * 0.9 - 1) / 2
    assert abs(oracles.wootters_concurrence(states.werner(0.9).matrix) - c) < 1e-12
    val = ent.bures_entanglement(states.werner(0.9)).value
    assert abs(val - oracles.bures_closed_form(c)) < 1e-2


def test_bures_entanglement_high_restart_cross_check():
    # the closed form used as a reference is itself checked against a long optimizer run
    rho = states.random_mixed_state(rank=3, seed=17)
    c = oracles.wootters_concurrence(rho.matrix)
    val = ent.bures_entanglement(rho, restarts=24, seed=5).value
    assert abs(val - oracles.bures_closed_form(c)) < 1e-4


def test_fast_mode_halves_terms():
    rep = ent.bures_entanglement(states.werner(0.8), fast=True, restarts=2)
    assert rep.certificate.k == 8 and rep.bound_direction == "UpperBound"


def test_convex_roof_examples():
    psi = states.random_pure_state(seed=2)
    assert ent.convex_roof_bures(psi).value == ent.pure_bures_entanglement(psi)
    assert ent.convex_roof_bures(states.random_separable_state(seed=4)).value <= 1e-4
    rho = states.random_mixed_state(seed=9)
    rep = ent.convex_roof_bures(rho)
    assert rep.value >= ent.bures_entanglement(rho).value - 1e-3
    assert rep.residuals["reconstruction"] < 1e-10


def test_flagged_combination_matches_explicit_extension():
    v1 = states.random_pure_state(seed=1).pure_vector()
    v2 = states.random_pure_state(seed=2).pure_vector()
    p = np.array([0.3, 0.7])
    parts = [cse.canonical_pure_cse(v) for v in (v1, v2)]
    f = cse.flagged_mixture_cse(parts, p)
    full = geometric_discord(f.state, "bures", restarts=4).value
    blocks = [ent.pure_bures_entanglement(v) for v in (v1, v2)]
    assert abs(full - ent.combine_blocks("bures", p, blocks)) < 1e-6
    # fixed block weights would give the larger value sum_i p_i D_i
    assert full < float(np.dot(p, blocks))


def test_cse_discord_min_examples():
    psi = states.random_pure_state(seed=7)
    for kind in ("bures", "hs"):
        val = ent.cse_discord_min(psi, kind).value
        assert val <= geometric_discord(psi, kind).value + 1e-6
    sep = states.random_separable_state(seed=2)
    assert ent.cse_discord_min(sep, "bures").value <= 1e-4
    rho = states.random_mixed_state(seed=13)
    rep = ent.cse_discord_min(rho, "bures")
    lo = ent.bures_entanglement(rho).value
    hi = ent.convex_roof_bures(rho).value
    assert lo - 1e-2 <= rep.value <= hi + 1e-2
    assert rep.residuals["block_certification"] < 1e-6
    with pytest.raises(UnsupportedKindError):
        ent.cse_discord_min(rho, "trace")


def test_cse_certificate_extension_is_valid():
    rho = states.random_mixed_state(rank=2, seed=4)
    rep = ent.cse_discord_min(rho, "bures", m=2)
    ext = rep.certificate.extension()
    v = cse.verify_cse(ext, rho)
    assert v.passed
    direct = geometric_discord(ext.state, "bures", restarts=4).value
    assert abs(direct - rep.value) < 1e-6


def test_theorem2_examples():
    r = ent.theorem2_check(states.BELL["phi+"])
    assert r.passed and abs(r.cse_value - E_BELL) < 5e-3
    r = ent.theorem2_check(np.array([1, 0, 0, 0]))
    assert r.passed and max(r.cse_value, r.direct_discord, r.pure_entanglement) <= 1e-4
    r = ent.theorem2_check(states.schmidt_family(np.pi / 8))
    ref = 2 - 2 * np.cos(np.pi / 8)
    assert r.passed and abs(r.direct_discord - ref) < 5e-3
    with pytest.raises(UnsupportedKindError):
        ent.theorem2_check(states.BELL["phi+"], "hs")


def test_theorem3_examples():
    r = ent.theorem3_sandwich(states.werner(0.7))
    assert r.passed and r.max_gap <= 2e-2
    r = ent.theorem3_sandwich(states.random_separable_state(seed=3))
    assert r.passed and max(r.lower, r.cse_value, r.upper) <= 1e-3
    r = ent.theorem3_sandwich(states.bell_state())
    assert r.passed and abs(r.cse_value - E_BELL) < 1e-6


def test_convexity_on_mixtures():
    a = states.random_mixed_state(rank=2, seed=31)
    b = states.random_mixed_state(rank=2, seed=32)
    p = 0.4
    mix = MultipartiteState(p * a.matrix + (1 - p) * b.matrix, states.TWO_QUBITS)
    lhs = ent.cse_discord_min(mix, "bures").value
    rhs = p * ent.cse_discord_min(a, "bures").value + (1 - p) * ent.cse_discord_min(b, "bures").value
    assert lhs <= rhs + 1e-2


def test_local_unitary_invariance():
    rho = states.random_mixed_state(seed=41)
    moved = rho.local_unitary(qmat.random_unitary(2, 1), qmat.random_unitary(2, 2))
    for kind in ("bures", "hs"):
        a = ent.cse_discord_min(rho, kind, seed=3).value
        b = ent.cse_discord_min(moved, kind, seed=3).value
        assert abs(a - b) <= 1e-2


def test_reports_are_deterministic():
    rho = states.random_mixed_state(seed=5)
    a = ent.cse_discord_min(rho, "bures", seed=4)
    b = ent.cse_discord_min(rho, "bures", seed=4)
    assert a.value == b.value
    assert np.array_equal(a.certificate.states, b.certificate.states)
