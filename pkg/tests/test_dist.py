import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csent import dist, qmat, states
from csent.dist import DistanceKind
from csent.errors import ShapeError, UnsupportedKindError

import oracles


def test_fidelity_matches_sqrtm_oracle():
    for seed in range(10):
        a = qmat.random_density(4, seed=seed)
        b = qmat.random_density(4, seed=seed + 100)
        assert abs(dist.fidelity(a, b) - oracles.fidelity_sqrtm(a, b)) < 1e-8


def test_fidelity_pure_states_is_overlap():
    u, v = qmat.random_pure(3, 1), qmat.random_pure(3, 2)
    f = dist.fidelity(np.outer(u, u.conj()), np.outer(v, v.conj()))
    assert abs(f - abs(np.vdot(u, v))) < 1e-7


def test_bures_extremes():
    rho = qmat.random_density(4, seed=1)
    assert dist.bures_sq(rho, rho) < 1e-12
    assert abs(dist.bures_sq(np.diag([1.0, 0]), np.diag([0.0, 1])) - 2) < 1e-15


def test_trace_and_hs_orthogonal_states():
    a, b = np.diag([1.0, 0]), np.diag([0.0, 1])
    assert abs(dist.trace_distance(a, b) - 1) < 1e-15
    assert abs(dist.hs_distance(a, b) - np.sqrt(2)) < 1e-15


def test_relative_entropy():
    a = np.diag([0.5, 0.5])
    b = np.diag([0.9, 0.1])
    ref = 0.5 * np.log(0.5 / 0.9) + 0.5 * np.log(0.5 / 0.1)
    assert abs(dist.relative_entropy(a, b) - ref) < 1e-14
    assert dist.relative_entropy(a, np.diag([1.0, 0.0])) == float("inf")


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        dist.fidelity(np.eye(2) / 2, np.eye(3) / 3)


def test_kind_parsing_and_optimizable():
    assert DistanceKind.parse("hilbert-schmidt") is DistanceKind.HILBERT_SCHMIDT
    assert DistanceKind.parse("bures") is DistanceKind.BURES_SQ
    with pytest.raises(UnsupportedKindError):
        dist.require_optimizable("trace")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bures_and_trace_contract_under_channels(seed):
    rng = np.random.default_rng(seed)
    a, b = qmat.random_density(4, seed=rng), qmat.random_density(4, seed=rng)
    k = qmat.random_kraus(4, int(rng.integers(1, 5)), rng)
    fa, fb = qmat.apply_kraus(a, k), qmat.apply_kraus(b, k)
    assert dist.bures_sq(fa, fb) <= dist.bures_sq(a, b) + 1e-9
    assert dist.trace_distance(fa, fb) <= dist.trace_distance(a, b) + 1e-9


def test_pure_ancilla_invariance():
    a, b = qmat.random_density(3, seed=1), qmat.random_density(3, seed=2)
    for kind in ("bures", "hs", "trace", "relative_entropy"):
        rep = dist.pure_ancilla_invariance_check(kind, a, b, tol=1e-9)
        assert rep.passed, rep


def test_hs_noncontractivity_witness():
    w = dist.hs_noncontractivity_witness()
    assert abs(w.before - 1) < 1e-12
    assert abs(w.after - np.sqrt(2)) < 1e-12
    assert w.bures_after <= w.bures_before + 1e-15
    # scaling identity: tracing out a d-dimensional maximally mixed factor multiplies by sqrt(d)
    for d in (3, 4):
        wd = dist.hs_noncontractivity_witness(d)
        assert abs(wd.ratio - np.sqrt(d)) < 1e-12
