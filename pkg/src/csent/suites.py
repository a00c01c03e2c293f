"""Seeded property suites behind ``csent verify``.

Each suite returns per-property sample counts, failure counts and the worst
residual. Fast mode halves the sample counts and keeps every tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cse, dist, ent, locc, qmat, states


@dataclass
class PropertyResult:
    name: str
    tol: float
    count: int = 0
    failures: int = 0
    worst: float = 0.0

    def record(self, residual: float, ok: bool | None = None):
        self.count += 1
        self.worst = max(self.worst, float(residual))
        if ok is None:
            ok = residual <= self.tol
        if not ok:
            self.failures += 1

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class SuiteResult:
    suite: str
    seed: int
    fast: bool
    properties: list[PropertyResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def prop(self, name: str, tol: float) -> PropertyResult:
        p = PropertyResult(name, tol)
        self.properties.append(p)
        return p

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)


def _n(count: int, fast: bool) -> int:
    return max(1, count // 2) if fast else count


def _seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def theorem1(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("theorem1", seed, fast)
    tol = 1e-2
    p1 = res.prop("bures_entanglement non-increasing under random LOCC", tol)
    for s in _seeds(seed, _n(10, fast)):
        rng = np.random.default_rng(s)
        rho = states.random_mixed_state(seed=rng)
        proto = locc.random_locc(rng, depth=int(rng.integers(1, 4)))
        r = locc.monotonicity_trial(rho, proto, "bures_entanglement", tol, seed=s)
        p1.record(r.after - r.before, r.passed)
    p2 = res.prop("cse_hs non-increasing under random LOCC on pure inputs", tol)
    for s in _seeds(seed + 1, _n(4, fast)):
        rng = np.random.default_rng(s)
        rho = states.random_pure_state(seed=rng)
        proto = locc.random_locc(rng, depth=int(rng.integers(1, 4)))
        r = locc.monotonicity_trial(rho, proto, "cse_hs", tol, seed=s)
        p2.record(r.after - r.before, r.passed)
    return res


def theorem2(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("theorem2", seed, fast)
    p = res.prop("cse value = direct discord = pure entanglement (Bures)", 5e-3)
    vecs = [states.random_pure_state(seed=s).pure_vector() for s in _seeds(seed, _n(10, fast))]
    vecs += [states.schmidt_family(k * np.pi / 16) for k in range(1, 5)]
    for i, v in enumerate(vecs):
        r = ent.theorem2_check(v, seed=seed + i)
        p.record(r.max_deviation)
    return res


def theorem3(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("theorem3", seed, fast)
    p = res.prop("E_B - tol <= cse value <= roof + tol", 1e-2)
    g = res.prop("roof - E_B sandwich gap", 2e-2)
    rhos = []
    for s in _seeds(seed, _n(6, fast)):
        rng = np.random.default_rng(s)
        rhos.append(states.random_mixed_state(rank=int(rng.integers(2, 5)), seed=rng))
    rhos += [states.werner(q) for q in (0.4, 0.7)]
    for i, rho in enumerate(rhos):
        r = ent.theorem3_sandwich(rho, seed=seed + i)
        p.record(max(r.lower - r.cse_value, r.cse_value - r.upper, 0.0),
                 r.lower - r.tol <= r.cse_value <= r.upper + r.tol)
        g.record(r.max_gap)
    return res


def _random_channel(d: int, rng) -> np.ndarray:
    return qmat.random_kraus(d, int(rng.integers(1, 5)), rng)


def distances(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("distances", seed, fast)
    tol = 1e-9
    pb = res.prop("Bures contractive under random channels", tol)
    pt = res.prop("trace distance contractive under random channels", tol)
    pa = {k: res.prop(f"{k} pure-ancilla invariance", tol) for k in ("bures", "hs", "trace")}
    for s in _seeds(seed, _n(200, fast)):
        rng = np.random.default_rng(s)
        a = qmat.random_density(4, seed=rng)
        b = qmat.random_density(4, seed=rng)
        k = _random_channel(4, rng)
        fa, fb = qmat.apply_kraus(a, k), qmat.apply_kraus(b, k)
        pb.record(max(0.0, dist.bures_sq(fa, fb) - dist.bures_sq(a, b)))
        pt.record(max(0.0, dist.trace_distance(fa, fb) - dist.trace_distance(a, b)))
        for kind, prop in pa.items():
            rep = dist.pure_ancilla_invariance_check(kind, a, b, tol=tol)
            prop.record(max(rep.deviations))
    return res


def cse_suite(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("cse", seed, fast)
    n = _n(200, fast)
    names = ("canonical_pure_cse", "canonical_mixed_cse", "separable_cse", "flagged_mixture_cse")
    props = {k: res.prop(k, 1e-9) for k in names}
    marg = {k: res.prop(f"{k} marginal recovery", 1e-10) for k in names}
    for s in _seeds(seed, n):
        rng = np.random.default_rng(s)
        for name, (cand, orig) in _cse_samples(rng).items():
            v = cse.verify_cse(cand, orig)
            props[name].record(max(v.swap_residual_1, v.swap_residual_2))
            marg[name].record(v.marginal_residual)
    return res


def _cse_samples(rng) -> dict:
    psi = states.random_pure_state(seed=rng)
    rho = states.random_mixed_state(rank=int(rng.integers(1, 5)), seed=rng)
    terms = int(rng.integers(1, 5))
    sa = np.array([qmat.random_pure(2, rng) for _ in range(terms)])
    sb = np.array([qmat.random_pure(2, rng) for _ in range(terms)])
    w = rng.dirichlet(np.ones(terms))
    sep = states.make_separable(w, sa, sb)
    parts_in = [states.random_pure_state(seed=rng) for _ in range(int(rng.integers(1, 5)))]
    probs = rng.dirichlet(np.ones(len(parts_in)))
    mix = sum(p * s.matrix for p, s in zip(probs, parts_in))
    return {
        "canonical_pure_cse": (cse.canonical_pure_cse(psi), psi),
        "canonical_mixed_cse": (cse.canonical_mixed_cse(rho), rho),
        "separable_cse": (cse.separable_cse_local(w, sa, sb), sep),
        "flagged_mixture_cse": (cse.flagged_mixture_cse([cse.canonical_pure_cse(s) for s in parts_in], probs),
                                states.MultipartiteState(mix, states.TWO_QUBITS)),
    }


def hs_noncontractive(seed: int = 0, fast: bool = False) -> SuiteResult:
    res = SuiteResult("hs-noncontractive", seed, fast)
    w = dist.hs_noncontractivity_witness()
    res.prop("HS distance before = 1", 1e-12).record(abs(w.before - 1.0))
    res.prop("HS distance after = sqrt(2)", 1e-12).record(abs(w.after - np.sqrt(2.0)))
    res.prop("Bures distance non-increasing", 0.0).record(max(0.0, w.bures_after - w.bures_before))
    res.notes.append(f"channel: {w.channel}")
    res.notes.append(f"rho = |0><0| (x) I/2, sigma = |1><1| (x) I/2")
    res.notes.append(f"hs before = {w.before!r}, hs after = {w.after!r}")
    res.notes.append(f"bures_sq before = {w.bures_before!r}, bures_sq after = {w.bures_after!r}")
    return res


SUITES = {
    "theorem1": theorem1,
    "theorem2": theorem2,
    "theorem3": theorem3,
    "distances": distances,
    "cse": cse_suite,
    "hs-noncontractive": hs_noncontractive,
}
