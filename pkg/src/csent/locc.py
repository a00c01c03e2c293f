"""LOCC protocols with explicit classical flag registers.

A protocol is a list of steps applied to a labelled state. Measurement
outcomes are written to fresh flag factors owned by the measuring party;
:class:`Communicate` copies a flag to the other party with the
modular-addition unitary ``|i, j> -> |i, i + j mod d>``. Conditioned
operations are ordinary local channels whose Kraus operators act on a target
factor together with a flag, ``K_j = sum_c K_j^c (x) |c><c|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import qmat
from .errors import ClassicalityError, DomainError, InstrumentError, LabelError, ShapeError
from .qmat import Layout
from .states import MultipartiteState, as_state

COMPLETENESS_TOL = 1e-8
CLASSICAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Instrument:
    """Kraus operators of a local instrument on ``targets`` (default: the party's first factor)."""
    party: str
    kraus: np.ndarray
    targets: tuple[str, ...] | None = None

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ShapeError(f"Kraus operators must be square, got {k.shape}")
        if self.party not in qmat.PARTIES:
            raise DomainError(f"unknown party {self.party!r}")
        object.__setattr__(self, "kraus", k)
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(self.targets))

    @property
    def outcomes(self) -> int:
        return self.kraus.shape[0]

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    def completeness_residual(self) -> float:
        return qmat.kraus_completeness(self.kraus)

    def check(self, tol: float = COMPLETENESS_TOL) -> None:
        res = self.completeness_residual()
        if res > tol:
            raise InstrumentError(f"Kraus completeness violated by {res:.3e}")


def controlled_instrument(party: str, branches: Sequence[np.ndarray], target: str,
                          control: str) -> Instrument:
    """``K_j = sum_c K_j^c (x) |c><c|`` acting on ``(target, control)``; branches are ``(n, d, d)`` arrays."""
    branches = [np.asarray(b, dtype=complex).reshape(-1, *np.shape(b)[-2:]) for b in branches]
    n = max(b.shape[0] for b in branches)
    d = branches[0].shape[1]
    nc = len(branches)
    out = np.zeros((n, d * nc, d * nc), dtype=complex)
    for c, b in enumerate(branches):
        proj = np.zeros((nc, nc))
        proj[c, c] = 1.0
        for j in range(b.shape[0]):
            out[j] += np.kron(b[j], proj)
    return Instrument(party, out, (target, control))


# steps ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalUnitary:
    party: str
    unitary: np.ndarray
    targets: tuple[str, ...] | None = None


@dataclass(frozen=True, eq=False)
class LocalChannel:
    """Apply an instrument and forget the outcome."""
    instrument: Instrument

    @property
    def party(self) -> str:
        return self.instrument.party


@dataclass(frozen=True, eq=False)
class FlaggedInstrument:
    """Apply an instrument and record the outcome in a new flag factor."""
    instrument: Instrument
    flag: str | None = None

    @property
    def party(self) -> str:
        return self.instrument.party


@dataclass(frozen=True)
class Communicate:
    """Copy a flag of ``party`` (default: its newest) into a fresh factor of the other party."""
    party: str
    flag: str | None = None
    copy: str | None = None


@dataclass(frozen=True)
class DiscardFlag:
    label: str


Step = Union[LocalUnitary, LocalChannel, FlaggedInstrument, Communicate, DiscardFlag]


def _other(party: str) -> str:
    return "B" if party == "A" else "A"


def _default_target(layout: Layout, party: str) -> tuple[str, ...]:
    labs = layout.party_labels(party)
    if not labs:
        raise LabelError(f"party {party} has no factors")
    return (labs[0],)


@dataclass
class _Tracker:
    """Layout and flag bookkeeping shared by validation and execution."""
    layout: Layout
    flags: dict = field(default_factory=lambda: {"A": [], "B": []})

    def targets(self, party, targets) -> tuple[str, ...]:
        t = _default_target(self.layout, party) if targets is None else tuple(targets)
        for lab in t:
            if self.layout.factor(lab).party != party:
                raise DomainError(f"factor {lab!r} is not held by party {party}")
        return t

    def new_flag(self, party, label, dim) -> str:
        label = label or self.layout.fresh_label(f"f{party.lower()}")
        if label in self.layout:
            raise LabelError(f"label {label!r} already exists")
        self.layout = self.layout.append((label, dim, party))
        self.flags[party].append(label)
        return label

    def source_flag(self, party, flag) -> str:
        if flag is None:
            if not self.flags[party]:
                raise LabelError(f"party {party} holds no flag to communicate")
            return self.flags[party][-1]
        if self.layout.factor(flag).party != party:
            raise DomainError(f"flag {flag!r} is not held by party {party}")
        return flag

    def discard(self, label):
        self.layout.index(label)
        self.layout = self.layout.without([label])
        for lst in self.flags.values():
            if label in lst:
                lst.remove(label)


def _target_dim(layout: Layout, targets) -> int:
    return int(np.prod([layout.factor(t).dim for t in targets]))


@dataclass(frozen=True, eq=False)
class LoccProtocol:
    """Ordered steps on a fixed input layout; validated (labels, dims, cap) at construction."""
    input_layout: Layout
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        self.layouts()

    def layouts(self) -> list[Layout]:
        """Layout after every step; raises on malformed steps or dimension overflow."""
        tr = _Tracker(self.input_layout)
        out = []
        for step in self.steps:
            _advance(tr, step, None)
            if tr.layout.dim > qmat.MAX_DIM:
                raise ShapeError(f"protocol reaches dimension {tr.layout.dim} > {qmat.MAX_DIM}")
            out.append(tr.layout)
        return out

    @property
    def output_layout(self) -> Layout:
        lays = self.layouts()
        return lays[-1] if lays else self.input_layout


def _advance(tr: _Tracker, step, rho: np.ndarray | None):
    """Update the tracker for ``step`` and, when ``rho`` is given, the matrix too."""
    lay = tr.layout
    if isinstance(step, LocalUnitary):
        t = tr.targets(step.party, step.targets)
        u = np.asarray(step.unitary, dtype=complex)
        if u.shape[0] != _target_dim(lay, t):
            raise ShapeError(f"unitary of size {u.shape[0]} does not act on {t}")
        if rho is None:
            return None
        full = qmat.embed_operator(u, lay, t)
        return full @ rho @ full.conj().T
    if isinstance(step, (LocalChannel, FlaggedInstrument)):
        inst = step.instrument
        t = tr.targets(inst.party, inst.targets)
        if inst.dim != _target_dim(lay, t):
            raise ShapeError(f"instrument of size {inst.dim} does not act on {t}")
        if rho is not None:
            inst.check()
        if isinstance(step, LocalChannel):
            if rho is None:
                return None
            return sum(_lift(k, lay, t) @ rho @ _lift(k, lay, t).conj().T for k in inst.kraus)
        old = lay
        tr.new_flag(inst.party, step.flag, inst.outcomes)
        if rho is None:
            return None
        return _flagged(rho, old, inst.kraus, t)
    if isinstance(step, Communicate):
        src = tr.source_flag(step.party, step.flag)
        d = lay.factor(src).dim
        old = lay
        dst = tr.new_flag(_other(step.party), step.copy, d)
        if rho is None:
            return None
        return _copy(rho, old, src, dst, d)
    if isinstance(step, DiscardFlag):
        old = lay
        tr.discard(step.label)
        if rho is None:
            return None
        return qmat.partial_trace(rho, old, [step.label])[0]
    raise TypeError(f"unknown step {step!r}")


def _lift(k, layout, targets):
    return qmat.embed_operator(k, layout, targets)


def _flagged(rho, layout, kraus, targets):
    n = kraus.shape[0]
    out = 0
    for i, k in enumerate(kraus):
        kk = _lift(k, layout, targets)
        e = np.zeros((n, n))
        e[i, i] = 1.0
        out = out + np.kron(kk @ rho @ kk.conj().T, e)
    return out


def copy_unitary(d: int) -> np.ndarray:
    """``|i, j> -> |i, i + j mod d>`` on two ``d``-level registers."""
    u = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            u[i * d + (i + j) % d, i * d + j] = 1.0
    return u


def flag_coherence(rho: np.ndarray, layout: Layout, label: str) -> float:
    """Largest entry of ``rho`` that is off-diagonal in the flag's computational basis."""
    rest = [lab for lab in layout.labels if lab != label]
    m, lay = qmat.permute(rho, layout, rest + [label])
    d = layout.factor(label).dim
    t = m.reshape(lay.dim // d, d, lay.dim // d, d)
    off = t.copy()
    for i in range(d):
        off[:, i, :, i] = 0
    return float(np.max(np.abs(off))) if off.size else 0.0


def _copy(rho, layout, src, dst, d):
    if flag_coherence(rho, layout, src) > CLASSICAL_TOL:
        raise ClassicalityError(f"flag {src!r} is not classical")
    new = layout.append((dst, d, _other(layout.factor(src).party)))
    zero = np.zeros((d, d))
    zero[0, 0] = 1.0
    ext = np.kron(rho, zero)
    u = qmat.embed_operator(copy_unitary(d), new, [src, dst])
    return u @ ext @ u.conj().T


# running --------------------------------------------------------------------

@dataclass(frozen=True)
class StepLog:
    index: int
    step: str
    trace: float
    labels: tuple[str, ...]
    dims: tuple[int, ...]


def run(protocol: LoccProtocol, rho) -> tuple[MultipartiteState, list[StepLog]]:
    rho = as_state(rho)
    if rho.layout != protocol.input_layout:
        raise ShapeError(f"state layout {rho.layout.labels} does not match the protocol input")
    tr = _Tracker(rho.layout)
    m = rho.matrix
    log = []
    for i, step in enumerate(protocol.steps):
        m = qmat.hermitian_part(_advance(tr, step, m))
        log.append(StepLog(i, type(step).__name__, float(np.trace(m).real), tr.layout.labels,
                           tr.layout.dims))
    return MultipartiteState(m, tr.layout, check=False), log


def apply_flagged_instrument(rho, inst: Instrument, flag: str | None = None) -> MultipartiteState:
    rho = as_state(rho)
    out, _ = run(LoccProtocol(rho.layout, [FlaggedInstrument(inst, flag)]), rho)
    return out


def communicate(rho, flag_label: str, copy: str | None = None) -> MultipartiteState:
    rho = as_state(rho)
    party = rho.layout.factor(flag_label).party
    tr = _Tracker(rho.layout)
    tr.flags[party].append(flag_label)
    m = _advance(tr, Communicate(party, flag_label, copy), rho.matrix)
    return MultipartiteState(m, tr.layout, check=False)


def random_instrument(party: str, d: int, outcomes: int, rng, targets=None) -> Instrument:
    """Kraus operators ``K_j = (I (x) <j|) V`` from a random Stinespring isometry ``V``."""
    return Instrument(party, qmat.random_kraus(d, outcomes, rng), targets)


def random_locc(seed, depth: int = 1, max_outcomes: int = 2,
                input_layout: Layout | None = None) -> LoccProtocol:
    """Seeded protocol with alternating parties.

    Each round: a random local unitary, a flagged random instrument by the
    active party, communication of its flag, a random channel by the other
    party controlled on the received flag, and finally both flags discarded.
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")
    rng = np.random.default_rng(seed)
    lay = input_layout or Layout.bipartite(2, 2)
    steps = []
    for rnd in range(depth):
        me = "A" if rnd % 2 == 0 else "B"
        you = _other(me)
        mine = lay.party_labels(me)[0]
        yours = lay.party_labels(you)[0]
        dm, dy = lay.factor(mine).dim, lay.factor(yours).dim
        steps.append(LocalUnitary(me, qmat.random_unitary(dm, rng), (mine,)))
        n = int(rng.integers(2, max_outcomes + 1))
        flag, copy = f"f{rnd}", f"c{rnd}"
        steps.append(FlaggedInstrument(random_instrument(me, dm, n, rng, (mine,)), flag))
        steps.append(Communicate(me, flag, copy))
        nk = int(rng.integers(1, max_outcomes + 1))
        branches = [qmat.random_kraus(dy, nk, rng) for _ in range(n)]
        steps.append(LocalChannel(controlled_instrument(you, branches, yours, copy)))
        steps.append(DiscardFlag(flag))
        steps.append(DiscardFlag(copy))
    return LoccProtocol(lay, steps)


# monotonicity ---------------------------------------------------------------

QUANTIFIERS = ("bures_entanglement", "cse_bures", "cse_hs")


def evaluate_quantifier(name: str, rho, seed: int = 0, restarts: int = 8) -> float:
    from . import ent
    rho = as_state(rho).as_bipartite()
    if name == "bures_entanglement":
        return ent.bures_entanglement(rho, restarts=restarts, seed=seed).value
    if name == "cse_bures":
        return ent.cse_discord_min(rho, "bures", restarts=restarts, seed=seed).value
    if name == "cse_hs":
        return ent.cse_discord_min(rho, "hs", restarts=restarts, seed=seed).value
    raise DomainError(f"unknown quantifier {name!r}; expected one of {QUANTIFIERS}")


@dataclass(frozen=True)
class MonotonicityReport:
    quantifier: str
    before: float
    after: float
    tol: float

    @property
    def violation(self) -> float:
        return max(0.0, self.after - self.before - self.tol)

    @property
    def passed(self) -> bool:
        return self.violation == 0.0


def monotonicity_trial(rho, protocol: LoccProtocol, quantifier: str = "bures_entanglement",
                       tol: float = 1e-2, seed: int = 0, restarts: int = 8) -> MonotonicityReport:
    """Quantifier before and after the protocol; remaining flags stay with their owners."""
    if quantifier not in QUANTIFIERS:
        raise DomainError(f"unknown quantifier {quantifier!r}; expected one of {QUANTIFIERS}")
    rho = as_state(rho)
    out, _ = run(protocol, rho)
    before = evaluate_quantifier(quantifier, rho, seed, restarts)
    after = evaluate_quantifier(quantifier, out, seed, restarts)
    return MonotonicityReport(quantifier, before, after, tol)
