"""Cross-symmetric extensions: constructors and a residual-based verifier.

Every candidate lives on six factors ordered ``a1, a1p, a2p | b1, b1p, b2p``.
``(a1, b1)`` hold the original state; ``a1p`` pairs with ``b1`` and ``b1p``
with ``a1`` under the two cross swaps, so ``dim a1p = dim b1`` and
``dim b1p = dim a1``; ``a2p`` and ``b2p`` are index / flag registers that are
never swapped (dimension 1 when unused). Witness unitaries act on the
party-A factors ``a1 a1p a2p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from . import qmat
from .errors import DomainError, LabelError, ShapeError
from .qmat import Layout
from .states import EnsembleDecomposition, MultipartiteState, as_state, schmidt

A_LABELS = ("a1", "a1p", "a2p")
B_LABELS = ("b1", "b1p", "b2p")
LABELS = A_LABELS + B_LABELS
ORIGINAL = ("a1", "b1")
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CseCandidate:
    state: MultipartiteState
    witness_a1_b1p: np.ndarray
    witness_a1p_b1: np.ndarray
    original: tuple[str, str] = ORIGINAL

    def __post_init__(self):
        if self.state.layout.labels != LABELS:
            raise LabelError(f"candidate layout must be {LABELS}, got {self.state.layout.labels}")
        da = self.state.layout.party_dim("A")
        for w in (self.witness_a1_b1p, self.witness_a1p_b1):
            if w.shape != (da, da):
                raise ShapeError(f"witness of shape {w.shape} does not act on party A (dim {da})")

    @property
    def layout(self) -> Layout:
        return self.state.layout

    def marginal(self) -> MultipartiteState:
        return self.state.keep(list(self.original))

    def flag_dim(self) -> int:
        return self.layout.factor("a2p").dim


def cse_layout(da: int, db: int, flags: int = 1, flags_b: int | None = None) -> Layout:
    fb = flags if flags_b is None else flags_b
    return Layout.of(("a1", da, "A"), ("a1p", db, "A"), ("a2p", flags, "A"),
                     ("b1", db, "B"), ("b1p", da, "B"), ("b2p", fb, "B"))


def complete_unitary(inputs: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """A unitary mapping the orthonormal columns of ``inputs`` onto those of ``outputs``."""
    d = inputs.shape[0]
    if inputs.shape[1] < d:
        ci = scipy.linalg.null_space(inputs.conj().T)
        co = scipy.linalg.null_space(outputs.conj().T)
        inputs = np.hstack([inputs, ci])
        outputs = np.hstack([outputs, co])
    return outputs @ inputs.conj().T


def _pure_witness(psi: np.ndarray, da: int, db: int) -> np.ndarray:
    """Unitary on ``a1 (x) a1p`` sending ``|x_j, 0>`` to ``|0, y_j>`` for the Schmidt pairs of ``psi``."""
    sf = schmidt(psi, (da, db))
    s = max(1, sf.rank(RANK_TOL))
    e0a = np.zeros(da)
    e0a[0] = 1.0
    e0b = np.zeros(db)
    e0b[0] = 1.0
    ins = np.stack([np.kron(sf.left_vectors[:, j], e0b) for j in range(s)], axis=1)
    outs = np.stack([np.kron(e0a, sf.right_vectors[:, j]) for j in range(s)], axis=1)
    return complete_unitary(ins, outs)


def _pure_input(psi, dims) -> tuple[np.ndarray, int, int]:
    if isinstance(psi, MultipartiteState):
        m, da, db = psi.bipartite()
        if not psi.is_pure(1e-8):
            raise DomainError("canonical_pure_cse needs a pure state")
        w, v = np.linalg.eigh(m)
        return qmat.fix_phases(v[:, -1:])[:, 0], da, db
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if dims is None:
        da = int(round(np.sqrt(psi.shape[0])))
        dims = (da, psi.shape[0] // da)
    return psi, int(dims[0]), int(dims[1])


def _extended_vector(psi: np.ndarray, da: int, db: int) -> np.ndarray:
    t = np.zeros((da, db, 1, db, da, 1), dtype=complex)
    t[:, 0, 0, :, 0, 0] = psi.reshape(da, db)
    return t.reshape(-1)


def canonical_pure_cse(psi, dims=None) -> CseCandidate:
    """``psi (x) |0>_a1p |0>_b1p`` with the Schmidt-frame witness."""
    psi, da, db = _pure_input(psi, dims)
    vec = _extended_vector(psi, da, db)
    state = MultipartiteState(np.outer(vec, vec.conj()), cse_layout(da, db))
    w = _pure_witness(psi, da, db)
    return CseCandidate(state, w, w)


def spectral_frame(rho: MultipartiteState) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero eigenvalues (ascending) and phase-fixed eigenvectors of the A|B matrix."""
    m, _, _ = rho.bipartite()
    w, v = np.linalg.eigh(qmat.hermitian_part(m))
    keep = w > RANK_TOL
    return w[keep], qmat.fix_phases(v[:, keep])


def canonical_mixed_cse(rho) -> CseCandidate:
    """Purified spectral extension ``sum_i sqrt(lambda_i) |psi_i>_{a1 b1} |0,0>_{a1p b1p} |i,i>_{a2p b2p}``.

    The witness is ``sum_i U_i (x) |i><i|_{a2p}`` with ``U_i`` the Schmidt-frame
    witness of the i-th eigenvector.
    """
    rho = as_state(rho)
    da, db = rho.dims
    lam, vecs = spectral_frame(rho)
    r = len(lam)
    t = np.zeros((da, db, r, db, da, r), dtype=complex)
    for i in range(r):
        t[:, 0, i, :, 0, i] = np.sqrt(lam[i]) * vecs[:, i].reshape(da, db)
    vec = t.reshape(-1)
    vec /= np.linalg.norm(vec)
    state = MultipartiteState(np.outer(vec, vec.conj()), cse_layout(da, db, r))
    w = _controlled([_pure_witness(vecs[:, i], da, db) for i in range(r)])
    return CseCandidate(state, w, w)


def _controlled(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_i U_i (x) |i><i|`` with the control as the last (fastest) index."""
    m = len(blocks)
    out = 0
    for i, u in enumerate(blocks):
        e = np.zeros((m, m))
        e[i, i] = 1.0
        out = out + np.kron(u, e)
    return np.asarray(out, dtype=complex)


def separable_cse(ensemble: EnsembleDecomposition, dims) -> CseCandidate:
    """Flagged product extension ``sum_l s_l |a_l,b_l,l><..| (x) |b_l,a_l,l><..|`` with identity witness."""
    da, db = int(dims[0]), int(dims[1])
    sa, sb = [], []
    for vec in ensemble.states:
        sf = schmidt(vec / np.linalg.norm(vec), (da, db))
        if sf.rank(1e-10) != 1:
            raise DomainError("ensemble member is not a product state")
        sa.append(sf.coefficients[0] * sf.left_vectors[:, 0])
        sb.append(sf.right_vectors[:, 0])
    return separable_cse_local(ensemble.weights, sa, sb)


def separable_cse_local(weights, states_a, states_b) -> CseCandidate:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise DomainError("weights must be a probability vector")
    sa = np.asarray(states_a, dtype=complex)
    sb = np.asarray(states_b, dtype=complex)
    sa = sa / np.linalg.norm(sa, axis=1, keepdims=True)
    sb = sb / np.linalg.norm(sb, axis=1, keepdims=True)
    n, da = sa.shape
    db = sb.shape[1]
    lay = cse_layout(da, db, n)
    if lay.dim > qmat.MAX_DIM:
        raise ShapeError(f"extension dimension {lay.dim} exceeds {qmat.MAX_DIM}")
    flags = np.eye(n)
    m = 0
    for l in range(n):
        va = np.kron(np.kron(sa[l], sb[l]), flags[l])
        vb = np.kron(np.kron(sb[l], sa[l]), flags[l])
        v = np.kron(va, vb)
        m = m + w[l] * np.outer(v, v.conj())
    ident = np.eye(lay.party_dim("A"), dtype=complex)
    return CseCandidate(MultipartiteState(qmat.hermitian_part(m), lay), ident, ident)


def flagged_mixture_cse(parts: Sequence[CseCandidate], probs) -> CseCandidate:
    """``sum_i p_i rho_i (x) |i,i><i,i|`` with flags appended to ``a2p`` / ``b2p``
    and witnesses controlled by the A-side flag."""
    p = np.asarray(probs, dtype=float)
    if len(parts) != len(p):
        raise ShapeError("one probability per part is required")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise DomainError("probabilities must form a probability vector")
    lay0 = parts[0].layout
    for part in parts[1:]:
        if part.layout.dims != lay0.dims:
            raise ShapeError("all parts must share one layout")
    m = len(parts)
    d = lay0.dims
    new = cse_layout(d[0], d[1], d[2] * m, d[5] * m)
    if new.dim > qmat.MAX_DIM:
        raise ShapeError(f"flagged extension dimension {new.dim} exceeds {qmat.MAX_DIM}")
    tmp = lay0.append(("fa", m, "A"), ("fb", m, "B"))
    order = ["a1", "a1p", "a2p", "fa", "b1", "b1p", "b2p", "fb"]
    total = 0
    for i, (part, pi) in enumerate(zip(parts, p)):
        flag = np.zeros((m * m, m * m))
        flag[i * m + i, i * m + i] = 1.0
        total = total + pi * np.kron(part.state.matrix, flag)
    mat, _ = qmat.permute(total, tmp, order)
    state = MultipartiteState(qmat.hermitian_part(mat), new)
    w1 = _controlled([part.witness_a1_b1p for part in parts])
    w2 = _controlled([part.witness_a1p_b1 for part in parts])
    return CseCandidate(state, w1, w2)


@dataclass(frozen=True)
class CseVerification:
    marginal_residual: float
    swap_residual_1: float
    swap_residual_2: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.marginal_residual, self.swap_residual_1, self.swap_residual_2) <= self.tol

    def __bool__(self):
        return self.passed


def swap_residual(candidate: CseCandidate, witness: np.ndarray, x: str, y: str) -> float:
    lay = candidate.layout
    w = qmat.embed_operator(witness, lay, lay.party_labels("A"))
    rotated = w @ candidate.state.matrix @ w.conj().T
    s = qmat.swap_unitary(lay, x, y)
    return float(np.max(np.abs(s @ rotated @ s.conj().T - rotated)))


def verify_cse(candidate: CseCandidate, original, tol: float = 1e-9) -> CseVerification:
    """Residuals of the marginal condition and of both cross-swap invariances.

    Failure is reported, never raised.
    """
    lay = candidate.layout
    for lab in LABELS:
        lay.index(lab)
    orig = as_state(original)
    om, _, _ = orig.bipartite()
    marg = candidate.marginal().matrix
    if marg.shape != om.shape:
        raise ShapeError(f"original of shape {om.shape} does not match marginal {marg.shape}")
    return CseVerification(
        float(np.max(np.abs(marg - om))),
        swap_residual(candidate, candidate.witness_a1_b1p, "a1", "b1p"),
        swap_residual(candidate, candidate.witness_a1p_b1, "a1p", "b1"),
        tol,
    )
