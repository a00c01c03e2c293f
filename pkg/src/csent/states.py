"""Party-labelled quantum states, Schmidt analysis, separability oracles and
named state families."""
from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Sequence

import numpy as np

from . import qmat
from .errors import DomainError, NormalizationError, NotPSDError, ShapeError
from .qmat import Layout

STATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MultipartiteState:
    """Density matrix together with its labelled subsystem layout.

    Construction validates Hermiticity, positivity and unit trace to
    ``STATE_TOL``; pass ``check=False`` for matrices already known to be valid.
    """

    matrix: np.ndarray
    layout: Layout
    check: InitVar[bool] = True

    def __post_init__(self, check):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        if m.shape[0] != self.layout.dim:
            raise ShapeError(f"matrix dimension {m.shape[0]} does not match layout {self.layout.dims}")
        if m.shape[0] > qmat.MAX_DIM:
            raise ShapeError(f"dimension {m.shape[0]} exceeds the cap of {qmat.MAX_DIM}")
        if check:
            validate_density(m)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, psi, layout: Layout) -> "MultipartiteState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(psi) - 1) > 1e-8:
            raise NormalizationError(f"state vector has norm {np.linalg.norm(psi):.12g}")
        return cls(np.outer(psi, psi.conj()), layout)

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def dims(self) -> tuple[int, int]:
        """Dimensions of the A|B cut."""
        return self.layout.party_dim("A"), self.layout.party_dim("B")

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(self.purity() - 1.0) <= tol

    def pure_vector(self) -> np.ndarray:
        """Dominant eigenvector; meaningful for pure states."""
        w, v = np.linalg.eigh(self.matrix)
        return qmat.fix_phases(v[:, -1:])[:, 0]

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))

    def ptrace(self, discard: Sequence[str]) -> "MultipartiteState":
        m, lay = qmat.partial_trace(self.matrix, self.layout, discard)
        return MultipartiteState(m, lay, check=False)

    def keep(self, labels: Sequence[str]) -> "MultipartiteState":
        m, lay = qmat.keep_only(self.matrix, self.layout, labels)
        return MultipartiteState(m, lay, check=False)

    def reorder(self, order: Sequence[str]) -> "MultipartiteState":
        m, lay = qmat.permute(self.matrix, self.layout, order)
        return MultipartiteState(m, lay, check=False)

    def bipartite(self) -> tuple[np.ndarray, int, int]:
        """Matrix with party-A factors first, and the dimensions of the A|B cut."""
        order = self.layout.party_labels("A") + self.layout.party_labels("B")
        m, _ = qmat.permute(self.matrix, self.layout, order)
        return m, self.layout.party_dim("A"), self.layout.party_dim("B")

    def as_bipartite(self) -> "MultipartiteState":
        """Merge all factors of each party into one factor per party."""
        m, da, db = self.bipartite()
        la = "+".join(self.layout.party_labels("A")) or "a"
        lb = "+".join(self.layout.party_labels("B")) or "b"
        return MultipartiteState(m, Layout.of((la, da, "A"), (lb, db, "B")), check=False)

    def tensor(self, other: "MultipartiteState") -> "MultipartiteState":
        return MultipartiteState(np.kron(self.matrix, other.matrix),
                                 Layout(self.layout.factors + other.layout.factors), check=False)

    def with_ancilla(self, label: str, dim: int = 2, party: str = "B") -> "MultipartiteState":
        """Append a factor prepared in ``|0><0|``."""
        zero = np.zeros((dim, dim), dtype=complex)
        zero[0, 0] = 1.0
        return MultipartiteState(np.kron(self.matrix, zero), self.layout.append((label, dim, party)),
                                 check=False)

    def conjugate(self, op: np.ndarray, targets: Sequence[str] | None = None) -> "MultipartiteState":
        """``O rho O^dagger`` for a unitary ``O`` on ``targets`` (default: all factors)."""
        if targets is not None:
            op = qmat.embed_operator(op, self.layout, targets)
        m = op @ self.matrix @ op.conj().T
        return MultipartiteState(qmat.hermitian_part(m), self.layout, check=False)

    def local_unitary(self, ua: np.ndarray, ub: np.ndarray) -> "MultipartiteState":
        """Apply ``U_a (x) U_b`` across the A|B cut (preserving the layout)."""
        la, lb = self.layout.party_labels("A"), self.layout.party_labels("B")
        out = self.conjugate(ua, la)
        return out.conjugate(ub, lb)


def validate_density(m: np.ndarray, tol: float = STATE_TOL) -> None:
    herm = np.max(np.abs(m - m.conj().T))
    if herm > tol:
        raise DomainError(f"Hermitian invariant violated (deviation {herm:.3e})")
    tr = np.trace(m)
    if abs(tr - 1) > tol:
        raise NormalizationError(f"trace invariant violated (trace {tr.real:.12g})")
    w = np.linalg.eigvalsh(qmat.hermitian_part(m))
    if w[0] < -tol:
        raise NotPSDError(f"PSD invariant violated (minimum eigenvalue {w[0]:.6g})")


def as_state(rho, layout: Layout | None = None) -> MultipartiteState:
    """Coerce a matrix, state vector or :class:`MultipartiteState`."""
    if isinstance(rho, MultipartiteState):
        return rho
    rho = np.asarray(rho, dtype=complex)
    if layout is None:
        d = rho.shape[0]
        da = int(round(np.sqrt(d)))
        if da * da != d:
            raise ShapeError("a layout is required unless the dimension is a perfect square")
        layout = Layout.bipartite(da, da)
    if rho.ndim == 1:
        return MultipartiteState.from_vector(rho, layout)
    return MultipartiteState(rho, layout)


# --- Schmidt analysis ------------------------------------------------------------

@dataclass(frozen=True)
class SchmidtForm:
    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        c = self.coefficients
        return np.einsum("k,ik,jk->ij", c, self.left_vectors, self.right_vectors).reshape(-1)

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.coefficients > tol))


def _bipartite_dims(psi, dims) -> tuple[int, int]:
    if isinstance(dims, Layout):
        return dims.party_dim("A"), dims.party_dim("B")
    if dims is None:
        d = psi.shape[0]
        da = int(round(np.sqrt(d)))
        return da, d // da
    return int(dims[0]), int(dims[1])


def schmidt(psi, dims=None) -> SchmidtForm:
    """Schmidt decomposition of a normalized bipartite vector.

    ``dims`` is ``(d_a, d_b)`` or a layout whose factors are already grouped A
    then B. Coefficients are the square roots of the reduced-state spectrum,
    in descending order.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-8:
        raise NormalizationError(f"state vector has norm {nrm:.12g}")
    da, db = _bipartite_dims(psi, dims)
    if da * db != psi.shape[0]:
        raise ShapeError(f"vector of length {psi.shape[0]} does not split as {da}x{db}")
    u, s, vh = np.linalg.svd(psi.reshape(da, db), full_matrices=False)
    return SchmidtForm(s, u, vh.T)


# --- separability oracles ----------------------------------------------------------

@dataclass(frozen=True)
class PPTResult:
    ppt: bool
    min_eigenvalue: float
    exact: bool  # PPT is equivalent to separability for 2x2 and 2x3

    def __bool__(self):
        return self.ppt


def partial_transpose(m: np.ndarray, da: int, db: int) -> np.ndarray:
    return m.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def is_ppt(rho, tol: float = 1e-10) -> PPTResult:
    rho = as_state(rho)
    m, da, db = rho.bipartite()
    w = np.linalg.eigvalsh(qmat.hermitian_part(partial_transpose(m, da, db)))
    return PPTResult(bool(w[0] >= -tol), float(w[0]), da * db <= 6)


_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence_2q(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = as_state(rho)
    m, da, db = rho.bipartite()
    if (da, db) != (2, 2):
        raise ShapeError(f"concurrence_2q needs a 2x2 state, got {da}x{db}")
    tilde = _SYSY @ m.conj() @ _SYSY
    s = qmat.hermitian_sqrt(m)
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(qmat.hermitian_part(s @ tilde @ s)), 0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bures_entanglement_2q_closed_form(concurrence: float) -> float:
    """Two-qubit Bures entanglement (squared distance) as a function of concurrence."""
    c = min(max(concurrence, 0.0), 1.0)
    return 2.0 - 2.0 * np.sqrt((1.0 + np.sqrt(1.0 - c * c)) / 2.0)


# --- constructors ----------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleDecomposition:
    weights: np.ndarray
    states: np.ndarray  # one normalized vector per row

    def density(self) -> np.ndarray:
        return np.einsum("k,ki,kj->ij", self.weights, self.states, self.states.conj())


def make_cc(basis_a, basis_b, probs, labels=("a", "b")) -> MultipartiteState:
    """``sum_ij p_ij |alpha_i><alpha_i| (x) |beta_j><beta_j|`` for basis columns alpha, beta."""
    ua = np.asarray(basis_a, dtype=complex)
    ub = np.asarray(basis_b, dtype=complex)
    p = np.asarray(probs, dtype=float)
    if p.shape != (ua.shape[1], ub.shape[1]):
        raise ShapeError(f"probability table shape {p.shape} does not match bases")
    if np.any(p < 0):
        raise DomainError("negative probability in CC table")
    if abs(p.sum() - 1) > 1e-12:
        raise DomainError(f"probabilities sum to {p.sum():.15g}")
    u = np.kron(ua, ub)
    m = (u * p.reshape(-1)) @ u.conj().T
    return MultipartiteState(qmat.hermitian_part(m), Layout.bipartite(ua.shape[0], ub.shape[0], labels))


def make_separable(weights, states_a, states_b, labels=("a", "b")) -> MultipartiteState:
    """Mixture of product pure states ``sum_l w_l |a_l><a_l| (x) |b_l><b_l|``."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise DomainError("weights must be a probability vector")
    sa = np.asarray(states_a, dtype=complex)
    sb = np.asarray(states_b, dtype=complex)
    sa = sa / np.linalg.norm(sa, axis=1, keepdims=True)
    sb = sb / np.linalg.norm(sb, axis=1, keepdims=True)
    prod = np.einsum("li,lj->lij", sa, sb).reshape(len(w), -1)
    m = np.einsum("l,li,lj->ij", w, prod, prod.conj())
    return MultipartiteState(qmat.hermitian_part(m), Layout.bipartite(sa.shape[1], sb.shape[1], labels))


def purify(rho, ancilla_label: str = "r", ancilla_party: str = "B",
           tol: float = 1e-12) -> tuple[np.ndarray, Layout]:
    """Purification ``sum_i sqrt(lambda_i) |v_i>|i>`` with ancilla dimension rank(rho)."""
    rho = as_state(rho)
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > tol
    w, v = w[keep][::-1], qmat.fix_phases(v[:, keep][:, ::-1])
    r = len(w)
    psi = np.einsum("i,di->di", np.sqrt(w), v).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return psi, rho.layout.append((ancilla_label, r, ancilla_party))


# --- named families ----------------------------------------------------------------

_S2 = 1 / np.sqrt(2)
BELL = {
    "phi+": np.array([_S2, 0, 0, _S2], dtype=complex),
    "phi-": np.array([_S2, 0, 0, -_S2], dtype=complex),
    "psi+": np.array([0, _S2, _S2, 0], dtype=complex),
    "psi-": np.array([0, _S2, -_S2, 0], dtype=complex),
}
TWO_QUBITS = Layout.bipartite(2, 2)


def bell_state(which: str = "phi+") -> MultipartiteState:
    return MultipartiteState.from_vector(BELL[which], TWO_QUBITS)


def schmidt_family(theta: float) -> np.ndarray:
    """``cos(theta)|00> + sin(theta)|11>``."""
    return np.array([np.cos(theta), 0, 0, np.sin(theta)], dtype=complex)


def werner(p: float) -> MultipartiteState:
    """``p |psi-><psi-| + (1-p) I/4``."""
    if not 0 <= p <= 1:
        raise DomainError(f"Werner parameter must lie in [0, 1], got {p}")
    psi = BELL["psi-"]
    return MultipartiteState(p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4, TWO_QUBITS)


def bell_diagonal(coeffs: Sequence[float]) -> MultipartiteState:
    """Mixture of the Bell states ordered phi+, phi-, psi+, psi-."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (4,) or np.any(c < 0) or abs(c.sum() - 1) > 1e-12:
        raise DomainError("Bell-diagonal weights must be a 4-entry probability vector")
    m = sum(ck * np.outer(BELL[k], BELL[k].conj()) for ck, k in zip(c, ("phi+", "phi-", "psi+", "psi-")))
    return MultipartiteState(m, TWO_QUBITS)


def random_pure_state(da: int = 2, db: int = 2, seed=None) -> MultipartiteState:
    return MultipartiteState.from_vector(qmat.random_pure(da * db, seed), Layout.bipartite(da, db))


def random_mixed_state(da: int = 2, db: int = 2, rank: int | None = None, seed=None) -> MultipartiteState:
    return MultipartiteState(qmat.random_density(da * db, rank, seed), Layout.bipartite(da, db))


def random_separable_state(da: int = 2, db: int = 2, terms: int = 4, seed=None) -> MultipartiteState:
    rng = qmat._rng(seed)
    w = rng.dirichlet(np.ones(terms))
    sa = qmat.ginibre(terms, da, rng)
    sb = qmat.ginibre(terms, db, rng)
    return make_separable(w, sa, sb)


def random_cc_state(da: int = 2, db: int = 2, seed=None) -> MultipartiteState:
    rng = qmat._rng(seed)
    ua = qmat.random_unitary(da, rng)
    ub = qmat.random_unitary(db, rng)
    p = rng.dirichlet(np.ones(da * db)).reshape(da, db)
    p = p / p.sum()
    return make_cc(ua, ub, p)
