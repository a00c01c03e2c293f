"""Distances between density matrices.

Only ``BURES_SQ`` and ``HILBERT_SCHMIDT`` are accepted by the optimizers;
trace distance and relative entropy exist for property checks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import NotPSDError, ShapeError, UnsupportedKindError
from .qmat import Layout
from .states import MultipartiteState


class DistanceKind(enum.Enum):
    BURES_SQ = "bures"
    HILBERT_SCHMIDT = "hs"
    TRACE = "trace"
    RELATIVE_ENTROPY = "relative_entropy"

    @classmethod
    def parse(cls, kind) -> "DistanceKind":
        if isinstance(kind, cls):
            return kind
        key = str(kind).lower().replace("-", "_")
        aliases = {"bures_sq": "bures", "buressquared": "bures", "hilbert_schmidt": "hs",
                   "hilbertschmidt": "hs"}
        return cls(aliases.get(key, key))


OPTIMIZABLE = (DistanceKind.BURES_SQ, DistanceKind.HILBERT_SCHMIDT)


def require_optimizable(kind) -> DistanceKind:
    kind = DistanceKind.parse(kind)
    if kind not in OPTIMIZABLE:
        raise UnsupportedKindError(f"{kind.name} is not accepted by the optimizers")
    return kind


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a = rho.matrix if isinstance(rho, MultipartiteState) else np.asarray(rho, dtype=complex)
    b = sigma.matrix if isinstance(sigma, MultipartiteState) else np.asarray(sigma, dtype=complex)
    if a.shape != b.shape:
        raise ShapeError(f"states have different shapes {a.shape} and {b.shape}")
    return a, b


def _support_factor(m: np.ndarray, rel: float = 1e-14) -> np.ndarray:
    """``A`` with ``A A^dagger = m`` on the numerical support of ``m``."""
    w, v = np.linalg.eigh(qmat.hermitian_part(m))
    if w.size and w[0] < -qmat.PSD_CLIP:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -{qmat.PSD_CLIP:g}")
    keep = w > rel * max(1.0, w[-1])
    return v[:, keep] * np.sqrt(w[keep])


def fidelity(rho, sigma) -> float:
    """Root fidelity ``tr sqrt(sqrt(sigma) rho sqrt(sigma))``, clipped to [0, 1].

    Evaluated as the trace norm of ``B^dagger A`` for factors ``rho = A A^dagger``
    and ``sigma = B B^dagger`` truncated to their supports, which keeps
    rank-deficient inputs free of square-rooted round-off.
    """
    a, b = _pair(rho, sigma)
    fa, fb = _support_factor(a), _support_factor(b)
    if fa.shape[1] == 0 or fb.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(fb.conj().T @ fa, compute_uv=False)
    return float(min(1.0, np.sum(s)))


def bures_sq(rho, sigma) -> float:
    """Squared Bures distance ``2 - 2 F``."""
    return max(0.0, 2.0 - 2.0 * fidelity(rho, sigma))


def bures(rho, sigma) -> float:
    return float(np.sqrt(bures_sq(rho, sigma)))


def hs_distance(rho, sigma) -> float:
    a, b = _pair(rho, sigma)
    return float(np.linalg.norm(a - b))


def trace_distance(rho, sigma) -> float:
    a, b = _pair(rho, sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(qmat.hermitian_part(a - b)))))


def relative_entropy(rho, sigma, tol: float = 1e-12) -> float:
    """``tr rho (log rho - log sigma)`` in nats; ``inf`` when supp(rho) is not inside supp(sigma)."""
    a, b = _pair(rho, sigma)
    wa, va = np.linalg.eigh(qmat.hermitian_part(a))
    wb, vb = np.linalg.eigh(qmat.hermitian_part(b))
    overlap = np.abs(va.conj().T @ vb) ** 2  # [i, j] = |<a_i|b_j>|^2
    pos_a = wa > tol
    null_b = wb <= tol
    if np.any(overlap[np.ix_(pos_a, null_b)] * wa[pos_a, None] > tol):
        return float("inf")
    term_a = np.sum(wa[pos_a] * np.log(wa[pos_a]))
    logb = np.where(null_b, 0.0, np.log(np.where(null_b, 1.0, wb)))
    term_b = np.sum(wa[pos_a, None] * overlap[pos_a] * logb[None, :])
    return float(max(0.0, term_a - term_b))


_DISTANCES = {
    DistanceKind.BURES_SQ: bures_sq,
    DistanceKind.HILBERT_SCHMIDT: hs_distance,
    DistanceKind.TRACE: trace_distance,
    DistanceKind.RELATIVE_ENTROPY: relative_entropy,
}


def distance(kind, rho, sigma) -> float:
    return _DISTANCES[DistanceKind.parse(kind)](rho, sigma)


@dataclass(frozen=True)
class AncillaInvarianceReport:
    kind: DistanceKind
    ancilla_dims: tuple[int, ...]
    deviations: tuple[float, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.deviations)

    def __bool__(self):
        return self.passed


def pure_ancilla_invariance_check(kind, rho, sigma, trials: int = 3,
                                  tol: float = 1e-10) -> AncillaInvarianceReport:
    """Compare ``d(rho, sigma)`` with ``d(rho (x) |0><0|, sigma (x) |0><0|)`` for ancilla dims 2..trials+1."""
    kind = DistanceKind.parse(kind)
    a, b = _pair(rho, sigma)
    base = distance(kind, a, b)
    dims, devs = [], []
    for k in range(trials):
        d = 2 + k
        zero = np.zeros((d, d))
        zero[0, 0] = 1.0
        ext = distance(kind, np.kron(a, zero), np.kron(b, zero))
        dims.append(d)
        devs.append(0.0 if ext == base else abs(ext - base))
    return AncillaInvarianceReport(kind, tuple(dims), tuple(devs), tol)


@dataclass(frozen=True)
class NonContractivityWitness:
    channel: str
    rho: MultipartiteState
    sigma: MultipartiteState
    before: float
    after: float
    bures_before: float
    bures_after: float

    @property
    def ratio(self) -> float:
        return self.after / self.before


def hs_noncontractivity_witness(ancilla_dim: int = 2) -> NonContractivityWitness:
    """``|0><0| (x) I/d`` vs ``|1><1| (x) I/d``; tracing out the maximally mixed
    factor multiplies the Hilbert-Schmidt distance by ``sqrt(d)``."""
    d = ancilla_dim
    lay = Layout.of(("s", 2, "A"), ("m", d, "B"))
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    mix = np.eye(d, dtype=complex) / d
    rho = MultipartiteState(np.kron(p0, mix), lay)
    sigma = MultipartiteState(np.kron(p1, mix), lay)
    r_out, s_out = rho.ptrace(["m"]), sigma.ptrace(["m"])
    return NonContractivityWitness(
        channel=f"partial trace over the maximally mixed factor 'm' (dim {d})",
        rho=rho, sigma=sigma,
        before=hs_distance(rho, sigma), after=hs_distance(r_out, s_out),
        bures_before=bures_sq(rho, sigma), bures_after=bures_sq(r_out, s_out),
    )
