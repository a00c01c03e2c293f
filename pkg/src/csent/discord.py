"""Two-sided geometric discord and measurement-induced discord.

Both are minimized over pairs of local orthonormal bases, each basis being
``exp(i H)`` for a Hermitian generator with ``d*d`` real coordinates. The
reported value is the best terminal objective over seeded restarts and is an
upper bound on the true minimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .dist import DistanceKind, require_optimizable
from .errors import ShapeError
from .optimize import MultistartResult, minimize_multistart
from .states import MultipartiteState, as_state, make_cc

FIXED_BASIS_TOL = 1e-8
FIXED_BASIS_MAXITER = 5000


@dataclass(frozen=True)
class LocalBasisPair:
    params_a: np.ndarray
    params_b: np.ndarray
    realized_a: np.ndarray
    realized_b: np.ndarray

    @classmethod
    def from_params(cls, params_a, params_b, da: int, db: int) -> "LocalBasisPair":
        pa, pb = np.asarray(params_a, float), np.asarray(params_b, float)
        return cls(pa, pb, qmat.unitary_from_coords(pa, da), qmat.unitary_from_coords(pb, db))

    @classmethod
    def from_unitaries(cls, ua, ub) -> "LocalBasisPair":
        pa, pb = qmat.coords_from_unitary(ua), qmat.coords_from_unitary(ub)
        return cls(pa, pb, np.asarray(ua, complex), np.asarray(ub, complex))

    @classmethod
    def computational(cls, da: int, db: int) -> "LocalBasisPair":
        return cls.from_params(np.zeros(da * da), np.zeros(db * db), da, db)

    @property
    def dims(self) -> tuple[int, int]:
        return self.realized_a.shape[0], self.realized_b.shape[0]

    def product_basis(self) -> np.ndarray:
        return np.kron(self.realized_a, self.realized_b)


@dataclass(frozen=True)
class CcState:
    bases: LocalBasisPair
    probs: np.ndarray

    def state(self) -> MultipartiteState:
        p = np.clip(self.probs, 0, None)
        return make_cc(self.bases.realized_a, self.bases.realized_b, p / p.sum())


@dataclass(frozen=True)
class DiscordReport:
    value: float
    argmin: object  # CcState for geometric discord, LocalBasisPair for MID
    kind: DistanceKind
    restarts: int
    converged_fraction: float
    terminal_values: np.ndarray = field(repr=False)
    bound_direction: str = "UpperBound"


def _bipartite(rho) -> tuple[MultipartiteState, np.ndarray, int, int]:
    rho = as_state(rho)
    m, da, db = rho.bipartite()
    return rho, m, da, db


def _factor(m: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """``B`` with ``B B^dagger = m``, keeping only the numerical support."""
    w, v = np.linalg.eigh(qmat.hermitian_part(m))
    keep = w > tol * max(1.0, w[-1])
    return v[:, keep] * np.sqrt(w[keep])


def _coerce_bases(bases, da, db) -> LocalBasisPair:
    if isinstance(bases, LocalBasisPair):
        bp = bases
    else:
        bp = LocalBasisPair.from_unitaries(*bases)
    if bp.dims != (da, db):
        raise ShapeError(f"bases of dims {bp.dims} do not match the {da}x{db} cut")
    return bp


def dephase(rho, bases) -> MultipartiteState:
    """Local rank-one projective measurement in the given bases, outcomes forgotten."""
    rho, m, da, db = _bipartite(rho)
    bp = _coerce_bases(bases, da, db)
    u = bp.product_basis()
    p = np.real(np.einsum("ki,kl,li->i", u.conj(), m, u))
    out = (u * p) @ u.conj().T
    order = rho.layout.party_labels("A") + rho.layout.party_labels("B")
    lay = rho.layout.select(order)
    back, _ = qmat.permute(qmat.hermitian_part(out), lay, rho.layout.labels)
    return MultipartiteState(back, rho.layout, check=False)


def _max_fidelity_fixed_basis(bfac: np.ndarray, u: np.ndarray):
    """Maximize ``F(rho, sum_k p_k |e_k><e_k|)`` over the simplex.

    With ``M = U^dagger B`` and ``q = sqrt(p)``, ``F = ||diag(q) M||_1``. Each
    sweep sets the polar factor for the current ``q`` and then the optimal
    ``q`` for that factor; the objective is non-decreasing and the fixed
    points are exactly the KKT points of the concave program in ``p``.
    """
    mm = u.conj().T @ bfac
    if mm.shape[1] == 1:
        amp = np.abs(mm[:, 0])
        k = int(np.argmax(amp))
        q = np.zeros_like(amp)
        q[k] = 1.0
        return float(amp[k]), q ** 2, 0.0, 0
    q = np.sqrt(np.sum(np.abs(mm) ** 2, axis=1))
    q /= np.linalg.norm(q)
    resid = np.inf
    it = 0
    for it in range(1, FIXED_BASIS_MAXITER + 1):
        x, s, yh = np.linalg.svd(q[:, None] * mm, full_matrices=False)
        w = yh.conj().T @ x.conj().T
        g = np.real(np.einsum("kj,jk->k", mm, w))
        f = float(s.sum())
        gp = np.clip(g, 0, None)
        resid = float(np.linalg.norm(gp - f * q))
        if resid <= FIXED_BASIS_TOL:
            break
        q = gp / np.linalg.norm(gp)
    f = float(np.linalg.svd(q[:, None] * mm, compute_uv=False).sum())
    return min(f, 1.0), q ** 2, resid, it


def closest_cc_fixed_bases(rho, bases, kind) -> tuple[CcState, float]:
    """Closest classical-correlated state diagonal in ``bases`` and its distance.

    Hilbert-Schmidt: the diagonal of ``rho`` in the product basis, distance
    ``d_HS``. Bures: fidelity maximized over the simplex, distance ``d_B**2``.
    """
    kind = require_optimizable(kind)
    rho, m, da, db = _bipartite(rho)
    bp = _coerce_bases(bases, da, db)
    u = bp.product_basis()
    if kind is DistanceKind.HILBERT_SCHMIDT:
        p = np.real(np.einsum("ki,kl,li->i", u.conj(), m, u))
        val = np.sqrt(max(0.0, np.real(np.vdot(m, m)) - np.sum(p ** 2)))
        return CcState(bp, p.reshape(da, db)), float(val)
    f, p, _, _ = _max_fidelity_fixed_basis(_factor(m), u)
    return CcState(bp, (p / p.sum()).reshape(da, db)), max(0.0, 2.0 - 2.0 * f)


# --- batched objectives ----------------------------------------------------------

class _BasisObjective:
    """Batched objective over local-basis coordinates (plus simplex coordinates
    for the joint Bures geometric-discord parametrization)."""

    def __init__(self, m: np.ndarray, da: int, db: int, kind: DistanceKind, mode: str):
        self.m, self.da, self.db, self.kind, self.mode = m, da, db, kind, mode
        self.bfac = _factor(m)
        self.rank = self.bfac.shape[1]
        self.b3 = self.bfac.reshape(da, db, self.rank)
        self.purity = float(np.real(np.vdot(m, m)))
        self.na, self.nb = da * da, db * db
        self.joint = kind is DistanceKind.BURES_SQ and mode == "gd" and self.rank > 1
        self.nparams = self.na + self.nb + (da * db if self.joint else 0)

    def rotated(self, x):
        ua = qmat.unitary_from_coords(x[:, :self.na], self.da)
        ub = qmat.unitary_from_coords(x[:, self.na:self.na + self.nb], self.db)
        mm = np.einsum("nai,nbj,abr->nijr", ua.conj(), ub.conj(), self.b3)
        return mm.reshape(x.shape[0], self.da * self.db, self.rank)

    def __call__(self, x):
        mm = self.rotated(x)
        if self.kind is DistanceKind.HILBERT_SCHMIDT:
            p = np.sum(np.abs(mm) ** 2, axis=2)
            return self.purity - np.sum(p ** 2, axis=1)  # squared distance
        if self.mode == "gd" and self.rank == 1:
            return 2.0 - 2.0 * np.max(np.abs(mm[:, :, 0]), axis=1)
        if self.joint:
            q = x[:, self.na + self.nb:]
            q = q / np.linalg.norm(q, axis=1, keepdims=True)
        else:
            q = np.sqrt(np.sum(np.abs(mm) ** 2, axis=2))
        a = q[:, :, None] * mm
        g = np.einsum("nki,nkj->nij", a.conj(), a)
        f = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(g), 0, None)), axis=1)
        return 2.0 - 2.0 * f

    def split(self, x) -> LocalBasisPair:
        return LocalBasisPair.from_params(x[:self.na], x[self.na:self.na + self.nb], self.da, self.db)

    def start(self, ua, ub) -> np.ndarray:
        x = np.concatenate([qmat.coords_from_unitary(ua), qmat.coords_from_unitary(ub)])
        if self.joint:
            u = np.kron(ua, ub)
            p = np.real(np.einsum("ki,kl,li->i", u.conj(), self.m, u))
            x = np.concatenate([x, np.sqrt(np.clip(p, 0, None)) + 1e-3])
        return x


def default_restarts(da: int, db: int) -> int:
    return 16 if da * db <= 4 else 48


def _eigvecs(h):
    return np.linalg.eigh(qmat.hermitian_part(h))[1]


def informed_bases(m: np.ndarray, da: int, db: int, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic warm-start bases.

    Conditional marginals ``tr_B[rho (I (x) Q)]`` for a random Hermitian ``Q``
    are diagonal in the local bases of any classical-correlated state, with
    generically distinct eigenvalues; plain marginal eigenbases are the Schmidt
    bases of a pure state.
    """
    t = m.reshape(da, db, da, db)
    qa = qmat.hermitian_part(qmat.ginibre(da, da, rng))
    qb = qmat.hermitian_part(qmat.ginibre(db, db, rng))
    cond_a = np.einsum("aibc,ci->ab", t, qb)
    cond_b = np.einsum("aicj,ca->ij", t, qa)
    marg_a = np.einsum("ibjb->ij", t)
    marg_b = np.einsum("aiaj->ij", t)
    return [(_eigvecs(cond_a), _eigvecs(cond_b)), (_eigvecs(marg_a), _eigvecs(marg_b))]


def _run(rho, kind, mode, restarts, seed, tol) -> tuple[_BasisObjective, MultistartResult, int]:
    kind = require_optimizable(kind)
    rho, m, da, db = _bipartite(rho)
    obj = _BasisObjective(m, da, db, kind, mode)
    restarts = default_restarts(da, db) if restarts is None else int(restarts)
    rng = np.random.default_rng(seed)
    pairs = informed_bases(m, da, db, rng)[:restarts]
    while len(pairs) < restarts:
        pairs.append((qmat.random_unitary(da, rng), qmat.random_unitary(db, rng)))
    starts = [obj.start(ua, ub) for ua, ub in pairs]
    res = minimize_multistart(starts, batch_fun=obj, gtol=min(1e-8, tol))
    return obj, res, restarts


def geometric_discord(rho, kind="bures", restarts: int | None = None, seed: int = 0,
                      tol: float = 1e-6) -> DiscordReport:
    """Minimal distance from ``rho`` to the classical-correlated states.

    ``kind="bures"`` reports ``d_B**2``; ``kind="hs"`` reports ``d_HS``. The
    returned value is the best over all restarts after re-solving the inner
    problem at the winning bases with :func:`closest_cc_fixed_bases`.
    """
    kind = require_optimizable(kind)
    obj, res, n = _run(rho, kind, "gd", restarts, seed, tol)
    bases = obj.split(res.x)
    cc, val = closest_cc_fixed_bases(rho, bases, kind)
    terminal = res.terminal_values
    if kind is DistanceKind.HILBERT_SCHMIDT:
        terminal = np.sqrt(np.clip(terminal, 0, None))
    best_terminal = float(terminal[res.best_index])
    if val > best_terminal:
        val = best_terminal
    val = max(0.0, float(val))
    conv = float(np.mean(terminal <= val + tol))
    return DiscordReport(val, cc, kind, n, conv, terminal)


def mid(rho, kind="bures", restarts: int | None = None, seed: int = 0,
        tol: float = 1e-6) -> DiscordReport:
    """Measurement-induced discord ``min d(rho, Pi(rho))`` over local rank-one measurements."""
    kind = require_optimizable(kind)
    obj, res, n = _run(rho, kind, "mid", restarts, seed, tol)
    terminal = res.terminal_values
    if kind is DistanceKind.HILBERT_SCHMIDT:
        terminal = np.sqrt(np.clip(terminal, 0, None))
    terminal = np.clip(terminal, 0, None)
    val = float(terminal[res.best_index])
    conv = float(np.mean(terminal <= val + tol))
    return DiscordReport(val, obj.split(res.x), kind, n, conv, terminal)
