"""Dense complex matrix kernel.

Hermitian spectral calculus, tensor / partial-trace / permutation algebra on
labelled subsystem layouts, local unitary coordinates and seeded sampling.
Matrices are plain ``numpy`` arrays of dtype ``complex128``; total dimension
is capped at :data:`MAX_DIM`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, LabelError, NotPSDError, ShapeError

MAX_DIM = 256
PSD_CLIP = 1e-10
HERMITIAN_TOL = 1e-10
PARTIES = ("A", "B")


class Factor(NamedTuple):
    label: str
    dim: int
    party: str


@dataclass(frozen=True)
class Layout:
    """Ordered tensor factors, each with a unique label, a dimension and a party."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        factors = tuple(Factor(str(f[0]), int(f[1]), str(f[2])) for f in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in layout: {labels}")
        for f in factors:
            if f.dim < 1:
                raise ShapeError(f"factor {f.label!r} has dimension {f.dim}")
            if f.party not in PARTIES:
                raise DomainError(f"factor {f.label!r} has unknown party {f.party!r}")

    @classmethod
    def of(cls, *factors) -> "Layout":
        """``Layout.of(("a", 2, "A"), ("b", 2, "B"))``."""
        return cls(tuple(factors))

    @classmethod
    def bipartite(cls, da: int, db: int, labels=("a", "b")) -> "Layout":
        return cls.of((labels[0], da, "A"), (labels[1], db, "B"))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self):
        return len(self.factors)

    def __contains__(self, label):
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown label {label!r}; layout has {self.labels}") from None

    def factor(self, label: str) -> Factor:
        return self.factors[self.index(label)]

    def party_labels(self, party: str) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors if f.party == party)

    def party_dim(self, party: str) -> int:
        return int(np.prod([f.dim for f in self.factors if f.party == party], dtype=np.int64))

    def without(self, labels: Iterable[str]) -> "Layout":
        drop = set(labels)
        for lab in drop:
            self.index(lab)
        return Layout(tuple(f for f in self.factors if f.label not in drop))

    def select(self, labels: Sequence[str]) -> "Layout":
        return Layout(tuple(self.factor(lab) for lab in labels))

    def append(self, *factors) -> "Layout":
        return Layout(self.factors + tuple(Factor(*f) for f in factors))

    def fresh_label(self, stem: str) -> str:
        k = 1
        while f"{stem}{k}" in self.labels:
            k += 1
        return f"{stem}{k}"


@dataclass(frozen=True)
class EigDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def tensor(*ms) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    out = np.asarray(ms[0], dtype=complex)
    for m in ms[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def _check_layout(m: np.ndarray, layout: Layout):
    if m.shape[0] != layout.dim:
        raise ShapeError(f"matrix dimension {m.shape[0]} does not match layout {layout.dims}")


def partial_trace(m, layout: Layout, discard: Iterable[str]) -> tuple[np.ndarray, Layout]:
    """Trace out the factors named in ``discard``; returns the reduced matrix and layout."""
    m = _as_square(m)
    _check_layout(m, layout)
    discard = set(discard)
    idx = {layout.index(lab) for lab in discard}
    n = len(layout)
    if n > 26:
        raise ShapeError("at most 26 factors are supported")
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = letters.upper()
    rows = [letters[k] for k in range(n)]
    cols = [letters[k] if k in idx else upper[k] for k in range(n)]
    keep = [k for k in range(n) if k not in idx]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    t = m.reshape(layout.dims * 2)
    r = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    reduced = layout.without(discard)
    d = reduced.dim
    return r.reshape(d, d), reduced


def keep_only(m, layout: Layout, keep: Sequence[str]) -> tuple[np.ndarray, Layout]:
    """Partial trace onto ``keep``, then reorder to the order given in ``keep``."""
    for lab in keep:
        layout.index(lab)
    r, lay = partial_trace(m, layout, [lab for lab in layout.labels if lab not in keep])
    return permute(r, lay, keep)


def permute(m, layout: Layout, order: Sequence[str]) -> tuple[np.ndarray, Layout]:
    """Reorder tensor factors of a square matrix (or a state vector) into ``order``."""
    m = np.asarray(m, dtype=complex)
    if sorted(order) != sorted(layout.labels):
        raise LabelError(f"order {list(order)} is not a permutation of {layout.labels}")
    perm = [layout.index(lab) for lab in order]
    new = layout.select(order)
    if perm == list(range(len(layout))):
        return m, new
    n = len(layout)
    if m.ndim == 1:
        return m.reshape(layout.dims).transpose(perm).reshape(-1), new
    t = m.reshape(layout.dims * 2).transpose(perm + [p + n for p in perm])
    return t.reshape(new.dim, new.dim), new


def embed_operator(op, layout: Layout, targets: Sequence[str]) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` (in that order) to the full layout."""
    op = _as_square(op)
    tdim = int(np.prod([layout.factor(t).dim for t in targets], dtype=np.int64))
    if op.shape[0] != tdim:
        raise ShapeError(f"operator of size {op.shape[0]} does not act on {list(targets)} (dim {tdim})")
    rest = [lab for lab in layout.labels if lab not in targets]
    rdim = int(np.prod([layout.factor(r).dim for r in rest], dtype=np.int64))
    full = np.kron(op, np.eye(rdim))
    ordered = layout.select(list(targets) + rest)
    out, _ = permute(full, ordered, layout.labels)
    return out


def swap_unitary(layout: Layout, x: str, y: str) -> np.ndarray:
    """Permutation unitary exchanging factors ``x`` and ``y``."""
    ix, iy = layout.index(x), layout.index(y)
    if layout.dims[ix] != layout.dims[iy]:
        raise ShapeError(f"cannot swap {x!r} (dim {layout.dims[ix]}) with {y!r} (dim {layout.dims[iy]})")
    d = layout.dim
    idx = np.arange(d).reshape(layout.dims)
    src = np.swapaxes(idx, ix, iy).reshape(-1)
    s = np.zeros((d, d), dtype=complex)
    s[np.arange(d), src] = 1.0
    return s


def hermitian_eig(m) -> EigDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = _as_square(m)
    dev = np.max(np.abs(m - dagger(m))) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise DomainError(f"matrix is not Hermitian (deviation {dev:.3e})")
    w, v = np.linalg.eigh(hermitian_part(m))
    return EigDecomposition(w, v)


def fix_phases(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate each column so that its first non-negligible entry is real positive."""
    v = np.array(vectors, dtype=complex)
    for k in range(v.shape[1]):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            c = col[nz[0]]
            v[:, k] = col * (abs(c) / c)
    return v


def _clip_spectrum(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -PSD_CLIP:
        raise NotPSDError(f"eigenvalue {w.min():.3e} below -{PSD_CLIP:g}")
    return np.clip(w, 0.0, None)


def hermitian_sqrt(m) -> np.ndarray:
    """Positive square root of a PSD matrix; tiny negative eigenvalues are clipped."""
    e = hermitian_eig(m)
    w = _clip_spectrum(e.eigenvalues)
    v = e.eigenvectors
    return (v * np.sqrt(w)) @ v.conj().T


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the phase fix)."""
    q, r = np.linalg.qr(ginibre(d, d, seed))
    ph = np.diag(r)
    return q * (ph / np.abs(ph))


def random_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    return random_unitary(d_out, seed)[:, :d_in]


def random_pure(d: int, seed=None) -> np.ndarray:
    v = ginibre(d, 1, seed)[:, 0]
    return v / np.linalg.norm(v)


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random density matrix of the requested rank (induced measure)."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise DomainError(f"rank must lie in [1, {d}], got {rank}")
    g = ginibre(d, rank, seed)
    rho = g @ g.conj().T
    rho = hermitian_part(rho)
    return rho / np.trace(rho).real


def random_kraus(d: int, n: int, seed=None) -> np.ndarray:
    """``n`` Kraus operators of a random channel on dimension ``d`` (Stinespring isometry)."""
    v = random_isometry(d, d * n, seed)
    return v.reshape(n, d, d)


def apply_kraus(rho: np.ndarray, kraus) -> np.ndarray:
    kraus = np.asarray(kraus)
    return np.einsum("kij,jl,kml->im", kraus, rho, kraus.conj())


def kraus_completeness(kraus) -> float:
    kraus = np.asarray(kraus)
    d = kraus.shape[-1]
    s = np.einsum("kji,kjl->il", kraus.conj(), kraus)
    return float(np.max(np.abs(s - np.eye(d))))


# --- local unitary coordinates --------------------------------------------------

def _coord_index(d: int):
    iu, ju = np.triu_indices(d, k=1)
    return iu, ju


def hermitian_from_coords(x, d: int) -> np.ndarray:
    """Hermitian matrices from ``d*d`` real coordinates (batched over leading axes).

    Coordinates are the diagonal, then the real parts and then the imaginary
    parts of the strict upper triangle.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d * d:
        raise ShapeError(f"expected {d * d} coordinates, got {x.shape[-1]}")
    iu, ju = _coord_index(d)
    n_off = len(iu)
    h = np.zeros(x.shape[:-1] + (d, d), dtype=complex)
    h[..., np.arange(d), np.arange(d)] = x[..., :d]
    off = x[..., d:d + n_off] + 1j * x[..., d + n_off:]
    h[..., iu, ju] = off
    h[..., ju, iu] = np.conj(off)
    return h


def coords_from_hermitian(h) -> np.ndarray:
    h = np.asarray(h)
    d = h.shape[-1]
    iu, ju = _coord_index(d)
    diag = np.real(h[..., np.arange(d), np.arange(d)])
    off = h[..., iu, ju]
    return np.concatenate([diag, off.real, off.imag], axis=-1)


def unitary_from_coords(x, d: int) -> np.ndarray:
    """``exp(i H(x))``, batched over leading axes."""
    w, v = np.linalg.eigh(hermitian_from_coords(x, d))
    return (v * np.exp(1j * w)[..., None, :]) @ dagger(v)


def coords_from_unitary(u) -> np.ndarray:
    """Coordinates ``x`` with ``unitary_from_coords(x) == u`` (principal logarithm)."""
    u = _as_square(u)
    t, z = scipy.linalg.schur(u, output="complex")
    theta = np.angle(np.diag(t))
    h = (z * theta) @ z.conj().T
    return coords_from_hermitian(hermitian_part(h))
