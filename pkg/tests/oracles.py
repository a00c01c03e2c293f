"""Brute-force reference values, written without the package's own routines."""
import numpy as np
import scipy.linalg


def qubit_grid(n_theta=181, n_phi=360):
    """Pure qubit states ``cos(t/2)|0> + e^{i f} sin(t/2)|1>`` on a polar grid."""
    t = np.linspace(0, np.pi, n_theta)
    f = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    tt, ff = np.meshgrid(t, f, indexing="ij")
    return np.stack([np.cos(tt / 2), np.exp(1j * ff) * np.sin(tt / 2)], axis=-1).reshape(-1, 2)


def max_product_overlap(psi, grid=None):
    """``max |<a b|psi>|`` for two qubits: grid over ``a``, optimal ``b`` in closed form."""
    grid = qubit_grid() if grid is None else grid
    m = np.asarray(psi, dtype=complex).reshape(2, 2)
    partial = grid.conj() @ m  # <a| psi> as a vector on B
    return float(np.max(np.linalg.norm(partial, axis=1)))


def pure_bures_entanglement_grid(psi):
    return 2 - 2 * max_product_overlap(psi)


def _basis_from_bloch(t, f):
    a = np.stack([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)], axis=-1)
    b = np.stack([-np.exp(-1j * f) * np.sin(t / 2), np.cos(t / 2) + 0 * f], axis=-1)
    return a, b


def hs_discord_grid(rho, n=24):
    """HS geometric discord of two qubits by scanning both local bases on a Bloch grid.

    For fixed product basis ``{e_k}`` the closest CC state has weights
    ``<e_k|rho|e_k>`` and squared distance ``tr rho^2 - sum_k p_k^2``.
    """
    t = np.linspace(0, np.pi, n)
    f = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    tt, ff = np.meshgrid(t, f, indexing="ij")
    a0, a1 = _basis_from_bloch(tt.ravel(), ff.ravel())
    local = np.stack([a0, a1], axis=1)  # (g, 2, 2): basis vectors as rows
    rho = np.asarray(rho, dtype=complex)
    purity = np.real(np.trace(rho @ rho))
    r4 = rho.reshape(2, 2, 2, 2)
    best = np.inf
    for ua in local:
        # <ka kb| rho |ka kb> for every B basis on the grid
        t1 = np.einsum("ka,abcd,kc->kbd", ua.conj(), r4, ua)
        p = np.real(np.einsum("gjb,kbd,gjd->gkj", local.conj(), t1, local))
        val = purity - np.sum(p ** 2, axis=(1, 2))
        best = min(best, float(val.min()))
    return float(np.sqrt(max(best, 0.0)))


def simplex_grid(dim, step):
    n = int(round(1 / step))
    pts = []

    def rec(prefix, left, k):
        if k == 1:
            pts.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i, k - 1)

    rec([], n, dim)
    return np.array(pts, dtype=float) / n


def bures_fixed_basis_grid(rho, basis, step=0.01):
    """``max_p F(rho, sum_k p_k |e_k><e_k|)`` on a simplex grid; returns ``2 - 2 F``."""
    r = basis.conj().T @ np.asarray(rho, dtype=complex) @ basis
    p = simplex_grid(r.shape[0], step)
    q = np.sqrt(p)
    mats = q[:, :, None] * r[None] * q[:, None, :]
    w = np.linalg.eigvalsh(mats)
    fid = np.sum(np.sqrt(np.clip(w, 0, None)), axis=1)
    return float(2 - 2 * fid.max())


def fidelity_sqrtm(rho, sigma):
    s = scipy.linalg.sqrtm(sigma)
    return float(np.real(np.trace(scipy.linalg.sqrtm(s @ rho @ s))))


def partial_transpose_loops(rho, da, db):
    out = np.zeros_like(rho)
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    out[i * db + j, k * db + l] = rho[i * db + l, k * db + j]
    return out


def wootters_concurrence(rho):
    """``max(0, l1 - l2 - l3 - l4)`` from the square-rooted eigenvalues of ``rho (sy sy) rho* (sy sy)``."""
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.real(np.linalg.eigvals(r)))[::-1], 0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bures_closed_form(c):
    return 2 - 2 * np.sqrt((1 + np.sqrt(1 - c ** 2)) / 2)


def singlet_werner(p):
    s = np.array([0, 1, -1, 0]) / np.sqrt(2)
    return p * np.outer(s, s) + (1 - p) * np.eye(4) / 4
