"""Cyclic Jacobi eigensolver for small dense Hermitian matrices.

Works on a single ``(n, n)`` matrix or a stack ``(..., n, n)``.  Each
rotation uses only +, *, / and sqrt, so results depend on the input
alone and not on how matrices are batched.
"""

import numpy as np

_TINY = 1e-300


def _rotate(a, v, p, q):
    apq = a[..., p, q]
    mag = np.abs(apq)
    active = mag > _TINY
    safe_mag = np.where(active, mag, 1.0)
    phase = np.where(active, apq / safe_mag, 1.0)
    app = a[..., p, p].real
    aqq = a[..., q, q].real

    with np.errstate(over="ignore"):
        tau = (aqq - app) / (2.0 * safe_mag)
        sgn = np.where(tau >= 0.0, 1.0, -1.0)
        t = sgn / (np.abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    c = np.where(active, c, 1.0)
    s = np.where(active, s, 0.0)

    # G acts on the (p, q) plane: [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    g_pp = c
    g_pq = s
    g_qp = -s * np.conj(phase)
    g_qq = c * np.conj(phase)

    col_p = a[..., :, p].copy()
    col_q = a[..., :, q].copy()
    a[..., :, p] = col_p * g_pp[..., None] + col_q * g_qp[..., None]
    a[..., :, q] = col_p * g_pq[..., None] + col_q * g_qq[..., None]
    row_p = a[..., p, :].copy()
    row_q = a[..., q, :].copy()
    a[..., p, :] = row_p * np.conj(g_pp)[..., None] + row_q * np.conj(g_qp)[..., None]
    a[..., q, :] = row_p * np.conj(g_pq)[..., None] + row_q * np.conj(g_qq)[..., None]
    a[..., p, q] = 0.0
    a[..., q, p] = 0.0
    a[..., p, p] = a[..., p, p].real
    a[..., q, q] = a[..., q, q].real

    vp = v[..., :, p].copy()
    vq = v[..., :, q].copy()
    v[..., :, p] = vp * g_pp[..., None] + vq * g_qp[..., None]
    v[..., :, q] = vp * g_pq[..., None] + vq * g_qq[..., None]


def eigh(m, tol=1e-15, max_sweeps=60):
    """Eigen-decomposition of Hermitian matrices.

    Returns ``(w, v)`` with eigenvalues ascending along the last axis and
    eigenvectors in the columns of ``v`` so that ``m = v @ diag(w) @ v^H``.
    Only the Hermitian part ``(m + m^H) / 2`` is used.
    """
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    a = np.array(m, dtype=complex)
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()

    offdiag = ~np.eye(n, dtype=bool)
    scale = np.sum(np.abs(a) ** 2, axis=(-2, -1))
    for _ in range(max_sweeps):
        off = np.sum(np.abs(a[..., offdiag]) ** 2, axis=-1)
        if np.all(off <= (tol * tol) * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)

    w = np.diagonal(a, axis1=-2, axis2=-1).real.copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def eigvalsh(m, tol=1e-15):
    return eigh(m, tol=tol)[0]


def hermitian_function(m, func):
    """Apply ``func`` to the spectrum: ``V f(Lambda) V^H``."""
    w, v = eigh(m)
    fw = func(w)
    return (v * fw[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def sqrtm_psd(m):
    """Principal square root of a PSD matrix; roundoff-negative eigenvalues are set to 0."""
    return hermitian_function(m, lambda w: np.sqrt(np.clip(w, 0.0, None)))
