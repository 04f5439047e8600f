"""Loop-heavy kernels, compiled with numba when available.

Each function is plain numpy-compatible Python; :func:`spiked_rmt._accel.jit`
compiles it unless ``SPIKED_RMT_DISABLE_NUMBA`` is set.
"""

import numpy as np

from ._accel import jit


@jit
def stieltjes(x, w, d):
    """Recurrence coefficients of orthonormal polynomials of a discrete measure.

    Returns ``(a, b, mu0)`` with ``x p_k = b_k p_{k+1} + a_k p_k + b_{k-1} p_{k-1}``
    for ``k < d`` and ``mu0`` the total mass.
    """
    m = x.size
    a = np.zeros(d)
    b = np.zeros(d)
    mu0 = 0.0
    for i in range(m):
        mu0 += w[i]
    p_prev = np.zeros(m)
    p = np.empty(m)
    c0 = 1.0 / np.sqrt(mu0)
    for i in range(m):
        p[i] = c0
    q = np.empty(m)
    for k in range(d):
        s = 0.0
        for i in range(m):
            s += w[i] * x[i] * p[i] * p[i]
        a[k] = s
        bprev = b[k - 1] if k > 0 else 0.0
        nrm = 0.0
        for i in range(m):
            q[i] = (x[i] - s) * p[i] - bprev * p_prev[i]
        # one step of reorthogonalisation against p and p_prev
        c1 = 0.0
        c2 = 0.0
        for i in range(m):
            c1 += w[i] * q[i] * p[i]
            c2 += w[i] * q[i] * p_prev[i]
        for i in range(m):
            q[i] -= c1 * p[i] + c2 * p_prev[i]
            nrm += w[i] * q[i] * q[i]
        b[k] = np.sqrt(nrm)
        for i in range(m):
            p_prev[i] = p[i]
            p[i] = q[i] / b[k]
    return a, b, mu0


@jit
def orthopoly_values(x, a, b, mu0, d):
    """Matrix ``P[k, i] = p_k(x_i)`` for ``k < d`` from recurrence coefficients."""
    m = x.size
    out = np.zeros((d, m))
    if d == 0:
        return out
    c0 = 1.0 / np.sqrt(mu0)
    for i in range(m):
        out[0, i] = c0
    if d > 1:
        for i in range(m):
            out[1, i] = (x[i] - a[0]) * out[0, i] / b[0]
    for k in range(1, d - 1):
        for i in range(m):
            out[k + 1, i] = ((x[i] - a[k]) * out[k, i] - b[k - 1] * out[k - 1, i]) / b[k]
    return out


@jit
def _horner(coef, x):
    out = 0.0
    for k in range(coef.size - 1, -1, -1):
        out = out * x + coef[k]
    return out


@jit
def _columns(x, a, b, mu0, vcoef, scale, poly_rows, spikes, shifts, col_psi, col_phi):
    """Fill the two determinant columns for one eigenvalue ``x``.

    ``col_psi`` holds ``psi_k(x)`` for ``k < len(col_psi)``; ``col_phi`` holds
    ``psi_k(x)`` for ``k < poly_rows`` followed by the spike entries
    ``exp(scale (a_i x - V(x)/2) - shift_i)``.
    """
    half_v = 0.5 * scale * _horner(vcoef, x)
    damp = np.exp(-half_v)
    d = col_psi.size
    p_prev = 0.0
    p = damp / np.sqrt(mu0)
    for k in range(d):
        col_psi[k] = p
        if k < poly_rows:
            col_phi[k] = p
        p_next = ((x - a[k]) * p - (b[k - 1] * p_prev if k > 0 else 0.0)) / b[k]
        p_prev = p
        p = p_next
    for i in range(spikes.size):
        col_phi[poly_rows + i] = np.exp(scale * spikes[i] * x - half_v - shifts[i])


@jit
def mcmc_chain(lam0, sigma0, normals, uniforms, a, b, mu0, vcoef, scale,
               spikes, shifts, burn, thin, target):
    """Per-coordinate random-walk Metropolis on the spiked eigenvalue density.

    The density is ``|det Psi| |det Phi|`` with ``Psi[k, j] = psi_k(lam_j)``
    (``k < n``) and ``Phi`` the same rows for ``k < n - m`` stacked on the
    spike rows.  Both inverses are carried and updated by Sherman-Morrison
    after each accepted move and recomputed once per sweep.

    ``normals`` and ``uniforms`` have one row per sweep.  During the first
    ``burn`` sweeps the proposal scale is adapted towards acceptance rate
    ``target``; afterwards it is frozen and every ``thin``-th sweep is
    recorded.  Returns ``(samples, acceptance_after_burn, sigma)``.
    """
    n = lam0.size
    m = spikes.size
    poly_rows = n - m
    sweeps = normals.shape[0]
    lam = lam0.copy()
    psi = np.empty((n, n))
    phi = np.empty((n, n))
    col_psi = np.empty(n)
    col_phi = np.empty(n)
    for j in range(n):
        _columns(lam[j], a, b, mu0, vcoef, scale, poly_rows, spikes, shifts, col_psi, col_phi)
        psi[:, j] = col_psi
        phi[:, j] = col_phi
    psi_inv = np.linalg.inv(psi)
    phi_inv = np.linalg.inv(phi)
    n_keep = (sweeps - burn) // thin
    samples = np.empty((n_keep, n))
    sigma = sigma0
    accepted = 0
    tried = 0
    kept = 0
    u_psi = np.empty(n)
    u_phi = np.empty(n)
    for sweep in range(sweeps):
        acc_sweep = 0
        for j in range(n):
            x_new = lam[j] + sigma * normals[sweep, j]
            _columns(x_new, a, b, mu0, vcoef, scale, poly_rows, spikes, shifts, col_psi, col_phi)
            r1 = 0.0
            r2 = 0.0
            for k in range(n):
                r1 += psi_inv[j, k] * col_psi[k]
                r2 += phi_inv[j, k] * col_phi[k]
            ratio = r1 * r2
            if ratio > 0.0 and np.log(uniforms[sweep, j]) < np.log(ratio):
                for k in range(n):
                    u_psi[k] = col_psi[k] - psi[k, j]
                    u_phi[k] = col_phi[k] - phi[k, j]
                    psi[k, j] = col_psi[k]
                    phi[k, j] = col_phi[k]
                _sherman_morrison(psi_inv, u_psi, j, r1)
                _sherman_morrison(phi_inv, u_phi, j, r2)
                lam[j] = x_new
                acc_sweep += 1
        psi_inv = np.linalg.inv(psi)
        phi_inv = np.linalg.inv(phi)
        if sweep < burn:
            rate = acc_sweep / n
            sigma *= np.exp(rate - target)
        else:
            accepted += acc_sweep
            tried += n
            if (sweep - burn + 1) % thin == 0 and kept < n_keep:
                samples[kept] = lam
                kept += 1
    return samples, accepted / max(tried, 1), sigma


@jit
def _sherman_morrison(inv, u, j, r):
    """Update ``inv`` after column ``j`` of the matrix changed by ``u``; ``r = 1 + inv[j] . u``."""
    n = u.size
    w = inv @ u
    row = inv[j].copy()
    for p in range(n):
        f = w[p] / r
        for q in range(n):
            inv[p, q] -= f * row[q]
