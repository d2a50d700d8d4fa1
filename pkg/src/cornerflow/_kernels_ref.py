"""Reference NumPy implementation of the pairwise interaction kernels.

These are the O(M*N) hot loops of the package: given vortex positions in the
mapped plane (where the boundary is the unit circle) they accumulate, per
evaluation point, the regularised free-vortex term, the exact image term and
the point-circulation term.

Image terms are evaluated through the algebraic identity

    |zeta - zeta_j*|^2 |zeta_j|^2 = |zeta - zeta_j|^2
                                    + (|zeta|^2 - 1)(|zeta_j|^2 - 1)

with zeta_j* = zeta_j / |zeta_j|^2, which is well defined even for a particle
sitting at the centre of an interior domain (where zeta_j* escapes to
infinity) and adds the two non-negative pieces instead of cancelling them.
The same identity turns the image velocity into

    (zeta - zeta_j*) / |zeta - zeta_j*|^2
        = (zeta |zeta_j|^2 - zeta_j) / (|zeta - zeta_j|^2 + P_j),

so no division by |zeta_j|^2 ever happens.

All reductions are plain numpy sums over a fixed axis, so results are
bit-for-bit reproducible for a given input (the pairwise summation tree only
depends on the source count). Evaluation points are processed in chunks to
bound peak memory on large problems.
"""

import numpy as np

# Aim for roughly this many pair entries per temporary array.
_CHUNK_ENTRIES = 1 << 22


def _chunk_rows(n_targets: int, n_sources: int) -> int:
    if n_sources <= 0:
        return n_targets if n_targets > 0 else 1
    return max(1, min(n_targets, _CHUNK_ENTRIES // n_sources))


def momentum_sum(zt, zp, gam, dl2, alpha, exclude_self):
    """Summed interaction field S at each target point (mapped plane).

    S(zeta) = sum_j gam_j [ (zeta - zeta_j) / (|zeta - zeta_j|^2 + dl2_j)
                            - image term ]  + alpha * zeta / |zeta|^2

    The velocity in the physical plane is (i / 2 pi) conj(T'(x)) S.

    Parameters
    ----------
    zt : complex array, evaluation points (mapped plane)
    zp : complex array, particle positions (mapped plane)
    gam : float array, particle circulations
    dl2 : float array, squared blob radii (mapped plane)
    alpha : float, coefficient of the point-circulation term
    exclude_self : bool, skip the free term for j == i (requires len(zt)
        == len(zp) with matching order; the image term is never skipped)
    """
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    m, n = zt.shape[0], zp.shape[0]
    if exclude_self and m != n:
        raise ValueError("exclude_self requires matching target/source arrays")
    out = np.zeros(m, dtype=np.complex128)
    pj2 = (zp.real * zp.real + zp.imag * zp.imag) if n else np.zeros(0)
    rows = _chunk_rows(m, n)
    for i0 in range(0, m, rows):
        i1 = min(m, i0 + rows)
        z = zt[i0:i1, None]
        zt2 = (z.real * z.real + z.imag * z.imag)
        if n:
            d = z - zp[None, :]
            r2 = d.real * d.real + d.imag * d.imag
            p = (zt2 - 1.0) * (pj2[None, :] - 1.0)
            if exclude_self:
                # the diagonal may be 0/0 when dl2 == 0; it is discarded anyway
                with np.errstate(invalid="ignore", divide="ignore"):
                    free = d / (r2 + dl2[None, :])
                idx = np.arange(i0, i1)
                free[idx - i0, idx] = 0.0
            else:
                free = d / (r2 + dl2[None, :])
            img = (z * pj2[None, :] - zp[None, :]) / (r2 + p)
            out[i0:i1] = ((free - img) * gam[None, :]).sum(axis=1)
        if alpha != 0.0:
            out[i0:i1] += alpha * zt[i0:i1] / zt2[:, 0]
    return out


def stream_sum(zt, zp, gam, dl2, alpha):
    """Regularised stream-like sum L1 at each target point (mapped plane).

    L1(zeta) = (1/4pi) sum_j gam_j [ ln(|zeta - zeta_j|^2 + dl2_j)
                                     - ln(|zeta - zeta_j|^2 + P_j) ]
               + (alpha/4pi) ln |zeta|^2

    with P_j = (|zeta|^2 - 1)(|zeta_j|^2 - 1). Uses the same dl2 as the
    velocity sums so that the gradient relation between the two is exact.
    """
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    m, n = zt.shape[0], zp.shape[0]
    out = np.zeros(m, dtype=np.float64)
    pj2 = (zp.real * zp.real + zp.imag * zp.imag) if n else np.zeros(0)
    rows = _chunk_rows(m, n)
    inv4pi = 1.0 / (4.0 * np.pi)
    for i0 in range(0, m, rows):
        i1 = min(m, i0 + rows)
        z = zt[i0:i1, None]
        zt2 = (z.real * z.real + z.imag * z.imag)
        if n:
            d = z - zp[None, :]
            r2 = d.real * d.real + d.imag * d.imag
            p = (zt2 - 1.0) * (pj2[None, :] - 1.0)
            terms = gam[None, :] * (np.log(r2 + dl2[None, :]) - np.log(r2 + p))
            out[i0:i1] = inv4pi * terms.sum(axis=1)
        if alpha != 0.0:
            out[i0:i1] += alpha * inv4pi * np.log(zt2[:, 0])
    return out


def freespace_sum(zt, zp, gam, dl2):
    """Free-plane interaction sum (physical plane, no boundary).

    S(z) = sum_j gam_j (z - z_j) / (|z - z_j|^2 + dl2_j); the free-plane
    velocity is (i / 2 pi) S. With dl2_j > 0 a target sitting exactly on a
    particle contributes zero from that particle, as the blob profile demands.
    """
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    m, n = zt.shape[0], zp.shape[0]
    out = np.zeros(m, dtype=np.complex128)
    if n == 0:
        return out
    rows = _chunk_rows(m, n)
    for i0 in range(0, m, rows):
        i1 = min(m, i0 + rows)
        d = zt[i0:i1, None] - zp[None, :]
        r2 = d.real * d.real + d.imag * d.imag
        out[i0:i1] = (gam[None, :] * d / (r2 + dl2[None, :])).sum(axis=1)
    return out
