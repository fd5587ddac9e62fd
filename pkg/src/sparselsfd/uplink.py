"""Uplink combining and Monte Carlo decoding statistics.

Each AP combines locally (MR or local MMSE) and forwards per-UE soft
estimates; the central unit fuses them with weights based only on
statistics.  This module estimates those statistics: for UE k,
A_k = sum_i p_i E{g_ki g_ki^H} + noise_var diag(E||v_k1||^2, ...),
b_k = sqrt(p_k) E{g_kk}, with g_ki the vector of v_kl^H h_il across APs.

Expectations are sample means over coherence blocks, accumulated in fixed
chunk order so results are bit-identical for any worker count.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .pilots import BLOCK_CHUNK, _DrawWork, _draw_chunk


class Combiner(enum.Enum):
    MR = "mr"
    LMMSE = "lmmse"


@dataclass(frozen=True)
class LsfdStatistics:
    """Decoding statistics per UE: A (K, L, L), b (K, L), powers p (K,)."""

    A: np.ndarray
    b: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        for arr in (self.A, self.b, self.p):
            arr.flags.writeable = False


def mr_combiner(h_hat):
    """Maximum-ratio combining: the channel estimate itself."""
    return np.asarray(h_hat)


def lmmse_combiner(h_hats, error_covs, p, noise_var):
    """Local MMSE combiners for all UEs at one AP, one shared inverse.

    h_hats is (K, N) estimates, error_covs (K, N, N), p (K,) transmit
    powers.  Returns (K, N): v_k = p_k (sum_i p_i (hhat_i hhat_i^H + C_i)
    + noise_var I)^-1 hhat_k.
    """
    h_hats = np.asarray(h_hats)
    n = h_hats.shape[1]
    m = np.einsum("k,kn,km->nm", p, h_hats, h_hats.conj())
    m += np.tensordot(p, error_covs, axes=1)
    m += noise_var * np.eye(n)
    return (np.linalg.solve(m, h_hats.T) * p).T


def _chunk_moments(work, p, noise_var, combiner, err_cov_sum, seed, chunk, n_in_chunk):
    """Partial sums over one chunk: (sum_A (K,L,L), sum_b (K,L), sum_vnorm (L,K))."""
    h, h_hat = _draw_chunk(work, seed, chunk, n_in_chunk)
    # (blocks, L, N, K) layouts for per-AP matrix work
    ht = np.transpose(h, (0, 2, 3, 1))
    vt = np.transpose(h_hat, (0, 2, 3, 1))
    if combiner is Combiner.LMMSE:
        n = work.cfg.N
        # one Hermitian inverse per (block, AP), reused across UEs
        m = np.einsum("i,blni,blmi->blnm", p, vt, vt.conj())
        m += err_cov_sum[None, :]
        m += noise_var * np.eye(n)
        vt = np.linalg.solve(m, vt) * p
    g = np.einsum("blnk,blni->blki", vt.conj(), ht)
    vnorm = np.sum(np.abs(vt) ** 2, axis=2)  # (blocks, L, K)
    n_ue = work.cfg.K
    sum_a = np.empty((n_ue, work.cfg.L, work.cfg.L), dtype=complex)
    for k in range(n_ue):
        gk = g[:, :, k, :]
        sum_a[k] = np.tensordot(gk * p, gk.conj(), axes=([0, 2], [0, 2]))
    diag = g[:, :, np.arange(n_ue), np.arange(n_ue)]  # (blocks, L, K)
    sum_b = diag.sum(axis=0).T
    sum_vnorm = vnorm.sum(axis=0)
    return sum_a, sum_b, sum_vnorm


def estimate_lsfd_statistics(
    instance, plan, stats, combiner, p, n_blocks, seed, n_workers=1
):
    """Monte Carlo estimate of (A_k, b_k) over n_blocks coherence blocks.

    Chunks may be evaluated concurrently (n_workers threads); partial sums
    are reduced in fixed chunk order, so the result does not depend on
    n_workers.  A_k is Hermitian-symmetrized after accumulation.
    """
    if n_blocks <= 0:
        raise ValueError("n_blocks must be positive")
    p = np.asarray(p, dtype=float)
    if p.shape != (instance.cfg.K,) or np.any(p < 0):
        raise ValueError("p must hold one nonnegative power per UE")
    cfg = instance.cfg
    work = _DrawWork(instance, plan, stats)
    err_cov_sum = None
    if combiner is Combiner.LMMSE:
        # per-AP power-weighted sum of error covariances, fixed across blocks
        err_cov_sum = np.einsum("k,klnm->lnm", p, stats.C)
    spans = [
        (chunk, min(start + BLOCK_CHUNK, n_blocks) - start)
        for chunk, start in enumerate(range(0, n_blocks, BLOCK_CHUNK))
    ]

    def run(span):
        chunk, size = span
        return _chunk_moments(
            work, p, cfg.noise_var, combiner, err_cov_sum, seed, chunk, size
        )

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    sum_a = sum(part[0] for part in parts)
    sum_b = sum(part[1] for part in parts)
    sum_vnorm = sum(part[2] for part in parts)
    big_a = sum_a / n_blocks
    mean_vnorm = sum_vnorm / n_blocks  # (L, K)
    for k in range(cfg.K):
        big_a[k] += cfg.noise_var * np.diag(mean_vnorm[:, k])
    big_a = 0.5 * (big_a + np.conj(np.swapaxes(big_a, -2, -1)))
    b = np.sqrt(p)[:, None] * (sum_b / n_blocks)
    return LsfdStatistics(A=big_a, b=b, p=p.copy())
