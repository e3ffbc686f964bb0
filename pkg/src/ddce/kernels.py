"""Closed-form Dirichlet kernels of sampled delay-Doppler responses.

A single propagation path with Doppler index k_i (possibly fractional) and
integer delay index l_i shows up on a DD grid as the outer product of two
geometric sums.  With pilot spacings d_t (time) and d_f (frequency) the sums
run over the N/d_t x M/d_f lattice and collapse to ratios of sines:

    D(k_i, k) = d_t/sqrt(N) * e^{+j*pi*dlt*d_t*(N/d_t-1)/N} * sin(pi*dlt) / sin(pi*d_t*dlt/N)
    G(l_i, l) = d_f/sqrt(M) * e^{-j*pi*dlt*d_f*(M/d_f-1)/M} * sin(pi*dlt) / sin(pi*d_f*dlt/M)

with dlt the Doppler (resp. delay) offset k_i - k (resp. l_i - l).  Both peak
at sqrt(N) (resp. sqrt(M)) when the offset vanishes and are exactly periodic
in the offset with period N/d_t (resp. M/d_f).  Setting d_t = d_f = 1 gives
the kernels of the full grid.
"""

from __future__ import annotations

import numpy as np


def _dirichlet(delta, total: int, spacing: int, phase_sign: int) -> np.ndarray:
    """Common sine-ratio evaluation, wrapped onto the principal period."""
    period = total // spacing
    delta = np.asarray(delta, dtype=np.float64)
    dw = (delta + period / 2.0) % period - period / 2.0
    out = np.full(dw.shape, np.sqrt(total), dtype=np.complex128)
    regular = np.abs(dw) >= 1e-9
    d = dw[regular]
    phase = np.exp(1j * phase_sign * np.pi * d * spacing * (period - 1) / total)
    out[regular] = (
        spacing / np.sqrt(total) * phase * np.sin(np.pi * d) / np.sin(np.pi * spacing * d / total)
    )
    return out


def doppler_kernel(k_i: float, k, n_symbols: int, d_t: int = 1):
    """Doppler-axis kernel sum_{n'} e^{+j2pi n' d_t (k_i-k)/N} / sqrt(N/d_t^2).

    Evaluates to sqrt(N) at k = k_i (mod N/d_t) and to zero at every other
    integer offset.  `k` may be an array.
    """
    res = _dirichlet(np.asarray(k_i) - np.asarray(k), n_symbols, d_t, +1)
    return res if res.shape else complex(res)


def delay_kernel(l_i: float, l, n_subcarriers: int, d_f: int = 1):
    """Delay-axis kernel sum_{m'} e^{-j2pi m' d_f (l_i-l)/M} / sqrt(M/d_f^2).

    Mirror image of `doppler_kernel` with the opposite phase sign; peak value
    sqrt(M) at l = l_i (mod M/d_f).
    """
    res = _dirichlet(np.asarray(l_i) - np.asarray(l), n_subcarriers, d_f, -1)
    return res if res.shape else complex(res)


def doppler_alias_difference(k_i: float, k, n_symbols: int, d_t: int):
    """Full-grid Doppler kernel minus its lattice-sampled period embedding.

    For centered Doppler indices inside the period [-N/(2 d_t), N/(2 d_t))
    this is the pointwise difference of the two kernels; outside, where the
    embedding is zero, it is the full-grid kernel itself.  This is the exact
    per-path aliasing error of estimating the DD image from lattice pilots.
    """
    k = np.asarray(k)
    half = n_symbols // (2 * d_t)
    inside = (k >= -half) & (k < half)
    full = doppler_kernel(k_i, k, n_symbols, 1)
    periodic = doppler_kernel(k_i, k, n_symbols, d_t)
    return np.where(inside, np.asarray(full) - np.asarray(periodic), full)


def csf_closed_form(gains, delays, dopplers, n_subcarriers: int, n_symbols: int) -> np.ndarray:
    """Full N x M delay-Doppler image of a path set, by closed-form kernels.

    Returns rows in standard Doppler order (r = k mod N), matching `DDGrid`.
    """
    k_axis = np.arange(n_symbols)
    l_axis = np.arange(n_subcarriers)
    acc = np.zeros((n_symbols, n_subcarriers), dtype=np.complex128)
    for g, l_i, k_i in zip(gains, delays, dopplers):
        col = doppler_kernel(k_i, k_axis, n_symbols, 1)
        row = delay_kernel(l_i, l_axis, n_subcarriers, 1)
        acc += g * np.outer(col, row)
    return acc
