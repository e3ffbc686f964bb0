"""Channel estimators: pilot LS, 2-D linear interpolation, genie-aided MMSE,
and the delay-Doppler estimators built on one period of the pilot-sampled
spreading image.

The pilot lattice (spacings d_t, d_f) subsamples the TF response.  Its 2-D
DFT is one period of the true delay-Doppler image, scaled by sqrt(d_t*d_f):

    p[k, l] = sum_i h_i * G(l_i, l) * D(k_i, k)

with the lattice kernels of `kernels`.  Paths whose delay and Doppler fit
inside a single period can be read off this image directly, on-grid paths
exactly, fractional-Doppler paths through the two-bin amplitude ratio rule
implemented in `recover_paths_offgrid`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .channel import Path, PathSet
from .errors import ContractViolationError
from .grids import DDGrid, PeriodCSF, TFGrid, isfft
from .kernels import csf_closed_form, delay_kernel, doppler_kernel
from .txrx import FrameLayout

if TYPE_CHECKING:  # pragma: no cover
    from .config import SystemConfig

CSF_MODES = ("ongrid", "offgrid")


@dataclass(frozen=True)
class PilotObservations:
    """LS channel estimates on the pilot lattice.

    values[i, j] is the estimate at subcarrier i*d_f, symbol j*d_t, so the
    array shape is (M/d_f, N/d_t) and covers the complete lattice.
    """

    values: np.ndarray
    d_t: int
    d_f: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.ndim != 2 or arr.size == 0:
            raise ContractViolationError(
                f"pilot observations must be a non-empty 2-D array, got shape {arr.shape}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def ls_pilot(y: TFGrid, x: TFGrid, layout: FrameLayout) -> PilotObservations:
    """Least-squares estimates y/x at every pilot position."""
    if y.data.shape != x.data.shape:
        raise ContractViolationError(
            f"grid shapes differ: y {y.data.shape} vs x {x.data.shape}"
        )
    xp = x.data[layout.pilot_m, layout.pilot_n]
    if np.any(np.abs(xp) < 1e-300):
        raise ContractViolationError("zero-valued pilot symbol, LS division impossible")
    yp = y.data[layout.pilot_m, layout.pilot_n]
    vals = yp / xp
    # positions are symbol-major with subcarrier fastest, so the lattice
    # restores as (n', m') and transposes to (m', n')
    n_freq = np.unique(layout.pilot_m).size
    n_time = np.unique(layout.pilot_n).size
    grid = vals.reshape(n_time, n_freq).T
    return PilotObservations(grid, d_t=y.n_symbols // n_time, d_f=y.n_subcarriers // n_freq)


def interp_linear(obs: PilotObservations, cfg: "SystemConfig") -> TFGrid:
    """Bilinear pilot interpolation, time axis first, then frequency.

    Between pilots the usual two-point formula applies; past the last pilot
    the final segment's slope is carried on (linear extrapolation).
    """
    _check_lattice(obs, cfg)
    half = _interp_axis(obs.values, cfg.d_t, cfg.N, axis=1)
    full = _interp_axis(half, cfg.d_f, cfg.M, axis=0)
    return TFGrid(full)


def _interp_axis(arr: np.ndarray, step: int, out_len: int, axis: int) -> np.ndarray:
    arr = np.moveaxis(arr, axis, 0)
    knots = arr.shape[0]
    t = np.arange(out_len)
    if knots == 1:
        out = np.broadcast_to(arr[0], (out_len,) + arr.shape[1:]).copy()
        return np.moveaxis(out, 0, axis)
    j = np.minimum(t // step, knots - 2)
    frac = (t - j * step) / step
    shape = (out_len,) + (1,) * (arr.ndim - 1)
    out = arr[j] + (arr[j + 1] - arr[j]) * frac.reshape(shape)
    return np.moveaxis(out, 0, axis)


class CorrelationPair:
    """Exact second-order CTF statistics for a known path support.

    R1 is the (M*N) x n_pilot cross-correlation between the full vectorized
    response and its pilot samples, R2 the n_pilot x n_pilot pilot
    auto-correlation (channel part only, no noise).  Both follow from
    R[(m,n),(m',n')] = sum_i p_i e^{j2pi k_i (n-n')/N} e^{-j2pi l_i (m-m')/M},
    which factors over per-path steering vectors; the factors are kept so
    the big R1 matrix is only materialized when actually accessed.
    """

    def __init__(self, steering_all: np.ndarray, steering_pilot: np.ndarray, powers: np.ndarray):
        self._a_all = steering_all
        self._a_pilot = steering_pilot
        self._p = np.asarray(powers, dtype=np.float64)
        if self._a_all.shape[1] != self._p.size or self._a_pilot.shape[1] != self._p.size:
            raise ContractViolationError("steering matrices and powers disagree on path count")
        self._r1 = None
        self._r2 = None

    @property
    def n_pilot(self) -> int:
        return self._a_pilot.shape[0]

    @property
    def n_all(self) -> int:
        return self._a_all.shape[0]

    @property
    def R1(self) -> np.ndarray:
        if self._r1 is None:
            self._r1 = (self._a_all * self._p) @ self._a_pilot.conj().T
        return self._r1

    @property
    def R2(self) -> np.ndarray:
        if self._r2 is None:
            r2 = (self._a_pilot * self._p) @ self._a_pilot.conj().T
            scale = np.abs(r2).max()
            if scale > 0 and np.abs(r2 - r2.conj().T).max() > 1e-10 * scale:
                raise ContractViolationError("pilot correlation came out non-Hermitian")
            self._r2 = (r2 + r2.conj().T) / 2.0
        return self._r2

    def apply_r1(self, vec: np.ndarray) -> np.ndarray:
        """R1 @ vec through the steering factors, without forming R1."""
        return self._a_all @ (self._p * (self._a_pilot.conj().T @ vec))


def genie_correlations(ps: PathSet, cfg: "SystemConfig", layout: FrameLayout) -> CorrelationPair:
    """Correlations a genie would hand the MMSE estimator: exact path support
    (delays and Dopplers) with ensemble gain variances."""
    m = np.arange(cfg.M)
    n = np.arange(cfg.N)
    freq = np.exp(-2j * np.pi * np.outer(m, ps.delays) / cfg.M)  # (M, P)
    time = np.exp(2j * np.pi * np.outer(n, ps.dopplers) / cfg.N)  # (N, P)
    # steering grid per path, flattened symbol-major (subcarrier fastest)
    a_all = (freq[:, None, :] * time[None, :, :]).reshape(cfg.M * cfg.N, len(ps), order="F")
    a_pilot = freq[layout.pilot_m] * time[layout.pilot_n]
    return CorrelationPair(a_all, a_pilot, ps.powers)


@dataclass(frozen=True)
class MmseEstimate:
    """MMSE solution plus a flag for the rank-deficient noiseless fallback."""

    grid: TFGrid
    used_least_norm: bool = False


def mmse_estimate(
    obs: PilotObservations, corr: CorrelationPair, noise_var: float, cfg: "SystemConfig"
) -> MmseEstimate:
    """Linear MMSE interpolation of the pilot estimates to the full grid.

    Solves (R2 + noise_var*I) z = obs and returns R1 z.  The system matrix is
    Hermitian positive definite for noise_var > 0 and is attacked with a
    Cholesky factorization; if that fails a diagonal jitter of
    1e-12 * trace/n is added once.  For noise_var = 0 the (generally rank
    deficient) system falls back to the least-norm solution.
    """
    if noise_var < 0:
        raise ContractViolationError(f"noise_var must be >= 0, got {noise_var}")
    _check_lattice(obs, cfg)
    obs_vec = obs.values.flatten(order="F")  # symbol-major, subcarrier fastest
    r2 = corr.R2
    if obs_vec.size != corr.n_pilot:
        raise ContractViolationError(
            f"correlations built for {corr.n_pilot} pilots, observations have {obs_vec.size}"
        )
    used_least_norm = False
    if noise_var == 0:
        z, *_ = np.linalg.lstsq(r2, obs_vec, rcond=None)
        used_least_norm = True
    else:
        a = r2 + noise_var * np.eye(r2.shape[0])
        try:
            z = cho_solve(cho_factor(a, lower=True), obs_vec)
        except LinAlgError:
            jitter = 1e-12 * np.trace(a).real / a.shape[0]
            z = cho_solve(cho_factor(a + jitter * np.eye(a.shape[0]), lower=True), obs_vec)
    h_vec = corr.apply_r1(z)
    grid = TFGrid(h_vec.reshape(cfg.M, cfg.N, order="F"))
    return MmseEstimate(grid, used_least_norm)


def _check_lattice(obs: PilotObservations, cfg: "SystemConfig"):
    want = (cfg.M // cfg.d_f, cfg.N // cfg.d_t)
    if obs.values.shape != want or (obs.d_t, obs.d_f) != (cfg.d_t, cfg.d_f):
        raise ContractViolationError(
            f"pilot lattice {obs.values.shape} with spacings "
            f"(d_t={obs.d_t}, d_f={obs.d_f}) does not match config lattice "
            f"{want} with (d_t={cfg.d_t}, d_f={cfg.d_f})"
        )


def periodic_csf(obs: PilotObservations, cfg: "SystemConfig") -> PeriodCSF:
    """One period of the delay-Doppler image, from the pilot lattice.

    Computed as the orthonormal 2-D DFT of the (M/d_f) x (N/d_t) pilot grid
    (inverse along frequency, forward along time) scaled by sqrt(d_t*d_f),
    which matches the closed-form lattice kernels exactly.  Doppler rows come
    out centered.
    """
    _check_lattice(obs, cfg)
    tmp = np.fft.ifft(obs.values, axis=0, norm="ortho")  # m' -> l
    tmp = np.fft.fft(tmp, axis=1, norm="ortho")  # n' -> k
    period = np.sqrt(cfg.d_t * cfg.d_f) * tmp.T  # (N/d_t, M/d_f), k standard order
    return PeriodCSF(np.fft.fftshift(period, axes=0), d_t=cfg.d_t, d_f=cfg.d_f)


def csf_ongrid(p: PeriodCSF, cfg: "SystemConfig") -> DDGrid:
    """Embed the period at its place in the full N x M delay-Doppler grid.

    Doppler rows k in [-N/(2*d_t), N/(2*d_t)) map to rows k mod N, delay
    columns to l in [0, M/d_f); everything else is zero.  For on-grid paths
    inside that support this reproduces the exact image (no aliasing).
    """
    if (p.full_n, p.full_m) != (cfg.N, cfg.M):
        raise ContractViolationError(
            f"period covers a {p.full_n}x{p.full_m} grid, config wants {cfg.N}x{cfg.M}"
        )
    full = np.zeros((cfg.N, cfg.M), dtype=np.complex128)
    rows = p.doppler_axis % cfg.N
    full[rows[:, None], np.arange(p.n_delay)[None, :]] = p.data
    return DDGrid(full)


def _machine_floor(data: np.ndarray) -> float:
    """Magnitude below which period entries count as numerically zero."""
    peak = float(np.abs(data).max())
    return data.size * np.finfo(np.float64).eps * peak


def _occupied_columns(p: PeriodCSF, noise_var: float, cfg: "SystemConfig") -> np.ndarray:
    """Boolean mask of delay columns whose Doppler-axis peak clears the
    detection threshold.

    Pilot LS noise of variance noise_var lands in the period as i.i.d.
    entries of variance noise_var * d_t * d_f, so the threshold is
    gamma * sqrt(noise_var * d_t * d_f).  In the noiseless case a
    machine-precision floor stands in so that exact zeros never count.
    """
    if noise_var < 0:
        raise ContractViolationError(f"noise_var must be >= 0, got {noise_var}")
    peaks = np.abs(p.data).max(axis=0)
    if noise_var > 0:
        thr = cfg.gamma_threshold * np.sqrt(noise_var * cfg.d_t * cfg.d_f)
    else:
        thr = _machine_floor(p.data)
    return peaks > thr


def estimate_num_paths(p: PeriodCSF, noise_var: float, cfg: "SystemConfig") -> int:
    """Count delay bins that hold signal, by the `_occupied_columns` rule."""
    return int(_occupied_columns(p, noise_var, cfg).sum())


def recover_paths_offgrid(p: PeriodCSF, n_paths: int, cfg: "SystemConfig"):
    """Iterative path readout with fractional-Doppler refinement.

    Per iteration: take the strongest remaining entry (k0, l0) (ties go to
    the smallest delay, then the smallest centered Doppler), pick the larger
    of its two Doppler neighbors k0', place the Doppler estimate at

        k_hat = k0 + |p[k0']| * (k0' - k0) / (|p[k0]| + |p[k0']|)

    (the two-bin amplitude ratio rule, clamped to half a bin), read the gain
    by dividing out both lattice kernels at the estimated offset, then null
    the whole Doppler column at l0 and continue.

    Returns (PathSet or None, truncated): None when nothing rose above the
    numerical floor, truncated=True when fewer than n_paths columns held
    signal.
    """
    if n_paths < 1:
        raise ContractViolationError(f"n_paths must be >= 1, got {n_paths}")
    work = p.data.copy()
    n_dopp = p.n_doppler
    k_min = p.k_min
    floor = _machine_floor(work)
    found = []
    truncated = False
    for _ in range(n_paths):
        mags = np.abs(work)
        if mags.max() <= floor:
            truncated = True
            break
        # argmax over the transpose scans delay-major: ties resolve to the
        # smallest l, then the smallest centered k
        flat = int(np.argmax(mags.T))
        l0, row0 = divmod(flat, n_dopp)
        k0 = row0 + k_min
        a0 = mags[row0, l0]
        a_minus = mags[(row0 - 1) % n_dopp, l0]
        a_plus = mags[(row0 + 1) % n_dopp, l0]
        step = 1 if a_plus >= a_minus else -1
        a1 = a_plus if step == 1 else a_minus
        k_frac = float(np.clip(step * a1 / (a0 + a1), -0.5, 0.5))
        k_hat = k0 + k_frac
        denom = delay_kernel(l0, l0, p.full_m, p.d_f) * doppler_kernel(k_hat, k0, p.full_n, p.d_t)
        gain = complex(work[row0, l0] / denom)
        found.append(Path(gain=gain, delay_idx=l0, doppler=k_hat))
        work[:, l0] = 0.0
    if not found:
        return None, True
    return PathSet(tuple(found)), truncated


def csf_reconstruct(ps_hat: PathSet, cfg: "SystemConfig") -> DDGrid:
    """Full-grid delay-Doppler image of recovered paths via the closed-form
    kernels; identical math to the ground-truth image of a true path set."""
    return DDGrid(csf_closed_form(ps_hat.gains, ps_hat.delays, ps_hat.dopplers, cfg.M, cfg.N))


@dataclass(frozen=True)
class CsfEstimate:
    """Everything the delay-Doppler estimators produce on the way to a CTF."""

    period: PeriodCSF
    paths_hat: PathSet | None
    full_dd: DDGrid
    truncated: bool = False


def estimate_csf(
    y: TFGrid,
    x: TFGrid,
    layout: FrameLayout,
    cfg: "SystemConfig",
    mode: str,
    noise_var: float,
) -> CsfEstimate:
    """Pilot LS -> period -> full delay-Doppler estimate.

    mode "ongrid" embeds the period with noise-only delay columns zeroed
    first (the same per-column detection rule the off-grid mode uses);
    without that gate every empty column would leak its pilot noise into
    the CTF.  mode "offgrid" detects the number of occupied delay bins,
    recovers each path with fractional Doppler and rebuilds the image from
    the recovered paths.  An offgrid run that detects nothing returns an
    all-zero image with paths_hat = None.
    """
    if mode not in CSF_MODES:
        raise ContractViolationError(f"unknown mode '{mode}', valid: {CSF_MODES}")
    obs = ls_pilot(y, x, layout)
    period = periodic_csf(obs, cfg)
    if mode == "ongrid":
        keep = _occupied_columns(period, noise_var, cfg)
        gated = PeriodCSF(
            np.where(keep[None, :], period.data, 0.0), d_t=period.d_t, d_f=period.d_f
        )
        return CsfEstimate(period, None, csf_ongrid(gated, cfg))
    n_paths = estimate_num_paths(period, noise_var, cfg)
    if n_paths == 0:
        zero = DDGrid(np.zeros((cfg.N, cfg.M), dtype=np.complex128))
        return CsfEstimate(period, None, zero, truncated=True)
    ps_hat, truncated = recover_paths_offgrid(period, n_paths, cfg)
    if ps_hat is None:
        zero = DDGrid(np.zeros((cfg.N, cfg.M), dtype=np.complex128))
        return CsfEstimate(period, None, zero, truncated=True)
    return CsfEstimate(period, ps_hat, csf_reconstruct(ps_hat, cfg), truncated=truncated)


def csf_ctf_estimate(
    y: TFGrid,
    x: TFGrid,
    layout: FrameLayout,
    cfg: "SystemConfig",
    mode: str,
    noise_var: float,
) -> TFGrid:
    """CTF estimate over the whole frame from the delay-Doppler pipeline."""
    return isfft(estimate_csf(y, x, layout, cfg, mode, noise_var).full_dd, cfg)
