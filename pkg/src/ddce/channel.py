"""Doubly-selective multipath channel: path generation and ground truth.

Each path i carries a complex gain h_i, an integer delay index l_i (units of
1/(M*delta_f)) and a Doppler index k_i = nu_i * N * T, which is real valued
in general.  The channel transfer function over the frame is

    h_tf[m, n] = sum_i h_i * e^{+j2pi*k_i*n/N} * e^{-j2pi*l_i*m/M}

Gains are Rayleigh: i.i.d. circularly-symmetric complex Gaussian with the
per-tap variance taken from the power-delay profile.  Dopplers follow the
classic cosine model k_i = k_max * cos(theta_i), theta_i ~ U[0, 2pi).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractViolationError, ProfileError, SupportError
from .grids import DDGrid, TFGrid
from .kernels import csf_closed_form

if TYPE_CHECKING:  # pragma: no cover
    from .config import SystemConfig

C_LIGHT = 3.0e8  # m/s

# Extended Vehicular A power-delay profile (delay ns, mean power dB).
EVA_TAP_DELAYS_NS = (0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0)
EVA_TAP_POWERS_DB = (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9)


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile plus the mobility numbers that set the Doppler spread."""

    tap_delays_ns: tuple
    tap_powers_db: tuple
    v_kmh: float
    f_c_hz: float

    def __post_init__(self):
        if len(self.tap_delays_ns) == 0 or len(self.tap_delays_ns) != len(self.tap_powers_db):
            raise ProfileError(
                "profile needs matching, non-empty delay and power lists "
                f"(got {len(self.tap_delays_ns)} delays, {len(self.tap_powers_db)} powers)"
            )
        if any(d < 0 for d in self.tap_delays_ns):
            raise ProfileError("tap delays must be non-negative")
        if self.v_kmh < 0 or self.f_c_hz <= 0:
            raise ProfileError("need v_kmh >= 0 and f_c_hz > 0")
        object.__setattr__(self, "tap_delays_ns", tuple(float(d) for d in self.tap_delays_ns))
        object.__setattr__(self, "tap_powers_db", tuple(float(p) for p in self.tap_powers_db))

    @property
    def n_taps(self) -> int:
        return len(self.tap_delays_ns)

    @property
    def tap_powers_lin(self) -> np.ndarray:
        """Linear tap powers, normalized to sum to 1."""
        p = 10.0 ** (np.asarray(self.tap_powers_db) / 10.0)
        return p / p.sum()

    @property
    def nu_max_hz(self) -> float:
        """Maximum Doppler shift v * f_c / c."""
        return (self.v_kmh / 3.6) * self.f_c_hz / C_LIGHT


@dataclass(frozen=True)
class Path:
    """One resolved propagation path on the sampling grid."""

    gain: complex
    delay_idx: int
    doppler: float
    # Ensemble gain variance; kept so statistics-aided estimators can build
    # exact correlations.  Falls back to |gain|^2 for hand-built sets.
    power: float | None = None

    def __post_init__(self):
        if self.delay_idx < 0 or self.delay_idx != int(self.delay_idx):
            raise ContractViolationError(
                f"delay_idx must be a non-negative integer, got {self.delay_idx}"
            )


@dataclass(frozen=True)
class PathSet:
    """A non-empty set of paths, at most one per delay bin."""

    paths: tuple

    def __post_init__(self):
        if len(self.paths) < 1:
            raise ContractViolationError("PathSet needs at least one path")
        delays = [p.delay_idx for p in self.paths]
        if len(set(delays)) != len(delays):
            raise ContractViolationError(f"duplicate delay bins in PathSet: {sorted(delays)}")
        object.__setattr__(self, "paths", tuple(self.paths))

    def __len__(self) -> int:
        return len(self.paths)

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=np.complex128)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay_idx for p in self.paths], dtype=np.int64)

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler for p in self.paths], dtype=np.float64)

    @property
    def powers(self) -> np.ndarray:
        """Ensemble gain variances, defaulting to |gain|^2 where unset."""
        return np.array(
            [p.power if p.power is not None else abs(p.gain) ** 2 for p in self.paths],
            dtype=np.float64,
        )


def quantize_delays(profile: ChannelProfile, cfg: "SystemConfig") -> np.ndarray:
    """Round profile delays to grid indices and check they stay usable.

    Raises ProfileError if two taps land in the same bin (merge them first)
    and SupportError if a tap falls past the guaranteed delay range.
    """
    idx = np.rint(np.asarray(profile.tap_delays_ns) * 1e-9 * cfg.M * cfg.delta_f_hz).astype(int)
    if len(set(idx.tolist())) != len(idx):
        raise ProfileError(
            f"quantized tap delays collide on the grid: {idx.tolist()}; "
            "merge colliding taps into shared bins before use"
        )
    l_max = cfg.M // cfg.d_f - 1
    if idx.max() > l_max:
        raise SupportError(
            f"max quantized delay {idx.max()} exceeds M/d_f - 1 = {l_max}; "
            "delays must satisfy tau <= 1/(d_f*delta_f) - 1/(M*delta_f)"
        )
    return idx


def merge_profile_taps(profile: ChannelProfile, cfg: "SystemConfig") -> ChannelProfile:
    """Collapse taps that share a quantized delay bin, summing linear powers.

    Standard profiles are finer than a coarse grid resolves; this returns the
    equivalent grid-resolution profile with one tap per occupied bin.
    """
    idx = np.rint(np.asarray(profile.tap_delays_ns) * 1e-9 * cfg.M * cfg.delta_f_hz).astype(int)
    lin = 10.0 ** (np.asarray(profile.tap_powers_db) / 10.0)
    step_ns = 1e9 / (cfg.M * cfg.delta_f_hz)
    bins = sorted(set(idx.tolist()))
    delays = [b * step_ns for b in bins]
    powers_db = [10.0 * np.log10(lin[idx == b].sum()) for b in bins]
    return ChannelProfile(tuple(delays), tuple(powers_db), profile.v_kmh, profile.f_c_hz)


def gen_paths(cfg: "SystemConfig", profile: ChannelProfile, rng: np.random.Generator) -> PathSet:
    """Draw one channel realization on the sampling grid.

    Rayleigh gains with profile powers, cosine-model Dopplers scaled to grid
    units (k_max = N * T * nu_max), delays quantized to grid indices.  With
    cfg.on_grid_doppler the Doppler indices are rounded to integers.
    """
    delays = quantize_delays(profile, cfg)
    k_max = cfg.N * cfg.T * profile.nu_max_hz
    k_bound = cfg.N / (2 * cfg.d_t) - 1
    if k_max > k_bound:
        raise SupportError(
            f"Doppler spread too large: N*T*nu_max = {k_max:.4g} exceeds "
            f"N/(2*d_t) - 1 = {k_bound:.4g}; need nu_max <= 1/(2*d_t*T) - 1/(N*T)"
        )
    p_lin = profile.tap_powers_lin
    n = profile.n_taps
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    gains = (re + 1j * im) * np.sqrt(p_lin / 2.0)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    dopplers = k_max * np.cos(theta)
    if cfg.on_grid_doppler:
        dopplers = np.rint(dopplers)
    return PathSet(
        tuple(
            Path(gain=complex(g), delay_idx=int(l), doppler=float(k), power=float(p))
            for g, l, k, p in zip(gains, delays, dopplers, p_lin)
        )
    )


def _ctf(ps: PathSet, n_subcarriers: int, n_symbols: int) -> np.ndarray:
    m = np.arange(n_subcarriers)
    n = np.arange(n_symbols)
    freq = np.exp(-2j * np.pi * np.outer(m, ps.delays) / n_subcarriers)  # (M, P)
    time = np.exp(2j * np.pi * np.outer(ps.dopplers, n) / n_symbols)  # (P, N)
    return (freq * ps.gains) @ time


def ctf_from_paths(ps: PathSet, cfg: "SystemConfig") -> TFGrid:
    """Exact channel transfer function of a path set over the M x N frame."""
    return TFGrid(_ctf(ps, cfg.M, cfg.N))


def csf_from_paths(ps: PathSet, cfg: "SystemConfig") -> DDGrid:
    """Exact delay-Doppler image of a path set on the full N x M grid.

    Equals sfft(ctf_from_paths(ps, cfg)) but evaluated through the
    closed-form kernels, which also makes it the reconstruction rule for
    estimated (fractional-Doppler) path sets.
    """
    return DDGrid(csf_closed_form(ps.gains, ps.delays, ps.dopplers, cfg.M, cfg.N))


def _draw_noise(shape, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(noise_var / 2.0)


def apply_channel_diag(x: TFGrid, ps: PathSet, noise_var: float, rng: np.random.Generator) -> TFGrid:
    """Diagonal (ICI-free) channel: y = h_tf o x + w, AWGN variance noise_var."""
    if noise_var < 0:
        raise ContractViolationError(f"noise_var must be >= 0, got {noise_var}")
    h = _ctf(ps, x.n_subcarriers, x.n_symbols)
    w = _draw_noise(x.data.shape, noise_var, rng)
    return TFGrid(h * x.data + w)


def apply_channel_full(x: TFGrid, ps: PathSet, noise_var: float, rng: np.random.Generator) -> TFGrid:
    """Exact per-symbol channel including inter-carrier interference.

    For each OFDM symbol n the time-domain samples of the frame pick up, per
    path, the symbol-level phase e^{j2pi*k_i*n/N} and the intra-symbol ramp
    e^{j2pi*k_i*m/(M*N)}, get cyclically shifted by l_i samples, and return
    to the frequency domain.  With all k_i = 0 this reduces exactly to the
    diagonal model (identical noise draw included).
    """
    if noise_var < 0:
        raise ContractViolationError(f"noise_var must be >= 0, got {noise_var}")
    big_m, big_n = x.data.shape
    xt = np.fft.ifft(x.data, axis=0, norm="ortho")  # per-symbol time samples
    samples = np.arange(big_m)
    symbols = np.arange(big_n)
    y = np.zeros_like(x.data)
    for p in ps.paths:
        ramp = np.exp(2j * np.pi * p.doppler * samples / (big_m * big_n))
        sym_phase = np.exp(2j * np.pi * p.doppler * symbols / big_n)
        t = xt * ramp[:, None] * sym_phase[None, :]
        t = np.roll(t, p.delay_idx, axis=0)
        y += p.gain * np.fft.fft(t, axis=0, norm="ortho")
    w = _draw_noise(x.data.shape, noise_var, rng)
    return TFGrid(y + w)
