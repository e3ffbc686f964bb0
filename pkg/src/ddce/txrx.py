"""Modulation, frame assembly and the single-tap equalizer."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractViolationError
from .grids import TFGrid

if TYPE_CHECKING:  # pragma: no cover
    from .config import SystemConfig

# Unit-energy pilot symbol, same energy as the data constellation.
PILOT_VALUE = (1.0 + 1.0j) / np.sqrt(2.0)

NEAR_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class PilotPattern:
    """Rectangular pilot lattice: every d_f-th subcarrier, every d_t-th symbol."""

    d_t: int
    d_f: int
    pilot_value: complex = PILOT_VALUE

    def __post_init__(self):
        if self.d_t < 1 or self.d_f < 1:
            raise ContractViolationError(
                f"pilot spacings must be >= 1, got d_t={self.d_t}, d_f={self.d_f}"
            )
        if abs(self.pilot_value) == 0:
            raise ContractViolationError("pilot_value must be non-zero")


@dataclass(frozen=True)
class FrameLayout:
    """Index arrays for pilot and data resource elements.

    Positions are ordered symbol-major with the subcarrier index fastest,
    and the arrays are what all vectorized grid lookups use.
    """

    pilot_m: np.ndarray
    pilot_n: np.ndarray
    data_m: np.ndarray
    data_n: np.ndarray

    def __post_init__(self):
        for name in ("pilot_m", "pilot_n", "data_m", "data_n"):
            arr = np.asarray(getattr(self, name), dtype=np.intp)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_pilot(self) -> int:
        return self.pilot_m.size

    @property
    def n_data(self) -> int:
        return self.data_m.size


@lru_cache(maxsize=16)
def _layout_arrays(big_m: int, big_n: int, d_t: int, d_f: int):
    if big_n % d_t or big_m % d_f:
        raise ContractViolationError(
            f"pilot lattice must divide the grid: M={big_m} vs d_f={d_f}, N={big_n} vs d_t={d_t}"
        )
    is_pilot = np.zeros((big_m, big_n), dtype=bool)
    is_pilot[::d_f, ::d_t] = True
    nn, mm = np.meshgrid(np.arange(big_n), np.arange(big_m), indexing="ij")
    pilot_mask = is_pilot[mm, nn]
    pm, pn = mm[pilot_mask], nn[pilot_mask]
    dm, dn = mm[~pilot_mask], nn[~pilot_mask]
    return pm, pn, dm, dn


def make_layout(pattern: PilotPattern, cfg: "SystemConfig") -> FrameLayout:
    """Deterministic pilot/data layout of an M x N frame."""
    pm, pn, dm, dn = _layout_arrays(cfg.M, cfg.N, pattern.d_t, pattern.d_f)
    return FrameLayout(pm, pn, dm, dn)


def qam4_mod(bits) -> np.ndarray:
    """Gray-mapped 4-QAM: bit pair (b1, b0) -> ((1-2*b1) + j*(1-2*b0))/sqrt(2)."""
    b = np.asarray(bits)
    if b.ndim != 1 or b.size % 2:
        raise ContractViolationError(f"bit array must be 1-D with even length, got shape {b.shape}")
    if b.size and not np.isin(b, (0, 1)).all():
        raise ContractViolationError("bits must be 0 or 1")
    b1 = b[0::2].astype(np.float64)
    b0 = b[1::2].astype(np.float64)
    return ((1.0 - 2.0 * b1) + 1j * (1.0 - 2.0 * b0)) / np.sqrt(2.0)


def qam4_demod(symbols) -> np.ndarray:
    """Nearest-point hard decisions; boundary ties resolve to bit 0."""
    s = np.asarray(symbols, dtype=np.complex128)
    out = np.empty(2 * s.size, dtype=np.int64)
    out[0::2] = (s.real < 0).astype(np.int64)
    out[1::2] = (s.imag < 0).astype(np.int64)
    return out


def build_frame(data_syms, pattern: PilotPattern, cfg: "SystemConfig"):
    """Place pilots on the lattice and data symbols everywhere else.

    Returns the transmit TF grid together with the layout used to fill it.
    """
    layout = make_layout(pattern, cfg)
    syms = np.asarray(data_syms, dtype=np.complex128)
    if syms.ndim != 1 or syms.size != layout.n_data:
        raise ContractViolationError(
            f"expected {layout.n_data} data symbols for an {cfg.M}x{cfg.N} frame, got {syms.size}"
        )
    grid = np.zeros((cfg.M, cfg.N), dtype=np.complex128)
    grid[layout.pilot_m, layout.pilot_n] = pattern.pilot_value
    grid[layout.data_m, layout.data_n] = syms
    return TFGrid(grid), layout


def extract_data(tf: TFGrid, layout: FrameLayout) -> np.ndarray:
    """Data-position values of a frame, in layout order."""
    return tf.data[layout.data_m, layout.data_n]


def equalize_single_tap(y: TFGrid, h_hat: TFGrid, layout: FrameLayout):
    """Per-RE division x_hat = y / h_hat at the data positions.

    Estimates with |h_hat| below NEAR_SINGULAR_TOL yield x_hat = 0 instead of
    blowing up; the count of such REs is returned alongside the symbols.
    """
    if y.data.shape != h_hat.data.shape:
        raise ContractViolationError(
            f"grid shapes differ: y {y.data.shape} vs h_hat {h_hat.data.shape}"
        )
    yv = y.data[layout.data_m, layout.data_n]
    hv = h_hat.data[layout.data_m, layout.data_n]
    bad = np.abs(hv) < NEAR_SINGULAR_TOL
    safe = np.where(bad, 1.0, hv)
    x_hat = np.where(bad, 0.0, yv / safe)
    return x_hat, int(bad.sum())
