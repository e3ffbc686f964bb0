"""Frame assembly, 4-QAM mapping, and the single-tap equalizer."""

import unittest

import numpy as np

from ddce.channel import ChannelProfile
from ddce.config import SystemConfig
from ddce.errors import ContractViolationError
from ddce.grids import TFGrid
from ddce.txrx import (
    NEAR_SINGULAR_TOL,
    PILOT_VALUE,
    PilotPattern,
    build_frame,
    equalize_single_tap,
    extract_data,
    make_layout,
    qam4_demod,
    qam4_mod,
)

S = 1.0 / np.sqrt(2.0)


def small_cfg(big_m=8, big_n=4, d_t=2, d_f=4):
    prof = ChannelProfile((0.0,), (0.0,), v_kmh=0.0, f_c_hz=2.1e9)
    return SystemConfig(
        M=big_m, N=big_n, delta_f_hz=15e3, f_c_hz=2.1e9, v_kmh=0.0,
        d_t=d_t, d_f=d_f, profile=prof,
    )


class Qam4Tests(unittest.TestCase):
    def test_constellation_table(self):
        bits = np.array([0, 0, 0, 1, 1, 0, 1, 1])
        want = np.array([S + 1j * S, S - 1j * S, -S + 1j * S, -S - 1j * S])
        np.testing.assert_allclose(qam4_mod(bits), want, atol=1e-15)

    def test_gray_labelling(self):
        # neighbouring constellation points differ in exactly one bit
        syms = qam4_mod(np.array([0, 0, 0, 1, 1, 1, 1, 0]))
        for a, b in zip(syms[:-1], syms[1:]):
            self.assertAlmostEqual(abs(a - b), 2 * S, places=12)

    def test_unit_average_energy(self):
        rng = np.random.default_rng(9)
        syms = qam4_mod(rng.integers(0, 2, 2000))
        np.testing.assert_allclose(np.abs(syms), 1.0, atol=1e-12)
        self.assertAlmostEqual(abs(PILOT_VALUE), 1.0, places=15)

    def test_roundtrip(self):
        rng = np.random.default_rng(10)
        bits = rng.integers(0, 2, 1000)
        np.testing.assert_array_equal(qam4_demod(qam4_mod(bits)), bits)

    def test_demod_ties_resolve_to_zero(self):
        np.testing.assert_array_equal(qam4_demod(np.array([0.0 + 0.0j])), [0, 0])
        np.testing.assert_array_equal(qam4_demod(np.array([-0.1 + 0.0j])), [1, 0])
        np.testing.assert_array_equal(qam4_demod(np.array([0.0 - 0.3j])), [0, 1])

    def test_mod_input_validation(self):
        with self.assertRaises(ContractViolationError):
            qam4_mod(np.array([0, 1, 1]))  # odd length
        with self.assertRaises(ContractViolationError):
            qam4_mod(np.array([0, 2]))
        with self.assertRaises(ContractViolationError):
            qam4_mod(np.zeros((2, 2), dtype=int))


class LayoutTests(unittest.TestCase):
    def test_lattice_positions_are_frozen(self):
        lay = make_layout(PilotPattern(d_t=2, d_f=4), small_cfg())
        self.assertEqual(lay.pilot_m.tolist(), [0, 4, 0, 4])
        self.assertEqual(lay.pilot_n.tolist(), [0, 0, 2, 2])
        # symbol-major, subcarrier fastest
        self.assertEqual(lay.data_m[:6].tolist(), [1, 2, 3, 5, 6, 7])
        self.assertEqual(lay.data_n[:6].tolist(), [0] * 6)
        self.assertEqual(lay.n_pilot, 4)
        self.assertEqual(lay.n_data, 28)

    def test_positions_cover_grid_without_overlap(self):
        cfg = small_cfg(big_m=12, big_n=6, d_t=3, d_f=2)
        lay = make_layout(PilotPattern(d_t=3, d_f=2), cfg)
        seen = set(zip(lay.pilot_m.tolist(), lay.pilot_n.tolist()))
        seen.update(zip(lay.data_m.tolist(), lay.data_n.tolist()))
        self.assertEqual(len(seen), 12 * 6)
        self.assertEqual(lay.n_pilot + lay.n_data, 72)

    def test_non_dividing_lattice_rejected(self):
        with self.assertRaises(ContractViolationError):
            make_layout(PilotPattern(d_t=3, d_f=4), small_cfg())  # 4 % 3 != 0

    def test_pattern_validation(self):
        with self.assertRaises(ContractViolationError):
            PilotPattern(d_t=0, d_f=1)
        with self.assertRaises(ContractViolationError):
            PilotPattern(d_t=1, d_f=1, pilot_value=0.0)


class FrameTests(unittest.TestCase):
    def setUp(self):
        self.cfg = small_cfg()
        self.pattern = PilotPattern(d_t=2, d_f=4)
        self.rng = np.random.default_rng(31)

    def test_build_and_extract_are_inverse(self):
        syms = qam4_mod(self.rng.integers(0, 2, 56))
        tf, lay = build_frame(syms, self.pattern, self.cfg)
        np.testing.assert_allclose(
            tf.data[lay.pilot_m, lay.pilot_n], PILOT_VALUE, atol=1e-15
        )
        np.testing.assert_allclose(extract_data(tf, lay), syms, atol=1e-15)

    def test_build_frame_checks_symbol_count(self):
        with self.assertRaises(ContractViolationError):
            build_frame(np.ones(5, dtype=complex), self.pattern, self.cfg)

    def test_equalizer_recovers_symbols(self):
        syms = qam4_mod(self.rng.integers(0, 2, 56))
        x, lay = build_frame(syms, self.pattern, self.cfg)
        h = self.rng.standard_normal((8, 4)) + 1j * self.rng.standard_normal((8, 4))
        y = TFGrid(h * x.data)
        x_hat, n_sing = equalize_single_tap(y, TFGrid(h), lay)
        self.assertEqual(n_sing, 0)
        np.testing.assert_allclose(x_hat, syms, atol=1e-12)

    def test_equalizer_flags_vanishing_gains(self):
        syms = np.ones(28, dtype=complex)
        x, lay = build_frame(syms, self.pattern, small_cfg())
        h = np.ones((8, 4), dtype=complex)
        h[lay.data_m[0], lay.data_n[0]] = NEAR_SINGULAR_TOL / 10.0
        x_hat, n_sing = equalize_single_tap(x, TFGrid(h), lay)
        self.assertEqual(n_sing, 1)
        self.assertEqual(x_hat[0], 0.0)
        np.testing.assert_allclose(x_hat[1:], syms[1:], atol=1e-12)

    def test_equalizer_shape_guard(self):
        _, lay = build_frame(np.ones(28, dtype=complex), self.pattern, self.cfg)
        with self.assertRaises(ContractViolationError):
            equalize_single_tap(
                TFGrid(np.ones((8, 4))), TFGrid(np.ones((4, 8))), lay
            )


if __name__ == "__main__":
    unittest.main()
