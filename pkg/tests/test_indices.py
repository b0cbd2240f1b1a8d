"""Vegetation index formulas: hand values, bounds, and guard behavior."""

import numpy as np
import pytest

from pimc.indices import evi, index_stack, ndvi, savi


class TestPointValues:
    def test_equal_bands_give_zero(self):
        assert ndvi(0.4, 0.4) == 0.0
        assert savi(0.4, 0.4) == 0.0

    def test_bound_case(self):
        assert abs(ndvi(1.0, 0.0) - 1.0) < 1e-7
        assert abs(ndvi(0.0, 1.0) + 1.0) < 1e-7

    def test_evi_hand_value(self):
        # 2.5 * 0.4 / (0.5 + 0.6 - 0.375 + 1) = 1 / 1.725
        got = float(evi(0.5, 0.1, 0.05))
        assert abs(got - 1.0 / 1.725) < 1e-6
        assert abs(got - 0.5797101) < 1e-6

    def test_savi_hand_value(self):
        # 1.5 * 0.4 / (0.6 + 0.5)
        assert abs(float(savi(0.5, 0.1)) - 0.6 / 1.1) < 1e-6

    def test_zero_denominator_guarded(self):
        assert np.isfinite(ndvi(0.0, 0.0))
        assert np.isfinite(savi(0.0, 0.0))
        # blue value that drives the EVI denominator through zero
        nir, red = 0.2, 0.1
        blue = (nir + 6 * red - 0.0 + 1.0) / 7.5
        assert np.isfinite(evi(nir, red, blue))


class TestBounds:
    def test_million_random_triples(self):
        rng = np.random.default_rng(123)
        nir = rng.random(1_000_000).astype(np.float32)
        red = rng.random(1_000_000).astype(np.float32)
        blue = rng.random(1_000_000).astype(np.float32)
        n = ndvi(nir, red)
        s = savi(nir, red)
        e = evi(nir, red, blue)
        eps = 1e-6
        assert n.min() >= -1 - eps and n.max() <= 1 + eps
        assert s.min() >= -1 - eps and s.max() <= 1 + eps
        assert np.all(np.isfinite(e))
        assert e.min() >= -2.0 and e.max() <= 2.0

    def test_stack_shape_and_order(self):
        nir = np.full((4, 5), 0.5, dtype=np.float32)
        red = np.full((4, 5), 0.1, dtype=np.float32)
        blue = np.full((4, 5), 0.05, dtype=np.float32)
        stack = index_stack(nir, red, blue)
        assert stack.shape == (3, 4, 5)
        assert np.allclose(stack[0], ndvi(nir, red))
        assert np.allclose(stack[1], evi(nir, red, blue))
        assert np.allclose(stack[2], savi(nir, red))
