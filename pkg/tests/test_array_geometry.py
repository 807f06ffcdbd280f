import math

import numpy as np
import pytest

from ris_beamtrain.array_geometry import (hadamard, kron, planar_steering, ris_response_q,
                                          steering_h, steering_v, wrap_mod2)


def loop_steering(n, omega):
    return np.array([complex(math.cos(math.pi * k * omega), math.sin(math.pi * k * omega))
                     for k in range(n)]) / math.sqrt(n)


class TestSteering:
    def test_quarter_turn_values(self):
        # omega = 0.5 advances the phase by pi/2 per element
        np.testing.assert_allclose(steering_h(4, 0.5), np.array([1, 1j, -1, -1j]) / 2, atol=1e-15)

    def test_broadside_is_uniform(self):
        np.testing.assert_allclose(steering_h(9, 0.0), np.full(9, 1 / 3), atol=1e-15)

    @pytest.mark.parametrize("n,omega", [(1, 0.3), (7, -0.81), (64, 0.125), (160, 0.99)])
    def test_matches_loop(self, n, omega):
        np.testing.assert_allclose(steering_h(n, omega), loop_steering(n, omega), atol=1e-13)

    def test_unit_norm(self):
        for n in (1, 5, 160):
            assert np.linalg.norm(steering_h(n, 0.37)) == pytest.approx(1.0, abs=1e-13)

    def test_vertical_shares_element_law(self):
        np.testing.assert_array_equal(steering_v(8, 0.2), steering_h(8, 0.2))

    def test_rejects_empty_array(self):
        with pytest.raises(ValueError):
            steering_h(0, 0.1)


class TestPlanar:
    def test_kron_ordering(self):
        a, b = np.array([1, 2]), np.array([1, 10, 100])
        np.testing.assert_array_equal(kron(a, b), [1, 10, 100, 2, 20, 200])

    def test_planar_element_phase(self):
        nh, nv, om, ph = 4, 3, 0.3, -0.7
        v = planar_steering(nh, nv, om, ph)
        for i in range(nh):
            for k in range(nv):
                want = np.exp(1j * math.pi * (i * om + k * ph)) / math.sqrt(nh * nv)
                assert abs(v[i * nv + k] - want) < 1e-14

    def test_hadamard_length_mismatch(self):
        with pytest.raises(ValueError):
            hadamard(np.ones(3), np.ones(4))

    def test_kron_rejects_nan(self):
        with pytest.raises(ValueError):
            kron([np.nan], [1.0])


class TestWrap:
    @pytest.mark.parametrize("x,want", [(0.0, 0.0), (1.0, -1.0), (-1.0, -1.0), (1.5, -0.5),
                                        (-1.25, 0.75), (3.0, -1.0), (-2.9, -0.9)])
    def test_values(self, x, want):
        assert wrap_mod2(x) == pytest.approx(want, abs=1e-12)

    def test_tiny_negative_stays_in_range(self):
        assert -1.0 <= wrap_mod2(-1e-18) < 1.0


class TestRisResponse:
    def test_equals_conjugate_steering_product(self):
        # q is sqrt(N_I) times the planar steering at the wrapped angle differences
        nh, nv = 6, 4
        q = ris_response_q(nh, nv, 0.4, 0.1, -0.9, 0.5)
        want = math.sqrt(nh * nv) * planar_steering(nh, nv, wrap_mod2(1.3), wrap_mod2(-0.4))
        np.testing.assert_allclose(q, want, atol=1e-13)

    def test_elements_have_unit_modulus(self):
        q = ris_response_q(16, 8, 0.2, 0.3, -0.6, 0.9)
        np.testing.assert_allclose(np.abs(q), 1.0, atol=1e-13)

    def test_hadamard_of_incident_and_reflected(self):
        # elementwise product of reflected and conjugate incident steering
        nh, nv = 5, 3
        wr, pr, wi, pi_ = 0.31, -0.2, 0.77, 0.05
        want = (nh * nv) * hadamard(planar_steering(nh, nv, wr, pr),
                                    np.conj(planar_steering(nh, nv, wi, pi_)))
        np.testing.assert_allclose(ris_response_q(nh, nv, wr, pr, wi, pi_), want, atol=1e-13)
