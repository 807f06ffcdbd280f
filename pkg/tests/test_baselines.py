import itertools

import numpy as np
import pytest

from ris_beamtrain.array_geometry import steering_h
from ris_beamtrain.baselines import (binary_search, bs_search, exhaustive_search,
                                     optimal_direction, oracle_result)
from ris_beamtrain.channel import CascadeLink, ChannelRealization, ScenarioConfig
from ris_beamtrain.codebook import build_grid


def cfg_small(n_h=8, n_t=4):
    return ScenarioConfig(N_h=n_h, N_v=2, N_r=4, N_t=n_t)


def brute_force(cfg, real, gamma):
    link = CascadeLink(cfg, real, gamma)
    gh, gt = build_grid(cfg.N_h), build_grid(cfg.N_t)
    best = (-1.0, None)
    for i, j in itertools.product(range(1, cfg.N_h + 1), range(1, cfg.N_t + 1)):
        xi = np.sqrt(cfg.N_h) * steering_h(cfg.N_h, gh.value(i))
        eta = link.snr(xi, link.matched_xi_v(), steering_h(cfg.N_t, gt.value(j)))
        if eta > best[0]:
            best = (eta, (i, j))
    return best


class TestExhaustive:
    def test_matches_loop(self, rng):
        cfg = cfg_small()
        for _ in range(20):
            real = ChannelRealization.from_angles(cfg, complex(*rng.standard_normal(2)), 1.0)
            real = real.replace(omega_i=rng.uniform(-1, 1), omega_u=rng.uniform(-1, 1))
            pair = exhaustive_search(cfg, real, 1.0)
            eta, (i, j) = brute_force(cfg, real, 1.0)
            assert (pair.ris_index, pair.user_index) == (i, j)
            assert pair.snr == pytest.approx(eta, rel=1e-12)

    def test_oracle_symbols(self):
        cfg = cfg_small()
        r, u = oracle_result(cfg, ChannelRealization.from_angles(cfg), 1.0)
        assert r.symbol_count + u.symbol_count == 32


class TestOptimalDirection:
    def test_nearest(self):
        g = build_grid(4)
        assert [optimal_direction(g, x) for x in (-0.9, -0.3, 0.1, 0.99)] == [1, 2, 3, 4]

    def test_tie_goes_low(self):
        assert optimal_direction(build_grid(4), 0.0) == 2


class TestBinarySearch:
    def test_two_sweeps_per_level(self):
        calls = []
        res = binary_search(16, lambda w: calls.append(w) or 1.0)
        assert res.symbol_count == 8 == len(calls)
        # all ties descend left
        assert res.chosen_index == 1

    def test_beam_widths(self):
        calls = []
        binary_search(8, lambda w: calls.append(np.count_nonzero(w)) or 1.0)
        assert calls == [2, 2, 4, 4, 8, 8]

    def test_finds_los_direction(self):
        cfg = ScenarioConfig(N_h=8, N_v=2, N_r=4, N_t=16, kappa_ui=200.0, kappa_ia=200.0)
        g = build_grid(16)
        base = ChannelRealization.from_angles(cfg)
        for j in (1, 6, 11, 16):
            real = base.replace(omega_u=g.value(j))
            link = CascadeLink(cfg, real, 1.0)
            xi = link.q_h
            res = bs_search(cfg, real, xi, 1.0, None, noise_enabled=False)
            assert res.chosen_index == j

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            binary_search(12, lambda w: 0.0)

    def test_single_antenna(self):
        cfg = cfg_small(n_t=1)
        res = bs_search(cfg, ChannelRealization.from_angles(cfg), np.ones(8), 1.0, None)
        assert res.symbol_count == 0
