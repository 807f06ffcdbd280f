"""
Reference points for the proposed search: an exhaustive oracle over all
(RIS, user) direction pairs, coarse-only search and a binary-tree search for
the user node.
"""

import math
from dataclasses import dataclass

import numpy as np

from .array_geometry import steering_h
from .channel import CascadeLink
from .codebook import build_grid, is_power_of_two
from .search import SearchResult, Sweep, run_ris_training, user_measurement


@dataclass(frozen=True)
class OraclePair:
    ris_index: int
    user_index: int
    snr: float


def _grid_beams(n, values, unit_norm):
    B = np.exp(1j * np.pi * np.outer(np.arange(n), values))
    return B / math.sqrt(n) if unit_norm else B


def exhaustive_search(cfg, real, gamma_tot):
    """
    Noiseless SNR over every ``N_h x N_t`` grid pair; returns the best pair.

    Ties go to the lowest RIS index, then the lowest user index.
    """
    link = CascadeLink(cfg, real, gamma_tot)
    gh = build_grid(cfg.N_h).values
    gt = build_grid(cfg.N_t).values
    ris = np.conj(link.q_h) @ _grid_beams(cfg.N_h, gh, unit_norm=False)
    user = np.conj(link.u_t) @ _grid_beams(cfg.N_t, gt, unit_norm=True)
    vert = np.vdot(link.q_v, link.matched_xi_v())
    eta = np.abs(link.scale * vert * np.outer(ris, user)) ** 2
    i, j = np.unravel_index(int(np.argmax(eta)), eta.shape)
    return OraclePair(int(i) + 1, int(j) + 1, float(eta[i, j]))


def optimal_direction(grid, target):
    """1-based grid index nearest to ``target``; lower index on an exact tie."""
    return int(np.argmin(np.abs(grid.values - float(target)))) + 1


def cs_search(cfg, real, search_cfg, gamma_tot, rng):
    """Coarse search only: stop after the probe and return its direction."""
    return run_ris_training(cfg, real, search_cfg, gamma_tot, rng, refine=False)


def binary_search(n, measure):
    """
    Bisection over ``n`` grid directions with two probes per level.

    At level ``t`` each half of the current interval is covered by a beam
    from the first ``2**t`` elements (the rest switched off) steered at the
    half's centre; the search descends into the stronger half, the lower
    half winning ties.
    """
    if not is_power_of_two(n):
        raise ValueError(f"binary search needs a power-of-2 array, got N={n}")
    grid = build_grid(n)
    lo, hi = 0, n
    log = []
    level = 0
    while hi - lo > 1:
        level += 1
        s = 2 ** level
        mid = (lo + hi) // 2
        snrs = []
        for a, b in ((lo, mid), (mid, hi)):
            w = np.zeros(n, dtype=np.complex128)
            w[:s] = steering_h(s, float(np.mean(grid.values[a:b])))
            snr = float(measure(w))
            log.append(Sweep(level, tuple(range(a + 1, b + 1)), snr))
            snrs.append(snr)
        lo, hi = (lo, mid) if snrs[0] >= snrs[1] else (mid, hi)
    chosen = lo + 1
    return SearchResult(chosen, steering_h(n, grid.value(chosen)), len(log), log)


def bs_search(cfg, real, xi_h, gamma_tot, rng, noise_enabled=True):
    """Binary-tree training of the user beam with the RIS held at ``xi_h``."""
    if cfg.N_t == 1:
        return SearchResult(1, np.ones(1, dtype=np.complex128), 0, [])
    link = CascadeLink(cfg, real, gamma_tot)
    return binary_search(cfg.N_t, user_measurement(link, xi_h, rng, noise_enabled))


def oracle_result(cfg, real, gamma_tot):
    """Exhaustive pair packaged as RIS and user search results."""
    pair = exhaustive_search(cfg, real, gamma_tot)
    xi_h = math.sqrt(cfg.N_h) * steering_h(cfg.N_h, build_grid(cfg.N_h).value(pair.ris_index))
    w_u = steering_h(cfg.N_t, build_grid(cfg.N_t).value(pair.user_index))
    n = cfg.N_h * cfg.N_t
    return (SearchResult(pair.ris_index, xi_h, n, []),
            SearchResult(pair.user_index, w_u, 0, []))

