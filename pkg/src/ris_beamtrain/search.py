"""
Hierarchical multi-beam direction search.

One search runs four phases over a :class:`~ris_beamtrain.codebook.Codebook`:

1. sweep every bin with a multi-beam and rank bins by measured SNR;
2. halve the best bin's candidate list each round, keeping the swept half
   only if it beats half the best first-round SNR;
3. probe the first of the two survivors with a single beam and build one
   fine candidate per top-``T`` bin near the winner;
4. sweep the fine candidates with single beams and keep the strongest.

The measurement is a callback ``measure(vector) -> float`` so the same code
trains the RIS reflection and the user-node transmit beam.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import CascadeLink
from .codebook import build_codebook, is_power_of_two, multibeam_vector, single_beam


class SearchStateError(RuntimeError):
    """A search phase was invoked out of order."""


@dataclass(frozen=True)
class SearchConfig:
    M: int = 8
    T: int = None  # None -> L
    noise_enabled: bool = True

    def __post_init__(self):
        if self.M < 2 or not is_power_of_two(self.M):
            raise ValueError(f"M must be a power of 2 and >= 2, got {self.M}")
        if self.T is not None and self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")

    def refine_count(self, L):
        T = L if self.T is None else self.T
        if T > L:
            raise ValueError(f"T={T} exceeds the number of bins L={L}")
        return T


@dataclass(frozen=True)
class Sweep:
    round: int
    directions: tuple
    snr: float


@dataclass
class SearchState:
    codebook: object
    T: int
    scale: float = 1.0
    round: int = 0
    bin_snr: list = field(default_factory=list)
    ranked: list = field(default_factory=list)
    candidates: tuple = ()
    eta_max: float = None
    eta_th: float = None
    slot: int = None      # 0-based slot m of the first coarse survivor in B'(1)
    k: int = None         # 0-based slot picked by the probe
    p: int = None
    fine: tuple = ()
    symbol_count: int = 0
    sweep_log: list = field(default_factory=list)

    def sweep(self, r, directions, vector, measure):
        snr = float(measure(vector * self.scale if self.scale != 1.0 else vector))
        self.sweep_log.append(Sweep(r, tuple(directions), snr))
        self.symbol_count += 1
        return snr


@dataclass
class SearchResult:
    chosen_index: int
    chosen_vector: np.ndarray
    symbol_count: int
    sweep_log: list
    state: SearchState = None


def first_round(cb, measure, T=None, scale=1.0):
    """
    Sweep all ``L`` bins once.

    Returns
    -------
    (list of float, SearchState)
        Measured SNR per bin in bin order and the new state.
    """
    T = cb.L if T is None else T
    if not 1 <= T <= cb.L:
        raise ValueError(f"T={T} outside 1..{cb.L}")
    state = SearchState(codebook=cb, T=T, scale=scale)
    state.bin_snr = [state.sweep(1, b, multibeam_vector(cb, 1, b), measure) for b in cb.bins]
    state.round = 1
    return list(state.bin_snr), state


def rank_bins(state):
    """
    Order bins by descending first-round SNR (stable on ties).

    Sets ``eta_max``, the fixed threshold ``eta_th = eta_max / 2`` and the
    initial candidate list. Returns ``(G(L), G(T))``.
    """
    if state.round != 1 or not state.bin_snr:
        raise SearchStateError("rank_bins needs a completed first round")
    order = sorted(range(len(state.bin_snr)), key=lambda l: -state.bin_snr[l])
    state.ranked = [state.codebook.bins[l] for l in order]
    state.eta_max = state.bin_snr[order[0]]
    state.eta_th = state.eta_max / 2.0
    state.candidates = tuple(state.ranked[0])
    return list(state.ranked), list(state.ranked[:state.T])


def coarse_round(state, r, measure):
    """Sweep the first half of the candidates; keep it if above threshold, else the rest."""
    cb = state.codebook
    if not 2 <= r <= cb.coarse_rounds:
        raise SearchStateError(f"coarse round {r} outside 2..{cb.coarse_rounds}")
    if state.eta_th is None or state.round != r - 1:
        raise SearchStateError(f"coarse round {r} called after round {state.round}")
    x = cb.M >> (r - 1)
    swept = state.candidates[:x]
    snr = state.sweep(r, swept, multibeam_vector(cb, r, swept), measure)
    state.candidates = swept if snr > state.eta_th else state.candidates[x:]
    state.round = r
    return state.candidates


def _coarse_done(state):
    cb = state.codebook
    return state.eta_th is not None and state.round == cb.coarse_rounds and len(state.candidates) == 2


def probe(state, measure):
    """
    Single-beam probe of the first coarse survivor.

    Picks slot ``k`` (``m`` on success, ``m+1`` otherwise) of the best bin
    and returns the direction ``p`` it holds.
    """
    if not _coarse_done(state):
        raise SearchStateError("probe needs the coarse rounds to be complete")
    cb = state.codebook
    best = state.ranked[0]
    try:
        m = best.index(state.candidates[0])
    except ValueError:
        raise AssertionError("coarse survivor is not a member of the best bin") from None
    if best[m + 1] != state.candidates[1]:
        raise AssertionError("coarse survivors are not adjacent slots of the best bin")
    r = cb.coarse_rounds + 1
    snr = state.sweep(r, (best[m],), single_beam(cb, best[m]), measure)
    state.slot = m
    state.k = m if snr > state.eta_th else m + 1
    state.p = best[state.k]
    state.round = r
    return state.p


def fine_candidates(state, measure):
    """
    Run the probe and build one fine candidate per top-``T`` bin.

    For bin ``B'(l)`` the candidate is whichever of slots ``m`` and ``m+1`` is
    closer in index to ``p``; on a tie, slot ``k``.
    """
    probe(state, measure)
    m, k, p = state.slot, state.k, state.p
    fine = []
    for b in state.ranked[:state.T]:
        da, db = abs(b[m] - p), abs(b[m + 1] - p)
        fine.append(b[m] if da < db else b[m + 1] if da > db else b[k])
    state.fine = tuple(fine)
    return state.fine


def fine_round(state, measure):
    """Sweep each fine candidate with a full-array beam; lowest position wins ties."""
    if not state.fine or state.round != state.codebook.coarse_rounds + 1:
        raise SearchStateError("fine_round needs fine candidates")
    cb = state.codebook
    r = cb.coarse_rounds + 2
    snrs = [state.sweep(r, (d,), single_beam(cb, d), measure) for d in state.fine]
    best = int(np.argmax(snrs))
    state.round = r
    chosen = state.fine[best]
    return SearchResult(chosen, single_beam(cb, chosen) * state.scale,
                        state.symbol_count, state.sweep_log, state)


def hierarchical_search(cb, measure, T=None, scale=1.0, refine=True):
    """
    Full search over ``cb``.

    With ``refine=False`` the search stops after the probe and returns ``p``
    (coarse search without the fine correction).
    """
    _, state = first_round(cb, measure, T=T, scale=scale)
    rank_bins(state)
    for r in range(2, cb.coarse_rounds + 1):
        coarse_round(state, r, measure)
    if not refine:
        p = probe(state, measure)
        return SearchResult(p, single_beam(cb, p) * scale, state.symbol_count,
                            state.sweep_log, state)
    fine_candidates(state, measure)
    return fine_round(state, measure)


def omni_user_beam(n_t):
    """Single active user element, the rest switched off."""
    w = np.zeros(n_t, dtype=np.complex128)
    w[0] = 1.0
    return w


def ris_measurement(link, rng, noise=True, w_u=None):
    """Measurement callback over RIS azimuth vectors with the user beam held fixed."""
    xi_v = link.matched_xi_v()
    w_u = omni_user_beam(link.cfg.N_t) if w_u is None else w_u
    return lambda xi_h: link.measure(xi_h, xi_v, w_u, rng, noise)


def user_measurement(link, xi_h, rng, noise=True):
    """Measurement callback over user transmit vectors with the RIS held fixed."""
    xi_v = link.matched_xi_v()
    return lambda w_u: link.measure(xi_h, xi_v, w_u, rng, noise)


def run_ris_training(cfg, real, search_cfg, gamma_tot, rng, refine=True):
    """Train the RIS azimuth reflection while the user transmits from one element."""
    cb = build_codebook(cfg.N_h, search_cfg.M)
    link = CascadeLink(cfg, real, gamma_tot)
    measure = ris_measurement(link, rng, search_cfg.noise_enabled)
    return hierarchical_search(cb, measure, T=search_cfg.refine_count(cb.L), refine=refine)


def run_user_training(cfg, real, xi_h, search_cfg, gamma_tot, rng, refine=True):
    """
    Train the user transmit beam with the RIS reflection fixed to ``xi_h``.

    Beams are the RIS codebook's beams scaled to unit norm. A single-antenna
    user needs no training and returns immediately.
    """
    if cfg.N_t == 1:
        return SearchResult(1, np.ones(1, dtype=np.complex128), 0, [])
    cb = build_codebook(cfg.N_t, search_cfg.M)
    link = CascadeLink(cfg, real, gamma_tot)
    measure = user_measurement(link, xi_h, rng, search_cfg.noise_enabled)
    return hierarchical_search(cb, measure, T=search_cfg.refine_count(cb.L),
                               scale=1.0 / math.sqrt(cfg.N_t), refine=refine)


def training_symbol_budget(L, M, T):
    """Training-symbol count ``L + log2(M) + T + 1`` as published for the scheme."""
    return L + int(math.log2(M)) + T + 1


def instrumented_symbol_count(L, M, T, refine=True):
    """Sweeps actually performed by :func:`hierarchical_search`."""
    base = L + int(math.log2(M))
    return base + T if refine else base
