"""
Multi-beam training codebook.

The direction space [-1, 1] is split into ``N`` sectors. ``L = N/M`` bins
each hold ``M`` directions spaced ``L`` indices apart, and one training
symbol sweeps a whole bin by splitting the array into ``M`` sub-arrays,
each steered at one of the bin's directions. Direction indices are 1-based
throughout to match the bin tables.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .array_geometry import steering_h


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    N: int
    values: np.ndarray

    def value(self, index):
        """Spatial frequency of 1-based direction ``index``."""
        if not 1 <= index <= self.N:
            raise IndexError(f"direction index {index} outside 1..{self.N}")
        return float(self.values[index - 1])


def build_grid(n):
    """Sector centres ``-1 + (2j - 1)/n`` for ``j = 1..n``."""
    n = int(n)
    if n < 1:
        raise ValueError(f"grid size must be >= 1, got {n}")
    j = np.arange(1, n + 1)
    values = -1.0 + (2.0 * j - 1.0) / n
    values.setflags(write=False)
    return DirectionGrid(n, values)


@dataclass(frozen=True, eq=False)
class Codebook:
    grid: DirectionGrid
    M: int
    L: int
    bins: tuple

    @property
    def N(self):
        return self.grid.N

    @property
    def coarse_rounds(self):
        """Number of multi-beam rounds, ``log2(M)``."""
        return self.M.bit_length() - 1

    def bin_of(self, index):
        """1-based bin number holding direction ``index``."""
        return (index - 1) % self.L + 1

    def table(self):
        """Bins as an ``(L, M)`` integer array, one row per bin."""
        return np.array(self.bins, dtype=int)


def build_codebook(n, m):
    """
    Partition ``n`` grid directions into ``n/m`` bins of ``m`` directions.

    Slot ``k`` (1-based) of bin ``l`` holds direction ``l + (k-1)*L``.
    """
    n, m = int(n), int(m)
    if m < 2 or not is_power_of_two(m):
        raise ValueError(f"M must be a power of 2 and >= 2, got {m}")
    if n % m:
        raise ValueError(f"M={m} does not divide N={n}")
    L = n // m
    bins = tuple(tuple(l + (k - 1) * L for k in range(1, m + 1)) for l in range(1, L + 1))
    return Codebook(build_grid(n), m, L, bins)


def intra_set_distance(indices):
    """Smallest index gap between any two members of ``indices``."""
    idx = list(indices)
    if len(idx) < 2:
        raise ValueError("intra-set distance needs at least two directions")
    return min(abs(a - b) for a, b in combinations(idx, 2))


@lru_cache(maxsize=4096)
def _beam(n, alphas):
    s = n // len(alphas)
    parts = [np.exp(1j * np.pi * m * s * a) * steering_h(s, a) for m, a in enumerate(alphas)]
    v = np.sqrt(s) * np.concatenate(parts)
    v.setflags(write=False)
    return v


def multibeam_vector(cb, round_r, directions):
    """
    Unit-modulus beam sweeping several directions at once.

    In round ``r`` the array is cut into ``M / 2**(r-1)`` contiguous
    sub-arrays of ``2**(r-1) * L`` elements; sub-array ``m`` carries the
    slice of the full-array steering vector for ``directions[m]``. Each slice
    is scaled by ``sqrt(s)`` so every element has modulus one.

    Parameters
    ----------
    cb : Codebook
    round_r : int
        Round number, ``1 <= r <= log2(M) + 1``.
    directions : sequence of int
        1-based direction indices, one per sub-array.

    Returns
    -------
    ndarray
        Read-only complex vector of length ``N``.
    """
    directions = tuple(int(d) for d in directions)
    if round_r < 1 or round_r > cb.coarse_rounds + 1:
        raise ValueError(f"round {round_r} outside 1..{cb.coarse_rounds + 1}")
    expected = cb.M >> (round_r - 1)
    if len(directions) != expected:
        raise ValueError(
            f"round {round_r} sweeps {expected} directions, got {len(directions)}")
    return _beam(cb.N, tuple(cb.grid.value(d) for d in directions))


def single_beam(cb, index):
    """Full-array beam ``sqrt(N) u_h(N, grid[index])``."""
    return multibeam_vector(cb, cb.coarse_rounds + 1, (index,))


def beam_pattern(v, omegas):
    """``|v^H sqrt(N) u_h(N, w)|`` for each spatial frequency ``w``."""
    v = np.asarray(v, dtype=np.complex128)
    n = v.size
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    A = np.exp(1j * np.pi * np.outer(np.arange(n), omegas))
    return np.abs(v.conj() @ A)
