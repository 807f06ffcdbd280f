"""
Steering vectors and small complex-vector helpers for half-wavelength arrays.

All vectors are dense 1-D ``complex128`` numpy arrays. Spatial frequencies
are normalized so that a half-wavelength array sees directions in [-1, 1].
"""

import numpy as np


def _as_vec(x):
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if v.size < 1:
        raise ValueError("vector must have at least one element")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite elements")
    return v


def steering_h(n, omega):
    """
    Horizontal ULA steering vector.

    Parameters
    ----------
    n : int
        Number of elements (>= 1).
    omega : float
        Spatial frequency.

    Returns
    -------
    ndarray
        ``(1/sqrt(n)) * exp(j*pi*k*omega)`` for ``k = 0..n-1``; unit norm.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"array size must be >= 1, got {n}")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * float(omega)) / np.sqrt(n)


def steering_v(n, phi):
    """Vertical ULA steering vector; same element law as :func:`steering_h`."""
    return steering_h(n, phi)


def kron(a, b):
    """Kronecker product of two vectors, element ``i*len(b)+k`` is ``a[i]*b[k]``."""
    return np.kron(_as_vec(a), _as_vec(b))


def hadamard(a, b):
    """Element-wise product; lengths must match."""
    a = _as_vec(a)
    b = _as_vec(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a * b


def planar_steering(nh, nv, omega, phi):
    """Planar (URA) steering vector ``u_h(nh, omega) (x) u_v(nv, phi)``."""
    return np.kron(steering_h(nh, omega), steering_v(nv, phi))


def wrap_mod2(x):
    """
    Reduce a spatial frequency modulo 2 into [-1, 1).

    +1 maps to -1 so every direction has a single representative.
    """
    r = (float(x) + 1.0) % 2.0 - 1.0
    # float rounding can land exactly on +1 for tiny negative inputs
    if r >= 1.0:
        r -= 2.0
    return r


def ris_response_q(nh, nv, omega_r, phi_r, omega_i, phi_i):
    """
    Effective RIS cascade response ``q``.

    The returned column vector satisfies ``q^H xi = sum(conj(q) * xi)``, the
    gain of the user -> RIS -> AP cascade for reflection vector ``xi``. It
    factors as ``sqrt(nh) u_h(nh, dO) (x) sqrt(nv) u_v(nv, dP)`` with
    ``dO = wrap(omega_r - omega_i)`` and ``dP = wrap(phi_r - phi_i)``; every
    element has unit modulus.
    """
    d_omega = wrap_mod2(omega_r - omega_i)
    d_phi = wrap_mod2(phi_r - phi_i)
    return np.kron(np.sqrt(nh) * steering_h(nh, d_omega),
                   np.sqrt(nv) * steering_v(nv, d_phi))
