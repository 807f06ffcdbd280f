"""
Channel model for the user -> RIS -> AP uplink.

Both hops are rank-one Rician channels built from planar/linear steering
vectors. Fading gains have unit average power; pathloss is folded into the
link SNR ``gamma_tot`` by the experiment layer.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .array_geometry import planar_steering, steering_h, steering_v, wrap_mod2

_MODULUS_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and geometric constants of one deployment.

    Angles are in radians, ``zeta0``/``kappa_*`` in dB, ``noise_power`` in dBm.
    """

    carrier_freq: float = 30e9
    d_ui: float = 2.0
    d_ia: float = 10.0
    zeta0: float = -62.0
    delta_ui: float = 2.3
    delta_ia: float = 2.0
    kappa_ui: float = 10.0
    kappa_ia: float = 5.0
    noise_power: float = -109.0
    N_t: int = 1
    N_r: int = 64
    N_h: int = 160
    N_v: int = 160
    theta_u: float = math.pi / 4
    theta_i: float = math.pi / 3
    vartheta_i: float = math.pi / 3
    theta_r: float = math.pi / 6
    vartheta_r: float = 2 * math.pi / 5
    theta_a: float = math.pi / 4
    P_per: float = 1e-3
    N_tact: int = 1

    def __post_init__(self):
        for name in ("N_t", "N_r", "N_h", "N_v", "N_tact"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.N_tact > self.N_t:
            raise ValueError("N_tact must not exceed N_t")
        for name in ("d_ui", "d_ia", "carrier_freq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def N_I(self):
        return self.N_h * self.N_v

    @property
    def P_tot(self):
        return self.P_per * self.N_tact

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelRealization:
    """Fading gains plus the spatial frequencies seen by each array."""

    mu_ui: complex
    mu_ia: complex
    omega_u: float
    omega_i: float
    omega_a: float
    omega_r: float
    phi_i: float
    phi_r: float

    @classmethod
    def from_angles(cls, cfg, mu_ui=1.0, mu_ia=1.0):
        return cls(
            mu_ui=complex(mu_ui),
            mu_ia=complex(mu_ia),
            omega_u=math.cos(cfg.theta_u) * math.sin(cfg.vartheta_i),
            omega_i=math.cos(cfg.theta_i) * math.sin(cfg.vartheta_i),
            omega_a=math.cos(cfg.theta_a) * math.sin(cfg.vartheta_r),
            omega_r=math.cos(cfg.theta_r) * math.sin(cfg.vartheta_r),
            phi_i=math.cos(cfg.vartheta_i),
            phi_r=math.cos(cfg.vartheta_r),
        )

    @property
    def ris_direction(self):
        """Azimuth phase shift the RIS must induce, wrapped into [-1, 1)."""
        return wrap_mod2(self.omega_r - self.omega_i)

    @property
    def ris_elevation(self):
        return wrap_mod2(self.phi_r - self.phi_i)

    def replace(self, **changes):
        return replace(self, **changes)


def sample_rician(kappa_db, rng):
    """
    Draw one unit-power Rician gain.

    Parameters
    ----------
    kappa_db : float
        K-factor in dB; ``-inf`` gives Rayleigh fading.
    rng : numpy.random.Generator

    Returns
    -------
    complex
    """
    kappa = 0.0 if kappa_db == -math.inf else 10.0 ** (kappa_db / 10.0)
    los = math.sqrt(kappa / (1.0 + kappa)) * np.exp(1j * rng.uniform(0.0, 2 * math.pi))
    nlos = complex(rng.standard_normal(), rng.standard_normal()) / math.sqrt(2.0)
    return complex(los + math.sqrt(1.0 / (1.0 + kappa)) * nlos)


def realize(cfg, rng):
    """Sample both hop gains for the geometry fixed by ``cfg``."""
    mu_ui = sample_rician(cfg.kappa_ui, rng)
    mu_ia = sample_rician(cfg.kappa_ia, rng)
    return ChannelRealization.from_angles(cfg, mu_ui, mu_ia)


def incident_steering(cfg, real):
    return planar_steering(cfg.N_h, cfg.N_v, real.omega_i, real.phi_i)


def reflected_steering(cfg, real):
    return planar_steering(cfg.N_h, cfg.N_v, real.omega_r, real.phi_r)


def channel_H(cfg, real):
    """User -> RIS channel, shape ``(N_I, N_t)``."""
    u_i = incident_steering(cfg, real)
    u_u = steering_h(cfg.N_t, real.omega_u)
    return math.sqrt(cfg.N_I * cfg.N_t) * real.mu_ui * np.outer(u_i, u_u.conj())


def channel_G(cfg, real):
    """RIS -> AP channel, shape ``(N_r, N_I)``."""
    u_a = steering_h(cfg.N_r, real.omega_a)
    u_r = reflected_steering(cfg, real)
    return math.sqrt(cfg.N_r * cfg.N_I) * real.mu_ia * np.outer(u_a, u_r.conj())


def ap_combiner(cfg, real):
    """AP receive vector; the AP knows where the RIS is and stays matched."""
    return steering_h(cfg.N_r, real.omega_a)


def received_snr_full(cfg, real, xi, w_u, gamma_tot):
    """Received SNR from explicit channel matrices, ``gamma*|w_a^H G diag(xi) H w_u|^2``."""
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    w_u = np.asarray(w_u, dtype=np.complex128).reshape(-1)
    if xi.size != cfg.N_I:
        raise ValueError(f"xi has length {xi.size}, expected N_I={cfg.N_I}")
    if w_u.size != cfg.N_t:
        raise ValueError(f"w_u has length {w_u.size}, expected N_t={cfg.N_t}")
    w_a = ap_combiner(cfg, real)
    row = w_a.conj() @ channel_G(cfg, real)
    col = channel_H(cfg, real) @ w_u
    amp = np.sum(row * xi * col)
    return float(gamma_tot * abs(amp) ** 2)


def _check_unit_modulus(name, v):
    if np.max(np.abs(np.abs(v) - 1.0)) > _MODULUS_TOL:
        raise ValueError(f"{name} elements must have unit modulus")


class CascadeLink:
    """
    Factored SNR evaluator for one realization.

    Holds the per-axis RIS responses and the user steering vector so a
    single SNR costs ``O(N_h + N_v + N_t)``.
    """

    def __init__(self, cfg, real, gamma_tot):
        self.cfg = cfg
        self.real = real
        self.gamma_tot = float(gamma_tot)
        self.q_h = math.sqrt(cfg.N_h) * steering_h(cfg.N_h, real.ris_direction)
        self.q_v = math.sqrt(cfg.N_v) * steering_v(cfg.N_v, real.ris_elevation)
        self.u_t = steering_h(cfg.N_t, real.omega_u)
        self.scale = (math.sqrt(self.gamma_tot * cfg.N_r * cfg.N_t)
                      * real.mu_ui * real.mu_ia)

    def matched_xi_v(self):
        """Elevation reflection vector; the controller knows this angle."""
        return self.q_v.copy()

    def amplitude(self, xi_h, xi_v, w_u):
        return (self.scale * np.vdot(self.q_h, xi_h) * np.vdot(self.q_v, xi_v)
                * np.vdot(self.u_t, w_u))

    def snr(self, xi_h, xi_v, w_u):
        return float(abs(self.amplitude(xi_h, xi_v, w_u)) ** 2)

    def measure(self, xi_h, xi_v, w_u, rng=None, noise=True):
        """Energy-detector SNR of one training symbol, ``|h + z|^2`` with ``z ~ CN(0,1)``."""
        amp = self.amplitude(xi_h, xi_v, w_u)
        if not noise:
            return float(abs(amp) ** 2)
        z = complex(rng.standard_normal(), rng.standard_normal()) / math.sqrt(2.0)
        return float(abs(amp + z) ** 2)


def _checked(cfg, xi_h, xi_v, w_u):
    xi_h = np.asarray(xi_h, dtype=np.complex128).reshape(-1)
    xi_v = np.asarray(xi_v, dtype=np.complex128).reshape(-1)
    w_u = np.asarray(w_u, dtype=np.complex128).reshape(-1)
    if xi_h.size != cfg.N_h or xi_v.size != cfg.N_v or w_u.size != cfg.N_t:
        raise ValueError("beamforming vector dimensions do not match the scenario")
    _check_unit_modulus("xi_h", xi_h)
    _check_unit_modulus("xi_v", xi_v)
    return xi_h, xi_v, w_u


def received_snr_factored(cfg, real, xi_h, xi_v, w_u, gamma_tot):
    """Received SNR through the separable RIS response (no matrices formed)."""
    xi_h, xi_v, w_u = _checked(cfg, xi_h, xi_v, w_u)
    return CascadeLink(cfg, real, gamma_tot).snr(xi_h, xi_v, w_u)


def measure_training_snr(cfg, real, xi_h, xi_v, w_u, gamma_tot, rng, noise=True):
    """
    Noisy SNR reading of a single training symbol.

    With ``noise=False`` this is exactly :func:`received_snr_factored`.
    """
    xi_h, xi_v, w_u = _checked(cfg, xi_h, xi_v, w_u)
    return CascadeLink(cfg, real, gamma_tot).measure(xi_h, xi_v, w_u, rng, noise)
