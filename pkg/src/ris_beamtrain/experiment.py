"""
Monte Carlo harness: success rate and achievable rate versus average SNR.

Every trial owns random streams derived from ``(master_seed, snr_index,
trial_index)``; all schemes in a trial see the same channel, truth and
noise draws, so scheme differences are paired. Results are written into
per-trial slots and reduced in trial order, which makes the report
independent of how trials are spread over worker processes.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .array_geometry import wrap_mod2
from .baselines import bs_search, optimal_direction, oracle_result
from .channel import CascadeLink, ChannelRealization, ScenarioConfig, sample_rician
from .codebook import build_grid
from .search import (SearchConfig, instrumented_symbol_count, run_ris_training,
                     run_user_training, training_symbol_budget)

logger = logging.getLogger(__name__)

RIS_SCHEMES = ("ps", "cs", "oracle")
USER_SCHEMES = ("ps", "cs", "bs", "oracle")
# bare names: BS only exists at the user node, so "bs" keeps PS at the RIS
SCHEME_ALIASES = {"ps": ("ps", "ps"), "cs": ("cs", "cs"), "bs": ("ps", "bs"),
                  "oracle": ("oracle", "oracle")}

CSV_FIELDS = ("snr_db", "scheme", "success_rate", "mean_rate", "trials", "symbols",
              "seed", "budget_symbols", "ris_success_rate", "user_success_rate")


def parse_scheme(name):
    """
    Split a scheme name into its (RIS, user) parts.

    Accepts a bare name from :data:`SCHEME_ALIASES` or ``"<ris>+<user>"``.
    """
    key = name.strip().lower()
    if key in SCHEME_ALIASES:
        return SCHEME_ALIASES[key]
    parts = key.split("+")
    if len(parts) != 2 or parts[0] not in RIS_SCHEMES or parts[1] not in USER_SCHEMES:
        raise ValueError(f"unknown scheme {name!r}")
    if (parts[0] == "oracle") != (parts[1] == "oracle"):
        raise ValueError(f"oracle search covers both nodes, got {name!r}")
    return parts[0], parts[1]


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    ris_search: SearchConfig = field(default_factory=SearchConfig)
    user_search: SearchConfig = field(default_factory=lambda: SearchConfig(M=4))
    schemes: tuple = ("ps", "cs")
    snr_points: tuple = (0.0,)
    trials: int = 7500
    master_seed: int = 0
    truth: str = "continuous"  # or "grid"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_points:
            raise ValueError("snr_points must not be empty")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if self.truth not in ("continuous", "grid"):
            raise ValueError(f"truth must be 'continuous' or 'grid', got {self.truth!r}")
        for s in self.schemes:
            parse_scheme(s)


@dataclass
class ReportRow:
    snr_db: float
    scheme: str
    success_rate: float
    mean_rate: float
    trials: int
    symbols: int
    seed: int
    budget_symbols: int
    ris_success_rate: float
    user_success_rate: float


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)

    def get(self, scheme, snr_db=None):
        rows = [r for r in self.rows if r.scheme == scheme]
        if snr_db is None:
            return rows
        return next(r for r in rows if r.snr_db == snr_db)


def _pathloss_lin(zeta0_db, d, delta):
    return 10.0 ** (zeta0_db / 10.0) * d ** (-delta)


def _array_gain(cfg):
    return cfg.N_v ** 2 * cfg.N_h ** 2 * cfg.N_r


def average_snr(cfg, p_tot):
    """
    Average received SNR in dB for transmit power ``p_tot`` (watts).

    Product of transmit power, both hop pathlosses, the RIS and AP array
    gains ``N_v^2 N_h^2 N_r``, divided by the noise power.
    """
    if p_tot <= 0:
        raise ValueError("transmit power must be positive")
    n0 = 10.0 ** ((cfg.noise_power - 30.0) / 10.0)
    lin = (p_tot * _pathloss_lin(cfg.zeta0, cfg.d_ia, cfg.delta_ia)
           * _pathloss_lin(cfg.zeta0, cfg.d_ui, cfg.delta_ui) * _array_gain(cfg) / n0)
    return 10.0 * math.log10(lin)


def transmit_power_for_snr(cfg, snr_db):
    """Inverse of :func:`average_snr`."""
    return 10.0 ** ((snr_db - average_snr(cfg, 1.0)) / 10.0)


def gamma_for_snr(cfg, snr_db):
    """
    Link SNR fed to the channel model for a target average SNR.

    This is ``P_tot / N_0`` times the cascaded pathloss, so a matched RIS and
    a single-element user reproduce the average SNR on unit-power fading.
    """
    return 10.0 ** (snr_db / 10.0) / _array_gain(cfg)


def success_rate(outcomes):
    """Fraction of ``(chosen, optimal)`` pairs that agree."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("success rate of an empty outcome list is undefined")
    return sum(1 for c, o in outcomes if c == o) / len(outcomes)


def achievable_rate(eta):
    """Spectral efficiency ``log2(1 + eta)`` in bit/s/Hz."""
    if eta < 0:
        raise ValueError(f"SNR must be non-negative, got {eta}")
    return math.log2(1.0 + eta)


def scheme_symbols(plan, scheme):
    """Per-trial (instrumented, published-formula) training-symbol counts."""
    cfg = plan.scenario
    ris, user = parse_scheme(scheme)
    if ris == "oracle":
        n = cfg.N_h * cfg.N_t
        return n, n
    ris_L = cfg.N_h // plan.ris_search.M
    ris_T = plan.ris_search.refine_count(ris_L)
    counted = instrumented_symbol_count(ris_L, plan.ris_search.M, ris_T, refine=ris == "ps")
    budget = training_symbol_budget(ris_L, plan.ris_search.M, ris_T) if ris == "ps" else counted
    if cfg.N_t > 1:
        if user == "bs":
            u = 2 * int(math.log2(cfg.N_t))
            counted, budget = counted + u, budget + u
        else:
            uL = cfg.N_t // plan.user_search.M
            uT = plan.user_search.refine_count(uL)
            u = instrumented_symbol_count(uL, plan.user_search.M, uT, refine=user == "ps")
            counted += u
            budget += training_symbol_budget(uL, plan.user_search.M, uT) if user == "ps" else u
    return counted, budget


def trial_streams(master_seed, snr_index, trial_index):
    """Seed sequences for (channel and truth, measurement noise) of one trial."""
    ss = np.random.SeedSequence([master_seed, snr_index, trial_index])
    return ss.spawn(2)


def draw_trial(plan, rng):
    """Fading gains and true directions for one trial."""
    cfg = plan.scenario
    mu_ui = sample_rician(cfg.kappa_ui, rng)
    mu_ia = sample_rician(cfg.kappa_ia, rng)
    if plan.truth == "grid":
        target = build_grid(cfg.N_h).value(int(rng.integers(1, cfg.N_h + 1)))
        user = build_grid(cfg.N_t).value(int(rng.integers(1, cfg.N_t + 1)))
    else:
        target = float(rng.uniform(-1.0, 1.0))
        user = float(rng.uniform(-1.0, 1.0))
    real = ChannelRealization.from_angles(cfg, mu_ui, mu_ia)
    return real.replace(omega_i=wrap_mod2(real.omega_r - target), omega_u=user)


def run_scheme(plan, scheme, real, gamma, rng):
    """Two-phase training with one scheme; returns ``(ris_result, user_result)``."""
    cfg = plan.scenario
    ris, user = parse_scheme(scheme)
    if ris == "oracle":
        return oracle_result(cfg, real, gamma)
    r = run_ris_training(cfg, real, plan.ris_search, gamma, rng, refine=ris == "ps")
    if user == "bs":
        u = bs_search(cfg, real, r.chosen_vector, gamma, rng, plan.user_search.noise_enabled)
    else:
        u = run_user_training(cfg, real, r.chosen_vector, plan.user_search, gamma, rng,
                              refine=user == "ps")
    return r, u


def run_trial_block(plan, snr_index, start, stop):
    """
    Trials ``start..stop-1`` at one SNR point for every scheme.

    Returns arrays of shape ``(n_schemes, stop - start)``: RIS hit, user hit,
    rate, symbols.
    """
    cfg = plan.scenario
    snr_db = plan.snr_points[snr_index]
    gamma = gamma_for_snr(cfg, snr_db)
    grid_h, grid_t = build_grid(cfg.N_h), build_grid(cfg.N_t)
    n = stop - start
    k = len(plan.schemes)
    ris_ok = np.zeros((k, n), dtype=bool)
    user_ok = np.zeros((k, n), dtype=bool)
    rate = np.zeros((k, n))
    symbols = np.zeros((k, n), dtype=np.int64)
    for col, t in enumerate(range(start, stop)):
        channel_seed, noise_seed = trial_streams(plan.master_seed, snr_index, t)
        real = draw_trial(plan, np.random.default_rng(channel_seed))
        link = CascadeLink(cfg, real, gamma)
        opt_h = optimal_direction(grid_h, real.ris_direction)
        opt_t = optimal_direction(grid_t, real.omega_u)
        for row, scheme in enumerate(plan.schemes):
            try:
                r, u = run_scheme(plan, scheme, real, gamma, np.random.default_rng(noise_seed))
            except Exception as exc:
                raise RuntimeError(
                    f"trial {t} failed (scheme={scheme}, snr_db={snr_db}, "
                    f"seed={plan.master_seed}): {exc}") from exc
            eta = link.snr(r.chosen_vector, link.matched_xi_v(), u.chosen_vector)
            ris_ok[row, col] = r.chosen_index == opt_h
            user_ok[row, col] = cfg.N_t == 1 or u.chosen_index == opt_t
            rate[row, col] = achievable_rate(eta)
            symbols[row, col] = r.symbol_count + u.symbol_count
    return ris_ok, user_ok, rate, symbols


def _blocks(trials, size):
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


def run_monte_carlo(plan, workers=1, block_size=250):
    """
    Run every (SNR point, scheme) combination of ``plan``.

    Parameters
    ----------
    plan : ExperimentPlan
    workers : int
        Worker processes; the report does not depend on this value.
    block_size : int
        Trials per unit of work.

    Returns
    -------
    SweepReport
    """
    k, T = len(plan.schemes), plan.trials
    shape = (len(plan.snr_points), k, T)
    ris_ok = np.zeros(shape, dtype=bool)
    user_ok = np.zeros(shape, dtype=bool)
    rate = np.zeros(shape)
    symbols = np.zeros(shape, dtype=np.int64)
    jobs = [(i, a, b) for i in range(len(plan.snr_points)) for a, b in _blocks(T, block_size)]

    def store(job, out):
        i, a, b = job
        ris_ok[i, :, a:b], user_ok[i, :, a:b], rate[i, :, a:b], symbols[i, :, a:b] = out

    if k:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [(job, pool.submit(run_trial_block, plan, *job)) for job in jobs]
                for job, fut in futures:
                    store(job, fut.result())
        else:
            for job in jobs:
                store(job, run_trial_block(plan, *job))

    report = SweepReport()
    for i, snr_db in enumerate(plan.snr_points):
        for j, scheme in enumerate(plan.schemes):
            _, budget = scheme_symbols(plan, scheme)
            hits = ris_ok[i, j] & user_ok[i, j]
            report.rows.append(ReportRow(
                snr_db=float(snr_db), scheme=scheme,
                success_rate=float(np.mean(hits)),
                mean_rate=float(np.mean(rate[i, j])),
                trials=T, symbols=int(symbols[i, j].max()), seed=plan.master_seed,
                budget_symbols=budget,
                ris_success_rate=float(np.mean(ris_ok[i, j])),
                user_success_rate=float(np.mean(user_ok[i, j]))))
        logger.info("snr %.2f dB done", snr_db)
    return report


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _rounded(row):
    return {k: (float(f"{v:.6g}") if isinstance(v, float) else v) for k, v in asdict(row).items()}


def render_report(report, fmt="csv"):
    if fmt == "json":
        return json.dumps([_rounded(r) for r in report.rows], indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in report.rows:
        d = asdict(r)
        w.writerow([_fmt(d[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def emit_report(report, path, fmt="csv"):
    """Write ``report`` to ``path`` atomically; no partial file survives a failure."""
    text = render_report(report, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".report-", dir=directory)
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report(path, fmt=None):
    """Parse a report written by :func:`emit_report`."""
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    with open(path, newline="") as fh:
        if fmt == "json":
            records = json.load(fh)
        else:
            records = list(csv.DictReader(fh))
    ints = {"trials", "symbols", "seed", "budget_symbols"}
    rows = []
    for rec in records:
        vals = {}
        for f in CSV_FIELDS:
            v = rec[f]
            vals[f] = v if f == "scheme" else int(v) if f in ints else float(v)
        rows.append(ReportRow(**vals))
    return SweepReport(rows)
