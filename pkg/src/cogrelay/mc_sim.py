"""Seeded Monte Carlo estimates of secondary and primary outage.

Random stream layout
--------------------
Samples are grouped in fixed blocks of ``BLOCK_SIZE``.  Block ``b`` of stream
``s`` is generated by a Philox counter-based generator keyed with
``(seed, s)`` whose counter starts at ``b << 192``; the block's uniforms are
drawn as one row-major ``(BLOCK_SIZE, n_columns)`` array and sample ``i`` uses
row ``i % BLOCK_SIZE`` of block ``i // BLOCK_SIZE``.  The variates of a sample
therefore depend only on ``(seed, stream, i)``, so estimates do not change with
the number of workers.

Streams: 0 for the secondary network, 1 for primary-outage checks.  Secondary
columns are ``pt_pd, st_pd, st_sd, pt_sd`` followed by ``sr_pd, st_sr, pt_sr,
sr_sd`` for each relay.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .scenario import PowerBudget, ScenarioParams, power_budget, thresholds

BLOCK_SIZE = 1 << 16
Z_95 = 1.959963984540054

SECONDARY_STREAM = 0
PRIMARY_STREAM = 1


class SinrModel(str, enum.Enum):
    EXACT_HARMONIC = "exact_harmonic"
    MAX_MIN_BOUND = "max_min_bound"


class Combine(str, enum.Enum):
    MRC_WITH_DIRECT = "mrc_with_direct"
    RELAY_ONLY = "relay_only"
    DIRECT_ONLY = "direct_only"


class SelectionRule(str, enum.Enum):
    BY_EXACT = "by_exact"
    BY_BOUND = "by_bound"


_OWN_RULE = {SinrModel.EXACT_HARMONIC: SelectionRule.BY_EXACT, SinrModel.MAX_MIN_BOUND: SelectionRule.BY_BOUND}


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 42
    sinr_model: SinrModel = SinrModel.MAX_MIN_BOUND
    combine: Combine = Combine.MRC_WITH_DIRECT
    selection_rule: SelectionRule | None = None
    workers: int = 1
    check_bound: bool = False
    # fixes |h_PT-SD|^2 for conditional estimates
    pin_pt_sd: float | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "sinr_model", SinrModel(self.sinr_model))
        object.__setattr__(self, "combine", Combine(self.combine))
        rule = self.selection_rule
        object.__setattr__(
            self, "selection_rule", _OWN_RULE[self.sinr_model] if rule is None else SelectionRule(rule)
        )


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    samples: int
    seed: int
    outages: int

    @property
    def std_error(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.samples)

    def contains(self, value: float, n_se: float = 3.0) -> bool:
        """True if ``value`` lies within ``n_se`` standard errors of the estimate."""
        return abs(value - self.p_hat) <= n_se * self.std_error


@dataclass
class ChannelDraw:
    """Exponential channel power gains; relay arrays have shape (samples, N)."""

    pt_pd: np.ndarray
    st_pd: np.ndarray
    st_sd: np.ndarray
    pt_sd: np.ndarray
    sr_pd: np.ndarray
    st_sr: np.ndarray
    pt_sr: np.ndarray
    sr_sd: np.ndarray


def wilson_interval(outages: int, samples: int, z: float = Z_95) -> tuple[float, float]:
    p = outages / samples
    z2n = z * z / samples
    centre = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / samples + z2n / (4.0 * samples)) / (1.0 + z2n)
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def make_estimate(outages: int, samples: int, seed: int) -> OutageEstimate:
    lo, hi = wilson_interval(outages, samples)
    return OutageEstimate(
        p_hat=outages / samples, ci_low=lo, ci_high=hi, samples=samples, seed=seed, outages=outages
    )


def block_uniforms(seed: int, stream: int, block: int, rows: int, columns: int) -> np.ndarray:
    """Uniforms on (0, 1] for the first ``rows`` samples of one block."""
    key = np.array([seed, stream], dtype=np.uint64)
    bitgen = np.random.Philox(key=key, counter=np.array([0, 0, 0, block], dtype=np.uint64))
    return 1.0 - np.random.Generator(bitgen).random((rows, columns))


def _blocks(first: int, count: int):
    """(block, row offset, rows) triples covering samples [first, first + count)."""
    end = first + count
    i = first
    while i < end:
        block, offset = divmod(i, BLOCK_SIZE)
        rows = min(BLOCK_SIZE - offset, end - i)
        yield block, offset, rows
        i += rows


def _uniform_rows(seed: int, stream: int, first: int, count: int, columns: int) -> np.ndarray:
    parts = []
    for block, offset, rows in _blocks(first, count):
        parts.append(block_uniforms(seed, stream, block, offset + rows, columns)[offset:])
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def channels_from_uniforms(params: ScenarioParams, u: np.ndarray) -> ChannelDraw:
    n = params.n_relays
    gains = -np.log(u)
    relay = gains[:, 4:].reshape(-1, n, 4)
    return ChannelDraw(
        pt_pd=params.omega_pt_pd * gains[:, 0],
        st_pd=params.omega_st_pd * gains[:, 1],
        st_sd=params.omega_st_sd * gains[:, 2],
        pt_sd=params.omega_pt_sd * gains[:, 3],
        sr_pd=params.omega_sr_pd * relay[:, :, 0],
        st_sr=params.omega_st_sr * relay[:, :, 1],
        pt_sr=params.omega_pt_sr * relay[:, :, 2],
        sr_sd=params.omega_sr_sd * relay[:, :, 3],
    )


def draw_channels(params: ScenarioParams, seed: int, first: int = 0, count: int = 1) -> ChannelDraw:
    """Channel gains of samples ``first .. first + count - 1`` of the secondary stream."""
    u = _uniform_rows(seed, SECONDARY_STREAM, first, count, 4 + 4 * params.n_relays)
    return channels_from_uniforms(params, u)


def end_to_end_sinr(
    draw: ChannelDraw,
    params: ScenarioParams,
    budget: PowerBudget,
    model: SinrModel = SinrModel.MAX_MIN_BOUND,
    combine: Combine = Combine.MRC_WITH_DIRECT,
    selection_rule: SelectionRule | None = None,
    check_bound: bool = False,
) -> np.ndarray:
    """Combined SINR at the secondary destination, one value per sample.

    The direct link and every relay-to-destination hop share the same
    ``pt_sd`` interference gain.  The relay maximizing the ``selection_rule``
    metric is chosen and scored with ``model``.
    """
    model = SinrModel(model)
    combine = Combine(combine)
    rule = _OWN_RULE[model] if selection_rule is None else SelectionRule(selection_rule)

    dest_denominator = params.p_pt * draw.pt_sd + params.n0
    g_sd = budget.p_st * draw.st_sd / dest_denominator
    if combine is Combine.DIRECT_ONLY:
        return g_sd

    g_sr = budget.p_st * draw.st_sr / (params.p_pt * draw.pt_sr + params.n0)
    g_rd = budget.p_sr * draw.sr_sd / dest_denominator[:, None]
    harmonic = g_sr * g_rd / (1.0 + g_sr + g_rd)
    bound = np.minimum(g_sr, g_rd)
    if check_bound:
        assert np.all(harmonic <= bound), "harmonic SINR exceeded the max-min bound"

    metric = harmonic if rule is SelectionRule.BY_EXACT else bound
    scored = harmonic if model is SinrModel.EXACT_HARMONIC else bound
    best = np.argmax(metric, axis=1)
    relay_term = np.take_along_axis(scored, best[:, None], axis=1)[:, 0]
    if combine is Combine.RELAY_ONLY:
        return relay_term
    return g_sd + relay_term


def _secondary_block_count(params, budget, mc: McConfig, theta_s: float, block, offset, rows) -> int:
    columns = 4 + 4 * params.n_relays
    u = block_uniforms(mc.seed, SECONDARY_STREAM, block, offset + rows, columns)[offset:]
    draw = channels_from_uniforms(params, u)
    if mc.pin_pt_sd is not None:
        draw.pt_sd = np.full_like(draw.pt_sd, mc.pin_pt_sd)
    sinr = end_to_end_sinr(draw, params, budget, mc.sinr_model, mc.combine, mc.selection_rule)
    if mc.check_bound and mc.combine is not Combine.DIRECT_ONLY:
        exact = end_to_end_sinr(draw, params, budget, SinrModel.EXACT_HARMONIC, mc.combine,
                                mc.selection_rule, check_bound=True)
        bound = end_to_end_sinr(draw, params, budget, SinrModel.MAX_MIN_BOUND, mc.combine,
                                mc.selection_rule)
        assert np.all(exact <= bound), "combined exact SINR exceeded the bound"
    return int(np.count_nonzero(sinr < theta_s))


def _run_blocks(fn, mc: McConfig) -> int:
    jobs = list(_blocks(0, mc.samples))
    if mc.workers == 1:
        return sum(fn(*job) for job in jobs)
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        return sum(pool.map(lambda job: fn(*job), jobs))


def estimate_secondary_outage(params: ScenarioParams, mc: McConfig | None = None) -> OutageEstimate:
    """Fraction of samples whose combined SINR falls below theta_s."""
    mc = mc or McConfig()
    budget = power_budget(params)
    theta_s = thresholds(params).theta_s

    def count(block, offset, rows):
        return _secondary_block_count(params, budget, mc, theta_s, block, offset, rows)

    return make_estimate(_run_blocks(count, mc), mc.samples, mc.seed)


def estimate_primary_outage(
    params: ScenarioParams,
    p_secondary: float,
    omega_interferer_pd: float,
    mc: McConfig | None = None,
) -> OutageEstimate:
    """Empirical Pr(log2(1 + SINR_PD) < R_p) with one secondary interferer."""
    if p_secondary < 0:
        raise ValueError("p_secondary must be non-negative")
    mc = mc or McConfig()
    theta_p = thresholds(params).theta_p

    def count(block, offset, rows):
        u = block_uniforms(mc.seed, PRIMARY_STREAM, block, offset + rows, 2)[offset:]
        g = -np.log(u)
        signal = params.p_pt * params.omega_pt_pd * g[:, 0]
        interference = p_secondary * omega_interferer_pd * g[:, 1]
        return int(np.count_nonzero(signal / (interference + params.n0) < theta_p))

    return make_estimate(_run_blocks(count, mc), mc.samples, mc.seed)
