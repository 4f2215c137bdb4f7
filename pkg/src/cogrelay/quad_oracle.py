"""Secondary outage by nested adaptive quadrature of the conditional integrals.

This is the reference the closed form is checked against, so it deliberately
shares nothing with ``specfun`` or ``closed_form``: it works from the
conditional distributions given the common interference gain Y = |h_PT-SD|^2,

    Pr(outage | y) = int_0^theta F_SD(theta - z | y) f_Z(z | y) dz,

with F_Z(z | y) = (1 - Pr(g_SR > z) Pr(g_RD > z | y))**N in product form, and
then averages over the exponential law of Y.  Both levels use QUADPACK's
adaptive Gauss-Kronrod rule with its embedded error estimate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from .scenario import PowerBudget, ScenarioParams, power_budget, thresholds


class Mode(str, enum.Enum):
    MRC_WITH_DIRECT = "mrc_with_direct"
    RELAY_ONLY = "relay_only"


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000
    # multiples of the mean interference gain; exp(-36.84) ~ 1e-16
    y_truncation: float | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def _quad(f, a, b, cfg: QuadConfig, what: str, points=None):
    # each breakpoint needs a subinterval of its own
    limit = max(cfg.max_subdivisions, len(points or ()) + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=limit,
            full_output=1, points=points or None,
        )
    value, error = out[0], out[1]
    if len(out) > 3:
        # ier=2 (roundoff) still returns a usable estimate as long as the reported error is tiny
        message = out[3]
        if "roundoff" not in message or error > max(cfg.abs_tol, 1e3 * cfg.rel_tol * abs(value)):
            raise QuadratureError(f"{what}: {message.strip()} (estimate {value!r}, error {error!r})")
    if not math.isfinite(value):
        raise QuadratureError(f"{what}: non-finite result {value!r}")
    return value, error


class _Conditional:
    """Conditional CDFs and densities given the interference gain y."""

    def __init__(self, params: ScenarioParams, budget: PowerBudget):
        self.params = params
        self.n_relays = params.n_relays
        self.theta = thresholds(params).theta_s
        self.n0 = params.n0
        self.p_pt = params.p_pt
        self.st_sr = params.omega_st_sr * budget.p_st
        self.sr_sd = params.omega_sr_sd * budget.p_sr
        self.st_sd = params.omega_st_sd * budget.p_st
        self.k_relay = params.omega_pt_sr * params.p_pt / self.st_sr

    def hop_survival(self, z: float, y: float) -> tuple[float, float]:
        """Pr(min(g_SR, g_RD) > z | y) and the hazard rate of that minimum at z."""
        dest_rate = (self.p_pt * y + self.n0) / self.sr_sd
        relay_denom = 1.0 + self.k_relay * z
        survival = math.exp(-z * (self.n0 / self.st_sr + dest_rate)) / relay_denom
        hazard = self.n0 / self.st_sr + dest_rate + self.k_relay / relay_denom
        return survival, hazard

    def cdf_z(self, z: float, y: float) -> float:
        survival, _ = self.hop_survival(z, y)
        return (1.0 - survival) ** self.n_relays

    def pdf_z(self, z: float, y: float) -> float:
        survival, hazard = self.hop_survival(z, y)
        n = self.n_relays
        return n * (1.0 - survival) ** (n - 1) * survival * hazard

    def length_scales(self, y: float) -> list[float]:
        """Decay lengths of f_Z near 0 and of the direct-link density near theta."""
        relay = 1.0 / (self.n0 / self.st_sr + (self.p_pt * y + self.n0) / self.sr_sd + self.k_relay)
        direct = self.st_sd / (self.p_pt * y + self.n0)
        return [relay, direct]

    def cdf_direct(self, x: float, y: float) -> float:
        return -math.expm1(-x * (self.p_pt * y + self.n0) / self.st_sd)


def _conditional_outage(cond: _Conditional, y: float, mode: Mode, cfg: QuadConfig) -> QuadResult:
    theta = cond.theta
    if theta == 0.0:
        return QuadResult(0.0, 0.0)
    if mode is Mode.RELAY_ONLY:
        return QuadResult(cond.cdf_z(theta, y), 0.0)

    def integrand(z):
        return cond.cdf_direct(theta - z, y) * cond.pdf_z(z, y)

    # breakpoints resolve the boundary layers that appear under heavy interference
    relay, direct = cond.length_scales(y)
    points = sorted(
        {p for k in (1.0, 10.0, 40.0) for p in (k * relay, theta - k * direct) if 0.0 < p < theta}
    )
    value, error = _quad(integrand, 0.0, theta, cfg, f"inner integral at y={y!r}", points)
    return QuadResult(value, error)


def conditional_outage_given_y(
    params: ScenarioParams,
    budget: PowerBudget,
    y: float,
    config: QuadConfig | None = None,
) -> float:
    """Pr(gamma_SD + Z < theta_s | |h_PT-SD|^2 = y) under the max-min relay bound."""
    if y < 0:
        raise ValueError("y must be non-negative")
    cfg = config or QuadConfig()
    if budget.p_st <= 0 or budget.p_sr <= 0:
        return 1.0
    return _conditional_outage(_Conditional(params, budget), float(y), Mode.MRC_WITH_DIRECT, cfg).value


def integrate_outage(
    params: ScenarioParams,
    mode: Mode = Mode.MRC_WITH_DIRECT,
    config: QuadConfig | None = None,
    budget: PowerBudget | None = None,
) -> QuadResult:
    """Outage averaged over the interference gain, with an error estimate.

    The reported error is the outer quadrature error plus the largest inner
    error (the weight integrates to at most one) plus the truncated tail.
    """
    cfg = config or QuadConfig()
    mode = Mode(mode)
    budget = budget or power_budget(params)
    if budget.p_st <= 0 or budget.p_sr <= 0:
        return QuadResult(1.0, 0.0)
    if thresholds(params).theta_s == 0.0:
        return QuadResult(0.0, 0.0)
    cond = _Conditional(params, budget)
    omega = params.omega_pt_sd
    y_max = omega * (cfg.y_truncation if cfg.y_truncation is not None else math.log(1e16))
    tail = math.exp(-y_max / omega)
    inner_err = [0.0]

    def outer(y):
        res = _conditional_outage(cond, y, mode, cfg)
        inner_err[0] = max(inner_err[0], res.error)
        return math.exp(-y / omega) / omega * res.value

    value, error = _quad(outer, 0.0, y_max, cfg, f"outer integral ({mode.value})")
    # conditional outage tends to one for large y
    return QuadResult(value + tail, error + inner_err[0] + tail)


def outage_by_quadrature(
    params: ScenarioParams,
    mode: Mode = Mode.MRC_WITH_DIRECT,
    config: QuadConfig | None = None,
) -> float:
    return integrate_outage(params, mode, config).value
