"""Closed-form secondary outage for direct link + best AF relay with MRC.

The outage under the max-min relay bound splits as ``P_o = I1 - I2 - I3``:

* ``I1`` is the relay-only outage E_Y[F_Z(theta_s | Y)], a finite binomial sum;
* ``I2`` and ``I3`` carry the direct-link contribution and reduce to the
  integrals

      J(k, j) = int_0^theta_s exp(-S z) / ((z + pi_1)**k (z + tau)**j) dz

  with (k, j) = (n, 1), (n + 1, 1) and (n, 2), evaluated by partial fractions
  into upper incomplete gamma and E_1 differences.

The partial-fraction reduction needs S > 0 and mu > 0 for every n.  Near-zero
S, mu or chi, and alternating sums that cancel by more than eight digits, are
handed to the quadrature engine instead (``Validity.DEGENERATE_FALLBACK``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .scenario import PowerBudget, ScenarioParams, power_budget, thresholds
from .specfun import e1_difference_scaled, gamma_difference_scaled

MAX_RELAYS = 60
DEGENERACY_TOL = 1e-9
CANCELLATION_LIMIT = 1e8


class Validity(str, enum.Enum):
    VALID = "valid"
    OUTSIDE_VALIDITY_REGION = "outside_validity_region"
    DEGENERATE_FALLBACK = "degenerate_fallback"


class OutsideValidityRegion(ArithmeticError):
    """S or mu is negative for some n; the closed form does not apply."""


class DegenerateConstants(ArithmeticError):
    """Removable singularity or severe cancellation; use quadrature instead."""


@dataclass(frozen=True)
class AuxConstants:
    n: int
    s_n: float
    mu_n: float
    tau_n: float
    pi_1: float
    chi_n: float
    degenerate: bool = False


@dataclass
class ClosedFormResult:
    i1: float
    i2: float
    i3: float
    outage_mrc: float
    outage_relay_only: float
    validity: Validity
    budget: PowerBudget
    per_n_terms: list[tuple[int, float, float, float]] = field(default_factory=list)


def binomial(n: int, k: int) -> int:
    if n > MAX_RELAYS:
        raise ValueError(f"relay count {n} exceeds the supported maximum of {MAX_RELAYS}")
    return math.comb(n, k)


def _link_scales(params: ScenarioParams, budget: PowerBudget) -> tuple[float, float, float]:
    """Mean received signal powers of the ST-SR, SR-SD and ST-SD hops."""
    return (
        params.omega_st_sr * budget.p_st,
        params.omega_sr_sd * budget.p_sr,
        params.omega_st_sd * budget.p_st,
    )


def aux_constants(params: ScenarioParams, budget: PowerBudget, n: int) -> AuxConstants:
    """S, mu, tau, pi_1 and chi = tau - pi_1 for binomial index ``n``."""
    if not 1 <= n <= params.n_relays:
        raise ValueError(f"n must lie in 1..{params.n_relays}, got {n}")
    if budget.p_st <= 0 or budget.p_sr <= 0:
        raise ValueError("auxiliary constants need strictly positive transmit powers")
    theta_s = thresholds(params).theta_s
    st_sr, sr_sd, st_sd = _link_scales(params, budget)
    interference_sd = params.omega_pt_sd * params.p_pt

    s_parts = (n * params.n0 / st_sr, n * params.n0 / sr_sd, params.n0 / st_sd)
    s = s_parts[0] + s_parts[1] - s_parts[2]
    mu_parts = (interference_sd * n / sr_sd, interference_sd / st_sd)
    mu = mu_parts[0] - mu_parts[1]
    pi_1 = st_sr / (params.omega_pt_sr * params.p_pt)
    tau = (interference_sd * theta_s / st_sd + 1.0) / mu if mu != 0.0 else math.inf
    chi = tau - pi_1

    def small(value, parts):
        return abs(value) < DEGENERACY_TOL * max(1.0, *(abs(p) for p in parts))

    degenerate = small(s, s_parts) or small(mu, mu_parts) or (
        math.isfinite(chi) and small(chi, (tau, pi_1))
    )
    return AuxConstants(n=n, s_n=s, mu_n=mu, tau_n=tau, pi_1=pi_1, chi_n=chi, degenerate=degenerate)


def validity_check(params: ScenarioParams, budget: PowerBudget) -> Validity:
    """VALID iff S > 0 and mu > 0 for every n in 1..N (tau > 0 then follows)."""
    for n in range(1, params.n_relays + 1):
        aux = aux_constants(params, budget, n)
        if not (aux.s_n > 0.0 and aux.mu_n > 0.0):
            return Validity.OUTSIDE_VALIDITY_REGION
    return Validity.VALID


def _guarded_sum(terms: list[float], what: str) -> float:
    total = math.fsum(terms)
    biggest = max((abs(t) for t in terms), default=0.0)
    if biggest > 0.0 and (total == 0.0 or biggest / abs(total) > CANCELLATION_LIMIT):
        raise DegenerateConstants(f"{what}: alternating sum cancels beyond {CANCELLATION_LIMIT:g}")
    return total


def _require_usable(aux: AuxConstants) -> None:
    if aux.degenerate:
        raise DegenerateConstants(f"near-zero S, mu or chi at n={aux.n}")
    if aux.s_n <= 0.0 or aux.mu_n <= 0.0:
        raise OutsideValidityRegion(f"S={aux.s_n:g}, mu={aux.mu_n:g} at n={aux.n}")


def _j_simple_pole(order: int, aux: AuxConstants, theta_s: float) -> float:
    """int_0^theta exp(-S z) / ((z + pi_1)**order (z + tau)) dz."""
    _require_usable(aux)
    s, pi_1, tau, chi = aux.s_n, aux.pi_1, aux.tau_n, aux.chi_n
    lo, hi = s * pi_1, s * (pi_1 + theta_s)
    terms = []
    for m in range(order - 1):
        k = order - m
        terms.append(
            (-1) ** m / chi ** (m + 1) * s ** (k - 1) * gamma_difference_scaled(1 - k, lo, hi)
        )
    terms.append((-1) ** (order - 1) / chi**order * e1_difference_scaled(lo, hi))
    terms.append((-1) ** order / chi**order * e1_difference_scaled(s * tau, s * (tau + theta_s)))
    return _guarded_sum(terms, f"J(order={order}, simple pole)")


def j21(n: int, aux: AuxConstants, theta_s: float) -> float:
    """int_0^theta exp(-S z) / ((z + pi_1)**n (z + tau)) dz."""
    return _j_simple_pole(n, aux, theta_s)


def j22(n: int, aux: AuxConstants, theta_s: float) -> float:
    """Same integral as j21 with the pi_1 pole raised to order n + 1."""
    return _j_simple_pole(n + 1, aux, theta_s)


def j3(n: int, aux: AuxConstants, theta_s: float) -> float:
    """int_0^theta exp(-S z) / ((z + pi_1)**n (z + tau)**2) dz.

    Partial fractions:
        1/(r^n (r+chi)^2) = sum_{m<n} (-1)^m (m+1) / (chi^(m+2) r^(n-m))
                            + 1/((-chi)^n (r+chi)^2) - n/((-chi)^(n+1) (r+chi))
    """
    _require_usable(aux)
    s, pi_1, tau, chi = aux.s_n, aux.pi_1, aux.tau_n, aux.chi_n
    lo, hi = s * pi_1, s * (pi_1 + theta_s)
    terms = []
    for m in range(n):
        k = n - m
        terms.append(
            (-1) ** m * (m + 1) / chi ** (m + 2) * s ** (k - 1)
            * gamma_difference_scaled(1 - k, lo, hi)
        )
    t_lo, t_hi = s * tau, s * (tau + theta_s)
    terms.append((-1) ** n / chi**n * s * gamma_difference_scaled(-1, t_lo, t_hi))
    terms.append((-1) ** n * n / chi ** (n + 1) * e1_difference_scaled(t_lo, t_hi))
    return _guarded_sum(terms, "J3")


def term_i1(params: ScenarioParams, budget: PowerBudget) -> float:
    """Relay-only outage E_Y[F_Z(theta_s | Y)] as a finite binomial sum."""
    theta_s = thresholds(params).theta_s
    st_sr, sr_sd, _ = _link_scales(params, budget)
    big_n = params.n_relays
    noise_rate = theta_s * params.n0 * (1.0 / st_sr + 1.0 / sr_sd)
    relay_interference = 1.0 + theta_s * params.omega_pt_sr * params.p_pt / st_sr
    dest_interference = theta_s * params.omega_pt_sd * params.p_pt / sr_sd
    terms = [
        binomial(big_n, n) * (-1) ** n * math.exp(-n * noise_rate)
        / (relay_interference**n * (1.0 + n * dest_interference))
        for n in range(big_n + 1)
    ]
    return _guarded_sum(terms, "I1")


def _direct_link_sums(params: ScenarioParams, budget: PowerBudget):
    """Per-n J values plus the assembled I2 and I3."""
    theta_s = thresholds(params).theta_s
    st_sr, sr_sd, st_sd = _link_scales(params, budget)
    big_n = params.n_relays
    lead = math.exp(-theta_s * params.n0 / st_sd)
    noise_sum = params.n0 * (1.0 / st_sr + 1.0 / sr_sd)
    i3_scale = params.omega_pt_sd * params.p_pt / sr_sd

    per_n = []
    i2_terms, i3_terms = [], []
    for n in range(1, big_n + 1):
        aux = aux_constants(params, budget, n)
        a21, a22, a3 = j21(n, aux, theta_s), j22(n, aux, theta_s), j3(n, aux, theta_s)
        per_n.append((n, a21, a22, a3))
        weight = n * binomial(big_n, n) * (-1) ** (n + 1) * aux.pi_1**n
        i2_terms.append(weight / aux.mu_n * (noise_sum * a21 + a22))
        i3_terms.append(weight / aux.mu_n**2 * a3)
    i2 = lead * _guarded_sum(i2_terms, "I2")
    i3 = i3_scale * lead * _guarded_sum(i3_terms, "I3")
    return per_n, i2, i3


def term_i2(params: ScenarioParams, budget: PowerBudget) -> float:
    return _direct_link_sums(params, budget)[1]


def term_i3(params: ScenarioParams, budget: PowerBudget) -> float:
    return _direct_link_sums(params, budget)[2]


def _fallback(params: ScenarioParams, budget: PowerBudget) -> ClosedFormResult:
    from .quad_oracle import Mode, outage_by_quadrature

    mrc = outage_by_quadrature(params, Mode.MRC_WITH_DIRECT)
    try:
        i1 = term_i1(params, budget)
    except DegenerateConstants:
        i1 = outage_by_quadrature(params, Mode.RELAY_ONLY)
    return ClosedFormResult(
        i1=i1,
        i2=math.nan,
        i3=math.nan,
        outage_mrc=mrc,
        outage_relay_only=i1,
        validity=Validity.DEGENERATE_FALLBACK,
        budget=budget,
    )


def secondary_outage_mrc(params: ScenarioParams, *, allow_fallback: bool = True) -> ClosedFormResult:
    """Closed-form outage I1 - I2 - I3 for the scenario.

    Raises OutsideValidityRegion when S or mu is negative for some n.  With
    ``allow_fallback`` (the default) degenerate constants are replaced by the
    quadrature value and labelled ``DEGENERATE_FALLBACK``; otherwise
    DegenerateConstants propagates.
    """
    budget = power_budget(params)
    if budget.p_st <= 0.0 or budget.p_sr <= 0.0:
        # nothing may be transmitted: always in outage
        return ClosedFormResult(1.0, 0.0, 0.0, 1.0, 1.0, Validity.VALID, budget)
    if thresholds(params).theta_s == 0.0:
        return ClosedFormResult(0.0, 0.0, 0.0, 0.0, 0.0, Validity.VALID, budget)

    auxes = [aux_constants(params, budget, n) for n in range(1, params.n_relays + 1)]
    degenerate = any(a.degenerate for a in auxes)
    if not degenerate and validity_check(params, budget) is Validity.OUTSIDE_VALIDITY_REGION:
        bad = next(a for a in auxes if not (a.s_n > 0 and a.mu_n > 0))
        raise OutsideValidityRegion(
            f"closed form needs S > 0 and mu > 0; n={bad.n} gives S={bad.s_n:.6g}, mu={bad.mu_n:.6g}"
        )
    try:
        if degenerate:
            raise DegenerateConstants("near-zero auxiliary constant")
        i1 = term_i1(params, budget)
        per_n, i2, i3 = _direct_link_sums(params, budget)
    except DegenerateConstants:
        if not allow_fallback:
            raise
        return _fallback(params, budget)
    return ClosedFormResult(
        i1=i1,
        i2=i2,
        i3=i3,
        outage_mrc=i1 - i2 - i3,
        outage_relay_only=i1,
        validity=Validity.VALID,
        budget=budget,
        per_n_terms=per_n,
    )
