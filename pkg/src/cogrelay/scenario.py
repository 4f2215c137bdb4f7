"""Scenario parameters, rate thresholds and the secondary power budget.

Powers are linear and normalized to the noise power.  In scenario files a
power may be given in dB relative to ``n0`` (so ``p_pt_db = 20`` with
``n0 = 1`` is 100).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

OMEGA_FIELDS = (
    "omega_pt_pd",
    "omega_st_pd",
    "omega_sr_pd",
    "omega_st_sd",
    "omega_pt_sd",
    "omega_st_sr",
    "omega_pt_sr",
    "omega_sr_sd",
)

POWER_FIELDS = ("p_pt", "p_pk")


class ScenarioError(ValueError):
    """Invalid or malformed scenario description."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class Binding(str, enum.Enum):
    PEAK = "peak"
    PRIMARY_OUTAGE = "primary_outage"
    ZERO = "zero"


@dataclass(frozen=True)
class ScenarioParams:
    omega_pt_pd: float
    omega_st_pd: float
    omega_sr_pd: float
    omega_st_sd: float
    omega_pt_sd: float
    omega_st_sr: float
    omega_pt_sr: float
    omega_sr_sd: float
    p_pt: float
    p_pk: float
    n0: float
    r_p: float
    r_s: float
    lambda_p: float
    n_relays: int

    def __post_init__(self):
        for name in OMEGA_FIELDS + POWER_FIELDS + ("n0", "r_p", "r_s"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ScenarioError(f"{name} must be a positive finite number, got {value!r}", name)
        if not 0.0 < self.lambda_p < 1.0:
            raise ScenarioError(f"lambda_p must lie in (0, 1), got {self.lambda_p!r}", "lambda_p")
        if isinstance(self.n_relays, bool) or int(self.n_relays) != self.n_relays or self.n_relays < 1:
            raise ScenarioError(f"n_relays must be an integer >= 1, got {self.n_relays!r}", "n_relays")
        object.__setattr__(self, "n_relays", int(self.n_relays))

    def replace(self, **changes) -> "ScenarioParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Thresholds:
    theta_p: float
    theta_s: float


@dataclass(frozen=True)
class PowerBudget:
    p_st: float
    p_sr: float
    st_binding: Binding
    sr_binding: Binding
    p_u_st: float
    p_u_sr: float


def reference_scenario(**overrides) -> ScenarioParams:
    """Reference parameter set used for the reference curves.

    P_PT = 20 dB, P_pk = 15 dB, lambda_p = 0.1 and N = 2 unless overridden.
    """
    base = dict(
        omega_st_sd=1.5,
        omega_pt_pd=1.0,
        omega_st_sr=1.0,
        omega_sr_sd=1.0,
        omega_pt_sr=0.5,
        omega_pt_sd=0.5,
        omega_st_pd=0.5,
        omega_sr_pd=0.5,
        n0=1.0,
        r_p=0.4,
        r_s=0.1,
        p_pt=db_to_linear(20.0),
        p_pk=db_to_linear(15.0),
        lambda_p=0.1,
        n_relays=2,
    )
    base.update(overrides)
    return ScenarioParams(**base)


def db_to_linear(db: float, reference: float = 1.0) -> float:
    return reference * 10.0 ** (db / 10.0)


def linear_to_db(value: float, reference: float = 1.0) -> float:
    return 10.0 * math.log10(value / reference)


def thresholds(params: ScenarioParams) -> Thresholds:
    # two time slots per secondary transmission, hence 2 * r_s
    return Thresholds(
        theta_p=2.0**params.r_p - 1.0,
        theta_s=2.0 ** (2.0 * params.r_s) - 1.0,
    )


def _unconstrained_power(params: ScenarioParams, omega_interferer_pd: float) -> float:
    """Power at which the average primary outage equals lambda_p (clamped at 0)."""
    theta_p = thresholds(params).theta_p
    snr_scale = params.omega_pt_pd * params.p_pt
    # solves primary_outage_given_power(P) = lambda_p for P
    factor = math.exp(-theta_p * params.n0 / snr_scale) / (1.0 - params.lambda_p) - 1.0
    if factor <= 0.0:
        return 0.0
    return snr_scale / (theta_p * omega_interferer_pd) * factor


def _combine(p_pk: float, p_u: float) -> tuple[float, Binding]:
    if p_u <= 0.0:
        return 0.0, Binding.ZERO
    if p_pk <= p_u:
        return p_pk, Binding.PEAK
    return p_u, Binding.PRIMARY_OUTAGE


def max_power_st(params: ScenarioParams) -> tuple[float, Binding]:
    """Secondary transmitter power min(P_pk, P_u,ST) and which cap binds."""
    return _combine(params.p_pk, _unconstrained_power(params, params.omega_st_pd))


def max_power_sr(params: ScenarioParams) -> tuple[float, Binding]:
    """Relay power min(P_pk, P_u,SR) and which cap binds."""
    return _combine(params.p_pk, _unconstrained_power(params, params.omega_sr_pd))


def power_budget(params: ScenarioParams) -> PowerBudget:
    p_st, st_binding = max_power_st(params)
    p_sr, sr_binding = max_power_sr(params)
    return PowerBudget(
        p_st=p_st,
        p_sr=p_sr,
        st_binding=st_binding,
        sr_binding=sr_binding,
        p_u_st=_unconstrained_power(params, params.omega_st_pd),
        p_u_sr=_unconstrained_power(params, params.omega_sr_pd),
    )


def primary_outage_given_power(
    params: ScenarioParams, p_secondary: float, omega_interferer_pd: float
) -> float:
    """Average primary outage when one secondary node transmits at ``p_secondary``."""
    if p_secondary < 0:
        raise ValueError("p_secondary must be non-negative")
    theta_p = thresholds(params).theta_p
    snr_scale = params.omega_pt_pd * params.p_pt
    no_interference = math.exp(-theta_p * params.n0 / snr_scale)
    return 1.0 - no_interference / (1.0 + theta_p * p_secondary * omega_interferer_pd / snr_scale)


# --- scenario files -------------------------------------------------------

SCENARIO_KEYS = frozenset(
    OMEGA_FIELDS
    + ("p_pt_db", "p_pt_linear", "p_pk_db", "p_pk_linear", "n0", "r_p", "r_s", "lambda_p", "n_relays")
)


def read_key_values(text: str, allowed: frozenset[str] | set[str]) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment.  Unknown keys are errors."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}", key)
        if key in out:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}", key)
        if not value:
            raise ScenarioError(f"line {lineno}: empty value for {key!r}", key)
        out[key] = value
    return out


def _number(values: dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise ScenarioError(f"{key}: not a number: {values[key]!r}", key) from None


def scenario_from_mapping(values: dict[str, str]) -> ScenarioParams:
    fields: dict[str, float | int] = {}
    for key in OMEGA_FIELDS + ("n0", "r_p", "r_s", "lambda_p"):
        if key not in values:
            raise ScenarioError(f"missing key {key!r}", key)
        fields[key] = _number(values, key)
    n0 = fields["n0"]
    if n0 <= 0:
        raise ScenarioError(f"n0 must be positive, got {n0!r}", "n0")
    for power in POWER_FIELDS:
        db_key, lin_key = f"{power}_db", f"{power}_linear"
        given = [k for k in (db_key, lin_key) if k in values]
        if len(given) != 1:
            raise ScenarioError(f"exactly one of {db_key!r} or {lin_key!r} is required", db_key)
        if given[0] == db_key:
            fields[power] = db_to_linear(_number(values, db_key), reference=n0)
        else:
            fields[power] = _number(values, lin_key)
    if "n_relays" not in values:
        raise ScenarioError("missing key 'n_relays'", "n_relays")
    try:
        fields["n_relays"] = int(values["n_relays"])
    except ValueError:
        raise ScenarioError(f"n_relays: not an integer: {values['n_relays']!r}", "n_relays") from None
    return ScenarioParams(**fields)


def parse_scenario(text: str) -> ScenarioParams:
    """Build ScenarioParams from a flat key-value scenario document."""
    return scenario_from_mapping(read_key_values(text, SCENARIO_KEYS))


def format_scenario(params: ScenarioParams) -> str:
    """Inverse of parse_scenario; powers are written in linear form so the round trip is exact."""
    lines = [f"{name} = {getattr(params, name)!r}" for name in OMEGA_FIELDS]
    lines += [
        f"p_pt_linear = {params.p_pt!r}",
        f"p_pk_linear = {params.p_pk!r}",
        f"n0 = {params.n0!r}",
        f"r_p = {params.r_p!r}",
        f"r_s = {params.r_s!r}",
        f"lambda_p = {params.lambda_p!r}",
        f"n_relays = {params.n_relays}",
    ]
    return "\n".join(lines) + "\n"
