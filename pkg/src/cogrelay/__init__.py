"""Outage analysis of amplify-and-forward cognitive relays under primary interference."""

from .closed_form import ClosedFormResult, OutsideValidityRegion, Validity, secondary_outage_mrc
from .mc_sim import Combine, McConfig, OutageEstimate, SelectionRule, SinrModel, estimate_secondary_outage
from .quad_oracle import Mode, QuadConfig, outage_by_quadrature
from .scenario import ScenarioParams, reference_scenario, parse_scenario, power_budget, thresholds

__all__ = [
    "ClosedFormResult",
    "Combine",
    "McConfig",
    "Mode",
    "OutageEstimate",
    "OutsideValidityRegion",
    "QuadConfig",
    "ScenarioParams",
    "SelectionRule",
    "SinrModel",
    "Validity",
    "estimate_secondary_outage",
    "outage_by_quadrature",
    "reference_scenario",
    "parse_scenario",
    "power_budget",
    "secondary_outage_mrc",
    "thresholds",
]
