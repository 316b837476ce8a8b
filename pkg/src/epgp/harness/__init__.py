"""Deterministic protocol simulation with scripted faults and adversaries."""

from .scenario import Action, Expectation, MessageSpec, Scenario, parse_scenario
from .simulator import (
    FuzzSummary,
    SimWorld,
    TranscriptReport,
    check_server_safety,
    fuzz_protocol,
    run_scenario,
)

__all__ = [
    "Action",
    "Expectation",
    "FuzzSummary",
    "MessageSpec",
    "Scenario",
    "SimWorld",
    "TranscriptReport",
    "check_server_safety",
    "fuzz_protocol",
    "parse_scenario",
    "run_scenario",
]
