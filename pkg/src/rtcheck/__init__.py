"""Consistency checking of real-time requirements."""
from .consistency import (
    CONSISTENT,
    NONE_FOUND,
    WITNESS,
    Session,
    Verdict,
    check_eq2,
    check_partial,
    check_partial_rt,
    check_rt,
    confirm_witness,
    fails,
    ifails,
    isucc,
    succ,
)
from .logic import Requirement, RequirementSet, TimedAutomaton
from .parser import parse_requirements, parse_text
from .sup import SupRequirement, compile_sup

__version__ = "0.1.0"
